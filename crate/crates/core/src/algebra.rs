//! Generated matrix algebras, the anti-Hermitian span test and irreducibility.

use crate::error::{invalid, Error, Result};
use crate::frames::{PairObjective, PairSearch, PairTerm};
use crate::linalg::{self, CMat, CVec, C64, I};
use crate::operators::{JumpSet, LindbladModel, Operator};
use crate::superop::HermitianBasis;

/// Residual norm (of a unit-normalized candidate) above which it counts as new.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    dim: usize,
    generators: Vec<Operator>,
}

impl GeneratorSet {
    pub fn new(dim: usize, generators: Vec<Operator>) -> Result<Self> {
        if generators.is_empty() {
            return Err(invalid("generators", "must be nonempty"));
        }
        for g in &generators {
            if g.nrows() != dim || g.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    context: "generator set",
                    expected: dim,
                    found: g.nrows(),
                });
            }
        }
        Ok(Self { dim, generators })
    }

    /// `{L_j} ∪ {L_j†}`.
    pub fn with_adjoints(jumps: &JumpSet) -> Result<Self> {
        let mut g: Vec<Operator> = jumps.jumps().to_vec();
        g.extend(jumps.jumps().iter().map(|l| l.adjoint()));
        Self::new(jumps.dim(), g)
    }

    pub fn jumps_only(jumps: &JumpSet) -> Result<Self> {
        Self::new(jumps.dim(), jumps.jumps().to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Operator] {
        &self.generators
    }
}

/// Incrementally grown orthonormal basis of a subspace of `C^{d²}`.
struct Span {
    vecs: Vec<CVec>,
}

impl Span {
    fn new() -> Self {
        Self { vecs: Vec::new() }
    }

    fn residual(&self, m: &Operator) -> Option<CVec> {
        let n = linalg::frobenius(m);
        if n == 0.0 {
            return None;
        }
        let mut v = linalg::vectorize(m) / C64::new(n, 0.0);
        for _ in 0..2 {
            for b in &self.vecs {
                let c = b.dotc(&v);
                v -= b * c;
            }
        }
        let r = v.norm();
        (r > RANK_TOL).then(|| v / C64::new(r, 0.0))
    }

    fn try_add(&mut self, m: &Operator) -> bool {
        match self.residual(m) {
            Some(v) => {
                self.vecs.push(v);
                true
            }
            None => false,
        }
    }

    fn len(&self) -> usize {
        self.vecs.len()
    }
}

/// Dimension of the unital associative algebra generated by `g`.
///
/// Seeds the span with `I` and the (unit-Frobenius) generators, then each
/// round multiplies the newly found elements with everything found so far,
/// in both orders, until the span stops growing.
pub fn generated_algebra_dim(g: &GeneratorSet, max_rounds: usize) -> Result<usize> {
    let d = g.dim();
    let full = d * d;
    let mut span = Span::new();
    let mut elements: Vec<Operator> = Vec::new();
    let push = |m: Operator, span: &mut Span, elements: &mut Vec<Operator>| {
        if let Some(v) = span.residual(&m) {
            span.vecs.push(v.clone());
            elements.push(linalg::unvectorize(&v, d));
        }
    };
    push(linalg::identity(d), &mut span, &mut elements);
    for gen in g.generators() {
        push(gen.clone(), &mut span, &mut elements);
    }
    let mut fresh_start = 0;
    for _ in 0..max_rounds {
        if span.len() == full {
            return Ok(full);
        }
        let fresh_end = elements.len();
        let mut added = false;
        for i in fresh_start..fresh_end {
            for j in 0..fresh_end {
                for prod in [&elements[i] * &elements[j], &elements[j] * &elements[i]] {
                    let before = span.len();
                    push(prod, &mut span, &mut elements);
                    added |= span.len() > before;
                    if span.len() == full {
                        return Ok(full);
                    }
                }
            }
        }
        if !added {
            return Ok(span.len());
        }
        fresh_start = fresh_end;
    }
    Err(Error::NotConverged(format!(
        "algebra span did not stabilize within {max_rounds} rounds"
    )))
}

/// Enough rounds for any dimension: the span at least doubles in word length per round.
pub fn default_rounds(dim: usize) -> usize {
    2 * (usize::BITS - (dim * dim).leading_zeros()) as usize + 4
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpanReport {
    pub spans: bool,
    /// Number of traceless anti-Hermitian directions outside the span.
    pub missing: usize,
    /// `|u⟩⟨v| - |v⟩⟨u|` orthogonal to every `L_j`, `L_j†`, when one was found.
    pub witness: Option<Operator>,
}

/// Whether the complex span of `{L_j, L_j†}` contains every traceless
/// anti-Hermitian operator.
///
/// The span is closed under `†`, so the test reduces to a real rank count on
/// the traceless anti-Hermitian directions `i·e_k`.
pub fn spans_antihermitian(jumps: &JumpSet) -> SpanReport {
    let d = jumps.dim();
    let mut span = Span::new();
    for l in jumps.jumps() {
        span.try_add(l);
        span.try_add(&l.adjoint());
    }
    let basis = HermitianBasis::standard(d);
    let missing = basis.elements()[1..]
        .iter()
        .filter(|e| span.residual(&(*e * I)).is_some())
        .count();
    if missing == 0 {
        return SpanReport {
            spans: true,
            missing,
            witness: None,
        };
    }
    SpanReport {
        spans: false,
        missing,
        witness: find_witness(jumps),
    }
}

fn find_witness(jumps: &JumpSet) -> Option<Operator> {
    let d = jumps.dim();
    if d < 2 {
        return None;
    }
    // ⟨M, |u⟩⟨v| - |v⟩⟨u|⟩ = ⟨v|M†|u⟩ - ⟨u|M†|v⟩ for each generator M.
    let mut terms = Vec::new();
    for l in jumps.jumps() {
        for m in [l.clone(), l.adjoint()] {
            let md = m.adjoint();
            terms.push(PairTerm {
                a: Some(md.clone()),
                b: Some(-md),
            });
        }
    }
    let witness_from = |u: &CVec, v: &CVec| -> CMat { u * v.adjoint() - v * u.adjoint() };
    if terms.is_empty() {
        let (u, v) = (
            crate::operators::named::ket(d, 0),
            crate::operators::named::ket(d, 1),
        );
        return Some(witness_from(&u, &v));
    }
    let obj = PairObjective::new(d, terms);
    let best = obj.minimize(PairSearch {
        restarts: 32,
        seed: 0,
        max_iter: 2000,
    });
    (best.value <= 1e-12 * obj.scale().max(1.0)).then(|| witness_from(&best.u, &best.v))
}

/// Irreducible at time `t`: `{L_j} ∪ {iH(t) + ½ Σ L_j† L_j}` generates the full algebra.
pub fn is_irreducible(model: &LindbladModel, t: f64) -> Result<bool> {
    let d = model.dim();
    let drift = model.hamiltonian_at(t) * I + model.jumps().loss_operator() * C64::new(0.5, 0.0);
    let mut gens = model.jumps().jumps().to_vec();
    gens.push(drift);
    let g = GeneratorSet::new(d, gens)?;
    Ok(generated_algebra_dim(&g, default_rounds(d))? == d * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::named::*;
    use crate::operators::HamiltonianSchedule;

    fn dim_of(gens: Vec<Operator>) -> usize {
        let d = gens[0].nrows();
        generated_algebra_dim(&GeneratorSet::new(d, gens).unwrap(), 20).unwrap()
    }

    #[test]
    fn diagonal_generator_gives_commutative_algebra() {
        assert_eq!(dim_of(vec![sigma_z()]), 2);
    }

    #[test]
    fn two_paulis_generate_everything() {
        assert_eq!(dim_of(vec![sigma_x(), sigma_y()]), 4);
    }

    #[test]
    fn non_normal_jump_with_adjoint_is_full() {
        let l = sigma_z() + sigma_minus() * C64::new(2.0, 0.0);
        assert_eq!(dim_of(vec![l.clone(), l.adjoint()]), 4);
        // Alone it squares to the identity.
        assert_eq!(dim_of(vec![l]), 2);
    }

    #[test]
    fn empty_generators_rejected() {
        assert!(GeneratorSet::new(2, vec![]).is_err());
    }

    #[test]
    fn round_budget_exhaustion_reported() {
        // A single ladder step in d=4 needs several rounds to reach the full algebra.
        let mut l = linalg::zeros(4);
        for j in 1..4 {
            l[(j - 1, j)] = C64::new(1.0, 0.0);
        }
        let g = GeneratorSet::new(4, vec![l.clone(), l.adjoint()]).unwrap();
        assert!(generated_algebra_dim(&g, 0).is_err());
        assert_eq!(generated_algebra_dim(&g, 20).unwrap(), 16);
    }

    #[test]
    fn matrix_units_span() {
        let mut jumps = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                jumps.push(unit(3, i, j));
            }
        }
        let r = spans_antihermitian(&JumpSet::new(3, jumps).unwrap());
        assert!(r.spans);
        assert!(r.witness.is_none());
    }

    #[test]
    fn single_pauli_does_not_span() {
        let r = spans_antihermitian(&JumpSet::new(2, vec![sigma_z()]).unwrap());
        assert!(!r.spans);
        assert_eq!(r.missing, 2);
        let w = r.witness.expect("witness");
        assert!(linalg::max_abs_diff(&w, &(-w.adjoint())) < 1e-10);
        // Orthogonal to σz, so it lies in the σx/σy directions.
        assert!(linalg::hs_inner(&sigma_z(), &w).norm() < 1e-8);
        assert!(w[(0, 0)].norm() < 1e-8 && w[(1, 1)].norm() < 1e-8);
    }

    #[test]
    fn depolarizing_spans() {
        let r = spans_antihermitian(&JumpSet::new(2, vec![sigma_x(), sigma_y(), sigma_z()]).unwrap());
        assert!(r.spans);
    }

    #[test]
    fn irreducibility_examples() {
        let m = LindbladModel::new(
            JumpSet::new(2, vec![sigma_z()]).unwrap(),
            HamiltonianSchedule::Constant(sigma_x()),
        )
        .unwrap();
        assert!(is_irreducible(&m, 0.0).unwrap());

        let l = sigma_z() + sigma_minus() * C64::new(2.0, 0.0);
        let m = LindbladModel::new(
            JumpSet::new(2, vec![l]).unwrap(),
            HamiltonianSchedule::Constant(sigma_y()),
        )
        .unwrap();
        assert!(!is_irreducible(&m, 0.0).unwrap());

        let m = LindbladModel::dissipative(JumpSet::new(2, vec![sigma_minus()]).unwrap());
        assert!(!is_irreducible(&m, 0.0).unwrap());
    }
}
