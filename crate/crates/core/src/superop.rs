//! Superoperators as `d² × d²` matrices acting on column-stacked operators,
//! their spectra, fixed points, and the symmetrized projected dissipator.

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMat, CVec, RMat, C64, I, ONE};
use crate::operators::{
    self, dissipator_adjoint_apply, dissipator_apply, is_psd, JumpSet, LindbladModel, Operator,
    MAX_DIM,
};

/// Relative singular-value threshold for counting fixed points.
pub const FIXED_POINT_TOL: f64 = 1e-9;
/// Eigenvalues with `|λ| < ZERO_EIGENVALUE_TOL · ‖S‖_F` count as zero.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SuperMatrix {
    dim: usize,
    mat: CMat,
}

impl SuperMatrix {
    pub fn from_matrix(dim: usize, mat: CMat) -> Result<Self> {
        let n = dim * dim;
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "superoperator",
                expected: n,
                found: mat.nrows(),
            });
        }
        Ok(Self { dim, mat })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            mat: CMat::zeros(dim * dim, dim * dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            mat: CMat::identity(dim * dim, dim * dim),
        }
    }

    /// Matrix of an arbitrary linear map, built column by column from matrix units.
    pub fn from_map(dim: usize, f: impl Fn(&Operator) -> Operator) -> Self {
        let n = dim * dim;
        let mut mat = CMat::zeros(n, n);
        for col in 0..n {
            let mut e = linalg::zeros(dim);
            e[(col % dim, col / dim)] = ONE;
            let out = linalg::vectorize(&f(&e));
            mat.set_column(col, &out);
        }
        Self { dim, mat }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn apply(&self, x: &Operator) -> Operator {
        linalg::unvectorize(&(&self.mat * linalg::vectorize(x)), self.dim)
    }

    /// Adjoint with respect to the Hilbert-Schmidt inner product.
    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            mat: self.mat.adjoint(),
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            mat: &self.mat * &other.mat,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            mat: &self.mat + &other.mat,
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            mat: &self.mat * s,
        }
    }

    pub fn frobenius(&self) -> f64 {
        linalg::frobenius(&self.mat)
    }
}

fn guard(dim: usize) -> Result<()> {
    if dim > MAX_DIM {
        return Err(Error::DimensionTooLarge { dim, max: MAX_DIM });
    }
    Ok(())
}

/// `X ↦ [M, X]` as `I ⊗ M - Mᵀ ⊗ I`.
pub fn commutator_superop(m: &Operator) -> SuperMatrix {
    let d = m.nrows();
    let id = linalg::identity(d);
    SuperMatrix {
        dim: d,
        mat: linalg::kron(&id, m) - linalg::kron(&m.transpose(), &id),
    }
}

/// `X ↦ -i[H, X]`.
pub fn hamiltonian_superop(h: &Operator) -> SuperMatrix {
    commutator_superop(h).scale(-I)
}

/// `Σ_j conj(L_j) ⊗ L_j - ½ I ⊗ L_j†L_j - ½ (L_j†L_j)ᵀ ⊗ I`.
pub fn dissipator_superop(jumps: &JumpSet) -> SuperMatrix {
    let d = jumps.dim();
    let id = linalg::identity(d);
    let half = C64::new(0.5, 0.0);
    let mut mat = CMat::zeros(d * d, d * d);
    for l in jumps.jumps() {
        let ldl = l.adjoint() * l;
        mat += linalg::kron(&l.map(|z| z.conj()), l);
        mat -= (linalg::kron(&id, &ldl) + linalg::kron(&ldl.transpose(), &id)) * half;
    }
    SuperMatrix { dim: d, mat }
}

pub fn build_superoperator(model: &LindbladModel, t: f64) -> Result<SuperMatrix> {
    guard(model.dim())?;
    if t < 0.0 {
        return Err(invalid("t", "must be non-negative"));
    }
    let mut s = dissipator_superop(model.jumps());
    if !matches!(model.hamiltonian(), operators::HamiltonianSchedule::Zero) {
        s = s.add(&hamiltonian_superop(&model.hamiltonian_at(t)));
    }
    Ok(s)
}

/// `Δ(X) = X - tr(X) I/d`.
pub fn traceless_projector(dim: usize) -> SuperMatrix {
    let n = dim * dim;
    let vid = linalg::vectorize(&linalg::identity(dim));
    let mat = CMat::identity(n, n) - (&vid * vid.adjoint()) / C64::new(dim as f64, 0.0);
    SuperMatrix { dim, mat }
}

/// Orthonormal basis of the Hermitian operators (Hilbert-Schmidt inner product).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianBasis {
    dim: usize,
    elements: Vec<Operator>,
}

impl HermitianBasis {
    /// Generalized Gell-Mann basis with `I/√d` first, then the traceless
    /// diagonal elements, then `(|j⟩⟨k| + |k⟩⟨j|)/√2` and
    /// `i(|j⟩⟨k| - |k⟩⟨j|)/√2` for `j < k`.
    pub fn standard(dim: usize) -> Self {
        let df = dim as f64;
        let mut elements = Vec::with_capacity(dim * dim);
        elements.push(linalg::identity(dim) / C64::new(df.sqrt(), 0.0));
        for k in 1..dim {
            let norm = ((k * (k + 1)) as f64).sqrt();
            let mut e = linalg::zeros(dim);
            for j in 0..k {
                e[(j, j)] = C64::new(1.0 / norm, 0.0);
            }
            e[(k, k)] = C64::new(-(k as f64) / norm, 0.0);
            elements.push(e);
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for j in 0..dim {
            for k in (j + 1)..dim {
                let mut sym = linalg::zeros(dim);
                sym[(j, k)] = C64::new(s, 0.0);
                sym[(k, j)] = C64::new(s, 0.0);
                elements.push(sym);
                let mut asym = linalg::zeros(dim);
                asym[(j, k)] = C64::new(0.0, s);
                asym[(k, j)] = C64::new(0.0, -s);
                elements.push(asym);
            }
        }
        Self { dim, elements }
    }

    /// Validate a user-supplied basis: `d²` Hermitian, orthonormal elements.
    pub fn from_elements(dim: usize, elements: Vec<Operator>) -> Result<Self> {
        if elements.len() != dim * dim {
            return Err(invalid("basis", format!("need {} elements", dim * dim)));
        }
        for (i, a) in elements.iter().enumerate() {
            if a.nrows() != dim || !operators::is_hermitian(a, 1e-12) {
                return Err(invalid("basis", format!("element {i} is not a Hermitian {dim}x{dim} matrix")));
            }
            for (j, b) in elements.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                if (linalg::hs_inner(a, b) - C64::new(target, 0.0)).norm() > 1e-12 {
                    return Err(invalid("basis", format!("elements {i} and {j} are not orthonormal")));
                }
            }
        }
        Ok(Self { dim, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    /// Real coordinates `⟨e_a, X⟩` of a Hermitian operator.
    pub fn coordinates(&self, x: &Operator) -> Vec<f64> {
        self.elements
            .iter()
            .map(|e| linalg::hs_inner(e, x).re)
            .collect()
    }

    pub fn assemble(&self, coords: &[f64]) -> Operator {
        let mut out = linalg::zeros(self.dim);
        for (e, &c) in self.elements.iter().zip(coords) {
            out += e * C64::new(c, 0.0);
        }
        out
    }

    /// True when element 0 is `I/√d`.
    pub fn identity_first(&self) -> bool {
        let id = linalg::identity(self.dim) / C64::new((self.dim as f64).sqrt(), 0.0);
        linalg::max_abs_diff(&self.elements[0], &id) < 1e-12
    }
}

fn delta(x: &Operator) -> Operator {
    let d = x.nrows();
    x - linalg::identity(d) * (x.trace() / d as f64)
}

/// `D̃ = Δ ∘ (D + D†)/2 ∘ Δ` in the given basis: entries `⟨e_a, D̃ e_b⟩`.
pub fn build_dtilde(jumps: &JumpSet, basis: &HermitianBasis) -> Result<RMat> {
    guard(jumps.dim())?;
    if basis.dim() != jumps.dim() {
        return Err(Error::DimensionMismatch {
            context: "build_dtilde",
            expected: jumps.dim(),
            found: basis.dim(),
        });
    }
    jumps.check_traceless(operators::STRUCTURAL_TOL)?;
    let n = basis.elements().len();
    let half = C64::new(0.5, 0.0);
    let images: Vec<Operator> = basis
        .elements()
        .iter()
        .map(|e| {
            let de = delta(e);
            let sym = (dissipator_apply(jumps, &de).expect("dims checked")
                + dissipator_adjoint_apply(jumps, &de).expect("dims checked"))
                * half;
            delta(&sym)
        })
        .collect();
    Ok(RMat::from_fn(n, n, |a, b| {
        linalg::hs_inner(&basis.elements()[a], &images[b]).re
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub matrix: Operator,
    /// Rescaled to unit trace (otherwise a traceless direction of unit norm).
    pub unit_trace: bool,
    /// Unit trace and positive semidefinite.
    pub is_state: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<C64>,
    /// Nonzero eigenvalue of largest real part.
    pub lambda2: Option<C64>,
    /// Complex-conjugate partner of `lambda2` when it has one.
    pub lambda2_partner: Option<C64>,
    /// `-Re λ₂`, or 0 when no nonzero eigenvalue exists.
    pub gap: f64,
    /// Set when every eigenvalue is numerically zero.
    pub no_nonzero_eigenvalue: bool,
    pub fixed_point_count: usize,
    pub fixed_points: Vec<FixedPoint>,
    /// Singular values of the superoperator, descending (filled by `fixed_points`).
    pub singular_values: Vec<f64>,
}

fn spectrum_core(s: &SuperMatrix) -> SpectrumReport {
    let eigenvalues = linalg::eigenvalues(&s.mat);
    let scale = s.frobenius();
    let thr = ZERO_EIGENVALUE_TOL * scale;
    let zero_count = eigenvalues.iter().filter(|l| l.norm() <= thr).count();
    let tie = 1e-10 * scale.max(f64::MIN_POSITIVE);
    let mut best: Option<(usize, C64)> = None;
    for (i, &l) in eigenvalues.iter().enumerate() {
        if l.norm() <= thr {
            continue;
        }
        best = match best {
            None => Some((i, l)),
            Some((bi, b)) => {
                if l.re > b.re + tie || ((l.re - b.re).abs() <= tie && l.im.abs() > b.im.abs() + tie) {
                    Some((i, l))
                } else {
                    Some((bi, b))
                }
            }
        };
    }
    let lambda2 = best.map(|(_, l)| l);
    let lambda2_partner = best.and_then(|(bi, b)| {
        if b.im.abs() <= tie {
            return None;
        }
        eigenvalues
            .iter()
            .enumerate()
            .filter(|&(i, l)| i != bi && (l - b.conj()).norm() <= 1e-8 * scale.max(1.0))
            .map(|(_, &l)| l)
            .next()
    });
    SpectrumReport {
        gap: lambda2.map_or(0.0, |l| -l.re),
        no_nonzero_eigenvalue: lambda2.is_none(),
        lambda2,
        lambda2_partner,
        fixed_point_count: zero_count,
        eigenvalues,
        fixed_points: Vec::new(),
        singular_values: Vec::new(),
    }
}

/// Spectrum and second eigenvalue. `fixed_point_count` here is the number of
/// numerically zero eigenvalues; `fixed_points` gives the kernel dimension.
pub fn spectral_gap(s: &SuperMatrix) -> SpectrumReport {
    spectrum_core(s)
}

/// Kernel of `S` from its singular values, restricted to Hermitian operators.
pub fn fixed_points(s: &SuperMatrix, tol: f64) -> Result<SpectrumReport> {
    if !(tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    let d = s.dim();
    let mut report = spectrum_core(s);
    let (kernel, sv) = linalg::null_space(&s.mat, tol);
    report.singular_values = sv;

    // A Hermiticity-preserving kernel is closed under X ↦ X†, so the Hermitian
    // and anti-Hermitian parts of kernel vectors span it over the reals.
    let basis = HermitianBasis::standard(d);
    let mut coords: Vec<Vec<f64>> = Vec::new();
    for k in 0..kernel.ncols() {
        let x = linalg::unvectorize(&kernel.column(k).into_owned(), d);
        let herm = (&x + x.adjoint()) * C64::new(0.5, 0.0);
        let anti = (&x - x.adjoint()) * C64::new(0.0, -0.5);
        coords.push(basis.coordinates(&herm));
        coords.push(basis.coordinates(&anti));
    }
    let mut herm_basis: Vec<Operator> = Vec::new();
    if !coords.is_empty() {
        let n = d * d;
        let m = RMat::from_fn(n, coords.len(), |i, j| coords[j][i]);
        let svd = m.svd(true, false);
        let u = svd.u.expect("u requested");
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
        idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        for i in idx {
            if smax > 0.0 && svd.singular_values[i] > 1e-9 * smax {
                let c: Vec<f64> = u.column(i).iter().copied().collect();
                herm_basis.push(basis.assemble(&c));
            }
        }
    }
    report.fixed_point_count = herm_basis.len();
    report.fixed_points = representatives(herm_basis);
    Ok(report)
}

fn representatives(herm: Vec<Operator>) -> Vec<FixedPoint> {
    if herm.is_empty() {
        return Vec::new();
    }
    let traces: Vec<f64> = herm.iter().map(|h| h.trace().re).collect();
    let scale = herm.iter().map(linalg::frobenius).fold(0.0, f64::max);
    let (pivot, tmax) = traces
        .iter()
        .enumerate()
        .map(|(i, t)| (i, t.abs()))
        .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    if tmax <= 1e-10 * scale {
        return herm
            .into_iter()
            .map(|h| FixedPoint {
                matrix: h,
                unit_trace: false,
                is_state: false,
            })
            .collect();
    }
    let rep = &herm[pivot] / C64::new(traces[pivot], 0.0);
    let rep = linalg::hermitian_part(&rep);
    let mut out = vec![FixedPoint {
        is_state: is_psd(&rep, 1e-8),
        matrix: rep.clone(),
        unit_trace: true,
    }];
    for (i, h) in herm.iter().enumerate() {
        if i == pivot {
            continue;
        }
        let mut t = h - &rep * C64::new(traces[i], 0.0);
        let n = linalg::frobenius(&t);
        if n > 0.0 {
            t /= C64::new(n, 0.0);
        }
        out.push(FixedPoint {
            matrix: t,
            unit_trace: false,
            is_state: false,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneToOneEstimate {
    /// Best `‖S(ψψ†)‖₁` found; a lower bound on the 1→1 norm.
    pub lower: f64,
    pub witness: CVec,
    pub note: &'static str,
}

pub const ONE_TO_ONE_NOTE: &str =
    "lower bound from optimized pure-state inputs (extreme points of the Hermitian trace-norm ball)";

/// Lower estimate of the 1→1 norm by convex ascent over pure states.
///
/// Each restart iterates `ψ ← top eigenvector of Herm(S†(W))`, where `W` is
/// the polar factor of `S(ψψ†)`; the objective never decreases along the way.
pub fn estimate_1to1_norm(s: &SuperMatrix, restarts: usize, seed: u64) -> Result<OneToOneEstimate> {
    if restarts == 0 {
        return Err(invalid("restarts", "must be at least 1"));
    }
    let d = s.dim();
    let adj = s.adjoint();
    let objective = |psi: &CVec| -> (f64, Operator) {
        let y = s.apply(&linalg::projector(psi));
        let svd = y.svd(true, true);
        let w = svd.u.expect("u") * svd.v_t.expect("v_t");
        (svd.singular_values.iter().sum(), w)
    };
    let mut best: Option<(f64, CVec)> = None;
    for k in 0..restarts {
        let mut rng = linalg::substream(seed, k as u64);
        let mut psi = linalg::random_pure_state(d, &mut rng);
        let (mut f, mut w) = objective(&psi);
        for _ in 0..200 {
            let g = adj.apply(&w);
            let (_, vecs) = linalg::eigh(&g);
            let cand = vecs.column(d - 1).into_owned();
            let (fc, wc) = objective(&cand);
            if fc <= f * (1.0 + 1e-13) {
                if fc > f {
                    psi = cand;
                    f = fc;
                }
                break;
            }
            psi = cand;
            f = fc;
            w = wc;
        }
        if best.as_ref().map_or(true, |(b, _)| f > *b) {
            best = Some((f, psi));
        }
    }
    let (lower, witness) = best.expect("restarts >= 1");
    Ok(OneToOneEstimate {
        lower,
        witness,
        note: ONE_TO_ONE_NOTE,
    })
}
