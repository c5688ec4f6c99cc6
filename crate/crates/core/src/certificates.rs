//! Hamiltonian-independent contraction certificates of a dissipator:
//! orthogonal-pair rates, the second eigenvalue of the projected symmetrized
//! dissipator, algebraic classification, and the combined report.

use crate::algebra::{self, GeneratorSet};
use crate::error::Result;
use crate::frames::{PairMinimum, PairObjective, PairSearch, PairTerm};
use crate::linalg::{self, CVec, C64};
use crate::operators::{self, normalize_jumps, JumpSet, Operator};
use crate::superop::{build_dtilde, HermitianBasis};

/// Pair-rate values below `ZERO_RATE_TOL · Σ‖L_j‖²_F` are treated as zero.
pub const ZERO_RATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct OrthoPairWitness {
    pub u: CVec,
    pub v: CVec,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairRate {
    /// Objective at the witness: an upper bound on the true minimum, taken as
    /// the minimum once the restarts saturate.
    pub value: f64,
    pub witness: OrthoPairWitness,
    pub saturated: bool,
    pub restarts: usize,
    /// Exhaustive Bloch-grid minimum (qubits only).
    pub grid_value: Option<f64>,
}

fn symmetric_objective(jumps: &JumpSet) -> PairObjective {
    let mut terms = Vec::new();
    for l in jumps.jumps() {
        terms.push(PairTerm { a: Some(l.clone()), b: None });
        terms.push(PairTerm { a: None, b: Some(l.clone()) });
    }
    PairObjective::new(jumps.dim(), terms)
}

fn directed_objective(jumps: &JumpSet) -> PairObjective {
    let terms = jumps
        .jumps()
        .iter()
        .map(|l| PairTerm { a: Some(l.clone()), b: None })
        .collect();
    PairObjective::new(jumps.dim(), terms)
}

/// Orthonormal qubit pair from Bloch angles; the objectives only depend on
/// the ray of `u`, since `v` is then fixed up to a phase.
fn bloch_pair(theta: f64, phi: f64) -> (CVec, CVec) {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e = C64::from_polar(1.0, phi);
    let u = CVec::from_vec(vec![C64::new(c, 0.0), e * s]);
    let v = CVec::from_vec(vec![-e.conj() * s, C64::new(c, 0.0)]);
    (u, v)
}

fn grid_minimum(obj: &PairObjective) -> (f64, CVec, CVec) {
    let mut best = (f64::INFINITY, CVec::zeros(2), CVec::zeros(2));
    for i in 0..=180 {
        let theta = std::f64::consts::PI * i as f64 / 180.0;
        for j in 0..=360 {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / 360.0;
            let (u, v) = bloch_pair(theta, phi);
            let f = obj.value(&u, &v);
            if f < best.0 {
                best = (f, u, v);
            }
        }
    }
    best
}

fn pair_rate(obj: PairObjective, search: PairSearch) -> PairRate {
    let d = obj.dim();
    if d < 2 {
        let z = CVec::zeros(d);
        return PairRate {
            value: 0.0,
            witness: OrthoPairWitness { u: z.clone(), v: z, value: 0.0 },
            saturated: true,
            restarts: 0,
            grid_value: None,
        };
    }
    let PairMinimum { mut value, mut u, mut v, saturated, restarts } = obj.minimize(search);
    let mut grid_value = None;
    if d == 2 {
        let (g, gu, gv) = grid_minimum(&obj);
        grid_value = Some(g);
        let (f, ru, rv) = obj.refine(&gu, &gv, search.max_iter);
        if f < value {
            value = f;
            u = ru;
            v = rv;
        }
    }
    let value = value.max(0.0);
    PairRate {
        value,
        witness: OrthoPairWitness { u, v, value },
        saturated,
        restarts,
        grid_value,
    }
}

/// `min Σ_j (|⟨v|L_j|u⟩|² + |⟨v|L_j†|u⟩|²)` over orthonormal pairs.
pub fn pair_rate_symmetric(jumps: &JumpSet, search: PairSearch) -> PairRate {
    pair_rate(symmetric_objective(jumps), search)
}

/// `min Σ_j |⟨v|L_j|u⟩|²` over orthonormal pairs; certifies the rate `d · r`.
pub fn pair_rate_directed(jumps: &JumpSet, search: PairSearch) -> PairRate {
    pair_rate(directed_objective(jumps), search)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mu2Report {
    pub mu2: f64,
    /// Hermitian traceless eigenvector of unit Hilbert-Schmidt norm.
    pub eigenvector: Operator,
    /// Dimension of the eigenspace of `mu2`.
    pub multiplicity: usize,
    /// Full spectrum of the projected operator on the traceless sector, descending.
    pub spectrum: Vec<f64>,
}

/// Largest eigenvalue of `D̃` on the traceless Hermitian operators.
pub fn rate_mu2(jumps: &JumpSet) -> Result<Mu2Report> {
    let d = jumps.dim();
    let basis = HermitianBasis::standard(d);
    let m = build_dtilde(jumps, &basis)?;
    let n = d * d - 1;
    if n == 0 {
        return Ok(Mu2Report {
            mu2: 0.0,
            eigenvector: linalg::zeros(d),
            multiplicity: 0,
            spectrum: Vec::new(),
        });
    }
    let sub = m.view((1, 1), (n, n)).into_owned();
    let (w, vecs) = linalg::eigh_real(&sub);
    let mu2 = w[n - 1];
    let scale = w.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
    let multiplicity = w.iter().filter(|&&x| (x - mu2).abs() <= 1e-9 * scale).count();
    let mut coords = vec![0.0];
    coords.extend(vecs.column(n - 1).iter().copied());
    let mut spectrum = w.clone();
    spectrum.reverse();
    Ok(Mu2Report {
        mu2: if jumps.is_empty() { 0.0 } else { mu2 },
        eigenvector: basis.assemble(&coords),
        multiplicity,
        spectrum,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Classification {
    /// `Σ_j [L_j, L_j†] = 0`: the maximally mixed state is stationary.
    pub unital: bool,
    /// `{L_j, L_j†}` spans every traceless anti-Hermitian operator.
    pub antiherm_span: bool,
    pub algebra_full_with_daggers: bool,
    pub algebra_full_jumps_only: bool,
    /// Qubit with a non-normal jump or a non-commuting pair.
    pub d2_contractive: bool,
    /// Qutrit whose jumps alone generate the full algebra.
    pub d3_sufficient: bool,
}

pub fn classify(jumps: &JumpSet) -> Result<Classification> {
    let d = jumps.dim();
    let scale: f64 = jumps.jumps().iter().map(|l| linalg::frobenius(l).powi(2)).sum();
    let tol = operators::STRUCTURAL_TOL * scale.max(f64::MIN_POSITIVE);
    let mut net = linalg::zeros(d);
    for l in jumps.jumps() {
        net += linalg::commutator(l, &l.adjoint());
    }
    let unital = linalg::frobenius(&net) <= tol;
    if jumps.is_empty() {
        return Ok(Classification {
            unital: true,
            ..Default::default()
        });
    }
    let rounds = algebra::default_rounds(d);
    let full = d * d;
    let with = algebra::generated_algebra_dim(&GeneratorSet::with_adjoints(jumps)?, rounds)? == full;
    let only = algebra::generated_algebra_dim(&GeneratorSet::jumps_only(jumps)?, rounds)? == full;
    let non_normal = jumps
        .jumps()
        .iter()
        .any(|l| linalg::frobenius(&linalg::commutator(l, &l.adjoint())) > tol);
    let mut non_commuting = false;
    for (i, a) in jumps.jumps().iter().enumerate() {
        for b in &jumps.jumps()[i + 1..] {
            non_commuting |= linalg::frobenius(&linalg::commutator(a, b)) > tol;
        }
    }
    Ok(Classification {
        unital,
        antiherm_span: algebra::spans_antihermitian(jumps).spans,
        algebra_full_with_daggers: with,
        algebra_full_jumps_only: only,
        d2_contractive: d == 2 && (non_normal || non_commuting),
        d3_sufficient: d == 3 && only,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateMethod {
    /// Symmetric orthogonal-pair rate, `K = 1`.
    R,
    /// Dimension times the directed orthogonal-pair rate, `K = 1`.
    RTimesD,
    /// `|μ₂|` of the projected symmetrized dissipator, `K = √d`.
    Mu2,
    /// The anti-Hermitian span condition. It carries no rate of its own (it
    /// only implies the symmetric pair rate is positive), so the selection
    /// never returns it.
    Span,
    None,
}

impl CertificateMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::R => "R",
            Self::RTimesD => "r_times_d",
            Self::Mu2 => "mu2",
            Self::Span => "span",
            Self::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CertificateWitness {
    Pair(OrthoPairWitness),
    Eigenvector(Operator),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionCertificate {
    pub method: CertificateMethod,
    pub gamma: f64,
    pub k: f64,
    pub witness: Option<CertificateWitness>,
    pub classifications: Classification,
    pub symmetric: PairRate,
    pub directed: PairRate,
    pub mu2: Mu2Report,
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CertifyOptions {
    pub search: PairSearch,
}

/// Run every certificate on the trace-normalized jumps and keep the one with
/// the largest guaranteed rate. Ties go to the smaller prefactor `K`.
pub fn certify(jumps: &JumpSet, opts: CertifyOptions) -> Result<ContractionCertificate> {
    let d = jumps.dim();
    let (jumps, _) = normalize_jumps(jumps, &linalg::zeros(d))?;
    let classifications = classify(&jumps)?;
    let symmetric = pair_rate_symmetric(&jumps, opts.search);
    let directed = pair_rate_directed(&jumps, opts.search);
    let mu2 = rate_mu2(&jumps)?;
    let scale: f64 = jumps.jumps().iter().map(|l| linalg::frobenius(l).powi(2)).sum();
    let floor = ZERO_RATE_TOL * scale;

    let df = d as f64;
    let candidates = [
        (CertificateMethod::R, symmetric.value, 1.0),
        (CertificateMethod::RTimesD, df * directed.value, 1.0),
        (
            CertificateMethod::Mu2,
            if mu2.mu2 < -floor { -mu2.mu2 } else { 0.0 },
            df.sqrt(),
        ),
    ];
    let mut chosen = (CertificateMethod::None, 0.0, 1.0);
    for (m, g, k) in candidates {
        if g <= floor {
            continue;
        }
        if g > chosen.1 * (1.0 + 1e-9) {
            chosen = (m, g, k);
        }
    }
    let witness = match chosen.0 {
        CertificateMethod::R => Some(CertificateWitness::Pair(symmetric.witness.clone())),
        CertificateMethod::RTimesD => Some(CertificateWitness::Pair(directed.witness.clone())),
        CertificateMethod::Mu2 => Some(CertificateWitness::Eigenvector(mu2.eigenvector.clone())),
        _ => None,
    };
    Ok(ContractionCertificate {
        method: chosen.0,
        gamma: chosen.1,
        k: chosen.2,
        witness,
        classifications,
        symmetric,
        directed,
        mu2,
        dim: d,
    })
}
