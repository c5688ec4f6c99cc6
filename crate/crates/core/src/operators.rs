//! Operators on a finite-dimensional Hilbert space, jump sets, Hamiltonian
//! schedules and the Lindbladian action
//! `L_t(X) = -i[H(t), X] + Σ_j (L_j X L_j† - ½{L_j† L_j, X})`.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMat, C64, I, ONE};

/// Dense complex square matrix: states, jumps, Hamiltonians.
pub type Operator = CMat;

/// Default relative tolerance for structural checks (Hermiticity, tracelessness).
pub const STRUCTURAL_TOL: f64 = 1e-10;

/// Dense methods refuse dimensions above this.
pub const MAX_DIM: usize = 64;

fn scale_of(x: &Operator) -> f64 {
    linalg::frobenius(x)
}

/// `‖X - X†‖_F ≤ tol · ‖X‖_F`.
pub fn is_hermitian(x: &Operator, tol: f64) -> bool {
    x.is_square() && hermiticity_defect(x) <= tol
}

/// Relative anti-Hermitian part `‖X - X†‖_F / ‖X‖_F` (0 for the zero matrix).
pub fn hermiticity_defect(x: &Operator) -> f64 {
    let n = scale_of(x);
    if n == 0.0 {
        return 0.0;
    }
    linalg::frobenius(&(x - x.adjoint())) / n
}

pub fn is_traceless(x: &Operator, tol: f64) -> bool {
    let n = scale_of(x);
    n == 0.0 || x.trace().norm() <= tol * n
}

/// Hermitian with smallest eigenvalue ≥ `-tol · max(‖X‖_F, 1)`.
pub fn is_psd(x: &Operator, tol: f64) -> bool {
    if !is_hermitian(x, tol) {
        return false;
    }
    let w = linalg::eigvalsh(x);
    w.first().map_or(true, |&m| m >= -tol * scale_of(x).max(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpSet {
    dim: usize,
    jumps: Vec<Operator>,
}

impl JumpSet {
    pub fn new(dim: usize, jumps: Vec<Operator>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "must be positive"));
        }
        for j in &jumps {
            if j.nrows() != dim || j.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    context: "jump set",
                    expected: dim,
                    found: j.nrows().max(j.ncols()),
                });
            }
        }
        Ok(Self { dim, jumps })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            jumps: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn jumps(&self) -> &[Operator] {
        &self.jumps
    }

    pub fn len(&self) -> usize {
        self.jumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    /// `Σ_j L_j† L_j`.
    pub fn loss_operator(&self) -> Operator {
        let mut acc = linalg::zeros(self.dim);
        for l in &self.jumps {
            acc += l.adjoint() * l;
        }
        acc
    }

    /// Multiply every jump by `factor`; rates scale by `|factor|²`.
    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            jumps: self.jumps.iter().map(|l| l * factor).collect(),
        }
    }

    /// Conjugate every jump by a unitary `U L U†`.
    pub fn conjugated(&self, u: &Operator) -> Self {
        Self {
            dim: self.dim,
            jumps: self.jumps.iter().map(|l| u * l * u.adjoint()).collect(),
        }
    }

    pub fn with_jump(mut self, l: Operator) -> Result<Self> {
        if l.nrows() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "jump set",
                expected: self.dim,
                found: l.nrows(),
            });
        }
        self.jumps.push(l);
        Ok(self)
    }

    pub fn check_traceless(&self, tol: f64) -> Result<()> {
        for (i, l) in self.jumps.iter().enumerate() {
            if !is_traceless(l, tol) {
                return Err(Error::NotTraceless {
                    index: i,
                    trace: l.trace().norm(),
                });
            }
        }
        Ok(())
    }
}

/// The rotating drive `H(t) = base + cos φ(t) · cos_term + sin φ(t) · sin_term`
/// with phase `φ(t) = 2π (1 + c t)^r`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiDrive {
    pub c: f64,
    pub r: f64,
    pub base: Operator,
    pub cos_term: Operator,
    pub sin_term: Operator,
}

impl PhiDrive {
    pub fn phase(&self, t: f64) -> f64 {
        2.0 * PI * (1.0 + self.c * t).powf(self.r)
    }

    pub fn phase_rate(&self, t: f64) -> f64 {
        2.0 * PI * self.r * self.c * (1.0 + self.c * t).powf(self.r - 1.0)
    }

    pub fn evaluate(&self, t: f64) -> Operator {
        let phi = self.phase(t);
        &self.base + &self.cos_term * C64::new(phi.cos(), 0.0) + &self.sin_term * C64::new(phi.sin(), 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianSchedule {
    Zero,
    Constant(Operator),
    /// `segments[k]` applies on `[breakpoints[k], breakpoints[k+1])`; the
    /// first breakpoint is 0 and the last segment extends to infinity.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        segments: Vec<Operator>,
    },
    PhiDrive(PhiDrive),
}

impl HamiltonianSchedule {
    pub fn evaluate(&self, t: f64, dim: usize) -> Operator {
        match self {
            Self::Zero => linalg::zeros(dim),
            Self::Constant(h) => h.clone(),
            Self::PiecewiseConstant { segments, .. } => segments[self.segment_index(t)].clone(),
            Self::PhiDrive(p) => p.evaluate(t),
        }
    }

    /// Index of the piecewise segment active at `t` (0 for other variants).
    pub fn segment_index(&self, t: f64) -> usize {
        match self {
            Self::PiecewiseConstant { breakpoints, .. } => {
                breakpoints.partition_point(|&b| b <= t).saturating_sub(1)
            }
            _ => 0,
        }
    }

    /// Next time strictly after `t` at which the schedule jumps, if any.
    pub fn next_breakpoint(&self, t: f64) -> Option<f64> {
        match self {
            Self::PiecewiseConstant { breakpoints, .. } => {
                breakpoints.iter().copied().find(|&b| b > t)
            }
            _ => None,
        }
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(self, Self::PiecewiseConstant { .. } | Self::PhiDrive(_))
    }

    fn pieces(&self) -> Vec<&Operator> {
        match self {
            Self::Zero => vec![],
            Self::Constant(h) => vec![h],
            Self::PiecewiseConstant { segments, .. } => segments.iter().collect(),
            Self::PhiDrive(p) => vec![&p.base, &p.cos_term, &p.sin_term],
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        for (k, h) in self.pieces().into_iter().enumerate() {
            if h.nrows() != dim || h.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    context: "hamiltonian",
                    expected: dim,
                    found: h.nrows().max(h.ncols()),
                });
            }
            if !is_hermitian(h, STRUCTURAL_TOL) {
                return Err(Error::NotHermitian {
                    context: format!("hamiltonian term {k}"),
                    deviation: hermiticity_defect(h),
                });
            }
        }
        match self {
            Self::PiecewiseConstant {
                breakpoints,
                segments,
            } => {
                if segments.is_empty() || breakpoints.len() != segments.len() {
                    return Err(invalid(
                        "breakpoints",
                        "need one start time per segment",
                    ));
                }
                if breakpoints[0] != 0.0 {
                    return Err(invalid("breakpoints", "first segment must start at 0"));
                }
                if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(invalid("breakpoints", "must be strictly ascending"));
                }
            }
            Self::PhiDrive(p) => {
                if !(p.c > 0.0) {
                    return Err(invalid("c", "must be positive"));
                }
                if !(p.r > 2.0) {
                    return Err(invalid("r", "must exceed 2"));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    dim: usize,
    jumps: JumpSet,
    hamiltonian: HamiltonianSchedule,
}

impl LindbladModel {
    pub fn new(jumps: JumpSet, hamiltonian: HamiltonianSchedule) -> Result<Self> {
        let dim = jumps.dim();
        hamiltonian.validate(dim)?;
        Ok(Self {
            dim,
            jumps,
            hamiltonian,
        })
    }

    pub fn dissipative(jumps: JumpSet) -> Self {
        Self {
            dim: jumps.dim(),
            jumps,
            hamiltonian: HamiltonianSchedule::Zero,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn jumps(&self) -> &JumpSet {
        &self.jumps
    }

    pub fn hamiltonian(&self) -> &HamiltonianSchedule {
        &self.hamiltonian
    }

    pub fn hamiltonian_at(&self, t: f64) -> Operator {
        self.hamiltonian.evaluate(t, self.dim)
    }

    pub fn with_hamiltonian(&self, hamiltonian: HamiltonianSchedule) -> Result<Self> {
        Self::new(self.jumps.clone(), hamiltonian)
    }
}

/// Shift every jump to be traceless and compensate in the Hamiltonian:
/// `L → L - tr(L) I/d`, `H → H + (i/2d) Σ (tr(L)* L - tr(L) L†)`.
pub fn normalize_jumps(jumps: &JumpSet, h: &Operator) -> Result<(JumpSet, Operator)> {
    let d = jumps.dim();
    if h.nrows() != d || h.ncols() != d {
        return Err(Error::DimensionMismatch {
            context: "normalize_jumps",
            expected: d,
            found: h.nrows(),
        });
    }
    if !is_hermitian(h, STRUCTURAL_TOL) {
        return Err(Error::NotHermitian {
            context: "hamiltonian".into(),
            deviation: hermiticity_defect(h),
        });
    }
    let df = d as f64;
    let id = linalg::identity(d);
    let mut h_new = h.clone();
    let mut out = Vec::with_capacity(jumps.len());
    for l in jumps.jumps() {
        let tr = l.trace();
        out.push(l - &id * (tr / df));
        h_new += (l * tr.conj() - l.adjoint() * tr) * (I / (2.0 * df));
    }
    // Remove rounding-level anti-Hermitian residue.
    let h_new = linalg::hermitian_part(&h_new);
    Ok((JumpSet { dim: d, jumps: out }, h_new))
}

fn check_dim(context: &'static str, expected: usize, x: &Operator) -> Result<()> {
    if x.nrows() != expected || x.ncols() != expected {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found: x.nrows().max(x.ncols()),
        });
    }
    Ok(())
}

/// `D(X) = Σ_j (L_j X L_j† - ½{L_j† L_j, X})`.
pub fn dissipator_apply(jumps: &JumpSet, x: &Operator) -> Result<Operator> {
    check_dim("dissipator_apply", jumps.dim(), x)?;
    let half = C64::new(0.5, 0.0);
    let mut out = linalg::zeros(jumps.dim());
    for l in jumps.jumps() {
        let ld = l.adjoint();
        let ldl = &ld * l;
        out += l * x * &ld - (&ldl * x + x * &ldl) * half;
    }
    Ok(out)
}

/// Heisenberg-picture adjoint `D†(X) = Σ_j (L_j† X L_j - ½{L_j† L_j, X})`.
pub fn dissipator_adjoint_apply(jumps: &JumpSet, x: &Operator) -> Result<Operator> {
    check_dim("dissipator_adjoint_apply", jumps.dim(), x)?;
    let half = C64::new(0.5, 0.0);
    let mut out = linalg::zeros(jumps.dim());
    for l in jumps.jumps() {
        let ld = l.adjoint();
        let ldl = &ld * l;
        out += &ld * x * l - (&ldl * x + x * &ldl) * half;
    }
    Ok(out)
}

pub fn lindbladian_apply(model: &LindbladModel, t: f64, x: &Operator) -> Result<Operator> {
    if t < 0.0 {
        return Err(invalid("t", "must be non-negative"));
    }
    let mut out = dissipator_apply(model.jumps(), x)?;
    if !matches!(model.hamiltonian(), HamiltonianSchedule::Zero) {
        let h = model.hamiltonian_at(t);
        out += linalg::commutator(&h, x) * (-I);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorNorms {
    pub trace: f64,
    pub frobenius: f64,
    pub spectral: f64,
}

/// Schatten 1, 2 and ∞ norms from the singular values.
pub fn operator_norms(x: &Operator) -> OperatorNorms {
    let s = linalg::singular_values(x);
    OperatorNorms {
        trace: s.iter().sum(),
        frobenius: s.iter().map(|v| v * v).sum::<f64>().sqrt(),
        spectral: s.first().copied().unwrap_or(0.0),
    }
}

/// Trace norm, using the eigenvalues when `x` is Hermitian.
pub fn trace_norm(x: &Operator) -> f64 {
    if is_hermitian(x, 1e-12) {
        linalg::eigvalsh(x).iter().map(|v| v.abs()).sum()
    } else {
        operator_norms(x).trace
    }
}

/// Size of a Hermitian drive term, raw and after the best identity shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSize {
    pub raw: f64,
    /// `(λ_max - λ_min) / 2`, the spectral norm of `V - cI` minimized over `c`.
    pub shifted: f64,
}

pub fn drive_size(v: &Operator) -> DriveSize {
    let w = linalg::eigvalsh(v);
    let (lo, hi) = (w.first().copied().unwrap_or(0.0), w.last().copied().unwrap_or(0.0));
    DriveSize {
        raw: lo.abs().max(hi.abs()),
        shifted: (hi - lo) / 2.0,
    }
}

/// Standard named operators and states.
pub mod named {
    use super::*;
    use crate::linalg::{CVec, ZERO};

    fn m2(a: [[C64; 2]; 2]) -> Operator {
        Operator::from_fn(2, 2, |i, j| a[i][j])
    }

    pub fn sigma_x() -> Operator {
        m2([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn sigma_y() -> Operator {
        m2([[ZERO, -I], [I, ZERO]])
    }

    pub fn sigma_z() -> Operator {
        m2([[ONE, ZERO], [ZERO, -ONE]])
    }

    /// Lowering operator `|0⟩⟨1|`.
    pub fn sigma_minus() -> Operator {
        m2([[ZERO, ONE], [ZERO, ZERO]])
    }

    /// Raising operator `|1⟩⟨0|`.
    pub fn sigma_plus() -> Operator {
        m2([[ZERO, ZERO], [ONE, ZERO]])
    }

    /// Matrix unit `|i⟩⟨j|` in dimension `d`.
    pub fn unit(d: usize, i: usize, j: usize) -> Operator {
        let mut m = linalg::zeros(d);
        m[(i, j)] = ONE;
        m
    }

    pub fn ket(d: usize, i: usize) -> CVec {
        let mut v = CVec::zeros(d);
        v[i] = ONE;
        v
    }

    pub fn plus() -> CVec {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CVec::from_vec(vec![C64::new(s, 0.0), C64::new(s, 0.0)])
    }

    pub fn minus() -> CVec {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CVec::from_vec(vec![C64::new(s, 0.0), C64::new(-s, 0.0)])
    }

    pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
        a.kronecker(b)
    }
}
