//! Time evolution of operators under a (possibly driven) Lindbladian.
//!
//! Operators are propagated in vectorized form. The generator at time `t` is
//! assembled from a constant superoperator plus, for rotating drives, two
//! sparse pieces weighted by `cos φ(t)` and `sin φ(t)`.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMat, CVec, C64, ONE, ZERO};
use crate::operators::{
    self, dissipator_apply, is_hermitian, HamiltonianSchedule, LindbladModel, Operator, PhiDrive,
};
use crate::superop::{dissipator_superop, hamiltonian_superop};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Matrix exponential of the generator at the step midpoint.
    ExpStep,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorOptions {
    pub scheme: Scheme,
    pub dt: f64,
    /// Compare each step against two half steps and refine until they agree
    /// to `tol_state`.
    pub richardson: bool,
    pub tol_state: f64,
    pub max_halvings: usize,
    /// For rotating drives, shrink the step to `dt / (1 + φ'(t))`.
    pub phase_scaled: bool,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        Self {
            scheme: Scheme::ExpStep,
            dt: 1e-2,
            richardson: true,
            tol_state: 1e-8,
            max_halvings: 6,
            phase_scaled: true,
        }
    }
}

impl PropagatorOptions {
    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("dt", "must be positive"));
        }
        if !(self.tol_state > 0.0) {
            return Err(invalid("tol_state", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Operator>,
    pub observables: Vec<(String, Vec<f64>)>,
}

#[derive(Debug, Clone)]
struct SparseSuper {
    entries: Vec<(usize, usize, C64)>,
}

impl SparseSuper {
    fn from_dense(m: &CMat) -> Self {
        let mut entries = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                let z = m[(r, c)];
                if z != ZERO {
                    entries.push((r, c, z));
                }
            }
        }
        Self { entries }
    }

    fn add_apply(&self, s: f64, x: &CVec, out: &mut CVec) {
        for &(r, c, z) in &self.entries {
            out[r] += z * x[c] * s;
        }
    }

    fn add_to(&self, s: f64, m: &mut CMat) {
        for &(r, c, z) in &self.entries {
            m[(r, c)] += z * s;
        }
    }
}

#[derive(Debug, Clone)]
enum Drive {
    Fixed(CMat),
    Piecewise {
        schedule: HamiltonianSchedule,
        segments: Vec<CMat>,
    },
    Rotating {
        base: CMat,
        drive: PhiDrive,
        cos_part: SparseSuper,
        sin_part: SparseSuper,
    },
}

/// Vectorized generator `t ↦ S(t)`.
#[derive(Debug, Clone)]
pub struct Generator {
    dim: usize,
    drive: Drive,
}

impl Generator {
    pub fn new(model: &LindbladModel) -> Result<Self> {
        let d = model.dim();
        if d > operators::MAX_DIM {
            return Err(Error::DimensionTooLarge { dim: d, max: operators::MAX_DIM });
        }
        let diss = dissipator_superop(model.jumps()).into_matrix();
        let drive = match model.hamiltonian() {
            HamiltonianSchedule::Zero => Drive::Fixed(diss),
            HamiltonianSchedule::Constant(h) => {
                Drive::Fixed(diss + hamiltonian_superop(h).into_matrix())
            }
            s @ HamiltonianSchedule::PiecewiseConstant { segments, .. } => Drive::Piecewise {
                schedule: s.clone(),
                segments: segments
                    .iter()
                    .map(|h| &diss + hamiltonian_superop(h).matrix())
                    .collect(),
            },
            HamiltonianSchedule::PhiDrive(p) => Drive::Rotating {
                base: diss + hamiltonian_superop(&p.base).into_matrix(),
                drive: p.clone(),
                cos_part: SparseSuper::from_dense(hamiltonian_superop(&p.cos_term).matrix()),
                sin_part: SparseSuper::from_dense(hamiltonian_superop(&p.sin_term).matrix()),
            },
        };
        Ok(Self { dim: d, drive })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Generator constant between breakpoints, so exponential steps are exact.
    fn is_piecewise_constant(&self) -> bool {
        !matches!(self.drive, Drive::Rotating { .. })
    }

    fn segment(&self, t: f64) -> usize {
        match &self.drive {
            Drive::Piecewise { schedule, .. } => schedule.segment_index(t),
            _ => 0,
        }
    }

    fn next_breakpoint(&self, t: f64) -> Option<f64> {
        match &self.drive {
            Drive::Piecewise { schedule, .. } => schedule.next_breakpoint(t),
            _ => None,
        }
    }

    fn phase_rate(&self, t: f64) -> f64 {
        match &self.drive {
            Drive::Rotating { drive, .. } => drive.phase_rate(t),
            _ => 0.0,
        }
    }

    pub fn matrix_at(&self, t: f64) -> CMat {
        match &self.drive {
            Drive::Fixed(m) => m.clone(),
            Drive::Piecewise { segments, .. } => segments[self.segment(t)].clone(),
            Drive::Rotating { base, drive, cos_part, sin_part } => {
                let phi = drive.phase(t);
                let mut m = base.clone();
                cos_part.add_to(phi.cos(), &mut m);
                sin_part.add_to(phi.sin(), &mut m);
                m
            }
        }
    }

    fn apply_into(&self, t: f64, x: &CVec, out: &mut CVec) {
        match &self.drive {
            Drive::Fixed(m) => out.gemv(ONE, m, x, ZERO),
            Drive::Piecewise { segments, .. } => out.gemv(ONE, &segments[self.segment(t)], x, ZERO),
            Drive::Rotating { base, drive, cos_part, sin_part } => {
                out.gemv(ONE, base, x, ZERO);
                let phi = drive.phase(t);
                cos_part.add_apply(phi.cos(), x, out);
                sin_part.add_apply(phi.sin(), x, out);
            }
        }
    }
}

struct Stepper {
    gen: Generator,
    opts: PropagatorOptions,
    exp_cache: HashMap<(usize, u64), CMat>,
    k: [CVec; 4],
    tmp: CVec,
}

impl Stepper {
    fn new(model: &LindbladModel, opts: PropagatorOptions) -> Result<Self> {
        opts.validate()?;
        let gen = Generator::new(model)?;
        let n = gen.dim * gen.dim;
        let z = CVec::zeros(n);
        Ok(Self {
            gen,
            opts,
            exp_cache: HashMap::new(),
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            tmp: z,
        })
    }

    fn single(&mut self, t: f64, v: &CVec, h: f64) -> CVec {
        match self.opts.scheme {
            Scheme::ExpStep => {
                let mid = t + 0.5 * h;
                if self.gen.is_piecewise_constant() {
                    let key = (self.gen.segment(mid), h.to_bits());
                    if !self.exp_cache.contains_key(&key) {
                        if self.exp_cache.len() > 64 {
                            self.exp_cache.clear();
                        }
                        let e = linalg::expm(&(self.gen.matrix_at(mid) * C64::new(h, 0.0)));
                        self.exp_cache.insert(key, e);
                    }
                    &self.exp_cache[&key] * v
                } else {
                    linalg::expm(&(self.gen.matrix_at(mid) * C64::new(h, 0.0))) * v
                }
            }
            Scheme::Rk4 => {
                let hc = C64::new(h, 0.0);
                let half = C64::new(0.5 * h, 0.0);
                let [k1, k2, k3, k4] = &mut self.k;
                let tmp = &mut self.tmp;
                self.gen.apply_into(t, v, k1);
                tmp.copy_from(v);
                tmp.axpy(half, k1, ONE);
                self.gen.apply_into(t + 0.5 * h, tmp, k2);
                tmp.copy_from(v);
                tmp.axpy(half, k2, ONE);
                self.gen.apply_into(t + 0.5 * h, tmp, k3);
                tmp.copy_from(v);
                tmp.axpy(hc, k3, ONE);
                self.gen.apply_into(t + h, tmp, k4);
                let mut out = v.clone();
                let w = hc / C64::new(6.0, 0.0);
                out.axpy(w, k1, ONE);
                out.axpy(w * 2.0, k2, ONE);
                out.axpy(w * 2.0, k3, ONE);
                out.axpy(w, k4, ONE);
                out
            }
        }
    }

    /// Advance by at most `h`; returns the time actually reached.
    fn advance(&mut self, t: f64, v: &mut CVec, h: f64) -> Result<f64> {
        let exact = self.opts.scheme == Scheme::ExpStep && self.gen.is_piecewise_constant();
        if !self.opts.richardson || exact {
            *v = self.single(t, v, h);
            return Ok(t + h);
        }
        let mut h = h;
        let mut err = 0.0;
        for _ in 0..=self.opts.max_halvings {
            let full = self.single(t, v, h);
            let mid = self.single(t, v, 0.5 * h);
            let fine = self.single(t + 0.5 * h, &mid, 0.5 * h);
            err = full
                .iter()
                .zip(fine.iter())
                .fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
            if err <= self.opts.tol_state {
                *v = fine;
                return Ok(t + h);
            }
            h *= 0.5;
        }
        Err(Error::RefinementExhausted { time: t, error: err, tol: self.opts.tol_state })
    }

    fn step_size(&self, t: f64) -> f64 {
        if self.opts.phase_scaled {
            self.opts.dt / (1.0 + self.gen.phase_rate(t))
        } else {
            self.opts.dt
        }
    }

    /// Propagate `v` from `t0` through the ascending `grid`, calling `visit`
    /// at each grid time (including `t0` when it is the first grid point).
    fn run(
        &mut self,
        t0: f64,
        v: &mut CVec,
        grid: &[f64],
        mut visit: impl FnMut(usize, f64, &CVec),
    ) -> Result<()> {
        let mut t = t0;
        for (i, &target) in grid.iter().enumerate() {
            while t < target {
                let mut h = self.step_size(t).min(target - t);
                if let Some(b) = self.gen.next_breakpoint(t) {
                    h = h.min(b - t);
                }
                let reached = self.advance(t, v, h)?;
                // Snap onto the target to avoid a sliver step from rounding.
                t = if target - reached <= 1e-12 * target.abs().max(1.0) { target } else { reached };
            }
            visit(i, t, v);
        }
        Ok(())
    }
}

fn check_times(s: f64, grid: &[f64]) -> Result<()> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(invalid("s", "start time must be finite and >= 0"));
    }
    if grid.iter().any(|t| !t.is_finite() || *t < s) {
        return Err(invalid("t", "times must be finite and not before the start time"));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("grid", "must be ascending"));
    }
    Ok(())
}

fn check_operator(model: &LindbladModel, x: &Operator) -> Result<()> {
    let d = model.dim();
    if x.nrows() != d || x.ncols() != d {
        return Err(Error::DimensionMismatch { context: "initial operator", expected: d, found: x.nrows() });
    }
    Ok(())
}

/// `E_{t,s}(x0)`.
pub fn propagate(
    model: &LindbladModel,
    s: f64,
    t: f64,
    x0: &Operator,
    opts: PropagatorOptions,
) -> Result<Operator> {
    check_times(s, &[t])?;
    check_operator(model, x0)?;
    let mut st = Stepper::new(model, opts)?;
    let mut v = linalg::vectorize(x0);
    st.run(s, &mut v, &[t], |_, _, _| {})?;
    Ok(linalg::unvectorize(&v, model.dim()))
}

/// States at every time of `grid`, starting from `x0` at `grid[0]`.
pub fn trajectory(
    model: &LindbladModel,
    x0: &Operator,
    grid: &[f64],
    opts: PropagatorOptions,
) -> Result<Trajectory> {
    if grid.is_empty() {
        return Err(invalid("grid", "must be nonempty"));
    }
    check_times(grid[0], grid)?;
    check_operator(model, x0)?;
    let d = model.dim();
    let mut st = Stepper::new(model, opts)?;
    let mut v = linalg::vectorize(x0);
    let mut states = Vec::with_capacity(grid.len());
    st.run(grid[0], &mut v, grid, |_, _, v| states.push(linalg::unvectorize(v, d)))?;
    Ok(Trajectory { times: grid.to_vec(), states, observables: Vec::new() })
}

fn check_density(name: &'static str, rho: &Operator) -> Result<()> {
    let tol = 1e-8;
    if !is_hermitian(rho, tol) || (linalg::trace(rho) - ONE).norm() > tol || !operators::is_psd(rho, tol) {
        return Err(invalid(name, "must be a density matrix"));
    }
    Ok(())
}

/// `‖E_{t,t₀}(ρ − σ)‖₁` on `grid`, with `t₀ = grid[0]`.
pub fn contraction_envelope(
    model: &LindbladModel,
    rho: &Operator,
    sigma: &Operator,
    grid: &[f64],
    opts: PropagatorOptions,
) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(invalid("grid", "must be nonempty"));
    }
    check_times(grid[0], grid)?;
    check_operator(model, rho)?;
    check_operator(model, sigma)?;
    check_density("rho", rho)?;
    check_density("sigma", sigma)?;
    let d = model.dim();
    let mut st = Stepper::new(model, opts)?;
    let mut v = linalg::vectorize(&(rho - sigma));
    let mut out = Vec::with_capacity(grid.len());
    st.run(grid[0], &mut v, grid, |_, _, v| {
        let x = linalg::unvectorize(v, d);
        out.push(operators::trace_norm(&linalg::hermitian_part(&x)));
    })?;
    Ok(out)
}

/// `tr(obs · ρ_i(t))` for each initial state, one trajectory per state.
pub fn observable_trajectory(
    model: &LindbladModel,
    initials: &[Operator],
    obs: &Operator,
    grid: &[f64],
    opts: PropagatorOptions,
) -> Result<Vec<Trajectory>> {
    check_operator(model, obs)?;
    if !is_hermitian(obs, operators::STRUCTURAL_TOL) {
        return Err(Error::NotHermitian {
            context: "observable".into(),
            deviation: operators::hermiticity_defect(obs),
        });
    }
    for rho in initials {
        check_operator(model, rho)?;
        check_density("initial state", rho)?;
    }
    initials
        .par_iter()
        .map(|rho| {
            let mut tr = trajectory(model, rho, grid, opts)?;
            let series = tr.states.iter().map(|s| linalg::hs_inner(obs, s).re).collect();
            tr.observables.push(("obs".to_string(), series));
            Ok(tr)
        })
        .collect()
}

/// Relative threshold below which an eigenvalue of `x` counts as kernel.
pub const KERNEL_TOL: f64 = 1e-8;
/// Relative threshold for the sign of the drift on the kernel.
pub const DRIFT_SIGN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SignDecomposition {
    pub eigenvalues: Vec<f64>,
    pub signs: Vec<i8>,
    /// Columns are the joint eigenbasis of `x` and of the kernel drift.
    pub basis: CMat,
    pub kernel: Vec<bool>,
}

impl SignDecomposition {
    pub fn weight(&self, k: usize, l: usize) -> f64 {
        1.0 - (self.signs[k] * self.signs[l]) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RightDerivative {
    pub value: f64,
    pub decomposition: SignDecomposition,
    /// Some eigenvalue sits within a factor 10 of the kernel threshold.
    pub ambiguous: bool,
}

fn sign(x: f64, tol: f64) -> i8 {
    if x > tol {
        1
    } else if x < -tol {
        -1
    } else {
        0
    }
}

/// Right time derivative of `‖x(t)‖₁` at `t` for `x(t) = x`.
///
/// The Hamiltonian part does not contribute, so only the jumps are used.
pub fn trace_norm_right_derivative(model: &LindbladModel, t: f64, x: &Operator) -> Result<RightDerivative> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(invalid("t", "must be finite and >= 0"));
    }
    check_operator(model, x)?;
    if !is_hermitian(x, operators::STRUCTURAL_TOL) {
        return Err(Error::NotHermitian { context: "x".into(), deviation: operators::hermiticity_defect(x) });
    }
    let d = model.dim();
    let jumps = model.jumps();
    let (lam, vecs) = linalg::eigh(&linalg::hermitian_part(x));
    let top = lam.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let thr = KERNEL_TOL * top;
    let kernel: Vec<bool> = lam.iter().map(|l| l.abs() < thr || top == 0.0).collect();
    let ambiguous = top > 0.0 && lam.iter().any(|l| l.abs() > thr / 10.0 && l.abs() < thr * 10.0);

    let mut basis = vecs.clone();
    let mut signs: Vec<i8> = lam.iter().map(|&l| sign(l, thr)).collect();
    let ker: Vec<usize> = (0..d).filter(|&k| kernel[k]).collect();
    if !ker.is_empty() {
        let kb = CMat::from_fn(d, ker.len(), |r, c| vecs[(r, ker[c])]);
        let drift = dissipator_apply(jumps, x)?;
        let y = linalg::hermitian_part(&(kb.adjoint() * drift * &kb));
        let (mu, w) = linalg::eigh(&y);
        let jscale: f64 = jumps.jumps().iter().map(|l| linalg::frobenius(l).powi(2)).sum();
        let ytol = DRIFT_SIGN_TOL * top.max(f64::MIN_POSITIVE) * jscale.max(1.0);
        let rotated = &kb * w;
        for (c, &k) in ker.iter().enumerate() {
            basis.set_column(k, &rotated.column(c));
            signs[k] = sign(mu[c], ytol);
        }
    }
    let dec = SignDecomposition { eigenvalues: lam.clone(), signs, basis, kernel };
    let mut value = 0.0;
    for l_op in jumps.jumps() {
        let m = dec.basis.adjoint() * l_op * &dec.basis;
        for k in 0..d {
            if dec.kernel[k] {
                continue;
            }
            for l in 0..d {
                let w = dec.weight(k, l);
                if w != 0.0 {
                    value -= lam[k].abs() * w * m[(l, k)].norm_sqr();
                }
            }
        }
    }
    Ok(RightDerivative { value, decomposition: dec, ambiguous })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::named::*;
    use crate::operators::JumpSet;
    use crate::linalg::projector;

    fn depolarizing(gamma: f64) -> LindbladModel {
        let g = C64::new(gamma.sqrt(), 0.0);
        LindbladModel::dissipative(JumpSet::new(2, vec![sigma_x() * g, sigma_y() * g, sigma_z() * g]).unwrap())
    }

    #[test]
    fn zero_generator_is_identity() {
        let m = LindbladModel::dissipative(JumpSet::empty(3));
        let mut rng = linalg::rng_from_seed(3);
        let x = linalg::random_hermitian(3, &mut rng);
        for scheme in [Scheme::ExpStep, Scheme::Rk4] {
            let opts = PropagatorOptions { scheme, ..Default::default() };
            let y = propagate(&m, 0.0, 2.0, &x, opts).unwrap();
            assert_eq!(linalg::max_abs_diff(&x, &y), 0.0);
        }
    }

    #[test]
    fn depolarizing_decay_of_difference() {
        let m = depolarizing(1.0);
        let rho = projector(&ket(2, 0));
        let sigma = projector(&ket(2, 1));
        let grid: Vec<f64> = (0..=10).map(|i| 0.1 * i as f64).collect();
        let env = contraction_envelope(&m, &rho, &sigma, &grid, PropagatorOptions::default()).unwrap();
        for (t, n) in grid.iter().zip(&env) {
            assert!((n - 2.0 * (-4.0 * t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn schemes_agree() {
        let l = sigma_z() + sigma_minus() * C64::new(2.0, 0.0);
        let m = LindbladModel::new(JumpSet::new(2, vec![l]).unwrap(), HamiltonianSchedule::Constant(sigma_y())).unwrap();
        let x = projector(&plus());
        let a = propagate(&m, 0.0, 1.5, &x, PropagatorOptions::default()).unwrap();
        let b = propagate(&m, 0.0, 1.5, &x, PropagatorOptions { scheme: Scheme::Rk4, ..Default::default() }).unwrap();
        assert!(linalg::max_abs_diff(&a, &b) < 1e-8);
    }

    #[test]
    fn piecewise_steps_split_at_breakpoints() {
        let jumps = JumpSet::new(2, vec![sigma_minus()]).unwrap();
        let sched = HamiltonianSchedule::PiecewiseConstant {
            breakpoints: vec![0.0, 0.35],
            segments: vec![sigma_x(), sigma_z()],
        };
        let m = LindbladModel::new(jumps.clone(), sched).unwrap();
        let x = projector(&plus());
        let got = propagate(&m, 0.0, 1.0, &x, PropagatorOptions::default()).unwrap();
        let m1 = LindbladModel::new(jumps.clone(), HamiltonianSchedule::Constant(sigma_x())).unwrap();
        let m2 = LindbladModel::new(jumps, HamiltonianSchedule::Constant(sigma_z())).unwrap();
        let mid = propagate(&m1, 0.0, 0.35, &x, PropagatorOptions::default()).unwrap();
        let want = propagate(&m2, 0.0, 0.65, &mid, PropagatorOptions::default()).unwrap();
        assert!(linalg::max_abs_diff(&got, &want) < 1e-12);
    }

    #[test]
    fn refinement_budget_reported() {
        let m = LindbladModel::new(
            JumpSet::new(2, vec![sigma_minus()]).unwrap(),
            HamiltonianSchedule::Constant(sigma_x() * C64::new(50.0, 0.0)),
        )
        .unwrap();
        let opts = PropagatorOptions { scheme: Scheme::Rk4, dt: 0.5, max_halvings: 1, ..Default::default() };
        let err = propagate(&m, 0.0, 1.0, &projector(&plus()), opts).unwrap_err();
        assert!(matches!(err, Error::RefinementExhausted { .. }));
    }

    #[test]
    fn rejects_bad_times() {
        let m = depolarizing(1.0);
        let x = projector(&plus());
        assert!(propagate(&m, 1.0, 0.5, &x, PropagatorOptions::default()).is_err());
        assert!(propagate(&m, -1.0, 0.5, &x, PropagatorOptions::default()).is_err());
    }

    #[test]
    fn derivative_without_jumps_vanishes() {
        let m = LindbladModel::new(JumpSet::empty(2), HamiltonianSchedule::Constant(sigma_x())).unwrap();
        let d = trace_norm_right_derivative(&m, 0.0, &sigma_z()).unwrap();
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn derivative_matches_depolarizing_decay() {
        let d = trace_norm_right_derivative(&depolarizing(1.0), 0.0, &sigma_z()).unwrap();
        // ‖σz‖₁ = 2 decays at rate 4.
        assert!((d.value + 8.0).abs() < 1e-12);
        assert!(!d.ambiguous);
    }
}
