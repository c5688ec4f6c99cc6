//! Contraction rates that survive perturbations of a contractive generator:
//! bounded perturbations, slowly varying generators, small and slow drives,
//! and perturbations that are only small on average.
//!
//! Every rate here comes from the same window argument. If the evolution over
//! a window of length `τ = x/γ` has trace-norm contraction factor `c(x) < 1`,
//! then `‖Φ(t)‖ ≤ c⁻¹ e^{−γ̃t}` with `γ̃ = −(γ/x)·ln c(x)`, and the window
//! length is chosen to maximize `γ̃`.

use crate::error::{invalid, Result};

/// Window lengths searched, in units of `1/γ`.
pub const WINDOW_RANGE: (f64, f64) = (1e-6, 100.0);
const GRID_POINTS: usize = 2000;
const FALLBACK_POINTS: usize = 20000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseContraction {
    pub k: f64,
    pub gamma: f64,
}

impl BaseContraction {
    pub fn new(k: f64, gamma: f64) -> Result<Self> {
        if !(k.is_finite() && k >= 1.0) {
            return Err(invalid("K", format!("must be >= 1, got {k}")));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(invalid("gamma", format!("must be positive, got {gamma}")));
        }
        Ok(Self { k, gamma })
    }
}

/// The supremum over window lengths is only approached in a limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowLimit {
    /// `x → 0`.
    Vanishing,
    /// `x → ∞`.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedContraction {
    pub k_tilde: f64,
    pub gamma_tilde: f64,
    pub x_star: f64,
    pub feasible: bool,
    pub limit: Option<WindowLimit>,
    /// Whether the rate profile over the window grid was unimodal, so that
    /// golden-section refinement applies directly.
    pub unimodal: bool,
}

impl PerturbedContraction {
    fn infeasible(unimodal: bool) -> Self {
        Self {
            k_tilde: 1.0,
            gamma_tilde: 0.0,
            x_star: 0.0,
            feasible: false,
            limit: None,
            unimodal,
        }
    }

    fn exact(k_tilde: f64, gamma_tilde: f64, limit: WindowLimit) -> Self {
        Self {
            k_tilde,
            gamma_tilde,
            x_star: if limit == WindowLimit::Vanishing { 0.0 } else { f64::INFINITY },
            feasible: gamma_tilde > 0.0,
            limit: Some(limit),
            unimodal: true,
        }
    }

    fn with_feasibility(self) -> Self {
        if self.feasible {
            self
        } else {
            Self::infeasible(true)
        }
    }
}

fn rate(gamma: f64, c: &dyn Fn(f64) -> f64, x: f64) -> f64 {
    let cx = c(x);
    // A non-positive window factor means the bound degenerated; skip it.
    if cx > 0.0 {
        -gamma / x * cx.ln()
    } else {
        f64::NEG_INFINITY
    }
}

fn log_grid(n: usize) -> Vec<f64> {
    let (lo, hi) = (WINDOW_RANGE.0.ln(), WINDOW_RANGE.1.ln());
    (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn golden(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while (b - a) > 1e-13 * b.abs().max(1e-300) {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    if f1 > f2 { x1 } else { x2 }
}

/// Maximize `−(γ/x) ln c(x)` over the window range.
fn maximize(gamma: f64, c: &dyn Fn(f64) -> f64) -> PerturbedContraction {
    let g = |x: f64| rate(gamma, c, x);
    let xs = log_grid(GRID_POINTS);
    let vals: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    let best = argmax(&vals);
    let slack = 1e-13 * vals[best].abs().max(1e-300);
    let unimodal = vals[..=best].windows(2).all(|w| w[1] >= w[0] - slack)
        && vals[best..].windows(2).all(|w| w[1] <= w[0] + slack);
    let (xs, vals, best) = if unimodal {
        (xs, vals, best)
    } else {
        let xs = log_grid(FALLBACK_POINTS);
        let vals: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
        let best = argmax(&vals);
        (xs, vals, best)
    };
    let lo = xs[best.saturating_sub(1)];
    let hi = xs[(best + 1).min(xs.len() - 1)];
    let mut x = golden(&g, lo, hi);
    if g(x) < vals[best] {
        x = xs[best];
    }
    let value = g(x);
    if !(value > 0.0) {
        return PerturbedContraction::infeasible(unimodal);
    }
    PerturbedContraction {
        k_tilde: (x * value / gamma).exp(),
        gamma_tilde: value,
        x_star: x,
        feasible: true,
        limit: None,
        unimodal,
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

fn nonnegative(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and >= 0, got {v}")))
    }
}

/// Rate of a generator within `delta_l` (in the induced trace-norm) of one
/// contracting with `base`. Feasible iff `delta_l < γ/(1 + ln K)`.
pub fn perturbed_rate(base: BaseContraction, delta_l: f64) -> Result<PerturbedContraction> {
    let base = BaseContraction::new(base.k, base.gamma)?;
    nonnegative("deltaL", delta_l)?;
    let BaseContraction { k, gamma } = base;
    if k == 1.0 {
        return Ok(PerturbedContraction::exact(1.0, gamma - delta_l, WindowLimit::Vanishing)
            .with_feasibility());
    }
    if delta_l == 0.0 {
        return Ok(PerturbedContraction::exact(k, gamma, WindowLimit::Unbounded));
    }
    let a = delta_l / gamma;
    let lk = k.ln();
    let c = move |x: f64| (1.0 + lk) * a + k * (1.0 - a) * (-x).exp();
    Ok(maximize(gamma, &c))
}

/// Coefficients of the window factor `A + B e^{−x} − C x e^{−x}` for a
/// generator whose time derivative is bounded by `l`.
pub fn slow_drive_coefficients(base0: BaseContraction, l: f64) -> (f64, f64, f64) {
    let lk = base0.k.ln();
    let g2 = base0.gamma * base0.gamma;
    let a = l / g2 * (0.75 + 0.5 * lk + 0.25 * lk * lk);
    let b = base0.k * (1.0 - l * (1.0 - lk) / (2.0 * g2));
    let c = l * base0.k / g2;
    (a, b, c)
}

/// Rate for a generator `L_t` that is instantaneously contracting with
/// `base0` at every time and has `‖dL_t/dt‖ ≤ l`.
pub fn slow_drive_rate(base0: BaseContraction, l: f64) -> Result<PerturbedContraction> {
    let base0 = BaseContraction::new(base0.k, base0.gamma)?;
    nonnegative("l", l)?;
    if l == 0.0 {
        let limit = if base0.k == 1.0 { WindowLimit::Vanishing } else { WindowLimit::Unbounded };
        return Ok(PerturbedContraction::exact(base0.k, base0.gamma, limit));
    }
    let (a, b, c) = slow_drive_coefficients(base0, l);
    let f = move |x: f64| a + (b - c * x) * (-x).exp();
    Ok(maximize(base0.gamma, &f))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveCheck {
    pub threshold: f64,
    pub passed: bool,
    /// Rate certified for the driven dynamics, when the threshold test passes.
    pub contraction: Option<PerturbedContraction>,
}

/// A Hamiltonian drive `V(t)` with `sup_t ‖V(t)‖∞ = v_max` on top of a
/// contracting generator. The commutator bound gives `ΔL ≤ 2 v_max`.
pub fn small_drive_check(base: BaseContraction, v_max: f64) -> Result<DriveCheck> {
    let base = BaseContraction::new(base.k, base.gamma)?;
    nonnegative("v_max", v_max)?;
    let threshold = base.gamma / (2.0 + 2.0 * base.k.ln());
    let passed = v_max < threshold;
    let contraction = if passed { Some(perturbed_rate(base, 2.0 * v_max)?) } else { None };
    Ok(DriveCheck { threshold, passed, contraction })
}

/// A Hamiltonian with `sup_t ‖dH/dt‖∞ = h_dot_max` whose frozen generators
/// all contract with `base0`.
pub fn slow_drive_check(base0: BaseContraction, h_dot_max: f64) -> Result<DriveCheck> {
    let base0 = BaseContraction::new(base0.k, base0.gamma)?;
    nonnegative("h_dot_max", h_dot_max)?;
    let lk = base0.k.ln();
    let threshold = (2.0 * base0.gamma * base0.gamma / 3.0) / (1.0 + 2.0 / 3.0 * lk + lk * lk / 3.0);
    let passed = h_dot_max < threshold;
    let contraction = if passed { Some(slow_drive_rate(base0, 2.0 * h_dot_max)?) } else { None };
    Ok(DriveCheck { threshold, passed, contraction })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AverageKind {
    /// Time average of the generator perturbation `‖ΔL(t)‖`.
    Perturbation,
    /// Time average of the drive `‖V(t)‖∞`; bounds the perturbation average by twice it.
    Drive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeAverageReport {
    /// Window contraction factor `T·avg(ΔL) + K e^{−γT}`.
    pub window_factor: f64,
    pub passed: bool,
    /// `(K_D, γ_D)` from the window factor, when it is below one.
    pub constants: Option<(f64, f64)>,
    /// The fixed-constant recipe for drives: `T ≥ ln(4K)/γ` and
    /// `avg(‖V‖∞) ≤ 1/(2T)` yield `(4/3, ln(4/3)/T)`. `None` for
    /// perturbation averages.
    pub fixed_recipe: Option<FixedRecipe>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedRecipe {
    pub passed: bool,
    pub k_d: f64,
    pub gamma_d: f64,
}

pub fn time_average_check(
    base: BaseContraction,
    avg: f64,
    kind: AverageKind,
    period: f64,
) -> Result<TimeAverageReport> {
    let base = BaseContraction::new(base.k, base.gamma)?;
    nonnegative("avg", avg)?;
    let BaseContraction { k, gamma } = base;
    if !(period.is_finite() && period > k.ln() / gamma) {
        return Err(invalid("T", format!("must exceed ln(K)/gamma = {}", k.ln() / gamma)));
    }
    let avg_dl = match kind {
        AverageKind::Perturbation => avg,
        AverageKind::Drive => 2.0 * avg,
    };
    let window_factor = avg_dl * period + k * (-gamma * period).exp();
    let passed = window_factor < 1.0;
    let constants = passed.then(|| (1.0 / window_factor, -window_factor.ln() / period));
    let fixed_recipe = (kind == AverageKind::Drive).then(|| FixedRecipe {
        passed: period >= (4.0 * k).ln() / gamma && avg <= 1.0 / (2.0 * period),
        k_d: 4.0 / 3.0,
        gamma_d: (4.0f64 / 3.0).ln() / period,
    });
    Ok(TimeAverageReport { window_factor, passed, constants, fixed_recipe })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(k: f64, g: f64) -> BaseContraction {
        BaseContraction::new(k, g).unwrap()
    }

    #[test]
    fn unit_prefactor_is_exact() {
        let p = perturbed_rate(base(1.0, 1.0), 0.3).unwrap();
        assert_eq!(p.k_tilde, 1.0);
        assert!((p.gamma_tilde - 0.7).abs() < 1e-15);
        assert!(!perturbed_rate(base(1.0, 1.0), 1.2).unwrap().feasible);
    }

    #[test]
    fn zero_perturbation_returns_base() {
        let p = perturbed_rate(base(3.0, 0.5), 0.0).unwrap();
        assert_eq!((p.k_tilde, p.gamma_tilde), (3.0, 0.5));
        assert_eq!(p.limit, Some(WindowLimit::Unbounded));
    }

    #[test]
    fn feasibility_boundary() {
        let b = base(2.0, 1.0);
        let edge = 1.0 / (1.0 + 2f64.ln());
        assert!(perturbed_rate(b, 0.5).unwrap().feasible);
        assert!(!perturbed_rate(b, edge * 1.001).unwrap().feasible);
        let near = perturbed_rate(b, edge * (1.0 - 1e-4)).unwrap();
        assert!(near.feasible && near.gamma_tilde < 1e-3);
    }

    #[test]
    fn small_drive_examples() {
        let c = small_drive_check(base(1.0, 1.0), 0.4).unwrap();
        assert!(c.passed);
        assert!((c.contraction.unwrap().gamma_tilde - 0.2).abs() < 1e-15);
        let c = small_drive_check(base(std::f64::consts::E, 1.0), 0.3).unwrap();
        assert!(!c.passed && c.contraction.is_none());
    }

    #[test]
    fn slow_drive_examples() {
        let p = slow_drive_rate(base(1.0, 1.3), 0.0).unwrap();
        assert_eq!((p.k_tilde, p.gamma_tilde), (1.0, 1.3));
        let c = slow_drive_check(base(1.0, 1.0), 0.0).unwrap();
        assert!((c.threshold - 2.0 / 3.0).abs() < 1e-15);
        assert!(slow_drive_rate(base(1.0, 1.0), 4.0 / 3.0 * 0.99).unwrap().feasible);
    }

    #[test]
    fn time_average_examples() {
        let r = time_average_check(base(1.0, 1.0), 0.4, AverageKind::Perturbation, 2.0).unwrap();
        assert!(r.passed && r.fixed_recipe.is_none());
        let t = 4f64.ln();
        let r = time_average_check(base(1.0, 1.0), 1.0 / (2.0 * t), AverageKind::Drive, t).unwrap();
        let f = r.fixed_recipe.unwrap();
        assert!(f.passed);
        assert_eq!(f.k_d, 4.0 / 3.0);
        assert!((f.gamma_d - (4.0f64 / 3.0).ln() / t).abs() < 1e-15);
        assert!(time_average_check(base(2.0, 1.0), 0.0, AverageKind::Drive, 0.5).is_err());
    }

    #[test]
    fn rejects_invalid_base() {
        assert!(BaseContraction::new(0.5, 1.0).is_err());
        assert!(BaseContraction::new(1.0, 0.0).is_err());
        assert!(perturbed_rate(BaseContraction { k: 1.0, gamma: -1.0 }, 0.1).is_err());
        assert!(perturbed_rate(base(1.0, 1.0), -0.1).is_err());
    }
}
