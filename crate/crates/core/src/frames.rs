//! Minimization over orthonormal pairs `(u, v)` of objectives
//! `f(u, v) = Σ_k |⟨v|A_k|u⟩ + ⟨u|B_k|v⟩|²`.
//!
//! Random complex Gaussian QR starts, Riemannian gradient descent on the
//! Stiefel manifold of two-frames with QR retraction and Armijo backtracking.

use rayon::prelude::*;

use crate::linalg::{self, CMat, CVec, C64};

#[derive(Debug, Clone)]
pub struct PairTerm {
    pub a: Option<CMat>,
    pub b: Option<CMat>,
}

#[derive(Debug, Clone)]
pub struct PairObjective {
    dim: usize,
    terms: Vec<PairTerm>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairMinimum {
    pub value: f64,
    pub u: CVec,
    pub v: CVec,
    /// Best value stable (< 1e-8 change) over the last half of the restarts.
    pub saturated: bool,
    pub restarts: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct PairSearch {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for PairSearch {
    fn default() -> Self {
        Self {
            restarts: 64,
            seed: 0,
            max_iter: 2000,
        }
    }
}

impl PairObjective {
    pub fn new(dim: usize, terms: Vec<PairTerm>) -> Self {
        Self { dim, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Σ_k (‖A_k‖_F + ‖B_k‖_F)²`, a natural magnitude for the objective.
    pub fn scale(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let a = t.a.as_ref().map_or(0.0, linalg::frobenius);
                let b = t.b.as_ref().map_or(0.0, linalg::frobenius);
                (a + b) * (a + b)
            })
            .sum()
    }

    fn amplitude(t: &PairTerm, u: &CVec, v: &CVec) -> C64 {
        let mut a = C64::new(0.0, 0.0);
        if let Some(m) = &t.a {
            a += v.dotc(&(m * u));
        }
        if let Some(m) = &t.b {
            a += u.dotc(&(m * v));
        }
        a
    }

    pub fn value(&self, u: &CVec, v: &CVec) -> f64 {
        self.terms
            .iter()
            .map(|t| Self::amplitude(t, u, v).norm_sqr())
            .sum()
    }

    /// Value and the Euclidean gradients `2 ∂f/∂ū`, `2 ∂f/∂v̄`.
    pub fn value_and_gradient(&self, u: &CVec, v: &CVec) -> (f64, CVec, CVec) {
        let mut f = 0.0;
        let mut gu = CVec::zeros(self.dim);
        let mut gv = CVec::zeros(self.dim);
        for t in &self.terms {
            let amp = Self::amplitude(t, u, v);
            f += amp.norm_sqr();
            if let Some(m) = &t.a {
                gu += m.adjoint() * v * amp;
                gv += m * u * amp.conj();
            }
            if let Some(m) = &t.b {
                gu += m * v * amp.conj();
                gv += m.adjoint() * u * amp;
            }
        }
        let two = C64::new(2.0, 0.0);
        (f, gu * two, gv * two)
    }

    fn local_descent(&self, mut u: CVec, mut v: CVec, max_iter: usize) -> (f64, CVec, CVec) {
        let (mut f, mut gu, mut gv) = self.value_and_gradient(&u, &v);
        let mut step = 1.0 / self.scale().max(1e-300);
        for _ in 0..max_iter {
            // Project onto the tangent space of the two-frame W = [u v]:
            // grad - W · sym(W† grad).
            let uu = u.dotc(&gu);
            let uv = u.dotc(&gv);
            let vu = v.dotc(&gu);
            let vv = v.dotc(&gv);
            let s01 = (uv + vu.conj()) * 0.5;
            let ru = &gu - &u * C64::new(uu.re, 0.0) - &v * s01.conj();
            let rv = &gv - &u * s01 - &v * C64::new(vv.re, 0.0);
            let gnorm2 = ru.norm_squared() + rv.norm_squared();
            if gnorm2.sqrt() < 1e-14 * self.scale().max(1e-300) {
                break;
            }
            let mut accepted = false;
            for _ in 0..60 {
                let (nu, nv) = retract(&(&u - &ru * C64::new(step, 0.0)), &(&v - &rv * C64::new(step, 0.0)));
                let (fnew, gun, gvn) = self.value_and_gradient(&nu, &nv);
                if fnew <= f - 1e-4 * step * gnorm2 {
                    let improvement = f - fnew;
                    u = nu;
                    v = nv;
                    f = fnew;
                    gu = gun;
                    gv = gvn;
                    step *= 2.0;
                    accepted = true;
                    if improvement <= 1e-16 * f.max(self.scale() * 1e-10) {
                        return (f, u, v);
                    }
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        (f, u, v)
    }

    /// Refine a given start pair.
    pub fn refine(&self, u: &CVec, v: &CVec, max_iter: usize) -> (f64, CVec, CVec) {
        let (u, v) = retract(u, v);
        self.local_descent(u, v, max_iter)
    }

    /// Best local minimum over `restarts` random starts. Deterministic for a
    /// given seed regardless of thread count.
    pub fn minimize(&self, search: PairSearch) -> PairMinimum {
        let restarts = search.restarts.max(1);
        let results: Vec<(f64, CVec, CVec)> = (0..restarts)
            .into_par_iter()
            .map(|k| {
                let mut rng = linalg::substream(search.seed, k as u64);
                let q = linalg::random_unitary(self.dim, &mut rng);
                let u = q.column(0).into_owned();
                let v = q.column(1).into_owned();
                self.local_descent(u, v, search.max_iter)
            })
            .collect();
        let mut best_idx = 0;
        let mut history = Vec::with_capacity(restarts);
        let mut best = f64::INFINITY;
        for (k, r) in results.iter().enumerate() {
            if r.0 < best {
                best = r.0;
                best_idx = k;
            }
            history.push(best);
        }
        let half = restarts / 2;
        let saturated = restarts >= 2 && (history[half.max(1) - 1] - best).abs() < 1e-8;
        let (value, u, v) = results[best_idx].clone();
        PairMinimum {
            value,
            u,
            v,
            saturated,
            restarts,
        }
    }
}

/// Gram-Schmidt (QR) retraction of a two-frame.
pub fn retract(u: &CVec, v: &CVec) -> (CVec, CVec) {
    let nu = u.norm();
    let u = u / C64::new(nu, 0.0);
    let v = v - &u * u.dotc(v);
    let v = &v - &u * u.dotc(&v);
    let nv = v.norm();
    let v = v / C64::new(nv, 0.0);
    (u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rng_from_seed;

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rng_from_seed(1);
        let d = 3;
        let obj = PairObjective::new(
            d,
            vec![
                PairTerm { a: Some(linalg::random_complex(d, &mut rng)), b: None },
                PairTerm {
                    a: Some(linalg::random_complex(d, &mut rng)),
                    b: Some(linalg::random_complex(d, &mut rng)),
                },
            ],
        );
        let u = linalg::random_vector(d, &mut rng);
        let v = linalg::random_vector(d, &mut rng);
        let (_, gu, gv) = obj.value_and_gradient(&u, &v);
        let h = 1e-6;
        for i in 0..d {
            for (dir, expect_u) in [(C64::new(1.0, 0.0), true), (C64::new(0.0, 1.0), true)] {
                let _ = expect_u;
                let mut up = u.clone();
                up[i] += dir * h;
                let mut um = u.clone();
                um[i] -= dir * h;
                let fd = (obj.value(&up, &v) - obj.value(&um, &v)) / (2.0 * h);
                // Directional derivative along dir·e_i is Re(conj(g_i)·dir).
                let an = (gu[i].conj() * dir).re;
                assert!((fd - an).abs() < 1e-6 * (1.0 + an.abs()), "u {i}: {fd} vs {an}");
                let mut vp = v.clone();
                vp[i] += dir * h;
                let mut vm = v.clone();
                vm[i] -= dir * h;
                let fd = (obj.value(&u, &vp) - obj.value(&u, &vm)) / (2.0 * h);
                let an = (gv[i].conj() * dir).re;
                assert!((fd - an).abs() < 1e-6 * (1.0 + an.abs()), "v {i}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn retraction_is_orthonormal() {
        let mut rng = rng_from_seed(2);
        let (u, v) = retract(&linalg::random_vector(4, &mut rng), &linalg::random_vector(4, &mut rng));
        assert!((u.norm() - 1.0).abs() < 1e-14);
        assert!((v.norm() - 1.0).abs() < 1e-14);
        assert!(u.dotc(&v).norm() < 1e-14);
    }

    #[test]
    fn finds_zero_of_diagonal_objective() {
        // ⟨v|Z|u⟩ vanishes for distinct eigenvectors of a diagonal Z.
        let d = 3;
        let z = CMat::from_diagonal(&CVec::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(2.0, 0.0),
            C64::new(-0.5, 0.0),
        ]));
        let obj = PairObjective::new(d, vec![PairTerm { a: Some(z), b: None }]);
        let m = obj.minimize(PairSearch { restarts: 8, ..Default::default() });
        assert!(m.value < 1e-12);
        assert!(m.u.dotc(&m.v).norm() < 1e-10);
    }
}
