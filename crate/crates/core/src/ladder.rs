//! Ladder dissipators `L = √η Σ_j α_j |j−1⟩⟨j|`.
//!
//! The symmetrized, traceless-projected dissipator of a ladder splits into
//! real tri-diagonal blocks: one `P·B₀·P` on the diagonal operators and two
//! copies of `B_l` for each off-diagonal band `l ≥ 1`.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::linalg::{self, RMat, C64};
use crate::operators::{JumpSet, MAX_DIM};

pub const MAX_SCAN_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct LadderSpec {
    alphas: Vec<f64>,
    eta: f64,
}

impl LadderSpec {
    pub fn new(alphas: Vec<f64>, eta: f64) -> Result<Self> {
        if alphas.is_empty() {
            return Err(invalid("alphas", "need at least one coefficient"));
        }
        if alphas.len() + 1 > MAX_DIM {
            return Err(invalid("alphas", "dimension exceeds the supported maximum"));
        }
        if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(invalid("alphas", format!("coefficients must be positive, got {a}")));
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(invalid("eta", "must be positive"));
        }
        Ok(Self { alphas, eta })
    }

    /// Complex coefficients are gauged to their moduli by a diagonal unitary.
    pub fn from_complex(alphas: &[C64], eta: f64) -> Result<Self> {
        Self::new(alphas.iter().map(|a| a.norm()).collect(), eta)
    }

    pub fn dim(&self) -> usize {
        self.alphas.len() + 1
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `α_k` with `α_0 = 0` and zero beyond the top rung.
    fn alpha(&self, k: usize) -> f64 {
        if k == 0 || k > self.alphas.len() {
            0.0
        } else {
            self.alphas[k - 1]
        }
    }
}

pub fn ladder_jump(spec: &LadderSpec) -> JumpSet {
    let d = spec.dim();
    let mut l = linalg::zeros(d);
    let s = spec.eta.sqrt();
    for (j, a) in spec.alphas.iter().enumerate() {
        l[(j, j + 1)] = C64::new(s * a, 0.0);
    }
    JumpSet::new(d, vec![l]).expect("ladder jump has matching dimension")
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderBlocks {
    pub pb0p: RMat,
    /// `B_l` for `l = 1..d−1`.
    pub b: Vec<RMat>,
}

fn band_block(spec: &LadderSpec, l: usize) -> RMat {
    let n = spec.dim() - l;
    let h = -0.5 * spec.eta;
    let mut m = RMat::zeros(n, n);
    for k in 0..n {
        let a = spec.alpha(k);
        let b = spec.alpha(l + k);
        m[(k, k)] = h * (a * a + b * b);
        if k + 1 < n {
            let off = -h * spec.alpha(k + 1) * spec.alpha(l + k + 1);
            m[(k, k + 1)] = off;
            m[(k + 1, k)] = off;
        }
    }
    m
}

fn centering(d: usize) -> RMat {
    RMat::identity(d, d) - RMat::from_element(d, d, 1.0 / d as f64)
}

pub fn ladder_blocks(spec: &LadderSpec) -> LadderBlocks {
    let d = spec.dim();
    let p = centering(d);
    let pb0p = &p * band_block(spec, 0) * &p;
    let b = (1..d).map(|l| band_block(spec, l)).collect();
    LadderBlocks { pb0p, b }
}

impl LadderBlocks {
    /// Full eigenvalue multiset, descending, including the structural zero.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut all = linalg::eigvalsh_real(&self.pb0p);
        for b in &self.b {
            let w = linalg::eigvalsh_real(b);
            all.extend(w.iter().copied());
            all.extend(w.iter().copied());
        }
        all.sort_by(|a, b| b.total_cmp(a));
        all
    }

    /// Eigenvalues of `P·B₀·P` restricted to the complement of the all-ones vector.
    pub fn diagonal_sector(&self) -> Vec<f64> {
        let d = self.pb0p.nrows();
        // Helmert basis of the complement of the all-ones vector.
        let mut q = RMat::zeros(d, d - 1);
        for k in 1..d {
            let norm = ((k * (k + 1)) as f64).sqrt();
            for i in 0..k {
                q[(i, k - 1)] = 1.0 / norm;
            }
            q[(k, k - 1)] = -(k as f64) / norm;
        }
        linalg::eigvalsh_real(&(q.transpose() * &self.pb0p * &q))
    }
}

/// Largest eigenvalue of the ladder's projected symmetrized dissipator on
/// traceless operators.
pub fn ladder_mu2(spec: &LadderSpec) -> f64 {
    let blocks = ladder_blocks(spec);
    let mut best = f64::NEG_INFINITY;
    for w in blocks.diagonal_sector() {
        best = best.max(w);
    }
    for b in &blocks.b {
        for w in linalg::eigvalsh_real(b) {
            best = best.max(w);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderFamily {
    /// Harmonic oscillator: `α_j = √(γ j)`.
    Ho,
    /// Angular momentum: `α_j = √(γ j (d−j))`.
    Am,
    /// Uniform: `α_j = √γ`.
    Ul,
}

impl LadderFamily {
    pub fn spec(self, d: usize, gamma: f64) -> Result<LadderSpec> {
        if d < 2 {
            return Err(invalid("d", "ladder needs d >= 2"));
        }
        let alphas = (1..d)
            .map(|j| {
                let j = j as f64;
                match self {
                    Self::Ho => (gamma * j).sqrt(),
                    Self::Am => (gamma * j * (d as f64 - j)).sqrt(),
                    Self::Ul => gamma.sqrt(),
                }
            })
            .collect();
        LadderSpec::new(alphas, 1.0)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Ho => "ho",
            Self::Am => "am",
            Self::Ul => "ul",
        }
    }
}

impl std::str::FromStr for LadderFamily {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ho" => Ok(Self::Ho),
            "am" => Ok(Self::Am),
            "ul" => Ok(Self::Ul),
            other => Err(invalid("family", format!("unknown ladder family {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyRow {
    pub d: usize,
    pub mu2: f64,
}

/// `μ₂` for `d = 2..=d_max`.
pub fn family_scan(family: LadderFamily, d_max: usize, gamma: f64) -> Result<Vec<FamilyRow>> {
    if !(2..=MAX_SCAN_DIM).contains(&d_max) {
        return Err(invalid("d_max", format!("must lie in 2..={MAX_SCAN_DIM}")));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(invalid("gamma", "must be positive"));
    }
    (2..=d_max)
        .into_par_iter()
        .map(|d| Ok(FamilyRow { d, mu2: ladder_mu2(&family.spec(d, gamma)?) }))
        .collect()
}

/// Three-level ladder rate constant: `γ ≥ c_α η` for `L = |0⟩⟨1| + α|1⟩⟨2|`
/// whenever it is positive. A non-positive value means no certificate, not
/// non-contractivity.
pub fn c_alpha(alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(invalid("alpha", "must be positive"));
    }
    let a2 = alpha * alpha;
    let first = (2.0 + a2) / 4.0 - alpha / 4.0 * (4.0 + a2).sqrt();
    let second = (1.0 + a2) / 2.0 - ((1.0 - a2 + a2 * a2) / 3.0).sqrt();
    Ok(first.min(second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superop::{build_dtilde, HermitianBasis};

    #[test]
    fn family_coefficients() {
        let ho = LadderFamily::Ho.spec(3, 1.0).unwrap();
        assert!((ho.alphas()[1] - 2f64.sqrt()).abs() < 1e-15);
        let am = LadderFamily::Am.spec(3, 1.0).unwrap();
        assert!(am.alphas().iter().all(|a| (a - 2f64.sqrt()).abs() < 1e-15));
        let ul = LadderFamily::Ul.spec(4, 2.0).unwrap();
        assert_eq!(ul.alphas().len(), 3);
        assert!(ul.alphas().iter().all(|a| (a - 2f64.sqrt()).abs() < 1e-15));
    }

    #[test]
    fn qubit_blocks() {
        let g: f64 = 0.7;
        let spec = LadderSpec::new(vec![g.sqrt()], 1.0).unwrap();
        let b0 = band_block(&spec, 0);
        assert!((b0[(0, 0)]).abs() < 1e-15);
        assert!((b0[(0, 1)] - g / 2.0).abs() < 1e-15);
        assert!((b0[(1, 1)] + g).abs() < 1e-15);
        let blocks = ladder_blocks(&spec);
        assert!((blocks.b[0][(0, 0)] + g / 2.0).abs() < 1e-15);
        assert!((ladder_mu2(&spec) + g / 2.0).abs() < 1e-12);
    }

    #[test]
    fn top_block_is_scalar() {
        let spec = LadderSpec::new(vec![0.3, 1.1, 2.0], 1.5).unwrap();
        let blocks = ladder_blocks(&spec);
        let top = blocks.b.last().unwrap();
        assert_eq!(top.shape(), (1, 1));
        assert!((top[(0, 0)] + 0.5 * 1.5 * 4.0).abs() < 1e-14);
    }

    #[test]
    fn blocks_match_full_operator() {
        let spec = LadderSpec::new(vec![0.7, 1.3, 0.4, 2.2], 0.9).unwrap();
        let full = build_dtilde(&ladder_jump(&spec), &HermitianBasis::standard(5)).unwrap();
        let mut w = linalg::eigvalsh_real(&full);
        w.sort_by(|a, b| b.total_cmp(a));
        let blocks = ladder_blocks(&spec).eigenvalues();
        for (a, b) in w.iter().zip(&blocks) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn c_alpha_interval() {
        assert!((c_alpha(1.0).unwrap() - (3.0 - 5f64.sqrt()) / 4.0).abs() < 1e-14);
        assert!(c_alpha(3f64.sqrt() - 2f64.sqrt()).unwrap().abs() < 1e-9);
        assert!(c_alpha(4.0).unwrap() < 0.0);
    }

    #[test]
    fn complex_coefficients_gauge_away() {
        let a = LadderSpec::from_complex(&[C64::new(0.0, 1.0), C64::from_polar(2.0, 0.4)], 1.0).unwrap();
        assert_eq!(a.alphas(), &[1.0, 2.0]);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(LadderSpec::new(vec![], 1.0).is_err());
        assert!(LadderSpec::new(vec![1.0, 0.0], 1.0).is_err());
        assert!(LadderSpec::new(vec![1.0], -1.0).is_err());
        assert!(family_scan(LadderFamily::Ho, 17, 1.0).is_err());
        assert!(family_scan(LadderFamily::Ho, 1, 1.0).is_err());
    }
}
