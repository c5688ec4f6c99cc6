//! Dense complex linear algebra helpers on top of nalgebra.
//!
//! Vectorization is column-stacking throughout: `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.
//! nalgebra stores matrices column-major, so `vectorize` is a plain copy.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;
pub type SeededRng = ChaCha8Rng;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn rng_from_seed(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent stream for sub-task `index` of a seeded computation.
pub fn substream(seed: u64, index: u64) -> SeededRng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn zeros(d: usize) -> CMat {
    CMat::zeros(d, d)
}

pub fn dagger(a: &CMat) -> CMat {
    a.adjoint()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn trace(a: &CMat) -> C64 {
    a.trace()
}

/// Hilbert-Schmidt inner product `tr(A† B)`.
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    a * b + b * a
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

pub fn vectorize(x: &CMat) -> CVec {
    CVec::from_column_slice(x.as_slice())
}

pub fn unvectorize(v: &CVec, d: usize) -> CMat {
    CMat::from_column_slice(d, d, v.as_slice())
}

/// Eigen-decomposition of the Hermitian part of `a`, eigenvalues ascending.
pub fn eigh(a: &CMat) -> (Vec<f64>, CMat) {
    let eig = SymmetricEigen::new(hermitian_part(a));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(a.nrows(), n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn eigvalsh(a: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(hermitian_part(a))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Real symmetric eigen-decomposition, eigenvalues ascending.
pub fn eigh_real(a: &RMat) -> (Vec<f64>, RMat) {
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = RMat::zeros(a.nrows(), n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn eigvalsh_real(a: &RMat) -> Vec<f64> {
    eigh_real(a).0
}

/// Eigenvalues of a general complex square matrix (complex Schur form).
pub fn eigenvalues(a: &CMat) -> Vec<C64> {
    let n = a.nrows();
    if n == 0 {
        return Vec::new();
    }
    let eps = f64::EPSILON;
    let max_iter = 100 * n;
    let diag = |m: &CMat| m.diagonal().iter().copied().collect::<Vec<_>>();
    if let Some(s) = nalgebra::Schur::try_new(a.clone(), eps, max_iter) {
        return diag(&s.unpack().1);
    }
    // The shifted QR iteration occasionally stalls; a unitary similarity
    // keeps the spectrum and moves the iteration off the stall.
    for attempt in 0..8 {
        let q = random_unitary(n, &mut substream(0x5c4u64, attempt));
        let b = &q * a * q.adjoint();
        if let Some(s) = nalgebra::Schur::try_new(b, eps, max_iter) {
            return diag(&s.unpack().1);
        }
    }
    diag(&nalgebra::Schur::new(a.clone()).unpack().1)
}

/// Singular values in descending order.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = SVD::new(a.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Right null-space basis of a square matrix: columns `v` with `|A v|` below
/// `rel_tol * σ_max`. Also returns the sorted singular values.
pub fn null_space(a: &CMat, rel_tol: f64) -> (CMat, Vec<f64>) {
    let n = a.ncols();
    let svd = SVD::new(a.clone(), false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = s.iter().copied().fold(0.0, f64::max);
    let mut cols = Vec::new();
    for (i, &si) in s.iter().enumerate() {
        if smax == 0.0 || si < rel_tol * smax {
            cols.push(v_t.row(i).adjoint());
        }
    }
    // SVD of a square matrix has min(m,n) = n singular vectors, so every
    // null direction shows up as a small singular value.
    let mut basis = CMat::zeros(n, cols.len());
    for (k, c) in cols.iter().enumerate() {
        basis.set_column(k, c);
    }
    let mut sorted = s;
    sorted.sort_by(|x, y| y.total_cmp(x));
    (basis, sorted)
}

pub fn expm(a: &CMat) -> CMat {
    a.exp()
}

pub fn random_complex<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    CMat::from_fn(d, d, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    CVec::from_fn(d, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    hermitian_part(&random_complex(d, rng))
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = random_complex(d, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { ONE };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    let v = random_vector(d, rng);
    let n = v.norm();
    v / C64::new(n, 0.0)
}

/// Full-rank random density matrix `G G† / tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = random_complex(d, rng);
    let rho = &g * g.adjoint();
    let t = rho.trace();
    rho / t
}

pub fn projector(v: &CVec) -> CMat {
    v * v.adjoint()
}
