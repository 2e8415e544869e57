//! Dense complex linear algebra helpers on top of `nalgebra`.
//!
//! Every matrix in the toolkit is a `DMatrix<Complex64>`. Functions of
//! Hermitian matrices (exponentials, parities, square roots) all go through
//! [`eigh`], which returns eigenvalues in ascending order.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

pub fn real_diagonal(values: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(values.len(), values.iter().map(|&v| c(v, 0.0))))
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_deviation(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
/// Columns of the returned matrix are the matching eigenvectors.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    // Symmetrize so the solver sees an exactly Hermitian input.
    let h = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    eigh(m).0
}

/// `f(H)` for Hermitian `H`, built from its spectral decomposition.
pub fn hermitian_function(h: &CMat, f: impl Fn(f64) -> Complex64) -> CMat {
    let (values, vectors) = eigh(h);
    let diag = CVec::from_iterator(values.len(), values.iter().map(|&v| f(v)));
    &vectors * CMat::from_diagonal(&diag) * vectors.adjoint()
}

/// `exp(-i H t)`.
pub fn unitary_propagator(h: &CMat, t: f64) -> CMat {
    hermitian_function(h, |e| cis(-e * t))
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_norm(h: &CMat) -> f64 {
    eigvalsh(h).iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// Trace distance `||a - b||_1 / 2` between Hermitian matrices.
pub fn trace_distance(a: &CMat, b: &CMat) -> f64 {
    0.5 * eigvalsh(&(a - b)).iter().map(|v| v.abs()).sum::<f64>()
}

pub fn outer(a: &CVec, b: &CVec) -> CMat {
    a * b.adjoint()
}

/// Trace out the second factor of a `sys_dim x env_dim` product space
/// stored system-major (index = s * env_dim + e).
pub fn partial_trace_second(rho: &CMat, sys_dim: usize, env_dim: usize) -> CMat {
    let mut out = CMat::zeros(sys_dim, sys_dim);
    for i in 0..sys_dim {
        for j in 0..sys_dim {
            let mut acc = ZERO;
            for e in 0..env_dim {
                acc += rho[(i * env_dim + e, j * env_dim + e)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Max entrywise deviation between `b` and `e^{i phase} a`, with the phase
/// chosen from the Hilbert-Schmidt overlap of the two matrices.
pub fn global_phase_deviation(a: &CMat, b: &CMat) -> f64 {
    let overlap: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE };
    max_abs(&(a.map(|z| z * phase) - b))
}

/// Wrap an angle into `[-pi, pi)`.
pub fn wrap_angle(x: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y >= PI {
        y - TAU
    } else {
        y
    }
}
