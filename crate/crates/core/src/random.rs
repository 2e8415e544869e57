//! Random spectra, states and operators for property tests and benchmarks.

use rand::Rng;

use crate::linalg::{self, c, CMat, CVec};
use crate::spectrum::{GeneratorSpectrum, Sector};
use crate::states::{from_vector, mixed_es, DensityMatrix, MixedES, PureState};

/// Up to `max_sectors` sectors with distinct `g` in `(0.1, 5)`, and a zero
/// state with probability 1/2.
pub fn random_spectrum<R: Rng + ?Sized>(rng: &mut R, max_sectors: usize) -> GeneratorSpectrum {
    let k = rng.random_range(1..=max_sectors.max(1));
    let mut g: Vec<f64> = Vec::with_capacity(k);
    while g.len() < k {
        let v = rng.random_range(0.1..5.0);
        if g.iter().all(|&x| (x - v).abs() > 1e-3) {
            g.push(v);
        }
    }
    g.sort_by(f64::total_cmp);
    let sectors = g.into_iter().enumerate().map(|(i, g)| Sector { n: i as u32 + 1, g }).collect();
    GeneratorSpectrum::new(sectors, rng.random_range(0..=1)).expect("distinct positive g")
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> num_complex::Complex64 {
    c(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMat {
    let a = CMat::from_fn(dim, dim, |_, _| random_complex(rng));
    (&a + a.adjoint()).scale(0.5)
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVec {
    let v = CVec::from_fn(dim, |_, _| random_complex(rng));
    let norm = v.norm();
    v.unscale(norm)
}

/// Haar-like random pure state. At most one zero-sector component is
/// populated.
pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, spectrum: &GeneratorSpectrum) -> PureState {
    let mut v = random_unit_vector(rng, spectrum.dim());
    for i in spectrum.zero_indices().skip(1) {
        v[i] = c(0.0, 0.0);
    }
    let norm = v.norm();
    from_vector(spectrum, &v.unscale(norm)).expect("normalized, single zero component")
}

pub fn random_probabilities<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// `gamma_mn = sqrt(p_m p_n) C_mn` with `C` a random correlation matrix.
pub fn random_gamma<R: Rng + ?Sized>(rng: &mut R, p: &[f64]) -> CMat {
    let k = p.len();
    let a = CMat::from_fn(k, k, |_, _| random_complex(rng));
    let m = &a * a.adjoint();
    let mut gamma = CMat::from_fn(k, k, |i, j| m[(i, j)] * (p[i] * p[j]).sqrt() / (m[(i, i)].re * m[(j, j)].re).sqrt());
    for i in 0..k {
        gamma[(i, i)] = c(p[i], 0.0);
    }
    gamma
}

pub fn random_betas<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    (0..k).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
}

pub fn random_mixed_es<R: Rng + ?Sized>(rng: &mut R, spectrum: &GeneratorSpectrum) -> MixedES {
    let p = random_probabilities(rng, spectrum.num_sectors());
    let beta = random_betas(rng, p.len());
    let gamma = random_gamma(rng, &p);
    mixed_es(spectrum, &p, &beta, &gamma).expect("admissible gamma")
}

/// Full-rank random density matrix `A A^dagger / tr`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let a = CMat::from_fn(dim, dim, |_, _| random_complex(rng));
    let m = &a * a.adjoint();
    let tr = linalg::trace(&m).re;
    let m = m.unscale(tr);
    DensityMatrix::new((&m + m.adjoint()).scale(0.5)).expect("positive, unit trace")
}
