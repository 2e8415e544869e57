//! Input states in the qubit-sector representation.
//!
//! A pure state is stored per sector as `sqrt(p) e^{i phi} |alpha, beta>`
//! with
//!
//! ```text
//! |alpha, beta> = cos(alpha/2) e^{-i beta/2} |up> + sin(alpha/2) e^{i beta/2} |down>
//! ```
//!
//! plus a single complex amplitude on the zero sector. `beta` is kept
//! unwrapped: the pair `(phi, beta)` and `(phi + pi, beta + 2 pi)` describe the
//! same amplitudes, and phase encoding shifts `beta` by `2 g theta` while
//! leaving `phi` alone.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, cis, CMat, CVec, ZERO};
use crate::spectrum::{sz_spectrum, GeneratorSpectrum};

pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorState {
    pub p: f64,
    pub phi: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl SectorState {
    pub fn equatorial(p: f64, beta: f64, phi: f64) -> Self {
        Self { p, phi, alpha: FRAC_PI_2, beta }
    }

    /// `(up, down)` amplitudes of this sector.
    pub fn amplitudes(&self) -> (Complex64, Complex64) {
        let r = self.p.max(0.0).sqrt();
        let half = self.alpha / 2.0;
        let up = cis(self.phi - self.beta / 2.0) * (r * half.cos());
        let down = cis(self.phi + self.beta / 2.0) * (r * half.sin());
        (up, down)
    }

    /// Inverse of [`SectorState::amplitudes`]; `beta` lands in `[-pi, pi)`.
    pub fn from_amplitudes(up: Complex64, down: Complex64) -> Self {
        let p = up.norm_sqr() + down.norm_sqr();
        if p == 0.0 {
            return Self::equatorial(0.0, 0.0, 0.0);
        }
        let alpha = 2.0 * down.norm().atan2(up.norm());
        let (phi, beta) = if down.norm() == 0.0 {
            (up.arg(), 0.0)
        } else if up.norm() == 0.0 {
            (down.arg(), 0.0)
        } else {
            let beta = linalg::wrap_angle(down.arg() - up.arg());
            (up.arg() + beta / 2.0, beta)
        };
        Self { p, phi, alpha, beta }
    }
}

/// Normalized `|alpha, beta>` of sector position `k`, embedded in the full space.
pub fn sector_ket(spectrum: &GeneratorSpectrum, k: usize, alpha: f64, beta: f64) -> CVec {
    let mut v = CVec::zeros(spectrum.dim());
    let s = SectorState { p: 1.0, phi: 0.0, alpha, beta };
    let (up, down) = s.amplitudes();
    v[spectrum.up_index(k)] = up;
    v[spectrum.down_index(k)] = down;
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPureState")]
pub struct PureState {
    spectrum: GeneratorSpectrum,
    sectors: Vec<SectorState>,
    zero_amp: Complex64,
}

#[derive(Deserialize)]
struct RawPureState {
    spectrum: GeneratorSpectrum,
    sectors: Vec<SectorState>,
    #[serde(default)]
    zero_amp: Complex64,
}

impl TryFrom<RawPureState> for PureState {
    type Error = Error;

    fn try_from(raw: RawPureState) -> Result<Self> {
        pure_from_sectors(&raw.spectrum, raw.sectors, raw.zero_amp)
    }
}

pub fn pure_from_sectors(
    spectrum: &GeneratorSpectrum,
    sectors: Vec<SectorState>,
    zero_amp: Complex64,
) -> Result<PureState> {
    if sectors.len() != spectrum.num_sectors() {
        return Err(Error::DimensionMismatch { expected: spectrum.num_sectors(), got: sectors.len() });
    }
    for (k, s) in sectors.iter().enumerate() {
        if ![s.p, s.phi, s.alpha, s.beta].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidSector(format!("sector {k} has non-finite parameters")));
        }
        if !(-NORM_TOL..=1.0 + NORM_TOL).contains(&s.p) {
            return Err(Error::InvalidSector(format!("sector {k} has p = {} outside [0, 1]", s.p)));
        }
        if !(-1e-12..=PI + 1e-12).contains(&s.alpha) {
            return Err(Error::InvalidSector(format!("sector {k} has alpha = {} outside [0, pi]", s.alpha)));
        }
    }
    if spectrum.zero_sector() == 0 && zero_amp != ZERO {
        return Err(Error::InvalidSector("zero amplitude given but spectrum has no zero sector".into()));
    }
    let total: f64 = sectors.iter().map(|s| s.p).sum::<f64>() + zero_amp.norm_sqr();
    if (total - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(total));
    }
    Ok(PureState { spectrum: spectrum.clone(), sectors, zero_amp })
}

/// Equatorial state: every sector has `alpha = pi/2`, no zero-sector weight.
pub fn equatorial(spectrum: &GeneratorSpectrum, p: &[f64], beta: &[f64], phi: &[f64]) -> Result<PureState> {
    let k = spectrum.num_sectors();
    for len in [p.len(), beta.len(), phi.len()] {
        if len != k {
            return Err(Error::DimensionMismatch { expected: k, got: len });
        }
    }
    let sectors = (0..k).map(|i| SectorState::equatorial(p[i], beta[i], phi[i])).collect();
    pure_from_sectors(spectrum, sectors, ZERO)
}

/// `(|N/2> + |-N/2>)/sqrt 2` in the `S_z` basis.
pub fn noon(n_particles: usize) -> Result<PureState> {
    let spectrum = sz_spectrum(n_particles)?;
    let k = spectrum.num_sectors();
    let mut p = vec![0.0; k];
    p[k - 1] = 1.0;
    equatorial(&spectrum, &p, &vec![0.0; k], &vec![0.0; k])
}

/// One-axis-twisted coherent state `e^{-i mu S_z^2} |S_x = N/2>`.
pub fn oat(n_particles: usize, mu: f64) -> Result<PureState> {
    let spectrum = sz_spectrum(n_particles)?;
    // Amplitude of |m> in the +x coherent state is sqrt(C(N, N/2 + m) / 2^N).
    let weights = binomial_weights(n_particles);
    let half = n_particles as f64 / 2.0;
    let amp = |m: f64| weights[(half + m).round() as usize].sqrt();
    let sectors = spectrum
        .sectors()
        .iter()
        .map(|s| SectorState::equatorial(2.0 * amp(s.g).powi(2), 0.0, -mu * s.g * s.g))
        .collect();
    let zero_amp = if spectrum.zero_sector() == 1 { Complex64::new(amp(0.0), 0.0) } else { ZERO };
    pure_from_sectors(&spectrum, sectors, zero_amp)
}

/// `C(n, k) / 2^n` for `k = 0..=n`.
fn binomial_weights(n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    let ln2n = n as f64 * std::f64::consts::LN_2;
    let mut ln_c = 0.0;
    for (k, slot) in w.iter_mut().enumerate() {
        if k > 0 {
            ln_c += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        *slot = (ln_c - ln2n).exp();
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|v| v / total).collect()
}

impl PureState {
    pub fn spectrum(&self) -> &GeneratorSpectrum {
        &self.spectrum
    }

    pub fn sectors(&self) -> &[SectorState] {
        &self.sectors
    }

    pub fn zero_amp(&self) -> Complex64 {
        self.zero_amp
    }

    pub fn zero_weight(&self) -> f64 {
        self.zero_amp.norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.sectors.iter().map(|s| s.p).collect()
    }

    pub fn betas(&self) -> Vec<f64> {
        self.sectors.iter().map(|s| s.beta).collect()
    }

    pub fn to_vector(&self) -> CVec {
        let spec = &self.spectrum;
        let mut v = CVec::zeros(spec.dim());
        for (k, s) in self.sectors.iter().enumerate() {
            let (up, down) = s.amplitudes();
            v[spec.up_index(k)] = up;
            v[spec.down_index(k)] = down;
        }
        if let Some(z) = spec.zero_indices().next() {
            v[z] = self.zero_amp;
        }
        v
    }

    pub fn to_density(&self) -> DensityMatrix {
        let v = self.to_vector();
        DensityMatrix(linalg::outer(&v, &v))
    }

    /// True when every populated sector sits on its equator.
    ///
    /// Zero-sector weight is ignored: the kernel of the generator carries no
    /// phase information and never enters the estimator.
    pub fn is_equatorial(&self, tol: f64) -> bool {
        self.sectors.iter().all(|s| s.p <= tol || (s.alpha - FRAC_PI_2).abs() <= tol)
    }

    /// Equatorial with a sector-independent global phase.
    ///
    /// Since `(phi, beta) ~ (phi + pi, beta + 2 pi)`, phases are compared
    /// through `2 phi mod 2 pi`, which is the phase of `up * down`.
    pub fn is_path_symmetric(&self, tol: f64) -> bool {
        if !self.is_equatorial(tol) {
            return false;
        }
        let mut populated = self.sectors.iter().filter(|s| s.p > tol);
        let Some(first) = populated.next() else {
            return true;
        };
        populated.all(|s| linalg::wrap_angle(2.0 * (s.phi - first.phi)).abs() <= tol)
    }
}

pub fn from_vector(spectrum: &GeneratorSpectrum, vector: &CVec) -> Result<PureState> {
    if vector.len() != spectrum.dim() {
        return Err(Error::DimensionMismatch { expected: spectrum.dim(), got: vector.len() });
    }
    let norm = vector.norm_squared();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    let v = vector.unscale(norm.sqrt());
    let sectors = (0..spectrum.num_sectors())
        .map(|k| SectorState::from_amplitudes(v[spectrum.up_index(k)], v[spectrum.down_index(k)]))
        .collect();
    let zero: Vec<Complex64> = spectrum.zero_indices().map(|i| v[i]).collect();
    let populated = zero.iter().filter(|z| z.norm() > 0.0).count();
    if populated > 1 {
        return Err(Error::ZeroSectorAmbiguous(populated));
    }
    let zero_amp = zero.into_iter().find(|z| z.norm() > 0.0).unwrap_or(ZERO);
    pure_from_sectors(spectrum, sectors, zero_amp)
}

/// Mixed equatorial state: each sector is supported by a single equatorial
/// ket `|pi/2, beta_n>`, with coherences `gamma_mn` between sectors.
///
/// `gamma` is the `K x K` Hermitian matrix of coefficients on
/// `|pi/2, beta_m><pi/2, beta_n|`; its diagonal is `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedES {
    spectrum: GeneratorSpectrum,
    p: Vec<f64>,
    beta: Vec<f64>,
    gamma: CMat,
}

pub fn mixed_es(spectrum: &GeneratorSpectrum, p: &[f64], beta: &[f64], gamma: &CMat) -> Result<MixedES> {
    let k = spectrum.num_sectors();
    if p.len() != k || beta.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: p.len().min(beta.len()) });
    }
    if gamma.nrows() != k || gamma.ncols() != k {
        return Err(Error::DimensionMismatch { expected: k, got: gamma.nrows() });
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(total));
    }
    if let Some(v) = p.iter().find(|v| !(-NORM_TOL..=1.0 + NORM_TOL).contains(*v)) {
        return Err(Error::InvalidSector(format!("probability {v} outside [0, 1]")));
    }
    let dev = linalg::hermitian_deviation(gamma);
    if dev > 1e-12 {
        return Err(Error::NotHermitian(dev));
    }
    for n in 0..k {
        if (gamma[(n, n)] - Complex64::new(p[n], 0.0)).norm() > 1e-12 {
            return Err(Error::InvalidSector(format!("gamma[{n}][{n}] must equal p[{n}]")));
        }
        for m in 0..k {
            let value = gamma[(m, n)].norm_sqr();
            let bound = p[m] * p[n];
            if m != n && value > bound + 1e-12 {
                return Err(Error::CoherenceBound { m, n, value, bound });
            }
        }
    }
    let min_eig = linalg::eigvalsh(gamma).first().copied().unwrap_or(0.0);
    if min_eig < -NORM_TOL {
        return Err(Error::NotPsd(min_eig));
    }
    Ok(MixedES { spectrum: spectrum.clone(), p: p.to_vec(), beta: beta.to_vec(), gamma: gamma.clone() })
}

impl MixedES {
    /// All inter-sector coherence removed.
    pub fn dephased(spectrum: &GeneratorSpectrum, p: &[f64], beta: &[f64]) -> Result<Self> {
        let gamma = linalg::real_diagonal(p);
        mixed_es(spectrum, p, beta, &gamma)
    }

    /// `|psi_E><psi_E|` written in mixed form.
    pub fn from_pure(state: &PureState, tol: f64) -> Result<Self> {
        if !state.is_equatorial(tol) || state.zero_weight() > tol {
            return Err(Error::NotEquatorial);
        }
        let s = state.sectors();
        let k = s.len();
        let gamma = CMat::from_fn(k, k, |m, n| cis(s[m].phi - s[n].phi) * (s[m].p * s[n].p).sqrt());
        mixed_es(state.spectrum(), &state.probabilities(), &state.betas(), &gamma)
    }

    pub fn spectrum(&self) -> &GeneratorSpectrum {
        &self.spectrum
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn betas(&self) -> &[f64] {
        &self.beta
    }

    pub fn gamma(&self) -> &CMat {
        &self.gamma
    }

    pub fn to_density(&self) -> DensityMatrix {
        let spec = &self.spectrum;
        let kets: Vec<CVec> = (0..spec.num_sectors()).map(|k| sector_ket(spec, k, FRAC_PI_2, self.beta[k])).collect();
        let mut rho = CMat::zeros(spec.dim(), spec.dim());
        for (m, km) in kets.iter().enumerate() {
            for (n, kn) in kets.iter().enumerate() {
                rho += linalg::outer(km, kn) * self.gamma[(m, n)];
            }
        }
        DensityMatrix(rho)
    }
}

/// A validated density matrix in the canonical basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMat);

impl DensityMatrix {
    pub fn new(matrix: CMat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotDensityMatrix(format!("{}x{} is not square", matrix.nrows(), matrix.ncols())));
        }
        let dev = linalg::hermitian_deviation(&matrix);
        if dev > 1e-12 {
            return Err(Error::NotDensityMatrix(format!("not Hermitian (deviation {dev:e})")));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::NotDensityMatrix(format!("trace {tr} != 1")));
        }
        let min_eig = linalg::eigvalsh(&matrix).first().copied().unwrap_or(0.0);
        if min_eig < -NORM_TOL {
            return Err(Error::NotDensityMatrix(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self(matrix))
    }

    pub fn from_vector(v: &CVec) -> Result<Self> {
        Self::new(linalg::outer(v, v))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(linalg::identity(dim).unscale(dim as f64))
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn rank(&self, tol: f64) -> usize {
        linalg::eigvalsh(&self.0).iter().filter(|&&v| v > tol).count()
    }

    pub(crate) fn from_matrix_unchecked(m: CMat) -> Self {
        Self(m)
    }
}

/// Application of `e^{-i theta G}`.
pub trait PhaseEncode: Sized {
    fn phase_encode(&self, theta: f64) -> Self;
}

impl PhaseEncode for PureState {
    fn phase_encode(&self, theta: f64) -> Self {
        let mut out = self.clone();
        for (s, sec) in out.sectors.iter_mut().zip(self.spectrum.sectors()) {
            s.beta += 2.0 * sec.g * theta;
        }
        out
    }
}

impl PhaseEncode for MixedES {
    fn phase_encode(&self, theta: f64) -> Self {
        let mut out = self.clone();
        for (b, sec) in out.beta.iter_mut().zip(self.spectrum.sectors()) {
            *b += 2.0 * sec.g * theta;
        }
        out
    }
}

/// `e^{-i theta G} rho e^{i theta G}` for a density matrix in canonical ordering.
pub fn encode_density(rho: &DensityMatrix, spectrum: &GeneratorSpectrum, theta: f64) -> DensityMatrix {
    let d = spectrum.diagonal();
    let m = CMat::from_fn(rho.dim(), rho.dim(), |i, j| rho.0[(i, j)] * cis(-(d[i] - d[j]) * theta));
    DensityMatrix(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::spectrum::build_spectrum;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn one_sector() -> GeneratorSpectrum {
        build_spectrum(&[1.0, -1.0]).unwrap()
    }

    #[test]
    fn bloch_poles_and_equator() {
        let s = one_sector();
        let up = pure_from_sectors(&s, vec![SectorState { p: 1.0, phi: 0.0, alpha: 0.0, beta: 0.0 }], ZERO).unwrap();
        assert_eq!(up.to_vector(), CVec::from_vec(vec![c(1.0, 0.0), ZERO]));
        let x = equatorial(&s, &[1.0], &[0.0], &[0.0]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = x.to_vector();
        assert_abs_diff_eq!(v[0].re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1].re, h, epsilon = 1e-15);
    }

    #[test]
    fn normalization_is_checked() {
        let s = build_spectrum(&[1.0, -1.0, 2.0, -2.0]).unwrap();
        assert!(equatorial(&s, &[0.5, 0.5], &[0.0, 0.0], &[0.0, 0.0]).is_ok());
        assert!(matches!(equatorial(&s, &[0.5, 0.6], &[0.0, 0.0], &[0.0, 0.0]), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn classification() {
        let s = build_spectrum(&[1.0, -1.0, 2.0, -2.0]).unwrap();
        let pss = equatorial(&s, &[0.5, 0.5], &[0.1, -0.4], &[0.3, 0.3]).unwrap();
        assert!(pss.is_equatorial(1e-12) && pss.is_path_symmetric(1e-12));
        let es = equatorial(&s, &[0.5, 0.5], &[0.0, 0.0], &[0.0, FRAC_PI_2]).unwrap();
        assert!(es.is_equatorial(1e-12) && !es.is_path_symmetric(1e-12));
        let pole =
            pure_from_sectors(&one_sector(), vec![SectorState { p: 1.0, phi: 0.0, alpha: 0.0, beta: 0.0 }], ZERO)
                .unwrap();
        assert!(!pole.is_equatorial(1e-9) && !pole.is_path_symmetric(1e-9));
    }

    #[test]
    fn noon_vectors() {
        let v = noon(2).unwrap().to_vector();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(v[0].re, h, epsilon = 1e-15);
        assert_eq!(v[1], ZERO);
        assert_abs_diff_eq!(v[2].re, h, epsilon = 1e-15);
        for n in 1..8 {
            assert!(noon(n).unwrap().is_path_symmetric(1e-12));
        }
        assert_eq!(noon(0), Err(Error::InvalidN(0)));
    }

    #[test]
    fn oat_classification() {
        let coherent = oat(4, 0.0).unwrap();
        assert!(coherent.is_path_symmetric(1e-12));
        assert!(coherent.betas().iter().all(|&b| b == 0.0));
        let twisted = oat(4, 0.5).unwrap();
        assert!(twisted.is_equatorial(1e-12));
        assert!(!twisted.is_path_symmetric(1e-9));
        assert_eq!(twisted.probabilities(), coherent.probabilities());
        // C(4, k)/16: sectors g=1 -> 2*4/16, g=2 -> 2*1/16, zero -> 6/16
        assert_abs_diff_eq!(twisted.probabilities()[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(twisted.probabilities()[1], 0.125, epsilon = 1e-14);
        assert_abs_diff_eq!(twisted.zero_weight(), 0.375, epsilon = 1e-14);
    }

    #[test]
    fn encoding_shifts_beta() {
        let s = one_sector();
        let es = equatorial(&s, &[1.0], &[0.0], &[0.0]).unwrap();
        let enc = es.phase_encode(std::f64::consts::FRAC_PI_4);
        assert_abs_diff_eq!(enc.betas()[0], FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(es.phase_encode(0.0), es);
        assert!(enc.is_equatorial(1e-12));
    }

    #[test]
    fn encoding_matches_matrix_route() {
        let st = oat(5, 0.7).unwrap();
        let theta = 0.37;
        let direct = st.phase_encode(theta).to_vector();
        let d = st.spectrum().diagonal();
        let v = st.to_vector();
        let manual = CVec::from_iterator(v.len(), v.iter().zip(&d).map(|(a, g)| a * cis(-g * theta)));
        assert!((direct - manual).norm() < 1e-13);
        let rho = st.to_density();
        let enc = encode_density(&rho, st.spectrum(), theta);
        let expected = st.phase_encode(theta).to_density();
        assert!(linalg::max_abs(&(enc.matrix() - expected.matrix())) < 1e-13);
    }

    #[test]
    fn mixed_es_limits() {
        let s = build_spectrum(&[1.0, -1.0, 2.0, -2.0]).unwrap();
        let pure = equatorial(&s, &[0.4, 0.6], &[0.3, -1.1], &[0.2, 1.4]).unwrap();
        let mixed = MixedES::from_pure(&pure, 1e-12).unwrap();
        let diff = mixed.to_density().matrix() - pure.to_density().matrix();
        assert!(linalg::max_abs(&diff) < 1e-14);
        assert_eq!(mixed.to_density().rank(1e-10), 1);

        let dephased = MixedES::dephased(&s, &[0.4, 0.6], &[0.3, -1.1]).unwrap();
        assert_eq!(dephased.to_density().rank(1e-10), 2);

        let mut gamma = linalg::real_diagonal(&[0.4, 0.6]);
        let too_big = (2.0f64 * 0.4 * 0.6).sqrt();
        gamma[(0, 1)] = c(too_big, 0.0);
        gamma[(1, 0)] = c(too_big, 0.0);
        assert!(matches!(mixed_es(&s, &[0.4, 0.6], &[0.0, 0.0], &gamma), Err(Error::CoherenceBound { .. })));
    }

    #[test]
    fn mixed_es_detects_non_psd() {
        // Pairwise bounds hold but the 3x3 coherence matrix is indefinite.
        let s = build_spectrum(&[1.0, -1.0, 2.0, -2.0, 3.0, -3.0]).unwrap();
        let third = 1.0 / 3.0;
        let mut gamma = linalg::real_diagonal(&[third; 3]);
        for (m, n, v) in [(0, 1, -third), (0, 2, -third), (1, 2, -third)] {
            gamma[(m, n)] = c(v, 0.0);
            gamma[(n, m)] = c(v, 0.0);
        }
        assert!(matches!(mixed_es(&s, &[third; 3], &[0.0; 3], &gamma), Err(Error::NotPsd(_))));
    }

    #[test]
    fn sector_projection_is_equatorial_rank_one() {
        let s = build_spectrum(&[1.0, -1.0, 2.0, -2.0]).unwrap();
        let m = MixedES::dephased(&s, &[0.3, 0.7], &[0.5, 2.0]).unwrap();
        let rho = m.to_density();
        for k in 0..2 {
            let ket = sector_ket(&s, k, FRAC_PI_2, m.betas()[k]);
            let mut proj = CMat::zeros(4, 4);
            for i in [s.up_index(k), s.down_index(k)] {
                proj[(i, i)] = c(1.0, 0.0);
            }
            let block = &proj * rho.matrix() * &proj;
            let expected = linalg::outer(&ket, &ket) * c(m.probabilities()[k], 0.0);
            assert!(linalg::max_abs(&(block - expected)) < 1e-14);
        }
    }

    #[test]
    fn vector_round_trip_rejects_bad_dims() {
        let s = one_sector();
        assert!(matches!(from_vector(&s, &CVec::zeros(3)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(linalg::identity(2)).is_err());
        assert!(DensityMatrix::new(linalg::real_diagonal(&[1.2, -0.2])).is_err());
        assert!(DensityMatrix::new(linalg::real_diagonal(&[0.2, 0.8])).is_ok());
    }

    #[test]
    fn json_format() {
        let st = noon(2).unwrap();
        let text = serde_json::to_string(&st).unwrap();
        assert!(text.contains(r#""zero_amp":[0.0,0.0]"#));
        let back: PureState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, st);
        let unnormalized = text.replace(r#""p":1.0"#, r#""p":0.9"#);
        assert!(serde_json::from_str::<PureState>(&unnormalized).is_err());
    }

    fn arb_vector() -> impl Strategy<Value = (GeneratorSpectrum, CVec)> {
        (1usize..10).prop_flat_map(|n| {
            let s = sz_spectrum(n).unwrap();
            let dim = s.dim();
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim).prop_map(move |parts| {
                let v = CVec::from_iterator(dim, parts.iter().map(|&(a, b)| c(a, b)));
                let norm = v.norm();
                (s.clone(), if norm > 1e-3 { v.unscale(norm) } else { sector_ket(&s, 0, 0.0, 0.0) })
            })
        })
    }

    proptest! {
        #[test]
        fn from_vector_round_trip((s, v) in arb_vector()) {
            let st = from_vector(&s, &v).unwrap();
            prop_assert!((st.to_vector() - &v).norm() < 1e-12);
        }

        #[test]
        fn encoding_preserves_weights_and_equator(mu in -3.0f64..3.0, theta in -2.0f64..2.0, n in 1usize..12) {
            let st = oat(n, mu).unwrap();
            let enc = st.phase_encode(theta);
            prop_assert_eq!(enc.probabilities(), st.probabilities());
            prop_assert!(enc.is_equatorial(1e-12));
            prop_assert_eq!(enc.is_path_symmetric(1e-9), st.is_path_symmetric(1e-9));
        }
    }
}
