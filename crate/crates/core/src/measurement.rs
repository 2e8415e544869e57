//! Parity operators, the compound parity / `G^2` projectors, outcome
//! distributions, sampling, and parity collapse.
//!
//! The compound measurement has outcomes `(n, +)`, `(n, -)` for each sector
//! and a separate zero-sector outcome, which is tracked for probability
//! bookkeeping but carries no phase information.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, cis, CMat, CVec, ONE};
use crate::sampling;
use crate::spectrum::GeneratorSpectrum;
use crate::states::{encode_density, sector_ket, DensityMatrix, MixedES, PureState};

/// Branch probabilities below this are treated as impossible.
pub const BRANCH_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Parity {
    Plus,
    Minus,
    Zero,
}

impl Parity {
    pub fn as_i8(self) -> i8 {
        match self {
            Parity::Plus => 1,
            Parity::Minus => -1,
            Parity::Zero => 0,
        }
    }

    pub fn from_i8(v: i8) -> Option<Self> {
        match v {
            1 => Some(Parity::Plus),
            -1 => Some(Parity::Minus),
            0 => Some(Parity::Zero),
            _ => None,
        }
    }
}

/// `P_beta = sum_n (e^{i beta_n} |down><up| + e^{-i beta_n} |up><down|)`,
/// identity on the zero sector.
pub fn parity_operator(spectrum: &GeneratorSpectrum, beta: &[f64]) -> Result<CMat> {
    if beta.len() != spectrum.num_sectors() {
        return Err(Error::DimensionMismatch { expected: spectrum.num_sectors(), got: beta.len() });
    }
    let mut p = CMat::zeros(spectrum.dim(), spectrum.dim());
    for (k, &b) in beta.iter().enumerate() {
        let (up, down) = (spectrum.up_index(k), spectrum.down_index(k));
        p[(down, up)] = cis(b);
        p[(up, down)] = cis(-b);
    }
    for z in spectrum.zero_indices() {
        p[(z, z)] = ONE;
    }
    Ok(p)
}

/// `P_0`.
pub fn parity_p0(spectrum: &GeneratorSpectrum) -> CMat {
    parity_operator(spectrum, &vec![0.0; spectrum.num_sectors()]).expect("length matches")
}

/// One element of the compound measurement. `sector` is the label `n`, or
/// `None` for the zero-sector projector.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    pub sector: Option<u32>,
    pub parity: Parity,
    pub matrix: CMat,
}

/// `Pi_n^(+)` onto `|pi/2, 0>_n`, `Pi_n^(-)` onto `|pi/2, pi>_n`, plus the
/// zero-sector projector.
pub fn projectors(spectrum: &GeneratorSpectrum) -> Vec<Projector> {
    projectors_beta(spectrum, &vec![0.0; spectrum.num_sectors()]).expect("length matches")
}

/// Eigenprojectors of `P_beta`: `|pi/2, beta_n>` (even) and
/// `|pi/2, beta_n + pi>` (odd) per sector.
pub fn projectors_beta(spectrum: &GeneratorSpectrum, beta: &[f64]) -> Result<Vec<Projector>> {
    if beta.len() != spectrum.num_sectors() {
        return Err(Error::DimensionMismatch { expected: spectrum.num_sectors(), got: beta.len() });
    }
    let mut out = Vec::with_capacity(2 * beta.len() + 1);
    for (k, s) in spectrum.sectors().iter().enumerate() {
        for (parity, shift) in [(Parity::Plus, 0.0), (Parity::Minus, PI)] {
            let ket = sector_ket(spectrum, k, std::f64::consts::FRAC_PI_2, beta[k] + shift);
            out.push(Projector { sector: Some(s.n), parity, matrix: linalg::outer(&ket, &ket) });
        }
    }
    if spectrum.zero_sector() > 0 {
        out.push(Projector { sector: None, parity: Parity::Zero, matrix: zero_projector(spectrum) });
    }
    Ok(out)
}

pub fn zero_projector(spectrum: &GeneratorSpectrum) -> CMat {
    let mut m = CMat::zeros(spectrum.dim(), spectrum.dim());
    for z in spectrum.zero_indices() {
        m[(z, z)] = ONE;
    }
    m
}

/// `Pi^(+) = sum_n Pi_n^(+)` and `Pi^(-) = sum_n Pi_n^(-)`, zero sector excluded.
pub fn parity_subspace_projectors(spectrum: &GeneratorSpectrum) -> (CMat, CMat) {
    let dim = spectrum.dim();
    let (mut plus, mut minus) = (CMat::zeros(dim, dim), CMat::zeros(dim, dim));
    for p in projectors(spectrum) {
        match p.parity {
            Parity::Plus => plus += p.matrix,
            Parity::Minus => minus += p.matrix,
            Parity::Zero => {}
        }
    }
    (plus, minus)
}

/// Born probabilities of the compound measurement, aligned with the
/// spectrum's sectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    pub labels: Vec<u32>,
    pub g: Vec<f64>,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    pub zero_prob: f64,
}

impl OutcomeDistribution {
    pub fn total(&self) -> f64 {
        self.plus.iter().sum::<f64>() + self.minus.iter().sum::<f64>() + self.zero_prob
    }

    /// Flattened as `[(1,+), (1,-), (2,+), (2,-), ..., zero]`.
    pub fn flat(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.plus.iter().zip(&self.minus).flat_map(|(&a, &b)| [a, b]).collect();
        v.push(self.zero_prob);
        v
    }

    /// Classical Fisher information `sum (dP)^2 / P` against a matching
    /// derivative distribution, skipping outcomes with `P <= cutoff`.
    pub fn classical_fisher(&self, derivative: &OutcomeDistribution, cutoff: f64) -> f64 {
        self.flat().iter().zip(derivative.flat()).filter(|(p, _)| **p > cutoff).map(|(p, d)| d * d / p).sum()
    }
}

fn empty_distribution(spectrum: &GeneratorSpectrum) -> OutcomeDistribution {
    let k = spectrum.num_sectors();
    OutcomeDistribution {
        labels: spectrum.sectors().iter().map(|s| s.n).collect(),
        g: spectrum.g_values(),
        plus: vec![0.0; k],
        minus: vec![0.0; k],
        zero_prob: 0.0,
    }
}

/// States with a closed-form compound-measurement distribution.
pub trait Measurable {
    fn outcome_probs(&self, theta: f64) -> OutcomeDistribution;
}

impl Measurable for PureState {
    /// `P(n, +-) = p_n (1 +- sin(alpha_n) cos(2 g_n theta + beta_n)) / 2`.
    fn outcome_probs(&self, theta: f64) -> OutcomeDistribution {
        let mut d = empty_distribution(self.spectrum());
        for (k, (s, sec)) in self.sectors().iter().zip(self.spectrum().sectors()).enumerate() {
            let c = s.alpha.sin() * (2.0 * sec.g * theta + s.beta).cos();
            d.plus[k] = s.p * (1.0 + c) / 2.0;
            d.minus[k] = s.p * (1.0 - c) / 2.0;
        }
        d.zero_prob = self.zero_weight();
        d
    }
}

impl Measurable for MixedES {
    /// `P(n, +) = p_n cos^2(g_n theta + beta_n / 2)`.
    fn outcome_probs(&self, theta: f64) -> OutcomeDistribution {
        let mut d = empty_distribution(self.spectrum());
        for (k, (p, sec)) in self.probabilities().iter().zip(self.spectrum().sectors()).enumerate() {
            let half = sec.g * theta + self.betas()[k] / 2.0;
            d.plus[k] = p * half.cos().powi(2);
            d.minus[k] = p * half.sin().powi(2);
        }
        d
    }
}

/// Born rule `tr(rho(theta) Pi)` for an arbitrary density matrix.
pub fn outcome_probs_density(rho: &DensityMatrix, spectrum: &GeneratorSpectrum, theta: f64) -> OutcomeDistribution {
    born(&encode_density(rho, spectrum, theta).into_matrix(), spectrum)
}

/// `d/dtheta tr(rho(theta) Pi) = tr(-i [G, rho(theta)] Pi)`.
pub fn outcome_derivative_density(
    rho: &DensityMatrix,
    spectrum: &GeneratorSpectrum,
    theta: f64,
) -> OutcomeDistribution {
    let encoded = encode_density(rho, spectrum, theta);
    born(&crate::fisher::encoded_derivative(encoded.matrix(), spectrum), spectrum)
}

fn born(m: &CMat, spectrum: &GeneratorSpectrum) -> OutcomeDistribution {
    let mut d = empty_distribution(spectrum);
    for (k, _) in spectrum.sectors().iter().enumerate() {
        let (u, w) = (spectrum.up_index(k), spectrum.down_index(k));
        // <x+|m|x+> and <x-|m|x-> with x+- = (|up> +- |down>)/sqrt 2.
        let diag = m[(u, u)] + m[(w, w)];
        let cross = m[(u, w)] + m[(w, u)];
        d.plus[k] = (diag + cross).re / 2.0;
        d.minus[k] = (diag - cross).re / 2.0;
    }
    d.zero_prob = spectrum.zero_indices().map(|z| m[(z, z)].re).sum();
    d
}

/// Tallies `nu_n^(p)` of the compound measurement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutcomeCounts {
    pub labels: Vec<u32>,
    pub plus: Vec<u64>,
    pub minus: Vec<u64>,
    pub zero_count: u64,
}

impl OutcomeCounts {
    pub fn total(&self) -> u64 {
        self.plus.iter().sum::<u64>() + self.minus.iter().sum::<u64>() + self.zero_count
    }

    pub fn sector_total(&self, k: usize) -> u64 {
        self.plus[k] + self.minus[k]
    }

    pub fn empty(labels: Vec<u32>) -> Self {
        let k = labels.len();
        Self { labels, plus: vec![0; k], minus: vec![0; k], zero_count: 0 }
    }
}

/// Multinomial sample of `nu` outcomes on stream `(seed, 0)`.
pub fn sample_outcomes(dist: &OutcomeDistribution, nu: u64, seed: u64) -> OutcomeCounts {
    sample_outcomes_trial(dist, nu, seed, 0)
}

/// Multinomial sample of `nu` outcomes on stream `(seed, trial)`.
pub fn sample_outcomes_trial(dist: &OutcomeDistribution, nu: u64, seed: u64, trial: u64) -> OutcomeCounts {
    let mut rng = sampling::trial_rng(seed, trial);
    let flat = sampling::multinomial(&mut rng, &dist.flat(), nu);
    let k = dist.labels.len();
    OutcomeCounts {
        labels: dist.labels.clone(),
        plus: (0..k).map(|i| flat[2 * i]).collect(),
        minus: (0..k).map(|i| flat[2 * i + 1]).collect(),
        zero_count: flat[2 * k],
    }
}

/// Post-measurement branches of a `P_0` measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityCollapse {
    pub q_plus: f64,
    pub q_minus: f64,
    pub q_zero: f64,
    pub plus: Option<DensityMatrix>,
    pub minus: Option<DensityMatrix>,
    pub zero: Option<DensityMatrix>,
}

/// `rho^(+-) = Pi^(+-) rho Pi^(+-) / q^(+-)`, with the zero sector as its own
/// branch. Branches with probability below [`BRANCH_CUTOFF`] are `None` and
/// reported with probability 0.
pub fn parity_collapse(rho: &DensityMatrix, spectrum: &GeneratorSpectrum) -> Result<ParityCollapse> {
    if rho.dim() != spectrum.dim() {
        return Err(Error::DimensionMismatch { expected: spectrum.dim(), got: rho.dim() });
    }
    let (plus, minus) = parity_subspace_projectors(spectrum);
    let zero = zero_projector(spectrum);
    let branch = |proj: &CMat| -> (f64, Option<DensityMatrix>) {
        let m = proj * rho.matrix() * proj;
        let q = linalg::trace(&m).re;
        if q < BRANCH_CUTOFF {
            (0.0, None)
        } else {
            let m = m.unscale(q);
            let m = (&m + m.adjoint()).scale(0.5);
            (q, Some(DensityMatrix::from_matrix_unchecked(m)))
        }
    };
    let (q_plus, plus) = branch(&plus);
    let (q_minus, minus) = branch(&minus);
    let (q_zero, zero) = branch(&zero);
    Ok(ParityCollapse { q_plus, q_minus, q_zero, plus, minus, zero })
}

/// Even (`P_0 = +1`, zero sector included) and odd eigenprojectors,
/// `(I +- P_0) / 2`.
pub fn even_odd_projectors(spectrum: &GeneratorSpectrum) -> (CMat, CMat) {
    let p0 = parity_p0(spectrum);
    let id = linalg::identity(spectrum.dim());
    ((&id + &p0).scale(0.5), (&id - &p0).scale(0.5))
}

/// `|x^(+-)>_n` as full-space vectors.
pub fn x_state(spectrum: &GeneratorSpectrum, k: usize, parity: Parity) -> CVec {
    let mut v = CVec::zeros(spectrum.dim());
    let sign = if parity == Parity::Minus { -1.0 } else { 1.0 };
    v[spectrum.up_index(k)] = linalg::c(FRAC_1_SQRT_2, 0.0);
    v[spectrum.down_index(k)] = linalg::c(sign * FRAC_1_SQRT_2, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::spectrum::{build_spectrum, generator_matrix, sz_spectrum};
    use crate::states::{equatorial, PhaseEncode};
    use approx::assert_abs_diff_eq;

    fn spectra() -> Vec<GeneratorSpectrum> {
        vec![
            sz_spectrum(1).unwrap(),
            sz_spectrum(4).unwrap(),
            sz_spectrum(7).unwrap(),
            build_spectrum(&[0.3, -0.3, 1.7, -1.7, 0.0, 0.0, 2.2, -2.2]).unwrap(),
        ]
    }

    #[test]
    fn parity_algebra() {
        for s in spectra() {
            let p = parity_p0(&s);
            let g = generator_matrix(&s);
            let id = linalg::identity(s.dim());
            assert!(max_abs(&(&p * &p - &id)) < 1e-12);
            assert!(max_abs(&(&p * &g * &p + &g)) < 1e-12);
            assert!(max_abs(&linalg::commutator(&p, &(&g * &g))) < 1e-12);
            let mut up = CVec::zeros(s.dim());
            let mut down = CVec::zeros(s.dim());
            up[s.up_index(0)] = ONE;
            down[s.down_index(0)] = ONE;
            assert_eq!(&p * up, down);
        }
    }

    #[test]
    fn generalized_parity_is_conjugated_p0() {
        let s = sz_spectrum(6).unwrap();
        let beta = [0.3, -1.2, 2.9];
        let pb = parity_operator(&s, &beta).unwrap();
        let id = linalg::identity(s.dim());
        assert!(max_abs(&(&pb * pb.adjoint() - &id)) < 1e-12);
        assert!(max_abs(&(&pb * &pb - &id)) < 1e-12);
        let mut phases = vec![0.0; s.dim()];
        for (k, b) in beta.iter().enumerate() {
            phases[s.up_index(k)] = -b / 2.0;
            phases[s.down_index(k)] = b / 2.0;
        }
        let dmat = CMat::from_diagonal(&CVec::from_iterator(s.dim(), phases.iter().map(|&a| cis(a))));
        let conj = &dmat * parity_p0(&s) * dmat.adjoint();
        assert!(max_abs(&(conj - pb)) < 1e-12);
        assert!(parity_operator(&s, &[0.0]).is_err());
    }

    #[test]
    fn projectors_are_complete_and_orthogonal() {
        for s in spectra() {
            let ps = projectors(&s);
            let mut total = CMat::zeros(s.dim(), s.dim());
            for (i, a) in ps.iter().enumerate() {
                total += &a.matrix;
                for (j, b) in ps.iter().enumerate() {
                    let prod = &a.matrix * &b.matrix;
                    let expected = if i == j { a.matrix.clone() } else { CMat::zeros(s.dim(), s.dim()) };
                    assert!(max_abs(&(prod - expected)) < 1e-12);
                }
                if a.parity != Parity::Zero {
                    assert_abs_diff_eq!(linalg::trace(&a.matrix).re, 1.0, epsilon = 1e-14);
                }
            }
            assert!(max_abs(&(total - linalg::identity(s.dim()))) < 1e-12);
        }
    }

    #[test]
    fn minus_projector_matches_definition() {
        let s = sz_spectrum(2).unwrap();
        let ket = sector_ket(&s, 0, std::f64::consts::FRAC_PI_2, PI);
        let v = x_state(&s, 0, Parity::Minus);
        assert_abs_diff_eq!(ket.dotc(&v).norm(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ket[0].im, -FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn equatorial_closed_form() {
        let s = build_spectrum(&[1.0, -1.0, 2.0, -2.0, 3.0, -3.0]).unwrap();
        let es = equatorial(&s, &[0.5, 0.3, 0.2], &[0.0; 3], &[0.0; 3]).unwrap();
        let d0 = es.outcome_probs(0.0);
        assert_eq!(d0.plus, vec![0.5, 0.3, 0.2]);
        assert!(d0.minus.iter().all(|&m| m.abs() < 1e-30));
        let d = es.outcome_probs(std::f64::consts::FRAC_PI_4);
        assert_abs_diff_eq!(d.plus[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(d.minus[0], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn born_rule_matches_closed_form() {
        let s = sz_spectrum(6).unwrap();
        let st = crate::states::oat(6, 0.8).unwrap();
        for theta in [0.0, 0.13, -0.9, 2.5] {
            let closed = st.outcome_probs(theta);
            let born = outcome_probs_density(&st.to_density(), &s, theta);
            for (a, b) in closed.flat().iter().zip(born.flat()) {
                assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
            }
            let enc = st.phase_encode(theta).outcome_probs(0.0);
            assert_eq!(enc.flat().len(), closed.flat().len());
        }
    }

    #[test]
    fn binary_fisher_equals_sector_qfi() {
        let s = build_spectrum(&[1.0, -1.0, 2.0, -2.0, 3.0, -3.0]).unwrap();
        let p = [0.5, 0.3, 0.2];
        let es = equatorial(&s, &p, &[0.4, -0.2, 1.0], &[0.0; 3]).unwrap();
        let rho = es.to_density();
        for i in 0..40 {
            let theta = -1.0 + 0.05 * i as f64 + 0.0123;
            let d = outcome_probs_density(&rho, &s, theta);
            let dd = outcome_derivative_density(&rho, &s, theta);
            for (k, &pk) in p.iter().enumerate() {
                let (pp, pm) = (d.plus[k] / pk, d.minus[k] / pk);
                if pp.min(pm) < 1e-6 {
                    continue;
                }
                let (dp, dm) = (dd.plus[k] / pk, dd.minus[k] / pk);
                assert_abs_diff_eq!(dp * dp / pp + dm * dm / pm, 4.0 * s.g(k).powi(2), epsilon = 1e-9);
            }
            assert_abs_diff_eq!(d.classical_fisher(&dd, 1e-12), 14.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = crate::states::oat(4, 0.2).unwrap().outcome_probs(0.3);
        let a = sample_outcomes(&d, 5000, 99);
        assert_eq!(a, sample_outcomes(&d, 5000, 99));
        assert_ne!(a, sample_outcomes_trial(&d, 5000, 99, 1));
        assert_eq!(a.total(), 5000);
        assert_eq!(a.labels, vec![1, 2]);
    }

    #[test]
    fn certain_outcome() {
        let s = build_spectrum(&[1.0, -1.0]).unwrap();
        let es = equatorial(&s, &[1.0], &[0.0], &[0.0]).unwrap();
        let counts = sample_outcomes(&es.outcome_probs(0.0), 1234, 5);
        assert_eq!(counts.plus, vec![1234]);
        assert_eq!(counts.minus, vec![0]);
    }

    #[test]
    fn large_sample_within_five_sigma() {
        let s = build_spectrum(&[1.0, -1.0, 2.0, -2.0]).unwrap();
        let d = OutcomeDistribution {
            labels: vec![1, 2],
            g: s.g_values(),
            plus: vec![0.25, 0.25],
            minus: vec![0.25, 0.25],
            zero_prob: 0.0,
        };
        let nu = 1_000_000u64;
        let counts = sample_outcomes(&d, nu, 2024);
        let sigma = (nu as f64 * 0.25 * 0.75).sqrt();
        for c in counts.plus.iter().chain(&counts.minus) {
            assert!((*c as f64 - nu as f64 / 4.0).abs() < 5.0 * sigma);
        }
    }

    #[test]
    fn collapse_of_eigenstate() {
        let s = sz_spectrum(2).unwrap();
        let up = sector_ket(&s, 0, 0.0, 0.0);
        let c0 = parity_collapse(&DensityMatrix::from_vector(&up).unwrap(), &s).unwrap();
        assert_abs_diff_eq!(c0.q_plus, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c0.q_minus, 0.5, epsilon = 1e-15);
        assert!(c0.zero.is_none());
        let xp = x_state(&s, 0, Parity::Plus);
        let xm = x_state(&s, 0, Parity::Minus);
        assert!(max_abs(&(c0.plus.unwrap().matrix() - linalg::outer(&xp, &xp))) < 1e-14);
        assert!(max_abs(&(c0.minus.unwrap().matrix() - linalg::outer(&xm, &xm))) < 1e-14);
    }

    #[test]
    fn collapse_of_even_state_is_trivial() {
        let s = sz_spectrum(4).unwrap();
        let es = equatorial(&s, &[0.6, 0.4], &[0.0, 0.0], &[0.3, -0.1]).unwrap();
        let rho = es.to_density();
        let col = parity_collapse(&rho, &s).unwrap();
        assert_abs_diff_eq!(col.q_plus, 1.0, epsilon = 1e-14);
        assert!(col.minus.is_none());
        assert!(max_abs(&(col.plus.unwrap().matrix() - rho.matrix())) < 1e-14);
    }
}
