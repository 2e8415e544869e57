//! System-bath evolution under `H = sum_k H_k (x) B_k` and dynamical
//! decoupling with instantaneous `P_beta` pulses.
//!
//! Pulsing with `P` every `tau` replaces each `H_k` by its parity-symmetric
//! part `(H_k + P H_k P) / 2` to first order in `tau`. Joint states are
//! stored system-major: index `s * bath_dim + b`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{complex_matrix, complex_vector};
use crate::linalg::{self, c, CMat, CVec};
use crate::measurement::parity_operator;
use crate::spectrum::{generator_matrix, sz_spectrum, GeneratorSpectrum};
use crate::states::sector_ket;

/// Hermiticity tolerance for system and bath operators.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Smallest accepted eigenvalue of the bath-operator Gram matrix.
pub const GRAM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathTerm {
    #[serde(with = "complex_matrix")]
    pub system: CMat,
    #[serde(with = "complex_matrix")]
    pub bath: CMat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BathModel {
    terms: Vec<BathTerm>,
    sys_dim: usize,
    bath_dim: usize,
    bath_state: CMat,
}

impl BathModel {
    pub fn new(terms: Vec<BathTerm>, bath_state: CMat) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::InvalidConfig("bath model has no terms".into()))?;
        let (sys_dim, bath_dim) = (first.system.nrows(), first.bath.nrows());
        for t in &terms {
            for (m, d) in [(&t.system, sys_dim), (&t.bath, bath_dim)] {
                if m.nrows() != d || m.ncols() != d {
                    return Err(Error::DimensionMismatch { expected: d, got: m.nrows() });
                }
                let dev = linalg::hermitian_deviation(m);
                if dev > HERMITIAN_TOL {
                    return Err(Error::NotHermitian(dev));
                }
            }
        }
        if bath_state.nrows() != bath_dim || bath_state.ncols() != bath_dim {
            return Err(Error::DimensionMismatch { expected: bath_dim, got: bath_state.nrows() });
        }
        let k = terms.len();
        let gram = CMat::from_fn(k, k, |i, j| linalg::trace(&(terms[i].bath.adjoint() * &terms[j].bath)));
        let min = linalg::eigvalsh(&gram)[0];
        if min < GRAM_TOL {
            return Err(Error::BathDependent(min));
        }
        Ok(Self { terms, sys_dim, bath_dim, bath_state })
    }

    pub fn terms(&self) -> &[BathTerm] {
        &self.terms
    }

    pub fn sys_dim(&self) -> usize {
        self.sys_dim
    }

    pub fn bath_dim(&self) -> usize {
        self.bath_dim
    }

    pub fn bath_state(&self) -> &CMat {
        &self.bath_state
    }

    pub fn hamiltonian(&self) -> CMat {
        self.terms.iter().fold(CMat::zeros(self.sys_dim * self.bath_dim, self.sys_dim * self.bath_dim), |acc, t| {
            acc + linalg::kron(&t.system, &t.bath)
        })
    }

    /// `sum_k H_bar_k (x) B_k`.
    pub fn effective(&self, parity: &CMat) -> Result<CMat> {
        let mut h = CMat::zeros(self.sys_dim * self.bath_dim, self.sys_dim * self.bath_dim);
        for t in &self.terms {
            h += linalg::kron(&effective_hamiltonian(&t.system, parity)?, &t.bath);
        }
        Ok(h)
    }

    /// `rho_sys (x) rho_bath`.
    pub fn joint(&self, rho_sys: &CMat) -> Result<CMat> {
        if rho_sys.nrows() != self.sys_dim {
            return Err(Error::DimensionMismatch { expected: self.sys_dim, got: rho_sys.nrows() });
        }
        Ok(linalg::kron(rho_sys, &self.bath_state))
    }

    pub fn reduced(&self, joint: &CMat) -> CMat {
        linalg::partial_trace_second(joint, self.sys_dim, self.bath_dim)
    }
}

fn check_square(a: &CMat, b: &CMat) -> Result<()> {
    if a.nrows() != a.ncols() || b.nrows() != b.ncols() || a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: b.nrows() });
    }
    Ok(())
}

pub fn commutes_with_parity(h: &CMat, parity: &CMat, tol: f64) -> Result<bool> {
    check_square(h, parity)?;
    Ok(linalg::max_abs(&linalg::commutator(h, parity)) <= tol)
}

/// `(H + P H P) / 2`. `P` is Hermitian and unitary, so `P H P = P H P^dagger`.
pub fn effective_hamiltonian(h: &CMat, parity: &CMat) -> Result<CMat> {
    check_square(h, parity)?;
    Ok((h + parity * h * parity.adjoint()).scale(0.5))
}

/// Number of pulses `T / tau`, which must be a positive even integer.
pub fn pulse_count(tau: f64, total: f64) -> Result<usize> {
    let ratio = total / tau;
    if !(tau > 0.0 && ratio.is_finite()) {
        return Err(Error::InvalidInterval(ratio));
    }
    let n = ratio.round();
    if (ratio - n).abs() > 1e-9 * ratio.max(1.0) || n < 2.0 || !(n as u64).is_multiple_of(2) {
        return Err(Error::InvalidInterval(ratio));
    }
    Ok(n as usize)
}

/// Free evolution for `tau` followed by a pulse `P (x) I`, repeated
/// `T / tau` times, applied to `rho_sys (x) rho_bath`.
pub fn dd_evolve(model: &BathModel, rho_sys: &CMat, parity: &CMat, tau: f64, total: f64) -> Result<CMat> {
    let n = pulse_count(tau, total)?;
    check_square(rho_sys, parity)?;
    let free = linalg::unitary_propagator(&model.hamiltonian(), tau);
    let pulse = linalg::kron(parity, &linalg::identity(model.bath_dim()));
    let cycle = &pulse * free;
    let u = cycle.pow(n as u32);
    let joint = model.joint(rho_sys)?;
    Ok(&u * joint * u.adjoint())
}

/// `rho_sys (x) rho_bath` evolved for `t` under a joint Hamiltonian.
pub fn joint_evolve(model: &BathModel, rho_sys: &CMat, h: &CMat, t: f64) -> Result<CMat> {
    let u = linalg::unitary_propagator(h, t);
    Ok(&u * model.joint(rho_sys)? * u.adjoint())
}

/// `|1 - tr(rho P)|`.
pub fn parity_deviation(rho: &CMat, parity: &CMat) -> f64 {
    (c(1.0, 0.0) - linalg::trace(&(rho * parity))).norm()
}

/// Largest trace distance between a sector block `Pi_n rho Pi_n` and the
/// equatorial projector `w_n |pi/2, beta_n><pi/2, beta_n|` of the same
/// weight `w_n`.
pub fn sector_equatorial_deviation(rho: &CMat, spec: &GeneratorSpectrum, beta: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, &b) in beta.iter().enumerate().take(spec.num_sectors()) {
        let (u, d) = (spec.up_index(k), spec.down_index(k));
        let mut block = CMat::zeros(rho.nrows(), rho.ncols());
        for &i in &[u, d] {
            for &j in &[u, d] {
                block[(i, j)] = rho[(i, j)];
            }
        }
        let w = (rho[(u, u)] + rho[(d, d)]).re;
        let ket = sector_ket(spec, k, std::f64::consts::FRAC_PI_2, b);
        let target = linalg::outer(&ket, &ket).scale(w);
        worst = worst.max(linalg::trace_distance(&block, &target));
    }
    worst
}

/// One row of a decoupling sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DdPoint {
    pub tau: f64,
    pub parity_deviation: f64,
    pub trace_distance_to_effective: f64,
    pub sector_deviation: f64,
}

/// Everything needed to run a sweep, as read from a model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdSetup {
    pub spectrum: GeneratorSpectrum,
    pub terms: Vec<BathTerm>,
    #[serde(with = "complex_matrix")]
    pub bath_state: CMat,
    #[serde(with = "complex_vector")]
    pub system_state: CVec,
    /// Azimuths defining `P_beta`; all zero when absent.
    #[serde(default)]
    pub beta: Option<Vec<f64>>,
}

impl DdSetup {
    /// System `sz_spectrum(2)`, one bath qubit, `H_1 = Sz (x) sigma_x`,
    /// `H_2 = Sz^2 (x) sigma_z`, system in `|x+>_1`, bath in `|0>`.
    pub fn toy() -> Self {
        let spectrum = sz_spectrum(2).expect("N = 2 is valid");
        let sz = generator_matrix(&spectrum);
        let sigma_x = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let sigma_z = linalg::real_diagonal(&[1.0, -1.0]);
        let bath_state = linalg::real_diagonal(&[1.0, 0.0]);
        let system_state = sector_ket(&spectrum, 0, std::f64::consts::FRAC_PI_2, 0.0);
        let terms = vec![BathTerm { system: sz.clone(), bath: sigma_x }, BathTerm { system: &sz * &sz, bath: sigma_z }];
        Self { spectrum, terms, bath_state, system_state, beta: None }
    }

    pub fn model(&self) -> Result<BathModel> {
        let model = BathModel::new(self.terms.clone(), self.bath_state.clone())?;
        if model.sys_dim() != self.spectrum.dim() {
            return Err(Error::DimensionMismatch { expected: self.spectrum.dim(), got: model.sys_dim() });
        }
        if self.system_state.len() != self.spectrum.dim() {
            return Err(Error::DimensionMismatch { expected: self.spectrum.dim(), got: self.system_state.len() });
        }
        Ok(model)
    }

    pub fn betas(&self) -> Vec<f64> {
        self.beta.clone().unwrap_or_else(|| vec![0.0; self.spectrum.num_sectors()])
    }

    pub fn parity(&self) -> Result<CMat> {
        parity_operator(&self.spectrum, &self.betas())
    }

    /// Pulsed evolution at each `tau`, compared with evolution under the
    /// effective Hamiltonian for the same total time.
    pub fn sweep(&self, taus: &[f64], total: f64) -> Result<Vec<DdPoint>> {
        let model = self.model()?;
        let parity = self.parity()?;
        let norm = self.system_state.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(norm * norm));
        }
        let rho = linalg::outer(&self.system_state, &self.system_state);
        let ideal = model.reduced(&joint_evolve(&model, &rho, &model.effective(&parity)?, total)?);
        let beta = self.betas();
        taus.iter()
            .map(|&tau| {
                let reduced = model.reduced(&dd_evolve(&model, &rho, &parity, tau, total)?);
                Ok(DdPoint {
                    tau,
                    parity_deviation: parity_deviation(&reduced, &parity),
                    trace_distance_to_effective: linalg::trace_distance(&reduced, &ideal),
                    sector_deviation: sector_equatorial_deviation(&reduced, &self.spectrum, &beta),
                })
            })
            .collect()
    }
}
