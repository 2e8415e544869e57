//! Nondemolition parity readout through an ancilla qubit dispersively
//! coupled to mode `b`.
//!
//! Composite vectors are system-major with qubit basis `{|g>, |e>}`: index
//! `2 s + q`, `q = 0` for `|g>`. The system basis is the spin basis
//! `|m = S - s>`, in which `b^dagger b = s`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interferometer::{parity_pulse, spin_ops};
use crate::linalg::{self, c, CMat, CVec, ONE, ZERO};
use crate::measurement::{even_odd_projectors, Parity};
use crate::sampling::trial_rng;
use crate::spectrum::sz_spectrum;

/// Tolerance for the controlled-X decomposition after phase alignment.
pub const CX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QsCoupling {
    pub omega_q: f64,
    pub chi_qs: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

impl QsCoupling {
    pub fn new(omega_q: f64, chi_qs: f64, n: usize) -> Result<Self> {
        let c = Self { omega_q, chi_qs, n };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidN(self.n));
        }
        if !self.omega_q.is_finite() || !self.chi_qs.is_finite() || self.chi_qs == 0.0 {
            return Err(Error::InvalidConfig(format!("chi_qs must be finite and nonzero, got {}", self.chi_qs)));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        2 * (self.n + 1)
    }
}

/// `|e><e|` on the qubit.
fn excited() -> CMat {
    linalg::real_diagonal(&[0.0, 1.0])
}

pub fn sigma_x() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

/// `sigma_y = -i |e><g| + i |g><e|`.
pub fn sigma_y() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, c(0.0, 1.0), c(0.0, -1.0), ZERO])
}

/// `R_y(angle) = exp(-i angle sigma_y / 2)`.
pub fn qubit_ry(angle: f64) -> CMat {
    linalg::unitary_propagator(&sigma_y(), angle / 2.0)
}

/// `b^dagger b = S - S_z` on the system.
pub fn number_b(n: usize) -> CMat {
    linalg::real_diagonal(&(0..=n).map(|s| s as f64).collect::<Vec<_>>())
}

/// `omega_q I (x) |e><e| + chi_qs (b^dagger b) (x) |e><e|`.
pub fn h_qs(c: &QsCoupling) -> Result<CMat> {
    c.validate()?;
    let id = linalg::identity(c.n + 1);
    Ok(linalg::kron(&id, &excited()).scale(c.omega_q) + linalg::kron(&number_b(c.n), &excited()).scale(c.chi_qs))
}

/// `exp(-i H_qs pi / chi_qs)` with the `omega_q` term removed by the
/// rotating frame.
pub fn u_pi(c: &QsCoupling) -> Result<CMat> {
    let frame = QsCoupling { omega_q: 0.0, ..*c };
    Ok(linalg::unitary_propagator(&h_qs(&frame)?, std::f64::consts::PI / c.chi_qs))
}

/// `e^{-i pi S_y / 2}` on the system.
pub fn system_rotation(n: usize) -> Result<CMat> {
    let ops = spin_ops(n)?;
    Ok(linalg::unitary_propagator(&ops.sy, std::f64::consts::FRAC_PI_2))
}

/// Max deviation of `(-1)^{S - S_x}` from `e^{-i pi S_y/2} (-1)^{b^dagger b} e^{i pi S_y/2}`.
pub fn parity_identity_deviation(n: usize) -> Result<f64> {
    let w = system_rotation(n)?;
    let flip = linalg::real_diagonal(&(0..=n).map(|s| if s % 2 == 0 { 1.0 } else { -1.0 }).collect::<Vec<_>>());
    let rotated = &w * flip * w.adjoint();
    Ok(linalg::max_abs(&(parity_pulse(n)? - rotated)))
}

/// `Pi^(+) (x) I + Pi^(-) (x) sigma_x`, with the zero sector in `Pi^(+)`.
pub fn cx_target(n: usize) -> Result<CMat> {
    let (plus, minus) = even_odd_projectors(&sz_spectrum(n)?);
    Ok(linalg::kron(&plus, &linalg::identity(2)) + linalg::kron(&minus, &sigma_x()))
}

/// The gate sequence `[W (x) R^dagger] U_pi [W^dagger (x) R]` with
/// `W = e^{-i pi S_y/2}` and `R = R_y(pi/2)`, before phase alignment.
pub fn cx_circuit(n: usize, chi_qs: f64) -> Result<CMat> {
    let coupling = QsCoupling::new(0.0, chi_qs, n)?;
    let w = system_rotation(n)?;
    let r = qubit_ry(std::f64::consts::FRAC_PI_2);
    let after = linalg::kron(&w, &r.adjoint());
    let before = linalg::kron(&w.adjoint(), &r);
    Ok(after * u_pi(&coupling)? * before)
}

/// Controlled-X gate from the circuit, divided by its global phase
/// relative to the projector form. Fails with `ConstructionMismatch` when
/// the two differ by more than a global phase.
pub fn c_x(n: usize, chi_qs: f64) -> Result<CMat> {
    let circuit = cx_circuit(n, chi_qs)?;
    let target = cx_target(n)?;
    let overlap: num_complex::Complex64 = circuit.iter().zip(target.iter()).map(|(a, b)| a.conj() * b).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE };
    let aligned = circuit.map(|z| z * phase);
    let dev = linalg::max_abs(&(&aligned - &target));
    if dev > CX_TOL {
        return Err(Error::ConstructionMismatch(dev));
    }
    Ok(aligned)
}

/// Largest entry of `C_X` linking an even system state to an odd one.
pub fn cx_parity_leak(cx: &CMat, n: usize) -> Result<f64> {
    let (plus, minus) = even_odd_projectors(&sz_spectrum(n)?);
    let id = linalg::identity(2);
    let leak = linalg::kron(&minus, &id) * cx * linalg::kron(&plus, &id);
    Ok(linalg::max_abs(&leak))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NdOutcome {
    pub parity: Parity,
    /// Normalized system state after the qubit readout.
    pub state: CVec,
    pub probability: f64,
}

/// Qubit-`|g>` and qubit-`|e>` components of `C_X (psi (x) |g>)`.
fn branches(cx: &CMat, psi: &CVec) -> (CVec, CVec) {
    let joint = CVec::from_fn(2 * psi.len(), |i, _| if i % 2 == 0 { psi[i / 2] } else { ZERO });
    let out = cx * joint;
    let g = CVec::from_fn(psi.len(), |s, _| out[2 * s]);
    let e = CVec::from_fn(psi.len(), |s, _| out[2 * s + 1]);
    (g, e)
}

/// One readout with a prebuilt gate.
pub fn nondemolition_parity_with<R: Rng + ?Sized>(rng: &mut R, cx: &CMat, psi: &CVec) -> Result<NdOutcome> {
    if cx.nrows() != 2 * psi.len() {
        return Err(Error::DimensionMismatch { expected: cx.nrows() / 2, got: psi.len() });
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > crate::states::NORM_TOL {
        return Err(Error::NotNormalized(norm * norm));
    }
    let (g, e) = branches(cx, psi);
    let q_plus = g.norm_squared();
    let (parity, branch, probability) =
        if rng.random::<f64>() < q_plus { (Parity::Plus, g, q_plus) } else { (Parity::Minus, e, 1.0 - q_plus) };
    let len = branch.norm();
    Ok(NdOutcome { parity, state: branch.unscale(len), probability })
}

/// Prepare the qubit in `|g>`, apply `C_X`, and read the qubit out.
/// `|g>` reports parity `+1`, `|e>` parity `-1`.
pub fn nondemolition_parity(psi: &CVec, seed: u64) -> Result<NdOutcome> {
    if psi.len() < 2 {
        return Err(Error::InvalidN(psi.len().saturating_sub(1)));
    }
    let cx = c_x(psi.len() - 1, 1.0)?;
    nondemolition_parity_with(&mut trial_rng(seed, 0), &cx, psi)
}

/// Deviations reported by the ancilla self-check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AncillaCheck {
    #[serde(rename = "N")]
    pub n: usize,
    pub parity_identity_deviation: f64,
    pub cx_deviation: f64,
    pub cx_parity_leak: f64,
}

pub fn ancilla_check(n: usize, chi_qs: f64) -> Result<AncillaCheck> {
    let circuit = cx_circuit(n, chi_qs)?;
    let dev = linalg::global_phase_deviation(&circuit, &cx_target(n)?);
    Ok(AncillaCheck {
        n,
        parity_identity_deviation: parity_identity_deviation(n)?,
        cx_deviation: dev,
        cx_parity_leak: cx_parity_leak(&circuit, n)?,
    })
}
