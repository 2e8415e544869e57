//! Quantum Fisher information.
//!
//! Two independent routes are kept side by side: sector closed forms,
//! which never build a matrix, and an oracle working from the
//! eigendecomposition of the density matrix.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, cis, CMat, I};
use crate::measurement::parity_collapse;
use crate::spectrum::{generator_matrix, GeneratorSpectrum};
use crate::states::{DensityMatrix, MixedES, PureState};

/// Eigenvalue pairs with `lambda_k + lambda_l` at or below this are dropped
/// from the oracle sum.
pub const ORACLE_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QfiMethod {
    ClosedFormPure,
    ClosedFormMixedEs,
    Variance,
    Oracle,
}

/// Fisher information per probe, per unit `theta^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QfiResult {
    #[serde(rename = "F")]
    pub value: f64,
    pub method: QfiMethod,
}

/// `F = 4 sum p g^2 - 4 (sum p g cos alpha)^2`.
pub fn qfi_pure(state: &PureState) -> QfiResult {
    let (mut second, mut first) = (0.0, 0.0);
    for (s, sec) in state.sectors().iter().zip(state.spectrum().sectors()) {
        second += s.p * sec.g * sec.g;
        first += s.p * sec.g * s.alpha.cos();
    }
    QfiResult { value: 4.0 * second - 4.0 * first * first, method: QfiMethod::ClosedFormPure }
}

/// `4 (<G^2> - <G>^2)` evaluated on the state vector.
pub fn qfi_pure_variance(state: &PureState) -> QfiResult {
    let v = state.to_vector();
    let d = state.spectrum().diagonal();
    let (mut m1, mut m2) = (0.0, 0.0);
    for (a, g) in v.iter().zip(&d) {
        let w = a.norm_sqr();
        m1 += w * g;
        m2 += w * g * g;
    }
    QfiResult { value: 4.0 * (m2 - m1 * m1), method: QfiMethod::Variance }
}

/// `F = 2 sum_{k,l} (l_k - l_l)^2 / (l_k + l_l) |<k|G|l>|^2` over the
/// eigenbasis of `rho`.
pub fn qfi_oracle(rho: &DensityMatrix, generator: &CMat) -> Result<QfiResult> {
    if generator.nrows() != rho.dim() || generator.ncols() != rho.dim() {
        return Err(Error::NotDensityMatrix(format!(
            "dimension {} does not match generator {}x{}",
            rho.dim(),
            generator.nrows(),
            generator.ncols()
        )));
    }
    let (values, vectors) = linalg::eigh(rho.matrix());
    let lambda: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
    let g_eig = vectors.adjoint() * generator * &vectors;
    let mut f = 0.0;
    for k in 0..lambda.len() {
        for l in 0..lambda.len() {
            let sum = lambda[k] + lambda[l];
            if sum > ORACLE_CUTOFF {
                let diff = lambda[k] - lambda[l];
                f += diff * diff / sum * g_eig[(k, l)].norm_sqr();
            }
        }
    }
    Ok(QfiResult { value: 2.0 * f, method: QfiMethod::Oracle })
}

/// `F = 4 sum p g^2`, independent of the coherences.
pub fn qfi_mixed_es(state: &MixedES) -> QfiResult {
    let value = state.probabilities().iter().zip(state.spectrum().sectors()).map(|(p, s)| 4.0 * p * s.g * s.g).sum();
    QfiResult { value, method: QfiMethod::ClosedFormMixedEs }
}

/// Symmetric logarithmic derivative, `d rho / d theta = (L rho + rho L) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SldMatrix(CMat);

impl SldMatrix {
    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    /// Max entrywise residual of the defining relation.
    pub fn residual(&self, rho: &CMat, drho: &CMat) -> f64 {
        let sym = (&self.0 * rho + rho * &self.0).scale(0.5);
        linalg::max_abs(&(drho - sym))
    }

    /// `tr(rho L^2)`.
    pub fn fisher(&self, rho: &CMat) -> f64 {
        linalg::trace(&(rho * &self.0 * &self.0)).re
    }
}

/// SLD of a mixed equatorial state encoded at `theta`:
///
/// `L = 2i sum_n g_n [e^{i(2 g_n theta + beta_n)} |down><up| - h.c.]`
pub fn sld_es(state: &MixedES, theta: f64) -> SldMatrix {
    let spec = state.spectrum();
    let mut l = CMat::zeros(spec.dim(), spec.dim());
    for (k, (s, beta)) in spec.sectors().iter().zip(state.betas()).enumerate() {
        let (up, down) = (spec.up_index(k), spec.down_index(k));
        let z = I * cis(2.0 * s.g * theta + beta) * (2.0 * s.g);
        l[(down, up)] = z;
        l[(up, down)] = z.conj();
    }
    SldMatrix(l)
}

/// `d rho(theta) / d theta = -i [G, rho(theta)]` for `rho(theta)` already encoded.
pub fn encoded_derivative(rho: &CMat, spectrum: &GeneratorSpectrum) -> CMat {
    let d = spectrum.diagonal();
    CMat::from_fn(rho.nrows(), rho.ncols(), |i, j| -I * rho[(i, j)] * (d[i] - d[j]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParityEnhancement {
    pub f_before: f64,
    pub f_bar: f64,
    pub q_plus: f64,
    pub q_minus: f64,
    pub q_zero: f64,
    pub f_plus: f64,
    pub f_minus: f64,
}

/// QFI before and after a parity measurement, averaged over branches.
///
/// The zero-sector branch has no Fisher information and contributes only
/// probability.
pub fn parity_enhancement(rho: &DensityMatrix, spectrum: &GeneratorSpectrum) -> Result<ParityEnhancement> {
    if rho.dim() != spectrum.dim() {
        return Err(Error::NotDensityMatrix(format!(
            "dimension {} does not match spectrum dimension {}",
            rho.dim(),
            spectrum.dim()
        )));
    }
    let g = generator_matrix(spectrum);
    let f_before = qfi_oracle(rho, &g)?.value;
    let collapse = parity_collapse(rho, spectrum)?;
    let branch_f = |b: &Option<DensityMatrix>| -> Result<f64> {
        b.as_ref().map_or(Ok(0.0), |r| qfi_oracle(r, &g).map(|q| q.value))
    };
    let f_plus = branch_f(&collapse.plus)?;
    let f_minus = branch_f(&collapse.minus)?;
    Ok(ParityEnhancement {
        f_before,
        f_bar: collapse.q_plus * f_plus + collapse.q_minus * f_minus,
        q_plus: collapse.q_plus,
        q_minus: collapse.q_minus,
        q_zero: collapse.q_zero,
        f_plus,
        f_minus,
    })
}

/// `4 tr(rho G^2)`, the post-measurement average predicted in closed form.
pub fn enhanced_bound(rho: &DensityMatrix, spectrum: &GeneratorSpectrum) -> f64 {
    let d = spectrum.diagonal();
    4.0 * d.iter().enumerate().map(|(i, g)| rho.matrix()[(i, i)].re * g * g).sum::<f64>()
}
