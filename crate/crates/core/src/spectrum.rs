//! Qubit-sector decomposition of a phase-shift generator.
//!
//! A generator with a symmetric spectrum (`g_m = -g_{-m}`) splits into
//! two-level sectors spanned by its `+g_n` and `-g_n` eigenvectors, plus an
//! optional kernel (the zero sector), which carries no phase information.
//!
//! Canonical basis ordering is by descending eigenvalue:
//!
//! ```text
//! |up>_K, ..., |up>_1, |0>_1 .. |0>_z, |down>_1, ..., |down>_K
//! ```
//!
//! where sectors are sorted ascending by `g`, so the largest `+g` comes
//! first. For the collective spin this is the usual `m = S, S-1, ..., -S`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Absolute tolerance for pairing `+g` with `-g` and for treating an
/// eigenvalue as zero.
pub const PAIRING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub n: u32,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpectrum")]
pub struct GeneratorSpectrum {
    sectors: Vec<Sector>,
    zero_sector: usize,
}

#[derive(Deserialize)]
struct RawSpectrum {
    sectors: Vec<Sector>,
    #[serde(default)]
    zero_sector: usize,
}

impl TryFrom<RawSpectrum> for GeneratorSpectrum {
    type Error = Error;

    fn try_from(raw: RawSpectrum) -> Result<Self> {
        GeneratorSpectrum::new(raw.sectors, raw.zero_sector)
    }
}

impl GeneratorSpectrum {
    /// Validate an explicit sector list.
    pub fn new(sectors: Vec<Sector>, zero_sector: usize) -> Result<Self> {
        if sectors.is_empty() && zero_sector == 0 {
            return Err(Error::EmptySpectrum);
        }
        for s in &sectors {
            if !s.g.is_finite() {
                return Err(Error::NonFinite(s.g));
            }
            if s.g <= PAIRING_TOL {
                return Err(Error::InvalidSector(format!("sector {} has g = {} <= 0", s.n, s.g)));
            }
        }
        for w in sectors.windows(2) {
            if w[1].g - w[0].g <= PAIRING_TOL {
                if (w[1].g - w[0].g).abs() <= PAIRING_TOL {
                    return Err(Error::SpectrumDegenerate(w[0].g));
                }
                return Err(Error::InvalidSector("sectors must be sorted ascending by g".into()));
            }
        }
        let mut labels: Vec<u32> = sectors.iter().map(|s| s.n).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSector("duplicate sector label".into()));
        }
        Ok(Self { sectors, zero_sector })
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn num_sectors(&self) -> usize {
        self.sectors.len()
    }

    pub fn zero_sector(&self) -> usize {
        self.zero_sector
    }

    pub fn dim(&self) -> usize {
        2 * self.sectors.len() + self.zero_sector
    }

    pub fn g(&self, k: usize) -> f64 {
        self.sectors[k].g
    }

    pub fn g_values(&self) -> Vec<f64> {
        self.sectors.iter().map(|s| s.g).collect()
    }

    pub fn g_max(&self) -> f64 {
        self.sectors.last().map_or(0.0, |s| s.g)
    }

    /// Position of the sector with label `n`.
    pub fn position(&self, n: u32) -> Option<usize> {
        self.sectors.iter().position(|s| s.n == n)
    }

    /// Basis index of `|up>` for the sector at position `k`.
    pub fn up_index(&self, k: usize) -> usize {
        self.sectors.len() - 1 - k
    }

    /// Basis index of `|down>` for the sector at position `k`.
    pub fn down_index(&self, k: usize) -> usize {
        self.sectors.len() + self.zero_sector + k
    }

    pub fn zero_indices(&self) -> std::ops::Range<usize> {
        self.sectors.len()..self.sectors.len() + self.zero_sector
    }

    /// Generator eigenvalues in canonical (descending) order.
    pub fn diagonal(&self) -> Vec<f64> {
        let k = self.sectors.len();
        let mut d = Vec::with_capacity(self.dim());
        d.extend(self.sectors.iter().rev().map(|s| s.g));
        d.extend(std::iter::repeat_n(0.0, self.zero_sector));
        d.extend(self.sectors.iter().map(|s| -s.g));
        debug_assert_eq!(d.len(), 2 * k + self.zero_sector);
        d
    }
}

/// Pair a raw eigenvalue list into sectors. Labels are assigned `1..=K`
/// in ascending order of `g`.
pub fn build_spectrum(eigenvalues: &[f64]) -> Result<GeneratorSpectrum> {
    if eigenvalues.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let mut zero = 0;
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for &v in eigenvalues {
        if !v.is_finite() {
            return Err(Error::NonFinite(v));
        }
        if v.abs() < PAIRING_TOL {
            zero += 1;
        } else if v > 0.0 {
            pos.push(v);
        } else {
            neg.push(-v);
        }
    }
    pos.sort_by(f64::total_cmp);
    neg.sort_by(f64::total_cmp);
    for i in 0..pos.len().max(neg.len()) {
        match (pos.get(i), neg.get(i)) {
            (Some(&p), Some(&m)) if (p - m).abs() <= PAIRING_TOL => {}
            (Some(&p), Some(&m)) => return Err(Error::SpectrumAsymmetric(p.min(m))),
            (Some(&p), None) => return Err(Error::SpectrumAsymmetric(p)),
            (None, Some(&m)) => return Err(Error::SpectrumAsymmetric(-m)),
            (None, None) => unreachable!(),
        }
    }
    if let Some(w) = pos.windows(2).find(|w| w[1] - w[0] <= PAIRING_TOL) {
        return Err(Error::SpectrumDegenerate(w[0]));
    }
    let sectors = pos.into_iter().enumerate().map(|(i, g)| Sector { n: i as u32 + 1, g }).collect();
    GeneratorSpectrum::new(sectors, zero)
}

/// Spectrum of the collective `S_z` for `N` particles in two modes.
///
/// Even `N` gives sectors `g = 1..N/2` plus one zero state; odd `N` gives
/// `g = 1/2, 3/2, ..., N/2` with no zero state. Labels run `1..=K`, so for
/// even `N` the label equals `g`.
pub fn sz_spectrum(n_particles: usize) -> Result<GeneratorSpectrum> {
    if n_particles < 1 {
        return Err(Error::InvalidN(n_particles));
    }
    let k = n_particles / 2 + n_particles % 2;
    let offset = if n_particles.is_multiple_of(2) { 0.0 } else { 0.5 };
    let sectors = (1..=k).map(|i| Sector { n: i as u32, g: i as f64 - offset }).collect();
    GeneratorSpectrum::new(sectors, 1 - n_particles % 2)
}

/// Diagonal generator matrix in canonical ordering.
pub fn generator_matrix(spec: &GeneratorSpectrum) -> CMat {
    linalg::real_diagonal(&spec.diagonal())
}

/// Eigenvalues of a Hermitian matrix, for round trips through [`build_spectrum`].
pub fn spectrum_of(matrix: &CMat) -> Vec<f64> {
    linalg::eigvalsh(matrix)
}
