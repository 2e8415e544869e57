//! Nonlinear two-mode interferometer
//! `H = -chi Sz^2 - bx(t) Sx + bz Sz`.
//!
//! A large transverse field prepares `|m_x = N/2>`; sweeping `bx` to zero
//! adiabatically maps `S_x` eigenstates onto parity-definite sector states
//! `|x^(+-)>_n`, a `bz` pulse encodes the phase, and the reverse sweep maps
//! back so that an `S_x` readout realizes the compound measurement.
//!
//! Spin matrices use the basis `m = S, S-1, ..., -S`, which coincides with
//! the canonical ordering of [`sz_spectrum`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{estimate_from_counts, optimal_weights, WeightMode};
use crate::linalg::{self, c, cis, CMat, CVec};
use crate::measurement::{parity_p0, x_state, OutcomeCounts, Parity};
use crate::sampling;
use crate::spectrum::{sz_spectrum, GeneratorSpectrum};
use crate::states::{from_vector, PureState};

/// Largest accepted `dt * ||H||` per propagation step.
pub const MAX_STEP_PHASE: f64 = 10.0;

/// Dominant-component weight required of every adiabatically mapped level.
pub const ADIABATIC_WEIGHT: f64 = 0.99;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinOps {
    pub sx: CMat,
    pub sy: CMat,
    pub sz: CMat,
}

impl SpinOps {
    pub fn dim(&self) -> usize {
        self.sz.nrows()
    }

    pub fn spin(&self) -> f64 {
        (self.dim() - 1) as f64 / 2.0
    }
}

/// Spin-`N/2` matrices from the ladder operators.
pub fn spin_ops(n_particles: usize) -> Result<SpinOps> {
    if n_particles < 1 {
        return Err(Error::InvalidN(n_particles));
    }
    let dim = n_particles + 1;
    let s = n_particles as f64 / 2.0;
    let m = |i: usize| s - i as f64;
    // S+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>; index i-1 holds m+1.
    let mut sp = CMat::zeros(dim, dim);
    for i in 1..dim {
        let mi = m(i);
        sp[(i - 1, i)] = c((s * (s + 1.0) - mi * (mi + 1.0)).sqrt(), 0.0);
    }
    let sm = sp.adjoint();
    let sx = (&sp + &sm).scale(0.5);
    let sy = (&sp - &sm).map(|z| z * c(0.0, -0.5));
    let sz = linalg::real_diagonal(&(0..dim).map(m).collect::<Vec<_>>());
    Ok(SpinOps { sx, sy, sz })
}

fn hamiltonian(ops: &SpinOps, chi: f64, bx: f64, bz: f64) -> CMat {
    let sz2 = &ops.sz * &ops.sz;
    sz2.scale(-chi) - ops.sx.scale(bx) + ops.sz.scale(bz)
}

pub fn h_ni(n_particles: usize, chi: f64, bx: f64, bz: f64) -> Result<CMat> {
    Ok(hamiltonian(&spin_ops(n_particles)?, chi, bx, bz))
}

/// One piecewise-constant stretch of the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub chi: f64,
    pub bx: f64,
    pub bz: f64,
    pub duration: f64,
}

/// Propagate a state through a schedule with exact per-segment exponentials.
pub fn evolve(n_particles: usize, state: &CVec, schedule: &[Segment]) -> Result<CVec> {
    let ops = spin_ops(n_particles)?;
    if state.len() != ops.dim() {
        return Err(Error::DimensionMismatch { expected: ops.dim(), got: state.len() });
    }
    let mut psi = state.clone();
    for seg in schedule {
        if seg.duration == 0.0 {
            continue;
        }
        let h = hamiltonian(&ops, seg.chi, seg.bx, seg.bz);
        let (values, vectors) = linalg::eigh(&h);
        let norm = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if seg.duration.abs() * norm > MAX_STEP_PHASE {
            return Err(Error::StepTooCoarse(seg.duration.abs() * norm));
        }
        let phases = CVec::from_iterator(values.len(), values.iter().map(|&e| cis(-e * seg.duration)));
        let coeffs = vectors.adjoint() * &psi;
        psi = &vectors * coeffs.component_mul(&phases);
    }
    Ok(psi)
}

/// Sweep profile `bx(t) = bx_max (1 - s(t/T))`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RampShape {
    /// `s(u) = u`.
    #[default]
    Linear,
    /// `s(u) = u - sin(2 pi u) / (2 pi)`: zero sweep rate at both ends, so
    /// no sudden-switch excitation at `bx = 0` or `bx_max`.
    Smooth,
}

impl RampShape {
    pub fn profile(self, u: f64) -> f64 {
        match self {
            RampShape::Linear => u,
            RampShape::Smooth => u - (std::f64::consts::TAU * u).sin() / std::f64::consts::TAU,
        }
    }
}

/// Downward sweep from `bx_max` to zero, sampled at step midpoints.
pub fn ramp_schedule(shape: RampShape, chi: f64, bx_max: f64, ramp_time: f64, steps: usize) -> Vec<Segment> {
    let dt = ramp_time / steps as f64;
    (0..steps)
        .map(|k| {
            let u = (k as f64 + 0.5) / steps as f64;
            Segment { chi, bx: bx_max * (1.0 - shape.profile(u)), bz: 0.0, duration: dt }
        })
        .collect()
}

/// Linear sweep `bx(t) = bx_max (1 - t/T)`.
pub fn linear_ramp(chi: f64, bx_max: f64, ramp_time: f64, steps: usize) -> Vec<Segment> {
    ramp_schedule(RampShape::Linear, chi, bx_max, ramp_time, steps)
}

/// Smallest step count keeping `dt ||H|| <= MAX_STEP_PHASE` along a sweep
/// (with a 20% margin), and at least 100.
pub fn min_steps(n_particles: usize, chi: f64, bx_max: f64, ramp_time: f64) -> usize {
    let s = n_particles as f64 / 2.0;
    let norm = bx_max * s + chi * s * s;
    ((1.2 * ramp_time * norm / MAX_STEP_PHASE).ceil() as usize).max(100)
}

/// Orthonormal basis adapted to `P_0`: even states (`|x+>_n` then the zero
/// sector) followed by odd ones (`|x->_n`).
fn parity_basis(spec: &GeneratorSpectrum) -> (CMat, usize) {
    let dim = spec.dim();
    let k = spec.num_sectors();
    let mut v = CMat::zeros(dim, dim);
    let mut col = 0;
    for i in 0..k {
        v.set_column(col, &x_state(spec, i, Parity::Plus));
        col += 1;
    }
    for z in spec.zero_indices() {
        v[(z, col)] = c(1.0, 0.0);
        col += 1;
    }
    let even = col;
    for i in 0..k {
        v.set_column(col, &x_state(spec, i, Parity::Minus));
        col += 1;
    }
    (v, even)
}

fn block_exp(h: &CMat, dt: f64) -> (CMat, f64) {
    let (values, vectors) = linalg::eigh(h);
    let gap = values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let phases = CVec::from_iterator(values.len(), values.iter().map(|&e| cis(-e * dt)));
    (&vectors * CMat::from_diagonal(&phases) * vectors.adjoint(), gap)
}

/// Propagators for a parity-conserving sweep (`bz = 0`) and its reverse.
#[derive(Debug, Clone, PartialEq)]
pub struct RampPropagators {
    /// Product over the schedule in order.
    pub forward: CMat,
    /// Product over the reversed schedule.
    pub reverse: CMat,
    /// Smallest level spacing seen within a parity block, and where.
    pub min_gap: f64,
    pub min_gap_bx: f64,
}

/// Both sweep directions from one pass. Each step is exponentiated inside
/// the even and odd blocks separately, so parity is conserved exactly and
/// the degeneracy check ignores the (protected) crossings between blocks.
pub fn ramp_propagators(n_particles: usize, schedule: &[Segment]) -> Result<RampPropagators> {
    let ops = spin_ops(n_particles)?;
    let spec = sz_spectrum(n_particles)?;
    let (v, even) = parity_basis(&spec);
    let dim = ops.dim();
    let mut forward = linalg::identity(dim);
    let mut reverse = linalg::identity(dim);
    let mut min_gap = f64::INFINITY;
    let mut min_gap_bx = f64::NAN;
    for seg in schedule {
        if seg.bz != 0.0 {
            return Err(Error::InvalidConfig("parity-block propagation requires bz = 0".into()));
        }
        let h = v.adjoint() * hamiltonian(&ops, seg.chi, seg.bx, 0.0) * &v;
        let norm = linalg::hermitian_norm(&h);
        if seg.duration.abs() * norm > MAX_STEP_PHASE {
            return Err(Error::StepTooCoarse(seg.duration.abs() * norm));
        }
        let mut step = CMat::zeros(dim, dim);
        for (start, len) in [(0, even), (even, dim - even)] {
            if len == 0 {
                continue;
            }
            let block = h.view((start, start), (len, len)).into_owned();
            let (u, gap) = block_exp(&block, seg.duration);
            step.view_mut((start, start), (len, len)).copy_from(&u);
            if gap < min_gap {
                min_gap = gap;
                min_gap_bx = seg.bx;
            }
        }
        forward = &step * forward;
        reverse *= &step;
    }
    Ok(RampPropagators {
        forward: &v * forward * v.adjoint(),
        reverse: &v * reverse * v.adjoint(),
        min_gap,
        min_gap_bx,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NIConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub chi: f64,
    pub bx_max: f64,
    pub ramp_time: f64,
    pub steps: usize,
    pub bz: f64,
    pub dt_encode: f64,
    #[serde(default)]
    pub shape: RampShape,
}

impl NIConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidN(self.n));
        }
        let finite = [self.chi, self.bx_max, self.ramp_time, self.bz, self.dt_encode];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("parameters must be finite".into()));
        }
        if self.chi <= 0.0 {
            return Err(Error::InvalidConfig("chi must be positive".into()));
        }
        if self.bx_max < 20.0 * self.n as f64 * self.chi {
            return Err(Error::InvalidConfig(format!(
                "bx_max = {} must be at least 20 N chi = {}",
                self.bx_max,
                20.0 * self.n as f64 * self.chi
            )));
        }
        if self.steps < 100 {
            return Err(Error::InvalidConfig("steps must be at least 100".into()));
        }
        if self.ramp_time <= 0.0 {
            return Err(Error::InvalidConfig("ramp_time must be positive".into()));
        }
        if self.dt_encode < 0.0 {
            return Err(Error::InvalidConfig("dt_encode must be non-negative".into()));
        }
        Ok(())
    }

    pub fn theta(&self) -> f64 {
        self.bz * self.dt_encode
    }

    pub fn schedule(&self) -> Vec<Segment> {
        ramp_schedule(self.shape, self.chi, self.bx_max, self.ramp_time, self.steps)
    }

    fn degeneracy_floor(&self) -> f64 {
        1e-10 * self.n as f64 * self.chi
    }
}

/// Target of an `S_x` level at `bx = 0`: a sector label with parity, or the
/// zero sector (`sector = None`, `Parity::Zero`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MapEntry {
    pub m_x: f64,
    pub sector: Option<u32>,
    pub parity: Parity,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdiabaticMap {
    #[serde(rename = "N")]
    pub n: usize,
    /// Ordered by descending `m_x`.
    pub entries: Vec<MapEntry>,
}

impl AdiabaticMap {
    /// The table predicted by `|x^(+-)>_n <-> |m_x = 2 g_n - N/2 (- 1)>`,
    /// zero sector at `m_x = -N/2`.
    pub fn expected(n_particles: usize) -> Result<Self> {
        let spec = sz_spectrum(n_particles)?;
        let half = n_particles as f64 / 2.0;
        let mut entries = Vec::with_capacity(spec.dim());
        for s in spec.sectors() {
            entries.push(MapEntry { m_x: 2.0 * s.g - half, sector: Some(s.n), parity: Parity::Plus, weight: 1.0 });
            entries.push(MapEntry {
                m_x: 2.0 * s.g - half - 1.0,
                sector: Some(s.n),
                parity: Parity::Minus,
                weight: 1.0,
            });
        }
        if spec.zero_sector() > 0 {
            entries.push(MapEntry { m_x: -half, sector: None, parity: Parity::Zero, weight: 1.0 });
        }
        entries.sort_by(|a, b| b.m_x.total_cmp(&a.m_x));
        Ok(Self { n: n_particles, entries })
    }

    pub fn min_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).fold(f64::INFINITY, f64::min)
    }

    /// Same assignments as `other`, ignoring weights.
    pub fn same_labels(&self, other: &Self) -> bool {
        self.n == other.n
            && self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.m_x == b.m_x && a.sector == b.sector && a.parity == b.parity)
    }

    /// Every `(n, +)` lands on `S_x` parity `+1` and every `(n, -)` on `-1`.
    pub fn parity_consistent(&self) -> bool {
        let half = self.n as f64 / 2.0;
        self.entries.iter().all(|e| {
            let even = ((half - e.m_x).round() as i64).rem_euclid(2) == 0;
            match e.parity {
                Parity::Plus | Parity::Zero => even,
                Parity::Minus => !even,
            }
        })
    }

    pub fn lookup(&self, m_x: f64) -> Option<&MapEntry> {
        self.entries.iter().find(|e| (e.m_x - m_x).abs() < 1e-9)
    }
}

/// `S_x` eigenvalues (ascending) and eigenvectors.
fn sx_basis(ops: &SpinOps) -> (Vec<f64>, CMat) {
    let (values, vectors) = linalg::eigh(&ops.sx);
    // Eigenvalues are exactly m = -S..S; snap away rounding.
    let s = ops.spin();
    let values = (0..values.len()).map(|i| -s + i as f64).collect();
    (values, vectors)
}

/// Weights of `psi` on every `|x^(+-)>_n` and on the zero sector.
fn sector_parity_weights(spec: &GeneratorSpectrum, psi: &CVec) -> Vec<(Option<u32>, Parity, f64)> {
    let mut out = Vec::with_capacity(spec.dim());
    for (k, s) in spec.sectors().iter().enumerate() {
        for parity in [Parity::Plus, Parity::Minus] {
            let w = x_state(spec, k, parity).dotc(psi).norm_sqr();
            out.push((Some(s.n), parity, w));
        }
    }
    if spec.zero_sector() > 0 {
        let w = spec.zero_indices().map(|z| psi[z].norm_sqr()).sum();
        out.push((None, Parity::Zero, w));
    }
    out
}

/// Follow each eigenstate of `H(bx_max)` down the sweep and record its
/// dominant sector-parity component at `bx = 0`.
pub fn adiabatic_map(n_particles: usize, chi: f64, bx_max: f64, ramp_time: f64, steps: usize) -> Result<AdiabaticMap> {
    let cfg =
        NIConfig { n: n_particles, chi, bx_max, ramp_time, steps, bz: 0.0, dt_encode: 0.0, shape: RampShape::Linear };
    adiabatic_map_with(&cfg)
}

/// [`adiabatic_map`] for the sweep described by a full config.
pub fn adiabatic_map_with(config: &NIConfig) -> Result<AdiabaticMap> {
    config.validate()?;
    let ramp = ramp_propagators(config.n, &config.schedule())?;
    adiabatic_map_from(config, &ramp)
}

/// Dominant `(n, +-)` component at `bx = 0` of each eigenstate of
/// `H(bx_max)`, labelled by its `S_x` quantum number.
fn follow_levels(cfg: &NIConfig, ramp: &RampPropagators) -> Result<Vec<MapEntry>> {
    let ops = spin_ops(cfg.n)?;
    let spec = sz_spectrum(cfg.n)?;
    let (mx_values, mx_vectors) = sx_basis(&ops);
    let (_, eigvecs) = linalg::eigh(&hamiltonian(&ops, cfg.chi, cfg.bx_max, 0.0));
    let mut entries = Vec::with_capacity(ops.dim());
    for j in 0..ops.dim() {
        let v = eigvecs.column(j).into_owned();
        let label = (0..ops.dim())
            .max_by(|&a, &b| {
                let oa = mx_vectors.column(a).dotc(&v).norm_sqr();
                let ob = mx_vectors.column(b).dotc(&v).norm_sqr();
                oa.total_cmp(&ob)
            })
            .expect("non-empty basis");
        let end = &ramp.forward * v;
        let (sector, parity, weight) = sector_parity_weights(&spec, &end)
            .into_iter()
            .max_by(|a, b| a.2.total_cmp(&b.2))
            .expect("non-empty spectrum");
        entries.push(MapEntry { m_x: mx_values[label], sector, parity, weight });
    }
    entries.sort_by(|a, b| b.m_x.total_cmp(&a.m_x));
    Ok(entries)
}

fn adiabatic_map_from(cfg: &NIConfig, ramp: &RampPropagators) -> Result<AdiabaticMap> {
    if ramp.min_gap < cfg.degeneracy_floor() {
        return Err(Error::DegenerateCrossing { bx: ramp.min_gap_bx, gap: ramp.min_gap });
    }
    let entries = follow_levels(cfg, ramp)?;
    if let Some(e) = entries.iter().filter(|e| e.weight < ADIABATIC_WEIGHT).min_by(|a, b| a.weight.total_cmp(&b.weight))
    {
        return Err(Error::NotAdiabatic { m_x: e.m_x, weight: e.weight });
    }
    Ok(AdiabaticMap { n: cfg.n, entries })
}

/// Smallest dominant-component weight over all levels, with no threshold.
pub fn adiabatic_fidelity(config: &NIConfig) -> Result<f64> {
    config.validate()?;
    let ramp = ramp_propagators(config.n, &config.schedule())?;
    Ok(follow_levels(config, &ramp)?.iter().map(|e| e.weight).fold(f64::INFINITY, f64::min))
}

/// `e^{i pi S} e^{-i pi Sx} = (-1)^{S - Sx}`. For integer `S` the prefactor
/// is `(-1)^{N/2}`; for half-integer `S` it is a fixed global phase.
pub fn parity_pulse(n_particles: usize) -> Result<CMat> {
    let ops = spin_ops(n_particles)?;
    let s = ops.spin();
    let rot = linalg::unitary_propagator(&ops.sx, std::f64::consts::PI);
    Ok(rot * cis(std::f64::consts::PI * s))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolRun {
    pub map: AdiabaticMap,
    /// State after the downward sweep.
    #[serde(skip)]
    pub input: PureState,
    /// State after the `bz` pulse.
    #[serde(skip)]
    pub encoded: PureState,
    /// `<P_0>` of the input.
    pub input_parity: f64,
    pub input_equatorial: bool,
    /// `S_x` tallies, ascending `m_x`.
    pub mx_values: Vec<f64>,
    pub mx_counts: Vec<u64>,
    /// The same tallies relabelled as compound outcomes.
    pub counts: OutcomeCounts,
}

/// Run the full interferometer: prepare, sweep down, encode, sweep up,
/// sample `nu` values of `S_x` on stream `(seed, 0)` and relabel them.
pub fn full_protocol(config: &NIConfig, seed: u64, nu: u64) -> Result<ProtocolRun> {
    config.validate()?;
    if nu < 1 {
        return Err(Error::InvalidConfig("nu must be at least 1".into()));
    }
    let ops = spin_ops(config.n)?;
    let spec = sz_spectrum(config.n)?;
    let ramp = ramp_propagators(config.n, &config.schedule())?;
    let map = adiabatic_map_from(config, &ramp)?;

    let (mx_values, mx_vectors) = sx_basis(&ops);
    let top = mx_vectors.column(mx_vectors.ncols() - 1).into_owned();
    let input_vec = &ramp.forward * top;
    let p0 = parity_p0(&spec);
    let input_parity = input_vec.dotc(&(&p0 * &input_vec)).re;
    let input = from_vector(&spec, &input_vec)?;
    let input_equatorial = input.is_equatorial(1e-6);
    if input_parity < 0.999 {
        log::warn!("input parity {input_parity} below 0.999");
    }

    // Encoding at bx = 0 is diagonal: exp(-i dt (-chi m^2 + bz m)).
    let diag = spec.diagonal();
    let encoded_vec = CVec::from_iterator(
        input_vec.len(),
        input_vec.iter().zip(&diag).map(|(a, &m)| a * cis(-config.dt_encode * (-config.chi * m * m + config.bz * m))),
    );
    let encoded = from_vector(&spec, &encoded_vec)?;
    let out = &ramp.reverse * &encoded_vec;

    let probs: Vec<f64> = (0..mx_values.len()).map(|i| mx_vectors.column(i).dotc(&out).norm_sqr()).collect();
    let mut rng = sampling::trial_rng(seed, 0);
    let mx_counts = sampling::multinomial(&mut rng, &probs, nu);
    let counts = relabel(&map, &spec, &mx_values, &mx_counts)?;
    Ok(ProtocolRun { map, input, encoded, input_parity, input_equatorial, mx_values, mx_counts, counts })
}

/// Translate `S_x` tallies into compound outcomes through the map.
pub fn relabel(
    map: &AdiabaticMap,
    spec: &GeneratorSpectrum,
    mx_values: &[f64],
    mx_counts: &[u64],
) -> Result<OutcomeCounts> {
    let mut counts = OutcomeCounts::empty(spec.sectors().iter().map(|s| s.n).collect());
    for (&m, &n) in mx_values.iter().zip(mx_counts) {
        let e = map.lookup(m).ok_or_else(|| Error::InvalidConfig(format!("m_x = {m} missing from map")))?;
        match (e.sector, e.parity) {
            (None, _) | (_, Parity::Zero) => counts.zero_count += n,
            (Some(label), parity) => {
                let k = spec.position(label).ok_or(Error::IndexMismatch)?;
                if parity == Parity::Plus {
                    counts.plus[k] += n;
                } else {
                    counts.minus[k] += n;
                }
            }
        }
    }
    Ok(counts)
}

impl ProtocolRun {
    /// `4 sum p_n g_n^2` of the prepared input.
    pub fn fisher(&self) -> f64 {
        let g = self.input.spectrum().g_values();
        self.input.probabilities().iter().zip(&g).map(|(p, g)| 4.0 * p * g * g).sum()
    }

    /// Combined estimate from the relabelled counts, with design weights
    /// taken from the prepared input and `beta = 0`.
    pub fn estimate(&self, theta_prior: f64) -> Result<f64> {
        let g = self.input.spectrum().g_values();
        let w = optimal_weights(&self.input.probabilities(), &g)?;
        let beta = vec![0.0; g.len()];
        Ok(estimate_from_counts(&self.counts, &g, &beta, &w, WeightMode::Design, theta_prior)?.theta)
    }
}

/// Columns of `S_x` tallies for CSV output.
pub fn mx_rows(run: &ProtocolRun) -> Vec<(f64, u64)> {
    run.mx_values.iter().copied().zip(run.mx_counts.iter().copied()).collect()
}
