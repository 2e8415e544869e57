//! Per-sector maximum-likelihood estimators, their optimal weighted
//! combination, and Monte Carlo experiments against the Cramér–Rao bound.
//!
//! For an equatorial input the compound measurement gives, per sector,
//! `P(n, +) = p_n cos^2(Phi_n)` with `Phi_n = g_n theta + beta_n / 2`. The
//! sector MLE inverts the observed `+` frequency, and the combined estimate
//! `sum w_n Theta_n` with `w_n = p_n F_n / F` reaches `1 / (nu F)`.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{sample_outcomes_trial, Measurable, OutcomeCounts};
use crate::states::{PhaseEncode, PureState};

/// Distance to a multiple of `pi/2` below which inversion is refused.
pub const DEGENERATE_PHASE_TOL: f64 = 1e-6;

/// Equatorial tolerance applied to experiment inputs.
pub const EQUATORIAL_TOL: f64 = 1e-9;

/// MLE of `theta` from one sector's `(nu+, nu-)` counts.
///
/// `Phi = arccos(sqrt(nu+ / nu_n))` is only known up to sign and multiples of
/// `pi`; the image closest to `g theta_prior + beta / 2` is used.
pub fn sector_mle(plus: u64, minus: u64, g: f64, beta: f64, theta_prior: f64, label: u32) -> Result<f64> {
    let n = plus + minus;
    if n == 0 {
        return Err(Error::EmptySector(label));
    }
    let freq = plus as f64 / n as f64;
    let phi_hat = freq.sqrt().clamp(0.0, 1.0).acos();
    let target = g * theta_prior + beta / 2.0;
    let mut best = f64::NAN;
    let mut best_dist = f64::INFINITY;
    for s in [1.0, -1.0] {
        let base = s * phi_hat;
        let cand = base + ((target - base) / PI).round() * PI;
        let d = (cand - target).abs();
        if d < best_dist {
            best = cand;
            best_dist = d;
        }
    }
    Ok((best - beta / 2.0) / g)
}

/// Design weights `w_n = p_n 4 g_n^2 / F`.
pub fn optimal_weights(p: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    if p.len() != g.len() {
        return Err(Error::IndexMismatch);
    }
    let fn_: Vec<f64> = p.iter().zip(g).map(|(p, g)| p * 4.0 * g * g).collect();
    let f: f64 = fn_.iter().sum();
    if f <= 0.0 {
        return Err(Error::AllZero);
    }
    Ok(fn_.iter().map(|x| x / f).collect())
}

/// Weights `nu_n F_n / sum nu_m F_m` from observed sector totals.
pub fn empirical_weights(counts: &OutcomeCounts, g: &[f64]) -> Result<Vec<f64>> {
    let nu: Vec<f64> = (0..counts.labels.len()).map(|k| counts.sector_total(k) as f64).collect();
    optimal_weights(&nu, g)
}

/// `Theta = sum w_n Theta_n`. `None` estimates mark empty sectors; they are
/// dropped and the surviving weights renormalized.
pub fn combine(estimates: &[Option<f64>], weights: &[f64]) -> Result<f64> {
    if estimates.len() != weights.len() {
        return Err(Error::IndexMismatch);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (e, w) in estimates.iter().zip(weights) {
        if let Some(e) = e {
            num += w * e;
            den += w;
        }
    }
    if den <= 0.0 {
        return Err(Error::AllZero);
    }
    Ok(num / den)
}

/// Renormalized weights over the sectors that survived.
pub fn renormalize(weights: &[f64], present: &[bool]) -> Vec<f64> {
    let den: f64 = weights.iter().zip(present).filter(|(_, p)| **p).map(|(w, _)| w).sum();
    weights.iter().zip(present).map(|(w, p)| if *p && den > 0.0 { w / den } else { 0.0 }).collect()
}

/// Cramér–Rao bound `1 / (nu F)`.
pub fn crb(f: f64, nu: u64) -> Result<f64> {
    if f <= 0.0 || nu == 0 {
        return Err(Error::AllZero);
    }
    Ok(1.0 / (nu as f64 * f))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    #[default]
    Design,
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub state: PureState,
    pub theta_true: f64,
    pub theta_prior: f64,
    pub nu: u64,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub weights: WeightMode,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nu < 1 {
            return Err(Error::InvalidConfig("nu must be at least 1".into()));
        }
        if self.trials < 1 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if !self.theta_true.is_finite() || !self.theta_prior.is_finite() {
            return Err(Error::InvalidConfig("theta values must be finite".into()));
        }
        let window = PI / (4.0 * self.state.spectrum().g_max());
        if (self.theta_true - self.theta_prior).abs() >= window {
            return Err(Error::InvalidConfig(format!(
                "|theta_true - theta_prior| must be below pi/(4 g_max) = {window}"
            )));
        }
        if !self.state.is_equatorial(EQUATORIAL_TOL) {
            return Err(Error::NotEquatorial);
        }
        Ok(())
    }
}

/// Welford accumulator; merging is associative.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + d * d * (self.count as f64 * other.count as f64) / count as f64;
        Self { count, mean, m2 }
    }

    /// Unbiased sample variance; NaN below two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            f64::NAN
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.push(x);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorSummary {
    pub n: u32,
    pub g: f64,
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
    /// `var(Theta_n) * nu p_n F_n`, which tends to 1.
    pub ratio: f64,
    pub empty_trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimationReport {
    #[serde(rename = "F")]
    pub f: f64,
    pub crb: f64,
    pub mean: f64,
    pub var: f64,
    pub ratio: f64,
    pub nu: u64,
    pub trials: u64,
    pub sectors: Vec<SectorSummary>,
    #[serde(skip)]
    pub theta_hats: Vec<f64>,
}

/// Per-trial output: per-sector estimates (`None` when empty) and the
/// combined value.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialEstimate {
    pub sectors: Vec<Option<f64>>,
    pub theta: f64,
}

/// Estimate from one set of counts.
pub fn estimate_from_counts(
    counts: &OutcomeCounts,
    g: &[f64],
    beta: &[f64],
    design: &[f64],
    mode: WeightMode,
    theta_prior: f64,
) -> Result<TrialEstimate> {
    let k = counts.labels.len();
    if g.len() != k || beta.len() != k || design.len() != k {
        return Err(Error::IndexMismatch);
    }
    let sectors: Vec<Option<f64>> = (0..k)
        .map(|i| match sector_mle(counts.plus[i], counts.minus[i], g[i], beta[i], theta_prior, counts.labels[i]) {
            Ok(t) => Ok(Some(t)),
            Err(Error::EmptySector(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let weights = match mode {
        WeightMode::Design => design.to_vec(),
        WeightMode::Empirical => empirical_weights(counts, g)?,
    };
    let theta = combine(&sectors, &weights)?;
    Ok(TrialEstimate { sectors, theta })
}

/// Sectors whose encoded phase sits on a degenerate point of the inversion.
pub fn check_degenerate(state: &PureState, theta: f64) -> Result<()> {
    for (s, sec) in state.sectors().iter().zip(state.spectrum().sectors()) {
        if s.p <= 0.0 {
            continue;
        }
        let phase = sec.g * theta + s.beta / 2.0;
        let off = phase - (phase / FRAC_PI_2).round() * FRAC_PI_2;
        if off.abs() < DEGENERATE_PHASE_TOL {
            return Err(Error::DegenerateTheta { sector: sec.n, phase });
        }
    }
    Ok(())
}

/// Monte Carlo over `trials` independent experiments of `nu` shots each.
/// Trials run in parallel on streams `(seed, trial)` and are reduced in
/// trial order, so the report is independent of scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<EstimationReport> {
    config.validate()?;
    check_degenerate(&config.state, config.theta_true)?;
    let state = &config.state;
    let g = state.spectrum().g_values();
    let beta = state.betas();
    let p = state.probabilities();
    let design = optimal_weights(&p, &g)?;
    let f: f64 = p.iter().zip(&g).map(|(p, g)| 4.0 * p * g * g).sum();
    let dist = state.phase_encode(config.theta_true).outcome_probs(0.0);

    let trials: Vec<TrialEstimate> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let counts = sample_outcomes_trial(&dist, config.nu, config.seed, t);
            estimate_from_counts(&counts, &g, &beta, &design, config.weights, config.theta_prior)
        })
        .collect::<Result<_>>()?;

    let total: RunningStats = trials.iter().map(|t| t.theta).collect();
    let sectors = (0..g.len())
        .map(|k| {
            let s: RunningStats = trials.iter().filter_map(|t| t.sectors[k]).collect();
            let variance = s.variance();
            SectorSummary {
                n: state.spectrum().sectors()[k].n,
                g: g[k],
                weight: design[k],
                mean: s.mean,
                variance,
                ratio: variance * config.nu as f64 * p[k] * 4.0 * g[k] * g[k],
                empty_trials: config.trials - s.count,
            }
        })
        .collect();
    let var = total.variance();
    let crb = crb(f, config.nu)?;
    log::debug!("experiment: {} trials, F = {f}, var = {var}", config.trials);
    Ok(EstimationReport {
        f,
        crb,
        mean: total.mean,
        var,
        ratio: var / crb,
        nu: config.nu,
        trials: config.trials,
        sectors,
        theta_hats: trials.iter().map(|t| t.theta).collect(),
    })
}
