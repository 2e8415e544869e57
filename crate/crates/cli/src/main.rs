//! `eqmet`: command-line front end for the parity-enhanced measurement toolkit.

mod manifest;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use eqmet_core::ancilla::ancilla_check;
use eqmet_core::decoupling::DdSetup;
use eqmet_core::estimation::{run_experiment, ExperimentConfig, WeightMode};
use eqmet_core::fisher::{enhanced_bound, parity_enhancement, qfi_mixed_es, qfi_oracle, qfi_pure};
use eqmet_core::interferometer::{full_protocol, mx_rows, NIConfig};
use eqmet_core::io::{parse_state, write_counts, write_estimates, write_table, StateInput};
use eqmet_core::measurement::parity_collapse;
use eqmet_core::sampling::{multinomial, trial_rng};
use eqmet_core::{generator_matrix, Error};

use manifest::RunManifest;

/// Deviation above which `ancilla-check` reports failure.
const ANCILLA_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "eqmet", version, about = "Parity-enhanced optimal measurements for phase estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quantum Fisher information of a state file.
    Qfi {
        #[arg(long)]
        state: PathBuf,
        /// Also run the eigendecomposition oracle and report the discrepancy.
        #[arg(long)]
        oracle: bool,
    },
    /// Monte Carlo phase estimation with the compound measurement.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        /// Per-trial estimates as `trial,theta_hat`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        nu: Option<u64>,
        /// Weight sectors by observed counts instead of design probabilities.
        #[arg(long)]
        empirical_weights: bool,
    },
    /// Nonlinear interferometer: adiabatic map, encoding and S_x readout.
    Interferometer {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        nu: u64,
        #[arg(long)]
        seed: u64,
        /// Relabelled counts as `sector,parity,count`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Raw S_x tallies as `m_x,count`.
        #[arg(long)]
        mx_out: Option<PathBuf>,
        /// Prior for the estimate; defaults to the encoded phase.
        #[arg(long, allow_hyphen_values = true)]
        theta_prior: Option<f64>,
    },
    /// Parity measurement as a state-preparation step.
    ParityPrep {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        shots: u64,
        #[arg(long)]
        seed: u64,
        /// Per-branch table as `branch,probability,frequency,qfi`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dynamical decoupling sweep over pulse intervals.
    Dd {
        /// Model file; the built-in two-level-bath toy model when omitted.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        tau_list: Vec<f64>,
        #[arg(long = "T")]
        total: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the ancilla parity identity and controlled-X construction.
    AncillaCheck {
        #[arg(long = "N")]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        chi_qs: f64,
    },
}

enum Failure {
    Validation(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn read_input(path: &Path) -> std::result::Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(bytes: &[u8], path: &Path) -> std::result::Result<T, Failure> {
    serde_json::from_slice(bytes).map_err(|e| Failure::Validation(format!("invalid {}: {e}", path.display())))
}

fn create(path: &Path) -> std::result::Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Numeric(format!("cannot write {}: {e}", path.display())))
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json value serializes"));
}

fn qfi(path: &Path, oracle: bool) -> Outcome {
    let bytes = read_input(path)?;
    RunManifest::new("qfi", &[&bytes], &json!({ "oracle": oracle }), None).emit();
    let text = String::from_utf8_lossy(&bytes);
    let state = parse_state(&text)?;
    let g = generator_matrix(state.spectrum());
    let primary = match &state {
        StateInput::Pure(s) => qfi_pure(s),
        StateInput::Mixed(m) => qfi_mixed_es(m),
        StateInput::Density { rho, .. } => qfi_oracle(rho, &g)?,
    };
    let mut out = json!({ "F": primary.value, "method": primary.method, "state": state.kind() });
    if oracle {
        let check = qfi_oracle(&state.to_density(), &g)?.value;
        out["F_oracle"] = json!(check);
        out["relative_discrepancy"] = json!((primary.value - check).abs() / check.abs().max(1.0));
    }
    print_json(&out);
    Ok(())
}

fn estimate(
    path: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
    trials: Option<u64>,
    nu: Option<u64>,
    empirical: bool,
) -> Outcome {
    let bytes = read_input(path)?;
    let mut config: ExperimentConfig = parse_json(&bytes, path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(t) = trials {
        config.trials = t;
    }
    if let Some(n) = nu {
        config.nu = n;
    }
    if empirical {
        config.weights = WeightMode::Empirical;
    }
    let args = json!({ "trials": config.trials, "nu": config.nu, "weights": config.weights });
    RunManifest::new("estimate", &[&bytes], &args, Some(config.seed)).emit();
    let report = run_experiment(&config)?;
    if let Some(p) = out {
        let mut w = create(p)?;
        write_estimates(&mut w, &report.theta_hats)?;
        w.flush().map_err(|e| Failure::Numeric(e.to_string()))?;
    }
    print_json(&serde_json::to_value(&report).expect("report serializes"));
    Ok(())
}

fn interferometer(
    path: &Path,
    nu: u64,
    seed: u64,
    out: Option<&Path>,
    mx_out: Option<&Path>,
    theta_prior: Option<f64>,
) -> Outcome {
    let bytes = read_input(path)?;
    let config: NIConfig = parse_json(&bytes, path)?;
    let prior = theta_prior.unwrap_or_else(|| config.theta());
    RunManifest::new("interferometer", &[&bytes], &json!({ "nu": nu, "theta_prior": prior }), Some(seed)).emit();
    let run = full_protocol(&config, seed, nu)?;
    if let Some(p) = out {
        let mut w = create(p)?;
        write_counts(&mut w, &run.counts)?;
        w.flush().map_err(|e| Failure::Numeric(e.to_string()))?;
    }
    if let Some(p) = mx_out {
        let rows: Vec<Vec<f64>> = mx_rows(&run).into_iter().map(|(m, c)| vec![m, c as f64]).collect();
        let mut w = create(p)?;
        write_table(&mut w, &["m_x", "count"], &rows)?;
        w.flush().map_err(|e| Failure::Numeric(e.to_string()))?;
    }
    let f = run.fisher();
    let theta_hat = run.estimate(prior)?;
    print_json(&json!({
        "map": run.map,
        "input_parity": run.input_parity,
        "input_equatorial": run.input_equatorial,
        "theta": config.theta(),
        "theta_hat": theta_hat,
        "F": f,
        "crb_sigma": (1.0 / (nu as f64 * f)).sqrt(),
    }));
    Ok(())
}

fn parity_prep(path: &Path, shots: u64, seed: u64, out: Option<&Path>) -> Outcome {
    let bytes = read_input(path)?;
    RunManifest::new("parity-prep", &[&bytes], &json!({ "shots": shots }), Some(seed)).emit();
    if shots < 1 {
        return Err(Failure::Validation("shots must be at least 1".into()));
    }
    let state = parse_state(&String::from_utf8_lossy(&bytes))?;
    let rho = state.to_density();
    let spec = state.spectrum();
    let collapse = parity_collapse(&rho, spec)?;
    let pe = parity_enhancement(&rho, spec)?;
    let probs = [collapse.q_plus, collapse.q_minus, collapse.q_zero];
    let counts = multinomial(&mut trial_rng(seed, 0), &probs, shots);
    let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / shots as f64).collect();
    if let Some(p) = out {
        let rows = vec![
            vec![1.0, probs[0], freq[0], pe.f_plus],
            vec![-1.0, probs[1], freq[1], pe.f_minus],
            vec![0.0, probs[2], freq[2], 0.0],
        ];
        let mut w = create(p)?;
        write_table(&mut w, &["branch", "probability", "frequency", "qfi"], &rows)?;
        w.flush().map_err(|e| Failure::Numeric(e.to_string()))?;
    }
    print_json(&json!({
        "state": state.kind(),
        "shots": shots,
        "q_plus": probs[0],
        "q_minus": probs[1],
        "q_zero": probs[2],
        "freq_plus": freq[0],
        "freq_minus": freq[1],
        "freq_zero": freq[2],
        "F_before": pe.f_before,
        "F_plus": pe.f_plus,
        "F_minus": pe.f_minus,
        "F_bar": pe.f_bar,
        "F_bar_closed_form": enhanced_bound(&rho, spec),
    }));
    Ok(())
}

fn dd(model: Option<&Path>, taus: &[f64], total: f64, out: Option<&Path>) -> Outcome {
    let (bytes, setup) = match model {
        Some(p) => {
            let bytes = read_input(p)?;
            let setup: DdSetup = parse_json(&bytes, p)?;
            (bytes, setup)
        }
        None => (Vec::new(), DdSetup::toy()),
    };
    RunManifest::new("dd", &[&bytes], &json!({ "tau_list": taus, "T": total, "toy": model.is_none() }), None).emit();
    let points = setup.sweep(taus, total)?;
    let rows: Vec<Vec<f64>> =
        points.iter().map(|p| vec![p.tau, p.parity_deviation, p.trace_distance_to_effective]).collect();
    let header = ["tau", "parity_deviation", "trace_distance_to_effective"];
    match out {
        Some(p) => {
            let mut w = create(p)?;
            write_table(&mut w, &header, &rows)?;
            w.flush().map_err(|e| Failure::Numeric(e.to_string()))?;
        }
        None => write_table(std::io::stdout().lock(), &header, &rows)?,
    }
    Ok(())
}

fn ancilla(n: usize, chi_qs: f64) -> Outcome {
    RunManifest::new("ancilla-check", &[], &json!({ "N": n, "chi_qs": chi_qs }), None).emit();
    let check = ancilla_check(n, chi_qs)?;
    print_json(&serde_json::to_value(check).expect("check serializes"));
    let worst = check.parity_identity_deviation.max(check.cx_deviation);
    if worst > ANCILLA_TOL {
        return Err(Failure::Numeric(format!("ancilla construction deviates by {worst:e}")));
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Qfi { state, oracle } => qfi(&state, oracle),
        Command::Estimate { config, out, seed, trials, nu, empirical_weights } => {
            estimate(&config, out.as_deref(), seed, trials, nu, empirical_weights)
        }
        Command::Interferometer { config, nu, seed, out, mx_out, theta_prior } => {
            interferometer(&config, nu, seed, out.as_deref(), mx_out.as_deref(), theta_prior)
        }
        Command::ParityPrep { state, shots, seed, out } => parity_prep(&state, shots, seed, out.as_deref()),
        Command::Dd { model, tau_list, total, out } => dd(model.as_deref(), &tau_list, total, out.as_deref()),
        Command::AncillaCheck { n, chi_qs } => ancilla(n, chi_qs),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
