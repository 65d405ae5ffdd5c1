use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ionlaser::scenario::{parse_config_file, run_scenario, write_outputs, ScenarioConfig};
use ionlaser::Error;

/// Excited-state population of a laser-driven trapped ion: exact propagation
/// and the low-intensity, Jaynes–Cummings and dispersive approximations.
///
/// Writes `P_e(t)` for each requested model to a CSV file and a
/// `key=value` comparison report beside it.
#[derive(Parser, Debug)]
#[command(name = "ionlaser", version)]
struct Cli {
    /// Trap frequency ν.
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<String>,
    /// Rabi frequency Ω.
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    /// Lamb-Dicke parameter η.
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<String>,
    /// Integer detuning order, δ = kν.
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    /// Detuning δ = ω_a − ω_L.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// Atomic transition frequency (full_eq1).
    #[arg(long = "omega-a", allow_hyphen_values = true)]
    omega_a: Option<String>,
    /// Laser frequency (full_eq1).
    #[arg(long = "omega-l", allow_hyphen_values = true)]
    omega_l: Option<String>,
    /// Highest Fock level n_max [default: 40 if Ω < ν, else 60].
    #[arg(long)]
    dim: Option<String>,
    /// Top Fock levels excluded from exactness checks [default: 4].
    #[arg(long)]
    guard: Option<String>,
    /// Initial state: e0, g0, e:n, g:n or ecoh:x [default: e0].
    #[arg(long)]
    init: Option<String>,
    /// Comma list of exact_eq2, full_eq1, lir_eq5, mir_eq8, dispersive_eq10
    /// [default: exact_eq2].
    #[arg(long)]
    models: Option<String>,
    /// Final time [default: 100/ν if Ω < ν, else 100/Ω].
    #[arg(long, allow_hyphen_values = true)]
    tmax: Option<String>,
    /// Number of samples on [0, tmax] [default: 2000].
    #[arg(long)]
    samples: Option<String>,
    /// Time step of the full_eq1 evolver [default: 0.1/‖H‖].
    #[arg(long, allow_hyphen_values = true)]
    step: Option<String>,
    /// Dispersive Hamiltonian coefficients: second-order or direct
    /// [default: second-order].
    #[arg(long = "dispersive-form")]
    dispersive_form: Option<String>,
    /// Output CSV path [default: pe.csv].
    #[arg(long)]
    out: Option<String>,
    /// Flat key = value file with the same keys; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Cli {
    fn flag_pairs(self) -> Vec<(String, String)> {
        [
            ("nu", self.nu),
            ("omega", self.omega),
            ("eta", self.eta),
            ("k", self.k),
            ("delta", self.delta),
            ("omega-a", self.omega_a),
            ("omega-l", self.omega_l),
            ("dim", self.dim),
            ("guard", self.guard),
            ("init", self.init),
            ("models", self.models),
            ("tmax", self.tmax),
            ("samples", self.samples),
            ("step", self.step),
            ("dispersive-form", self.dispersive_form),
            ("out", self.out),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
        .collect()
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut pairs = match &cli.config {
        Some(path) => parse_config_file(path)?,
        None => Vec::new(),
    };
    pairs.extend(cli.flag_pairs());
    let cfg = ScenarioConfig::from_pairs(pairs)?;
    let output = run_scenario(&cfg)?;
    let (csv, report) = write_outputs(&cfg, &output)?;
    for c in &output.comparisons {
        println!(
            "{} vs {}: sup_norm={:.3e} rms={:.3e} t_at_max_diff={}",
            c.model_a, c.model_b, c.sup_norm, c.rms, c.t_at_max_diff
        );
    }
    println!("wrote {} and {}", csv.display(), report.display());
    Ok(())
}

fn error_line(kind: &str, message: &str) {
    eprintln!("error kind={kind} message={message:?}");
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            error_line("config", e.to_string().lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error_line(e.kind(), &e.to_string());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
