//! `endomeasure` command-line front end.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 bad input or
//! configuration.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use endomeasure::instrument::{default_probe_states, default_probes, realize_instrument, verify_axioms, Instrument};
use endomeasure::io::{instrument_from_json, parse_state_literal, read_text, to_json_pretty, write_text};
use endomeasure::sampling::sample_outcomes;
use endomeasure::scenarios::{build_chi_scenario, build_section2, build_tensor_power, run_section2_check};
use endomeasure::state::State;
use endomeasure::uhf::Flavor;
use endomeasure::{ComplexMatrix, Error};

const DEFAULT_SEED: u64 = 42;
const VERIFY_TOL: f64 = 1e-9;
const DILATE_TOL: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(name = "endomeasure", version, about = "Finite-level measurement models on UHF apparatus algebras")]
struct Cli {
    /// Write the report (or dilation) here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance override for all checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// PRNG seed (default 42).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the instrument axioms for an instrument JSON file.
    Verify {
        instrument: PathBuf,
        #[arg(long, default_value_t = 16)]
        probes: usize,
    },
    /// Run a preset scenario.
    Demo {
        #[arg(value_enum)]
        scenario: Scenario,
        #[command(flatten)]
        config: DemoConfig,
    },
    /// Realise an instrument by a measuring process and report the round trip.
    Dilate { instrument: PathBuf },
    /// Sample outcomes of an instrument on a state.
    Sample {
        instrument: PathBuf,
        /// `diag:p1,p2,...` or `vec:z1,z2,...`
        #[arg(long)]
        state: String,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        /// Histogram CSV path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Scenario {
    Section2,
    Chi,
    TensorPower,
}

#[derive(Args, Debug)]
struct DemoConfig {
    /// Scenario config JSON (`{"k", "levels", "flavor", "d", "shots", "seed"}`); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    flavor: Option<Flavor>,
    /// Observed state literal (default: maximally mixed).
    #[arg(long)]
    state: Option<String>,
    #[arg(long)]
    shots: Option<u64>,
    /// Number of tensor copies for `tensor-power`.
    #[arg(long, default_value_t = 2)]
    copies: usize,
    /// Replace the interaction by the identity.
    #[arg(long = "identity-U")]
    identity_u: bool,
    /// Histogram CSV path (section2).
    #[arg(long)]
    csv: Option<PathBuf>,
}

enum Failure {
    Checks(String),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl Cli {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_text(path, &format!("{text}\n")).map_err(Failure::from),
        None => {
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            Ok(())
        }
    }
}

fn load_instrument(path: &Path) -> Result<Instrument, Failure> {
    Ok(instrument_from_json(&read_text(path)?)?)
}

fn cmd_verify(cli: &Cli, path: &Path, probes: usize) -> Result<(), Failure> {
    let e = load_instrument(path)?;
    let tol = cli.tol.unwrap_or(VERIFY_TOL);
    let report = verify_axioms(&e, &default_probe_states(e.dim(), probes), tol, cli.seed())?;
    emit(cli.out.as_deref(), &report.to_json_pretty())?;
    if report.passed() {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Err(Failure::Checks(format!("failed checks: {}", names.join(", "))))
    }
}

fn config_value<T: serde::de::DeserializeOwned>(config: &Value, key: &str) -> Result<Option<T>, Failure> {
    match config.get(key) {
        None => Ok(None),
        Some(v) => serde_json::from_value(v.clone())
            .map(Some)
            .map_err(|e| Failure::Input(format!("config field '{key}': {e}"))),
    }
}

fn cmd_demo(cli: &Cli, scenario: Scenario, c: &DemoConfig) -> Result<(), Failure> {
    let file = match &c.config {
        Some(path) => serde_json::from_str(&read_text(path)?).map_err(|e| Failure::Input(e.to_string()))?,
        None => json!({}),
    };
    let k = c.k.or(config_value(&file, "k")?).unwrap_or(2);
    let levels = c.levels.or(config_value(&file, "levels")?).unwrap_or(3);
    let flavor = c.flavor.or(config_value(&file, "flavor")?).unwrap_or(Flavor::Natural);
    let shots = c.shots.or(config_value(&file, "shots")?).unwrap_or(100_000);
    let seed = cli.seed.or(config_value(&file, "seed")?).unwrap_or(DEFAULT_SEED);
    if let Some(d) = config_value::<usize>(&file, "d")? {
        if d != k {
            return Err(Failure::Input(format!("config d = {d} must equal k = {k}")));
        }
    }
    let tol = cli.tol.unwrap_or(VERIFY_TOL);

    let report = match scenario {
        Scenario::Section2 => {
            let mut p = build_section2(k, levels, flavor, None)?;
            if c.identity_u {
                p = p.with_unitary(ComplexMatrix::identity(p.combined_dim()))?;
            }
            let phi = match &c.state {
                Some(lit) => parse_state_literal(lit)?,
                None => State::maximally_mixed(k),
            };
            if phi.dim() != k {
                return Err(Failure::Input(format!("state has dimension {}, expected {k}", phi.dim())));
            }
            let report = run_section2_check(&p, &phi, shots, seed, tol)?;
            if let (Some(path), Some(h)) = (&c.csv, report.derived.get("histogram")) {
                let hist: endomeasure::sampling::Histogram =
                    serde_json::from_value(h.clone()).map_err(|e| Failure::Input(e.to_string()))?;
                write_text(path, &hist.to_csv())?;
            }
            report
        }
        Scenario::Chi => build_chi_scenario(k, levels)?,
        Scenario::TensorPower => build_tensor_power(k, levels, c.copies)?,
    };
    emit(cli.out.as_deref(), &report.to_json_pretty())?;
    if report.passed() {
        Ok(())
    } else {
        let names: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        Err(Failure::Checks(format!("failed checks: {}", names.join(", "))))
    }
}

fn cmd_dilate(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let e = load_instrument(path)?;
    let tol = cli.tol.unwrap_or(DILATE_TOL);
    let dil = realize_instrument(&e)?;
    let distance = dil.round_trip_distance(&e, &default_probes(e.dim(), 16))?;
    emit(cli.out.as_deref(), &to_json_pretty(&dil))?;
    eprintln!("round-trip distance {distance:e} (tolerance {tol:e})");
    if distance <= tol {
        Ok(())
    } else {
        Err(Failure::Checks(format!("round-trip distance {distance:e} exceeds {tol:e}")))
    }
}

fn cmd_sample(cli: &Cli, path: &Path, state: &str, shots: u64, csv: Option<&Path>) -> Result<(), Failure> {
    let e = load_instrument(path)?;
    let phi = parse_state_literal(state)?;
    if phi.dim() != e.dim() {
        return Err(Failure::Input(format!("state has dimension {}, instrument {}", phi.dim(), e.dim())));
    }
    let weights = e.povm().probabilities(&phi);
    let hist = sample_outcomes(&weights, shots, cli.seed())?;
    let chi = hist.chi_square();
    if let Some(path) = csv {
        write_text(path, &hist.to_csv())?;
    }
    let summary = json!({
        "histogram": hist,
        "chi_square": chi,
        "meta": {"seed": cli.seed(), "config": {"shots": shots, "state": state}},
    });
    emit(cli.out.as_deref(), &to_json_pretty(&summary))?;
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(t) = cli.tol {
        if t.is_nan() || t < 0.0 {
            return Err(Failure::Input(format!("invalid tolerance {t}")));
        }
    }
    match &cli.command {
        Command::Verify { instrument, probes } => cmd_verify(cli, instrument, *probes),
        Command::Demo { scenario, config } => cmd_demo(cli, *scenario, config),
        Command::Dilate { instrument } => cmd_dilate(cli, instrument),
        Command::Sample {
            instrument,
            state,
            shots,
            csv,
        } => cmd_sample(cli, instrument, state, *shots, csv.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
