use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use mixbound::channels::{apply, channel_derivative, ChannelSpec, DEFAULT_STEP};
use mixbound::exec::Execution;
use mixbound::metrology::{bures_distance_sq, delta_x_min, fidelity, qfi_fd, qfi_sld};
use mixbound::states::{mix, Decomposition};
use mixbound::verify::{
    run_suite, scaling_experiment, werner_experiment, SuiteConfig, DEFAULT_MAX_DIM, SCALING_REL_TOL,
};
use mixbound::{ComplexMatrix, DensityMatrix, Result};

#[derive(Parser)]
#[command(name = "mixbound", version, about = "Quantum sensitivity bounds for pure and mixed probe states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fidelity and squared Bures distance of two density matrices.
    Fidelity {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
    },
    /// QFI (SLD and finite-difference routes) and minimum uncertainty.
    Qfi {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        rho: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        dx: f64,
        #[arg(long, default_value_t = 1)]
        n: u64,
    },
    /// Fuzz joint convexity of the squared Bures distance.
    VerifyLemma {
        #[command(flatten)]
        common: FuzzArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 4, 8])]
        dims: Vec<usize>,
    },
    /// Fuzz the bound of a mixed state by its best decomposition member.
    VerifyTheorem {
        #[command(flatten)]
        common: FuzzArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8])]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.1, 0.3])]
        gamma: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        dx: f64,
        #[arg(long, default_value_t = 1)]
        n: u64,
    },
    /// Product vs GHZ-type scaling of the minimum uncertainty with K.
    Scaling {
        #[arg(long)]
        h: PathBuf,
        #[arg(long)]
        kmax: usize,
        #[arg(long, default_value_t = 1)]
        n: u64,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        dx: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// QFI of a GHZ state with admixed white noise over a grid of weights q.
    Werner {
        #[arg(long)]
        k: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        q_grid: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        n: u64,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        dx: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// JSON report with every trial.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV summary; defaults to the report path with a `.csv` extension.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_DIM)]
    max_dim: usize,
    /// Harness self-test: invert the checked inequality.
    #[arg(long)]
    self_test_invert: bool,
    #[arg(long)]
    sequential: bool,
}

impl FuzzArgs {
    fn apply_to(&self, cfg: &mut SuiteConfig) {
        cfg.max_dim = self.max_dim;
        cfg.invert = self.self_test_invert;
        cfg.execution = if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        };
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Accepts either the matrix format or the decomposition format.
fn read_state(path: &Path) -> Result<DensityMatrix> {
    let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    if value.get("weights").is_some() {
        mix(&serde_json::from_value::<Decomposition>(value)?)
    } else {
        DensityMatrix::new(serde_json::from_value::<ComplexMatrix>(value)?)
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_rows_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn run_fuzz(mut cfg: SuiteConfig, common: &FuzzArgs) -> Result<u8> {
    common.apply_to(&mut cfg);
    let outcome = run_suite(&cfg)?;
    let report = &outcome.report;
    if let Some(out) = &common.out {
        report.write_json(out)?;
    }
    let csv_path = common
        .csv
        .clone()
        .or_else(|| common.out.as_ref().map(|p| p.with_extension("csv")));
    if let Some(p) = csv_path {
        report.write_csv_file(&p)?;
    }
    print_json(&json!({
        "suite": report.suite,
        "summary": report.summary,
        "exit_code": outcome.exit_code,
    }))?;
    Ok(outcome.exit_code)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Fidelity { rho, sigma } => {
            let (rho, sigma) = (read_state(&rho)?, read_state(&sigma)?);
            print_json(&json!({
                "fidelity": fidelity(&rho, &sigma)?,
                "bures_distance_sq": bures_distance_sq(&rho, &sigma)?,
            }))?;
            Ok(0)
        }
        Command::Qfi { channel, rho, x, dx, n } => {
            let spec: ChannelSpec = read_json(&channel)?;
            let ch = spec.build()?;
            let rho0 = read_state(&rho)?;
            let sld = qfi_sld(&apply(&ch, &rho0, x)?, &channel_derivative(&ch, &rho0, x, dx)?)?;
            let fd = qfi_fd(&ch, &rho0, x, dx)?;
            print_json(&json!({
                "x": x,
                "dx": dx,
                "qfi_sld": sld,
                "qfi_fd": fd,
                "sld": delta_x_min(sld, n),
                "fd": delta_x_min(fd.max(0.0), n),
            }))?;
            Ok(0)
        }
        Command::VerifyLemma { common, dims } => {
            let mut cfg = SuiteConfig::lemma(common.trials, common.seed);
            cfg.dims = dims;
            run_fuzz(cfg, &common)
        }
        Command::VerifyTheorem {
            common,
            dims,
            gamma,
            dx,
            n,
        } => {
            let mut cfg = SuiteConfig::theorem(common.trials, common.seed);
            cfg.dims = dims;
            cfg.gammas = gamma;
            cfg.dx = dx;
            cfg.n = n;
            run_fuzz(cfg, &common)
        }
        Command::Scaling { h, kmax, n, dx, csv } => {
            let h: ComplexMatrix = read_json(&h)?;
            let rows = scaling_experiment(&h, kmax, n, dx)?;
            if let Some(p) = csv {
                write_rows_csv(&p, &rows)?;
            }
            let ok = rows.iter().all(|r| r.within_tolerance);
            print_json(&json!({ "rel_tol": SCALING_REL_TOL, "pass": ok, "rows": rows }))?;
            Ok(u8::from(!ok))
        }
        Command::Werner { k, q_grid, n, dx, csv } => {
            let table = werner_experiment(k, &q_grid, n, dx)?;
            if let Some(p) = csv {
                write_rows_csv(&p, &table.rows)?;
            }
            print_json(&table)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        // Checks never fail through this path; any error is a configuration,
        // input or numerical problem.
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
