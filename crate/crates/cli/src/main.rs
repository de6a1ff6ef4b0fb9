//! `gm-ext`: classify, solve, sweep, fit and probe Gierer-Meinhardt steady
//! states on the exterior of a ball.

mod config;
mod exit;
mod fit;
mod solve;
mod sweep;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gm_exterior::{classify, degeneration_probe, Outcome};

use config::{parse_window, Layer, ParamArgs, RunConfig, EXPONENT_KEYS};
use exit::CliError;
use solve::{Manifest, ProfileRecord, VerdictRecord};

#[derive(Parser)]
#[command(name = "gm-ext", version, about = "Radial Gierer-Meinhardt steady states on exterior domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide existence and predicted decay for a parameter set.
    /// Exit 0 existence, 1 nonexistence, 2 inconclusive.
    Classify {
        #[command(flatten)]
        params: ParamArgs,
        /// Print the verdict as JSON
        #[arg(long)]
        json: bool,
    },
    /// Solve an existence case; writes solution.csv and manifest.json.
    Solve {
        #[command(flatten)]
        params: ParamArgs,
        /// Output directory
        #[arg(long, default_value = "run")]
        out: PathBuf,
        /// Replay the configuration of a saved manifest (flags still apply)
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Earlier manifest to measure truncation stability against
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Classify (and optionally solve) every cell of a parameter grid.
    /// Exponents take `x` or `start:end:count`.
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        /// Also solve existence cells and record fitted exponents
        #[arg(long)]
        solve: bool,
        /// Worker threads (default: GM_EXT_JOBS, then the core count)
        #[arg(long)]
        jobs: Option<usize>,
        /// Atlas CSV path (default: standard output)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit power laws to the columns of a solution CSV.
    Fit {
        /// Solution CSV with an `r` column
        csv: PathBuf,
        /// Compare against the profiles predicted in this manifest
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Fit `r^a log^b(r/r0)` for every column
        #[arg(long)]
        log: bool,
        /// Exponent flags compare against the classifier's prediction
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Watch the truncated problems degenerate in a nonexistence regime.
    Probe {
        #[command(flatten)]
        params: ParamArgs,
        /// Truncation radii, comma separated
        #[arg(long, default_value = "1e2,1e3,1e4", value_delimiter = ',')]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 256)]
        nodes_per_decade: usize,
    },
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn read_manifest(path: &Path) -> Result<Manifest, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: not a run manifest: {e}", path.display())))
}

fn outcome_code(outcome: Outcome) -> u8 {
    match outcome {
        Outcome::Nonexistence => exit::NONEXISTENCE,
        Outcome::Inconclusive => exit::INCONCLUSIVE,
        _ => 0,
    }
}

fn cmd_classify(params: &ParamArgs, json: bool) -> Result<u8, CliError> {
    let config = RunConfig::resolve(&params.layer()?)?;
    let exact = config.exact()?;
    let verdict = classify(&exact).map_err(|e| CliError::library(&e))?;
    if json {
        let record = VerdictRecord::of(&verdict, exact.sigma());
        println!("{}", serde_json::to_string_pretty(&record).expect("verdict serializes"));
    } else {
        println!("{verdict}");
    }
    Ok(outcome_code(verdict.outcome))
}

fn cmd_solve(params: &ParamArgs, out: &Path, manifest: Option<&Path>, reference: Option<&Path>) -> Result<u8, CliError> {
    let mut layer = match manifest {
        Some(path) => read_manifest(path)?.config.to_layer(),
        None => Layer::default(),
    };
    layer.overlay(&params.layer()?);
    let config = RunConfig::resolve(&layer)?;
    let reference = reference.map(|p| read_manifest(p).map(|m| (p, m))).transpose()?;
    let run = solve::compute(&config)?;
    let csv_name = "solution.csv";
    let mut record = run.manifest(csv_name);
    if let Some((path, m)) = &reference {
        record.reference = Some(run.compare_reference(m, &path.display().to_string())?);
    }
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    write_file(&out.join(csv_name), &run.csv()?)?;
    let json = serde_json::to_string_pretty(&record).expect("manifest serializes") + "\n";
    write_file(&out.join("manifest.json"), json.as_bytes())?;

    println!("{}", record.verdict.text);
    println!(
        "lambda = {:e} ({}), {} iterations, residuals {:.1e}/{:.1e}",
        record.lambda, record.lambda_rule, record.iterations, record.residuals.0, record.residuals.1
    );
    for (name, f) in [("u", &record.fits.u), ("v", &record.fits.v)] {
        println!(
            "{name}: power {:.4} log_power {:.4} vs {}: {}",
            f.power,
            f.log_power,
            f.predicted,
            if f.pass { "PASS" } else { "FAIL" }
        );
    }
    println!("box on [{:e}, {:e}]: {}", record.box_check.window.0, record.box_check.window.1, if record.box_check.holds { "holds" } else { "violated" });
    if let Some(r) = &record.reference {
        println!("truncation delta vs {}: {:.2e} ({})", r.manifest, r.max_delta, if r.stable { "stable" } else { "unstable" });
    }
    println!("wrote {}", out.display());
    Ok(0)
}

fn jobs(flag: Option<usize>) -> Result<usize, CliError> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var("GM_EXT_JOBS") {
            Ok(text) => text.trim().parse().map_err(|_| CliError::config(format!("GM_EXT_JOBS = `{text}` is not a count")))?,
            Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        },
    };
    if n == 0 {
        return Err(CliError::config("jobs must be at least 1"));
    }
    Ok(n)
}

fn cmd_sweep(params: &ParamArgs, solve_cells: bool, jobs_flag: Option<usize>, out: Option<&Path>) -> Result<u8, CliError> {
    let rows = sweep::run(&params.layer()?, solve_cells, jobs(jobs_flag)?)?;
    let bytes = sweep::to_csv(&rows).map_err(|e| CliError::new(exit::IO, format!("writing atlas: {e}")))?;
    match out {
        Some(path) => write_file(path, &bytes)?,
        None => std::io::stdout().write_all(&bytes).map_err(|e| CliError::io(Path::new("<stdout>"), e))?,
    }
    Ok(0)
}

fn cmd_fit(csv: &Path, manifest: Option<&Path>, force_log: bool, params: &ParamArgs) -> Result<u8, CliError> {
    let table = fit::read_table(csv)?;
    let layer = params.layer()?;
    let window = match layer.get("window") {
        Some(text) => parse_window(text)?,
        None => table.grid.default_window(),
    };
    let mut predicted: Vec<(&str, ProfileRecord)> = Vec::new();
    let mut verdict_text = None;
    if let Some(path) = manifest {
        let m = read_manifest(path)?;
        verdict_text = Some(m.verdict.text.clone());
        predicted.extend(m.verdict.u.map(|p| ("u", p)));
        predicted.extend(m.verdict.v.map(|p| ("v", p)));
    } else if EXPONENT_KEYS.iter().any(|k| layer.get(k).is_some()) {
        let exact = RunConfig::resolve(&layer)?.exact()?;
        let verdict = classify(&exact).map_err(|e| CliError::library(&e))?;
        verdict_text = Some(verdict.to_string());
        predicted.extend(verdict.u_profile.as_ref().map(|p| ("u", ProfileRecord::of(p))));
        predicted.extend(verdict.v_profile.as_ref().map(|p| ("v", ProfileRecord::of(p))));
    }
    if let Some(w) = fit::layer_warning(&table.grid, window) {
        eprintln!("{w}");
    }
    if let Some(text) = verdict_text {
        println!("{text}");
    }
    print!("{}", fit::report(&table, window, &predicted, force_log)?);
    Ok(0)
}

fn cmd_probe(params: &ParamArgs, radii: &[f64], nodes_per_decade: usize) -> Result<u8, CliError> {
    let config = RunConfig::resolve(&params.layer()?)?;
    let exact = config.exact()?;
    let report = degeneration_probe(&exact.to_scalar::<f64>(), config.r0, radii, nodes_per_decade).map_err(|e| match e {
        gm_exterior::Error::Regime { .. } => CliError::new(exit::INCONCLUSIVE, format!("refusing to probe: {e}; the probe only runs in nonexistence regimes")),
        e => CliError::library(&e),
    })?;
    println!("{report}");
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Classify { params, json } => cmd_classify(&params, json),
        Command::Solve { params, out, manifest, reference } => cmd_solve(&params, &out, manifest.as_deref(), reference.as_deref()),
        Command::Sweep { params, solve, jobs, out } => cmd_sweep(&params, solve, jobs, out.as_deref()),
        Command::Fit { csv, manifest, log, params } => cmd_fit(&csv, manifest.as_deref(), log, &params),
        Command::Probe { params, radii, nodes_per_decade } => cmd_probe(&params, &radii, nodes_per_decade),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are configuration errors, not verdicts
            return ExitCode::from(if e.use_stderr() { exit::CONFIG } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("gm-ext: {e}");
            ExitCode::from(e.code)
        }
    }
}
