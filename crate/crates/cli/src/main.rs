use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use critlab::companion::dense_eigenvalues;
use critlab::lab::{emit_plots, emit_report, parse_config, run_experiment, write_plots, PlotData};
use critlab::limit_function::count_zeros_in_disc;
use critlab::{CircleMeasure, Complex64, Error, StructuredCompanion, ZeroCount, ORACLE_MAX_DEGREE};

const EXIT_CONFIG: u8 = 2;
const EXIT_NONCONVERGED: u8 = 3;

/// Critical points of random polynomials with roots on the unit circle.
#[derive(Parser)]
#[command(name = "critlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write CSV tables and SVG figures.
    Simulate {
        config: PathBuf,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Maximum number of trials run in parallel.
        #[arg(long)]
        jobs: Option<usize>,
        /// Reject unknown config keys (the default).
        #[arg(long, overrides_with = "no_strict")]
        strict: bool,
        /// Warn about unknown config keys instead of rejecting them.
        #[arg(long = "no-strict")]
        no_strict: bool,
        /// Exit with status 3 if any trial's solver did not converge.
        #[arg(long)]
        fail_on_nonconverged: bool,
    },
    /// Compare structured power-sum traces with dense eigenvalue power sums.
    TraceCheck {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        seed: u64,
        /// Root measure in compact form, e.g. `arc(0,0.5)`.
        #[arg(long, default_value = "uniform")]
        measure: String,
    },
    /// Count zeros of the limit function in the disc |z| < r.
    LimitZeros {
        /// Measure in compact form: `uniform`, `atomic{0:0.5,0.5:0.5}`,
        /// `arc(0,0.5)` or `mixture{0.5*uniform,0.5*arc(0,0.5)}`.
        #[arg(long)]
        measure: String,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Redraw the SVG figures of an existing report directory.
    Plot { report_dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let config_error = err
                .chain()
                .any(|cause| matches!(cause.downcast_ref::<Error>(), Some(Error::Config(_) | Error::InvalidMeasure(_))));
            ExitCode::from(if config_error { EXIT_CONFIG } else { 1 })
        }
    }
}

fn run(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Simulate {
            config,
            seed,
            jobs,
            strict: _,
            no_strict,
            fail_on_nonconverged,
        } => simulate(config, seed, jobs, !no_strict, fail_on_nonconverged),
        Command::TraceCheck { n, k, seed, measure } => trace_check(n, k, seed, &measure),
        Command::LimitZeros { measure, r, tol } => limit_zeros(&measure, r, tol),
        Command::Plot { report_dir } => {
            let data = PlotData::load(&report_dir)?;
            write_plots(&data, &report_dir)?;
            println!("figures written to {}", report_dir.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn simulate(
    path: PathBuf,
    seed: Option<u64>,
    jobs: Option<usize>,
    strict: bool,
    fail_on_nonconverged: bool,
) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let parsed = parse_config(&text, strict).with_context(|| format!("in {}", path.display()))?;
    for key in &parsed.ignored_keys {
        eprintln!("warning: ignoring unknown key '{key}'");
    }
    let mut cfg = parsed.config;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if jobs == Some(0) {
        return Err(Error::Config("--jobs must be at least 1".into()).into());
    }
    let report = run_experiment(&cfg, jobs)?;
    emit_report(&report, &cfg.output_dir)?;
    emit_plots(&report, &cfg.output_dir)?;

    let failures = report.rows.iter().filter(|r| !r.converged).count();
    println!(
        "{} trials of {} written to {}",
        report.rows.len(),
        cfg.measure,
        cfg.output_dir.display()
    );
    for &n in &cfg.n_values {
        if let Some(a) = report.aggregates.iter().find(|a| a.n == n && a.metric == "circular_w1") {
            println!("  n = {n:>6}  median circular_w1 = {:.4e}  iqr = {:.2e}", a.median, a.iqr);
        }
    }
    if failures > 0 {
        eprintln!("warning: {failures} trial(s) did not converge");
        if fail_on_nonconverged {
            return Ok(ExitCode::from(EXIT_NONCONVERGED));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn trace_check(n: usize, k: usize, seed: u64, measure: &str) -> anyhow::Result<ExitCode> {
    if n > ORACLE_MAX_DEGREE {
        bail!("trace-check compares against dense eigenvalues, so n is capped at {ORACLE_MAX_DEGREE}");
    }
    if k == 0 {
        bail!("--k must be at least 1");
    }
    let measure: CircleMeasure = measure.parse()?;
    let sample = measure.sample(n, seed)?;
    let companion = StructuredCompanion::build(&sample.points)?;
    let structured = companion.power_sum_traces(k);
    let eigenvalues = dense_eigenvalues(&companion.materialize()?)?;
    let mut worst: f64 = 0.0;
    println!("{:>3}  {:>44}  {:>44}  {:>10}", "k", "structured Tr(M^k)", "dense sum of eigenvalues^k", "rel err");
    for (j, &trace) in structured.iter().enumerate() {
        let power = j as u32 + 1;
        let dense: Complex64 = eigenvalues.iter().map(|z| z.powu(power)).sum();
        let err = (trace - dense).norm() / dense.norm().max(1.0);
        worst = worst.max(err);
        println!("{power:>3}  {:>44}  {:>44}  {err:>10.3e}", format!("{trace:.12}"), format!("{dense:.12}"));
    }
    println!("max relative error {worst:.3e} (n = {n}, seed = {seed}, {measure})");
    Ok(if worst <= 1e-9 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn limit_zeros(measure: &str, r: f64, tol: f64) -> anyhow::Result<ExitCode> {
    let measure: CircleMeasure = measure.parse()?;
    match count_zeros_in_disc(&measure, r, tol)? {
        ZeroCount::Zeros(count) => println!("{count}"),
        ZeroCount::IdenticallyZero => println!("identically zero: every moment of {measure} vanishes"),
    }
    Ok(ExitCode::SUCCESS)
}
