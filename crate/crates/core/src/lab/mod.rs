//! Seeded Monte Carlo experiments: sample roots, find critical points, score
//! them, and write CSV tables and SVG figures.
//!
//! Every `(n, trial)` pair gets its own generator seed, so trials can run in
//! any order or in parallel and the report bytes stay the same.

mod config;
mod plot;
mod report;

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

pub use config::{parse_config, ExperimentConfig, MethodChoice, ParsedConfig};
pub use plot::{emit_plots, write_plots, PlotData};
pub use report::{emit_report, rows_header, ROWS_FIXED_COLUMNS};

use crate::differentiator::{critical_points, critical_points_dense, CriticalSet};
use crate::empirics::{circular_w1, empirical_moment, interior_count, ks_distance, radial_moment, to_polar, weyl_sum};
use crate::error::{Error, Result};
use crate::matching::matching_distance;
use crate::measure::{rng_from_seed, RootSample};
use crate::root_poly::RootPoly;

/// Version string written into manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Trials at or below this size are eligible for the scatter plot.
pub const SHOWCASE_MAX_N: usize = 2000;

/// Stream of the per-trial generator used for the reference sample.
const REFERENCE_STREAM: u64 = 1;

/// `seed ⊕ (n·10⁹ + trial)`; the generator's own seeding expands it.
pub fn trial_seed(seed: u64, n: usize, trial: usize) -> u64 {
    seed ^ (n as u64).wrapping_mul(1_000_000_000).wrapping_add(trial as u64)
}

/// One `(n, trial)` outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRow {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub converged: bool,
    pub iterations: usize,
    pub max_residual: f64,
    pub circular_w1: f64,
    pub ks_distance: f64,
    /// `k = 1..=k_max`.
    pub root_moments: Vec<Complex64>,
    pub crit_moments: Vec<Complex64>,
    pub weyl_sums: Vec<Complex64>,
    pub radial_moments: Vec<f64>,
    /// One per configured radius.
    pub interior_counts: Vec<usize>,
    pub max_modulus: f64,
    pub wall_seconds: f64,
    /// Matching distance between iterative and dense results (`both` only).
    pub oracle_distance: Option<f64>,
}

/// Median and interquartile range of one metric at one `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub n: usize,
    pub metric: String,
    pub median: f64,
    pub iqr: f64,
}

/// Roots and critical points of one trial, kept for plotting.
#[derive(Clone, Debug, PartialEq)]
pub struct Showcase {
    pub n: usize,
    pub trial: usize,
    pub roots: Vec<Complex64>,
    pub critical: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<TrialRow>,
    pub aggregates: Vec<AggregateRow>,
    pub showcase: Option<Showcase>,
}

impl ExperimentReport {
    /// A report with no trials, e.g. for writing headers only.
    pub fn empty(config: ExperimentConfig) -> Self {
        ExperimentReport {
            config,
            rows: Vec::new(),
            aggregates: Vec::new(),
            showcase: None,
        }
    }

    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }
}

/// The `n` whose first trial is plotted: the largest not above
/// [`SHOWCASE_MAX_N`], or the smallest if all are larger.
pub fn showcase_n(n_values: &[usize]) -> Option<usize> {
    n_values
        .iter()
        .rev()
        .find(|&&n| n <= SHOWCASE_MAX_N)
        .or(n_values.first())
        .copied()
}

/// Runs every `(n, trial)` on a pool of `jobs` threads (all cores if `None`).
/// Solver failures are recorded per row; only setup errors abort.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<ExperimentReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    let tasks: Vec<(usize, usize)> = cfg
        .n_values
        .iter()
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .collect();
    let show = showcase_n(&cfg.n_values);
    let outcomes: Vec<(TrialRow, Option<Showcase>)> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(n, trial)| run_trial(cfg, n, trial, show == Some(n) && trial == 0))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut rows = Vec::with_capacity(outcomes.len());
    let mut showcase = None;
    for (row, shown) in outcomes {
        rows.push(row);
        showcase = showcase.or(shown);
    }
    let aggregates = aggregate(cfg, &rows);
    Ok(ExperimentReport {
        config: cfg.clone(),
        rows,
        aggregates,
        showcase,
    })
}

fn run_trial(cfg: &ExperimentConfig, n: usize, trial: usize, keep_points: bool) -> Result<(TrialRow, Option<Showcase>)> {
    let seed = trial_seed(cfg.seed, n, trial);
    let started = Instant::now();
    let roots: RootSample = cfg.measure.sample(n, seed)?;
    let mut reference_rng = rng_from_seed(seed);
    reference_rng.set_stream(REFERENCE_STREAM);
    let reference = cfg.measure.sample_with(n - 1, &mut reference_rng);

    let poly = RootPoly::from_roots(&roots.points)?;
    let solver = &cfg.solver;
    let (crit, oracle_distance): (CriticalSet, Option<f64>) = match cfg.method {
        MethodChoice::Iterative => (critical_points(&poly, solver)?, None),
        MethodChoice::Dense => (critical_points_dense(&poly)?, None),
        MethodChoice::Both => {
            let iterative = critical_points(&poly, solver)?;
            let dense = critical_points_dense(&poly)?;
            let distance = matching_distance(&iterative.points, &dense.points);
            (iterative, Some(distance))
        }
    };

    let polar = to_polar(&crit.points);
    let ks: Vec<u32> = (1..=cfg.k_max as u32).collect();
    let row = TrialRow {
        n,
        trial,
        seed,
        converged: crit.converged,
        iterations: crit.iterations,
        max_residual: crit.max_residual,
        circular_w1: circular_w1(&polar.angles, &reference),
        ks_distance: ks_distance(&polar.angles, &cfg.measure),
        root_moments: ks.iter().map(|&k| empirical_moment(&roots.points, k)).collect(),
        crit_moments: ks.iter().map(|&k| empirical_moment(&crit.points, k)).collect(),
        weyl_sums: ks.iter().map(|&k| weyl_sum(&polar, k)).collect(),
        radial_moments: ks.iter().map(|&k| radial_moment(&polar, k as i32)).collect(),
        interior_counts: cfg.radii.iter().map(|&r| interior_count(&crit.points, r)).collect(),
        max_modulus: crit.max_modulus(),
        wall_seconds: started.elapsed().as_secs_f64(),
        oracle_distance,
    };
    let showcase = keep_points.then(|| Showcase {
        n,
        trial,
        roots: roots.points.clone(),
        critical: crit.points.clone(),
    });
    Ok((row, showcase))
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// `(median, q75 − q25)`; NaN for an empty slice.
pub fn median_iqr(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    (quantile(&sorted, 0.5), quantile(&sorted, 0.75) - quantile(&sorted, 0.25))
}

/// Metrics summarized per `n`, in output order.
type MetricColumn<'a> = (String, Box<dyn Fn(&TrialRow) -> f64 + 'a>);

fn metric_columns(cfg: &ExperimentConfig) -> Vec<MetricColumn<'_>> {
    let moments = cfg.measure.moments(cfg.k_max);
    let mut columns: Vec<MetricColumn> = vec![
        ("circular_w1".into(), Box::new(|r: &TrialRow| r.circular_w1)),
        ("ks_distance".into(), Box::new(|r: &TrialRow| r.ks_distance)),
        ("max_residual".into(), Box::new(|r: &TrialRow| r.max_residual)),
        ("iterations".into(), Box::new(|r: &TrialRow| r.iterations as f64)),
        ("max_modulus".into(), Box::new(|r: &TrialRow| r.max_modulus)),
    ];
    for k in 1..=cfg.k_max {
        let c = moments.get(k);
        columns.push((
            format!("root_moment_err_{k}"),
            Box::new(move |r: &TrialRow| (r.root_moments[k - 1] - c).norm()),
        ));
        columns.push((
            format!("crit_moment_err_{k}"),
            Box::new(move |r: &TrialRow| (r.crit_moments[k - 1] - c).norm()),
        ));
        columns.push((
            format!("weyl_err_{k}"),
            Box::new(move |r: &TrialRow| (r.weyl_sums[k - 1] - c).norm()),
        ));
        columns.push((format!("radial_{k}"), Box::new(move |r: &TrialRow| r.radial_moments[k - 1])));
    }
    for (i, r) in cfg.radii.iter().enumerate() {
        columns.push((
            format!("interior_{}", report::format_float(*r)),
            Box::new(move |row: &TrialRow| row.interior_counts[i] as f64),
        ));
    }
    columns
}

fn aggregate(cfg: &ExperimentConfig, rows: &[TrialRow]) -> Vec<AggregateRow> {
    let columns = metric_columns(cfg);
    let mut out = Vec::new();
    for &n in &cfg.n_values {
        let group: Vec<&TrialRow> = rows.iter().filter(|r| r.n == n).collect();
        if group.is_empty() {
            continue;
        }
        for (metric, value) in &columns {
            let values: Vec<f64> = group.iter().map(|r| value(r)).collect();
            let (median, iqr) = median_iqr(&values);
            out.push(AggregateRow {
                n,
                metric: metric.clone(),
                median,
                iqr,
            });
        }
    }
    out
}
