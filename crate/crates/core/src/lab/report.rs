//! CSV tables and the run manifest.
//!
//! `rows.csv` columns, in order:
//! `n, trial, seed, converged, iterations, max_residual, circular_w1,
//! ks_distance`, then `crit_moment_k`, `weyl_k` and `radial_k` for
//! `k = 1..=k_max` (grouped by quantity), then `interior_<r>` per radius.
//! Complex cells are written `re±imi`.
//!
//! Wall times live in `diagnostics.csv` so that `rows.csv` is reproducible
//! byte for byte.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use super::{ExperimentConfig, ExperimentReport, VERSION};
use crate::error::{Error, Result};

/// Columns of `rows.csv` that do not depend on `k_max` or the radii.
pub const ROWS_FIXED_COLUMNS: [&str; 8] = [
    "n",
    "trial",
    "seed",
    "converged",
    "iterations",
    "max_residual",
    "circular_w1",
    "ks_distance",
];

/// Shortest round-trip text, switching to exponent form for tiny or huge
/// magnitudes.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn format_complex(z: Complex64) -> String {
    let im = format_float(z.im);
    let sign = if im.starts_with('-') { "" } else { "+" };
    format!("{}{sign}{im}i", format_float(z.re))
}

pub fn rows_header(cfg: &ExperimentConfig) -> Vec<String> {
    let mut header: Vec<String> = ROWS_FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    for prefix in ["crit_moment", "weyl", "radial"] {
        header.extend((1..=cfg.k_max).map(|k| format!("{prefix}_{k}")));
    }
    header.extend(cfg.radii.iter().map(|r| format!("interior_{}", format_float(*r))));
    header
}

fn write_csv(path: &Path, header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let csv_error = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut writer = csv::Writer::from_path(path).map_err(csv_error)?;
    writer.write_record(header).map_err(csv_error)?;
    for row in rows {
        writer.write_record(&row).map_err(csv_error)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// Writes `rows.csv`, `root_moments.csv`, `diagnostics.csv`,
/// `aggregate.csv`, `points.csv` and `manifest.txt` into `dir`.
pub fn emit_report(rep: &ExperimentReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let cfg = &rep.config;

    write_csv(
        &dir.join("rows.csv"),
        &rows_header(cfg),
        rep.rows.iter().map(|r| {
            let mut cells = vec![
                r.n.to_string(),
                r.trial.to_string(),
                r.seed.to_string(),
                r.converged.to_string(),
                r.iterations.to_string(),
                format_float(r.max_residual),
                format_float(r.circular_w1),
                format_float(r.ks_distance),
            ];
            cells.extend(r.crit_moments.iter().map(|&z| format_complex(z)));
            cells.extend(r.weyl_sums.iter().map(|&z| format_complex(z)));
            cells.extend(r.radial_moments.iter().map(|&x| format_float(x)));
            cells.extend(r.interior_counts.iter().map(|c| c.to_string()));
            cells
        }),
    )?;

    let mut header = strings(&["n", "trial", "seed"]);
    header.extend((1..=cfg.k_max).map(|k| format!("root_moment_{k}")));
    write_csv(
        &dir.join("root_moments.csv"),
        &header,
        rep.rows.iter().map(|r| {
            let mut cells = vec![r.n.to_string(), r.trial.to_string(), r.seed.to_string()];
            cells.extend(r.root_moments.iter().map(|&z| format_complex(z)));
            cells
        }),
    )?;

    write_csv(
        &dir.join("diagnostics.csv"),
        &strings(&["n", "trial", "seed", "wall_seconds", "max_modulus", "oracle_distance"]),
        rep.rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.trial.to_string(),
                r.seed.to_string(),
                format_float(r.wall_seconds),
                format_float(r.max_modulus),
                r.oracle_distance.map(format_float).unwrap_or_default(),
            ]
        }),
    )?;

    write_csv(
        &dir.join("aggregate.csv"),
        &strings(&["n", "metric", "median", "iqr"]),
        rep.aggregates
            .iter()
            .map(|a| vec![a.n.to_string(), a.metric.clone(), format_float(a.median), format_float(a.iqr)]),
    )?;

    let points = rep.showcase.iter().flat_map(|s| {
        let tag = |kind: &'static str| move |z: &Complex64| vec![s.n.to_string(), s.trial.to_string(), kind.to_string(), format_float(z.re), format_float(z.im)];
        s.roots.iter().map(tag("root")).chain(s.critical.iter().map(tag("critical")))
    });
    write_csv(&dir.join("points.csv"), &strings(&["n", "trial", "kind", "re", "im"]), points)?;

    let manifest = dir.join("manifest.txt");
    fs::write(&manifest, manifest_text(rep)).map_err(|e| Error::io(&manifest, e))
}

fn manifest_text(rep: &ExperimentReport) -> String {
    let cfg = &rep.config;
    let mut out = format!("critlab {VERSION}\nmeasure_tag = {}\n\n# config\n", cfg.measure);
    out.push_str(&cfg.to_toml());
    out.push_str("\n# trial seeds (n trial seed converged)\n");
    for r in &rep.rows {
        out.push_str(&format!("{} {} {} {}\n", r.n, r.trial, r.seed, r.converged));
    }
    out
}
