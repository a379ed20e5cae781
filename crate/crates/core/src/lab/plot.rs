//! Static SVG figures: `scatter.svg` (one trial's roots and critical points
//! with the unit circle), `histogram.svg` (angles of those critical points
//! against the bin masses of the root measure) and `convergence.svg`
//! (median `circular_w1` against `n`, log-log).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use super::{ExperimentReport, Showcase};
use crate::empirics::turn_angle;
use crate::error::{Error, Result};
use crate::measure::CircleMeasure;

const SIZE: f64 = 640.0;
const HISTOGRAM_BINS: usize = 64;

/// Everything the figures need; built from a report or loaded back from a
/// report directory.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotData {
    pub measure: CircleMeasure,
    pub showcase: Option<Showcase>,
    /// `(n, median circular_w1)` in increasing `n`.
    pub convergence: Vec<(usize, f64)>,
}

impl PlotData {
    pub fn from_report(rep: &ExperimentReport) -> Self {
        PlotData {
            measure: rep.config.measure.clone(),
            showcase: rep.showcase.clone(),
            convergence: rep
                .aggregates
                .iter()
                .filter(|a| a.metric == "circular_w1")
                .map(|a| (a.n, a.median))
                .collect(),
        }
    }

    /// Reads `manifest.txt`, `points.csv` and `aggregate.csv` from a report
    /// directory written by [`super::emit_report`].
    pub fn load(dir: &Path) -> Result<Self> {
        let manifest_path = dir.join("manifest.txt");
        let manifest = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let measure = manifest
            .lines()
            .find_map(|l| l.strip_prefix("measure_tag = "))
            .ok_or_else(|| Error::Config(format!("{}: no measure_tag line", manifest_path.display())))?
            .parse::<CircleMeasure>()?;

        let showcase = read_points(&dir.join("points.csv"))?;

        let aggregate_path = dir.join("aggregate.csv");
        let mut convergence = Vec::new();
        for record in read_records(&aggregate_path)? {
            if record.get(1) == Some("circular_w1") {
                let n = parse_cell(&aggregate_path, &record, 0)?;
                let median = parse_cell(&aggregate_path, &record, 2)?;
                convergence.push((n, median));
            }
        }
        Ok(PlotData {
            measure,
            showcase,
            convergence,
        })
    }
}

fn read_records(path: &Path) -> Result<Vec<csv::StringRecord>> {
    let csv_error = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    reader.records().collect::<std::result::Result<Vec<_>, _>>().map_err(csv_error)
}

fn parse_cell<T: std::str::FromStr>(path: &Path, record: &csv::StringRecord, i: usize) -> Result<T> {
    record
        .get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Config(format!("{}: malformed row {:?}", path.display(), record)))
}

fn read_points(path: &Path) -> Result<Option<Showcase>> {
    let mut showcase: Option<Showcase> = None;
    for record in read_records(path)? {
        let n = parse_cell(path, &record, 0)?;
        let trial = parse_cell(path, &record, 1)?;
        let z = Complex64::new(parse_cell(path, &record, 3)?, parse_cell(path, &record, 4)?);
        let s = showcase.get_or_insert_with(|| Showcase {
            n,
            trial,
            roots: Vec::new(),
            critical: Vec::new(),
        });
        match record.get(2) {
            Some("root") => s.roots.push(z),
            Some("critical") => s.critical.push(z),
            _ => return Err(Error::Config(format!("{}: unknown point kind in {:?}", path.display(), record))),
        }
    }
    Ok(showcase)
}

/// Writes the three figures for a nonempty report.
pub fn emit_plots(rep: &ExperimentReport, dir: &Path) -> Result<()> {
    if rep.rows.is_empty() {
        return Err(Error::InvalidArgument("cannot plot an empty report".into()));
    }
    write_plots(&PlotData::from_report(rep), dir)
}

pub fn write_plots(data: &PlotData, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = vec![("convergence.svg", convergence_svg(&data.convergence))];
    if let Some(s) = &data.showcase {
        files.push(("scatter.svg", scatter_svg(s)));
        files.push(("histogram.svg", histogram_svg(s, &data.measure)));
    }
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open_svg(title: &str) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <title>{}</title>\n<rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\"/>\n",
        escape(title)
    )
}

fn scatter_svg(s: &Showcase) -> String {
    let center = SIZE / 2.0;
    let scale = SIZE * 0.42;
    let px = |z: &Complex64| (center + scale * z.re, center - scale * z.im);
    let mut out = open_svg(&format!("roots and critical points, n = {}, trial {}", s.n, s.trial));
    let _ = writeln!(
        out,
        "<circle class=\"unit-circle\" cx=\"{center}\" cy=\"{center}\" r=\"{scale}\" fill=\"none\" stroke=\"#999\"/>"
    );
    for z in &s.roots {
        let (x, y) = px(z);
        let _ = writeln!(out, "<circle class=\"root\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2.5\" fill=\"#1f77b4\"/>");
    }
    for z in &s.critical {
        let (x, y) = px(z);
        let _ = writeln!(out, "<circle class=\"critical\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"1.8\" fill=\"#d62728\"/>");
    }
    let _ = writeln!(
        out,
        "<text x=\"12\" y=\"20\" fill=\"#1f77b4\">roots ({})</text>\n<text x=\"12\" y=\"36\" fill=\"#d62728\">critical points ({})</text>",
        s.roots.len(),
        s.critical.len()
    );
    out.push_str("</svg>\n");
    out
}

/// Fractions of `angles` per bin and the measure's mass per bin.
fn bin_masses(angles: &[f64], measure: &CircleMeasure, bins: usize) -> (Vec<f64>, Vec<f64>) {
    let mut empirical = vec![0.0; bins];
    for &a in angles {
        empirical[((a * bins as f64) as usize).min(bins - 1)] += 1.0 / angles.len() as f64;
    }
    let edge = |j: usize| {
        if j == bins {
            1.0
        } else {
            measure.angle_cdf_left(j as f64 / bins as f64).expect("edge in [0, 1]")
        }
    };
    let reference = (0..bins).map(|j| edge(j + 1) - edge(j)).collect();
    (empirical, reference)
}

fn histogram_svg(s: &Showcase, measure: &CircleMeasure) -> String {
    let angles: Vec<f64> = s.critical.iter().map(|&z| turn_angle(z)).collect();
    let (empirical, reference) = bin_masses(&angles, measure, HISTOGRAM_BINS);
    let (left, right, top, bottom) = (60.0, SIZE - 20.0, 50.0, SIZE - 50.0);
    let peak = empirical
        .iter()
        .chain(&reference)
        .copied()
        .fold(f64::MIN_POSITIVE, f64::max);
    let bin_width = (right - left) / HISTOGRAM_BINS as f64;
    let y_of = |mass: f64| bottom - (bottom - top) * mass / peak;

    let mut out = open_svg(&format!("critical point angles vs {measure}, n = {}", s.n));
    let _ = writeln!(
        out,
        "<text x=\"{left}\" y=\"24\">angles of {} critical points (bars) vs {} (line)</text>",
        angles.len(),
        escape(&measure.to_string())
    );
    for (j, &m) in empirical.iter().enumerate() {
        let x = left + j as f64 * bin_width;
        let y = y_of(m);
        let _ = writeln!(
            out,
            "<rect class=\"bar\" x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#d62728\" fill-opacity=\"0.6\"/>",
            bin_width,
            bottom - y
        );
    }
    let mut path = format!("M {left:.2} {bottom:.2}");
    for (j, &m) in reference.iter().enumerate() {
        let x0 = left + j as f64 * bin_width;
        let y = y_of(m);
        let _ = write!(path, " L {x0:.2} {y:.2} L {:.2} {y:.2}", x0 + bin_width);
    }
    let _ = write!(path, " L {right:.2} {bottom:.2}");
    let _ = writeln!(out, "<path class=\"reference\" d=\"{path}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>");
    for a in measure.atom_angles() {
        let x = left + a * (right - left);
        let _ = writeln!(
            out,
            "<path class=\"atom\" d=\"M {x:.2} {:.2} l -5 10 l 10 0 z\" fill=\"#1f77b4\"/>",
            bottom + 4.0
        );
    }
    let _ = writeln!(
        out,
        "<line x1=\"{left}\" y1=\"{bottom}\" x2=\"{right}\" y2=\"{bottom}\" stroke=\"black\"/>"
    );
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let x = left + t * (right - left);
        let _ = writeln!(out, "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{t}</text>", bottom + 30.0);
    }
    let _ = writeln!(out, "<text x=\"{left}\" y=\"{:.2}\">mass per bin, peak {peak:.4}</text>", top - 8.0);
    out.push_str("</svg>\n");
    out
}

fn convergence_svg(points: &[(usize, f64)]) -> String {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, w)| *w > 0.0 && w.is_finite())
        .map(|&(n, w)| ((n as f64).log10(), w.log10()))
        .collect();
    let (left, right, top, bottom) = (80.0, SIZE - 30.0, 40.0, SIZE - 60.0);
    let mut out = open_svg("median circular W1 against n");
    let _ = writeln!(out, "<text x=\"{left}\" y=\"24\">median circular W1 vs n (log-log); dashed: slope -1/2</text>");
    let _ = writeln!(
        out,
        "<path class=\"axes\" d=\"M {left} {top} L {left} {bottom} L {right} {bottom}\" fill=\"none\" stroke=\"black\"/>"
    );
    if usable.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let span = |vals: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let pad = ((hi - lo) * 0.08).max(0.1);
        (lo - pad, hi + pad)
    };
    let (x_lo, x_hi) = span(&mut usable.iter().map(|p| p.0));
    let (y_lo, y_hi) = span(&mut usable.iter().map(|p| p.1));
    let sx = |x: f64| left + (right - left) * (x - x_lo) / (x_hi - x_lo);
    let sy = |y: f64| bottom - (bottom - top) * (y - y_lo) / (y_hi - y_lo);

    let line: Vec<String> = usable.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    let _ = writeln!(
        out,
        "<polyline class=\"curve\" points=\"{}\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>",
        line.join(" ")
    );
    for (&(x, y), &(n, w)) in usable.iter().zip(points.iter().filter(|(_, w)| *w > 0.0 && w.is_finite())) {
        let _ = writeln!(
            out,
            "<circle class=\"median\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#d62728\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{n}</text>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{w:.3e}</text>",
            sx(x),
            sy(y),
            sx(x),
            bottom + 20.0,
            left - 6.0,
            sy(y) + 4.0
        );
    }
    let (x0, y0) = usable[0];
    let x1 = usable[usable.len() - 1].0.max(x0 + 0.5);
    let _ = writeln!(
        out,
        "<line class=\"reference\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#777\" stroke-dasharray=\"6 4\"/>",
        sx(x0),
        sy(y0),
        sx(x1),
        sy(y0 - 0.5 * (x1 - x0))
    );
    let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">n</text>", (left + right) / 2.0, bottom + 45.0);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_masses_sum_to_one() {
        for m in [
            CircleMeasure::Uniform,
            CircleMeasure::antipodal_pair(),
            CircleMeasure::arc(0.1, 0.35).unwrap(),
        ] {
            let (emp, reference) = bin_masses(&[0.0, 0.2, 0.999], &m, 16);
            assert!((emp.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!((reference.iter().sum::<f64>() - 1.0).abs() < 1e-12, "{m}");
        }
        let (_, reference) = bin_masses(&[0.1], &CircleMeasure::antipodal_pair(), 4);
        assert_eq!(reference, vec![0.5, 0.0, 0.5, 0.0]);
    }

    #[test]
    fn escaping() {
        assert_eq!(escape("a<b&c>"), "a&lt;b&amp;c&gt;");
    }
}
