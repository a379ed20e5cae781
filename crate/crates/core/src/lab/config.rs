//! Experiment configuration in TOML.
//!
//! ```toml
//! n_values = [100, 400, 1600]
//! trials = 20
//! k_max = 4
//! radii = [0.5, 0.9]
//! seed = 7
//! method = "iterative"      # iterative | dense | both
//! output_dir = "out/uniform"
//!
//! [measure]
//! kind = "atomic"           # uniform | atomic | arc | mixture
//! atoms = [0.0, 0.5]
//! weights = [0.5, 0.5]
//! ```
//!
//! Arcs use `arc_bounds = [a, b]`. Mixtures list `weights` and one
//! `[[measure.components]]` table per component. An optional `[solver]`
//! table sets `tolerance`, `max_iterations` and `restarts`.

use std::fmt;
use std::path::PathBuf;

use serde::Deserialize;

use crate::differentiator::SolverOptions;
use crate::error::{Error, Result};
use crate::measure::CircleMeasure;
use crate::ORACLE_MAX_DEGREE;

/// Which solver produces the reported critical points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Iterative,
    Dense,
    /// Iterative results, cross-checked against the dense oracle.
    Both,
}

impl fmt::Display for MethodChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodChoice::Iterative => "iterative",
            MethodChoice::Dense => "dense",
            MethodChoice::Both => "both",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub measure: CircleMeasure,
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub k_max: usize,
    pub radii: Vec<f64>,
    pub seed: u64,
    pub method: MethodChoice,
    pub output_dir: PathBuf,
    pub solver: SolverOptions,
}

/// A parsed config plus the keys that were ignored in lenient mode.
#[derive(Clone, Debug)]
pub struct ParsedConfig {
    pub config: ExperimentConfig,
    pub ignored_keys: Vec<String>,
}

#[derive(Deserialize)]
struct RawConfig {
    measure: RawMeasure,
    n_values: Vec<usize>,
    trials: usize,
    k_max: usize,
    #[serde(default)]
    radii: Vec<f64>,
    seed: u64,
    #[serde(default = "default_method")]
    method: MethodChoice,
    output_dir: PathBuf,
    #[serde(default)]
    solver: RawSolver,
}

#[derive(Default, Deserialize)]
struct RawSolver {
    tolerance: Option<f64>,
    max_iterations: Option<usize>,
    restarts: Option<usize>,
}

fn default_method() -> MethodChoice {
    MethodChoice::Iterative
}

#[derive(Deserialize)]
struct RawMeasure {
    kind: String,
    atoms: Option<Vec<f64>>,
    weights: Option<Vec<f64>>,
    arc_bounds: Option<[f64; 2]>,
    components: Option<Vec<RawMeasure>>,
}

/// 1-based line of byte offset `at`.
fn line_at(text: &str, at: usize) -> usize {
    text[..at.min(text.len())].matches('\n').count() + 1
}

/// Line on which `key` is assigned or opened as a table, if any.
fn line_of_key(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|line| {
        let line = line.trim_start();
        let assigned = line
            .strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='));
        let table = line
            .trim_start_matches('[')
            .trim_end()
            .trim_end_matches(']')
            .rsplit('.')
            .next()
            .is_some_and(|last| line.starts_with('[') && last.trim() == key);
        assigned || table
    })
    .map(|i| i + 1)
}

fn config_error(text: &str, key: &str, message: impl fmt::Display) -> Error {
    match line_of_key(text, key) {
        Some(line) => Error::Config(format!("line {line}: {message}")),
        None => Error::Config(message.to_string()),
    }
}

/// Parses and validates a config. With `strict`, unknown keys are errors;
/// otherwise they are returned in [`ParsedConfig::ignored_keys`].
pub fn parse_config(text: &str, strict: bool) -> Result<ParsedConfig> {
    let deserializer = toml::Deserializer::parse(text).map_err(|e| toml_error(text, &e))?;
    let mut ignored = Vec::new();
    let raw: RawConfig = serde_ignored::deserialize(deserializer, |path| ignored.push(path.to_string()))
        .map_err(|e| toml_error(text, &e))?;
    if strict {
        if let Some(path) = ignored.first() {
            let last = path.rsplit('.').next().unwrap_or(path);
            return Err(config_error(text, last, format!("unknown key '{path}'")));
        }
    }
    let config = validate(text, raw)?;
    Ok(ParsedConfig {
        config,
        ignored_keys: ignored,
    })
}

fn toml_error(text: &str, e: &toml::de::Error) -> Error {
    match e.span() {
        Some(span) => Error::Config(format!("line {}: {}", line_at(text, span.start), e.message())),
        None => Error::Config(e.message().to_string()),
    }
}

fn validate(text: &str, raw: RawConfig) -> Result<ExperimentConfig> {
    let measure = build_measure(raw.measure, 0)
        .and_then(CircleMeasure::validate)
        .map_err(|e| config_error(text, "measure", e))?;
    if raw.n_values.is_empty() {
        return Err(config_error(text, "n_values", "n_values must not be empty"));
    }
    if let Some(&n) = raw.n_values.iter().find(|&&n| n < 2) {
        return Err(config_error(text, "n_values", format!("n_values entries must be >= 2, got {n}")));
    }
    if raw.n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(config_error(text, "n_values", "n_values must be strictly increasing"));
    }
    if raw.trials == 0 {
        return Err(config_error(text, "trials", "trials must be >= 1"));
    }
    if raw.k_max == 0 {
        return Err(config_error(text, "k_max", "k_max must be >= 1"));
    }
    if let Some(r) = raw.radii.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(config_error(text, "radii", format!("radii must lie in (0, 1), got {r}")));
    }
    let max_n = *raw.n_values.last().expect("nonempty");
    if raw.method != MethodChoice::Iterative && max_n > ORACLE_MAX_DEGREE {
        return Err(config_error(
            text,
            "method",
            format!("dense oracle capped at {ORACLE_MAX_DEGREE} (largest n is {max_n})"),
        ));
    }
    let defaults = SolverOptions::default();
    let solver = SolverOptions {
        tolerance: raw.solver.tolerance.unwrap_or(defaults.tolerance),
        max_iterations: raw.solver.max_iterations.unwrap_or(defaults.max_iterations),
        restarts: raw.solver.restarts.unwrap_or(defaults.restarts),
        ..defaults
    };
    solver.validate().map_err(|e| config_error(text, "solver", e))?;
    Ok(ExperimentConfig {
        measure,
        n_values: raw.n_values,
        trials: raw.trials,
        k_max: raw.k_max,
        radii: raw.radii,
        seed: raw.seed,
        method: raw.method,
        output_dir: raw.output_dir,
        solver,
    })
}

fn build_measure(raw: RawMeasure, depth: usize) -> Result<CircleMeasure> {
    let unexpected = |field: &str| {
        Error::InvalidMeasure(format!("'{field}' is not used by a {} measure", raw.kind))
    };
    let missing = |field: &str| Error::InvalidMeasure(format!("{} measure needs '{field}'", raw.kind));
    match raw.kind.as_str() {
        "uniform" => {
            for (field, present) in [
                ("atoms", raw.atoms.is_some()),
                ("weights", raw.weights.is_some()),
                ("arc_bounds", raw.arc_bounds.is_some()),
                ("components", raw.components.is_some()),
            ] {
                if present {
                    return Err(unexpected(field));
                }
            }
            Ok(CircleMeasure::Uniform)
        }
        "atomic" => {
            if raw.arc_bounds.is_some() {
                return Err(unexpected("arc_bounds"));
            }
            if raw.components.is_some() {
                return Err(unexpected("components"));
            }
            let atoms = raw.atoms.as_ref().ok_or_else(|| missing("atoms"))?;
            let weights = raw.weights.as_ref().ok_or_else(|| missing("weights"))?;
            if atoms.len() != weights.len() {
                return Err(Error::InvalidMeasure(format!(
                    "{} atoms but {} weights",
                    atoms.len(),
                    weights.len()
                )));
            }
            Ok(CircleMeasure::Atomic {
                angles: atoms.clone(),
                weights: weights.clone(),
            })
        }
        "arc" => {
            for (field, present) in [
                ("atoms", raw.atoms.is_some()),
                ("weights", raw.weights.is_some()),
                ("components", raw.components.is_some()),
            ] {
                if present {
                    return Err(unexpected(field));
                }
            }
            let [start, end] = raw.arc_bounds.ok_or_else(|| missing("arc_bounds"))?;
            Ok(CircleMeasure::Arc { start, end })
        }
        "mixture" => {
            if depth > 0 {
                return Err(Error::InvalidMeasure("mixtures cannot be nested".into()));
            }
            if raw.atoms.is_some() {
                return Err(unexpected("atoms"));
            }
            if raw.arc_bounds.is_some() {
                return Err(unexpected("arc_bounds"));
            }
            let weights = raw.weights.clone().ok_or_else(|| missing("weights"))?;
            let parts = raw.components.ok_or_else(|| missing("components"))?;
            if parts.len() != weights.len() {
                return Err(Error::InvalidMeasure(format!(
                    "{} components but {} weights",
                    parts.len(),
                    weights.len()
                )));
            }
            let components = parts
                .into_iter()
                .map(|c| build_measure(c, depth + 1))
                .collect::<Result<Vec<_>>>()?;
            Ok(CircleMeasure::Mixture { components, weights })
        }
        other => Err(Error::InvalidMeasure(format!(
            "unknown measure kind '{other}' (expected uniform, atomic, arc or mixture)"
        ))),
    }
}

impl ExperimentConfig {
    /// The config in the same TOML grammar `parse_config` reads.
    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        let list = |xs: Vec<String>| format!("[{}]", xs.join(", "));
        out.push_str(&format!(
            "n_values = {}\n",
            list(self.n_values.iter().map(|n| n.to_string()).collect())
        ));
        out.push_str(&format!("trials = {}\n", self.trials));
        out.push_str(&format!("k_max = {}\n", self.k_max));
        out.push_str(&format!("radii = {}\n", list(self.radii.iter().map(|r| toml_float(*r)).collect())));
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("method = \"{}\"\n", self.method));
        out.push_str(&format!(
            "output_dir = {}\n",
            toml::Value::String(self.output_dir.display().to_string())
        ));
        if self.solver != SolverOptions::default() {
            out.push_str(&format!(
                "\n[solver]\ntolerance = {}\nmax_iterations = {}\nrestarts = {}\n",
                toml_float(self.solver.tolerance),
                self.solver.max_iterations,
                self.solver.restarts
            ));
        }
        out.push_str("\n[measure]\n");
        write_measure(&mut out, &self.measure, "measure");
        out
    }
}

fn toml_float(x: f64) -> String {
    toml::Value::Float(x).to_string()
}

fn write_measure(out: &mut String, m: &CircleMeasure, table: &str) {
    let floats = |xs: &[f64]| format!("[{}]", xs.iter().map(|&x| toml_float(x)).collect::<Vec<_>>().join(", "));
    out.push_str(&format!("kind = \"{}\"\n", m.kind()));
    match m {
        CircleMeasure::Uniform => {}
        CircleMeasure::Atomic { angles, weights } => {
            out.push_str(&format!("atoms = {}\n", floats(angles)));
            out.push_str(&format!("weights = {}\n", floats(weights)));
        }
        CircleMeasure::Arc { start, end } => {
            out.push_str(&format!("arc_bounds = {}\n", floats(&[*start, *end])));
        }
        CircleMeasure::Mixture { components, weights } => {
            out.push_str(&format!("weights = {}\n", floats(weights)));
            for c in components {
                out.push_str(&format!("\n[[{table}.components]]\n"));
                write_measure(out, c, &format!("{table}.components"));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
n_values = [100]
trials = 1
k_max = 4
radii = [0.5]
seed = 1
output_dir = "out"

[measure]
kind = "uniform"
"#;

    fn message(e: Error) -> String {
        e.to_string()
    }

    #[test]
    fn minimal_config_is_valid() {
        let parsed = parse_config(MINIMAL, true).unwrap();
        let cfg = parsed.config;
        assert_eq!(cfg.measure, CircleMeasure::Uniform);
        assert_eq!(cfg.n_values, vec![100]);
        assert_eq!(cfg.method, MethodChoice::Iterative);
        assert!(parsed.ignored_keys.is_empty());
    }

    #[test]
    fn dense_is_capped() {
        let text = MINIMAL.replace("[100]", "[1000]").replace("seed = 1", "seed = 1\nmethod = \"dense\"");
        let err = message(parse_config(&text, true).unwrap_err());
        assert!(err.contains("dense oracle capped at 512"), "{err}");
        assert!(err.contains("line 7"), "{err}");
        let both = text.replace("\"dense\"", "\"both\"");
        assert!(parse_config(&both, true).is_err());
        let small = text.replace("[1000]", "[512]");
        assert!(parse_config(&small, true).is_ok());
    }

    #[test]
    fn invalid_weights_propagate() {
        let text = MINIMAL.replace(
            "kind = \"uniform\"",
            "kind = \"atomic\"\natoms = [0.0, 0.5]\nweights = [0.6, 0.6]",
        );
        let err = message(parse_config(&text, true).unwrap_err());
        assert!(err.contains("weights"), "{err}");
        assert!(err.contains("line 9"), "{err}");
    }

    #[test]
    fn unknown_keys_in_strict_mode() {
        let text = MINIMAL.replace("trials = 1", "trials = 1\ntrails = 3");
        let err = message(parse_config(&text, true).unwrap_err());
        assert!(err.contains("unknown key 'trails'") && err.contains("line 4"), "{err}");
        let lenient = parse_config(&text, false).unwrap();
        assert_eq!(lenient.ignored_keys, vec!["trails".to_string()]);

        let nested = MINIMAL.replace("kind = \"uniform\"", "kind = \"uniform\"\ncolour = 2");
        let err = message(parse_config(&nested, true).unwrap_err());
        assert!(err.contains("measure.colour") && err.contains("line 11"), "{err}");
    }

    #[test]
    fn n_values_checks() {
        for bad in ["[100, 100]", "[200, 100]", "[1, 5]", "[]"] {
            let text = MINIMAL.replace("[100]", bad);
            let err = message(parse_config(&text, true).unwrap_err());
            assert!(err.contains("line 2"), "{bad}: {err}");
        }
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let text = MINIMAL.replace("k_max = 4", "k_max = ");
        let err = message(parse_config(&text, true).unwrap_err());
        assert!(err.contains("line 4"), "{err}");
        let text = MINIMAL.replace("k_max = 4", "k_max = \"four\"");
        let err = message(parse_config(&text, true).unwrap_err());
        assert!(err.contains("line 4"), "{err}");
    }

    #[test]
    fn other_field_checks() {
        for (from, to) in [
            ("trials = 1", "trials = 0"),
            ("k_max = 4", "k_max = 0"),
            ("radii = [0.5]", "radii = [1.0]"),
            ("kind = \"uniform\"", "kind = \"gaussian\""),
            ("kind = \"uniform\"", "kind = \"arc\""),
            ("kind = \"uniform\"", "kind = \"arc\"\narc_bounds = [0.5, 0.2]"),
            ("kind = \"uniform\"", "kind = \"uniform\"\natoms = [0.1]"),
        ] {
            assert!(parse_config(&MINIMAL.replace(from, to), true).is_err(), "{to}");
        }
    }

    #[test]
    fn mixtures_parse_and_round_trip() {
        let text = r#"
n_values = [10, 20]
trials = 2
k_max = 3
radii = [0.25, 0.75]
seed = 9223372036854775807
method = "both"
output_dir = "mix out"

[measure]
kind = "mixture"
weights = [0.25, 0.75]

[[measure.components]]
kind = "arc"
arc_bounds = [0.1, 0.3]

[[measure.components]]
kind = "atomic"
atoms = [0.0, 0.5]
weights = [0.5, 0.5]
"#;
        let cfg = parse_config(text, true).unwrap().config;
        assert_eq!(cfg.measure.to_string(), "mixture{0.25*arc(0.1,0.3),0.75*atomic{0:0.5,0.5:0.5}}");
        assert_eq!(cfg.seed, i64::MAX as u64);
        let again = parse_config(&cfg.to_toml(), true).unwrap().config;
        assert_eq!(again, cfg);

        let nested = text.replace("kind = \"arc\"\narc_bounds = [0.1, 0.3]", "kind = \"mixture\"\nweights = [1.0]");
        assert!(parse_config(&nested, true).is_err());
    }

    #[test]
    fn solver_section() {
        let cfg = parse_config(MINIMAL, true).unwrap().config;
        assert_eq!(cfg.solver, SolverOptions::default());
        assert!(!cfg.to_toml().contains("[solver]"));

        let text = format!("{MINIMAL}\n[solver]\ntolerance = 1e-10\nmax_iterations = 7\n");
        let cfg = parse_config(&text, true).unwrap().config;
        assert_eq!((cfg.solver.tolerance, cfg.solver.max_iterations), (1e-10, 7));
        assert_eq!(cfg.solver.restarts, SolverOptions::default().restarts);
        assert_eq!(parse_config(&cfg.to_toml(), true).unwrap().config, cfg);

        let bad = format!("{MINIMAL}\n[solver]\ntolerance = 0.0\n");
        assert!(message(parse_config(&bad, true).unwrap_err()).starts_with("config error: line 12:"));
        let unknown = format!("{MINIMAL}\n[solver]\ndamping = 0.5\n");
        assert!(message(parse_config(&unknown, true).unwrap_err()).contains("unknown key 'solver.damping'"));
    }
}
