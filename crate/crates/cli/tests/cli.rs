use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn critlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_critlab"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("exp.toml");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL: &str = r#"
n_values = [10, 40]
trials = 3
k_max = 2
radii = [0.5]
seed = 1
method = "both"
output_dir = "report"

[measure]
kind = "arc"
arc_bounds = [0.0, 0.5]
"#;

#[test]
fn simulate_writes_report_and_figures() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = critlab(&["simulate", &cfg, "--jobs", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = dir.path().join("report");
    for name in ["rows.csv", "aggregate.csv", "manifest.txt", "scatter.svg", "histogram.svg", "convergence.svg"] {
        assert!(report.join(name).is_file(), "{name} missing");
    }
    let rows = fs::read_to_string(report.join("rows.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 2 * 3);
    assert_eq!(rows.lines().next().unwrap().split(',').count(), 8 + 3 * 2 + 1);

    // Redraw from disk and check the SVGs still parse.
    fs::remove_file(report.join("scatter.svg")).unwrap();
    let out = critlab(&["plot", "report"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["scatter.svg", "histogram.svg", "convergence.svg"] {
        let text = fs::read_to_string(report.join(name)).unwrap();
        roxmltree::Document::parse(&text).unwrap();
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let run = |seed: &str| {
        let out = critlab(&["simulate", &cfg, "--seed", seed], dir.path());
        assert_eq!(out.status.code(), Some(0));
        fs::read(dir.path().join("report/rows.csv")).unwrap()
    };
    let a = run("5");
    let b = run("6");
    let c = run("5");
    assert_ne!(a, b);
    assert_eq!(a, c);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        SMALL.replace("method = \"both\"", "method = \"dense\"").replace("[10, 40]", "[10, 1000]"),
        SMALL.replace("seed = 1", "seed = 1\ncolour = \"red\""),
        SMALL.replace("arc_bounds = [0.0, 0.5]", "arc_bounds = [0.5, 0.5]"),
        "n_values = [".to_string(),
    ];
    for body in &cases {
        let cfg = write_config(dir.path(), body);
        let out = critlab(&["simulate", &cfg], dir.path());
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert_eq!(out.status.code(), Some(2), "{body}\n{stderr}");
        assert!(stderr.contains("error"), "{stderr}");
    }
    let out = critlab(&["simulate", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = critlab(&["simulate", &write_config(dir.path(), &cases[0])], dir.path());
    assert!(String::from_utf8_lossy(&out.stderr).contains("dense oracle capped at 512"));
}

#[test]
fn lenient_mode_warns_about_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("seed = 1", "seed = 1\ncolour = \"red\""));
    let out = critlab(&["simulate", &cfg, "--no-strict"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn nonconvergence_exits_with_3_only_when_asked() {
    // One sweep from the initial guesses cannot reach the tolerance.
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL.replace("method = \"both\"", "method = \"iterative\"")
        + "\n[solver]\nmax_iterations = 1\nrestarts = 0\n";
    let cfg = write_config(dir.path(), &body);
    let out = critlab(&["simulate", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("did not converge"));
    let rows = fs::read_to_string(dir.path().join("report/rows.csv")).unwrap();
    assert!(rows.lines().skip(1).any(|l| l.split(',').nth(3) == Some("false")));

    let out = critlab(&["simulate", &cfg, "--fail-on-nonconverged"], dir.path());
    assert_eq!(out.status.code(), Some(3));

    let converging = write_config(dir.path(), SMALL);
    let out = critlab(&["simulate", &converging, "--fail-on-nonconverged"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn trace_check_and_limit_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let out = critlab(&["trace-check", "--n", "60", "--k", "8", "--seed", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)).count(), 8);

    let out = critlab(&["limit-zeros", "--measure", "atomic{0:0.5,0.5:0.5}", "--r", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "1");

    let out = critlab(&["limit-zeros", "--measure", "uniform", "--r", "0.9"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("identically zero"));

    let out = critlab(&["limit-zeros", "--measure", "atomic{0:0.6,0.5:0.6}", "--r", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
