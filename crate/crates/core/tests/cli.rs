use std::path::Path;
use std::process::{Command, Output};

fn shcgm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shcgm"))
        .args(args)
        .current_dir(dir)
        .env("SHCGM_OUTPUT_DIR", dir.join("out"))
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn zero_iterations_writes_header_and_initial_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.cfg", "problem = analytic1d\niterations = 0\n");
    let out = shcgm(&["run", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/analytic1d_shcgm_s0.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2, "{csv}");
    assert!(lines[0].starts_with("k,"));
    assert!(lines[1].starts_with("0,"));
}

#[test]
fn runs_are_reproducible_apart_from_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let text = "problem = covariance\nn = 20\nblocks = 2\niterations = 300\nseed = 5\n";
    let strip = |csv: String| -> Vec<String> {
        csv.lines()
            .map(|l| l.rsplit_once(',').map(|(a, _)| a.to_string()).unwrap_or_default())
            .collect()
    };
    let mut traces = Vec::new();
    for name in ["x.csv", "y.csv"] {
        let cfg = write(dir.path(), "c.cfg", &format!("{text}output = {name}\n"));
        assert!(shcgm(&["run", &cfg], dir.path()).status.success());
        traces.push(strip(std::fs::read_to_string(dir.path().join(name)).unwrap()));
    }
    assert_eq!(traces[0], traces[1]);
}

#[test]
fn invalid_configs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    for text in [
        "problem = nowhere\n",
        "problem = analytic1d\nbeta0 = -1\n",
        "problem = analytic1d\noracle = multiplicative\ndelta = 2\n",
        "iterations = 3\n",
    ] {
        let cfg = write(dir.path(), "bad.cfg", text);
        let out = shcgm(&["run", &cfg], dir.path());
        assert!(!out.status.success(), "{text}");
        assert!(!out.stderr.is_empty());
        assert!(!shcgm(&["validate", &cfg], dir.path()).status.success());
    }
    let out = shcgm(&["run", "missing.cfg"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn validate_prints_the_canonical_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "v.cfg", "problem = l1_quadratic # comment\n dim = 4\n");
    let out = shcgm(&["validate", &cfg], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("problem = l1_quadratic"));
    assert!(text.contains("dim = 4"));
}

#[test]
fn slope_subcommand_reports_a_fit() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("k,objective\n");
    for k in 1..=100 {
        csv.push_str(&format!("{k},{}\n", 2.0 / (k as f64).powi(2)));
    }
    let trace = write(dir.path(), "t.csv", &csv);
    let out = shcgm(&["slope", &trace, "objective", "1", "100"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("slope=-2.000000"), "{text}");
    assert!(!shcgm(&["slope", &trace, "nope", "1", "100"], dir.path()).status.success());
}
