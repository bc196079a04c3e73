use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use serde_json::Value;
use specshift_cli::run::{exponent_from_rows, relative_spread};
use specshift_cli::{run_experiment, validate_config, ExperimentKind, EXIT_CHECK_FAILED, EXIT_ERROR, EXIT_OK};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run_raw(raw: &str, dir: &Path) -> Value {
    let (cfg, warnings) = validate_config(raw).unwrap();
    run_experiment(&cfg, warnings, dir).unwrap();
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

/// Data rows of results.csv as `header -> column` lookups.
fn rows(dir: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(dir.join("results.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# format=specshift-results/1 config_sha256="));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let data = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, data)
}

fn column(dir: &Path, name: &str) -> Vec<f64> {
    let (header, data) = rows(dir);
    let j = header.iter().position(|h| h == name).unwrap();
    data.iter().map(|r| r[j].parse().unwrap()).collect()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_specshift"))
}

const TINY_IDOS: &str = r#"{"kind": "idos", "model": {"side": 8}, "experiment": {"samples": 2, "energies": [0.1, 0.5, 1.0]}}"#;

#[test]
fn tiny_idos_is_fast() {
    let tmp = tempfile::tempdir().unwrap();
    let start = Instant::now();
    run_raw(TINY_IDOS, tmp.path());
    assert!(start.elapsed().as_secs_f64() < 1.0);
    let (header, data) = rows(tmp.path());
    assert_eq!(header, ["E", "mean", "stderr", "n_samples"]);
    assert!(data.iter().all(|r| r[3] == "2"));
    for f in ["results.csv", "summary.json", "config.resolved.json"] {
        let text = fs::read_to_string(tmp.path().join(f)).unwrap();
        assert!(text.contains("specshift-results/1"), "{f}");
    }
}

#[test]
fn identical_configs_give_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_raw(TINY_IDOS, a.path());
    run_raw(TINY_IDOS, b.path());
    for f in ["results.csv", "summary.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn thread_count_does_not_change_outputs() {
    let raw = r#"{"kind": "averaged-ssf",
        "model": {"dim": 2, "lambda": 8, "puncture": {"side": 2, "center": [0, 0]}},
        "experiment": {"samples": 12, "sides": [10, 12], "energies": [4.0, 6.0]}}"#;
    let mut outputs = Vec::new();
    for t in [1, 8] {
        let tmp = tempfile::tempdir().unwrap();
        let (mut cfg, w) = validate_config(raw).unwrap();
        cfg.threads = Some(t);
        run_experiment(&cfg, w, tmp.path()).unwrap();
        outputs.push((
            fs::read(tmp.path().join("results.csv")).unwrap(),
            fs::read(tmp.path().join("summary.json")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn summaries_match_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    let s = run_raw(
        r#"{"kind": "wegner", "experiment": {"samples": 20, "sides": [16, 24], "intervals": [[0.3, 0.5], [0.5, 0.7]]}}"#,
        &dir.join("w"),
    );
    let ratio = column(&dir.join("w"), "ratio");
    let sides = column(&dir.join("w"), "L");
    let max = ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!((s["summary"]["max_ratio"].as_f64().unwrap() - max).abs() <= 1e-12);
    let per: Vec<f64> = [16.0, 24.0]
        .iter()
        .map(|&l| ratio.iter().zip(&sides).filter(|(_, &s)| s == l).map(|(r, _)| *r).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    assert!((s["summary"]["relative_spread"].as_f64().unwrap() - relative_spread(&per)).abs() <= 1e-12);

    let s = run_raw(
        r#"{"kind": "reverse-wegner", "experiment": {"samples": 20, "sides": [16], "intervals": [[0.3, 0.5], [0.5, 0.7]]}}"#,
        &dir.join("rw"),
    );
    let ratio = column(&dir.join("rw"), "ratio");
    let stderr = column(&dir.join("rw"), "stderr");
    let min = ratio.iter().copied().fold(f64::INFINITY, f64::min);
    let margin = ratio.iter().zip(&stderr).map(|(r, e)| r - 3.0 * e).fold(f64::INFINITY, f64::min);
    assert!((s["summary"]["min_ratio"].as_f64().unwrap() - min).abs() <= 1e-12);
    assert!((s["summary"]["min_margin"].as_f64().unwrap() - margin).abs() <= 1e-12);

    let s = run_raw(
        r#"{"kind": "ssf-scaling", "model": {"dim": 2, "lambda": 8, "spacing": 1},
            "experiment": {"samples": 6, "energy": 6.0, "l_values": [2, 4, 6]}}"#,
        &dir.join("sc"),
    );
    let ls = column(&dir.join("sc"), "l");
    let means = column(&dir.join("sc"), "mean_xi");
    let pts: Vec<(f64, f64)> = ls.into_iter().zip(means).collect();
    let alpha = exponent_from_rows(&pts).unwrap();
    assert!((s["summary"]["alpha"].as_f64().unwrap() - alpha).abs() <= 1e-12);

    let s = run_raw(
        r#"{"kind": "idos", "experiment": {"samples": 5, "energies": [0.2, 1.0, 0.6]}}"#,
        &dir.join("idos"),
    );
    let max = column(&dir.join("idos"), "mean").into_iter().fold(f64::NEG_INFINITY, f64::max);
    assert!((s["summary"]["max_mean"].as_f64().unwrap() - max).abs() <= 1e-12);
}

#[test]
fn shipped_kirsch_config() {
    let tmp = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["kirsch", "--config"])
        .arg(configs_dir().join("kirsch.json"))
        .arg("--out")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_OK as i32));
    let (header, data) = rows(tmp.path());
    assert_eq!(header, ["L", "xi"]);
    assert_eq!(data.len(), 4);
    let s: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("summary.json")).unwrap()).unwrap();
    let xi: Vec<i64> = data.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(s["summary"]["trend"], specshift_cli::run::trend(&xi));
    assert_eq!(s["summary"]["max_xi"].as_i64().unwrap(), *xi.iter().max().unwrap());
}

#[test]
fn every_shipped_config_validates() {
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let raw = fs::read_to_string(&path).unwrap();
        let (cfg, _) = validate_config(&raw).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let stem = path.file_stem().unwrap().to_str().unwrap();
        assert_eq!(cfg.kind, stem.parse::<ExperimentKind>().unwrap());
    }
}

fn write_config(dir: &Path, raw: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, raw).unwrap();
    p
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");

    let cfg = write_config(tmp.path(), r#"{"kind": "birman-solomyak", "experiment": {"delta": 0.3, "energy": 1.0}}"#);
    let r = bin().args(["birman-solomyak", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(r.status.code(), Some(EXIT_ERROR as i32));
    assert!(String::from_utf8_lossy(&r.stderr).contains("invalid delta"));

    let cfg = write_config(
        tmp.path(),
        r#"{"kind": "reverse-wegner",
            "disorder": {"density": {"kind": "piecewise-constant", "breakpoints": [0, 0.5, 1], "values": [2, 0]}},
            "experiment": {"intervals": [[0.3, 0.7]], "sides": [32]}}"#,
    );
    let r = bin().args(["reverse-wegner", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(r.status.code(), Some(EXIT_ERROR as i32));
    assert!(String::from_utf8_lossy(&r.stderr).contains("V1'"));

    // a declared check that cannot pass: tolerance far below the quadrature error
    let cfg = write_config(
        tmp.path(),
        r#"{"kind": "birman-solomyak", "model": {"side": 11, "spacing": 1},
            "experiment": {"energy": 1.0, "eps": 0.5, "quad_orders": [8, 16], "tolerance": 1e-300}}"#,
    );
    let r = bin().args(["birman-solomyak", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(r.status.code(), Some(EXIT_CHECK_FAILED as i32));

    let cfg = write_config(tmp.path(), TINY_IDOS);
    let r = bin().args(["dos", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(r.status.code(), Some(EXIT_ERROR as i32));

    let r = bin().args(["idos", "--config"]).arg(tmp.path().join("missing.json")).output().unwrap();
    assert_eq!(r.status.code(), Some(EXIT_ERROR as i32));
}

#[test]
fn cli_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), TINY_IDOS);
    let run = |dir: &str, extra: &[&str]| {
        let out = tmp.path().join(dir);
        let r = bin().args(["idos", "--config"]).arg(&cfg).arg("--out").arg(&out).args(extra).output().unwrap();
        assert_eq!(r.status.code(), Some(0));
        fs::read_to_string(out.join("results.csv")).unwrap()
    };
    let base = run("a", &["--threads", "1"]);
    assert_eq!(base, run("b", &["--threads", "8"]));
    let reseeded = run("c", &["--seed", "99"]);
    assert_ne!(base.lines().next(), reseeded.lines().next());
    let resolved: Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("c/config.resolved.json")).unwrap()).unwrap();
    assert_eq!(resolved["config"]["disorder"]["seed"], 99);
}
