use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dispersive_lab::spectral::read_snapshot;
use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn dlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dlab"))
        .args(args)
        .env("DLAB_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn records(dir: &Path) -> Vec<Value> {
    let mut out: Vec<(String, Value)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .map(|p| (p.display().to_string(), serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap()))
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out.into_iter().map(|x| x.1).collect()
}

fn only_record(dir: &Path) -> Value {
    let r = records(dir);
    assert_eq!(r.len(), 1);
    r.into_iter().next().unwrap()
}

const HESSIAN: &str = "seed = 11\nsamples = 40\n";

#[test]
fn exponents_schrodinger_example() {
    let out = tempfile::tempdir().unwrap();
    let cfg = configs().join("exponents-nls.toml");
    let o = dlab(&["exponents", "--config", cfg.to_str().unwrap()], out.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = only_record(out.path());
    assert_eq!(r["status"], "pass");
    assert_eq!(r["results"]["epsilon"], "1/4");
    assert_eq!(r["results"]["triple"], "(16/3, 4, 16/7)");
    assert_eq!(r["results"]["beta"], "1/4");
    assert!(!r["anchor"].as_str().unwrap().is_empty());
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("[pass] exponents"));
}

#[test]
fn exponents_wave_example() {
    let out = tempfile::tempdir().unwrap();
    let cfg = configs().join("exponents-nlw.toml");
    let o = dlab(&["exponents", "--config", cfg.to_str().unwrap()], out.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(only_record(out.path())["results"]["triple"], "(20, 5, 4)");
}

#[test]
fn exponents_mismatch_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "seed = 0\nequation = \"nls\"\nn = 3\ns = 1\np = 3\n[expect]\ntriple = \"(4, 4, 4)\"\nbeta = \"1/4\"\n");
    let o = dlab(&["exponents", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "seed = 0\nequation = \"nls\"\nn = 3\ns = 1\n");
    let o = dlab(&["exponents", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`p`"));
}

#[test]
fn unknown_field_and_missing_seed_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.toml", "seed = 0\nsamples = 4\nbogus = 1\n");
    let o = dlab(&["hessian-scan", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
    let cfg = write(dir.path(), "b.toml", "samples = 4\n");
    let o = dlab(&["hessian-scan", "--config", cfg.to_str().unwrap(), "--seed", "3"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
}

#[test]
fn bad_arguments_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = dlab(&["solve", "--nope"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let o = dlab(&["solve", "--config", "/nonexistent.toml"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn json_config_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"seed": 1, "samples": 10}"#);
    let out = dir.path().join("out");
    let o = dlab(&["hessian-scan", "--config", cfg.to_str().unwrap(), "--seed", "99", "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(only_record(&out)["config"]["seed"], 99);
}

#[test]
fn identical_config_gives_identical_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", HESSIAN);
    let out = dir.path().join("out");
    for _ in 0..2 {
        let o = dlab(&["hessian-scan", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], dir.path());
        assert_eq!(o.status.code(), Some(0));
    }
    let r = records(&out);
    assert_eq!(r.len(), 2);
    assert_ne!(r[0]["id"], r[1]["id"]);
    assert_eq!(r[0]["results"], r[1]["results"]);
    let csv: Vec<String> = r
        .iter()
        .map(|x| fs::read_to_string(out.join(x["artifacts"][0].as_str().unwrap())).unwrap())
        .collect();
    assert_eq!(csv[0], csv[1]);
}

#[test]
fn csv_floats_have_17_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", HESSIAN);
    dlab(&["hessian-scan", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], dir.path());
    let r = only_record(dir.path());
    let csv = fs::read_to_string(dir.path().join(r["artifacts"][0].as_str().unwrap())).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "n,k,sigma,required_rank,min_rank,max_rank,max_fd_error");
    for line in lines {
        let fd = line.rsplit(',').next().unwrap();
        let mantissa = fd.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.len(), 18, "{fd}");
    }
}

#[test]
fn solve_constant_data_with_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let body = fs::read_to_string(configs().join("solve-constant.toml")).unwrap().replace("time_samples = 1025", "time_samples = 257\nsnapshot = true");
    let cfg = write(dir.path(), "c.toml", &body);
    let out = dir.path().join("out");
    let o = dlab(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = only_record(&out);
    assert_eq!(r["results"]["report"]["converged"], true);
    let snap = r["artifacts"].as_array().unwrap().iter().find(|a| a.as_str().unwrap().ends_with(".snap")).unwrap();
    let f = read_snapshot(fs::File::open(out.join(snap.as_str().unwrap())).unwrap()).unwrap();
    assert_eq!(f.grid().dim(), 3);
}

#[test]
fn unconverged_solve_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let body = fs::read_to_string(configs().join("solve-constant.toml"))
        .unwrap()
        .replace("time_samples = 1025", "time_samples = 65")
        .replace("max_iter = 60", "max_iter = 2");
    let cfg = write(dir.path(), "c.toml", &body);
    let o = dlab(&["solve", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(only_record(dir.path())["status"], "inconclusive");
}

#[test]
fn wave_constant_data_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "seed = 0\nhorizon = 1.0\n[equation]\nkind = \"nlw\"\nn = 2\nk = 1\ns = 1\np = 4\n[grid]\nextent = 8.0\npoints = 8\n[data]\nconstant = [1.0, 0.0]\n",
    );
    let o = dlab(&["solve", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn rough_data_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("rough-data.toml");
    let o = dlab(&["rough-data", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn kernel_decay_schrodinger_sup_example() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("kernel-decay-schrodinger-sup.toml");
    let o = dlab(&["kernel-decay", "--config", cfg.to_str().unwrap()], dir.path());
    let r = only_record(dir.path());
    let slope = r["results"]["report"]["fitted_slope"].as_f64().unwrap();
    assert_eq!(o.status.code(), Some(0), "fitted slope {slope}");
    assert!((slope + 1.5).abs() <= 0.15);
}

#[test]
fn report_summarizes_without_touching_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("exponents-nls.toml");
    for _ in 0..3 {
        dlab(&["exponents", "--config", cfg.to_str().unwrap()], dir.path());
    }
    let before: Vec<Vec<u8>> = records_bytes(dir.path());
    let o = dlab(&["report", dir.path().to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let table = String::from_utf8_lossy(&o.stdout).to_string();
    assert_eq!(table.lines().count(), 4);
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    assert_eq!(summary.lines().skip(1).filter(|l| l.contains(",pass,")).count(), 3);
    let again = dlab(&["report"], dir.path());
    assert_eq!(String::from_utf8_lossy(&again.stdout), table);
    assert_eq!(fs::read_to_string(dir.path().join("summary.csv")).unwrap(), summary);
    assert_eq!(records_bytes(dir.path()), before);
}

fn records_bytes(dir: &Path) -> Vec<Vec<u8>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| fs::read(p).unwrap()).collect()
}

#[test]
fn report_preserves_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("exponents-nls.toml");
    dlab(&["exponents", "--config", cfg.to_str().unwrap()], dir.path());
    let mut r = only_record(dir.path());
    r["id"] = "manual-1".into();
    r["status"] = "inconclusive".into();
    fs::write(dir.path().join("manual-1.json"), serde_json::to_vec(&r).unwrap()).unwrap();
    let o = dlab(&["report"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(summary.contains(",inconclusive,") && summary.contains(",pass,"));
}

#[test]
fn report_on_empty_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = dlab(&["report", dir.path().to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3));
}
