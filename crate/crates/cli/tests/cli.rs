use std::path::Path;
use std::process::{Command, Output};

fn conjpair(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conjpair"))
        .args(args)
        .current_dir(cwd)
        .env_remove("CONJPAIR_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_payload(o: &Output) -> serde_json::Value {
    let v: serde_json::Value = serde_json::from_str(&stdout(o)).unwrap();
    assert!(v["version"].as_str().unwrap().starts_with("conjpair-"));
    assert!(v["timestamp"].is_string());
    v["payload"].clone()
}

#[test]
fn wg_table() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&conjpair(&["wg", "--p", "2", "--n", "5"], dir.path()));
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rows.records().map(Result::unwrap).collect();
    assert_eq!(&rows[0][0], "id");
    assert_eq!(&rows[0][2], "1/24");
    assert_eq!(&rows[1][0], "(1 2)");
    assert_eq!(&rows[1][2], "-1/120");
}

#[test]
fn limit_bell_entropy() {
    let dir = tempfile::tempdir().unwrap();
    let p = json_payload(&conjpair(&["limit", "--k", "2", "--a", "bell:r=1"], dir.path()));
    assert!((p["entropy"].as_f64().unwrap() - 1.0735).abs() < 1e-4);
    assert_eq!(p["realizable"], true);
    let bits = json_payload(&conjpair(&["limit", "--k", "2", "--a", "bell:r=1", "--log-base", "two"], dir.path()));
    assert!((bits["entropy"].as_f64().unwrap() - 1.0735 / 2f64.ln()).abs() < 1e-3);
}

#[test]
fn simulate_first_moment_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--n", "64", "--k", "2", "--r", "1", "--p", "1", "--input", "bell", "--samples", "10", "--seed", "7"];
    let a = stdout(&conjpair(&args, dir.path()));
    let b = stdout(&conjpair(&args, dir.path()));
    assert_eq!(a, b);
    let mut reader = csv::Reader::from_reader(a.as_bytes());
    assert_eq!(reader.headers().unwrap(), vec!["sampleIndex", "statistic", "value"]);
    let moments: Vec<f64> = reader
        .records()
        .map(Result::unwrap)
        .filter(|r| &r[1] == "moment")
        .map(|r| r[2].parse().unwrap())
        .collect();
    assert_eq!(moments.len(), 10);
    assert!(moments.iter().all(|m| (m - 1.0).abs() < 1e-12));
}

#[test]
fn out_file_and_config_merge() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), r#"{"p": 3, "n": 4, "samples": 2}"#).unwrap();
    let o = conjpair(&["--config", "cfg.json", "--out", "res/wg.csv", "wg", "--n", "6"], dir.path());
    assert!(stdout(&o).is_empty());
    let text = std::fs::read_to_string(dir.path().join("res/wg.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
    // the flag wins over the file: Wg(6, id) = (n² − 2) / (n(n² − 1)(n² − 4))
    assert!(text.contains("id,\"[1,1,1]\",17/3360"), "{text}");
}

#[test]
fn raised_caps_need_acknowledgment() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), r#"{"caps": {"wg_degree": 7}}"#).unwrap();
    let o = conjpair(&["--config", "cfg.json", "wg", "--p", "2", "--n", "3"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("--unsafe-caps"));
    let o = conjpair(&["--config", "cfg.json", "--unsafe-caps", "wg", "--p", "2", "--n", "3"], dir.path());
    assert!(o.status.success());
    let o = conjpair(&["wg", "--p", "7", "--n", "8"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn validation_failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["limit", "--k", "2", "--a", "{\"r\": 1"],
        vec!["limit", "--k", "2", "--a", "{\"r\":1,\"entries\":[{\"pp\":\"{1>1}\",\"a\":1.0}]}"],
        vec!["wg", "--p", "2"],
        vec!["simulate", "--n", "8", "--k", "2", "--r", "1", "--p", "1", "--samples", "2"],
        vec!["acceptance", "nope"],
        vec!["spectrum", "--r", "2", "--n", "2"],
    ] {
        let o = conjpair(&args, dir.path());
        assert!(!o.status.success(), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn spectrum_payload() {
    let dir = tempfile::tempdir().unwrap();
    let p = json_payload(&conjpair(&["spectrum", "--r", "1", "--n", "8", "--symbolic", "--dense"], dir.path()));
    assert_eq!(p["dim"], 2);
    assert_eq!(p["distanceToZeroOne"], 0.0);
    assert_eq!(p["dense"]["containedInLq"], true);
    assert_eq!(p["symbolic"]["basis"][0], "id");
}

#[test]
fn trace_bounds_csv() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&conjpair(&["trace-bounds", "--k", "3", "--r", "1", "--n", "2", "--trials", "5", "--seed", "1"], dir.path()));
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(reader.headers().unwrap().len(), 11);
    let rows: Vec<_> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 5);
    // Θ is undefined for odd k
    assert!(rows.iter().all(|r| r[3].is_empty() && r[7].is_empty()));
}

#[test]
fn acceptance_report_goes_to_cache_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_conjpair"))
        .args(["acceptance", "weingarten"])
        .current_dir(dir.path())
        .env("CONJPAIR_CACHE_DIR", dir.path().join("cache"))
        .output()
        .unwrap();
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.contains("PASS")).count(), 2);
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("cache/acceptance-weingarten.json")).unwrap()).unwrap();
    assert_eq!(report["payload"].as_array().unwrap().len(), 2);
}
