use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn smcalc(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smcalc"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("SMCALC_OUT")
        .output()
        .expect("spawn smcalc")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn unknown_catalog_name_exits_2_with_one_line() {
    let dir = TempDir::new().unwrap();
    let o = smcalc(dir.path(), &["chain-rule", "--f", "no-such-field"]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.contains("no-such-field"));
}

#[test]
fn malformed_profile_exits_2() {
    let dir = TempDir::new().unwrap();
    for bad in ["[[1,", "[[5,2]]"] {
        let o = smcalc(dir.path(), &["sample-path", "--profile", bad]);
        assert_eq!(code(&o), 2);
        assert_eq!(stderr(&o).trim_end().lines().count(), 1, "{}", stderr(&o));
    }
}

#[test]
fn missing_output_directory_exits_2() {
    let dir = TempDir::new().unwrap();
    let o = smcalc(&dir.path().join("absent"), &["parseval"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("does not exist"));
}

#[test]
fn unknown_subcommand_exits_2() {
    let dir = TempDir::new().unwrap();
    let o = smcalc(dir.path(), &["no-such-command"]);
    assert_eq!(code(&o), 2);
    assert_eq!(stderr(&o).trim_end().lines().count(), 1);
}

#[test]
fn failed_check_exits_1() {
    let dir = TempDir::new().unwrap();
    // Sixteen intervals cannot meet a 1e-12 tolerance.
    let o = smcalc(dir.path(), &["chain-rule", "--levels", "2,3,4", "--tol", "1e-12"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert_eq!(read_json(&dir.path().join("chain_rule.json"))["passed"], false);
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["--deterministic", "sym-integral", "--xi", "quadratic", "--eta", "mu", "--seed", "7"];
    assert_eq!(code(&smcalc(a.path(), &args)), 0);
    assert_eq!(code(&smcalc(b.path(), &["--threads", "1"].iter().chain(&args).copied().collect::<Vec<_>>())), 0);
    for f in ["sym_integral.csv", "sym_integral.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        if f.ends_with(".json") {
            // The thread count is echoed; everything else must agree.
            let mut x: Value = serde_json::from_slice(&x).unwrap();
            let mut y: Value = serde_json::from_slice(&y).unwrap();
            x["threads"] = Value::Null;
            y["threads"] = Value::Null;
            assert_eq!(x, y);
        } else {
            assert_eq!(x, y, "{f} differs");
        }
    }
}

#[test]
fn deterministic_json_has_no_timestamp() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&smcalc(dir.path(), &["--deterministic", "parseval"])), 0);
    assert!(read_json(&dir.path().join("parseval.json"))["timestamp"].is_null());
}

#[test]
fn config_file_merges_and_flags_win() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"eps": 0.5, "M": 1000}"#).unwrap();
    let o = smcalc(dir.path(), &["--config", cfg.to_str().unwrap(), "parseval", "--M", "5000"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = read_json(&dir.path().join("parseval.json"));
    assert_eq!(report["config"]["eps"], 0.5);
    assert_eq!(report["config"]["M"], 5000);
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    let o = smcalc(dir.path(), &["--config", cfg.to_str().unwrap(), "parseval"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bogus"));
}

#[test]
fn symmetric_integral_of_path_against_itself() {
    let dir = TempDir::new().unwrap();
    let o = smcalc(dir.path(), &["sym-integral", "--profile", "[[1,4]]", "--xi", "mu", "--eta", "mu"]);
    assert_eq!(code(&o), 0);
    let r = &read_json(&dir.path().join("sym_integral.json"))["result"];
    assert_eq!(r["converged"], true);
    // ∫ μ∘dμ = μ_T²/2 telescopes exactly, so every partition agrees.
    assert!(r["spread"].as_f64().unwrap() <= 1e-12);
    assert!(r["extrapolated"].as_f64().unwrap().abs() <= 1e-12);
}

#[test]
fn parseval_million_terms() {
    let dir = TempDir::new().unwrap();
    let o = smcalc(dir.path(), &["parseval", "--eps", "1", "--M", "1000000"]);
    assert_eq!(code(&o), 0);
    let r = &read_json(&dir.path().join("parseval.json"))["result"];
    assert!(r["deviation"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn counterexample1_depth_two_and_recheck() {
    let dir = TempDir::new().unwrap();
    let o = smcalc(dir.path(), &["counterexample1", "--depth", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let file = dir.path().join("counterexample1.json");
    let report = read_json(&file);
    assert_eq!(report["result"]["complete"], true);
    assert_eq!(report["result"]["certificate"]["eps_sequence"].as_array().unwrap().len(), 4);

    assert_eq!(code(&smcalc(dir.path(), &["counterexample1", "--check", file.to_str().unwrap()])), 0);

    let mut tampered = report.clone();
    tampered["result"]["certificate"]["f_values"][0]["value"] = 0.1.into();
    let bad = dir.path().join("tampered.json");
    std::fs::write(&bad, tampered.to_string()).unwrap();
    assert_eq!(code(&smcalc(dir.path(), &["counterexample1", "--check", bad.to_str().unwrap()])), 1);
}

#[test]
fn counterexample2_recheck() {
    let dir = TempDir::new().unwrap();
    let o = smcalc(dir.path(), &["counterexample2", "--depth", "1", "--seeds", "10"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let file = dir.path().join("counterexample2.json");
    assert_eq!(code(&smcalc(dir.path(), &["counterexample2", "--check", file.to_str().unwrap()])), 0);
}

#[test]
fn sde_outputs_share_the_grid() {
    let dir = TempDir::new().unwrap();
    let o = smcalc(dir.path(), &["sde-solve", "--sigma", "const-sigma", "--intervals", "256"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let x = std::fs::read_to_string(dir.path().join("sde_x.csv")).unwrap();
    let y = std::fs::read_to_string(dir.path().join("sde_y.csv")).unwrap();
    assert_eq!(x.lines().count(), 258);
    assert_eq!(x.lines().count(), y.lines().count());
}
