//! End-to-end tests of the dmtower binary.

use std::path::Path;
use std::process::{Command, Output};

fn dmtower(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dmtower"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn enumerate_counts_match_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("enum.json");
    let out = dmtower(&[
        "enumerate",
        "--q",
        "3",
        "--eta",
        "1+2i",
        "--seed",
        "7",
        "--k",
        "5",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("[16, 48, 144, 432, 1296]"));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let counts: Vec<u64> = parsed["levels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["count"].as_u64().unwrap())
        .collect();
    assert_eq!(counts, vec![16, 48, 144, 432, 1296]);
    assert_eq!(parsed["seed"].as_u64(), Some(7));
    assert!(parsed["params_digest"].as_str().unwrap().len() == 64);
}

#[test]
fn identical_seeds_give_byte_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| -> Vec<u8> {
        let path = dir.path().join(name);
        let out = dmtower(&[
            "enumerate",
            "--q",
            "3",
            "--eta",
            "1+2i",
            "--seed",
            "42",
            "--k",
            "3",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        std::fs::read(&path).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn genus_csv_rows() {
    let out = dmtower(&["genus", "--q", "3", "--k", "1..3", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("k,epsilon,kappa,genus,ss_count,ratio_num,ratio_den"));
    assert!(text.contains("1,4,2,0,16,,"));
    assert!(text.contains("2,12,4,2,48,24,1"));
    assert!(text.contains("3,36,6,12,144,12,1"));
    assert!(text.contains("# seed=0"));
}

#[test]
fn supersingular_set_printed() {
    let out = dmtower(&[
        "supersingular",
        "--q",
        "3",
        "--eta",
        "1+2i",
        "--seed",
        "7",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(parsed["supersingular_j"].as_array().unwrap().len(), 4);
    assert_eq!(parsed["direct_matches_proof_display"].as_bool(), Some(true));
    assert_eq!(parsed["simplified_matches_direct"].as_bool(), Some(false));
}

#[test]
fn verify_exits_zero_and_emits_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("verify.json");
    let out = dmtower(&[
        "verify",
        "--q",
        "3",
        "--eta",
        "1+2i",
        "--seed",
        "7",
        "--points",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("overall: PASS"));
    assert!(text.contains("[reconciliation]"));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(parsed["reconciliation"]["entries"].as_array().unwrap().len() >= 6);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("tower.toml");
    std::fs::write(
        &cfg_path,
        "p = 3\nq_exponent = 1\neta = [1, 2]\nmode = \"reduced\"\nseed = 7\n",
    )
    .unwrap();
    let out = dmtower(&[
        "--config",
        cfg_path.to_str().unwrap(),
        "enumerate",
        "--k",
        "2",
        "--format",
        "csv",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("1,16,16"));
    assert!(text.contains("2,48,48"));
}

#[test]
fn bad_config_exits_two_naming_the_field() {
    let out = dmtower(&["enumerate", "--q", "6", "--eta", "1+2i"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("prime"));

    let out = dmtower(&["enumerate", "--q", "3"]); // reduced mode needs eta
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eta"));

    let out = dmtower(&["supersingular", "--q", "2", "--mode", "reduced", "--eta", "g"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ihara_trend_summary() {
    let out = dmtower(&["ihara", "--q", "3", "--k", "12", "--format", "json"]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(parsed["bound"].as_u64(), Some(8));
    assert_eq!(parsed["strictly_decreasing"].as_bool(), Some(true));
    assert_eq!(parsed["rows"].as_array().unwrap().len(), 12);
}

#[test]
fn atomic_write_leaves_no_partial_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = dmtower(&[
        "genus",
        "--q",
        "3",
        "--k",
        "4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(Path::new(&path).exists());
    // only the target file remains in the directory
    let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(entries.len(), 1);
}
