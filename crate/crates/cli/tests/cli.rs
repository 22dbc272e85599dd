use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_lpgnn");

fn lpgnn(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn small_config(dir: &Path, attack: &str) -> String {
    let path = dir.join(format!("cfg-{}.json", attack.len()));
    let json = format!(
        r#"{{
            "dataset": {{"synthetic": {{"num_nodes": 150, "d": 32, "intra_edge_prob": 0.15, "inter_edge_prob": 0.01}}}},
            "attack": {attack},
            "repeats": 2,
            "train": {{"max_epochs": 20}}
        }}"#
    );
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

fn without_wall_time(csv: &str) -> Vec<String> {
    csv.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect()
}

#[test]
fn gen_data_then_baseline_on_the_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("syn");
    let out = lpgnn(&["gen-data", "--nodes", "120", "--classes", "3", "--dim", "12", "--seed", "7", "--out", data.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["meta.json", "edges.csv", "features.csv", "labels.csv", "splits.json"] {
        assert!(data.join(f).exists(), "{f} missing");
    }

    let csv = tmp.path().join("runs/base.csv");
    let out = lpgnn(&[
        "baseline",
        "--dataset",
        data.to_str().unwrap(),
        "--m",
        "4",
        "--repeats",
        "1",
        "--epochs",
        "10",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "dataset,arch,eps_x,eps_y,m,k_x,k_y,attack,attack_param,defense,seed,repeat,test_accuracy,cosine,mean_fd,success_rate,num_inferences,wall_time_s"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[7], "none");
    assert!(!row[12].is_empty());
    assert!(row[13..17].iter().all(|f| f.is_empty()));
}

#[test]
fn poison_from_config_reports_success_rate() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), r#"{"kind": "poison", "fraction": 0.2}"#);
    let out = lpgnn(&["attack", "poison", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert_eq!(row[7], "poison");
        assert_eq!(row[8], "0.2");
        assert!(row[12].is_empty());
        let n: usize = row[16].parse().unwrap();
        if n > 0 {
            assert_eq!(row[15], "1");
        }
    }
}

#[test]
fn jsonl_rows_echo_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), r#"{"kind": "none"}"#);
    let out = lpgnn(&["attack", "infer", "--targets", "3", "--config", &cfg, "--format", "jsonl", "--seed", "11"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["config"]["attack"]["targets"], 3);
    assert_eq!(first["config"]["seed"], 11);
    assert_eq!(first["metrics"]["kind"], "inference");
}

#[test]
fn sweep_is_reproducible_and_reportable() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), r#"{"kind": "flip", "rate": 0.1}"#);
    let run = |name: &str| {
        let path = tmp.path().join(name);
        let out = lpgnn(&["sweep", "--axis", "rate", "--values", "0.1,0.4", "--config", &cfg, "--out", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        path
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    let (ta, tb) = (fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());
    assert_eq!(ta.lines().count(), 5);
    assert_eq!(without_wall_time(&ta), without_wall_time(&tb));

    let out = lpgnn(&["report", a.to_str().unwrap()]);
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(table.lines().count(), 3, "{table}");
    assert!(table.lines().next().unwrap().contains("test_accuracy"));
    assert!(table.contains(" ± "));
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), r#"{"kind": "none"}"#);
    for args in [
        vec!["frobnicate"],
        vec!["gen-data", "--nodes", "10"],
        vec!["sweep", "--axis", "learning_rate", "--values", "1", "--config", &cfg],
        vec!["baseline", "--eps-x", "-1", "--config", &cfg],
        vec!["attack", "flip", "--rate", "2", "--config", &cfg],
        vec!["gen-data", "--dim", "10", "--classes", "4", "--out", "unused"],
    ] {
        let out = lpgnn(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(lpgnn(&["baseline", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nowhere");
    let out = lpgnn(&["baseline", "--dataset", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let out = lpgnn(&["report", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn help_lists_defaults() {
    let out = lpgnn(&["baseline", "--help"]);
    assert!(out.status.success());
    let help = String::from_utf8(out.stdout).unwrap();
    for needle in ["(default 8)", "(default 4)", "(default 5)", "(default 0.05)", "(default 300)"] {
        assert!(help.contains(needle), "{needle} missing from help");
    }
}
