use std::process::{Command, Output};

use serde_json::Value;

fn hamsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamsim"))
        .args(args)
        .env_remove("HAMSIM_DENSE_CAP")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn write_temp(name: &str, text: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("hamsim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

/// Data rows and the trailing summary of a CSV sweep.
fn sweep_csv(out: &Output) -> (Vec<Vec<String>>, Value) {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert_eq!(
        header,
        "k,r,measured_error,bound,restriction_ok,n_exp,wall_time"
    );
    let mut rows = Vec::new();
    let mut summary = None;
    for line in lines {
        if let Some(rest) = line.strip_prefix("# summary ") {
            summary = Some(serde_json::from_str(rest).unwrap());
        } else {
            rows.push(line.split(',').map(str::to_owned).collect());
        }
    }
    (rows, summary.expect("summary line"))
}

#[test]
fn bound_worked_number() {
    let report = json(&hamsim(&[
        "bound", "--terms", "2", "--tau", "1", "--eps", "0.01", "--k", "1",
    ]));
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["r"], 253);
    let nexp = report["nexp_bound"].as_f64().unwrap();
    assert!((nexp - 2_828.427_124_746_19).abs() < 1e-6 * nexp);
    let err = report["error_bound"].as_f64().unwrap();
    assert!((err - 0.004_999_296_973_863).abs() < 1e-6 * err);
    assert_eq!(report["restriction_ok"], true);
}

#[test]
fn bound_selects_first_order() {
    let report = json(&hamsim(&["bound", "--tau", "100", "--eps", "1e-3"]));
    assert_eq!(report["k"], 1);
    assert_eq!(report["k_chosen"], true);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["bound", "--tau", "1", "--eps", "2"][..],
        &["bound", "--tau", "-1", "--eps", "0.1"],
        &["simulate"],
        &["simulate", "--gen", "random:n=3,d=1", "--input", "x"],
        &["simulate", "--gen", "walk:n=3"],
        &["simulate", "--gen", "random:n=3,d=1", "--time", "-1"],
        &["simulate", "--gen", "random:n=3,d=1", "--format", "csv"],
        &["simulate", "--input", "/nonexistent/hamsim.txt"],
        &["sweep", "--gen", "random:n=3,d=2", "--k", "1,x"],
        &["parity", "--bits", "01a"],
        &["no-such-command"],
    ] {
        let out = hamsim(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn malformed_entry_list_is_usage_error() {
    let path = write_temp("bad.txt", "2 1\n0 1 1.0\n");
    let out = hamsim(&["decompose", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_recovers_orders() {
    let out = hamsim(&[
        "sweep",
        "--gen",
        "random:n=3,d=8,seed=1",
        "--terms",
        "2",
        "--k",
        "1,2",
    ]);
    assert!(out.status.success());
    let (rows, summary) = sweep_csv(&out);
    assert_eq!(rows.len(), 14);
    assert_eq!(summary["dim"], 8);
    assert_eq!(summary["violations"], 0);
    let s1 = summary["slopes"]["1"].as_f64().unwrap();
    let s2 = summary["slopes"]["2"].as_f64().unwrap();
    assert!((s1 + 2.0).abs() <= 0.3, "{s1}");
    assert!((s2 + 4.0).abs() <= 0.3, "{s2}");
    for row in &rows {
        if row[4] == "true" {
            let err: f64 = row[2].parse().unwrap();
            let bound: f64 = row[3].parse().unwrap();
            assert!(err <= bound);
        }
    }
}

#[test]
fn sweep_at_zero_time_is_exact() {
    let out = hamsim(&["sweep", "--gen", "random:n=3,d=8,seed=2", "--time", "0"]);
    assert!(out.status.success());
    let (rows, _) = sweep_csv(&out);
    for row in rows {
        assert!(row[2].parse::<f64>().unwrap() <= 1e-12);
        assert_eq!(row[5], "0");
    }
}

#[test]
fn sweep_over_file_and_parity() {
    let path = write_temp("h.txt", "2 2\n0 1 1.0 0.0\n1 2 0.5 0.0\n3 3 0.7 0\n");
    let out = hamsim(&[
        "sweep",
        "--input",
        path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let report = json(&out);
    assert_eq!(report["source"], "colored pieces");
    assert_eq!(report["rows"].as_array().unwrap().len(), 14);

    let out = hamsim(&[
        "sweep",
        "--gen",
        "parity:bits=0110",
        "--r",
        "8,16,32",
        "--k",
        "1",
    ]);
    assert!(out.status.success());
    let (_, summary) = sweep_csv(&out);
    assert_eq!(summary["terms"], 2);
    assert!((summary["slopes"]["1"].as_f64().unwrap() + 2.0).abs() < 0.3);
}

#[test]
fn simulate_meets_target_and_query_bound() {
    let report = json(&hamsim(&[
        "simulate",
        "--gen",
        "random:n=5,d=2,seed=4",
        "--time",
        "1",
        "--eps",
        "0.05",
        "--seed",
        "3",
    ]));
    assert!(report["run"]["trace_distance"].as_f64().unwrap() <= 0.05);
    let n_bb = report["n_bb"].as_u64().unwrap();
    let z = report["coloring"]["z_n"].as_u64().unwrap();
    let n_exp = report["run"]["exponentials"].as_u64().unwrap();
    assert!(n_bb > 0);
    assert!(n_bb <= 2 * (z + 2) * n_exp);
    assert_eq!(report["n_bb_bound"].as_u64().unwrap(), 2 * (z + 2) * n_exp);
    assert_eq!(report["final_state"].as_array().unwrap().len(), 32);
}

#[test]
fn simulate_is_deterministic() {
    let args = [
        "simulate",
        "--gen",
        "random:n=4,d=3,seed=11",
        "--seed",
        "5",
        "--eps",
        "0.01",
    ];
    let a = hamsim(&args);
    let b = hamsim(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn simulate_zero_time_is_identity() {
    let report = json(&hamsim(&[
        "simulate",
        "--gen",
        "random:n=3,d=2,seed=1",
        "--time",
        "0",
    ]));
    assert_eq!(report["n_bb"], 0);
    assert_eq!(report["run"]["exponentials"], 0);
    assert_eq!(report["final_state"][0], serde_json::json!([1.0, 0.0]));
}

#[test]
fn simulate_missed_target_exits_one() {
    let out = hamsim(&[
        "simulate",
        "--gen",
        "random:n=4,d=2,seed=1",
        "--eps",
        "1e-9",
        "--k",
        "1",
        "--r",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn decompose_reports() {
    let report = json(&hamsim(&["decompose", "--gen", "random:n=6,d=4,seed=3"]));
    assert_eq!(report["passed"], true);
    assert!(report["labels_used"].as_u64().unwrap() <= 96);
    assert_eq!(report["label_bound"], 96);
    assert!(report["max_queries_per_call"].as_u64() <= report["query_bound"].as_u64());

    let report = json(&hamsim(&["decompose", "--gen", "parity:bits=01101001"]));
    assert_eq!(report["passed"], true);

    let path = write_temp("zero.txt", "3 2\n");
    let report = json(&hamsim(&["decompose", "--input", path.to_str().unwrap()]));
    assert_eq!(report["passed"], true);
    assert_eq!(report["labels_used"], 0);
}

#[test]
fn parity_reads_the_bits() {
    for (bits, parity) in [("01101001", false), ("11100000", true)] {
        let report = json(&hamsim(&["parity", "--bits", bits]));
        assert_eq!(report["parity"], parity);
        assert_eq!(report["predicted"], parity);
        assert_eq!(report["exact"]["ancilla"], parity);
        assert!(report["trace_distance"].as_f64().unwrap() <= 0.2);
        assert!(report["h_queries"].as_f64().unwrap() >= 2.0);
        assert!(report["note"].as_str().unwrap().contains("lower bound"));
    }
    let report = json(&hamsim(&[
        "parity", "--bits", "1011", "--decomp", "coloring",
    ]));
    assert_eq!(report["decomposition"], "coloring");
    assert_eq!(report["predicted"], true);
}

#[test]
fn tables_reproduce() {
    let report = json(&hamsim(&["tables"]));
    assert_eq!(report["passed"], true);
    assert_eq!(report["z_18"], 4);
    assert_eq!(report["tables"][0]["nu"], "000");
    assert_eq!(report["tables"][1]["nu"], "100");
    assert_eq!(
        report["tables"][0]["widths"],
        serde_json::json!([18, 6, 4, 3, 3])
    );
    assert_eq!(report["tables"][1]["levels"][2][3], "0001");
}

#[test]
fn dense_cap_override() {
    let out = Command::new(env!("CARGO_BIN_EXE_hamsim"))
        .args(["decompose", "--gen", "random:n=5,d=2"])
        .env("HAMSIM_DENSE_CAP", "16")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));

    let out = Command::new(env!("CARGO_BIN_EXE_hamsim"))
        .args(["decompose", "--gen", "random:n=5,d=2"])
        .env("HAMSIM_DENSE_CAP", "64")
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("hamsim-out-{}.json", std::process::id()));
    let out = hamsim(&["tables", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["command"], "tables");
    std::fs::remove_file(path).ok();
}
