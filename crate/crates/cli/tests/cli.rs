use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ehrenfest")).args(args).env_remove("EHRENFEST_CAP").output().expect("binary runs")
}

/// `run` on a whitespace-separated command line.
fn sh(line: &str) -> Output {
    run(&line.split_whitespace().collect::<Vec<_>>())
}

fn run_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ehrenfest")).args(args).env(key, value).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn exact_singleton_example() {
    let v = json(&run(&["exact", "--N", "3", "--M", "2", "--start", "1,1", "--set", "singleton:2,2", "--order", "2"]));
    assert_eq!(v["results"]["mean"]["exact"], "10");
    assert_eq!(v["results"]["variance"]["exact"], "74");
    assert_eq!(v["results"]["mean"]["approx"], 10.0);
    assert_eq!(v["request"]["N"], 3);
    assert_eq!(v["request"]["set"], "singleton:2,2");
    assert!(v["timing"].is_null());
    assert!(v.get("verdicts").is_none());
}

#[test]
fn exact_diagonal_reports_exits() {
    let v = json(&run(&["exact", "--N", "3", "--M", "2", "--start", "1,2", "--set", "diagonal"]));
    assert_eq!(v["results"]["mean"]["exact"], "2");
    let exits: Vec<&str> = v["results"]["exit_distribution"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["probability"]["exact"].as_str().unwrap())
        .collect();
    assert_eq!(exits, ["2/5", "2/5", "1/5"]);
}

#[test]
fn start_inside_target_is_trivial() {
    let v = json(&run(&[
        "exact", "--N", "3", "--M", "2", "--start", "2,2", "--set", "count:2", "--u", "1/2,3", "--lambda", "0.5",
    ]));
    assert_eq!(v["results"]["mean"]["exact"], "0");
    for t in v["results"]["transforms"].as_array().unwrap() {
        assert_eq!(t["approx"], 1.0);
    }
}

#[test]
fn oracle_mirrors_exact_on_symmetric_sets() {
    for set in ["singleton:2,2,1", "pair:(1,1,1);(2,2,2)", "diagonal", "count:1", "distinct"] {
        let args = ["--N", "3", "--M", "3", "--start", "1,1,2", "--set", set, "--order", "4", "--u", "1/2,1,2"];
        let e = json(&run(&[&["exact"], &args[..]].concat()));
        let o = json(&run(&[&["oracle"], &args[..]].concat()));
        for key in ["mean", "variance", "raw_moments", "ctmc", "transforms"] {
            assert_eq!(e["results"][key], o["results"][key], "{set}: {key}");
        }
        if !e["results"]["exit_distribution"].is_null() {
            assert_eq!(e["results"]["exit_distribution"], o["results"]["exit_distribution"], "{set}");
        }
    }
}

#[test]
fn non_symmetric_set_split() {
    let args = ["--N", "2", "--M", "2", "--start", "2,1", "--set", "explicit:[[1,1],[2,2],[1,2]]"];
    let out = run(&[&["exact"], &args[..]].concat());
    assert_eq!(code(&out), 3);
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "not-symmetric");
    assert!(err["error"]["message"].as_str().unwrap().contains("profile"));
    let v = json(&run(&[&["oracle"], &args[..]].concat()));
    assert_eq!(v["results"]["method"], "oracle");
}

#[test]
fn explicit_set_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("set.json");
    std::fs::write(&path, "[[1,1],[2,2],[3,3]]").unwrap();
    let set = format!("explicit:@{}", path.display());
    let v = json(&run(&["exact", "--N", "3", "--M", "2", "--start", "1,2", "--set", &set]));
    assert_eq!(v["results"]["mean"]["exact"], "2");
}

#[test]
fn cap_exceeded_and_env_override() {
    let args = ["oracle", "--N", "4", "--M", "10", "--start", "1,1,1,1,1,1,1,1,1,1", "--set", "diagonal"];
    let out = run(&args);
    assert_eq!(code(&out), 4);
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("1048576") && msg.contains("2000"), "{msg}");

    let small = ["oracle", "--N", "3", "--M", "3", "--start", "1,1,1", "--set", "diagonal"];
    assert_eq!(code(&run_env(&small, "EHRENFEST_CAP", "10")), 4);
    assert_eq!(code(&run_env(&small, "EHRENFEST_CAP", "27")), 0);
}

#[test]
fn usage_errors_exit_2() {
    let cases: [&[&str]; 6] = [
        &["exact", "--N", "3"],
        &["exact", "--N", "3", "--M", "2", "--start", "1,4", "--set", "diagonal"],
        &["exact", "--N", "3", "--M", "2", "--start", "1,1", "--set", "bogus"],
        &["exact", "--N", "3", "--M", "2", "--start", "1,1", "--set", "diagonal", "--order", "0"],
        &["exact", "--N", "3", "--M", "2", "--start", "1,1", "--set", "diagonal", "--u", "-1"],
        &["simulate", "--N", "3", "--M", "2", "--start", "1,1", "--set", "diagonal", "--u", "1"],
    ];
    for args in cases {
        assert_eq!(code(&run(args)), 2, "{args:?}");
    }
}

#[test]
fn simulate_is_reproducible() {
    let line = "simulate --N 3 --M 2 --start 1,1 --set singleton:2,2 --replicas 20000 --seed 17 --lambda 0.1,0.5,1";
    let a = sh(line);
    let b = sh(line);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = sh(&format!("{line} --workers 3"));
    assert_eq!(a.stdout, c.stdout);
    let v = json(&a);
    let sim = &v["results"]["simulation"];
    assert_eq!(sim["seed"], 17);
    assert_eq!(sim["replicas"], 20000);
    assert_eq!(sim["truncated"], 0);
    assert_eq!(sim["transforms"].as_array().unwrap().len(), 3);
}

#[test]
fn simulate_ctmc_mean_is_scaled() {
    let v = json(&sh("simulate --N 3 --M 2 --start 1,1 --set singleton:2,2 --mode ctmc --replicas 100000 --seed 3"));
    let sim = &v["results"]["simulation"];
    let (mean, se) = (sim["mean"].as_f64().unwrap(), sim["stderr"].as_f64().unwrap());
    assert!((mean - 5.0).abs() <= 4.0 * se, "{mean} ± {se}");
}

#[test]
fn compare_grid_passes() {
    for n in ["2", "3"] {
        for m in ["1", "2", "3"] {
            for mode in ["discrete", "ctmc"] {
                let out = run(&["compare", "--N", n, "--M", m, "--mode", mode, "--replicas", "40000"]);
                assert_eq!(code(&out), 0, "N={n} M={m} {mode}: {}", String::from_utf8_lossy(&out.stderr));
                let v: Value = serde_json::from_slice(&out.stdout).unwrap();
                let verdicts = v["verdicts"].as_array().unwrap();
                assert!(verdicts.iter().all(|r| r["verdict"] == "pass"));
                assert!(verdicts.iter().any(|r| r["quantity"].as_str().unwrap().starts_with("commute")));
            }
        }
    }
}

#[test]
fn corrupted_engine_is_caught() {
    let out = sh("compare --N 3 --M 2 --start 1,2 --set diagonal --replicas 1000 --corrupt-engine");
    assert_eq!(code(&out), 5);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["verdicts"].as_array().unwrap().iter().any(|r| r["verdict"] == "fail"));
}

#[test]
fn network_check_pinned() {
    let v = json(&run(&["network-check", "--N", "3", "--M", "2", "--h", "0", "--k", "2"]));
    assert_eq!(v["results"]["pairs"][0]["lhs"], "27/2");
    assert_eq!(v["results"]["pairs"][0]["rhs"], "27/2");
    assert_eq!(code(&run(&["network-check", "--N", "3", "--M", "2", "--h", "2", "--k", "1"])), 2);
    let all = json(&run(&["network-check", "--N", "2", "--M", "4"]));
    assert_eq!(all["verdicts"].as_array().unwrap().len(), 10);
}

#[test]
fn identities_pass() {
    for (n, m) in [("2", "3"), ("4", "5"), ("6", "8")] {
        let v = json(&run(&["identities", "--N", n, "--M", m]));
        assert_eq!(v["results"]["failures"], 0);
    }
}

#[test]
fn csv_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let out = sh(&format!("exact --N 3 --M 2 --start 1,1 --set count:2 --format csv --out {}", path.display()));
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "case,quantity,exact,oracle,mc_mean,mc_stderr,verdict");
    assert!(text.contains(",mean,10,"));
}

#[test]
fn timing_is_opt_in() {
    let args = ["exact", "--N", "2", "--M", "2", "--start", "1,1", "--set", "singleton:2,2"];
    assert!(json(&run(&args))["timing"].is_null());
    let timed = json(&run(&[&args[..], &["--timing"]].concat()));
    assert!(timed["timing"]["elapsed_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn lambda_precision_flag() {
    let v = json(&sh("exact --N 3 --M 1 --start 1 --set singleton:2 --lambda 0.6931471805599453 --digits 8"));
    let t = &v["results"]["transforms"][0];
    assert_eq!(t["domain"], "lambda");
    assert_eq!(t["display"], "3.3333333e-1");
}
