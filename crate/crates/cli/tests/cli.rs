use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_structsolve"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("one JSON object")
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("structsolve-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn without_time(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_time_ms");
    v
}

#[test]
fn noiseless_ar2_matches_oracle() {
    let input = fixture("ar2_noiseless.csv");
    let r = json(&["ar", "--input", &input, "--d", "2", "--eps", "0.5", "--seed", "1", "--exact", "--json"]);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["solver"], "ar");
    assert!(r["ratio"].as_f64().unwrap() <= 1.0 + 1e-6);
    let x: Vec<f64> = r["x"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!((x[0] - 2.0 * 0.4f64.cos()).abs() < 1e-6 && (x[1] + 1.0).abs() < 1e-6);
    assert!(r["matvec_count"].as_u64().unwrap() > 0);
}

#[test]
fn pad_origin_zero_adds_a_row() {
    let input = fixture("ar2_noiseless.csv");
    let plain = json(&["ar", "--input", &input, "--d", "2", "--json"]);
    let padded = json(&["ar", "--input", &input, "--d", "2", "--pad-origin-zero", "--json"]);
    assert_eq!(padded["n"].as_u64().unwrap(), plain["n"].as_u64().unwrap() + 1);
}

#[test]
fn poly2_fixture_ratio_and_reads() {
    let (pts, tgt) = (fixture("poly2_points.csv"), fixture("poly2_target.csv"));
    let r = json(&["poly2", "--input", &pts, "--target", &tgt, "--d", "3", "--exact", "--seed", "4", "--json"]);
    assert!(r["ratio"].as_f64().unwrap() <= 1.5);
    let reads = r["b_read_count"].as_u64().unwrap();
    assert!(reads > 0 && reads < 64 * 16);
    assert_eq!(r["p"], 4);
    assert_eq!(r["kernel"], "poly2");
}

#[test]
fn exact_flag_leaves_the_randomized_result_alone() {
    let (pts, tgt) = (fixture("poly2_points.csv"), fixture("poly2_target.csv"));
    let base = ["poly2", "--input", &pts, "--target", &tgt, "--d", "3", "--seed", "9", "--json"];
    let plain = json(&base);
    let mut with_exact = base.to_vec();
    with_exact.push("--exact");
    let exact = json(&with_exact);
    assert_eq!(plain["x"], exact["x"]);
    assert_eq!(plain["sampled"], exact["sampled"]);
    assert!(plain["oracle"].is_null() && !exact["oracle"].is_null());
}

#[test]
fn reports_repeat_modulo_wall_time() {
    let input = fixture("ar2_noiseless.csv");
    let args = ["dyn", "--input", &input, "--d", "3", "--h", "0.5", "--seed", "7", "--json"];
    assert_eq!(without_time(json(&args)), without_time(json(&args)));
    let (pts, tgt) = (fixture("poly2_points.csv"), fixture("poly2_target.csv"));
    let args = ["poly2", "--input", &pts, "--target", &tgt, "--d", "3", "--seed", "7", "--json"];
    assert_eq!(without_time(json(&args)), without_time(json(&args)));
}

#[test]
fn bench_counts_are_bounded_and_nondecreasing() {
    let r = json(&["bench", "--solver", "ar", "--n", "1024,2048,4096", "--d", "8", "--json"]);
    let runs = r["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 3);
    let mut last = 0;
    for run in runs {
        let count = run["matvec_count"].as_u64().unwrap();
        assert!(count >= last);
        assert!(count <= run["matvec_bound"].as_u64().unwrap());
        last = count;
    }
}

#[test]
fn bench_text_has_a_matvec_column() {
    let out = run(&["bench", "--solver", "l2", "--n", "512,1024", "--d", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("matvec_count"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn l2_lp_and_lowrank_on_csv() {
    let mut system = String::from("# a1,a2,b\n");
    let mut matrix = String::new();
    for i in 0..300 {
        let t = i as f64;
        let (a1, a2) = ((0.37 * t).sin(), (0.11 * t).cos());
        let noise = 0.05 * (1.7 * t).sin();
        system.push_str(&format!("{a1},{a2},{}\n", 2.0 * a1 - a2 + noise));
    }
    for i in 0..40 {
        let row: Vec<String> = (0..12).map(|j| format!("{}", ((i * j) as f64 * 0.3).sin() + 0.01 * j as f64)).collect();
        matrix.push_str(&row.join(","));
        matrix.push('\n');
    }
    let sys = temp_file("system.csv", &system);
    let sys = sys.to_str().unwrap();
    let l2 = json(&["l2", "--input", sys, "--exact", "--json"]);
    assert!(l2["ratio"].as_f64().unwrap() <= 1.5);
    for p in ["1", "1.5", "3"] {
        let lp = json(&["lp", "--input", sys, "--p-norm", p, "--exact", "--json"]);
        assert!(lp["ratio"].as_f64().unwrap() <= 1.5, "p={p}");
        assert_eq!(lp["p_norm"].as_f64().unwrap(), p.parse::<f64>().unwrap());
    }
    let m = temp_file("matrix.csv", &matrix);
    let lr = json(&["lowrank", "--input", m.to_str().unwrap(), "--rank", "3", "--exact", "--json"]);
    assert!(lr["fit"].as_f64().unwrap() >= 0.0);
    assert!(lr["ratio"].as_f64().unwrap() >= 1.0 - 1e-9);
}

#[test]
fn kernel_ar_counts_and_oracle() {
    let pts = fixture("poly2_points.csv");
    let r = json(&["kernel-ar", "--input", &pts, "--d", "3", "--kernel", "poly3+1", "--exact", "--json"]);
    assert_eq!(r["kernel"], "poly3+1");
    // 66 points, d = 3: blocks use the first 65, band pairs 3 * 65 - 3
    let n = r["n"].as_u64().unwrap();
    assert_eq!(n, 63);
    assert_eq!(r["kernel_eval_count"].as_u64().unwrap(), (3 * 65 - 3) + 4 * n);
    assert!((r["ratio"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn malformed_csv_is_an_input_error_with_line() {
    let bad = temp_file("bad.csv", "1.0\n2.0\n# note\nthree\n4.0\n");
    let out = run(&["ar", "--input", bad.to_str().unwrap(), "--d", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn missing_flag_prints_usage() {
    let out = run(&["lp", "--input", "x.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn config_overrides_and_rejects_unknown_keys() {
    let input = fixture("ar2_noiseless.csv");
    let good = temp_file("good.cfg", "# larger samples\nc_s = 8\n\nmatvec_budget=20\n");
    let r = json(&["ar", "--input", &input, "--d", "2", "--config", good.to_str().unwrap(), "--json"]);
    assert_eq!(r["solver"], "ar");
    let bad = temp_file("bad.cfg", "c_s=8\nnot_a_key=1\n");
    let out = run(&["ar", "--input", &input, "--d", "2", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn strict_turns_flags_into_exit_three() {
    let mut system = String::new();
    for i in 0..200 {
        let a = (0.3 * i as f64).sin();
        system.push_str(&format!("{a},{a},{}\n", 3.0 * a + 0.01 * (i % 7) as f64));
    }
    let sys = temp_file("collinear.csv", &system);
    let sys = sys.to_str().unwrap();
    let lenient = json(&["l2", "--input", sys, "--json"]);
    assert!(lenient["flags"].as_array().unwrap().iter().any(|f| f == "rank_deficient"));
    let out = run(&["l2", "--input", sys, "--strict", "--json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn underdetermined_and_bad_kernel_are_input_errors() {
    let input = fixture("ar2_noiseless.csv");
    assert_eq!(run(&["ar", "--input", &input, "--d", "500"]).status.code(), Some(2));
    let pts = fixture("poly2_points.csv");
    assert_eq!(run(&["kernel-ar", "--input", &pts, "--d", "2", "--kernel", "rbf"]).status.code(), Some(2));
    assert_eq!(run(&["dyn", "--input", &input, "--d", "3", "--h", "-1"]).status.code(), Some(2));
}
