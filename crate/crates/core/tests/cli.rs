use std::path::Path;
use std::process::{Command, Output};

use heatframe::geometry::make_jacobi_space;
use heatframe::jacobi::JacobiParams;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heatframe"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn arg(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn verify_defaults_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("summary.json");
    let res = run(&["verify", "--out", arg(&out)]);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
    for s in json["summaries"].as_array().unwrap() {
        assert_eq!(s["pass_rate"], 1.0, "{}", s["check_id"]);
    }
}

#[test]
fn verify_is_byte_identical_for_same_seed() {
    let a = run(&["verify", "--gamma", "0.5", "--alpha", "-0.3", "--seed", "7"]);
    let b = run(&["verify", "--gamma", "0.5", "--alpha", "-0.3", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn too_few_nodes_exit_two() {
    let res = run(&["verify", "--nodes", "2"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).starts_with("heatframe: "));
    assert_eq!(run(&["kernel", "--t", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--gamma", "-1.5"]).status.code(), Some(2));
}

#[test]
fn wide_net_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("net.csv");
    let res = run(&[
        "net",
        "--delta",
        "10",
        "--nodes",
        "32",
        "--degree",
        "20",
        "--out",
        arg(&out),
    ]);
    assert_eq!(res.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert_eq!(text.lines().next().unwrap(), "center,point,cell_mass");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap())
            .unwrap();
    assert_eq!(json["centers"].as_array().unwrap().len(), 1);
}

#[test]
fn kernel_rows_integrate_to_one() {
    let res = run(&[
        "kernel", "--gamma", "0.5", "--alpha", "-0.3", "--nodes", "32", "--degree", "24", "--t",
        "0.1",
    ]);
    assert_eq!(res.status.code(), Some(0));
    let space = make_jacobi_space(JacobiParams::new(0.5, -0.3).unwrap(), 32).unwrap();
    let mut rows = vec![0.0; 32];
    let mut reader = csv::Reader::from_reader(res.stdout.as_slice());
    for rec in reader.records() {
        let rec = rec.unwrap();
        let x: usize = rec[0].parse().unwrap();
        let y: usize = rec[1].parse().unwrap();
        let v: f64 = rec[2].parse().unwrap();
        rows[x] += space.weights()[y] * v;
    }
    assert!(rows.iter().all(|s| (s - 1.0).abs() < 1e-8), "{rows:?}");
}

#[test]
fn constant_function_decomposes_into_one_block() {
    let res = run(&[
        "decompose",
        "--nodes",
        "32",
        "--degree",
        "20",
        "--coeffs",
        "1",
    ]);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let mut reader = csv::Reader::from_reader(res.stdout.as_slice());
    let mut nonzero_blocks = std::collections::BTreeSet::new();
    for rec in reader.records() {
        let rec = rec.unwrap();
        let c: f64 = rec[2].parse().unwrap();
        if c.abs() > 1e-12 {
            nonzero_blocks.insert(rec[0].to_string());
        }
    }
    assert_eq!(nonzero_blocks.into_iter().collect::<Vec<_>>(), ["0"]);
}
