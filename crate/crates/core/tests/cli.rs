use std::process::{Command, Output};

use serde_json::Value;

fn netctl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netctl"))
        .args(args)
        .output()
        .expect("spawn netctl")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no '{key}' in output:\n{text}"))
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn line_network_single_leader() {
    let o = netctl(&["gramian", "--gen", "line:5", "--nodes", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let lam = v["lambda_min"].as_f64().unwrap();
    assert!((lam - 2f64.powi(-8)).abs() <= 1e-12 * 2f64.powi(-8));
    assert_eq!(v["controllable"], Value::Bool(true));
}

#[test]
fn one_step_gramian_is_identity() {
    let o = netctl(&["gramian", "--gen", "circulant:3:1", "--horizon", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let w = v["W"].as_array().unwrap();
    for (i, row) in w.iter().enumerate() {
        for (j, x) in row.as_array().unwrap().iter().enumerate() {
            assert_eq!(x.as_f64().unwrap(), if i == j { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn gramian_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.json");
    let o = netctl(&["gramian", "--gen", "line:4", "--nodes", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["W"].is_array());
}

#[test]
fn missing_input_is_io_error_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.json");
    let o = netctl(&[
        "gramian",
        "--input",
        dir.path().join("absent.csv").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    assert!(o.stdout.is_empty());
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(netctl(&["gramian", "--gen", "line:0"]).status.code(), Some(2));
    assert_eq!(netctl(&["gramian", "--gen", "line:3", "--horizon", "0"]).status.code(), Some(2));
    assert_eq!(netctl(&["sweep", "--gen", "line:3"]).status.code(), Some(2));
    assert_eq!(netctl(&["gramian"]).status.code(), Some(2));
    assert_eq!(netctl(&["--help"]).status.code(), Some(0));
}

#[test]
fn min_energy_to_last_node() {
    let o = netctl(&["control", "--gen", "line:3", "--nodes", "1", "--target", "e3", "--horizon", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!((field(&text, "energy") - 16.0).abs() < 1e-10);
    assert!(field(&text, "final_error") < 1e-12);
}

#[test]
fn target_must_be_unit_norm() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("x.txt");
    std::fs::write(&target, "0.5\n0.5\n0.5\n").unwrap();
    let o = netctl(&["control", "--gen", "line:3", "--nodes", "1", "--target", target.to_str().unwrap(), "--horizon", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unit norm"));
}

#[test]
fn decoupled_control_respects_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let traj = dir.path().join("traj.csv");
    let o = netctl(&[
        "control",
        "--gen",
        "circulant:24:0.5",
        "--mode",
        "decoupled",
        "--blocks",
        "1-4;5-8;9-12;13-16;17-20;21-24",
        "--target",
        "e7",
        "--out",
        plan.to_str().unwrap(),
        "--trajectory",
        traj.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let energy = field(&text, "energy");
    let certificate = field(&text, "certificate");
    assert!(energy <= certificate);
    assert!(certificate <= field(&text, "partition_bound"));
    assert!(field(&text, "final_error") < 1e-8);

    let v: Value = serde_json::from_str(&std::fs::read_to_string(&plan).unwrap()).unwrap();
    assert_eq!(v["K"].as_array().unwrap().len(), 12);
    assert_eq!(v["cancellation_verified"], Value::Bool(true));
    let csv = std::fs::read_to_string(&traj).unwrap();
    assert!(csv.starts_with("t,x1,"));
    assert_eq!(csv.lines().count(), 1 + v["T"].as_u64().unwrap() as usize + 1);
}

#[test]
fn auto_partition_plans() {
    let o = netctl(&[
        "control",
        "--gen",
        "circulant:12:0.5",
        "--mode",
        "decoupled",
        "--auto-partition",
        "blocks=3",
        "--target",
        "e1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

fn sweep_rows(args: &[&str]) -> Vec<Vec<String>> {
    let o = netctl(args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "m,method,lambda_min,thm1_bound,thm1_mu,eq7_term1,eq7_term2,eq7_min,nodes"
    );
    lines.map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn sweep_full_set_agrees_across_methods() {
    let mut values = Vec::new();
    for method in ["brute", "alg1", "trace", "modal", "random"] {
        let rows = sweep_rows(&["sweep", "--gen", "randsym:8:0.8:0.4:3", "--method", method, "--m", "8"]);
        assert_eq!(rows.len(), 1);
        values.push(rows[0][2].parse::<f64>().unwrap());
    }
    for v in &values {
        assert!((v - values[0]).abs() <= 1e-12 * values[0], "{values:?}");
    }
}

#[test]
fn sweep_lambda_is_dominated_by_bounds() {
    for row in sweep_rows(&["sweep", "--gen", "circulant:10:0.75", "--method", "brute", "--m-range", "1..10"]) {
        let lam: f64 = row[2].parse().unwrap();
        for col in [3, 5, 6, 7] {
            let bound: f64 = row[col].parse().unwrap();
            assert!(lam <= bound + 1e-9, "{row:?}");
        }
    }
}

#[test]
fn random_sweep_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let o = netctl(&[
            "sweep",
            "--gen",
            "circulant:12:0.6",
            "--method",
            "random",
            "--m-range",
            "2..6",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn scaling_header_and_rows() {
    let o = netctl(&["scaling", "--nb", "4", "--clusters", "2..4", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "N,n_b,n,m,lambda_min_boundary,eq15_lower_bound,lambda_min_random_median"
    );
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert_eq!(r[2], r[0] * r[1]);
        assert!(r[5] <= r[4] * (1.0 + 1e-9));
    }
}

#[test]
fn reads_network_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("net.csv");
    // Directed line 1 → 2 → 3: row i lists the nodes feeding node i.
    std::fs::write(&csv, "n=3\n2,1,0.5\n3,2,0.5\n").unwrap();
    let o = netctl(&["gramian", "--input", csv.to_str().unwrap(), "--nodes", "1", "--horizon", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["lambda_min"].as_f64().unwrap() - 2f64.powi(-4)).abs() < 1e-15);

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1,2\n").unwrap();
    let o = netctl(&["gramian", "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
