use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_graphmetric"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn graphmetric")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_binary_oracle_exits_zero() {
    let o = run(&["verify", "--law", "binary-oracle", "--trials", "100", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("PASS"));
}

#[test]
fn every_law_suite_passes_from_the_command_line() {
    for law in ["axioms", "monotone-edge", "monotone-weight", "union", "sandwich"] {
        let o = run(&["verify", "--law", law, "--trials", "200", "--seed", "3", "--format", "json"]);
        assert_eq!(o.status.code(), Some(0), "{law}");
        let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(report["failed"], 0);
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["verify", "--law", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["dist", "--unknown-flag"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["generate", "--kind", "chain"]).status.code(), Some(2));
}

#[test]
fn json_errors_go_to_stderr() {
    let o = run(&["dist", "--graph", "/nonexistent/g.json", "--points", "/nonexistent/p.csv", "--format", "json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "usage");
    assert!(err["message"].as_str().unwrap().contains("/nonexistent/g.json"));

    let o = run(&["verify", "--law", "nope", "--format", "json"]);
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "usage");
}

#[test]
fn dist_on_identical_pairs_prints_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    let p = dir.path().join("p.csv");
    assert!(run(&["generate", "--kind", "complete", "--n", "3", "--out", path(&g)]).status.success());
    std::fs::write(&p, "0.1,0.5,0.9\n0.1,0.5,0.9\n# next\n1,0,0.25\n1,0,0.25\n").unwrap();
    let o = run(&["dist", "--graph", path(&g), "--points", path(&p)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "0\n0\n");
}

#[test]
fn dist_matches_the_hand_computed_pair() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    let p = dir.path().join("p.csv");
    std::fs::write(&p, "0,1\n1,0\n").unwrap();
    for (kind, expected) in [("complete", "0.75"), ("null", "0.5")] {
        assert!(run(&["generate", "--kind", kind, "--n", "2", "--out", path(&g)]).status.success());
        let o = run(&["dist", "--graph", path(&g), "--points", path(&p)]);
        assert_eq!(stdout(&o).trim(), expected, "{kind}");
    }
}

#[test]
fn figure_4a_mass_sits_on_multiples_of_an_eighth() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["reproduce-figure", "--id", "4A", "--out", path(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("fig-4A.csv")).unwrap();
    assert!(dir.path().join("fig-4A.svg").exists());
    let mut counts = Vec::new();
    for line in csv.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let (lo, hi, c): (f64, f64, u64) = (cells[0].parse().unwrap(), cells[1].parse().unwrap(), cells[2].parse().unwrap());
        if c > 0 {
            let k = (0..=8).find(|k| lo <= *k as f64 / 8.0 && (*k as f64 / 8.0) <= hi);
            assert!(k.is_some(), "mass in [{lo}, {hi}] holds no multiple of 1/8");
            counts.push(c);
        }
    }
    // binomial weight distribution over 256 difference vectors, 256 times each
    assert_eq!(counts, vec![256, 2048, 7168, 14336, 17920, 14336, 7168, 2048, 256]);
}

#[test]
fn outputs_are_byte_identical_under_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("ws.json");
    let gen = |out: &Path| {
        run(&["generate", "--kind", "watts-strogatz", "--n", "30", "--k", "4", "--beta", "0.3", "--seed", "9", "--out", path(out)])
    };
    assert!(gen(&g).status.success());
    let g2 = dir.path().join("ws2.json");
    assert!(gen(&g2).status.success());
    assert_eq!(std::fs::read(&g).unwrap(), std::fs::read(&g2).unwrap());

    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("hist-{threads}.csv"));
        let o = bin()
            .env("GRAPHMETRIC_THREADS", threads)
            .args(["experiment", "--graph", path(&g), "--quantity", "log-ratio", "--pairs", "9000", "--seed", "4"])
            .args(["--out", path(&out)])
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);

    let fig = |sub: &str| {
        let d = dir.path().join(sub);
        assert!(run(&["reproduce-figure", "--id", "1C", "--pairs", "5000", "--seed", "2", "--out", path(&d)]).status.success());
        std::fs::read(d.join("fig-1C.csv")).unwrap()
    };
    assert_eq!(fig("a"), fig("b"));
}

#[test]
fn union_and_product_print_json_records() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let p = dir.path().join("p.csv");
    assert!(run(&["generate", "--kind", "complete", "--n", "2", "--out", path(&a)]).status.success());
    assert!(run(&["generate", "--kind", "chain", "--n", "3", "--out", path(&b)]).status.success());
    std::fs::write(&p, "0,1,0.2,0.4,0.6\n1,0,0.9,0.1,0.6\n").unwrap();
    let o = run(&["union", "--graph", path(&a), "--graph", path(&b), "--points", path(&p)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let records: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let (lhs, rhs) = (records[0]["lhs"].as_f64().unwrap(), records[0]["rhs"].as_f64().unwrap());
    assert!((lhs - rhs).abs() < 1e-12);

    let o = run(&["product", "--left", path(&a), "--right", path(&a)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let record: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(record["n"], 4);
    assert_eq!(record["non_self_edges"], 8);
}

#[test]
fn graphon_grid_recovers_the_constant_case() {
    let o = run(&["graphon", "--constant", "1", "--g", "0.2", "--h", "0.8", "--mode", "grid", "--resolution", "16"]);
    assert!(o.status.success());
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 0.3).abs() < 1e-10);
}
