use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ftspanner::Spanner;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ftspanner"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &TempDir, kind: &str, n: usize, dim: usize, seed: u64, name: &str) -> PathBuf {
    let out = path(dir, name);
    let o = run(&[
        "gen",
        "--kind",
        kind,
        "--n",
        &n.to_string(),
        "--dim",
        &dim.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn build(points: &Path, out: &Path, eps: &str, k: &str) -> Output {
    run(&[
        "build",
        "--in",
        s(points),
        "--eps",
        eps,
        "--k",
        k,
        "--out",
        s(out),
    ])
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn gen_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = gen(&dir, "uniform-cube", 10, 2, 7, "a.csv");
    let b = gen(&dir, "uniform-cube", 10, 2, 7, "b.csv");
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.lines().all(|l| l.split(',').count() == 2));
}

#[test]
fn gen_exp_spread_doubles_gaps() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "exp-spread-line", 8, 1, 0, "e.csv");
    let xs: Vec<f64> = fs::read_to_string(&p)
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(xs, vec![0.0, 2.0, 6.0, 14.0, 30.0, 62.0, 126.0, 254.0]);
}

#[test]
fn gen_single_point_and_json() {
    let dir = TempDir::new().unwrap();
    let p = gen(&dir, "clustered", 1, 3, 4, "one.csv");
    assert_eq!(fs::read_to_string(&p).unwrap().lines().count(), 1);
    let j = gen(&dir, "clustered", 5, 3, 4, "five.json");
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(j).unwrap()).unwrap();
    assert_eq!(v["dim"], 3);
    assert_eq!(v["points"].as_array().unwrap().len(), 5);
}

#[test]
fn bad_flags_print_usage() {
    let o = run(&["gen", "--kind", "spiral", "--n", "3", "--out", "x.csv"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid value"));
    let o = run(&["build", "-k", "1"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn build_two_points() {
    let dir = TempDir::new().unwrap();
    let pts = path(&dir, "two.csv");
    fs::write(&pts, "0,0\n3,4\n").unwrap();
    let out = path(&dir, "h.csv");
    let o = run(&[
        "build",
        "--in",
        s(&pts),
        "--eps",
        "0.3",
        "--k",
        "0",
        "--out",
        s(&out),
        "--exhaustive-verify",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stats = json(&o);
    assert_eq!(stats["schema"], 1);
    assert_eq!(stats["edges"], 1);
    assert_eq!(stats["hopDiameterAt"], 1);
    let h = Spanner::from_csv(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(h.get(0, 1).unwrap().weight, 5.0);
}

#[test]
fn build_rejects_bad_parameters() {
    let dir = TempDir::new().unwrap();
    let pts = gen(&dir, "uniform-cube", 6, 2, 1, "p.csv");
    let out = path(&dir, "h.csv");
    let o = build(&pts, &out, "0.7", "1");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eps"));
    let o = build(&pts, &out, "0.3", "5");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("k <= n - 2"));
}

#[test]
fn build_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let pts = gen(&dir, "clustered", 30, 2, 9, "p.csv");
    let (a, b) = (path(&dir, "a.csv"), path(&dir, "b.csv"));
    let mut sa = json(&build(&pts, &a, "0.25", "2"));
    let mut sb = json(&build(&pts, &b, "0.25", "2"));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    sa.as_object_mut().unwrap().remove("buildMillis");
    sb.as_object_mut().unwrap().remove("buildMillis");
    assert_eq!(sa, sb);
}

#[test]
fn verify_fresh_and_mutated() {
    let dir = TempDir::new().unwrap();
    let pts = gen(&dir, "uniform-cube", 12, 2, 3, "p.csv");
    let h = path(&dir, "h.csv");
    assert!(build(&pts, &h, "0.3", "1").status.success());
    let verify = |sp: &Path, extra: &[&str]| {
        let mut args = vec![
            "verify",
            "--points",
            s(&pts),
            "--spanner",
            s(sp),
            "--eps",
            "0.3",
            "--k",
            "1",
        ];
        args.extend_from_slice(extra);
        run(&args)
    };
    let o = verify(&h, &["--lemmas", "--jobs", "2"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    assert_eq!(json(&o)["passed"], true);

    // drop the shortest edges one by one until stretch breaks
    let mut sp = Spanner::from_csv(&fs::read_to_string(&h).unwrap()).unwrap();
    let mut order: Vec<(f64, usize, usize)> =
        sp.edges().map(|(u, v, e)| (e.weight, u, v)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let broken = path(&dir, "broken.csv");
    let mut code = Some(0);
    for (_, u, v) in order {
        sp.remove(u, v);
        fs::write(&broken, sp.to_csv()).unwrap();
        let o = verify(&broken, &["--mode", "exhaustive"]);
        code = o.status.code();
        if code == Some(1) {
            let report = json(&o);
            assert_eq!(report["passed"], false);
            assert!(
                report["report"]["stretch"]["witness"].is_object()
                    || !report["report"]["violations"]
                        .as_array()
                        .unwrap()
                        .is_empty()
            );
            break;
        }
    }
    assert_eq!(code, Some(1));

    let empty = path(&dir, "empty.csv");
    fs::write(&empty, Spanner::new(12).to_csv()).unwrap();
    let o = verify(&empty, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("disconnected"));

    let wrong = path(&dir, "wrong.csv");
    fs::write(&wrong, Spanner::new(11).to_csv()).unwrap();
    let o = verify(&wrong, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n=11"));
}

#[test]
fn export_round_trip_and_stats() {
    let dir = TempDir::new().unwrap();
    let pts = gen(&dir, "uniform-cube", 15, 2, 5, "p.csv");
    let h = path(&dir, "h.csv");
    assert!(build(&pts, &h, "0.4", "1").status.success());
    let (j, back, dot) = (
        path(&dir, "h.json"),
        path(&dir, "back.csv"),
        path(&dir, "h.dot"),
    );
    assert!(run(&["export", "--in", s(&h), "--out", s(&j)])
        .status
        .success());
    assert!(run(&["export", "--in", s(&j), "--out", s(&back)])
        .status
        .success());
    assert_eq!(fs::read(&h).unwrap(), fs::read(&back).unwrap());
    assert!(run(&["export", "--in", s(&h), "--out", s(&dot)])
        .status
        .success());
    assert!(fs::read_to_string(&dot).unwrap().starts_with("graph"));

    let o = run(&[
        "stats",
        "--points",
        s(&pts),
        "--spanner",
        s(&j),
        "--eps",
        "0.4",
        "--k",
        "1",
    ]);
    assert!(o.status.success());
    let st = json(&o);
    assert_eq!(st["n"], 15);
    assert!(st.get("buildMillis").is_none());
    assert!(st["lightness"].as_f64().unwrap() >= 1.0);
}

#[test]
fn color_sets_match_net_colors() {
    let pts: Vec<Vec<f64>> = (0..10)
        .map(|i| vec![i as f64, (i * i % 7) as f64])
        .collect();
    let ms = ftspanner::MetricSpace::from_points(&pts).unwrap();
    let sets = ftspanner::cli::color_failure_sets(&ms, 2);
    assert!(!sets.is_empty());
    assert!(sets.iter().all(|s| s.len() == 2 && s[0] < s[1]));
    assert!(ftspanner::cli::color_failure_sets(&ms, 0).is_empty());
}
