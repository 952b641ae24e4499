use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_spectral-embed")
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], config: &Path, out: Option<&Path>) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args).arg("--config").arg(config).env_remove("SPECTRAL_EMBED_THREADS");
    if let Some(o) = out {
        cmd.arg("--out").arg(o);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Data rows of a CSV written by the tool, comment lines dropped.
fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let body: String = text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
    let mut r = csv::Reader::from_reader(body.as_bytes());
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn interval_spectrum_lists_squares() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "a.cfg", "space=interval\nnodes=65\nmodes=12\n");
    let out = dir.path().join("spec.csv");
    let o = run(&["spectrum"], &cfg, Some(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# config_hash=") && first.contains("tail_bound="), "{first}");
    assert!(text.contains("# orthonormality_defect="));
    let lambdas: Vec<f64> = rows(&out).iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(&lambdas[..4], &[0.0, 1.0, 4.0, 9.0]);
}

#[test]
fn output_is_deterministic_across_threads() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "e.cfg",
        "space=pointcloud\nsample=circle:200\nbandwidth=0.25\nknn=12\nmodes=12\nt=0.2\nlevel=7\nseed=11\n",
    );
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let oa = run(&["embed", "--threads", "1"], &cfg, Some(&a));
    let ob = run(&["embed", "--threads", "4"], &cfg, Some(&b));
    assert!(oa.status.success() && ob.status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(stdout(&oa), stdout(&ob));
}

#[test]
fn seed_flag_changes_sampled_cloud() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "p.cfg", "space=pointcloud\nsample=circle:150\nbandwidth=0.3\nknn=10\nmodes=6\n");
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert!(run(&["spectrum", "--seed", "1"], &cfg, Some(&a)).status.success());
    assert!(run(&["spectrum", "--seed", "2"], &cfg, Some(&b)).status.success());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn pointcloud_spectrum_reports_calibration() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "p.cfg",
        "space=pointcloud\nsample=circle:300\nbandwidth=0.2\nknn=15\nmodes=9\ncalibration=first_nonzero:1\nseed=3\n",
    );
    let out = dir.path().join("s.csv");
    let o = run(&["spectrum"], &cfg, Some(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let line = text.lines().find(|l| l.starts_with("# calibration_factor=")).unwrap();
    let c: f64 = line.trim_start_matches("# calibration_factor=").parse().unwrap();
    assert!(c > 0.0 && c.is_finite());
    let lambdas: Vec<f64> = rows(&out).iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(lambdas[0].abs() < 1e-8);
    assert!((lambdas[1] - 1.0).abs() < 1e-12);
    // the sampled circle keeps the paired pattern 0 | 1, 1 | 4, 4 | 9, 9
    assert!(lambdas[2] < 1.5);
    assert!(lambdas[3] > 3.0 && lambdas[4] < 5.5);
    assert!(lambdas[5] > 7.0);
}

#[test]
fn empty_or_missing_config_exits_2() {
    let dir = TempDir::new().unwrap();
    let empty = write_config(&dir, "empty.cfg", "# nothing here\n");
    assert_eq!(run(&["spectrum"], &empty, None).status.code(), Some(2));
    let missing = dir.path().join("nope.cfg");
    assert_eq!(run(&["dim"], &missing, None).status.code(), Some(2));
    let bad = write_config(&dir, "bad.cfg", "space=sphere\n");
    assert_eq!(run(&["spectrum"], &bad, None).status.code(), Some(2));
    let no_flag = Command::new(bin()).arg("spectrum").output().unwrap();
    assert_eq!(no_flag.status.code(), Some(2));
}

#[test]
fn unreachable_tolerance_exits_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.cfg", "space=circle\nnodes=64\nmodes=21\nt_grid=1e-3,1e-4\ntol=1e-12\n");
    let o = run(&["converge"], &cfg, None);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn converge_reports_circle_limit() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.cfg", "space=circle\nnodes=1024\nmodes=2001\nt_grid=1e-2,1e-3\nlaw=tilde\n");
    let out = dir.path().join("c.csv");
    let o = run(&["converge"], &cfg, Some(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("limit estimate 0.3133"), "{s}");
    let r = rows(&out);
    assert_eq!(r.len(), 2);
    let est: f64 = r[1][5].parse().unwrap();
    assert!((est - (2.0 * std::f64::consts::PI).sqrt() / 8.0).abs() < 1e-6);
}

#[test]
fn truncate_large_eps_needs_one_mode() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "t.cfg", "space=circle\nnodes=64\nt=0.1\neps=10\nlevel_grid=1..5\n");
    let out = dir.path().join("t.csv");
    let o = run(&["truncate"], &cfg, Some(&out));
    assert!(o.status.success());
    assert!(stdout(&o).contains("N0=1 "), "{}", stdout(&o));
    assert_eq!(rows(&out).len(), 5);
}

#[test]
fn truncate_without_n0_exits_4() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "t.cfg", "space=circle\nnodes=64\nt=0.01\neps=1e-9\nlevel_grid=1..3\n");
    assert_eq!(run(&["truncate"], &cfg, None).status.code(), Some(4));
}

#[test]
fn embed_compares_ring_with_circle() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "e.cfg",
        "space=circle\nnodes=256\nt=0.1\nlevel=21\ncompare.space=ring\ncompare.nodes=256\n",
    );
    let out = dir.path().join("e.csv");
    let o = run(&["embed"], &cfg, Some(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let line = text.lines().find(|l| l.starts_with("# hausdorff=")).unwrap();
    let h: f64 = line["# hausdorff=".len()..].split(' ').next().unwrap().parse().unwrap();
    assert!(h < 1e-2, "{h}");
    let r = rows(&out);
    assert_eq!(r.len(), 256);
    assert_eq!(r[0].len(), 22);
}

#[test]
fn dim_and_bounds_on_the_circle() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "d.cfg", "space=circle\nnodes=64\nmodes=2001\npairs=100\n");
    let o = run(&["dim"], &cfg, None);
    assert!(o.status.success());
    let s = stdout(&o);
    let d: f64 = s.split("dimension ").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!((d - 1.0).abs() < 0.05, "{s}");
    let out = dir.path().join("b.csv");
    let o = run(&["bounds"], &cfg, Some(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&out);
    let get = |k: &str| -> f64 { r.iter().find(|row| row[0] == k).unwrap()[1].parse().unwrap() };
    assert!(get("C1").is_finite() && get("C2") >= 0.0);
    assert!(get("gaussian_violation") <= 1.0 + 1e-9);
}

#[test]
fn collapse_reports_quadratic_ratio() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "k.cfg", "r=0.05\n");
    let out = dir.path().join("k.csv");
    let o = run(&["collapse"], &cfg, Some(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    let ratio: f64 = s.split("ratio ").nth(1).unwrap().trim().parse().unwrap();
    assert!(ratio > 1.0 && ratio < 3.0, "{s}");
    assert_eq!(rows(&out).len(), 10);
}
