use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypersym"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, text: &str) -> PathBuf {
    let p = dir.path().join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p
}

fn read(p: PathBuf) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn analyze_model_system() {
    let dir = TempDir::new().unwrap();
    let out = run(&["analyze"], &data("analyze_la.cfg"), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = read(dir.path().join("analyze.txt"));
    assert!(rep.starts_with("# hypersym "));
    assert!(rep.contains("# config-sha256: "));
    assert!(rep.contains("# seed: 7"));
    assert!(rep.contains("transversally strictly hyperbolic: true"));
    assert!(rep.contains("neither involutive nor symplectic"));
    assert!(rep.contains("multiplicity: 3"));
}

#[test]
fn jordan_block_is_a_violation() {
    let dir = TempDir::new().unwrap();
    let out = run(&["analyze"], &data("analyze_jordan.cfg"), dir.path());
    assert_eq!(out.status.code(), Some(2));
    let rep = read(dir.path().join("analyze.txt"));
    assert!(rep.contains("semisimplicity violation"));
}

#[test]
fn missing_system_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "system = nowhere.sys\n");
    let out = run(&["analyze"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not exist"));
}

#[test]
fn parse_error_reports_position() {
    let dir = TempDir::new().unwrap();
    let sys = dir.path().join("bad.sys");
    std::fs::write(&sys, "dimension = 2\n[A1]\n1, 2\n3, @\n").unwrap();
    let cfg = write_config(&dir, &format!("system = {}\n", sys.display()));
    let out = run(&["analyze"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.sys"));
}

#[test]
fn usage_error_exits_one() {
    let out = Command::new(env!("CARGO_BIN_EXE_hypersym"))
        .arg("frobnicate")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cones_report() {
    let dir = TempDir::new().unwrap();
    let out = run(&["cones"], &data("analyze_la.cfg"), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rep = read(dir.path().join("cones.txt"));
    assert!(rep.contains("C in (T Sigma)^sigma: true"));
    assert!(rep.contains("C cap T Sigma strictly inside C: true"));
}

#[test]
fn growth_exponent_ill_posed() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "seed = 1\n[model]\na = 2i\nkappas = 16, 64, 256\nn = 129\n");
    let out = run(&["growth", "--threads", "2"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = read(dir.path().join("growth.txt"));
    let s: f64 = rep
        .lines()
        .find_map(|l| l.strip_prefix("s*: "))
        .expect("s* line")
        .parse()
        .unwrap();
    assert!((s - 2.0).abs() <= 0.1, "s* = {s}");
    let csv = read(dir.path().join("growth.csv"));
    assert!(csv.contains("kappa,n,re_lambda_max,im_lambda_at_max,norm_rate"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn growth_well_posed_has_no_growth() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "[model]\nmu = 0.5\nkappas = 1, 4, 16\nn = 129\n");
    let out = run(&["growth"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(read(dir.path().join("growth.txt")).contains("verdict: no growth"));
}

#[test]
fn under_resolved_grid_exits_three() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "[model]\nmu = 0.5\nkappas = 1, 10, 100\nn = 16\n");
    let out = run(&["growth"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn simulate_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (o, threads) in [(&a, "1"), (&b, "3")] {
        let out = run(
            &["simulate", "--seed", "42", "--threads", threads],
            &data("simulate.cfg"),
            o,
        );
        assert_eq!(out.status.code(), Some(0));
    }
    let (ca, cb) = (read(a.join("simulate.csv")), read(b.join("simulate.csv")));
    assert_eq!(ca, cb);
    assert!(ca.contains("# seed: 42"));
    assert!(ca.contains("kappa,t,norm2,SUU,E,seminorm1"));
    assert!(read(a.join("simulate.txt")).contains("gronwall (K=2): true"));
}

#[test]
fn different_seed_changes_random_data() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (o, seed) in [(&a, "1"), (&b, "2")] {
        run(&["simulate", "--seed", seed], &data("simulate.cfg"), o);
    }
    assert_ne!(read(a.join("simulate.csv")), read(b.join("simulate.csv")));
}

#[test]
fn verify_passes_for_well_posed_model() {
    let dir = TempDir::new().unwrap();
    let out = run(&["verify"], &data("verify.cfg"), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rep = read(dir.path().join("verify.txt"));
    assert!(!rep.contains("FAIL"));
    assert!(rep.contains("PASS symbolic determinant"));
}
