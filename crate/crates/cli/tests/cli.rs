use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_star-spectra"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.toml"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn certify_t_junction_from_config() {
    let o = bin().arg("certify").arg(config("t_junction")).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let json = stdout(&o);
    assert!(json.contains("\"kind\": \"CertifiedNoResonance\""));
    assert!(json.contains("\"n_discrete\": 1"));
    assert!(json.contains("\"tool\": \"star-spectra\""));
}

#[test]
fn json_is_byte_identical_across_runs_and_thread_counts() {
    let path = config("y_junction");
    let runs: Vec<Vec<u8>> = ["1", "4", "4"]
        .iter()
        .map(|t| bin().env("STAR_SPECTRA_THREADS", t).arg("certify").arg(&path).output().unwrap().stdout)
        .collect();
    assert!(!runs[0].is_empty());
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn inconclusive_and_errors_have_their_own_exit_codes() {
    assert_eq!(run(&["certify", "--preset", "crossing_strips", "--format", "text"]).status.code(), Some(2));
    let missing = run(&["certify", "no/such/file.toml"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("error"));
    assert_eq!(run(&["certify", "--preset", "nonsense"]).status.code(), Some(1));
    let bad = std::env::temp_dir().join("star_spectra_bad.toml");
    std::fs::write(&bad, "name = \"x\"\n[center]\nvertices = [[0.0, 0.0], [1.0, 0.0]]\n").unwrap();
    assert_eq!(bin().arg("certify").arg(&bad).output().unwrap().status.code(), Some(1));
    assert_eq!(
        bin().env("STAR_SPECTRA_THREADS", "many").args(["spectrum", "--shape", "box"]).output().unwrap().status.code(),
        Some(1)
    );
}

#[test]
fn spectrum_of_the_neumann_triangle() {
    let o = run(&["spectrum", "--shape", "equilateral", "--bc", "neumann", "--side", "1", "-k", "3"]);
    assert!(o.status.success());
    let values: Vec<f64> = stdout(&o).lines().map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap()).collect();
    let want = [0.0, 16.0 * PI * PI / 9.0, 16.0 * PI * PI / 9.0];
    assert_eq!(values.len(), 3);
    for (v, w) in values.iter().zip(want) {
        assert!((v - w).abs() <= 1e-12 * w.max(1.0), "{v} vs {w}");
    }
    let cube = run(&["spectrum", "--shape", "box", "--dims", "1,1,1", "--bc", "DN", "-k", "2"]);
    let second: f64 = stdout(&cube).lines().nth(1).unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((second - 11.0 * PI * PI / 4.0).abs() < 1e-12 * second);
}

#[test]
fn region_csv() {
    let o = run(&["region", "--nx", "20", "--ny", "10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,inside,certified,n"));
    assert_eq!(lines.count(), 200);
    assert_eq!(run(&["region", "--nx", "5", "--ny", "50"]).status.code(), Some(1));
}

#[test]
fn sweep_csv_and_critical_angle() {
    let o = run(&["sweep", "--family", "broken", "--lo", "0.40", "--hi", "0.42", "--step", "0.005"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("alpha,nu,lower,margin,certified\n"));
    let certified: Vec<&str> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(certified, ["false", "false", "true", "true", "true"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("critical angle 0.408637"));
}

#[test]
fn mesh_dumps() {
    let svg = run(&["mesh", "--preset", "t_junction", "--format", "svg"]);
    assert!(svg.status.success());
    assert!(stdout(&svg).trim_start().starts_with("<svg"));
    let text = run(&["mesh", "--preset", "y_junction", "--truncation", "1.5"]);
    assert!(text.status.success() && !stdout(&text).is_empty());
    assert_eq!(run(&["mesh", "--preset", "cube_disk_branches"]).status.code(), Some(1));
}

#[test]
fn repro_selected_presets() {
    let o = run(&["repro", "--only", "t_junction,rectangle_family"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 2);
    assert!(text.contains("2 checks, 0 failed"));
    assert_eq!(run(&["repro"]).status.code(), Some(1));
}

#[test]
fn every_config_file_loads() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let o = bin().args(["mesh", "--h", "0.5"]).arg(&path).output().unwrap();
        // Box centers are rejected by `mesh` but must still parse.
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(o.status.success() || err.contains("three-dimensional"), "{}: {err}", path.display());
        n += 1;
    }
    assert_eq!(n, 9);
}
