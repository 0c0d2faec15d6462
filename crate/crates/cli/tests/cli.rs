use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex64;
use phasespace::operator_algebra::{alpha_symbol, parse_operator};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasespace")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn complex(v: &Value) -> Complex64 {
    Complex64::new(v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn symbol_of_qp_at_weyl_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["symbol", "--alpha", "-0.5", "--op", "q p", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "p q + 0.5 i hbar\n");
    let json = read_json(&dir.path().join("symbol.json"));
    assert_eq!(json["symbol"], "p q + 0.5 i hbar");
    assert_eq!(json["operator"], "q p");
    assert_eq!(json["terms"].as_array().unwrap().len(), 2);
}

#[test]
fn symbol_of_pure_position_power() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["symbol", "--alpha", "0", "--op", "q^2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(stdout(&o), "q^2\n");
}

#[test]
fn symbol_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["symbol", "--alpha", "0.25", "--op", "q^2 p^2", "--out", dir.path().to_str().unwrap()]);
    let expected = alpha_symbol(&parse_operator("q^2 p^2", 1.0).unwrap(), 0.25).to_string();
    assert_eq!(stdout(&o), format!("{expected}\n"));
}

#[test]
fn parse_error_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let o = run(&["symbol", "--op", "q + x", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("position 4"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn ground_state_wigner_is_real() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["distribution", "--state", "oscillator:0", "--alpha", "-0.5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let side = read_json(&dir.path().join("distribution.json"));
    assert!(side["diagnostics"]["max_imag"].as_f64().unwrap() < 1e-8);
    assert_eq!(side["alpha"].as_f64(), Some(-0.5));
    assert_eq!(side["qgrid"]["count"].as_u64(), Some(256));
    let rows = fs::read_to_string(dir.path().join("distribution.csv")).unwrap().lines().count();
    assert_eq!(rows, 256 * 256 + 1);
}

#[test]
fn first_excited_wigner_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "distribution", "--state", "oscillator:1", "--alpha", "-0.5", "--q-count", "128", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let side = read_json(&dir.path().join("distribution.json"));
    let min = side["diagnostics"]["min_real"].as_f64().unwrap();
    assert!((min + 1.0 / PI).abs() < 1e-4, "{min}");
    assert!(stdout(&o).contains("min Re"));
}

#[test]
fn corrupted_state_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("psi.csv");
    fs::write(&state, "q,re,im\n-1,0.1,0\n0,oops,0\n1,0.1,0\n").unwrap();
    let spec = format!("file:{}", state.display());
    let out = dir.path().join("out");
    let o = run(&["distribution", "--state", &spec, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("psi.csv:3"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn state_file_round_trip() {
    use phasespace::io::write_position_state;
    use phasespace::states_grids::{coherent_state, UniformGrid};
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("psi.csv");
    let g = UniformGrid::symmetric(64, 8.0).unwrap();
    write_position_state(&state, &coherent_state(0.5, -1.0, g, 1.0).unwrap()).unwrap();
    let spec = format!("file:{}", state.display());
    let o = run(&["expect", "--state", &spec, "--op", "p", "--alpha", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = read_json(&dir.path().join("expectation.json"));
    assert!((complex(&r["hilbert"]) - Complex64::new(-1.0, 0.0)).norm() < 1e-6);
}

#[test]
fn ground_state_position_variance() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["expect", "--state", "oscillator:0", "--op", "q^2", "--alpha", "-0.5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = read_json(&dir.path().join("expectation.json"));
    assert!((complex(&r["hilbert"]) - Complex64::new(0.5, 0.0)).norm() < 1e-6);
    for k in ["conjugate", "plain", "dual"] {
        assert!(r["discrepancies"][k].as_f64().unwrap() < 1e-6);
    }
    assert!(stdout(&o).contains("hilbert"));
}

#[test]
fn identity_expectation_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["expect", "--state", "coherent:0.3,-0.2", "--op", "1", "--alpha", "0.7", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = read_json(&dir.path().join("expectation.json"));
    assert!((complex(&r["hilbert"]) - Complex64::new(1.0, 0.0)).norm() < 1e-10);
}

#[test]
fn coherent_momentum() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["expect", "--state", "coherent:1,2", "--op", "p", "--alpha", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = read_json(&dir.path().join("expectation.json"));
    assert!((complex(&r["hilbert"]) - Complex64::new(2.0, 0.0)).norm() < 1e-6);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let files = ["expectation.json", "distribution.json", "distribution.csv"];
    let mut runs = Vec::new();
    for _ in 0..2 {
        assert!(run(&["expect", "--state", "oscillator:1", "--op", "q p^2", "--alpha", "-0.3", "--q-count", "64", "--out", out])
            .status
            .success());
        assert!(run(&["distribution", "--state", "coherent:1,0.5", "--alpha", "-0.25", "--q-count", "64", "--out", out])
            .status
            .success());
        runs.push(files.map(|f| fs::read(dir.path().join(f)).unwrap()));
        for f in files {
            fs::remove_file(dir.path().join(f)).unwrap();
        }
    }
    for (k, file) in files.iter().enumerate() {
        assert!(runs[0][k] == runs[1][k], "{file} differs between runs");
    }
}

#[test]
fn config_file_with_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, format!("op = q^2\nalpha = 0\nout = {}\n", dir.path().display())).unwrap();
    let o = run(&["symbol", "--config", cfg.to_str().unwrap(), "--op", "p q"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "p q - i hbar\n");
    fs::write(&cfg, "op = q\ncolour = blue\n").unwrap();
    assert_eq!(run(&["symbol", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn invalid_grid_is_rejected_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["distribution", "--q-count", "100", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn truncated_state_is_an_invariant_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["distribution", "--state", "coherent:7,0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

const EVOLVE_GRID: [&str; 8] = ["--q-count", "128", "--q-min", "-10", "--p-count", "128", "--p-min", "-10"];

#[test]
fn unstable_step_exits_4_with_suggestion() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let mut args = vec!["evolve", "--state", "coherent:1,0", "--ham", "p^2/2 + q^2/2", "--dt", "0.1", "--steps", "5"];
    args.extend(EVOLVE_GRID);
    args.extend(["--out", out.to_str().unwrap()]);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("suggested dt"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn zero_steps_echo_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let mut args = vec!["evolve", "--state", "coherent:1,0", "--ham", "p^2/2 + q^2/2", "--dt", "0.001", "--steps", "0"];
    args.extend(EVOLVE_GRID);
    args.extend(["--out", out]);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = read_json(&dir.path().join("summary.json"));
    let snaps = summary["snapshots"].as_array().unwrap();
    assert_eq!(snaps.len(), 1);
    let (field, side) = phasespace::io::read_field(&dir.path().join("chi_000000.csv")).unwrap();
    assert_eq!(side["time"].as_f64(), Some(0.0));
    let psi = phasespace::states_grids::coherent_state(1.0, 0.0, field.qgrid, 1.0).unwrap();
    let chi0 = phasespace::eps_dynamics::separable_chi(&psi, field.pgrid).unwrap();
    assert_eq!(field, chi0.field);
}

#[test]
fn oscillator_period_returns_centroid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let dt = format!("{}", 2.0 * PI / 2000.0);
    let mut args = vec!["evolve", "--state", "coherent:1,0", "--ham", "p^2/2 + q^2/2", "--dt", &dt, "--steps", "2000", "--stride", "500"];
    args.extend(EVOLVE_GRID);
    args.extend(["--out", out]);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = read_json(&dir.path().join("summary.json"));
    let snaps = summary["snapshots"].as_array().unwrap();
    assert_eq!(snaps.len(), 5);
    let expected = [(1.0, 0.0), (0.0, -1.0), (-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)];
    for (s, (q, p)) in snaps.iter().zip(expected) {
        let c = &s["centroid"];
        assert!((c[0].as_f64().unwrap() - q).abs() < 1e-3 && (c[1].as_f64().unwrap() - p).abs() < 1e-3, "{s}");
    }
    assert_eq!(summary["norm_drift"].as_array().unwrap().len(), 2001);
}

#[test]
fn free_particle_variance_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let mut args = vec!["evolve", "--state", "oscillator:0", "--ham", "p^2/2", "--dt", "0.005", "--steps", "200", "--stride", "50"];
    args.extend(EVOLVE_GRID);
    args.extend(["--out", out]);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = read_json(&dir.path().join("summary.json"));
    for s in summary["snapshots"].as_array().unwrap() {
        let t = s["time"].as_f64().unwrap();
        let var = s["q_variance"].as_f64().unwrap();
        let expected = 0.5 + t * t / 2.0;
        assert!((var - expected).abs() < 1e-3, "t={t}: {var} vs {expected}");
    }
}
