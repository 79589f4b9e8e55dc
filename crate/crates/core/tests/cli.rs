use std::path::Path;
use std::process::Command;

use gradon::transform::io::{read_field, read_sinogram};

fn gradon(dir: &Path, args: &[&str], config: &str) -> (i32, String) {
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_gradon"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .env_remove("GRADON_THREADS")
        .output()
        .unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1, "{stdout}");
    (out.status.code().unwrap(), stdout.trim().to_string())
}

fn field<'a>(line: &'a str, key: &str) -> &'a str {
    line.split(' ')
        .find_map(|p| p.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {line}"))
}

#[test]
fn forward_of_unit_disk_peaks_at_diameter() {
    let dir = tempfile::tempdir().unwrap();
    let (code, line) = gradon(
        dir.path(),
        &["forward"],
        "phantom = disk\nphantom_size = 1.0\ncells = 64\nn_theta = 32\n",
    );
    assert_eq!(code, 0, "{line}");
    let max: f64 = field(&line, "max").parse().unwrap();
    assert!((max - 2.0).abs() < 0.03, "{max}");
    let g = read_sinogram(dir.path().join("out/sinogram.grts")).unwrap();
    assert_eq!(g.layout().n_theta(), 32);
}

#[test]
fn phantom_then_adjoint_then_recon_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let base = "cells = 32\nn_theta = 48\ndelta_factor = 1.5\nphantom = gaussian\nphantom_size = 0.3\n";
    assert_eq!(gradon(dir.path(), &["phantom"], base).0, 0);
    let f = read_field(dir.path().join("out/phantom.grtf")).unwrap();
    assert!((f.values().iter().cloned().fold(0.0, f64::max) - 1.0).abs() < 0.05);

    let with_field = format!(
        "{base}input_field = {}\n",
        dir.path().join("out/phantom.grtf").display()
    );
    assert_eq!(gradon(dir.path(), &["forward"], &with_field).0, 0);
    let with_data = format!(
        "{with_field}input_sinogram = {}\ncg_tol = 1e-8\n",
        dir.path().join("out/sinogram.grts").display()
    );
    let (code, line) = gradon(dir.path(), &["adjoint"], &with_data);
    assert_eq!(code, 0, "{line}");
    let (code, line) = gradon(dir.path(), &["recon"], &with_data);
    assert_eq!(code, 0, "{line}");
    let err: f64 = field(&line, "relative_error").parse().unwrap();
    assert!(err < 0.1, "{line}");
    assert!(dir.path().join("out/cg_log.csv").exists());
}

#[test]
fn bolker_check_pass_and_fail() {
    let dir = tempfile::tempdir().unwrap();
    let (code, line) = gradon(dir.path(), &["bolker-check"], "defining = euclidean\n");
    assert_eq!((code, field(&line, "status")), (0, "PASS"));
    let (code, line) = gradon(dir.path(), &["bolker-check"], "defining = fold\n");
    assert_eq!((code, field(&line, "status")), (2, "FAIL"));
    assert_eq!(field(&line, "invariant"), "bolker-injectivity");
    let text = std::fs::read_to_string(dir.path().join("out/bolker.txt")).unwrap();
    assert!(text.contains("injectivity ok=false") && text.contains("x1="), "{text}");
}

#[test]
fn validation_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let (code, line) = gradon(dir.path(), &["forward"], "n_thetas = 10\n");
    assert_eq!(code, 1);
    assert_eq!(field(&line, "invariant"), "config");
    assert_eq!(gradon(dir.path(), &["forward"], "cells = 0\n").0, 1);
    assert_eq!(gradon(dir.path(), &["phantom", "ball"], "").0, 1);
    assert_eq!(gradon(dir.path(), &["perturb-sweep"], "cells = 64\n").0, 1);
}

#[test]
fn numerical_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, line) = gradon(
        dir.path(),
        &["recon"],
        "cells = 32\nn_theta = 32\ncg_tol = 1e-14\ncg_window = 2\ncg_max_iter = 400\nprecondition = false\n",
    );
    assert_eq!(code, 2, "{line}");
    assert_eq!(field(&line, "invariant"), "cg-progress");
}

#[test]
fn sweep_writes_five_rows_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let (code, line) = gradon(dir.path(), &["perturb-sweep"], "cells = 16\n");
    assert_eq!(code, 0, "{line}");
    let csv = std::fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[6].starts_with("# fit slope="));
    let slope: f64 = field(&line, "slope").parse().unwrap();
    assert!((slope - 1.0).abs() <= 0.2);
}

#[test]
fn fbi_probe_and_symbol_check_report() {
    let dir = tempfile::tempdir().unwrap();
    let (code, line) = gradon(dir.path(), &["fbi-probe"], "n_theta = 64\n");
    assert_eq!(code, 0, "{line}");
    assert_eq!(field(&line, "suspect"), "2/6");
    assert_eq!(field(&line, "conormal_agree"), "8/8");
    let (code, line) = gradon(dir.path(), &["symbol-check"], "cells = 96\nn_theta = 120\n");
    assert_eq!((code, field(&line, "status")), (0, "PASS"), "{line}");
}
