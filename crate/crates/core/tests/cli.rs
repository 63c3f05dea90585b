#![cfg(feature = "cli")]

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::{Command, Output};

use iga_core::coupling::AlphaPolicy;
use iga_core::io::probe;
use iga_core::models::timoshenko_two_patch;
use iga_core::solver::{assemble_global, solve, AssemblyOptions, SolveOptions};
use iga_core::verification::TimoshenkoParams;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn iga(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iga")).args(args).output().unwrap()
}

fn key_values(text: &str) -> HashMap<String, String> {
    text.lines().filter_map(|l| l.split_once('=')).map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

#[test]
fn run_writes_summary_and_vtk() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let res = iga(&["run", "--model", &fixture("beam_two_patch.json"), "--out", &out]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert_eq!(summary, String::from_utf8(res.stdout).unwrap());
    let kv = key_values(&summary);
    assert_eq!(kv["patches"], "2");
    assert_eq!(kv["elements"], "240");
    assert_eq!(kv["tip.patch"], "1");

    // Same model built in code, probed through the library. The knot values differ
    // in the last bits between subdivision and direct construction.
    let t = TimoshenkoParams::default();
    let model = timoshenko_two_patch(&t, 1, [20, 8], [20, 4], AlphaPolicy::Value(1e8)).unwrap();
    let sol = solve(&assemble_global(&model, &AssemblyOptions::default()).unwrap(), &SolveOptions::default()).unwrap();
    let (_, f) = probe(&sol, &[48.0, 0.0]).unwrap();
    let tip: f64 = kv["tip.uy"].parse().unwrap();
    assert!((tip - f.u[1]).abs() < 1e-9 * f.u[1].abs(), "{tip} vs {}", f.u[1]);
    assert!((tip + 0.0690).abs() < 0.025 * 0.0690);
    assert!(kv["equilibrium_error"].parse::<f64>().unwrap() < 1e-8);
    assert!(kv["min_pivot"].parse::<f64>().unwrap() > 0.0);

    let vtk = std::fs::read_to_string(dir.path().join("solution.vtk")).unwrap();
    // vtk_density 2: 9 points and 4 cells per element.
    assert!(vtk.contains("POINTS 2160 double\n"));
    assert!(vtk.contains("CELLS 960 4800\n"));
}

#[test]
fn converge_prints_rates() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("beam_two_patch.json"))
        .unwrap()
        .replace("\"subdivide\": [20, 8]", "\"subdivide\": [4, 2]")
        .replace("\"subdivide\": [20, 4]", "\"subdivide\": [3, 1]")
        .replace("{\"value\": 1e8}", "{\"estimate\": {}}");
    let model = dir.path().join("coarse.json");
    std::fs::write(&model, text).unwrap();
    let out = dir.path().join("study");
    let res = iga(&[
        "converge",
        "--model",
        model.to_str().unwrap(),
        "--levels",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert_eq!(csv, String::from_utf8(res.stdout).unwrap());
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "level,h,dofs,e_disp,e_energy");
    assert_eq!(lines.len(), 6);
    let energy: Vec<f64> = lines[1..5].iter().map(|l| l.split(',').nth(4).unwrap().parse().unwrap()).collect();
    assert!(energy.windows(2).all(|w| w[1] < w[0] / 1.5));
    let rates = lines[5].strip_prefix("# rates: ").unwrap();
    let kv = key_values(&rates.replace(' ', "\n"));
    let e: f64 = kv["e_energy"].parse().unwrap();
    assert!((0.85..=1.15).contains(&e), "{e}");
}

#[test]
fn converge_needs_beam_data() {
    let res = iga(&["converge", "--model", &fixture("unit_square.json")]);
    assert!(!res.status.success());
    let err = String::from_utf8(res.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error[argument]:"), "{err}");
}

#[test]
fn inspect_reports_counts() {
    let res = iga(&["inspect", "--model", &fixture("cantilever_3d.json")]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let kv = key_values(&String::from_utf8(res.stdout).unwrap());
    assert_eq!(kv["dim"], "3");
    assert_eq!(kv["patch.0.elements"], "256");
    assert_eq!(kv["patch.1.elements"], "32");
    assert_eq!(kv["patch.0.grid"], "16x4x4");
    assert_eq!(kv["patch.1.degrees"], "3x3x3");
    assert_eq!(kv["elements"], "288");
    // 19 x 7 x 7 and 19 x 4 x 5 control points, three dofs each.
    assert_eq!(kv["dofs"], (3 * (19 * 7 * 7 + 19 * 4 * 5)).to_string());
    let lo: f64 = kv["interface.0.alpha_min"].parse().unwrap();
    let hi: f64 = kv["interface.0.alpha_max"].parse().unwrap();
    assert!(lo > 0.0 && lo <= hi);

    let res = iga(&["inspect", "--model", &fixture("cantilever_3d.json"), "--alpha", "5"]);
    let kv = key_values(&String::from_utf8(res.stdout).unwrap());
    assert_eq!(kv["interface.0.alpha_min"], "5e0");
}

#[test]
fn errors_are_single_lines() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none.json");
    let res = iga(&["inspect", "--model", missing.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    let err = String::from_utf8(res.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error[io]:"), "{err}");

    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(fixture("unit_square.json")).unwrap().replace("\"nu\": 0.3", "\"nu\": 0.7");
    std::fs::write(&bad, text).unwrap();
    let res = iga(&["inspect", "--model", bad.to_str().unwrap()]);
    let err = String::from_utf8(res.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error["), "{err}");

    let res = iga(&["run", "--model", &fixture("unit_square.json")]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8(res.stderr).unwrap().starts_with("error[usage]:"));

    let res = iga(&["inspect", "--model", &fixture("beam_two_patch.json"), "--gamma", "2"]);
    assert_eq!(res.status.code(), Some(1));
}
