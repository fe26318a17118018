use std::path::{Path, PathBuf};

use saoovqe::cli::cli_main;
use saoovqe::integrals::{build_frozen_core, parse_aoint, transform_to_mo, ActiveSpaceSpec};
use saoovqe::reference::casci_solve;

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("saoovqe").chain(args.iter().copied());
    let code = cli_main(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn make_synthetic_is_byte_for_byte_deterministic() {
    let (code, text, _) = run(&["make-synthetic", "--seed", "7", "--n-orb", "5", "--n-elec", "6"]);
    assert_eq!(code, 0);
    assert_eq!(text, std::fs::read_to_string(golden("synthetic_s7.aoint")).unwrap());

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.aoint");
    let (code, _, _) = run(&["make-synthetic", "--seed", "7", "--n-orb", "5", "--n-elec", "6", "--out", path_str(&p)]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_to_string(&p).unwrap(), text);
}

#[test]
fn casci_lists_index_energy_and_spin() {
    let g = golden("synthetic_s7.aoint");
    let (code, text, _) = run(&["casci", "--fixture", path_str(&g), "--n-states", "4"]);
    assert_eq!(code, 0);
    let f = parse_aoint(&std::fs::read_to_string(&g).unwrap()).unwrap();
    let mo = transform_to_mo(&f.integrals, &f.coeffs).unwrap();
    let fc = build_frozen_core(&mo, &ActiveSpaceSpec::contiguous(6, 4, 3).unwrap()).unwrap();
    let (_, st) = casci_solve(&fc, 4).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    for (i, (l, s)) in lines.iter().zip(&st).enumerate() {
        let cols: Vec<&str> = l.split_whitespace().collect();
        assert_eq!(cols.len(), 3);
        assert_eq!(cols[0].parse::<usize>().unwrap(), i);
        assert!((cols[1].parse::<f64>().unwrap() - s.energy).abs() < 1e-11);
        assert!((cols[2].parse::<f64>().unwrap() - s.s_squared.abs()).abs() < 1e-6);
    }

    let (_, singlets, _) = run(&["casci", "--fixture", path_str(&g), "--n-states", "3", "--singlets"]);
    for l in singlets.lines() {
        assert_eq!(l.split_whitespace().nth(2), Some("0.000000"));
    }
}

fn compare_csv(got: &str, want: &str, tol: f64) {
    let (g, w): (Vec<&str>, Vec<&str>) = (got.lines().collect(), want.lines().collect());
    assert_eq!(g.len(), w.len());
    assert_eq!(g[0], w[0]);
    for (a, b) in g[1..].iter().zip(&w[1..]) {
        for (x, y) in a.split(',').zip(b.split(',')) {
            match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(u), Ok(v)) => assert!((u - v).abs() < tol, "{x} vs {y}"),
                _ => assert_eq!(x, y),
            }
        }
    }
}

#[test]
fn scan_matches_golden_output() {
    let dir = tempfile::tempdir().unwrap();
    for a in ["110", "120", "130"] {
        let p = dir.path().join(format!("g{a}.aoint"));
        let args = ["make-synthetic", "--seed", "0", "--n-orb", "5", "--n-elec", "6", "--alpha", a, "--out", path_str(&p)];
        assert_eq!(run(&args).0, 0);
    }
    let csv = dir.path().join("scan.csv");
    let trace = dir.path().join("trace.csv");
    let (code, text, _) = run(&[
        "scan",
        "--fixtures",
        path_str(dir.path()),
        "--oracle",
        "--out",
        path_str(&csv),
        "--trace",
        path_str(&trace),
    ]);
    assert_eq!(code, 0);
    assert!(!text.contains("crossing"));
    let got = std::fs::read_to_string(&csv).unwrap();
    compare_csv(&got, &std::fs::read_to_string(golden("scan_s0.csv")).unwrap(), 1e-6);
    let t = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(t.lines().filter(|l| l.starts_with("# ")).count(), 3);
    assert!(t.contains("cycle,phase,iteration,e_sa,e_A,e_B,grad_norm,nu"));
}

#[test]
fn run_prints_energies_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let trace = dir.path().join("t.csv");
    let g = golden("synthetic_s7.aoint");
    let (code, text, err) = run(&["run", "--fixture", path_str(&g), "--oracle", "--out", path_str(&out), "--trace", path_str(&trace)]);
    assert_eq!(code, 0, "{err}");
    for key in ["e_A ", "e_B ", "e_sa ", "n_cycles ", "converged true", "fidelity "] {
        assert!(text.contains(key), "missing {key}");
    }
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("label,alpha_deg"));
    assert!(std::fs::read_to_string(&trace).unwrap().starts_with("cycle,phase"));
}

#[test]
fn ci_model_grid() {
    let (code, text, _) = run(&["ci-model", "--steps", "3"]);
    assert_eq!(code, 0);
    assert_eq!(text.lines().count(), 10);
    assert!(text.starts_with("x,y,e_minus,e_plus\n"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&["run", "--bogus"]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["run", "--fixture", "/nonexistent/x.aoint"]).0, 1);
    assert_eq!(run(&["run"]).0, 1);
    assert_eq!(run(&["make-synthetic", "--n-elec", "3"]).0, 1);
    let g = golden("synthetic_s7.aoint");
    assert_eq!(run(&["run", "--fixture", path_str(&g), "--active", "4,9"]).0, 1);

    // A non-finite scalar term breaks the optimizer.
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(&g).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let i = lines.iter().position(|l| l.starts_with("AOINT")).unwrap();
    let mut parts: Vec<&str> = lines[i].split_whitespace().collect();
    *parts.last_mut().unwrap() = "nan";
    lines[i] = parts.join(" ");
    let p = dir.path().join("bad.aoint");
    std::fs::write(&p, lines.join("\n")).unwrap();
    let (code, _, err) = run(&["run", "--fixture", path_str(&p)]);
    assert_eq!(code, 2, "{err}");
    assert!(err.starts_with("error: "));
}
