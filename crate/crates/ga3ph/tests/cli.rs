use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use ga3ph::io::trace_from_csv;
use ga3ph::text::{parse_model, Format};
use ga3ph_core::models::{build_rl_model, real_to_ga, CircuitParams};
use ga3ph_core::sim::CSV_HEADER;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ga3ph"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn ga3ph")
}

fn run_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn ga3ph");
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn balanced_ga_model_is_scalar() {
    let o = run(&["model", "--balanced", "--format", "ga"]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o),
        "e0: 7333.33333333/(7333.33333333 + p)\ne1: 0\ne2: 0\ne12: 0\n"
    );
}

#[test]
fn unbalanced_ga_model_matches_closed_form() {
    let o = run(&["model", "--unbalanced", "--format", "ga"]);
    assert_eq!(code(&o), 0);
    let m = parse_model(&stdout(&o)).unwrap().convert(Format::Ga);
    let want = real_to_ga(&build_rl_model(&CircuitParams::example(), false)).g;
    let ga3ph::text::Model::Ga(g) = m else {
        panic!()
    };
    assert!(g.g.coeff_rel_error(&want) < 1e-10);
    assert!(g.g.coeff(3).is_zero());
}

#[test]
fn netlist_model_equals_closed_form() {
    let path = data("example.cir");
    let a = run(&[
        "model",
        "--netlist",
        path.to_str().unwrap(),
        "--format",
        "rv",
    ]);
    let b = run(&["model", "--unbalanced", "--format", "rv"]);
    assert_eq!(code(&a), 0);
    let ma = parse_model(&stdout(&a)).unwrap().to_real();
    let mb = parse_model(&stdout(&b)).unwrap().to_real();
    assert!(ma.coeff_rel_error(&mb) < 1e-10);
    assert_eq!(stdout(&a), stdout(&b));
    let c = run(&["netlist-check", path.to_str().unwrap()]);
    assert_eq!(code(&c), 0);
    assert!(stdout(&c).contains("elements: 9"));
}

#[test]
fn format_round_trip() {
    let rv = parse_model(&stdout(&run(&["model", "--format", "rv"])))
        .unwrap()
        .to_real();
    for from in ["ga", "cv"] {
        let text = stdout(&run(&["model", "--format", from]));
        let o = run_stdin(&["convert", "--to", "rv"], text.as_bytes());
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let back = parse_model(&stdout(&o)).unwrap().to_real();
        assert!(
            back.coeff_rel_error(&rv) < 1e-10,
            "{from}: {:e}",
            back.coeff_rel_error(&rv)
        );
    }
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "m.txt",
        &stdout(&run(&["model", "--format", "ga"])),
    );
    let o = run(&["convert", "--to", "ga", p.to_str().unwrap()]);
    assert_eq!(stdout(&o), stdout(&run(&["model", "--format", "ga"])));
    let o = run_stdin(&["convert", "--to", "rv"], b"e0: 1\nGa: 2\n");
    assert_eq!(code(&o), 2);
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("k,stable,slowest_root,d_cl,roots,minimal_poles")
    );
    lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn stability_sweep() {
    let o = run(&["stability", "--sweep", "1e-6", "1e6", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = rows(&stdout(&o));
    assert_eq!(rows.len(), 13);
    let ks: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(ks.windows(2).all(|w| w[0] < w[1]));
    assert!((ks[0] - 1e-6).abs() < 1e-18 && (ks[12] - 1e6).abs() < 1e-6);
    assert!(rows.iter().all(|r| r[1] == "true"));
    for r in [&rows[0], &rows[12]] {
        let s: f64 = r[2].parse().unwrap();
        assert!((s + 1047.619).abs() < 0.01 * 1047.619, "{s}");
    }
}

#[test]
fn stability_single_gain() {
    let o = run(&["stability", "--k", "10"]);
    let r = &rows(&stdout(&o))[0];
    assert_eq!(r[1], "true");
    let s: f64 = r[2].parse().unwrap();
    assert!((s + 1047.6).abs() < 10.476);
    // k = 0: the loop keeps the open-loop poles
    let o = run(&["stability", "--k", "0"]);
    let r = &rows(&stdout(&o))[0];
    let plant_poles = [-1047.619047619, -7333.333333333];
    assert_eq!(r[3].split(' ').count(), 5);
    let poles: Vec<f64> = r[5]
        .split(' ')
        .map(|z| {
            let z = z.strip_suffix('j').unwrap();
            let i = z.rfind(['+', '-']).unwrap();
            let (re, im): (f64, f64) = (z[..i].parse().unwrap(), z[i..].parse().unwrap());
            assert!(im.abs() < 1e-6 * re.abs());
            re
        })
        .collect();
    assert_eq!(poles.len(), 2);
    for (a, b) in poles.iter().zip(plant_poles) {
        assert!((a - b).abs() < 1e-6 * b.abs(), "{poles:?}");
    }
}

#[test]
fn algebraic_loop_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.ini",
        "[circuit]\nL = 1\nLu = 1\nR = 1\nbalanced = true\n",
    );
    // G = 1/(1 + p), C = -(1 + p): e0 + G·C vanishes identically
    let o = run(&[
        "stability",
        "--config",
        cfg.to_str().unwrap(),
        "--coeff",
        "e0=-1 - p",
    ]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn design_decouple_reports() {
    let o = run(&["design-decouple"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = stdout(&o);
    assert!(
        s.contains("diagonal: 1833.33333333/(1833.33333333 + p)"),
        "{s}"
    );
    assert!(s.contains("dc gain: 1\n"));
    assert!(s.contains("offdiag_residual: 0e0"));

    let b = run(&["design-decouple", "--balanced"]);
    assert_eq!(code(&b), 0);
    let sb = stdout(&b);
    assert!(sb.contains("offdiag_residual: 0e0"));
    let ctrl = sb.split("controller:\n").nth(1).unwrap();
    assert!(ctrl.contains("  e1: 0\n  e2: 0\n  e12: 0\n"), "{sb}");

    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.ini", "[circuit]\nLu = 3e-3\n");
    let d = run(&[
        "design-decouple",
        "--unbalanced",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(code(&d), 0);
    assert_eq!(
        stdout(&d).split("controller:\n").nth(1),
        sb.split("controller:\n").nth(1)
    );
}

#[test]
fn negative_resistance_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(data("example.cir"))
        .unwrap()
        .replace("Rb lb n 22", "Rb lb n -22");
    let p = write(dir.path(), "neg.cir", &text);
    let o = run(&["design-decouple", "--netlist", p.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}{}", stdout(&o), stderr(&o));
    assert!(stderr(&o).contains("line 8"));
}

#[test]
fn simulate_decoupled_run() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let svg = dir.path().join("t.svg");
    let o = run(&[
        "simulate",
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with(&format!("{CSV_HEADER}\n")));
    assert!(!text.contains('\r'));
    let tr = trace_from_csv(&text).unwrap();
    assert_eq!(tr.len(), 1001);
    let e = stderr(&o);
    assert!(e.contains("decoupling_metric: "), "{e}");
    assert!(e.contains("step_time_constant: "));

    // byte-identical on rerun
    let csv2 = dir.path().join("t2.csv");
    let svg2 = dir.path().join("t2.svg");
    run(&[
        "simulate",
        "--out",
        csv2.to_str().unwrap(),
        "--svg",
        svg2.to_str().unwrap(),
    ]);
    assert_eq!(std::fs::read(&csv).unwrap(), std::fs::read(&csv2).unwrap());
    assert_eq!(std::fs::read(&svg).unwrap(), std::fs::read(&svg2).unwrap());
    let s = std::fs::read_to_string(&svg).unwrap();
    assert!(s.contains("version=\"1.1\"") && s.trim_end().ends_with("</svg>"));
    assert_eq!(s.matches("<polyline").count(), 4);
}

#[test]
fn simulate_open_loop_balanced_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("o.csv");
    let o = run(&[
        "simulate",
        "--balanced",
        "--controller",
        "identity",
        "--open-loop",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let e = stderr(&o);
    let line = e
        .lines()
        .find(|l| l.starts_with("amplitude_ratio_60hz: "))
        .unwrap();
    let ratio: f64 = line.split(": ").nth(1).unwrap().parse().unwrap();
    assert!((ratio - 0.9987).abs() < 0.001 * 0.9987, "{ratio}");
}

#[test]
fn simulate_divergence_exits_5_with_partial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("k.csv");
    let o = run(&["simulate", "--k", "10", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 5);
    assert!(stderr(&o).contains("diverged"));
    let tr = trace_from_csv(&std::fs::read_to_string(&csv).unwrap()).unwrap();
    assert!(!tr.is_empty() && tr.len() < 1001);
    let o = run(&["simulate", "--k", "0.5", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
}

#[test]
fn discretize_tables() {
    let o = run(&[
        "discretize",
        "--controller",
        "identity",
        "--Ts",
        "1e-4",
        "--prewarp-hz",
        "60",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        body,
        ["Ga.b: 1", "Ga.a: 1", "Gb.b: 0", "Gb.a: 1", "Gc.b: 0", "Gc.a: 1", "Gd.b: 1", "Gd.a: 1"]
    );

    let o = run(&["discretize", "--k", "2.5"]);
    let s = stdout(&o);
    assert!(s.contains("Ga.b: 5\n") && s.contains("Gd.b: 0\n"));

    let o = run(&["discretize", "--controller", "decoupling"]);
    assert!(stdout(&o).contains("Ga.a: 1 -1\n"));

    let o = run(&["discretize", "--coeff", "e0=1 + p"]);
    assert_eq!(code(&o), 6, "{}", stderr(&o));
    let o = run(&[
        "discretize",
        "--controller",
        "identity",
        "--prewarp-hz",
        "6000",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bad_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.ini", "[circuit]\nL = 3e-3\nX = 1\n");
    let o = run(&["model", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    let o = run(&["model", "--netlist", "/nonexistent.cir"]);
    assert_eq!(code(&o), 2);
    let bad = write(dir.path(), "bad.cir", "Ra a\n");
    assert_eq!(code(&run(&["netlist-check", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["model", "--balanced", "--unbalanced"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["stability", "--sweep", "1", "0.1", "1"])), 2);
    let o = run(&["--help"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("design-decouple"));
}

#[test]
fn proportional_k10_trace_is_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("p.csv");
    let o = run(&[
        "simulate",
        "--controller",
        "proportional",
        "--k",
        "10",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let tr = trace_from_csv(&std::fs::read_to_string(&csv).unwrap()).unwrap();
    assert_eq!(tr.len(), 1001);
    let bound = 10.0 * 155.0;
    assert!(tr.y_alpha.iter().chain(&tr.y_beta).all(|y| y.abs() < bound));
}
