//! Binary-level checks: exit codes, CSV schemas, and output determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_reefmap"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).expect("output file exists")
}

#[test]
fn default_equilibria_lists_all_five_points() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["equilibria"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = read(tmp.path(), "equilibria.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "kind,M,C,residual");
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("trivial,0.000000,0.000000"));
    assert!(lines[2].starts_with("axial_macroalgae,0.375000,0.000000"));
    assert!(lines[3].starts_with("axial_coral,0.000000,0.833333"));
    assert!(lines[4].starts_with("interior,0.162603,0.494576"));
    assert!(lines[5].starts_with("interior,0.369384,0.063783"));
    // report embeds the resolved configuration
    let txt = read(tmp.path(), "equilibria.txt");
    assert!(txt.contains("delta = 1\n"));
    assert!(txt.contains("r = 0.2\n"));
}

#[test]
fn usage_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    // reversed range
    let out = run_in(tmp.path(), &["sweep", "--range", "3.0:2.0:10", "--ic", "0.1,0.1"]);
    assert_eq!(out.status.code(), Some(2));
    // grid too small
    let out = run_in(tmp.path(), &["sweep", "--range", "2.0:3.0:1", "--ic", "0.1,0.1"]);
    assert_eq!(out.status.code(), Some(2));
    // sweep and orbit need an initial condition
    let out = run_in(tmp.path(), &["sweep", "--range", "2.0:3.0:5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_in(tmp.path(), &["orbit"]);
    assert_eq!(out.status.code(), Some(2));
    // non-numeric override
    let out = run_in(tmp.path(), &["equilibria", "--set", "r=abc"]);
    assert_eq!(out.status.code(), Some(2));
    // unknown configuration key
    let out = run_in(tmp.path(), &["equilibria", "--set", "beta=1"]);
    assert_eq!(out.status.code(), Some(2));
    // blend weight outside (0, 1]
    let out = run_in(tmp.path(), &["hybrid", "--zeta", "1.5", "--ic", "0.1,0.1"]);
    assert_eq!(out.status.code(), Some(2));
    // unknown flag (handled by the parser)
    let out = bin().args(["equilibria", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn domain_and_io_errors_exit_with_3() {
    let tmp = tempfile::tempdir().unwrap();
    // not a fixed point
    let out = run_in(tmp.path(), &["classify", "--point", "0.3,0.2"]);
    assert_eq!(out.status.code(), Some(3));
    // missing parameter file
    let out = run_in(tmp.path(), &["equilibria", "--params", "/nonexistent/p.txt"]);
    assert_eq!(out.status.code(), Some(3));
    // invalid parameter value
    let out = run_in(tmp.path(), &["equilibria", "--set", "k=0"]);
    assert_eq!(out.status.code(), Some(3));
    // non-positive step size
    let out = run_in(tmp.path(), &["equilibria", "--delta", "-1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn parameter_file_and_overrides_resolve_in_order() {
    let tmp = tempfile::tempdir().unwrap();
    let params = tmp.path().join("p.txt");
    std::fs::write(&params, "r = 0.5\nk = 0.7\n# comment\ndelta = 2.0\n").unwrap();
    let out = run_in(
        tmp.path(),
        &[
            "equilibria",
            "--params",
            params.to_str().unwrap(),
            "--set",
            "k=0.9",
            "--delta",
            "3.5",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let txt = read(tmp.path(), "equilibria.txt");
    assert!(txt.contains("r = 0.5\n"), "file value survives");
    assert!(txt.contains("k = 0.9\n"), "--set overrides the file");
    assert!(txt.contains("delta = 3.5\n"), "--delta overrides everything");
}

#[test]
fn sweep_output_is_byte_identical_across_runs_and_thread_counts() {
    let args = [
        "sweep",
        "--set",
        "r=1",
        "--set",
        "k=0.3",
        "--set",
        "a=0.9",
        "--set",
        "g=0.5",
        "--set",
        "gamma=0.8",
        "--set",
        "d=0.1",
        "--set",
        "alpha=0.5",
        "--range",
        "1.4:1.8:7",
        "--ic",
        "0.32,0.0",
        "--ic",
        "0.3,0.01",
        "--transient",
        "400",
        "--samples",
        "16",
    ];
    let mut outputs = Vec::new();
    for threads in ["1", "4", "1"] {
        let tmp = tempfile::tempdir().unwrap();
        let status = bin()
            .args(args)
            .arg("--out")
            .arg(tmp.path())
            .env("RAYON_NUM_THREADS", threads)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        outputs.push(read(tmp.path(), "sweep.csv"));
    }
    assert_eq!(outputs[0], outputs[1], "thread count must not change bytes");
    assert_eq!(outputs[0], outputs[2], "reruns must be byte-identical");
    let header = outputs[0].lines().next().unwrap();
    assert_eq!(header, "param,ic_index,sample_index,M,C,kind,period");
}

#[test]
fn sweep_rows_cover_the_grid_in_order() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &[
            "sweep", "--range", "0.5:1.0:3", "--ic", "0.2,0.4", "--transient", "100",
            "--samples", "4",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = read(tmp.path(), "sweep.csv");
    let params: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    let mut sorted = params.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(params, sorted);
    assert!(params.contains(&"0.500000") && params.contains(&"1.000000"));
}

#[test]
fn ogy_accepts_a_linearization_file() {
    let tmp = tempfile::tempdir().unwrap();
    let jb = tmp.path().join("jb.txt");
    std::fs::write(
        &jb,
        "j11 = 1.5050\nj12 = 0.0360\nj21 = -0.1260\nj22 = 1.2480\nb1 = 0.0410\nb2 = 0.0694\n",
    )
    .unwrap();
    let out = run_in(tmp.path(), &["ogy", "--jb", jb.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = read(tmp.path(), "ogy.csv");
    assert!(csv.starts_with("record,value1,value2,value3\n"));
    assert!(csv.contains("line1,-0.048670,-0.109613,0.882776\n"));
    assert!(csv.contains("vertex1,19.054764,-0.406993,\n"));
    assert!(csv.contains("controllable,true,,\n"));
    assert!(csv.contains("bounded,true,,\n"));

    // a missing key is a usage error
    std::fs::write(&jb, "j11 = 1.0\n").unwrap();
    let out = run_in(tmp.path(), &["ogy", "--jb", jb.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn precision_flag_sets_decimal_places() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["equilibria", "--precision", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = read(tmp.path(), "equilibria.csv");
    assert!(csv.contains("axial_macroalgae,0.375,0.000,0.000\n"));
}

#[test]
fn orbit_csv_lists_samples_per_initial_condition() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &[
            "orbit", "--ic", "0.2,0.4", "--ic", "0.3,0.1", "--transient", "50", "--samples",
            "3",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = read(tmp.path(), "orbit.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "ic_index,sample_index,M,C");
    assert_eq!(lines.len(), 7);
    assert!(lines[1].starts_with("0,0,"));
    assert!(lines[4].starts_with("1,0,"));
}

#[test]
fn hybrid_simulation_reports_capture() {
    let tmp = tempfile::tempdir().unwrap();
    // coral axial point of the second circle-crossing example set, just
    // above its flip threshold; a mid-interval blend weight restores it
    let out = run_in(
        tmp.path(),
        &[
            "hybrid", "--set", "r=0.6", "--set", "k=0.9", "--set", "a=0.45", "--delta", "3.1",
            "--point", "0.0,0.833333333333", "--ic", "0.0,0.8", "--zeta", "0.5", "--steps",
            "2000",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = read(tmp.path(), "hybrid.csv");
    assert!(csv.contains("zeta_interval,0.000000,0.850762,\n"));
    let cap = csv
        .lines()
        .find(|l| l.starts_with("captured,"))
        .expect("captured record present");
    let idx: i64 = cap.split(',').nth(1).unwrap().parse().expect("captured");
    assert!(idx >= 0 && idx < 2000);
}
