//! Command-line surface: subcommands, config handling and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_headland-smooth"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    (
        status.code().unwrap(),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

#[test]
fn plan_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = run(bin()
        .arg("plan")
        .arg(data("square_200.csv"))
        .arg("--out")
        .arg(dir.path())
        .args(["--raster-cell-m", "1"]));
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("problem 1: 4 instances"), "{out}");
    for f in ["plan.geojson", "report.csv", "timing.csv", "figure.svg", "coverage.pgm"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert!(err.contains("9 lanes synthesised"));
}

#[test]
fn config_file_is_applied_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# slower steering\nwheelbase_m = 6\n").unwrap();
    let (code, out, _) = run(bin().arg("simulate-saturated").arg("--config").arg(&cfg));
    assert_eq!(code, 0);
    assert!(out.contains("minimum turning radius 9.9857"), "{out}");
    let (_, out, _) = run(bin().arg("simulate-saturated").arg("--config").arg(&cfg).args(["--wheelbase-m", "3"]));
    assert!(out.contains("minimum turning radius 4.9928"), "{out}");
}

#[test]
fn single_instances_and_sweep() {
    let field = data("square_200.csv");
    let (code, out, err) = run(bin().arg("smooth-corner").arg(&field).args(["--index", "2"]));
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("headland_corner"), "{out}");
    let (code, out, _) = run(bin().arg("smooth-transition").arg(&field));
    assert_eq!(code, 0);
    assert!(out.contains("problem 2"), "{out}");
    let (code, _, err) = run(bin().arg("smooth-corner").arg(&field).args(["--index", "4"]));
    assert_eq!(code, 1);
    assert!(err.contains("4 found"), "{err}");
    let (code, out, _) = run(bin().arg("sweep-radius").arg(&field).args(["--radii", "5,7"]));
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 3, "{out}");
}

#[test]
fn input_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(bin().arg("plan").arg(dir.path().join("missing.csv")));
    assert_eq!(code, 1);
    assert!(err.contains("missing.csv"));
    let bad = dir.path().join("bowtie.csv");
    std::fs::write(&bad, "x,y\n0,0\n100,100\n100,0\n0,100\n").unwrap();
    let (code, _, err) = run(bin().arg("plan").arg(&bad));
    assert_eq!(code, 1, "{err}");
    let (code, _, _) = run(bin().arg("plan").arg(data("square_200.csv")).args(["--ds-m", "-1"]));
    assert_eq!(code, 1);
}

#[test]
fn instance_failures_exit_with_two() {
    // A Dubins radius below the minimum turning radius, also after the
    // retry factor, cannot be tracked.
    let (code, _, err) = run(bin()
        .arg("smooth-transition")
        .arg(data("square_200.csv"))
        .args(["--r-dubins-m", "2"]));
    assert_eq!(code, 2, "{err}");
    let (code, _, _) = run(bin().arg("plan").arg(data("square_200.csv")).args(["--r-dubins-m", "2", "--raster-cell-m", "1"]).arg("--out").arg(tempfile::tempdir().unwrap().path()));
    assert_eq!(code, 2);
    let (code, _, _) = run(bin().arg("no-such-command"));
    assert_eq!(code, 1);
}
