use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cellform_cli::export::SolutionExport;
use cellform_core::{builtin_instance, serialize_instance, MetricsReport, BOCTOR_7X11_NAME};

fn cellform(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cellform"))
        .args(args)
        .env_remove("CELLFORM_LOG")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_boctor(dir: &Path, name: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, serialize_instance(&builtin_instance(BOCTOR_7X11_NAME).unwrap())).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn solve_builtin_three_cells() {
    let out = cellform(&["solve", "--builtin", "boctor-7x11", "--cells", "3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("    M1 M5 M6 | M2 M3 | M4 M7\n"), "{text}");
    assert!(text.contains("cell 1: machines M1 M5 M6 | parts P3 P7 P11\n"));
    assert!(text.contains("cell 2: machines M2 M3 | parts P1 P2 P6 P9\n"));
    assert!(text.contains("cell 3: machines M4 M7 | parts P4 P5 P8 P10\n"));
    assert!(text.contains("exceptional parts: P1, P4\n"));
    assert!(text.contains("PE 9.52% | MU 76.00% | GE 70.37%\n"));
}

#[test]
fn solve_threshold_mode_finds_three_cells() {
    let out = cellform(&["solve", "--builtin", "boctor-7x11"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("cell 3:") && !text.contains("cell 4:"), "{text}");
    assert!(text.contains("GE 70.37%"));
}

#[test]
fn solve_missing_file_reports_cannot_read() {
    let out = cellform(&["solve", "missing.cfm"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("cannot read"), "{}", stderr(&out));
}

#[test]
fn solve_rejects_malformed_instance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfm");
    fs::write(&path, "machines=3 parts=2\n1 1 0\n0 2 1\n").unwrap();
    let out = cellform(&["solve", path.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(
        err.contains("cannot parse") && err.contains("line 3, column 3"),
        "{err}"
    );
}

#[test]
fn solve_requires_exactly_one_source() {
    assert!(!cellform(&["solve"]).status.success());
    assert!(!cellform(&["solve", "x.cfm", "--builtin", "boctor-7x11"])
        .status
        .success());
    let out = cellform(&["solve", "--builtin", "nope"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("boctor-7x11"));
}

#[test]
fn solve_reports_unseparable_cell_count() {
    let out = cellform(&["solve", "--builtin", "boctor-7x11", "--cells", "8"]);
    assert!(!out.status.success());
    let out = cellform(&["solve", "--builtin", "boctor-7x11", "--gap-threshold", "200"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("gap threshold"));
}

#[test]
fn solve_writes_export_assignment_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let export = dir.path().join("boctor.json");
    let assignment = dir.path().join("boctor.asg");
    let csv = dir.path().join("boctor.csv");
    let out = cellform(&[
        "solve",
        "--builtin",
        "boctor-7x11",
        "--cells",
        "3",
        "--out",
        export.to_str().unwrap(),
        "--assignment-out",
        assignment.to_str().unwrap(),
        "--similarity-csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let doc: SolutionExport = serde_json::from_str(&fs::read_to_string(&export).unwrap()).unwrap();
    assert_eq!(doc.schema, "cellform/1");

    let scored = cellform(&[
        "score",
        "--builtin",
        "boctor-7x11",
        "--assignment",
        assignment.to_str().unwrap(),
        "--json",
    ]);
    assert!(scored.status.success(), "{}", stderr(&scored));
    let report: MetricsReport = serde_json::from_str(&stdout(&scored)).unwrap();
    assert_eq!(report, doc.metrics);

    let csv = fs::read_to_string(&csv).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("M1,M2,M3,M4,M5,M6,M7"));
    assert!(lines.next().unwrap().starts_with("1.000000,-0.038576,"));
}

#[test]
fn score_reference_cells_file() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_boctor(dir.path(), "boctor.cfm");
    let asg = dir.path().join("t1.asg");
    fs::write(
        &asg,
        "# reference cells\nmachine M2 1\nmachine M3 1\nmachine M1 2\nmachine M5 2\nmachine M6 2\nmachine M4 3\nmachine M7 3\n\
         part P1 1\npart P2 1\npart P6 1\npart P9 1\npart P3 2\npart P7 2\npart P11 2\n\
         part P4 3\npart P5 3\npart P8 3\npart P10 3\n",
    )
    .unwrap();
    let out = cellform(&["score", &inst, "--assignment", asg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("UE 21 | EE 2 | VE 6 | block area 25\nPE 9.52% | MU 76.00% | GE 70.37%\n"));
}

#[test]
fn score_single_cell_has_zero_pe() {
    let dir = tempfile::tempdir().unwrap();
    let asg = dir.path().join("one.asg");
    let mut text = String::new();
    for j in 1..=7 {
        text.push_str(&format!("machine M{j} 1\n"));
    }
    for i in 1..=11 {
        text.push_str(&format!("part P{i} 1\n"));
    }
    fs::write(&asg, text).unwrap();
    let out = cellform(&[
        "score",
        "--builtin",
        "boctor-7x11",
        "--assignment",
        asg.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("PE 0.00%"));
}

#[test]
fn score_unknown_machine_names_offender() {
    let dir = tempfile::tempdir().unwrap();
    let asg = dir.path().join("bad.asg");
    fs::write(&asg, "machine M99 1\n").unwrap();
    let out = cellform(&[
        "score",
        "--builtin",
        "boctor-7x11",
        "--assignment",
        asg.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("M99"), "{}", stderr(&out));
}

#[test]
fn score_malformed_assignment_names_line() {
    let dir = tempfile::tempdir().unwrap();
    let asg = dir.path().join("bad.asg");
    fs::write(&asg, "machine M1 1\nmachine M2\n").unwrap();
    let out = cellform(&[
        "score",
        "--builtin",
        "boctor-7x11",
        "--assignment",
        asg.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn bench_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = cellform(&["bench", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 1);
}

#[test]
fn bench_boctor_row_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    write_boctor(dir.path(), "boctor.cfm");
    let out = cellform(&["bench", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let row = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(
        &fields[..8],
        ["boctor", "7", "11", "7x11", "3", "9.52", "76.00", "70.37"],
        "{text}"
    );

    fs::write(dir.path().join("boctor.expect.toml"), "ge = 70.37\ntolerance = 0.01\n").unwrap();
    let out = cellform(&["bench", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("GE +0.00 ok"));

    fs::write(dir.path().join("boctor.expect.toml"), "cells = 3\nge = 65.52\n").unwrap();
    let out = cellform(&["bench", dir.path().to_str().unwrap(), "--tolerance", "0.5"]);
    assert!(!out.status.success());
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn bench_skips_unreadable_instances() {
    let dir = tempfile::tempdir().unwrap();
    write_boctor(dir.path(), "a.cfm");
    fs::write(dir.path().join("b.cfm"), "not an instance\n").unwrap();
    fs::write(dir.path().join("notes.txt"), "ignored\n").unwrap();
    let out = cellform(&["bench", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().filter(|l| l.starts_with("a ")).count(), 1);
    assert!(stderr(&out).contains("b.cfm"), "{}", stderr(&out));
}

#[test]
fn log_env_enables_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("b.cfm"), "junk\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cellform"))
        .args(["bench", dir.path().to_str().unwrap()])
        .env("CELLFORM_LOG", "info")
        .output()
        .unwrap();
    assert!(stderr(&out).contains("WARN"), "{}", stderr(&out));
}
