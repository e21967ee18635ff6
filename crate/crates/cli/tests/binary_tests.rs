use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn kit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coiso-kit")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let t4 = data("t4.coiso");
    let t4 = t4.to_str().unwrap();
    let ok = kit(&["run", t4, "--samples", "4"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("8*pi^2*cos(2*pi*y1)*cos(2*pi*y2)"));

    let failing = write(
        dir.path(),
        "fail.coiso",
        "chart base=(y1*, y2*, q1*, q2*) fibre=(p1, p2)\n\
         pi = inv_form(dy1/\\dy2 + dq1/\\dp1 + dq2/\\dp2)\n\
         a = (sin(2*pi*y1), sin(2*pi*y2))\n\
         check coisotropic a\n",
    );
    assert_eq!(kit(&["run", &failing, "--samples", "4"]).status.code(), Some(1));

    let bad = write(dir.path(), "bad.coiso", "chart base=(x) fibre=(y)\nf = x +\n");
    let out = kit(&["run", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2, column 8"), "{err}");
    assert!(out.stdout.is_empty());

    let runtime = write(dir.path(), "rt.coiso", "check pencil nowhere.txt 2\n");
    assert_eq!(kit(&["run", &runtime]).status.code(), Some(3));
    assert_eq!(kit(&["run", "/definitely/not/here.coiso"]).status.code(), Some(3));

    let inconclusive = data("inconclusive.coiso");
    let inconclusive = inconclusive.to_str().unwrap();
    assert_eq!(kit(&["run", inconclusive]).status.code(), Some(0));
    assert_eq!(kit(&["run", inconclusive, "--strict"]).status.code(), Some(1));
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let t4 = data("t4.coiso");
    let out = kit(&[
        "run",
        t4.to_str().unwrap(),
        "--samples",
        "4",
        "--format",
        "json",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(json["summary"]["exit_code"], 0);

    let unwritable = dir.path().join("missing-dir").join("r.txt");
    let out = kit(&["run", t4.to_str().unwrap(), "--samples", "4", "--out", unwritable.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn binary_output_matches_the_library_and_golden_file() {
    let out = kit(&["run", data("t4.coiso").to_str().unwrap(), "--samples", "8"]);
    let golden = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/t4.txt")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden);
}

#[test]
fn csv_flag_emits_convergence_rows() {
    let out = kit(&["run", data("sheared.coiso").to_str().unwrap(), "--samples", "2", "--truncation", "8", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("check,y1,y2,q1,q2,n,partial_p1_p2,oracle_p1_p2,abs_error\n"));
    assert_eq!(text.lines().count(), 1 + 16 * 8);
}
