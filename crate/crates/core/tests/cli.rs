use std::path::Path;
use std::process::{Command, Output};

fn moowarm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moowarm"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn generate(dir: &Path) -> String {
    let out = moowarm(
        dir,
        &["generate", "--family", "kp", "--size", "8", "--p", "2", "--seed", "3"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let name = "KP_008_2obj_3.json";
    assert!(dir.join(name).exists());
    name.to_string()
}

#[test]
fn solve_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path());
    let out = moowarm(
        dir.path(),
        &[
            "solve",
            "--instance",
            &inst,
            "--method",
            "ecm",
            "--grid",
            "6",
            "--signature",
            "o-",
            "--warm",
            "strong",
            "--propagate",
            "on",
            "--out",
            "run",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["report.csv", "summary.csv", "archive.csv"] {
        assert!(dir.path().join("run").join(f).exists(), "{f} missing");
    }
}

#[test]
fn verify_passes_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path());
    let ok = moowarm(
        dir.path(),
        &[
            "verify",
            "--instance",
            &inst,
            "--method",
            "wsm",
            "--samples",
            "20",
            "--warm",
            "weak",
        ],
    );
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stdout));
    let ok = moowarm(
        dir.path(),
        &["verify", "--instance", &inst, "--method", "ecm", "--grid", "full"],
    );
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stdout));

    // an oversized augmentation weight collapses the front to one point
    let bad = moowarm(
        dir.path(),
        &[
            "verify",
            "--instance",
            &inst,
            "--method",
            "ecm",
            "--grid",
            "full",
            "--rho",
            "100",
        ],
    );
    assert_eq!(code(&bad), 3);
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL"));
}

#[test]
fn invalid_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path());
    for args in [
        vec!["solve", "--instance", &inst, "--method", "wsm", "--warm", "strong"],
        vec!["solve", "--instance", &inst, "--method", "ecm", "--signature", "o+x"],
        vec!["solve", "--instance", &inst, "--method", "ecm", "--signature", "o++"],
        vec!["solve", "--instance", &inst, "--method", "simplex"],
        vec!["generate", "--family", "kp", "--size", "0", "--p", "2"],
    ] {
        let out = moowarm(dir.path(), &args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    std::fs::write(dir.path().join("broken.json"), "{").unwrap();
    let out = moowarm(dir.path(), &["solve", "--instance", "broken.json", "--method", "ecm"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn missing_file_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = moowarm(dir.path(), &["solve", "--instance", "absent.json", "--method", "ecm"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn report_and_analyze_order() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path());
    let out = moowarm(
        dir.path(),
        &[
            "report",
            "--instance",
            &inst,
            "--method",
            "wsm",
            "--method",
            "ecm",
            "--warm",
            "weak",
            "--warm",
            "strong",
            "--propagate",
            "on",
            "--samples",
            "10",
            "--grid",
            "4",
            "--out",
            "rep",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(dir.path().join("rep/summary.csv")).unwrap();
    assert!(summary.starts_with("instance,method,variant,rel_runtime,rel_iters,warm_starts,detections"));

    let out = moowarm(
        dir.path(),
        &["analyze-order", "--instance", &inst, "--grid", "5", "--out", "ord"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("ord/tradeoff.csv")).unwrap();
    assert!(csv.starts_with("signature,ws_mode,warm_starts,detections,nondominated"));
}
