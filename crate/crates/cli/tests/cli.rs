//! End-to-end runs of the cauchy-reg binary.

use std::path::PathBuf;
use std::process::Command;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cauchy-reg"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cauchy-reg-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn solve_emits_grid_and_exits_zero() {
    let dir = temp_dir("solve");
    let output = binary()
        .args([
            "solve",
            "--epsilon",
            "1e-3",
            "--modes",
            "2",
            "--time-steps",
            "8",
            "--space-points",
            "10",
            "--seed",
            "5",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let csv = std::fs::read_to_string(dir.join("solution.csv")).unwrap();
    assert!(csv.starts_with("t,x,v,u_exact\n"));
    assert_eq!(csv.lines().count(), 1 + 9 * 11);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn table1_round_trip_is_byte_identical() {
    let dir1 = temp_dir("t1a");
    let dir2 = temp_dir("t1b");
    for dir in [&dir1, &dir2] {
        let output = binary()
            .args([
                "table1",
                "--epsilon",
                "1e-2,1e-3",
                "--seed",
                "9",
                "--format",
                "json",
                "--out",
            ])
            .arg(dir)
            .output()
            .unwrap();
        assert!(output.status.success(), "{output:?}");
    }
    let a = std::fs::read(dir1.join("table1.json")).unwrap();
    let b = std::fs::read(dir2.join("table1.json")).unwrap();
    assert_eq!(a, b);
    let _ = std::fs::remove_dir_all(&dir1);
    let _ = std::fs::remove_dir_all(&dir2);
}

#[test]
fn config_file_with_cli_override() {
    let dir = temp_dir("cfg");
    let cfg_path = dir.join("run.conf");
    std::fs::write(&cfg_path, "epsilon = 1e-3\nmodes = 3\ntime_steps = 8\nspace_points = 10\n")
        .unwrap();
    let output = binary()
        .arg("table1")
        .arg("--config")
        .arg(&cfg_path)
        .args(["--modes", "2", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let csv = std::fs::read_to_string(dir.join("table1.csv")).unwrap();
    // The CLI flag overrides the config file's modes = 3.
    for line in csv.lines().skip(1) {
        assert_eq!(line.split(',').nth(1).unwrap(), "2");
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn invalid_input_fails_with_error_line() {
    let output = binary()
        .args(["table1", "--epsilon", "2.5"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.starts_with("error: "), "stderr was: {stderr}");

    let output = binary()
        .args(["stability", "--noise", "off"])
        .output()
        .unwrap();
    assert!(!output.status.success());
}
