use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

fn sphgeom() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sphgeom"))
}

// Worker threads log progress to stderr while the report goes to stdout.
#[test]
fn experiment_runs_with_progress_on_several_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut child = sphgeom()
        .args(["experiment", "--ell", "12,20", "--n", "24", "--seed", "3", "--threads", "3"])
        .arg("--out")
        .arg(dir.path())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let start = Instant::now();
    while child.try_wait().unwrap().is_none() {
        if start.elapsed() > Duration::from_secs(120) {
            child.kill().unwrap();
            panic!("experiment did not finish");
        }
        std::thread::sleep(Duration::from_millis(50));
    }
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("ell=20 area u=0"), "{stdout}");
    assert!(dir.path().join("report.json").exists());
    assert!(dir.path().join("summary.csv").exists());
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        let st = sphgeom()
            .args(["experiment", "--ell", "16", "--n", "10", "--seed", "8", "--format", "json", "--threads", threads])
            .arg("--out")
            .arg(dir.path())
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .unwrap();
        assert!(st.success());
        std::fs::read_to_string(dir.path().join("report.json")).unwrap()
    };
    let one = run("1");
    assert!(one == run("4"), "report changed with the thread count");
}

#[test]
fn unknown_subcommand_fails() {
    let out = sphgeom().arg("frobnicate").output().unwrap();
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}

#[test]
fn theory_prints_nodal_prediction() {
    let out = sphgeom().args(["theory", "--k", "1", "--ell", "100", "--u", "0"]).output().unwrap();
    assert!(out.status.success());
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("17.76"), "{s}");
}
