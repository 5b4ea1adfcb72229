use std::process::Command;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mcmc-mimo"));
    cmd.env("MIMO_MCMC_THREADS", "2");
    cmd
}

const SMALL: &str = "[sim]\nsnr_db = 4,8\nmax_trials = 200\ntarget_errors = 20\nseed = 3\n\n[system]\nk = 4\nn = 4\n";

#[test]
fn simulate_writes_identical_csv_for_identical_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    std::fs::write(&cfg, SMALL).unwrap();
    let mut outputs = Vec::new();
    for (name, threads) in [("a.csv", "1"), ("b.csv", "3")] {
        let out = dir.path().join(name);
        let status = bin()
            .args(["--threads", threads, "simulate", "--config"])
            .arg(&cfg)
            .args(["--set", "detector.kind=rmcmc", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read_to_string(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let lines: Vec<&str> = outputs[0].lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("snr_db,iteration,trials,bits,bit_errors,ber,"));
    assert!(!lines[0].contains("wall_time"));
}

#[test]
fn wall_time_flag_adds_a_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let status = bin()
        .args(["simulate", "--set", "system.k=2", "--set", "system.n=2", "--set", "sim.max_trials=10"])
        .args(["--wall-time", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().next().unwrap().ends_with(",wall_time"));
}

#[test]
fn bad_keys_fail_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let res = bin()
        .args(["simulate", "--set", "system.q=3", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("system.q"));

    let res = bin()
        .args(["simulate", "--set", "system.k=0", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("system.k"));
    assert!(!out.exists());
}

#[test]
fn oracle_check_reports_pass() {
    let res = bin()
        .args(["oracle-check", "--k", "2", "--mod", "4", "--snr", "8", "--trials", "2000", "--seed", "5"])
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(res.status.success(), "{stdout}");
    assert!(stdout.starts_with("PASS"), "{stdout}");
}

#[test]
fn oracle_check_exit_codes_follow_the_verdict() {
    // With zero tolerance the verdict depends on exact BER agreement; the exit code must match it.
    let res = bin()
        .args(["oracle-check", "--k", "2", "--snr", "0", "--trials", "300", "--sigmas", "0", "--detector", "rmcmc"])
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&res.stdout);
    if stdout.starts_with("FAIL") {
        assert_eq!(res.status.code(), Some(1));
    } else {
        assert!(res.status.success());
    }

    let res = bin().args(["oracle-check", "--k", "9", "--mod", "16"]).output().unwrap();
    assert_eq!(res.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&res.stderr).is_empty());
}

#[test]
fn dump_and_replay_a_frame() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("frame.mmcf");
    let sets = ["--set", "sim.scenario=flat-estimated", "--set", "system.k=4", "--set", "system.n=4", "--set", "frame.q=2"];
    let status = bin()
        .arg("dump-frame")
        .args(sets)
        .args(["--trial", "7", "--out"])
        .arg(&rec)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(&std::fs::read(&rec).unwrap()[..4], b"MMCF");
    let run = |_: ()| {
        bin()
            .arg("replay")
            .args(sets)
            .arg("--record")
            .arg(&rec)
            .output()
            .unwrap()
    };
    let (a, b) = (run(()), run(()));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8_lossy(&a.stdout);
    assert_eq!(text.lines().count(), 3, "{text}");
    assert!(text.contains("mse"));
}

#[test]
fn keys_lists_every_section() {
    let res = bin().arg("keys").output().unwrap();
    let text = String::from_utf8_lossy(&res.stdout);
    for section in ["sim.", "system.", "detector.", "frame."] {
        assert!(text.lines().any(|l| l.starts_with(section)));
    }
}

#[test]
fn every_recipe_parses_and_validates() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../recipes");
    let mut names = Vec::new();
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = mcmc_mimo::harness::SimConfig::load(&path).unwrap();
        cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        names.push(path.file_stem().unwrap().to_string_lossy().into_owned());
    }
    for fig in ["fig2", "fig3", "fig4", "fig6", "fig11", "fig12", "fig14", "fig16", "table1"] {
        assert!(names.iter().any(|n| n == fig), "missing {fig}");
        assert!(names.iter().any(|n| *n == format!("{fig}-desk")), "missing {fig}-desk");
    }
}
