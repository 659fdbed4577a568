use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ksbox(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ksbox"));
    cmd.args(args).env_remove("KS_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const DAMPED: &str = r#"
resolution = 8

[domain]
lengths = [2.0, 2.0]

[initial]
kind = "random"
amplitude = 0.05
seed = 3

[solver]
dt = 5e-3
t_end = 0.2
record_every = 4

[constants]
cs = 0.07

[verify]
samples = 50
resolution = 6
ode_samples = 10
gronwall_samples = 5
"#;

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write_config(dir.path(), "ok.toml", DAMPED);
    let o = ksbox(&["check", "--config", ok.to_str().unwrap(), "--quiet"], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let line = String::from_utf8(o.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(line.lines().last().unwrap()).unwrap();
    assert_eq!(v["smallness_ok"], true);

    let big = write_config(
        dir.path(),
        "big.toml",
        &DAMPED.replace("amplitude = 0.05", "amplitude = 50.0"),
    );
    assert_eq!(
        code(&ksbox(
            &["check", "--config", big.to_str().unwrap(), "--quiet"],
            &[]
        )),
        3
    );

    let wide = write_config(
        dir.path(),
        "wide.toml",
        &DAMPED.replace("[2.0, 2.0]", "[30.0, 30.0]"),
    );
    let out = dir.path().join("cond");
    let o = ksbox(
        &[
            "check",
            "--config",
            wide.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&o), 2);
    assert!(out.join("condition.json").exists());
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let typo = write_config(
        dir.path(),
        "typo.toml",
        &DAMPED.replace("[solver]\n", "[solver]\nstep = 1\n"),
    );
    let o = ksbox(&["simulate", "--config", typo.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("solver"));
    assert_eq!(code(&ksbox(&["check"], &[])), 1);
    assert_eq!(code(&ksbox(&["frobnicate"], &[])), 1);
    assert_eq!(code(&ksbox(&["--help"], &[])), 0);
    let ok = write_config(dir.path(), "ok.toml", DAMPED);
    let o = ksbox(
        &["check", "--config", ok.to_str().unwrap()],
        &[("KS_THREADS", "zero")],
    );
    assert_eq!(code(&o), 1);
}

#[test]
fn simulate_writes_outputs_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", DAMPED);
    let mut csvs = Vec::new();
    for (i, threads) in ["1", "3"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let o = ksbox(
            &[
                "simulate",
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--quiet",
                "--seed",
                "9",
            ],
            &[("KS_THREADS", threads)],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        for f in [
            "log.jsonl",
            "energy.csv",
            "decay.json",
            "final_u1.txt",
            "final_u2.txt",
        ] {
            assert!(out.join(f).exists(), "{f}");
        }
        csvs.push(std::fs::read(out.join("energy.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    let text = String::from_utf8(csvs.pop().unwrap()).unwrap();
    assert_eq!(text.lines().count(), 1 + 11);
}

#[test]
fn zero_data_simulation_stays_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "zero.toml",
        &DAMPED.replace("amplitude = 0.05", "amplitude = 0.0"),
    );
    let out = dir.path().join("zero");
    let o = ksbox(
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--quiet",
        ],
        &[],
    );
    assert_eq!(code(&o), 0);
    let decay: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("decay.json")).unwrap()).unwrap();
    assert_eq!(decay["final_energy"], 0.0);
    assert_eq!(decay["status"], "completed");
}

#[test]
fn simulate_reports_blowup() {
    let dir = tempfile::tempdir().unwrap();
    let body = DAMPED
        .replace("[2.0, 2.0]", "[30.0, 30.0]")
        .replace("resolution = 8", "resolution = 24")
        .replace("amplitude = 0.05", "amplitude = 1.0")
        .replace(
            "dt = 5e-3\nt_end = 0.2",
            "dt = 0.02\nt_end = 20.0\nblowup_factor = 2.0",
        );
    let cfg = write_config(dir.path(), "blow.toml", &body);
    let out = dir.path().join("blow");
    let o = ksbox(
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--quiet",
        ],
        &[],
    );
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn verify_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "v.toml", DAMPED);
    let mut reports = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("v{i}"));
        let o = ksbox(
            &[
                "verify",
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--seed",
                "5",
            ],
            &[],
        );
        assert_eq!(code(&o), 0);
        assert!(String::from_utf8_lossy(&o.stdout).contains("PASS steklov"));
        reports.push(std::fs::read(out.join("verify.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn sweep_and_estimate_cs() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{}\n[sweep]\nlengths = [[2.0, 3.0], [2.0]]\namplitudes = [0.0, 0.05]\n",
        DAMPED.replace(
            "[constants]\ncs = 0.07",
            "[constants]\ncs = 0.07\nestimate_trials = 20"
        )
    );
    let cfg = write_config(dir.path(), "s.toml", &body);
    let out = dir.path().join("s");
    let o = ksbox(
        &[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--quiet",
        ],
        &[],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert_eq!(
        std::fs::read_to_string(out.join("sweep.jsonl"))
            .unwrap()
            .lines()
            .count(),
        4
    );

    let o = ksbox(
        &[
            "estimate-cs",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--quiet",
        ],
        &[],
    );
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["recommended"].as_f64().unwrap() > v["cs_hat"].as_f64().unwrap());
    assert!(out.join("cs_estimate.json").exists());
}
