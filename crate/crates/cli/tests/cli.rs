use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use quench_cli::io::{decode_dense, Checkpoint, NumericTable};

const SMALL: &str = "\
sites = 4
layers = 4,8,1
sampler = full
span = 2
dt = 0.1
t_final = 0.3
ranks = 2,3,50
";

fn quench(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quench")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    fs::write(&path, format!("{SMALL}{extra}")).unwrap();
    path
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn evolve_writes_the_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "export_dense = true\n");
    let out = quench(&["evolve", "-c", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let run = tmp.path().join("runs/quench/rep_00");
    for f in [
        "config.txt",
        "manifest.txt",
        "fig2_observables.csv",
        "fig2_infidelity.csv",
        "diagnostics.csv",
        "fig2_exact_observables.csv",
        "fig3_amplitude_phase.csv",
        "checkpoints/step_000000.ckpt",
        "checkpoints/step_000003.ckpt",
        "dense/exact_step_000003.bin",
    ] {
        assert!(run.join(f).exists(), "missing {f}");
    }
    let manifest = fs::read_to_string(run.join("manifest.txt")).unwrap();
    for key in ["code_version", "replicate_seed", "fit_seed", "completed_step = 3"] {
        assert!(manifest.contains(key), "manifest lacks {key}");
    }

    let obs = NumericTable::load(&run.join("fig2_observables.csv")).unwrap();
    assert_eq!(obs.columns[..4], ["step", "t", "energy", "sigma_x_1"]);
    assert_eq!(obs.rows.len(), 4);
    // the fitted state is |→…→⟩
    assert!((obs.rows[0][3] - 1.0).abs() < 1e-4);

    let inf = NumericTable::load(&run.join("fig2_infidelity.csv")).unwrap();
    let ie = inf.column("exact_infidelity").unwrap();
    let cum = inf.column("integrated_exact_infidelity").unwrap();
    assert!(inf.rows.iter().all(|r| r[ie].is_finite() && r[ie] < 1e-2));
    assert!(inf.rows.windows(2).all(|w| w[1][cum] >= w[0][cum]));
    let text = fs::read_to_string(run.join("fig2_infidelity.csv")).unwrap();
    let row = text.lines().nth(2).unwrap();
    let t = row.split(',').nth(1).unwrap();
    assert_eq!(t, "1.0000000000000001e-1");

    let ap = NumericTable::load(&run.join("fig3_amplitude_phase.csv")).unwrap();
    // rank 50 exceeds the 16 configurations and is dropped
    assert_eq!(ap.rows.len(), 4 * 2);
    let a = ap.column("amplitude_ratio").unwrap();
    let d = ap.column("phase_distance").unwrap();
    for r in ap.rows.iter().filter(|r| r[0] == 0.0) {
        assert!((r[a] - 1.0).abs() < 1e-3 && r[d].abs() < 1e-3);
    }

    let ck = Checkpoint::load(&run.join("checkpoints/step_000003.ckpt")).unwrap();
    assert_eq!(ck.step, 3);
    let dense = decode_dense(&fs::read(run.join("dense/exact_step_000003.bin")).unwrap()).unwrap();
    assert_eq!(dense.amplitudes().len(), 16);
}

#[test]
fn identical_configuration_gives_identical_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sampler = metropolis\nsamples = 200\nchains = 4\nmax_steps = 20\n");
    let c = cfg.to_str().unwrap();
    assert_eq!(code(&quench(&["evolve", "-c", c, "--set", "output=a"], tmp.path())), 0);
    assert_eq!(code(&quench(&["evolve", "-c", c, "--set", "output=b"], tmp.path())), 0);
    for f in ["fig2_observables.csv", "fig2_infidelity.csv", "diagnostics.csv", "fig3_amplitude_phase.csv"] {
        let a = fs::read(tmp.path().join("a/quench/rep_00").join(f)).unwrap();
        let b = fs::read(tmp.path().join("b/quench/rep_00").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
    }
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for e in fs::read_dir(from).unwrap() {
        let e = e.unwrap();
        let target = to.join(e.file_name());
        if e.file_type().unwrap().is_dir() {
            copy_dir(&e.path(), &target);
        } else {
            fs::copy(e.path(), target).unwrap();
        }
    }
}

#[test]
fn resume_reproduces_an_uninterrupted_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sampler = metropolis\nsamples = 200\nchains = 4\nmax_steps = 20\n");
    assert_eq!(code(&quench(&["evolve", "-c", cfg.to_str().unwrap()], tmp.path())), 0);
    let done = tmp.path().join("runs/quench/rep_00");
    let cut = tmp.path().join("cut");
    copy_dir(&done, &cut);
    // simulate a crash after step 1: later checkpoints never made it to disk
    fs::remove_file(cut.join("checkpoints/step_000002.ckpt")).unwrap();
    fs::remove_file(cut.join("checkpoints/step_000003.ckpt")).unwrap();
    let out = quench(&["resume", cut.to_str().unwrap()], tmp.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for f in ["fig2_observables.csv", "fig2_infidelity.csv", "diagnostics.csv", "checkpoints/step_000003.ckpt"] {
        assert_eq!(fs::read(done.join(f)).unwrap(), fs::read(cut.join(f)).unwrap(), "{f} differs after resume");
    }
}

#[test]
fn stats_over_replicates() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sampler = metropolis\nsamples = 100\nchains = 2\nmax_steps = 5\nreplicates = 3\nt_final = 0.1\n");
    assert_eq!(code(&quench(&["evolve", "-c", cfg.to_str().unwrap()], tmp.path())), 0);
    let runs: Vec<String> =
        (0..3).map(|r| tmp.path().join(format!("runs/quench/rep_{r:02}")).display().to_string()).collect();
    let mut args = vec!["stats"];
    args.extend(runs.iter().map(String::as_str));
    let out = quench(&args, tmp.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary = NumericTable::load(&tmp.path().join("runs/quench/summary_fig2_observables.csv")).unwrap();
    assert_eq!(summary.columns[..5], ["step", "t", "energy_mean", "energy_p10", "energy_p90"]);
    let out = quench(&["stats", &runs[0], &runs[1]], tmp.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("at least 3"));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "");
    let c = cfg.to_str().unwrap();

    let out = quench(&["prepare", "-c", c, "--set", "colour=blue"], tmp.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unknown configuration key"));

    let out = quench(&["evolve", "--set", "sites=16", "--set", "oracle=on", "--set", "t_final=0.1"], tmp.path());
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("at most 14 sites"), "{}", stderr(&out));

    let out = quench(&["prepare", "-c", c, "--set", "fit_target=1e-300", "--set", "fit_max_steps=1"], tmp.path());
    assert_eq!(code(&out), 4, "{}", stderr(&out));

    let out = Command::new(env!("CARGO_BIN_EXE_quench"))
        .args(["prepare", "-c", c])
        .env("QUENCH_THREADS", "zero")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);

    let out = Command::new(env!("CARGO_BIN_EXE_quench"))
        .args(["prepare", "-c", c, "--set", "name=threaded"])
        .env("QUENCH_THREADS", "1")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    // the merits of a long chain are refused on an existing run as well
    let run = tmp.path().join("long");
    fs::create_dir_all(run.join("checkpoints")).unwrap();
    fs::write(run.join("config.txt"), "sites = 16\n").unwrap();
    let out = quench(&["merits", run.to_str().unwrap()], tmp.path());
    assert_eq!(code(&out), 3);
}

#[test]
fn changed_configuration_is_not_mixed_into_an_existing_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "");
    let c = cfg.to_str().unwrap();
    assert_eq!(code(&quench(&["prepare", "-c", c], tmp.path())), 0);
    let out = quench(&["prepare", "-c", c], tmp.path());
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("exists"));
    let out = quench(&["prepare", "-c", c, "--set", "dt=0.05"], tmp.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn tvmc_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "method = tvmc\ndt = 0.01\nt_final = 0.1\nlayers = 4,6,1\ninit_noise = 0.3\nfit_max_steps = 2000\n");
    let out = quench(&["evolve", "-c", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let run = tmp.path().join("runs/quench/rep_00");
    let diag = NumericTable::load(&run.join("diagnostics.csv")).unwrap();
    assert_eq!(diag.rows.len(), 10);
    let obs = NumericTable::load(&run.join("fig2_observables.csv")).unwrap();
    assert_eq!(obs.rows.len(), 2);
}
