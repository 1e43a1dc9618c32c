use std::path::Path;
use std::process::Command;

use fracwave_harness::cli::run_from;
use fracwave_harness::{Outcome, ResultTable};

fn run(out: &Path, args: &[&str]) -> Outcome {
    let out = out.to_str().unwrap();
    run_from(["fracwave", "--out", out].iter().copied().chain(args.iter().copied()))
}

const SMALL_SIM: &str = "half_extent=64.0,points=512,dt=0.1,t_end=100.0,threshold=1e3,record_interval=1.0,width=1.0";

#[test]
fn empty_matrix_gives_empty_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["--set", "verify_lemmas.cells=[]", "verify-lemmas"]), Outcome::Pass);
    let (t, _) = ResultTable::read(&dir.path().join("decay_lemma.csv")).unwrap();
    assert!(t.is_empty());
}

#[test]
fn wrong_majorant_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let cell = "verify_lemmas.cells=[{n=3,q=4.0,gamma=0.75}]";
    assert_eq!(run(dir.path(), &["--set", cell, "verify-lemmas"]), Outcome::Pass);
    assert_eq!(
        run(dir.path(), &["--set", cell, "verify-lemmas", "--inject-wrong-majorant"]),
        Outcome::AssertionFailure
    );
}

#[test]
fn testfn_presets_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["testfn"]), Outcome::Pass);
    let (t, meta) = ResultTable::read(&dir.path().join("testfn.csv")).unwrap();
    assert_eq!(t.rows.len(), 4);
    let slope = meta.summary["rhs_slope"].as_f64().unwrap();
    assert!((slope + 1.4).abs() < 0.05 * 1.4);

    assert_eq!(run(dir.path(), &["testfn", "--preset", "zero-data"]), Outcome::Pass);
    let (t, _) = ResultTable::read(&dir.path().join("testfn.csv")).unwrap();
    for col in ["data_term", "i_r", "j1", "j2", "j3", "identity_residual"] {
        assert!(t.numeric_column(col).unwrap().iter().all(|v| *v == 0.0), "{col}");
    }
    assert_eq!(run(dir.path(), &["testfn", "--preset", "negative-data"]), Outcome::AssertionFailure);
}

#[test]
fn blowup_verdicts_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let sim = format!("blowup.sim={{sigma=1.0,delta=0.0,n=1,p=2.0,{SMALL_SIM}}}");
    assert_eq!(run(dir.path(), &["--set", &sim, "blowup", "--expect", "blew-up"]), Outcome::Pass);
    let run_json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("blowup_run.json")).unwrap()).unwrap();
    assert_eq!(run_json["record"]["verdict"]["kind"], "blew-up");
    let (summary, _) = ResultTable::read(&dir.path().join("blowup_summary.csv")).unwrap();
    assert_eq!(summary.numeric_column("range_hi").unwrap(), vec![3.0]);

    assert_eq!(run(dir.path(), &["--set", &sim, "blowup", "--expect", "completed"]), Outcome::AssertionFailure);
    assert_eq!(run(dir.path(), &["--set", &sim, "blowup", "--expect", "exploded"]), Outcome::Usage);
    assert_eq!(run(dir.path(), &["--set", &sim, "blowup", "--p", "0.5"]), Outcome::Usage);
    assert_eq!(run(dir.path(), &["--set", &sim, "--set", "blowup.sim.points=500", "blowup"]), Outcome::Usage);
}

#[test]
fn single_epsilon_lifespan_has_no_fit() {
    let dir = tempfile::tempdir().unwrap();
    let sim = format!("lifespan.sim={{sigma=1.0,delta=0.0,n=1,p=2.0,{SMALL_SIM}}}");
    assert_eq!(run(dir.path(), &["--set", &sim, "--set", "lifespan.epsilons=[1.0]", "lifespan"]), Outcome::Pass);
    let (t, meta) = ResultTable::read(&dir.path().join("lifespan.csv")).unwrap();
    assert_eq!(t.rows.len(), 1);
    assert!(meta.summary["slope"].is_null());
}

#[test]
fn outputs_are_deterministic_across_worker_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let sim = format!("lifespan.sim={{sigma=1.0,delta=0.0,n=1,p=2.0,{SMALL_SIM}}}");
    for (dir, workers) in [(&a, "1"), (&b, "4")] {
        let common = ["--seed", "3", "--workers", workers, "--set", &sim, "--set", "lifespan.epsilons=[1.0,0.5,0.25]"];
        assert_eq!(run(dir.path(), &[&common[..], &["selftest", "--cases", "4"]].concat()), Outcome::Pass);
        run(dir.path(), &[&common[..], &["lifespan"]].concat());
    }
    for f in ["selftest.csv", "selftest.json", "lifespan.csv", "lifespan.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
}

#[test]
fn figures_then_verify_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["testfn"]), Outcome::Pass);
    assert_eq!(run(dir.path(), &["figures"]), Outcome::Pass);
    let svg = std::fs::read_to_string(dir.path().join("testfn.svg")).unwrap();
    assert!(svg.contains("stroke-dasharray"));
    assert_eq!(run(dir.path(), &["verify"]), Outcome::Pass);
    assert_eq!(run(dir.path(), &["--seed", "0", "verify"]), Outcome::Pass);
    assert_eq!(run(dir.path(), &["--seed", "1", "verify"]), Outcome::AssertionFailure);

    let csv = dir.path().join("testfn.csv");
    let text = std::fs::read_to_string(&csv).unwrap();
    std::fs::write(&csv, text.replacen("\r\n10,", "\r\n11,", 1)).unwrap();
    assert_eq!(run(dir.path(), &["verify"]), Outcome::AssertionFailure);

    std::fs::write(&csv, "r\r\n").unwrap();
    assert_eq!(run(dir.path(), &["figures"]), Outcome::Usage);
}

#[test]
fn binary_honours_the_output_variable_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let exe = env!("CARGO_BIN_EXE_fracwave");
    let status = Command::new(exe)
        .args(["--set", "verify_lemmas.cells=[]", "verify-lemmas"])
        .env("FRACWAVE_OUT", dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(dir.path().join("decay_lemma.csv").exists());

    let status = Command::new(exe)
        .args(["testfn", "--preset", "negative-data"])
        .env("FRACWAVE_OUT", dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let status = Command::new(exe).arg("bogus").status().unwrap();
    assert_eq!(status.code(), Some(2));

    // --out wins over the variable
    let other = tempfile::tempdir().unwrap();
    let status = Command::new(exe)
        .args(["--out", other.path().to_str().unwrap(), "--set", "verify_lemmas.cells=[]", "verify-lemmas"])
        .env("FRACWAVE_OUT", dir.path().join("unused"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(other.path().join("decay_lemma.csv").exists());
    assert!(!dir.path().join("unused").exists());
}

#[test]
fn config_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fracwave_harness::ExperimentConfig::default();
    let path = dir.path().join("exp.toml");
    std::fs::write(&path, cfg.to_toml()).unwrap();
    let loaded = fracwave_harness::ExperimentConfig::load(&path).unwrap();
    assert_eq!(loaded.hash(), cfg.hash());
}
