use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn metabio(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metabio"))
        .args(args)
        .env("RUST_LOG", "warn")
        .env_remove("METABIO_OUT_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden").join(name);
    fs::read_to_string(p).unwrap()
}

#[test]
fn evolve_intelligent_design() {
    let o = metabio(&["evolve", "--scenario", "id", "--model", "classical", "--n", "32", "--seed", "7"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "T=32\n");
}

#[test]
fn several_seeds_and_hex() {
    let o = metabio(&["evolve", "--scenario", "id", "--n", "5", "--seed", "0x10,3"]);
    assert_eq!(stdout(&o), "seed=16 T=5\nseed=3 T=5\n");
}

#[test]
fn exit_codes() {
    let o = metabio(&["evolve", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(metabio(&["evolve", "--scenario", "exhaustive", "--n", "40"]).status.code(), Some(2));
    assert_eq!(
        metabio(&["sweep", "--scenario", "cumulative", "--mode", "simulate", "--n", "8,600"]).status.code(),
        Some(2)
    );
    let o = metabio(&["evolve", "--scenario", "cumulative", "--oracle", "enumerated", "--max-len", "10", "--n", "4"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(metabio(&["--help"]).status.code(), Some(0));
}

#[test]
fn bb_matches_golden_table() {
    let o = metabio(&["bb", "--max-n", "12", "--budget", "100000"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), golden("bb_n12_b100000.csv"));
}

#[test]
fn sweep_fit_selects_power() {
    let o = metabio(&[
        "sweep", "--scenario", "cumulative", "--model", "classical", "--n", "8,16,32,64,128", "--seeds", "30", "--fit",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("\"schema_version\": 1"));
    assert!(text.contains("\"model\": \"Power\""), "{text}");
}

#[test]
fn outputs_are_byte_identical_across_runs_and_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (i, jobs) in ["1", "4", "4"].iter().enumerate() {
        let out = dir.path().join(format!("s{i}.csv"));
        let runs = dir.path().join(format!("r{i}.csv"));
        let o = metabio(&[
            "sweep", "--scenario", "cumulative", "--model", "q-ent", "--n", "4..9", "--seeds", "12", "--jobs", jobs,
            "--out", out.to_str().unwrap(), "--runs", runs.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        files.push((fs::read(out).unwrap(), fs::read(runs).unwrap()));
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[1], files[2]);
}

#[test]
fn fit_reads_sweep_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("samples.csv");
    let o = metabio(&[
        "sweep", "--scenario", "exhaustive", "--n", "4,8,12,16", "--seeds", "10", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = metabio(&["fit", "--input", out.to_str().unwrap(), "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("model,parameter,intercept,residual,chosen\n"));
    assert!(text.contains("Exponential,") && text.lines().any(|l| l.starts_with("Exponential,") && l.ends_with(",true")));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# defaults\nscenario = id\nn = 9\nseed = 1\n").unwrap();
    let o = metabio(&["evolve", "--config", cfg.to_str().unwrap(), "--n", "11"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "T=11\n");
    fs::write(&cfg, "nonsense\n").unwrap();
    assert_eq!(metabio(&["evolve", "--config", cfg.to_str().unwrap(), "--n", "3"]).status.code(), Some(1));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_metabio"))
        .args(["evolve", "--scenario", "id", "--n", "4", "--out", "nested/runs.json", "--format", "json"])
        .env("METABIO_OUT_DIR", dir.path())
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(stdout(&o), "T=4\n");
    let text = fs::read_to_string(dir.path().join("nested/runs.json")).unwrap();
    assert!(text.contains("\"schema_version\": 1") && text.contains("\"T\": \"4\""));
}

#[test]
fn every_subcommand_speaks_json() {
    for args in [
        vec!["evolve", "--scenario", "id", "--n", "3"],
        vec!["sweep", "--scenario", "id", "--n", "1..5", "--seeds", "2"],
        vec!["omega", "--max-len", "10"],
        vec!["bb", "--max-n", "6"],
        vec!["netcomp", "--states", "ghz", "--n", "3"],
    ] {
        let mut a = args.clone();
        a.extend(["--format", "json"]);
        let o = metabio(&a);
        assert!(o.status.success(), "{args:?}");
        assert!(stdout(&o).starts_with("{\n  \"schema_version\": 1"), "{args:?}");
    }
}

#[test]
fn netcomp_reports_bell_pair() {
    let o = metabio(&["netcomp", "--states", "ghz", "--n", "2"]);
    let text = stdout(&o);
    let row = text.lines().nth(1).unwrap();
    assert!(row.contains("\"[H q0, CNOT q0->q1]\""), "{row}");
    assert!(row.contains("MaxRankAllCuts"));
    assert_eq!(metabio(&["netcomp", "--n", "5"]).status.code(), Some(2));
}
