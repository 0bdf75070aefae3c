use std::fs;
use std::path::PathBuf;

use metabio::analysis::{
    fit_points, fit_scaling, from_json, read_samples_csv, sweep, to_json, write_samples_csv,
    SampleSet, ScalingModel, ScalingSample, SweepOptions,
};
use metabio::evolution::{Mode, OrganismModel, Scenario, ScenarioSpec};
use metabio::rng::{stream_rng, Stream};
use proptest::prelude::*;
use rand_distr::{Distribution, Normal};

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn cumulative() -> ScenarioSpec {
    ScenarioSpec::new(Scenario::Cumulative, OrganismModel::Classical, Mode::FastForward)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn power_laws_recovered(d in 1.2f64..4.0, c in 0.5f64..50.0) {
        let pts: Vec<(f64, f64)> = [8.0, 16.0, 32.0, 64.0, 128.0, 256.0]
            .iter()
            .map(|&n: &f64| (n, c * n.powf(d)))
            .collect();
        let fit = fit_points(&pts).unwrap();
        prop_assert_eq!(fit.model, ScalingModel::Power);
        prop_assert!((fit.parameter - d).abs() < 1e-9);
    }

    #[test]
    fn exponentials_recovered(r in 0.3f64..2.0, c in 0.5f64..50.0) {
        let pts: Vec<(f64, f64)> = (4..=18).map(|n| (n as f64, c * (r * n as f64).exp2())).collect();
        let fit = fit_points(&pts).unwrap();
        prop_assert_eq!(fit.model, ScalingModel::Exponential);
        prop_assert!((fit.parameter - r).abs() < 1e-9);
    }
}

/// Multiplicative noise of a few percent does not change the chosen
/// family, and moves the exponent only slightly.
#[test]
fn fits_tolerate_noise() {
    let mut rng = stream_rng(1, Stream::Sampler);
    let noise = Normal::new(0.0, 0.03).unwrap();
    for _ in 0..50 {
        let pts: Vec<(f64, f64)> = [8.0f64, 16.0, 32.0, 64.0, 128.0]
            .iter()
            .map(|&n| (n, 3.0 * n.powf(2.2) * (1.0 + noise.sample(&mut rng))))
            .collect();
        let fit = fit_points(&pts).unwrap();
        assert_eq!(fit.model, ScalingModel::Power);
        assert!((fit.parameter - 2.2).abs() < 0.1, "{}", fit.parameter);
    }
}

#[test]
fn sweeps_do_not_depend_on_jobs() {
    let ns = [8, 16, 32];
    let seeds: Vec<u64> = (1..=12).collect();
    let run = |jobs| sweep(&cumulative(), &ns, &seeds, SweepOptions { jobs: Some(jobs), timing: false }).unwrap();
    let one = run(1);
    assert_eq!(one, run(8));
    assert_eq!(one, run(3));
}

#[test]
fn samples_csv_golden() {
    let seeds: Vec<u64> = (1..=5).collect();
    let report = sweep(&cumulative(), &[8, 16, 32, 64], &seeds, SweepOptions::default()).unwrap();
    let mut buf = Vec::new();
    write_samples_csv(&report.samples, &mut buf).unwrap();
    let path = golden_path("samples_cumulative_ff.csv");
    if std::env::var_os("METABIO_BLESS_GOLDEN").is_some() {
        fs::write(&path, &buf).unwrap();
    }
    let golden = fs::read(&path).unwrap();
    assert_eq!(buf, golden);

    let back = read_samples_csv(&golden[..]).unwrap();
    for (a, b) in back.iter().zip(&report.samples) {
        assert_eq!((a.n, a.trials), (b.n, b.trials));
        assert_eq!(a.mean_t.to_bits(), b.mean_t.to_bits());
        assert_eq!(a.std_t.to_bits(), b.std_t.to_bits());
    }
    let mut again = Vec::new();
    write_samples_csv(&back, &mut again).unwrap();
    assert_eq!(again, golden);
}

#[test]
fn stochastic_runs_spread() {
    let r = sweep(&cumulative(), &[16], &(1..=30).collect::<Vec<_>>(), SweepOptions::default()).unwrap();
    assert!(r.samples[0].std_t > 0.0);
    assert_eq!(r.samples[0].trials, 30);
}

#[test]
fn json_round_trip() {
    let samples = vec![
        ScalingSample::from_times(4, vec![1, 2, 3], &[10.0, 12.5, 1.0 / 3.0]),
        ScalingSample::from_times(8, vec![1], &[1e300]),
    ];
    let set = SampleSet { samples };
    let text = to_json(&set).unwrap();
    assert!(text.contains("\"schema_version\": 1"));
    let back: SampleSet = from_json(&text).unwrap();
    assert_eq!(back, set);
    assert!(from_json::<SampleSet>(&text.replace("\"schema_version\": 1", "\"schema_version\": 2")).is_err());
}

#[test]
fn too_few_points_rejected() {
    let s: Vec<ScalingSample> = (1..=3).map(|n| ScalingSample::from_times(n, vec![], &[n as f64])).collect();
    assert!(fit_scaling(&s).is_err());
}
