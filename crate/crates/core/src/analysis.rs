//! Sweeps over `(N, seed)`, scaling-law fits, and CSV/JSON export.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Instant;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evolution::{run_once, EvolutionError, RunOutcome, ScenarioSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// Aggregated evolution time at one `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSample {
    #[serde(rename = "N")]
    pub n: u64,
    pub trials: u64,
    #[serde(rename = "mean_T")]
    pub mean_t: f64,
    #[serde(rename = "std_T")]
    pub std_t: f64,
    #[serde(default)]
    pub seeds: Vec<u64>,
}

impl ScalingSample {
    /// Mean and sample standard deviation of `ts`.
    pub fn from_times(n: u64, seeds: Vec<u64>, ts: &[f64]) -> Self {
        let trials = ts.len();
        let mean = ts.iter().sum::<f64>() / trials as f64;
        let std = if trials > 1 {
            (ts.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (trials - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            n,
            trials: trials as u64,
            mean_t: mean,
            std_t: std,
            seeds,
        }
    }

    pub fn standard_error(&self) -> f64 {
        self.std_t / (self.trials as f64).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScalingModel {
    Linear,
    Power,
    Exponential,
    DoubleExponential,
}

impl ScalingModel {
    pub const ALL: [ScalingModel; 4] = [
        Self::Linear,
        Self::Power,
        Self::Exponential,
        Self::DoubleExponential,
    ];

    /// Maps `(N, T)` to the coordinates in which the model is a line.
    fn transform(self, n: f64, t: f64) -> Option<(f64, f64)> {
        let p = match self {
            Self::Linear => (n, t),
            Self::Power => (n.ln(), t.ln()),
            Self::Exponential => (n, t.log2()),
            Self::DoubleExponential => (n, t.log2().log2()),
        };
        (p.0.is_finite() && p.1.is_finite()).then_some(p)
    }
}

impl fmt::Display for ScalingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for ScalingModel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown model {s:?}"))
    }
}

/// Least-squares line in one model's coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub model: ScalingModel,
    /// Linear slope, power exponent, base-2 growth rate, or base-2 rate of
    /// the inner exponential, by model.
    pub parameter: f64,
    pub intercept: f64,
    /// Mean squared error over the variance of the transformed `T`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ScalingModel,
    pub parameter: f64,
    pub fits: Vec<ModelFit>,
}

impl FitResult {
    pub fn fit_for(&self, model: ScalingModel) -> Option<&ModelFit> {
        self.fits.iter().find(|f| f.model == model)
    }

    pub fn residual(&self, model: ScalingModel) -> Option<f64> {
        self.fit_for(model).map(|f| f.residual)
    }
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("need at least 4 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample N values must be distinct")]
    DuplicateN,
    #[error("degenerate data: {0}")]
    Degenerate(&'static str),
    #[error("every run at N = {n} aborted: {reason}")]
    AllAborted {
        n: u64,
        reason: String,
        /// The last abort was an undecidable oracle comparison.
        unknown: bool,
    },
    #[error("empty N or seed list")]
    EmptySweep,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("bad CSV: {0}")]
    Format(String),
    #[error(transparent)]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

/// Residuals within this of each other count as a tie.
const TIE: f64 = 1e-12;

fn least_squares(points: &[(f64, f64)]) -> Option<ModelFit> {
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    Some(ModelFit {
        model: ScalingModel::Linear,
        parameter: slope,
        intercept,
        residual: (sse / m) / (syy / m),
    })
}

/// Fits all four families to `(N, T)` points and picks the one with the
/// smallest normalized residual, preferring the simpler family on ties.
pub fn fit_points(points: &[(f64, f64)]) -> Result<FitResult, AnalysisError> {
    if points.len() < 4 {
        return Err(AnalysisError::TooFewSamples(points.len()));
    }
    let mut ns: Vec<f64> = points.iter().map(|p| p.0).collect();
    ns.sort_by(f64::total_cmp);
    if ns.windows(2).any(|w| w[0] == w[1]) {
        return Err(AnalysisError::DuplicateN);
    }
    if points.iter().any(|p| !(p.0 > 0.0 && p.1 > 0.0)) {
        return Err(AnalysisError::Degenerate("N and T must be positive"));
    }
    let t0 = points[0].1;
    if points.iter().all(|p| p.1 == t0) {
        return Err(AnalysisError::Degenerate("T is constant"));
    }
    let mut fits = Vec::new();
    for model in ScalingModel::ALL {
        if model == ScalingModel::DoubleExponential && points.iter().any(|p| p.1 < 4.0) {
            continue;
        }
        let tp: Option<Vec<(f64, f64)>> = points.iter().map(|&(n, t)| model.transform(n, t)).collect();
        if let Some(fit) = tp.as_deref().and_then(least_squares) {
            fits.push(ModelFit { model, ..fit });
        }
    }
    let best = fits
        .iter()
        .fold(None::<&ModelFit>, |best, f| match best {
            Some(b) if b.residual <= f.residual + TIE => Some(b),
            _ => Some(f),
        })
        .ok_or(AnalysisError::Degenerate("no model could be fitted"))?;
    Ok(FitResult {
        model: best.model,
        parameter: best.parameter,
        fits,
    })
}

pub fn fit_scaling(samples: &[ScalingSample]) -> Result<FitResult, AnalysisError> {
    let points: Vec<(f64, f64)> = samples.iter().map(|s| (s.n as f64, s.mean_t)).collect();
    fit_points(&points)
}

/// One row of a run trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: u64,
    pub scenario: String,
    #[serde(rename = "N")]
    pub n: u64,
    pub seed: u64,
    /// Decimal; analytic counts overflow every machine integer.
    #[serde(rename = "T")]
    pub t: String,
    pub accepted: u64,
    pub wall_ms: u64,
    pub regime: String,
    pub analytic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbortedRun {
    #[serde(rename = "N")]
    pub n: u64,
    pub seed: u64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub samples: Vec<ScalingSample>,
    pub runs: Vec<RunRecord>,
    pub aborted: Vec<AbortedRun>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SweepOptions {
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
    /// Record wall-clock times; off keeps output byte-stable.
    pub timing: bool,
}

/// Runs every `(N, seed)` pair and aggregates per `N`.
///
/// Results do not depend on the worker count. Aborted runs are dropped
/// with a warning; an `N` where every run aborted is an error.
pub fn sweep(
    spec: &ScenarioSpec,
    ns: &[u64],
    seeds: &[u64],
    opts: SweepOptions,
) -> Result<SweepReport, AnalysisError> {
    if ns.is_empty() || seeds.is_empty() {
        return Err(AnalysisError::EmptySweep);
    }
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let pairs: Vec<(u64, u64)> = ns
        .iter()
        .flat_map(|&n| seeds.iter().map(move |&s| (n, s)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = opts.jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build()?;
    let total = pairs.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let results: Vec<(Result<RunOutcome, EvolutionError>, u64)> = pool.install(|| {
        pairs
            .par_iter()
            .map(|&(n, seed)| {
                let start = Instant::now();
                let r = run_once(spec, n, seed);
                let ms = if opts.timing {
                    start.elapsed().as_millis() as u64
                } else {
                    0
                };
                let finished = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                if finished.is_multiple_of(100) || finished == total {
                    log::info!("{finished}/{total} runs finished");
                }
                (r, ms)
            })
            .collect()
    });

    let mut runs = Vec::new();
    let mut aborted = Vec::new();
    let mut per_n: BTreeMap<u64, (Vec<u64>, Vec<f64>)> = BTreeMap::new();
    let mut last_error: BTreeMap<u64, (String, bool)> = BTreeMap::new();
    for (i, (&(n, seed), (r, ms))) in pairs.iter().zip(results).enumerate() {
        match r {
            Ok(out) => {
                let t = out.t.to_f64().unwrap_or(f64::INFINITY);
                let e = per_n.entry(n).or_default();
                e.0.push(seed);
                e.1.push(t);
                runs.push(RunRecord {
                    run_id: i as u64,
                    scenario: spec.scenario.to_string(),
                    n,
                    seed,
                    t: out.t.to_string(),
                    accepted: out.accepted,
                    wall_ms: ms,
                    regime: spec.model.regime_name().to_string(),
                    analytic: out.analytic,
                });
            }
            Err(e) => {
                log::warn!("run N={n} seed={seed} aborted: {e}");
                last_error.insert(n, (e.to_string(), e.is_unknown()));
                aborted.push(AbortedRun {
                    n,
                    seed,
                    reason: e.to_string(),
                });
            }
        }
    }
    let mut samples = Vec::new();
    for &n in &ns {
        match per_n.remove(&n) {
            Some((seeds, ts)) => samples.push(ScalingSample::from_times(n, seeds, &ts)),
            None => {
                let (reason, unknown) = last_error.remove(&n).unwrap_or_default();
                return Err(AnalysisError::AllAborted { n, reason, unknown });
            }
        }
    }
    Ok(SweepReport {
        samples,
        runs,
        aborted,
    })
}

/// Float text that parses back to the same `f64` (17 significant digits).
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub const SAMPLE_HEADER: [&str; 4] = ["N", "trials", "mean_T", "std_T"];

pub fn write_samples_csv<W: Write>(samples: &[ScalingSample], w: W) -> Result<(), AnalysisError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SAMPLE_HEADER)?;
    for s in samples {
        out.write_record([
            s.n.to_string(),
            s.trials.to_string(),
            format_float(s.mean_t),
            format_float(s.std_t),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_samples_csv<R: Read>(r: R) -> Result<Vec<ScalingSample>, AnalysisError> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != SAMPLE_HEADER {
        return Err(AnalysisError::Format(format!(
            "expected header {}, got {}",
            SAMPLE_HEADER.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let bad = |what: &str, v: &str| AnalysisError::Format(format!("bad {what} value {v:?}"));
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        out.push(ScalingSample {
            n: rec[0].parse().map_err(|_| bad("N", &rec[0]))?,
            trials: rec[1].parse().map_err(|_| bad("trials", &rec[1]))?,
            mean_t: rec[2].parse().map_err(|_| bad("mean_T", &rec[2]))?,
            std_t: rec[3].parse().map_err(|_| bad("std_T", &rec[3]))?,
            seeds: Vec::new(),
        });
    }
    Ok(out)
}

pub fn write_runs_csv<W: Write>(runs: &[RunRecord], w: W) -> Result<(), AnalysisError> {
    let mut out = csv::Writer::from_writer(w);
    for r in runs {
        out.serialize(r)?;
    }
    if runs.is_empty() {
        out.write_record([
            "run_id", "scenario", "N", "seed", "T", "accepted", "wall_ms", "regime", "analytic",
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_fit_csv<W: Write>(fit: &FitResult, w: W) -> Result<(), AnalysisError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["model", "parameter", "intercept", "residual", "chosen"])?;
    for f in &fit.fits {
        out.write_record([
            f.model.to_string(),
            format_float(f.parameter),
            format_float(f.intercept),
            format_float(f.residual),
            (f.model == fit.model).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct Versioned<T> {
    schema_version: u32,
    #[serde(flatten)]
    body: T,
}

/// `{"schema_version": 1, ...fields of body}`, pretty-printed.
pub fn to_json<T: Serialize>(body: &T) -> Result<String, AnalysisError> {
    let mut s = serde_json::to_string_pretty(&Versioned {
        schema_version: SCHEMA_VERSION,
        body,
    })?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T, AnalysisError> {
    let v: Versioned<T> = serde_json::from_str(s)?;
    if v.schema_version != SCHEMA_VERSION {
        return Err(AnalysisError::Format(format!(
            "unsupported schema_version {}",
            v.schema_version
        )));
    }
    Ok(v.body)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub samples: Vec<ScalingSample>,
}
