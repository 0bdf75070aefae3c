//! `metabio`: run evolution scenarios, sweeps and fits, enumerate the toy
//! machine, and synthesize small quantum circuits.

mod config;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use metabio::analysis::{
    fit_scaling, from_json, read_samples_csv, sweep, to_json, write_fit_csv, write_runs_csv,
    write_samples_csv, AnalysisError, RunRecord, SampleSet, SweepOptions,
};
use metabio::evolution::{run_once, EvolutionError, Mode, OracleSpec, OrganismModel, Scenario, ScenarioSpec};
use metabio::netcomplexity::{
    classify_entanglement, encode_circuit, Catalog, NetError, StateVector, SynthesisConfig,
    DEFAULT_EPSILON, MAX_QUBITS,
};
use metabio::oracle::{EnumeratedOmegaOracle, OracleError};
use metabio::rng::{stream_rng, Stream};
use metabio::toy_machine::Domain;

/// Relative `--out` paths resolve under this directory when it is set.
const OUT_DIR_ENV: &str = "METABIO_OUT_DIR";

#[derive(Parser)]
#[command(name = "metabio", version, about, args_override_self = true)]
struct Cli {
    /// Key-value file supplying defaults for the subcommand's flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario at a single N and print T.
    Evolve(EvolveArgs),
    /// Run a scenario over many N and seeds, aggregate, optionally fit.
    Sweep(SweepArgs),
    /// Enumerate the toy machine and bracket its halting probability.
    Omega(OmegaArgs),
    /// Busy Beaver table of the toy machine.
    Bb(BbArgs),
    /// Shortest-circuit synthesis report for small quantum states.
    Netcomp(NetcompArgs),
    /// Fit scaling models to an existing samples file.
    Fit(FitArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Output {
    /// Output file.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    /// Keyed pseudorandom real, one per run seed.
    Random,
    /// Bracketed halting probability of the toy machine.
    Enumerated,
}

#[derive(Args)]
struct ScenarioArgs {
    /// exhaustive, id or cumulative.
    #[arg(long, default_value = "cumulative")]
    scenario: Scenario,
    /// classical, q-sep or q-ent.
    #[arg(long, default_value = "classical")]
    model: OrganismModel,
    /// simulate, fast-forward or analytic. Cumulative runs default to
    /// fast-forward, everything else to simulate.
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long, value_enum, default_value = "random")]
    oracle: OracleKind,
    /// Programs shorter than this many bits feed the enumerated oracle.
    #[arg(long, default_value_t = 16)]
    max_len: usize,
    /// Step budget per program for the enumerated oracle.
    #[arg(long, default_value_t = 100_000)]
    budget: u64,
}

#[derive(Args)]
struct SeedArgs {
    /// Run seeds, comma separated, decimal or 0x-prefixed hex.
    #[arg(long, value_name = "LIST")]
    seed: Option<String>,
    /// Use seeds 1..=COUNT. Ignored when --seed is given.
    #[arg(long, value_name = "COUNT")]
    seeds: Option<u64>,
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    n: u64,
    #[command(flatten)]
    seeds: SeedArgs,
    /// Record wall-clock milliseconds in the run trace.
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Sizes, e.g. `8,16,32` or `4..18` (inclusive).
    #[arg(long, value_name = "LIST")]
    n: String,
    #[command(flatten)]
    seeds: SeedArgs,
    /// Worker threads; defaults to every core.
    #[arg(long)]
    jobs: Option<usize>,
    /// Fit the scaling models and print the result.
    #[arg(long)]
    fit: bool,
    /// Also write the per-run trace here.
    #[arg(long, value_name = "PATH")]
    runs: Option<PathBuf>,
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct OmegaArgs {
    #[arg(long, default_value_t = 16)]
    max_len: usize,
    #[arg(long, default_value_t = 100_000)]
    budget: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BbArgs {
    /// Largest program length in the table.
    #[arg(long, default_value_t = 12)]
    max_n: usize,
    #[arg(long, default_value_t = 100_000)]
    budget: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum StateKind {
    Haar,
    Product,
    Ghz,
    Zero,
}

#[derive(Args)]
struct NetcompArgs {
    /// Qubits.
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, value_enum, default_value = "haar")]
    states: StateKind,
    /// How many random states to draw.
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value = "1", value_parser = parse_seed)]
    seed: u64,
    /// Search depth cap; defaults by qubit count.
    #[arg(long)]
    max_gates: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct FitArgs {
    /// Samples as CSV (`N,trials,mean_T,std_T`) or JSON.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    #[command(flatten)]
    output: Output,
}

/// Bad input caught after parsing; exits like a parse error.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(h) => u64::from_str_radix(h, 16),
        None => s.parse(),
    };
    r.map_err(|_| format!("bad seed {s:?}"))
}

fn parse_n_list(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |x: &str| x.trim().parse::<u64>().map_err(|_| usage(format!("bad N {x:?}")));
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
                if a > b {
                    return Err(usage(format!("empty N range {part:?}")));
                }
                out.extend(a..=b);
            }
            None => out.push(num(part)?),
        }
    }
    if out.is_empty() {
        return Err(usage("no N values given"));
    }
    Ok(out)
}

impl SeedArgs {
    fn resolve(&self, default_count: u64) -> Result<Vec<u64>> {
        if let Some(list) = &self.seed {
            let seeds = list
                .split(',')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(|p| parse_seed(p).map_err(usage))
                .collect::<Result<Vec<_>>>()?;
            if seeds.is_empty() {
                return Err(usage("empty seed list"));
            }
            return Ok(seeds);
        }
        let count = self.seeds.unwrap_or(default_count);
        if count == 0 {
            return Err(usage("--seeds must be at least 1"));
        }
        Ok((1..=count).collect())
    }
}

impl ScenarioArgs {
    fn spec(&self) -> ScenarioSpec {
        let mode = self.mode.unwrap_or(match self.scenario {
            Scenario::Cumulative => Mode::FastForward,
            _ => Mode::Simulate,
        });
        ScenarioSpec::new(self.scenario, self.model, mode)
    }

    fn attach_oracle(&self, spec: &mut ScenarioSpec) {
        if let OracleKind::Enumerated = self.oracle {
            log::info!(
                "enumerating toy-machine programs shorter than {} bits, budget {}",
                self.max_len,
                self.budget
            );
            let o = EnumeratedOmegaOracle::new(self.max_len, self.budget);
            log::info!("enumerated oracle certifies {} bits", o.certified_bits());
            spec.oracle = OracleSpec::Enumerated(Arc::new(o));
        }
    }
}

impl Output {
    fn path(&self) -> Option<PathBuf> {
        let p = self.out.as_ref()?;
        Some(resolve_path(p))
    }
}

fn resolve_path(p: &PathBuf) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if p.is_relative() => PathBuf::from(dir).join(p),
        _ => p.clone(),
    }
}

fn write_file(path: &PathBuf, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn write_stdout(bytes: &[u8]) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(bytes)?;
    out.flush()?;
    Ok(())
}

/// Sends `bytes` to `--out` when given, else to standard output.
fn emit(output: &Output, bytes: &[u8]) -> Result<()> {
    match output.path() {
        Some(p) => write_file(&p, bytes),
        None => write_stdout(bytes),
    }
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

#[derive(Serialize)]
struct RunSet<'a> {
    runs: &'a [RunRecord],
}

fn runs_bytes(runs: &[RunRecord], format: Format) -> Result<Vec<u8>> {
    Ok(match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_runs_csv(runs, &mut buf)?;
            buf
        }
        Format::Json => to_json(&RunSet { runs })?.into_bytes(),
    })
}

fn evolve(a: EvolveArgs) -> Result<()> {
    let mut spec = a.scenario.spec();
    spec.check(a.n)?;
    let seeds = a.seeds.resolve(1)?;
    a.scenario.attach_oracle(&mut spec);
    let mut runs = Vec::new();
    for (i, &seed) in seeds.iter().enumerate() {
        let start = std::time::Instant::now();
        let r = run_once(&spec, a.n, seed)?;
        runs.push(RunRecord {
            run_id: i as u64,
            scenario: spec.scenario.to_string(),
            n: a.n,
            seed,
            t: r.t.to_string(),
            accepted: r.accepted,
            wall_ms: if a.timing { start.elapsed().as_millis() as u64 } else { 0 },
            regime: spec.model.regime_name().to_string(),
            analytic: r.analytic,
        });
    }
    if let Some(p) = a.output.path() {
        write_file(&p, &runs_bytes(&runs, a.output.format.unwrap_or(Format::Csv))?)?;
    } else if let Some(f) = a.output.format {
        return write_stdout(&runs_bytes(&runs, f)?);
    }
    let mut text = String::new();
    for r in &runs {
        if runs.len() > 1 {
            text.push_str(&format!("seed={} ", r.seed));
        }
        text.push_str(&format!("T={}", r.t));
        if r.analytic {
            text.push_str(" analytic");
        }
        text.push('\n');
    }
    write_stdout(text.as_bytes())
}

fn sweep_cmd(a: SweepArgs) -> Result<()> {
    let mut spec = a.scenario.spec();
    let ns = parse_n_list(&a.n)?;
    for &n in &ns {
        spec.check(n)?;
    }
    let seeds = a.seeds.resolve(10)?;
    if a.jobs == Some(0) {
        return Err(usage("--jobs must be at least 1"));
    }
    a.scenario.attach_oracle(&mut spec);
    log::info!(
        "sweeping {} sizes x {} seeds ({} {} {})",
        ns.len(),
        seeds.len(),
        spec.scenario,
        spec.model,
        spec.mode
    );
    let report = sweep(
        &spec,
        &ns,
        &seeds,
        SweepOptions {
            jobs: a.jobs,
            timing: a.timing,
        },
    )?;
    if !report.aborted.is_empty() {
        log::warn!("{} runs aborted", report.aborted.len());
    }
    let format = a.output.format.unwrap_or(Format::Csv);
    let samples = match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_samples_csv(&report.samples, &mut buf)?;
            buf
        }
        Format::Json => to_json(&SampleSet {
            samples: report.samples.clone(),
        })?
        .into_bytes(),
    };
    if let Some(p) = &a.runs {
        write_file(&resolve_path(p), &runs_bytes(&report.runs, format)?)?;
    }
    if !a.fit {
        return emit(&a.output, &samples);
    }
    if let Some(p) = a.output.path() {
        write_file(&p, &samples)?;
    }
    let fit = fit_scaling(&report.samples)?;
    log::info!("best model {} with parameter {}", fit.model, fit.parameter);
    write_stdout(&fit_bytes(&fit, a.output.format.unwrap_or(Format::Json))?)
}

fn fit_bytes(fit: &metabio::analysis::FitResult, format: Format) -> Result<Vec<u8>> {
    Ok(match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_fit_csv(fit, &mut buf)?;
            buf
        }
        Format::Json => to_json(fit)?.into_bytes(),
    })
}

#[derive(Serialize)]
struct DomainRow {
    program: String,
    output: String,
    steps: u64,
}

#[derive(Serialize)]
struct OmegaReport {
    max_len: usize,
    budget: u64,
    halting_programs: usize,
    omega_lower: String,
    omega_lower_approx: f64,
    unresolved: String,
    divergent: String,
    certified_bits: Option<usize>,
    entries: Vec<DomainRow>,
}

fn omega(a: OmegaArgs) -> Result<()> {
    log::info!("enumerating programs shorter than {} bits, budget {}", a.max_len, a.budget);
    let domain = Domain::enumerate(a.max_len, a.budget);
    let oracle = EnumeratedOmegaOracle::from_domain(&domain);
    let lower = domain.omega_lower_bound();
    let certified = oracle.certified_bits();
    let report = OmegaReport {
        max_len: a.max_len,
        budget: a.budget,
        halting_programs: domain.entries().len(),
        omega_lower: lower.to_string(),
        omega_lower_approx: lower.to_f64(),
        unresolved: domain.unresolved_mass().to_string(),
        divergent: domain.divergent_mass().to_string(),
        certified_bits: (certified != usize::MAX).then_some(certified),
        entries: domain
            .entries()
            .iter()
            .map(|e| DomainRow {
                program: e.program.to_string(),
                output: e.output.to_string(),
                steps: e.steps,
            })
            .collect(),
    };
    let artifact = |f: Format| -> Result<Vec<u8>> {
        match f {
            Format::Csv => csv_rows(&report.entries),
            Format::Json => Ok(to_json(&report)?.into_bytes()),
        }
    };
    if let Some(p) = a.output.path() {
        write_file(&p, &artifact(a.output.format.unwrap_or(Format::Csv))?)?;
    } else if let Some(f) = a.output.format {
        return write_stdout(&artifact(f)?);
    }
    let certified = match report.certified_bits {
        Some(c) => c.to_string(),
        None => "all".to_string(),
    };
    let text = format!(
        "max_len={}\nbudget={}\nhalting_programs={}\nomega_lower={}\nomega_lower_approx={}\nunresolved={}\ndivergent={}\ncertified_bits={}\n",
        report.max_len,
        report.budget,
        report.halting_programs,
        report.omega_lower,
        report.omega_lower_approx,
        report.unresolved,
        report.divergent,
        certified
    );
    write_stdout(text.as_bytes())
}

#[derive(Serialize)]
struct BbRow {
    n: usize,
    busy_beaver: String,
}

#[derive(Serialize)]
struct BbTable<'a> {
    budget: u64,
    rows: &'a [BbRow],
}

fn bb(a: BbArgs) -> Result<()> {
    log::info!("enumerating programs up to {} bits, budget {}", a.max_n, a.budget);
    let domain = Domain::enumerate(a.max_n + 1, a.budget);
    let rows: Vec<BbRow> = (1..=a.max_n)
        .map(|n| BbRow {
            n,
            busy_beaver: domain.busy_beaver(n).to_string(),
        })
        .collect();
    let bytes = match a.output.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_rows(&rows)?,
        Format::Json => to_json(&BbTable {
            budget: a.budget,
            rows: &rows,
        })?
        .into_bytes(),
    };
    emit(&a.output, &bytes)
}

#[derive(Serialize)]
struct NetRow {
    index: usize,
    kind: &'static str,
    n: usize,
    epsilon: f64,
    /// Empty when no circuit within the depth cap reaches the target.
    gates: Option<usize>,
    h_net_upper: Option<usize>,
    circuit: String,
    classification: String,
    /// Schmidt rank per cut, cuts in canonical order.
    ranks: String,
}

#[derive(Serialize)]
struct NetReport<'a> {
    max_gates: usize,
    rows: &'a [NetRow],
}

fn netcomp(a: NetcompArgs) -> Result<()> {
    if a.n == 0 || a.n > MAX_QUBITS {
        return Err(NetError::QubitCount(a.n).into());
    }
    if !(a.epsilon > 0.0 && a.epsilon < 1.0) {
        return Err(usage("--epsilon must lie in (0, 1)"));
    }
    let max_gates = a.max_gates.unwrap_or(SynthesisConfig::default_max_gates(a.n));
    let mut rng = stream_rng(a.seed, Stream::Synthesis);
    let (kind, targets): (&str, Vec<StateVector>) = match a.states {
        StateKind::Haar => (
            "haar",
            (0..a.count)
                .map(|_| StateVector::random_haar(a.n, &mut rng))
                .collect::<Result<_, _>>()?,
        ),
        StateKind::Product => (
            "product",
            (0..a.count)
                .map(|_| StateVector::random_product(a.n, &mut rng))
                .collect::<Result<_, _>>()?,
        ),
        StateKind::Ghz => ("ghz", vec![StateVector::ghz(a.n)?]),
        StateKind::Zero => ("zero", vec![StateVector::zero(a.n)?]),
    };
    log::info!("building circuit catalog: {} qubits, up to {} gates", a.n, max_gates);
    let catalog = Catalog::build(a.n, max_gates);
    log::info!("catalog holds {} distinct states", catalog.len());
    let mut rows = Vec::new();
    for (index, t) in targets.iter().enumerate() {
        let circuit = catalog.find(t, a.epsilon);
        let report = if a.n >= 2 { Some(classify_entanglement(t)?) } else { None };
        rows.push(NetRow {
            index,
            kind,
            n: a.n,
            epsilon: a.epsilon,
            gates: circuit.as_ref().map(|c| c.len()),
            h_net_upper: circuit.as_ref().map(|c| encode_circuit(c).len()),
            circuit: circuit.as_ref().map(|c| c.to_string()).unwrap_or_default(),
            classification: report
                .as_ref()
                .map(|r| format!("{:?}", r.classification))
                .unwrap_or_else(|| "Product".to_string()),
            ranks: report
                .map(|r| {
                    r.ranks
                        .iter()
                        .map(|(_, k)| k.to_string())
                        .collect::<Vec<_>>()
                        .join(";")
                })
                .unwrap_or_default(),
        });
    }
    let bytes = match a.output.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_rows(&rows)?,
        Format::Json => to_json(&NetReport {
            max_gates,
            rows: &rows,
        })?
        .into_bytes(),
    };
    emit(&a.output, &bytes)
}

fn fit_cmd(a: FitArgs) -> Result<()> {
    let text = fs::read_to_string(&a.input)
        .with_context(|| format!("reading {}", a.input.display()))?;
    let samples = if text.trim_start().starts_with('{') {
        from_json::<SampleSet>(&text)?.samples
    } else {
        read_samples_csv(text.as_bytes())?
    };
    let fit = fit_scaling(&samples)?;
    emit(&a.output, &fit_bytes(&fit, a.output.format.unwrap_or(Format::Json))?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Evolve(a) => evolve(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Omega(a) => omega(a),
        Command::Bb(a) => bb(a),
        Command::Netcomp(a) => netcomp(a),
        Command::Fit(a) => fit_cmd(a),
    }
}

/// 1 usage, 2 guard violation, 3 undecidable oracle comparison.
fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(ev) = cause.downcast_ref::<EvolutionError>() {
            if ev.is_guard() {
                return 2;
            }
            if ev.is_unknown() || matches!(ev, EvolutionError::Oracle(OracleError::Uncertified { .. })) {
                return 3;
            }
        }
        if let Some(AnalysisError::AllAborted { unknown: true, .. }) = cause.downcast_ref() {
            return 3;
        }
        if let Some(NetError::QubitCount(_)) = cause.downcast_ref() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let args = match config::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                return ExitCode::from(1);
            }
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_lists() {
        assert_eq!(parse_n_list("8,16, 32").unwrap(), vec![8, 16, 32]);
        assert_eq!(parse_n_list("4..7").unwrap(), vec![4, 5, 6, 7]);
        assert_eq!(parse_n_list("1,3..=4").unwrap(), vec![1, 3, 4]);
        assert!(parse_n_list("7..4").is_err());
        assert!(parse_n_list("x").is_err());
    }

    #[test]
    fn seeds() {
        assert_eq!(parse_seed("0x1F").unwrap(), 31);
        assert_eq!(parse_seed("12").unwrap(), 12);
        let s = SeedArgs {
            seed: Some("7,8".into()),
            seeds: Some(30),
        };
        assert_eq!(s.resolve(10).unwrap(), vec![7, 8]);
        let s = SeedArgs {
            seed: None,
            seeds: Some(3),
        };
        assert_eq!(s.resolve(10).unwrap(), vec![1, 2, 3]);
    }

    #[test]
    fn cli_shape() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
