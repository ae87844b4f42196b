//! Scenario orchestration: simulate many runs, estimate, score target
//! fidelities, aggregate, and write the CSV/JSON outputs.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, TomoError};
use crate::estimators::{lin_estimate, mle_estimate, MleOptions};
use crate::linalg::ComplexMatrix;
use crate::metrics::{aggregate_with_physicality, fidelity_pure, joint_histogram, ScenarioStats, DEFAULT_BIN_WIDTH};
use crate::pauli::{build_product_pauli_pom, PauliPom};
use crate::sim::{simulate_counts, RunSeed, WeightedCounts};
use crate::states::{
    base_ket, is_physical, make_state, min_eigenvalue, mix_with_complement, write_state_file, StateKind, StateSpec,
    PHYSICAL_TOL,
};

pub const RUNS_CSV: &str = "runs.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const HISTOGRAM_CSV: &str = "histogram.csv";
pub const RUNS_CSV_HEADER: &str = "run,estimator,fidelity,min_eig,iterations,converged,loglik";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Lin,
    Mle,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Lin => "lin",
            Estimator::Mle => "mle",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = TomoError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lin" => Ok(Estimator::Lin),
            "mle" => Ok(Estimator::Mle),
            other => Err(TomoError::Config(format!("unknown estimator {other:?}"))),
        }
    }
}

/// Everything needed to run one target/true-state pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Must describe a pure state.
    pub target: StateKind,
    pub true_state: StateSpec,
    pub runs: usize,
    pub copies_per_setting: u64,
    pub master_seed: u64,
    pub estimators: Vec<Estimator>,
    pub mle: MleOptions,
    pub bin_width: f64,
    /// Worker threads; `0` lets the pool choose.
    pub workers: usize,
    pub out_dir: Option<PathBuf>,
    pub dump_counts: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            target: StateKind::Ghz4,
            true_state: StateSpec::with_fidelity(StateKind::Ghz4, 0.8),
            runs: 500,
            copies_per_setting: 100,
            master_seed: 0,
            estimators: vec![Estimator::Lin, Estimator::Mle],
            mle: MleOptions::default(),
            bin_width: DEFAULT_BIN_WIDTH,
            workers: 0,
            out_dir: None,
            dump_counts: false,
        }
    }
}

/// Parses a `--target` value: `ghz4`, `w4`, `random-pure`, or `file:PATH`.
/// `seed` is used by `random-pure`.
pub fn parse_target(s: &str, seed: u64) -> Result<StateKind> {
    match s.trim() {
        "ghz4" => Ok(StateKind::Ghz4),
        "w4" => Ok(StateKind::W4),
        "random-pure" | "haar-random-pure" => Ok(StateKind::HaarRandomPure { seed }),
        other => match other.strip_prefix("file:") {
            Some(path) if !path.is_empty() => Ok(StateKind::File(PathBuf::from(path))),
            _ => Err(TomoError::Config(format!("unknown target {other:?}"))),
        },
    }
}

/// Accumulates `key = value` settings from a config file and command-line
/// overrides, then resolves them into a [`ScenarioConfig`].
#[derive(Debug, Clone, Default)]
pub struct ConfigBuilder {
    values: BTreeMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "target",
    "target_seed",
    "true_fidelity",
    "true_file",
    "runs",
    "copies_per_setting",
    "seed",
    "estimators",
    "out_dir",
    "bin_width",
    "workers",
    "dump_counts",
    "mle_tol",
    "mle_max_iter",
    "mle_epsilon",
];

impl ConfigBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets one key. Dashes in keys are treated as underscores.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<&mut Self> {
        let key = key.trim().replace('-', "_");
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(TomoError::Config(format!("unknown key {key:?}")));
        }
        self.values.insert(key, value.into().trim().to_string());
        Ok(self)
    }

    /// Reads flat `key = value` lines; `#` starts a comment.
    pub fn parse_str(&mut self, text: &str) -> Result<&mut Self> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(TomoError::Parse {
                line: i + 1,
                msg: format!("expected `key = value`, got {line:?}"),
            })?;
            self.set(k, v).map_err(|e| TomoError::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(self)
    }

    pub fn parse_file(&mut self, path: &Path) -> Result<&mut Self> {
        let text = std::fs::read_to_string(path)?;
        self.parse_str(&text)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| TomoError::Config(format!("invalid value {v:?} for {key}")))
            })
            .transpose()
    }

    pub fn build(&self) -> Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::default();
        let target_seed: u64 = self.get("target_seed")?.unwrap_or(0);
        if let Some(t) = self.values.get("target") {
            cfg.target = parse_target(t, target_seed)?;
        }
        let true_fidelity: Option<f64> = self.get("true_fidelity")?;
        let true_file: Option<PathBuf> = self.get("true_file")?;
        cfg.true_state = match (true_file, true_fidelity) {
            (Some(_), Some(_)) => {
                return Err(TomoError::Config(
                    "true_file and true_fidelity are mutually exclusive".into(),
                ))
            }
            (Some(path), None) => StateSpec::pure(StateKind::File(path)),
            (None, Some(f0)) => StateSpec::with_fidelity(cfg.target.clone(), f0),
            (None, None) => StateSpec::pure(cfg.target.clone()),
        };
        if let Some(v) = self.get("runs")? {
            cfg.runs = v;
        }
        if let Some(v) = self.get("copies_per_setting")? {
            cfg.copies_per_setting = v;
        }
        if let Some(v) = self.get("seed")? {
            cfg.master_seed = v;
        }
        if let Some(list) = self.values.get("estimators") {
            let mut est = list
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(str::parse)
                .collect::<Result<Vec<Estimator>>>()?;
            est.sort();
            est.dedup();
            cfg.estimators = est;
        }
        if let Some(v) = self.get("out_dir")? {
            cfg.out_dir = Some(v);
        }
        if let Some(v) = self.get("bin_width")? {
            cfg.bin_width = v;
        }
        if let Some(v) = self.get("workers")? {
            cfg.workers = v;
        }
        if let Some(v) = self.get("dump_counts")? {
            cfg.dump_counts = v;
        }
        if let Some(v) = self.get("mle_tol")? {
            cfg.mle.tol = v;
        }
        if let Some(v) = self.get("mle_max_iter")? {
            cfg.mle.max_iter = v;
        }
        if let Some(v) = self.get("mle_epsilon")? {
            cfg.mle.epsilon = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs < 2 {
            return Err(TomoError::Config(format!("runs must be at least 2, got {}", self.runs)));
        }
        if self.copies_per_setting == 0 {
            return Err(TomoError::Config("copies_per_setting must be positive".into()));
        }
        if self.estimators.is_empty() {
            return Err(TomoError::Config("no estimators selected".into()));
        }
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return Err(TomoError::Config(format!("invalid bin width {}", self.bin_width)));
        }
        if !(self.mle.epsilon > 0.0 && self.mle.epsilon <= 1.0) {
            return Err(TomoError::Config(format!(
                "mle_epsilon must be in (0, 1], got {}",
                self.mle.epsilon
            )));
        }
        Ok(())
    }
}

/// One estimator's result on one simulated dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_index: usize,
    pub estimator: Estimator,
    pub fidelity: f64,
    pub min_eig: f64,
    /// The estimate passed `is_physical`; not written to the runs CSV.
    pub physical: bool,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub log_likelihood: Option<f64>,
}

/// Shortest round-trip text; exponent form for very small or large magnitudes.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

impl RunRecord {
    fn csv_row(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.run_index,
            self.estimator,
            format_float(self.fidelity),
            format_float(self.min_eig),
            opt(self.iterations.map(|i| i.to_string())),
            opt(self.converged.map(|c| c.to_string())),
            opt(self.log_likelihood.map(format_float)),
        )
    }
}

/// Per-estimator summary written to the JSON output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorSummary {
    #[serde(flatten)]
    pub stats: ScenarioStats,
    pub f0: f64,
    pub unconverged_runs: usize,
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub f0: f64,
    pub records: Vec<RunRecord>,
    pub summaries: BTreeMap<Estimator, EstimatorSummary>,
}

impl ScenarioResult {
    pub fn fidelities(&self, est: Estimator) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.estimator == est)
            .map(|r| r.fidelity)
            .collect()
    }

    pub fn stats(&self, est: Estimator) -> Option<&ScenarioStats> {
        self.summaries.get(&est).map(|s| &s.stats)
    }
}

struct RunContext<'a> {
    cfg: &'a ScenarioConfig,
    pom: &'a PauliPom,
    truth: &'a ComplexMatrix,
    target: &'a [Complex64],
}

fn run_once(ctx: &RunContext<'_>, run_index: usize) -> Result<Vec<RunRecord>> {
    let seed = RunSeed::new(ctx.cfg.master_seed, run_index as u64);
    let data = simulate_counts(ctx.truth, ctx.pom, ctx.cfg.copies_per_setting, seed)?;
    if ctx.cfg.dump_counts {
        if let Some(dir) = &ctx.cfg.out_dir {
            let counts_dir = dir.join("counts");
            data.write_csv(ctx.pom, &counts_dir.join(format!("run{run_index:05}.csv")))?;
        }
    }
    let weights = WeightedCounts::from(&data);
    let mut out = Vec::with_capacity(ctx.cfg.estimators.len());
    for &est in &ctx.cfg.estimators {
        let record = match est {
            Estimator::Lin => {
                let lin = lin_estimate(ctx.pom, &weights)?;
                RunRecord {
                    run_index,
                    estimator: est,
                    fidelity: fidelity_pure(ctx.target, &lin.matrix),
                    min_eig: lin.min_eig,
                    physical: is_physical(&lin.matrix),
                    iterations: None,
                    converged: None,
                    log_likelihood: None,
                }
            }
            Estimator::Mle => {
                let mle = mle_estimate(ctx.pom, &weights, &ctx.cfg.mle)?;
                RunRecord {
                    run_index,
                    estimator: est,
                    fidelity: fidelity_pure(ctx.target, &mle.matrix),
                    min_eig: min_eigenvalue(&mle.matrix)?,
                    physical: is_physical(&mle.matrix),
                    iterations: Some(mle.iterations),
                    converged: Some(mle.converged),
                    log_likelihood: Some(mle.final_log_likelihood),
                }
            }
        };
        out.push(record);
    }
    Ok(out)
}

#[cfg(feature = "parallel")]
fn map_runs<F>(runs: usize, workers: usize, f: F) -> Result<Vec<Vec<RunRecord>>>
where
    F: Fn(usize) -> Result<Vec<RunRecord>> + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| TomoError::Config(format!("thread pool: {e}")))?;
    pool.install(|| (0..runs).into_par_iter().map(&f).collect())
}

#[cfg(not(feature = "parallel"))]
fn map_runs<F>(runs: usize, _workers: usize, f: F) -> Result<Vec<Vec<RunRecord>>>
where
    F: Fn(usize) -> Result<Vec<RunRecord>>,
{
    (0..runs).map(f).collect()
}

/// Simulates `cfg.runs` experiments and scores each requested estimator.
///
/// Results do not depend on the worker count: each run draws from its own
/// seeded stream and records are ordered by run index.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    cfg.validate()?;
    let pom = build_product_pauli_pom(4)?;
    let target = base_ket(&cfg.target)?;
    let truth = make_state(&cfg.true_state)?;
    if truth.dim() != target.len() {
        return Err(TomoError::DimensionMismatch {
            expected: target.len(),
            found: truth.dim(),
        });
    }
    let f0 = fidelity_pure(&target, &truth);
    if cfg.dump_counts {
        if let Some(dir) = &cfg.out_dir {
            std::fs::create_dir_all(dir.join("counts"))?;
        }
    }
    let ctx = RunContext {
        cfg,
        pom: &pom,
        truth: &truth,
        target: &target,
    };
    let per_run = map_runs(cfg.runs, cfg.workers, |i| run_once(&ctx, i))?;
    let records: Vec<RunRecord> = per_run.into_iter().flatten().collect();

    let mut summaries = BTreeMap::new();
    for &est in &cfg.estimators {
        let mine: Vec<&RunRecord> = records.iter().filter(|r| r.estimator == est).collect();
        let fids: Vec<f64> = mine.iter().map(|r| r.fidelity).collect();
        let nonphysical: Vec<bool> = mine.iter().map(|r| !r.physical).collect();
        let stats = aggregate_with_physicality(&fids, f0, &nonphysical)?;
        let unconverged_runs = mine.iter().filter(|r| r.converged == Some(false)).count();
        summaries.insert(
            est,
            EstimatorSummary {
                stats,
                f0,
                unconverged_runs,
            },
        );
    }
    Ok(ScenarioResult {
        f0,
        records,
        summaries,
    })
}

pub fn runs_csv(records: &[RunRecord]) -> String {
    let mut s = String::with_capacity(64 * (records.len() + 1));
    s.push_str(RUNS_CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

/// `bin_left,count_lin,count_mle`; a missing estimator contributes zeros.
pub fn histogram_csv(result: &ScenarioResult, bin_width: f64) -> String {
    let lin = result.fidelities(Estimator::Lin);
    let mle = result.fidelities(Estimator::Mle);
    let mut s = String::from("bin_left,count_lin,count_mle\n");
    for (left, a, b) in joint_histogram(&lin, &mle, bin_width) {
        let _ = writeln!(s, "{left},{a},{b}");
    }
    s
}

#[derive(Serialize)]
struct ConfigEcho {
    target: String,
    true_state: String,
    runs: usize,
    copies_per_setting: u64,
    seed: u64,
    estimators: Vec<Estimator>,
    bin_width: f64,
    mle_tol: f64,
    mle_max_iter: usize,
    mle_epsilon: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    f0: f64,
    config: ConfigEcho,
    estimators: &'a BTreeMap<Estimator, EstimatorSummary>,
}

pub fn summary_json(result: &ScenarioResult, cfg: &ScenarioConfig) -> Result<String> {
    let summary = Summary {
        f0: result.f0,
        config: ConfigEcho {
            target: StateSpec::pure(cfg.target.clone()).label(),
            true_state: cfg.true_state.label(),
            runs: cfg.runs,
            copies_per_setting: cfg.copies_per_setting,
            seed: cfg.master_seed,
            estimators: cfg.estimators.clone(),
            bin_width: cfg.bin_width,
            mle_tol: cfg.mle.tol,
            mle_max_iter: cfg.mle.max_iter,
            mle_epsilon: cfg.mle.epsilon,
        },
        estimators: &result.summaries,
    };
    Ok(serde_json::to_string_pretty(&summary)?)
}

/// Writes `runs.csv`, `summary.json` and `histogram.csv` into `dir`.
pub fn emit_outputs(result: &ScenarioResult, cfg: &ScenarioConfig, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(RUNS_CSV), runs_csv(&result.records))?;
    std::fs::write(dir.join(SUMMARY_JSON), summary_json(result, cfg)?)?;
    std::fs::write(dir.join(HISTOGRAM_CSV), histogram_csv(result, cfg.bin_width))?;
    Ok(())
}

/// One row of the built-in benchmark suite.
#[derive(Debug, Clone)]
pub struct Table1Row {
    pub label: &'static str,
    pub config: ScenarioConfig,
    /// True state to be written to a file and read back, for rows the
    /// white-noise recipe cannot express.
    pub true_matrix: Option<ComplexMatrix>,
}

/// Target seeds used for the random rows of the suite.
pub const RANDOM_TARGET_SEEDS: [(&str, u64); 4] = [("phi", 1), ("gamma", 2), ("tau", 3), ("theta", 4)];

/// GHZ at F0 = 0.8 and 1, W at 1, a random target at 0.981 and 0.016, and
/// four random targets at 0.8. White noise everywhere except 0.016, which is
/// below `1/16` and uses noise on the target's orthogonal complement instead.
pub fn table1_rows(base: &ScenarioConfig) -> Result<Vec<Table1Row>> {
    let row = |label, target: StateKind, f0: Option<f64>| {
        let mut cfg = base.clone();
        cfg.true_state = match f0 {
            Some(f) => StateSpec::with_fidelity(target.clone(), f),
            None => StateSpec::pure(target.clone()),
        };
        cfg.target = target;
        Table1Row {
            label,
            config: cfg,
            true_matrix: None,
        }
    };
    let random = |i: usize| StateKind::HaarRandomPure {
        seed: RANDOM_TARGET_SEEDS[i].1,
    };
    let mut low = row("phi-0.016", random(0), None);
    low.true_matrix = Some(mix_with_complement(&base_ket(&random(0))?, 0.016)?);
    Ok(vec![
        row("ghz4-0.8", StateKind::Ghz4, Some(0.8)),
        row("ghz4-1.0", StateKind::Ghz4, None),
        row("w4-1.0", StateKind::W4, None),
        row("phi-0.981", random(0), Some(0.981)),
        low,
        row("phi-0.8", random(0), Some(0.8)),
        row("gamma-0.8", random(1), Some(0.8)),
        row("tau-0.8", random(2), Some(0.8)),
        row("theta-0.8", random(3), Some(0.8)),
    ])
}

pub const TABLE1_CSV_HEADER: &str = "scenario,f0,estimator,mean,bias_sq,variance,mse,unconverged_runs";

/// Runs every suite row into `root/<label>/` and writes `root/table1.csv`.
/// `on_row` sees each result as it completes.
pub fn run_table1(
    base: &ScenarioConfig,
    root: &Path,
    mut on_row: impl FnMut(&str, &ScenarioResult),
) -> Result<Vec<(&'static str, ScenarioResult)>> {
    std::fs::create_dir_all(root)?;
    let mut table = format!("{TABLE1_CSV_HEADER}\n");
    let mut out = Vec::new();
    for row in table1_rows(base)? {
        let dir = root.join(row.label);
        std::fs::create_dir_all(&dir)?;
        let mut cfg = row.config;
        if let Some(rho) = &row.true_matrix {
            let path = dir.join("true_state.txt");
            write_state_file(&path, rho)?;
            cfg.true_state = StateSpec::pure(StateKind::File(path));
        }
        cfg.out_dir = Some(dir.clone());
        let res = run_scenario(&cfg)?;
        emit_outputs(&res, &cfg, &dir)?;
        for (est, s) in &res.summaries {
            let _ = writeln!(
                table,
                "{},{},{},{},{},{},{},{}",
                row.label,
                format_float(res.f0),
                est,
                format_float(s.stats.mean),
                format_float(s.stats.bias_sq),
                format_float(s.stats.variance),
                format_float(s.stats.mse),
                s.unconverged_runs
            );
        }
        on_row(row.label, &res);
        out.push((row.label, res));
    }
    std::fs::write(root.join("table1.csv"), table)?;
    Ok(out)
}

/// Recomputes per-estimator statistics from a runs CSV.
pub fn stats_from_runs_csv(text: &str, f0: f64) -> Result<BTreeMap<Estimator, ScenarioStats>> {
    let mut fids: BTreeMap<Estimator, (Vec<f64>, Vec<bool>)> = BTreeMap::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let bad = |msg: &str| TomoError::Parse {
            line: i + 1,
            msg: msg.to_string(),
        };
        if fields.len() != 7 {
            return Err(bad("expected 7 fields"));
        }
        let est: Estimator = fields[1].parse()?;
        let fid: f64 = fields[2].parse().map_err(|_| bad("bad fidelity"))?;
        let min_eig: f64 = fields[3].parse().map_err(|_| bad("bad min_eig"))?;
        let entry = fids.entry(est).or_default();
        entry.0.push(fid);
        entry.1.push(min_eig < -PHYSICAL_TOL);
    }
    fids.into_iter()
        .map(|(e, (f, np))| Ok((e, aggregate_with_physicality(&f, f0, &np)?)))
        .collect()
}
