use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::episode::{run_episode, EpisodeResult, METRICS_HEADER};
use super::instance::generate_instance;
use crate::agent::Agent;
use crate::baselines::{Baseline, BaselineKind};
use crate::error::{Error, Result};
use crate::lumb::{theoretical_alpha, AlphaMode, Lumb, LumbConfig};
use crate::mnl::ProblemInstance;
use crate::stats::mean_std;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentKind {
    Lumb,
    UcbMnl,
    TsBeta,
    TsCorr,
}

impl AgentKind {
    pub const ALL: [AgentKind; 4] = [Self::Lumb, Self::UcbMnl, Self::TsBeta, Self::TsCorr];

    pub fn name(self) -> &'static str {
        match self {
            Self::Lumb => "lumb",
            Self::UcbMnl => "ucb-mnl",
            Self::TsBeta => "ts-beta",
            Self::TsCorr => "ts-corr",
        }
    }
}

fn default_master_seed() -> u64 {
    0
}
fn default_lambda() -> f64 {
    1.0
}
fn default_alpha() -> f64 {
    1.0
}
fn default_alpha_mode() -> AlphaMode {
    AlphaMode::Fixed
}
fn default_ucb_constant() -> f64 {
    crate::baselines::UCB_MNL_CONSTANT
}
fn default_stride() -> u64 {
    100
}
fn default_output() -> PathBuf {
    PathBuf::from("results")
}

/// Flat experiment description, read from and echoed to `config.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_items: usize,
    pub dim: usize,
    pub capacity: usize,
    pub horizon: u64,
    pub n_seeds: usize,
    #[serde(default = "default_master_seed")]
    pub master_seed: u64,
    pub agent: AgentKind,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_alpha_mode")]
    pub alpha_mode: AlphaMode,
    #[serde(default = "default_ucb_constant")]
    pub ucb_constant: f64,
    #[serde(default = "default_stride")]
    pub stride: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

/// Keys accepted in config files and `key=value` overrides.
pub const CONFIG_FIELDS: [&str; 13] = [
    "n_items",
    "dim",
    "capacity",
    "horizon",
    "n_seeds",
    "master_seed",
    "agent",
    "lambda",
    "alpha",
    "alpha_mode",
    "ucb_constant",
    "stride",
    "output",
];

impl ExperimentConfig {
    pub fn new(agent: AgentKind, n_items: usize, dim: usize, capacity: usize, horizon: u64, n_seeds: usize) -> Self {
        Self {
            n_items,
            dim,
            capacity,
            horizon,
            n_seeds,
            master_seed: default_master_seed(),
            agent,
            lambda: default_lambda(),
            alpha: default_alpha(),
            alpha_mode: default_alpha_mode(),
            ucb_constant: default_ucb_constant(),
            stride: default_stride(),
            output: default_output(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.n_items == 0 || self.dim == 0 {
            return fail("n_items and dim must be positive".into());
        }
        if self.capacity == 0 || self.capacity > self.n_items {
            return fail(format!("capacity {} must lie in 1..={}", self.capacity, self.n_items));
        }
        if self.horizon == 0 {
            return fail("horizon must be at least 1".into());
        }
        if self.n_seeds == 0 {
            return fail("n_seeds must be at least 1".into());
        }
        if self.stride == 0 {
            return fail("stride must be at least 1".into());
        }
        if self.agent == AgentKind::Lumb {
            self.lumb_config().validate()?;
        }
        if !(self.ucb_constant >= 0.0 && self.ucb_constant.is_finite()) {
            return fail(format!("ucb_constant must be nonnegative, got {}", self.ucb_constant));
        }
        Ok(())
    }

    /// LUMB settings; theoretical mode replaces `alpha` by the schedule value.
    pub fn lumb_config(&self) -> LumbConfig {
        let alpha = match self.alpha_mode {
            AlphaMode::Fixed => self.alpha,
            AlphaMode::Theoretical => theoretical_alpha(self.horizon.max(2), self.dim).0,
        };
        LumbConfig { lambda: self.lambda, alpha, alpha_mode: self.alpha_mode, capacity: self.capacity }
    }

    /// Parses a JSON config and applies `key=value` overrides. Override values
    /// are read as JSON when they parse as JSON, as plain strings otherwise.
    pub fn from_json_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config is not JSON: {e}")))?;
        let map = doc.as_object_mut().ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
        for o in overrides {
            let (key, value) =
                o.split_once('=').ok_or_else(|| Error::Config(format!("override `{o}` is not key=value")))?;
            let key = key.trim();
            if !CONFIG_FIELDS.contains(&key) {
                return Err(Error::Config(format!("unknown config field `{key}`")));
            }
            let parsed = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
            map.insert(key.to_string(), parsed);
        }
        let config: Self = serde_json::from_value(doc).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn build_agent(&self, inst: &ProblemInstance, seed: u64) -> Result<Box<dyn Agent + Send>> {
        Ok(match self.agent {
            AgentKind::Lumb => Box::new(Lumb::new(self.lumb_config(), inst.features(), inst.rewards(), inst.dim())?),
            AgentKind::UcbMnl => Box::new(
                Baseline::new(BaselineKind::UcbMnl, inst.rewards(), self.capacity, seed)?
                    .with_ucb_constant(self.ucb_constant),
            ),
            AgentKind::TsBeta => Box::new(Baseline::new(BaselineKind::TsBeta, inst.rewards(), self.capacity, seed)?),
            AgentKind::TsCorr => Box::new(Baseline::new(BaselineKind::TsCorr, inst.rewards(), self.capacity, seed)?),
        })
    }
}

/// Purpose of a derived random stream.
#[derive(Debug, Clone, Copy)]
pub enum Stream {
    Instance = 1,
    Environment = 2,
    Agent = 3,
}

/// Independent 64-bit seed for `(master, seed index, stream)` via SplitMix64
/// finalization, so each run's streams depend on nothing but its own index.
pub fn derive_seed(master: u64, seed_index: usize, stream: Stream) -> u64 {
    let mut z = master
        ^ (seed_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (stream as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    for _ in 0..2 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed_index: usize,
    pub instance: ProblemInstance,
    pub episode: EpisodeResult,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub t: u64,
    pub mean: [f64; 5],
    pub std: [f64; 5],
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub runs: Vec<SeedRun>,
    pub summary: Vec<SummaryRow>,
}

/// Instance and episode for one seed index.
pub fn run_seed(config: &ExperimentConfig, seed_index: usize) -> Result<SeedRun> {
    let master = config.master_seed;
    let mut inst_rng = ChaCha8Rng::seed_from_u64(derive_seed(master, seed_index, Stream::Instance));
    let instance = generate_instance(config.n_items, config.dim, &mut inst_rng)?;
    let mut agent = config.build_agent(&instance, derive_seed(master, seed_index, Stream::Agent))?;
    let mut env_rng = ChaCha8Rng::seed_from_u64(derive_seed(master, seed_index, Stream::Environment));
    let episode = run_episode(&instance, agent.as_mut(), config.capacity, config.horizon, config.stride, &mut env_rng)?;
    Ok(SeedRun { seed_index, instance, episode })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_with_jobs(config, 1)
}

/// Runs every seed, `jobs` at a time; output does not depend on `jobs`.
pub fn run_experiment_with_jobs(config: &ExperimentConfig, jobs: usize) -> Result<ExperimentResult> {
    config.validate()?;
    let runs: Vec<SeedRun> = if jobs <= 1 {
        (0..config.n_seeds).map(|s| run_seed(config, s)).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| (0..config.n_seeds).into_par_iter().map(|s| run_seed(config, s)).collect::<Result<_>>())?
    };
    let summary = aggregate(&runs);
    Ok(ExperimentResult { runs, summary })
}

/// Pointwise mean and standard deviation across seeds at shared checkpoints.
pub fn aggregate(runs: &[SeedRun]) -> Vec<SummaryRow> {
    let Some(first) = runs.first() else { return Vec::new() };
    first
        .episode
        .metrics
        .checkpoints
        .iter()
        .enumerate()
        .map(|(k, cp)| {
            let mut mean = [0.0; 5];
            let mut std = [0.0; 5];
            for m in 0..5 {
                let column: Vec<f64> = runs.iter().map(|r| r.episode.metrics.checkpoints[k].values()[m]).collect();
                (mean[m], std[m]) = mean_std(&column);
            }
            SummaryRow { t: cp.t, mean, std }
        })
        .collect()
}

pub fn summary_csv(rows: &[SummaryRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    for name in &METRICS_HEADER[1..] {
        header.push(format!("{name}_mean"));
        header.push(format!("{name}_std"));
    }
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![row.t.to_string()];
        for m in 0..5 {
            rec.push(row.mean[m].to_string());
            rec.push(row.std[m].to_string());
        }
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

impl ExperimentResult {
    /// Writes `config.json`, per-seed `instance-{s}.json`, `epochs-{s}.jsonl`,
    /// `metrics-{s}.csv`, and `summary.csv` into `dir`.
    pub fn write(&self, config: &ExperimentConfig, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("config.json"), config.to_json()? + "\n")?;
        for run in &self.runs {
            let s = run.seed_index;
            fs::write(dir.join(format!("instance-{s}.json")), run.instance.to_json()? + "\n")?;
            let mut log = String::new();
            for e in &run.episode.epochs {
                log.push_str(&e.to_json_line()?);
                log.push('\n');
            }
            fs::write(dir.join(format!("epochs-{s}.jsonl")), log)?;
            fs::write(dir.join(format!("metrics-{s}.csv")), run.episode.metrics.to_csv()?)?;
        }
        fs::write(dir.join("summary.csv"), summary_csv(&self.summary)?)?;
        Ok(())
    }
}
