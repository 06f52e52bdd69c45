use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{Agent, EpochRecord};
use crate::assortment::{optimize_exact, OptProblem, OptSolution};
use crate::error::{Error, Result};
use crate::mnl::{mnl_reward, norm, sample_choice_unchecked, Assortment, ChoiceOutcome, ProblemInstance};

pub const METRICS_HEADER: [&str; 6] = ["t", "cum_regret", "norm_regret", "util_dev", "theta_dev", "realized_reward"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: u64,
    pub cum_regret: f64,
    pub norm_regret: f64,
    /// `‖θᵀX − v‖ / ‖v‖` (or the agent's own utility estimates); NaN when
    /// the agent keeps none.
    pub util_dev: f64,
    /// `‖θ − θ*‖ / ‖θ*‖`; NaN for agents without a parameter estimate.
    pub theta_dev: f64,
    /// Cumulative realized reward `Σ r_{c_t}`.
    pub realized_reward: f64,
}

impl Checkpoint {
    pub fn values(&self) -> [f64; 5] {
        [self.cum_regret, self.norm_regret, self.util_dev, self.theta_dev, self.realized_reward]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsSeries {
    pub checkpoints: Vec<Checkpoint>,
}

impl MetricsSeries {
    pub fn last(&self) -> Option<&Checkpoint> {
        self.checkpoints.last()
    }

    /// The latest checkpoint at or before `t`.
    pub fn at(&self, t: u64) -> Option<&Checkpoint> {
        self.checkpoints.iter().take_while(|c| c.t <= t).last()
    }

    /// CSV with [`METRICS_HEADER`]; floats use Rust's shortest round-trip form.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(METRICS_HEADER)?;
        for c in &self.checkpoints {
            let mut row = vec![c.t.to_string()];
            row.extend(c.values().iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let mut checkpoints = Vec::new();
        for row in r.records() {
            let row = row?;
            let f = |i: usize| row.get(i).and_then(|s| s.parse::<f64>().ok()).unwrap_or(f64::NAN);
            checkpoints.push(Checkpoint {
                t: row.get(0).and_then(|s| s.parse().ok()).unwrap_or(0),
                cum_regret: f(1),
                norm_regret: f(2),
                util_dev: f(3),
                theta_dev: f(4),
                realized_reward: f(5),
            });
        }
        Ok(Self { checkpoints })
    }
}

#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub metrics: MetricsSeries,
    /// Closed epochs only; a trailing epoch cut off by the horizon is omitted.
    pub epochs: Vec<EpochRecord>,
    pub optimum: OptSolution,
    pub final_theta: Option<Vec<f64>>,
}

/// Optimal assortment for the true utilities.
pub fn true_optimum(inst: &ProblemInstance, capacity: usize) -> Result<OptSolution> {
    optimize_exact(&OptProblem::new(inst.utilities(), inst.rewards(), capacity)?)
}

/// Runs one agent for `horizon` steps against the instance's MNL model,
/// recording metrics every `stride` steps and at the horizon.
pub fn run_episode<R: Rng + ?Sized>(
    inst: &ProblemInstance,
    agent: &mut dyn Agent,
    capacity: usize,
    horizon: u64,
    stride: u64,
    rng: &mut R,
) -> Result<EpisodeResult> {
    if stride == 0 {
        return Err(Error::Config("checkpoint stride must be at least 1".into()));
    }
    let optimum = true_optimum(inst, capacity)?;
    let best = optimum.value;
    let v = inst.utilities();
    let r = inst.rewards();
    let v_norm = norm(v);
    let theta_norm = norm(inst.theta_star());

    let mut metrics = MetricsSeries::default();
    let mut epochs = Vec::new();
    let mut offered = Assortment::empty();
    let mut offered_reward = 0.0;
    let mut epoch_open = false;
    let mut cum_regret = 0.0;
    let mut realized = 0.0;

    for t in 1..=horizon {
        let current = agent.assortment()?;
        if !epoch_open {
            current.validate(inst.n_items(), Some(capacity))?;
            offered = current.clone();
            offered_reward = mnl_reward(offered.items(), v, r);
            epoch_open = true;
        } else if current != &offered {
            let changed = current.clone();
            return Err(Error::Protocol(format!(
                "{} changed its assortment mid-epoch at t = {t}: {:?} → {:?}",
                agent.name(),
                offered.items(),
                changed.items()
            )));
        }
        cum_regret += best - offered_reward;
        let outcome = sample_choice_unchecked(v, offered.items(), rng);
        if let ChoiceOutcome::Item(i) = outcome {
            realized += r[i];
        }
        if let Some(record) = agent.observe(outcome)? {
            epochs.push(record);
            epoch_open = false;
        }
        if t % stride == 0 || t == horizon {
            let util_dev = agent.utility_estimates().map_or(f64::NAN, |est| relative_error(&est, v, v_norm));
            let theta_dev =
                agent.theta_estimate().map_or(f64::NAN, |th| relative_error(th, inst.theta_star(), theta_norm));
            metrics.checkpoints.push(Checkpoint {
                t,
                cum_regret,
                norm_regret: if best > 0.0 { cum_regret / best } else { 0.0 },
                util_dev,
                theta_dev,
                realized_reward: realized,
            });
        }
    }

    Ok(EpisodeResult { metrics, epochs, optimum, final_theta: agent.theta_estimate().map(<[f64]>::to_vec) })
}

fn relative_error(estimate: &[f64], truth: &[f64], truth_norm: f64) -> f64 {
    let diff: f64 = estimate.iter().zip(truth).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    diff / truth_norm
}
