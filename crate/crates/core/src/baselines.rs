//! Comparison agents that estimate every item utility separately:
//! UCB-MNL, Thompson-Beta and Thompson-Corr.
//!
//! All three share [`PerItemStats`] (epochs offered and total picks per item)
//! and the epoch protocol from [`crate::agent`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::agent::{Agent, EpochRecord, EpochTracker};
use crate::assortment::{optimize_exact, OptProblem};
use crate::error::{Error, Result};
use crate::mnl::{Assortment, ChoiceOutcome};

/// Exploration constant in the UCB-MNL confidence width.
pub const UCB_MNL_CONSTANT: f64 = 48.0;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PerItemStats {
    pub n_epochs: Vec<u64>,
    pub total_picks: Vec<u64>,
}

impl PerItemStats {
    pub fn new(n_items: usize) -> Self {
        Self { n_epochs: vec![0; n_items], total_picks: vec![0; n_items] }
    }

    pub fn n_items(&self) -> usize {
        self.n_epochs.len()
    }

    pub fn mean_utility(&self, item: usize) -> Option<f64> {
        (self.n_epochs[item] > 0).then(|| self.total_picks[item] as f64 / self.n_epochs[item] as f64)
    }

    pub fn update(&mut self, record: &EpochRecord) -> Result<()> {
        record.validate(self.n_items())?;
        for (&i, &c) in record.items.items().iter().zip(&record.picks) {
            self.n_epochs[i] += 1;
            self.total_picks[i] += c;
        }
        Ok(())
    }
}

/// Stand-in utility for never-offered items: strictly above every finite
/// score and at least 2, so such items are tried before any other of equal
/// reward while the optimizer input stays finite.
pub fn forced_exploration_value(finite: impl IntoIterator<Item = f64>) -> f64 {
    2.0 * finite.into_iter().fold(1.0, f64::max)
}

/// Per-item UCB `v̄ + √(v̄ · c · ln(√N l + 1) / n) + c · ln(√N l + 1) / n`.
pub fn ucb_mnl_scores(stats: &PerItemStats, epoch: usize, constant: f64) -> Vec<f64> {
    let n = stats.n_items();
    let log_term = ((n as f64).sqrt() * epoch as f64 + 1.0).ln();
    let scores: Vec<Option<f64>> = (0..n)
        .map(|i| {
            stats.mean_utility(i).map(|mean| {
                let count = stats.n_epochs[i] as f64;
                mean + (mean * constant * log_term / count).sqrt() + constant * log_term / count
            })
        })
        .collect();
    fill_unexplored(scores)
}

pub fn ucb_mnl_select(stats: &PerItemStats, rewards: &[f64], capacity: usize, epoch: usize) -> Result<Assortment> {
    let scores = ucb_mnl_scores(stats, epoch, UCB_MNL_CONSTANT);
    Ok(optimize_exact(&OptProblem::new(&scores, rewards, capacity)?)?.assortment)
}

/// Posterior draw per item: `q ~ Beta(n_i + 1, V_i + 1)`, utility `(1 − q)/q`.
pub fn ts_beta_sample<R: Rng + ?Sized>(stats: &PerItemStats, rng: &mut R) -> Vec<f64> {
    (0..stats.n_items())
        .map(|i| {
            let a = stats.n_epochs[i] as f64 + 1.0;
            let b = stats.total_picks[i] as f64 + 1.0;
            let q: f64 = Beta::new(a, b).expect("shape parameters are ≥ 1").sample(rng);
            let q = q.max(f64::MIN_POSITIVE);
            (1.0 - q) / q
        })
        .collect()
}

/// Correlated draw: `K` shared standard normals `z_k`, and per item
/// `max_k (v̄_i + z_k σ̂_i)` with `σ̂_i = √(v̄_i (v̄_i + 1) / n_i) + 1/n_i`.
pub fn ts_corr_sample<R: Rng + ?Sized>(stats: &PerItemStats, rng: &mut R, draws: usize) -> Vec<f64> {
    let z: Vec<f64> = (0..draws.max(1)).map(|_| rng.sample(StandardNormal)).collect();
    ts_corr_with_draws(stats, &z)
}

/// [`ts_corr_sample`] with caller-supplied normal draws.
pub fn ts_corr_with_draws(stats: &PerItemStats, z: &[f64]) -> Vec<f64> {
    let estimates: Vec<Option<(f64, f64)>> = (0..stats.n_items())
        .map(|i| {
            stats.mean_utility(i).map(|mean| {
                let count = stats.n_epochs[i] as f64;
                (mean, (mean * (mean + 1.0) / count).sqrt() + 1.0 / count)
            })
        })
        .collect();
    correlated_scores(&estimates, z)
}

/// `max_k (mean_i + z_k σ_i)` for explored items given `(mean, σ)`;
/// unexplored items get the forced-exploration value.
pub fn correlated_scores(estimates: &[Option<(f64, f64)>], z: &[f64]) -> Vec<f64> {
    let scores = estimates
        .iter()
        .map(|e| e.map(|(mean, sigma)| z.iter().map(|zk| mean + zk * sigma).fold(f64::NEG_INFINITY, f64::max)))
        .collect();
    fill_unexplored(scores)
}

fn fill_unexplored(scores: Vec<Option<f64>>) -> Vec<f64> {
    let forced = forced_exploration_value(scores.iter().flatten().copied());
    scores.into_iter().map(|s| s.unwrap_or(forced)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    UcbMnl,
    TsBeta,
    TsCorr,
}

impl BaselineKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::UcbMnl => "ucb-mnl",
            Self::TsBeta => "ts-beta",
            Self::TsCorr => "ts-corr",
        }
    }
}

/// One of the three per-item baselines.
#[derive(Debug, Clone)]
pub struct Baseline {
    kind: BaselineKind,
    rewards: Vec<f64>,
    capacity: usize,
    ucb_constant: f64,
    stats: PerItemStats,
    tracker: EpochTracker,
    rng: ChaCha8Rng,
}

impl Baseline {
    pub fn new(kind: BaselineKind, rewards: &[f64], capacity: usize, seed: u64) -> Result<Self> {
        if capacity == 0 || capacity > rewards.len() {
            return Err(Error::Config(format!("capacity {capacity} must lie in 1..={}", rewards.len())));
        }
        Ok(Self {
            kind,
            rewards: rewards.to_vec(),
            capacity,
            ucb_constant: UCB_MNL_CONSTANT,
            stats: PerItemStats::new(rewards.len()),
            tracker: EpochTracker::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn with_ucb_constant(mut self, constant: f64) -> Self {
        self.ucb_constant = constant;
        self
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    pub fn stats(&self) -> &PerItemStats {
        &self.stats
    }

    fn scores(&mut self) -> Vec<f64> {
        match self.kind {
            BaselineKind::UcbMnl => ucb_mnl_scores(&self.stats, self.tracker.index(), self.ucb_constant),
            BaselineKind::TsBeta => ts_beta_sample(&self.stats, &mut self.rng),
            BaselineKind::TsCorr => ts_corr_sample(&self.stats, &mut self.rng, self.capacity),
        }
    }
}

impl Agent for Baseline {
    fn name(&self) -> &str {
        self.kind.name()
    }

    fn assortment(&mut self) -> Result<&Assortment> {
        if self.tracker.current().is_none() {
            let scores = self.scores();
            let s = optimize_exact(&OptProblem::new(&scores, &self.rewards, self.capacity)?)?.assortment;
            self.tracker.get_or_open(|| Ok(s))?;
        }
        Ok(self.tracker.current().expect("epoch is open"))
    }

    fn observe(&mut self, outcome: ChoiceOutcome) -> Result<Option<EpochRecord>> {
        let record = self.tracker.record(outcome)?;
        if let Some(r) = &record {
            self.stats.update(r)?;
        }
        Ok(record)
    }

    fn utility_estimates(&self) -> Option<Vec<f64>> {
        Some((0..self.stats.n_items()).map(|i| self.stats.mean_utility(i).unwrap_or(0.0)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assortment::optimize_bruteforce;

    fn stats(n_epochs: &[u64], picks: &[u64]) -> PerItemStats {
        PerItemStats { n_epochs: n_epochs.to_vec(), total_picks: picks.to_vec() }
    }

    #[test]
    fn unexplored_item_outranks_explored_peer() {
        let s = stats(&[10, 0], &[30, 0]);
        let scores = ucb_mnl_scores(&s, 5, UCB_MNL_CONSTANT);
        assert!(scores[1] > scores[0]);
        let pick = ucb_mnl_select(&s, &[0.5, 0.5], 1, 5).unwrap();
        assert_eq!(pick.items(), &[1]);
    }

    #[test]
    fn ucb_width_vanishes_with_many_epochs() {
        let n = 1u64 << 40;
        let s = stats(&[n], &[n]);
        let score = ucb_mnl_scores(&s, 10, UCB_MNL_CONSTANT)[0];
        assert!((score - 1.0).abs() < 1e-4, "{score}");
    }

    #[test]
    fn ucb_selection_matches_enumeration() {
        let s = stats(&[3, 8, 1, 12, 5, 2], &[4, 2, 0, 20, 5, 9]);
        let rewards = [0.9, 0.3, 0.6, 0.2, 0.75, 0.5];
        let scores = ucb_mnl_scores(&s, 7, UCB_MNL_CONSTANT);
        let brute = optimize_bruteforce(&OptProblem::new(&scores, &rewards, 3).unwrap()).unwrap();
        assert_eq!(ucb_mnl_select(&s, &rewards, 3, 7).unwrap(), brute.assortment);
    }

    #[test]
    fn beta_prior_median_is_one() {
        let s = stats(&[0], &[0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut draws: Vec<f64> = (0..20_001).map(|_| ts_beta_sample(&s, &mut rng)[0]).collect();
        assert!(draws.iter().all(|&v| v >= 0.0));
        draws.sort_by(f64::total_cmp);
        let median = draws[draws.len() / 2];
        assert!((median - 1.0).abs() < 0.05, "{median}");
    }

    #[test]
    fn beta_posterior_concentrates() {
        // 10⁴ epochs with true utility 1: total picks ≈ 10⁴.
        let s = stats(&[10_000], &[10_000]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mean = (0..1000).map(|_| ts_beta_sample(&s, &mut rng)[0]).sum::<f64>() / 1000.0;
        assert!((mean - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn corr_zero_draw_returns_mean() {
        let s = stats(&[4, 2], &[6, 1]);
        let v = ts_corr_with_draws(&s, &[0.0]);
        assert_eq!(v, vec![1.5, 0.5]);
    }

    #[test]
    fn corr_shared_draws_preserve_order() {
        let estimates = [Some((0.4, 0.3)), Some((1.8, 0.3)), None, Some((0.8, 0.3))];
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let z: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
            let v = correlated_scores(&estimates, &z);
            assert!(v[1] > v[3] && v[3] > v[0], "{v:?}");
            assert!(v[2] > v[1]);
        }
    }

    #[test]
    fn more_draws_give_larger_samples() {
        let s = stats(&[6], &[3]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let avg =
            |k: usize, rng: &mut ChaCha8Rng| (0..1000).map(|_| ts_corr_sample(&s, rng, k)[0]).sum::<f64>() / 1000.0;
        let one = avg(1, &mut rng);
        let five = avg(5, &mut rng);
        let ten = avg(10, &mut rng);
        assert!(one < five && five < ten, "{one} {five} {ten}");
    }

    #[test]
    fn baselines_are_seed_deterministic() {
        for kind in [BaselineKind::UcbMnl, BaselineKind::TsBeta, BaselineKind::TsCorr] {
            let run = || {
                let mut agent = Baseline::new(kind, &[0.9, 0.5, 0.7, 0.2], 2, 77).unwrap();
                let mut offered = Vec::new();
                for step in 0..40 {
                    let s = agent.assortment().unwrap().clone();
                    let outcome = if step % 3 == 0 || s.is_empty() {
                        ChoiceOutcome::NoChoice
                    } else {
                        ChoiceOutcome::Item(s.items()[0])
                    };
                    agent.observe(outcome).unwrap();
                    offered.push(s);
                }
                offered
            };
            assert_eq!(run(), run());
        }
    }
}
