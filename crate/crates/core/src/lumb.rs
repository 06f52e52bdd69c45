//! The LUMB agent: epoch counting, ridge estimation of the utility
//! parameter, optimistic item utilities and assortment selection.

use serde::{Deserialize, Serialize};

pub use crate::agent::EpochRecord;
use crate::agent::{Agent, EpochTracker};
use crate::assortment::{optimize_exact, OptProblem};
use crate::error::{Error, Result};
use crate::estimator::RidgeEstimator;
use crate::mnl::{Assortment, ChoiceOutcome};

/// How the confidence multiplier `α` was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaMode {
    /// `α` from [`theoretical_alpha`] for a known horizon and dimension.
    Theoretical,
    /// User-supplied `α` (default 1.0).
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LumbConfig {
    pub lambda: f64,
    pub alpha: f64,
    pub alpha_mode: AlphaMode,
    pub capacity: usize,
}

impl LumbConfig {
    pub fn fixed(alpha: f64, capacity: usize) -> Self {
        Self { lambda: 1.0, alpha, alpha_mode: AlphaMode::Fixed, capacity }
    }

    /// Uses the regret-bound schedule for horizon `horizon` and dimension `dim`.
    pub fn theoretical(horizon: u64, dim: usize, capacity: usize) -> Self {
        let (alpha, _) = theoretical_alpha(horizon, dim);
        Self { lambda: 1.0, alpha, alpha_mode: AlphaMode::Theoretical, capacity }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be nonnegative, got {}", self.alpha)));
        }
        if self.capacity == 0 {
            return Err(Error::Config("capacity must be positive".into()));
        }
        Ok(())
    }

    /// Multiplier `√2 + α` in front of the confidence width.
    pub fn width_factor(&self) -> f64 {
        std::f64::consts::SQRT_2 + self.alpha
    }
}

/// `(α, β)` with `β = 2 log₂ T` and `α = β √(2 ln(2 √T (1 + T/d)^{d/2}))`.
///
/// The logarithm is evaluated as `ln 2 + ½ ln T + (d/2) ln(1 + T/d)` so large
/// horizons do not overflow.
pub fn theoretical_alpha(horizon: u64, dim: usize) -> (f64, f64) {
    let t = horizon as f64;
    let d = dim as f64;
    let beta = 2.0 * t.log2();
    let log_term = std::f64::consts::LN_2 + 0.5 * t.ln() + 0.5 * d * (t / d).ln_1p();
    (beta * (2.0 * log_term).sqrt(), beta)
}

#[derive(Debug, Clone)]
pub struct Lumb {
    config: LumbConfig,
    n_items: usize,
    dim: usize,
    features: Vec<f64>,
    rewards: Vec<f64>,
    estimator: RidgeEstimator,
    ucb: Vec<f64>,
    tracker: EpochTracker,
    epochs_closed: usize,
}

impl Lumb {
    /// Sets up `A = λI`, `b = 0`, `θ = 0` and the initial UCBs
    /// `(√2 + α) ‖x_i‖ / √λ`.
    pub fn new(config: LumbConfig, features: &[f64], rewards: &[f64], dim: usize) -> Result<Self> {
        config.validate()?;
        if dim == 0 || features.len() != rewards.len() * dim {
            return Err(Error::Config(format!(
                "{} feature values do not form {} rows of dimension {dim}",
                features.len(),
                rewards.len()
            )));
        }
        let n_items = rewards.len();
        if config.capacity > n_items {
            return Err(Error::Config(format!("capacity {} exceeds {n_items} items", config.capacity)));
        }
        let mut agent = Self {
            estimator: RidgeEstimator::new(dim, config.lambda)?,
            config,
            n_items,
            dim,
            features: features.to_vec(),
            rewards: rewards.to_vec(),
            ucb: vec![0.0; n_items],
            tracker: EpochTracker::new(),
            epochs_closed: 0,
        };
        agent.refresh_ucb();
        Ok(agent)
    }

    /// Rebuilds the state a live agent would have after `records`.
    pub fn replay(
        config: LumbConfig,
        features: &[f64],
        rewards: &[f64],
        dim: usize,
        records: &[EpochRecord],
    ) -> Result<Self> {
        let mut agent = Self::new(config, features, rewards, dim)?;
        for r in records {
            agent.update_estimator(r)?;
        }
        Ok(agent)
    }

    pub fn config(&self) -> &LumbConfig {
        &self.config
    }

    pub fn feature(&self, item: usize) -> &[f64] {
        &self.features[item * self.dim..(item + 1) * self.dim]
    }

    pub fn estimator(&self) -> &RidgeEstimator {
        &self.estimator
    }

    pub fn theta(&self) -> &[f64] {
        self.estimator.theta()
    }

    pub fn ucb(&self) -> &[f64] {
        &self.ucb
    }

    /// Index `l` of the open epoch.
    pub fn epoch_index(&self) -> usize {
        self.tracker.index()
    }

    pub fn epochs_closed(&self) -> usize {
        self.epochs_closed
    }

    pub fn current_counts(&self) -> &[u64] {
        self.tracker.counts()
    }

    pub fn current_assortment(&self) -> Option<&Assortment> {
        self.tracker.current()
    }

    /// `θᵀx_i + (√2 + α) √(x_iᵀ A⁻¹ x_i)`. May be negative early on; the
    /// optimizer clamps.
    pub fn compute_ucb(&self, item: usize) -> f64 {
        let x = self.feature(item);
        self.estimator.predict(x) + self.config.width_factor() * self.estimator.width(x)
    }

    /// The open epoch's assortment, solving `argmax_{|S|≤K} R(S, v^UCB)` when
    /// a new epoch starts.
    pub fn select_assortment(&mut self) -> Result<&Assortment> {
        let (ucb, rewards, k) = (&self.ucb, &self.rewards, self.config.capacity);
        self.tracker.get_or_open(|| Ok(optimize_exact(&OptProblem::new(ucb, rewards, k)?)?.assortment))
    }

    /// Records one step; on no-choice closes the epoch, updates the
    /// estimator and UCBs, and returns the closed record.
    pub fn observe(&mut self, outcome: ChoiceOutcome) -> Result<Option<EpochRecord>> {
        let record = self.tracker.record(outcome)?;
        if let Some(r) = &record {
            self.update_estimator(r)?;
        }
        Ok(record)
    }

    /// `b += Σ v̂_i x_i`, `A += Σ x_i x_iᵀ` over the epoch's items, then
    /// `θ = A⁻¹b` and fresh UCBs for every item.
    pub fn update_estimator(&mut self, record: &EpochRecord) -> Result<()> {
        record.validate(self.n_items)?;
        let dim = self.dim;
        let features = &self.features;
        self.estimator.update(
            record
                .items
                .items()
                .iter()
                .zip(&record.picks)
                .map(|(&i, &c)| (&features[i * dim..(i + 1) * dim], c as f64)),
        )?;
        self.epochs_closed += 1;
        self.refresh_ucb();
        Ok(())
    }

    fn refresh_ucb(&mut self) {
        for i in 0..self.n_items {
            self.ucb[i] = self.compute_ucb(i);
        }
    }
}

impl Agent for Lumb {
    fn name(&self) -> &str {
        "lumb"
    }

    fn assortment(&mut self) -> Result<&Assortment> {
        self.select_assortment()
    }

    fn observe(&mut self, outcome: ChoiceOutcome) -> Result<Option<EpochRecord>> {
        Lumb::observe(self, outcome)
    }

    fn theta_estimate(&self) -> Option<&[f64]> {
        Some(self.theta())
    }

    fn utility_estimates(&self) -> Option<Vec<f64>> {
        Some((0..self.n_items).map(|i| self.estimator.predict(self.feature(i))).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_features(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n * d);
        for _ in 0..n {
            let raw: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            let scale = rng.random::<f64>() / norm;
            out.extend(raw.iter().map(|x| x * scale));
        }
        out
    }

    #[test]
    fn initial_ucbs() {
        let features = [0.0, 0.0, 0.6, 0.8];
        let agent = Lumb::new(LumbConfig::fixed(3.0, 1), &features, &[0.5, 0.5], 2).unwrap();
        assert_eq!(agent.ucb()[0], 0.0);
        assert!((agent.ucb()[1] - (2f64.sqrt() + 3.0)).abs() < 1e-12);
        assert!((agent.ucb()[1] - 4.41421).abs() < 1e-5);
        assert!((agent.estimator().min_eigenvalue() - 1.0).abs() < 1e-12);
        assert_eq!(agent.theta(), &[0.0, 0.0]);
    }

    #[test]
    fn initial_ucb_scales_with_inverse_root_lambda() {
        let config = LumbConfig { lambda: 4.0, ..LumbConfig::fixed(1.0, 1) };
        let agent = Lumb::new(config, &[1.0], &[1.0], 1).unwrap();
        assert!((agent.ucb()[0] - (2f64.sqrt() + 1.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn theoretical_schedule() {
        let (_, beta) = theoretical_alpha(4, 1);
        assert!((beta - 4.0).abs() < 1e-12);
        // Direct evaluation with the closed form, no rearrangement.
        let (alpha, beta) = theoretical_alpha(10_000, 10);
        let t: f64 = 1e4;
        let direct = 2.0 * t.log2() * (2.0 * (2.0 * t.sqrt() * (1.0 + t / 10.0).powf(5.0)).ln()).sqrt();
        assert!((beta - 26.5754).abs() < 1e-4);
        assert!((alpha - direct).abs() < 1e-9);
        assert!((alpha - 237.2).abs() < 0.05);
        let mut last = 0.0;
        for t in [2u64, 10, 100, 1_000, 100_000, 10_000_000] {
            let (a, _) = theoretical_alpha(t, 5);
            assert!(a > last);
            last = a;
        }
    }

    #[test]
    fn equal_ucbs_pick_highest_reward_singleton() {
        let features = [1.0; 4];
        let mut agent = Lumb::new(LumbConfig::fixed(1.0, 1), &features, &[0.2, 0.9, 0.4, 0.7], 1).unwrap();
        assert_eq!(agent.select_assortment().unwrap().items(), &[1]);
    }

    #[test]
    fn epoch_update_grows_design_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (n, d) = (6, 3);
        let features = random_features(&mut rng, n, d);
        let rewards = vec![0.9, 0.8, 0.7, 0.6, 0.5, 0.4];
        let mut agent = Lumb::new(LumbConfig::fixed(1.0, 3), &features, &rewards, d).unwrap();
        let before = agent.estimator().a().clone();
        let s = agent.select_assortment().unwrap().clone();
        let first = s.items()[0];
        agent.observe(ChoiceOutcome::Item(first)).unwrap();
        agent.observe(ChoiceOutcome::Item(first)).unwrap();
        let rec = agent.observe(ChoiceOutcome::NoChoice).unwrap().unwrap();
        assert_eq!(rec.picks_of(first), 2);
        assert_eq!(rec.length, 3);
        let mut expected = before;
        for &i in s.items() {
            let x = DVector::from_column_slice(agent.feature(i));
            expected += &x * x.transpose();
        }
        assert!((agent.estimator().a() - expected).abs().max() < 1e-15);
        assert_eq!(agent.epoch_index(), 2);
    }

    #[test]
    fn foreign_choice_is_rejected() {
        let mut agent = Lumb::new(LumbConfig::fixed(1.0, 1), &[1.0, 0.5], &[1.0, 0.1], 1).unwrap();
        agent.select_assortment().unwrap();
        assert!(matches!(agent.observe(ChoiceOutcome::Item(1)), Err(Error::Protocol(_))));
    }

    #[test]
    fn theta_matches_batch_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (n, d) = (15, 4);
        let features = random_features(&mut rng, n, d);
        let rewards: Vec<f64> = (0..n).map(|_| 1.0 - rng.random::<f64>()).collect();
        let mut agent = Lumb::new(LumbConfig::fixed(1.0, 4), &features, &rewards, d).unwrap();
        let mut records = Vec::new();
        for l in 1..=20 {
            let k = rng.random_range(0..=4);
            let mut items: Vec<usize> = (0..n).collect();
            for i in 0..k {
                let j = rng.random_range(i..n);
                items.swap(i, j);
            }
            items.truncate(k);
            let items = Assortment::new(items).unwrap();
            let picks: Vec<u64> = (0..k).map(|_| rng.random_range(0..5)).collect();
            let length = picks.iter().sum::<u64>() + 1;
            let rec = EpochRecord { l, items, picks, length };
            agent.update_estimator(&rec).unwrap();
            records.push(rec);
        }
        // Batch oracle: stack every (epoch, item) row and solve (XᵀX + λI)θ = Xᵀy.
        let rows: Vec<(usize, f64)> = records
            .iter()
            .flat_map(|r| r.items.items().iter().zip(&r.picks).map(|(&i, &c)| (i, c as f64)).collect::<Vec<_>>())
            .collect();
        let x = DMatrix::from_fn(rows.len(), d, |r, c| features[rows[r].0 * d + c]);
        let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
        let lhs = x.transpose() * &x + DMatrix::identity(d, d);
        let theta = lhs.lu().solve(&(x.transpose() * y)).unwrap();
        for (a, b) in agent.theta().iter().zip(theta.iter()) {
            assert!((a - b).abs() < 1e-8);
        }
        let replayed = Lumb::replay(LumbConfig::fixed(1.0, 4), &features, &rewards, d, &records).unwrap();
        assert!((replayed.estimator().a() - agent.estimator().a()).abs().max() < 1e-9);
        assert_eq!(replayed.theta(), agent.theta());
    }

    #[test]
    fn empty_history_keeps_theta_zero() {
        let agent = Lumb::replay(LumbConfig::fixed(1.0, 1), &[0.5, 0.5], &[1.0], 2, &[]).unwrap();
        assert_eq!(agent.theta(), &[0.0, 0.0]);
    }

    #[test]
    fn bad_config_is_rejected() {
        assert!(Lumb::new(LumbConfig { lambda: -1.0, ..LumbConfig::fixed(1.0, 1) }, &[1.0], &[1.0], 1).is_err());
        assert!(Lumb::new(LumbConfig::fixed(-0.5, 1), &[1.0], &[1.0], 1).is_err());
        assert!(Lumb::new(LumbConfig::fixed(1.0, 2), &[1.0], &[1.0], 1).is_err());
    }
}
