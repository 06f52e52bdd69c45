//! Ground-truth multinomial-logit choice model.
//!
//! Candidate items are indexed `0..N`. The "no choice" outcome is a separate
//! variant of [`ChoiceOutcome`] and carries the fixed utility 1.

use std::borrow::Cow;

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on the unit-norm bounds of features and parameters.
pub const NORM_TOL: f64 = 1e-9;

/// Utilities in `[-UTILITY_SLACK, 0)` are treated as float noise and clamped to 0.
pub const UTILITY_SLACK: f64 = 1e-9;

/// A synthetic MNL bandit instance: item features, rewards and the hidden
/// parameter that generates the true utilities `v_i = θ*ᵀ x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    n_items: usize,
    dim: usize,
    features: Vec<f64>,
    rewards: Vec<f64>,
    theta_star: Vec<f64>,
    utilities: Vec<f64>,
}

/// On-disk form. Utilities are never stored; they are recomputed on load.
#[derive(Debug, Serialize, Deserialize)]
struct InstanceDoc {
    n_items: usize,
    dim: usize,
    features: Vec<f64>,
    rewards: Vec<f64>,
    theta_star: Vec<f64>,
}

impl ProblemInstance {
    /// Builds an instance from row-major features (`n_items * dim` values).
    pub fn new(
        n_items: usize,
        dim: usize,
        features: Vec<f64>,
        rewards: Vec<f64>,
        theta_star: Vec<f64>,
    ) -> Result<Self> {
        if n_items == 0 || dim == 0 {
            return Err(Error::InvalidInstance(format!("n_items ({n_items}) and dim ({dim}) must be positive")));
        }
        if features.len() != n_items * dim {
            return Err(Error::InvalidInstance(format!(
                "expected {} feature values, got {}",
                n_items * dim,
                features.len()
            )));
        }
        if rewards.len() != n_items {
            return Err(Error::InvalidInstance(format!("expected {n_items} rewards, got {}", rewards.len())));
        }
        if theta_star.len() != dim {
            return Err(Error::InvalidInstance(format!(
                "expected theta_star of length {dim}, got {}",
                theta_star.len()
            )));
        }
        if features.iter().chain(&rewards).chain(&theta_star).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInstance("non-finite value".into()));
        }
        if let Some((i, r)) = rewards.iter().enumerate().find(|(_, &r)| !(r > 0.0 && r <= 1.0)) {
            return Err(Error::InvalidInstance(format!("reward {i} = {r} outside (0, 1]")));
        }
        if norm(&theta_star) > 1.0 + NORM_TOL {
            return Err(Error::InvalidInstance("‖theta_star‖ exceeds 1".into()));
        }
        let mut utilities = Vec::with_capacity(n_items);
        for (i, x) in features.chunks_exact(dim).enumerate() {
            if norm(x) > 1.0 + NORM_TOL {
                return Err(Error::InvalidInstance(format!("‖x_{i}‖ exceeds 1")));
            }
            let v = dot(&theta_star, x);
            if v < -UTILITY_SLACK {
                return Err(Error::InvalidUtility { item: i, value: v });
            }
            utilities.push(v.max(0.0));
        }
        Ok(Self { n_items, dim, features, rewards, theta_star, utilities })
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn feature(&self, item: usize) -> &[f64] {
        &self.features[item * self.dim..(item + 1) * self.dim]
    }

    /// Row-major feature matrix, one row per item.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn theta_star(&self) -> &[f64] {
        &self.theta_star
    }

    pub fn utilities(&self) -> &[f64] {
        &self.utilities
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = InstanceDoc {
            n_items: self.n_items,
            dim: self.dim,
            features: self.features.clone(),
            rewards: self.rewards.clone(),
            theta_star: self.theta_star.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(s)?;
        Self::new(doc.n_items, doc.dim, doc.features, doc.rewards, doc.theta_star)
    }
}

/// A set of distinct item indices offered together, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assortment(Vec<usize>);

impl Assortment {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Sorts the indices; duplicates are rejected.
    pub fn new(mut items: Vec<usize>) -> Result<Self> {
        items.sort_unstable();
        if items.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidAssortment(format!("duplicate items in {items:?}")));
        }
        Ok(Self(items))
    }

    pub fn items(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, item: usize) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    /// Position of `item` within the sorted item list.
    pub fn position(&self, item: usize) -> Option<usize> {
        self.0.binary_search(&item).ok()
    }

    /// Checks index range and, when given, the capacity bound.
    pub fn validate(&self, n_items: usize, capacity: Option<usize>) -> Result<()> {
        if let Some(&i) = self.0.iter().find(|&&i| i >= n_items) {
            return Err(Error::InvalidAssortment(format!("item {i} out of range 0..{n_items}")));
        }
        if let Some(k) = capacity {
            if self.0.len() > k {
                return Err(Error::InvalidAssortment(format!("{} items exceed capacity {k}", self.0.len())));
            }
        }
        Ok(())
    }
}

/// What a user did when shown an assortment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChoiceOutcome {
    Item(usize),
    NoChoice,
}

/// Choice probabilities over an assortment, aligned with its sorted items,
/// plus the no-choice probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceProbabilities {
    pub items: Vec<f64>,
    pub none: f64,
}

impl ChoiceProbabilities {
    pub fn total(&self) -> f64 {
        self.items.iter().sum::<f64>() + self.none
    }
}

/// Applies the utility clamp rule: tiny negatives become 0 (with a warning),
/// anything below `-UTILITY_SLACK` or non-finite is an error.
pub fn sanitize_utilities(utilities: &[f64]) -> Result<Cow<'_, [f64]>> {
    let mut needs_clamp = false;
    for (item, &value) in utilities.iter().enumerate() {
        if !value.is_finite() || value < -UTILITY_SLACK {
            return Err(Error::InvalidUtility { item, value });
        }
        needs_clamp |= value < 0.0;
    }
    if !needs_clamp {
        return Ok(Cow::Borrowed(utilities));
    }
    warn!("clamping slightly negative utilities to zero");
    Ok(Cow::Owned(utilities.iter().map(|v| v.max(0.0)).collect()))
}

/// Expected MNL reward `Σ v_i r_i / (1 + Σ v_i)` over `items`, no validation.
pub fn mnl_reward(items: &[usize], utilities: &[f64], rewards: &[f64]) -> f64 {
    let (num, den) =
        items.iter().fold((0.0, 1.0), |(num, den), &i| (num + utilities[i] * rewards[i], den + utilities[i]));
    num / den
}

pub fn choice_probabilities(inst: &ProblemInstance, s: &Assortment) -> Result<ChoiceProbabilities> {
    s.validate(inst.n_items(), None)?;
    let v = inst.utilities();
    let den = 1.0 + s.items().iter().map(|&i| v[i]).sum::<f64>();
    Ok(ChoiceProbabilities { items: s.items().iter().map(|&i| v[i] / den).collect(), none: 1.0 / den })
}

/// Draws one user choice from the MNL model.
pub fn sample_choice<R: Rng + ?Sized>(inst: &ProblemInstance, s: &Assortment, rng: &mut R) -> Result<ChoiceOutcome> {
    s.validate(inst.n_items(), None)?;
    Ok(sample_choice_unchecked(inst.utilities(), s.items(), rng))
}

/// Inner sampler shared with the harness hot loop; assumes validated input.
pub(crate) fn sample_choice_unchecked<R: Rng + ?Sized>(
    utilities: &[f64],
    items: &[usize],
    rng: &mut R,
) -> ChoiceOutcome {
    let total: f64 = items.iter().map(|&i| utilities[i]).sum();
    if total <= 0.0 {
        return ChoiceOutcome::NoChoice;
    }
    let mut u = rng.random::<f64>() * (1.0 + total);
    for &i in items {
        u -= utilities[i];
        if u < 0.0 {
            return ChoiceOutcome::Item(i);
        }
    }
    ChoiceOutcome::NoChoice
}

/// Expected reward of `s` under an arbitrary utility vector (true or estimated).
pub fn expected_reward(inst: &ProblemInstance, s: &Assortment, utilities: &[f64]) -> Result<f64> {
    if utilities.len() != inst.n_items() {
        return Err(Error::InvalidInstance(format!(
            "utility vector has length {}, expected {}",
            utilities.len(),
            inst.n_items()
        )));
    }
    s.validate(inst.n_items(), None)?;
    let v = sanitize_utilities(utilities)?;
    Ok(mnl_reward(s.items(), &v, inst.rewards()))
}

/// Pseudo-regret `Σ_t [R(S*, v) - R(S_t, v)]` of a sequence of offers.
pub fn cumulative_regret(inst: &ProblemInstance, optimal: &Assortment, offered: &[Assortment]) -> Result<f64> {
    let best = expected_reward(inst, optimal, inst.utilities())?;
    let mut total = 0.0;
    for s in offered {
        total += best - expected_reward(inst, s, inst.utilities())?;
    }
    Ok(total)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
