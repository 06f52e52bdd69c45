//! Statistical and exactness self-checks, grouped into named suites.
//!
//! Every check is seeded and therefore reproducible; each returns a
//! [`Check`] carrying a pass flag and a one-line diagnostic.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agent::{EpochRecord, FixedAgent};
use crate::assortment::{lp_build, optimize_bruteforce, optimize_exact, optimize_lp, OptProblem};
use crate::error::{Error, Result};
use crate::estimator::RidgeEstimator;
use crate::harness::{generate_instance, run_episode};
use crate::lumb::{Lumb, LumbConfig};
use crate::mnl::{
    choice_probabilities, expected_reward, mnl_reward, sample_choice, Assortment, ChoiceOutcome, ProblemInstance,
};
use crate::simplex::LpOutcome;
use crate::stats::chi_square_gof;

pub const SIGNIFICANCE: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    ChoiceModel,
    Geometric,
    Optimizer,
    Estimator,
    Coverage,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Self::ChoiceModel, Self::Geometric, Self::Optimizer, Self::Estimator, Self::Coverage];

    pub fn name(self) -> &'static str {
        match self {
            Self::ChoiceModel => "choice-model",
            Self::Geometric => "geometric",
            Self::Optimizer => "optimizer",
            Self::Estimator => "estimator",
            Self::Coverage => "coverage",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.to_string(), passed, detail }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {}", self.suite.name())?;
        for c in &self.checks {
            writeln!(f, "  {c}")?;
        }
        write!(f, "{}", if self.passed() { "ok" } else { "FAILED" })
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::ChoiceModel => vec![probability_identities(1000, seed)?, choice_sampling(50, 100_000, seed)?],
        Suite::Geometric => {
            let mut checks = [0.1, 0.5, 1.0]
                .into_iter()
                .map(|v| epoch_pick_distribution(v, 100_000, seed))
                .collect::<Result<Vec<_>>>()?;
            checks.push(epoch_length_law(10, 100_000, seed)?);
            checks
        }
        Suite::Optimizer => vec![
            optimizer_exactness(1000, 12, 4, seed)?,
            lp_equivalence(50, 8, 4, seed)?,
            monotonicity_chain(1000, 12, seed)?,
        ],
        Suite::Estimator => vec![estimator_equivalence(100, 50, seed)?, estimator_consistency(10, 5000, seed)?],
        Suite::Coverage => vec![ucb_coverage(50, 5, 5, 100_000, seed)?],
    };
    Ok(SuiteReport { suite, checks })
}

fn random_assortment(rng: &mut ChaCha8Rng, n: usize, max_len: usize) -> Assortment {
    let k = rng.random_range(1..=max_len.min(n));
    let mut items: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        items.swap(i, j);
    }
    items.truncate(k);
    Assortment::new(items).expect("distinct by construction")
}

fn random_opt_problem(rng: &mut ChaCha8Rng, max_n: usize, max_k: usize) -> Result<OptProblem> {
    let n = rng.random_range(1..=max_n);
    let k = rng.random_range(1..=max_k.min(n));
    let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let r: Vec<f64> = (0..n).map(|_| 1.0 - rng.random::<f64>()).collect();
    OptProblem::new(&v, &r, k)
}

/// Probabilities lie in [0, 1] and sum to 1; `R(S)` equals `Σ p_i r_i`.
pub fn probability_identities(pairs: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x01);
    let mut worst_sum: f64 = 0.0;
    let mut worst_reward: f64 = 0.0;
    let mut in_range = true;
    for _ in 0..pairs {
        let n = rng.random_range(1..=30);
        let inst = generate_instance(n, 3, &mut rng)?;
        let s = random_assortment(&mut rng, n, 10);
        let p = choice_probabilities(&inst, &s)?;
        in_range &= p.items.iter().chain([&p.none]).all(|&x| (0.0..=1.0).contains(&x));
        worst_sum = worst_sum.max((p.total() - 1.0).abs());
        let via_probs: f64 = s.items().iter().zip(&p.items).map(|(&i, pi)| pi * inst.rewards()[i]).sum();
        worst_reward = worst_reward.max((expected_reward(&inst, &s, inst.utilities())? - via_probs).abs());
    }
    let passed = in_range && worst_sum <= 1e-12 && worst_reward <= 1e-12;
    Ok(Check::new(
        "probability identities",
        passed,
        format!("{pairs} pairs, max |Σp − 1| = {worst_sum:.2e}, max |R − Σ p r| = {worst_reward:.2e}"),
    ))
}

/// Chi-square fit of sampled choices against the MNL probabilities.
pub fn choice_sampling(pairs: usize, samples: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x02);
    let mut failures = 0;
    let mut min_p = 1.0f64;
    for _ in 0..pairs {
        let n = rng.random_range(2..=20);
        let inst = generate_instance(n, 3, &mut rng)?;
        let s = random_assortment(&mut rng, n, 8);
        let p = choice_probabilities(&inst, &s)?;
        let mut counts = vec![0u64; s.len() + 1];
        for _ in 0..samples {
            match sample_choice(&inst, &s, &mut rng)? {
                ChoiceOutcome::Item(i) => counts[s.position(i).expect("offered")] += 1,
                ChoiceOutcome::NoChoice => counts[s.len()] += 1,
            }
        }
        let mut probs = p.items.clone();
        probs.push(p.none);
        let test = chi_square_gof(&counts, &probs);
        min_p = min_p.min(test.p_value);
        failures += usize::from(!test.passes(SIGNIFICANCE));
    }
    Ok(Check::new(
        "choice sampling chi-square",
        failures == 0,
        format!("{pairs} pairs × {samples} samples, {failures} rejections at α = {SIGNIFICANCE}, min p = {min_p:.4}"),
    ))
}

/// Per-epoch picks of an item with utility `v` follow
/// `P(v̂ = k) = (1/(1+v)) (v/(1+v))^k`, with mean `v`.
pub fn epoch_pick_distribution(v: f64, epochs: usize, seed: u64) -> Result<Check> {
    // The tracked item shares the assortment with two companions; the law
    // must not depend on them.
    let inst = ProblemInstance::new(3, 1, vec![v, 0.3, 0.7], vec![1.0; 3], vec![1.0])?;
    let s = Assortment::new(vec![0, 1, 2])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x03 ^ v.to_bits());
    const K_MAX: usize = 80;
    let mut counts = vec![0u64; K_MAX + 2];
    let mut total = 0u64;
    for _ in 0..epochs {
        let mut picks = 0usize;
        loop {
            match sample_choice(&inst, &s, &mut rng)? {
                ChoiceOutcome::Item(0) => picks += 1,
                ChoiceOutcome::Item(_) => {}
                ChoiceOutcome::NoChoice => break,
            }
        }
        counts[picks.min(K_MAX + 1)] += 1;
        total += picks as u64;
    }
    let q = v / (1.0 + v);
    let mut probs: Vec<f64> = (0..=K_MAX).map(|k| q.powi(k as i32) / (1.0 + v)).collect();
    probs.push(q.powi(K_MAX as i32 + 1));
    let test = chi_square_gof(&counts, &probs);
    let mean = total as f64 / epochs as f64;
    let tol = 3.0 * (v * (1.0 + v) / epochs as f64).sqrt();
    let passed = test.passes(SIGNIFICANCE) && (mean - v).abs() <= tol;
    Ok(Check::new(
        &format!("geometric picks v = {v}"),
        passed,
        format!(
            "χ² = {:.2} (dof {}), p = {:.4}; mean {mean:.5} vs {v} ± {tol:.5}",
            test.statistic, test.dof, test.p_value
        ),
    ))
}

/// Mean epoch length of a fixed assortment is `1 + Σ_{i∈S} v_i`, checked
/// through the episode loop.
pub fn epoch_length_law(assortments: usize, epochs: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x04);
    let mut worst_z: f64 = 0.0;
    let mut passed = true;
    for _ in 0..assortments {
        let inst = generate_instance(30, 4, &mut rng)?;
        let s = random_assortment(&mut rng, 30, 5);
        let total_v: f64 = s.items().iter().map(|&i| inst.utilities()[i]).sum();
        let mut agent = FixedAgent::constant("fixed", s.clone());
        // Enough steps for `epochs` closed epochs with overwhelming probability.
        let horizon = ((epochs as f64) * (1.0 + total_v) * 1.05 + 1000.0) as u64;
        let res = run_episode(&inst, &mut agent, s.len(), horizon, horizon, &mut rng)?;
        if res.epochs.len() < epochs {
            return Err(Error::Config(format!("only {} epochs within horizon {horizon}", res.epochs.len())));
        }
        let mean = res.epochs[..epochs].iter().map(|e| e.length as f64).sum::<f64>() / epochs as f64;
        let sigma = (total_v * (1.0 + total_v) / epochs as f64).sqrt();
        let z = if sigma > 0.0 { (mean - 1.0 - total_v).abs() / sigma } else { (mean - 1.0).abs() * f64::INFINITY };
        worst_z = worst_z.max(if z.is_nan() { 0.0 } else { z });
        passed &= z.is_nan() || z <= 3.0;
    }
    Ok(Check::new(
        "epoch length law",
        passed,
        format!("{assortments} assortments × {epochs} epochs, worst |mean − (1 + Σv)| = {worst_z:.2}σ"),
    ))
}

/// Parametric solver against exhaustive enumeration: equal values and the
/// same assortment under the shared tie-break.
pub fn optimizer_exactness(instances: usize, max_n: usize, max_k: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x05);
    let mut mismatches = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let p = random_opt_problem(&mut rng, max_n, max_k)?;
        let exact = optimize_exact(&p)?;
        let brute = optimize_bruteforce(&p)?;
        let gap = (exact.value - brute.value).abs();
        worst = worst.max(gap);
        if gap > 1e-9 || exact.assortment != brute.assortment {
            mismatches += 1;
        }
    }
    Ok(Check::new(
        "optimizer exactness",
        mismatches == 0,
        format!("{instances} instances (N ≤ {max_n}, K ≤ {max_k}), {mismatches} mismatches, max gap {worst:.2e}"),
    ))
}

/// LP optimum equals the combinatorial optimum and its support has at most K items.
pub fn lp_equivalence(instances: usize, max_n: usize, max_k: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x06);
    let mut failures = 0;
    for _ in 0..instances {
        let p = random_opt_problem(&mut rng, max_n, max_k)?;
        let brute = optimize_bruteforce(&p)?;
        let LpOutcome::Optimal { value, .. } = lp_build(&p).solve()? else {
            failures += 1;
            continue;
        };
        let lp = optimize_lp(&p)?;
        if (value - brute.value).abs() > 1e-9 || lp.assortment.len() > p.capacity() || lp.assortment != brute.assortment
        {
            failures += 1;
        }
    }
    Ok(Check::new("LP equivalence", failures == 0, format!("{instances} instances, {failures} failures")))
}

/// `R(S̃, v) ≤ R(S̃, v') ≤ R(S̃', v')` whenever `v' ≥ v` componentwise.
pub fn monotonicity_chain(pairs: usize, max_n: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x07);
    let mut worst_slack = f64::INFINITY;
    for _ in 0..pairs {
        let p = random_opt_problem(&mut rng, max_n, 4)?;
        let bumped: Vec<f64> = p.utilities().iter().map(|v| v + rng.random::<f64>() * rng.random::<f64>()).collect();
        let p2 = OptProblem::new(&bumped, p.rewards(), p.capacity())?;
        let s = optimize_exact(&p)?.assortment;
        let s2 = optimize_exact(&p2)?.assortment;
        let a = mnl_reward(s.items(), p.utilities(), p.rewards());
        let b = mnl_reward(s.items(), p2.utilities(), p2.rewards());
        let c = mnl_reward(s2.items(), p2.utilities(), p2.rewards());
        worst_slack = worst_slack.min((b - a).min(c - b));
    }
    Ok(Check::new(
        "reward monotonicity chain",
        worst_slack >= -1e-9,
        format!("{pairs} pairs, min slack {worst_slack:.3e}"),
    ))
}

/// Random scripted epoch histories over a random instance.
pub fn random_script(rng: &mut ChaCha8Rng, inst: &ProblemInstance, epochs: usize, max_len: usize) -> Vec<EpochRecord> {
    (1..=epochs)
        .map(|l| {
            let items = if rng.random_bool(0.1) {
                Assortment::empty()
            } else {
                random_assortment(rng, inst.n_items(), max_len)
            };
            let picks: Vec<u64> = (0..items.len()).map(|_| rng.random_range(0..6)).collect();
            let length = picks.iter().sum::<u64>() + 1;
            EpochRecord { l, items, picks, length }
        })
        .collect()
}

/// Batch ridge solution `(XᵀX + λI)⁻¹ Xᵀy` over every (epoch, item) row.
pub fn batch_ridge(inst: &ProblemInstance, records: &[EpochRecord], lambda: f64) -> Result<Vec<f64>> {
    let d = inst.dim();
    let rows: Vec<(usize, f64)> =
        records.iter().flat_map(|r| r.items.items().iter().zip(&r.picks).map(|(&i, &c)| (i, c as f64))).collect();
    let x = DMatrix::from_fn(rows.len(), d, |r, c| inst.feature(rows[r].0)[c]);
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let lhs = x.transpose() * &x + DMatrix::identity(d, d) * lambda;
    let theta = lhs
        .lu()
        .solve(&(x.transpose() * y))
        .ok_or_else(|| Error::Numerical("batch ridge system is singular".into()))?;
    Ok(theta.iter().copied().collect())
}

/// Incremental LUMB estimate against the batch oracle on scripted histories.
pub fn estimator_equivalence(scripts: usize, epochs: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x08);
    let mut worst: f64 = 0.0;
    for _ in 0..scripts {
        let d = rng.random_range(1..=8);
        let inst = generate_instance(25, d, &mut rng)?;
        let records = random_script(&mut rng, &inst, epochs, 6);
        let agent = Lumb::replay(LumbConfig::fixed(1.0, 5), inst.features(), inst.rewards(), d, &records)?;
        let oracle = batch_ridge(&inst, &records, 1.0)?;
        for (a, b) in agent.theta().iter().zip(&oracle) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(Check::new(
        "estimator vs batch ridge",
        worst <= 1e-8,
        format!("{scripts} scripts × {epochs} epochs, max |Δθ| = {worst:.2e}"),
    ))
}

/// Under a non-adaptive round-robin policy the ridge estimate approaches `θ*`.
pub fn estimator_consistency(seeds: usize, epochs: usize, seed: u64) -> Result<Check> {
    let (n, d, k) = (50, 5, 5);
    let mut passes = 0;
    let mut errors = Vec::new();
    for s in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x09 ^ ((s as u64) << 32));
        let inst = generate_instance(n, d, &mut rng)?;
        let schedule: Vec<Assortment> =
            (0..n / k).map(|b| Assortment::new((b * k..(b + 1) * k).collect())).collect::<Result<_>>()?;
        let mut agent = FixedAgent::new("round-robin", schedule)?;
        let mut est = RidgeEstimator::new(d, 1.0)?;
        let mut closed = 0;
        while closed < epochs {
            let s = crate::agent::Agent::assortment(&mut agent)?.clone();
            let outcome = sample_choice(&inst, &s, &mut rng)?;
            if let Some(rec) = crate::agent::Agent::observe(&mut agent, outcome)? {
                est.update(rec.items.items().iter().zip(&rec.picks).map(|(&i, &c)| (inst.feature(i), c as f64)))?;
                closed += 1;
            }
        }
        let err: f64 = est.theta().iter().zip(inst.theta_star()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let rel = err / crate::mnl::norm(inst.theta_star());
        passes += usize::from(rel < 0.1);
        errors.push(rel);
    }
    let need = (seeds * 8).div_ceil(10);
    Ok(Check::new(
        "estimator consistency",
        passes >= need,
        format!(
            "{passes}/{seeds} seeds with ‖θ − θ*‖/‖θ*‖ < 0.1 after {epochs} epochs (need {need}); errors {errors:.3?}"
        ),
    ))
}

/// Fraction of (epoch, offered item) pairs whose UCB covers the true
/// utility, over a full LUMB run with the theoretical `α`.
pub fn ucb_coverage(n: usize, d: usize, k: usize, horizon: u64, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0A);
    let inst = generate_instance(n, d, &mut rng)?;
    let config = LumbConfig::theoretical(horizon, d, k);
    let mut agent = Lumb::new(config.clone(), inst.features(), inst.rewards(), d)?;
    let (mut covered, mut total) = (0u64, 0u64);
    let mut open = false;
    for _ in 0..horizon {
        let s = agent.select_assortment()?.clone();
        if !open {
            for &i in s.items() {
                total += 1;
                covered += u64::from(agent.ucb()[i] >= inst.utilities()[i]);
            }
            open = true;
        }
        let outcome = sample_choice(&inst, &s, &mut rng)?;
        if agent.observe(outcome)?.is_some() {
            open = false;
        }
    }
    let frac = if total == 0 { 1.0 } else { covered as f64 / total as f64 };
    Ok(Check::new(
        "UCB coverage",
        frac >= 0.99,
        format!("α = {:.2}, {covered}/{total} offered pairs covered ({frac:.4})", config.alpha),
    ))
}
