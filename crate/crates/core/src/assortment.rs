//! Capacitated MNL assortment optimization: `argmax_{|S| ≤ K} R(S, v)`.
//!
//! [`optimize_exact`] runs a parametric search on the revenue level `λ`:
//! `R(S) ≥ λ` iff `Σ_{i∈S} v_i (r_i − λ) ≥ λ`, and for fixed `λ` the left side
//! is maximized by the top-K positive terms. Iterating `λ ← R(S_λ)`
//! (Dinkelbach) reaches the optimum in a handful of steps. [`optimize_lp`]
//! solves the equivalent linear program over choice weights, and
//! [`optimize_bruteforce`] enumerates every feasible subset. All three share
//! the same tie-break: among optimal sets, the lexicographically smallest
//! sorted index list wins (a proper prefix sorts first, so `{}` < `{0}` < `{0,1}`).

use crate::error::{Error, Result};
use crate::mnl::{mnl_reward, Assortment};
use crate::simplex::{Constraint, LinearProgram, LpOutcome, Relation};

/// Utilities below this are raised to it before any `w_i / v_i` term is formed.
pub const MIN_UTILITY: f64 = 1e-12;
/// LP weights above this define membership in the extracted assortment.
pub const SUPPORT_THRESHOLD: f64 = 1e-9;
/// Largest item count [`optimize_bruteforce`] will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 20;
/// Values (and parametric weights) closer than this are treated as ties.
pub const TIE_TOL: f64 = 1e-12;

const MAX_PARAMETRIC_STEPS: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct OptProblem {
    utilities: Vec<f64>,
    rewards: Vec<f64>,
    capacity: usize,
}

impl OptProblem {
    /// Validates lengths, finiteness and `1 ≤ K ≤ N`; clamps utilities at
    /// [`MIN_UTILITY`] (negative UCBs included).
    pub fn new(utilities: &[f64], rewards: &[f64], capacity: usize) -> Result<Self> {
        if utilities.len() != rewards.len() {
            return Err(Error::InvalidInstance(format!("{} utilities but {} rewards", utilities.len(), rewards.len())));
        }
        if let Some(i) = utilities.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("utility {i} = {}", utilities[i])));
        }
        if let Some(i) = rewards.iter().position(|r| !r.is_finite()) {
            return Err(Error::NonFinite(format!("reward {i} = {}", rewards[i])));
        }
        let n = utilities.len();
        if capacity == 0 || capacity > n {
            return Err(Error::Config(format!("capacity {capacity} must lie in 1..={n}")));
        }
        Ok(Self {
            utilities: utilities.iter().map(|v| v.max(MIN_UTILITY)).collect(),
            rewards: rewards.to_vec(),
            capacity,
        })
    }

    pub fn n_items(&self) -> usize {
        self.utilities.len()
    }

    /// Utilities after clamping.
    pub fn utilities(&self) -> &[f64] {
        &self.utilities
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn reward_of(&self, items: &[usize]) -> f64 {
        mnl_reward(items, &self.utilities, &self.rewards)
    }

    fn solution(&self, assortment: Assortment) -> OptSolution {
        let value = self.reward_of(assortment.items());
        let den = 1.0 + assortment.items().iter().map(|&i| self.utilities[i]).sum::<f64>();
        let mut w = vec![0.0; self.n_items() + 1];
        w[0] = 1.0 / den;
        for &i in assortment.items() {
            w[i + 1] = self.utilities[i] / den;
        }
        OptSolution { assortment, value, lp_weights: Some(w) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptSolution {
    pub assortment: Assortment,
    pub value: f64,
    /// Choice weights `(w_0, w_1, …, w_N)`: `w_0` is the no-choice share.
    pub lp_weights: Option<Vec<f64>>,
}

/// Exact optimum by parametric search.
pub fn optimize_exact(p: &OptProblem) -> Result<OptSolution> {
    if p.rewards.iter().all(|&r| r <= 0.0) {
        return Ok(p.solution(Assortment::empty()));
    }
    let mut lambda = 0.0;
    let mut weights = vec![0.0; p.n_items()];
    for _ in 0..MAX_PARAMETRIC_STEPS {
        fill_weights(p, lambda, &mut weights);
        let candidate = top_positive(&weights, p.capacity);
        let value = p.reward_of(&candidate);
        if value <= lambda + f64::EPSILON * lambda.abs() {
            break;
        }
        lambda = value;
    }
    fill_weights(p, lambda, &mut weights);
    let items = lexicographic_optimum(&weights, p.capacity);
    Ok(p.solution(Assortment::new(items)?))
}

/// Exhaustive search over all subsets of size ≤ K (N ≤ [`BRUTE_FORCE_LIMIT`]).
pub fn optimize_bruteforce(p: &OptProblem) -> Result<OptSolution> {
    let n = p.n_items();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { n, limit: BRUTE_FORCE_LIMIT });
    }
    let mut best: Vec<usize> = Vec::new();
    let mut best_value = 0.0;
    let mut consider = |set: &[usize]| {
        let value = p.reward_of(set);
        if value > best_value + TIE_TOL || (value >= best_value - TIE_TOL && set < best.as_slice()) {
            best_value = value;
            best = set.to_vec();
        }
    };
    for size in 1..=p.capacity {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            consider(&combo);
            // Advance to the next combination in lexicographic order.
            let Some(pos) = (0..size).rev().find(|&k| combo[k] < n - size + k) else {
                break;
            };
            combo[pos] += 1;
            for k in pos + 1..size {
                combo[k] = combo[k - 1] + 1;
            }
        }
    }
    Ok(p.solution(Assortment::new(best)?))
}

/// The linear program over choice weights `(w_0, …, w_N)`:
///
/// ```text
/// max Σ r_i w_i
/// s.t. w_0 + Σ w_i = 1
///      Σ w_i / v_i ≤ K w_0
///      w_i / v_i ≤ w_0          for every item
///      w ≥ 0
/// ```
pub fn lp_build(p: &OptProblem) -> LinearProgram {
    let n = p.n_items();
    let mut objective = vec![0.0; n + 1];
    objective[1..].copy_from_slice(&p.rewards);

    let mut constraints = Vec::with_capacity(n + 2);
    constraints.push(Constraint { coeffs: vec![1.0; n + 1], relation: Relation::Eq, rhs: 1.0 });

    let mut capacity_row = vec![-(p.capacity as f64)];
    capacity_row.extend(p.utilities.iter().map(|v| 1.0 / v));
    constraints.push(Constraint { coeffs: capacity_row, relation: Relation::Le, rhs: 0.0 });

    for (i, v) in p.utilities.iter().enumerate() {
        let mut row = vec![0.0; n + 1];
        row[0] = -1.0;
        row[i + 1] = 1.0 / v;
        constraints.push(Constraint { coeffs: row, relation: Relation::Le, rhs: 0.0 });
    }
    LinearProgram { objective, constraints }
}

/// Solves [`lp_build`] with the dense simplex and reads the assortment off
/// the support `{i | w_i > SUPPORT_THRESHOLD}`.
pub fn optimize_lp(p: &OptProblem) -> Result<OptSolution> {
    match lp_build(p).solve()? {
        LpOutcome::Optimal { x, .. } => {
            let support: Vec<usize> = (0..p.n_items()).filter(|&i| x[i + 1] > SUPPORT_THRESHOLD).collect();
            let assortment = Assortment::new(support)?;
            let value = p.reward_of(assortment.items());
            Ok(OptSolution { assortment, value, lp_weights: Some(x) })
        }
        other => Err(Error::Numerical(format!("assortment LP not solved: {other:?}"))),
    }
}

fn fill_weights(p: &OptProblem, lambda: f64, out: &mut [f64]) {
    for ((w, v), r) in out.iter_mut().zip(&p.utilities).zip(&p.rewards) {
        *w = v * (r - lambda);
    }
}

/// Up to `k` items with the largest strictly positive weights.
fn top_positive(weights: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    if idx.len() > k {
        idx.select_nth_unstable_by(k - 1, |&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
        idx.truncate(k);
    }
    idx.sort_unstable();
    idx
}

/// Lexicographically smallest set maximizing `Σ_{i∈S} w_i` with `|S| ≤ k`.
///
/// Items split into three groups: mandatory (weight strictly above the
/// cut), boundary (tied with the K-th largest positive weight, of which
/// exactly `need` must be taken) and zero-weight (optional filler).
fn lexicographic_optimum(weights: &[f64], k: usize) -> Vec<usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Group {
        Mandatory,
        Boundary,
        Optional,
        Excluded,
    }

    let mut positive: Vec<f64> = weights.iter().copied().filter(|&w| w > TIE_TOL).collect();
    let groups: Vec<Group> = if positive.len() <= k {
        weights
            .iter()
            .map(|&w| {
                if w > TIE_TOL {
                    Group::Mandatory
                } else if w >= -TIE_TOL {
                    Group::Optional
                } else {
                    Group::Excluded
                }
            })
            .collect()
    } else {
        positive.sort_unstable_by(|a, b| b.total_cmp(a));
        let cut = positive[k - 1];
        weights
            .iter()
            .map(|&w| {
                if w > cut + TIE_TOL {
                    Group::Mandatory
                } else if w >= cut - TIE_TOL {
                    Group::Boundary
                } else {
                    Group::Excluded
                }
            })
            .collect()
    };

    let mandatory: Vec<usize> = (0..weights.len()).filter(|&i| groups[i] == Group::Mandatory).collect();
    let boundary: Vec<usize> = (0..weights.len()).filter(|&i| groups[i] == Group::Boundary).collect();
    let mut need = if boundary.is_empty() { 0 } else { k.min(mandatory.len() + boundary.len()) - mandatory.len() };
    let mut mandatory_left = mandatory.len();

    let mut chosen = Vec::new();
    let mut next = 0;
    while mandatory_left > 0 || need > 0 {
        let first_mandatory = mandatory.iter().copied().find(|&i| i >= next);
        let pick = (next..weights.len()).find(|&j| {
            let g = groups[j];
            if g == Group::Excluded {
                return false;
            }
            if first_mandatory.is_some_and(|m| m < j) {
                return false;
            }
            let is_b = usize::from(g == Group::Boundary);
            let is_m = usize::from(g == Group::Mandatory);
            let boundary_after = boundary.iter().filter(|&&b| b > j).count();
            let need_after = need.saturating_sub(is_b);
            boundary_after >= need_after && chosen.len() + 1 + (mandatory_left - is_m) + need_after <= k
        });
        let Some(j) = pick else { break };
        match groups[j] {
            Group::Mandatory => mandatory_left -= 1,
            Group::Boundary => need = need.saturating_sub(1),
            _ => {}
        }
        chosen.push(j);
        next = j + 1;
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_problem(rng: &mut ChaCha8Rng, max_n: usize, max_k: usize) -> OptProblem {
        let n = rng.random_range(1..=max_n);
        let k = rng.random_range(1..=max_k.min(n));
        let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let r: Vec<f64> = (0..n).map(|_| 1.0 - rng.random::<f64>()).collect();
        OptProblem::new(&v, &r, k).unwrap()
    }

    #[test]
    fn single_item() {
        let p = OptProblem::new(&[0.7], &[0.4], 1).unwrap();
        let s = optimize_exact(&p).unwrap();
        assert_eq!(s.assortment.items(), &[0]);
        assert!((s.value - 0.7 * 0.4 / 1.7).abs() < 1e-15);
    }

    #[test]
    fn equal_rewards_take_everything() {
        let v = [0.2, 0.9, 0.4, 0.1];
        let p = OptProblem::new(&v, &[0.6; 4], 4).unwrap();
        let s = optimize_exact(&p).unwrap();
        assert_eq!(s.assortment.items(), &[0, 1, 2, 3]);
        let total: f64 = v.iter().sum();
        assert!((s.value - 0.6 * total / (1.0 + total)).abs() < 1e-12);
    }

    #[test]
    fn zero_reward_item_yields_empty_set() {
        let p = OptProblem::new(&[1.0], &[0.0], 1).unwrap();
        for s in [optimize_exact(&p).unwrap(), optimize_bruteforce(&p).unwrap()] {
            assert!(s.assortment.is_empty());
            assert_eq!(s.value, 0.0);
        }
    }

    #[test]
    fn three_item_hand_enumeration() {
        let v = [1.0, 1.0, 1.0];
        let r = [0.9, 0.5, 0.1];
        // Independent enumeration of all 7 candidate sets with |S| ≤ 2.
        let candidates: [&[usize]; 7] = [&[], &[0], &[1], &[2], &[0, 1], &[0, 2], &[1, 2]];
        let reward = |s: &[usize]| {
            let num: f64 = s.iter().map(|&i| v[i] * r[i]).sum();
            num / (1.0 + s.iter().map(|&i| v[i]).sum::<f64>())
        };
        let best = candidates.iter().copied().max_by(|a, b| reward(a).total_cmp(&reward(b))).unwrap();
        assert_eq!(best, &[0, 1]);
        let p = OptProblem::new(&v, &r, 2).unwrap();
        let brute = optimize_bruteforce(&p).unwrap();
        assert_eq!(brute.assortment.items(), best);
        assert!((brute.value - 1.4 / 3.0).abs() < 1e-15);
        assert_eq!(optimize_exact(&p).unwrap().assortment, brute.assortment);
    }

    #[test]
    fn brute_force_refuses_large_inputs() {
        let p = OptProblem::new(&[0.5; 21], &[0.5; 21], 2).unwrap();
        assert!(matches!(optimize_bruteforce(&p), Err(Error::TooLarge { n: 21, .. })));
    }

    #[test]
    fn non_finite_inputs_are_errors() {
        assert!(matches!(OptProblem::new(&[f64::NAN], &[0.5], 1), Err(Error::NonFinite(_))));
        assert!(matches!(OptProblem::new(&[0.5], &[f64::INFINITY], 1), Err(Error::NonFinite(_))));
        assert!(OptProblem::new(&[0.5], &[0.5], 2).is_err());
    }

    #[test]
    fn ties_prefer_lexicographically_smaller_sets() {
        // Identical items, K = 1: {0}, {1}, {2} tie.
        let p = OptProblem::new(&[0.5; 3], &[0.5; 3], 1).unwrap();
        assert_eq!(optimize_exact(&p).unwrap().assortment.items(), &[0]);
        assert_eq!(optimize_bruteforce(&p).unwrap().assortment.items(), &[0]);

        // r_0 equals the optimum value 0.5, so adding item 0 to {1} is a tie:
        // {0, 1} sorts before {1}.
        let p = OptProblem::new(&[1.0, 1.0], &[0.5, 1.0], 2).unwrap();
        let exact = optimize_exact(&p).unwrap();
        let brute = optimize_bruteforce(&p).unwrap();
        assert_eq!(brute.assortment.items(), &[0, 1]);
        assert_eq!(exact.assortment, brute.assortment);

        // Mirror image: the tied item has the larger index, so {0} wins.
        let p = OptProblem::new(&[1.0, 1.0], &[1.0, 0.5], 2).unwrap();
        assert_eq!(optimize_exact(&p).unwrap().assortment.items(), &[0]);
        assert_eq!(optimize_bruteforce(&p).unwrap().assortment.items(), &[0]);
    }

    #[test]
    fn exact_matches_brute_force_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let p = random_problem(&mut rng, 12, 4);
            let exact = optimize_exact(&p).unwrap();
            let brute = optimize_bruteforce(&p).unwrap();
            assert!((exact.value - brute.value).abs() <= 1e-9, "{p:?}");
            assert_eq!(exact.assortment, brute.assortment, "{p:?}");
        }
    }

    #[test]
    fn lp_shape_for_two_items() {
        let p = OptProblem::new(&[0.5, 0.25], &[1.0, 0.4], 1).unwrap();
        let lp = lp_build(&p);
        assert_eq!(lp.n_vars(), 3);
        assert_eq!(lp.count(Relation::Eq), 1);
        assert_eq!(lp.count(Relation::Le), 3);
        assert_eq!(lp.constraints[1].coeffs, vec![-1.0, 2.0, 4.0]);
        assert_eq!(lp.constraints[2].coeffs, vec![-1.0, 2.0, 0.0]);
        assert_eq!(lp.constraints[3].coeffs, vec![-1.0, 0.0, 4.0]);
    }

    #[test]
    fn lp_optimum_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let p = random_problem(&mut rng, 8, 4);
            let brute = optimize_bruteforce(&p).unwrap();
            let lp = optimize_lp(&p).unwrap();
            let LpOutcome::Optimal { value, .. } = lp_build(&p).solve().unwrap() else { panic!() };
            assert!((value - brute.value).abs() < 1e-9);
            assert_eq!(lp.assortment, brute.assortment);
            assert!(lp.assortment.len() <= p.capacity());
        }
    }

    #[test]
    fn lp_scales_with_rewards() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = random_problem(&mut rng, 8, 3);
        let scaled =
            OptProblem::new(p.utilities(), &p.rewards().iter().map(|r| 2.5 * r).collect::<Vec<_>>(), p.capacity())
                .unwrap();
        let a = optimize_lp(&p).unwrap();
        let b = optimize_lp(&scaled).unwrap();
        assert!((b.value - 2.5 * a.value).abs() < 1e-9);
        assert_eq!(a.assortment, b.assortment);
    }

    #[test]
    fn exact_weights_satisfy_lp_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p = random_problem(&mut rng, 12, 5);
            let s = optimize_exact(&p).unwrap();
            let w = s.lp_weights.as_ref().unwrap();
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let ratios: Vec<f64> = (0..p.n_items()).map(|i| w[i + 1] / p.utilities()[i]).collect();
            assert!(ratios.iter().sum::<f64>() <= p.capacity() as f64 * w[0] + 1e-9);
            assert!(ratios.iter().all(|&q| q >= 0.0 && q <= w[0] + 1e-9));
            let objective: f64 = (0..p.n_items()).map(|i| p.rewards()[i] * w[i + 1]).sum();
            assert!((objective - s.value).abs() < 1e-12);
        }
    }
}
