//! Small dense two-phase simplex (tableau form, Bland's rule).
//!
//! Every variable is implicitly nonnegative. Intended for LPs with a few
//! hundred rows and columns at most.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `maximize objective · x` subject to `constraints`, `x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn count(&self, relation: Relation) -> usize {
        self.constraints.iter().filter(|c| c.relation == relation).count()
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        Tableau::build(self)?.run(self)
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_vars: usize,
    n_cols: usize,
    artificial_start: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Result<Self> {
        let n = lp.n_vars();
        for (k, c) in lp.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::Numerical(format!(
                    "constraint {k} has {} coefficients, expected {n}",
                    c.coeffs.len()
                )));
            }
            if c.coeffs.iter().any(|a| !a.is_finite()) || !c.rhs.is_finite() {
                return Err(Error::NonFinite(format!("constraint {k}")));
            }
        }
        if lp.objective.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("objective".into()));
        }

        // Flip rows with a negative right-hand side so every rhs is ≥ 0.
        let normalized: Vec<(Vec<f64>, Relation, f64)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs < 0.0 {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coeffs.iter().map(|a| -a).collect(), flipped, -c.rhs)
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs)
                }
            })
            .collect();

        let n_slack = normalized.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
        let n_art = normalized.iter().filter(|(_, r, _)| *r != Relation::Le).count();
        let artificial_start = n + n_slack;
        let n_cols = artificial_start + n_art;

        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let (mut slack, mut art) = (n, artificial_start);
        for (coeffs, relation, rhs) in normalized {
            let mut row = vec![0.0; n_cols + 1];
            row[..n].copy_from_slice(&coeffs);
            row[n_cols] = rhs;
            match relation {
                Relation::Le => {
                    row[slack] = 1.0;
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
            }
            rows.push(row);
        }
        Ok(Self { rows, basis, n_vars: n, n_cols, artificial_start })
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpOutcome> {
        if self.artificial_start < self.n_cols {
            // Phase 1: maximize -Σ artificials.
            let mut costs = vec![0.0; self.n_cols];
            costs[self.artificial_start..].iter_mut().for_each(|c| *c = -1.0);
            let mut obj = self.objective_row(&costs);
            if !self.iterate(&mut obj, self.n_cols)? {
                return Err(Error::Numerical("phase-one problem reported unbounded".into()));
            }
            if obj[self.n_cols] < -1e-9 {
                return Ok(LpOutcome::Infeasible);
            }
            self.evict_artificials();
        }

        let mut costs = vec![0.0; self.n_cols];
        costs[..self.n_vars].copy_from_slice(&lp.objective);
        let mut obj = self.objective_row(&costs);
        if !self.iterate(&mut obj, self.artificial_start)? {
            return Ok(LpOutcome::Unbounded);
        }

        let mut x = vec![0.0; self.n_vars];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.n_vars {
                x[b] = row[self.n_cols];
            }
        }
        let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpOutcome::Optimal { x, value })
    }

    /// Reduced-cost row `c_B B⁻¹ A - c` with the objective value in the last slot.
    fn objective_row(&self, costs: &[f64]) -> Vec<f64> {
        let mut obj: Vec<f64> = costs.iter().map(|c| -c).chain(std::iter::once(0.0)).collect();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = costs[b];
            if cb != 0.0 {
                obj.iter_mut().zip(row).for_each(|(o, a)| *o += cb * a);
            }
        }
        obj
    }

    /// Runs simplex pivots over columns `< col_limit`. Returns false when unbounded.
    fn iterate(&mut self, obj: &mut [f64], col_limit: usize) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            let Some(col) = (0..col_limit).find(|&j| obj[j] < -PIVOT_EPS) else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[col];
                if a > PIVOT_EPS {
                    let ratio = row[self.n_cols] / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-14 || (ratio <= br + 1e-14 && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = best else {
                return Ok(false);
            };
            self.pivot(obj, row, col);
        }
        Err(Error::Numerical("simplex pivot limit reached".into()))
    }

    fn pivot(&mut self, obj: &mut [f64], row: usize, col: usize) {
        let p = self.rows[row][col];
        self.rows[row].iter_mut().for_each(|a| *a /= p);
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                r.iter_mut().zip(&pivot_row).for_each(|(a, p)| *a -= f * p);
            }
        }
        let f = obj[col];
        if f != 0.0 {
            obj.iter_mut().zip(&pivot_row).for_each(|(a, p)| *a -= f * p);
        }
        self.basis[row] = col;
    }

    /// Pivots zero-valued artificials out of the basis; drops redundant rows.
    fn evict_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < self.artificial_start {
                i += 1;
                continue;
            }
            match (0..self.artificial_start).find(|&j| self.rows[i][j].abs() > PIVOT_EPS) {
                Some(col) => {
                    let mut dummy = vec![0.0; self.n_cols + 1];
                    self.pivot(&mut dummy, i, col);
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }
}
