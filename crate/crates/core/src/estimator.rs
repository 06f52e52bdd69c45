//! Ridge regression of per-epoch pick counts on item features.
//!
//! Keeps `A = λI + Σ x xᵀ` and `b = Σ v̂ x` over every (epoch, offered item)
//! pair and re-solves `θ = A⁻¹ b` through a Cholesky factorization after each
//! epoch. With `d` at most a few dozen this costs less than refreshing the
//! item UCBs that follow it.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RidgeEstimator {
    lambda: f64,
    a: DMatrix<f64>,
    b: DVector<f64>,
    theta: DVector<f64>,
    a_inv: DMatrix<f64>,
}

impl RidgeEstimator {
    pub fn new(dim: usize, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Config(format!("ridge coefficient must be positive, got {lambda}")));
        }
        if dim == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        Ok(Self {
            lambda,
            a: DMatrix::identity(dim, dim) * lambda,
            b: DVector::zeros(dim),
            theta: DVector::zeros(dim),
            a_inv: DMatrix::identity(dim, dim) / lambda,
        })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn a_inv(&self) -> &DMatrix<f64> {
        &self.a_inv
    }

    pub fn theta(&self) -> &[f64] {
        self.theta.as_slice()
    }

    /// Adds one epoch's observations, `(x_i, v̂_i)` per offered item, and
    /// refreshes `θ` and `A⁻¹`.
    pub fn update<'a>(&mut self, observations: impl IntoIterator<Item = (&'a [f64], f64)>) -> Result<()> {
        let d = self.dim();
        for (x, count) in observations {
            if x.len() != d {
                return Err(Error::Numerical(format!("feature of length {} for dimension {d}", x.len())));
            }
            let x = DVector::from_column_slice(x);
            self.a.ger(1.0, &x, &x, 1.0);
            self.b.axpy(count, &x, 1.0);
        }
        self.refactor()
    }

    fn refactor(&mut self) -> Result<()> {
        let chol: Cholesky<f64, Dyn> = Cholesky::new(self.a.clone())
            .ok_or_else(|| Error::Numerical("design matrix lost positive definiteness".into()))?;
        self.theta = chol.solve(&self.b);
        self.a_inv = chol.inverse();
        Ok(())
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.theta.iter().zip(x).map(|(t, v)| t * v).sum()
    }

    /// Confidence width `σ = √(xᵀ A⁻¹ x)`.
    pub fn width(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let mut q = 0.0;
        for i in 0..d {
            let mut row = 0.0;
            for j in 0..d {
                row += self.a_inv[(i, j)] * x[j];
            }
            q += x[i] * row;
        }
        q.max(0.0).sqrt()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.a.clone().symmetric_eigenvalues().min()
    }
}
