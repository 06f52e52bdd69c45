use log::debug;
use rand::Rng;

use crate::error::{Error, Result};
use crate::mnl::{dot, norm, ProblemInstance};

/// Summary of how an instance was built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationReport {
    /// Items whose feature direction had to be tilted toward `θ*` to keep
    /// `‖x_i‖ ≤ 1` while hitting the target utility.
    pub tilted: usize,
    pub n_items: usize,
}

impl GenerationReport {
    pub fn tilt_rate(&self) -> f64 {
        self.tilted as f64 / self.n_items as f64
    }
}

/// Synthetic instance with `r_i ~ U(0, 1]`, unit-norm `θ* ~ U[0,1]^d`, and
/// features built from `U[0,1]^d` draws so that `v_i = θ*ᵀx_i` equals an
/// independent `U[0,1]` draw and `‖x_i‖ ≤ 1`.
pub fn generate_instance<R: Rng + ?Sized>(n_items: usize, dim: usize, rng: &mut R) -> Result<ProblemInstance> {
    generate_instance_with_report(n_items, dim, rng).map(|(inst, _)| inst)
}

pub fn generate_instance_with_report<R: Rng + ?Sized>(
    n_items: usize,
    dim: usize,
    rng: &mut R,
) -> Result<(ProblemInstance, GenerationReport)> {
    if n_items == 0 || dim == 0 {
        return Err(Error::Config(format!("need N ≥ 1 and d ≥ 1, got N = {n_items}, d = {dim}")));
    }
    let rewards: Vec<f64> = (0..n_items).map(|_| 1.0 - rng.random::<f64>()).collect();

    let theta = loop {
        let raw: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let n = norm(&raw);
        if n > 0.0 {
            break raw.into_iter().map(|t| t / n).collect::<Vec<_>>();
        }
    };

    let mut features = Vec::with_capacity(n_items * dim);
    let mut tilted = 0;
    for _ in 0..n_items {
        let direction = loop {
            let raw: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            let n = norm(&raw);
            if n > 0.0 && dot(&theta, &raw) > 0.0 {
                break raw.into_iter().map(|x| x / n).collect::<Vec<_>>();
            }
        };
        let target: f64 = rng.random();
        let (direction, was_tilted) = tilt_toward(&direction, &theta, target);
        tilted += usize::from(was_tilted);
        // With a unit direction, ‖x‖ = target / cos ≤ 1 once cos ≥ target.
        let scale = target / dot(&theta, &direction);
        features.extend(direction.iter().map(|x| x * scale));
    }
    debug!("generated instance: {tilted} of {n_items} feature directions tilted");
    let inst = ProblemInstance::new(n_items, dim, features, rewards, theta)?;
    Ok((inst, GenerationReport { tilted, n_items }))
}

/// Smallest blend `normalize((1 − γ) u + γ θ)` whose cosine with `θ` reaches
/// `target`. Both inputs are unit vectors with positive inner product.
fn tilt_toward(u: &[f64], theta: &[f64], target: f64) -> (Vec<f64>, bool) {
    if dot(u, theta) >= target {
        return (u.to_vec(), false);
    }
    let blend = |gamma: f64| {
        let v: Vec<f64> = u.iter().zip(theta).map(|(a, b)| (1.0 - gamma) * a + gamma * b).collect();
        let n = norm(&v);
        v.into_iter().map(|x| x / n).collect::<Vec<_>>()
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if dot(&blend(mid), theta) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (blend(hi), true)
}
