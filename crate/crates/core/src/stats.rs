//! Goodness-of-fit helpers for the statistical checks.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Bins with expected count below this are pooled with their neighbours.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquareTest {
    pub fn passes(&self, significance: f64) -> bool {
        self.p_value >= significance
    }
}

/// Pearson chi-square test of `observed` counts against category
/// probabilities `probs` (which should sum to 1). Adjacent categories are
/// pooled until each pooled bin expects at least [`MIN_EXPECTED`] counts.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> ChiSquareTest {
    assert_eq!(observed.len(), probs.len(), "observed and probability vectors differ in length");
    let total: u64 = observed.iter().sum();
    let n = total as f64;

    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        obs += o as f64;
        exp += p * n;
        if exp >= MIN_EXPECTED {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 || obs > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => bins.push((obs, exp)),
        }
    }

    let statistic: f64 = bins
        .iter()
        .map(|&(o, e)| {
            if e > 0.0 {
                (o - e).powi(2) / e
            } else if o > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .sum();
    let dof = bins.len().saturating_sub(1);
    let p_value = if dof == 0 {
        if statistic.is_finite() {
            1.0
        } else {
            0.0
        }
    } else {
        ChiSquared::new(dof as f64).expect("positive dof").sf(statistic)
    };
    ChiSquareTest { statistic, dof, p_value }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov–Smirnov test against Uniform[0, 1], using the
/// asymptotic Kolmogorov distribution with Stephens' small-sample correction.
pub fn ks_uniform(samples: &[f64]) -> KsTest {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let statistic = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = x.clamp(0.0, 1.0);
            (cdf - i as f64 / n).max((i + 1) as f64 / n - cdf)
        })
        .fold(0.0, f64::max);
    let sqrt_n = n.sqrt();
    let p_value = kolmogorov_sf((sqrt_n + 0.12 + 0.11 / sqrt_n) * statistic);
    KsTest { statistic, p_value }
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Mean and sample standard deviation (0 for fewer than two values).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn chi_square_critical_values() {
        // Table values: χ²_{0.999}(1) = 10.828, χ²_{0.999}(4) = 18.467.
        let one = ChiSquared::new(1.0).unwrap();
        assert!((one.sf(10.828) - 0.001).abs() < 1e-5);
        let four = ChiSquared::new(4.0).unwrap();
        assert!((four.sf(18.467) - 0.001).abs() < 1e-5);
    }

    #[test]
    fn exact_match_has_zero_statistic() {
        let t = chi_square_gof(&[250, 250, 500], &[0.25, 0.25, 0.5]);
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.dof, 2);
        assert!((t.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn biased_counts_fail() {
        let t = chi_square_gof(&[700, 300], &[0.5, 0.5]);
        assert!(!t.passes(0.001));
        assert!((t.statistic - 160.0).abs() < 1e-9);
    }

    #[test]
    fn sparse_bins_are_pooled() {
        // Last three bins expect 3, 0.8, 0.2 and pool into the preceding bin.
        let t = chi_square_gof(&[50, 46, 3, 1, 0], &[0.5, 0.46, 0.03, 0.008, 0.002]);
        assert_eq!(t.dof, 1);
    }

    #[test]
    fn ks_accepts_uniform_and_rejects_skew() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let uniform: Vec<f64> = (0..5000).map(|_| rng.random()).collect();
        assert!(ks_uniform(&uniform).p_value > 0.001);
        let skewed: Vec<f64> = uniform.iter().map(|u| u * u).collect();
        assert!(ks_uniform(&skewed).p_value < 1e-6);
    }

    #[test]
    fn kolmogorov_tail_reference_points() {
        // P(K > 1.3581) ≈ 0.05, P(K > 1.9495) ≈ 0.001.
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_sf(1.9495) - 0.001).abs() < 1e-4);
    }

    #[test]
    fn summary_statistics() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
