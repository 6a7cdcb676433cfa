//! Goodness-of-fit statistics against the uniform distribution on a box.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `samples` and the uniform law on `[lo, hi]`.
pub fn ks_uniform(samples: &[f64], lo: f64, hi: f64) -> f64 {
    let mut u: Vec<f64> = samples.iter().map(|&x| ((x - lo) / (hi - lo)).clamp(0.0, 1.0)).collect();
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    u.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        d.max((i as f64 + 1.0) / n - x).max(x - i as f64 / n)
    })
}

/// Asymptotic p-value of the KS statistic (Kolmogorov series with the
/// Stephens small-sample correction).
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64 * lambda).powi(2)).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub counts: Vec<u64>,
}

/// Pearson chi-square over an equal-volume grid with `per_axis` cells per
/// coordinate.
pub fn chi_square_uniform(samples: &[Vec<f64>], lo: &[f64], hi: &[f64], per_axis: usize) -> ChiSquare {
    let dim = lo.len();
    let cells = per_axis.pow(dim as u32);
    let mut counts = vec![0u64; cells];
    for s in samples {
        let mut idx = 0;
        for k in 0..dim {
            let u = ((s[k] - lo[k]) / (hi[k] - lo[k]) * per_axis as f64).floor() as isize;
            idx = idx * per_axis + u.clamp(0, per_axis as isize - 1) as usize;
        }
        counts[idx] += 1;
    }
    let expected = samples.len() as f64 / cells as f64;
    let statistic = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum::<f64>();
    let dof = cells - 1;
    let p_value = ChiSquared::new(dof as f64).map(|d| 1.0 - d.cdf(statistic)).unwrap_or(f64::NAN);
    ChiSquare { statistic, dof, p_value, counts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ks_null_and_point_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s: Vec<f64> = (0..10_000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let d = ks_uniform(&s, -1.0, 1.0);
        assert!(d < 0.02, "{d}");
        assert!(ks_p_value(d, s.len()) > 0.01);
        let z = vec![0.0; 500];
        assert!((ks_uniform(&z, -1.0, 1.0) - 0.5).abs() < 1e-12);
        assert!(ks_p_value(0.5, 500) < 1e-10);
    }

    #[test]
    fn ks_exact_small_case() {
        // samples at 1/4 and 3/4 of [0,1]: D = max(1/2-1/4, 1/4) = 1/4
        assert!((ks_uniform(&[0.25, 0.75], 0.0, 1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn kolmogorov_series_known_value() {
        // P(K > 1.36) ≈ 0.049 for the limiting distribution
        let n = 1_000_000;
        let d = 1.358 / ((n as f64).sqrt() + 0.12 + 0.11 / (n as f64).sqrt());
        assert!((ks_p_value(d, n) - 0.05).abs() < 1e-3);
    }

    #[test]
    fn chi_square_null_and_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s: Vec<Vec<f64>> = (0..20_000).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
        let r = chi_square_uniform(&s, &[-1.0, -1.0], &[1.0, 1.0], 4);
        assert_eq!(r.dof, 15);
        assert!(r.p_value > 0.001, "{r:?}");
        let z = vec![vec![0.1, 0.1]; 1000];
        let r = chi_square_uniform(&z, &[-1.0, -1.0], &[1.0, 1.0], 4);
        assert!(r.p_value < 1e-12);
        assert_eq!(r.counts.iter().sum::<u64>(), 1000);
    }
}
