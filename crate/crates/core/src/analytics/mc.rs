use rayon::prelude::*;

use crate::distributions::FamilyParams;
use crate::error::{domain, Result};

pub const MIN_SAMPLES: usize = 100;

/// Monte Carlo mean of a scalar statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Draws whose statistic was not finite; excluded from the estimate.
    pub non_finite: usize,
}

impl McEstimate {
    pub fn flagged(&self) -> bool {
        self.non_finite > 0
    }

    /// |estimate − target| in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.estimate - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

pub fn mc_estimate(
    family: &FamilyParams,
    statistic: impl Fn(&[f64]) -> f64 + Sync,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let m = mc_moments(family, |x| vec![statistic(x)], n_samples, seed)?;
    Ok(McEstimate {
        estimate: m.mean[0],
        std_error: m.mean_se[0],
        n_samples,
        seed,
        non_finite: m.non_finite,
    })
}

/// Monte Carlo means and covariances of a vector statistic, with standard
/// errors for both. The covariance SE is sd((A − Ā)(B − B̄))/√N.
#[derive(Debug, Clone, PartialEq)]
pub struct McMoments {
    pub mean: Vec<f64>,
    pub mean_se: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub cov_se: Vec<Vec<f64>>,
    pub n_used: usize,
    pub non_finite: usize,
}

pub fn mc_moments(
    family: &FamilyParams,
    statistic: impl Fn(&[f64]) -> Vec<f64> + Sync,
    n_samples: usize,
    seed: u64,
) -> Result<McMoments> {
    if n_samples < MIN_SAMPLES {
        return domain(format!("n_samples must be at least {MIN_SAMPLES}"));
    }
    let xs = family.sample(seed, n_samples)?;
    let vals: Vec<Vec<f64>> = xs.par_iter().map(|x| statistic(x)).collect();
    Ok(summarize(&vals))
}

/// Moments of precomputed statistic rows; rows with a non-finite entry are
/// dropped and counted.
pub fn summarize(rows: &[Vec<f64>]) -> McMoments {
    let d = rows.first().map_or(0, |r| r.len());
    let good: Vec<&Vec<f64>> = rows.iter().filter(|r| r.iter().all(|v| v.is_finite())).collect();
    let non_finite = rows.len() - good.len();
    let n = good.len() as f64;
    let mut mean = vec![0.0; d];
    for r in &good {
        for j in 0..d {
            mean[j] += r[j];
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut s2 = vec![vec![0.0; d]; d];
    for r in &good {
        for a in 0..d {
            for b in a..d {
                s2[a][b] += (r[a] - mean[a]) * (r[b] - mean[b]);
            }
        }
    }
    let mut cov = vec![vec![0.0; d]; d];
    for a in 0..d {
        for b in a..d {
            cov[a][b] = s2[a][b] / (n - 1.0);
            cov[b][a] = cov[a][b];
        }
    }
    let mut s4 = vec![vec![0.0; d]; d];
    for r in &good {
        for a in 0..d {
            for b in a..d {
                let p = (r[a] - mean[a]) * (r[b] - mean[b]) - cov[a][b];
                s4[a][b] += p * p;
            }
        }
    }
    let mut cov_se = vec![vec![0.0; d]; d];
    for a in 0..d {
        for b in a..d {
            cov_se[a][b] = (s4[a][b] / (n - 1.0) / n).sqrt();
            cov_se[b][a] = cov_se[a][b];
        }
    }
    let mean_se = (0..d).map(|a| (cov[a][a] / n).sqrt()).collect();
    McMoments { mean, mean_se, cov, cov_se, n_used: good.len(), non_finite }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_mean() {
        let f = FamilyParams::dirichlet(vec![1.0, 1.0]).unwrap();
        let e = mc_estimate(&f, |x| x[0], 100_000, 11).unwrap();
        assert!(e.z_score(0.5) < 4.0);
        assert!((e.std_error - (1.0f64 / 12.0 / 1e5).sqrt()).abs() < 1e-5);
        assert_eq!(e, mc_estimate(&f, |x| x[0], 100_000, 11).unwrap());
        assert!(mc_estimate(&f, |x| x[0], 50, 11).is_err());
    }

    #[test]
    fn non_finite_values_are_flagged() {
        let f = FamilyParams::dirichlet(vec![1.0, 1.0]).unwrap();
        let e = mc_estimate(&f, |x| if x[0] < 0.1 { f64::NAN } else { x[0] }, 10_000, 1).unwrap();
        assert!(e.flagged());
        assert!(e.non_finite > 800 && e.non_finite < 1200);
        assert!(e.z_score(0.55) < 4.0);
    }

    #[test]
    fn summarize_known_rows() {
        let m = summarize(&[vec![1.0, 2.0], vec![3.0, 6.0], vec![2.0, 4.0]]);
        assert_eq!(m.mean, vec![2.0, 4.0]);
        assert_eq!(m.cov[0][1], 2.0);
    }
}
