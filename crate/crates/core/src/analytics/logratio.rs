use crate::distributions::{FamilyParams, Kind};
use crate::error::{domain, Result};
use crate::normalization::{log_i_gradient, log_i_hessian, NormalizationQuery};

/// Log-ratio statistics for one index quadruple (i, j, k, l).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRatioEntry {
    pub pair: (usize, usize, usize, usize),
    /// E ln(Xᵢ/Xⱼ)
    pub mean_ij: f64,
    /// E ln(X_k/X_l)
    pub mean_kl: f64,
    /// Cov[ln(Xᵢ/Xⱼ), ln(X_k/X_l)]
    pub cov: f64,
}

/// (I query, β, τ) such that Y = dual(X; β, τ) has log-partition ln I(α).
fn log_partition(family: &FamilyParams) -> Result<(NormalizationQuery, Vec<f64>, f64)> {
    let ones = |k: usize| vec![1.0; k];
    match family.kind() {
        Kind::Dirichlet { alpha } => {
            Ok((NormalizationQuery::new(alpha.clone(), ones(alpha.len()), 0, 1.0)?, ones(alpha.len()), 1.0))
        }
        Kind::Schlomilch { alpha, beta, tau } => {
            Ok((NormalizationQuery::new(alpha.clone(), ones(alpha.len()), 0, 1.0)?, beta.clone(), *tau))
        }
        Kind::DirichletMixture { alpha, gamma, n, sigma } => {
            Ok((NormalizationQuery::new(alpha.clone(), gamma.clone(), *n, *sigma)?, ones(alpha.len()), 1.0))
        }
        Kind::SchlomilchMixture { alpha, beta, gamma, n, sigma, tau } => {
            Ok((NormalizationQuery::new(alpha.clone(), gamma.clone(), *n, *sigma)?, beta.clone(), *tau))
        }
        _ => domain(format!("log-ratio statistics need a Dirichlet or Schlömilch type family, got {}", family.name())),
    }
}

/// Means and covariances of log-ratios from the gradient and Hessian of ln I.
pub fn logratio_stats(family: &FamilyParams, pairs: &[(usize, usize, usize, usize)]) -> Result<Vec<LogRatioEntry>> {
    let (q, beta, tau) = log_partition(family)?;
    let k = q.k();
    if pairs.iter().any(|&(i, j, a, b)| i.max(j).max(a).max(b) >= k) {
        return domain(format!("log-ratio index out of range for K = {k}"));
    }
    let g = log_i_gradient(&q)?;
    let h = log_i_hessian(&q)?;
    let mean = |i: usize, j: usize| (g[i] - g[j] - (beta[i] / beta[j]).ln()) / tau;
    Ok(pairs
        .iter()
        .map(|&(i, j, a, b)| {
            let cov = (h[i][a] - h[i][b] - h[j][a] + h[j][b]) / (tau * tau);
            LogRatioEntry { pair: (i, j, a, b), mean_ij: mean(i, j), mean_kl: mean(a, b), cov }
        })
        .collect())
}

/// Sufficient statistic Tᵢ = ln(βᵢ xᵢ^τ / Σ βⱼ xⱼ^τ) of the exponential
/// family in α.
pub fn expfamily_statistic(family: &FamilyParams, x: &[f64]) -> Result<Vec<f64>> {
    let (_, beta, tau) = log_partition(family)?;
    let logs: Vec<f64> = beta.iter().zip(x).map(|(b, xi)| b.ln() + tau * xi.ln()).collect();
    let norm = crate::specialfn::log_sum_exp(&logs);
    Ok(logs.iter().map(|l| l - norm).collect())
}

/// (E T, Cov T) = (∇ ln I, ∇² ln I).
pub fn expfamily_moments(family: &FamilyParams) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let (q, _, _) = log_partition(family)?;
    Ok((log_i_gradient(&q)?, log_i_hessian(&q)?))
}
