//! Sampler goodness-of-fit and Monte Carlo checks of the moment formulas.

use super::{Draws, Measure, KS_ALPHA};
use crate::analytics::{
    expfamily_moments, expfamily_statistic, logratio_stats, summarize, sm_tilt_covariance, sm_tilt_moment,
    sm_tilt_moment_with, MomentMethod,
};
use crate::distributions::{dual_transform, sample_concrete_gumbel, Direction, FamilyParams};
use crate::error::Result;
use crate::numeric::rel_diff;
use crate::specialfn::psi1;
use crate::stats::{ks_family_marginal, ks_two_sample, KsResult};

const KS_KNOTS: usize = 1000;

/// Seed of the second sample in two-sample tests.
fn other_seed(seed: u64) -> u64 {
    seed.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn record_ks(m: &mut Measure, r: KsResult, label: impl FnOnce() -> String) {
    m.record(KS_ALPHA / r.p_value, || format!("{}: D={:.3e} p={:.3e}", label(), r.statistic, r.p_value));
}

/// Per-coordinate KS of `n` draws against the quadrature marginal CDF;
/// records KS_ALPHA / p.
pub fn sampler_ks(family: &FamilyParams, n: usize, seed: u64) -> Result<Measure> {
    let xs = family.sample(seed, n)?;
    let mut m = Measure::default();
    for c in 0..family.point_len() {
        let r = ks_family_marginal(family, c, &xs, KS_KNOTS)?;
        record_ks(&mut m, r, || format!("{family} coordinate {c}"));
    }
    Ok(m)
}

/// z-scores of the Dirichlet sample mean and covariance.
pub fn dirichlet_covariance(alpha: &[f64], n: usize, seed: u64) -> Result<Measure> {
    let f = FamilyParams::dirichlet(alpha.to_vec())?;
    let (mean, cov) = crate::analytics::dirichlet_moments(alpha)?;
    let s = summarize(&f.sample(seed, n)?);
    let mut m = Measure::default();
    for i in 0..alpha.len() {
        m.record(s.mean[i].sub_z(mean[i], s.mean_se[i]), || format!("mean {i}"));
        for j in i..alpha.len() {
            m.record(s.cov[i][j].sub_z(cov[i][j], s.cov_se[i][j]), || format!("cov ({i},{j}): {} vs {}", s.cov[i][j], cov[i][j]));
        }
    }
    Ok(m)
}

trait ZScore {
    fn sub_z(self, target: f64, se: f64) -> f64;
}

impl ZScore for f64 {
    fn sub_z(self, target: f64, se: f64) -> f64 {
        let d = (self - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / se
        }
    }
}

/// Two-sample KS per coordinate: Gumbel-softmax draws vs IS(1, β, τ) draws.
pub fn concrete_vs_inverse(beta: &[f64], tau: f64, n: usize, seed: u64) -> Result<Measure> {
    let a = sample_concrete_gumbel(beta, tau, seed, n)?;
    let b = FamilyParams::inverse_schlomilch(vec![1.0; beta.len()], beta.to_vec(), tau)?.sample(other_seed(seed), n)?;
    let mut m = Measure::default();
    for c in 0..beta.len() {
        let ca: Vec<f64> = a.iter().map(|x| x[c]).collect();
        let cb: Vec<f64> = b.iter().map(|x| x[c]).collect();
        record_ks(&mut m, ks_two_sample(&ca, &cb), || format!("coordinate {c}"));
    }
    Ok(m)
}

/// Two-sample KS per coordinate: inverse dual transform of Dirichlet(α)
/// draws vs Schlömilch(α, β, τ) draws.
pub fn pushforward(alpha: &[f64], beta: &[f64], tau: f64, n: usize, seed: u64) -> Result<Measure> {
    let y = FamilyParams::dirichlet(alpha.to_vec())?.sample(seed, n)?;
    let a: Vec<Vec<f64>> = y.iter().map(|v| dual_transform(v, beta, tau, Direction::Inverse)).collect::<Result<_>>()?;
    let b = FamilyParams::schlomilch(alpha.to_vec(), beta.to_vec(), tau)?.sample(other_seed(seed), n)?;
    let mut m = Measure::default();
    for c in 0..alpha.len() {
        let ca: Vec<f64> = a.iter().map(|x| x[c]).collect();
        let cb: Vec<f64> = b.iter().map(|x| x[c]).collect();
        record_ks(&mut m, ks_two_sample(&ca, &cb), || format!("coordinate {c}"));
    }
    Ok(m)
}

type Quad = (usize, usize, usize, usize);

/// A log-ratio MC case with optional hand-derived covariance targets.
#[derive(Debug, Clone)]
pub struct LogRatioCase {
    pub label: String,
    pub family: FamilyParams,
    pub quads: Vec<Quad>,
    /// (quadruple, τ²·Cov target) checked in addition to the derivative forms.
    pub explicit: Vec<(Quad, f64)>,
}

pub fn logratio_cases() -> Vec<LogRatioCase> {
    let alpha = vec![0.8, 1.5, 2.5, 1.2];
    let beta = vec![0.2, 0.3, 0.4, 0.1];
    let gamma = vec![0.5, 0.1, 0.3, 0.1];
    let quads = vec![(0, 1, 2, 3), (0, 1, 2, 1), (0, 1, 0, 1), (0, 2, 1, 3), (3, 2, 1, 2)];
    let h1: f64 = alpha.iter().zip(&gamma).map(|(a, g)| a * g).sum();
    let g = |i: usize, j: usize, k: usize, l: usize| -(gamma[i] - gamma[j]) * (gamma[k] - gamma[l]) / (h1 * h1);
    let mk = |f: Result<FamilyParams>| f.expect("valid log-ratio case");
    vec![
        LogRatioCase {
            label: "n=0: Cov == 0 for distinct indices, t^2 Cov == psi'(a_j) for a shared denominator".into(),
            family: mk(FamilyParams::schlomilch(alpha.clone(), beta.clone(), 1.4)),
            quads: quads.clone(),
            explicit: vec![((0, 1, 2, 3), 0.0), ((0, 1, 2, 1), psi1(alpha[1])), ((3, 2, 1, 2), psi1(alpha[2]))],
        },
        LogRatioCase {
            label: "n=1, s=0.6: (d_i - d_j)(d_k - d_l) ln I".into(),
            family: mk(FamilyParams::schlomilch_mixture(alpha.clone(), beta.clone(), gamma.clone(), 1, 0.6, 1.2)),
            quads: quads.clone(),
            explicit: vec![],
        },
        LogRatioCase {
            label: "n=1, s=1: t^2 Cov == -(g_i - g_j)(g_k - g_l)/h_1^2".into(),
            family: mk(FamilyParams::schlomilch_mixture(alpha.clone(), beta.clone(), gamma.clone(), 1, 1.0, 1.2)),
            quads: quads.clone(),
            explicit: vec![((0, 1, 2, 3), g(0, 1, 2, 3)), ((0, 2, 1, 3), g(0, 2, 1, 3))],
        },
        LogRatioCase {
            label: "n=2, s=1: (d_i - d_j)(d_k - d_l) ln I, closed Hessian".into(),
            family: mk(FamilyParams::schlomilch_mixture(alpha.clone(), beta.clone(), gamma.clone(), 2, 1.0, 0.8)),
            quads: quads.clone(),
            explicit: vec![],
        },
        LogRatioCase {
            label: "Dirichlet mixture n=2, s=1.5: finite-difference Hessian".into(),
            family: mk(FamilyParams::dirichlet_mixture(alpha.clone(), gamma.clone(), 2, 1.5)),
            quads,
            explicit: vec![],
        },
    ]
}

fn tau_of(f: &FamilyParams) -> f64 {
    use crate::distributions::Kind;
    match f.kind() {
        Kind::Schlomilch { tau, .. } | Kind::SchlomilchMixture { tau, .. } | Kind::InverseSchlomilch { tau, .. } => *tau,
        _ => 1.0,
    }
}

/// Largest z-score of MC log-ratio means and covariances against
/// [`logratio_stats`] and the explicit targets.
pub fn logratio_mc(case: &LogRatioCase, n: usize, seed: u64) -> Result<Measure> {
    let mut ratios: Vec<(usize, usize)> = Vec::new();
    for &(i, j, k, l) in &case.quads {
        for r in [(i, j), (k, l)] {
            if !ratios.contains(&r) {
                ratios.push(r);
            }
        }
    }
    let idx = |r: (usize, usize)| ratios.iter().position(|&v| v == r).expect("ratio listed");
    let xs = case.family.sample(seed, n)?;
    let rows: Vec<Vec<f64>> = xs.iter().map(|x| ratios.iter().map(|&(i, j)| (x[i] / x[j]).ln()).collect()).collect();
    let s = summarize(&rows);
    let stats = logratio_stats(&case.family, &case.quads)?;
    let mut m = Measure::default();
    for e in &stats {
        let (i, j, k, l) = e.pair;
        let (a, b) = (idx((i, j)), idx((k, l)));
        m.record(s.mean[a].sub_z(e.mean_ij, s.mean_se[a]), || format!("E ln(x{i}/x{j}): {} vs {}", s.mean[a], e.mean_ij));
        m.record(s.cov[a][b].sub_z(e.cov, s.cov_se[a][b]), || format!("Cov {:?}: {} vs {}", e.pair, s.cov[a][b], e.cov));
    }
    let t2 = tau_of(&case.family).powi(2);
    for &((i, j, k, l), target) in &case.explicit {
        let (a, b) = (idx((i, j)), idx((k, l)));
        m.record(s.cov[a][b].sub_z(target / t2, s.cov_se[a][b]), || {
            format!("explicit Cov ({i},{j},{k},{l}): {} vs {}", s.cov[a][b], target / t2)
        });
    }
    Ok(m)
}

/// Tilt moments: closed form, continuation, u-integral and direct simplex
/// quadrature, plus the first and second moment formulas. Relative errors.
pub fn tilt_consistency(draws: usize, seed: u64) -> Result<Measure> {
    let mut d = Draws::new(seed, 40);
    let mut m = Measure::default();
    for it in 0..draws {
        let k = 2 + it % 3;
        let alpha = d.vec(k, 0.5, 4.0);
        let bs = d.vec(k, 0.1, 1.0);
        let tot: f64 = bs.iter().sum();
        let beta: Vec<f64> = bs.iter().map(|b| b / tot).collect();
        let inv: Vec<f64> = beta.iter().map(|b| 1.0 / b).collect();
        let den1: f64 = alpha.iter().zip(&beta).map(|(a, b)| a / b).sum();
        let w = crate::sympoly::WeightedVector::new(alpha.clone(), inv)?;
        let h2 = crate::sympoly::deformed_h(&w, 2);
        for n in [1u32, 2] {
            let fam = FamilyParams::tilt(alpha.clone(), beta.clone(), n)?;
            let mut ells: Vec<Vec<u32>> = Vec::new();
            for i in 0..k {
                let mut e = vec![0u32; k];
                e[i] = 1;
                ells.push(e.clone());
                for j in i..k {
                    let mut e2 = e.clone();
                    e2[j] += 1;
                    ells.push(e2.clone());
                    if n == 2 {
                        e2[0] += 1;
                        ells.push(e2);
                    }
                }
            }
            for ell in ells {
                let lp: u32 = ell.iter().sum();
                let case = || format!("alpha={alpha:?} beta={beta:?} n={n} ell={ell:?}");
                let main = sm_tilt_moment(&alpha, &beta, n, &ell)?;
                let quad = fam.expectation(&|x| x.iter().zip(&ell).map(|(v, &l)| v.powi(l as i32)).product(), 1e-11)?.value;
                m.record(rel_diff(main, quad), case);
                if lp <= n {
                    let cont = sm_tilt_moment_with(&alpha, &beta, n, &ell, MomentMethod::Continuation)?;
                    m.record(rel_diff(main, cont), case);
                }
                let nz: Vec<usize> = (0..k).filter(|&i| ell[i] > 0).collect();
                let formula = match (n, lp) {
                    (1, 1) => Some(alpha[nz[0]] / beta[nz[0]] / den1),
                    (2, 1) => {
                        let i = nz[0];
                        Some(alpha[i] * (den1 + 1.0 / beta[i]) / (2.0 * beta[i] * h2))
                    }
                    (2, 2) => {
                        let (i, j) = if nz.len() == 1 { (nz[0], nz[0]) } else { (nz[0], nz[1]) };
                        let dl = if i == j { 1.0 } else { 0.0 };
                        Some((alpha[i] * alpha[j] + alpha[i] * dl) / (2.0 * beta[i] * beta[j] * h2))
                    }
                    _ => None,
                };
                if let Some(f) = formula {
                    m.record(rel_diff(main, f), case);
                }
            }
        }
    }
    Ok(m)
}

/// z-scores of MC means and covariances of the tilt family against
/// [`sm_tilt_moment`] and [`sm_tilt_covariance`].
pub fn tilt_mc(alpha: &[f64], beta: &[f64], n: u32, samples: usize, seed: u64) -> Result<Measure> {
    let fam = FamilyParams::tilt(alpha.to_vec(), beta.to_vec(), n)?;
    let k = alpha.len();
    let s = summarize(&fam.sample(seed, samples)?);
    let cov = sm_tilt_covariance(alpha, beta, n)?;
    let mut m = Measure::default();
    for i in 0..k {
        let mut e = vec![0u32; k];
        e[i] = 1;
        let mean = sm_tilt_moment(alpha, beta, n, &e)?;
        m.record(s.mean[i].sub_z(mean, s.mean_se[i]), || format!("E X{i}: {} vs {mean}", s.mean[i]));
        for j in i..k {
            m.record(s.cov[i][j].sub_z(cov[i][j], s.cov_se[i][j]), || format!("Cov({i},{j}): {} vs {}", s.cov[i][j], cov[i][j]));
        }
    }
    Ok(m)
}

/// MC correlation of X₁, X₂ for α = (10, 10, 1), β ∝ (1, 1, ε), n = 2 at
/// ε = 0.1, against (1 − 4ε − ε²)/(1 + 6ε + ε²); the SE comes from 100
/// batch correlations.
pub fn correlation_example_mc(samples: usize, seed: u64) -> Result<Measure> {
    let eps: f64 = 0.1;
    let target = (1.0 - 4.0 * eps - eps * eps) / (1.0 + 6.0 * eps + eps * eps);
    let beta: Vec<f64> = [1.0, 1.0, eps].iter().map(|b| b / (2.0 + eps)).collect();
    let fam = FamilyParams::tilt(vec![10.0, 10.0, 1.0], beta, 2)?;
    let xs = fam.sample(seed, samples)?;
    let (corr, se) = batch_correlation(&xs, 0, 1, 100);
    let mut m = Measure::default();
    m.record(corr.sub_z(target, se), || format!("Corr {corr} +- {se} vs {target}"));
    Ok(m)
}

/// Correlation of columns a, b with a batch-means standard error.
pub fn batch_correlation(xs: &[Vec<f64>], a: usize, b: usize, batches: usize) -> (f64, f64) {
    let corr = |rows: &[Vec<f64>]| {
        let s = summarize(&rows.iter().map(|x| vec![x[a], x[b]]).collect::<Vec<_>>());
        s.cov[0][1] / (s.cov[0][0] * s.cov[1][1]).sqrt()
    };
    let whole = corr(xs);
    let size = xs.len() / batches;
    let parts: Vec<f64> = (0..batches).map(|i| corr(&xs[i * size..(i + 1) * size])).collect();
    let mean = parts.iter().sum::<f64>() / batches as f64;
    let var = parts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (batches as f64 - 1.0);
    (whole, (var / batches as f64).sqrt())
}

/// E Xᵢ = 1/K for SM(α, ᾱ, ᾱ⁻¹, 1, 1, 1); relative errors.
pub fn mean_one_tilt(draws: usize, seed: u64) -> Result<Measure> {
    let mut d = Draws::new(seed, 41);
    let mut m = Measure::default();
    for _ in 0..draws {
        let k = d.int(2, 6) as usize;
        let alpha = d.vec(k, 0.2, 5.0);
        for i in 0..k {
            let mut e = vec![0u32; k];
            e[i] = 1;
            let v = sm_tilt_moment(&alpha, &alpha, 1, &e)?;
            m.record(rel_diff(v, 1.0 / k as f64), || format!("alpha={alpha:?} i={i}"));
        }
    }
    Ok(m)
}

pub fn expfamily_cases() -> Vec<(String, FamilyParams)> {
    let alpha = vec![0.8, 1.5, 2.5];
    let beta = vec![0.2, 0.3, 0.5];
    let gamma = vec![0.6, 0.1, 0.3];
    let sm = |n: u32, s: f64, t: f64| {
        FamilyParams::schlomilch_mixture(alpha.clone(), beta.clone(), gamma.clone(), n, s, t).expect("valid case")
    };
    vec![
        ("SM n=0, t=1.3: E T == grad ln I, Cov T == Hess ln I".into(), sm(0, 1.0, 1.3)),
        ("SM n=1, s=0.7, t=1.3: E T == grad ln I, Cov T == Hess ln I".into(), sm(1, 0.7, 1.3)),
        ("SM n=2, s=1, t=0.8: E T == grad ln I, Cov T == Hess ln I".into(), sm(2, 1.0, 0.8)),
        ("SM n=2, s=1.6, t=1.1: E T == grad ln I, Cov T == Hess ln I".into(), sm(2, 1.6, 1.1)),
    ]
}

/// z-scores of the MC mean and covariance of the sufficient statistic.
pub fn expfamily_mc(family: &FamilyParams, n: usize, seed: u64) -> Result<Measure> {
    let xs = family.sample(seed, n)?;
    let rows: Vec<Vec<f64>> = xs.iter().map(|x| expfamily_statistic(family, x)).collect::<Result<_>>()?;
    let s = summarize(&rows);
    let (g, h) = expfamily_moments(family)?;
    let mut m = Measure::default();
    for i in 0..g.len() {
        m.record(s.mean[i].sub_z(g[i], s.mean_se[i]), || format!("E T{i}: {} vs {}", s.mean[i], g[i]));
        for j in i..g.len() {
            m.record(s.cov[i][j].sub_z(h[i][j], s.cov_se[i][j]), || format!("Cov T({i},{j}): {} vs {}", s.cov[i][j], h[i][j]));
        }
    }
    Ok(m)
}
