use std::fmt;

use super::mc::mc_estimate;
use crate::distributions::{FamilyParams, Kind};
use crate::error::{domain, Error, Result};
use crate::normalization::{check_positive, ln_i_closed_sigma1};
use crate::quadrature::integrate_01;
use crate::specialfn::{ln_gamma, ln_pochhammer};

/// Evaluation route for a mixed moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMethod {
    /// I-function ratio (ℓ₊ ≤ n) or the u-integral (ℓ₊ > n).
    Auto,
    /// I-function ratio; requires ℓ₊ ≤ n.
    Closed,
    /// Derivative form of the continued u-integral; requires ℓ₊ ≤ n.
    Continuation,
    /// Quadrature of the u-integral; requires ℓ₊ > n.
    Integral1d,
    MonteCarlo { samples: usize, seed: u64 },
}

impl fmt::Display for MomentMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MomentMethod::Auto => "auto",
            MomentMethod::Closed => "closed",
            MomentMethod::Continuation => "continuation",
            MomentMethod::Integral1d => "integral1d",
            MomentMethod::MonteCarlo { .. } => "mc",
        })
    }
}

/// E ∏ Xᵢ^{ℓᵢ} for a tilt-form family.
#[derive(Debug, Clone)]
pub struct MomentRequest {
    pub family: FamilyParams,
    pub ell: Vec<u32>,
    pub method: MomentMethod,
}

/// Mean vector and covariance matrix of Dirichlet(α).
pub fn dirichlet_moments(alpha: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    check_positive(alpha, "alpha")?;
    let ap: f64 = alpha.iter().sum();
    let mean: Vec<f64> = alpha.iter().map(|a| a / ap).collect();
    let d = ap * ap * (ap + 1.0);
    let cov = alpha
        .iter()
        .enumerate()
        .map(|(i, &ai)| {
            alpha
                .iter()
                .enumerate()
                .map(|(j, &aj)| if i == j { ai * (ap - ai) / d } else { -ai * aj / d })
                .collect()
        })
        .collect();
    Ok((mean, cov))
}

fn check_tilt(alpha: &[f64], beta: &[f64], ell: &[u32]) -> Result<()> {
    check_positive(alpha, "alpha")?;
    check_positive(beta, "beta")?;
    if alpha.len() < 2 || beta.len() != alpha.len() || ell.len() != alpha.len() {
        return domain("alpha, beta and ell must have the same length K >= 2");
    }
    Ok(())
}

/// E ∏ Xᵢ^{ℓᵢ} under the tilt SM(α, β, β⁻¹/Σβ⁻¹, n, 1, 1).
pub fn sm_tilt_moment(alpha: &[f64], beta: &[f64], n: u32, ell: &[u32]) -> Result<f64> {
    sm_tilt_moment_with(alpha, beta, n, ell, MomentMethod::Auto)
}

pub fn sm_tilt_moment_with(alpha: &[f64], beta: &[f64], n: u32, ell: &[u32], method: MomentMethod) -> Result<f64> {
    check_tilt(alpha, beta, ell)?;
    let s: f64 = beta.iter().sum();
    let beta: Vec<f64> = beta.iter().map(|b| b / s).collect();
    let lp: u32 = ell.iter().sum();
    let method = match method {
        MomentMethod::Auto if lp <= n => MomentMethod::Closed,
        MomentMethod::Auto => MomentMethod::Integral1d,
        m => m,
    };
    let inv: Vec<f64> = beta.iter().map(|b| 1.0 / b).collect();
    match method {
        MomentMethod::Closed => {
            if lp > n {
                return domain(format!("closed form needs ell_+ <= n, got {lp} > {n}"));
            }
            let a: Vec<f64> = alpha.iter().zip(ell).map(|(a, &l)| a + l as f64).collect();
            let ln_b: f64 = beta.iter().zip(ell).map(|(b, &l)| l as f64 * b.ln()).sum();
            Ok((ln_i_closed_sigma1(&a, &inv, n - lp)? - ln_i_closed_sigma1(alpha, &inv, n)? - ln_b).exp())
        }
        MomentMethod::Continuation => {
            if lp > n || lp == 0 {
                return domain(format!("continuation needs 1 <= ell_+ <= n, got {lp}"));
            }
            let (_, a) = shifted(alpha, ell);
            let s = alpha.iter().sum::<f64>() + n as f64;
            let d = derivative_at_one(&a, &beta, s, (n - lp) as usize);
            let ln_phi1 = -a.iter().zip(&beta).map(|(aj, bj)| aj * bj.ln()).sum::<f64>();
            let ln_num = a.iter().map(|&v| ln_gamma(v)).sum::<f64>() - ln_gamma(s);
            Ok(d * (ln_phi1 + ln_num - ln_tilt_den(alpha, &beta, n)?).exp())
        }
        MomentMethod::Integral1d => {
            if lp <= n {
                return domain(format!("u-integral needs ell_+ > n, got {lp} <= {n}"));
            }
            let (_, a) = shifted(alpha, ell);
            let s = alpha.iter().sum::<f64>() + n as f64;
            let m = (lp - n) as f64;
            // −ln g is convex, so its largest value on [0, 1] is at an endpoint
            let top = (-a.iter().zip(&beta).map(|(aj, bj)| aj * bj.ln()).sum::<f64>()).max(0.0);
            let g = |u: f64| -> f64 {
                let l: f64 = a.iter().zip(&beta).map(|(aj, bj)| aj * (bj * u + 1.0 - u).ln()).sum();
                (-l - top).exp()
            };
            let r = integrate_01(&g, s - 1.0, m - 1.0, 1e-12)?;
            let ln_pre = a.iter().map(|&v| ln_gamma(v)).sum::<f64>() - ln_gamma(s) - ln_gamma(m);
            Ok(r.value * (top + ln_pre - ln_tilt_den(alpha, &beta, n)?).exp())
        }
        MomentMethod::MonteCarlo { samples, seed } => {
            let fam = FamilyParams::tilt(alpha.to_vec(), beta.clone(), n)?;
            let ell = ell.to_vec();
            let est = mc_estimate(&fam, |x| x.iter().zip(&ell).map(|(xi, &l)| xi.powi(l as i32)).product(), samples, seed)?;
            Ok(est.estimate)
        }
        MomentMethod::Auto => unreachable!(),
    }
}

fn shifted(alpha: &[f64], ell: &[u32]) -> (f64, Vec<f64>) {
    let a: Vec<f64> = alpha.iter().zip(ell).map(|(a, &l)| a + l as f64).collect();
    (a.iter().sum(), a)
}

/// ln ∫ ∏x^{α−1} (Σβx)^{−α₊−n} = −Σαᵢ ln βᵢ + ln I_n^1(α, β⁻¹).
fn ln_tilt_den(alpha: &[f64], beta: &[f64], n: u32) -> Result<f64> {
    let inv: Vec<f64> = beta.iter().map(|b| 1.0 / b).collect();
    let lb: f64 = alpha.iter().zip(beta).map(|(a, b)| a * b.ln()).sum();
    Ok(ln_i_closed_sigma1(alpha, &inv, n)? - lb)
}

/// d-th derivative at u = 1 of u^{s−1} / ∏(βⱼu + 1 − u)^{aⱼ}, divided by its value there.
fn derivative_at_one(a: &[f64], beta: &[f64], s: f64, d: usize) -> f64 {
    // derivatives of ψ = ln φ at 1, then Bell recursion for e^ψ
    let mut psi_d = vec![0.0; d + 1];
    let mut fact = 1.0;
    for r in 1..=d {
        if r > 1 {
            fact *= (r - 1) as f64;
        }
        let sign = if r % 2 == 1 { 1.0 } else { -1.0 };
        let t: f64 = a.iter().zip(beta).map(|(aj, bj)| aj * ((bj - 1.0) / bj).powi(r as i32)).sum();
        psi_d[r] = sign * fact * ((s - 1.0) - t);
    }
    let mut y = vec![1.0; d + 1];
    for k in 0..d {
        let mut acc = 0.0;
        let mut binom = 1.0;
        for i in 0..=k {
            acc += binom * psi_d[i + 1] * y[k - i];
            binom = binom * (k - i) as f64 / (i + 1) as f64;
        }
        y[k + 1] = acc;
    }
    y[d]
}

/// (α, β, n) when the family is of tilt form: Dirichlet (β = 1, n = 0),
/// Schlömilch with τ = 1 (n = 0), or SM with σ = τ = 1 and γ ∝ β⁻¹.
pub fn tilt_form(family: &FamilyParams) -> Option<(Vec<f64>, Vec<f64>, u32)> {
    match family.kind() {
        Kind::Dirichlet { alpha } => Some((alpha.clone(), vec![1.0; alpha.len()], 0)),
        Kind::Schlomilch { alpha, beta, tau } if *tau == 1.0 => Some((alpha.clone(), beta.clone(), 0)),
        Kind::SchlomilchMixture { alpha, beta, gamma, n, sigma, tau } if *sigma == 1.0 && *tau == 1.0 => {
            let inv: Vec<f64> = beta.iter().map(|b| 1.0 / b).collect();
            let s: f64 = inv.iter().sum();
            if gamma.iter().zip(&inv).any(|(g, i)| (g - i / s).abs() > 1e-12) {
                return None;
            }
            Some((alpha.clone(), beta.clone(), *n))
        }
        _ => None,
    }
}

/// Mixed moment for a tilt-form family (see [`tilt_form`]).
pub fn moment(req: &MomentRequest) -> Result<f64> {
    let ell = &req.ell;
    let Some((alpha, beta, n)) = tilt_form(&req.family) else {
        return Err(Error::MethodUnavailable(format!(
            "no moment route for {} (needs Dirichlet, Schlomilch with tau = 1, or SM with sigma = tau = 1 and gamma proportional to 1/beta)",
            req.family
        )));
    };
    if ell.len() != alpha.len() {
        return domain("ell must have K entries");
    }
    if let (Kind::Dirichlet { .. }, MomentMethod::Auto | MomentMethod::Closed) = (req.family.kind(), req.method) {
        let ap: f64 = alpha.iter().sum();
        let lp: u32 = ell.iter().sum();
        let l: f64 = alpha.iter().zip(ell).map(|(a, &li)| ln_pochhammer(*a, li)).sum::<f64>() - ln_pochhammer(ap, lp);
        return Ok(l.exp());
    }
    sm_tilt_moment_with(&alpha, &beta, n, ell, req.method)
}

/// Covariance matrix of the tilt SM(α, β, β⁻¹, n, 1, 1), from first and
/// second moments (closed form when ℓ₊ ≤ n, the u-integral otherwise).
pub fn sm_tilt_covariance(alpha: &[f64], beta: &[f64], n: u32) -> Result<Vec<Vec<f64>>> {
    let k = alpha.len();
    let unit = |i: usize, j: usize| -> Vec<u32> {
        let mut e = vec![0u32; k];
        e[i] += 1;
        e[j] += 1;
        e
    };
    let mean: Vec<f64> = (0..k)
        .map(|i| {
            let mut e = vec![0u32; k];
            e[i] = 1;
            sm_tilt_moment(alpha, beta, n, &e)
        })
        .collect::<Result<_>>()?;
    let mut c = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            c[i][j] = sm_tilt_moment(alpha, beta, n, &unit(i, j))? - mean[i] * mean[j];
            c[j][i] = c[i][j];
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sympoly::{deformed_h, WeightedVector};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn dirichlet_examples() {
        let (m, c) = dirichlet_moments(&[1.0, 1.0]).unwrap();
        assert_eq!(m, vec![0.5, 0.5]);
        assert_relative_eq!(c[0][0], 1.0 / 12.0, max_relative = 1e-15);
        let (_, c) = dirichlet_moments(&[2.0, 2.0, 2.0]).unwrap();
        assert_relative_eq!(c[0][1], -1.0 / 63.0, max_relative = 1e-15);
        for row in &c {
            assert!(row.iter().sum::<f64>().abs() < 1e-16);
        }
    }

    #[test]
    fn first_and_second_moment_formulas() {
        let alpha = [0.7, 1.9, 2.6];
        let beta = [0.2, 0.5, 0.3];
        let den: f64 = alpha.iter().zip(&beta).map(|(a, b)| a / b).sum();
        for i in 0..3 {
            let mut e = [0u32; 3];
            e[i] = 1;
            assert_relative_eq!(sm_tilt_moment(&alpha, &beta, 1, &e).unwrap(), alpha[i] / beta[i] / den, max_relative = 1e-13);
        }
        let inv: Vec<f64> = beta.iter().map(|b| 1.0 / b).collect();
        let h2 = deformed_h(&WeightedVector::new(alpha.to_vec(), inv).unwrap(), 2);
        for i in 0..3 {
            for j in 0..3 {
                let mut e = [0u32; 3];
                e[i] += 1;
                e[j] += 1;
                let d = if i == j { 1.0 } else { 0.0 };
                let want = (alpha[i] * alpha[j] + alpha[i] * d) / (2.0 * beta[i] * beta[j] * h2);
                assert_relative_eq!(sm_tilt_moment(&alpha, &beta, 2, &e).unwrap(), want, max_relative = 1e-12);
            }
        }
        assert_relative_eq!(sm_tilt_moment(&[1.0, 1.0], &[0.5, 0.5], 0, &[1, 0]).unwrap(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn integral_path_matches_dirichlet() {
        let alpha = [0.7, 1.9, 2.6];
        let ell = [2, 0, 1];
        let d = FamilyParams::dirichlet(alpha.to_vec()).unwrap();
        let want = moment(&MomentRequest { family: d, ell: ell.to_vec(), method: MomentMethod::Auto }).unwrap();
        let got = sm_tilt_moment(&alpha, &[1.0, 1.0, 1.0], 0, &ell).unwrap();
        assert_relative_eq!(got, want, max_relative = 1e-11);
    }

    #[test]
    fn correlation_example() {
        let alpha = [10.0, 10.0, 1.0];
        let beta = [1.0 / 2.1, 1.0 / 2.1, 0.1 / 2.1];
        let c = sm_tilt_covariance(&alpha, &beta, 2).unwrap();
        let corr = c[0][1] / (c[0][0] * c[1][1]).sqrt();
        assert_relative_eq!(corr, 0.59 / 1.61, max_relative = 1e-10);
        for row in &c {
            assert!(row.iter().sum::<f64>().abs() < 1e-13);
        }
        let c = sm_tilt_covariance(&[1.0, 1.0, 1.0], &[0.45, 0.45, 0.1], 2).unwrap();
        assert!(c[0][1] > 0.0);
    }

    #[test]
    fn n1_correlation_approaches_one() {
        let corr = |eps: f64| {
            let alpha = [1.0 / eps, 1.0 / eps, 1.0];
            let beta = [1.0 / (2.0 + eps), 1.0 / (2.0 + eps), eps / (2.0 + eps)];
            let c = sm_tilt_covariance(&alpha, &beta, 1).unwrap();
            c[0][1] / (c[0][0] * c[1][1]).sqrt()
        };
        let (a, b, c) = (corr(0.1), corr(0.01), corr(0.001));
        assert!(a < b && b < c && c > 0.98, "{a} {b} {c}");
    }

    #[test]
    fn mean_one_tilt() {
        let alpha = [0.5, 2.0, 3.5, 1.0];
        for i in 0..4 {
            let mut e = [0u32; 4];
            e[i] = 1;
            assert_relative_eq!(sm_tilt_moment(&alpha, &alpha, 1, &e).unwrap(), 0.25, max_relative = 1e-13);
        }
    }

    #[test]
    fn tilt_family_route() {
        let fam = FamilyParams::tilt(vec![0.7, 1.9], vec![0.2, 0.8], 1).unwrap();
        let m = moment(&MomentRequest { family: fam, ell: vec![1, 0], method: MomentMethod::Auto }).unwrap();
        assert_relative_eq!(m, 3.5 / (3.5 + 1.9 / 0.8), max_relative = 1e-13);
        let other = FamilyParams::schlomilch_mixture(vec![0.7, 1.9], vec![0.2, 0.8], vec![0.5, 0.5], 1, 1.0, 1.0).unwrap();
        assert!(moment(&MomentRequest { family: other, ell: vec![1, 0], method: MomentMethod::Auto }).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn continuation_matches_closed(
            alpha in proptest::collection::vec(0.3f64..4.0, 3),
            beta in proptest::collection::vec(0.1f64..1.0, 3),
            n in 1u32..6,
            ell in proptest::collection::vec(0u32..3, 3),
        ) {
            let lp: u32 = ell.iter().sum();
            prop_assume!(lp >= 1 && lp <= n);
            let a = sm_tilt_moment_with(&alpha, &beta, n, &ell, MomentMethod::Closed).unwrap();
            let b = sm_tilt_moment_with(&alpha, &beta, n, &ell, MomentMethod::Continuation).unwrap();
            prop_assert!(((a - b) / a).abs() < 1e-8, "{} vs {}", a, b);
        }

        #[test]
        fn moments_sum_to_one(
            alpha in proptest::collection::vec(0.3f64..4.0, 3),
            beta in proptest::collection::vec(0.1f64..1.0, 3),
            n in 0u32..4,
        ) {
            let s: f64 = (0..3).map(|i| {
                let mut e = [0u32; 3];
                e[i] = 1;
                sm_tilt_moment(&alpha, &beta, n, &e).unwrap()
            }).sum();
            prop_assert!((s - 1.0).abs() < 1e-9);
        }
    }
}
