//! The mixture normalization I_n^σ(α, γ) = ∫_{S_K} (Σ γ_k y_k^σ)^n ∏ y_i^{α_i−1},
//! its evaluation routes, duality, recurrences and log-derivatives.

use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_simplex, FaceModel, Method, QuadratureResult, QuadratureSpec};
use crate::specialfn::{ln_binomial, ln_factorial, ln_gamma, ln_pochhammer, psi, psi1};
use crate::sympoly::{deformed_h, deformed_h_all, power_sum, WeightedVector};

/// Largest number of compositions enumerated by [`i_multinomial`].
pub const COMPOSITION_BUDGET: f64 = 1e7;

/// Validated (α, γ, n, σ).
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationQuery {
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
    pub n: u32,
    pub sigma: f64,
}

impl NormalizationQuery {
    pub fn new(alpha: Vec<f64>, gamma: Vec<f64>, n: u32, sigma: f64) -> Result<Self> {
        check_positive(&alpha, "alpha")?;
        check_positive(&gamma, "gamma")?;
        if alpha.len() != gamma.len() {
            return domain("alpha and gamma lengths differ");
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return domain(format!("sigma must be positive, got {sigma}"));
        }
        Ok(NormalizationQuery { alpha, gamma, n, sigma })
    }

    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha_sum(&self) -> f64 {
        self.alpha.iter().sum()
    }

    /// Whether [`log_i_gradient`] and [`log_i_hessian`] use closed forms
    /// rather than finite differences.
    pub fn closed_derivatives(&self) -> bool {
        self.n <= 1 || (self.n == 2 && self.sigma == 1.0)
    }

    fn with(&self, alpha: Vec<f64>, gamma: Vec<f64>, n: u32) -> Self {
        NormalizationQuery { alpha, gamma, n, sigma: self.sigma }
    }
}

pub(crate) fn check_positive(v: &[f64], name: &str) -> Result<()> {
    if v.is_empty() {
        return domain(format!("{name} must be non-empty"));
    }
    if v.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return domain(format!("{name} must be strictly positive and finite"));
    }
    Ok(())
}

/// Iterator over compositions of n into K non-negative parts in colex order,
/// starting at (n, 0, …, 0).
#[derive(Debug, Clone)]
pub struct Compositions {
    current: Option<Vec<u32>>,
}

impl Compositions {
    pub fn new(k: usize, n: u32) -> Self {
        assert!(k >= 1);
        let mut m = vec![0; k];
        m[0] = n;
        Compositions { current: Some(m) }
    }
}

impl Iterator for Compositions {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let out = self.current.take()?;
        let k = out.len();
        let mut m = out.clone();
        if let Some(i) = m.iter().position(|&v| v > 0) {
            if i + 1 < k {
                let v = m[i];
                m[i] = 0;
                m[0] = v - 1;
                m[i + 1] += 1;
                self.current = Some(m);
            }
        }
        Some(out)
    }
}

/// C(n+K−1, n).
pub fn composition_count(k: usize, n: u32) -> f64 {
    ln_binomial(n as u64 + k as u64 - 1, n as u64).exp().round()
}

fn check_budget(k: usize, n: u32) -> Result<()> {
    let count = composition_count(k, n);
    if count > COMPOSITION_BUDGET {
        return Err(Error::Budget { count, limit: COMPOSITION_BUDGET });
    }
    Ok(())
}

/// Per-coordinate tables of ln Γ(αᵢ + σm) + m ln γᵢ − ln m!, m = 0..=n.
fn term_tables(q: &NormalizationQuery) -> Vec<Vec<f64>> {
    q.alpha
        .iter()
        .zip(&q.gamma)
        .map(|(&a, &g)| {
            let lg = g.ln();
            (0..=q.n)
                .map(|m| ln_gamma(a + q.sigma * m as f64) + m as f64 * lg - ln_factorial(m as u64))
                .collect()
        })
        .collect()
}

/// Streaming log-sum-exp with compensated accumulation.
#[derive(Debug, Clone, Copy)]
struct LogAcc {
    max: f64,
    sum: f64,
    comp: f64,
}

impl LogAcc {
    fn new() -> Self {
        LogAcc { max: f64::NEG_INFINITY, sum: 0.0, comp: 0.0 }
    }

    fn add(&mut self, t: f64) {
        if t > self.max {
            let scale = (self.max - t).exp();
            self.sum *= scale;
            self.comp *= scale;
            self.max = t;
        }
        let v = (t - self.max).exp();
        let s = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - s) + v;
        } else {
            self.comp += (v - s) + self.sum;
        }
        self.sum = s;
    }

    fn value(&self) -> f64 {
        self.max + (self.sum + self.comp).ln()
    }
}

/// ln I_n^σ(α, γ) by the finite multinomial sum.
pub fn ln_i_multinomial(q: &NormalizationQuery) -> Result<f64> {
    check_budget(q.k(), q.n)?;
    let tables = term_tables(q);
    let base = ln_factorial(q.n as u64) - ln_gamma(q.alpha_sum() + q.sigma * q.n as f64);
    let mut acc = LogAcc::new();
    for m in Compositions::new(q.k(), q.n) {
        let t: f64 = m.iter().enumerate().map(|(i, &mi)| tables[i][mi as usize]).sum();
        acc.add(t);
    }
    Ok(base + acc.value())
}

/// I_n^σ(α, γ) by the finite multinomial sum.
pub fn i_multinomial(q: &NormalizationQuery) -> Result<f64> {
    Ok(ln_i_multinomial(q)?.exp())
}

/// Mixture components and their weights
/// w_m = C(n; m) ∏Γ(αᵢ+σmᵢ)γᵢ^{mᵢ} / (Γ(α₊+σn) I_n^σ), summing to one.
pub fn mixture_weights(q: &NormalizationQuery) -> Result<(Vec<Vec<u32>>, Vec<f64>)> {
    check_budget(q.k(), q.n)?;
    let tables = term_tables(q);
    let comps: Vec<Vec<u32>> = Compositions::new(q.k(), q.n).collect();
    let logs: Vec<f64> = comps
        .iter()
        .map(|m| m.iter().enumerate().map(|(i, &mi)| tables[i][mi as usize]).sum())
        .collect();
    let norm = crate::specialfn::log_sum_exp(&logs);
    let w = logs.iter().map(|l| (l - norm).exp()).collect();
    Ok((comps, w))
}

/// ln I_n^1(α, γ) = ln(∏Γ(αᵢ)/Γ(α₊+n) · n! · h_n(α, γ)).
pub fn ln_i_closed_sigma1(alpha: &[f64], gamma: &[f64], n: u32) -> Result<f64> {
    check_positive(alpha, "alpha")?;
    check_positive(gamma, "gamma")?;
    let w = WeightedVector::new(alpha.to_vec(), gamma.to_vec())?;
    let ap: f64 = alpha.iter().sum();
    let lg: f64 = alpha.iter().map(|&a| ln_gamma(a)).sum();
    Ok(lg - ln_gamma(ap + n as f64) + ln_factorial(n as u64) + deformed_h(&w, n).ln())
}

pub fn i_closed_sigma1(alpha: &[f64], gamma: &[f64], n: u32) -> Result<f64> {
    Ok(ln_i_closed_sigma1(alpha, gamma, n)?.exp())
}

const QUAD_TOL: f64 = 1e-11;

/// ∫_{S_K} (Σ γ_k y_k^σ)^r ∏ y_i^{α_i−1} for any real order r.
pub fn i_quadrature_real(
    alpha: &[f64],
    gamma: &[f64],
    order: f64,
    sigma: f64,
    rel_tol: f64,
    method: Method,
) -> Result<QuadratureResult> {
    check_positive(alpha, "alpha")?;
    check_positive(gamma, "gamma")?;
    if alpha.len() != gamma.len() {
        return domain("alpha and gamma lengths differ");
    }
    let k = alpha.len();
    let int_sigma = sigma.fract() == 0.0;
    let f = |y: &[f64]| {
        let s: f64 = gamma
            .iter()
            .zip(y)
            .map(|(g, x)| if int_sigma { g * x.powi(sigma as i32) } else { g * x.powf(sigma) })
            .sum();
        s.powf(order)
    };
    let exps: Vec<f64> = alpha.iter().map(|a| a - 1.0).collect();
    let spec = QuadratureSpec::new(k, &f)
        .face_model(FaceModel::Separable(exps))
        .reduced(true)
        .grading(if int_sigma { 1 } else { 4 })
        .rel_tol(rel_tol)
        .method(method);
    integrate_simplex(&spec)
}

/// I_n^σ(α, γ) by direct simplex quadrature of its defining integral.
pub fn i_quadrature(q: &NormalizationQuery) -> Result<QuadratureResult> {
    i_quadrature_real(&q.alpha, &q.gamma, q.n as f64, q.sigma, QUAD_TOL, Method::Auto)
}

/// I_n^σ(α, γ) through the duality relation
/// I_n^σ(α, γ) = I_{−(α₊+σn)}^{1/σ}(α/σ, γ^{−1/σ}) / (σ^{K−1} ∏ γᵢ^{αᵢ/σ}),
/// with the right-hand integral computed by quadrature.
pub fn i_dual(q: &NormalizationQuery) -> Result<f64> {
    let s = q.sigma;
    let k = q.k() as f64;
    let alpha: Vec<f64> = q.alpha.iter().map(|a| a / s).collect();
    let gamma: Vec<f64> = q.gamma.iter().map(|g| g.powf(-1.0 / s)).collect();
    let order = -(q.alpha_sum() + s * q.n as f64);
    let rhs = i_quadrature_real(&alpha, &gamma, order, 1.0 / s, QUAD_TOL, Method::Auto)?;
    let ln_den = (k - 1.0) * s.ln() + q.alpha.iter().zip(&q.gamma).map(|(a, g)| a / s * g.ln()).sum::<f64>();
    Ok(rhs.value * (-ln_den).exp())
}

/// I_{n+1}^σ(α, γ) − Σᵢ γᵢ I_n^σ(α + σeᵢ, γ), each term by the multinomial sum.
pub fn algebraic_recurrence_residual(q: &NormalizationQuery) -> Result<f64> {
    let next = i_multinomial(&q.with(q.alpha.clone(), q.gamma.clone(), q.n + 1))?;
    let mut acc = crate::numeric::Neumaier::default();
    acc.add(next);
    for i in 0..q.k() {
        let mut a = q.alpha.clone();
        a[i] += q.sigma;
        acc.add(-q.gamma[i] * i_multinomial(&q.with(a, q.gamma.clone(), q.n))?);
    }
    Ok(acc.sum())
}

/// ∂ ln I / ∂αᵢ. Closed forms for n = 0, n = 1 and (n = 2, σ = 1); central
/// finite differences of the multinomial route otherwise.
pub fn log_i_gradient(q: &NormalizationQuery) -> Result<Vec<f64>> {
    let k = q.k();
    let ap = q.alpha_sum();
    let s = q.sigma;
    match (q.n, s == 1.0) {
        (0, _) => Ok(q.alpha.iter().map(|&a| psi(a) - psi(ap)).collect()),
        (1, _) => {
            let (_, c) = n1_weights(q);
            Ok((0..k).map(|i| -psi(ap + s) + psi(q.alpha[i]) + c[i]).collect())
        }
        (2, true) => {
            let w = WeightedVector::new(q.alpha.clone(), q.gamma.clone())?;
            let p1 = power_sum(&w, 1);
            let h2 = deformed_h(&w, 2);
            Ok((0..k)
                .map(|i| {
                    let g = q.gamma[i];
                    -psi(ap + 2.0) + psi(q.alpha[i]) + (2.0 * g * p1 + g * g) / (2.0 * h2)
                })
                .collect())
        }
        _ => fd_gradient(q),
    }
}

/// n = 1 mixture weights pᵢ ∝ γᵢ Γ(αᵢ+σ)/Γ(αᵢ) and cᵢ = pᵢ[ψ(αᵢ+σ) − ψ(αᵢ)].
fn n1_weights(q: &NormalizationQuery) -> (Vec<f64>, Vec<f64>) {
    let s = q.sigma;
    let logs: Vec<f64> = q
        .alpha
        .iter()
        .zip(&q.gamma)
        .map(|(&a, &g)| g.ln() + ln_gamma(a + s) - ln_gamma(a))
        .collect();
    let norm = crate::specialfn::log_sum_exp(&logs);
    let p: Vec<f64> = logs.iter().map(|l| (l - norm).exp()).collect();
    let c = q
        .alpha
        .iter()
        .zip(&p)
        .map(|(&a, &pi)| {
            let d = if s == 1.0 { 1.0 / a } else { psi(a + s) - psi(a) };
            pi * d
        })
        .collect();
    (p, c)
}

/// ∂² ln I / ∂αᵢ∂αⱼ, closed forms in the same cells as [`log_i_gradient`].
pub fn log_i_hessian(q: &NormalizationQuery) -> Result<Vec<Vec<f64>>> {
    let k = q.k();
    let ap = q.alpha_sum();
    let s = q.sigma;
    let mut h = vec![vec![0.0; k]; k];
    match (q.n, s == 1.0) {
        (0, _) => {
            for i in 0..k {
                for j in 0..k {
                    h[i][j] = -psi1(ap) + if i == j { psi1(q.alpha[i]) } else { 0.0 };
                }
            }
        }
        (1, true) => {
            let w = WeightedVector::new(q.alpha.clone(), q.gamma.clone())?;
            let h1 = power_sum(&w, 1);
            for i in 0..k {
                for j in 0..k {
                    h[i][j] = -psi1(ap + 1.0) - q.gamma[i] * q.gamma[j] / (h1 * h1)
                        + if i == j { psi1(q.alpha[i]) } else { 0.0 };
                }
            }
        }
        (1, false) => {
            let (p, c) = n1_weights(q);
            for i in 0..k {
                for j in 0..k {
                    let diag = if i == j {
                        let a = q.alpha[i];
                        p[i] * psi1(a + s) + (1.0 - p[i]) * psi1(a) + c[i] * c[i] / p[i]
                    } else {
                        0.0
                    };
                    h[i][j] = -psi1(ap + s) + diag - c[i] * c[j];
                }
            }
        }
        (2, true) => {
            let w = WeightedVector::new(q.alpha.clone(), q.gamma.clone())?;
            let p1 = power_sum(&w, 1);
            let p2 = power_sum(&w, 2);
            let h2 = deformed_h(&w, 2);
            for i in 0..k {
                for j in 0..k {
                    let (gi, gj) = (q.gamma[i], q.gamma[j]);
                    let mix = gi * gj * (2.0 * p2 - 2.0 * p1 * p1 - 2.0 * (gi + gj) * p1 - gi * gj)
                        / (4.0 * h2 * h2);
                    h[i][j] = -psi1(ap + 2.0) + mix + if i == j { psi1(q.alpha[i]) } else { 0.0 };
                }
            }
        }
        _ => return fd_hessian(q),
    }
    Ok(h)
}

fn fd_step(a: f64) -> f64 {
    1e-4 * a.max(1.0)
}

fn ln_i_at(q: &NormalizationQuery, alpha: Vec<f64>) -> Result<f64> {
    ln_i_multinomial(&q.with(alpha, q.gamma.clone(), q.n))
}

fn fd_gradient(q: &NormalizationQuery) -> Result<Vec<f64>> {
    (0..q.k())
        .map(|i| {
            let h = fd_step(q.alpha[i]);
            let mut up = q.alpha.clone();
            up[i] += h;
            let mut dn = q.alpha.clone();
            dn[i] -= h;
            Ok((ln_i_at(q, up)? - ln_i_at(q, dn)?) / (2.0 * h))
        })
        .collect()
}

fn fd_hessian(q: &NormalizationQuery) -> Result<Vec<Vec<f64>>> {
    let k = q.k();
    let f0 = ln_i_at(q, q.alpha.clone())?;
    let mut h = vec![vec![0.0; k]; k];
    for i in 0..k {
        let hi = fd_step(q.alpha[i]);
        let mut up = q.alpha.clone();
        up[i] += hi;
        let mut dn = q.alpha.clone();
        dn[i] -= hi;
        h[i][i] = (ln_i_at(q, up)? - 2.0 * f0 + ln_i_at(q, dn)?) / (hi * hi);
        for j in 0..i {
            let hj = fd_step(q.alpha[j]);
            let mut vals = [0.0; 4];
            for (idx, (si, sj)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)].iter().enumerate() {
                let mut a = q.alpha.clone();
                a[i] += si * hi;
                a[j] += sj * hj;
                vals[idx] = ln_i_at(q, a)?;
            }
            let v = (vals[0] - vals[1] - vals[2] + vals[3]) / (4.0 * hi * hj);
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    Ok(h)
}

/// Exact gradient and Hessian of ln I from the mixture representation:
/// ∂ᵢ ln I = E_w ψ(αᵢ+σmᵢ) − ψ(α₊+σn) and
/// ∂ᵢ∂ⱼ ln I = δᵢⱼ E_w ψ′(αᵢ+σmᵢ) − ψ′(α₊+σn) + Cov_w(ψ(αᵢ+σmᵢ), ψ(αⱼ+σmⱼ)).
pub fn log_i_derivatives_mixture(q: &NormalizationQuery) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let k = q.k();
    let (comps, w) = mixture_weights(q)?;
    let top = q.alpha_sum() + q.sigma * q.n as f64;
    let mut mean = vec![0.0; k];
    let mut tri = vec![0.0; k];
    for (m, &wm) in comps.iter().zip(&w) {
        for i in 0..k {
            let x = q.alpha[i] + q.sigma * m[i] as f64;
            mean[i] += wm * psi(x);
            tri[i] += wm * psi1(x);
        }
    }
    let mut cov = vec![vec![0.0; k]; k];
    for (m, &wm) in comps.iter().zip(&w) {
        let d: Vec<f64> = (0..k).map(|i| psi(q.alpha[i] + q.sigma * m[i] as f64) - mean[i]).collect();
        for i in 0..k {
            for j in 0..k {
                cov[i][j] += wm * d[i] * d[j];
            }
        }
    }
    let grad = mean.iter().map(|m| m - psi(top)).collect();
    let hess = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| cov[i][j] - psi1(top) + if i == j { tri[i] } else { 0.0 })
                .collect()
        })
        .collect();
    Ok((grad, hess))
}

/// Carlson's R_n(α; z) = Γ(α₊)/∏Γ(αᵢ) · I_n^1(α, z) = n! h_n(α, z) / (α₊)_n.
pub fn carlson_r(alpha: &[f64], z: &[f64], n: u32) -> Result<f64> {
    check_positive(alpha, "alpha")?;
    check_positive(z, "z")?;
    let w = WeightedVector::new(alpha.to_vec(), z.to_vec())?;
    let ap: f64 = alpha.iter().sum();
    Ok((ln_factorial(n as u64) - ln_pochhammer(ap, n)).exp() * deformed_h(&w, n))
}

/// I_0..I_N at σ = 1 by the closed form.
pub fn i_sequence_sigma1(alpha: &[f64], gamma: &[f64], max_n: u32) -> Result<Vec<f64>> {
    check_positive(alpha, "alpha")?;
    check_positive(gamma, "gamma")?;
    let w = WeightedVector::new(alpha.to_vec(), gamma.to_vec())?;
    let h = deformed_h_all(&w, max_n);
    let ap: f64 = alpha.iter().sum();
    let lg: f64 = alpha.iter().map(|&a| ln_gamma(a)).sum();
    Ok((0..=max_n)
        .map(|n| (lg - ln_gamma(ap + n as f64) + ln_factorial(n as u64)).exp() * h[n as usize])
        .collect())
}

/// Right side of the first-order differential recurrence
/// I_{n+1} = (1/(α₊+n)) Σᵢ (γᵢ² ∂_{γᵢ} + αᵢγᵢ) I_n at σ = 1, with the γ
/// derivatives taken by central differences of the closed form.
pub fn differential_recurrence_rhs(alpha: &[f64], gamma: &[f64], n: u32) -> Result<f64> {
    let ap: f64 = alpha.iter().sum();
    let base = i_closed_sigma1(alpha, gamma, n)?;
    let mut acc = 0.0;
    for i in 0..gamma.len() {
        let h = 1e-5 * gamma[i];
        let mut up = gamma.to_vec();
        up[i] += h;
        let mut dn = gamma.to_vec();
        dn[i] -= h;
        let d = (i_closed_sigma1(alpha, &up, n)? - i_closed_sigma1(alpha, &dn, n)?) / (2.0 * h);
        acc += gamma[i] * gamma[i] * d + alpha[i] * gamma[i] * base;
    }
    Ok(acc / (ap + n as f64))
}
