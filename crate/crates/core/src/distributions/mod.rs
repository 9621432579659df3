//! The seven simplex families: parameter validation, log-densities, the
//! duality transform, mixture decompositions and the superellipsoid map.

mod doc;
mod sampling;

use std::fmt;
use std::sync::Arc;

pub use doc::ParamsDoc;
pub use sampling::{sample_concrete_gumbel, sample_dirichlet};

use crate::error::{domain, Error, Result};
use crate::normalization::{self, check_positive, NormalizationQuery};
use crate::quadrature::FaceModel;
use crate::specialfn::{gauss_2f1, g4b_log_terms, ln_gamma, log_sum_exp};

/// Tolerance on Σ xᵢ = 1 for simplex points.
pub const SIMPLEX_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Family-specific parameters. β and γ are stored normalized to unit sum.
#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    Dirichlet { alpha: Vec<f64> },
    Schlomilch { alpha: Vec<f64>, beta: Vec<f64>, tau: f64 },
    DirichletMixture { alpha: Vec<f64>, gamma: Vec<f64>, n: u32, sigma: f64 },
    SchlomilchMixture { alpha: Vec<f64>, beta: Vec<f64>, gamma: Vec<f64>, n: u32, sigma: f64, tau: f64 },
    InverseSchlomilch { alpha: Vec<f64>, beta: Vec<f64>, tau: f64 },
    /// `n` is Some(κ − α₊) when that difference is a non-negative integer.
    G4b { alpha1: f64, alpha2: f64, kappa: f64, lambda: f64, n: Option<u32> },
    /// a, b, c have K − 1 entries; `beta_k` does not enter the density.
    Superellipsoid { alpha: Vec<f64>, a: Vec<f64>, b: Vec<f64>, c: Vec<f64>, beta_k: f64 },
}

/// A validated family with its cached log normalization constant.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyParams {
    kind: Kind,
    ln_norm: f64,
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

fn check_scalar(v: f64, name: &str) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return domain(format!("{name} must be positive and finite, got {v}"));
    }
    Ok(())
}

fn check_len(v: &[f64], k: usize, name: &str) -> Result<()> {
    if v.len() != k {
        return domain(format!("{name} has length {}, expected {k}", v.len()));
    }
    Ok(())
}

fn check_k(alpha: &[f64]) -> Result<()> {
    check_positive(alpha, "alpha")?;
    if alpha.len() < 2 {
        return domain("families need K >= 2");
    }
    Ok(())
}

fn ln_gamma_sum(alpha: &[f64]) -> f64 {
    alpha.iter().map(|&a| ln_gamma(a)).sum()
}

/// ln I_n^σ(α, γ): closed form at σ = 1, multinomial sum otherwise.
fn ln_normalizer(alpha: &[f64], gamma: &[f64], n: u32, sigma: f64) -> Result<f64> {
    if sigma == 1.0 {
        normalization::ln_i_closed_sigma1(alpha, gamma, n)
    } else {
        normalization::ln_i_multinomial(&NormalizationQuery::new(alpha.to_vec(), gamma.to_vec(), n, sigma)?)
    }
}

fn schlomilch_ln_norm(alpha: &[f64], beta: &[f64], tau: f64) -> f64 {
    let k = alpha.len() as f64;
    let ap: f64 = alpha.iter().sum();
    // equal β cancel with the denominator term
    let lb = if all_equal(beta) { 0.0 } else { alpha.iter().zip(beta).map(|(a, b)| a * b.ln()).sum::<f64>() };
    (k - 1.0) * tau.ln() + ln_gamma(ap) + lb - ln_gamma_sum(alpha)
}

impl FamilyParams {
    pub fn dirichlet(alpha: Vec<f64>) -> Result<Self> {
        check_k(&alpha)?;
        let ln_norm = ln_gamma(alpha.iter().sum()) - ln_gamma_sum(&alpha);
        Ok(FamilyParams { kind: Kind::Dirichlet { alpha }, ln_norm })
    }

    pub fn schlomilch(alpha: Vec<f64>, beta: Vec<f64>, tau: f64) -> Result<Self> {
        check_k(&alpha)?;
        check_positive(&beta, "beta")?;
        check_len(&beta, alpha.len(), "beta")?;
        check_scalar(tau, "tau")?;
        let beta = normalized(&beta);
        let ln_norm = schlomilch_ln_norm(&alpha, &beta, tau);
        Ok(FamilyParams { kind: Kind::Schlomilch { alpha, beta, tau }, ln_norm })
    }

    pub fn dirichlet_mixture(alpha: Vec<f64>, gamma: Vec<f64>, n: u32, sigma: f64) -> Result<Self> {
        check_k(&alpha)?;
        check_positive(&gamma, "gamma")?;
        check_len(&gamma, alpha.len(), "gamma")?;
        check_scalar(sigma, "sigma")?;
        if n == 0 {
            return domain("Dirichlet mixture needs n >= 1");
        }
        let gamma = normalized(&gamma);
        let ln_norm = -ln_normalizer(&alpha, &gamma, n, sigma)?;
        Ok(FamilyParams { kind: Kind::DirichletMixture { alpha, gamma, n, sigma }, ln_norm })
    }

    pub fn schlomilch_mixture(
        alpha: Vec<f64>,
        beta: Vec<f64>,
        gamma: Vec<f64>,
        n: u32,
        sigma: f64,
        tau: f64,
    ) -> Result<Self> {
        check_k(&alpha)?;
        check_positive(&beta, "beta")?;
        check_positive(&gamma, "gamma")?;
        check_len(&beta, alpha.len(), "beta")?;
        check_len(&gamma, alpha.len(), "gamma")?;
        check_scalar(sigma, "sigma")?;
        check_scalar(tau, "tau")?;
        let beta = normalized(&beta);
        let gamma = normalized(&gamma);
        let k = alpha.len() as f64;
        let ln_norm = (k - 1.0) * tau.ln() + alpha.iter().zip(&beta).map(|(a, b)| a * b.ln()).sum::<f64>()
            - ln_normalizer(&alpha, &gamma, n, sigma)?;
        Ok(FamilyParams { kind: Kind::SchlomilchMixture { alpha, beta, gamma, n, sigma, tau }, ln_norm })
    }

    /// The tilt family SM(α, β, normalized β⁻¹, n, 1, 1).
    pub fn tilt(alpha: Vec<f64>, beta: Vec<f64>, n: u32) -> Result<Self> {
        check_positive(&beta, "beta")?;
        let gamma: Vec<f64> = beta.iter().map(|b| 1.0 / b).collect();
        Self::schlomilch_mixture(alpha, beta, gamma, n, 1.0, 1.0)
    }

    pub fn inverse_schlomilch(alpha: Vec<f64>, beta: Vec<f64>, tau: f64) -> Result<Self> {
        check_k(&alpha)?;
        check_positive(&beta, "beta")?;
        check_len(&beta, alpha.len(), "beta")?;
        check_scalar(tau, "tau")?;
        let beta = normalized(&beta);
        let ln_norm = schlomilch_ln_norm(&alpha, &beta, tau);
        Ok(FamilyParams { kind: Kind::InverseSchlomilch { alpha, beta, tau }, ln_norm })
    }

    pub fn g4b(alpha1: f64, alpha2: f64, kappa: f64, lambda: f64) -> Result<Self> {
        check_scalar(alpha1, "alpha1")?;
        check_scalar(alpha2, "alpha2")?;
        check_scalar(kappa, "kappa")?;
        check_scalar(lambda, "lambda")?;
        let ap = alpha1 + alpha2;
        let diff = kappa - ap;
        let nearest = diff.round();
        let n = if nearest >= 0.0 && (diff - nearest).abs() <= 1e-12 * kappa.max(1.0) {
            Some(nearest as u32)
        } else {
            None
        };
        let ln_f = match n {
            Some(n) => log_sum_exp(&g4b_log_terms(alpha1, alpha2, n, lambda)),
            None => gauss_2f1(alpha1, kappa, ap, 1.0 - lambda)?.ln(),
        };
        let ln_norm = ln_gamma(ap) - ln_gamma(alpha1) - ln_gamma(alpha2) - ln_f;
        Ok(FamilyParams { kind: Kind::G4b { alpha1, alpha2, kappa, lambda, n }, ln_norm })
    }

    pub fn superellipsoid(alpha: Vec<f64>, a: Vec<f64>, b: Vec<f64>, c: Vec<f64>, beta_k: f64) -> Result<Self> {
        check_k(&alpha)?;
        let m = alpha.len() - 1;
        check_positive(&a, "a")?;
        check_positive(&b, "b")?;
        check_len(&a, m, "a")?;
        check_len(&b, m, "b")?;
        check_len(&c, m, "c")?;
        if c.iter().any(|&v| !(v < 1.0 && v.is_finite())) {
            return domain("c entries must be finite and below 1");
        }
        check_scalar(beta_k, "beta_K")?;
        let ap: f64 = alpha.iter().sum();
        let ln_norm = ln_gamma(ap) - ln_gamma_sum(&alpha)
            + (0..m).map(|i| a[i].ln() - a[i] * alpha[i] * b[i].ln()).sum::<f64>();
        Ok(FamilyParams { kind: Kind::Superellipsoid { alpha, a, b, c, beta_k }, ln_norm })
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    /// Canonical family tag used in parameter documents.
    pub fn name(&self) -> &'static str {
        match self.kind {
            Kind::Dirichlet { .. } => "dirichlet",
            Kind::Schlomilch { .. } => "schlomilch",
            Kind::DirichletMixture { .. } => "dirichlet_mixture",
            Kind::SchlomilchMixture { .. } => "schlomilch_mixture",
            Kind::InverseSchlomilch { .. } => "inverse_schlomilch",
            Kind::G4b { .. } => "g4b",
            Kind::Superellipsoid { .. } => "superellipsoid",
        }
    }

    /// Number of simplex components K.
    pub fn k(&self) -> usize {
        match &self.kind {
            Kind::Dirichlet { alpha }
            | Kind::Schlomilch { alpha, .. }
            | Kind::DirichletMixture { alpha, .. }
            | Kind::SchlomilchMixture { alpha, .. }
            | Kind::InverseSchlomilch { alpha, .. }
            | Kind::Superellipsoid { alpha, .. } => alpha.len(),
            Kind::G4b { .. } => 2,
        }
    }

    /// Length of a point accepted by [`log_pdf`](Self::log_pdf): K on the
    /// simplex, K − 1 orthant coordinates for the superellipsoid family.
    pub fn point_len(&self) -> usize {
        match self.kind {
            Kind::Superellipsoid { .. } => self.k() - 1,
            _ => self.k(),
        }
    }

    pub fn alpha(&self) -> Vec<f64> {
        match &self.kind {
            Kind::Dirichlet { alpha }
            | Kind::Schlomilch { alpha, .. }
            | Kind::DirichletMixture { alpha, .. }
            | Kind::SchlomilchMixture { alpha, .. }
            | Kind::InverseSchlomilch { alpha, .. }
            | Kind::Superellipsoid { alpha, .. } => alpha.clone(),
            Kind::G4b { alpha1, alpha2, .. } => vec![*alpha1, *alpha2],
        }
    }

    /// Log normalization constant (the x-free part of the log-density).
    pub fn ln_norm(&self) -> f64 {
        self.ln_norm
    }

    pub fn log_pdf(&self, x: &[f64]) -> Result<f64> {
        if let Kind::Superellipsoid { a, b, c, .. } = &self.kind {
            check_len(x, self.point_len(), "point")?;
            if x.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                return domain("superellipsoid coordinates must be positive");
            }
            let used: f64 = (0..x.len()).map(|i| (1.0 - c[i]) * (x[i] / b[i]).powf(a[i])).sum();
            if !(used < 1.0) {
                return domain("point lies outside the superellipsoid orthant");
            }
            return Ok(self.ln_pdf_unchecked(x));
        }
        check_simplex_point(x, self.k())?;
        Ok(self.ln_pdf_unchecked(x))
    }

    pub fn pdf(&self, x: &[f64]) -> Result<f64> {
        Ok(self.log_pdf(x)?.exp())
    }

    /// Log-density without domain checks; the caller guarantees an interior
    /// point of the right length.
    pub fn ln_pdf_unchecked(&self, x: &[f64]) -> f64 {
        let c0 = self.ln_norm;
        match &self.kind {
            Kind::Dirichlet { alpha } => c0 + alpha.iter().zip(x).map(|(a, xi)| (a - 1.0) * xi.ln()).sum::<f64>(),
            Kind::Schlomilch { alpha, beta, tau } => {
                let ap: f64 = alpha.iter().sum();
                let den = match (all_equal(beta), *tau == 1.0) {
                    (true, true) => 0.0,
                    (true, false) => ln_power_form(&vec![1.0; x.len()], x, *tau),
                    _ => ln_power_form(beta, x, *tau),
                };
                c0 + alpha.iter().zip(x).map(|(a, xi)| (tau * a - 1.0) * xi.ln()).sum::<f64>() - ap * den
            }
            Kind::DirichletMixture { alpha, gamma, n, sigma } => {
                c0 + *n as f64 * ln_power_form(gamma, x, *sigma)
                    + alpha.iter().zip(x).map(|(a, xi)| (a - 1.0) * xi.ln()).sum::<f64>()
            }
            Kind::SchlomilchMixture { alpha, beta, gamma, n, sigma, tau } => {
                let ap: f64 = alpha.iter().sum();
                let num_w: Vec<f64> = beta.iter().zip(gamma).map(|(b, g)| b.powf(*sigma) * g).collect();
                let num = ln_power_form(&num_w, x, sigma * tau);
                let den = ln_power_form(beta, x, *tau);
                c0 + *n as f64 * num
                    + alpha.iter().zip(x).map(|(a, xi)| (tau * a - 1.0) * xi.ln()).sum::<f64>()
                    - (ap + sigma * *n as f64) * den
            }
            Kind::InverseSchlomilch { alpha, beta, tau } => {
                let ap: f64 = alpha.iter().sum();
                let den = ln_power_form(beta, x, -tau);
                c0 - ap * den - alpha.iter().zip(x).map(|(a, xi)| (tau * a + 1.0) * xi.ln()).sum::<f64>()
            }
            Kind::G4b { alpha1, alpha2, kappa, lambda, .. } => {
                c0 + (alpha1 - 1.0) * x[0].ln() + (alpha2 - 1.0) * x[1].ln() - kappa * (lambda * x[0] + x[1]).ln()
            }
            Kind::Superellipsoid { alpha, a, b, c, .. } => {
                let m = x.len();
                let ak = alpha[m];
                let ap: f64 = alpha.iter().sum();
                let mut used = 0.0;
                let mut tilt = 0.0;
                let mut s = c0;
                for i in 0..m {
                    let r = (x[i] / b[i]).powf(a[i]);
                    used += (1.0 - c[i]) * r;
                    tilt += c[i] * r;
                    s += (a[i] * alpha[i] - 1.0) * x[i].ln();
                }
                s + (ak - 1.0) * (-used).ln_1p() - ap * tilt.ln_1p()
            }
        }
    }

    /// Endpoint behavior of the density near simplex faces, for quadrature.
    pub fn face_model(&self) -> FaceModel {
        match &self.kind {
            Kind::Dirichlet { alpha } | Kind::DirichletMixture { alpha, .. } => {
                FaceModel::Separable(alpha.iter().map(|a| a - 1.0).collect())
            }
            Kind::Schlomilch { alpha, tau, .. } | Kind::SchlomilchMixture { alpha, tau, .. } => {
                FaceModel::Separable(alpha.iter().map(|a| tau * a - 1.0).collect())
            }
            Kind::InverseSchlomilch { alpha, tau, .. } => {
                let alpha = alpha.clone();
                let tau = *tau;
                let ap: f64 = alpha.iter().sum();
                FaceModel::General(Arc::new(move |set: &[usize]| {
                    tau * (ap - set.iter().map(|&i| alpha[i]).sum::<f64>()) - 1.0
                }))
            }
            Kind::G4b { alpha1, alpha2, .. } => FaceModel::Separable(vec![alpha1 - 1.0, alpha2 - 1.0]),
            Kind::Superellipsoid { .. } => {
                // simplex image: the tied Schlömilch law
                self.superellipsoid_base().expect("validated").face_model()
            }
        }
    }

    /// Grading power for quadrature of the density: 1 when all powers of x
    /// are integers, 4 otherwise.
    pub fn grading(&self) -> u32 {
        let integral = |v: f64| v.fract() == 0.0;
        let ok = match &self.kind {
            Kind::Dirichlet { .. } | Kind::G4b { .. } => true,
            Kind::Schlomilch { tau, .. } | Kind::InverseSchlomilch { tau, .. } => integral(*tau),
            Kind::DirichletMixture { sigma, .. } => integral(*sigma),
            Kind::SchlomilchMixture { sigma, tau, .. } => integral(*tau) && integral(sigma * tau),
            Kind::Superellipsoid { .. } => true,
        };
        if ok {
            1
        } else {
            4
        }
    }

    /// The Schlömilch law S(α, β, 1) with βᵢ = β_K/(1 − cᵢ) whose image under
    /// [`superellipsoid_map`] is this superellipsoid family.
    pub fn superellipsoid_base(&self) -> Result<FamilyParams> {
        match &self.kind {
            Kind::Superellipsoid { alpha, c, beta_k, .. } => {
                let mut beta: Vec<f64> = c.iter().map(|ci| beta_k / (1.0 - ci)).collect();
                beta.push(*beta_k);
                FamilyParams::schlomilch(alpha.clone(), beta, 1.0)
            }
            _ => domain("not a superellipsoid family"),
        }
    }

    /// Finite Schlömilch-mixture decomposition of a G4B law with κ = α₊ + n.
    pub fn g4b_decompose(&self) -> Result<Vec<(f64, FamilyParams)>> {
        match &self.kind {
            Kind::G4b { alpha1, alpha2, lambda, n, .. } => {
                let n = n.ok_or_else(|| {
                    Error::Unsupported("G4B decomposition needs kappa - alpha1 - alpha2 to be a non-negative integer".into())
                })?;
                let logs = g4b_log_terms(*alpha1, *alpha2, n, *lambda);
                let norm = log_sum_exp(&logs);
                let beta = vec![lambda / (lambda + 1.0), 1.0 / (lambda + 1.0)];
                (0..=n)
                    .map(|k| {
                        let comp = FamilyParams::schlomilch(
                            vec![alpha1 + k as f64, alpha2 + (n - k) as f64],
                            beta.clone(),
                            1.0,
                        )?;
                        Ok(((logs[k as usize] - norm).exp(), comp))
                    })
                    .collect()
            }
            _ => domain("not a G4B family"),
        }
    }
}

/// ln Σ wᵢ xᵢ^p computed as a log-sum-exp of ln wᵢ + p ln xᵢ.
fn all_equal(v: &[f64]) -> bool {
    v.iter().all(|&b| b == v[0])
}

fn ln_power_form(w: &[f64], x: &[f64], p: f64) -> f64 {
    let mut max = f64::NEG_INFINITY;
    let mut terms = [0.0f64; 64];
    let k = w.len();
    if k > terms.len() {
        let v: Vec<f64> = w.iter().zip(x).map(|(wi, xi)| wi.ln() + p * xi.ln()).collect();
        return log_sum_exp(&v);
    }
    for i in 0..k {
        let t = w[i].ln() + p * x[i].ln();
        terms[i] = t;
        max = max.max(t);
    }
    let s: f64 = terms[..k].iter().map(|t| (t - max).exp()).sum();
    max + s.ln()
}

pub fn check_simplex_point(x: &[f64], k: usize) -> Result<()> {
    if x.len() != k {
        return domain(format!("point has {} coordinates, expected {k}", x.len()));
    }
    if x.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return domain("point must lie in the open simplex (all coordinates > 0)");
    }
    let s: f64 = x.iter().sum();
    if (s - 1.0).abs() > SIMPLEX_SUM_TOL {
        return domain(format!("coordinates sum to {s}, not 1"));
    }
    Ok(())
}

/// Duality map between simplex variables:
/// forward yᵢ = βᵢxᵢ^τ / Σβⱼxⱼ^τ, inverse xᵢ ∝ (yᵢ/βᵢ)^{1/τ}.
pub fn dual_transform(x: &[f64], beta: &[f64], tau: f64, direction: Direction) -> Result<Vec<f64>> {
    check_simplex_point(x, beta.len())?;
    check_positive(beta, "beta")?;
    check_scalar(tau, "tau")?;
    let logits: Vec<f64> = match direction {
        Direction::Forward => x.iter().zip(beta).map(|(xi, b)| b.ln() + tau * xi.ln()).collect(),
        Direction::Inverse => x.iter().zip(beta).map(|(yi, b)| (yi.ln() - b.ln()) / tau).collect(),
    };
    Ok(softmax(&logits))
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

/// Maps simplex coordinates to the superellipsoid orthant,
/// xᵢ = bᵢ (sᵢ/(1 − cᵢ))^{1/aᵢ} for i < K.
pub fn superellipsoid_map(s: &[f64], a: &[f64], b: &[f64], c: &[f64]) -> Result<Vec<f64>> {
    check_simplex_point(s, a.len() + 1)?;
    check_len(b, a.len(), "b")?;
    check_len(c, a.len(), "c")?;
    if c.iter().any(|&v| !(v < 1.0)) {
        return domain("c entries must be below 1");
    }
    Ok((0..a.len())
        .map(|i| b[i] * ((s[i].ln() - (1.0 - c[i]).ln()) / a[i]).exp())
        .collect())
}

/// Mixture weights over compositions of n (see [`normalization::mixture_weights`]).
pub fn mixture_weights(alpha: &[f64], gamma: &[f64], n: u32, sigma: f64) -> Result<(Vec<Vec<u32>>, Vec<f64>)> {
    if n == 0 {
        return domain("mixture weights need n >= 1");
    }
    normalization::mixture_weights(&NormalizationQuery::new(alpha.to_vec(), gamma.to_vec(), n, sigma)?)
}

impl fmt::Display for FamilyParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(K={})", self.name(), self.k())
    }
}

#[cfg(test)]
mod tests;

impl FamilyParams {
    /// ∫ pdf by simplex quadrature.
    pub fn total_mass(&self, rel_tol: f64) -> Result<crate::quadrature::QuadratureResult> {
        self.expectation(&|_| 1.0, rel_tol)
    }

    /// E g(X) by simplex quadrature; for the superellipsoid family `g` sees
    /// the K − 1 orthant coordinates and the integral runs over their simplex
    /// preimage.
    pub fn expectation(
        &self,
        g: &(dyn Fn(&[f64]) -> f64 + Sync),
        rel_tol: f64,
    ) -> Result<crate::quadrature::QuadratureResult> {
        use crate::quadrature::{integrate_simplex, QuadratureSpec};
        let k = self.k();
        let f = |s: &[f64]| -> f64 {
            match &self.kind {
                Kind::Superellipsoid { a, b, c, .. } => {
                    let mut x = [0.0f64; 16];
                    let mut ln_jac = 0.0;
                    for i in 0..k - 1 {
                        let lx = b[i].ln() + (s[i].ln() - (1.0 - c[i]).ln()) / a[i];
                        x[i] = lx.exp();
                        ln_jac += lx - a[i].ln() - s[i].ln();
                    }
                    g(&x[..k - 1]) * (self.ln_pdf_unchecked(&x[..k - 1]) + ln_jac).exp()
                }
                _ => g(s) * self.ln_pdf_unchecked(s).exp(),
            }
        };
        let spec = QuadratureSpec::new(k, &f)
            .face_model(self.face_model())
            .grading(self.grading())
            .rel_tol(rel_tol);
        integrate_simplex(&spec)
    }
}
