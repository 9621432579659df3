//! Numerical integration over the probability simplex
//! S_K = {x ∈ (0,1)^K : Σ xᵢ = 1} against Dirichlet-type endpoint behavior.
//!
//! The simplex is mapped to the unit cube by stick-breaking,
//! x₁ = t₁, x₂ = (1 − t₁) t₂, …, x_K = ∏(1 − t_j), and each cube axis gets
//! Gauss–Jacobi nodes matching the endpoint exponents implied by the
//! [`FaceModel`].

mod cube;
pub mod rules;

use std::fmt;
use std::sync::Arc;

pub use cube::{Axis, CubeFn};

use crate::error::{domain, Error, Result};

/// Integration strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Tensor Gauss–Jacobi for K ≤ 6, quasi-random otherwise.
    Auto,
    TensorGauss,
    Adaptive,
    QuasiRandom,
    PlainMc,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Auto => "auto",
            Method::TensorGauss => "tensor-gauss",
            Method::Adaptive => "adaptive",
            Method::QuasiRandom => "quasi-random",
            Method::PlainMc => "plain-mc",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evals: usize,
    pub converged: bool,
    pub method: Method,
}

/// Endpoint behavior of the integrand near the faces of the simplex.
#[derive(Clone)]
pub enum FaceModel {
    /// Weight ∏ xᵢ^{aᵢ}.
    Separable(Vec<f64>),
    /// Exponent of the integrand mass as the coordinate set J jointly tends
    /// to zero, i.e. the measure of {x_J < ε} behaves like ε^{φ(J)+1}.
    General(Arc<dyn Fn(&[usize]) -> f64 + Send + Sync>),
}

impl fmt::Debug for FaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaceModel::Separable(a) => f.debug_tuple("Separable").field(a).finish(),
            FaceModel::General(_) => f.write_str("General(..)"),
        }
    }
}

impl FaceModel {
    fn phi(&self, set: &[usize]) -> f64 {
        match self {
            FaceModel::Separable(a) => set.iter().map(|&i| a[i] + 1.0).sum::<f64>() - 1.0,
            FaceModel::General(g) => g(set),
        }
    }

    /// Cube exponents (left, right) of axis j under the identity stick order.
    fn axis_exponents(&self, k: usize) -> Vec<(f64, f64)> {
        (0..k - 1)
            .map(|j| {
                let tail: Vec<usize> = (j + 1..k).collect();
                (self.phi(&[j]), self.phi(&tail))
            })
            .collect()
    }
}

pub type SimplexFn<'a> = dyn Fn(&[f64]) -> f64 + Sync + 'a;

/// Request for [`integrate_simplex`].
///
/// In full mode (`reduced == false`) `integrand` is the complete function to
/// integrate and the engine divides out the Jacobi weight. In reduced mode
/// `integrand` is the smooth factor and the weight ∏ xᵢ^{aᵢ} is implied.
pub struct QuadratureSpec<'a> {
    pub dimension: usize,
    pub integrand: &'a SimplexFn<'a>,
    pub jacobi_exponents: Option<Vec<f64>>,
    pub face_model: Option<FaceModel>,
    pub reduced: bool,
    pub grading: u32,
    pub rel_tol: f64,
    pub method: Method,
    pub max_evals: usize,
    pub seed: u64,
}

pub const DEFAULT_REL_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_EVALS: usize = 1 << 23;
const QMC_AUTO_POINTS: usize = 1 << 20;
const MAX_DIMENSION: usize = 12;

impl<'a> QuadratureSpec<'a> {
    pub fn new(dimension: usize, integrand: &'a SimplexFn<'a>) -> Self {
        QuadratureSpec {
            dimension,
            integrand,
            jacobi_exponents: None,
            face_model: None,
            reduced: false,
            grading: 1,
            rel_tol: DEFAULT_REL_TOL,
            method: Method::Auto,
            max_evals: DEFAULT_MAX_EVALS,
            seed: 0x5eed,
        }
    }

    pub fn exponents(mut self, a: Vec<f64>) -> Self {
        self.jacobi_exponents = Some(a);
        self
    }

    pub fn face_model(mut self, m: FaceModel) -> Self {
        self.face_model = Some(m);
        self
    }

    pub fn reduced(mut self, yes: bool) -> Self {
        self.reduced = yes;
        self
    }

    pub fn grading(mut self, q: u32) -> Self {
        self.grading = q.max(1);
        self
    }

    pub fn rel_tol(mut self, t: f64) -> Self {
        self.rel_tol = t;
        self
    }

    pub fn method(mut self, m: Method) -> Self {
        self.method = m;
        self
    }

    pub fn max_evals(mut self, n: usize) -> Self {
        self.max_evals = n;
        self
    }
}

/// Integrates over the (K−1)-dimensional simplex with respect to the Lebesgue
/// measure on the first K−1 coordinates. For K = 1 the simplex is a point and
/// the result is the integrand at x = (1).
pub fn integrate_simplex(spec: &QuadratureSpec) -> Result<QuadratureResult> {
    let k = spec.dimension;
    if k == 0 {
        return domain("simplex dimension must be at least 1");
    }
    if k > MAX_DIMENSION {
        return Err(Error::Unsupported(format!("simplex dimension {k} exceeds {MAX_DIMENSION}")));
    }
    if !(spec.rel_tol > 0.0) {
        return domain("rel_tol must be positive");
    }
    let f = spec.integrand;
    if k == 1 {
        let v = f(&[1.0]);
        return Ok(QuadratureResult {
            value: v,
            error_estimate: 0.0,
            evals: 1,
            converged: v.is_finite(),
            method: Method::TensorGauss,
        });
    }
    let model = match (&spec.face_model, &spec.jacobi_exponents) {
        (Some(m), _) => m.clone(),
        (None, Some(a)) => FaceModel::Separable(a.clone()),
        (None, None) => FaceModel::Separable(vec![0.0; k]),
    };
    let separable = match &model {
        FaceModel::Separable(a) => {
            if a.len() != k {
                return domain(format!("expected {k} Jacobi exponents, got {}", a.len()));
            }
            if a.iter().any(|&v| !(v > -1.0)) {
                return domain("Jacobi exponents must exceed -1");
            }
            Some(a.clone())
        }
        FaceModel::General(_) => {
            if spec.reduced {
                return domain("reduced mode requires separable exponents");
            }
            None
        }
    };
    let exps = model.axis_exponents(k);
    if exps.iter().any(|&(l, r)| !(l > -1.0 && r > -1.0)) {
        return Err(Error::NonIntegrable("face exponents must exceed -1".into()));
    }
    let q = spec.grading;
    let axes: Vec<Axis> = exps.iter().map(|&(l, r)| Axis::new(l, r).graded(q)).collect();
    let reduced = spec.reduced;
    let g = move |t: &[f64], c: &[f64]| -> f64 {
        let mut x = [0.0f64; MAX_DIMENSION];
        let mut rest = 1.0;
        for j in 0..k - 1 {
            x[j] = rest * t[j];
            rest *= c[j];
        }
        x[k - 1] = rest;
        let x = &x[..k];
        let v = f(x);
        if reduced || v == 0.0 {
            return v;
        }
        let ln_w = match &separable {
            Some(a) => a.iter().zip(x).map(|(ai, xi)| if *ai == 0.0 { 0.0 } else { ai * xi.ln() }).sum::<f64>(),
            None => {
                let mut s = 0.0;
                for j in 0..k - 1 {
                    let (l, r) = exps[j];
                    s += l * t[j].ln() + (r - (k - 2 - j) as f64) * c[j].ln();
                }
                s
            }
        };
        v * (-ln_w).exp()
    };
    run(&axes, &g, spec.method, spec.rel_tol, spec.max_evals, spec.seed)
}

fn run(
    axes: &[Axis],
    g: &CubeFn,
    method: Method,
    rel_tol: f64,
    max_evals: usize,
    seed: u64,
) -> Result<QuadratureResult> {
    let d = axes.len();
    let opt = cube::Options { rel_tol, max_evals };
    match method {
        Method::TensorGauss => {
            if d > 5 {
                return Err(Error::MethodUnavailable(format!(
                    "tensor Gauss-Jacobi supports K <= 6, got K = {}",
                    d + 1
                )));
            }
            Ok(cube::tensor(axes, g, &opt))
        }
        Method::Auto => {
            if d <= 5 {
                Ok(cube::tensor(axes, g, &opt))
            } else {
                let o = cube::Options { rel_tol, max_evals: QMC_AUTO_POINTS };
                Ok(cube::quasi_random(axes, g, &o, seed))
            }
        }
        Method::Adaptive => cube::adaptive(axes, g, &opt),
        Method::QuasiRandom => Ok(cube::quasi_random(axes, g, &opt, seed)),
        Method::PlainMc => Ok(cube::plain_mc(axes, g, &opt, seed)),
    }
}

/// Integrates g(t, 1 − t) ∏ t_j^{l_j}(1 − t_j)^{r_j} over the unit cube in
/// full generality; `g` sees the weight-free factor only.
pub fn integrate_cube(
    axes: &[Axis],
    g: &CubeFn,
    method: Method,
    rel_tol: f64,
    max_evals: usize,
) -> Result<QuadratureResult> {
    if axes.is_empty() {
        return domain("cube integration needs at least one axis");
    }
    if axes.iter().any(|a| !(a.left > -1.0 && a.right > -1.0)) {
        return Err(Error::NonIntegrable("axis exponents must exceed -1".into()));
    }
    run(axes, g, method, rel_tol, max_evals, 0x5eed)
}

/// ∫₀¹ u^a (1 − u)^b f(u) du.
pub fn integrate_01(
    f: &(dyn Fn(f64) -> f64 + Sync),
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<QuadratureResult> {
    integrate_unit(&|u, _| f(u), a, b, rel_tol, 1)
}

/// ∫₀¹ u^a (1 − u)^b f(u, 1 − u) du with an optional grading power; falls back
/// to adaptive subdivision when the progressive Gauss–Jacobi sequence stalls.
pub fn integrate_unit(
    f: &(dyn Fn(f64, f64) -> f64 + Sync),
    a: f64,
    b: f64,
    rel_tol: f64,
    grading: u32,
) -> Result<QuadratureResult> {
    if !(a > -1.0 && b > -1.0) {
        return Err(Error::NonIntegrable(format!(
            "weight exponents must exceed -1, got ({a}, {b})"
        )));
    }
    let axes = [Axis::new(a, b).graded(grading)];
    let g = |t: &[f64], c: &[f64]| f(t[0], c[0]);
    let opt = cube::Options { rel_tol, max_evals: 4096 };
    let first = cube::tensor(&axes, &g, &opt);
    if first.converged {
        return Ok(first);
    }
    let fallback = cube::adaptive(
        &axes,
        &g,
        &cube::Options { rel_tol, max_evals: 200_000 },
    )?;
    if fallback.converged || fallback.error_estimate < first.error_estimate {
        Ok(fallback)
    } else {
        Ok(first)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialfn::ln_multi_beta;
    use approx::assert_relative_eq;

    #[test]
    fn simplex_volume() {
        for k in 1..=6 {
            let f = |_: &[f64]| 1.0;
            let r = integrate_simplex(&QuadratureSpec::new(k, &f)).unwrap();
            let fact: f64 = (1..k).map(|i| i as f64).product();
            assert_relative_eq!(r.value, 1.0 / fact, max_relative = 1e-13);
        }
    }

    #[test]
    fn dirichlet_integral_full_and_reduced() {
        let a = vec![-0.5, 0.3, 1.2];
        let alpha: Vec<f64> = a.iter().map(|v| v + 1.0).collect();
        let exact = ln_multi_beta(&alpha).exp();
        let av = a.clone();
        let full = move |x: &[f64]| x.iter().zip(&av).map(|(xi, ai)| xi.powf(*ai)).product::<f64>();
        let r = integrate_simplex(&QuadratureSpec::new(3, &full).exponents(a.clone())).unwrap();
        assert_relative_eq!(r.value, exact, max_relative = 1e-12);
        let one = |_: &[f64]| 1.0;
        let r = integrate_simplex(&QuadratureSpec::new(3, &one).exponents(a).reduced(true)).unwrap();
        assert_relative_eq!(r.value, exact, max_relative = 1e-12);
    }

    #[test]
    fn methods_agree() {
        let a = vec![0.5, 0.0, -0.25, 0.75];
        let alpha: Vec<f64> = a.iter().map(|v| v + 1.0).collect();
        let exact = ln_multi_beta(&alpha).exp();
        let one = |_: &[f64]| 1.0;
        for m in [Method::Adaptive, Method::QuasiRandom] {
            let r = integrate_simplex(
                &QuadratureSpec::new(4, &one)
                    .exponents(a.clone())
                    .reduced(true)
                    .method(m)
                    .rel_tol(1e-6)
                    .max_evals(1 << 18),
            )
            .unwrap();
            assert_relative_eq!(r.value, exact, max_relative = 1e-4);
        }
    }

    #[test]
    fn tensor_rejects_large_k() {
        let one = |_: &[f64]| 1.0;
        let err = integrate_simplex(&QuadratureSpec::new(7, &one).method(Method::TensorGauss));
        assert!(matches!(err, Err(Error::MethodUnavailable(_))));
        let err = integrate_simplex(&QuadratureSpec::new(6, &one).method(Method::Adaptive));
        assert!(matches!(err, Err(Error::MethodUnavailable(_))));
    }

    #[test]
    fn general_face_model_matches_separable() {
        let a = vec![-0.4, 0.6, 0.1];
        let av = a.clone();
        let phi = Arc::new(move |s: &[usize]| s.iter().map(|&i| av[i] + 1.0).sum::<f64>() - 1.0);
        let aw = a.clone();
        let full = move |x: &[f64]| x.iter().zip(&aw).map(|(xi, ai)| xi.powf(*ai)).product::<f64>();
        let r = integrate_simplex(&QuadratureSpec::new(3, &full).face_model(FaceModel::General(phi))).unwrap();
        let exact = ln_multi_beta(&[0.6, 1.6, 1.1]).exp();
        assert_relative_eq!(r.value, exact, max_relative = 1e-12);
    }

    #[test]
    fn unit_interval_helper() {
        let r = integrate_01(&|u| u.exp(), -0.5, 0.0, 1e-13).unwrap();
        // ∫ u^{-1/2} e^u = √π erfi(1)
        assert_relative_eq!(r.value, 2.925_303_491_814_362, max_relative = 1e-13);
        assert!(integrate_01(&|_| 1.0, -1.0, 0.0, 1e-8).is_err());
    }
}
