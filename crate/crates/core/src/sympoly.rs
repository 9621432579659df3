//! Power sums, α-deformed complete homogeneous symmetric polynomials, their
//! fractional-degree extension and the B-spline measure.

use std::ops::{Add, Div, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_simplex, rules::gauss_legendre, QuadratureSpec};
use crate::specialfn::{ln_binomial, ln_gamma};

/// Scalars usable by the exact and floating Newton recursions.
pub trait Scalar:
    Clone + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn from_u64(n: u64) -> Self;
}

impl Scalar for f64 {
    fn from_u64(n: u64) -> Self {
        n as f64
    }
}

impl Scalar for BigRational {
    fn from_u64(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

/// Deformation weights α (positive) and arguments γ.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedVector {
    alpha: Vec<f64>,
    gamma: Vec<f64>,
}

impl WeightedVector {
    pub fn new(alpha: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if alpha.len() != gamma.len() || alpha.is_empty() {
            return domain("alpha and gamma must be non-empty and of equal length");
        }
        if alpha.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return domain("alpha must be strictly positive");
        }
        if gamma.iter().any(|g| !g.is_finite()) {
            return domain("gamma must be finite");
        }
        Ok(WeightedVector { alpha, gamma })
    }

    /// Unit weights.
    pub fn standard(gamma: Vec<f64>) -> Result<Self> {
        Self::new(vec![1.0; gamma.len()], gamma)
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }
}

/// p_d(α, γ) = Σ αⱼ γⱼ^d.
pub fn power_sum(w: &WeightedVector, d: u32) -> f64 {
    w.alpha.iter().zip(&w.gamma).map(|(a, g)| a * g.powi(d as i32)).sum()
}

/// Power sums p₁..p_n for any scalar type.
pub fn power_sums<T: Scalar>(alpha: &[T], gamma: &[T], n: usize) -> Vec<T> {
    let mut pows: Vec<T> = gamma.to_vec();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut s = T::zero();
        for (a, g) in alpha.iter().zip(&pows) {
            s = s + a.clone() * g.clone();
        }
        out.push(s);
        for (pw, g) in pows.iter_mut().zip(gamma) {
            *pw = pw.clone() * g.clone();
        }
    }
    out
}

/// h₀..h_n from power sums p₁..p_n by h_n = (1/n) Σ_{m=1}^{n} p_m h_{n−m}.
pub fn newton_h<T: Scalar>(p: &[T], n: usize) -> Vec<T> {
    assert!(p.len() >= n, "need at least n power sums");
    let mut h = Vec::with_capacity(n + 1);
    h.push(T::one());
    for k in 1..=n {
        let mut s = T::zero();
        for m in 1..=k {
            s = s + p[m - 1].clone() * h[k - m].clone();
        }
        h.push(s / T::from_u64(k as u64));
    }
    h
}

/// h_n(α, γ) by the Newton recursion.
pub fn deformed_h(w: &WeightedVector, n: u32) -> f64 {
    deformed_h_all(w, n)[n as usize]
}

/// h₀..h_n(α, γ).
pub fn deformed_h_all(w: &WeightedVector, n: u32) -> Vec<f64> {
    let p = power_sums(&w.alpha, &w.gamma, n as usize);
    newton_h(&p, n as usize)
}

/// Exact h_n over the rationals.
pub fn deformed_h_exact(alpha: &[BigRational], gamma: &[BigRational], n: u32) -> BigRational {
    let p = power_sums(alpha, gamma, n as usize);
    newton_h(&p, n as usize).pop().unwrap()
}

/// Complete homogeneous symmetric polynomial h_n(γ).
pub fn standard_h(gamma: &[f64], n: u32) -> Result<f64> {
    Ok(deformed_h(&WeightedVector::standard(gamma.to_vec())?, n))
}

/// Complete homogeneous symmetric mean q_n(γ) = h_n(γ) / C(n+K−1, n).
pub fn symmetric_mean_q(gamma: &[f64], n: u32) -> Result<f64> {
    let k = gamma.len() as u64;
    let h = standard_h(gamma, n)?;
    Ok(h / ln_binomial(n as u64 + k - 1, n as u64).exp())
}

const SIMPLEX_TOL: f64 = 1e-12;

fn check_fractional(x: &[f64], z: f64) -> Result<()> {
    if x.is_empty() {
        return domain("fractional_h needs at least one argument");
    }
    if x.iter().any(|v| !v.is_finite()) || !z.is_finite() {
        return domain("fractional_h needs finite arguments");
    }
    let all_pos = x.iter().all(|&v| v > 0.0);
    let all_neg = x.iter().all(|&v| v < 0.0);
    let integer = z.fract() == 0.0;
    if !all_pos && !integer {
        return Err(Error::BranchAmbiguity(format!(
            "non-positive arguments with non-integer degree {z} need a logarithm branch"
        )));
    }
    if z < 0.0 && !(all_pos || all_neg) {
        return Err(Error::NonIntegrable(format!(
            "linear form vanishes inside the simplex and degree {z} is negative"
        )));
    }
    Ok(())
}

/// ∫_{S_K} (Σ Xⱼxⱼ)^z d^{K−1}x as the divided difference
/// [X₁,…,X_K] t^{z+K−1} / ∏(z+i), when its rounding bound is below `rel_tol`.
fn divided_difference_integral(x: &[f64], z: f64, rel_tol: f64) -> Option<f64> {
    let k = x.len();
    let integer = z.fract() == 0.0;
    let (a, sign): (Vec<f64>, f64) = if x.iter().all(|&v| v > 0.0) {
        (x.to_vec(), 1.0)
    } else if integer && x.iter().all(|&v| v < 0.0) {
        (x.iter().map(|v| -v).collect(), if (z as i64) % 2 == 0 { 1.0 } else { -1.0 })
    } else {
        return None;
    };
    let mut pref = 1.0;
    let mut pref_err = 0.0;
    for i in 1..k {
        let f = z + i as f64;
        if f.abs() < 1e-3 {
            return None;
        }
        pref *= f;
        pref_err += (z.abs() + i as f64) / f.abs();
    }
    let p = z + (k - 1) as f64;
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    for i in 0..k {
        let mut den = 1.0;
        for j in 0..k {
            if j != i {
                let d = a[i] - a[j];
                if d == 0.0 {
                    return None;
                }
                den *= d;
            }
        }
        let t = a[i].powf(p) / den;
        sum += t;
        abs_sum += t.abs();
    }
    let bound = (4.0 * k as f64 * abs_sum / sum.abs() + pref_err) * f64::EPSILON;
    if !(bound <= rel_tol) {
        return None;
    }
    Some(sign * sum / pref)
}

/// ∫_{S_K} (Σ Xⱼxⱼ)^z d^{K−1}x, by divided differences when well conditioned,
/// else by simplex quadrature.
fn linear_form_integral(x: &[f64], z: f64, rel_tol: f64) -> Result<f64> {
    if let Some(v) = divided_difference_integral(x, z, rel_tol) {
        return Ok(v);
    }
    linear_form_quadrature(x, z, rel_tol)
}

fn linear_form_quadrature(x: &[f64], z: f64, rel_tol: f64) -> Result<f64> {
    let k = x.len();
    let integer = z.fract() == 0.0;
    let zi = z as i32;
    let f = |y: &[f64]| {
        let s: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        if integer && zi.abs() < 1000 {
            s.powi(zi)
        } else {
            s.powf(z)
        }
    };
    let res = integrate_simplex(&QuadratureSpec::new(k, &f).rel_tol(rel_tol))?;
    Ok(res.value)
}

/// Fractional-degree h_z(X) = ∏_{i=1}^{K−1}(z+i) · ∫_{S_K} (Σ Xⱼxⱼ)^z; for K = 1
/// this is X₁^z.
pub fn fractional_h(x: &[f64], z: f64) -> Result<f64> {
    fractional_h_tol(x, z, SIMPLEX_TOL)
}

pub fn fractional_h_tol(x: &[f64], z: f64, rel_tol: f64) -> Result<f64> {
    check_fractional(x, z)?;
    let k = x.len();
    if k == 1 {
        return Ok(x[0].powf(z));
    }
    let pref: f64 = (1..k).map(|i| z + i as f64).product();
    if pref == 0.0 {
        return Ok(0.0);
    }
    Ok(pref * linear_form_integral(x, z, rel_tol)?)
}

/// Fractional symmetric mean q_z(X) = (K−1)! ∫_{S_K} (Σ Xⱼxⱼ)^z.
pub fn fractional_q(x: &[f64], z: f64) -> Result<f64> {
    check_fractional(x, z)?;
    let k = x.len();
    if k == 1 {
        return Ok(x[0].powf(z));
    }
    Ok(ln_gamma(k as f64).exp() * linear_form_integral(x, z, SIMPLEX_TOL)?)
}

fn check_knots(z: &[f64]) -> Result<()> {
    if z.len() < 2 {
        return domain("B-spline needs at least two knots");
    }
    if z.iter().any(|v| !v.is_finite()) {
        return domain("knots must be finite");
    }
    let mut s = z.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if s.windows(2).any(|w| w[0] == w[1]) {
        return domain("knots must be pairwise distinct");
    }
    Ok(())
}

/// B-spline density F(x; z) = (K−1) Σᵢ (zᵢ−x)₊^{K−2} / ∏_{j≠i}(zᵢ−zⱼ).
pub fn bspline_f(x: f64, z: &[f64]) -> Result<f64> {
    check_knots(z)?;
    Ok(bspline_unchecked(x, z))
}

fn bspline_unchecked(x: f64, z: &[f64]) -> f64 {
    let k = z.len();
    let lo = z.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(x > lo && x < hi) {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..k {
        let plus = if z[i] > x {
            if k == 2 {
                1.0
            } else {
                (z[i] - x).powi(k as i32 - 2)
            }
        } else {
            0.0
        };
        if plus == 0.0 {
            continue;
        }
        let den: f64 = (0..k).filter(|&j| j != i).map(|j| z[i] - z[j]).product();
        s += plus / den;
    }
    (k as f64 - 1.0) * s
}

/// ∫ xⁿ F(x; z) dx, exact piecewise Gauss–Legendre between sorted knots.
pub fn bspline_moment(z: &[f64], n: u32) -> Result<f64> {
    check_knots(z)?;
    let mut s = z.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let order = (n as usize + z.len()) / 2 + 2;
    let rule = gauss_legendre(order);
    let mut acc = 0.0;
    for w in s.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h = b - a;
        for (u, wt) in rule.nodes.iter().zip(&rule.weights) {
            let x = a + h * u;
            acc += wt * h * x.powi(n as i32) * bspline_unchecked(x, z);
        }
    }
    Ok(acc)
}

/// Explicit partition-sum evaluation of h_n, kept as an independent oracle for
/// the Newton recursion.
pub mod reference {
    use super::Scalar;

    /// Partitions of n as multiplicity vectors (m₁, …, m_n) with Σ d·m_d = n,
    /// in lexicographic order.
    pub fn partitions(n: usize) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut m = vec![0u32; n];
        fn rec(d: usize, remaining: usize, m: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            let n = m.len();
            if d == n {
                if remaining == 0 {
                    out.push(m.clone());
                }
                return;
            }
            let step = d + 1;
            for c in 0..=(remaining / step) {
                m[d] = c as u32;
                rec(d + 1, remaining - c * step, m, out);
            }
            m[d] = 0;
        }
        if n == 0 {
            out.push(Vec::new());
            return out;
        }
        rec(0, n, &mut m, &mut out);
        out
    }

    /// h_n = Σ_partitions ∏_d p_d^{m_d} / (m_d! d^{m_d}).
    pub fn h_partition_sum<T: Scalar>(p: &[T], n: usize) -> T {
        let mut total = T::zero();
        for m in partitions(n) {
            let mut term = T::one();
            for (idx, &md) in m.iter().enumerate() {
                let d = (idx + 1) as u64;
                for j in 1..=md as u64 {
                    term = term * p[idx].clone() / (T::from_u64(j) * T::from_u64(d));
                }
            }
            total = total + term;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn divided_difference_matches_quadrature() {
        let cases: [(&[f64], f64); 5] = [
            (&[0.4, 1.1, 1.9], -2.7),
            (&[0.5, 0.9, 1.6, 2.0], 1.3),
            (&[-0.6, -1.2, -1.9], -4.0),
            (&[0.3, 0.8, 1.2, 1.5, 2.0], -0.4),
            (&[1.0, 3.0], 5.5),
        ];
        for (x, z) in cases {
            let fast = divided_difference_integral(x, z, 1e-10).expect("well separated");
            let quad = linear_form_quadrature(x, z, 1e-13).unwrap();
            assert_relative_eq!(fast, quad, max_relative = 1e-11);
        }
        assert!(divided_difference_integral(&[1.0, 1.0 + 1e-9, 2.0], 0.5, 1e-12).is_none());
        assert!(divided_difference_integral(&[1.0, 2.0, 3.0], -1.0 + 1e-6, 1e-12).is_none());
    }

    #[test]
    fn power_sum_examples() {
        let w = WeightedVector::new(vec![1.0; 3], vec![1.0; 3]).unwrap();
        assert_eq!(power_sum(&w, 2), 3.0);
        let w = WeightedVector::new(vec![2.0, 3.0], vec![1.0, -1.0]).unwrap();
        assert_eq!(power_sum(&w, 3), -1.0);
        assert!(WeightedVector::new(vec![0.0], vec![1.0]).is_err());
    }

    #[test]
    fn low_degree_h() {
        let w = WeightedVector::new(vec![0.5, 2.0, 1.5], vec![0.3, -1.2, 2.0]).unwrap();
        let p1 = power_sum(&w, 1);
        let p2 = power_sum(&w, 2);
        assert_eq!(deformed_h(&w, 0), 1.0);
        assert_relative_eq!(deformed_h(&w, 1), p1, max_relative = 1e-15);
        assert_relative_eq!(deformed_h(&w, 2), 0.5 * (p1 * p1 + p2), max_relative = 1e-15);
        let g = [2.0, 3.0, 5.0];
        assert_eq!(standard_h(&g, 1).unwrap(), 10.0);
        assert_eq!(standard_h(&g, 2).unwrap(), 4.0 + 9.0 + 25.0 + 6.0 + 10.0 + 15.0);
    }

    #[test]
    fn symmetric_mean_of_ones() {
        for k in 1..=6 {
            for n in 0..=10 {
                assert_relative_eq!(symmetric_mean_q(&vec![1.0; k], n).unwrap(), 1.0, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn partition_counts() {
        let counts: Vec<usize> = (0..=10).map(|n| reference::partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]);
        assert_eq!(reference::partitions(3), vec![vec![0, 0, 1], vec![1, 1, 0], vec![3, 0, 0]]);
    }

    #[test]
    fn newton_equals_partition_sum_exactly() {
        let alpha = vec![rat(1, 2), rat(3, 1), rat(7, 5), rat(2, 3)];
        let gamma = vec![rat(-2, 3), rat(1, 1), rat(5, 4), rat(1, 7)];
        let p = power_sums(&alpha, &gamma, 10);
        let h = newton_h(&p, 10);
        for n in 0..=10 {
            assert_eq!(h[n], reference::h_partition_sum(&p, n));
        }
    }

    #[test]
    fn h_counts_weighted_compositions() {
        // h_n(α, γ) = Σ_{|m|=n} ∏ (αᵢ)_{mᵢ}/mᵢ! γᵢ^{mᵢ}; check K=2 directly
        let (a, b, g1, g2) = (0.7, 1.9, 1.3, 0.4);
        let w = WeightedVector::new(vec![a, b], vec![g1, g2]).unwrap();
        for n in 0..8u32 {
            let mut s = 0.0;
            for m in 0..=n {
                let c1 = crate::specialfn::pochhammer(a, m) / crate::specialfn::pochhammer(1.0, m);
                let c2 = crate::specialfn::pochhammer(b, n - m) / crate::specialfn::pochhammer(1.0, n - m);
                s += c1 * c2 * g1.powi(m as i32) * g2.powi((n - m) as i32);
            }
            assert_relative_eq!(deformed_h(&w, n), s, max_relative = 1e-13);
        }
    }

    #[test]
    fn fractional_h_examples() {
        assert_relative_eq!(fractional_h(&[2.0, 3.0], 2.0).unwrap(), 19.0, max_relative = 1e-10);
        assert_eq!(fractional_h(&[2.0, 3.0, 4.0], -1.0).unwrap(), 0.0);
        assert_eq!(fractional_h(&[2.0, 3.0, 4.0], -2.0).unwrap(), 0.0);
        assert_relative_eq!(fractional_h(&[3.0], 0.7).unwrap(), 3f64.powf(0.7), max_relative = 1e-15);
        assert!(matches!(fractional_h(&[1.0, -1.0], 0.5), Err(Error::BranchAmbiguity(_))));
        assert!(matches!(fractional_h(&[1.0, -1.0], -3.0), Err(Error::NonIntegrable(_))));
        assert_relative_eq!(
            fractional_h(&[1.0, -2.0, 0.5], 3.0).unwrap(),
            standard_h(&[1.0, -2.0, 0.5], 3).unwrap(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn fractional_h_k2_closed_form() {
        // K = 2: h_z(X) = (X₁^{z+1} − X₂^{z+1}) / (X₁ − X₂)
        let (a, b, z): (f64, f64, f64) = (2.5, 0.7, -0.4);
        let exact = (a.powf(z + 1.0) - b.powf(z + 1.0)) / (a - b);
        assert_relative_eq!(fractional_h(&[a, b], z).unwrap(), exact, max_relative = 1e-11);
    }

    #[test]
    fn negative_even_degree_same_sign_odd_k() {
        // For same-sign arguments, odd K and K < 2n the value is positive.
        for x in [[1.0, 1.0, 1.0], [-0.5, -2.0, -1.0], [0.3, 2.0, 1.1]] {
            for n in 2..=3 {
                assert!(fractional_h(&x, -2.0 * n as f64).unwrap() > 0.0);
            }
        }
        assert_relative_eq!(fractional_h(&[1.0, 1.0, 1.0], -4.0).unwrap(), 3.0, max_relative = 1e-10);
    }

    #[test]
    fn bspline_examples() {
        assert_relative_eq!(bspline_f(0.3, &[0.0, 1.0]).unwrap(), 1.0, max_relative = 1e-15);
        assert_eq!(bspline_f(5.0, &[0.0, 1.0, 3.0]).unwrap(), 0.0);
        assert_eq!(bspline_f(-1.0, &[0.0, 1.0, 3.0]).unwrap(), 0.0);
        assert!(bspline_f(0.5, &[0.0, 1.0, 1.0]).is_err());
        assert_relative_eq!(bspline_moment(&[0.0, 1.0, 3.0], 0).unwrap(), 1.0, max_relative = 1e-13);
        assert_relative_eq!(bspline_moment(&[0.0, 1.0], 1).unwrap(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(
            bspline_moment(&[1.0, 2.0, 4.0], 3).unwrap(),
            symmetric_mean_q(&[1.0, 2.0, 4.0], 3).unwrap(),
            max_relative = 1e-12
        );
        let total = crate::quadrature::integrate_01(
            &|u| bspline_f(3.0 * u, &[0.0, 1.0, 3.0]).unwrap() * 3.0,
            0.0,
            0.0,
            1e-6,
        )
        .unwrap();
        assert_relative_eq!(total.value, 1.0, max_relative = 1e-5);
    }

    proptest! {
        #[test]
        fn newton_matches_partitions_in_floats(
            alpha in prop::collection::vec(0.1f64..3.0, 1..=6),
            seed in prop::collection::vec(-2.0f64..2.0, 6),
            n in 0usize..=10,
        ) {
            let gamma: Vec<f64> = seed[..alpha.len()].to_vec();
            let p = power_sums(&alpha, &gamma, 10);
            let h = newton_h(&p, n)[n];
            let r = reference::h_partition_sum(&p, n);
            let scale: f64 = reference::h_partition_sum(
                &power_sums(&alpha, &gamma.iter().map(|g| g.abs()).collect::<Vec<_>>(), 10), n);
            prop_assert!((h - r).abs() <= 1e-12 * scale.max(1.0));
        }

        #[test]
        fn homogeneity(
            alpha in prop::collection::vec(0.1f64..3.0, 1..=5),
            gamma in prop::collection::vec(0.05f64..2.0, 5),
            lambda in 0.1f64..4.0,
            n in 0u32..=8,
        ) {
            let k = alpha.len();
            let w = WeightedVector::new(alpha.clone(), gamma[..k].to_vec()).unwrap();
            let ws = WeightedVector::new(alpha, gamma[..k].iter().map(|g| g * lambda).collect()).unwrap();
            let lhs = deformed_h(&ws, n);
            let rhs = lambda.powi(n as i32) * deformed_h(&w, n);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
        }

        #[test]
        fn hunter_positivity(x in prop::collection::vec(-3.0f64..3.0, 1..=6), n in 1u32..=5) {
            prop_assert!(standard_h(&x, 2 * n).unwrap() >= 0.0);
        }
    }
}
