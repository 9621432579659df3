//! Scalar special functions: log-gamma, digamma, trigamma, Pochhammer symbols,
//! multinomial coefficients and the Gauss hypergeometric function.
//!
//! The unchecked variants (`ln_gamma`, `psi`, `psi1`) return NaN outside their
//! domain and are meant for inner loops; the checked variants return
//! [`Error::Domain`].

use std::sync::OnceLock;

use crate::error::{domain, Error, Result};
use crate::quadrature;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_741_78;

/// B_{2k} for k = 1..=8.
const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

const ZETA_TERMS: usize = 40;

/// ζ(k) − 1 for k = 2..ZETA_TERMS+1, by direct summation with an
/// Euler–Maclaurin tail.
fn zeta_minus_one() -> &'static [f64; ZETA_TERMS] {
    static TABLE: OnceLock<[f64; ZETA_TERMS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = [0.0; ZETA_TERMS];
        let big_n = 12.0_f64;
        for (idx, slot) in out.iter_mut().enumerate() {
            let k = (idx + 2) as f64;
            let mut s = 0.0;
            // sum from n = 11 down to 2 for accuracy
            for n in (2..12).rev() {
                s += (n as f64).powf(-k);
            }
            let mut tail = big_n.powf(1.0 - k) / (k - 1.0) + 0.5 * big_n.powf(-k);
            // B_{2j}/(2j)! * k(k+1)...(k+2j-2) * N^{-k-2j+1}
            let mut rising = k;
            let mut fact = 2.0;
            for j in 1..=6 {
                let b = BERNOULLI[j - 1];
                tail += b / fact * rising * big_n.powf(-k - 2.0 * j as f64 + 1.0);
                rising *= (k + 2.0 * j as f64 - 1.0) * (k + 2.0 * j as f64);
                fact *= (2.0 * j as f64 + 1.0) * (2.0 * j as f64 + 2.0);
            }
            *slot = s + tail;
        }
        out
    })
}

/// Σ_{k≥2} (−1)^k (ζ(k) − 1) ε^k / k, for |ε| ≤ 1/2.
fn zeta_series(eps: f64) -> f64 {
    let z = zeta_minus_one();
    let mut pow = eps * eps;
    let mut acc = 0.0;
    for (idx, zk) in z.iter().enumerate() {
        let k = (idx + 2) as f64;
        let term = zk * pow / k;
        acc += if idx % 2 == 0 { term } else { -term };
        if term.abs() < 1e-18 * acc.abs().max(1e-300) {
            break;
        }
        pow *= eps;
    }
    acc
}

fn stirling_ln_gamma(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    let mut p = inv;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let k = (k + 1) as f64;
        corr += b / (2.0 * k * (2.0 * k - 1.0)) * p;
        p *= inv2;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_TWO_PI + corr
}

/// ln Γ(x) for x > 0; NaN otherwise.
pub fn ln_gamma(x: f64) -> f64 {
    if !(x > 0.0) || !x.is_finite() {
        return f64::NAN;
    }
    if x < 0.5 {
        // ln Γ(x) = ln Γ(1 + x) − ln x, with 1 + x in [1, 1.5)
        return (1.0 - EULER_GAMMA) * x - x.ln_1p() + zeta_series(x) - x.ln();
    }
    if x <= 1.5 {
        let e = x - 1.0;
        return -e.ln_1p() + e * (1.0 - EULER_GAMMA) + zeta_series(e);
    }
    if x <= 2.5 {
        let e = x - 2.0;
        return e * (1.0 - EULER_GAMMA) + zeta_series(e);
    }
    if x < 15.0 {
        // reduce into (1.5, 2.5]
        let m = (x - 1.5).ceil() - 1.0;
        let y = x - m;
        let mut prod = 1.0;
        let mut v = y;
        while v < x - 0.25 {
            prod *= v;
            v += 1.0;
        }
        return ln_gamma(y) + prod.ln();
    }
    stirling_ln_gamma(x)
}

/// ln Γ(x), checked.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("log_gamma requires finite x > 0, got {x}"));
    }
    Ok(ln_gamma(x))
}

/// ln n! via ln Γ(n + 1).
pub fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Digamma ψ(x) for x > 0; NaN otherwise.
pub fn psi(x: f64) -> f64 {
    if !(x > 0.0) || !x.is_finite() {
        return f64::NAN;
    }
    let mut shift = 0.0;
    let mut y = x;
    while y < 10.0 {
        shift -= 1.0 / y;
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut p = inv2;
    for (k, b) in BERNOULLI.iter().take(7).enumerate() {
        let k = (k + 1) as f64;
        series += b / (2.0 * k) * p;
        p *= inv2;
    }
    shift + y.ln() - 0.5 * inv - series
}

/// Trigamma ψ′(x) for x > 0; NaN otherwise.
pub fn psi1(x: f64) -> f64 {
    if !(x > 0.0) || !x.is_finite() {
        return f64::NAN;
    }
    let mut shift = 0.0;
    let mut y = x;
    while y < 10.0 {
        shift += 1.0 / (y * y);
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut p = inv2 * inv;
    for b in BERNOULLI.iter().take(7) {
        series += b * p;
        p *= inv2;
    }
    shift + inv + 0.5 * inv2 + series
}

pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("digamma requires finite x > 0, got {x}"));
    }
    Ok(psi(x))
}

pub fn trigamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("trigamma requires finite x > 0, got {x}"));
    }
    Ok(psi1(x))
}

/// Rising factorial x(x+1)…(x+n−1); `pochhammer(x, 0) == 1`.
pub fn pochhammer(x: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (x + k as f64))
}

/// ln (x)_n for x > 0.
pub fn ln_pochhammer(x: f64, n: u32) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if n <= 16 {
        (0..n).map(|k| (x + k as f64).ln()).sum()
    } else {
        ln_gamma(x + n as f64) - ln_gamma(x)
    }
}

/// ln( n! / ∏ mᵢ! ).
pub fn log_multinomial(n: u32, m: &[u32]) -> Result<f64> {
    let total: u64 = m.iter().map(|&v| v as u64).sum();
    if total != n as u64 {
        return domain(format!("composition sums to {total}, expected {n}"));
    }
    Ok(ln_factorial(n as u64) - m.iter().map(|&v| ln_factorial(v as u64)).sum::<f64>())
}

/// ln C(n, k).
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// ln of the multivariate beta function ∏Γ(aᵢ)/Γ(Σaᵢ).
pub fn ln_multi_beta(a: &[f64]) -> f64 {
    a.iter().map(|&v| ln_gamma(v)).sum::<f64>() - ln_gamma(a.iter().sum())
}

/// Numerically stable ln Σ exp(vᵢ) with compensated summation.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut acc = crate::numeric::Neumaier::default();
    for v in values {
        acc.add((v - max).exp());
    }
    max + acc.sum().ln()
}

/// Gauss hypergeometric ₂F₁(a, b; c; x) from its Euler integral
/// Γ(c)/(Γ(b)Γ(c−b)) ∫₀¹ t^{b−1}(1−t)^{c−b−1}(1−xt)^{−a} dt.
///
/// The function is symmetric in `a` and `b`; whichever of the two satisfies
/// `c > · > 0` is used as the integration parameter. Parameters with neither
/// satisfying it are rejected with [`Error::UnsupportedRegime`].
pub fn gauss_2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && x.is_finite()) {
        return domain("gauss_2f1 requires finite arguments");
    }
    if x >= 1.0 {
        return domain(format!("gauss_2f1 requires x < 1, got {x}"));
    }
    let (outer, inner) = if c > b && b > 0.0 {
        (a, b)
    } else if c > a && a > 0.0 {
        (b, a)
    } else {
        return Err(Error::UnsupportedRegime(format!(
            "2F1({a}, {b}; {c}; x) has no Euler integral (need c > b > 0 or c > a > 0)"
        )));
    };
    if x == 0.0 {
        return Ok(1.0);
    }
    let ln_pref = ln_gamma(c) - ln_gamma(inner) - ln_gamma(c - inner);
    let f = |t: f64, ct: f64| {
        // 1 − x t, written to keep precision near t = 1 when x is close to 1
        let base = if x > 0.5 { (1.0 - x) + x * ct } else { 1.0 - x * t };
        base.powf(-outer)
    };
    let res = quadrature::integrate_unit(&f, inner - 1.0, c - inner - 1.0, 1e-13, 1)?;
    Ok(res.value * ln_pref.exp())
}

/// The finite-sum representation
/// ₂F₁(α₁, α₊+n; α₊; 1−λ) = Σ_k C(n,k)(α₁)_k(α₂)_{n−k} / ((α₊)_n λ^{α₁+k}),
/// summed in log space.
pub fn gauss_2f1_finite(alpha1: f64, alpha2: f64, n: u32, lambda: f64) -> Result<f64> {
    if !(alpha1 > 0.0 && alpha2 > 0.0) {
        return domain("gauss_2f1_finite requires positive alpha");
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return domain(format!("gauss_2f1_finite requires lambda > 0, got {lambda}"));
    }
    Ok(ln_gauss_2f1_finite(alpha1, alpha2, n, lambda).exp())
}

pub(crate) fn ln_gauss_2f1_finite(alpha1: f64, alpha2: f64, n: u32, lambda: f64) -> f64 {
    let terms = g4b_log_terms(alpha1, alpha2, n, lambda);
    log_sum_exp(&terms)
}

/// Log of the (unnormalized) finite-sum terms, k = 0..=n.
pub(crate) fn g4b_log_terms(alpha1: f64, alpha2: f64, n: u32, lambda: f64) -> Vec<f64> {
    let ap = alpha1 + alpha2;
    let ln_lambda = lambda.ln();
    let ln_den = ln_pochhammer(ap, n);
    (0..=n)
        .map(|k| {
            ln_binomial(n as u64, k as u64) + ln_pochhammer(alpha1, k)
                + ln_pochhammer(alpha2, n - k)
                - ln_den
                - (alpha1 + k as f64) * ln_lambda
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_gamma_known_values() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-300);
        assert_relative_eq!(log_gamma(0.5).unwrap(), 0.572_364_942_924_700_1, max_relative = 1e-14);
        assert_relative_eq!(log_gamma(5.0).unwrap(), 24f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(log_gamma(171.5).unwrap(), 709.143_163_030_928_2, max_relative = 1e-14);
        assert_relative_eq!(log_gamma(1e6).unwrap(), 12_815_504.569_147_611, max_relative = 1e-14);
        assert_relative_eq!(log_gamma(1e-6).unwrap(), 13.815_509_980_749_43, max_relative = 1e-14);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.0).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn log_gamma_matches_factorials_and_recurrence() {
        let mut lf = 0.0f64;
        for n in 1..60u32 {
            lf += (n as f64).ln();
            assert_relative_eq!(ln_gamma(n as f64 + 1.0), lf, max_relative = 1e-14);
        }
        let mut x = 1e-6;
        while x < 1e6 {
            let lhs = ln_gamma(x + 1.0) - ln_gamma(x);
            assert!((lhs - x.ln()).abs() <= 1e-12 * (1.0 + ln_gamma(x).abs()), "x={x}");
            x *= 1.37;
        }
    }

    #[test]
    fn log_gamma_near_its_zeros() {
        // Γ(1+ε) ≈ 1 − γε: check relative accuracy where ln Γ is tiny
        let e = 1e-9;
        assert_relative_eq!(ln_gamma(1.0 + e), -EULER_GAMMA * e, max_relative = 1e-8);
        assert_relative_eq!(ln_gamma(2.0 + e), (1.0 - EULER_GAMMA) * e, max_relative = 1e-8);
    }

    #[test]
    fn digamma_trigamma_known_values() {
        assert_relative_eq!(digamma(1.0).unwrap(), -EULER_GAMMA, max_relative = 1e-14);
        assert_relative_eq!(
            trigamma(1.0).unwrap(),
            std::f64::consts::PI.powi(2) / 6.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(digamma(2.0).unwrap() - digamma(1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(
            digamma(0.5).unwrap(),
            -EULER_GAMMA - 2.0 * 2f64.ln(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            trigamma(0.5).unwrap(),
            std::f64::consts::PI.powi(2) / 2.0,
            max_relative = 1e-14
        );
        assert!(digamma(0.0).is_err());
        assert!(trigamma(-2.0).is_err());
    }

    #[test]
    fn digamma_trigamma_recurrences() {
        let mut x = 0.01;
        while x <= 100.0 {
            let d = psi(x + 1.0) - psi(x) - 1.0 / x;
            let t = psi1(x + 1.0) - psi1(x) + 1.0 / (x * x);
            assert!(d.abs() <= 1e-10 * (1.0 / x).max(1.0), "digamma at {x}: {d}");
            assert!(t.abs() <= 1e-10 * (1.0 / (x * x)).max(1.0), "trigamma at {x}: {t}");
            x *= 1.11;
        }
    }

    #[test]
    fn digamma_is_derivative_of_log_gamma() {
        for &x in &[0.3, 1.7, 4.2, 25.0] {
            let h = 1e-5 * x;
            let fd = (ln_gamma(x + h) - ln_gamma(x - h)) / (2.0 * h);
            assert_relative_eq!(psi(x), fd, max_relative = 1e-8);
            let fd2 = (psi(x + h) - psi(x - h)) / (2.0 * h);
            assert_relative_eq!(psi1(x), fd2, max_relative = 1e-7);
        }
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(3.0, 0), 1.0);
        assert_eq!(pochhammer(2.0, 3), 24.0);
        assert_eq!(pochhammer(0.5, 2), 0.75);
        for &x in &[0.2, 1.5, 7.25] {
            for n in 0..30 {
                let lhs = pochhammer(x, n);
                let rhs = (ln_gamma(x + n as f64) - ln_gamma(x)).exp();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
                assert_relative_eq!(ln_pochhammer(x, n), lhs.ln(), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn multinomial_values() {
        assert!(log_multinomial(3, &[3, 0, 0]).unwrap().abs() < 1e-15);
        assert_relative_eq!(log_multinomial(2, &[1, 1]).unwrap(), 2f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(log_multinomial(4, &[2, 1, 1]).unwrap(), 12f64.ln(), max_relative = 1e-14);
        assert!(log_multinomial(4, &[2, 1]).is_err());
    }

    #[test]
    fn hypergeometric_euler_integral() {
        assert_eq!(gauss_2f1(0.3, 0.7, 2.0, 0.0).unwrap(), 1.0);
        let x = 0.5;
        assert_relative_eq!(
            gauss_2f1(1.0, 1.0, 2.0, x).unwrap(),
            -(1.0 - x as f64).ln() / x,
            max_relative = 1e-12
        );
        // 2F1(a, b; b; x) = (1 − x)^{−a}; use c slightly above b through c = b + 1 identity instead:
        // 2F1(1, 1; 2; −x) = ln(1 + x)/x
        assert_relative_eq!(gauss_2f1(1.0, 1.0, 2.0, -3.0).unwrap(), 4f64.ln() / 3.0, max_relative = 1e-12);
        assert!(matches!(gauss_2f1(3.0, 3.0, 2.0, 0.3), Err(Error::UnsupportedRegime(_))));
        assert!(gauss_2f1(1.0, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn hypergeometric_finite_sum() {
        assert_relative_eq!(gauss_2f1_finite(1.0, 1.0, 1, 2.0).unwrap(), 0.375, max_relative = 1e-14);
        assert_relative_eq!(
            gauss_2f1_finite(1.7, 0.3, 0, 0.4).unwrap(),
            0.4f64.powf(-1.7),
            max_relative = 1e-14
        );
        let (a1, a2, n, lam) = (1.3, 0.7, 2u32, 0.4);
        let euler = gauss_2f1(a1, a1 + a2 + n as f64, a1 + a2, 1.0 - lam).unwrap();
        let finite = gauss_2f1_finite(a1, a2, n, lam).unwrap();
        assert_relative_eq!(euler, finite, max_relative = 1e-10);
        assert!(gauss_2f1_finite(1.0, 1.0, 1, 0.0).is_err());
    }
}
