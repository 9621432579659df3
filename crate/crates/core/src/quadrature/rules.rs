//! Gauss–Jacobi rules on (0, 1) for the weight u^a (1 − u)^b.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::specialfn::ln_gamma;

/// Nodes, their complements 1 − u (computed independently for accuracy near 1)
/// and weights.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub comps: Vec<f64>,
    pub weights: Vec<f64>,
}

const CACHE_LIMIT: usize = 2048;

type Key = (usize, u64, u64);

fn cache() -> &'static Mutex<HashMap<Key, Arc<Rule>>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Rule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached n-point rule for ∫₀¹ u^a (1−u)^b f(u) du, a, b > −1.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Arc<Rule> {
    assert!(n >= 1 && a > -1.0 && b > -1.0, "invalid Gauss-Jacobi request");
    let key = (n, a.to_bits(), b.to_bits());
    if let Some(r) = cache().lock().unwrap().get(&key) {
        return r.clone();
    }
    let rule = Arc::new(build(n, a, b));
    let mut c = cache().lock().unwrap();
    if c.len() >= CACHE_LIMIT {
        c.clear();
    }
    c.insert(key, rule.clone());
    rule
}

fn build(n: usize, a: f64, b: f64) -> Rule {
    let (lo_nodes, weights) = raw_rule(n, a, b);
    let hi_nodes = if a == b {
        lo_nodes.clone()
    } else {
        raw_rule(n, b, a).0
    };
    let mut nodes = Vec::with_capacity(n);
    let mut comps = Vec::with_capacity(n);
    for i in 0..n {
        let u = lo_nodes[i];
        if u <= 0.5 {
            nodes.push(u);
            comps.push(1.0 - u);
        } else {
            let c = hi_nodes[n - 1 - i];
            nodes.push(1.0 - c);
            comps.push(c);
        }
    }
    Rule { nodes, comps, weights }
}

/// Recurrence coefficients of the orthonormal polynomials for u^a(1−u)^b on
/// (0,1): diagonal d_k (k < n) and off-diagonal e_k, k = 1..n.
fn recurrence(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    // standard Jacobi parameters on [−1,1] for (1−x)^al (1+x)^be, u = (1+x)/2
    let al = b;
    let be = a;
    let s = al + be;
    let mut d = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(n + 1);
    e.push(0.0);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (be - al) / (s + 2.0)
        } else {
            (be * be - al * al) / ((2.0 * kf + s) * (2.0 * kf + s + 2.0))
        };
        d.push(0.5 * diag + 0.5);
    }
    for k in 1..=n {
        let kf = k as f64;
        let bk = if k == 1 {
            4.0 * (1.0 + al) * (1.0 + be) / ((2.0 + s).powi(2) * (3.0 + s))
        } else {
            let t = 2.0 * kf + s;
            4.0 * kf * (kf + al) * (kf + be) * (kf + s) / (t * t * (t + 1.0) * (t - 1.0))
        };
        e.push(0.5 * bk.sqrt());
    }
    (d, e)
}

fn raw_rule(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (d, e) = recurrence(n, a, b);
    let mut diag = d.clone();
    let mut off: Vec<f64> = (0..n).map(|k| if k + 1 < n { e[k + 1] } else { 0.0 }).collect();
    tridiagonal_eigenvalues(&mut diag, &mut off);
    diag.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let ln_mu0 = ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(a + b + 2.0);
    let mu0 = ln_mu0.exp();
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &guess in &diag {
        let mut u = guess.clamp(f64::MIN_POSITIVE, 1.0);
        for _ in 0..4 {
            let (p, dp, _) = eval_orthonormal(u, &d, &e);
            if dp == 0.0 || !dp.is_finite() {
                break;
            }
            let step = p / dp;
            let next = u - step;
            if !(next > 0.0 && next < 1.0) {
                break;
            }
            u = next;
            if step.abs() <= 1e-17 * u {
                break;
            }
        }
        let (_, _, norm) = eval_orthonormal(u, &d, &e);
        nodes.push(u);
        weights.push(mu0 / norm);
    }
    (nodes, weights)
}

/// Returns (q_n(u), q_n'(u), Σ_{k<n} p_k(u)²), with q_n ∝ p_n.
fn eval_orthonormal(u: f64, d: &[f64], e: &[f64]) -> (f64, f64, f64) {
    let n = d.len();
    let mut p_prev = 0.0;
    let mut p = 1.0;
    let mut dp_prev = 0.0;
    let mut dp = 0.0;
    let mut norm = 0.0;
    for k in 0..n {
        norm += p * p;
        let den = e[k + 1];
        let p_next = ((u - d[k]) * p - e[k] * p_prev) / den;
        let dp_next = (p + (u - d[k]) * dp - e[k] * dp_prev) / den;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp, norm)
}

/// Implicit QL eigenvalues of a symmetric tridiagonal matrix. `e[i]` couples
/// rows i and i + 1; `e[n−1]` is ignored. Eigenvalues overwrite `d`.
fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    if n == 0 {
        return;
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let bb = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * bb;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - bb;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

/// Gauss–Legendre rule on (0, 1).
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    gauss_jacobi(n, 0.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(5);
        for k in 0..10 {
            let q: f64 = r.nodes.iter().zip(&r.weights).map(|(u, w)| w * u.powi(k)).sum();
            assert_relative_eq!(q, 1.0 / (k as f64 + 1.0), max_relative = 1e-14);
        }
    }

    #[test]
    fn jacobi_moments_are_beta_functions() {
        for &(a, b) in &[(-0.5, -0.5), (-0.9, 2.5), (3.0, -0.7), (0.0, 7.0), (25.0, 0.3)] {
            for &n in &[3usize, 8, 40] {
                let r = gauss_jacobi(n, a, b);
                for k in 0..(2 * n).min(30) {
                    let q: f64 = r.nodes.iter().zip(&r.weights).map(|(u, w)| w * u.powi(k as i32)).sum();
                    let exact = (ln_gamma(a + 1.0 + k as f64) + ln_gamma(b + 1.0)
                        - ln_gamma(a + b + 2.0 + k as f64))
                        .exp();
                    assert_relative_eq!(q, exact, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn complements_are_consistent() {
        let r = gauss_jacobi(64, 0.2, -0.8);
        for (u, c) in r.nodes.iter().zip(&r.comps) {
            assert!((u + c - 1.0).abs() < 1e-15);
            assert!(*u > 0.0 && *c > 0.0);
        }
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn high_order_rule_is_sane() {
        let r = gauss_jacobi(512, -0.5, 1.5);
        let total: f64 = r.weights.iter().sum();
        let exact = (ln_gamma(0.5) + ln_gamma(2.5) - ln_gamma(3.0)).exp();
        assert_relative_eq!(total, exact, max_relative = 1e-12);
    }
}
