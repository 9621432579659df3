//! Inequality fuzzers for the symmetric polynomials.

use nalgebra::DMatrix;
use serde::Serialize;

use super::{Draws, Measure};
use crate::error::Result;
use crate::sympoly::{fractional_h, fractional_q, standard_h, symmetric_mean_q};

/// Relative slack for comparisons between quadrature values.
const SLACK: f64 = 1e-9;

fn fmt_v(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

/// h_{2n}(X) ≥ 0 for signed X, K ≤ 6, n ≤ 5.
pub fn hunter(draws: usize, seed: u64) -> Result<Measure> {
    let mut d = Draws::new(seed, 30);
    let mut m = Measure::default();
    for _ in 0..draws {
        let k = d.int(1, 6) as usize;
        let n = d.int(1, 5);
        let x = d.vec(k, -1.0, 1.0);
        let h = standard_h(&x, 2 * n)?;
        let scale = standard_h(&x.iter().map(|v| v.abs()).collect::<Vec<_>>(), 2 * n)?;
        m.check(h >= -1e-12 * scale, || format!("X={} n={n}: h={h:e}", fmt_v(&x)));
    }
    Ok(m)
}

/// (−1)^{n−1} h_{−2n}(X) ≥ 0 for odd K < 2n with X of one sign.
pub fn negative_degree_sign(draws: usize, seed: u64) -> Result<Measure> {
    let mut d = Draws::new(seed, 31);
    let mut m = Measure::default();
    for _ in 0..draws {
        let k = if d.int(0, 1) == 0 { 3 } else { 5 };
        let n = d.int(k as u32 / 2 + 1, 4);
        let sign = if d.int(0, 1) == 0 { 1.0 } else { -1.0 };
        let x: Vec<f64> = d.vec(k, 0.3, 2.0).into_iter().map(|v| sign * v).collect();
        let h = fractional_h(&x, -2.0 * n as f64)?;
        let s = if n % 2 == 1 { h } else { -h };
        m.check(s >= 0.0, || format!("K={k} n={n} X={}: (-1)^(n-1) h = {s:e}", fmt_v(&x)));
    }
    Ok(m)
}

/// q_{(r+s)/2}(X)² ≤ q_r(X) q_s(X) for X > 0 and real r, s.
pub fn cauchy_schwarz(draws: usize, seed: u64) -> Result<Measure> {
    let mut d = Draws::new(seed, 32);
    let mut m = Measure::default();
    for _ in 0..draws {
        let k = d.int(2, 5) as usize;
        let x = d.vec(k, 0.1, 2.0);
        let (r, s) = (d.uniform(-6.0, 6.0), d.uniform(-6.0, 6.0));
        let mid = fractional_q(&x, 0.5 * (r + s))?;
        let rhs = fractional_q(&x, r)? * fractional_q(&x, s)?;
        m.check(mid * mid <= rhs * (1.0 + SLACK), || format!("X={} r={r} s={s}: {:e} > {rhs:e}", fmt_v(&x), mid * mid));
    }
    Ok(m)
}

/// Minkowski-type comparisons, split by the range of the degree p.
#[derive(Debug, Clone, Default, Serialize)]
pub struct MinkowskiMeasures {
    /// p > 1, claimed ≤.
    pub p_above_one: Measure,
    /// 0 < p < 1, claimed ≥.
    pub p_unit: Measure,
    /// −1 < p < 0, claimed ≥.
    pub p_neg_unit: Measure,
    /// p < −1, claimed ≤; cases with h_p ≤ 0 (the root is undefined) are skipped.
    pub p_below_minus_one: Measure,
}

/// `draws` pairs (X, Y) > 0 per regime of p.
pub fn minkowski(draws: usize, seed: u64) -> Result<MinkowskiMeasures> {
    let mut d = Draws::new(seed, 33);
    let mut out = MinkowskiMeasures::default();
    let regimes: [(f64, f64, bool); 4] = [(1.0, 6.0, true), (0.0, 1.0, false), (-1.0, 0.0, false), (-6.0, -1.0, true)];
    for (ri, &(lo, hi, le)) in regimes.iter().enumerate() {
        let mut m = Measure::default();
        for _ in 0..draws {
            let k = d.int(2, 4) as usize;
            let x = d.vec(k, 0.05, 2.0);
            let y = d.vec(k, 0.05, 2.0);
            let p = d.uniform(lo, hi);
            if p == 0.0 || p.fract() == 0.0 {
                m.skipped += 1;
                continue;
            }
            let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let (hx, hy, hxy) = (fractional_h(&x, p)?, fractional_h(&y, p)?, fractional_h(&xy, p)?);
            if !(hx > 0.0 && hy > 0.0 && hxy > 0.0) {
                m.skipped += 1;
                continue;
            }
            let e = 1.0 / p.abs();
            let lhs = hxy.powf(e);
            let rhs = hx.powf(e) + hy.powf(e);
            let ok = if le { lhs <= rhs * (1.0 + SLACK) } else { lhs >= rhs * (1.0 - SLACK) };
            m.check(ok, || format!("p={p} X={} Y={}: lhs {lhs:e} rhs {rhs:e}", fmt_v(&x), fmt_v(&y)));
        }
        match ri {
            0 => out.p_above_one = m,
            1 => out.p_unit = m,
            2 => out.p_neg_unit = m,
            _ => out.p_below_minus_one = m,
        }
    }
    Ok(out)
}

/// Smallest eigenvalue of [q_{m+n}(X)]_{m,n ≤ N} for signed X, N ≤ 4; a
/// violation is an eigenvalue below −1e-10.
pub fn gram_psd(draws: usize, seed: u64) -> Result<Measure> {
    let mut d = Draws::new(seed, 34);
    let mut m = Measure::default();
    for _ in 0..draws {
        let k = d.int(1, 6) as usize;
        let n = d.int(1, 4) as usize;
        let x = d.vec(k, -1.0, 1.0);
        let q: Vec<f64> = (0..=2 * n).map(|j| symmetric_mean_q(&x, j as u32)).collect::<Result<_>>()?;
        let g = DMatrix::from_fn(n + 1, n + 1, |i, j| q[i + j]);
        let min = g.symmetric_eigenvalues().min();
        m.check(min >= -1e-10, || format!("X={} N={n}: min eigenvalue {min:e}", fmt_v(&x)));
    }
    Ok(m)
}
