//! Integration over the unit cube against a product weight
//! ∏ t_j^{l_j} (1 − t_j)^{r_j}, with an optional per-axis grading map.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::rules::{gauss_jacobi, gauss_legendre};
use super::{Method, QuadratureResult};
use crate::error::{Error, Result};
use crate::numeric::{neumaier_sum, Neumaier};

/// Integrand on the cube: receives coordinates t and complements 1 − t.
pub type CubeFn<'a> = dyn Fn(&[f64], &[f64]) -> f64 + Sync + 'a;

/// One cube axis: endpoint exponents of the weight and the grading power.
///
/// With grading q > 1 the axis is reparametrized by
/// t = v^q / (v^q + (1 − v)^q), which turns fractional endpoint powers of the
/// integrand into powers of v with q-times larger exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub left: f64,
    pub right: f64,
    pub grading: u32,
}

impl Axis {
    pub fn new(left: f64, right: f64) -> Self {
        Axis { left, right, grading: 1 }
    }

    pub fn graded(mut self, q: u32) -> Self {
        self.grading = q.max(1);
        self
    }

    fn v_exponents(&self) -> (f64, f64) {
        let q = self.grading as f64;
        (q * (self.left + 1.0) - 1.0, q * (self.right + 1.0) - 1.0)
    }

    /// Maps v (with complement cv) to (t, 1 − t, residual Jacobian factor).
    #[inline]
    fn map(&self, v: f64, cv: f64) -> (f64, f64, f64) {
        if self.grading == 1 {
            return (v, cv, 1.0);
        }
        let q = self.grading as i32;
        let vq = v.powi(q);
        let cq = cv.powi(q);
        let den = vq + cq;
        let fac = self.grading as f64 * den.powf(-(self.left + self.right + 2.0));
        (vq / den, cq / den, fac)
    }
}

pub(crate) struct Options {
    pub rel_tol: f64,
    pub max_evals: usize,
}

struct AxisNodes {
    t: Vec<f64>,
    c: Vec<f64>,
    w: Vec<f64>,
}

fn axis_nodes(axis: &Axis, n: usize) -> AxisNodes {
    let (l, r) = axis.v_exponents();
    let rule = gauss_jacobi(n, l, r);
    let mut t = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        let (ti, ci, f) = axis.map(rule.nodes[i], rule.comps[i]);
        t.push(ti);
        c.push(ci);
        w.push(rule.weights[i] * f);
    }
    AxisNodes { t, c, w }
}

const ORDERS: [usize; 15] = [4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256, 384, 512];

fn tensor_once(axes: &[Axis], n: usize, f: &CubeFn) -> (f64, f64) {
    let d = axes.len();
    let nodes: Vec<AxisNodes> = axes.iter().map(|a| axis_nodes(a, n)).collect();
    let partial: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i0| {
            let mut t = vec![0.0; d];
            let mut c = vec![0.0; d];
            let mut idx = vec![0usize; d];
            idx[0] = i0;
            let mut acc = Neumaier::default();
            let mut abs_acc = 0.0;
            loop {
                let mut w = 1.0;
                for j in 0..d {
                    let nj = &nodes[j];
                    t[j] = nj.t[idx[j]];
                    c[j] = nj.c[idx[j]];
                    w *= nj.w[idx[j]];
                }
                let v = w * f(&t, &c);
                acc.add(v);
                abs_acc += v.abs();
                // odometer over axes 1..d
                let mut j = d;
                loop {
                    if j == 1 {
                        return (acc.sum(), abs_acc);
                    }
                    j -= 1;
                    idx[j] += 1;
                    if idx[j] < n {
                        break;
                    }
                    idx[j] = 0;
                }
            }
        })
        .collect();
    (
        neumaier_sum(partial.iter().map(|p| p.0)),
        partial.iter().map(|p| p.1).sum(),
    )
}

pub(crate) fn tensor(axes: &[Axis], f: &CubeFn, opt: &Options) -> QuadratureResult {
    let d = axes.len() as u32;
    let mut evals = 0usize;
    let mut prev: Option<f64> = None;
    let mut best = QuadratureResult {
        value: f64::NAN,
        error_estimate: f64::INFINITY,
        evals: 0,
        converged: false,
        method: Method::TensorGauss,
    };
    for &n in ORDERS.iter() {
        let cost = (n as f64).powi(d as i32);
        if prev.is_some() && evals as f64 + cost > opt.max_evals as f64 {
            break;
        }
        let (q, l1) = tensor_once(axes, n, f);
        evals += cost as usize;
        best.value = q;
        best.evals = evals;
        if let Some(p) = prev {
            let err = (q - p).abs();
            best.error_estimate = err;
            if err <= opt.rel_tol * q.abs() || err <= 1e-15 * l1 {
                best.converged = q.is_finite();
                return best;
            }
        }
        prev = Some(q);
    }
    best
}

#[derive(Debug)]
struct CubeBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
    value: f64,
    err: f64,
}

impl PartialEq for CubeBox {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for CubeBox {}
impl PartialOrd for CubeBox {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for CubeBox {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Local 1-D rule on [lo, hi] of the v-axis, weights including the v-space
/// Jacobi weight and the grading factor, returned as (t, c, w).
fn local_axis(axis: &Axis, lo: f64, hi: f64, n: usize) -> AxisNodes {
    let (l, r) = axis.v_exponents();
    let mut out = AxisNodes { t: Vec::with_capacity(n), c: Vec::with_capacity(n), w: Vec::with_capacity(n) };
    let h = hi - lo;
    let (rule, kind) = match (lo == 0.0, hi == 1.0) {
        (true, true) => (gauss_jacobi(n, l, r), 0),
        (true, false) => (gauss_jacobi(n, l, 0.0), 1),
        (false, true) => (gauss_jacobi(n, 0.0, r), 2),
        (false, false) => (gauss_legendre(n), 3),
    };
    for i in 0..n {
        let s = rule.nodes[i];
        let cs = rule.comps[i];
        let (v, cv, w) = match kind {
            0 => (s, cs, rule.weights[i]),
            1 => {
                let v = hi * s;
                let cv = 1.0 - v;
                (v, cv, rule.weights[i] * hi.powf(l + 1.0) * cv.powf(r))
            }
            2 => {
                let cv = h * cs;
                let v = lo + h * s;
                (v, cv, rule.weights[i] * h.powf(r + 1.0) * v.powf(l))
            }
            _ => {
                let v = lo + h * s;
                let cv = (1.0 - hi) + h * cs;
                (v, cv, rule.weights[i] * h * v.powf(l) * cv.powf(r))
            }
        };
        let (t, c, f) = axis.map(v, cv);
        out.t.push(t);
        out.c.push(c);
        out.w.push(w * f);
    }
    out
}

fn box_rule(axes: &[Axis], lo: &[f64], hi: &[f64], n: usize, f: &CubeFn) -> f64 {
    let d = axes.len();
    let nodes: Vec<AxisNodes> = (0..d).map(|j| local_axis(&axes[j], lo[j], hi[j], n)).collect();
    let mut idx = vec![0usize; d];
    let mut t = vec![0.0; d];
    let mut c = vec![0.0; d];
    let mut acc = Neumaier::default();
    loop {
        let mut w = 1.0;
        for j in 0..d {
            t[j] = nodes[j].t[idx[j]];
            c[j] = nodes[j].c[idx[j]];
            w *= nodes[j].w[idx[j]];
        }
        acc.add(w * f(&t, &c));
        let mut j = d;
        loop {
            if j == 0 {
                return acc.sum();
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < n {
                break;
            }
            idx[j] = 0;
        }
    }
}

fn eval_box(axes: &[Axis], lo: Vec<f64>, hi: Vec<f64>, f: &CubeFn) -> CubeBox {
    let coarse = box_rule(axes, &lo, &hi, 5, f);
    let fine = box_rule(axes, &lo, &hi, 8, f);
    let err = (fine - coarse).abs();
    CubeBox { lo, hi, value: fine, err: if err.is_nan() { f64::INFINITY } else { err } }
}

pub(crate) fn adaptive(axes: &[Axis], f: &CubeFn, opt: &Options) -> Result<QuadratureResult> {
    let d = axes.len();
    if d > 4 {
        return Err(Error::MethodUnavailable(format!(
            "adaptive cubature supports at most 4 free coordinates, got {d}"
        )));
    }
    let per_box = 5usize.pow(d as u32) + 8usize.pow(d as u32);
    let children = 1usize << d;
    let mut heap = BinaryHeap::new();
    heap.push(eval_box(axes, vec![0.0; d], vec![1.0; d], f));
    let mut evals = per_box;
    let mut converged = false;
    loop {
        let total = neumaier_sum(heap.iter().map(|b| b.value));
        let err: f64 = heap.iter().map(|b| b.err).sum();
        if err <= opt.rel_tol * total.abs() {
            converged = total.is_finite();
            break;
        }
        if evals + children * per_box > opt.max_evals {
            break;
        }
        let worst = heap.pop().unwrap();
        let boxes: Vec<(Vec<f64>, Vec<f64>)> = (0..children)
            .map(|mask| {
                let mut lo = worst.lo.clone();
                let mut hi = worst.hi.clone();
                for j in 0..d {
                    let mid = 0.5 * (worst.lo[j] + worst.hi[j]);
                    if mask >> j & 1 == 0 {
                        hi[j] = mid;
                    } else {
                        lo[j] = mid;
                    }
                }
                (lo, hi)
            })
            .collect();
        let evaluated: Vec<CubeBox> =
            boxes.into_par_iter().map(|(lo, hi)| eval_box(axes, lo, hi, f)).collect();
        for b in evaluated {
            heap.push(b);
        }
        evals += children * per_box;
    }
    let mut boxes: Vec<&CubeBox> = heap.iter().collect();
    boxes.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap_or(Ordering::Equal));
    Ok(QuadratureResult {
        value: neumaier_sum(boxes.iter().map(|b| b.value)),
        error_estimate: boxes.iter().map(|b| b.err).sum(),
        evals,
        converged,
        method: Method::Adaptive,
    })
}

/// Kumaraswamy(l+1, r+1) inverse-CDF map on one axis: returns (t, 1−t, w)
/// where w = t^l (1−t)^r / density(t).
#[inline]
fn kumaraswamy(u: f64, l: f64, r: f64) -> (f64, f64, f64) {
    let a = l + 1.0;
    let b = r + 1.0;
    let ln_one_minus_u = (-u).ln_1p();
    let s = -(ln_one_minus_u / b).exp_m1();
    let ln_s = s.ln();
    let t = (ln_s / a).exp();
    let c = -(ln_s / a).exp_m1();
    // 1 − t^a = (1 − u)^{1/b}
    let one_minus_ta = (ln_one_minus_u / b).exp();
    let w = if r == 0.0 { 1.0 } else { (c / one_minus_ta).powf(r) } / (a * b);
    (t, c, w)
}

fn kronecker_alpha(d: usize) -> Vec<f64> {
    // root of x^{d+1} = x + 1
    let mut phi = 2.0f64;
    for _ in 0..60 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    (1..=d).map(|j| (1.0 / phi.powi(j as i32)).fract()).collect()
}

fn sample_point(axes: &[Axis], u: &[f64], t: &mut [f64], c: &mut [f64]) -> f64 {
    let mut w = 1.0;
    for j in 0..axes.len() {
        let uj = u[j].clamp(1e-300, 1.0 - 1e-16);
        let (tj, cj, wj) = kumaraswamy(uj, axes[j].left, axes[j].right);
        t[j] = tj;
        c[j] = cj;
        w *= wj;
    }
    w
}

pub(crate) const QMC_REPLICATES: usize = 16;

pub(crate) fn quasi_random(axes: &[Axis], f: &CubeFn, opt: &Options, seed: u64) -> QuadratureResult {
    let d = axes.len();
    let alpha = kronecker_alpha(d);
    let per = (opt.max_evals / QMC_REPLICATES).max(64);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let shifts: Vec<Vec<f64>> = (0..QMC_REPLICATES)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect();
    let means: Vec<f64> = shifts
        .par_iter()
        .map(|shift| {
            let mut u = vec![0.0; d];
            let mut t = vec![0.0; d];
            let mut c = vec![0.0; d];
            let mut acc = Neumaier::default();
            for k in 1..=per {
                for j in 0..d {
                    u[j] = (shift[j] + k as f64 * alpha[j]).fract();
                }
                let w = sample_point(axes, &u, &mut t, &mut c);
                acc.add(w * f(&t, &c));
            }
            acc.sum() / per as f64
        })
        .collect();
    summarize(&means, per * QMC_REPLICATES, opt, Method::QuasiRandom)
}

pub(crate) fn plain_mc(axes: &[Axis], f: &CubeFn, opt: &Options, seed: u64) -> QuadratureResult {
    let d = axes.len();
    let chunks = 64usize;
    let per = (opt.max_evals / chunks).max(16);
    let means: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(ci as u64);
            let mut u = vec![0.0; d];
            let mut t = vec![0.0; d];
            let mut c = vec![0.0; d];
            let mut acc = Neumaier::default();
            for _ in 0..per {
                for uj in u.iter_mut() {
                    *uj = rng.random::<f64>();
                }
                let w = sample_point(axes, &u, &mut t, &mut c);
                acc.add(w * f(&t, &c));
            }
            acc.sum() / per as f64
        })
        .collect();
    summarize(&means, per * chunks, opt, Method::PlainMc)
}

fn summarize(means: &[f64], evals: usize, opt: &Options, method: Method) -> QuadratureResult {
    let m = means.len() as f64;
    let mean = neumaier_sum(means.iter().cloned()) / m;
    let var = means.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let se = (var / m).sqrt();
    QuadratureResult {
        value: mean,
        error_estimate: se,
        evals,
        converged: se <= opt.rel_tol * mean.abs(),
        method,
    }
}
