//! Goodness-of-fit and summary statistics used by the samplers' checks.

use rayon::prelude::*;

use crate::distributions::{FamilyParams, Kind};
use crate::error::{domain, Result};
use crate::quadrature::{integrate_cube, Axis, FaceModel, Method};

/// Sample mean and (unbiased) covariance matrix of row vectors.
pub fn mean_cov(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = rows.len();
    let d = rows.first().map_or(0, |r| r.len());
    let mut mean = vec![0.0; d];
    for r in rows {
        for j in 0..d {
            mean[j] += r[j];
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = vec![vec![0.0; d]; d];
    for r in rows {
        for a in 0..d {
            let da = r[a] - mean[a];
            for b in a..d {
                cov[a][b] += da * (r[b] - mean[b]);
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            cov[a][b] /= (n as f64 - 1.0).max(1.0);
            cov[b][a] = cov[a][b];
        }
    }
    (mean, cov)
}

/// Asymptotic Kolmogorov survival function Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let t = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { t } else { -t };
        if t < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// p-value of a KS statistic `d` for effective sample size `n`, with the
/// Stephens finite-sample correction.
pub fn ks_pvalue(d: f64, n: f64) -> f64 {
    let sn = n.sqrt();
    kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// One-sample KS test of `sample` against a continuous CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut s = sample.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let f: Vec<f64> = s.iter().map(|&x| cdf(x)).collect();
    ks_sorted(&f)
}

/// KS statistic from CDF values at the sorted sample.
fn ks_sorted(f: &[f64]) -> KsResult {
    let n = f.len();
    let mut d: f64 = 0.0;
    for (i, &fi) in f.iter().enumerate() {
        d = d.max((i + 1) as f64 / n as f64 - fi).max(fi - i as f64 / n as f64);
    }
    KsResult { statistic: d, p_value: ks_pvalue(d, n as f64), n }
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = a[i].min(b[j]);
        while i < n && a[i] <= v {
            i += 1;
        }
        while j < m && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    KsResult { statistic: d, p_value: ks_pvalue(d, ne), n: n.min(m) }
}

/// P(Xᵢ ≤ x) for each x in `xs`, by cube quadrature over the region of the
/// simplex cut off by the hyperplane xᵢ = x. Not defined for the
/// superellipsoid family (use its base law on the simplex).
pub fn marginal_cdf(family: &FamilyParams, coord: usize, xs: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    if matches!(family.kind(), Kind::Superellipsoid { .. }) {
        return domain("marginal_cdf works on simplex families only");
    }
    let k = family.k();
    if coord >= k {
        return domain(format!("coordinate {coord} out of range for K = {k}"));
    }
    let model = family.face_model();
    let q = family.grading();
    xs.par_iter()
        .map(|&x| {
            if x <= 0.0 {
                return Ok(0.0);
            }
            if x >= 1.0 {
                return Ok(1.0);
            }
            if x < 0.5 {
                tail(family, &model, coord, x, false, rel_tol, q)
            } else {
                tail(family, &model, coord, x, true, rel_tol, q).map(|v| 1.0 - v)
            }
        })
        .collect()
}

fn phi(model: &FaceModel, set: &[usize]) -> f64 {
    match model {
        FaceModel::Separable(a) => set.iter().map(|&i| a[i] + 1.0).sum::<f64>() - 1.0,
        FaceModel::General(g) => g(set),
    }
}

/// Lower tail P(Xᵢ ≤ x) or upper tail P(Xᵢ ≥ x).
fn tail(
    family: &FamilyParams,
    model: &FaceModel,
    coord: usize,
    x: f64,
    upper: bool,
    rel_tol: f64,
    q: u32,
) -> Result<f64> {
    let k = family.k();
    let others: Vec<usize> = (0..k).filter(|&j| j != coord).collect();
    let mut axes = Vec::with_capacity(k - 1);
    axes.push(if upper { Axis::new(0.0, phi(model, &others)) } else { Axis::new(phi(model, &[coord]), 0.0) });
    for j in 0..k - 2 {
        axes.push(Axis::new(phi(model, &[others[j]]), phi(model, &others[j + 1..])));
    }
    let axes: Vec<Axis> = axes.into_iter().map(|a| a.graded(q)).collect();
    let g = |t: &[f64], c: &[f64]| -> f64 {
        let mut p = [0.0f64; 16];
        let (xi, rest) = if upper { (x + (1.0 - x) * t[0], (1.0 - x) * c[0]) } else { (x * t[0], 1.0 - x * t[0]) };
        p[coord] = xi;
        let mut r = rest;
        let mut ln_jac = (if upper { (1.0 - x).ln() } else { x.ln() }) + (k as f64 - 2.0) * rest.ln();
        for j in 0..k - 2 {
            p[others[j]] = r * t[j + 1];
            r *= c[j + 1];
            ln_jac += (k - 3 - j) as f64 * c[j + 1].ln();
        }
        p[others[k - 2]] = r;
        let ln_w: f64 = axes
            .iter()
            .enumerate()
            .map(|(j, a)| {
                let l = if a.left == 0.0 { 0.0 } else { a.left * t[j].ln() };
                let rr = if a.right == 0.0 { 0.0 } else { a.right * c[j].ln() };
                l + rr
            })
            .sum();
        (family.ln_pdf_unchecked(&p[..k]) + ln_jac - ln_w).exp()
    };
    Ok(integrate_cube(&axes, &g, Method::Auto, rel_tol, 1 << 22)?.value)
}

/// KS test of one coordinate of `samples` against the family's marginal law.
///
/// The CDF is evaluated by quadrature at `knots` order statistics and
/// linearly interpolated in between. For the superellipsoid family the
/// coordinate is mapped to the simplex and tested against the base law.
pub fn ks_family_marginal(family: &FamilyParams, coord: usize, samples: &[Vec<f64>], knots: usize) -> Result<KsResult> {
    let (target, mut v): (FamilyParams, Vec<f64>) = match family.kind() {
        Kind::Superellipsoid { a, b, c, .. } => {
            if coord >= a.len() {
                return domain("superellipsoid coordinate out of range");
            }
            let s = samples.iter().map(|x| (1.0 - c[coord]) * (x[coord] / b[coord]).powf(a[coord])).collect();
            (family.superellipsoid_base()?, s)
        }
        _ => (family.clone(), samples.iter().map(|x| x[coord]).collect()),
    };
    if v.len() < 2 {
        return domain("KS test needs at least two samples");
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    let m = knots.clamp(2, n);
    let idx: Vec<usize> = (0..m).map(|j| ((j as f64) * (n - 1) as f64 / (m - 1) as f64).round() as usize).collect();
    let kx: Vec<f64> = idx.iter().map(|&i| v[i]).collect();
    let kf = marginal_cdf(&target, coord, &kx, 1e-7)?;
    let mut f = Vec::with_capacity(n);
    let mut seg = 0;
    for &x in &v {
        while seg + 2 < m && kx[seg + 1] < x {
            seg += 1;
        }
        let (x0, x1) = (kx[seg], kx[seg + 1]);
        let w = if x1 > x0 { ((x - x0) / (x1 - x0)).clamp(0.0, 1.0) } else { 0.0 };
        f.push(kf[seg] + w * (kf[seg + 1] - kf[seg]));
    }
    Ok(ks_sorted(&f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_01;
    use crate::specialfn::ln_multi_beta;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn beta_cdf(a: f64, b: f64, x: f64) -> f64 {
        let lb = ln_multi_beta(&[a, b]);
        let r = integrate_01(&|u| (1.0 - x * u).powf(b - 1.0), a - 1.0, 0.0, 1e-12).unwrap();
        r.value * (a * x.ln() - lb).exp()
    }

    #[test]
    fn kolmogorov_reference_values() {
        assert!((kolmogorov_q(1.0) - 0.269_999_671_677_465_6).abs() < 1e-12);
        assert!((kolmogorov_q(1.358_1) - 0.05).abs() < 1e-4);
        assert_eq!(kolmogorov_q(0.0), 1.0);
    }

    #[test]
    fn dirichlet_marginal_is_beta() {
        let cases: [(&[f64], usize); 3] = [(&[0.5, 1.5, 2.0], 0), (&[2.0, 0.7, 1.1], 1), (&[1.0, 1.0, 1.0, 3.0], 3)];
        for (alpha, i) in cases {
            let a = alpha.to_vec();
            let f = FamilyParams::dirichlet(a.clone()).unwrap();
            let ap: f64 = a.iter().sum();
            let xs = [0.01, 0.2, 0.5, 0.8, 0.99];
            let got = marginal_cdf(&f, i, &xs, 1e-10).unwrap();
            for (x, g) in xs.iter().zip(got) {
                let want = beta_cdf(a[i], ap - a[i], *x);
                assert!((g - want).abs() < 1e-8, "{x}: {g} vs {want}");
            }
        }
    }

    #[test]
    fn ks_accepts_correct_and_rejects_wrong() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        assert!(ks_one_sample(&u, |x| x).p_value > 1e-3);
        assert!(ks_one_sample(&u, |x| x * x).p_value < 1e-6);
        let w: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        assert!(ks_two_sample(&u, &w).p_value > 1e-3);
        let sq: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
        assert!(ks_two_sample(&u, &sq).p_value < 1e-6);
    }

    #[test]
    fn family_marginal_ks() {
        let f = FamilyParams::schlomilch(vec![0.5, 1.5, 2.0], vec![0.2, 0.3, 0.5], 0.7).unwrap();
        let s = f.sample(3, 20_000).unwrap();
        assert!(ks_family_marginal(&f, 0, &s, 400).unwrap().p_value > 1e-3);
        let wrong = FamilyParams::schlomilch(vec![0.5, 1.5, 2.0], vec![0.3, 0.3, 0.4], 0.7).unwrap();
        assert!(ks_family_marginal(&wrong, 0, &s, 400).unwrap().p_value < 1e-3);
    }

    #[test]
    fn mean_cov_small() {
        let (m, c) = mean_cov(&[vec![1.0, 2.0], vec![3.0, 6.0]]);
        assert_eq!(m, vec![2.0, 4.0]);
        assert_eq!(c, vec![vec![2.0, 4.0], vec![4.0, 8.0]]);
    }
}
