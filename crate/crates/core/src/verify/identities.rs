//! Deterministic identities: integrals, normalization routes, duality,
//! recurrences, symmetric polynomials, densities and G4B.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{random_family, Draws, FamilyTag, Measure};
use crate::distributions::FamilyParams;
use crate::error::Result;
use crate::normalization::{
    algebraic_recurrence_residual, differential_recurrence_rhs, i_closed_sigma1, i_dual, i_multinomial,
    i_quadrature, i_quadrature_real, NormalizationQuery,
};
use crate::numeric::rel_diff;
use crate::quadrature::Method;
use crate::specialfn::{gauss_2f1, gauss_2f1_finite, ln_gamma, ln_multi_beta};
use crate::sympoly::{
    bspline_moment, deformed_h_exact, fractional_h, reference, standard_h, symmetric_mean_q,
};

fn fmt_v(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Dirichlet and Schlömilch integrals: quadrature vs ∏Γ(αᵢ)/(Γ(α₊)∏βᵢ^{αᵢ}).
/// K cycles through 2, 3, 4.
pub fn integral_identities(draws: usize, seed: u64) -> Result<Measure> {
    let mut d = Draws::new(seed, 1);
    let mut m = Measure::default();
    for i in 0..draws {
        let k = 2 + i % 3;
        let alpha = d.vec(k, 0.3, 5.0);
        let beta = d.vec(k, 0.2, 2.0);
        let ap: f64 = alpha.iter().sum();
        let ln_d: f64 = alpha.iter().map(|&a| ln_gamma(a)).sum::<f64>() - ln_gamma(ap);
        let dir = i_quadrature_real(&alpha, &vec![1.0; k], 0.0, 1.0, 1e-10, Method::Auto)?.value;
        m.record(rel_diff(dir, ln_d.exp()), || format!("Dirichlet alpha={}", fmt_v(&alpha)));
        let ln_s = ln_d - alpha.iter().zip(&beta).map(|(a, b)| a * b.ln()).sum::<f64>();
        let sch = i_quadrature_real(&alpha, &beta, -ap, 1.0, 1e-10, Method::Auto)?.value;
        m.record(rel_diff(sch, ln_s.exp()), || format!("Schlomilch alpha={} beta={}", fmt_v(&alpha), fmt_v(&beta)));
    }
    Ok(m)
}

/// σ = 1: (multinomial vs closed form, worst of both vs quadrature).
pub fn normalization_agreement(draws: usize, seed: u64) -> Result<(Measure, Measure)> {
    let mut d = Draws::new(seed, 2);
    let (mut closed, mut quad) = (Measure::default(), Measure::default());
    for _ in 0..draws {
        let k = d.int(2, 5) as usize;
        let n = d.int(0, 8);
        let alpha = d.vec(k, 0.3, 4.0);
        let gamma = d.vec(k, 0.1, 2.0);
        let q = NormalizationQuery::new(alpha.clone(), gamma.clone(), n, 1.0)?;
        let a = i_multinomial(&q)?;
        let b = i_closed_sigma1(&alpha, &gamma, n)?;
        let c = i_quadrature(&q)?.value;
        let case = || format!("alpha={} gamma={} n={n}", fmt_v(&alpha), fmt_v(&gamma));
        closed.record(rel_diff(a, b), case);
        quad.record(rel_diff(a, c).max(rel_diff(b, c)), case);
    }
    Ok((closed, quad))
}

/// Duality route vs the multinomial sum; σ cycles through 0.5, 1, 2.
pub fn duality(draws: usize, seed: u64) -> Result<Measure> {
    let mut d = Draws::new(seed, 3);
    let mut m = Measure::default();
    for i in 0..draws {
        let sigma = [0.5, 1.0, 2.0][i % 3];
        let k = d.int(2, 3) as usize;
        let n = d.int(0, 3);
        let alpha = d.vec(k, 0.3, 4.0);
        let gamma = d.vec(k, 0.2, 2.0);
        let q = NormalizationQuery::new(alpha.clone(), gamma.clone(), n, sigma)?;
        m.record(rel_diff(i_dual(&q)?, i_multinomial(&q)?), || {
            format!("alpha={} gamma={} n={n} sigma={sigma}", fmt_v(&alpha), fmt_v(&gamma))
        });
    }
    Ok(m)
}

/// Pfaff transformation with both sides from the Euler integral.
pub fn pfaff(draws: usize, seed: u64) -> Result<Measure> {
    let mut d = Draws::new(seed, 4);
    let mut m = Measure::default();
    for _ in 0..draws {
        let c = d.uniform(0.5, 4.0);
        let b = d.uniform(0.1, 0.95) * c;
        let a = d.uniform(-3.0, 3.0);
        let x = d.uniform(-2.0, 0.9);
        let lhs = gauss_2f1(a, b, c, x)?;
        let rhs = (1.0 - x).powf(-b) * gauss_2f1(c - a, b, c, x / (x - 1.0))?;
        m.record(rel_diff(lhs, rhs), || format!("a={a} b={b} c={c} x={x}"));
    }
    Ok(m)
}

/// K = 2, σ = 1: duality route vs B(α₁,α₂) γ₂ⁿ ₂F₁(−n, α₁; α₊; 1 − γ₁/γ₂).
pub fn dual_k2_hypergeometric(draws: usize, seed: u64) -> Result<Measure> {
    let mut d = Draws::new(seed, 5);
    let mut m = Measure::default();
    for _ in 0..draws {
        let alpha = d.vec(2, 0.3, 4.0);
        let gamma = d.vec(2, 0.2, 2.0);
        let n = d.int(0, 6);
        let q = NormalizationQuery::new(alpha.clone(), gamma.clone(), n, 1.0)?;
        let f = gauss_2f1(-(n as f64), alpha[0], alpha[0] + alpha[1], 1.0 - gamma[0] / gamma[1])?;
        let want = (ln_multi_beta(&alpha) + n as f64 * gamma[1].ln()).exp() * f;
        m.record(rel_diff(i_dual(&q)?, want), || format!("alpha={} gamma={} n={n}", fmt_v(&alpha), fmt_v(&gamma)));
    }
    Ok(m)
}

/// |I_{n+1} − Σ γᵢ I_n(α + σeᵢ)| / |I_{n+1}| for random σ.
pub fn algebraic_recurrence(draws: usize, seed: u64) -> Result<Measure> {
    let mut d = Draws::new(seed, 6);
    let mut m = Measure::default();
    for _ in 0..draws {
        let k = d.int(2, 4) as usize;
        let n = d.int(0, 6);
        let sigma = d.uniform(0.3, 2.5);
        let alpha = d.vec(k, 0.3, 4.0);
        let gamma = d.vec(k, 0.1, 2.0);
        let q = NormalizationQuery::new(alpha.clone(), gamma.clone(), n, sigma)?;
        let r = algebraic_recurrence_residual(&q)?;
        let top = i_multinomial(&NormalizationQuery::new(alpha.clone(), gamma.clone(), n + 1, sigma)?)?;
        m.record((r / top).abs(), || format!("alpha={} gamma={} n={n} sigma={sigma}", fmt_v(&alpha), fmt_v(&gamma)));
    }
    Ok(m)
}

/// First-order differential recurrence at σ = 1 (finite differences in γ).
pub fn differential_recurrence(draws: usize, seed: u64) -> Result<Measure> {
    let mut d = Draws::new(seed, 7);
    let mut m = Measure::default();
    for _ in 0..draws {
        let k = d.int(2, 4) as usize;
        let n = d.int(0, 6);
        let alpha = d.vec(k, 0.3, 4.0);
        let gamma = d.vec(k, 0.2, 2.0);
        let rhs = differential_recurrence_rhs(&alpha, &gamma, n)?;
        let lhs = i_closed_sigma1(&alpha, &gamma, n + 1)?;
        m.record(rel_diff(lhs, rhs), || format!("alpha={} gamma={} n={n}", fmt_v(&alpha), fmt_v(&gamma)));
    }
    Ok(m)
}

fn random_rational(d: &mut Draws, lo: i64, hi: i64, den_max: i64) -> BigRational {
    let num = lo + (d.int(0, (hi - lo) as u32) as i64);
    let den = 1 + d.int(0, (den_max - 1) as u32) as i64;
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Newton recursion vs partition sums over the rationals (n ≤ 10, K ≤ 6).
pub fn newton_vs_partitions(draws: usize, seed: u64) -> Result<Measure> {
    let mut d = Draws::new(seed, 8);
    let mut m = Measure::default();
    for _ in 0..draws {
        let k = d.int(1, 6) as usize;
        let n = d.int(0, 10) as usize;
        let alpha: Vec<BigRational> = (0..k).map(|_| random_rational(&mut d, 1, 40, 7)).collect();
        let gamma: Vec<BigRational> = (0..k).map(|_| random_rational(&mut d, -20, 20, 5)).collect();
        let newton = deformed_h_exact(&alpha, &gamma, n as u32);
        let p = crate::sympoly::power_sums(&alpha, &gamma, n);
        let part = reference::h_partition_sum(&p, n);
        m.check(newton == part, || format!("K={k} n={n}: {newton} vs {part}"));
    }
    Ok(m)
}

/// fractional_h at integer degree vs the polynomial h_n, relative error.
pub fn fractional_at_integers(draws: usize, seed: u64) -> Result<Measure> {
    let mut d = Draws::new(seed, 9);
    let mut m = Measure::default();
    for _ in 0..draws {
        let k = d.int(1, 5) as usize;
        let n = d.int(0, 8);
        let x = d.vec(k, 0.1, 2.0);
        let a = fractional_h(&x, n as f64)?;
        let b = standard_h(&x, n)?;
        m.record(rel_diff(a, b), || format!("X={} n={n}", fmt_v(&x)));
    }
    Ok(m)
}

/// |h_z(X)| at z = −1, …, −(K−1).
pub fn negative_integer_zeros(draws: usize, seed: u64) -> Result<Measure> {
    let mut d = Draws::new(seed, 10);
    let mut m = Measure::default();
    for _ in 0..draws {
        let k = d.int(2, 6) as usize;
        let x = d.vec(k, 0.1, 2.0);
        for z in 1..k {
            let v = fractional_h(&x, -(z as f64))?;
            m.record(v.abs(), || format!("X={} z=-{z}", fmt_v(&x)));
        }
    }
    Ok(m)
}

/// B-spline moments vs symmetric means q_n (n ≤ 6, K ≤ 5, signed knots).
pub fn bspline_vs_q(draws: usize, seed: u64) -> Result<Measure> {
    let mut d = Draws::new(seed, 11);
    let mut m = Measure::default();
    for _ in 0..draws {
        let k = d.int(2, 5) as usize;
        let n = d.int(0, 6);
        let z = d.vec(k, -2.0, 2.0);
        let q = symmetric_mean_q(&z, n)?;
        let b = bspline_moment(&z, n)?;
        let scale = symmetric_mean_q(&z.iter().map(|v| v.abs()).collect::<Vec<_>>(), n)?;
        m.record((q - b).abs() / scale.max(f64::MIN_POSITIVE), || format!("z={} n={n}", fmt_v(&z)));
    }
    Ok(m)
}

/// |∫ pdf − 1| over random parameter sets, K cycling through 2..=4.
pub fn density_normalization(tag: FamilyTag, draws: usize, seed: u64) -> Result<Measure> {
    let mut d = Draws::new(seed, 12 + tag as u64);
    let mut m = Measure::default();
    for i in 0..draws {
        let k = if tag == FamilyTag::G4b { 2 } else { 2 + i % 3 };
        let f = random_family(tag, k, &mut d)?;
        let mass = f.total_mass(1e-9)?.value;
        m.record((mass - 1.0).abs(), || format!("{f}: mass {mass}"));
    }
    Ok(m)
}

fn random_g4b_integer(d: &mut Draws) -> (f64, f64, u32, f64) {
    (d.uniform(0.3, 5.0), d.uniform(0.3, 5.0), d.int(0, 12), d.uniform(0.05, 8.0))
}

/// Finite-sum 2F1 vs its Euler integral.
pub fn g4b_finite_vs_euler(draws: usize, seed: u64) -> Result<Measure> {
    let mut d = Draws::new(seed, 20);
    let mut m = Measure::default();
    for _ in 0..draws {
        let (a1, a2, n, lam) = random_g4b_integer(&mut d);
        let fin = gauss_2f1_finite(a1, a2, n, lam)?;
        let eul = gauss_2f1(a1, a1 + a2 + n as f64, a1 + a2, 1.0 - lam)?;
        m.record(rel_diff(fin, eul), || format!("a1={a1} a2={a2} n={n} lambda={lam}"));
    }
    Ok(m)
}

/// Mixture decomposition density vs direct G4B density at random points.
pub fn g4b_mixture_density(draws: usize, seed: u64) -> Result<Measure> {
    let mut d = Draws::new(seed, 21);
    let mut m = Measure::default();
    for _ in 0..draws {
        let (a1, a2, n, lam) = random_g4b_integer(&mut d);
        let g = FamilyParams::g4b(a1, a2, a1 + a2 + n as f64, lam)?;
        let parts = g.g4b_decompose()?;
        for _ in 0..5 {
            let x = d.uniform(0.001, 0.999);
            let p = [x, 1.0 - x];
            let mix: f64 = parts.iter().map(|(w, f)| w * f.pdf(&p).unwrap_or(f64::NAN)).sum();
            m.record(rel_diff(mix, g.pdf(&p)?), || format!("{g} at x={x}"));
        }
    }
    Ok(m)
}

/// |Σ w − 1| of the G4B mixture weights.
pub fn g4b_weights(draws: usize, seed: u64) -> Result<Measure> {
    let mut d = Draws::new(seed, 22);
    let mut m = Measure::default();
    for _ in 0..draws {
        let (a1, a2, n, lam) = random_g4b_integer(&mut d);
        let g = FamilyParams::g4b(a1, a2, a1 + a2 + n as f64, lam)?;
        let s: f64 = g.g4b_decompose()?.iter().map(|p| p.0).sum();
        m.record((s - 1.0).abs(), || format!("{g}"));
    }
    Ok(m)
}

