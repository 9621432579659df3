//! Invariant suites. Each measurement routine is parameterized by its size
//! and seed and returns raw discrepancies; [`run_suite`] wraps them with the
//! default sizes and pass thresholds.

mod identities;
mod inequalities;
mod probabilistic;

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::distributions::FamilyParams;
use crate::error::{Error, Result};

pub use identities::*;
pub use inequalities::*;
pub use probabilistic::*;

/// Aggregated outcome of a batch of comparisons.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Measure {
    pub cases: usize,
    /// Largest discrepancy (relative error, |deviation| or z-score).
    pub worst: f64,
    /// Cases where the compared relation failed outright.
    pub violations: usize,
    /// Cases skipped because a side was undefined.
    pub skipped: usize,
    pub worst_case: String,
}

impl Measure {
    pub(crate) fn record(&mut self, value: f64, case: impl FnOnce() -> String) {
        self.cases += 1;
        let v = if value.is_nan() { f64::INFINITY } else { value };
        if v > self.worst || self.worst_case.is_empty() {
            self.worst = v;
            self.worst_case = case();
        }
    }

    pub(crate) fn check(&mut self, ok: bool, case: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            if self.violations == 0 {
                self.worst_case = case();
            }
            self.violations += 1;
        }
    }

    pub fn within(&self, limit: f64) -> bool {
        self.cases > 0 && self.violations == 0 && self.worst <= limit
    }
}

/// One line of a verification report.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub identity: String,
    pub passed: bool,
    pub limit: f64,
    pub measure: Measure,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}/{}: {} (cases {}, worst {:.3e}, limit {:.1e}, violations {})",
            if self.passed { "pass" } else { "FAIL" },
            self.suite,
            self.identity,
            if self.passed { "ok" } else { &self.measure.worst_case },
            self.measure.cases,
            self.measure.worst,
            self.limit,
            self.measure.violations
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Size and tolerance settings for [`run_suite`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    /// Multiplier on the default number of draws and samples.
    pub scale: f64,
    pub seed: u64,
    /// Replaces the relative tolerance of deterministic identities.
    pub tol: Option<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { scale: 1.0, seed: 0, tol: None }
    }
}

impl VerifyConfig {
    fn n(&self, base: usize) -> usize {
        ((base as f64 * self.scale).round() as usize).max(1)
    }

    fn mc(&self, base: usize) -> usize {
        ((base as f64 * self.scale).round() as usize).max(1000)
    }

    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

pub const SUITES: &[&str] = &[
    "integrals",
    "normalization",
    "duality",
    "recurrences",
    "densities",
    "samplers",
    "logratio",
    "moments",
    "sympoly",
    "inequalities",
    "g4b",
    "expfamily",
];

/// MC acceptance band in standard errors.
pub const Z_BAND: f64 = 4.0;
/// Significance level for KS tests; KS measures record KS_ALPHA / p.
pub const KS_ALPHA: f64 = 1e-3;

fn check(suite: &'static str, identity: &str, m: Measure, limit: f64) -> Check {
    Check { suite, identity: identity.to_string(), passed: m.within(limit), limit, measure: m }
}

/// Runs one named suite.
pub fn run_suite(name: &str, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let start = Instant::now();
    let s = cfg.seed;
    let (suite, checks): (&'static str, Vec<Check>) = match name {
        "integrals" => (
            "integrals",
            vec![check(
                "integrals",
                "quadrature of prod x^(a-1) and prod x^(a-1)/(sum b x)^(a+) against prod G(a)/(G(a+) prod b^a)",
                integral_identities(cfg.n(50), s)?,
                cfg.tol(1e-7),
            )],
        ),
        "normalization" => {
            let (closed, quad) = normalization_agreement(cfg.n(200), s)?;
            (
                "normalization",
                vec![
                    check("normalization", "multinomial sum == n! h_n(a,g) prod G(a)/G(a+ + n)", closed, cfg.tol(1e-12)),
                    check("normalization", "multinomial and closed forms == simplex quadrature", quad, cfg.tol(1e-6)),
                ],
            )
        }
        "duality" => (
            "duality",
            vec![
                check(
                    "duality",
                    "I_n^s(a,g) == I_{-(a+ + s n)}^{1/s}(a/s, g^(-1/s)) / (s^(K-1) prod g^(a/s))",
                    duality(cfg.n(50), s)?,
                    cfg.tol(1e-6),
                ),
                check("duality", "2F1(a,b;c;x) == (1-x)^(-b) 2F1(c-a,b;c;x/(x-1))", pfaff(cfg.n(50), s)?, cfg.tol(1e-8)),
                check(
                    "duality",
                    "K=2 dual form == B(a1,a2) g2^n 2F1(-n,a1;a+;1-g1/g2)",
                    dual_k2_hypergeometric(cfg.n(20), s)?,
                    cfg.tol(1e-6),
                ),
            ],
        ),
        "recurrences" => (
            "recurrences",
            vec![
                check(
                    "recurrences",
                    "I_{n+1}^s(a,g) == sum_i g_i I_n^s(a + s e_i, g)",
                    algebraic_recurrence(cfg.n(200), s)?,
                    cfg.tol(1e-12),
                ),
                check(
                    "recurrences",
                    "(a+ + n) I_{n+1} == sum_i (g_i^2 d/dg_i + a_i g_i) I_n",
                    differential_recurrence(cfg.n(50), s)?,
                    1e-6,
                ),
            ],
        ),
        "densities" => (
            "densities",
            FamilyTag::ALL
                .iter()
                .map(|&t| {
                    Ok(check(
                        "densities",
                        &format!("integral of {} pdf == 1", t.name()),
                        density_normalization(t, cfg.n(20), s)?,
                        1e-6,
                    ))
                })
                .collect::<Result<_>>()?,
        ),
        "samplers" => {
            let n = cfg.mc(100_000);
            let mut v: Vec<Check> = FamilyTag::ALL
                .iter()
                .map(|&t| {
                    let ks = sampler_ks(&reference_family(t), n, s)?;
                    Ok(check("samplers", &format!("{} marginals vs quadrature CDF (KS)", t.name()), ks, 1.0))
                })
                .collect::<Result<_>>()?;
            v.push(check(
                "samplers",
                "Dirichlet sample covariance == -a_i a_j/(a+^2 (a+ + 1))",
                dirichlet_covariance(&[0.7, 1.8, 3.2], n, s)?,
                Z_BAND,
            ));
            v.push(check(
                "samplers",
                "Gumbel-softmax draws == IS(1, b, t) draws (two-sample KS)",
                concrete_vs_inverse(&[0.2, 0.5, 0.3], 0.7, n, s)?,
                1.0,
            ));
            v.push(check(
                "samplers",
                "dual transform of Dirichlet draws == Schlomilch draws (two-sample KS)",
                pushforward(&[0.8, 1.5, 2.5], &[0.2, 0.3, 0.5], 1.6, n, s)?,
                1.0,
            ));
            ("samplers", v)
        }
        "logratio" => {
            let n = cfg.mc(200_000);
            (
                "logratio",
                logratio_cases()
                    .iter()
                    .map(|c| Ok(check("logratio", &c.label, logratio_mc(c, n, s)?, Z_BAND)))
                    .collect::<Result<_>>()?,
            )
        }
        "moments" => {
            let n = cfg.mc(200_000);
            (
                "moments",
                vec![
                    check(
                        "moments",
                        "tilt moments: closed == continuation == u-integral == simplex quadrature",
                        tilt_consistency(cfg.n(20), s)?,
                        cfg.tol(1e-8),
                    ),
                    check("moments", "tilt n=1 mean and second moments vs MC", tilt_mc(&[0.8, 1.5, 2.5], &[0.2, 0.3, 0.5], 1, n, s)?, Z_BAND),
                    check("moments", "tilt n=2 mean, variance, covariance vs MC", tilt_mc(&[0.8, 1.5, 2.5], &[0.2, 0.3, 0.5], 2, n, s)?, Z_BAND),
                    check("moments", "Corr(X1,X2) = (1-4e-e^2)/(1+6e+e^2) at e = 0.1 vs MC", correlation_example_mc(n, s)?, Z_BAND),
                    check("moments", "mean-one tilt E X_i == 1/K", mean_one_tilt(cfg.n(50), s)?, cfg.tol(1e-12)),
                ],
            )
        }
        "sympoly" => (
            "sympoly",
            vec![
                check("sympoly", "Newton recursion == partition sum (exact rationals)", newton_vs_partitions(cfg.n(100), s)?, 0.0),
                check("sympoly", "fractional h_z at integer z == h_n", fractional_at_integers(cfg.n(100), s)?, cfg.tol(1e-8)),
                check("sympoly", "h_z == 0 at z = -1..-(K-1)", negative_integer_zeros(cfg.n(100), s)?, 1e-8),
                check("sympoly", "B-spline moments == q_n", bspline_vs_q(cfg.n(100), s)?, cfg.tol(1e-8)),
            ],
        ),
        "inequalities" => {
            let n = cfg.n(10_000);
            let mk = minkowski(n, s)?;
            (
                "inequalities",
                vec![
                    check("inequalities", "h_{2n}(X) >= 0 for real X", hunter(n, s)?, 0.0),
                    check("inequalities", "(-1)^(n-1) h_{-2n}(X) >= 0 for odd K < 2n", negative_degree_sign(cfg.n(2000), s)?, 0.0),
                    check("inequalities", "q_{(r+s)/2}^2 <= q_r q_s for X > 0", cauchy_schwarz(cfg.n(2000), s)?, 0.0),
                    check("inequalities", "h_p(X+Y)^(1/p) <= h_p(X)^(1/p) + h_p(Y)^(1/p), p > 1", mk.p_above_one, 0.0),
                    check("inequalities", "h_p(X+Y)^(1/p) >= h_p(X)^(1/p) + h_p(Y)^(1/p), 0 < p < 1", mk.p_unit, 0.0),
                    check("inequalities", "h_p(X+Y)^(1/|p|) >= h_p(X)^(1/|p|) + h_p(Y)^(1/|p|), -1 < p < 0", mk.p_neg_unit, 0.0),
                    check("inequalities", "h_p(X+Y)^(1/|p|) <= h_p(X)^(1/|p|) + h_p(Y)^(1/|p|), p < -1", mk.p_below_minus_one, 0.0),
                    check("inequalities", "Gram matrix [q_{m+n}(X)] PSD, eigenvalues >= -1e-10", gram_psd(n, s)?, 0.0),
                ],
            )
        }
        "g4b" => (
            "g4b",
            vec![
                check("g4b", "finite 2F1 sum == Euler integral 2F1", g4b_finite_vs_euler(cfg.n(100), s)?, cfg.tol(1e-8)),
                check("g4b", "Schlomilch mixture density == G4B density", g4b_mixture_density(cfg.n(100), s)?, cfg.tol(1e-10)),
                check("g4b", "mixture weights sum to 1", g4b_weights(cfg.n(100), s)?, 1e-12),
            ],
        ),
        "expfamily" => {
            let n = cfg.mc(200_000);
            (
                "expfamily",
                expfamily_cases()
                    .into_iter()
                    .map(|(label, fam)| Ok(check("expfamily", &label, expfamily_mc(&fam, n, s)?, Z_BAND)))
                    .collect::<Result<_>>()?,
            )
        }
        other => {
            return Err(Error::Domain(format!("unknown suite '{other}'; known: {}", SUITES.join(", "))));
        }
    };
    Ok(SuiteReport { suite, checks, seconds: start.elapsed().as_secs_f64() })
}

/// Seeded uniform draws for the fuzzers.
pub struct Draws(ChaCha8Rng);

impl Draws {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(stream);
        Draws(r)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.0.random::<f64>()
    }

    pub fn vec(&mut self, k: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..k).map(|_| self.uniform(lo, hi)).collect()
    }

    pub fn int(&mut self, lo: u32, hi: u32) -> u32 {
        self.0.random_range(lo..=hi)
    }
}

/// The seven families, for parameter fuzzing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyTag {
    Dirichlet,
    Schlomilch,
    DirichletMixture,
    SchlomilchMixture,
    InverseSchlomilch,
    G4b,
    Superellipsoid,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 7] = [
        FamilyTag::Dirichlet,
        FamilyTag::Schlomilch,
        FamilyTag::DirichletMixture,
        FamilyTag::SchlomilchMixture,
        FamilyTag::InverseSchlomilch,
        FamilyTag::G4b,
        FamilyTag::Superellipsoid,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FamilyTag::Dirichlet => "dirichlet",
            FamilyTag::Schlomilch => "schlomilch",
            FamilyTag::DirichletMixture => "dirichlet_mixture",
            FamilyTag::SchlomilchMixture => "schlomilch_mixture",
            FamilyTag::InverseSchlomilch => "inverse_schlomilch",
            FamilyTag::G4b => "g4b",
            FamilyTag::Superellipsoid => "superellipsoid",
        }
    }
}

/// A random member of the family with K components (K = 2 for G4B).
pub fn random_family(tag: FamilyTag, k: usize, d: &mut Draws) -> Result<FamilyParams> {
    let alpha = d.vec(k, 0.4, 4.0);
    let beta = d.vec(k, 0.2, 1.0);
    let gamma = d.vec(k, 0.1, 1.0);
    match tag {
        FamilyTag::Dirichlet => FamilyParams::dirichlet(alpha),
        FamilyTag::Schlomilch => FamilyParams::schlomilch(alpha, beta, d.uniform(0.5, 2.0)),
        FamilyTag::DirichletMixture => {
            FamilyParams::dirichlet_mixture(alpha, gamma, d.int(1, 4), d.uniform(0.5, 2.0))
        }
        FamilyTag::SchlomilchMixture => {
            let n = d.int(0, 4);
            FamilyParams::schlomilch_mixture(alpha, beta, gamma, n, d.uniform(0.5, 2.0), d.uniform(0.5, 2.0))
        }
        FamilyTag::InverseSchlomilch => FamilyParams::inverse_schlomilch(alpha, beta, d.uniform(0.5, 2.0)),
        FamilyTag::G4b => {
            let (a1, a2) = (d.uniform(0.4, 4.0), d.uniform(0.4, 4.0));
            let kappa = if d.int(0, 1) == 0 { a1 + a2 + d.int(0, 5) as f64 } else { d.uniform(0.2, 8.0) };
            FamilyParams::g4b(a1, a2, kappa, d.uniform(0.1, 5.0))
        }
        FamilyTag::Superellipsoid => {
            let m = k - 1;
            FamilyParams::superellipsoid(alpha, d.vec(m, 0.5, 3.0), d.vec(m, 0.5, 2.0), d.vec(m, -1.0, 0.9), 1.0)
        }
    }
}

/// Fixed, moderately skewed parameters used by the sampler checks.
pub fn reference_family(tag: FamilyTag) -> FamilyParams {
    let alpha = vec![0.8, 1.5, 2.5];
    let beta = vec![0.2, 0.3, 0.5];
    let gamma = vec![0.6, 0.1, 0.3];
    match tag {
        FamilyTag::Dirichlet => FamilyParams::dirichlet(alpha),
        FamilyTag::Schlomilch => FamilyParams::schlomilch(alpha, beta, 0.7),
        FamilyTag::DirichletMixture => FamilyParams::dirichlet_mixture(alpha, gamma, 3, 1.5),
        FamilyTag::SchlomilchMixture => FamilyParams::schlomilch_mixture(alpha, beta, gamma, 2, 0.8, 1.3),
        FamilyTag::InverseSchlomilch => FamilyParams::inverse_schlomilch(alpha, beta, 1.4),
        FamilyTag::G4b => FamilyParams::g4b(1.3, 2.2, 6.5, 0.3),
        FamilyTag::Superellipsoid => {
            FamilyParams::superellipsoid(alpha, vec![1.5, 0.8], vec![1.0, 2.0], vec![0.4, -0.5], 1.0)
        }
    }
    .expect("valid reference parameters")
}

/// Runs the listed suites (all when empty).
pub fn run_all(names: &[String], cfg: &VerifyConfig) -> Result<Vec<SuiteReport>> {
    let list: Vec<&str> = if names.is_empty() { SUITES.to_vec() } else { names.iter().map(|s| s.as_str()).collect() };
    list.into_iter().map(|n| run_suite(n, cfg)).collect()
}
