//! Seeded samplers. Draws are produced in chunks of [`CHUNK`] points, chunk c
//! using the ChaCha20 stream (seed, c), so output does not depend on the
//! number of threads.

use rand::distr::Open01;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use super::{softmax, FamilyParams, Kind};
use crate::error::{domain, Error, Result};
use crate::normalization::{self, check_positive, NormalizationQuery};

pub const CHUNK: usize = 4096;
const ALIAS_THRESHOLD: usize = 1000;
const MAX_REDRAWS: usize = 10_000;

/// RNG for chunk `index` of the stream rooted at `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// ln Z for Z ~ Gamma(α, 1).
fn ln_gamma_draw<R: Rng>(rng: &mut R, alpha: f64) -> f64 {
    if alpha >= 1.0 {
        Gamma::new(alpha, 1.0).expect("valid shape").sample(rng).ln()
    } else {
        let g = Gamma::new(alpha + 1.0, 1.0).expect("valid shape").sample(rng);
        let u: f64 = rng.sample(Open01);
        g.ln() + u.ln() / alpha
    }
}

/// Composition selector for mixture families.
enum Selector {
    Linear(Vec<f64>),
    Alias(WeightedAliasIndex<f64>),
}

impl Selector {
    fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() > ALIAS_THRESHOLD {
            let alias = WeightedAliasIndex::new(weights)
                .map_err(|e| Error::Domain(format!("invalid mixture weights: {e}")))?;
            Ok(Selector::Alias(alias))
        } else {
            Ok(Selector::Linear(weights))
        }
    }

    fn pick<R: Rng>(&self, rng: &mut R) -> usize {
        match self {
            Selector::Alias(a) => a.sample(rng),
            Selector::Linear(w) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (i, wi) in w.iter().enumerate() {
                    acc += wi;
                    if u < acc {
                        return i;
                    }
                }
                w.len() - 1
            }
        }
    }
}

/// Precomputed sampling plan for one family.
enum Plan {
    /// softmax((sign · ln Z + shift) / scale) with Z ~ Gamma(shape).
    Gamma { shape: Vec<f64>, sign: f64, shift: Vec<f64>, scale: f64 },
    Mixture { comps: Vec<Vec<u32>>, selector: Selector, alpha: Vec<f64>, sigma: f64, shift: Vec<f64>, scale: f64 },
    Superellipsoid { base: Box<Plan>, a: Vec<f64>, b: Vec<f64>, c: Vec<f64> },
}

fn draw_softmax<R: Rng>(rng: &mut R, shape: &[f64], sign: f64, shift: &[f64], scale: f64) -> Result<Vec<f64>> {
    for _ in 0..MAX_REDRAWS {
        let logits: Vec<f64> = shape
            .iter()
            .zip(shift)
            .map(|(&a, &s)| (sign * ln_gamma_draw(rng, a) + s) / scale)
            .collect();
        let x = softmax(&logits);
        if x.iter().all(|&v| v > 0.0) {
            return Ok(x);
        }
    }
    domain("sampler underflow: parameters put all mass on a face")
}

impl Plan {
    fn new(p: &FamilyParams) -> Result<Plan> {
        Ok(match p.kind() {
            Kind::Dirichlet { alpha } => Plan::Gamma {
                shape: alpha.clone(),
                sign: 1.0,
                shift: vec![0.0; alpha.len()],
                scale: 1.0,
            },
            Kind::Schlomilch { alpha, beta, tau } => Plan::Gamma {
                shape: alpha.clone(),
                sign: 1.0,
                shift: beta.iter().map(|b| -b.ln()).collect(),
                scale: *tau,
            },
            Kind::InverseSchlomilch { alpha, beta, tau } => Plan::Gamma {
                shape: alpha.clone(),
                sign: -1.0,
                shift: beta.iter().map(|b| b.ln()).collect(),
                scale: *tau,
            },
            Kind::DirichletMixture { alpha, gamma, n, sigma } => {
                mixture_plan(alpha, gamma, *n, *sigma, vec![0.0; alpha.len()], 1.0)?
            }
            Kind::SchlomilchMixture { alpha, beta, gamma, n, sigma, tau } => {
                mixture_plan(alpha, gamma, *n, *sigma, beta.iter().map(|b| -b.ln()).collect(), *tau)?
            }
            Kind::G4b { alpha1, alpha2, lambda, n, .. } => {
                let n = n.ok_or_else(|| {
                    Error::Unsupported(
                        "G4B sampling needs kappa - alpha1 - alpha2 to be a non-negative integer".into(),
                    )
                })?;
                let parts = p.g4b_decompose()?;
                let weights = parts.iter().map(|(w, _)| *w).collect();
                let comps = (0..=n).map(|k| vec![k, n - k]).collect();
                let beta = [lambda / (lambda + 1.0), 1.0 / (lambda + 1.0)];
                Plan::Mixture {
                    comps,
                    selector: Selector::new(weights)?,
                    alpha: vec![*alpha1, *alpha2],
                    sigma: 1.0,
                    shift: beta.iter().map(|b| -b.ln()).collect(),
                    scale: 1.0,
                }
            }
            Kind::Superellipsoid { a, b, c, .. } => Plan::Superellipsoid {
                base: Box::new(Plan::new(&p.superellipsoid_base()?)?),
                a: a.clone(),
                b: b.clone(),
                c: c.clone(),
            },
        })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            Plan::Gamma { shape, sign, shift, scale } => draw_softmax(rng, shape, *sign, shift, *scale),
            Plan::Mixture { comps, selector, alpha, sigma, shift, scale } => {
                let m = &comps[selector.pick(rng)];
                let shape: Vec<f64> = alpha.iter().zip(m).map(|(a, &mi)| a + sigma * mi as f64).collect();
                draw_softmax(rng, &shape, 1.0, shift, *scale)
            }
            Plan::Superellipsoid { base, a, b, c } => {
                let s = base.draw(rng)?;
                Ok((0..a.len())
                    .map(|i| b[i] * ((s[i].ln() - (1.0 - c[i]).ln()) / a[i]).exp())
                    .collect())
            }
        }
    }
}

fn mixture_plan(alpha: &[f64], gamma: &[f64], n: u32, sigma: f64, shift: Vec<f64>, scale: f64) -> Result<Plan> {
    let (comps, weights) =
        normalization::mixture_weights(&NormalizationQuery::new(alpha.to_vec(), gamma.to_vec(), n, sigma)?)?;
    Ok(Plan::Mixture { comps, selector: Selector::new(weights)?, alpha: alpha.to_vec(), sigma, shift, scale })
}

fn run_chunks<F>(seed: u64, count: usize, draw: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&mut ChaCha20Rng) -> Result<Vec<f64>> + Sync,
{
    if count == 0 {
        return domain("count must be at least 1");
    }
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<Result<Vec<Vec<f64>>>> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = substream(seed, ci as u64);
            let len = CHUNK.min(count - ci * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(count);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

impl FamilyParams {
    /// `count` independent draws, deterministic in `seed`. Superellipsoid
    /// draws are the K − 1 orthant coordinates.
    pub fn sample(&self, seed: u64, count: usize) -> Result<Vec<Vec<f64>>> {
        let plan = Plan::new(self)?;
        run_chunks(seed, count, |rng| plan.draw(rng))
    }
}

/// Dirichlet draws from normalized gamma variates.
pub fn sample_dirichlet(alpha: &[f64], seed: u64, count: usize) -> Result<Vec<Vec<f64>>> {
    FamilyParams::dirichlet(alpha.to_vec())?.sample(seed, count)
}

/// Concrete (Gumbel-softmax) draws softmax((W + ln β)/τ) with W = −ln(−ln U):
/// an independent construction of IS(1, β, τ).
pub fn sample_concrete_gumbel(beta: &[f64], tau: f64, seed: u64, count: usize) -> Result<Vec<Vec<f64>>> {
    check_positive(beta, "beta")?;
    if !(tau > 0.0 && tau.is_finite()) {
        return domain("tau must be positive");
    }
    let s: f64 = beta.iter().sum();
    let ln_beta: Vec<f64> = beta.iter().map(|b| (b / s).ln()).collect();
    run_chunks(seed, count, |rng| {
        for _ in 0..MAX_REDRAWS {
            let logits: Vec<f64> = ln_beta
                .iter()
                .map(|lb| {
                    let u: f64 = rng.sample(Open01);
                    (-(-u.ln()).ln() + lb) / tau
                })
                .collect();
            let x = softmax(&logits);
            if x.iter().all(|&v| v > 0.0) {
                return Ok(x);
            }
        }
        domain("sampler underflow")
    })
}
