//! JSON parameter documents.

use serde::{Deserialize, Serialize};

use super::{FamilyParams, Kind};
use crate::error::{domain, Error, Result};

/// Serialized family parameters. Absent fields are omitted on output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDoc {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
}

fn need<T: Clone>(v: &Option<T>, field: &str, family: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::Domain(format!("family '{family}' requires field '{field}'")))
}

impl ParamsDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Domain(format!("invalid parameter document: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn to_family(&self) -> Result<FamilyParams> {
        let fam = self.family.to_ascii_lowercase().replace(['-', ' '], "_");
        let f = fam.as_str();
        let tau = self.tau.unwrap_or(1.0);
        let sigma = self.sigma.unwrap_or(1.0);
        let alpha = need(&self.alpha, "alpha", f)?;
        match f {
            "dirichlet" | "d" => FamilyParams::dirichlet(alpha),
            "schlomilch" | "s" => FamilyParams::schlomilch(alpha, need(&self.beta, "beta", f)?, tau),
            "dirichlet_mixture" | "dm" => {
                FamilyParams::dirichlet_mixture(alpha, need(&self.gamma, "gamma", f)?, need(&self.n, "n", f)?, sigma)
            }
            "schlomilch_mixture" | "sm" => FamilyParams::schlomilch_mixture(
                alpha,
                need(&self.beta, "beta", f)?,
                need(&self.gamma, "gamma", f)?,
                need(&self.n, "n", f)?,
                sigma,
                tau,
            ),
            "inverse_schlomilch" | "is" => {
                FamilyParams::inverse_schlomilch(alpha, need(&self.beta, "beta", f)?, tau)
            }
            "g4b" => {
                if alpha.len() != 2 {
                    return domain("g4b requires exactly two alpha entries");
                }
                FamilyParams::g4b(alpha[0], alpha[1], need(&self.kappa, "kappa", f)?, need(&self.lambda, "lambda", f)?)
            }
            "superellipsoid" | "mgb" => {
                let beta_k = match &self.beta {
                    None => 1.0,
                    Some(v) if v.len() == 1 => v[0],
                    Some(_) => return domain("superellipsoid takes beta as a single-element list [beta_K]"),
                };
                FamilyParams::superellipsoid(
                    alpha,
                    need(&self.a, "a", f)?,
                    need(&self.b, "b", f)?,
                    need(&self.c, "c", f)?,
                    beta_k,
                )
            }
            other => domain(format!("unknown family '{other}'")),
        }
    }
}

impl From<&FamilyParams> for ParamsDoc {
    fn from(p: &FamilyParams) -> Self {
        let mut d = ParamsDoc { family: p.name().to_string(), ..Default::default() };
        match p.kind().clone() {
            Kind::Dirichlet { alpha } => d.alpha = Some(alpha),
            Kind::Schlomilch { alpha, beta, tau } | Kind::InverseSchlomilch { alpha, beta, tau } => {
                d.alpha = Some(alpha);
                d.beta = Some(beta);
                d.tau = Some(tau);
            }
            Kind::DirichletMixture { alpha, gamma, n, sigma } => {
                d.alpha = Some(alpha);
                d.gamma = Some(gamma);
                d.n = Some(n);
                d.sigma = Some(sigma);
            }
            Kind::SchlomilchMixture { alpha, beta, gamma, n, sigma, tau } => {
                d.alpha = Some(alpha);
                d.beta = Some(beta);
                d.gamma = Some(gamma);
                d.n = Some(n);
                d.sigma = Some(sigma);
                d.tau = Some(tau);
            }
            Kind::G4b { alpha1, alpha2, kappa, lambda, .. } => {
                d.alpha = Some(vec![alpha1, alpha2]);
                d.kappa = Some(kappa);
                d.lambda = Some(lambda);
            }
            Kind::Superellipsoid { alpha, a, b, c, beta_k } => {
                d.alpha = Some(alpha);
                d.a = Some(a);
                d.b = Some(b);
                d.c = Some(c);
                d.beta = Some(vec![beta_k]);
            }
        }
        d
    }
}
