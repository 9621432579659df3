use super::*;
use crate::normalization::i_multinomial;
use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.01).collect();
    normalized(&v)
}

#[test]
fn dirichlet_uniform_density() {
    let d = FamilyParams::dirichlet(vec![1.0, 1.0]).unwrap();
    assert!(d.log_pdf(&[0.3, 0.7]).unwrap().abs() < 1e-15);
    assert!(d.log_pdf(&[0.0, 1.0]).is_err());
    assert!(d.log_pdf(&[0.3, 0.6]).is_err());
    assert!(d.log_pdf(&[0.3, 0.3, 0.4]).is_err());
    assert!(FamilyParams::dirichlet(vec![1.0]).is_err());
    assert!(FamilyParams::dirichlet(vec![1.0, -1.0]).is_err());
}

#[test]
fn equal_beta_schlomilch_is_dirichlet() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let alpha = vec![0.7, 2.5, 1.3];
    let d = FamilyParams::dirichlet(alpha.clone()).unwrap();
    let s = FamilyParams::schlomilch(alpha, vec![3.0; 3], 1.0).unwrap();
    for _ in 0..20 {
        let x = random_point(&mut rng, 3);
        assert!((d.log_pdf(&x).unwrap() - s.log_pdf(&x).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn beta_and_gamma_are_normalized() {
    let s = FamilyParams::schlomilch(vec![1.0, 2.0], vec![2.0, 6.0], 1.5).unwrap();
    match s.kind() {
        Kind::Schlomilch { beta, .. } => assert_eq!(beta, &vec![0.25, 0.75]),
        _ => unreachable!(),
    }
    let t = FamilyParams::schlomilch(vec![1.0, 2.0], vec![1.0, 3.0], 1.5).unwrap();
    assert_eq!(s, t);
}

#[test]
fn sm_constant_numerator_case() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let alpha = vec![0.8, 1.7, 2.2];
    let beta = normalized(&[0.2, 0.5, 0.3]);
    let (n, sigma) = (2u32, 0.5);
    let gamma: Vec<f64> = beta.iter().map(|b: &f64| b.powf(-sigma)).collect();
    let sm = FamilyParams::schlomilch_mixture(alpha.clone(), beta.clone(), gamma.clone(), n, sigma, 1.0 / sigma).unwrap();
    let ln_i = i_multinomial(&NormalizationQuery::new(alpha.clone(), gamma, n, sigma).unwrap()).unwrap().ln();
    let ap: f64 = alpha.iter().sum();
    for _ in 0..20 {
        let x = random_point(&mut rng, 3);
        let direct = alpha.iter().zip(&beta).map(|(a, b)| a * b.ln()).sum::<f64>()
            + alpha.iter().zip(&x).map(|(a, xi)| (a / sigma - 1.0) * xi.ln()).sum::<f64>()
            - 2.0 * sigma.ln()
            - ln_i
            - (ap + sigma * n as f64) * beta.iter().zip(&x).map(|(b, xi)| b * xi.powf(1.0 / sigma)).sum::<f64>().ln();
        assert_relative_eq!(sm.log_pdf(&x).unwrap(), direct, epsilon = 1e-11);
    }
}

#[test]
fn mixture_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let alpha = vec![0.8, 1.7, 2.2, 0.5];
    let beta = vec![0.2, 0.5, 0.3, 0.4];
    let gamma = vec![0.7, 0.1, 0.6, 0.3];
    for n in 1..=4 {
        for &(sigma, tau) in &[(1.0, 1.0), (0.6, 1.8)] {
            let sm = FamilyParams::schlomilch_mixture(alpha.clone(), beta.clone(), gamma.clone(), n, sigma, tau).unwrap();
            let (comps, w) = mixture_weights(&alpha, &gamma, n, sigma).unwrap();
            for _ in 0..5 {
                let x = random_point(&mut rng, 4);
                let mix: f64 = comps
                    .iter()
                    .zip(&w)
                    .map(|(m, wm)| {
                        let a: Vec<f64> = alpha.iter().zip(m).map(|(a, &mi)| a + sigma * mi as f64).collect();
                        wm * FamilyParams::schlomilch(a, beta.clone(), tau).unwrap().pdf(&x).unwrap()
                    })
                    .sum();
                assert_relative_eq!(mix, sm.pdf(&x).unwrap(), max_relative = 1e-10);
            }
        }
    }
}

#[test]
fn mixture_weight_examples() {
    let (_, w) = mixture_weights(&[1.0, 1.0], &[0.5, 0.5], 2, 1.0).unwrap();
    for wi in w {
        assert_relative_eq!(wi, 1.0 / 3.0, max_relative = 1e-14);
    }
    let alpha = [0.5, 1.5, 2.5];
    let gamma = [0.2, 0.3, 0.5];
    let s = 1.7;
    let (comps, w) = mixture_weights(&alpha, &gamma, 1, s).unwrap();
    let raw: Vec<f64> = (0..3).map(|i| gamma[i] * (ln_gamma(alpha[i] + s) - ln_gamma(alpha[i])).exp()).collect();
    let tot: f64 = raw.iter().sum();
    for (m, wm) in comps.iter().zip(&w) {
        let i = m.iter().position(|&v| v == 1).unwrap();
        assert_relative_eq!(*wm, raw[i] / tot, max_relative = 1e-13);
    }
    let (comps, w) = mixture_weights(&alpha, &[1.0, 1e-9, 1e-9], 3, 1.0).unwrap();
    let top = w.iter().cloned().fold(0.0, f64::max);
    assert!(top > 0.999_999);
    assert_eq!(comps[w.iter().position(|&v| v == top).unwrap()], vec![3, 0, 0]);
}

#[test]
fn dual_transform_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let beta = [0.2, 0.5, 0.3];
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = random_point(&mut rng, 3);
        let y = dual_transform(&x, &beta, 1.7, Direction::Forward).unwrap();
        let back = dual_transform(&y, &beta, 1.7, Direction::Inverse).unwrap();
        for i in 0..3 {
            worst = worst.max((back[i] - x[i]).abs());
        }
        let id = dual_transform(&x, &[0.4; 3], 1.0, Direction::Forward).unwrap();
        for i in 0..3 {
            assert!((id[i] - x[i]).abs() < 1e-15);
        }
    }
    assert!(worst < 1e-12);
}

#[test]
fn g4b_decomposition() {
    let g3b = FamilyParams::g4b(1.3, 0.7, 2.0, 0.4).unwrap();
    let parts = g3b.g4b_decompose().unwrap();
    assert_eq!(parts.len(), 1);
    assert_relative_eq!(parts[0].0, 1.0, max_relative = 1e-15);
    let g = FamilyParams::g4b(1.3, 0.7, 5.0, 0.4).unwrap();
    let parts = g.g4b_decompose().unwrap();
    assert_eq!(parts.len(), 4);
    let total: f64 = parts.iter().map(|p| p.0).sum();
    assert_relative_eq!(total, 1.0, max_relative = 1e-14);
    for &x in &[0.05, 0.3, 0.77, 0.99] {
        let p = [x, 1.0 - x];
        let mix: f64 = parts.iter().map(|(w, f)| w * f.pdf(&p).unwrap()).sum();
        assert_relative_eq!(mix, g.pdf(&p).unwrap(), max_relative = 1e-10);
    }
    // Euler-integral normalization agrees with the finite sum
    let direct = FamilyParams::g4b(1.3, 0.7, 5.0 + 1e-9, 0.4).unwrap();
    assert!(matches!(direct.kind(), Kind::G4b { n: None, .. }));
    assert_relative_eq!(direct.ln_norm(), g.ln_norm(), epsilon = 1e-7);
    let frac = FamilyParams::g4b(1.3, 0.7, 2.5, 0.4).unwrap();
    assert!(matches!(frac.g4b_decompose(), Err(Error::Unsupported(_))));
    assert!(matches!(frac.sample(0, 10), Err(Error::Unsupported(_))));
}

#[test]
fn inverse_schlomilch_k2_is_swapped_schlomilch() {
    let is = FamilyParams::inverse_schlomilch(vec![0.8, 2.1], vec![0.3, 0.7], 1.6).unwrap();
    let s = FamilyParams::schlomilch(vec![2.1, 0.8], vec![0.7, 0.3], 1.6).unwrap();
    for &x in &[0.1, 0.45, 0.9] {
        assert_relative_eq!(is.log_pdf(&[x, 1.0 - x]).unwrap(), s.log_pdf(&[x, 1.0 - x]).unwrap(), epsilon = 1e-12);
    }
}

#[test]
fn superellipsoid_degenerates_to_simplex() {
    let alpha = vec![0.9, 1.6, 2.4];
    let se = FamilyParams::superellipsoid(alpha.clone(), vec![1.0; 2], vec![1.0; 2], vec![0.0; 2], 1.0).unwrap();
    let d = FamilyParams::dirichlet(alpha).unwrap();
    let x = [0.2, 0.5];
    assert_relative_eq!(se.log_pdf(&x).unwrap(), d.log_pdf(&[0.2, 0.5, 0.3]).unwrap(), epsilon = 1e-12);
    assert!(se.log_pdf(&[0.6, 0.5]).is_err());
    let m = superellipsoid_map(&[0.2, 0.5, 0.3], &[1.0; 2], &[1.0; 2], &[0.0; 2]).unwrap();
    assert_relative_eq!(m[0], 0.2, max_relative = 1e-15);
    assert_relative_eq!(m[1], 0.5, max_relative = 1e-15);
}

#[test]
fn superellipsoid_univariate_generalized_beta() {
    // K = 2: GB density a x^{aα₁−1}(1 − (1−c)(x/b)^a)^{α₂−1} / (b^{aα₁} B(α₁,α₂) (1 + c(x/b)^a)^{α₊})
    let (a1, a2, a, b, c) = (1.4, 2.3, 2.0, 1.5, 0.5);
    let se = FamilyParams::superellipsoid(vec![a1, a2], vec![a], vec![b], vec![c], 1.0).unwrap();
    let lnb = crate::specialfn::ln_multi_beta(&[a1, a2]);
    for &x in &[0.2, 1.0, 1.9] {
        let r: f64 = (x / b as f64).powf(a);
        let gb = a.ln() + (a * a1 - 1.0) * x.ln() + (a2 - 1.0) * (1.0 - (1.0 - c) * r).ln()
            - a * a1 * b.ln()
            - lnb
            - (a1 + a2) * (1.0 + c * r).ln();
        assert_relative_eq!(se.log_pdf(&[x]).unwrap(), gb, epsilon = 1e-12);
    }
}

#[test]
fn densities_integrate_to_one() {
    let fams = vec![
        FamilyParams::dirichlet(vec![0.5, 1.5, 2.0]).unwrap(),
        FamilyParams::schlomilch(vec![0.5, 1.5, 2.0], vec![0.2, 0.3, 0.5], 0.7).unwrap(),
        FamilyParams::dirichlet_mixture(vec![0.5, 1.5, 2.0], vec![0.2, 0.3, 0.5], 2, 1.5).unwrap(),
        FamilyParams::schlomilch_mixture(vec![0.5, 1.5, 2.0], vec![0.2, 0.3, 0.5], vec![0.6, 0.3, 0.1], 2, 1.0, 1.3)
            .unwrap(),
        FamilyParams::inverse_schlomilch(vec![0.5, 1.5, 2.0], vec![0.2, 0.3, 0.5], 1.2).unwrap(),
        FamilyParams::g4b(1.3, 0.7, 2.9, 0.4).unwrap(),
        FamilyParams::superellipsoid(vec![0.9, 1.6, 2.4], vec![2.0, 0.7], vec![1.0, 2.0], vec![0.5, -0.3], 1.0).unwrap(),
    ];
    for f in fams {
        let m = f.total_mass(1e-9).unwrap();
        assert!((m.value - 1.0).abs() < 1e-7, "{f}: {}", m.value);
    }
}

#[test]
fn sampler_determinism_and_shape() {
    let f = FamilyParams::schlomilch_mixture(vec![0.5, 1.5, 2.0], vec![0.2, 0.3, 0.5], vec![0.6, 0.3, 0.1], 2, 1.0, 1.3)
        .unwrap();
    let a = f.sample(42, 5000).unwrap();
    let b = f.sample(42, 5000).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, f.sample(43, 5000).unwrap());
    assert!(a.iter().all(|x| x.len() == 3 && (x.iter().sum::<f64>() - 1.0).abs() < 1e-12));
    assert!(a.iter().all(|x| f.log_pdf(x).unwrap().is_finite()));
    let prefix = f.sample(42, 100).unwrap();
    assert_eq!(&a[..100], &prefix[..]);
    let se = FamilyParams::superellipsoid(vec![0.9, 1.6, 2.4], vec![2.0, 0.7], vec![1.0, 2.0], vec![0.5, -0.3], 1.0)
        .unwrap();
    assert!(se.sample(1, 1000).unwrap().iter().all(|x| se.log_pdf(x).is_ok()));
}

#[test]
fn dirichlet_sample_mean() {
    let s = sample_dirichlet(&[1.0, 1.0, 1.0], 7, 100_000).unwrap();
    for i in 0..3 {
        let m: f64 = s.iter().map(|x| x[i]).sum::<f64>() / s.len() as f64;
        let se = (2.0f64 / 36.0 / s.len() as f64).sqrt();
        assert!((m - 1.0 / 3.0).abs() < 4.0 * se);
    }
}

#[test]
fn params_document_round_trip() {
    let f = FamilyParams::schlomilch_mixture(vec![0.5, 1.5], vec![0.2, 0.8], vec![0.6, 0.4], 2, 1.0, 1.3).unwrap();
    let doc = ParamsDoc::from(&f);
    let text = doc.to_json();
    assert!(!text.contains("kappa"));
    let back = ParamsDoc::from_json(&text).unwrap().to_family().unwrap();
    assert_eq!(back, f);
    let d = ParamsDoc::from_json(r#"{"family": "superellipsoid", "alpha": [1, 2], "a": [2], "b": [1], "c": [0.5]}"#)
        .unwrap()
        .to_family()
        .unwrap();
    assert_eq!(d.point_len(), 1);
    assert!(ParamsDoc::from_json(r#"{"family": "dirichlet"}"#).unwrap().to_family().is_err());
    assert!(ParamsDoc::from_json(r#"{"family": "dirichlet", "alpha": [1, 2], "zeta": 1}"#).is_err());
}
