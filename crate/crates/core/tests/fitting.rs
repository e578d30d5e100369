use ggfic::inference::{fit_full_from_null, fit_null, info_quantities, loglik, FitConfig, Sample};
use ggfic::selection::{aic, aic_star};
use ggfic::sim::{generate_replication, Scenario};
use ggfic::{fit_full, ModelParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn gompertz_fit_recovers_the_truth_at_large_n() {
    let truth = ModelParams::gompertz(0.0198, 0.0726).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let sample = Sample::new(truth.sample_lifespans(100_000, &mut rng, Some(30.0)).unwrap(), 30.0).unwrap();
    let fit = fit_null(&sample, &FitConfig::default()).unwrap();
    let se = fit.standard_errors().unwrap();
    assert!((fit.params.a() - 0.0198).abs() < 3.0 * se[0], "a = {} se {}", fit.params.a(), se[0]);
    assert!((fit.params.b() - 0.0726).abs() < 3.0 * se[1], "b = {} se {}", fit.params.b(), se[1]);
}

#[test]
fn gompertz_loglik_is_invariant_to_the_age_origin() {
    // moving the origin by s years multiplies a by e^{bs}; the truncated
    // likelihood of the same calendar ages must not change
    let p = ModelParams::gompertz(0.013, 0.092).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ys = p.sample_lifespans(2_000, &mut rng, Some(30.0)).unwrap();
    let base = loglik(&p, &Sample::new(ys.clone(), 30.0).unwrap()).unwrap();
    for s in [-10.0, 5.0, 20.0] {
        let q = ModelParams::gompertz(0.013 * (0.092f64 * s).exp(), 0.092).unwrap();
        let shifted: Vec<f64> = ys.iter().map(|y| y - s).collect();
        let l = loglik(&q, &Sample::new(shifted, 30.0 - s).unwrap()).unwrap();
        assert!((l - base).abs() < 1e-8 * base.abs(), "shift {s}: {l} vs {base}");
    }
}

#[test]
fn full_fit_is_reparameterization_invariant() {
    // fitting with the origin moved gives the same σ̂², b̂ and maximized loglik
    let sc = Scenario::preset("S2", 3_000, 1, 9).unwrap();
    let sample = generate_replication(&sc, 0).unwrap();
    let cfg = FitConfig::default();
    let fit = fit_full(&sample, &cfg).unwrap();
    let shifted = Sample::new(sample.lifespans().iter().map(|y| y - 10.0).collect(), sample.truncation() - 10.0).unwrap();
    let fit2 = fit_full(&shifted, &cfg).unwrap();
    assert!((fit.loglik - fit2.loglik).abs() < 1e-6, "{} vs {}", fit.loglik, fit2.loglik);
    assert!((fit.params.b() - fit2.params.b()).abs() < 1e-4 * fit.params.b());
    assert!((fit.params.sigma2() - fit2.params.sigma2()).abs() < 1e-5);
}

#[test]
fn aic_star_penalty_lies_between_two_and_four() {
    let cfg = FitConfig::default();
    for (name, rep) in [("S1", 0), ("S2", 1), ("S3", 2), ("S3", 3)] {
        let sc = Scenario::preset(name, 2_000, 4, 77).unwrap();
        let sample = generate_replication(&sc, rep).unwrap();
        let null = fit_null(&sample, &cfg).unwrap();
        let full = fit_full_from_null(&sample, &null, &cfg).unwrap();
        let info = info_quantities(&full, sample.n()).unwrap();
        let star = aic_star(&full, &null, &info).unwrap();
        let gap = star.score_full - aic(&full);
        assert!(gap > -2.0 && gap < 0.0, "{name}: AIC* - AIC = {gap}");
        assert!(full.loglik >= null.loglik);
    }
}

#[test]
fn kappa_matches_the_bootstrap_spread() {
    // parametric bootstrap of √n σ̂² under S1 at n ≈ 20000, where the
    // boundary is rarely hit; its variance should be of the order of κ̂²
    let sc = Scenario::preset("S1", 20_000, 40, 31).unwrap();
    let cfg = FitConfig::default();
    let mut values = Vec::new();
    let mut kappa2 = Vec::new();
    for r in 0..40 {
        let sample = generate_replication(&sc, r).unwrap();
        let full = fit_full(&sample, &cfg).unwrap();
        let info = info_quantities(&full, sample.n()).unwrap();
        values.push(info.delta_hat);
        kappa2.push(info.kappa2);
    }
    let m = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    let k2 = kappa2.iter().sum::<f64>() / kappa2.len() as f64;
    let ratio = var / k2;
    assert!((0.5..=2.0).contains(&ratio), "bootstrap variance {var}, mean kappa^2 {k2}");
}
