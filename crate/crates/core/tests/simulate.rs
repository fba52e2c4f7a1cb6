use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use svs_phase::fisher::{self, PhaseDensity};
use svs_phase::quadrature::integrate;
use svs_phase::simulate::{circular_mean, run_trials, Estimator, PhaseEstimator, PhaseSampler, TrialConfig};

fn draw(beta: f64, theta: f64, count: usize, seed: u64) -> Vec<f64> {
    let pd = PhaseDensity::new(beta).unwrap();
    let sampler = PhaseSampler::new(&pd).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| sampler.sample(theta, &mut rng)).collect()
}

/// Kolmogorov 1% critical value `c(α)/√n_eff`.
fn ks_critical(n_eff: f64) -> f64 {
    1.628 / n_eff.sqrt()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

fn config(n: f64, copies: u32, trials: u32, seed: u64, estimator: Estimator) -> TrialConfig {
    TrialConfig {
        n,
        copies,
        trials,
        seed,
        estimator,
        theta_true: 0.8,
    }
}

#[test]
fn vacuum_outcomes_are_uniform() {
    let s = sorted(draw(0.0, 0.5, 100_000, 11));
    let n = s.len() as f64;
    let d = s
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let u = x / PI;
            (u - i as f64 / n).abs().max(((i + 1) as f64 / n - u).abs())
        })
        .fold(0.0, f64::max);
    assert!(d < ks_critical(n), "D = {d}");
}

#[test]
fn outcomes_shift_with_the_phase() {
    let delta = 0.3;
    let a = sorted(draw(0.9, 0.0, 40_000, 1));
    let b = sorted(draw(0.9, delta, 40_000, 2).into_iter().map(|x| (x - delta).rem_euclid(PI)).collect());
    let d = ks_two_sample(&a, &b);
    let n_eff = (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64;
    assert!(d < ks_critical(n_eff), "D = {d}");
}

#[test]
fn histogram_matches_density() {
    let (beta, theta) = (0.9, 0.3);
    let count = 100_000;
    let pd = PhaseDensity::new(beta).unwrap();
    let bins = 80;
    let width = PI / bins as f64;
    let mut observed = vec![0.0; bins];
    for x in draw(beta, theta, count, 5) {
        observed[((x / width) as usize).min(bins - 1)] += 1.0;
    }
    // Expected counts by direct quadrature of the density.
    let expected: Vec<f64> = (0..bins)
        .map(|j| {
            let a = j as f64 * width;
            count as f64 * integrate(|phi| pd.density(phi, theta), a, a + width, 1e-10, 0.0).unwrap().value
        })
        .collect();
    assert!(expected.iter().all(|&e| e >= 5.0));
    let chi2: f64 = observed.iter().zip(&expected).map(|(o, e)| (o - e) * (o - e) / e).sum();
    let critical = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.99);
    assert!(chi2 < critical, "chi2 = {chi2}, critical = {critical}");
}

#[test]
fn symmetric_samples_give_their_centre() {
    let t0 = 2.0;
    let samples: Vec<f64> = [-0.3, -0.1, 0.1, 0.3].iter().map(|d| t0 + d).collect();
    assert!((circular_mean(&samples) - t0).abs() < 1e-12);
}

#[test]
fn same_seed_same_report() {
    let tc = config(2.0, 50, 40, 99, Estimator::MaxLikelihood);
    let a = run_trials(&tc).unwrap();
    let b = run_trials(&tc).unwrap();
    assert_eq!(a, b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = run_trials(&TrialConfig { seed: 100, ..tc }).unwrap();
    assert_ne!(a.empirical_fidelity, c.empirical_fidelity);
}

#[test]
fn vacuum_trials_carry_no_information() {
    let trials = 400;
    let r = run_trials(&config(0.0, 10, trials, 3, Estimator::CircularMean)).unwrap();
    assert!(r.empirical_fidelity < 3.0 / (trials as f64).sqrt());
    assert!((0.0..=1.0).contains(&r.empirical_fidelity));
    let r = run_trials(&config(0.0, 10, trials, 3, Estimator::MaxLikelihood)).unwrap();
    assert_eq!(r.ml_fallbacks, trials);
}

#[test]
fn ml_variance_reaches_finite_n_bound() {
    let (n, copies) = (2.0, 400);
    let r = run_trials(&config(n, copies, 400, 17, Estimator::MaxLikelihood)).unwrap();
    let bound = fisher::cramer_rao_exact(&PhaseDensity::from_photons(n).unwrap(), copies).unwrap();
    let ratio = r.stat_variance / bound;
    assert!((ratio - 1.0).abs() < 0.2, "ratio {ratio}");
    assert!(r.im_residual.abs() < 3.0 / 20.0);
    assert!(r.re_residual > 0.0);
}

#[test]
fn variance_scales_inversely_with_copies() {
    let n = 5.0;
    let scaled: Vec<f64> = [500u32, 1000, 2000]
        .iter()
        .map(|&c| run_trials(&config(n, c, 400, 23, Estimator::MaxLikelihood)).unwrap().stat_variance * c as f64)
        .collect();
    let mean = scaled.iter().sum::<f64>() / 3.0;
    for s in &scaled {
        assert!((s / mean - 1.0).abs() < 0.2, "{scaled:?}");
    }
}

#[test]
fn seeds_do_not_change_the_physics() {
    let reports: Vec<_> = (0..20u64)
        .map(|seed| run_trials(&config(2.0, 100, 200, seed, Estimator::MaxLikelihood)).unwrap())
        .collect();
    let pooled = reports.iter().map(|r| r.empirical_holevo_variance).sum::<f64>() / 20.0;
    for r in &reports {
        assert!(
            (r.empirical_holevo_variance - pooled).abs() < 4.0 * r.ci_halfwidth,
            "seed {}: {} vs {pooled}",
            r.config.seed,
            r.empirical_holevo_variance
        );
    }
}

#[test]
fn circular_mean_is_no_better_than_ml() {
    for (n, copies) in [(1.0, 50), (5.0, 200), (20.0, 100)] {
        let cm = run_trials(&config(n, copies, 300, 8, Estimator::CircularMean)).unwrap();
        let ml = run_trials(&config(n, copies, 300, 8, Estimator::MaxLikelihood)).unwrap();
        let slack = 2.0 * (cm.ci_halfwidth + ml.ci_halfwidth);
        assert!(
            cm.empirical_holevo_variance + slack >= ml.empirical_holevo_variance,
            "n = {n}, N = {copies}"
        );
    }
}

#[test]
fn estimator_reuses_its_table() {
    let pd = PhaseDensity::new(0.9).unwrap();
    let est = PhaseEstimator::new(&pd);
    let samples = draw(0.9, 1.2, 500, 4);
    let a = est.estimate(&samples, Estimator::MaxLikelihood).unwrap();
    let b = svs_phase::simulate::estimate(&samples, Estimator::MaxLikelihood, &pd).unwrap();
    assert_eq!(a, b);
    assert!((a.theta - 1.2).abs() < 0.05);
}
