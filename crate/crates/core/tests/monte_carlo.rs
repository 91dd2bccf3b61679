mod common;

use common::kou_baseline;
use levy_ifpt_core::curve::SurvivalCurve;
use levy_ifpt_core::ifpt::*;
use levy_ifpt_core::mc::*;
use levy_ifpt_core::spectral::compute_spectral;
use levy_ifpt_core::{MixedExpLevy, QuasiInvariantDist};
use statrs::distribution::{ContinuousCDF, Normal};

/// Passage time of `x0 + ηt + W_t` below zero.
fn brownian_passage_cdf(x0: f64, eta: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let n = Normal::new(0.0, 1.0).unwrap();
    let s = t.sqrt();
    n.cdf((-x0 - eta * t) / s) + (-2.0 * eta * x0).exp() * n.cdf((-x0 + eta * t) / s)
}

#[test]
fn brownian_passage_time_is_inverse_gaussian() {
    let m = MixedExpLevy::brownian(-0.5);
    let params = McParams { max_step: 0.5, ..McParams::new(20_000, f64::INFINITY, 11) };
    let taus: Vec<f64> = simulate_first_passages(&m, &1.0, &params).unwrap().iter().map(|s| s.tau).collect();
    let ks = ks_distance(&taus, |t| brownian_passage_cdf(1.0, -0.5, t)).unwrap();
    assert!(ks < 1.63 / (20_000f64).sqrt(), "{ks}");
}

#[test]
fn step_end_monitoring_is_biased_on_coarse_steps() {
    let m = MixedExpLevy::brownian(-0.5);
    let params = McParams { max_step: 0.5, bridge_correction: false, ..McParams::new(20_000, f64::INFINITY, 11) };
    let taus: Vec<f64> = simulate_first_passages(&m, &1.0, &params).unwrap().iter().map(|s| s.tau).collect();
    let ks = ks_distance(&taus, |t| brownian_passage_cdf(1.0, -0.5, t)).unwrap();
    assert!(ks > 0.05, "{ks}");
}

#[test]
fn invariant_start_gives_exponential_passage() {
    let m = kou_baseline();
    let lam = 0.6 * compute_spectral(&m).unwrap().lambda_star;
    let d = QuasiInvariantDist::new(&m, lam).unwrap();
    let params = McParams::new(20_000, 20.0, 5);
    let taus: Vec<f64> = simulate_first_passages(&m, &d, &params).unwrap().iter().map(|s| s.tau).collect();
    let grid: Vec<f64> = (1..=10).map(|k| 2.0 * k as f64).collect();
    for p in survival_grid(&taus, &grid).unwrap() {
        let want = (-lam * p.t).exp();
        assert!((p.survival - want).abs() < 4.0 * p.se.max(1e-3), "t {}: {} vs {want}", p.t, p.survival);
    }
}

#[test]
fn survivors_keep_the_invariant_law() {
    let m = kou_baseline();
    let lam = 0.6 * compute_spectral(&m).unwrap().lambda_star;
    let d = QuasiInvariantDist::new(&m, lam).unwrap();
    let params = McParams::new(20_000, 1.0, 6);
    let alive: Vec<f64> = simulate_first_passages(&m, &d, &params)
        .unwrap()
        .iter()
        .filter(|s| s.is_censored())
        .map(|s| s.position)
        .collect();
    let ks = ks_distance(&alive, |x| d.cdf(x)).unwrap();
    assert!(ks < 1.63 / (alive.len() as f64).sqrt(), "{ks}");
}

#[test]
fn time_changed_passage_reproduces_the_curve() {
    let m = kou_baseline();
    let curve = SurvivalCurve::weibull(2.0, 1.0).unwrap();
    // λ⁰ = 1 exceeds λ* for this model, so use an explicit admissible rate.
    let err = solve_rifpt(&m, &curve, LambdaChoice::Normalized(1.0)).unwrap_err();
    assert!(err.is_validation());
    let lam = 0.5 * compute_spectral(&m).unwrap().lambda_star;
    let sol = solve_rifpt(&m, &curve, LambdaChoice::Explicit(lam)).unwrap();
    let params = McParams::new(20_000, 2.5, 8);
    let taus: Vec<f64> = simulate_time_changed_fp(&sol, &params).unwrap().iter().map(|s| s.tau).collect();
    let grid = [0.2, 0.5, 0.8, 1.0, 1.3, 1.7, 2.0];
    for p in survival_grid(&taus, &grid).unwrap() {
        let want = curve.survival(p.t);
        assert!((p.survival - want).abs() < 4.0 * p.se.max(1e-3), "t {}: {} vs {want}", p.t, p.survival);
    }
}

#[test]
fn empirical_time_change_recovers_the_invariant_one() {
    let m = kou_baseline();
    let lam = 0.6 * compute_spectral(&m).unwrap().lambda_star;
    let d = QuasiInvariantDist::new(&m, lam).unwrap();
    let curve = SurvivalCurve::exponential(0.5).unwrap();
    let params = McParams::new(20_000, 60.0, 9);
    let tc = time_change_general(&m, &d, &curve, &params, 2.0).unwrap();
    let exact = time_change_qid(&curve, lam).unwrap();
    for t in [0.25, 0.5, 1.0, 1.5] {
        let rel = (tc.eval(t) - exact.eval(t)).abs() / exact.eval(t);
        assert!(rel < 0.05, "t {t}: {} vs {}", tc.eval(t), exact.eval(t));
    }
}

#[test]
fn frailty_mixture_survival() {
    let m = kou_baseline();
    let lam = 0.5 * compute_spectral(&m).unwrap().lambda_star;
    let name = |rate: f64| FrailtyName { model: m.clone(), curve: SurvivalCurve::exponential(rate).unwrap(), lam };
    let spec = FrailtySpec {
        states: vec![
            FrailtyState { prob: 0.3, names: vec![name(1.5), name(2.0)] },
            FrailtyState { prob: 0.7, names: vec![name(0.3), name(0.5)] },
        ],
    };
    let sol = solve_frailty(&spec).unwrap();
    let sims = sol.simulators();
    let params = McParams::new(20_000, 3.0, 10);
    let paths: Vec<Vec<f64>> = (0..params.paths).map(|i| sol.simulate_path(&sims, &params, i)).collect();
    let n = paths.len() as f64;
    for t1 in [0.2, 1.0, 2.0] {
        for t2 in [0.3, 1.5] {
            let s = paths.iter().filter(|p| p[0] > t1 && p[1] > t2).count() as f64 / n;
            let want = sol.joint_survival(&[t1, t2]);
            let se = (want * (1.0 - want) / n).sqrt();
            assert!((s - want).abs() < 4.0 * se, "({t1}, {t2}): {s} vs {want}");
        }
    }
}

#[test]
fn antithetic_pairs_mirror_their_draws() {
    let mut a = PathRng::for_path(1, 4, true);
    let mut b = PathRng::for_path(1, 5, true);
    for _ in 0..10 {
        assert!((a.uniform() + b.uniform() - 1.0).abs() < 1e-15);
        assert_eq!(a.normal(), -b.normal());
    }
}
