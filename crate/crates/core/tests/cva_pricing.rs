mod common;

use common::kou_baseline;
use levy_ifpt_core::curve::SurvivalCurve;
use levy_ifpt_core::cva::*;
use levy_ifpt_core::mc::{InitialLaw, McParams, PathRng, PathSimulator};
use levy_ifpt_core::quad::integrate;
use levy_ifpt_core::{Complex64, Error, MixedExpLevy, QuasiInvariantDist};
use statrs::distribution::{ContinuousCDF, Normal};

fn spec(rho: f64) -> CvaSpec {
    CvaSpec {
        s0: 100.0,
        strike: 100.0,
        maturity: 1.0,
        rate: 0.03,
        dividend: 0.01,
        rho,
        x: kou_baseline(),
        z: MixedExpLevy::kou(0.2, 0.0, 0.5, 0.5, 10.0, 8.0).unwrap(),
        curve: SurvivalCurve::exponential(0.05).unwrap(),
        numerics: CvaNumerics::default(),
    }
}

fn black_scholes_call(s: &CvaSpec, vol: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).unwrap();
    let sd = vol * s.maturity.sqrt();
    let d1 = ((s.s0 / s.strike).ln() + (s.rate - s.dividend + 0.5 * vol * vol) * s.maturity) / sd;
    s.s0 * (-s.dividend * s.maturity).exp() * n.cdf(d1) - s.strike * (-s.rate * s.maturity).exp() * n.cdf(d1 - sd)
}

#[test]
fn independent_default_gives_call_times_default_probability() {
    let mut s = spec(0.0);
    s.z = MixedExpLevy::new(0.25, 0.0, 0.0, 0.0, vec![], vec![]).unwrap();
    s.curve = SurvivalCurve::weibull(1.5, 8.0).unwrap();
    let call = black_scholes_call(&s, 0.25);
    let e = CvaEngine::new(&s).unwrap();
    for t in [0.1, 0.5, 0.9] {
        let p = e.exposure(t).unwrap().value;
        assert!((p - call).abs() < 1e-6 * call, "{p} vs {call}");
    }
    let r = e.value().unwrap();
    let want = call * (1.0 - s.curve.survival(s.maturity));
    assert!((r.pi - want).abs() < 1e-6 * want, "{} vs {want}", r.pi);
    assert!((call_price(&s).unwrap() - call).abs() < 1e-6 * call);
}

/// Regression values, confirmed against 10⁶-path simulation of (S, τ).
const FROZEN: [(f64, f64); 2] = [(0.5, 0.2074161908683409), (-0.5, 1.6554114709524974)];

#[test]
fn correlated_loss_matches_simulation() {
    for (rho, frozen) in FROZEN {
        let s = spec(rho);
        let r = cva_value(&s).unwrap();
        assert!((r.pi - frozen).abs() < 1e-6 * frozen, "ρ {rho}: {} vs frozen {frozen}", r.pi);
        let mc = cva_monte_carlo(&s, &McParams::new(100_000, 1.0, 21)).unwrap();
        assert!((r.pi - mc.pi.mean).abs() < 3.0 * mc.pi.se, "ρ {rho}: {} vs {} ± {}", r.pi, mc.pi.mean, mc.pi.se);
        assert!((mc.martingale.mean - 1.0).abs() < 3.0 * mc.martingale.se);
        let call = call_price(&s).unwrap();
        assert!(r.pi <= call);
        assert!((mc.call.mean - call).abs() < 3.0 * mc.call.se);
        assert!(r.exposure_curve.iter().all(|&(t, p)| t > 0.0 && t < 1.0 && p >= 0.0));
    }
}

#[test]
fn loss_grows_with_default_probability() {
    let mut prev = 0.0;
    for rate in [0.01, 0.03, 0.06] {
        let mut s = spec(0.5);
        s.curve = SurvivalCurve::exponential(rate).unwrap();
        let pi = cva_value(&s).unwrap().pi;
        assert!(pi > prev, "{rate}: {pi}");
        prev = pi;
    }
    let mut s = spec(0.5);
    s.curve = SurvivalCurve::exponential(1e-6).unwrap();
    assert!(cva_value(&s).unwrap().pi < 1e-4);
}

#[test]
fn conditional_law_at_default_against_simulation() {
    // ∫ E[e^{vX_{I(t)}} | τ = t] h(t) dt = E[e^{v(X_τ - X_0)}; τ <= T].
    let s = spec(0.5);
    let e = CvaEngine::new(&s).unwrap();
    for v in [0.5, -0.8] {
        let semi = integrate(
            |t| Ok(e.conditional_mgf(t, &[Complex64::new(v, 0.0)])?[0].re * s.curve.density(t)),
            0.0,
            1.0,
            1e-12,
            1e-8,
            100,
        )
        .unwrap()
        .value;
        let lam0 = e.lambda0();
        let dist = QuasiInvariantDist::new(&s.x, lam0).unwrap();
        let sim = PathSimulator::new(&s.x);
        let params = McParams::new(100_000, s.curve.cumulative_hazard(1.0) / lam0, 33);
        let draws: Vec<f64> = (0..params.paths)
            .map(|i| {
                let mut rng = PathRng::for_path(params.seed, i, false);
                let y0 = dist.draw(&mut rng);
                let fp = sim.first_passage(y0, &params, &mut rng);
                if fp.is_censored() { 0.0 } else { (v * (fp.position - y0)).exp() }
            })
            .collect();
        let mc = Estimate::from_values(draws).unwrap();
        assert!((semi - mc.mean).abs() < 3.0 * mc.se, "v {v}: {semi} vs {} ± {}", mc.mean, mc.se);
    }
    let g = e.conditional_mgf(0.5, &[Complex64::new(0.0, 0.0)]).unwrap();
    assert!((g[0].re - 1.0).abs() < 1e-7 && g[0].im.abs() < 1e-7);
}

#[test]
fn moment_conditions_are_enforced() {
    let mut s = spec(0.5);
    s.numerics.alpha = 12.0;
    assert!(matches!(cva_value(&s), Err(Error::MomentCondition(_))));
    let mut s = spec(0.5);
    s.curve = SurvivalCurve::exponential(0.5).unwrap();
    assert!(matches!(cva_value(&s), Err(Error::LambdaExceedsStar { .. })));
    let mut s = spec(0.5);
    s.numerics.xi_max = 5.0;
    assert!(matches!(cva_value(&s), Err(Error::InversionFailure(_))));
}
