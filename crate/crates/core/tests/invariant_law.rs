mod common;

use common::{kou_baseline, random_model};
use levy_ifpt_core::mc::{ks_distance, PathRng};
use levy_ifpt_core::qid::{invariance_residual_bromwich, invariance_residual_residue, mu_hat};
use levy_ifpt_core::quad::integrate;
use levy_ifpt_core::spectral::compute_spectral;
use levy_ifpt_core::{Complex64, Error, MixedExpLevy, QuasiInvariantDist};

#[test]
fn brownian_law_is_a_difference_of_two_exponentials() {
    for eta in [-0.5, -1.0, -2.0] {
        let m = MixedExpLevy::brownian(eta);
        for frac in [0.25, 0.5, 0.75] {
            let lam = frac * eta * eta / 2.0;
            let disc = (eta * eta - 2.0 * lam).sqrt();
            let (lo, hi) = (-eta - disc, -eta + disc);
            let d = QuasiInvariantDist::new(&m, lam).unwrap();
            for x in [0.0, 0.1, 1.0, 5.0] {
                let tail = (hi * (-lo * x).exp() - lo * (-hi * x).exp()) / (hi - lo);
                assert!((d.tail(x) - tail).abs() < 1e-10);
                let dens = lo * hi * ((-lo * x).exp() - (-hi * x).exp()) / (hi - lo);
                assert!((d.density(x) - dens).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn law_is_a_probability_with_matching_transform() {
    for i in 0..6 {
        let m = random_model(i);
        let ls = compute_spectral(&m).unwrap().lambda_star;
        let d = QuasiInvariantDist::new(&m, 0.6 * ls).unwrap();
        assert!((d.tail(0.0) - 1.0).abs() < 1e-12);
        let top = d.x_max();
        let mass = integrate(|x| Ok(d.density(x)), 0.0, top, 1e-14, 1e-12, 500).unwrap().value;
        assert!((mass - 1.0).abs() < 1e-8, "model {i}: {mass}");
        for th in [0.2, 1.0, 4.0] {
            let lt = integrate(|x| Ok(d.density(x) * (-th * x).exp()), 0.0, top, 1e-14, 1e-12, 500).unwrap().value;
            let a = d.laplace(Complex64::new(th, 0.0));
            let b = mu_hat(&m, 0.6 * ls, Complex64::new(th, 0.0)).unwrap();
            assert!((a.re - lt).abs() < 1e-8 && (a - b).norm() < 1e-12);
            assert!((d.laplace_from_terms(Complex64::new(th, 0.0)) - a).norm() < 1e-10);
        }
    }
}

#[test]
fn invariance_identity_in_residue_and_contour_form() {
    for i in 0..4 {
        let m = random_model(i);
        let ls = compute_spectral(&m).unwrap().lambda_star;
        for frac in [0.3, 0.6, 0.9] {
            for q in [0.2, 1.0, 5.0] {
                for th in [0.1, 1.0, 3.0] {
                    let r = invariance_residual_residue(&m, frac * ls, q, th).unwrap();
                    assert!(r < 1e-9, "model {i}: {r}");
                }
            }
        }
        let b = invariance_residual_bromwich(&m, 0.5 * ls, 1.0, 1.0).unwrap();
        assert!(b < 1e-7, "model {i}: {b}");
    }
}

#[test]
fn quantiles_invert_the_cdf_and_samples_fit() {
    let m = kou_baseline();
    let d = QuasiInvariantDist::new(&m, 0.04).unwrap();
    for u in [1e-6, 0.1, 0.5, 0.9, 0.999999] {
        assert!((d.cdf(d.quantile(u)) - u).abs() < 1e-10);
    }
    let mut rng = PathRng::new(3, 0, false);
    let xs: Vec<f64> = (0..20_000).map(|_| d.quantile(rng.uniform())).collect();
    assert!(ks_distance(&xs, |x| d.cdf(x)).unwrap() < 0.015);
}

#[test]
fn critical_rate_has_no_law() {
    let m = kou_baseline();
    let ls = compute_spectral(&m).unwrap().lambda_star;
    assert!(matches!(QuasiInvariantDist::new(&m, ls), Err(Error::RepeatedRoots { .. })));
    assert!(QuasiInvariantDist::new(&m, 1.1 * ls).is_err());
}
