//! Wiener–Hopf factors of mixed-exponential processes.
//!
//! With `z = iθ` the factors are the rational functions
//!
//! ```text
//! Ψ⁺(q, θ) = ∏(1 - z/α⁺) / ∏(1 - z/ρ⁺)      Ψ⁻(q, θ) = ∏(1 + z/α⁻) / ∏(1 - z/ρ⁻)
//! ```
//!
//! where `ρ±` are the two groups of roots of `ψ(ρ) = q`. For `q ∈ [-λ*, 0)`
//! the root `φ̄(q)` is assigned to the minus group, which gives the analytic
//! continuation in `q`.

use crate::error::{Error, Result};
use crate::levy::MixedExpLevy;
use crate::prelude::*;
use crate::qid::QuasiInvariantDist;
use crate::spectral::{compute_spectral, cramer_lundberg_roots, RootSet};

const POLE_TOL: f64 = 1e-12;

/// Both factors at a fixed `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct WhFactors {
    roots: RootSet,
    up_rates: Vec<f64>,
    down_rates: Vec<f64>,
}

fn ratio_factor(z: Complex64, rho: Complex64) -> Result<Complex64> {
    if rho == c(0.0) {
        return Ok(if z == c(0.0) { c(1.0) } else { c(0.0) });
    }
    let d = c(1.0) - z / rho;
    if d.norm() <= POLE_TOL {
        return Err(Error::PoleEvaluation { at: z, pole: rho.re });
    }
    Ok(d.inv())
}

impl WhFactors {
    pub fn new(model: &MixedExpLevy, q: Complex64) -> Result<Self> {
        Ok(Self::from_roots(model, cramer_lundberg_roots(model, q)?))
    }

    pub fn from_roots(model: &MixedExpLevy, roots: RootSet) -> Self {
        Self { roots, up_rates: model.up_rates(), down_rates: model.down_rates() }
    }

    pub fn roots(&self) -> &RootSet {
        &self.roots
    }

    pub fn q(&self) -> Complex64 {
        self.roots.q
    }

    /// `Ψ⁺(q, -iz)`; for real `z = -θ ≤ 0` this is `E[e^{-θ X*}]`.
    pub fn plus_at(&self, z: Complex64) -> Result<Complex64> {
        let mut v = c(1.0);
        for &a in &self.up_rates {
            v *= c(1.0) - z / a;
        }
        for &r in &self.roots.plus_roots {
            v *= ratio_factor(z, r)?;
        }
        Ok(v)
    }

    /// `Ψ⁻(q, -iz)`; for real `z ≥ 0` this is `E[e^{z X_*}]`.
    pub fn minus_at(&self, z: Complex64) -> Result<Complex64> {
        let mut v = c(1.0);
        for &a in &self.down_rates {
            v *= c(1.0) + z / a;
        }
        for &r in &self.roots.minus_roots {
            v *= ratio_factor(z, r)?;
        }
        Ok(v)
    }

    /// `Ψ⁻(q, -i(z+h)) / Ψ⁻(q, -iz) - 1`, accurate when `h` is small.
    pub fn minus_ratio_minus_one(&self, z: Complex64, h: Complex64) -> Result<Complex64> {
        // ∏(1 + δ) - 1 accumulated as e ← e + δ(1 + e).
        let mut e = c(0.0);
        for &a in &self.down_rates {
            let base = z + a;
            if base.norm() <= POLE_TOL * a {
                return Err(Error::PoleEvaluation { at: z, pole: -a });
            }
            e += h / base * (c(1.0) + e);
        }
        for &r in &self.roots.minus_roots {
            if r == c(0.0) {
                return Err(Error::PoleEvaluation { at: z, pole: 0.0 });
            }
            let shifted = r - z - h;
            if shifted.norm() <= POLE_TOL * r.norm() || (r - z).norm() <= POLE_TOL * r.norm() {
                return Err(Error::PoleEvaluation { at: z + h, pole: r.re });
            }
            e += h / shifted * (c(1.0) + e);
        }
        Ok(e)
    }

    /// `Ψ⁺(q, θ)`
    pub fn plus(&self, theta: Complex64) -> Result<Complex64> {
        self.plus_at(I * theta)
    }

    /// `Ψ⁻(q, θ)`
    pub fn minus(&self, theta: Complex64) -> Result<Complex64> {
        self.minus_at(I * theta)
    }
}

pub fn wh_plus(model: &MixedExpLevy, q: Complex64, theta: Complex64) -> Result<Complex64> {
    WhFactors::new(model, q)?.plus(theta)
}

pub fn wh_minus(model: &MixedExpLevy, q: Complex64, theta: Complex64) -> Result<Complex64> {
    WhFactors::new(model, q)?.minus(theta)
}

/// `|Ψ⁺Ψ⁻ - q/(q - Ψ(θ))|` for precomputed factors.
pub fn product_residual(model: &MixedExpLevy, wh: &WhFactors, theta: Complex64) -> Result<f64> {
    let q = wh.q();
    let prod = wh.plus(theta)? * wh.minus(theta)?;
    let psi = model.char_exponent(theta)?;
    let target = if q == c(0.0) {
        if theta == c(0.0) { c(1.0) } else { c(0.0) }
    } else {
        q / (q - psi)
    };
    Ok((prod - target).norm())
}

pub fn wh_product_residual(model: &MixedExpLevy, q: Complex64, theta: Complex64) -> Result<f64> {
    product_residual(model, &WhFactors::new(model, q)?, theta)
}

/// Residual of `Ψ±(q, s) = Ψ±_r(q+λ, s+ir) / Ψ±_r(q+λ, ir)` with `r = φ̄(-λ)`,
/// the larger of the two factors' residuals.
pub fn esscher_factor_identity_residual(
    model: &MixedExpLevy,
    q: f64,
    lam: f64,
    s: Complex64,
) -> Result<f64> {
    let spectral = compute_spectral(model)?;
    let r = spectral.phi_bar(model, lam)?;
    let shifted = model.esscher(r)?;
    let base = WhFactors::new(model, c(q))?;
    let tilted = WhFactors::new(&shifted, c(q + lam))?;
    let ir = I * r;
    let plus = tilted.plus(s + ir)? / tilted.plus(ir)?;
    let minus = tilted.minus(s + ir)? / tilted.minus(ir)?;
    let e_plus = (base.plus(s)? - plus).norm();
    let e_minus = (base.minus(s)? - minus).norm();
    Ok(e_plus.max(e_minus))
}

/// `Ψ⁺(-λ, iθ)` through the Esscher-shifted model at `q = 0`.
pub fn wh_plus_extended_via_esscher(model: &MixedExpLevy, lam: f64, theta: Complex64) -> Result<Complex64> {
    let r = compute_spectral(model)?.phi_bar(model, lam)?;
    let shifted = model.esscher(r)?;
    let tilted = WhFactors::new(&shifted, c(0.0))?;
    Ok(tilted.plus_at(-theta - r)? / tilted.plus_at(c(-r))?)
}

/// Laplace transform in the starting point of `E_x[e^{-θX(e(q))}; τ₀ > e(q)]`.
pub fn k_hat(model: &MixedExpLevy, theta: f64, q: f64, u: f64) -> Result<Complex64> {
    for (what, v) in [("theta", theta), ("q", q), ("u", u)] {
        if !(v > 0.0) {
            return Err(Error::OutOfRange { what, value: v, range: "(0, inf)".into() });
        }
    }
    let wh = WhFactors::new(model, c(q))?;
    Ok(wh.plus_at(c(-theta))? * wh.minus_at(c(u))? / (theta + u))
}

/// `E^μ[exp(-qτ₀ + v(X_τ₀ - X₀))]` for a mixed-exponential initial law.
///
/// Writing `μ((x, ∞)) = Σ wᵢ e^{-rᵢx}`, the overshoot identity gives
/// `1 - Σ wᵢ Ψ⁻(q, -i(rᵢ + v)) / Ψ⁻(q, -iv)`.
pub fn pecherskii_rogozin(
    model: &MixedExpLevy,
    mu: &QuasiInvariantDist,
    q: Complex64,
    v: Complex64,
) -> Result<Complex64> {
    let wh = WhFactors::new(model, q)?;
    pecherskii_rogozin_with(&wh, model, mu, v)
}

/// As [`pecherskii_rogozin`] with the factors at `q` already built.
pub fn pecherskii_rogozin_with(
    wh: &WhFactors,
    model: &MixedExpLevy,
    mu: &QuasiInvariantDist,
    v: Complex64,
) -> Result<Complex64> {
    if !(wh.q().re > 0.0) {
        return Err(Error::OutOfRange { what: "Re(q)", value: wh.q().re, range: "(0, inf)".into() });
    }
    // The start-point integral converges once the initial law decays faster
    // than the killed passage transform grows, i.e. beyond the minus roots.
    let slowest = mu.poles().iter().map(|r| r.re).fold(f64::INFINITY, f64::min);
    let edge = wh.roots().minus_roots.iter().map(|r| r.re).fold(f64::NEG_INFINITY, f64::max);
    if !(slowest + v.re > edge) {
        return Err(Error::MomentCondition(format!(
            "initial law (decay rate {slowest}) has no moment of order {} against the passage transform (edge {edge})",
            -v.re
        )));
    }
    let lower = model.theta_lower();
    if !(v.re > lower) {
        return Err(Error::MomentCondition(format!(
            "overshoot has no exponential moment of order {} (lower domain end {lower})",
            v.re
        )));
    }
    // Σwᵢ = 1, so the value is Σwᵢ(1 - Ψ⁻(rᵢ+v)/Ψ⁻(v)); each ratio is a product
    // of factors 1 + δ and `ratio_minus_one` avoids the cancellation for small rᵢ.
    let mut acc = c(0.0);
    for (w, r) in mu.weights().iter().zip(mu.poles()) {
        acc -= w * wh.minus_ratio_minus_one(v, *r)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brownian_factors_closed_form() {
        let m = MixedExpLevy::brownian(-1.0);
        let wh = WhFactors::new(&m, c(1.5)).unwrap();
        for &t in &[-2.0, -0.3, 0.0, 0.8, 4.0] {
            let th = c(t);
            let plus = c(3.0) / (c(3.0) - I * th);
            let minus = c(1.0) / (c(1.0) + I * th);
            assert!((wh.plus(th).unwrap() - plus).norm() < 1e-12);
            assert!((wh.minus(th).unwrap() - minus).norm() < 1e-12);
        }
    }

    #[test]
    fn factors_are_one_at_origin() {
        let m = MixedExpLevy::kou(0.2, -0.3, 1.0, 0.4, 3.0, 2.0).unwrap();
        let wh = WhFactors::new(&m, c(1.0)).unwrap();
        assert_eq!(wh.plus(c(0.0)).unwrap(), c(1.0));
        assert_eq!(wh.minus(c(0.0)).unwrap(), c(1.0));
        assert_eq!(product_residual(&m, &wh, c(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn product_identity_kou() {
        let m = MixedExpLevy::kou(0.2, -0.3, 1.0, 0.4, 3.0, 2.0).unwrap();
        let lstar = compute_spectral(&m).unwrap().lambda_star;
        for q in [c(0.5), Complex64::new(1.0, 3.0), c(-0.5 * lstar), c(-lstar)] {
            let wh = WhFactors::new(&m, q).unwrap();
            for &t in &[-5.0, -1.0, 0.3, 2.0, 10.0] {
                let r = product_residual(&m, &wh, c(t)).unwrap();
                assert!(r < 1e-10, "q={q} theta={t} residual {r}");
            }
        }
    }

    #[test]
    fn esscher_identity_brownian() {
        let m = MixedExpLevy::brownian(-1.0);
        let r = esscher_factor_identity_residual(&m, 1.0, 0.375, c(0.7)).unwrap();
        assert!(r < 1e-10, "{r}");
        assert_eq!(esscher_factor_identity_residual(&m, 1.0, 0.375, c(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn k_hat_brownian() {
        let m = MixedExpLevy::brownian(-1.0);
        // Ψ⁺(1.5, i) = 3/4 and Ψ⁻(1.5, -2i) = 1/3
        let v = k_hat(&m, 1.0, 1.5, 2.0).unwrap();
        let expect = 0.75 * (1.0 / 3.0) / 3.0;
        assert!((v - c(expect)).norm() < 1e-13);
    }
}
