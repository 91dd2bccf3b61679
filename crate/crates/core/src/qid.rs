//! The λ-invariant initial law of the process killed on entering `(-∞, 0)`.
//!
//! Its Laplace transform is `μ̂(θ) = ∏ rᵢ/(rᵢ + θ) · ∏(1 + θ/α⁺)` over the poles
//! `rᵢ ∈ {φ̄(-λ)} ∪ {ρ⁺(-λ)}`, and partial fractions give
//! `μ((x, ∞)) = Σ wᵢ e^{-rᵢx}` with `wᵢ = ∏_{j≠i} (1 - rᵢ/rⱼ)⁻¹ ∏(1 - rᵢ/α⁺)`.

use crate::error::{Error, Result};
use crate::levy::MixedExpLevy;
use crate::prelude::*;
use crate::spectral::{compute_spectral, roots_with_spectral};
use crate::wiener_hopf::WhFactors;

pub const POSITIVITY_GRID: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiInvariantDist {
    lam: f64,
    lambda_star: f64,
    phi_bar: f64,
    poles: Vec<Complex64>,
    weights: Vec<Complex64>,
    up_rates: Vec<f64>,
    /// One entry per real pole or conjugate pair (upper half-plane member).
    terms: Vec<(Complex64, Complex64)>,
}

/// `μ̂_λ(θ)` from the product form.
pub fn mu_hat(model: &MixedExpLevy, lam: f64, theta: Complex64) -> Result<Complex64> {
    let sp = compute_spectral(model)?;
    let lam = sp.check_lambda(lam)?;
    let roots = roots_with_spectral(model, Some(&sp), c(-lam))?;
    let fb = roots.phi_bar.expect("negative q carries phi_bar");
    let wh = WhFactors::from_roots(model, roots);
    Ok(c(fb) / (theta + fb) * wh.plus_at(-theta)?)
}

pub fn build_qid(model: &MixedExpLevy, lam: f64) -> Result<QuasiInvariantDist> {
    QuasiInvariantDist::new(model, lam)
}

pub fn qid_cdf(dist: &QuasiInvariantDist, x: f64) -> f64 {
    dist.cdf(x)
}

pub fn qid_sample<R: rand::Rng + ?Sized>(dist: &QuasiInvariantDist, rng: &mut R) -> f64 {
    dist.sample(rng)
}

impl QuasiInvariantDist {
    pub fn new(model: &MixedExpLevy, lam: f64) -> Result<Self> {
        let sp = compute_spectral(model)?;
        let lam = sp.check_lambda(lam)?;
        let roots = roots_with_spectral(model, Some(&sp), c(-lam))?;
        if roots.confluent {
            return Err(Error::RepeatedRoots { a: c(sp.theta_star), b: c(sp.theta_star) });
        }
        let phi_bar = roots.phi_bar.expect("negative q carries phi_bar");
        let mut poles = vec![c(phi_bar)];
        poles.extend(roots.plus_roots.iter().copied());
        let up_rates = model.up_rates();
        let weights: Vec<Complex64> = poles
            .iter()
            .enumerate()
            .map(|(i, &ri)| {
                let mut w = c(1.0);
                for (j, &rj) in poles.iter().enumerate() {
                    if j != i {
                        w /= c(1.0) - ri / rj;
                    }
                }
                for &a in &up_rates {
                    w *= c(1.0) - ri / a;
                }
                w
            })
            .collect();
        let terms = poles
            .iter()
            .zip(&weights)
            .filter(|(r, _)| r.im >= 0.0)
            .map(|(&r, &w)| if r.im == 0.0 { (c(w.re), r) } else { (w, r) })
            .collect();
        let dist = Self { lam, lambda_star: sp.lambda_star, phi_bar, poles, weights, up_rates, terms };
        let (min, max) = dist.density_range_on_grid();
        if min < -1e-12 * max.max(1.0) {
            return Err(Error::DegenerateModel(format!(
                "invariant density takes the negative value {min}"
            )));
        }
        Ok(dist)
    }

    pub fn lambda(&self) -> f64 {
        self.lam
    }
    pub fn lambda_star(&self) -> f64 {
        self.lambda_star
    }
    pub fn phi_bar(&self) -> f64 {
        self.phi_bar
    }
    /// Decay rates `rᵢ` (complex ones appear with their conjugates).
    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }
    /// Tail weights `wᵢ`, aligned with [`Self::poles`].
    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// Combined terms: real poles, and one representative per conjugate pair.
    pub fn terms(&self) -> &[(Complex64, Complex64)] {
        &self.terms
    }

    fn sum_terms(&self, f: impl Fn(Complex64, Complex64) -> Complex64) -> f64 {
        self.terms
            .iter()
            .map(|&(w, r)| {
                let v = f(w, r);
                if r.im == 0.0 { v.re } else { 2.0 * v.re }
            })
            .sum()
    }

    /// `μ((x, ∞))`
    pub fn tail(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        self.sum_terms(|w, r| w * (-r * x).exp())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        (1.0 - self.tail(x)).clamp(0.0, 1.0)
    }

    pub fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        self.sum_terms(|w, r| w * r * (-r * x).exp())
    }

    pub fn mean(&self) -> f64 {
        self.sum_terms(|w, r| w / r)
    }

    /// Laplace transform `∫e^{-θx}μ(dx)` from the product form.
    pub fn laplace(&self, theta: Complex64) -> Complex64 {
        let mut v = c(1.0);
        for &r in &self.poles {
            v *= r / (r + theta);
        }
        for &a in &self.up_rates {
            v *= c(1.0) + theta / a;
        }
        v
    }

    /// Laplace transform from the partial-fraction terms.
    pub fn laplace_from_terms(&self, theta: Complex64) -> Complex64 {
        self.weights.iter().zip(&self.poles).map(|(&w, &r)| w * r / (r + theta)).sum()
    }

    /// Point beyond which the tail mass is below `1e-10`.
    pub fn x_max(&self) -> f64 {
        let scale: f64 = self.weights.iter().map(|w| w.norm()).sum();
        ((scale * 1e10).ln() / self.phi_bar).max(1.0)
    }

    /// Geometric grid from `1e-4` to [`Self::x_max`].
    pub fn grid(&self) -> Vec<f64> {
        let (a, b) = (1e-4f64, self.x_max());
        let n = POSITIVITY_GRID;
        (0..n).map(|k| a * (b / a).powf(k as f64 / (n - 1) as f64)).collect()
    }

    fn density_range_on_grid(&self) -> (f64, f64) {
        self.grid().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            let d = self.density(x);
            (lo.min(d), hi.max(d))
        })
    }

    /// Inverse of the CDF at probability `u ∈ (0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        if !(u > 0.0) {
            return 0.0;
        }
        if u >= 1.0 {
            return f64::INFINITY;
        }
        let target = 1.0 - u;
        let mut hi = 1.0 / self.phi_bar;
        while self.tail(hi) > target {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        let mut x = 0.5 * hi;
        for _ in 0..200 {
            let g = self.tail(x) - target;
            if g > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if hi - lo <= 1e-12 * hi.max(1.0) {
                break;
            }
            let d = self.density(x);
            let newton = x + g / d;
            if d > 0.0 && (newton - x).abs() <= 1e-14 * x {
                x = newton;
                break;
            }
            x = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        x
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.quantile(u)
    }
}

/// `|Ψ⁺(q, iθ) Σ wᵢrᵢ Ψ⁻(q, -irᵢ)/(rᵢ + θ) - q/(q + λ) μ̂(θ)|`: the residues of
/// `u ↦ Ψ⁺(q, iθ) μ̂(-u) Ψ⁻(q, -iu)/(u + θ)` at the poles of `μ̂(-u)` against the
/// invariance identity.
pub fn invariance_residual_residue(model: &MixedExpLevy, lam: f64, q: f64, theta: f64) -> Result<f64> {
    let dist = QuasiInvariantDist::new(model, lam)?;
    let wh = WhFactors::new(model, c(q))?;
    let mut sum = c(0.0);
    for (&w, &r) in dist.weights.iter().zip(&dist.poles) {
        sum += w * r * wh.minus_at(r)? / (r + theta);
    }
    let lhs = wh.plus_at(c(-theta))? * sum;
    let rhs = dist.laplace(c(theta)) * (q / (q + dist.lam));
    Ok((lhs - rhs).norm())
}

/// Same identity with the left side as a numerical contour integral along
/// `Re u = φ̄/2`, using `y = sinh t` on the imaginary part and the trapezoid rule.
pub fn invariance_residual_bromwich(model: &MixedExpLevy, lam: f64, q: f64, theta: f64) -> Result<f64> {
    let dist = QuasiInvariantDist::new(model, lam)?;
    let wh = WhFactors::new(model, c(q))?;
    let a = 0.5 * dist.phi_bar;
    let front = wh.plus_at(c(-theta))?;
    let integrand = |t: f64| -> Result<f64> {
        let (sh, ch) = (t.sinh(), t.cosh());
        let u = Complex64::new(a, sh);
        let f = front * dist.laplace(-u) * wh.minus_at(u)? / (u + theta);
        Ok(f.re * ch)
    };
    // the nearest poles sit a distance `a` either side of the contour
    let h = (0.01 / (1.0 + theta.abs())).min(0.25 * a);
    let mut sum = 0.5 * integrand(0.0)?;
    let mut k = 1usize;
    let mut t_max = 4.0;
    loop {
        while (k as f64) * h <= t_max {
            sum += integrand(k as f64 * h)?;
            k += 1;
        }
        let edge = integrand((k - 1) as f64 * h)?.abs();
        if 0.5 * edge / core::f64::consts::PI < 1e-10 {
            break;
        }
        t_max *= 2.0;
        if t_max > 128.0 {
            return Err(Error::QuadratureFailure(format!("contour tail still {edge} at t = {t_max}")));
        }
    }
    let lhs = sum * h / core::f64::consts::PI;
    let rhs = dist.laplace(c(theta)).re * (q / (q + dist.lam));
    Ok((lhs - rhs).abs())
}
