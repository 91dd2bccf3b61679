//! `θ*`, `λ*`, the left inverse `φ̄` and roots of `ψ(ρ) = q`.

use crate::error::{Error, Result};
use crate::levy::MixedExpLevy;
use crate::poly::Poly;
use crate::prelude::*;

/// Relative separation below which two roots are treated as coincident.
pub const ROOT_SEPARATION: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralData {
    /// Minimiser of `ψ` on `(0, θ̄)`.
    pub theta_star: f64,
    /// `-ψ(θ*)`, the largest admissible killing rate.
    pub lambda_star: f64,
}

/// Roots of `ψ(ρ) = q`, split into the two Wiener–Hopf groups.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub q: Complex64,
    /// Roots belonging to the supremum factor.
    pub plus_roots: Vec<Complex64>,
    /// Roots belonging to the infimum factor (including `φ̄` when `q < 0`, and `0` when `q = 0`).
    pub minus_roots: Vec<Complex64>,
    /// `φ̄(q)` when `q ∈ [-λ*, 0)`.
    pub phi_bar: Option<f64>,
    /// `q = -λ*`: `θ*` is a double root and appears twice in `minus_roots`.
    pub confluent: bool,
}

impl RootSet {
    pub fn all_roots(&self) -> impl Iterator<Item = &Complex64> {
        self.plus_roots.iter().chain(self.minus_roots.iter())
    }
}

pub fn compute_spectral(model: &MixedExpLevy) -> Result<SpectralData> {
    let mean = model.mean_drift();
    if !(mean < 0.0) {
        return Err(Error::NotNegativeDrift(mean));
    }
    let upper = model.theta_upper();
    let mut hi;
    if upper.is_finite() {
        hi = upper * (1.0 - 1e-12);
        if model.dpsi(hi) <= 0.0 {
            return Ok(SpectralData { theta_star: hi, lambda_star: -model.psi(hi) });
        }
    } else {
        hi = 1.0;
        while model.dpsi(hi) <= 0.0 {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::DegenerateModel("psi has no minimum on (0, inf)".into()));
            }
        }
    }
    let mut lo = 0.0;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if model.dpsi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta_star = 0.5 * (lo + hi);
    let lambda_star = -model.psi(theta_star);
    if !(lambda_star > 0.0) {
        return Err(Error::DegenerateModel(format!("lambda* = {lambda_star} is not positive")));
    }
    Ok(SpectralData { theta_star, lambda_star })
}

impl SpectralData {
    /// Checks `0 < λ ≤ λ*`, snapping values within rounding of `λ*` onto it.
    pub fn check_lambda(&self, lam: f64) -> Result<f64> {
        if !(lam > 0.0) || !lam.is_finite() {
            return Err(Error::OutOfRange {
                what: "lambda",
                value: lam,
                range: format!("(0, {}]", self.lambda_star),
            });
        }
        if lam > self.lambda_star * (1.0 + 1e-12) {
            return Err(Error::LambdaExceedsStar { lambda: lam, lambda_star: self.lambda_star });
        }
        Ok(lam.min(self.lambda_star))
    }

    fn is_star(&self, lam: f64) -> bool {
        (lam - self.lambda_star).abs() <= 1e-12 * self.lambda_star
    }

    /// `φ̄(-λ)`, the root of `ψ(x) = -λ` in `(0, θ*]`.
    pub fn phi_bar(&self, model: &MixedExpLevy, lam: f64) -> Result<f64> {
        let lam = self.check_lambda(lam).map_err(|e| match e {
            Error::LambdaExceedsStar { lambda, lambda_star } => Error::OutOfRange {
                what: "lambda",
                value: lambda,
                range: format!("(0, {lambda_star}]"),
            },
            e => e,
        })?;
        if self.is_star(lam) {
            return Ok(self.theta_star);
        }
        let g = |x: f64| model.psi(x) + lam;
        let (mut lo, mut hi) = (0.0, self.theta_star);
        let mut x = 0.5 * hi;
        for _ in 0..200 {
            let gx = g(x);
            if gx > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if gx == 0.0 || hi - lo <= 1e-15 * hi {
                break;
            }
            let d = model.dpsi(x);
            let newton = x - gx / d;
            let next = if d < 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if (next - x).abs() <= 1e-16 * x {
                x = next;
                break;
            }
            x = next;
        }
        Ok(x)
    }
}

pub fn phi_bar(model: &MixedExpLevy, lam: f64) -> Result<f64> {
    compute_spectral(model)?.phi_bar(model, lam)
}

fn product_except(factors: &[Poly], skip: Option<usize>) -> Poly {
    factors
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .fold(Poly::constant(c(1.0)), |acc, (_, f)| acc.mul(f))
}

/// `∏(α⁺ - ρ)∏(α⁻ + ρ)(ψ(ρ) - q)` as a polynomial in `ρ`.
pub fn cleared_polynomial(model: &MixedExpLevy, q: Complex64) -> Poly {
    let up = model.up_poles();
    let down = model.down_poles();
    let mut factors: Vec<Poly> = up.iter().map(|p| Poly::linear(c(p.rate), c(-1.0))).collect();
    factors.extend(down.iter().map(|p| Poly::linear(c(p.rate), c(1.0))));
    let s2 = model.sigma() * model.sigma();
    let quad = Poly(vec![-q, c(model.eta()), c(0.5 * s2)]);
    let mut out = quad.mul(&product_except(&factors, None));
    let rho = Poly(vec![c(0.0), c(1.0)]);
    for (k, p) in up.iter().enumerate() {
        out.add_assign(&rho.mul(&product_except(&factors, Some(k))).scale(c(p.mass)));
    }
    for (j, p) in down.iter().enumerate() {
        let idx = up.len() + j;
        out.add_assign(&rho.mul(&product_except(&factors, Some(idx))).scale(c(-p.mass)));
    }
    out
}

fn expected_degree(model: &MixedExpLevy) -> usize {
    let m = model.up_poles().len() + model.down_poles().len();
    if model.sigma() > 0.0 {
        m + 2
    } else if model.eta() != 0.0 {
        m + 1
    } else {
        m
    }
}

fn polish(model: &MixedExpLevy, q: Complex64, roots: &mut [Complex64]) {
    for i in 0..roots.len() {
        let gap = roots
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, r)| (r - roots[i]).norm())
            .fold(f64::INFINITY, f64::min);
        let mut z = roots[i];
        let mut res = (model.psi_unchecked(z) - q).norm();
        for _ in 0..20 {
            let step = (model.psi_unchecked(z) - q) / model.dpsi_unchecked(z);
            if !step.is_finite() || step.norm() > 0.25 * gap {
                break;
            }
            let next = z - step;
            let next_res = (model.psi_unchecked(next) - q).norm();
            if !(next_res < res) {
                break;
            }
            z = next;
            res = next_res;
            if step.norm() <= 1e-16 * z.norm() {
                break;
            }
        }
        roots[i] = z;
    }
}

/// For real `q` the roots come in conjugate pairs; make that exact.
fn symmetrize(roots: &mut [Complex64]) {
    for r in roots.iter_mut() {
        if r.im.abs() <= 1e-9 * (1.0 + r.norm()) {
            r.im = 0.0;
        }
    }
    let n = roots.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] || roots[i].im <= 0.0 {
            continue;
        }
        let target = roots[i].conj();
        let partner = (0..n)
            .filter(|&j| !used[j] && j != i && roots[j].im < 0.0)
            .min_by(|&a, &b| (roots[a] - target).norm().total_cmp(&(roots[b] - target).norm()));
        if let Some(j) = partner {
            roots[j] = target;
            used[j] = true;
        }
        used[i] = true;
    }
}

fn take_nearest(roots: &mut Vec<Complex64>, target: f64) -> Complex64 {
    let idx = (0..roots.len())
        .min_by(|&a, &b| (roots[a] - target).norm().total_cmp(&(roots[b] - target).norm()))
        .expect("root list is non-empty");
    roots.swap_remove(idx)
}

fn check_distinct(roots: &[Complex64]) -> Result<()> {
    for i in 0..roots.len() {
        for j in (i + 1)..roots.len() {
            let scale = roots[i].norm().max(roots[j].norm()).max(1.0);
            if (roots[i] - roots[j]).norm() < ROOT_SEPARATION * scale {
                return Err(Error::RepeatedRoots { a: roots[i], b: roots[j] });
            }
        }
    }
    Ok(())
}

fn sort_roots(v: &mut [Complex64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Raw roots of `ψ(ρ) = q`, polished but unclassified.
pub fn raw_roots(model: &MixedExpLevy, q: Complex64) -> Result<Vec<Complex64>> {
    let mut poly = cleared_polynomial(model, q);
    poly.trim(1e-14);
    if poly.degree() < expected_degree(model) || poly.degree() == 0 {
        return Err(Error::DegenerateModel(format!(
            "clearing denominators gives degree {} instead of {}",
            poly.degree(),
            expected_degree(model)
        )));
    }
    let mut roots = poly.roots()?;
    polish(model, q, &mut roots);
    if q.im == 0.0 {
        symmetrize(&mut roots);
    }
    Ok(roots)
}

pub fn cramer_lundberg_roots(model: &MixedExpLevy, q: Complex64) -> Result<RootSet> {
    let spectral = if q.re < 0.0 { Some(compute_spectral(model)?) } else { None };
    roots_with_spectral(model, spectral.as_ref(), q)
}

/// As [`cramer_lundberg_roots`], reusing precomputed `θ*`, `λ*` for `q < 0`.
pub fn roots_with_spectral(
    model: &MixedExpLevy,
    spectral: Option<&SpectralData>,
    q: Complex64,
) -> Result<RootSet> {
    if !q.is_finite() {
        return Err(Error::OutOfRange { what: "q", value: q.re, range: "finite values".into() });
    }
    if q.re < 0.0 && q.im != 0.0 {
        return Err(Error::OutOfRange {
            what: "Re(q) for non-real q",
            value: q.re,
            range: "[0, inf)".into(),
        });
    }
    let mut roots = raw_roots(model, q)?;
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let mut phi = None;
    let mut confluent = false;

    if q == c(0.0) {
        take_nearest(&mut roots, 0.0);
        check_distinct(&{
            let mut all = roots.clone();
            all.push(c(0.0));
            all
        })?;
        minus.push(c(0.0));
        for r in roots {
            if r.re > 0.0 {
                plus.push(r);
            } else {
                minus.push(r);
            }
        }
    } else if q.re < 0.0 {
        let owned;
        let sp = match spectral {
            Some(s) => s,
            None => {
                owned = compute_spectral(model)?;
                &owned
            }
        };
        let lam = sp.check_lambda(-q.re)?;
        let fb = sp.phi_bar(model, lam)?;
        phi = Some(fb);
        if sp.is_star(lam) {
            confluent = true;
            take_nearest(&mut roots, fb);
            take_nearest(&mut roots, fb);
            check_distinct(&roots)?;
            minus.push(c(fb));
            minus.push(c(fb));
        } else {
            take_nearest(&mut roots, fb);
            let mut all = roots.clone();
            all.push(c(fb));
            check_distinct(&all)?;
            minus.push(c(fb));
        }
        for r in roots {
            if r.re > fb {
                plus.push(r);
            } else if r.re < 0.0 {
                minus.push(r);
            } else {
                return Err(Error::DegenerateModel(format!(
                    "root {r} lies in the strip 0 <= Re < phi_bar = {fb}"
                )));
            }
        }
    } else {
        check_distinct(&roots)?;
        for r in roots {
            if r.re > 0.0 {
                plus.push(r);
            } else {
                minus.push(r);
            }
        }
    }
    sort_roots(&mut plus);
    sort_roots(&mut minus);
    Ok(RootSet { q, plus_roots: plus, minus_roots: minus, phi_bar: phi, confluent })
}
