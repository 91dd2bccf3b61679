//! Loss from counterparty default on a long call.
//!
//! The counterparty defaults when `Y_t = Y_0 + X_{I(t)}` first drops below zero,
//! with `Y_0` drawn from the `λ⁰`-invariant law and `I(t) = -log H̄(t)/λ⁰`, where
//! `λ⁰ = -log H̄(T)/T`. The stock is
//!
//! ```text
//! S_t = S_0 exp((r - d)t + ρX_{I(t)} + Z_t - ψ_Z(1)t - ψ_X(ρ)I(t))
//! ```
//!
//! Conditionally on default at `t`, `E[e^{vX_{I(t)}} | τ = t]` is the inverse
//! Laplace transform of `f_v(q) = E^μ[e^{-qτ^X + v(X_τ - X_0)}]` at `I(t)`,
//! divided by the density `λ⁰H̄(t)` of `τ^X` at `I(t)`. The exposure
//! `P_t = E[e^{-rT}(S_T - K)⁺ | τ = t]` then follows from a damped Fourier
//! integral, and the loss is `Π = ∫₀ᵀ P_t h(t) dt`.

use crate::curve::SurvivalCurve;
use crate::error::{Error, Result};
use crate::ifpt::normalized_lambda;
use crate::laplace::EulerInversion;
use crate::mc::{InitialLaw, McParams, PathRng, PathSimulator};
use crate::levy::MixedExpLevy;
use crate::prelude::*;
use crate::qid::QuasiInvariantDist;
use crate::quad::integrate_batched;
use crate::spectral::{compute_spectral, cramer_lundberg_roots};
use crate::wiener_hopf::{pecherskii_rogozin, pecherskii_rogozin_with, WhFactors};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvaNumerics {
    /// Damping exponent of the Fourier integral (`Re u = 1 + alpha`).
    pub alpha: f64,
    pub xi_max: f64,
    pub xi_points: usize,
    /// Transform evaluations per Laplace inversion (odd).
    pub laplace_terms: usize,
}

impl Default for CvaNumerics {
    fn default() -> Self {
        Self { alpha: 0.75, xi_max: 200.0, xi_points: 4096, laplace_terms: 51 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvaSpec {
    pub s0: f64,
    pub strike: f64,
    pub maturity: f64,
    pub rate: f64,
    pub dividend: f64,
    pub rho: f64,
    /// Driver of the counterparty's distance to default.
    pub x: MixedExpLevy,
    /// Idiosyncratic driver of the stock.
    pub z: MixedExpLevy,
    pub curve: SurvivalCurve,
    pub numerics: CvaNumerics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvaDiagnostics {
    pub lambda0: f64,
    pub lambda_star: f64,
    /// Largest `|Φ(ξ_max)| / max|Φ|` seen over the exposure evaluations.
    pub max_tail_ratio: f64,
    pub quadrature_error: f64,
    pub exposure_evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvaResult {
    pub pi: f64,
    /// `(t, P_t)` at the quadrature nodes, ascending in `t`.
    pub exposure_curve: Vec<(f64, f64)>,
    pub diagnostics: CvaDiagnostics,
}

/// Exposure `P_t` together with the relative size of the truncated Fourier tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exposure {
    pub value: f64,
    pub tail_ratio: f64,
}

fn moment_error(what: &str, e: Error) -> Error {
    match e {
        Error::PoleEvaluation { at, pole } => {
            Error::MomentCondition(format!("{what}: exponent evaluated at {at}, pole at {pole}"))
        }
        e => e,
    }
}

/// `κ_{t₁,t₂}(u) = Ψ_Z(u)t₁ + Ψ_X(uρ)t₂`.
pub fn kappa(spec: &CvaSpec, t1: f64, t2: f64, u: Complex64) -> Result<Complex64> {
    let lo = -1.0 - spec.numerics.alpha;
    if !(u.im >= lo && u.im <= 0.0) {
        return Err(Error::MomentCondition(format!("Im(u) = {} outside [{lo}, 0]", u.im)));
    }
    let z = spec.z.char_exponent(u).map_err(|e| moment_error("psi_Z", e))?;
    let x = spec.x.char_exponent(u * spec.rho).map_err(|e| moment_error("psi_X", e))?;
    Ok(z * t1 + x * t2)
}

/// `f_u(q) = E^μ[exp(-qτ + u(X_τ - X_0))]` under the `λ⁰`-invariant law.
pub fn f_transform(spec: &CvaSpec, u: Complex64, q: Complex64) -> Result<Complex64> {
    let lam0 = normalized_lambda(&spec.curve, spec.maturity)?;
    let dist = QuasiInvariantDist::new(&spec.x, lam0)?;
    pecherskii_rogozin(&spec.x, &dist, q, u)
}

/// Precomputed quantities shared by all exposure evaluations of one spec.
#[derive(Debug, Clone)]
pub struct CvaEngine {
    spec: CvaSpec,
    lam0: f64,
    lambda_star: f64,
    dist: QuasiInvariantDist,
    inversion: EulerInversion,
    /// `ln S_0 + (r - d)T - κ_{T,I(T)}(-i)`
    forward_log: f64,
    i_maturity: f64,
    grid: Vec<FourierNode>,
    xi_step: f64,
}

/// Parts of the Fourier integrand at `u = 1 + α + iξ` that do not depend on `t`.
#[derive(Debug, Clone, Copy)]
struct FourierNode {
    u: Complex64,
    /// `uF + Ψ_Z(u)T + (1 - u)ln K`
    fixed: Complex64,
    /// `ψ_X(ρu)`
    psi_x: Complex64,
    /// `1/(u(u - 1))`
    weight: Complex64,
}

fn check_spec(spec: &CvaSpec) -> Result<()> {
    let pos = |what: &'static str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::OutOfRange { what, value: v, range: "(0, inf)".into() })
        }
    };
    pos("S0", spec.s0)?;
    pos("K", spec.strike)?;
    pos("T", spec.maturity)?;
    pos("alpha", spec.numerics.alpha)?;
    pos("xi_max", spec.numerics.xi_max)?;
    if !(-1.0..=1.0).contains(&spec.rho) {
        return Err(Error::OutOfRange { what: "rho", value: spec.rho, range: "[-1, 1]".into() });
    }
    if spec.numerics.xi_points < 16 {
        return Err(Error::OutOfRange {
            what: "xi_points",
            value: spec.numerics.xi_points as f64,
            range: "[16, inf)".into(),
        });
    }
    if !(spec.rate.is_finite() && spec.dividend.is_finite()) {
        return Err(Error::OutOfRange { what: "r or d", value: f64::NAN, range: "finite".into() });
    }
    let top = 1.0 + spec.numerics.alpha;
    if !(top < spec.z.theta_upper()) {
        return Err(Error::MomentCondition(format!(
            "psi_Z must be finite at 1 + alpha = {top} (domain ends at {})",
            spec.z.theta_upper()
        )));
    }
    let reach = top * spec.rho.abs();
    if !(reach < spec.x.theta_upper() && -reach > spec.x.theta_lower()) {
        return Err(Error::MomentCondition(format!(
            "psi_X must be finite on [-{reach}, {reach}] (domain ({}, {}))",
            spec.x.theta_lower(),
            spec.x.theta_upper()
        )));
    }
    Ok(())
}

impl CvaEngine {
    pub fn new(spec: &CvaSpec) -> Result<Self> {
        check_spec(spec)?;
        spec.x.ensure_admissible()?;
        let lam0 = normalized_lambda(&spec.curve, spec.maturity)?;
        let sp = compute_spectral(&spec.x)?;
        let lam0 = sp.check_lambda(lam0)?;
        let dist = QuasiInvariantDist::new(&spec.x, lam0)?;
        let inversion = EulerInversion::with_terms(spec.numerics.laplace_terms)?;
        let i_maturity = spec.curve.cumulative_hazard(spec.maturity) / lam0;
        let comp = kappa(spec, spec.maturity, i_maturity, c(0.0) - I)?;
        let forward_log = spec.s0.ln() + (spec.rate - spec.dividend) * spec.maturity - comp.re;
        let n = spec.numerics.xi_points;
        let xi_step = spec.numerics.xi_max / (n - 1) as f64;
        let ln_k = spec.strike.ln();
        let grid = (0..n)
            .map(|k| {
                let u = Complex64::new(1.0 + spec.numerics.alpha, k as f64 * xi_step);
                let psi_z = spec.z.laplace_exponent(u).map_err(|e| moment_error("psi_Z", e))?;
                let psi_x = spec.x.laplace_exponent(u * spec.rho).map_err(|e| moment_error("psi_X", e))?;
                Ok(FourierNode {
                    u,
                    fixed: u * forward_log + psi_z * spec.maturity + (c(1.0) - u) * ln_k,
                    psi_x,
                    weight: (u * (u - 1.0)).inv(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec: spec.clone(),
            lam0,
            lambda_star: sp.lambda_star,
            dist,
            inversion,
            forward_log,
            i_maturity,
            grid,
            xi_step,
        })
    }

    pub fn lambda0(&self) -> f64 {
        self.lam0
    }

    pub fn time_change(&self, t: f64) -> f64 {
        self.spec.curve.cumulative_hazard(t) / self.lam0
    }

    /// `E[e^{vX_{I(t)}} | τ = t]` for every `v` in `vs`, sharing the roots at
    /// each Laplace node.
    pub fn conditional_mgf(&self, t: f64, vs: &[Complex64]) -> Result<Vec<Complex64>> {
        let s = self.time_change(t);
        let factors = self
            .inversion
            .nodes(s)
            .into_iter()
            .map(|q| Ok(WhFactors::from_roots(&self.spec.x, cramer_lundberg_roots(&self.spec.x, q)?)))
            .collect::<Result<Vec<_>>>()?;
        let density = self.lam0 * self.spec.curve.survival(t);
        let mut column = vec![c(0.0); factors.len()];
        vs.iter()
            .map(|&v| {
                for (slot, wh) in column.iter_mut().zip(&factors) {
                    *slot = pecherskii_rogozin_with(wh, &self.spec.x, &self.dist, v)?;
                }
                Ok(self.inversion.combine(s, &column) / density)
            })
            .collect()
    }

    /// `P_t` for `t ∈ (0, T)`.
    pub fn exposure(&self, t: f64) -> Result<Exposure> {
        let spec = &self.spec;
        if !(t > 0.0 && t < spec.maturity) {
            return Err(Error::OutOfRange { what: "t", value: t, range: format!("(0, {})", spec.maturity) });
        }
        let mgf = if spec.rho == 0.0 {
            vec![c(1.0); self.grid.len()]
        } else {
            let vs: Vec<Complex64> = self.grid.iter().map(|g| g.u * spec.rho).collect();
            self.conditional_mgf(t, &vs)?
        };
        let remaining = self.i_maturity - self.time_change(t);
        let mut peak: f64 = 0.0;
        let mut sum = 0.0;
        let mut last = c(0.0);
        for (k, (node, g)) in self.grid.iter().zip(&mgf).enumerate() {
            let phi = (node.fixed + node.psi_x * remaining).exp() * g * node.weight;
            peak = peak.max(phi.norm());
            let w = if k == 0 || k + 1 == self.grid.len() { 0.5 } else { 1.0 };
            sum += w * phi.re;
            last = phi;
        }
        let tail_ratio = if peak > 0.0 { last.norm() / peak } else { 0.0 };
        if tail_ratio >= 1e-8 {
            return Err(Error::InversionFailure(format!(
                "Fourier integrand at xi_max is {tail_ratio:e} of its peak (t = {t})"
            )));
        }
        let mut value = (-spec.rate * spec.maturity).exp() * sum * self.xi_step / core::f64::consts::PI;
        if value < 0.0 {
            if value >= -1e-8 {
                value = 0.0;
            } else {
                return Err(Error::InversionFailure(format!("negative exposure {value} at t = {t}")));
            }
        }
        Ok(Exposure { value, tail_ratio })
    }

    pub fn value(&self) -> Result<CvaResult> {
        self.value_with(|ts| ts.iter().map(|&t| self.exposure(t)).collect())
    }

    /// Integrates the exposure against the default density, with `exposures`
    /// mapping a batch of times to their exposures. The quadrature runs in
    /// `s = sqrt(t/T)`, which removes the square-root behaviour near `t = 0`.
    pub fn value_with(&self, mut exposures: impl FnMut(&[f64]) -> Result<Vec<Exposure>>) -> Result<CvaResult> {
        let spec = &self.spec;
        let big_t = spec.maturity;
        let mut max_tail: f64 = 0.0;
        let mut evaluations = 0usize;
        let mut curve = Vec::new();
        let integral = integrate_batched(
            |ss| {
                let ts: Vec<f64> = ss.iter().map(|s| big_t * s * s).collect();
                let es = exposures(&ts)?;
                evaluations += ts.len();
                Ok(ss
                    .iter()
                    .zip(ts.iter().zip(es))
                    .map(|(&s, (&t, e))| {
                        max_tail = max_tail.max(e.tail_ratio);
                        curve.push((t, e.value));
                        e.value * spec.curve.density(t) * 2.0 * big_t * s
                    })
                    .collect())
            },
            0.0,
            1.0,
            1e-12,
            1e-8,
            200,
        )?;
        curve.sort_by(|a: &(f64, f64), b| a.0.total_cmp(&b.0));
        Ok(CvaResult {
            pi: integral.value,
            exposure_curve: curve,
            diagnostics: CvaDiagnostics {
                lambda0: self.lam0,
                lambda_star: self.lambda_star,
                max_tail_ratio: max_tail,
                quadrature_error: integral.error,
                exposure_evaluations: evaluations,
            },
        })
    }
}

/// One joint draw of the default time and the terminal stock price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvaPathSample {
    /// Default time, `+∞` when the counterparty survives to maturity.
    pub tau: f64,
    pub stock: f64,
    /// `e^{-rT}(S_T - K)⁺`
    pub discounted_payoff: f64,
}

/// Simulators for the two drivers of a spec.
#[derive(Debug, Clone)]
pub struct CvaSimulators {
    x: PathSimulator,
    z: PathSimulator,
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        let (mut n, mut mean, mut m2) = (0usize, 0.0, 0.0);
        for v in values {
            n += 1;
            let d = v - mean;
            mean += d / n as f64;
            m2 += d * (v - mean);
        }
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let var = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
        Ok(Self { mean, se: (var / n as f64).sqrt() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvaMcEstimate {
    pub pi: Estimate,
    pub call: Estimate,
    /// `e^{-(r-d)T}S_T/S_0`, which has mean one.
    pub martingale: Estimate,
}

impl CvaEngine {
    pub fn simulators(&self) -> CvaSimulators {
        CvaSimulators { x: PathSimulator::new(&self.spec.x), z: PathSimulator::new(&self.spec.z) }
    }

    /// Path `index`: `Y_0` from the invariant law, `X` run in its own clock up to
    /// `I(T)` and `Z` over `[0, T]`.
    pub fn simulate_path(&self, sims: &CvaSimulators, params: &McParams, index: usize) -> CvaPathSample {
        let spec = &self.spec;
        let mut rng = PathRng::for_path(params.seed, index, params.antithetic);
        let y0 = self.dist.draw(&mut rng);
        let inner = McParams { horizon: self.i_maturity, ..*params };
        let fp = sims.x.first_passage(y0, &inner, &mut rng);
        let (tau, x_end) = if fp.is_censored() {
            (f64::INFINITY, fp.position)
        } else {
            let rest = sims.x.increment(self.i_maturity - fp.tau, &mut rng);
            let t = spec.curve.inverse_cumulative_hazard(fp.tau * self.lam0).min(spec.maturity);
            (t, fp.position + rest)
        };
        let z_end = sims.z.increment(spec.maturity, &mut rng);
        let stock = (self.forward_log + spec.rho * (x_end - y0) + z_end).exp();
        let discounted_payoff = (-spec.rate * spec.maturity).exp() * (stock - spec.strike).max(0.0);
        CvaPathSample { tau, stock, discounted_payoff }
    }

    pub fn summarize(&self, samples: &[CvaPathSample]) -> Result<CvaMcEstimate> {
        let spec = &self.spec;
        let growth = ((spec.rate - spec.dividend) * spec.maturity).exp() * spec.s0;
        Ok(CvaMcEstimate {
            pi: Estimate::from_values(
                samples.iter().map(|s| if s.tau <= spec.maturity { s.discounted_payoff } else { 0.0 }),
            )?,
            call: Estimate::from_values(samples.iter().map(|s| s.discounted_payoff))?,
            martingale: Estimate::from_values(samples.iter().map(|s| s.stock / growth))?,
        })
    }
}

/// Serial Monte Carlo estimate of the loss, the default-free call and the
/// martingale check.
pub fn cva_monte_carlo(spec: &CvaSpec, params: &McParams) -> Result<CvaMcEstimate> {
    let engine = CvaEngine::new(spec)?;
    let params = McParams { horizon: spec.maturity, ..*params };
    params.check()?;
    let sims = engine.simulators();
    let samples: Vec<CvaPathSample> =
        (0..params.paths).map(|i| engine.simulate_path(&sims, &params, i)).collect();
    engine.summarize(&samples)
}

pub fn exposure(spec: &CvaSpec, t: f64) -> Result<f64> {
    Ok(CvaEngine::new(spec)?.exposure(t)?.value)
}

pub fn cva_value(spec: &CvaSpec) -> Result<CvaResult> {
    CvaEngine::new(spec)?.value()
}

/// Default-free call price `e^{-rT}E[(S_T - K)⁺]` by the same Fourier integral.
pub fn call_price(spec: &CvaSpec) -> Result<f64> {
    check_spec(spec)?;
    let (n, h) = (spec.numerics.xi_points, spec.numerics.xi_max / (spec.numerics.xi_points - 1) as f64);
    let damp = 1.0 + spec.numerics.alpha;
    let lam0 = normalized_lambda(&spec.curve, spec.maturity)?;
    let i_t = spec.curve.cumulative_hazard(spec.maturity) / lam0;
    let comp = kappa(spec, spec.maturity, i_t, c(0.0) - I)?;
    let fwd = spec.s0.ln() + (spec.rate - spec.dividend) * spec.maturity - comp.re;
    let ln_k = spec.strike.ln();
    let mut sum = 0.0;
    for k in 0..n {
        let u = Complex64::new(damp, k as f64 * h);
        let psi_z = spec.z.laplace_exponent(u).map_err(|e| moment_error("psi_Z", e))?;
        let psi_x = spec.x.laplace_exponent(u * spec.rho).map_err(|e| moment_error("psi_X", e))?;
        let phi = (u * fwd + psi_z * spec.maturity + psi_x * i_t + (c(1.0) - u) * ln_k).exp() / (u * (u - 1.0));
        let w = if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
        sum += w * phi.re;
    }
    Ok((-spec.rate * spec.maturity).exp() * sum * h / core::f64::consts::PI)
}
