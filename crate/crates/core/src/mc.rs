//! Exact simulation of first passage below zero.
//!
//! Between jumps the path is a Brownian motion with drift; the endpoint of each
//! inter-jump segment is drawn exactly, and a crossing inside the segment is
//! detected with the Brownian-bridge hitting probability. The crossing time
//! itself is drawn from its conditional law, so no time discretisation is
//! involved. Every path owns a ChaCha stream selected by its index, which makes
//! results independent of how paths are distributed over threads.

use crate::error::{Error, Result};
use crate::levy::MixedExpLevy;
use crate::prelude::*;
use crate::qid::QuasiInvariantDist;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McParams {
    pub paths: usize,
    pub horizon: f64,
    pub seed: u64,
    /// Detect crossings between monitoring points through the bridge probability.
    pub bridge_correction: bool,
    /// Pair path `2k+1` with path `2k` through mirrored draws.
    pub antithetic: bool,
    /// Longest diffusion step; `∞` simulates each inter-jump segment in one step.
    pub max_step: f64,
}

impl McParams {
    pub fn new(paths: usize, horizon: f64, seed: u64) -> Self {
        Self { paths, horizon, seed, bridge_correction: true, antithetic: false, max_step: f64::INFINITY }
    }

    pub fn check(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::OutOfRange { what: "paths", value: 0.0, range: "[1, inf)".into() });
        }
        if !(self.horizon > 0.0) {
            return Err(Error::OutOfRange { what: "horizon", value: self.horizon, range: "(0, inf]".into() });
        }
        if !(self.max_step > 0.0) {
            return Err(Error::OutOfRange { what: "max_step", value: self.max_step, range: "(0, inf]".into() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstPassageSample {
    /// Passage time, `+∞` when the path survives the horizon.
    pub tau: f64,
    /// `X_τ` at passage (zero for a creeping crossing), else the value at the horizon.
    pub position: f64,
    pub crossed_by_diffusion: bool,
}

impl FirstPassageSample {
    pub fn is_censored(&self) -> bool {
        self.tau.is_infinite()
    }
}

/// Per-path random stream; in antithetic mode uniforms are reflected and
/// normals negated.
#[derive(Debug, Clone)]
pub struct PathRng {
    rng: ChaCha8Rng,
    mirror: bool,
}

impl PathRng {
    pub fn new(seed: u64, stream: u64, mirror: bool) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, mirror }
    }

    pub fn for_path(seed: u64, index: usize, antithetic: bool) -> Self {
        if antithetic {
            Self::new(seed, (index / 2) as u64, index % 2 == 1)
        } else {
            Self::new(seed, index as u64, false)
        }
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        let u = loop {
            let u: f64 = self.rng.random();
            if u > 0.0 {
                break u;
            }
        };
        if self.mirror { 1.0 - u } else { u }
    }

    pub fn normal(&mut self) -> f64 {
        let z: f64 = self.rng.sample(StandardNormal);
        if self.mirror { -z } else { z }
    }

    pub fn exp1(&mut self) -> f64 {
        -self.uniform().ln()
    }

    /// Inverse Gaussian draw, using a cancellation-free form of the
    /// Michael–Schucany–Haas transform.
    pub fn inverse_gaussian(&mut self, mean: f64, shape: f64) -> f64 {
        let v = self.normal();
        let y = mean * v * v;
        let x = if y == 0.0 {
            mean
        } else {
            let root = (y * y + 4.0 * shape * y).sqrt();
            let d = y + root;
            mean * 4.0 * shape * y / (d * d)
        };
        if self.uniform() <= mean / (mean + x) {
            x
        } else {
            mean * mean / x
        }
    }
}

/// Something to draw the starting point `X_0` from.
pub trait InitialLaw {
    fn draw(&self, rng: &mut PathRng) -> f64;
}

impl InitialLaw for f64 {
    fn draw(&self, _: &mut PathRng) -> f64 {
        *self
    }
}

impl InitialLaw for QuasiInvariantDist {
    fn draw(&self, rng: &mut PathRng) -> f64 {
        self.quantile(rng.uniform())
    }
}

/// Mixture `Σ πₖ αₖ e^{-αₖx}` on `x > 0` (weights may be signed).
#[derive(Debug, Clone)]
struct ExpMixture {
    probs: Vec<f64>,
    rates: Vec<f64>,
    signed: bool,
}

impl ExpMixture {
    fn new(poles: &[(f64, f64)]) -> Self {
        let total: f64 = poles.iter().map(|p| p.1).sum();
        let probs: Vec<f64> = poles.iter().map(|p| p.1 / total).collect();
        let signed = probs.iter().any(|&p| p < 0.0);
        Self { probs, rates: poles.iter().map(|p| p.0).collect(), signed }
    }

    fn tail(&self, x: f64) -> f64 {
        self.probs.iter().zip(&self.rates).map(|(p, a)| p * (-a * x).exp()).sum()
    }

    fn density(&self, x: f64) -> f64 {
        self.probs.iter().zip(&self.rates).map(|(p, a)| p * a * (-a * x).exp()).sum()
    }

    fn sample(&self, rng: &mut PathRng) -> f64 {
        if !self.signed {
            let u = rng.uniform();
            let mut acc = 0.0;
            let mut k = self.probs.len() - 1;
            for (i, p) in self.probs.iter().enumerate() {
                acc += p;
                if u <= acc {
                    k = i;
                    break;
                }
            }
            return rng.exp1() / self.rates[k];
        }
        let target = rng.uniform();
        let slowest = self.rates.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = 1.0 / slowest;
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
            x = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        x
    }
}

/// Path simulator for one model.
#[derive(Debug, Clone)]
pub struct PathSimulator {
    sigma: f64,
    eta: f64,
    up_rate: f64,
    down_rate: f64,
    up: Option<ExpMixture>,
    down: Option<ExpMixture>,
}

impl PathSimulator {
    pub fn new(model: &MixedExpLevy) -> Self {
        let pairs = |poles: &[crate::levy::JumpPole]| -> Vec<(f64, f64)> {
            poles.iter().map(|p| (p.rate, p.mass)).collect()
        };
        let (up_rate, down_rate) = model.jump_rates();
        let up = (up_rate > 0.0).then(|| ExpMixture::new(&pairs(model.up_poles())));
        let down = (down_rate > 0.0).then(|| ExpMixture::new(&pairs(model.down_poles())));
        Self {
            sigma: model.sigma(),
            eta: model.eta(),
            up_rate: up_rate.max(0.0),
            down_rate: down_rate.max(0.0),
            up,
            down,
        }
    }

    fn jump_intensity(&self) -> f64 {
        self.up_rate + self.down_rate
    }

    fn jump(&self, rng: &mut PathRng) -> f64 {
        let u = rng.uniform();
        if u * self.jump_intensity() < self.up_rate {
            self.up.as_ref().map_or(0.0, |m| m.sample(rng))
        } else {
            -self.down.as_ref().map_or(0.0, |m| m.sample(rng))
        }
    }

    /// Exact draw of `X_{t+dt} - X_t`.
    pub fn increment(&self, dt: f64, rng: &mut PathRng) -> f64 {
        if dt <= 0.0 {
            return 0.0;
        }
        let mut x = self.eta * dt + self.sigma * dt.sqrt() * rng.normal();
        let rate = self.jump_intensity();
        if rate > 0.0 {
            let mut t = rng.exp1() / rate;
            while t < dt {
                x += self.jump(rng);
                t += rng.exp1() / rate;
            }
        }
        x
    }

    /// Runs one path from `x0` until it enters `(-∞, 0)` or reaches `horizon`.
    pub fn first_passage(&self, x0: f64, params: &McParams, rng: &mut PathRng) -> FirstPassageSample {
        if x0 < 0.0 || (x0 == 0.0 && self.sigma > 0.0) {
            return FirstPassageSample { tau: 0.0, position: x0.min(0.0), crossed_by_diffusion: x0 == 0.0 };
        }
        let horizon = params.horizon;
        let rate = self.jump_intensity();
        let s2 = self.sigma * self.sigma;
        let mut t = 0.0;
        let mut x = x0;
        loop {
            let gap = if rate > 0.0 { rng.exp1() / rate } else { f64::INFINITY };
            let jumps = t + gap < horizon;
            let seg_end = if jumps { t + gap } else { horizon };
            while t < seg_end {
                let dt = (seg_end - t).min(params.max_step);
                if self.sigma > 0.0 {
                    let b = x + self.eta * dt + self.sigma * dt.sqrt() * rng.normal();
                    let crossed = if b <= 0.0 {
                        true
                    } else {
                        params.bridge_correction && rng.uniform() < (-2.0 * x * b / (s2 * dt)).exp()
                    };
                    if crossed {
                        if !params.bridge_correction {
                            return FirstPassageSample { tau: t + dt, position: b, crossed_by_diffusion: true };
                        }
                        let mean = x / b.abs().max(f64::MIN_POSITIVE);
                        let u = rng.inverse_gaussian(mean, x * x / (s2 * dt));
                        let s = if u.is_finite() { dt * u / (1.0 + u) } else { dt };
                        return FirstPassageSample { tau: t + s, position: 0.0, crossed_by_diffusion: true };
                    }
                    x = b;
                } else {
                    let b = x + self.eta * dt;
                    if b <= 0.0 && self.eta < 0.0 {
                        return FirstPassageSample {
                            tau: t + x / -self.eta,
                            position: 0.0,
                            crossed_by_diffusion: true,
                        };
                    }
                    x = b;
                }
                t += dt;
            }
            t = seg_end;
            if !jumps {
                return FirstPassageSample { tau: f64::INFINITY, position: x, crossed_by_diffusion: false };
            }
            x += self.jump(rng);
            if x < 0.0 {
                return FirstPassageSample { tau: t, position: x, crossed_by_diffusion: false };
            }
        }
    }
}

/// First passage of path `index` with `X_0` drawn from `init`.
pub fn simulate_first_passage_path<L: InitialLaw + ?Sized>(
    sim: &PathSimulator,
    init: &L,
    params: &McParams,
    index: usize,
) -> FirstPassageSample {
    let mut rng = PathRng::for_path(params.seed, index, params.antithetic);
    let x0 = init.draw(&mut rng);
    sim.first_passage(x0, params, &mut rng)
}

/// Single path from a fixed start, on the stream of path 0.
pub fn simulate_first_passage(model: &MixedExpLevy, x0: f64, params: &McParams) -> FirstPassageSample {
    simulate_first_passage_path(&PathSimulator::new(model), &x0, params, 0)
}

/// All `params.paths` first passages, in path order.
pub fn simulate_first_passages<L: InitialLaw + ?Sized>(
    model: &MixedExpLevy,
    init: &L,
    params: &McParams,
) -> Result<Vec<FirstPassageSample>> {
    params.check()?;
    let sim = PathSimulator::new(model);
    Ok((0..params.paths).map(|i| simulate_first_passage_path(&sim, init, params, i)).collect())
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalPoint {
    pub t: f64,
    pub survival: f64,
    /// Binomial standard error `sqrt(S(1 - S)/n)`.
    pub se: f64,
}

/// Empirical `P(τ > t)` on a grid; `+∞` entries count as surviving.
pub fn survival_grid(taus: &[f64], grid: &[f64]) -> Result<Vec<SurvivalPoint>> {
    if taus.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = taus.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    Ok(grid
        .iter()
        .map(|&t| {
            let alive = xs.len() - xs.partition_point(|&x| x <= t);
            let s = alive as f64 / n;
            SurvivalPoint { t, survival: s, se: (s * (1.0 - s) / n).sqrt() }
        })
        .collect())
}
