//! Target survival curves `H̄(t) = P(τ > t)`.
//!
//! Every curve is described through its cumulative hazard `Λ(t) = -log H̄(t)`.
//! Piecewise-constant hazards and tables share a piecewise-linear `Λ`; tables
//! are therefore interpolated log-linearly in `H̄` and extrapolated with the
//! last hazard rate.

use crate::error::{Error, Result};
use crate::prelude::*;

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
    Linear { knots: Vec<f64>, cum: Vec<f64>, slopes: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve {
    kind: Kind,
}

fn invalid<T>(msg: String) -> Result<T> {
    Err(Error::InvalidCurve(msg))
}

impl SurvivalCurve {
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return invalid(format!("exponential rate {rate} must be positive"));
        }
        Ok(Self { kind: Kind::Exponential { rate } })
    }

    /// `H̄(t) = exp(-(t/scale)^shape)`
    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        if !(shape.is_finite() && shape > 0.0 && scale.is_finite() && scale > 0.0) {
            return invalid(format!("weibull shape {shape} and scale {scale} must be positive"));
        }
        Ok(Self { kind: Kind::Weibull { shape, scale } })
    }

    /// Hazard `rates[i]` on `[breakpoints[i-1], breakpoints[i])`, with the last rate
    /// continuing past the final breakpoint.
    pub fn piecewise_hazard(breakpoints: &[f64], rates: &[f64]) -> Result<Self> {
        if rates.len() != breakpoints.len() + 1 {
            return invalid(format!(
                "{} hazard rates given for {} breakpoints (need one more rate than breakpoints)",
                rates.len(),
                breakpoints.len()
            ));
        }
        let mut prev = 0.0;
        for &b in breakpoints {
            if !(b.is_finite() && b > prev) {
                return invalid("breakpoints must be positive and strictly increasing".into());
            }
            prev = b;
        }
        if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return invalid("hazard rates must be finite and non-negative".into());
        }
        if !(rates.last().copied().unwrap_or(0.0) > 0.0) && rates.iter().all(|r| *r == 0.0) {
            return invalid("hazard is identically zero".into());
        }
        let mut knots = vec![0.0];
        knots.extend_from_slice(breakpoints);
        let mut cum = vec![0.0];
        for i in 1..knots.len() {
            let last = cum[i - 1];
            cum.push(last + rates[i - 1] * (knots[i] - knots[i - 1]));
        }
        Ok(Self { kind: Kind::Linear { knots, cum, slopes: rates.to_vec() } })
    }

    /// Tabulated `(tᵢ, H̄(tᵢ))` with strictly increasing times.
    pub fn table(times: &[f64], survival: &[f64]) -> Result<Self> {
        if times.len() != survival.len() || times.is_empty() {
            return invalid("table needs equally many times and survival values, at least one".into());
        }
        let mut knots = Vec::with_capacity(times.len() + 1);
        let mut cum = Vec::with_capacity(times.len() + 1);
        if times[0] > 0.0 {
            knots.push(0.0);
            cum.push(0.0);
        } else if times[0] < 0.0 || survival[0] != 1.0 {
            return invalid("a table entry at t = 0 must have survival 1".into());
        }
        for (&t, &s) in times.iter().zip(survival) {
            if !(s > 0.0 && s <= 1.0) {
                return invalid(format!("survival value {s} outside (0, 1]"));
            }
            if let Some(&last) = knots.last() {
                if !(t > last) {
                    return invalid("table times must be strictly increasing".into());
                }
            }
            let lam = -s.ln();
            if let Some(&last) = cum.last() {
                if lam < last {
                    return invalid("tabulated survival must be non-increasing".into());
                }
            }
            knots.push(t);
            cum.push(lam);
        }
        let mut slopes: Vec<f64> =
            (1..knots.len()).map(|i| (cum[i] - cum[i - 1]) / (knots[i] - knots[i - 1])).collect();
        let tail = slopes.last().copied().unwrap_or(0.0);
        slopes.push(tail);
        if knots.len() == 1 {
            return invalid("table must contain a time after 0".into());
        }
        Ok(Self { kind: Kind::Linear { knots, cum, slopes } })
    }

    /// `Λ(t) = -log H̄(t)`
    pub fn cumulative_hazard(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            Kind::Exponential { rate } => rate * t,
            Kind::Weibull { shape, scale } => (t / scale).powf(*shape),
            Kind::Linear { knots, cum, slopes } => {
                let i = knots.partition_point(|&k| k <= t) - 1;
                cum[i] + slopes[i] * (t - knots[i])
            }
        }
    }

    pub fn survival(&self, t: f64) -> f64 {
        (-self.cumulative_hazard(t)).exp()
    }

    pub fn hazard(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match &self.kind {
            Kind::Exponential { rate } => *rate,
            Kind::Weibull { shape, scale } => {
                if t == 0.0 {
                    return if *shape < 1.0 { f64::INFINITY } else if *shape == 1.0 { 1.0 / scale } else { 0.0 };
                }
                shape / scale * (t / scale).powf(shape - 1.0)
            }
            Kind::Linear { knots, slopes, .. } => slopes[knots.partition_point(|&k| k <= t) - 1],
        }
    }

    /// Density `h(t) = -dH̄/dt`.
    pub fn density(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        self.hazard(t) * self.survival(t)
    }

    /// Smallest `t` with `Λ(t) ≥ y`; `+∞` when `Λ` stays below `y`.
    pub fn inverse_cumulative_hazard(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            Kind::Exponential { rate } => y / rate,
            Kind::Weibull { shape, scale } => scale * y.powf(1.0 / shape),
            Kind::Linear { knots, cum, slopes } => {
                let seg = cum.partition_point(|&v| v < y) - 1;
                if slopes[seg] <= 0.0 {
                    return f64::INFINITY;
                }
                knots[seg] + (y - cum[seg]) / slopes[seg]
            }
        }
    }

    /// Time at which survival reaches `s ∈ (0, 1]`.
    pub fn inverse_survival(&self, s: f64) -> f64 {
        self.inverse_cumulative_hazard(-s.ln())
    }
}
