//! Mixed-exponential jump-diffusions
//!
//! `X_t = X_0 + ηt + σW_t + Σ U_i` where the jumps `U_i` arrive at rate `ℓ`,
//! are positive with probability `p` and have (possibly signed) mixtures of
//! exponential densities on each side.

use crate::error::{Error, Result};
use crate::prelude::*;

const POLE_TOL: f64 = 1e-12;

/// One exponential component `a·α·e^{-αx}` of a jump-size density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub weight: f64,
    pub rate: f64,
}

impl ExpTerm {
    pub fn new(weight: f64, rate: f64) -> Self {
        Self { weight, rate }
    }
}

/// A jump component after multiplying through by the jump intensity:
/// contributes `mass·θ/(rate∓θ)` to the Laplace exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct JumpPole {
    pub rate: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedExpLevy {
    sigma: f64,
    eta: f64,
    ell: f64,
    p: f64,
    up: Vec<ExpTerm>,
    down: Vec<ExpTerm>,
    up_poles: Vec<JumpPole>,
    down_poles: Vec<JumpPole>,
}

/// Unit-volatility Brownian motion with drift `eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrownianDriftLevy {
    pub eta: f64,
}

impl BrownianDriftLevy {
    pub fn new(eta: f64) -> Self {
        Self { eta }
    }

    pub fn theta_star(&self) -> f64 {
        -self.eta
    }

    pub fn lambda_star(&self) -> f64 {
        0.5 * self.eta * self.eta
    }

    /// Left inverse of `ψ(θ) = ηθ + θ²/2`, evaluated at `y ≥ -λ*`.
    pub fn phi_bar(&self, y: f64) -> f64 {
        -self.eta - (self.eta * self.eta + 2.0 * y).sqrt()
    }

    pub fn to_mixed_exp(&self) -> MixedExpLevy {
        MixedExpLevy::brownian(self.eta)
    }
}

impl From<BrownianDriftLevy> for MixedExpLevy {
    fn from(b: BrownianDriftLevy) -> Self {
        b.to_mixed_exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// The named side fails the positivity conditions for a signed exponential mixture.
    Bartholomew { side: &'static str, detail: String },
    /// `ψ'(0) ≥ 0`.
    NonNegativeDrift { mean: f64 },
    /// Neither a diffusion part nor downward jumps.
    NotSmooth,
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Violation::Bartholomew { side, detail } => {
                write!(f, "{side} jump density is not a valid density: {detail}")
            }
            Violation::NonNegativeDrift { mean } => {
                write!(f, "psi'(0) = {mean} must be strictly negative")
            }
            Violation::NotSmooth => {
                write!(f, "need sigma > 0 or downward jumps with positive probability")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

fn merge_poles(terms: &[ExpTerm], scale: f64) -> Vec<JumpPole> {
    let mut poles: Vec<JumpPole> = Vec::new();
    for t in terms {
        let mass = scale * t.weight;
        if mass == 0.0 {
            continue;
        }
        match poles.iter_mut().find(|p| p.rate == t.rate) {
            Some(p) => p.mass += mass,
            None => poles.push(JumpPole { rate: t.rate, mass }),
        }
    }
    poles.retain(|p| p.mass != 0.0);
    poles.sort_by(|a, b| a.rate.total_cmp(&b.rate));
    poles
}

fn check_side(side: &'static str, terms: &[ExpTerm], out: &mut Vec<Violation>) {
    if terms.is_empty() {
        out.push(Violation::Bartholomew { side, detail: "no components".into() });
        return;
    }
    let mut sorted = terms.to_vec();
    sorted.sort_by(|a, b| a.rate.total_cmp(&b.rate));
    if sorted[0].weight <= 0.0 {
        out.push(Violation::Bartholomew {
            side,
            detail: format!("weight of the smallest rate is {} (must be > 0)", sorted[0].weight),
        });
    }
    let mut partial = 0.0;
    for (l, t) in sorted.iter().enumerate() {
        partial += t.weight * t.rate;
        if partial < -1e-12 {
            out.push(Violation::Bartholomew {
                side,
                detail: format!("partial sum of weight*rate up to term {} is {partial}", l + 1),
            });
            break;
        }
    }
    let total: f64 = terms.iter().map(|t| t.weight).sum();
    if (total - 1.0).abs() > 1e-10 {
        out.push(Violation::Bartholomew { side, detail: format!("weights sum to {total}") });
    }
}

impl MixedExpLevy {
    /// Builds a model after basic sanity checks on signs and finiteness.
    /// Admissibility (density conditions, negative mean) is reported by
    /// [`MixedExpLevy::validate`].
    pub fn new(
        sigma: f64,
        eta: f64,
        ell: f64,
        p: f64,
        up: Vec<ExpTerm>,
        down: Vec<ExpTerm>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        if !(sigma.is_finite() && sigma >= 0.0) {
            return bad(format!("sigma = {sigma} must be finite and >= 0"));
        }
        if !eta.is_finite() {
            return bad(format!("eta = {eta} must be finite"));
        }
        if !(ell.is_finite() && ell >= 0.0) {
            return bad(format!("ell = {ell} must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&p) {
            return bad(format!("p = {p} must lie in [0, 1]"));
        }
        for t in up.iter().chain(down.iter()) {
            if !(t.rate.is_finite() && t.rate > 0.0) || !t.weight.is_finite() {
                return bad(format!("jump component (a = {}, alpha = {}) needs a finite weight and a positive rate", t.weight, t.rate));
            }
        }
        let up_poles = merge_poles(&up, ell * p);
        let down_poles = merge_poles(&down, ell * (1.0 - p));
        Ok(Self { sigma, eta, ell, p, up, down, up_poles, down_poles })
    }

    pub fn brownian(eta: f64) -> Self {
        Self {
            sigma: 1.0,
            eta,
            ell: 0.0,
            p: 0.0,
            up: Vec::new(),
            down: Vec::new(),
            up_poles: Vec::new(),
            down_poles: Vec::new(),
        }
    }

    /// Double-exponential (Kou) model.
    pub fn kou(sigma: f64, eta: f64, ell: f64, p: f64, up_rate: f64, down_rate: f64) -> Result<Self> {
        Self::new(
            sigma,
            eta,
            ell,
            p,
            vec![ExpTerm::new(1.0, up_rate)],
            vec![ExpTerm::new(1.0, down_rate)],
        )
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn ell(&self) -> f64 {
        self.ell
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn up_terms(&self) -> &[ExpTerm] {
        &self.up
    }
    pub fn down_terms(&self) -> &[ExpTerm] {
        &self.down
    }

    pub(crate) fn up_poles(&self) -> &[JumpPole] {
        &self.up_poles
    }
    pub(crate) fn down_poles(&self) -> &[JumpPole] {
        &self.down_poles
    }

    /// Distinct upward jump rates with non-zero mass, ascending.
    pub fn up_rates(&self) -> Vec<f64> {
        self.up_poles.iter().map(|p| p.rate).collect()
    }

    /// Distinct downward jump rates with non-zero mass, ascending.
    pub fn down_rates(&self) -> Vec<f64> {
        self.down_poles.iter().map(|p| p.rate).collect()
    }

    /// Total rate of upward and downward jumps actually present.
    pub(crate) fn jump_rates(&self) -> (f64, f64) {
        let up: f64 = self.up_poles.iter().map(|p| p.mass).sum();
        let down: f64 = self.down_poles.iter().map(|p| p.mass).sum();
        (up, down)
    }

    pub fn is_brownian_like(&self) -> bool {
        self.up_poles.is_empty() && self.down_poles.is_empty()
    }

    /// Right end of the real domain of `ψ` (smallest upward rate).
    pub fn theta_upper(&self) -> f64 {
        self.up_poles.first().map_or(f64::INFINITY, |p| p.rate)
    }

    /// Left end of the real domain of `ψ` (minus the smallest downward rate).
    pub fn theta_lower(&self) -> f64 {
        self.down_poles.first().map_or(f64::NEG_INFINITY, |p| -p.rate)
    }

    /// `ψ(θ) = log E[e^{θX_1}]`.
    pub fn laplace_exponent(&self, theta: Complex64) -> Result<Complex64> {
        for p in &self.up_poles {
            if (theta - p.rate).norm() <= POLE_TOL * p.rate.max(1.0) {
                return Err(Error::PoleEvaluation { at: theta, pole: p.rate });
            }
        }
        for p in &self.down_poles {
            if (theta + p.rate).norm() <= POLE_TOL * p.rate.max(1.0) {
                return Err(Error::PoleEvaluation { at: theta, pole: -p.rate });
            }
        }
        Ok(self.psi_unchecked(theta))
    }

    /// `Ψ(θ) = log E[e^{iθX_1}] = ψ(iθ)`.
    pub fn char_exponent(&self, theta: Complex64) -> Result<Complex64> {
        self.laplace_exponent(I * theta)
    }

    pub(crate) fn psi_unchecked(&self, theta: Complex64) -> Complex64 {
        let mut v = theta * (0.5 * self.sigma * self.sigma * theta + self.eta);
        for p in &self.up_poles {
            v += p.mass * theta / (p.rate - theta);
        }
        for p in &self.down_poles {
            v -= p.mass * theta / (p.rate + theta);
        }
        v
    }

    pub(crate) fn dpsi_unchecked(&self, theta: Complex64) -> Complex64 {
        let mut v = self.sigma * self.sigma * theta + self.eta;
        for p in &self.up_poles {
            let d = p.rate - theta;
            v += p.mass * p.rate / (d * d);
        }
        for p in &self.down_poles {
            let d = p.rate + theta;
            v -= p.mass * p.rate / (d * d);
        }
        v
    }

    /// `ψ` on the real line; callers keep `x` inside the domain.
    pub fn psi(&self, x: f64) -> f64 {
        let mut v = x * (0.5 * self.sigma * self.sigma * x + self.eta);
        for p in &self.up_poles {
            v += p.mass * x / (p.rate - x);
        }
        for p in &self.down_poles {
            v -= p.mass * x / (p.rate + x);
        }
        v
    }

    pub fn dpsi(&self, x: f64) -> f64 {
        let mut v = self.sigma * self.sigma * x + self.eta;
        for p in &self.up_poles {
            let d = p.rate - x;
            v += p.mass * p.rate / (d * d);
        }
        for p in &self.down_poles {
            let d = p.rate + x;
            v -= p.mass * p.rate / (d * d);
        }
        v
    }

    pub fn d2psi(&self, x: f64) -> f64 {
        let mut v = self.sigma * self.sigma;
        for p in &self.up_poles {
            let d = p.rate - x;
            v += 2.0 * p.mass * p.rate / (d * d * d);
        }
        for p in &self.down_poles {
            let d = p.rate + x;
            v += 2.0 * p.mass * p.rate / (d * d * d);
        }
        v
    }

    /// Mean per unit time, `ψ'(0)`.
    pub fn mean_drift(&self) -> f64 {
        self.dpsi(0.0)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.ell > 0.0 && self.p > 0.0 {
            check_side("upward", &self.up, &mut violations);
        }
        if self.ell > 0.0 && self.p < 1.0 {
            check_side("downward", &self.down, &mut violations);
        }
        let mean = self.mean_drift();
        if !(mean < 0.0) {
            violations.push(Violation::NonNegativeDrift { mean });
        }
        let has_down = self.ell > 0.0 && self.p < 1.0 && !self.down_poles.is_empty();
        if !(self.sigma > 0.0 || has_down) {
            violations.push(Violation::NotSmooth);
        }
        ValidationReport { violations }
    }

    /// Fails with the first violation, mapping a non-negative mean to
    /// [`Error::NotNegativeDrift`].
    pub fn ensure_admissible(&self) -> Result<()> {
        match self.validate().violations.first() {
            None => Ok(()),
            Some(Violation::NonNegativeDrift { mean }) => Err(Error::NotNegativeDrift(*mean)),
            Some(v) => Err(Error::InvalidModel(format!("{v}"))),
        }
    }

    /// The model under the exponential change of measure `e^{rX_t - tψ(r)}`,
    /// whose exponent is `ψ(s + r) - ψ(r)`.
    pub fn esscher(&self, r: f64) -> Result<Self> {
        if !(r > self.theta_lower() && r < self.theta_upper()) {
            return Err(Error::OutOfRange {
                what: "Esscher shift",
                value: r,
                range: format!("({}, {})", self.theta_lower(), self.theta_upper()),
            });
        }
        let up: Vec<JumpPole> = self
            .up_poles
            .iter()
            .map(|p| JumpPole { rate: p.rate - r, mass: p.mass * p.rate / (p.rate - r) })
            .collect();
        let down: Vec<JumpPole> = self
            .down_poles
            .iter()
            .map(|p| JumpPole { rate: p.rate + r, mass: p.mass * p.rate / (p.rate + r) })
            .collect();
        let up_mass: f64 = up.iter().map(|p| p.mass).sum();
        let down_mass: f64 = down.iter().map(|p| p.mass).sum();
        let ell = up_mass + down_mass;
        let p = if ell > 0.0 { up_mass / ell } else { 0.0 };
        let to_terms = |poles: &[JumpPole], total: f64| -> Vec<ExpTerm> {
            poles.iter().map(|q| ExpTerm::new(q.mass / total, q.rate)).collect()
        };
        let up_terms = if up_mass != 0.0 { to_terms(&up, up_mass) } else { Vec::new() };
        let down_terms = if down_mass != 0.0 { to_terms(&down, down_mass) } else { Vec::new() };
        Self::new(self.sigma, self.eta + self.sigma * self.sigma * r, ell, p, up_terms, down_terms)
    }

    /// Jump-size density `ℓ`-free: `p f₊(x)` for `x > 0`, `(1-p) f₋(-x)` for `x < 0`.
    pub fn jump_density(&self, x: f64) -> f64 {
        if x > 0.0 {
            self.p * self.up.iter().map(|t| t.weight * t.rate * (-t.rate * x).exp()).sum::<f64>()
        } else if x < 0.0 {
            (1.0 - self.p)
                * self.down.iter().map(|t| t.weight * t.rate * (t.rate * x).exp()).sum::<f64>()
        } else {
            0.0
        }
    }
}
