//! Time changes that turn the first passage of `X` into a default time with a
//! prescribed survival curve.

use crate::curve::SurvivalCurve;
use crate::error::{Error, Result};
use crate::levy::MixedExpLevy;
use crate::mc::{FirstPassageSample, InitialLaw, McParams, PathRng, PathSimulator};
use crate::prelude::*;
use crate::qid::QuasiInvariantDist;
use crate::spectral::compute_spectral;

pub const EMPIRICAL_GRID: usize = 512;

/// `I(t) = -log H̄(t) / λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeChange {
    lam: f64,
    curve: SurvivalCurve,
}

impl TimeChange {
    pub fn lambda(&self) -> f64 {
        self.lam
    }

    pub fn curve(&self) -> &SurvivalCurve {
        &self.curve
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.curve.cumulative_hazard(t) / self.lam
    }

    /// `I⁻¹(s) = inf{t : I(t) ≥ s}`.
    pub fn inverse(&self, s: f64) -> f64 {
        if s.is_infinite() {
            return f64::INFINITY;
        }
        self.curve.inverse_cumulative_hazard(self.lam * s)
    }
}

pub fn time_change_qid(curve: &SurvivalCurve, lam: f64) -> Result<TimeChange> {
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(Error::OutOfRange { what: "lambda", value: lam, range: "(0, lambda*]".into() });
    }
    Ok(TimeChange { lam, curve: curve.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaChoice {
    Explicit(f64),
    /// `λ = -log H̄(T) / T`, so that `I(T) = T`.
    Normalized(f64),
}

pub fn normalized_lambda(curve: &SurvivalCurve, horizon: f64) -> Result<f64> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::OutOfRange { what: "horizon", value: horizon, range: "(0, inf)".into() });
    }
    let lam = curve.cumulative_hazard(horizon) / horizon;
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(Error::InvalidCurve(format!("survival at {horizon} must lie in (0, 1)")));
    }
    Ok(lam)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RifptSolution {
    pub model: MixedExpLevy,
    pub dist: QuasiInvariantDist,
    pub lam: f64,
    pub time_change: TimeChange,
}

pub fn solve_rifpt(model: &MixedExpLevy, curve: &SurvivalCurve, choice: LambdaChoice) -> Result<RifptSolution> {
    model.ensure_admissible()?;
    let lam = match choice {
        LambdaChoice::Explicit(l) => l,
        LambdaChoice::Normalized(t) => normalized_lambda(curve, t)?,
    };
    let sp = compute_spectral(model)?;
    let lam = sp.check_lambda(lam)?;
    let dist = QuasiInvariantDist::new(model, lam)?;
    let time_change = time_change_qid(curve, lam)?;
    Ok(RifptSolution { model: model.clone(), dist, lam, time_change })
}

impl RifptSolution {
    /// Simulates `τ₀^Y` for `Y = X∘I` up to `params.horizon` (in the time of `Y`).
    pub fn simulate_path(&self, sim: &PathSimulator, params: &McParams, index: usize) -> FirstPassageSample {
        let mut rng = PathRng::for_path(params.seed, index, params.antithetic);
        self.simulate_with(sim, params.horizon, params, &mut rng)
    }

    pub(crate) fn simulate_with(
        &self,
        sim: &PathSimulator,
        horizon: f64,
        params: &McParams,
        rng: &mut PathRng,
    ) -> FirstPassageSample {
        let x_horizon = self.time_change.eval(horizon);
        let x0 = self.dist.draw(rng);
        let inner = McParams { horizon: x_horizon, ..*params };
        let s = sim.first_passage(x0, &inner, rng);
        let tau = if s.is_censored() { f64::INFINITY } else { self.time_change.inverse(s.tau).min(horizon) };
        FirstPassageSample { tau, ..s }
    }
}

pub fn simulate_time_changed_fp(solution: &RifptSolution, params: &McParams) -> Result<Vec<FirstPassageSample>> {
    params.check()?;
    let sim = PathSimulator::new(&solution.model);
    Ok((0..params.paths).map(|i| solution.simulate_path(&sim, params, i)).collect())
}

/// `I(t) = F̄⁻¹(H̄(t))` with the survival `F̄` of the first passage estimated by
/// simulation, interpolated log-linearly on a log-spaced grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalTimeChange {
    grid: Vec<f64>,
    log_survival: Vec<f64>,
    curve: SurvivalCurve,
    t_max: f64,
}

impl EmpiricalTimeChange {
    /// `taus` are first-passage times simulated up to `mc_horizon` (`+∞` when censored);
    /// the result is valid on `[0, t_max]`.
    pub fn from_first_passage_times(
        taus: &[f64],
        mc_horizon: f64,
        curve: &SurvivalCurve,
        t_max: f64,
    ) -> Result<Self> {
        if taus.is_empty() {
            return Err(Error::EmptySample);
        }
        let n = taus.len() as f64;
        let mut sorted = taus.to_vec();
        sorted.sort_by(f64::total_cmp);
        let floor = 1.0 / n;
        let s_min = mc_horizon * 1e-4;
        let ratio = mc_horizon / s_min;
        let mut grid = vec![0.0];
        let mut log_survival = vec![0.0];
        let mut clamped_from = None;
        for k in 0..EMPIRICAL_GRID {
            let s = s_min * ratio.powf(k as f64 / (EMPIRICAL_GRID - 1) as f64);
            let alive = sorted.len() - sorted.partition_point(|&x| x <= s);
            let mut f = alive as f64 / n;
            if f < floor {
                f = floor;
                clamped_from.get_or_insert(grid.len());
            }
            let prev = *log_survival.last().unwrap();
            let lf = f.ln().min(prev - 1e-12);
            grid.push(s);
            log_survival.push(lf);
        }
        let target = -curve.cumulative_hazard(t_max);
        let reach = match clamped_from {
            Some(k) => log_survival[k - 1],
            None => *log_survival.last().unwrap(),
        };
        if target < reach {
            return Err(match clamped_from {
                Some(_) => Error::InsufficientPaths(format!(
                    "estimated survival reaches 1/paths before the target survival {}",
                    target.exp()
                )),
                None => Error::OutOfRange {
                    what: "simulated survival at the horizon",
                    value: reach.exp(),
                    range: format!("(0, {}] (extend the simulation horizon)", target.exp()),
                },
            });
        }
        Ok(Self { grid, log_survival, curve: curve.clone(), t_max })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Interpolated `F̄(s)`.
    pub fn survival(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 1.0;
        }
        let k = self.grid.partition_point(|&g| g <= s);
        if k >= self.grid.len() {
            return self.log_survival.last().unwrap().exp();
        }
        let (s0, s1) = (self.grid[k - 1], self.grid[k]);
        let (l0, l1) = (self.log_survival[k - 1], self.log_survival[k]);
        (l0 + (l1 - l0) * (s - s0) / (s1 - s0)).exp()
    }

    pub fn eval(&self, t: f64) -> f64 {
        let target = -self.curve.cumulative_hazard(t);
        if target >= 0.0 {
            return 0.0;
        }
        let k = self.log_survival.partition_point(|&l| l >= target);
        if k >= self.grid.len() {
            return f64::INFINITY;
        }
        let (s0, s1) = (self.grid[k - 1], self.grid[k]);
        let (l0, l1) = (self.log_survival[k - 1], self.log_survival[k]);
        s0 + (target - l0) / (l1 - l0) * (s1 - s0)
    }
}

/// Sequential estimate of the time change for a general initial law.
pub fn time_change_general<L: InitialLaw + ?Sized>(
    model: &MixedExpLevy,
    mu: &L,
    curve: &SurvivalCurve,
    params: &McParams,
    t_max: f64,
) -> Result<EmpiricalTimeChange> {
    if params.paths < 10_000 {
        return Err(Error::InsufficientPaths(format!("{} paths given, need at least 10000", params.paths)));
    }
    let samples = crate::mc::simulate_first_passages(model, mu, params)?;
    let taus: Vec<f64> = samples.iter().map(|s| s.tau).collect();
    EmpiricalTimeChange::from_first_passage_times(&taus, params.horizon, curve, t_max)
}

/// One name under one frailty state.
#[derive(Debug, Clone, PartialEq)]
pub struct FrailtyName {
    pub model: MixedExpLevy,
    pub curve: SurvivalCurve,
    pub lam: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrailtyState {
    pub prob: f64,
    pub names: Vec<FrailtyName>,
}

/// Finitely many common-factor states, each with conditional curves per name.
#[derive(Debug, Clone, PartialEq)]
pub struct FrailtySpec {
    pub states: Vec<FrailtyState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrailtySolution {
    pub probs: Vec<f64>,
    pub solutions: Vec<Vec<RifptSolution>>,
}

pub fn solve_frailty(spec: &FrailtySpec) -> Result<FrailtySolution> {
    if spec.states.is_empty() {
        return Err(Error::OutOfRange { what: "number of frailty states", value: 0.0, range: "[1, inf)".into() });
    }
    let d = spec.states[0].names.len();
    if d == 0 || spec.states.iter().any(|s| s.names.len() != d) {
        return Err(Error::OutOfRange {
            what: "names per state",
            value: d as f64,
            range: "equal and positive in every state".into(),
        });
    }
    if spec.states.iter().any(|s| !(s.prob >= 0.0)) {
        return Err(Error::OutOfRange { what: "state probability", value: -1.0, range: "[0, 1]".into() });
    }
    let total: f64 = spec.states.iter().map(|s| s.prob).sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::OutOfRange { what: "sum of state probabilities", value: total, range: "{1}".into() });
    }
    let solutions = spec
        .states
        .iter()
        .map(|s| {
            s.names
                .iter()
                .map(|n| solve_rifpt(&n.model, &n.curve, LambdaChoice::Explicit(n.lam)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FrailtySolution { probs: spec.states.iter().map(|s| s.prob).collect(), solutions })
}

impl FrailtySolution {
    pub fn dimension(&self) -> usize {
        self.solutions[0].len()
    }

    /// `S(t₁, …, t_d) = Σⱼ pⱼ ∏ᵢ H̄ᵢ(tᵢ | j)`.
    pub fn joint_survival(&self, ts: &[f64]) -> f64 {
        self.probs
            .iter()
            .zip(&self.solutions)
            .map(|(p, sols)| {
                p * sols.iter().zip(ts).map(|(s, &t)| s.time_change.curve().survival(t)).product::<f64>()
            })
            .sum()
    }

    pub fn simulators(&self) -> Vec<Vec<PathSimulator>> {
        self.solutions.iter().map(|s| s.iter().map(|r| PathSimulator::new(&r.model)).collect()).collect()
    }

    /// Default times of all names on path `index`, censored at `params.horizon`.
    pub fn simulate_path(&self, sims: &[Vec<PathSimulator>], params: &McParams, index: usize) -> Vec<f64> {
        let mut rng = PathRng::for_path(params.seed, index, params.antithetic);
        let u = rng.uniform();
        let mut acc = 0.0;
        let mut state = self.probs.len() - 1;
        for (j, p) in self.probs.iter().enumerate() {
            acc += p;
            if u <= acc {
                state = j;
                break;
            }
        }
        self.solutions[state]
            .iter()
            .zip(&sims[state])
            .map(|(sol, sim)| sol.simulate_with(sim, params.horizon, params, &mut rng).tau)
            .collect()
    }
}
