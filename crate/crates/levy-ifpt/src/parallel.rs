//! Parallel drivers over paths and exposure dates. Each path owns its random
//! stream and results are collected in index order, so output does not depend
//! on the number of workers.

use levy_ifpt_core::cva::{CvaEngine, CvaMcEstimate, CvaPathSample, CvaResult, CvaSpec};
use levy_ifpt_core::ifpt::{FrailtySolution, RifptSolution};
use levy_ifpt_core::mc::{simulate_first_passage_path, FirstPassageSample, InitialLaw, McParams, PathSimulator};
use levy_ifpt_core::{MixedExpLevy, Result};
use rayon::prelude::*;

pub const THREADS_VAR: &str = "LEVY_IFPT_THREADS";

/// Worker count from `LEVY_IFPT_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_VAR).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs `f` on a pool of `threads` workers (rayon's default when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    match b.build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

pub fn first_passages<L: InitialLaw + Sync + ?Sized>(
    model: &MixedExpLevy,
    init: &L,
    params: &McParams,
) -> Result<Vec<FirstPassageSample>> {
    params.check()?;
    let sim = PathSimulator::new(model);
    Ok((0..params.paths).into_par_iter().map(|i| simulate_first_passage_path(&sim, init, params, i)).collect())
}

pub fn time_changed_first_passages(sol: &RifptSolution, params: &McParams) -> Result<Vec<FirstPassageSample>> {
    params.check()?;
    let sim = PathSimulator::new(&sol.model);
    Ok((0..params.paths).into_par_iter().map(|i| sol.simulate_path(&sim, params, i)).collect())
}

/// Default times of every name, one row per path.
pub fn frailty_paths(sol: &FrailtySolution, params: &McParams) -> Result<Vec<Vec<f64>>> {
    params.check()?;
    let sims = sol.simulators();
    Ok((0..params.paths).into_par_iter().map(|i| sol.simulate_path(&sims, params, i)).collect())
}

/// Semi-analytic loss with the exposure dates of each refinement step
/// evaluated in parallel.
pub fn cva_value(spec: &CvaSpec) -> Result<CvaResult> {
    let engine = CvaEngine::new(spec)?;
    engine.value_with(|ts| ts.par_iter().map(|&t| engine.exposure(t)).collect())
}

pub fn cva_paths(spec: &CvaSpec, params: &McParams) -> Result<(CvaMcEstimate, Vec<CvaPathSample>)> {
    let engine = CvaEngine::new(spec)?;
    let params = McParams { horizon: spec.maturity, ..*params };
    params.check()?;
    let sims = engine.simulators();
    let samples: Vec<CvaPathSample> =
        (0..params.paths).into_par_iter().map(|i| engine.simulate_path(&sims, &params, i)).collect();
    Ok((engine.summarize(&samples)?, samples))
}
