//! `levy-ifpt` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use levy_ifpt_core::ifpt::{solve_frailty, solve_rifpt, LambdaChoice};
use levy_ifpt_core::mc::{survival_grid, McParams};
use levy_ifpt_core::spectral::{compute_spectral, cramer_lundberg_roots};
use levy_ifpt_core::wiener_hopf::{product_residual, WhFactors};
use levy_ifpt_core::{Complex64, MixedExpLevy, QuasiInvariantDist, SurvivalCurve};
use serde::{Deserialize, Serialize};

use crate::config::{read_json, CurveFile, CvaFile, FrailtyFile, ModelFile};
use crate::error::CliError;
use crate::output::{cplx_vec, to_csv, to_json, Cplx};
use crate::parallel;

#[derive(Debug, Parser)]
#[command(name = "levy-ifpt", version, about = "Randomised inverse first-passage problems for Lévy processes")]
pub struct Cli {
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Roots of ψ(ρ) = q split into the two Wiener–Hopf groups.
    Roots {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        q: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        q_im: f64,
    },
    /// Both Wiener–Hopf factors at (q, θ).
    Wh {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        q: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        q_im: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        theta_im: f64,
    },
    /// The λ-invariant initial law.
    Qid {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        lambda: LambdaArgs,
        /// Also write `x,density,cdf` to this file.
        #[arg(long)]
        density_csv: Option<PathBuf>,
    },
    /// Initial law and time change reproducing a survival curve.
    Solve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        curve: PathBuf,
        #[command(flatten)]
        lambda: LambdaArgs,
        /// Sample the time change on [0, t_max] (default: where the curve falls to 1%).
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Also write `t,time_change` to this file.
        #[arg(long)]
        timechange_csv: Option<PathBuf>,
    },
    /// Simulated survival of the time-changed passage against the curve.
    Validate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        curve: PathBuf,
        #[command(flatten)]
        lambda: LambdaArgs,
        #[command(flatten)]
        mc: McArgs,
        /// Last grid time (default: where the curve falls to 5%).
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
    /// Joint survival of several names under a common frailty.
    Frailty {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        mc: McArgs,
        /// Grid times per name, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.5,1,1.5,2")]
        times: Vec<f64>,
    },
    /// Loss from counterparty default on a call.
    Cva {
        #[arg(long)]
        spec: PathBuf,
        /// Also estimate the loss by simulating (S, τ).
        #[arg(long)]
        mc_check: bool,
        #[command(flatten)]
        mc: McArgs,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct LambdaArgs {
    /// Killing rate λ.
    #[arg(long, group = "rate")]
    pub lambda: Option<f64>,
    /// λ as a fraction of λ*.
    #[arg(long, group = "rate")]
    pub lambda_frac: Option<f64>,
    /// λ = -log H̄(T)/T for this T.
    #[arg(long, group = "rate")]
    pub normalize: Option<f64>,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct McArgs {
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub antithetic: bool,
    /// Detect crossings at step ends only.
    #[arg(long)]
    pub no_bridge: bool,
}

impl McArgs {
    fn params(&self, horizon: f64) -> McParams {
        McParams {
            bridge_correction: !self.no_bridge,
            antithetic: self.antithetic,
            ..McParams::new(self.paths, horizon, self.seed)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootsOut {
    pub q: Cplx,
    pub plus: Vec<Cplx>,
    pub minus: Vec<Cplx>,
    pub phi_bar: Option<f64>,
    pub confluent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhOut {
    pub q: Cplx,
    pub theta: Cplx,
    pub plus: Cplx,
    pub minus: Cplx,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QidOut {
    pub lambda: f64,
    pub lambda_star: f64,
    pub phi_bar: f64,
    /// `P(X₀ > x) = Σ weights[i]·exp(-rates[i]·x)`
    pub rates: Vec<Cplx>,
    pub weights: Vec<Cplx>,
    pub mean: f64,
}

impl QidOut {
    fn new(d: &QuasiInvariantDist) -> Self {
        Self {
            lambda: d.lambda(),
            lambda_star: d.lambda_star(),
            phi_bar: d.phi_bar(),
            rates: cplx_vec(d.poles()),
            weights: cplx_vec(d.weights()),
            mean: d.mean(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOut {
    pub lambda: f64,
    pub lambda_star: f64,
    pub qid: QidOut,
    /// `[t, I(t)]` pairs.
    pub timechange: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCheckOut {
    pub paths: usize,
    pub seed: u64,
    pub pi: f64,
    pub pi_se: f64,
    pub call: f64,
    pub call_se: f64,
    pub martingale: f64,
    pub martingale_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvaDiagnosticsOut {
    pub lambda0: f64,
    pub lambda_star: f64,
    pub max_tail_ratio: f64,
    pub quadrature_error: f64,
    pub exposure_evaluations: usize,
    pub call_price: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McCheckOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvaOut {
    pub pi: f64,
    /// `[t, P_t]` pairs.
    pub exposure_curve: Vec<[f64; 2]>,
    pub diagnostics: CvaDiagnosticsOut,
}

fn load_model(path: &Path) -> Result<MixedExpLevy, CliError> {
    read_json::<ModelFile>(path)?.build()
}

fn load_curve(path: &Path) -> Result<SurvivalCurve, CliError> {
    read_json::<CurveFile>(path)?.build()
}

fn resolve_lambda(model: &MixedExpLevy, curve: Option<&SurvivalCurve>, a: &LambdaArgs) -> Result<LambdaChoice, CliError> {
    match (a.lambda, a.lambda_frac, a.normalize) {
        (Some(l), None, None) => Ok(LambdaChoice::Explicit(l)),
        (None, Some(f), None) => Ok(LambdaChoice::Explicit(f * compute_spectral(model)?.lambda_star)),
        (None, None, Some(t)) if curve.is_some() => Ok(LambdaChoice::Normalized(t)),
        (None, None, Some(_)) => Err(CliError::Usage("--normalize needs a survival curve".into())),
        _ => Err(CliError::Usage("give exactly one of --lambda, --lambda-frac, --normalize".into())),
    }
}

fn explicit_lambda(model: &MixedExpLevy, a: &LambdaArgs) -> Result<f64, CliError> {
    match resolve_lambda(model, None, a)? {
        LambdaChoice::Explicit(l) => Ok(l),
        LambdaChoice::Normalized(_) => unreachable!(),
    }
}

fn side_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Runs one command and returns what goes to the main output.
pub fn execute(command: &Command) -> Result<String, CliError> {
    match command {
        Command::Roots { model, q, q_im } => {
            let m = load_model(model)?;
            let rs = cramer_lundberg_roots(&m, Complex64::new(*q, *q_im))?;
            to_json(&RootsOut {
                q: Cplx(rs.q),
                plus: cplx_vec(&rs.plus_roots),
                minus: cplx_vec(&rs.minus_roots),
                phi_bar: rs.phi_bar,
                confluent: rs.confluent,
            })
        }
        Command::Wh { model, q, q_im, theta, theta_im } => {
            let m = load_model(model)?;
            let q = Complex64::new(*q, *q_im);
            let th = Complex64::new(*theta, *theta_im);
            let wh = WhFactors::new(&m, q)?;
            to_json(&WhOut {
                q: Cplx(q),
                theta: Cplx(th),
                plus: Cplx(wh.plus(th)?),
                minus: Cplx(wh.minus(th)?),
                residual: product_residual(&m, &wh, th)?,
            })
        }
        Command::Qid { model, lambda, density_csv } => {
            let m = load_model(model)?;
            m.ensure_admissible()?;
            let lam = compute_spectral(&m)?.check_lambda(explicit_lambda(&m, lambda)?)?;
            let d = QuasiInvariantDist::new(&m, lam)?;
            if let Some(path) = density_csv {
                let rows = d.grid().into_iter().map(|x| vec![x, d.density(x), d.cdf(x)]);
                side_file(path, &to_csv(&["x", "density", "cdf"], rows)?)?;
            }
            to_json(&QidOut::new(&d))
        }
        Command::Solve { model, curve, lambda, t_max, points, timechange_csv } => {
            let m = load_model(model)?;
            let c = load_curve(curve)?;
            let sol = solve_rifpt(&m, &c, resolve_lambda(&m, Some(&c), lambda)?)?;
            let top = t_max.unwrap_or_else(|| c.inverse_survival(0.01));
            if !(top > 0.0 && top.is_finite()) || *points < 2 {
                return Err(CliError::Usage(format!("need t_max in (0, inf) and points >= 2, got {top} and {points}")));
            }
            let samples: Vec<[f64; 2]> = (0..*points)
                .map(|k| {
                    let t = top * k as f64 / (*points - 1) as f64;
                    [t, sol.time_change.eval(t)]
                })
                .collect();
            if let Some(path) = timechange_csv {
                side_file(path, &to_csv(&["t", "time_change"], samples.iter().map(|p| p.to_vec()))?)?;
            }
            to_json(&SolveOut {
                lambda: sol.lam,
                lambda_star: sol.dist.lambda_star(),
                qid: QidOut::new(&sol.dist),
                timechange: samples,
            })
        }
        Command::Validate { model, curve, lambda, mc, horizon, points } => {
            let m = load_model(model)?;
            let c = load_curve(curve)?;
            let sol = solve_rifpt(&m, &c, resolve_lambda(&m, Some(&c), lambda)?)?;
            let top = horizon.unwrap_or_else(|| c.inverse_survival(0.05));
            if !(top > 0.0 && top.is_finite()) || *points == 0 {
                return Err(CliError::Usage(format!("need a finite positive horizon and points >= 1, got {top}")));
            }
            let taus: Vec<f64> = parallel::time_changed_first_passages(&sol, &mc.params(top))?
                .iter()
                .map(|s| s.tau)
                .collect();
            let grid: Vec<f64> = (1..=*points).map(|k| top * k as f64 / *points as f64).collect();
            let rows = survival_grid(&taus, &grid)?.into_iter().map(|p| vec![p.t, c.survival(p.t), p.survival, p.se]);
            to_csv(&["t", "target_survival", "mc_survival", "se"], rows)
        }
        Command::Frailty { spec, mc, times } => {
            let sol = solve_frailty(&read_json::<FrailtyFile>(spec)?.build()?)?;
            if times.is_empty() || times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
                return Err(CliError::Usage("--times must be finite and non-negative".into()));
            }
            let top = times.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            let paths = parallel::frailty_paths(&sol, &mc.params(top))?;
            let d = sol.dimension();
            let n = paths.len() as f64;
            let mut rows = Vec::new();
            let mut idx = vec![0usize; d];
            loop {
                let ts: Vec<f64> = idx.iter().map(|&i| times[i]).collect();
                let alive = paths.iter().filter(|p| p.iter().zip(&ts).all(|(tau, t)| tau > t)).count() as f64 / n;
                let mut row = ts.clone();
                row.extend([sol.joint_survival(&ts), alive, (alive * (1.0 - alive) / n).sqrt()]);
                rows.push(row);
                let Some(k) = (0..d).rev().find(|&k| idx[k] + 1 < times.len()) else { break };
                idx[k] += 1;
                idx[k + 1..].iter_mut().for_each(|i| *i = 0);
            }
            let mut header: Vec<String> = (1..=d).map(|i| format!("t{i}")).collect();
            header.extend(["target_survival", "mc_survival", "se"].map(String::from));
            to_csv(&header.iter().map(String::as_str).collect::<Vec<_>>(), rows)
        }
        Command::Cva { spec, mc_check, mc } => {
            let spec = read_json::<CvaFile>(spec)?.build()?;
            let r = parallel::cva_value(&spec)?;
            let mc_out = if *mc_check {
                let (est, _) = parallel::cva_paths(&spec, &mc.params(spec.maturity))?;
                Some(McCheckOut {
                    paths: mc.paths,
                    seed: mc.seed,
                    pi: est.pi.mean,
                    pi_se: est.pi.se,
                    call: est.call.mean,
                    call_se: est.call.se,
                    martingale: est.martingale.mean,
                    martingale_se: est.martingale.se,
                })
            } else {
                None
            };
            let dg = r.diagnostics;
            to_json(&CvaOut {
                pi: r.pi,
                exposure_curve: r.exposure_curve.iter().map(|&(t, p)| [t, p]).collect(),
                diagnostics: CvaDiagnosticsOut {
                    lambda0: dg.lambda0,
                    lambda_star: dg.lambda_star,
                    max_tail_ratio: dg.max_tail_ratio,
                    quadrature_error: dg.quadrature_error,
                    exposure_evaluations: dg.exposure_evaluations,
                    call_price: levy_ifpt_core::cva::call_price(&spec)?,
                    mc: mc_out,
                },
            })
        }
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = parallel::with_threads(parallel::threads_from_env(), || execute(&cli.command));
    let text = match result {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, text.as_bytes()).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    match written {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
