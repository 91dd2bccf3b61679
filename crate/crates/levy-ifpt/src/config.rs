//! JSON input files: models, survival curves, frailty and CVA specs.

use std::path::Path;

use levy_ifpt_core::cva::{CvaNumerics, CvaSpec};
use levy_ifpt_core::ifpt::{FrailtyName, FrailtySpec, FrailtyState};
use levy_ifpt_core::{ExpTerm, MixedExpLevy, SurvivalCurve};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermFile {
    pub a: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelFile {
    MixedExp {
        sigma: f64,
        eta: f64,
        #[serde(default)]
        ell: f64,
        #[serde(default)]
        p: f64,
        #[serde(default)]
        up: Vec<TermFile>,
        #[serde(default)]
        down: Vec<TermFile>,
    },
    /// Brownian motion with drift; unit volatility unless `sigma` is given.
    Brownian {
        eta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
    },
}

impl ModelFile {
    pub fn build(&self) -> Result<MixedExpLevy, CliError> {
        let terms = |ts: &[TermFile]| ts.iter().map(|t| ExpTerm::new(t.a, t.alpha)).collect::<Vec<_>>();
        Ok(match self {
            Self::MixedExp { sigma, eta, ell, p, up, down } => {
                MixedExpLevy::new(*sigma, *eta, *ell, *p, terms(up), terms(down))?
            }
            Self::Brownian { eta, sigma: None } => MixedExpLevy::brownian(*eta),
            Self::Brownian { eta, sigma: Some(s) } => MixedExpLevy::new(*s, *eta, 0.0, 0.0, Vec::new(), Vec::new())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveFile {
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
    /// `rates[i]` applies before `breakpoints[i]`, the last rate after the last breakpoint.
    PiecewiseHazard { breakpoints: Vec<f64>, rates: Vec<f64> },
    Table { times: Vec<f64>, survival: Vec<f64> },
}

impl CurveFile {
    pub fn build(&self) -> Result<SurvivalCurve, CliError> {
        Ok(match self {
            Self::Exponential { rate } => SurvivalCurve::exponential(*rate)?,
            Self::Weibull { shape, scale } => SurvivalCurve::weibull(*shape, *scale)?,
            Self::PiecewiseHazard { breakpoints, rates } => SurvivalCurve::piecewise_hazard(breakpoints, rates)?,
            Self::Table { times, survival } => SurvivalCurve::table(times, survival)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrailtyNameFile {
    pub model: ModelFile,
    pub curve: CurveFile,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrailtyStateFile {
    pub prob: f64,
    pub names: Vec<FrailtyNameFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrailtyFile {
    pub states: Vec<FrailtyStateFile>,
}

impl FrailtyFile {
    pub fn build(&self) -> Result<FrailtySpec, CliError> {
        let states = self
            .states
            .iter()
            .map(|s| {
                let names = s
                    .names
                    .iter()
                    .map(|n| Ok(FrailtyName { model: n.model.build()?, curve: n.curve.build()?, lam: n.lambda }))
                    .collect::<Result<Vec<_>, CliError>>()?;
                Ok(FrailtyState { prob: s.prob, names })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(FrailtySpec { states })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsFile {
    pub alpha: f64,
    pub xi_max: f64,
    pub xi_points: usize,
    pub laplace_terms: usize,
}

impl Default for NumericsFile {
    fn default() -> Self {
        let n = CvaNumerics::default();
        Self { alpha: n.alpha, xi_max: n.xi_max, xi_points: n.xi_points, laplace_terms: n.laplace_terms }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvaFile {
    #[serde(rename = "S0")]
    pub s0: f64,
    #[serde(rename = "K")]
    pub strike: f64,
    #[serde(rename = "T")]
    pub maturity: f64,
    pub r: f64,
    #[serde(default)]
    pub d: f64,
    pub rho: f64,
    #[serde(rename = "X")]
    pub x: ModelFile,
    #[serde(rename = "Z")]
    pub z: ModelFile,
    pub curve: CurveFile,
    #[serde(default)]
    pub numerics: NumericsFile,
}

impl CvaFile {
    pub fn build(&self) -> Result<CvaSpec, CliError> {
        let n = &self.numerics;
        Ok(CvaSpec {
            s0: self.s0,
            strike: self.strike,
            maturity: self.maturity,
            rate: self.r,
            dividend: self.d,
            rho: self.rho,
            x: self.x.build()?,
            z: self.z.build()?,
            curve: self.curve.build()?,
            numerics: CvaNumerics {
                alpha: n.alpha,
                xi_max: n.xi_max,
                xi_points: n.xi_points,
                laplace_terms: n.laplace_terms,
            },
        })
    }
}

pub fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(format!("{what}: {e}")))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_json(&text, &path.display().to_string())
}
