//! JSON run configuration: model parameters plus optional solver,
//! simulation, and sweep sections.
//!
//! Parsing is strict — unknown keys anywhere in the document are
//! rejected, so typos fail loudly instead of silently falling back to
//! defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::sim::SimConfig;
use crate::solver::SolverSettings;
use crate::state::SystemState;

/// Top-level run configuration.
///
/// `mu` accepts either one entry per queue or a single entry broadcast to
/// all `n` queues; `eta` must list one factor per occupancy level `1..=B`.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub lambda: f64,
    pub mu: Vec<f64>,
    pub n: usize,
    #[serde(rename = "B")]
    pub buffer: i32,
    pub r: f64,
    pub f: f64,
    pub beta: f64,
    pub psi: f64,
    pub kappa: f64,
    pub h: f64,
    pub eta: Vec<f64>,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<u64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    /// Queue levels of the starting state, one per queue (-1 = idle).
    pub initial_state: Vec<i32>,
    pub replications: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_epsilon: Option<f64>,
}

/// Which scalar a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    Kappa,
    H,
    Beta,
    Psi,
    F,
    R,
    Lambda,
    Gamma,
}

impl SweepParameter {
    pub fn label(self) -> &'static str {
        match self {
            SweepParameter::Kappa => "kappa",
            SweepParameter::H => "h",
            SweepParameter::Beta => "beta",
            SweepParameter::Psi => "psi",
            SweepParameter::F => "f",
            SweepParameter::R => "r",
            SweepParameter::Lambda => "lambda",
            SweepParameter::Gamma => "gamma",
        }
    }

    /// Copy of `base` with this parameter set to `value`.
    pub fn apply(self, base: &ModelParams, value: f64) -> ModelParams {
        let mut p = base.clone();
        match self {
            SweepParameter::Kappa => p.kappa = value,
            SweepParameter::H => p.h = value,
            SweepParameter::Beta => p.beta = value,
            SweepParameter::Psi => p.psi = value,
            SweepParameter::F => p.f = value,
            SweepParameter::R => p.r = value,
            SweepParameter::Lambda => p.lambda = value,
            SweepParameter::Gamma => p.gamma = value,
        }
        p
    }
}

/// Sweep grid: either an explicit value list or an inclusive evenly
/// spaced range with `steps` points.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// State whose solved value each row reports; all-idle when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_state: Option<Vec<i32>>,
}

impl SweepSection {
    /// Materialize the grid. Exactly one of `values` and the
    /// (start, stop, steps) triple must be present.
    pub fn grid(&self) -> Result<Vec<f64>> {
        match (&self.values, self.start, self.stop, self.steps) {
            (Some(values), None, None, None) => {
                if values.is_empty() {
                    return Err(Error::Config("sweep value list is empty".into()));
                }
                Ok(values.clone())
            }
            (None, Some(start), Some(stop), Some(steps)) => {
                if steps < 2 {
                    return Err(Error::Config("sweep needs at least 2 steps".into()));
                }
                if !(start.is_finite() && stop.is_finite()) || stop <= start {
                    return Err(Error::Config(format!(
                        "sweep range [{start}, {stop}] must be finite and increasing"
                    )));
                }
                let span = stop - start;
                Ok((0..steps)
                    .map(|i| start + span * i as f64 / (steps - 1) as f64)
                    .collect())
            }
            _ => Err(Error::Config(
                "sweep takes either `values` or all of `start`, `stop`, `steps`".into(),
            )),
        }
    }
}

impl ConfigFile {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Validated model parameters, with single-entry `mu` broadcast to all
    /// `n` queues.
    pub fn to_model_params(&self) -> Result<ModelParams> {
        let mu = if self.mu.len() == 1 && self.n > 1 {
            vec![self.mu[0]; self.n]
        } else if self.mu.len() == self.n {
            self.mu.clone()
        } else {
            return Err(Error::Config(format!(
                "mu has {} entries; expected 1 (broadcast) or n = {}",
                self.mu.len(),
                self.n
            )));
        };
        let params = ModelParams {
            lambda: self.lambda,
            mu,
            buffer: self.buffer,
            r: self.r,
            f: self.f,
            beta: self.beta,
            psi: self.psi,
            kappa: self.kappa,
            h: self.h,
            eta: self.eta.clone(),
            gamma: self.gamma,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn solver_settings(&self) -> SolverSettings {
        let defaults = SolverSettings::default();
        match &self.solver {
            None => defaults,
            Some(section) => SolverSettings {
                tol: section.tol.unwrap_or(defaults.tol),
                max_iters: section.max_iters.unwrap_or(defaults.max_iters),
            },
        }
    }

    /// Simulation settings, when the `sim` section is present.
    pub fn sim_config(&self) -> Result<Option<SimConfig>> {
        let Some(section) = &self.sim else { return Ok(None) };
        let initial = SystemState::new(section.initial_state.clone(), self.buffer)?;
        if initial.queue_count() != self.n {
            return Err(Error::Config(format!(
                "initial_state has {} entries; expected n = {}",
                initial.queue_count(),
                self.n
            )));
        }
        Ok(Some(SimConfig {
            initial_state: initial,
            truncation_epsilon: section.truncation_epsilon,
            replications: section.replications,
            rng_seed: section.seed,
        }))
    }

    /// Reference state for sweep value reporting; all-idle by default.
    pub fn sweep_reference(&self) -> Result<SystemState> {
        match self.sweep.as_ref().and_then(|s| s.reference_state.as_ref()) {
            None => Ok(SystemState::all_inactive(self.n)),
            Some(levels) => {
                let state = SystemState::new(levels.clone(), self.buffer)?;
                if state.queue_count() != self.n {
                    return Err(Error::Config(format!(
                        "reference_state has {} entries; expected n = {}",
                        state.queue_count(),
                        self.n
                    )));
                }
                Ok(state)
            }
        }
    }
}
