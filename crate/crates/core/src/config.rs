//! TOML run configuration shared by the CLI subcommands. Every table is
//! optional; unknown keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dispersion::ComparabilityConstants;
use crate::error::{Error, Result};
use crate::nonlinearity::PolyNonlinearity;
use crate::solver::{Equation, SolverConfig};
use crate::tuples::DEFAULT_TUPLE_BUDGET;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub model: ModelConfig,
    pub solver: SolverSection,
    pub initial: InitialConfig,
    pub output: OutputConfig,
    pub smoothing: SmoothingSection,
    pub growth: GrowthSection,
    pub verify: VerifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out: PathBuf::from("out"),
            model: ModelConfig::default(),
            solver: SolverSection::default(),
            initial: InitialConfig::default(),
            output: OutputConfig::default(),
            smoothing: SmoothingSection::default(),
            growth: GrowthSection::default(),
            verify: VerifyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    /// `[[a_1, d_1], [a_2, d_2], ...]`; an empty list is the linear flow.
    pub p: PolyNonlinearity,
    pub cutoff: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            p: PolyNonlinearity::monomial(1.0, 3).expect("valid monomial"),
            cutoff: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub dt: f64,
    pub horizon: f64,
    pub sample_every: usize,
    pub equation: Equation,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            dt: 1e-4,
            horizon: 1.0,
            sample_every: 100,
            equation: Equation::Original,
        }
    }
}

/// Initial data: `amplitude · random_sobolev(s, N, seed, delta)`, or the
/// explicit `modes` list of `[k, re, im]` when it is nonempty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub s: f64,
    pub delta: f64,
    pub amplitude: f64,
    pub modes: Vec<(i64, f64, f64)>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig {
            s: 1.0,
            delta: 0.05,
            amplitude: 1.0,
            modes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Sobolev indices reported in the diagnostics CSV.
    pub s_list: Vec<f64>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            s_list: vec![0.0, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmoothingSection {
    pub gammas: Vec<f64>,
    pub samples: usize,
}

impl Default for SmoothingSection {
    fn default() -> Self {
        SmoothingSection {
            gammas: vec![0.25, 0.5, 0.75],
            samples: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrowthSection {
    pub window: f64,
    pub samples: usize,
    pub epsilon: f64,
}

impl Default for GrowthSection {
    fn default() -> Self {
        GrowthSection {
            window: 1.0,
            samples: 200,
            epsilon: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub constants: ComparabilityConstants,
    /// `[n, K]` boxes for the exhaustive case check.
    pub boxes: Vec<(usize, i64)>,
    /// Arities for the resonant-set inclusion-exclusion count.
    pub resonant_arities: Vec<usize>,
    pub resonant_k_max: i64,
    /// Arities for the polarization identity.
    pub polarize_arities: Vec<usize>,
    pub polarize_cutoff: usize,
    /// `[n, k1_max, rest_max]` sigma - mu sweeps.
    pub sigma_mu: Vec<(usize, i64, i64)>,
    pub sigma_mu_bound: f64,
    pub cancellation_self: Vec<usize>,
    pub cancellation_mixed: Vec<(usize, usize)>,
    pub cancellation_cutoff: usize,
    pub cancellation_seeds: Vec<u64>,
    /// Relative tolerance for the floating-point identities.
    pub tolerance: f64,
    /// Largest tuple count a single enumeration may visit.
    pub budget: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            constants: ComparabilityConstants::default(),
            boxes: vec![(2, 50), (3, 30), (4, 12), (5, 8)],
            resonant_arities: vec![2, 3, 4],
            resonant_k_max: 6,
            polarize_arities: vec![2, 3, 4],
            polarize_cutoff: 6,
            sigma_mu: vec![(3, 200, 10), (4, 60, 6)],
            sigma_mu_bound: 10.0,
            cancellation_self: vec![2, 3, 4],
            cancellation_mixed: vec![(2, 3), (3, 4)],
            cancellation_cutoff: 12,
            cancellation_seeds: vec![1, 2],
            tolerance: 1e-12,
            budget: DEFAULT_TUPLE_BUDGET as u64,
        }
    }
}

fn field_err(name: &str, what: &str) -> Error {
    Error::invalid(format!("{name}: {what}"))
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(field_err(name, "must be positive and finite"))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.model.cutoff == 0 {
            return Err(field_err("model.cutoff", "must be at least 1"));
        }
        positive("solver.dt", self.solver.dt)?;
        positive("solver.horizon", self.solver.horizon)?;
        if self.solver.sample_every == 0 {
            return Err(field_err("solver.sample_every", "must be at least 1"));
        }
        positive("initial.delta", self.initial.delta)?;
        positive("initial.amplitude", self.initial.amplitude)?;
        if !self.initial.s.is_finite() {
            return Err(field_err("initial.s", "must be finite"));
        }
        if self.output.s_list.iter().any(|s| !s.is_finite()) {
            return Err(field_err("output.s_list", "entries must be finite"));
        }
        if self.smoothing.samples == 0 {
            return Err(field_err("smoothing.samples", "must be at least 1"));
        }
        positive("growth.window", self.growth.window)?;
        positive("growth.epsilon", self.growth.epsilon)?;
        if self.growth.samples < 2 {
            return Err(field_err("growth.samples", "must be at least 2"));
        }
        let v = &self.verify;
        v.constants
            .validate()
            .map_err(|e| field_err("verify.constants", &e.to_string()))?;
        positive("verify.tolerance", v.tolerance)?;
        positive("verify.sigma_mu_bound", v.sigma_mu_bound)?;
        if v.cancellation_cutoff == 0 || v.polarize_cutoff == 0 {
            return Err(field_err("verify", "cutoffs must be at least 1"));
        }
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            cutoff: self.model.cutoff,
            dt: self.solver.dt,
            horizon: self.solver.horizon,
            sample_every: self.solver.sample_every,
            equation: self.solver.equation,
            p: self.model.p.clone(),
        }
    }
}
