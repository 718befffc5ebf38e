//! Experiment configuration: JSON file values, overridden by flags.

use std::path::{Path, PathBuf};

use adamxlab_core::harness::{quadratic_problem, synthetic_problem, toy_training_problem, Problem};
use adamxlab_core::numerics::FeasibleBox;
use adamxlab_core::optimizers::{HyperParams, OptimizerKind, Schedule, StepSize};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProblemChoice {
    Synthetic,
    Quadratic,
    Logistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerChoice {
    Adam,
    Amsgrad,
    Adamx,
}

impl From<OptimizerChoice> for OptimizerKind {
    fn from(c: OptimizerChoice) -> Self {
        match c {
            OptimizerChoice::Adam => OptimizerKind::Adam,
            OptimizerChoice::Amsgrad => OptimizerKind::AmsGrad,
            OptimizerChoice::Adamx => OptimizerKind::AdamX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleChoice {
    Const,
    Exp,
    Inv,
}

impl From<ScheduleChoice> for Schedule {
    fn from(c: ScheduleChoice) -> Self {
        match c {
            ScheduleChoice::Const => Schedule::Constant,
            ScheduleChoice::Exp => Schedule::ExpDecay,
            ScheduleChoice::Inv => Schedule::InverseT,
        }
    }
}

/// One experiment. Field names double as JSON config keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemChoice,
    pub optimizer: OptimizerChoice,
    pub schedule: ScheduleChoice,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub bias_correction: bool,
    pub steps: usize,
    pub seed: u64,
    /// Dimension of the quadratic problem; the other problems fix their own.
    pub dim: usize,
    /// Also emit per-coordinate m, v and v̂ columns.
    pub record_full: bool,
    pub output_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let h = HyperParams::default();
        ExperimentConfig {
            problem: ProblemChoice::Synthetic,
            optimizer: OptimizerChoice::Amsgrad,
            schedule: ScheduleChoice::Exp,
            alpha: h.alpha,
            beta1: h.beta1,
            beta2: h.beta2,
            lambda: h.lambda,
            epsilon: h.epsilon,
            bias_correction: false,
            steps: 1000,
            seed: 0,
            dim: 1,
            record_full: false,
            output_path: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read config {}", path.display()), e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn hyper(&self) -> HyperParams {
        HyperParams {
            alpha: self.alpha,
            beta1: self.beta1,
            beta2: self.beta2,
            lambda: self.lambda,
            schedule: self.schedule.into(),
            epsilon: self.epsilon,
            bias_correction: self.bias_correction,
            step_size: StepSize::InverseSqrt,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.steps < 1 {
            return Err(CliError::Usage("steps must be ≥ 1".into()));
        }
        if self.dim < 1 {
            return Err(CliError::Usage("dim must be ≥ 1".into()));
        }
        self.hyper().validate().map_err(CliError::from)
    }

    pub fn build_problem(&self) -> CliResult<Box<dyn Problem>> {
        Ok(match self.problem {
            ProblemChoice::Synthetic => Box::new(synthetic_problem()),
            ProblemChoice::Quadratic => Box::new(quadratic_problem(
                self.seed,
                self.dim,
                FeasibleBox::cube(self.dim, -1.0, 1.0)?,
            )?),
            ProblemChoice::Logistic => Box::new(toy_training_problem(self.seed)),
        })
    }
}

/// Experiment flags. Every flag is optional so that it only overrides the
/// config file (or the defaults) when given.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON config file; flags override its values.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub problem: Option<ProblemChoice>,
    #[arg(long, value_enum)]
    pub optimizer: Option<OptimizerChoice>,
    #[arg(long, value_enum)]
    pub schedule: Option<ScheduleChoice>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub bias_correction: bool,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub record_full: bool,
    /// Trace CSV destination; stdout when omitted.
    #[arg(long, short = 'o', value_name = "PATH")]
    pub output: Option<PathBuf>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> CliResult<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_json_file(p)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! over {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field.clone() { c.$field = v; })*
            };
        }
        over!(problem, optimizer, schedule, alpha, beta1, beta2, lambda, epsilon, steps, seed, dim);
        if self.bias_correction {
            c.bias_correction = true;
        }
        if self.record_full {
            c.record_full = true;
        }
        if let Some(p) = &self.output {
            c.output_path = Some(p.clone());
        }
        c.validate()?;
        Ok(c)
    }
}
