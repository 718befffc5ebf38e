//! Step rules for Adam, AMSGrad and AdamX.
//!
//! All three share the moment recurrences
//!
//! ```text
//! m_t = β_{1,t}·m_{t−1} + (1 − β_{1,t})·g_t
//! v_t = β₂·v_{t−1} + (1 − β₂)·g_t²
//! x_{t+1} = Π_F(x_t − α_t·m_t / (√v̂_t + ε))
//! ```
//!
//! and differ only in how v̂_t is formed:
//!
//! - Adam: v̂_t = v_t
//! - AMSGrad: v̂_t = max(v̂_{t−1}, v_t)
//! - AdamX: v̂_1 = v_1, then v̂_t = max((1−β_{1,t})²/(1−β_{1,t−1})²·v̂_{t−1}, v_t)

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{project_box, FeasibleBox, Vector};

/// How β_{1,t} evolves with the step index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// β_{1,t} = β₁
    Constant,
    /// β_{1,t} = β₁·λ^{t−1}
    ExpDecay,
    /// β_{1,t} = β₁/t
    InverseT,
}

/// Step-size schedule. Every regret bound assumes `InverseSqrt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSize {
    /// α_t = α/√t
    #[default]
    InverseSqrt,
    /// α_t = α; only meant for the toy training runs.
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Adam,
    AmsGrad,
    AdamX,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Adam => "adam",
            OptimizerKind::AmsGrad => "amsgrad",
            OptimizerKind::AdamX => "adamx",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub lambda: f64,
    pub schedule: Schedule,
    /// Added to √v̂ in the denominator. Zero reproduces the algorithms as
    /// written.
    pub epsilon: f64,
    /// Adam-style bias correction; only honored by [`step_adam`].
    pub bias_correction: bool,
    pub step_size: StepSize,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            alpha: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            lambda: 0.001,
            schedule: Schedule::ExpDecay,
            epsilon: 0.0,
            bias_correction: false,
            step_size: StepSize::InverseSqrt,
        }
    }
}

impl HyperParams {
    /// The hyperparameters of the sign-flip counter-example:
    /// α = 0.001, β₁ = 0.9, β₂ = 0.999, β_{1,t} = β₁·0.001^{t−1}.
    pub fn counterexample() -> Self {
        HyperParams::default()
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// γ = β₁/√β₂.
    pub fn gamma(&self) -> f64 {
        self.beta1 / self.beta2.sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(field: &'static str, reason: &str) -> Result<()> {
            Err(Error::InvalidHyperParam {
                field,
                reason: reason.to_string(),
            })
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return bad("alpha", "must be a finite value > 0");
        }
        if !(0.0..1.0).contains(&self.beta1) {
            return bad("beta1", "must lie in [0, 1)");
        }
        if !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            return bad("beta2", "must lie in (0, 1)");
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return bad("lambda", "must lie in (0, 1)");
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return bad("epsilon", "must be a finite value ≥ 0");
        }
        if self.gamma() > 1.0 {
            return bad("beta1", "beta1/sqrt(beta2) must not exceed 1");
        }
        Ok(())
    }

    pub fn step_size_at(&self, t: usize) -> f64 {
        match self.step_size {
            StepSize::InverseSqrt => self.alpha / (t as f64).sqrt(),
            StepSize::Constant => self.alpha,
        }
    }

    /// β_{1,1..=horizon}, indexed from zero.
    pub fn beta1_sequence(&self, horizon: usize) -> Vec<f64> {
        (1..=horizon).map(|t| beta1_value(t, self)).collect()
    }
}

/// β_{1,t} for `t ≥ 1`.
pub fn beta1_at(t: usize, h: &HyperParams) -> Result<f64> {
    if t == 0 {
        return Err(Error::contract("β₁ schedule is defined for t ≥ 1"));
    }
    Ok(beta1_value(t, h))
}

fn beta1_value(t: usize, h: &HyperParams) -> f64 {
    match h.schedule {
        Schedule::Constant => h.beta1,
        Schedule::ExpDecay => h.beta1 * h.lambda.powi((t - 1) as i32),
        Schedule::InverseT => h.beta1 / t as f64,
    }
}

/// Per-trajectory optimizer state after `t` completed steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    /// Current iterate x_{t+1}.
    pub x: Vector,
    pub m: Vector,
    pub v: Vector,
    pub v_hat: Vector,
    pub t: usize,
    /// β_{1,t} of the last completed step. `None` before the first step.
    pub beta1_prev: Option<f64>,
}

impl OptimizerState {
    /// Fresh state at x₁ with m₀ = v₀ = v̂₀ = 0.
    pub fn new(x1: Vector) -> Self {
        let d = x1.dim();
        OptimizerState {
            x: x1,
            m: Vector::zeros(d),
            v: Vector::zeros(d),
            v_hat: Vector::zeros(d),
            t: 0,
            beta1_prev: None,
        }
    }
}

pub fn step(
    kind: OptimizerKind,
    state: OptimizerState,
    g: &Vector,
    h: &HyperParams,
    feasible: &FeasibleBox,
) -> Result<OptimizerState> {
    match kind {
        OptimizerKind::Adam => step_adam(state, g, h, feasible),
        OptimizerKind::AmsGrad => step_amsgrad(state, g, h, feasible),
        OptimizerKind::AdamX => step_adamx(state, g, h, feasible),
    }
}

pub fn step_amsgrad(
    state: OptimizerState,
    g: &Vector,
    h: &HyperParams,
    feasible: &FeasibleBox,
) -> Result<OptimizerState> {
    advance(state, g, h, feasible, false, |prev, v_new| prev.max(v_new))
}

pub fn step_adamx(
    state: OptimizerState,
    g: &Vector,
    h: &HyperParams,
    feasible: &FeasibleBox,
) -> Result<OptimizerState> {
    let scale = match state.beta1_prev {
        None => None,
        Some(prev) => {
            if prev >= 1.0 {
                return Err(Error::contract("β_{1,t−1} = 1 makes the AdamX ratio undefined"));
            }
            let cur = beta1_value(state.t + 1, h);
            Some((1.0 - cur).powi(2) / (1.0 - prev).powi(2))
        }
    };
    advance(state, g, h, feasible, false, |prev, v_new| match scale {
        None => v_new,
        Some(s) => (s * prev).max(v_new),
    })
}

pub fn step_adam(
    state: OptimizerState,
    g: &Vector,
    h: &HyperParams,
    feasible: &FeasibleBox,
) -> Result<OptimizerState> {
    advance(state, g, h, feasible, h.bias_correction, |_, v_new| v_new)
}

fn advance(
    state: OptimizerState,
    g: &Vector,
    h: &HyperParams,
    feasible: &FeasibleBox,
    bias_correction: bool,
    v_hat_rule: impl Fn(f64, f64) -> f64,
) -> Result<OptimizerState> {
    let d = state.x.dim();
    if g.dim() != d || feasible.dim() != d {
        return Err(Error::contract(format!(
            "dimension mismatch: state {d}, gradient {}, box {}",
            g.dim(),
            feasible.dim()
        )));
    }
    if !g.is_finite() {
        return Err(Error::NumericFault {
            step: state.t + 1,
            detail: "non-finite gradient".into(),
        });
    }

    let t = state.t + 1;
    let b1 = beta1_value(t, h);
    let b2 = h.beta2;
    let alpha_t = h.step_size_at(t);

    let OptimizerState {
        x,
        mut m,
        mut v,
        v_hat,
        ..
    } = state;

    let mut v_hat_new = Vector::zeros(d);
    let mut y = Vector::zeros(d);
    let (ms, vs) = (m.as_mut_slice(), v.as_mut_slice());
    for i in 0..d {
        let gi = g[i];
        ms[i] = b1 * ms[i] + (1.0 - b1) * gi;
        vs[i] = b2 * vs[i] + (1.0 - b2) * gi * gi;
        let vh = v_hat_rule(v_hat[i], vs[i]);
        v_hat_new.as_mut_slice()[i] = vh;

        let (m_eff, vh_eff) = if bias_correction {
            (
                ms[i] / (1.0 - h.beta1.powi(t as i32)),
                vh / (1.0 - b2.powi(t as i32)),
            )
        } else {
            (ms[i], vh)
        };
        let denom = vh_eff.sqrt() + h.epsilon;
        // v̂ = 0 only when every gradient so far was 0, hence m = 0 too.
        let delta = if denom == 0.0 {
            0.0
        } else {
            alpha_t * m_eff / denom
        };
        y.as_mut_slice()[i] = x[i] - delta;
    }

    if !y.is_finite() || !v_hat_new.is_finite() || !m.is_finite() {
        return Err(Error::NumericFault {
            step: t,
            detail: "non-finite value in update".into(),
        });
    }

    Ok(OptimizerState {
        x: project_box(&y, feasible)?,
        m,
        v,
        v_hat: v_hat_new,
        t,
        beta1_prev: Some(b1),
    })
}
