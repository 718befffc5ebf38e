//! Closed-form regret bounds for AMSGrad (decaying β₁ schedules) and AdamX,
//! plus the search for the step t₀ after which the telescoping quantity
//! √(t·v̂_t)/(1 − β_{1,t}) is monotone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::RegretTrace;
use crate::numerics::{l2_norm_column, Vector};
use crate::optimizers::{HyperParams, Schedule};

/// Constants a regret bound is evaluated at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundContext {
    pub horizon: usize,
    pub dim: usize,
    pub d_inf: f64,
    pub g_inf: f64,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub t0: usize,
    /// ‖g_{1:T,i}‖₂ per coordinate.
    pub grad_col_norms: Vec<f64>,
}

impl BoundContext {
    /// Context for a finished run. `g_inf` and `d_inf` are the problem's
    /// gradient bound and the box diameter.
    ///
    /// t₀ comes from the recorded v̂ history when there is one, otherwise
    /// from the schedule-only sufficient condition.
    pub fn from_trace(trace: &RegretTrace, g_inf: f64, d_inf: f64) -> Result<Self> {
        let h = &trace.hyper;
        let t0 = match &trace.vhat_history {
            Some(vh) => find_t0(h, vh, trace.horizon)?,
            None => schedule_t0(h, trace.horizon),
        };
        let grad_col_norms = (0..trace.dim())
            .map(|i| l2_norm_column(&trace.gradients, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundContext {
            horizon: trace.horizon,
            dim: trace.dim(),
            d_inf,
            g_inf,
            alpha: h.alpha,
            beta1: h.beta1,
            beta2: h.beta2,
            lambda: h.lambda,
            gamma: h.gamma(),
            t0,
            grad_col_norms,
        })
    }

    fn require_gamma_below_one(&self) -> Result<()> {
        if self.gamma < 1.0 {
            Ok(())
        } else {
            Err(Error::BoundUndefined { gamma: self.gamma })
        }
    }

    /// α·√(ln T + 1) / ((1−β₁)²·√(1−β₂)·(1−γ)) · Σ_i ‖g_{1:T,i}‖₂, shared by
    /// both bounds.
    fn gradient_term(&self) -> f64 {
        let t = self.horizon as f64;
        let norms: f64 = self.grad_col_norms.iter().sum();
        self.alpha * (t.ln() + 1.0).sqrt()
            / ((1.0 - self.beta1).powi(2) * (1.0 - self.beta2).sqrt() * (1.0 - self.gamma))
            * norms
    }

    fn d_d2_g(&self) -> f64 {
        self.dim as f64 * self.d_inf * self.d_inf * self.g_inf
    }
}

/// The three summands of a regret bound, in the order they are written.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundTerms {
    pub first: f64,
    pub second: f64,
    pub third: f64,
}

impl BoundTerms {
    pub fn total(&self) -> f64 {
        self.first + self.second + self.third
    }
}

/// Smallest t₀ such that for every t in (t₀, T] and every coordinate
/// √(t·v̂_t)/(1−β_{1,t}) ≥ √((t−1)·v̂_{t−1})/(1−β_{1,t−1}).
///
/// Returns 1 when the condition holds from t = 2 on, and T when it fails at
/// the final step.
pub fn find_t0(h: &HyperParams, vhat_history: &[Vector], horizon: usize) -> Result<usize> {
    if horizon == 0 || vhat_history.len() < horizon {
        return Err(Error::contract(format!(
            "v̂ history has {} entries, horizon is {horizon}",
            vhat_history.len()
        )));
    }
    let beta = h.beta1_sequence(horizon);
    let scaled = |t: usize, i: usize| {
        (t as f64 * vhat_history[t - 1][i]).sqrt() / (1.0 - beta[t - 1])
    };
    let d = vhat_history[0].dim();
    let last_violation = (2..=horizon)
        .rev()
        .find(|&t| (0..d).any(|i| scaled(t, i) < scaled(t - 1, i)));
    Ok(last_violation.unwrap_or(1))
}

/// t₀ from the schedule alone: the last t ≤ T violating
/// √t/(1−β_{1,t}) ≥ √(t−1)/(1−β_{1,t−1}). Since AMSGrad's v̂ never
/// decreases, this t₀ is valid for every AMSGrad trajectory.
pub fn schedule_t0(h: &HyperParams, horizon: usize) -> usize {
    let beta = h.beta1_sequence(horizon);
    let scaled = |t: usize| (t as f64).sqrt() / (1.0 - beta[t - 1]);
    (2..=horizon)
        .rev()
        .find(|&t| scaled(t) < scaled(t - 1))
        .unwrap_or(1)
}

/// Regret bound for AMSGrad under β_{1,t} = β₁λ^{t−1} or β_{1,t} = β₁/t.
pub fn bound_amsgrad(ctx: &BoundContext, schedule: Schedule) -> Result<BoundTerms> {
    ctx.require_gamma_below_one()?;
    let t = ctx.horizon as f64;
    let base = ctx.d_d2_g() / (2.0 * ctx.alpha * (1.0 - ctx.beta1));
    let head: f64 = (1..=ctx.t0).map(|s| (s as f64).sqrt()).sum();
    let first = base * (head + t.sqrt());
    let second = match schedule {
        Schedule::ExpDecay => base / (1.0 - ctx.lambda).powi(2),
        Schedule::InverseT => 2.0 * base * t.sqrt(),
        Schedule::Constant => {
            return Err(Error::contract(
                "the AMSGrad bound needs an ExpDecay or InverseT β₁ schedule",
            ))
        }
    };
    Ok(BoundTerms {
        first,
        second,
        third: ctx.gradient_term(),
    })
}

/// Which coefficient the first two AdamX terms carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdamXCoefficient {
    /// 1/(1−β₁)², what the derivation actually yields.
    #[default]
    ProofDerived,
    /// 1/(1−β₁), as the result is usually stated.
    Statement,
}

/// Regret bound for AdamX with an arbitrary β₁ sequence `beta1_seq`
/// (β_{1,1}, …, β_{1,T}).
pub fn bound_adamx(
    ctx: &BoundContext,
    beta1_seq: &[f64],
    coefficient: AdamXCoefficient,
) -> Result<BoundTerms> {
    ctx.require_gamma_below_one()?;
    if beta1_seq.len() < ctx.horizon {
        return Err(Error::contract(format!(
            "β₁ sequence has {} entries, horizon is {}",
            beta1_seq.len(),
            ctx.horizon
        )));
    }
    let t = ctx.horizon as f64;
    let power = match coefficient {
        AdamXCoefficient::ProofDerived => 2,
        AdamXCoefficient::Statement => 1,
    };
    let base = ctx.d_d2_g() / (2.0 * ctx.alpha * (1.0 - ctx.beta1).powi(power));
    Ok(BoundTerms {
        first: base * t.sqrt(),
        second: base * momentum_sum(&beta1_seq[..ctx.horizon]),
        third: ctx.gradient_term(),
    })
}

/// Σ_{t=2}^{T} β_{1,t}·√(t−1).
pub fn momentum_sum(beta1_seq: &[f64]) -> f64 {
    beta1_seq
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, b)| b * (k as f64).sqrt())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> BoundContext {
        BoundContext {
            horizon: 1,
            dim: 1,
            d_inf: 2.0,
            g_inf: 1010.0,
            alpha: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            lambda: 0.001,
            gamma: 0.9 / 0.999f64.sqrt(),
            t0: 1,
            grad_col_norms: vec![1010.0],
        }
    }

    #[test]
    fn gamma_one_is_undefined() {
        let mut c = ctx();
        c.gamma = 1.0;
        assert_eq!(
            bound_amsgrad(&c, Schedule::ExpDecay),
            Err(Error::BoundUndefined { gamma: 1.0 })
        );
        assert!(bound_adamx(&c, &[0.9], AdamXCoefficient::ProofDerived).is_err());
    }

    #[test]
    fn constant_schedule_has_no_amsgrad_bound() {
        assert!(bound_amsgrad(&ctx(), Schedule::Constant).is_err());
    }

    #[test]
    fn zero_gradients_leave_positive_bound() {
        let mut c = ctx();
        c.grad_col_norms = vec![0.0];
        let b = bound_amsgrad(&c, Schedule::InverseT).unwrap();
        assert_eq!(b.third, 0.0);
        assert!(b.first > 0.0 && b.second > 0.0);
    }

    #[test]
    fn doubling_alpha_scales_terms() {
        let c = ctx();
        let mut c2 = c.clone();
        c2.alpha *= 2.0;
        for s in [Schedule::ExpDecay, Schedule::InverseT] {
            let a = bound_amsgrad(&c, s).unwrap();
            let b = bound_amsgrad(&c2, s).unwrap();
            assert_eq!(b.third, 2.0 * a.third);
            assert_eq!(b.first, 0.5 * a.first);
            assert_eq!(b.second, 0.5 * a.second);
        }
    }

    #[test]
    fn schedule_t0_constant_is_one() {
        let h = HyperParams::default().with_schedule(Schedule::Constant);
        assert_eq!(schedule_t0(&h, 1000), 1);
    }
}
