//! Per-trajectory checks of the lemmas behind the regret bounds.
//!
//! Each check scans a recorded run and reports its worst case: the step
//! where `rhs − lhs` is smallest, plus the first step that failed, if any.

use crate::error::{Error, Result};
use crate::harness::RegretTrace;
use crate::numerics::linf_norm;
use crate::optimizers::OptimizerKind;

use super::bounds::BoundContext;
use super::report::Report;

/// Absolute slack granted to the sum lemma.
pub const SUM_LEMMA_TOLERANCE: f64 = 1e-9;
/// Relative slack for checks that compare two computed forms of one value.
pub const RELATIVE_TOLERANCE: f64 = 1e-12;

/// Tracks the worst (smallest-slack) comparison and the first failure.
struct Worst {
    lhs: f64,
    rhs: f64,
    margin: f64,
    first_fail: Option<usize>,
}

impl Worst {
    fn new() -> Self {
        Worst {
            lhs: 0.0,
            rhs: 0.0,
            margin: f64::INFINITY,
            first_fail: None,
        }
    }

    fn observe(&mut self, t: usize, lhs: f64, rhs: f64, ok: bool) {
        let margin = rhs - lhs;
        if margin < self.margin || self.margin.is_infinite() {
            self.lhs = lhs;
            self.rhs = rhs;
            self.margin = margin;
        }
        if !ok && self.first_fail.is_none() {
            self.first_fail = Some(t);
        }
    }

    fn into_report(self, check: impl Into<String>) -> Report {
        Report::new(check, self.first_fail.is_none(), self.lhs, self.rhs)
            .with_t_failed(self.first_fail)
    }
}

fn le_rel(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + RELATIVE_TOLERANCE * rhs.abs().max(lhs.abs()).max(1.0)
}

/// m²/√(t·v̂) with the convention 0 when v̂ = 0 (then m = 0 as well).
fn guarded_ratio(m: f64, vhat: f64, t: usize) -> f64 {
    if vhat == 0.0 {
        0.0
    } else {
        m * m / (t as f64 * vhat).sqrt()
    }
}

/// Σ_t m²_{t,i}/√(t·v̂_{t,i}) ≤ √(ln T + 1)/((1−β₁)√(1−β₂)(1−γ))·‖g_{1:T,i}‖₂,
/// one report per coordinate.
pub fn check_sum_lemma(trace: &RegretTrace, ctx: &BoundContext) -> Result<Vec<Report>> {
    if ctx.gamma >= 1.0 {
        return Err(Error::BoundUndefined { gamma: ctx.gamma });
    }
    let m = trace.m_history()?;
    let vh = trace.vhat_history()?;
    let t_len = trace.horizon as f64;
    let coef = (t_len.ln() + 1.0).sqrt()
        / ((1.0 - ctx.beta1) * (1.0 - ctx.beta2).sqrt() * (1.0 - ctx.gamma));
    Ok((0..trace.dim())
        .map(|i| {
            let lhs: f64 = (0..trace.horizon)
                .map(|k| guarded_ratio(m[k][i], vh[k][i], k + 1))
                .sum();
            let rhs = coef * ctx.grad_col_norms[i];
            Report::new(
                format!("sum_lemma[i={i}]"),
                lhs <= rhs + SUM_LEMMA_TOLERANCE,
                lhs,
                rhs,
            )
        })
        .collect())
}

/// √v̂_t ≤ max_{s≤t} ‖g_s‖∞ for AMSGrad and Adam, and
/// √v̂_t ≤ max_{s≤t} ‖g_s‖∞ / (1−β₁) for AdamX.
pub fn check_vhat_bound(trace: &RegretTrace) -> Result<Report> {
    let vh = trace.vhat_history()?;
    let scale = match trace.optimizer {
        OptimizerKind::AdamX => 1.0 / (1.0 - trace.hyper.beta1),
        OptimizerKind::AmsGrad | OptimizerKind::Adam => 1.0,
    };
    let mut g_max: f64 = 0.0;
    let mut worst = Worst::new();
    for (k, (g, v)) in trace.gradients.iter().zip(vh).enumerate() {
        g_max = g_max.max(linf_norm(g));
        let lhs = v.iter().fold(0.0f64, |a, &x| a.max(x.sqrt()));
        let rhs = g_max * scale;
        worst.observe(k + 1, lhs, rhs, le_rel(lhs, rhs));
    }
    Ok(worst.into_report(format!("vhat_bound[{}]", trace.optimizer.name())))
}

/// AMSGrad: v̂_{t,i} ≥ v̂_{t−1,i}, exactly.
pub fn check_amsgrad_monotonicity(trace: &RegretTrace) -> Result<Report> {
    let vh = trace.vhat_history()?;
    let mut worst = Worst::new();
    for t in 2..=trace.horizon {
        for i in 0..trace.dim() {
            let (prev, cur) = (vh[t - 2][i], vh[t - 1][i]);
            worst.observe(t, prev, cur, cur >= prev);
        }
    }
    Ok(worst.into_report("vhat_monotone"))
}

/// AdamX: v̂_{t,i}/(1−β_{1,t})² ≥ v̂_{t−1,i}/(1−β_{1,t−1})².
pub fn check_adamx_scaled_monotonicity(trace: &RegretTrace) -> Result<Report> {
    let vh = trace.vhat_history()?;
    let b = &trace.beta1;
    let mut worst = Worst::new();
    for t in 2..=trace.horizon {
        for i in 0..trace.dim() {
            let prev = vh[t - 2][i] / (1.0 - b[t - 2]).powi(2);
            let cur = vh[t - 1][i] / (1.0 - b[t - 1]).powi(2);
            worst.observe(t, prev, cur, le_rel(prev, cur));
        }
    }
    Ok(worst.into_report("adamx_scaled_monotone"))
}

/// √(t·v̂_{t,i})/(1−β_{1,t}) − √((t−1)·v̂_{t−1,i})/(1−β_{1,t−1}) ≥ 0 for all
/// t ≥ 2. Holds at every step for AdamX; for AMSGrad only past t₀.
pub fn check_telescoping_positivity(trace: &RegretTrace) -> Result<Report> {
    let vh = trace.vhat_history()?;
    let b = &trace.beta1;
    let scaled = |t: usize, i: usize| (t as f64 * vh[t - 1][i]).sqrt() / (1.0 - b[t - 1]);
    let mut worst = Worst::new();
    for t in 2..=trace.horizon {
        for i in 0..trace.dim() {
            let (prev, cur) = (scaled(t - 1, i), scaled(t, i));
            worst.observe(t, prev, cur, le_rel(prev, cur));
        }
    }
    Ok(worst.into_report("telescoping_positivity"))
}

/// Recomputes AdamX's v̂_t as max_{s≤t} (1−β_{1,t})²/(1−β_{1,s})²·v_s and
/// compares it with the recursive value, relative tolerance 1e-12.
pub fn check_adamx_vhat_closed_form(trace: &RegretTrace, beta1_seq: &[f64]) -> Result<Report> {
    let v = trace.v_history()?;
    let vh = trace.vhat_history()?;
    if beta1_seq.len() < trace.horizon {
        return Err(Error::contract("β₁ sequence shorter than the trace"));
    }
    let mut worst_err = 0.0f64;
    let mut at = (0.0, 0.0);
    let mut first_fail = None;
    for t in 1..=trace.horizon {
        let bt = beta1_seq[t - 1];
        for i in 0..trace.dim() {
            let closed = (1..=t)
                .map(|s| (1.0 - bt).powi(2) / (1.0 - beta1_seq[s - 1]).powi(2) * v[s - 1][i])
                .fold(f64::NEG_INFINITY, f64::max);
            let recursive = vh[t - 1][i];
            let scale = closed.abs().max(recursive.abs());
            let err = if scale == 0.0 {
                0.0
            } else {
                (closed - recursive).abs() / scale
            };
            if err > worst_err {
                worst_err = err;
                at = (recursive, closed);
            }
            if err > RELATIVE_TOLERANCE && first_fail.is_none() {
                first_fail = Some(t);
            }
        }
    }
    let (lhs, rhs) = if worst_err == 0.0 {
        let last = vh[trace.horizon - 1][0];
        (last, last)
    } else {
        at
    };
    Ok(Report::new("adamx_vhat_closed_form", first_fail.is_none(), lhs, rhs)
        .with_t_failed(first_fail)
        .with_note(format!("max relative error {worst_err:e}")))
}

/// The three-term split of R(T) that both convergence proofs start from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    /// Σ_i Σ_t √v̂_{t,i}/(2α_t(1−β_{1,t}))·((x_{t,i}−x*_i)² − (x_{t+1,i}−x*_i)²)
    pub distance: f64,
    /// Σ_i Σ_t α_t/(1−β₁)·m²_{t,i}/√v̂_{t,i}
    pub moment: f64,
    /// Σ_i Σ_{t≥2} β_{1,t}√v̂_{t−1,i}/(2α_{t−1}(1−β₁))·(x_{t,i}−x*_i)²
    pub momentum_carry: f64,
}

impl Decomposition {
    pub fn total(&self) -> f64 {
        self.distance + self.moment + self.momentum_carry
    }
}

/// Evaluates the three decomposition terms along a recorded trajectory.
/// Requires ε = 0, since the decomposition is for the unmodified update.
pub fn regret_decomposition(trace: &RegretTrace) -> Result<Decomposition> {
    let h = &trace.hyper;
    if h.epsilon != 0.0 || h.bias_correction {
        return Err(Error::contract(
            "regret decomposition assumes ε = 0 and no bias correction",
        ));
    }
    let x = trace.iterates()?;
    let m = trace.m_history()?;
    let vh = trace.vhat_history()?;
    let b = &trace.beta1;
    let xs = &trace.comparator;
    let mut out = Decomposition {
        distance: 0.0,
        moment: 0.0,
        momentum_carry: 0.0,
    };
    for t in 1..=trace.horizon {
        let a_t = h.step_size_at(t);
        for i in 0..trace.dim() {
            let v = vh[t - 1][i];
            let before = (x[t - 1][i] - xs[i]).powi(2);
            let after = (x[t][i] - xs[i]).powi(2);
            out.distance += v.sqrt() / (2.0 * a_t * (1.0 - b[t - 1])) * (before - after);
            if v > 0.0 {
                out.moment += a_t / (1.0 - h.beta1) * m[t - 1][i].powi(2) / v.sqrt();
            }
            if t >= 2 {
                let a_prev = h.step_size_at(t - 1);
                out.momentum_carry += b[t - 1] * vh[t - 2][i].sqrt()
                    / (2.0 * a_prev * (1.0 - h.beta1))
                    * before;
            }
        }
    }
    Ok(out)
}

/// R(T) ≤ (distance + moment + momentum_carry) term sum.
pub fn check_regret_decomposition(trace: &RegretTrace) -> Result<Report> {
    let d = regret_decomposition(trace)?;
    let lhs = trace.regret();
    let rhs = d.total();
    let tol = 1e-9 * rhs.abs().max(lhs.abs()).max(1.0);
    Ok(Report::new("regret_decomposition", lhs <= rhs + tol, lhs, rhs))
}

/// R(T) ≤ bound. Failing is a report outcome, not an error.
pub fn check_regret_bound(trace: &RegretTrace, bound: f64) -> Report {
    let lhs = trace.regret();
    Report::new("regret_bound", lhs <= bound, lhs, bound)
}
