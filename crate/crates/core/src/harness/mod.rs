//! The online convex optimization loop and its regret accounting.
//!
//! At step t the learner holds x_t, the cost f_t is revealed, the learner
//! pays f_t(x_t) and advances with g_t = ∇f_t(x_t). Regret is measured
//! against the best fixed point of the box in hindsight.

mod problems;

pub use problems::{
    abs_deviation_problem, quadratic_problem, synthetic_problem, toy_training_problem,
    AbsDeviationProblem, LogisticProblem, Problem, QuadraticProblem, SyntheticProblem,
    LOGISTIC_BATCH, LOGISTIC_POINTS, SYNTHETIC_DRIFT, SYNTHETIC_PERIOD, SYNTHETIC_SPIKE,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::optimizers::{self, HyperParams, OptimizerKind, OptimizerState};

/// Width below which the numerical comparator search stops.
pub const COMPARATOR_TOLERANCE: f64 = 1e-9;

/// Best fixed point of the box for the first `horizon` costs.
///
/// Uses the family's closed form when it has one. Separable families fall
/// back to a per-coordinate grid refinement of the summed objective.
pub fn comparator_oracle(problem: &dyn Problem, horizon: usize) -> Result<Vector> {
    if horizon == 0 {
        return Err(Error::contract("comparator needs a horizon ≥ 1"));
    }
    if let Some(x) = problem.comparator(horizon) {
        return Ok(x);
    }
    if !problem.is_separable() {
        return Err(Error::UnsupportedProblem(format!(
            "`{}` has no closed-form comparator and is not separable",
            problem.name()
        )));
    }
    let feasible = problem.feasible();
    let total = |x: &Vector| (1..=horizon).map(|t| problem.cost(t, x)).sum::<f64>();
    let mut x = feasible.center();
    for i in 0..problem.dim() {
        let (mut lo, mut hi) = (feasible.lower()[i], feasible.upper()[i]);
        const POINTS: usize = 21;
        while hi - lo > COMPARATOR_TOLERANCE {
            let step = (hi - lo) / (POINTS - 1) as f64;
            let mut best = (f64::INFINITY, 0);
            for k in 0..POINTS {
                x.as_mut_slice()[i] = if k == POINTS - 1 { hi } else { lo + step * k as f64 };
                let f = total(&x);
                if f < best.0 {
                    best = (f, k);
                }
            }
            let k = best.1;
            let new_lo = if k == 0 { lo } else { lo + step * (k - 1) as f64 };
            let new_hi = if k == POINTS - 1 { hi } else { lo + step * (k + 1) as f64 };
            lo = new_lo;
            hi = new_hi.min(feasible.upper()[i]);
        }
        // Both ends are within tolerance of the minimizer; keep the better.
        x.as_mut_slice()[i] = lo;
        let f_lo = total(&x);
        x.as_mut_slice()[i] = hi;
        if f_lo <= total(&x) {
            x.as_mut_slice()[i] = lo;
        }
    }
    Ok(x)
}

/// Which per-step histories a run keeps beyond losses and gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordMode {
    /// Losses, regret, gradients and β_{1,t} only.
    #[default]
    Summary,
    /// Also iterates and the m, v, v̂ histories.
    Full,
}

/// Everything a finished run recorded. Immutable once returned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub problem: String,
    pub optimizer: OptimizerKind,
    pub hyper: HyperParams,
    pub horizon: usize,
    pub comparator: Vector,
    /// f_t(x_t)
    pub losses: Vec<f64>,
    /// f_t(x*)
    pub comparator_losses: Vec<f64>,
    /// R(t) for t = 1..=T
    pub cumulative_regret: Vec<f64>,
    /// g_t for t = 1..=T
    pub gradients: Vec<Vector>,
    /// β_{1,t} for t = 1..=T
    pub beta1: Vec<f64>,
    pub final_state: OptimizerState,
    /// x_1..=x_{T+1} (full mode only)
    pub iterates: Option<Vec<Vector>>,
    /// m_t, v_t, v̂_t for t = 1..=T (full mode only)
    pub m_history: Option<Vec<Vector>>,
    pub v_history: Option<Vec<Vector>>,
    pub vhat_history: Option<Vec<Vector>>,
}

impl RegretTrace {
    pub fn regret(&self) -> f64 {
        *self.cumulative_regret.last().expect("trace has T ≥ 1 steps")
    }

    pub fn dim(&self) -> usize {
        self.comparator.dim()
    }

    pub fn iterates(&self) -> Result<&[Vector]> {
        self.iterates
            .as_deref()
            .ok_or_else(|| Error::contract("iterates were not recorded (use RecordMode::Full)"))
    }

    pub fn m_history(&self) -> Result<&[Vector]> {
        self.m_history
            .as_deref()
            .ok_or_else(|| Error::contract("m history was not recorded (use RecordMode::Full)"))
    }

    pub fn v_history(&self) -> Result<&[Vector]> {
        self.v_history
            .as_deref()
            .ok_or_else(|| Error::contract("v history was not recorded (use RecordMode::Full)"))
    }

    pub fn vhat_history(&self) -> Result<&[Vector]> {
        self.vhat_history
            .as_deref()
            .ok_or_else(|| Error::contract("v̂ history was not recorded (use RecordMode::Full)"))
    }
}

/// Run `kind` on `problem` for `horizon` steps from `x1` (or the problem's
/// default starting point).
pub fn run_oco(
    problem: &dyn Problem,
    kind: OptimizerKind,
    hyper: &HyperParams,
    horizon: usize,
    x1: Option<Vector>,
    mode: RecordMode,
) -> Result<RegretTrace> {
    hyper.validate()?;
    if horizon == 0 {
        return Err(Error::contract("horizon must be ≥ 1"));
    }
    let feasible = problem.feasible();
    let x1 = x1.unwrap_or_else(|| problem.initial_point());
    if !feasible.contains(&x1) {
        return Err(Error::contract("starting point lies outside the box"));
    }
    let comparator = comparator_oracle(problem, horizon)?;

    let full = mode == RecordMode::Full;
    let mut losses = Vec::with_capacity(horizon);
    let mut comparator_losses = Vec::with_capacity(horizon);
    let mut cumulative_regret = Vec::with_capacity(horizon);
    let mut gradients = Vec::with_capacity(horizon);
    let mut iterates = full.then(|| vec![x1.clone()]);
    let mut m_history = full.then(Vec::new);
    let mut v_history = full.then(Vec::new);
    let mut vhat_history = full.then(Vec::new);

    let mut state = OptimizerState::new(x1);
    let mut regret = 0.0;
    for t in 1..=horizon {
        let loss = problem.cost(t, &state.x);
        let best = problem.cost(t, &comparator);
        if !loss.is_finite() {
            return Err(Error::NumericFault {
                step: t,
                detail: "non-finite loss".into(),
            });
        }
        let g = problem.grad(t, &state.x);
        state = optimizers::step(kind, state, &g, hyper, feasible).map_err(|e| e.at_step(t))?;

        regret += loss - best;
        losses.push(loss);
        comparator_losses.push(best);
        cumulative_regret.push(regret);
        gradients.push(g);
        if full {
            iterates.as_mut().unwrap().push(state.x.clone());
            m_history.as_mut().unwrap().push(state.m.clone());
            v_history.as_mut().unwrap().push(state.v.clone());
            vhat_history.as_mut().unwrap().push(state.v_hat.clone());
        }
    }

    Ok(RegretTrace {
        problem: problem.name().to_string(),
        optimizer: kind,
        hyper: hyper.clone(),
        horizon,
        comparator,
        losses,
        comparator_losses,
        cumulative_regret,
        gradients,
        beta1: hyper.beta1_sequence(horizon),
        final_state: state,
        iterates,
        m_history,
        v_history,
        vhat_history,
    })
}

/// R(t)/t for t = 1..=T.
pub fn average_regret(trace: &RegretTrace) -> Vec<f64> {
    trace
        .cumulative_regret
        .iter()
        .enumerate()
        .map(|(k, r)| r / (k + 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::FeasibleBox;
    use crate::optimizers::Schedule;

    #[test]
    fn counterexample_first_iterates() {
        let p = synthetic_problem();
        let h = HyperParams::counterexample();
        let tr = run_oco(&p, OptimizerKind::AmsGrad, &h, 2, None, RecordMode::Full).unwrap();
        let xs: Vec<f64> = tr.iterates().unwrap().iter().map(|x| x[0]).collect();
        assert_eq!(xs, vec![1.0, 0.9968377223398316, 0.9970569034941291]);
    }

    #[test]
    fn three_step_regret_by_hand() {
        let p = synthetic_problem();
        let h = HyperParams::counterexample();
        let tr = run_oco(&p, OptimizerKind::AmsGrad, &h, 3, None, RecordMode::Full).unwrap();
        let x = tr.iterates().unwrap();
        let by_hand = (1010.0 * x[0][0] - 10.0 * x[1][0] - 10.0 * x[2][0])
            - (1010.0 * -1.0 - 10.0 * -1.0 - 10.0 * -1.0);
        assert!((tr.regret() - by_hand).abs() <= 1e-12 * by_hand.abs());
    }

    #[test]
    fn zero_gradient_run_has_zero_regret() {
        let c = Vector::new(vec![0.1, -0.3, 0.7]);
        let p = QuadraticProblem::fixed_center(c.clone(), FeasibleBox::cube(3, -1.0, 1.0).unwrap())
            .unwrap();
        for kind in [OptimizerKind::Adam, OptimizerKind::AmsGrad, OptimizerKind::AdamX] {
            let tr =
                run_oco(&p, kind, &HyperParams::default(), 100, Some(c.clone()), RecordMode::Summary)
                    .unwrap();
            assert!(tr.cumulative_regret.iter().all(|&r| r == 0.0));
            assert!(average_regret(&tr).iter().all(|&r| r == 0.0));
        }
    }

    #[test]
    fn average_of_constant_regret_is_constant() {
        let p = synthetic_problem();
        let mut tr = run_oco(
            &p,
            OptimizerKind::AmsGrad,
            &HyperParams::default(),
            10,
            None,
            RecordMode::Summary,
        )
        .unwrap();
        tr.cumulative_regret = (1..=10).map(|t| 2.5 * t as f64).collect();
        assert!(average_regret(&tr).iter().all(|&r| (r - 2.5).abs() < 1e-15));
    }

    #[test]
    fn comparator_for_equal_centers_is_the_center() {
        let c = Vector::new(vec![0.25, -0.75]);
        let p = QuadraticProblem::fixed_center(c.clone(), FeasibleBox::cube(2, -1.0, 1.0).unwrap())
            .unwrap();
        assert_eq!(comparator_oracle(&p, 17).unwrap(), c);
    }

    #[test]
    fn logistic_comparator_is_analytic_not_grid() {
        let p = toy_training_problem(1);
        assert!(!p.is_separable());
        assert!(comparator_oracle(&p, 20).is_ok());
    }

    struct Coupled;
    impl Problem for Coupled {
        fn name(&self) -> &str {
            "coupled"
        }
        fn cost(&self, _t: usize, x: &Vector) -> f64 {
            (x[0] - x[1]).powi(2)
        }
        fn grad(&self, _t: usize, x: &Vector) -> Vector {
            Vector::new(vec![2.0 * (x[0] - x[1]), -2.0 * (x[0] - x[1])])
        }
        fn feasible(&self) -> &FeasibleBox {
            static B: std::sync::OnceLock<FeasibleBox> = std::sync::OnceLock::new();
            B.get_or_init(|| FeasibleBox::cube(2, -1.0, 1.0).unwrap())
        }
        fn g_inf(&self) -> f64 {
            8.0
        }
    }

    #[test]
    fn non_separable_without_closed_form_is_unsupported() {
        assert!(matches!(
            comparator_oracle(&Coupled, 3),
            Err(Error::UnsupportedProblem(_))
        ));
    }

    #[test]
    fn run_rejects_bad_inputs() {
        let p = synthetic_problem();
        let h = HyperParams::default();
        assert!(run_oco(&p, OptimizerKind::AmsGrad, &h, 0, None, RecordMode::Summary).is_err());
        assert!(run_oco(
            &p,
            OptimizerKind::AmsGrad,
            &h,
            3,
            Some(Vector::new(vec![2.0])),
            RecordMode::Summary
        )
        .is_err());
        let bad = HyperParams {
            beta1: 1.0,
            ..h.with_schedule(Schedule::Constant)
        };
        assert!(run_oco(&p, OptimizerKind::AmsGrad, &bad, 3, None, RecordMode::Summary).is_err());
    }
}
