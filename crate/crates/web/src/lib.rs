//! Browser demo operations. Each returns a JSON string so the page can stay
//! plain JavaScript; the wasm exports in [`bindings`] wrap these one to one.

use adamxlab_core::harness::{
    average_regret, quadratic_problem, run_oco, synthetic_problem, toy_training_problem, Problem,
    RecordMode,
};
use adamxlab_core::numerics::{FeasibleBox, Vector};
use adamxlab_core::optimizers::{HyperParams, OptimizerKind, Schedule};
use adamxlab_core::verify::{
    bound_adamx, bound_amsgrad, distance_deltas, AdamXCoefficient, BoundContext, Sign,
};
use serde::Serialize;

/// Longest run the page may request.
pub const MAX_STEPS: usize = 100_000;
/// Curves are thinned to about this many points.
pub const MAX_CURVE_POINTS: usize = 500;
const BOUND_CHECKPOINTS: usize = 20;

pub type DemoResult<T> = Result<T, String>;

fn check_steps(steps: usize) -> DemoResult<()> {
    if steps == 0 || steps > MAX_STEPS {
        Err(format!("steps must be between 1 and {MAX_STEPS}"))
    } else {
        Ok(())
    }
}

fn parse_schedule(s: &str) -> DemoResult<Schedule> {
    match s {
        "const" => Ok(Schedule::Constant),
        "exp" => Ok(Schedule::ExpDecay),
        "inv" => Ok(Schedule::InverseT),
        other => Err(format!("unknown schedule `{other}` (const, exp, inv)")),
    }
}

fn parse_optimizer(s: &str) -> DemoResult<OptimizerKind> {
    match s {
        "adam" => Ok(OptimizerKind::Adam),
        "amsgrad" => Ok(OptimizerKind::AmsGrad),
        "adamx" => Ok(OptimizerKind::AdamX),
        other => Err(format!("unknown optimizer `{other}` (adam, amsgrad, adamx)")),
    }
}

fn build_problem(name: &str, seed: u64) -> DemoResult<Box<dyn Problem>> {
    match name {
        "synthetic" => Ok(Box::new(synthetic_problem())),
        "quadratic" => {
            let b = FeasibleBox::cube(2, -1.0, 1.0).map_err(|e| e.to_string())?;
            Ok(Box::new(quadratic_problem(seed, 2, b).map_err(|e| e.to_string())?))
        }
        "logistic" => Ok(Box::new(toy_training_problem(seed))),
        other => Err(format!("unknown problem `{other}` (synthetic, quadratic, logistic)")),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("demo views serialize")
}

/// Indices 1..=n thinned to about `MAX_CURVE_POINTS`, always keeping n.
fn thinned(n: usize) -> Vec<usize> {
    let stride = n.div_ceil(MAX_CURVE_POINTS).max(1);
    let mut ts: Vec<usize> = (1..=n).step_by(stride).collect();
    if ts.last() != Some(&n) {
        ts.push(n);
    }
    ts
}

#[derive(Debug, Serialize)]
pub struct CounterexampleView {
    pub comparator: f64,
    /// x_1, …, x_{T+1}.
    pub iterates: Vec<f64>,
    /// Δ_t = (x_t − x*)² − (x_{t+1} − x*)².
    pub deltas: Vec<f64>,
    pub signs: Vec<Sign>,
    /// Steps whose Δ has the opposite sign of the step before.
    pub sign_changes: Vec<usize>,
}

/// AMSGrad on the periodic linear problem with β_{1,t} = 0.9·0.001^{t−1},
/// reporting the per-step change in squared distance to `comparator`.
pub fn counterexample(steps: usize, comparator: f64) -> DemoResult<CounterexampleView> {
    check_steps(steps)?;
    if !(-1.0..=1.0).contains(&comparator) {
        return Err("comparator must lie in [−1, 1]".into());
    }
    let p = synthetic_problem();
    let tr = run_oco(
        &p,
        OptimizerKind::AmsGrad,
        &HyperParams::counterexample(),
        steps,
        None,
        RecordMode::Full,
    )
    .map_err(|e| e.to_string())?;
    let ds = distance_deltas(&tr, &Vector::new(vec![comparator])).map_err(|e| e.to_string())?;
    let signs: Vec<Sign> = ds.iter().map(|d| d.sign).collect();
    let sign_changes = signs
        .windows(2)
        .enumerate()
        .filter(|(_, w)| {
            matches!(
                (w[0], w[1]),
                (Sign::Positive, Sign::Negative) | (Sign::Negative, Sign::Positive)
            )
        })
        .map(|(k, _)| k + 2)
        .collect();
    Ok(CounterexampleView {
        comparator,
        iterates: tr.iterates().map_err(|e| e.to_string())?.iter().map(|x| x[0]).collect(),
        deltas: ds.iter().map(|d| d.delta).collect(),
        signs,
        sign_changes,
    })
}

#[derive(Debug, Serialize)]
pub struct Curve {
    pub optimizer: &'static str,
    pub t: Vec<usize>,
    pub avg_regret: Vec<f64>,
    pub final_regret: f64,
}

#[derive(Debug, Serialize)]
pub struct RegretCurvesView {
    pub problem: String,
    pub curves: Vec<Curve>,
}

/// R(t)/t for Adam, AMSGrad and AdamX on one problem.
pub fn regret_curves(
    problem: &str,
    schedule: &str,
    alpha: f64,
    steps: usize,
    seed: u64,
) -> DemoResult<RegretCurvesView> {
    check_steps(steps)?;
    let p = build_problem(problem, seed)?;
    let h = HyperParams::default()
        .with_schedule(parse_schedule(schedule)?)
        .with_alpha(alpha);
    let ts = thinned(steps);
    let mut curves = Vec::new();
    for kind in [OptimizerKind::Adam, OptimizerKind::AmsGrad, OptimizerKind::AdamX] {
        let tr = run_oco(p.as_ref(), kind, &h, steps, None, RecordMode::Summary)
            .map_err(|e| e.to_string())?;
        let avg = average_regret(&tr);
        curves.push(Curve {
            optimizer: kind.name(),
            t: ts.clone(),
            avg_regret: ts.iter().map(|&t| avg[t - 1]).collect(),
            final_regret: tr.regret(),
        });
    }
    Ok(RegretCurvesView {
        problem: problem.to_string(),
        curves,
    })
}

#[derive(Debug, Serialize)]
pub struct BoundPoint {
    pub t: usize,
    pub regret: f64,
    pub bound: f64,
}

#[derive(Debug, Serialize)]
pub struct BoundView {
    pub optimizer: &'static str,
    pub gamma: f64,
    pub t0: usize,
    pub points: Vec<BoundPoint>,
}

/// R(T) next to the closed-form bound at evenly spaced horizons on the
/// synthetic problem. AdamX uses the proof-derived coefficient.
pub fn bound_vs_regret(
    optimizer: &str,
    schedule: &str,
    alpha: f64,
    beta2: f64,
    steps: usize,
) -> DemoResult<BoundView> {
    check_steps(steps)?;
    let kind = parse_optimizer(optimizer)?;
    let schedule = parse_schedule(schedule)?;
    if kind == OptimizerKind::Adam {
        return Err("Adam has no regret bound; pick amsgrad or adamx".into());
    }
    let mut h = HyperParams::counterexample()
        .with_schedule(schedule)
        .with_alpha(alpha);
    h.beta2 = beta2;
    let p = synthetic_problem();
    let mut points = Vec::new();
    let mut t0 = 1;
    for k in 1..=BOUND_CHECKPOINTS.min(steps) {
        let t = (steps * k).div_ceil(BOUND_CHECKPOINTS.min(steps));
        let tr = run_oco(&p, kind, &h, t, None, RecordMode::Full).map_err(|e| e.to_string())?;
        let ctx = BoundContext::from_trace(&tr, p.g_inf(), p.feasible().diameter())
            .map_err(|e| e.to_string())?;
        t0 = ctx.t0;
        let terms = match kind {
            OptimizerKind::AmsGrad => bound_amsgrad(&ctx, schedule),
            _ => bound_adamx(&ctx, &tr.beta1, AdamXCoefficient::ProofDerived),
        }
        .map_err(|e| e.to_string())?;
        points.push(BoundPoint {
            t,
            regret: tr.regret(),
            bound: terms.total(),
        });
    }
    Ok(BoundView {
        optimizer: kind.name(),
        gamma: h.gamma(),
        t0,
        points,
    })
}

pub fn counterexample_json(steps: usize, comparator: f64) -> DemoResult<String> {
    counterexample(steps, comparator).map(|v| to_json(&v))
}

pub fn regret_curves_json(
    problem: &str,
    schedule: &str,
    alpha: f64,
    steps: usize,
    seed: u64,
) -> DemoResult<String> {
    regret_curves(problem, schedule, alpha, steps, seed).map(|v| to_json(&v))
}

pub fn bound_vs_regret_json(
    optimizer: &str,
    schedule: &str,
    alpha: f64,
    beta2: f64,
    steps: usize,
) -> DemoResult<String> {
    bound_vs_regret(optimizer, schedule, alpha, beta2, steps).map(|v| to_json(&v))
}

#[cfg(target_arch = "wasm32")]
pub mod bindings {
    use wasm_bindgen::prelude::*;

    #[wasm_bindgen(js_name = counterexample)]
    pub fn counterexample(steps: usize, comparator: f64) -> Result<String, JsError> {
        super::counterexample_json(steps, comparator).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = regretCurves)]
    pub fn regret_curves(
        problem: &str,
        schedule: &str,
        alpha: f64,
        steps: usize,
        seed: u32,
    ) -> Result<String, JsError> {
        super::regret_curves_json(problem, schedule, alpha, steps, seed as u64)
            .map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = boundVsRegret)]
    pub fn bound_vs_regret(
        optimizer: &str,
        schedule: &str,
        alpha: f64,
        beta2: f64,
        steps: usize,
    ) -> Result<String, JsError> {
        super::bound_vs_regret_json(optimizer, schedule, alpha, beta2, steps)
            .map_err(|e| JsError::new(&e))
    }
}
