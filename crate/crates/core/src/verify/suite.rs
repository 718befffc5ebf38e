//! The default verification corpus and the suite runner behind `verify`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{quadratic_problem, run_oco, synthetic_problem, Problem, RecordMode};
use crate::numerics::FeasibleBox;
use crate::optimizers::{HyperParams, OptimizerKind, Schedule};

use super::bounds::{bound_adamx, bound_amsgrad, AdamXCoefficient, BoundContext};
use super::counterexample::counterexample_run;
use super::lemmas::{
    check_adamx_scaled_monotonicity, check_adamx_vhat_closed_form, check_amsgrad_monotonicity,
    check_regret_bound, check_regret_decomposition, check_sum_lemma,
    check_telescoping_positivity, check_vhat_bound,
};
use super::report::Report;

pub const SYNTHETIC_HORIZON: usize = 10_100;
pub const QUADRATIC_HORIZON: usize = 5_000;
pub const QUADRATIC_SEEDS: u64 = 20;
pub const QUADRATIC_ALPHA: f64 = 0.1;
pub const CLOSED_FORM_HORIZON: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Counterexample,
    Bounds,
    Lemmas,
    All,
}

impl Suite {
    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

/// Hyperparameter overrides applied to every corpus entry.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub lambda: Option<f64>,
}

impl Overrides {
    fn apply(&self, mut h: HyperParams) -> HyperParams {
        if let Some(a) = self.alpha {
            h.alpha = a;
        }
        if let Some(b) = self.beta1 {
            h.beta1 = b;
        }
        if let Some(b) = self.beta2 {
            h.beta2 = b;
        }
        if let Some(l) = self.lambda {
            h.lambda = l;
        }
        h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum CorpusProblem {
    Synthetic,
    Quadratic { seed: u64, dim: usize },
}

impl CorpusProblem {
    pub fn build(&self) -> Result<Box<dyn Problem>> {
        Ok(match *self {
            CorpusProblem::Synthetic => Box::new(synthetic_problem()),
            CorpusProblem::Quadratic { seed, dim } => Box::new(quadratic_problem(
                seed,
                dim,
                FeasibleBox::cube(dim, -1.0, 1.0)?,
            )?),
        })
    }

    fn label(&self) -> String {
        match self {
            CorpusProblem::Synthetic => "synthetic".into(),
            CorpusProblem::Quadratic { seed, dim } => format!("quadratic[seed={seed},d={dim}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub problem: CorpusProblem,
    pub optimizer: OptimizerKind,
    pub hyper: HyperParams,
    pub horizon: usize,
}

impl CorpusEntry {
    pub fn label(&self) -> String {
        format!(
            "{}/{}/{:?}/T={}",
            self.problem.label(),
            self.optimizer.name(),
            self.hyper.schedule,
            self.horizon
        )
    }
}

/// 20 random quadratics (d alternating 1 and 5) plus the synthetic problem,
/// each under AMSGrad and AdamX with both decaying β₁ schedules.
pub fn default_corpus(overrides: &Overrides) -> Vec<CorpusEntry> {
    let mut out = Vec::new();
    for optimizer in [OptimizerKind::AmsGrad, OptimizerKind::AdamX] {
        for schedule in [Schedule::ExpDecay, Schedule::InverseT] {
            out.push(CorpusEntry {
                problem: CorpusProblem::Synthetic,
                optimizer,
                hyper: overrides.apply(HyperParams::counterexample().with_schedule(schedule)),
                horizon: SYNTHETIC_HORIZON,
            });
            for seed in 0..QUADRATIC_SEEDS {
                out.push(CorpusEntry {
                    problem: CorpusProblem::Quadratic {
                        seed,
                        dim: if seed % 2 == 0 { 1 } else { 5 },
                    },
                    optimizer,
                    hyper: overrides.apply(
                        HyperParams::default()
                            .with_schedule(schedule)
                            .with_alpha(QUADRATIC_ALPHA),
                    ),
                    horizon: QUADRATIC_HORIZON,
                });
            }
        }
    }
    out
}

/// The bound that applies to `entry`'s optimizer, evaluated on its trace.
fn bound_for(entry: &CorpusEntry, ctx: &BoundContext, beta1: &[f64]) -> Result<f64> {
    match entry.optimizer {
        OptimizerKind::AmsGrad => Ok(bound_amsgrad(ctx, entry.hyper.schedule)?.total()),
        OptimizerKind::AdamX => {
            Ok(bound_adamx(ctx, beta1, AdamXCoefficient::ProofDerived)?.total())
        }
        OptimizerKind::Adam => Err(Error::contract("Adam has no regret bound here")),
    }
}

fn undefined_or<T>(check: &str, r: Result<T>, f: impl FnOnce(T) -> Vec<Report>) -> Vec<Report> {
    match r {
        Ok(v) => f(v),
        Err(Error::BoundUndefined { gamma }) => {
            vec![Report::undefined(check, format!("bound undefined at γ={gamma}"))]
        }
        Err(e) => vec![Report::undefined(check, e.to_string())],
    }
}

/// Bound and lemma reports for one corpus entry.
pub fn check_entry(entry: &CorpusEntry, suite: Suite) -> Result<Vec<Report>> {
    let problem = entry.problem.build()?;
    let trace = run_oco(
        problem.as_ref(),
        entry.optimizer,
        &entry.hyper,
        entry.horizon,
        None,
        RecordMode::Full,
    )?;
    let label = entry.label();
    let ctx = BoundContext::from_trace(&trace, problem.g_inf(), problem.feasible().diameter())?;
    let mut reports = Vec::new();
    let tag = |mut r: Report| {
        r.check = format!("{}[{label}]", r.check);
        r
    };

    if suite.includes(Suite::Bounds) {
        let check = format!("regret_bound[{label}]");
        reports.extend(undefined_or(
            &check,
            bound_for(entry, &ctx, &trace.beta1),
            |b| vec![tag(check_regret_bound(&trace, b))],
        ));
    }

    if suite.includes(Suite::Lemmas) {
        reports.push(tag(check_vhat_bound(&trace)?));
        reports.push(tag(check_regret_decomposition(&trace)?));
        match entry.optimizer {
            OptimizerKind::AmsGrad => reports.push(tag(check_amsgrad_monotonicity(&trace)?)),
            OptimizerKind::AdamX => {
                reports.push(tag(check_adamx_scaled_monotonicity(&trace)?));
                reports.push(tag(check_telescoping_positivity(&trace)?));
            }
            OptimizerKind::Adam => {}
        }
        let check = format!("sum_lemma[{label}]");
        reports.extend(undefined_or(&check, check_sum_lemma(&trace, &ctx), |rs| {
            rs.into_iter().map(tag).collect()
        }));
    }
    Ok(reports)
}

/// AdamX closed-form v̂ checks at T = 500 on the synthetic problem and two
/// quadratics, ExpDecay schedule.
pub fn closed_form_reports(overrides: &Overrides) -> Result<Vec<Report>> {
    let problems = [
        CorpusProblem::Synthetic,
        CorpusProblem::Quadratic { seed: 0, dim: 1 },
        CorpusProblem::Quadratic { seed: 1, dim: 5 },
    ];
    let mut reports = Vec::new();
    for problem in problems {
        let p = problem.build()?;
        let hyper = overrides.apply(HyperParams::default().with_schedule(Schedule::ExpDecay));
        let trace = run_oco(
            p.as_ref(),
            OptimizerKind::AdamX,
            &hyper,
            CLOSED_FORM_HORIZON,
            None,
            RecordMode::Full,
        )?;
        let mut r = check_adamx_vhat_closed_form(&trace, &trace.beta1)?;
        r.check = format!("{}[{}]", r.check, problem.label());
        reports.push(r);
    }
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub total: usize,
    pub failed: usize,
    pub reports: Vec<Report>,
}

impl SuiteReport {
    pub fn new(suite: Suite, reports: Vec<Report>) -> Self {
        let failed = reports.iter().filter(|r| !r.passed()).count();
        SuiteReport {
            suite,
            passed: failed == 0,
            total: reports.len(),
            failed,
            reports,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Report> {
        self.reports.iter().filter(|r| !r.passed())
    }
}

/// Runs a suite over the default corpus, serially.
pub fn run_suite(suite: Suite, overrides: &Overrides) -> Result<SuiteReport> {
    let mut reports = Vec::new();
    if suite.includes(Suite::Counterexample) {
        let (_, ce) = counterexample_run()?;
        reports.extend(ce.reports());
    }
    if suite.includes(Suite::Bounds) || suite.includes(Suite::Lemmas) {
        let effective = if suite == Suite::All { Suite::All } else { suite };
        for entry in default_corpus(overrides) {
            reports.extend(check_entry(&entry, effective)?);
        }
    }
    if suite.includes(Suite::Lemmas) {
        reports.extend(closed_form_reports(overrides)?);
    }
    Ok(SuiteReport::new(suite, reports))
}
