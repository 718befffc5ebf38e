//! Numerical verification: lemma checks on recorded runs, the closed-form
//! regret bounds, the distance counter-example, and the default suite.

pub mod bounds;
pub mod counterexample;
pub mod lemmas;
pub mod report;
pub mod suite;

pub use bounds::{
    bound_adamx, bound_amsgrad, find_t0, momentum_sum, schedule_t0, AdamXCoefficient,
    BoundContext, BoundTerms,
};
pub use counterexample::{
    counterexample_run, distance_deltas, reproduce_counterexample, Counterexample, DistanceStep,
    Sign,
};
pub use lemmas::{
    check_adamx_scaled_monotonicity, check_adamx_vhat_closed_form, check_amsgrad_monotonicity,
    check_regret_bound, check_regret_decomposition, check_sum_lemma,
    check_telescoping_positivity, check_vhat_bound, regret_decomposition, Decomposition,
};
pub use report::{Report, Status};
pub use suite::{default_corpus, run_suite, CorpusEntry, CorpusProblem, Overrides, Suite, SuiteReport};
