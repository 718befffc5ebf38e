use adamxlab_core::harness::{quadratic_problem, run_oco, synthetic_problem, Problem, RecordMode};
use adamxlab_core::numerics::{FeasibleBox, Vector};
use adamxlab_core::optimizers::{
    beta1_at, step, step_adam, step_adamx, step_amsgrad, HyperParams, OptimizerKind,
    OptimizerState, Schedule,
};
use proptest::prelude::*;

fn unit() -> FeasibleBox {
    FeasibleBox::cube(1, -1.0, 1.0).unwrap()
}

fn scalar(v: f64) -> Vector {
    Vector::new(vec![v])
}

#[test]
fn schedule_values() {
    let h = HyperParams::default();
    assert_eq!(beta1_at(1, &h).unwrap(), 0.9);
    assert!((beta1_at(2, &h).unwrap() - 0.0009).abs() < 1e-18);
    let inv = h.clone().with_schedule(Schedule::InverseT);
    assert!((beta1_at(9, &inv).unwrap() - 0.1).abs() < 1e-16);
    assert!(beta1_at(0, &h).is_err());
}

// Both branches of the AdamX max at step 2 of the counter-example, evaluated
// outside the library: ((1−0.0009)²/(1−0.9)²)·v₁ and v₂.
const ADAMX_STEP2_SCALED: f64 = 101826.46462810013;
const ADAMX_STEP2_FRESH: f64 = 1019.179900000001;
const ADAMX_X3: f64 = 0.9968596601993349;

#[test]
fn adamx_step_two_takes_the_scaled_branch() {
    let h = HyperParams::counterexample();
    let s1 = step_adamx(OptimizerState::new(scalar(1.0)), &scalar(1010.0), &h, &unit()).unwrap();
    assert_eq!(s1.v_hat[0], s1.v[0]);
    assert_eq!(s1.x[0], 0.9968377223398316);
    let s2 = step_adamx(s1, &scalar(-10.0), &h, &unit()).unwrap();
    assert!((s2.v[0] - ADAMX_STEP2_FRESH).abs() <= 1e-9);
    assert!(ADAMX_STEP2_SCALED > ADAMX_STEP2_FRESH);
    assert!((s2.v_hat[0] - ADAMX_STEP2_SCALED).abs() <= 1e-12 * ADAMX_STEP2_SCALED);
    assert!((s2.x[0] - ADAMX_X3).abs() <= 1e-15);
}

#[test]
fn amsgrad_counterexample_moments() {
    let h = HyperParams::counterexample();
    let s1 = step_amsgrad(OptimizerState::new(scalar(1.0)), &scalar(1010.0), &h, &unit()).unwrap();
    assert!((s1.m[0] - 101.0).abs() < 1e-12);
    assert!((s1.v[0] - 1020.1).abs() < 1e-9);
    let s2 = step_amsgrad(s1, &scalar(-10.0), &h, &unit()).unwrap();
    assert!((s2.m[0] - -9.9001).abs() < 1e-12);
    assert!((s2.v[0] - 1019.1799000000001).abs() < 1e-9);
    assert!((s2.v_hat[0] - 1020.1).abs() < 1e-9);
    assert_eq!(s2.x[0], 0.9970569034941291);
}

/// Straight-line Adam on the synthetic problem, written independently of the
/// library's stepping code.
fn reference_adam(h: &HyperParams, steps: usize) -> Vec<f64> {
    let (mut x, mut m, mut v) = (1.0f64, 0.0f64, 0.0f64);
    let mut xs = vec![x];
    for t in 1..=steps {
        let g = if t % 101 == 1 { 1010.0 } else { -10.0 };
        let b1 = match h.schedule {
            Schedule::Constant => h.beta1,
            Schedule::ExpDecay => h.beta1 * h.lambda.powf((t - 1) as f64),
            Schedule::InverseT => h.beta1 / t as f64,
        };
        m = b1 * m + (1.0 - b1) * g;
        v = h.beta2 * v + (1.0 - h.beta2) * g * g;
        let (mh, vh) = if h.bias_correction {
            (
                m / (1.0 - h.beta1.powf(t as f64)),
                v / (1.0 - h.beta2.powf(t as f64)),
            )
        } else {
            (m, v)
        };
        let a_t = h.alpha / (t as f64).sqrt();
        x = (x - a_t * mh / (vh.sqrt() + h.epsilon)).clamp(-1.0, 1.0);
        xs.push(x);
    }
    xs
}

#[test]
fn adam_matches_reference_loop() {
    let p = synthetic_problem();
    for (schedule, bias, eps) in [
        (Schedule::Constant, false, 0.0),
        (Schedule::Constant, true, 1e-8),
        (Schedule::ExpDecay, false, 0.0),
        (Schedule::InverseT, true, 0.0),
    ] {
        let mut h = HyperParams::default().with_schedule(schedule).with_alpha(0.05);
        h.bias_correction = bias;
        h.epsilon = eps;
        let tr = run_oco(&p, OptimizerKind::Adam, &h, 10, None, RecordMode::Full).unwrap();
        let got: Vec<f64> = tr.iterates().unwrap().iter().map(|x| x[0]).collect();
        let want = reference_adam(&h, 10);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() <= 1e-12, "{schedule:?} bias={bias}: {a} vs {b}");
        }
    }
}

#[test]
fn adam_first_constant_step_equals_amsgrad() {
    let h = HyperParams::default().with_schedule(Schedule::Constant);
    let a = step_adam(OptimizerState::new(scalar(0.3)), &scalar(2.0), &h, &unit()).unwrap();
    let b = step_amsgrad(OptimizerState::new(scalar(0.3)), &scalar(2.0), &h, &unit()).unwrap();
    assert_eq!(a.x, b.x);
}

#[test]
fn zero_gradient_never_moves() {
    for kind in [OptimizerKind::Adam, OptimizerKind::AmsGrad, OptimizerKind::AdamX] {
        let mut s = OptimizerState::new(Vector::new(vec![0.25, -0.5]));
        let b = FeasibleBox::cube(2, -1.0, 1.0).unwrap();
        for _ in 0..50 {
            s = step(kind, s, &Vector::zeros(2), &HyperParams::default(), &b).unwrap();
        }
        assert_eq!(s.x.as_slice(), &[0.25, -0.5]);
        assert!(s.m.iter().chain(s.v.iter()).chain(s.v_hat.iter()).all(|&v| v == 0.0));
    }
}

fn arb_hyper() -> impl Strategy<Value = HyperParams> {
    (
        0.001f64..0.5,
        0.0f64..0.95,
        0.5f64..0.9999,
        0.001f64..0.9,
        prop_oneof![
            Just(Schedule::Constant),
            Just(Schedule::ExpDecay),
            Just(Schedule::InverseT)
        ],
    )
        .prop_filter_map("γ ≤ 1", |(alpha, beta1, beta2, lambda, schedule)| {
            let h = HyperParams {
                alpha,
                beta1,
                beta2,
                lambda,
                schedule,
                ..HyperParams::default()
            };
            h.validate().ok().map(|_| h)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constant_schedule_makes_adamx_equal_amsgrad(
        mut h in arb_hyper(),
        seed in 0u64..1000,
        dim in 1usize..4,
    ) {
        h.schedule = Schedule::Constant;
        let p = quadratic_problem(seed, dim, FeasibleBox::cube(dim, -1.0, 1.0).unwrap()).unwrap();
        let a = run_oco(&p, OptimizerKind::AmsGrad, &h, 200, None, RecordMode::Full).unwrap();
        let b = run_oco(&p, OptimizerKind::AdamX, &h, 200, None, RecordMode::Full).unwrap();
        prop_assert_eq!(a.iterates().unwrap(), b.iterates().unwrap());
        prop_assert_eq!(a.vhat_history().unwrap(), b.vhat_history().unwrap());
        prop_assert_eq!(&a.cumulative_regret, &b.cumulative_regret);
    }

    #[test]
    fn moment_invariants_hold(
        h in arb_hyper(),
        seed in 0u64..1000,
        dim in 1usize..4,
    ) {
        let p = quadratic_problem(seed, dim, FeasibleBox::cube(dim, -1.0, 1.0).unwrap()).unwrap();
        let g_inf = p.g_inf();
        for kind in [OptimizerKind::Adam, OptimizerKind::AmsGrad, OptimizerKind::AdamX] {
            let tr = run_oco(&p, kind, &h, 150, None, RecordMode::Full).unwrap();
            let vh = tr.vhat_history().unwrap();
            let v = tr.v_history().unwrap();
            for x in tr.iterates().unwrap() {
                prop_assert!(p.feasible().contains(x));
            }
            for k in 0..tr.horizon {
                for i in 0..dim {
                    prop_assert!(v[k][i] >= 0.0 && vh[k][i] >= 0.0);
                    let cap = match kind {
                        OptimizerKind::AdamX => g_inf / (1.0 - h.beta1),
                        _ => g_inf,
                    };
                    prop_assert!(vh[k][i].sqrt() <= cap * (1.0 + 1e-12));
                    if k > 0 {
                        match kind {
                            OptimizerKind::AmsGrad => prop_assert!(vh[k][i] >= vh[k - 1][i]),
                            OptimizerKind::AdamX => {
                                let b = &tr.beta1;
                                let prev = vh[k - 1][i] / (1.0 - b[k - 1]).powi(2);
                                let cur = vh[k][i] / (1.0 - b[k]).powi(2);
                                prop_assert!(cur >= prev * (1.0 - 1e-12));
                            }
                            OptimizerKind::Adam => {}
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn invalid_hyperparameters_name_the_field() {
    let mut h = HyperParams::default();
    h.beta2 = 1.0;
    let err = h.validate().unwrap_err().to_string();
    assert!(err.contains("beta2"), "{err}");
    let mut h = HyperParams::default();
    h.alpha = 0.0;
    assert!(h.validate().unwrap_err().to_string().contains("alpha"));
}
