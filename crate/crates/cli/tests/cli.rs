use std::path::Path;
use std::process::{Command, Output};

use adamxlab::config::{OptimizerChoice, ProblemChoice, ScheduleChoice};
use adamxlab::trace_csv::{read_trace, read_trace_file};
use adamxlab::{execute, ExperimentConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_adamxlab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const COUNTEREXAMPLE_FLAGS: [&str; 14] = [
    "--problem", "synthetic", "--optimizer", "amsgrad", "--schedule", "exp", "--alpha", "0.001",
    "--beta1", "0.9", "--beta2", "0.999", "--lambda", "0.001",
];

#[test]
fn run_counterexample_rows_hold_the_golden_iterates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ce.csv");
    let mut args = vec!["run"];
    args.extend(COUNTEREXAMPLE_FLAGS);
    args.extend(["--steps", "2", "-o", out.to_str().unwrap()]);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("T=2 R(T)="), "{}", stdout(&o));
    let table = read_trace_file(&out).unwrap();
    assert_eq!(
        table.header,
        ["t", "f_xt", "f_xstar", "regret", "avg_regret", "x_0"]
    );
    assert_eq!(
        table.column("x_0").unwrap(),
        vec![0.9968377223398316, 0.9970569034941291]
    );
}

#[test]
fn zero_steps_is_a_usage_error() {
    let o = run(&["run", "--steps", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("steps must be ≥ 1"), "{}", stderr(&o));
}

#[test]
fn invalid_hyperparameter_names_its_field() {
    let o = run(&["run", "--beta1", "1.2", "--steps", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("beta1"), "{}", stderr(&o));
}

#[test]
fn overflowing_step_is_a_numeric_fault_with_its_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = run(&["run", "--alpha", "1e308", "--steps", "5", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("step 1"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(run(&["run", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "nothing"]).status.code(), Some(2));
}

/// Column `name` of a CSV, as raw text.
fn raw_column(csv_text: &str, name: &str) -> Vec<String> {
    let mut lines = csv_text.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn constant_schedule_amsgrad_and_adamx_traces_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for opt in ["amsgrad", "adamx"] {
        let out = dir.path().join(format!("{opt}.csv"));
        let o = run(&[
            "run", "--problem", "quadratic", "--dim", "3", "--seed", "17", "--optimizer", opt,
            "--schedule", "const", "--alpha", "0.1", "--steps", "1000", "-o",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        texts.push(std::fs::read_to_string(out).unwrap());
    }
    for col in ["x_0", "x_1", "x_2", "regret"] {
        assert_eq!(raw_column(&texts[0], col), raw_column(&texts[1], col), "{col}");
    }
}

#[test]
fn csv_round_trips_the_trace_exactly() {
    let config = ExperimentConfig {
        problem: ProblemChoice::Logistic,
        optimizer: OptimizerChoice::Adamx,
        schedule: ScheduleChoice::Inv,
        alpha: 0.05,
        steps: 400,
        seed: 3,
        record_full: true,
        ..ExperimentConfig::default()
    };
    let mut buf = Vec::new();
    adamxlab::cmd_run_to(&config, &mut buf).unwrap();
    let table = read_trace(buf.as_slice()).unwrap();
    let trace = execute(&config).unwrap();
    let x = trace.iterates().unwrap();
    let (m, v, vh) = (
        trace.m_history().unwrap(),
        trace.v_history().unwrap(),
        trace.vhat_history().unwrap(),
    );
    assert_eq!(table.rows.len(), 400);
    for (k, row) in table.rows.iter().enumerate() {
        assert_eq!(row.t, k + 1);
        assert_eq!(row.f_xt.to_bits(), trace.losses[k].to_bits());
        assert_eq!(row.f_xstar.to_bits(), trace.comparator_losses[k].to_bits());
        assert_eq!(row.regret.to_bits(), trace.cumulative_regret[k].to_bits());
        let mut want: Vec<f64> = x[k + 1].iter().copied().collect();
        for h in [m, v, vh] {
            want.extend(h[k].iter());
        }
        assert_eq!(row.rest, want);
    }
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"problem":"quadratic","dim":2,"optimizer":"adamx","alpha":0.1,"steps":50,"seed":4}"#,
    )
    .unwrap();
    let out = dir.path().join("o.csv");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--steps", "7", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = read_trace_file(&out).unwrap();
    assert_eq!(table.rows.len(), 7);
    assert!(table.header.contains(&"x_1".to_string()));

    std::fs::write(&cfg, r#"{"steps": 0}"#).unwrap();
    let o = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(&cfg, r#"{"stepz": 3}"#).unwrap();
    let o = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("stepz"), "{}", stderr(&o));
}

#[test]
fn verify_counterexample_passes() {
    let o = run(&["verify", "counterexample"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    let reports = v["reports"].as_array().unwrap();
    let get = |name: &str| {
        reports
            .iter()
            .find(|r| r["check"] == name)
            .unwrap_or_else(|| panic!("{name}"))
            .clone()
    };
    assert_eq!(get("counterexample.x2")["lhs"], 0.9968377223398316);
    assert_eq!(get("counterexample.delta2")["lhs"], -0.0008753864342319062);
    assert_eq!(get("counterexample.sign_flip")["status"], "pass");
}

#[test]
fn verify_all_passes_on_the_default_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&["verify", "all", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["failed"], 0);
    for r in v["reports"].as_array().unwrap() {
        for key in ["check", "status", "lhs", "rhs", "slack"] {
            assert!(r.get(key).is_some(), "{key} missing in {r}");
        }
    }
}

#[test]
fn verify_bounds_at_gamma_one_reports_undefined() {
    let o = run(&["verify", "bounds", "--beta1", "0.9", "--beta2", "0.81"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("bound undefined at γ=1"));
    assert!(stderr(&o).contains("bound undefined at γ=1"));
}

fn write_trace_csv(dir: &Path, name: &str, optimizer: &str) -> String {
    let out = dir.join(name);
    let o = run(&[
        "run", "--optimizer", optimizer, "--alpha", "1", "--steps", "300", "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    out.to_str().unwrap().to_string()
}

#[test]
fn plot_draws_one_polyline_per_trace() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_trace_csv(dir.path(), "amsgrad.csv", "amsgrad");
    let b = write_trace_csv(dir.path(), "adamx.csv", "adamx");
    let svg = dir.path().join("p.svg");
    let o = run(&["plot", &a, "-o", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 1);
    assert!(text.contains(r#"width="800" height="500""#));
    assert!(text.contains(">t</text>") && text.contains(">R(t)/t</text>"));

    let o = run(&["plot", &a, &b, "-o", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 2);
    assert!(text.contains(">amsgrad</text>") && text.contains(">adamx</text>"));
}

#[test]
fn plot_rejects_header_only_and_malformed_files() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("p.svg");
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "t,f_xt,f_xstar,regret,avg_regret,x_0\n").unwrap();
    let o = run(&["plot", empty.to_str().unwrap(), "-o", svg.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("no data rows"), "{}", stderr(&o));

    let bad = dir.path().join("bad.csv");
    std::fs::write(
        &bad,
        "t,f_xt,f_xstar,regret,avg_regret,x_0\n1,1,2,3,4,5\n2,1,oops,3,4,5\n",
    )
    .unwrap();
    let o = run(&["plot", bad.to_str().unwrap(), "-o", svg.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    std::fs::write(&bad, "t,f_xt,f_xstar,regret,avg_regret,x_0\n1,1,2,3,4,5\n2,1,2\n").unwrap();
    let o = run(&["plot", bad.to_str().unwrap(), "-o", svg.to_str().unwrap()]);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn batch_runs_every_config_with_capped_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("batch.json");
    let configs: Vec<serde_json::Value> = (0..6)
        .map(|s| {
            serde_json::json!({
                "problem": "quadratic", "dim": 2, "seed": s, "alpha": 0.1, "steps": 200,
                "optimizer": if s % 2 == 0 { "amsgrad" } else { "adamx" }
            })
        })
        .collect();
    std::fs::write(&cfg, serde_json::to_string(&configs).unwrap()).unwrap();
    let o = bin()
        .args(["batch", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()])
        .env("ADAMXLAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    for k in 0..6 {
        assert!(out.contains(&format!("[{k}] T=200 ")), "{out}");
        // Each file matches a standalone run of the same config.
        let single = ExperimentConfig {
            problem: ProblemChoice::Quadratic,
            dim: 2,
            seed: k,
            alpha: 0.1,
            steps: 200,
            optimizer: if k % 2 == 0 { OptimizerChoice::Amsgrad } else { OptimizerChoice::Adamx },
            ..ExperimentConfig::default()
        };
        let mut buf = Vec::new();
        adamxlab::cmd_run_to(&single, &mut buf).unwrap();
        let file = std::fs::read(dir.path().join(format!("run-{k}.csv"))).unwrap();
        assert_eq!(file, buf);
    }
}

#[test]
fn batch_with_invalid_entry_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("batch.json");
    std::fs::write(&cfg, r#"[{"steps": 10}, {"steps": 0}]"#).unwrap();
    let o = run(&["batch", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
