//! Trace CSV: `t,f_xt,f_xstar,regret,avg_regret,x_0[,x_1,...]`, one row
//! per step, optionally followed by `m_i`, `v_i` and `vhat_i` columns.
//!
//! Row t holds f_t(x_t), f_t(x*), R(t), R(t)/t and the iterate x_{t+1}
//! produced by step t. Floats carry 17 significant digits, so parsing a
//! file back yields the in-memory values bit for bit.

use std::io::{Read, Write};
use std::path::Path;

use adamxlab_core::harness::{average_regret, RegretTrace};

use crate::error::{CliError, CliResult};

pub const FIXED_COLUMNS: [&str; 5] = ["t", "f_xt", "f_xstar", "regret", "avg_regret"];

/// Float formatting used for every real-valued cell.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn header(dim: usize, full: bool) -> Vec<String> {
    let mut h: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    let groups: &[&str] = if full { &["x", "m", "v", "vhat"] } else { &["x"] };
    for g in groups {
        h.extend((0..dim).map(|i| format!("{g}_{i}")));
    }
    h
}

/// Writes `trace` as CSV. `full` needs a trace recorded with
/// [`RecordMode::Full`](adamxlab_core::RecordMode::Full) histories.
pub fn write_trace<W: Write>(trace: &RegretTrace, full: bool, out: W) -> CliResult<()> {
    let d = trace.dim();
    let iterates = trace.iterates()?;
    let hist = if full {
        Some((trace.m_history()?, trace.v_history()?, trace.vhat_history()?))
    } else {
        None
    };
    let avg = average_regret(trace);
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| CliError::io("cannot write trace", e);
    w.write_record(header(d, full)).map_err(csv_err)?;
    for k in 0..trace.horizon {
        let mut row = vec![
            (k + 1).to_string(),
            fmt_f64(trace.losses[k]),
            fmt_f64(trace.comparator_losses[k]),
            fmt_f64(trace.cumulative_regret[k]),
            fmt_f64(avg[k]),
        ];
        row.extend(iterates[k + 1].iter().map(|&v| fmt_f64(v)));
        if let Some((m, v, vh)) = hist {
            for h in [m, v, vh] {
                row.extend(h[k].iter().map(|&x| fmt_f64(x)));
            }
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io("cannot write trace", e))?;
    Ok(())
}

/// A parsed trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    pub header: Vec<String>,
    pub rows: Vec<TraceRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: usize,
    pub f_xt: f64,
    pub f_xstar: f64,
    pub regret: f64,
    pub avg_regret: f64,
    /// Every column after `avg_regret`, in file order.
    pub rest: Vec<f64>,
}

impl TraceTable {
    /// Values of column `name` for every row.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match idx {
                    0 => r.t as f64,
                    1 => r.f_xt,
                    2 => r.f_xstar,
                    3 => r.regret,
                    4 => r.avg_regret,
                    k => r.rest[k - 5],
                })
                .collect(),
        )
    }
}

pub fn read_trace_file(path: &Path) -> CliResult<TraceTable> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::io(format!("cannot open {}", path.display()), e))?;
    read_trace(file).map_err(|e| match e {
        CliError::Usage(msg) => CliError::Usage(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Parses a trace. Errors name the 1-based line they occur on.
pub fn read_trace<R: Read>(input: R) -> CliResult<TraceTable> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header: Vec<String> = r
        .headers()
        .map_err(|e| CliError::Usage(format!("line 1: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() < FIXED_COLUMNS.len() + 1
        || header.iter().zip(FIXED_COLUMNS).any(|(a, b)| a != b)
    {
        return Err(CliError::Usage(format!(
            "line 1: expected header starting with {},x_0",
            FIXED_COLUMNS.join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            CliError::Usage(format!("line {line}: {e}"))
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let bad = |col: &str, cell: &str| {
            CliError::Usage(format!("line {line}: column {col}: cannot parse `{cell}`"))
        };
        let t: usize = rec[0].trim().parse().map_err(|_| bad("t", &rec[0]))?;
        let mut reals = Vec::with_capacity(rec.len() - 1);
        for (k, cell) in rec.iter().enumerate().skip(1) {
            reals.push(cell.trim().parse::<f64>().map_err(|_| bad(&header[k], cell))?);
        }
        rows.push(TraceRow {
            t,
            f_xt: reals[0],
            f_xstar: reals[1],
            regret: reals[2],
            avg_regret: reals[3],
            rest: reals[4..].to_vec(),
        });
    }
    if rows.is_empty() {
        return Err(CliError::Usage("no data rows".into()));
    }
    Ok(TraceTable { header, rows })
}
