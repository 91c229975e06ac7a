//! CSV emission and parsing for trace records. Floats are written with
//! `{:.16e}` (17 significant digits) so a round-trip is lossless and reruns
//! are byte-identical.

use crate::CliError;
use pqflow_core::monitor::TraceRecord;

pub const COLUMNS: [&str; 12] = [
    "t",
    "lambda",
    "S_min",
    "volume",
    "r",
    "cond_min",
    "Q",
    "G_formula",
    "dlambda_fd",
    "eig_iters",
    "eig_residual",
    "degraded",
];

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_csv(trace: &[TraceRecord<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&COLUMNS.join(","));
    out.push('\n');
    for r in trace {
        let row = [
            fmt(r.t),
            fmt(r.lambda),
            fmt(r.s_min),
            fmt(r.volume),
            fmt(r.r),
            fmt(r.cond_min),
            fmt(r.q_mono),
            fmt(r.g_formula),
            fmt(r.dlambda_fd),
            r.eig_iters.to_string(),
            fmt(r.eig_residual),
            if r.degraded { "1" } else { "0" }.to_string(),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// A parsed CSV of named numeric columns (any layout, not only traces).
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn parse(text: &str) -> Result<Table, CliError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| CliError::Parse("empty CSV".into()))?;
        let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row: Result<Vec<f64>, _> = line.split(',').map(|v| v.trim().parse::<f64>()).collect();
            let row = row.map_err(|_| CliError::Parse(format!("CSV row {}: bad number", i + 2)))?;
            if row.len() != columns.len() {
                return Err(CliError::Parse(format!("CSV row {}: wrong column count", i + 2)));
            }
            rows.push(row);
        }
        Ok(Table { columns, rows })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let idx = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::Parse(format!("no column `{name}`")))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }
}
