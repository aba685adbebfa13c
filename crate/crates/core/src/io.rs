//! CSV rendering. Floats use `{:.16e}` so output round-trips bit for bit.

use crate::sampler::SamplePathSet;
use std::fmt::Write;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header line plus one line per row.
pub fn table_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// One line per grid point: `t,r0,r1,...`.
pub fn paths_csv(set: &SamplePathSet) -> String {
    let mut out = String::from("t");
    for r in 0..set.replicas() {
        let _ = write!(out, ",r{r}");
    }
    out.push('\n');
    for (i, t) in set.grid.iter().enumerate() {
        out.push_str(&fmt_f64(*t));
        for v in &set.values {
            out.push(',');
            out.push_str(&fmt_f64(v[i]));
        }
        out.push('\n');
    }
    out
}

/// Parse a table written by [`table_csv`] or [`paths_csv`].
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or("empty table")?
        .split(',')
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|e| format!("line {}: {e}", n + 2)))
            .collect::<Result<Vec<_>, _>>()?;
        if row.len() != header.len() {
            return Err(format!("line {}: {} cells, header has {}", n + 2, row.len(), header.len()));
        }
        rows.push(row);
    }
    Ok((header, rows))
}
