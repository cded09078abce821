use std::io::Write;

use super::IterationRecord;
use crate::error::{Error, Result};

pub const TRACE_CSV_HEADER: &str =
    "iter,objective,reduced_cost,epsilon_used,epsilon_next,lagrangian_bound,lp_seconds,pricing_seconds";

/// One line per iteration; an absent bound is left empty.
pub fn write_trace_csv(trace: &[IterationRecord], mut out: impl Write) -> Result<()> {
    writeln!(out, "{TRACE_CSV_HEADER}")?;
    for r in trace {
        let bound = r.lagrangian_bound.map(|b| b.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.index,
            r.objective,
            r.reduced_cost,
            r.epsilon_used,
            r.epsilon_next,
            bound,
            r.lp_seconds,
            r.pricing_seconds
        )?;
    }
    Ok(())
}

/// Dual snapshots as a `.npy` (format 1.0, little-endian f64, C order) matrix
/// with one row per iteration.
pub fn write_duals_npy(trace: &[IterationRecord], mut out: impl Write) -> Result<()> {
    let rows: Vec<&Vec<f64>> = trace.iter().filter_map(|r| r.duals.as_ref()).collect();
    if rows.len() != trace.len() {
        return Err(Error::Contract("trace was recorded without dual snapshots".into()));
    }
    let cols = rows.first().map_or(0, |r| r.len());
    if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch {
            expected: cols,
            actual: bad.len(),
            context: "dual snapshot",
        });
    }
    let mut header =
        format!("{{'descr': '<f8', 'fortran_order': False, 'shape': ({}, {}), }}", rows.len(), cols);
    // magic(6) + version(2) + length(2) + header + '\n' is padded to 64 bytes
    let unpadded = 10 + header.len() + 1;
    header.push_str(&" ".repeat((64 - unpadded % 64) % 64));
    header.push('\n');
    out.write_all(b"\x93NUMPY\x01\x00")?;
    out.write_all(&(header.len() as u16).to_le_bytes())?;
    out.write_all(header.as_bytes())?;
    for row in rows {
        for v in row {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}
