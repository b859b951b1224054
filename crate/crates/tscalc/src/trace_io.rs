//! CSV emission and loading for criterion traces and solution traces
//!
//! Two column contracts:
//!
//! * criterion traces: `t,value,window_lo,window_hi`
//! * solution traces:  `index,t,x,z`
//!
//! Floats are written in shortest round-trip form, so write-then-read
//! reproduces values exactly.

use crate::oscillation::{CriterionReport, TracePoint};
use crate::simulate::SolutionTrace;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceIoError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("malformed trace: {0}")]
    Malformed(String),
}

pub fn write_criterion_csv<W: Write>(out: W, report: &CriterionReport) -> Result<(), TraceIoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "value", "window_lo", "window_hi"])?;
    for p in &report.trace {
        w.serialize((p.t, p.value, p.window_lo, p.window_hi))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_criterion_csv<R: Read>(input: R) -> Result<Vec<TracePoint>, TraceIoError> {
    let mut r = csv::Reader::from_reader(input);
    let head = r.headers()?.clone();
    if head.iter().collect::<Vec<_>>() != ["t", "value", "window_lo", "window_hi"] {
        return Err(TraceIoError::Malformed(format!(
            "unexpected criterion header {head:?}"
        )));
    }
    let mut points = Vec::new();
    for rec in r.deserialize() {
        let (t, value, window_lo, window_hi): (f64, f64, f64, f64) = rec?;
        points.push(TracePoint {
            t,
            value,
            window_lo,
            window_hi,
        });
    }
    Ok(points)
}

/// One row of a solution trace file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub index: i64,
    pub t: f64,
    pub x: f64,
    pub z: f64,
}

pub fn write_trace_csv<W: Write>(out: W, trace: &SolutionTrace) -> Result<(), TraceIoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "t", "x", "z"])?;
    let window = trace.x.window();
    for idx in window.lo()..=window.hi() {
        let row = TraceRow {
            index: idx,
            t: window.point(idx),
            x: trace.x.at(idx).expect("own window"),
            z: trace.z.at(idx).expect("own window"),
        };
        w.serialize((row.index, row.t, row.x, row.z))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<TraceRow>, TraceIoError> {
    let mut r = csv::Reader::from_reader(input);
    let head = r.headers()?.clone();
    if head.iter().collect::<Vec<_>>() != ["index", "t", "x", "z"] {
        return Err(TraceIoError::Malformed(format!(
            "unexpected trace header {head:?}"
        )));
    }
    let mut rows: Vec<TraceRow> = Vec::new();
    for rec in r.deserialize() {
        let (index, t, x, z): (i64, f64, f64, f64) = rec?;
        if let Some(prev) = rows.last() {
            if index != prev.index + 1 {
                return Err(TraceIoError::Malformed(format!(
                    "trace indices must be consecutive; {} follows {}",
                    index, prev.index
                )));
            }
        }
        rows.push(TraceRow { index, t, x, z });
    }
    Ok(rows)
}
