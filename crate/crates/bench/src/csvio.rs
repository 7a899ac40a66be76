//! CSV emission and reading.
//!
//! Trace files start with the comment line `# acrcd-trace v1` followed by a
//! header row in [`TraceRecord::CSV_HEADER`] order. Floats are written in
//! shortest round-trip form so reruns are byte-identical.

use std::io::{Read, Write};
use std::path::Path;

use acrcd_core::TraceRecord;

use crate::error::BenchError;
use crate::experiment::RunSummary;

pub const TRACE_VERSION_LINE: &str = "# acrcd-trace v1";
pub const SUMMARY_VERSION_LINE: &str = "# acrcd-summary v1";

pub const SUMMARY_HEADER: [&str; 12] = [
    "run_id",
    "status",
    "iterations",
    "coordinate_calls",
    "value_calls",
    "final_gap",
    "final_is_gap",
    "touches",
    "feasibility",
    "certificate_gap",
    "scaled_feasibility",
    "message",
];

fn float(v: f64) -> String {
    format!("{v:e}")
}

fn opt_float(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

pub fn write_trace<W: Write>(mut out: W, records: &[TraceRecord]) -> Result<(), BenchError> {
    writeln!(out, "{TRACE_VERSION_LINE}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TraceRecord::CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.run_id.to_string(),
            r.epoch.to_string(),
            r.iteration.to_string(),
            r.coordinate_calls.to_string(),
            r.value_calls.to_string(),
            float(r.objective),
            opt_float(r.distance_sq),
            r.elapsed_ns.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(mut out: W, rows: &[RunSummary]) -> Result<(), BenchError> {
    writeln!(out, "{SUMMARY_VERSION_LINE}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for s in rows {
        w.write_record([
            s.run_id.to_string(),
            s.status.as_str().to_string(),
            s.iterations.to_string(),
            s.coordinate_calls.to_string(),
            s.value_calls.to_string(),
            opt_float(s.final_gap),
            s.final_is_gap.to_string(),
            s.touches.to_string(),
            opt_float(s.certificate.map(|c| c.feasibility)),
            opt_float(s.certificate.map(|c| c.gap)),
            opt_float(s.certificate.map(|c| c.scaled_feasibility())),
            s.message.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Trace rows as `(iteration, gap)`; `distance_sq` is carried along when present.
#[derive(Clone, Debug, PartialEq)]
pub struct TracePoint {
    pub epoch: u32,
    pub iteration: u64,
    pub coordinate_calls: u64,
    pub gap: f64,
    pub distance_sq: Option<f64>,
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<TracePoint>, BenchError> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).has_headers(true).from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(TraceRecord::CSV_HEADER.iter().copied()) {
        return Err(BenchError::Invalid(format!("unexpected trace header {header:?}")));
    }
    let mut out = Vec::new();
    for (line, row) in rd.records().enumerate() {
        let row = row?;
        let bad = |col: &str| BenchError::Invalid(format!("trace row {}: bad {col}", line + 1));
        let field = |i: usize| row.get(i).unwrap_or("");
        out.push(TracePoint {
            epoch: field(1).parse().map_err(|_| bad("epoch"))?,
            iteration: field(2).parse().map_err(|_| bad("iteration"))?,
            coordinate_calls: field(3).parse().map_err(|_| bad("coordinate_calls"))?,
            gap: field(5).parse().map_err(|_| bad("gap"))?,
            distance_sq: match field(6) {
                "" => None,
                s => Some(s.parse().map_err(|_| bad("distance_sq"))?),
            },
        });
    }
    Ok(out)
}

pub fn read_trace_file(path: &Path) -> Result<Vec<TracePoint>, BenchError> {
    let f = std::fs::File::open(path)
        .map_err(|e| BenchError::Invalid(format!("cannot open {}: {e}", path.display())))?;
    read_trace(std::io::BufReader::new(f))
}
