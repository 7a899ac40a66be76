//! Per-iteration logging shared by all methods.

use std::time::Instant;

use serde::{Deserialize, Serialize};

/// One logged row of a run.
///
/// `objective` holds the optimality gap when the problem knows `f_*`, and
/// the raw objective value otherwise (`objective_is_gap` tells which).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub run_id: u64,
    pub epoch: u32,
    pub iteration: u64,
    pub coordinate_calls: u64,
    pub value_calls: u64,
    pub objective: f64,
    pub objective_is_gap: bool,
    /// `V_z(x_*) = ½‖z − x_*‖²` in the method's norm, when `x_*` is known.
    pub distance_sq: Option<f64>,
    pub elapsed_ns: u64,
}

impl TraceRecord {
    pub const CSV_HEADER: [&'static str; 8] = [
        "run_id",
        "epoch",
        "iteration",
        "coordinate_calls",
        "value_calls",
        "gap",
        "distance_sq",
        "elapsed_ns",
    ];
}

/// Cumulative oracle usage of a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub coordinate: u64,
    pub value: u64,
}

/// Logging policy for a run.
#[derive(Clone, Debug)]
#[derive(Default)]
pub struct TraceOptions {
    pub run_id: u64,
    /// Log every `stride` iterations; 0 disables the arithmetic grid.
    pub stride: u64,
    /// Also log on a logarithmic grid with this many points per decade.
    pub per_decade: u32,
    /// Record wall time. Off by default so that traces are reproducible.
    pub timing: bool,
}


impl TraceOptions {
    pub fn every(stride: u64) -> Self {
        Self { stride, ..Self::default() }
    }

    pub fn log_spaced(per_decade: u32) -> Self {
        Self { per_decade, ..Self::default() }
    }

    pub fn with_run_id(mut self, run_id: u64) -> Self {
        self.run_id = run_id;
        self
    }
}

/// `k` is the first integer in its bucket `⌊d·log₁₀ k⌋`.
fn on_log_grid(k: u64, per_decade: u32) -> bool {
    if k <= 1 {
        return k == 1;
    }
    let d = per_decade as f64;
    (d * (k as f64).log10()).floor() > (d * ((k - 1) as f64).log10()).floor()
}

#[derive(Clone, Debug)]
pub struct Tracer {
    pub options: TraceOptions,
    pub epoch: u32,
    records: Vec<TraceRecord>,
    start: Instant,
}

impl Tracer {
    pub fn new(options: TraceOptions) -> Self {
        Self { options, epoch: 0, records: Vec::new(), start: Instant::now() }
    }

    pub fn disabled() -> Self {
        Self::new(TraceOptions::default())
    }

    #[inline]
    pub fn wants(&self, iteration: u64) -> bool {
        let o = &self.options;
        (o.stride > 0 && iteration.is_multiple_of(o.stride))
            || (o.per_decade > 0 && on_log_grid(iteration, o.per_decade))
    }

    pub fn is_enabled(&self) -> bool {
        self.options.stride > 0 || self.options.per_decade > 0
    }

    pub fn push(
        &mut self,
        iteration: u64,
        counters: Counters,
        objective: (f64, bool),
        distance_sq: Option<f64>,
    ) {
        let elapsed_ns =
            if self.options.timing { self.start.elapsed().as_nanos() as u64 } else { 0 };
        self.records.push(TraceRecord {
            run_id: self.options.run_id,
            epoch: self.epoch,
            iteration,
            coordinate_calls: counters.coordinate,
            value_calls: counters.value,
            objective: objective.0,
            objective_is_gap: objective.1,
            distance_sq,
            elapsed_ns,
        });
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<TraceRecord> {
        self.records
    }

    pub fn take_records(&mut self) -> Vec<TraceRecord> {
        std::mem::take(&mut self.records)
    }
}
