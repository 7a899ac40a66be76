use crate::error::Error;
use crate::oracle::{CoordProblem, WeightedNorm};
use crate::scalar::Scalar;
use crate::trace::{Counters, TraceOptions, TraceRecord, Tracer};

/// Run-wide bookkeeping shared by every method: oracle counters, the trace,
/// the global iteration index, work counters and optional iterate snapshots.
///
/// Logging evaluates `f` (or the gap) for instrumentation only; those
/// evaluations are not booked as oracle calls.
#[derive(Clone, Debug)]
pub struct Monitor<T> {
    pub tracer: Tracer,
    pub counters: Counters,
    /// Iterations completed so far, across epochs and restarts.
    pub iteration: u64,
    /// Matrix entries, cache entries and sampler nodes touched (sparse engines).
    pub touches: u64,
    snapshot_stride: u64,
    snapshots: Vec<(u64, Vec<T>)>,
}

impl<T: Scalar> Monitor<T> {
    pub fn new(options: TraceOptions) -> Self {
        Self {
            tracer: Tracer::new(options),
            counters: Counters::default(),
            iteration: 0,
            touches: 0,
            snapshot_stride: 0,
            snapshots: Vec::new(),
        }
    }

    pub fn quiet() -> Self {
        Self::new(TraceOptions::default())
    }

    /// Records the coupling point `x_k` whenever `k` is a multiple of `stride`.
    pub fn with_snapshots(mut self, stride: u64) -> Self {
        self.snapshot_stride = stride;
        self
    }

    #[inline]
    pub fn wants_snapshot(&self, k: u64) -> bool {
        self.snapshot_stride > 0 && k.is_multiple_of(self.snapshot_stride)
    }

    pub fn snapshot(&mut self, k: u64, x: &[T]) {
        self.snapshots.push((k, x.to_vec()));
    }

    pub fn snapshots(&self) -> &[(u64, Vec<T>)] {
        &self.snapshots
    }

    pub fn take_snapshots(&mut self) -> Vec<(u64, Vec<T>)> {
        std::mem::take(&mut self.snapshots)
    }

    /// Logs the gap at `y` and `V_z(x_*)` when the tracer asks for `iteration`.
    pub fn maybe_log<P: CoordProblem<T> + ?Sized>(
        &mut self,
        problem: &P,
        norm: &WeightedNorm<T>,
        y: &[T],
        z: &[T],
    ) {
        if self.tracer.wants(self.iteration) {
            self.log(problem, norm, y, z);
        }
    }

    pub fn log<P: CoordProblem<T> + ?Sized>(
        &mut self,
        problem: &P,
        norm: &WeightedNorm<T>,
        y: &[T],
        z: &[T],
    ) {
        let objective = match problem.gap(y) {
            Some(g) => (g.as_f64(), true),
            None => (problem.value(y).as_f64(), false),
        };
        let dist = problem.minimizer_hint().map(|xs| norm.bregman(z, xs).as_f64());
        self.tracer.push(self.iteration, self.counters, objective, dist);
    }

    /// Logs the current point unless tracing is off or this iteration is
    /// already recorded; used when a stop rule ends a run between strides.
    pub fn log_final<P: CoordProblem<T> + ?Sized>(
        &mut self,
        problem: &P,
        norm: &WeightedNorm<T>,
        y: &[T],
        z: &[T],
    ) {
        let logged = self.tracer.records().last().is_some_and(|r| r.iteration == self.iteration);
        if self.tracer.is_enabled() && !logged {
            self.log(problem, norm, y, z);
        }
    }

    pub fn records(&self) -> &[TraceRecord] {
        self.tracer.records()
    }

    /// Divergence error carrying the trace gathered so far.
    pub fn divergence(&mut self) -> Error {
        Error::Divergence { iteration: self.iteration, trace: self.tracer.take_records() }
    }
}
