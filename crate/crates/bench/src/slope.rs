//! Rate exponents from traces: least-squares slope of `ln(mean gap)` against `ln k`.

use std::collections::BTreeMap;
use std::path::Path;

use crate::csvio::{read_trace_file, TracePoint};
use crate::error::BenchError;

/// Minimum number of window points for a fit.
pub const MIN_POINTS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares `y ≈ a + b x`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<LineFit, BenchError> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return Err(BenchError::Invalid(format!("a line fit needs at least two paired points, got {n}")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(BenchError::Invalid("a line fit needs at least two distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(LineFit { slope, intercept: my - slope * mx, r_squared, points: n })
}

/// Log-log fit of the seed-mean gap over iterations in `[kmin, kmax]`.
///
/// The mean at `k` is taken over the traces that logged `k`.
pub fn fit_traces(traces: &[Vec<TracePoint>], kmin: u64, kmax: u64) -> Result<LineFit, BenchError> {
    let mut acc: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for t in traces {
        for p in t.iter().filter(|p| (kmin..=kmax).contains(&p.iteration)) {
            let e = acc.entry(p.iteration).or_insert((0.0, 0));
            e.0 += p.gap;
            e.1 += 1;
        }
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = acc
        .into_iter()
        .map(|(k, (s, c))| (k, s / c as f64))
        .filter(|&(k, g)| k > 0 && g > 0.0 && g.is_finite())
        .map(|(k, g)| ((k as f64).ln(), g.ln()))
        .unzip();
    if xs.len() < MIN_POINTS {
        return Err(BenchError::Invalid(format!(
            "only {} positive-gap points in k ∈ [{kmin}, {kmax}], need {MIN_POINTS}",
            xs.len()
        )));
    }
    least_squares(&xs, &ys)
}

pub fn fit_slope<P: AsRef<Path>>(paths: &[P], kmin: u64, kmax: u64) -> Result<LineFit, BenchError> {
    let traces = paths.iter().map(|p| read_trace_file(p.as_ref())).collect::<Result<Vec<_>, _>>()?;
    fit_traces(&traces, kmin, kmax)
}
