//! Experiment configuration: a JSON document naming the instance, the method,
//! the run parameters, the seeds and the logging policy. Unknown keys are
//! rejected at every level.

use std::path::{Path, PathBuf};

use acrcd_core::problems::{DualKind, InstanceSpec};
use acrcd_core::vrsum::VrConfig;
use serde::{Deserialize, Serialize};

use crate::error::BenchError;

/// Method and its method-specific knobs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodSpec {
    /// Restarted constant-step method with Markov amplification.
    Acrcd,
    /// Growing-step method for a fixed number of iterations.
    AcrcdStar {
        iterations: u64,
        #[serde(default)]
        schedule: StarSchedule,
        /// Stop once the gap at `y` is at most this value.
        #[serde(default)]
        stop_gap: Option<f64>,
        #[serde(default = "default_stop_every")]
        stop_every: u64,
    },
    /// Growing-step method restarted by distance halving; needs `μ`.
    AcrcdStarSc {
        #[serde(default)]
        mu: Option<f64>,
    },
    /// Lazy constant-step epoch on a sparse instance.
    AcrcdPrime {
        #[serde(default)]
        iterations: Option<u64>,
    },
    /// Lazy growing-step method on a sparse instance.
    AcrcdStarPrime { iterations: u64 },
    /// Accelerated full-gradient baseline; each iteration books `n` coordinate calls.
    Agd {
        iterations: u64,
        #[serde(default)]
        stop_gap: Option<f64>,
        /// Iterations between stop tests; each test evaluates `f`.
        #[serde(default = "one_u64")]
        stop_every: u64,
    },
    /// Variance-reduced epochs on a finite sum.
    Vr {
        #[serde(default)]
        settings: VrConfig,
    },
}

fn one_u64() -> u64 {
    1
}

fn default_stop_every() -> u64 {
    100
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StarSchedule {
    #[default]
    Simple,
    Recurrence,
}

/// Starting point of every run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartPoint {
    #[default]
    Zero,
    Ones,
    Explicit(Vec<f64>),
}

impl StartPoint {
    pub fn materialize(&self, n: usize) -> Result<Vec<f64>, BenchError> {
        match self {
            StartPoint::Zero => Ok(vec![0.0; n]),
            StartPoint::Ones => Ok(vec![1.0; n]),
            StartPoint::Explicit(v) if v.len() == n => Ok(v.clone()),
            StartPoint::Explicit(v) => {
                Err(BenchError::Invalid(format!("start point has length {}, instance has {n}", v.len())))
            }
        }
    }
}

/// Run parameters. `theta`, `d` and `epsilon` default to values derived from
/// the instance when it knows its optimum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub d: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "default_epoch_constant")]
    pub epoch_constant: f64,
    #[serde(default)]
    pub adaptive_lipschitz: bool,
    #[serde(default)]
    pub max_iters: u64,
    /// Noise level of the inexact coordinate oracle; 0 is exact.
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub start: StartPoint,
    /// Dual functional for entropy-LP instances.
    #[serde(default = "default_dual")]
    pub dual: DualKind,
}

fn default_sigma() -> f64 {
    0.1
}

fn default_epoch_constant() -> f64 {
    9.0
}

fn default_dual() -> DualKind {
    DualKind::LogSumExp
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            theta: None,
            d: None,
            epsilon: None,
            sigma: default_sigma(),
            beta: 0.0,
            epoch_constant: default_epoch_constant(),
            adaptive_lipschitz: false,
            max_iters: 0,
            delta: 0.0,
            start: StartPoint::Zero,
            dual: default_dual(),
        }
    }
}

/// Which iterations are logged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[derive(Default)]
pub struct LogSection {
    /// Arithmetic stride; `None` picks `⌈K/1000⌉` for the method's nominal
    /// length, or no stride when `per_decade` is set.
    #[serde(default)]
    pub stride: Option<u64>,
    /// Points per decade of a logarithmic grid, combined with any stride.
    #[serde(default)]
    pub per_decade: u32,
    /// Record wall-clock time (breaks byte-identical reruns).
    #[serde(default)]
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: InstanceSpec,
    pub method: MethodSpec,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub log: LogSection,
}

impl ExperimentConfig {
    /// Parses JSON; diagnostics carry `origin`, line and column.
    pub fn parse(text: &str, origin: &str) -> Result<Self, BenchError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| BenchError::Config {
            origin: origin.to_string(),
            line: e.line(),
            column: e.column(),
            // serde appends its own " at line L column C"
            msg: {
                let full = e.to_string();
                full.rsplit_once(" at line ").map_or_else(|| full.clone(), |(head, _)| head.to_string())
            },
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Range and compatibility checks that do not need the instance.
    pub fn validate(&self) -> Result<(), BenchError> {
        let r = &self.run;
        let bad = |m: &str| Err(BenchError::Invalid(m.to_string()));
        if !(0.0..=1.0).contains(&r.beta) {
            return bad("run.beta must lie in [0, 1]");
        }
        if !(r.sigma > 0.0 && r.sigma < 1.0) {
            return bad("run.sigma must lie in (0, 1)");
        }
        if !(r.delta >= 0.0) {
            return bad("run.delta must be non-negative");
        }
        for (name, v) in [("theta", r.theta), ("d", r.d), ("epsilon", r.epsilon)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(BenchError::Invalid(format!("run.{name} must be positive")));
                }
            }
        }
        let sparse = matches!(self.problem, InstanceSpec::LeastSquares { .. });
        let ridge = matches!(self.problem, InstanceSpec::Ridge { .. });
        match &self.method {
            MethodSpec::AcrcdPrime { .. } | MethodSpec::AcrcdStarPrime { .. } if !sparse => {
                bad("lazy methods need a least_squares instance")
            }
            MethodSpec::Vr { .. } if !ridge => bad("the vr method needs a ridge instance"),
            m if ridge && !matches!(m, MethodSpec::Vr { .. }) => bad("ridge instances run only with the vr method"),
            MethodSpec::AcrcdStar { iterations: 0, .. }
            | MethodSpec::AcrcdStarPrime { iterations: 0 }
            | MethodSpec::Agd { iterations: 0, .. } => bad("method.iterations must be at least 1"),
            _ => Ok(()),
        }
    }
}

/// Parses `a..b` (half-open) into the seed list `a, …, b−1`.
pub fn parse_seed_range(text: &str) -> Result<Vec<u64>, BenchError> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| BenchError::Invalid(format!("seed range {text:?} is not of the form a..b")))?;
    let parse = |s: &str| {
        s.trim().parse::<u64>().map_err(|e| BenchError::Invalid(format!("seed range {text:?}: {e}")))
    };
    let (a, b) = (parse(a)?, parse(b)?);
    if b < a {
        return Err(BenchError::Invalid(format!("seed range {text:?} is decreasing")));
    }
    Ok((a..b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "problem": {"kind": "example2", "n": 8, "seed": 1},
        "method": {"name": "acrcd_star", "iterations": 100}
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::parse(MINIMAL, "inline").unwrap();
        assert_eq!(c.run, RunSection::default());
        assert!(c.seeds.is_empty());
        assert_eq!(
            c.method,
            MethodSpec::AcrcdStar { iterations: 100, schedule: StarSchedule::Simple, stop_gap: None, stop_every: 100 }
        );
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let text = MINIMAL.replace("\"seed\": 1}", "\"seed\": 1, \"colour\": 3}");
        match ExperimentConfig::parse(&text, "x.json") {
            Err(BenchError::Config { line, msg, .. }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("colour"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
        let text = MINIMAL.replace("\"iterations\": 100", "\"iterations\": 100, \"speed\": 1");
        assert!(ExperimentConfig::parse(&text, "x.json").is_err());
    }

    #[test]
    fn method_instance_compatibility() {
        let text = MINIMAL.replace(r#""name": "acrcd_star", "iterations": 100"#, r#""name": "acrcd_star_prime", "iterations": 5"#);
        assert!(matches!(ExperimentConfig::parse(&text, "x"), Err(BenchError::Invalid(_))));
        let text = MINIMAL.replace(r#""name": "acrcd_star", "iterations": 100"#, r#""name": "vr""#);
        assert!(ExperimentConfig::parse(&text, "x").is_err());
    }

    #[test]
    fn seed_ranges() {
        assert_eq!(parse_seed_range("3..6").unwrap(), vec![3, 4, 5]);
        assert!(parse_seed_range("4..4").unwrap().is_empty());
        assert!(parse_seed_range("5..2").is_err());
        assert!(parse_seed_range("7").is_err());
    }
}
