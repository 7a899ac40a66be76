//! Method-versus-method comparisons through the configuration layer.

use acrcd_bench::experiment::{compare, run_all, Prepared};
use acrcd_bench::ExperimentConfig;

fn prepared(text: &str) -> Prepared {
    Prepared::new(ExperimentConfig::parse(text, "compare-test").unwrap()).unwrap()
}

#[test]
fn coordinate_method_beats_full_gradient_on_example2() {
    let agd = prepared(
        r#"{"problem": {"kind": "example2", "n": 512, "seed": 1},
            "method": {"name": "agd", "iterations": 200000, "stop_gap": 1e-6, "stop_every": 20},
            "run": {"beta": 0.5},
            "log": {"stride": 20}}"#,
    );
    let star = prepared(
        r#"{"problem": {"kind": "example2", "n": 512, "seed": 1},
            "method": {"name": "acrcd_star", "iterations": 100000000, "stop_gap": 1e-6, "stop_every": 10240},
            "run": {"beta": 0.5},
            "log": {"stride": 10240}}"#,
    );
    // logging granularity is 20·n calls for both, far below the counts compared
    let rows = compare(&agd, &star, &[0, 1, 2], 3).unwrap();
    for r in &rows {
        eprintln!("{:e}: agd {:?} star {:?} ratio {:?}", r.threshold, r.median_a, r.median_b, r.ratio);
    }
    let last = rows.iter().find(|r| r.threshold == 1e-6).unwrap();
    let ratio = last.ratio.expect("both methods reach 1e-6");
    assert!(ratio <= 1.0 / 3.0, "coordinate/full-gradient call ratio {ratio}");
}

#[test]
fn sparse_and_dense_engines_share_gaps_not_touches() {
    let problem = r#""problem": {"kind": "least_squares", "m": 50, "n": 200, "density": 0.05, "seed": 4}"#;
    let dense = prepared(&format!(
        r#"{{{problem}, "method": {{"name": "acrcd_star", "iterations": 4000}}, "log": {{"stride": 200}}}}"#
    ));
    let lazy = prepared(&format!(
        r#"{{{problem}, "method": {{"name": "acrcd_star_prime", "iterations": 4000}}, "log": {{"stride": 200}}}}"#
    ));
    let a = run_all(&dense, &[7], 1).unwrap();
    let b = run_all(&lazy, &[7], 1).unwrap();
    assert_eq!(a[0].records.len(), b[0].records.len());
    for (x, y) in a[0].records.iter().zip(&b[0].records) {
        assert_eq!(x.iteration, y.iteration);
        assert!((x.objective - y.objective).abs() <= 1e-9 * (1.0 + x.objective.abs()), "{x:?} vs {y:?}");
    }
    let (ta, tb) = (a[0].summary.touches, b[0].summary.touches);
    assert_ne!(ta, tb);
    let rows = compare(&dense, &lazy, &[7, 8, 9], 1).unwrap();
    assert!(rows.iter().filter(|r| r.ratio.is_some()).all(|r| r.ratio == Some(1.0)));
}
