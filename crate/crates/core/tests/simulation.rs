use histci::distributions::{BinningPolicy, Distribution};
use histci::sim::{coverage_curve, run_cell, CurveSpec, SimCell};
use histci::{EstimatorOptions, Method};

#[test]
fn singh_maddala_linear_curve() {
    let spec = CurveSpec {
        distribution: Distribution::singh_maddala_income(),
        n: 500,
        method: Method::LinearInterpolation,
        binning: BinningPolicy::default(),
        level: 0.95,
        reps: 200,
        seed: 4,
        grid: 20,
        options: EstimatorOptions::for_simulation(),
    };
    let points = coverage_curve(&spec).unwrap();
    assert_eq!(points.len(), 20);
    for pt in points.iter().filter(|pt| (0.2..=0.8).contains(&pt.p)) {
        let c = pt.coverage.unwrap();
        assert!(c >= 0.9, "p = {}: coverage {c}", pt.p);
    }
}

#[test]
fn exponential_five_bins_histogram_undercovers() {
    let cell = SimCell {
        distribution: Distribution::Exponential { rate: 1.0 },
        n: 500,
        p: 0.5,
        method: Method::Histogram,
        binning: BinningPolicy::fixed_count(5),
        level: 0.95,
        reps: 300,
        seed: 17,
        options: EstimatorOptions::for_simulation(),
    };
    let r = run_cell(&cell).unwrap();
    assert!(r.coverage < 0.2, "{r:?}");
    assert_eq!(r.failures, 0);
    let li = run_cell(&SimCell {
        method: Method::LinearInterpolation,
        ..cell
    })
    .unwrap();
    assert!(li.coverage >= 0.9, "{li:?}");
}
