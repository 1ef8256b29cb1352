//! The ten acceptance criteria, one test each. Every test prints a single
//! PASS/FAIL line; tolerances are the constants in `bpblab_core::demo`.

use bpblab_core::demo::{
    run_criterion, CriterionReport, TOL_CLOSED_FORM, TOL_EPS0_REFINE, TOL_HILBERT_SPLIT, TOL_NORM, TOL_POINT,
    TOL_SQRT2, TOL_TILT,
};
use bpblab_core::operators::op_norm;
use bpblab_core::{OperatorMatrix, SpaceSpec};

const SEED: u64 = 20_240_917;

fn report(id: u8) -> CriterionReport {
    let r = run_criterion(id, SEED);
    println!(
        "criterion {:>2} [{}] {}: {} ({} ms)",
        r.id,
        if r.passed { "PASS" } else { "FAIL" },
        r.name,
        r.detail,
        r.elapsed_ms.unwrap_or(0)
    );
    r
}

#[test]
fn tolerances_are_pinned() {
    assert_eq!(TOL_NORM, 1e-9);
    assert_eq!(TOL_CLOSED_FORM, 1e-8);
    assert_eq!(TOL_POINT, 1e-6);
    assert_eq!(TOL_EPS0_REFINE, 1e-4);
    assert_eq!(TOL_TILT, 1e-10);
    assert_eq!(TOL_HILBERT_SPLIT, 1e-9);
    assert_eq!(TOL_SQRT2, 1e-9);
}

#[test]
fn criterion_01_census() {
    assert!(report(1).passed);
}

#[test]
fn criterion_02_clarkson() {
    assert!(report(2).passed);
    // independent oracle: dense angular scan of ‖Tx‖₄ / ‖x‖₄
    let l4 = |x: f64, y: f64| (x.powi(4) + y.powi(4)).powf(0.25);
    let best = (0..200_000)
        .map(|k| {
            let a = std::f64::consts::PI * k as f64 / 200_000.0;
            let (x, y) = (a.cos(), a.sin());
            l4(x + y, x - y) / l4(x, y)
        })
        .fold(0.0, f64::max);
    let t = OperatorMatrix::on(SpaceSpec::lp(4, 2), vec![vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
    assert!((op_norm(&t).unwrap().value - best).abs() < 1e-8);
}

#[test]
fn criterion_03_isometry_constants() {
    assert!(report(3).passed);
}

#[test]
fn criterion_04_constructor_contracts() {
    assert!(report(4).passed);
}

#[test]
fn criterion_05_certificates() {
    assert!(report(5).passed);
}

#[test]
fn criterion_06_hilbert_iff() {
    assert!(report(6).passed);
}

#[test]
fn criterion_07_rigidity() {
    assert!(report(7).passed);
}

#[test]
fn criterion_08_property_p() {
    assert!(report(8).passed);
}

#[test]
fn criterion_09_sbpbp_family() {
    assert!(report(9).passed);
}

#[test]
fn criterion_10_hilbert_necessary() {
    assert!(report(10).passed);
}
