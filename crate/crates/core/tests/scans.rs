//! Scan engine and density estimators.

use proptest::prelude::*;
use pulsed_mirror::error::Error;
use pulsed_mirror::estimators::{
    invert_lowest_order, normalize_scan, nrefl_third_order, sqrt_law_factor, trapezoid,
    validity_time, EstimateMethod,
};
use pulsed_mirror::scan::{
    csv_string, linspace, run_linear_regime_sweep, run_position_scan, run_tau_scan,
    ExperimentPreset, Method, ScanOptions, CSV_COLUMNS,
};

fn methods(m: &[Method]) -> std::collections::BTreeSet<Method> {
    m.iter().copied().collect()
}

#[test]
fn tau_scan_table_shape() {
    let r = run_tau_scan(&ExperimentPreset::fig3(), &ScanOptions { workers: 2 }).unwrap();
    assert_eq!(r.len(), 40);
    let csv = csv_string(&r);
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# preset=fig3 axis=tau"));
    assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 40);
    assert!(rows
        .iter()
        .all(|l| l.split(',').count() == CSV_COLUMNS.len()));
    // exact methods agree; third order beats lowest order at the longest pulse
    assert!(r.method_disagreement().unwrap() < 1e-3);
    let k = r.column(Method::Kernel).unwrap();
    let e9 = r.column(Method::Eq9).unwrap();
    let e11 = r.column(Method::Eq11).unwrap();
    assert!((e11[39] - k[39]).abs() < (e9[39] - k[39]).abs());
}

#[test]
fn outputs_do_not_depend_on_the_worker_count() {
    let mut p = ExperimentPreset::fig4();
    p.methods = methods(&[Method::Grid, Method::Kernel, Method::Eq9]);
    let a = csv_string(&run_position_scan(&p, 1e-6, &ScanOptions { workers: 1 }).unwrap());
    let b = csv_string(&run_position_scan(&p, 1e-6, &ScanOptions { workers: 4 }).unwrap());
    let c = csv_string(&run_position_scan(&p, 1e-6, &ScanOptions { workers: 3 }).unwrap());
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn density_recovery_on_the_slow_packet() {
    let r = run_position_scan(&ExperimentPreset::fig4(), 1e-6, &ScanOptions::default()).unwrap();
    let e = r.estimate.as_ref().unwrap();
    assert_eq!(e.method, EstimateMethod::NormalizedSqrt);
    assert_eq!(r.estimate_source, Some(Method::Kernel));
    assert!((e.integral() - 1.0).abs() < 1e-12);
    let peak = r.density_true.iter().copied().fold(0.0, f64::max);
    let dev = e
        .values
        .iter()
        .zip(&r.density_true)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(dev < 0.01 * peak, "{}", dev / peak);
}

#[test]
fn long_pulse_estimate_is_normalized_and_flagged_linear() {
    let r = run_position_scan(&ExperimentPreset::fig5(), 30e-6, &ScanOptions::default()).unwrap();
    let e = r.estimate.as_ref().unwrap();
    assert_eq!(e.method, EstimateMethod::NormalizedLinear);
    assert!((e.integral() - 1.0).abs() < 1e-6);
    assert!(r.n_grid.is_none());
}

#[test]
fn scan_without_support_is_a_coverage_error() {
    let mut p = ExperimentPreset::fig3();
    p.xm_list = linspace(5e-6, 6e-6, 21);
    p.methods = methods(&[Method::Eq9]);
    let e = run_position_scan(&p, 1e-6, &ScanOptions::default()).unwrap_err();
    assert!(matches!(e.root(), Error::Coverage(_)), "{e}");

    // scan cut off on one side of the packet
    p.xm_list = linspace(-0.9e-6, 0.0, 41);
    let e = run_position_scan(&p, 1e-6, &ScanOptions::default()).unwrap_err();
    assert!(e.to_string().contains("endpoints"), "{e}");
}

#[test]
fn regime_discrimination() {
    let fig5 = run_linear_regime_sweep(&ExperimentPreset::fig5(), &ScanOptions::default()).unwrap();
    let f = fig5.fit.unwrap();
    assert!(f.r_squared > 0.999, "{}", f.r_squared);
    assert!(f.r_squared > f.sqrt_r_squared);

    let mut p = ExperimentPreset::fig3();
    p.methods = methods(&[Method::Kernel]);
    p.tau_list = linspace(0.01e-6, 0.2e-6, 12);
    let slow = run_linear_regime_sweep(&p, &ScanOptions::default()).unwrap();
    let f = slow.fit.unwrap();
    assert!(
        f.sqrt_r_squared > f.r_squared,
        "{} vs {}",
        f.sqrt_r_squared,
        f.r_squared
    );
}

#[test]
fn too_short_sweeps_are_rejected() {
    let mut p = ExperimentPreset::fig5();
    p.tau_list = vec![5e-6, 10e-6];
    p.methods = methods(&[Method::Eq9]);
    assert!(matches!(
        run_linear_regime_sweep(&p, &ScanOptions::default()),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn validity_time_tracks_the_correction() {
    let p = ExperimentPreset::fig3();
    let psi = p.packet.psi(0.0, p.t_center, &p.atom);
    let dd = p.packet.psi_second_derivative(0.0, p.t_center, &p.atom);
    let ts = validity_time(psi, dd, &p.atom);
    // the correction term relative to |ψ|² is bounded by τ/τ*
    let tau = 0.1 * ts;
    let t = nrefl_third_order(psi, dd, tau, &p.atom).unwrap();
    let rel = (t.bracket / psi.norm_sqr() - 1.0).abs();
    assert!(rel <= 0.1 + 1e-12, "{rel}");
    let r = run_tau_scan(&p, &ScanOptions::default()).unwrap();
    let last = r.len() - 1;
    assert!((r.tau_over_tau_star[last] - r.axis_values[last] / ts).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalized_scans_integrate_to_one(
        center in -1.0f64..1.0,
        width in 0.2f64..0.6,
        scale in 1e-6f64..1e3,
        n in 30usize..120,
    ) {
        let x = linspace(-5.0, 5.0, n);
        let y: Vec<f64> = x.iter().map(|v| scale * (-(v - center).powi(2) / (2.0 * width * width)).exp()).collect();
        let e = normalize_scan(&x, &y, EstimateMethod::NormalizedSqrt, 1e-6, 0.0).unwrap();
        prop_assert!((e.integral() - 1.0).abs() < 1e-12);
        // scale free
        let y2: Vec<f64> = y.iter().map(|v| v * 7.5).collect();
        let e2 = normalize_scan(&x, &y2, EstimateMethod::NormalizedSqrt, 1e-6, 0.0).unwrap();
        for (a, b) in e.values.iter().zip(&e2.values) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn lowest_order_inverts_exactly(rho in 0.0f64..1e7, tau in 1e-9f64..1e-5) {
        let atom = pulsed_mirror::units::AtomSpec::cesium();
        let f = sqrt_law_factor(tau, &atom);
        let x = [0.0, 1.0];
        let e = invert_lowest_order(&x, &[f * rho, 0.0], tau, 0.0, &atom).unwrap();
        prop_assert!((e.values[0] - rho).abs() <= 1e-12 * rho.max(1e-300));
        prop_assert_eq!(trapezoid(&x, &[2.0, 2.0]), 2.0);
    }
}
