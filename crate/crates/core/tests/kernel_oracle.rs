//! Momentum-space kernel: limits, symmetry and agreement with the grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use pulsed_mirror::error::Error;
use pulsed_mirror::estimators::{nrefl_lowest_order, nrefl_third_order};
use pulsed_mirror::kernel::{
    kernel_I, kernel_i, kernel_linear, nrefl_exact, nrefl_linear_regime, KernelParams,
    QuadratureSpec, Spectrum,
};
use pulsed_mirror::pulse::{gaussian_reflection, prepare_incident, right_moving_edge, PulseConfig};
use pulsed_mirror::scan::fit_line;
use pulsed_mirror::units::AtomSpec;
use pulsed_mirror::wavepacket::{apply_spectral, to_momentum, FftPair, GaussianPacket};

fn fig3() -> (GaussianPacket, AtomSpec) {
    (
        GaussianPacket::new(-0.66e-6, 0.011, 0.1e-6).unwrap(),
        AtomSpec::cesium(),
    )
}

fn fig5() -> (GaussianPacket, AtomSpec) {
    (
        GaussianPacket::new(-12e-3, 0.25, 1.6e-6).unwrap(),
        AtomSpec::cesium(),
    )
}

fn exact(p: &GaussianPacket, a: &AtomSpec, t: f64, tau: f64, x_m: f64) -> f64 {
    let spectrum = Spectrum::Gaussian {
        packet: p,
        atom: a,
        t,
        x_m,
        edge: right_moving_edge(p),
    };
    nrefl_exact(
        spectrum,
        KernelParams::from_tau(tau, a).unwrap(),
        &QuadratureSpec::default(),
    )
    .unwrap()
    .value
}

#[test]
fn no_pulse_no_kernel() {
    for (k1, k2) in [(0.3, 1.7), (2.0, 2.0), (-1.0, 4.0)] {
        assert_eq!(kernel_i(k1, k2, 0.0), Complex64::new(0.0, 0.0));
        assert_eq!(
            kernel_I(k1 * 1e7, k2 * 1e7, KernelParams::new(0.0).unwrap()).norm(),
            0.0
        );
    }
    let (p, a) = fig3();
    let spectrum = Spectrum::Gaussian {
        packet: &p,
        atom: &a,
        t: 60e-6,
        x_m: 0.0,
        edge: right_moving_edge(&p),
    };
    let r = nrefl_exact(
        spectrum,
        KernelParams::new(0.0).unwrap(),
        &QuadratureSpec::default(),
    )
    .unwrap();
    assert_eq!(r.value, 0.0);
}

#[test]
fn diagonal_is_the_limit_of_nearby_pairs() {
    for (k, alpha) in [(1.3, 0.7), (0.4, 2.5), (3.0, 0.05)] {
        let at = |eps: f64| kernel_i(k, k + eps * k, alpha);
        let diag = kernel_i(k, k, alpha);
        // first-order Richardson in ε over ε = 1e-4 k, 1e-5 k, 1e-6 k
        let r1 = (at(1e-5) * 10.0 - at(1e-4)) / 9.0;
        let r2 = (at(1e-6) * 10.0 - at(1e-5)) / 9.0;
        let limit = (r2 * 10.0 - r1) / 9.0;
        let rel = (limit - diag).norm() / diag.norm();
        assert!(rel < 1e-8, "k={k} alpha={alpha}: {rel:e}");
    }
}

#[test]
fn grid_and_kernel_agree_at_one_microsecond() {
    let (p, a) = fig3();
    let pulse = PulseConfig::new(60e-6, 1e-6, 0.0, &a).unwrap();
    let g = gaussian_reflection(&p, &a, &pulse).unwrap().value;
    let k = exact(&p, &a, 60e-6, 1e-6, 0.0);
    assert!((g / k - 1.0).abs() < 1e-3, "{g} vs {k}");
}

#[test]
fn sampled_spectrum_matches_the_closed_form() {
    let (p, a) = fig3();
    let tau = 1e-6;
    let pulse = PulseConfig::new(60e-6, tau, 0.0, &a).unwrap();
    let mut st = prepare_incident(&p, &a, &pulse).unwrap();
    // the grid state is taken at T − τ/2; the kernel wants the spectrum at T
    let c = 0.25 * a.hbar_over_m() * tau;
    let fft = FftPair::new(st.n());
    apply_spectral(&mut st, &fft, |k| Complex64::from_polar(1.0, -c * k * k));
    let m = to_momentum(&st);
    let params = KernelParams::from_tau(tau, &a).unwrap();
    let s = nrefl_exact(Spectrum::Sampled(&m), params, &QuadratureSpec::default()).unwrap();
    let k = exact(&p, &a, 60e-6, tau, 0.0);
    assert!((s.value / k - 1.0).abs() < 1e-3, "{} vs {k}", s.value);
}

#[test]
fn short_pulses_approach_the_square_root_law() {
    let (p, a) = fig3();
    let tau = 0.01e-6;
    let rho = p.density(0.0, 60e-6, &a);
    let ratio = exact(&p, &a, 60e-6, tau, 0.0) / nrefl_lowest_order(rho, tau, &a).unwrap();
    assert!((0.99..=1.01).contains(&ratio), "{ratio}");

    // exponent over three decades, monotone in τ
    let taus: Vec<f64> = (0..=8).map(|i| 1e-9 * 10f64.powf(i as f64 / 4.0)).collect();
    let n: Vec<f64> = taus.iter().map(|&t| exact(&p, &a, 60e-6, t, 0.0)).collect();
    assert!(n.windows(2).all(|w| w[1] > w[0]));
    let lx: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = n.iter().map(|v| v.ln()).collect();
    let (slope, _, _) = fit_line(&lx, &ly);
    assert!((slope - 0.5).abs() < 0.02, "{slope}");
}

#[test]
fn first_correction_matches_the_third_order_term() {
    let (p, a) = fig3();
    let t = 60e-6;
    let psi = p.psi(0.0, t, &a);
    let psi_dd = p.psi_second_derivative(0.0, t, &a);
    let tau = 1e-6;
    let n9 = nrefl_lowest_order(psi.norm_sqr(), tau, &a).unwrap();
    let n11 = nrefl_third_order(psi, psi_dd, tau, &a).unwrap().value;
    let measured = exact(&p, &a, t, tau, 0.0) / n9 - 1.0;
    let predicted = n11 / n9 - 1.0;
    assert!(
        (measured / predicted - 1.0).abs() < 0.1,
        "{measured} vs {predicted}"
    );

    // ratio r(τ) = N/N9 through τ = 0.1, 0.2, 0.4 μs: quadratic through the
    // three points gives r(0) and r'(0)
    let taus = [0.1e-6, 0.2e-6, 0.4e-6];
    let r: Vec<f64> = taus
        .iter()
        .map(|&tau| {
            exact(&p, &a, t, tau, 0.0) / nrefl_lowest_order(psi.norm_sqr(), tau, &a).unwrap()
        })
        .collect();
    let h = taus[0];
    // r = c + b τ + d τ² with τ = h, 2h, 4h
    let d = (r[2] - 3.0 * r[1] + 2.0 * r[0]) / (6.0 * h * h);
    let b = (r[1] - r[0]) / h - 3.0 * d * h;
    let c = r[0] - b * h - d * h * h;
    let slope = -a.hbar_over_m() / 6.0 * (psi.conj() * psi_dd).re / psi.norm_sqr();
    assert!((c - 1.0).abs() < 2e-3, "{c}");
    assert!((b / slope - 1.0).abs() < 0.1, "{b} vs {slope}");
}

#[test]
fn linear_regime_at_ten_microseconds() {
    let (p, a) = fig5();
    let t = 50e-3;
    let x = p.mean_at(t);
    let lr = nrefl_linear_regime(&p, &a, t, 10e-6, x);
    assert!(
        (lr.sqrt_alpha_k0 - 25.6).abs() < 0.5,
        "{}",
        lr.sqrt_alpha_k0
    );
    assert!((lr.alpha_k0_dk - 0.39).abs() < 0.01, "{}", lr.alpha_k0_dk);
    let k = exact(&p, &a, t, 10e-6, x);
    assert!((lr.value / k - 1.0).abs() < 0.05, "{} vs {k}", lr.value);
    assert_eq!(nrefl_linear_regime(&p, &a, t, 0.0, x).value, 0.0);
}

#[test]
fn linear_kernel_is_the_large_alpha_limit() {
    // away from the diagonal the erf terms saturate
    let alpha = 400.0;
    for (k1, k2) in [(1.0, 1.02), (1.5, 1.49), (0.8, 0.83)] {
        let full = kernel_i(k1, k2, alpha);
        let lin = kernel_linear(k1, k2, alpha);
        let scale = alpha / (2.0 * PI) * (k1 + k2);
        assert!((full.re - lin).abs() < 0.05 * scale, "{full} vs {lin}");
    }
}

#[test]
fn unconverged_quadrature_reports_the_last_two_values() {
    let (p, a) = fig3();
    let spectrum = Spectrum::Gaussian {
        packet: &p,
        atom: &a,
        t: 60e-6,
        x_m: 0.0,
        edge: right_moving_edge(&p),
    };
    let quad = QuadratureSpec {
        tolerance: 1e-17,
        max_doublings: 1,
        ..QuadratureSpec::default()
    };
    match nrefl_exact(spectrum, KernelParams::from_tau(1e-6, &a).unwrap(), &quad) {
        Err(Error::NotConverged { previous, last }) => {
            assert!(previous > 0.0 && last > 0.0);
            assert!((previous / last - 1.0).abs() < 1e-2);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

proptest! {
    #[test]
    fn kernel_is_hermitian(k1 in -15.0f64..15.0, k2 in -15.0f64..15.0, log_alpha in -3.0f64..1.5) {
        let alpha = 10f64.powf(log_alpha);
        let a = kernel_i(k1, k2, alpha);
        let b = kernel_i(k2, k1, alpha);
        prop_assert!((b - a.conj()).norm() <= 1e-12 * a.norm().max(1e-300));
    }

    #[test]
    fn scaled_kernel_matches_internal_units(k1 in 0.5f64..3.0, k2 in 0.5f64..3.0, log_alpha in -2.0f64..0.5) {
        // I(k1, k2; α) with k in 1/m equals √α i(√α k1, √α k2; 1)
        let alpha = 10f64.powf(log_alpha) * 1e-14;
        let l = alpha.sqrt();
        let si = kernel_I(k1 / l, k2 / l, KernelParams::new(alpha).unwrap());
        let internal = kernel_i(k1, k2, 1.0) * l;
        prop_assert!((si - internal).norm() <= 1e-12 * internal.norm());
    }
}
