//! Analytic approximations to the reflection probability and the
//! normalized density estimate built from a mirror-position scan.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{AtomSpec, HBAR};
use crate::wavepacket::pairwise_sum;

/// How a [`DensityEstimate`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMethod {
    /// N / (2√(ħτ/πm)), not normalized.
    LowestOrder,
    /// N / ∫N for scans in the √τ regime.
    NormalizedSqrt,
    /// N / ∫N for scans in the linear regime.
    NormalizedLinear,
}

impl EstimateMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimateMethod::LowestOrder => "lowest-order",
            EstimateMethod::NormalizedSqrt => "normalized-sqrt",
            EstimateMethod::NormalizedLinear => "normalized-linear",
        }
    }
}

/// Position density reconstructed from reflection probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    /// Mirror positions, m.
    pub positions: Vec<f64>,
    /// Density, 1/m.
    pub values: Vec<f64>,
    pub method: EstimateMethod,
    pub tau: f64,
    pub t_center: f64,
}

impl DensityEstimate {
    /// Trapezoid integral over the positions.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.positions, &self.values)
    }
}

/// Trapezoid rule on a (possibly non-uniform) abscissa.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    let parts: Vec<f64> = x
        .windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .collect();
    pairwise_sum(&parts)
}

/// 2√(ħτ/πm), the factor between density and reflection probability at
/// lowest order, in m.
pub fn sqrt_law_factor(tau: f64, atom: &AtomSpec) -> f64 {
    2.0 * (HBAR * tau / (PI * atom.mass)).sqrt()
}

/// Lowest-order reflection probability 2√(ħτ/πm)|ψ_T(x_M)|².
pub fn nrefl_lowest_order(density_at_xm: f64, tau: f64, atom: &AtomSpec) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tau must be positive, got {tau}"
        )));
    }
    Ok(sqrt_law_factor(tau, atom) * density_at_xm)
}

/// Reflection probability including the first correction in τ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThirdOrder {
    pub value: f64,
    /// |ψ|² − (ħτ/6m) Re(ψ̄ ψ″), 1/m.
    pub bracket: f64,
    /// Set when the bracket is negative; the value is still returned.
    pub out_of_regime: bool,
}

pub fn nrefl_third_order(
    psi: Complex64,
    psi_dd: Complex64,
    tau: f64,
    atom: &AtomSpec,
) -> Result<ThirdOrder> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tau must be positive, got {tau}"
        )));
    }
    let corr = atom.hbar_over_m() * tau / 6.0 * (psi.conj() * psi_dd).re;
    let bracket = psi.norm_sqr() - corr;
    Ok(ThirdOrder {
        value: sqrt_law_factor(tau, atom) * bracket,
        bracket,
        out_of_regime: bracket < 0.0,
    })
}

/// τ* = 6m|ψ|/(ħ|ψ″|); the lowest-order law needs τ ≪ τ*.
pub fn validity_time(psi: Complex64, psi_dd: Complex64, atom: &AtomSpec) -> f64 {
    6.0 * psi.norm() / (atom.hbar_over_m() * psi_dd.norm())
}

/// Divides raw reflection probabilities by 2√(ħτ/πm).
pub fn invert_lowest_order(
    positions: &[f64],
    n_refl: &[f64],
    tau: f64,
    t_center: f64,
    atom: &AtomSpec,
) -> Result<DensityEstimate> {
    let f = sqrt_law_factor(tau, atom);
    check_pairs(positions, n_refl, 1)?;
    Ok(DensityEstimate {
        positions: positions.to_vec(),
        values: n_refl.iter().map(|n| n / f).collect(),
        method: EstimateMethod::LowestOrder,
        tau,
        t_center,
    })
}

/// Smallest scan accepted by [`normalize_scan`].
pub const MIN_SCAN_POSITIONS: usize = 8;
/// Largest endpoint value allowed, relative to the scan maximum.
pub const ENDPOINT_FRACTION: f64 = 1e-3;

fn check_pairs(positions: &[f64], values: &[f64], min: usize) -> Result<()> {
    if positions.len() != values.len() {
        return Err(Error::InvalidParameter(format!(
            "{} positions but {} values",
            positions.len(),
            values.len()
        )));
    }
    if positions.len() < min {
        return Err(Error::Coverage(format!(
            "need at least {min} positions, got {}",
            positions.len()
        )));
    }
    if positions.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "positions must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Normalizes a position scan by its trapezoid integral.
///
/// Values below zero by no more than 1e-9 of the maximum are quadrature
/// round-off and are set to zero; larger negatives are rejected.
pub fn normalize_scan(
    positions: &[f64],
    n_refl: &[f64],
    method: EstimateMethod,
    tau: f64,
    t_center: f64,
) -> Result<DensityEstimate> {
    check_pairs(positions, n_refl, MIN_SCAN_POSITIONS)?;
    let max = n_refl.iter().fold(0.0f64, |m, &v| m.max(v));
    if !(max > 0.0) || !max.is_finite() {
        return Err(Error::Coverage(
            "scan carries no reflection probability".into(),
        ));
    }
    if let Some((i, v)) = n_refl.iter().enumerate().find(|(_, &v)| v < -1e-9 * max) {
        return Err(Error::InvalidParameter(format!(
            "negative reflection probability {v:.3e} at position {i}"
        )));
    }
    let first = n_refl[0] / max;
    let last = n_refl[n_refl.len() - 1] / max;
    if first >= ENDPOINT_FRACTION || last >= ENDPOINT_FRACTION {
        return Err(Error::Coverage(format!(
            "scan endpoints carry {first:.3e} and {last:.3e} of the maximum, limit {ENDPOINT_FRACTION:e}"
        )));
    }
    let clean: Vec<f64> = n_refl.iter().map(|&v| v.max(0.0)).collect();
    let norm = trapezoid(positions, &clean);
    Ok(DensityEstimate {
        positions: positions.to_vec(),
        values: clean.iter().map(|v| v / norm).collect(),
        method,
        tau,
        t_center,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavepacket::GaussianPacket;

    fn fig3() -> (GaussianPacket, AtomSpec) {
        (
            GaussianPacket::new(-0.66e-6, 0.011, 0.1e-6).unwrap(),
            AtomSpec::cesium(),
        )
    }

    #[test]
    fn lowest_order_fig3_value() {
        let (p, a) = fig3();
        let rho = p.density(0.0, 60e-6, &a);
        assert!((rho / 2.282e6 - 1.0).abs() < 2e-3, "{rho}");
        let n = nrefl_lowest_order(rho, 1e-6, &a).unwrap();
        assert!((n / 5.62e-2 - 1.0).abs() < 2e-3, "{n}");
        assert_eq!(nrefl_lowest_order(0.0, 1e-6, &a).unwrap(), 0.0);
        let q = nrefl_lowest_order(rho, 4e-6, &a).unwrap();
        assert!((q / n - 2.0).abs() < 1e-15);
    }

    #[test]
    fn third_order_reduces_without_curvature() {
        let a = AtomSpec::cesium();
        let psi = Complex64::new(1200.0, -300.0);
        let t = nrefl_third_order(psi, Complex64::new(0.0, 0.0), 2e-6, &a).unwrap();
        assert_eq!(
            t.value,
            nrefl_lowest_order(psi.norm_sqr(), 2e-6, &a).unwrap()
        );
        assert!(!t.out_of_regime);
    }

    #[test]
    fn negative_bracket_is_flagged() {
        let a = AtomSpec::cesium();
        let psi = Complex64::new(1.0, 0.0);
        let t = nrefl_third_order(psi, Complex64::new(1e20, 0.0), 1e-3, &a).unwrap();
        assert!(t.out_of_regime && t.value < 0.0);
    }

    #[test]
    fn constant_scan_is_uniform() {
        let x: Vec<f64> = (0..21).map(|i| i as f64 * 0.1).collect();
        let mut n = vec![0.3; 21];
        n[0] = 0.0;
        n[20] = 0.0;
        let e = normalize_scan(&x, &n, EstimateMethod::NormalizedSqrt, 1e-6, 0.0).unwrap();
        assert!((e.integral() - 1.0).abs() < 1e-14);
        assert!((e.values[10] - 1.0 / 1.9).abs() < 1e-14);
    }

    #[test]
    fn coverage_and_size_errors() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let n = vec![1.0; 10];
        assert!(matches!(
            normalize_scan(&x, &n, EstimateMethod::NormalizedSqrt, 1e-6, 0.0),
            Err(Error::Coverage(_))
        ));
        assert!(matches!(
            normalize_scan(&x[..5], &n[..5], EstimateMethod::NormalizedSqrt, 1e-6, 0.0),
            Err(Error::Coverage(_))
        ));
        assert!(matches!(
            normalize_scan(&x, &[0.0; 10], EstimateMethod::NormalizedSqrt, 1e-6, 0.0),
            Err(Error::Coverage(_))
        ));
    }
}
