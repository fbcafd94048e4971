//! Gaussian packets, grid-sampled states, free propagation and Fourier
//! analysis.
//!
//! Fourier convention: `ψ̃(k) = (2π)^(-1/2) ∫ dx e^(-ikx) ψ(x)`, so that
//! `∫ dk |ψ̃|² = ∫ dx |ψ|²`.

use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{make_scaling, AtomSpec, Scaling};

/// Relative amplitude allowed at the outermost grid nodes.
pub const BOUNDARY_TOLERANCE: f64 = 1e-8;

/// Minimal-uncertainty Gaussian packet prepared at `prepared_at`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPacket {
    /// Mean position at preparation, m.
    pub x0: f64,
    /// Group velocity, m/s.
    pub v0: f64,
    /// Position spread at preparation, m.
    pub delta_x: f64,
    /// Preparation time, s.
    #[serde(default)]
    pub prepared_at: f64,
}

impl GaussianPacket {
    pub fn new(x0: f64, v0: f64, delta_x: f64) -> Result<Self> {
        let p = GaussianPacket {
            x0,
            v0,
            delta_x,
            prepared_at: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_x > 0.0 && self.delta_x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "packet width must be positive, got {}",
                self.delta_x
            )));
        }
        if !(self.v0 > 0.0 && self.v0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "packet must move to the right (v0 > 0), got {}",
                self.v0
            )));
        }
        if !self.x0.is_finite() || !self.prepared_at.is_finite() {
            return Err(Error::InvalidParameter("non-finite packet field".into()));
        }
        Ok(())
    }

    /// Carrier wavenumber m v0 / ħ, 1/m.
    pub fn k0(&self, atom: &AtomSpec) -> f64 {
        atom.wavenumber(self.v0)
    }

    /// Momentum spread 1/(2Δx), 1/m.
    pub fn delta_k(&self) -> f64 {
        0.5 / self.delta_x
    }

    /// Mean position at time t, m.
    pub fn mean_at(&self, t: f64) -> f64 {
        self.x0 + self.v0 * (t - self.prepared_at)
    }

    /// Position spread at time t, m.
    pub fn width_at(&self, t: f64, atom: &AtomSpec) -> f64 {
        let r = atom.hbar_over_m() * (t - self.prepared_at) / (2.0 * self.delta_x * self.delta_x);
        self.delta_x * (1.0 + r * r).sqrt()
    }

    pub fn scaling(&self, atom: &AtomSpec) -> Result<Scaling> {
        make_scaling(self, atom)
    }

    /// The packet in the internal units of `scaling`.
    pub fn internal(&self, scaling: &Scaling) -> InternalGaussian {
        InternalGaussian {
            x0: scaling.length(self.x0),
            k0: scaling.velocity(self.v0),
            width: scaling.length(self.delta_x),
            t0: scaling.time(self.prepared_at),
        }
    }

    fn internal_default(&self, atom: &AtomSpec) -> (InternalGaussian, Scaling) {
        let s = Scaling::new(self.delta_x, atom).expect("validated packet");
        (self.internal(&s), s)
    }

    /// ψ_t(x) in 1/√m.
    pub fn psi(&self, x: f64, t: f64, atom: &AtomSpec) -> Complex64 {
        let (g, s) = self.internal_default(atom);
        g.psi(s.length(x), s.time(t)) / s.length_unit.sqrt()
    }

    /// ∂²ψ_t/∂x² in m^(-5/2).
    pub fn psi_second_derivative(&self, x: f64, t: f64, atom: &AtomSpec) -> Complex64 {
        let (g, s) = self.internal_default(atom);
        g.psi_dd(s.length(x), s.time(t)) / s.length_unit.powf(2.5)
    }

    /// |ψ_t(x)|² in 1/m.
    pub fn density(&self, x: f64, t: f64, atom: &AtomSpec) -> f64 {
        self.psi(x, t, atom).norm_sqr()
    }

    /// ψ̃_t(k) in √m.
    pub fn spectrum(&self, k: f64, t: f64, atom: &AtomSpec) -> Complex64 {
        let (g, s) = self.internal_default(atom);
        g.spectrum(s.wavenumber(k), s.time(t)) * s.length_unit.sqrt()
    }
}

/// Gaussian packet in internal units (ħ = m = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalGaussian {
    pub x0: f64,
    pub k0: f64,
    pub width: f64,
    pub t0: f64,
}

impl InternalGaussian {
    /// Complex variance parameter S = w² + i t/2 and the normalization.
    fn spread(&self, t: f64) -> (Complex64, Complex64) {
        let dt = t - self.t0;
        let w2 = self.width * self.width;
        let q = Complex64::new(1.0, dt / (2.0 * w2));
        let norm = (2.0 * PI * w2).powf(-0.25) / q.sqrt();
        (Complex64::new(w2, dt / 2.0), norm)
    }

    fn exponent(&self, x: f64, t: f64) -> (Complex64, Complex64) {
        let dt = t - self.t0;
        let (s, norm) = self.spread(t);
        let c = self.x0 + self.k0 * dt;
        let u = x - c;
        let g = -u * u / (4.0 * s)
            + Complex64::new(0.0, self.k0 * (x - self.x0) - 0.5 * self.k0 * self.k0 * dt);
        (g, norm)
    }

    pub fn psi(&self, x: f64, t: f64) -> Complex64 {
        let (g, norm) = self.exponent(x, t);
        norm * g.exp()
    }

    pub fn psi_dd(&self, x: f64, t: f64) -> Complex64 {
        let dt = t - self.t0;
        let (s, _) = self.spread(t);
        let u = x - self.x0 - self.k0 * dt;
        let g1 = -u / (2.0 * s) + Complex64::new(0.0, self.k0);
        let g2 = -1.0 / (2.0 * s);
        self.psi(x, t) * (g1 * g1 + g2)
    }

    pub fn spectrum(&self, k: f64, t: f64) -> Complex64 {
        let dk = 0.5 / self.width;
        let amp =
            (2.0 * PI * dk * dk).powf(-0.25) * (-(k - self.k0).powi(2) / (4.0 * dk * dk)).exp();
        let phase = -k * self.x0 - 0.5 * k * k * (t - self.t0);
        amp * Complex64::from_polar(1.0, phase)
    }

    pub fn mean_at(&self, t: f64) -> f64 {
        self.x0 + self.k0 * (t - self.t0)
    }

    pub fn width_at(&self, t: f64) -> f64 {
        let r = (t - self.t0) / (2.0 * self.width * self.width);
        self.width * (1.0 + r * r).sqrt()
    }
}

/// Uniform spatial grid: `x_i = x_min + i dx`, `n` a power of two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub dx: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, dx: f64, n: usize) -> Result<Self> {
        if !n.is_power_of_two() || n < 4 {
            return Err(Error::InvalidParameter(format!(
                "grid size must be a power of two >= 4, got {n}"
            )));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid spacing must be positive, got {dx}"
            )));
        }
        Ok(GridSpec { x_min, dx, n })
    }

    /// Grid of `n` points whose node `n/2` sits exactly at `center`.
    pub fn centered(center: f64, dx: f64, n: usize) -> Result<Self> {
        Self::new(center - (n / 2) as f64 * dx, dx, n)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.n - 1)
    }

    /// Highest wavenumber represented, π/dx.
    pub fn nyquist(&self) -> f64 {
        PI / self.dx
    }
}

/// Complex wavefunction sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub x_min: f64,
    pub dx: f64,
    pub amps: Vec<Complex64>,
    /// Time stamp, s.
    pub t: f64,
}

impl GridState {
    pub fn new(x_min: f64, dx: f64, amps: Vec<Complex64>, t: f64) -> Result<Self> {
        GridSpec::new(x_min, dx, amps.len())?;
        Ok(GridState { x_min, dx, amps, t })
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            x_min: self.x_min,
            dx: self.dx,
            n: self.amps.len(),
        }
    }

    pub fn n(&self) -> usize {
        self.amps.len()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn norm_sqr(&self) -> f64 {
        self.dx * pairwise_sum(&self.amps.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>())
    }

    pub fn max_abs(&self) -> f64 {
        self.amps.iter().fold(0.0f64, |m, a| m.max(a.norm()))
    }

    /// Index of the node at `x`, if `x` lies on a node to within 1e-9 dx.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let f = (x - self.x_min) / self.dx;
        let i = f.round();
        if i < 0.0 || i >= self.n() as f64 || (f - i).abs() > 1e-9 {
            None
        } else {
            Some(i as usize)
        }
    }

    /// Fails when the end nodes carry more than 1e-8 of the peak amplitude.
    pub fn check_boundary(&self) -> Result<()> {
        let m = self.max_abs();
        let edge = self.amps[0].norm().max(self.amps[self.n() - 1].norm());
        if edge > BOUNDARY_TOLERANCE * m {
            return Err(Error::BoundaryOverflow(format!(
                "edge amplitude {:.3e} exceeds {:.0e} of peak {:.3e}",
                edge, BOUNDARY_TOLERANCE, m
            )));
        }
        Ok(())
    }

    pub fn scale(&mut self, f: f64) {
        for a in &mut self.amps {
            *a *= f;
        }
    }
}

/// Sampled momentum-space wavefunction, `k_j = k_min + j dk`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumState {
    pub k_min: f64,
    pub dk: f64,
    pub amps: Vec<Complex64>,
    pub t: f64,
    /// Position of the first node of the grid this spectrum came from.
    pub x_origin: f64,
}

impl MomentumState {
    pub fn n(&self) -> usize {
        self.amps.len()
    }

    pub fn k(&self, j: usize) -> f64 {
        self.k_min + j as f64 * self.dk
    }

    pub fn norm_sqr(&self) -> f64 {
        self.dk * pairwise_sum(&self.amps.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>())
    }

    /// Weight on k < 0 with the k = 0 node counted at half weight.
    pub fn negative_weight(&self) -> f64 {
        let mut w = Vec::with_capacity(self.n() / 2 + 1);
        for (j, a) in self.amps.iter().enumerate() {
            let k = self.k(j);
            if k < -0.5 * self.dk {
                w.push(a.norm_sqr());
            } else if k.abs() <= 0.5 * self.dk {
                w.push(0.5 * a.norm_sqr());
            }
        }
        self.dk * pairwise_sum(&w)
    }
}

/// Forward and inverse FFT plans for one size.
#[derive(Clone)]
pub struct FftPair {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    n: usize,
}

impl FftPair {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPair {
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            n,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
    }

    /// Normalized inverse transform.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
        let s = 1.0 / self.n as f64;
        for a in buf.iter_mut() {
            *a *= s;
        }
    }

    /// Wavenumber of FFT bin `l` (unshifted order) for spacing dx.
    pub fn wavenumber(&self, l: usize, dx: f64) -> f64 {
        let n = self.n as isize;
        let s = if (l as isize) < n / 2 {
            l as isize
        } else {
            l as isize - n
        };
        2.0 * PI * s as f64 / (n as f64 * dx)
    }
}

/// Samples the freely evolved Gaussian at time t on a grid.
pub fn sample_gaussian(
    packet: &GaussianPacket,
    atom: &AtomSpec,
    t: f64,
    grid: &GridSpec,
) -> Result<GridState> {
    packet.validate()?;
    let mean = packet.mean_at(t);
    let width = packet.width_at(t, atom);
    if grid.x_min > mean - 8.0 * width || grid.x_max() < mean + 8.0 * width {
        return Err(Error::Resolution(format!(
            "grid [{:.4e}, {:.4e}] m does not span mean ± 8 widths [{:.4e}, {:.4e}] m",
            grid.x_min,
            grid.x_max(),
            mean - 8.0 * width,
            mean + 8.0 * width
        )));
    }
    let kmax = packet.k0(atom) + 6.0 * packet.delta_k();
    if grid.nyquist() < kmax {
        return Err(Error::Resolution(format!(
            "Nyquist wavenumber {:.4e} 1/m is below k0 + 6Δk = {:.4e} 1/m",
            grid.nyquist(),
            kmax
        )));
    }
    let (g, s) = packet.internal_default(atom);
    let ti = s.time(t);
    let inv = 1.0 / s.length_unit.sqrt();
    let amps = (0..grid.n)
        .map(|i| g.psi(s.length(grid.x(i)), ti) * inv)
        .collect();
    GridState::new(grid.x_min, grid.dx, amps, t)
}

/// Position to momentum representation.
pub fn to_momentum(state: &GridState) -> MomentumState {
    to_momentum_with(state, &FftPair::new(state.n()))
}

pub fn to_momentum_with(state: &GridState, fft: &FftPair) -> MomentumState {
    let n = state.n();
    let mut buf = state.amps.clone();
    fft.forward(&mut buf);
    let dk = 2.0 * PI / (n as f64 * state.dx);
    let k_min = -((n / 2) as f64) * dk;
    let c = state.dx / (2.0 * PI).sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); n];
    for (l, a) in buf.iter().enumerate() {
        let k = fft.wavenumber(l, state.dx);
        let j = (l + n / 2) % n;
        amps[j] = a * c * Complex64::from_polar(1.0, -k * state.x_min);
    }
    MomentumState {
        k_min,
        dk,
        amps,
        t: state.t,
        x_origin: state.x_min,
    }
}

/// Momentum to position representation (inverse of [`to_momentum`]).
pub fn to_position(m: &MomentumState) -> GridState {
    to_position_with(m, &FftPair::new(m.n()))
}

pub fn to_position_with(m: &MomentumState, fft: &FftPair) -> GridState {
    let n = m.n();
    let dx = 2.0 * PI / (n as f64 * m.dk);
    let c = (2.0 * PI).sqrt() / dx;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (j, a) in m.amps.iter().enumerate() {
        let l = (j + n / 2) % n;
        let k = m.k(j);
        buf[l] = a * c * Complex64::from_polar(1.0, k * m.x_origin);
    }
    fft.inverse(&mut buf);
    GridState {
        x_min: m.x_origin,
        dx,
        amps: buf,
        t: m.t,
    }
}

/// Multiplies each FFT bin by `f(k)`.
pub fn apply_spectral(state: &mut GridState, fft: &FftPair, f: impl Fn(f64) -> Complex64) {
    fft.forward(&mut state.amps);
    for (l, a) in state.amps.iter_mut().enumerate() {
        *a *= f(fft.wavenumber(l, state.dx));
    }
    fft.inverse(&mut state.amps);
}

/// Exact free evolution by dt ≥ 0 via the momentum-space phase.
pub fn free_propagate(state: &GridState, dt: f64, atom: &AtomSpec) -> Result<GridState> {
    if !(dt >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dt must be >= 0, got {dt}"
        )));
    }
    let mut out = state.clone();
    if dt > 0.0 {
        let fft = FftPair::new(state.n());
        let c = 0.5 * atom.hbar_over_m() * dt;
        apply_spectral(&mut out, &fft, |k| Complex64::from_polar(1.0, -c * k * k));
    }
    out.t = state.t + dt;
    out.check_boundary()?;
    Ok(out)
}

/// C^∞ step rising from 0 at k ≤ 0 to 1 at k ≥ k_c.
pub fn smooth_step(k: f64, k_c: f64) -> f64 {
    if k <= 0.0 {
        return 0.0;
    }
    if k >= k_c {
        return 1.0;
    }
    let t = k / k_c;
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Removes the k < 0 content of a state with a smooth edge of width `k_c`.
pub fn right_moving_part(state: &GridState, k_c: f64) -> GridState {
    let mut out = state.clone();
    let fft = FftPair::new(state.n());
    apply_spectral(&mut out, &fft, |k| Complex64::new(smooth_step(k, k_c), 0.0));
    out
}

/// Spectral interpolation onto a grid with half the spacing and the same
/// extent.
pub fn refine(state: &GridState) -> GridState {
    refine_shifted(state, 0.0)
}

/// As [`refine`], with the first fine node at `x_min + offset`.
pub fn refine_shifted(state: &GridState, offset: f64) -> GridState {
    let n = state.n();
    let m = to_momentum(state);
    let mut amps = vec![Complex64::new(0.0, 0.0); 2 * n];
    // old bin 0 is the ambiguous Nyquist bin; it is dropped
    for j in 1..n {
        amps[j + n / 2] = m.amps[j];
    }
    let fine = MomentumState {
        k_min: 2.0 * m.k_min,
        dk: m.dk,
        amps,
        t: m.t,
        x_origin: m.x_origin + offset,
    };
    to_position(&fine)
}

/// Norm², mean position and standard deviation of |ψ|².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub norm_sqr: f64,
    pub mean: f64,
    pub spread: f64,
}

pub fn density_moments(state: &GridState) -> Moments {
    let n = state.n();
    let rho: Vec<f64> = state.amps.iter().map(|a| a.norm_sqr()).collect();
    let xc = state.x(n / 2);
    let m0 = pairwise_sum(&rho);
    let m1 = pairwise_sum(
        &(0..n)
            .map(|i| rho[i] * (state.x(i) - xc))
            .collect::<Vec<_>>(),
    );
    let mean_rel = m1 / m0;
    let m2 = pairwise_sum(
        &(0..n)
            .map(|i| rho[i] * (state.x(i) - xc - mean_rel).powi(2))
            .collect::<Vec<_>>(),
    );
    Moments {
        norm_sqr: m0 * state.dx,
        mean: xc + mean_rel,
        spread: (m2 / m0).sqrt(),
    }
}

/// Mean wavenumber from the spectrum, 1/m.
pub fn mean_wavenumber(state: &GridState) -> f64 {
    let m = to_momentum(state);
    let w: Vec<f64> = m.amps.iter().map(|a| a.norm_sqr()).collect();
    let num: Vec<f64> = w.iter().enumerate().map(|(j, v)| v * m.k(j)).collect();
    pairwise_sum(&num) / pairwise_sum(&w)
}

/// Summation with a fixed pairwise tree, independent of thread count.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Complex pairwise summation.
pub fn pairwise_sum_c(v: &[Complex64]) -> Complex64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum_c(a) + pairwise_sum_c(b)
}

/// Tabulated state read from text: the normalized state and the norm² of
/// the file contents before normalization.
#[derive(Debug, Clone)]
pub struct TabulatedState {
    pub state: GridState,
    pub original_norm_sqr: f64,
}

pub const TABULATED_HEADER: &str = "# x_meters re im";

/// Reads a `# x_meters re im` file. Rows must be uniformly spaced; the state
/// is zero padded to a power of two and renormalized.
pub fn load_tabulated(path: &Path, t: f64) -> Result<TabulatedState> {
    let f = std::fs::File::open(path)?;
    read_tabulated(std::io::BufReader::new(f), t)
}

pub fn read_tabulated(reader: impl BufRead, t: f64) -> Result<TabulatedState> {
    let mut xs = Vec::new();
    let mut amps = Vec::new();
    let mut saw_header = false;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let s = line.trim();
        if s.is_empty() {
            continue;
        }
        if s.starts_with('#') {
            if s.split_whitespace().collect::<Vec<_>>() == ["#", "x_meters", "re", "im"] {
                saw_header = true;
            }
            continue;
        }
        let cols: Vec<f64> = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|c| !c.is_empty())
            .map(|c| c.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        if cols.len() != 3 {
            return Err(Error::Config(format!(
                "line {}: expected 3 columns, found {}",
                lineno + 1,
                cols.len()
            )));
        }
        xs.push(cols[0]);
        amps.push(Complex64::new(cols[1], cols[2]));
    }
    if !saw_header {
        return Err(Error::Config(format!(
            "missing header line '{TABULATED_HEADER}'"
        )));
    }
    if xs.len() < 4 {
        return Err(Error::Config("need at least 4 samples".into()));
    }
    let dx = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    for (i, x) in xs.iter().enumerate() {
        if (x - (xs[0] + i as f64 * dx)).abs() > 1e-6 * dx {
            return Err(Error::Config(format!("sample {i} breaks uniform spacing")));
        }
    }
    let n = xs.len().next_power_of_two();
    amps.resize(n, Complex64::new(0.0, 0.0));
    let mut state = GridState::new(xs[0], dx, amps, t)?;
    let norm = state.norm_sqr();
    if !(norm > 0.0) {
        return Err(Error::Config("tabulated state has zero norm".into()));
    }
    state.scale(1.0 / norm.sqrt());
    Ok(TabulatedState {
        state,
        original_norm_sqr: norm,
    })
}

pub fn write_tabulated(state: &GridState, mut w: impl Write) -> Result<()> {
    writeln!(w, "{TABULATED_HEADER}")?;
    for (i, a) in state.amps.iter().enumerate() {
        writeln!(w, "{:.17e} {:.17e} {:.17e}", state.x(i), a.re, a.im)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3() -> (GaussianPacket, AtomSpec) {
        (
            GaussianPacket::new(-0.66e-6, 0.011, 0.1e-6).unwrap(),
            AtomSpec::cesium(),
        )
    }

    #[test]
    fn peak_density_at_preparation() {
        let (p, a) = fig3();
        let want = 1.0 / ((2.0 * PI).sqrt() * p.delta_x);
        assert!((p.density(p.x0, 0.0, &a) / want - 1.0).abs() < 1e-13);
    }

    #[test]
    fn fig3_packet_at_t() {
        let (p, a) = fig3();
        let t = 60e-6;
        assert!(p.mean_at(t).abs() < 1e-12);
        assert!((p.width_at(t, &a) / 0.1748e-6 - 1.0).abs() < 1e-3);
        assert!((p.density(0.0, t, &a) / 2.282e6 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn second_derivative_matches_finite_difference() {
        let (p, a) = fig3();
        let t = 60e-6;
        let h = 1e-10;
        for &x in &[-0.2e-6, 0.0, 0.13e-6] {
            let fd = (p.psi(x + h, t, &a) - 2.0 * p.psi(x, t, &a) + p.psi(x - h, t, &a)) / (h * h);
            let an = p.psi_second_derivative(x, t, &a);
            assert!((fd - an).norm() / an.norm() < 1e-5);
        }
    }

    #[test]
    fn spectrum_matches_fft_of_samples() {
        let (p, a) = fig3();
        let t = 60e-6;
        let grid = GridSpec::centered(0.0, 0.0035e-6, 4096).unwrap();
        let st = sample_gaussian(&p, &a, t, &grid).unwrap();
        let m = to_momentum(&st);
        let k0 = p.k0(&a);
        let j = ((k0 - m.k_min) / m.dk).round() as usize;
        let want = p.spectrum(m.k(j), t, &a);
        assert!((m.amps[j] - want).norm() / want.norm() < 1e-9);
    }

    #[test]
    fn refine_preserves_values() {
        let (p, a) = fig3();
        let grid = GridSpec::centered(0.0, 0.035e-6, 512).unwrap();
        let st = sample_gaussian(&p, &a, 60e-6, &grid).unwrap();
        let fine = refine(&st);
        assert_eq!(fine.n(), 1024);
        for i in (0..512).step_by(7) {
            assert!((fine.amps[2 * i] - st.amps[i]).norm() < 1e-10);
        }
        let mid = p.psi(fine.x(301), 60e-6, &a);
        assert!((fine.amps[301] - mid).norm() < 1e-8 * st.max_abs());
    }

    #[test]
    fn smooth_step_limits() {
        assert_eq!(smooth_step(-1.0, 0.5), 0.0);
        assert_eq!(smooth_step(0.0, 0.5), 0.0);
        assert_eq!(smooth_step(0.5, 0.5), 1.0);
        assert!((smooth_step(0.25, 0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tabulated_round_trip() {
        let (p, a) = fig3();
        let grid = GridSpec::centered(0.0, 0.035e-6, 256).unwrap();
        let mut st = sample_gaussian(&p, &a, 60e-6, &grid).unwrap();
        st.scale(3.0);
        let mut buf = Vec::new();
        write_tabulated(&st, &mut buf).unwrap();
        let back = read_tabulated(&buf[..], 60e-6).unwrap();
        assert!((back.original_norm_sqr / 9.0 - 1.0).abs() < 1e-9);
        assert!((back.state.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tabulated_requires_header() {
        let text = "0 1 0\n1 1 0\n2 1 0\n3 1 0\n";
        assert!(read_tabulated(text.as_bytes(), 0.0).is_err());
    }
}
