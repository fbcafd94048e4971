//! Reflection probability as a quadratic form in the incident spectrum.
//!
//! For a right-moving spectrum ψ̃ (zero for k ≤ 0) the probability reflected
//! by a pulse of duration τ is `∫∫ conj(ψ̃(k1)) I(k1,k2) ψ̃(k2)` with a kernel
//! built from error functions along the rays arg z = ±π/4.

use std::f64::consts::{FRAC_PI_4, PI};
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::cerf::cerf;
use crate::error::{Error, Result};
use crate::units::{AtomSpec, Scaling};
use crate::wavepacket::{
    pairwise_sum_c, smooth_step, GaussianPacket, InternalGaussian, MomentumState,
};

/// Pulse strength α = ħτ/2m in m².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub alpha: f64,
}

impl KernelParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be >= 0, got {alpha}"
            )));
        }
        Ok(KernelParams { alpha })
    }

    pub fn from_tau(tau: f64, atom: &AtomSpec) -> Result<Self> {
        Self::new(atom.alpha(tau))
    }
}

/// Below this value of α|k2² − k1²| the kernel is evaluated from a series.
pub const DIAGONAL_THRESHOLD: f64 = 1e-6;

const ORDER: usize = 9;

/// Truncated power series in one variable.
#[derive(Debug, Clone, Copy)]
struct Jet([Complex64; ORDER]);

impl Jet {
    fn zero() -> Self {
        Jet([Complex64::new(0.0, 0.0); ORDER])
    }

    fn linear(c0: Complex64, c1: Complex64) -> Self {
        let mut j = Self::zero();
        j.0[0] = c0;
        j.0[1] = c1;
        j
    }

    fn mul(&self, o: &Jet) -> Jet {
        let mut r = Self::zero();
        for i in 0..ORDER {
            for j in 0..ORDER - i {
                r.0[i + j] += self.0[i] * o.0[j];
            }
        }
        r
    }

    fn add(&self, o: &Jet) -> Jet {
        let mut r = *self;
        for i in 0..ORDER {
            r.0[i] += o.0[i];
        }
        r
    }

    fn sub(&self, o: &Jet) -> Jet {
        let mut r = *self;
        for i in 0..ORDER {
            r.0[i] -= o.0[i];
        }
        r
    }

    /// exp(c s) for a constant c.
    fn exp_linear(c: Complex64) -> Jet {
        let mut r = Self::zero();
        let mut t = Complex64::new(1.0, 0.0);
        for (n, slot) in r.0.iter_mut().enumerate() {
            *slot = t;
            t *= c / (n + 1) as f64;
        }
        r
    }

    /// erf(z0 + β s) from erf^(n)(z) = (2/√π)(−1)^(n−1) H_(n−1)(z) e^(−z²).
    fn erf_linear(z0: Complex64, beta: Complex64) -> Jet {
        let mut r = Self::zero();
        r.0[0] = cerf(z0);
        let g = (-z0 * z0).exp() * std::f64::consts::FRAC_2_SQRT_PI;
        let mut h_prev = Complex64::new(0.0, 0.0);
        let mut h = Complex64::new(1.0, 0.0);
        let mut bn = Complex64::new(1.0, 0.0);
        let mut fact = 1.0;
        for n in 1..ORDER {
            bn *= beta;
            fact *= n as f64;
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            r.0[n] = g * h * sign * bn / fact;
            // H_n = 2z H_(n−1) − 2(n−1) H_(n−2)
            let next = 2.0 * z0 * h - 2.0 * (n - 1) as f64 * h_prev;
            h_prev = h;
            h = next;
        }
        r
    }
}

fn ray(alpha: f64) -> Complex64 {
    Complex64::from_polar(alpha.sqrt(), FRAC_PI_4)
}

/// Kernel near k1² = k2², expanded about the diagonal (or anti-diagonal).
fn kernel_series(k1: f64, k2: f64, alpha: f64) -> Complex64 {
    let p = 0.5 * (k1 + k2);
    let q = 0.5 * (k2 - k1);
    if p == 0.0 && q == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let a = ray(alpha);
    let b = a.conj();
    let one = Complex64::new(1.0, 0.0);
    // k1 = c1 + d1 s, k2 = c2 + d2 s, Δ/2 = 2 m s with m the fixed variable
    let (c1, d1, c2, d2, fixed, s) = if q.abs() <= p.abs() {
        (p, -1.0, p, 1.0, p, q)
    } else {
        (-q, 1.0, q, 1.0, q, p)
    };
    let k1j = Jet::linear(one * c1, one * d1);
    let k2j = Jet::linear(one * c2, one * d2);
    let ea1 = Jet::erf_linear(a * c1, a * d1);
    let eb1 = Jet::erf_linear(b * c1, b * d1);
    let ea2 = Jet::erf_linear(a * c2, a * d2);
    let eb2 = Jet::erf_linear(b * c2, b * d2);
    let e_minus = Jet::exp_linear(Complex64::new(0.0, -2.0 * alpha * fixed));
    let e_plus = Jet::exp_linear(Complex64::new(0.0, 2.0 * alpha * fixed));
    let bracket = e_minus
        .mul(&k1j.mul(&ea1).add(&k2j.mul(&eb2)))
        .sub(&e_plus.mul(&k2j.mul(&ea2).add(&k1j.mul(&eb1))));
    // bracket(0) vanishes; divide by Δ = 4 fixed s
    let mut sum = Complex64::new(0.0, 0.0);
    for n in (1..ORDER).rev() {
        sum = sum * s + bracket.0[n];
    }
    Complex64::new(0.0, 1.0) * sum / (8.0 * PI * fixed)
}

/// Kernel from precomputed node data.
#[derive(Debug, Clone, Copy)]
struct NodeData {
    k: f64,
    /// erf(√(iα) k)
    ea: Complex64,
    /// e^(iαk²/2)
    ph: Complex64,
}

impl NodeData {
    fn new(k: f64, alpha: f64) -> Self {
        NodeData {
            k,
            ea: cerf(ray(alpha) * k),
            ph: Complex64::from_polar(1.0, 0.5 * alpha * k * k),
        }
    }
}

fn kernel_pair(n1: &NodeData, n2: &NodeData, alpha: f64) -> Complex64 {
    let (k1, k2) = (n1.k, n2.k);
    let delta = k2 * k2 - k1 * k1;
    if alpha * delta.abs() < DIAGONAL_THRESHOLD {
        if alpha == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        return kernel_series(k1, k2, alpha);
    }
    // e^(−iαΔ/2) = e^(iαk1²/2) e^(−iαk2²/2); erf(√(−iα)k) = conj(erf(√(iα)k))
    let em = n1.ph * n2.ph.conj();
    let bracket =
        em * (k1 * n1.ea + k2 * n2.ea.conj()) - em.conj() * (k2 * n2.ea + k1 * n1.ea.conj());
    Complex64::new(0.0, 1.0) * bracket / (2.0 * PI * delta)
}

/// Reflection kernel I(k1, k2) for pulse strength α (consistent units).
pub fn kernel_i(k1: f64, k2: f64, alpha: f64) -> Complex64 {
    kernel_pair(&NodeData::new(k1, alpha), &NodeData::new(k2, alpha), alpha)
}

/// Kernel I(k1,k2) with k in 1/m; the result is in m.
#[allow(non_snake_case)]
pub fn kernel_I(k1: f64, k2: f64, params: KernelParams) -> Complex64 {
    // rescale so that the arithmetic is O(1)
    let l = params.alpha.sqrt().max(1e-300);
    if params.alpha == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    kernel_i(k1 * l, k2 * l, 1.0) * l
}

/// Large-α limit `(α/2π)(k1+k2) sinc(α(k2²−k1²)/2)`.
pub fn kernel_linear(k1: f64, k2: f64, alpha: f64) -> f64 {
    let x = 0.5 * alpha * (k2 * k2 - k1 * k1);
    let sinc = if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    };
    alpha / (2.0 * PI) * (k1 + k2) * sinc
}

/// Quadrature nodes and weights over k.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureNodes {
    pub k: Vec<f64>,
    pub w: Vec<f64>,
}

impl QuadratureNodes {
    /// Gauss–Legendre panels between consecutive `edges`, `points` per panel.
    pub fn panels(edges: &[f64], points: usize) -> Self {
        let rule = GaussLegendre::new(NonZeroUsize::new(points.max(1)).unwrap());
        let mut k = Vec::new();
        let mut w = Vec::new();
        for e in edges.windows(2) {
            let (a, b) = (e[0], e[1]);
            let h = 0.5 * (b - a);
            let c = 0.5 * (a + b);
            for &(x, wt) in rule.as_node_weight_pairs() {
                k.push(c + h * x);
                w.push(h * wt);
            }
        }
        QuadratureNodes { k, w }
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }
}

/// Settings for the tensor Gauss–Legendre quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Half-width of the support window in units of Δk.
    pub window: f64,
    pub points_per_panel: usize,
    /// Initial panel count; 0 picks one from the oscillation scales.
    pub panels: usize,
    /// Relative change between successive doublings accepted as converged.
    pub tolerance: f64,
    pub max_doublings: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            window: 8.0,
            points_per_panel: 20,
            panels: 0,
            tolerance: 1e-4,
            max_doublings: 5,
        }
    }
}

/// Hermitian kernel matrix on a fixed node set.
pub struct KernelMatrix {
    pub nodes: QuadratureNodes,
    /// Row-major, `m[i * n + j] = I(k_i, k_j)`.
    m: Vec<Complex64>,
}

impl KernelMatrix {
    /// Builds the matrix for α in the same units as the node wavenumbers.
    pub fn new(nodes: QuadratureNodes, alpha: f64) -> Self {
        let data: Vec<NodeData> = nodes.k.iter().map(|&k| NodeData::new(k, alpha)).collect();
        let n = data.len();
        let m = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let d = &data;
                (0..n).map(move |j| kernel_pair(&d[i], &d[j], alpha))
            })
            .collect();
        KernelMatrix { nodes, m }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[i * self.len() + j]
    }

    /// Largest |I(k_j,k_i) − conj(I(k_i,k_j))| and largest |I|.
    pub fn hermiticity(&self) -> (f64, f64) {
        let n = self.len();
        let mut dev = 0.0f64;
        let mut big = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                dev = dev.max((self.get(j, i) - self.get(i, j).conj()).norm());
                big = big.max(self.get(i, j).norm());
            }
        }
        (dev, big)
    }

    /// `Σ conj(f_i) I_ij f_j` with `f` already multiplied by the weights.
    pub fn quadratic_form(&self, f: &[Complex64]) -> Complex64 {
        let n = self.len();
        let rows: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let row = &self.m[i * n..(i + 1) * n];
                let terms: Vec<Complex64> = row.iter().zip(f).map(|(a, b)| a * b).collect();
                f[i].conj() * pairwise_sum_c(&terms)
            })
            .collect();
        pairwise_sum_c(&rows)
    }
}

/// Incident spectrum for the quadratic form.
#[derive(Debug, Clone, Copy)]
pub enum Spectrum<'a> {
    /// Freely evolved Gaussian at time `t`, seen from a mirror at `x_m`, with
    /// its k ≤ 0 content removed by a smooth edge of width `edge` (1/m).
    Gaussian {
        packet: &'a GaussianPacket,
        atom: &'a AtomSpec,
        t: f64,
        x_m: f64,
        edge: f64,
    },
    /// Sampled spectrum; k is measured in the mirror frame.
    Sampled(&'a MomentumState),
}

/// Result of [`nrefl_exact`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactReflection {
    pub value: f64,
    /// Imaginary part of the quadratic form (zero up to round-off).
    pub imag_residue: f64,
    /// Value at the previous refinement level.
    pub previous: f64,
    pub nodes: usize,
}

/// Gaussian spectrum setup in internal units.
struct GaussianSetup {
    g: InternalGaussian,
    t: f64,
    edge: f64,
    alpha: f64,
    scaling: Scaling,
}

impl GaussianSetup {
    fn new(
        packet: &GaussianPacket,
        atom: &AtomSpec,
        t: f64,
        edge: f64,
        params: KernelParams,
    ) -> Result<Self> {
        let scaling = packet.scaling(atom)?;
        Ok(GaussianSetup {
            g: packet.internal(&scaling),
            t: scaling.time(t),
            edge: scaling.wavenumber(edge),
            alpha: scaling.area(params.alpha),
            scaling,
        })
    }

    fn spectrum(&self, k: f64, x_m: f64) -> Complex64 {
        self.g.spectrum(k, self.t) * Complex64::from_polar(smooth_step(k, self.edge), k * x_m)
    }

    /// Panel edges for the window, with a break at the smooth edge.
    fn edges(&self, quad: &QuadratureSpec, panels: usize) -> Vec<f64> {
        let dk = 0.5 / self.g.width;
        let hi = self.g.k0 + quad.window * dk;
        let lo = (self.g.k0 - quad.window * dk).max(0.0);
        let mut edges = Vec::new();
        let start = if lo < self.edge && self.edge < hi {
            let m = (panels / 8).max(2);
            for i in 0..m {
                edges.push(lo + (self.edge - lo) * i as f64 / m as f64);
            }
            self.edge
        } else {
            lo
        };
        for i in 0..=panels {
            edges.push(start + (hi - start) * i as f64 / panels as f64);
        }
        edges
    }

    /// Panel count from the phase variation of the spectrum across the
    /// window and the oscillation scale of the kernel.
    fn initial_panels(&self, quad: &QuadratureSpec, max_offset: f64) -> usize {
        if quad.panels > 0 {
            return quad.panels;
        }
        let dk = 0.5 / self.g.width;
        let width = 2.0 * quad.window * dk;
        let slope = max_offset + quad.window * dk * (self.t - self.g.t0).abs();
        let spectral = width * slope / (2.0 * PI);
        let kernel = self.alpha * (self.g.k0 + quad.window * dk) * width / (2.0 * PI);
        let erf_scale = width * self.alpha.sqrt();
        ((spectral + kernel + erf_scale) / 2.0).ceil().max(8.0) as usize
    }
}

fn gaussian_scan(
    setup: &GaussianSetup,
    xs_internal: &[f64],
    quad: &QuadratureSpec,
) -> Result<Vec<ExactReflection>> {
    let max_offset = xs_internal
        .iter()
        .map(|x| (x - setup.g.mean_at(setup.t)).abs())
        .fold(0.0, f64::max);
    let mut panels = setup.initial_panels(quad, max_offset);
    let eval = |panels: usize| -> Vec<(Complex64, usize)> {
        let nodes = QuadratureNodes::panels(&setup.edges(quad, panels), quad.points_per_panel);
        let w = nodes.w.clone();
        let k = nodes.k.clone();
        let km = KernelMatrix::new(nodes, setup.alpha);
        xs_internal
            .iter()
            .map(|&x| {
                let f: Vec<Complex64> = k
                    .iter()
                    .zip(&w)
                    .map(|(&k, &w)| setup.spectrum(k, x) * w)
                    .collect();
                (km.quadratic_form(&f), k.len())
            })
            .collect()
    };
    let mut prev = eval(panels);
    for _ in 0..quad.max_doublings {
        panels *= 2;
        let next = eval(panels);
        let scale = next.iter().fold(0.0f64, |m, v| m.max(v.0.re.abs()));
        let change = next
            .iter()
            .zip(&prev)
            .fold(0.0f64, |m, (a, b)| m.max((a.0.re - b.0.re).abs()));
        if change <= quad.tolerance * scale {
            return Ok(next
                .iter()
                .zip(&prev)
                .map(|(a, b)| ExactReflection {
                    value: a.0.re,
                    imag_residue: a.0.im,
                    previous: b.0.re,
                    nodes: a.1,
                })
                .collect());
        }
        prev = next;
    }
    let i = prev
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0.re.abs().total_cmp(&b.1 .0.re.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let last = prev[i].0.re;
    // report the two finest values at the dominant position
    let previous = {
        let nodes = QuadratureNodes::panels(&setup.edges(quad, panels / 2), quad.points_per_panel);
        let km = KernelMatrix::new(nodes.clone(), setup.alpha);
        let f: Vec<Complex64> = nodes
            .k
            .iter()
            .zip(&nodes.w)
            .map(|(&k, &w)| setup.spectrum(k, xs_internal[i]) * w)
            .collect();
        km.quadratic_form(&f).re
    };
    Err(Error::NotConverged { previous, last })
}

/// Reflection probability as the kernel quadratic form, refined by panel
/// doubling until successive values agree to `quad.tolerance`.
pub fn nrefl_exact(
    spectrum: Spectrum,
    params: KernelParams,
    quad: &QuadratureSpec,
) -> Result<ExactReflection> {
    match spectrum {
        Spectrum::Gaussian {
            packet,
            atom,
            t,
            x_m,
            edge,
        } => {
            if params.alpha == 0.0 {
                return Ok(ExactReflection {
                    value: 0.0,
                    imag_residue: 0.0,
                    previous: 0.0,
                    nodes: 0,
                });
            }
            let setup = GaussianSetup::new(packet, atom, t, edge, params)?;
            let x = setup.scaling.length(x_m);
            Ok(gaussian_scan(&setup, &[x], quad)?[0])
        }
        Spectrum::Sampled(m) => nrefl_sampled(m, params, quad),
    }
}

/// The same quadratic form for a set of mirror positions sharing one kernel
/// matrix. Convergence is judged against the largest value of the scan.
pub fn nrefl_exact_scan(
    packet: &GaussianPacket,
    atom: &AtomSpec,
    t: f64,
    edge: f64,
    x_ms: &[f64],
    params: KernelParams,
    quad: &QuadratureSpec,
) -> Result<Vec<ExactReflection>> {
    let setup = GaussianSetup::new(packet, atom, t, edge, params)?;
    let xs: Vec<f64> = x_ms.iter().map(|&x| setup.scaling.length(x)).collect();
    gaussian_scan(&setup, &xs, quad)
}

fn nrefl_sampled(
    m: &MomentumState,
    params: KernelParams,
    quad: &QuadratureSpec,
) -> Result<ExactReflection> {
    let peak = m.amps.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    let mut neg = 0.0;
    for (j, a) in m.amps.iter().enumerate() {
        if m.k(j) <= 0.0 {
            neg += a.norm_sqr() * m.dk;
        }
    }
    if neg > 1e-6 {
        return Err(Error::Precondition(format!(
            "spectrum carries {neg:.3e} probability at k <= 0"
        )));
    }
    // internal length unit: the grid spacing
    let l = 2.0 * PI / (m.n() as f64 * m.dk);
    let alpha = params.alpha / (l * l);
    let sel: Vec<usize> = (0..m.n())
        .filter(|&j| m.k(j) > 0.0 && m.amps[j].norm() > 1e-12 * peak)
        .collect();
    let form = |stride: usize| {
        let idx: Vec<usize> = sel.iter().copied().step_by(stride).collect();
        let k: Vec<f64> = idx.iter().map(|&j| m.k(j) * l).collect();
        let w = m.dk * l * stride as f64;
        let f: Vec<Complex64> = idx.iter().map(|&j| m.amps[j] / l.sqrt() * w).collect();
        let km = KernelMatrix::new(
            QuadratureNodes {
                k: k.clone(),
                w: vec![w; k.len()],
            },
            alpha,
        );
        (km.quadratic_form(&f), k.len())
    };
    let (fine, n) = form(1);
    let (coarse, _) = form(2);
    let out = ExactReflection {
        value: fine.re,
        imag_residue: fine.im,
        previous: coarse.re,
        nodes: n,
    };
    if (fine.re - coarse.re).abs() > quad.tolerance * fine.re.abs() {
        return Err(Error::NotConverged {
            previous: coarse.re,
            last: fine.re,
        });
    }
    Ok(out)
}

/// Linear-regime value and its validity numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearRegime {
    /// |ψ_T(x_M)|² v0 τ.
    pub value: f64,
    /// √α k0; large in the linear regime.
    pub sqrt_alpha_k0: f64,
    /// α k0 Δk; small in the linear regime.
    pub alpha_k0_dk: f64,
}

/// Reflection probability `|ψ_T(x_M)|² v0 τ` valid for √α k0 ≫ 1 and
/// α k0 Δk small, with Δk = 1/(2Δx).
pub fn nrefl_linear_regime(
    packet: &GaussianPacket,
    atom: &AtomSpec,
    t: f64,
    tau: f64,
    x_m: f64,
) -> LinearRegime {
    let alpha = atom.alpha(tau);
    let k0 = packet.k0(atom);
    LinearRegime {
        value: packet.density(x_m, t, atom) * packet.v0 * tau,
        sqrt_alpha_k0: alpha.sqrt() * k0,
        alpha_k0_dk: alpha * k0 * packet.delta_k(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_alpha_gives_zero() {
        assert_eq!(kernel_i(1.0, 2.0, 0.0), Complex64::new(0.0, 0.0));
        assert_eq!(
            kernel_I(1e6, 2e6, KernelParams::new(0.0).unwrap()),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn series_matches_direct_formula_off_threshold() {
        // just above the threshold both branches are valid
        for &(k, alpha) in &[(2.3, 0.02), (0.7, 1.3), (30.0, 0.004)] {
            let eps = 2.0 * DIAGONAL_THRESHOLD / (alpha * 2.0 * k);
            let n1 = NodeData::new(k, alpha);
            let n2 = NodeData::new(k + eps, alpha);
            let direct = kernel_pair(&n1, &n2, alpha);
            let series = kernel_series(k, k + eps, alpha);
            assert!((direct - series).norm() < 1e-8 * series.norm(), "k={k}");
        }
    }

    #[test]
    fn anti_diagonal_branch() {
        let alpha = 0.5;
        let eps = 1.5 * DIAGONAL_THRESHOLD / (2.0 * alpha);
        let n1 = NodeData::new(-1.0, alpha);
        let n2 = NodeData::new(1.0 + eps, alpha);
        let direct = kernel_pair(&n1, &n2, alpha);
        let series = kernel_series(-1.0, 1.0 + eps, alpha);
        assert!((direct - series).norm() < 1e-8 * direct.norm());
    }

    #[test]
    fn hermitian_pairs() {
        for &(k1, k2, a) in &[(0.3, 2.0, 0.1), (5.0, 5.0, 2.0), (1.0, 1.0 + 1e-9, 0.3)] {
            let d = kernel_i(k2, k1, a) - kernel_i(k1, k2, a).conj();
            assert!(d.norm() < 1e-14 * kernel_i(k1, k2, a).norm().max(1e-300));
        }
    }

    #[test]
    fn linear_limit_at_large_argument() {
        let alpha = 1.0;
        for &s in &[10.0, 25.0, 50.0] {
            let (k1, k2) = (s, s + 0.3 / s);
            let exact = kernel_i(k1, k2, alpha);
            let lin = kernel_linear(k1, k2, alpha);
            let bound = 10.0 / (s * s * s);
            assert!((exact.re - lin).abs() <= bound * lin.abs(), "s={s}");
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let q = QuadratureNodes::panels(&[0.0, 1.0, 3.0], 5);
        let s: f64 = q.k.iter().zip(&q.w).map(|(k, w)| w * k.powi(7)).sum();
        assert!((s - 3f64.powi(8) / 8.0).abs() < 1e-10);
    }

    #[test]
    fn linear_regime_fig5_numbers() {
        let p = GaussianPacket::new(-12e-3, 0.25, 1.6e-6).unwrap();
        let r = nrefl_linear_regime(&p, &AtomSpec::cesium(), 50e-3, 10e-6, p.mean_at(50e-3));
        assert!((r.sqrt_alpha_k0 - 25.6).abs() < 0.1);
        assert!((r.alpha_k0_dk - 0.39).abs() < 0.01);
        let z = nrefl_linear_regime(&p, &AtomSpec::cesium(), 50e-3, 0.0, 0.0);
        assert_eq!(z.value, 0.0);
    }
}
