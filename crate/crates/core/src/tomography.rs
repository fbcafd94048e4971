//! Planar analogue of the orientation scan: line-integrated densities at
//! many mirror orientations, inverted by filtered back-projection.
//!
//! Orientation convention: the mirror normal at angle θ is
//! `n = (sin θ, cos θ)`, so θ = 0 scans along y and θ = π/2 along x. A
//! Gaussian with axis widths (σx, σy) then has the projected variance
//! `σ²(θ) = σx² sin²θ + σy² cos²θ`.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::trapezoid;
use crate::scan::{run_position_scan, ExperimentPreset, Method, ScanOptions};
use crate::units::AtomSpec;
use crate::wavepacket::{pairwise_sum, FftPair, GaussianPacket};

/// Fewest angles for which a reconstruction is not flagged.
pub const MIN_ANGLES: usize = 30;

/// Uniform planar grid; node (i, j) sits at `(x_min + i dx, y_min + j dy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2 {
    pub x_min: f64,
    pub y_min: f64,
    pub dx: f64,
    pub dy: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid2 {
    pub fn new(x_min: f64, y_min: f64, dx: f64, dy: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 || !(dx > 0.0) || !(dy > 0.0) {
            return Err(Error::InvalidParameter(
                "grid needs at least 2×2 nodes and positive spacing".into(),
            ));
        }
        Ok(Grid2 {
            x_min,
            y_min,
            dx,
            dy,
            nx,
            ny,
        })
    }

    /// Square grid of `n × n` nodes spanning `center ± half`.
    pub fn square(center: (f64, f64), half: f64, n: usize) -> Result<Self> {
        let d = 2.0 * half / (n - 1) as f64;
        Self::new(center.0 - half, center.1 - half, d, d, n, n)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.dy
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.nx - 1)
    }

    pub fn y_max(&self) -> f64 {
        self.y(self.ny - 1)
    }
}

/// Non-negative density on a [`Grid2`], 1/m²; `values[j * nx + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Density2D {
    pub grid: Grid2,
    pub values: Vec<f64>,
}

impl Density2D {
    pub fn from_fn(grid: Grid2, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        let values = (0..grid.ny)
            .into_par_iter()
            .flat_map_iter(|j| {
                let f = &f;
                (0..grid.nx).map(move |i| f(grid.x(i), grid.y(j)))
            })
            .collect();
        Density2D { grid, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    /// Trapezoid integral over the grid.
    pub fn integral(&self) -> f64 {
        let g = &self.grid;
        let w = |i: usize, n: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let rows: Vec<f64> = (0..g.ny)
            .map(|j| {
                let r: Vec<f64> = (0..g.nx).map(|i| w(i, g.nx) * self.get(i, j)).collect();
                w(j, g.ny) * pairwise_sum(&r)
            })
            .collect();
        pairwise_sum(&rows) * g.dx * g.dy
    }

    /// Bilinear interpolation; `None` outside the grid.
    pub fn value_at(&self, x: f64, y: f64) -> Option<f64> {
        let g = &self.grid;
        let u = (x - g.x_min) / g.dx;
        let v = (y - g.y_min) / g.dy;
        if !(u >= 0.0 && v >= 0.0 && u <= (g.nx - 1) as f64 && v <= (g.ny - 1) as f64) {
            return None;
        }
        let i = (u.floor() as usize).min(g.nx - 2);
        let j = (v.floor() as usize).min(g.ny - 2);
        let (fu, fv) = (u - i as f64, v - j as f64);
        Some(
            (1.0 - fu) * (1.0 - fv) * self.get(i, j)
                + fu * (1.0 - fv) * self.get(i + 1, j)
                + (1.0 - fu) * fv * self.get(i, j + 1)
                + fu * fv * self.get(i + 1, j + 1),
        )
    }

    /// Copy scaled to unit integral.
    pub fn normalized(&self) -> Result<Self> {
        let s = self.integral();
        if !(s > 0.0) {
            return Err(Error::InvalidParameter("density has no mass".into()));
        }
        Ok(Density2D {
            grid: self.grid,
            values: self.values.iter().map(|v| v / s).collect(),
        })
    }

    /// Interior local maxima above `fraction` of the global maximum, largest
    /// first, as `(x, y, value)`.
    pub fn peaks(&self, fraction: f64) -> Vec<(f64, f64, f64)> {
        let g = &self.grid;
        let top = self.values.iter().copied().fold(f64::MIN, f64::max);
        let mut out = Vec::new();
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                let v = self.get(i, j);
                if v < fraction * top {
                    continue;
                }
                let mut is_max = true;
                for dj in 0..3 {
                    for di in 0..3 {
                        if (di, dj) != (1, 1) && self.get(i + di - 1, j + dj - 1) > v {
                            is_max = false;
                        }
                    }
                }
                if is_max {
                    out.push((g.x(i), g.y(j), v));
                }
            }
        }
        out.sort_by(|a, b| b.2.total_cmp(&a.2));
        out
    }
}

/// ‖a − b‖₂ / ‖b‖₂ on a shared grid.
pub fn relative_l2(a: &Density2D, b: &Density2D) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::InvalidParameter(
            "densities live on different grids".into(),
        ));
    }
    let num: Vec<f64> = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).powi(2))
        .collect();
    let den: Vec<f64> = b.values.iter().map(|y| y * y).collect();
    Ok((pairwise_sum(&num) / pairwise_sum(&den)).sqrt())
}

/// Line integral of a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marginal {
    /// 1/m.
    pub value: f64,
    /// The line misses the grid.
    pub out_of_support: bool,
}

/// Integral of the density along the line `{p : (p − center)·n = offset}`
/// with `n = (sin θ, cos θ)`, sampled at half the grid spacing with bilinear
/// interpolation.
pub fn plane_marginal(
    density: &Density2D,
    center: (f64, f64),
    angle: f64,
    offset: f64,
) -> Marginal {
    let g = &density.grid;
    let (s, c) = angle.sin_cos();
    let n = (s, c);
    let e = (c, -s);
    let p0 = (center.0 + offset * n.0, center.1 + offset * n.1);
    // clip the parameter range to the grid box
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    for (p, d, lo, hi) in [
        (p0.0, e.0, g.x_min, g.x_max()),
        (p0.1, e.1, g.y_min, g.y_max()),
    ] {
        if d.abs() < 1e-15 {
            if p < lo || p > hi {
                return Marginal {
                    value: 0.0,
                    out_of_support: true,
                };
            }
        } else {
            let (a, b) = ((lo - p) / d, (hi - p) / d);
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
    }
    if !(t1 > t0) {
        return Marginal {
            value: 0.0,
            out_of_support: true,
        };
    }
    let h = 0.5 * g.dx.min(g.dy);
    let steps = ((t1 - t0) / h).ceil().max(1.0) as usize;
    let ht = (t1 - t0) / steps as f64;
    let vals: Vec<f64> = (0..=steps)
        .map(|k| {
            let t = t0 + k as f64 * ht;
            let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
            w * density
                .value_at(p0.0 + t * e.0, p0.1 + t * e.1)
                .unwrap_or(0.0)
        })
        .collect();
    Marginal {
        value: pairwise_sum(&vals) * ht,
        out_of_support: false,
    }
}

/// Line-integrated densities indexed by orientation and offset.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    /// Orientations, rad.
    pub angles: Vec<f64>,
    /// Offsets from the rotation point, m; uniform.
    pub offsets: Vec<f64>,
    /// `values[a * offsets.len() + o]`, 1/m.
    pub values: Vec<f64>,
    /// Rotation point, m.
    pub center: (f64, f64),
}

impl Sinogram {
    pub fn profile(&self, a: usize) -> &[f64] {
        let n = self.offsets.len();
        &self.values[a * n..(a + 1) * n]
    }

    /// Trapezoid integral of each angle's profile.
    pub fn profile_integrals(&self) -> Vec<f64> {
        (0..self.angles.len())
            .map(|a| trapezoid(&self.offsets, self.profile(a)))
            .collect()
    }

    /// Element-wise sum of two sinograms on the same sampling.
    pub fn add(&self, other: &Sinogram) -> Result<Sinogram> {
        if self.angles != other.angles
            || self.offsets != other.offsets
            || self.center != other.center
        {
            return Err(Error::InvalidParameter(
                "sinograms are sampled differently".into(),
            ));
        }
        Ok(Sinogram {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            ..self.clone()
        })
    }
}

/// `n` angles evenly covering [0, π).
pub fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n).map(|i| PI * i as f64 / n as f64).collect()
}

/// `n` offsets evenly covering [-half, half].
pub fn uniform_offsets(half: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64)
        .collect()
}

/// Sinogram of a gridded density by numerical line integration.
pub fn project(
    density: &Density2D,
    center: (f64, f64),
    angles: &[f64],
    offsets: &[f64],
) -> Sinogram {
    let values = angles
        .par_iter()
        .flat_map_iter(|&a| {
            offsets
                .iter()
                .map(move |&s| plane_marginal(density, center, a, s).value)
        })
        .collect();
    Sinogram {
        angles: angles.to_vec(),
        offsets: offsets.to_vec(),
        values,
        center,
    }
}

/// Axis-aligned Gaussian component of a phantom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blob {
    pub weight: f64,
    pub cx: f64,
    pub cy: f64,
    pub sx: f64,
    pub sy: f64,
}

/// Sum of Gaussian blobs with closed-form line integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub blobs: Vec<Blob>,
}

fn gauss(u: f64, s: f64) -> f64 {
    (-0.5 * (u / s).powi(2)).exp() / ((2.0 * PI).sqrt() * s)
}

impl Phantom {
    pub fn isotropic(sigma: f64) -> Self {
        Phantom {
            blobs: vec![Blob {
                weight: 1.0,
                cx: 0.0,
                cy: 0.0,
                sx: sigma,
                sy: sigma,
            }],
        }
    }

    /// Two isotropic blobs of width `sigma`, `4 sigma` apart along a line
    /// tilted by 30°, with weights 0.55 and 0.45.
    pub fn two_gaussian(sigma: f64) -> Self {
        let (s, c) = (PI / 6.0).sin_cos();
        let d = 2.0 * sigma;
        Phantom {
            blobs: vec![
                Blob {
                    weight: 0.55,
                    cx: -d * c,
                    cy: -d * s,
                    sx: sigma,
                    sy: sigma,
                },
                Blob {
                    weight: 0.45,
                    cx: d * c,
                    cy: d * s,
                    sx: sigma,
                    sy: sigma,
                },
            ],
        }
    }

    pub fn density(&self, x: f64, y: f64) -> f64 {
        self.blobs
            .iter()
            .map(|b| b.weight * gauss(x - b.cx, b.sx) * gauss(y - b.cy, b.sy))
            .sum()
    }

    /// Exact line integral at orientation `angle` and offset `offset`.
    pub fn marginal(&self, center: (f64, f64), angle: f64, offset: f64) -> f64 {
        let (s, c) = angle.sin_cos();
        self.blobs
            .iter()
            .map(|b| {
                let mean = (b.cx - center.0) * s + (b.cy - center.1) * c;
                let var = b.sx * b.sx * s * s + b.sy * b.sy * c * c;
                b.weight * gauss(offset - mean, var.sqrt())
            })
            .sum()
    }

    pub fn sinogram(&self, center: (f64, f64), angles: &[f64], offsets: &[f64]) -> Sinogram {
        let values = angles
            .iter()
            .flat_map(|&a| offsets.iter().map(move |&o| self.marginal(center, a, o)))
            .collect();
        Sinogram {
            angles: angles.to_vec(),
            offsets: offsets.to_vec(),
            values,
            center,
        }
    }

    pub fn to_density(&self, grid: Grid2) -> Density2D {
        Density2D::from_fn(grid, |x, y| self.density(x, y))
    }
}

/// Output of [`fbp_reconstruct`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// Clipped at zero and normalized (zeros when `empty`).
    pub density: Density2D,
    /// Back-projection before clipping.
    pub unclipped: Vec<f64>,
    /// Fewer than [`MIN_ANGLES`] orientations.
    pub under_sampled: bool,
    /// Nothing positive survived clipping; `density` is left unnormalized.
    pub empty: bool,
}

/// Ram-Lak filtered profile: the band-limited ramp applied by linear
/// convolution, `q = ds · (h * p)`.
fn ramp_filter(profile: &[f64], ds: f64, fft: &FftPair) -> Vec<f64> {
    let n = profile.len();
    let len = fft.len();
    let mut h = vec![Complex64::new(0.0, 0.0); len];
    h[0] = Complex64::new(1.0 / (4.0 * ds * ds), 0.0);
    for m in (1..n).step_by(2) {
        let v = Complex64::new(-1.0 / ((m * m) as f64 * PI * PI * ds * ds), 0.0);
        h[m] = v;
        h[len - m] = v;
    }
    let mut p: Vec<Complex64> = profile.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    p.resize(len, Complex64::new(0.0, 0.0));
    fft.forward(&mut h);
    fft.forward(&mut p);
    for (a, b) in p.iter_mut().zip(&h) {
        *a *= b;
    }
    fft.inverse(&mut p);
    p[..n].iter().map(|c| c.re * ds).collect()
}

/// Filtered back-projection onto `grid`. Angles are taken as evenly
/// spread over [0, π) and offsets must be uniform.
pub fn fbp_reconstruct(sino: &Sinogram, grid: Grid2) -> Result<Reconstruction> {
    let n = sino.offsets.len();
    let na = sino.angles.len();
    if n < 2 || na == 0 || sino.values.len() != n * na {
        return Err(Error::InvalidParameter("sinogram shape mismatch".into()));
    }
    let ds = (sino.offsets[n - 1] - sino.offsets[0]) / (n - 1) as f64;
    if sino
        .offsets
        .iter()
        .enumerate()
        .any(|(i, o)| (o - (sino.offsets[0] + i as f64 * ds)).abs() > 1e-9 * ds)
    {
        return Err(Error::InvalidParameter(
            "offsets must be uniformly spaced".into(),
        ));
    }
    let fft = FftPair::new((2 * n).next_power_of_two());
    let filtered: Vec<Vec<f64>> = (0..na)
        .into_par_iter()
        .map(|a| ramp_filter(sino.profile(a), ds, &fft))
        .collect();
    let trig: Vec<(f64, f64)> = sino.angles.iter().map(|a| a.sin_cos()).collect();
    let weight = PI / na as f64;
    let s0 = sino.offsets[0];
    let c = sino.center;
    let mut unclipped = vec![0.0; grid.nx * grid.ny];
    unclipped
        .par_chunks_mut(grid.nx)
        .enumerate()
        .for_each(|(j, row)| {
            let y = grid.y(j) - c.1;
            for (i, out) in row.iter_mut().enumerate() {
                let x = grid.x(i) - c.0;
                let mut acc = 0.0;
                for (q, &(s, co)) in filtered.iter().zip(&trig) {
                    let u = (x * s + y * co - s0) / ds;
                    if u >= 0.0 && u <= (n - 1) as f64 {
                        let k = (u.floor() as usize).min(n - 2);
                        let f = u - k as f64;
                        acc += (1.0 - f) * q[k] + f * q[k + 1];
                    }
                }
                *out = acc * weight;
            }
        });
    let clipped = Density2D {
        grid,
        values: unclipped.iter().map(|v| v.max(0.0)).collect(),
    };
    let mass = clipped.integral();
    let empty = !(mass > 0.0);
    let density = if empty {
        clipped
    } else {
        clipped.normalized()?
    };
    Ok(Reconstruction {
        density,
        unclipped,
        under_sampled: na < MIN_ANGLES,
        empty,
    })
}

/// Product packet ψx(x) ψy(y) ψz(z); each factor moves along its own +axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparablePacket {
    pub x: GaussianPacket,
    pub y: GaussianPacket,
    pub z: GaussianPacket,
}

impl SeparablePacket {
    /// |ψx(x)|² |ψy(y)|² at time t, with z integrated out.
    pub fn planar_density(&self, x: f64, y: f64, t: f64, atom: &AtomSpec) -> f64 {
        self.x.density(x, t, atom) * self.y.density(y, t, atom)
    }

    /// In-plane factors share width, speed and preparation time and are
    /// centred on `center` at time t, so the planar density is isotropic
    /// about it.
    fn isotropic_about(&self, center: (f64, f64), t: f64, atom: &AtomSpec) -> bool {
        let (a, b) = (&self.x, &self.y);
        let w = a.width_at(t, atom);
        a.delta_x == b.delta_x
            && a.v0 == b.v0
            && a.prepared_at == b.prepared_at
            && (a.mean_at(t) - center.0).abs() < 1e-9 * w
            && (b.mean_at(t) - center.1).abs() < 1e-9 * w
    }
}

/// Mirror settings of an orientation scan.
#[derive(Debug, Clone, PartialEq)]
pub struct TomoScan {
    pub atom: AtomSpec,
    /// Pulse centre, s.
    pub t_center: f64,
    /// Pulse duration, s.
    pub tau: f64,
    /// Rotation point, m.
    pub center: (f64, f64),
    /// Mirror offsets along the normal, m.
    pub offsets: Vec<f64>,
    /// Column of the position scan used for the estimate.
    pub method: Method,
}

/// Normalized density estimate along one axis of a separable packet.
fn axis_scan(
    packet: &GaussianPacket,
    origin: f64,
    scan: &TomoScan,
    opts: &ScanOptions,
) -> Result<Vec<f64>> {
    let preset = ExperimentPreset {
        id: "tomography".into(),
        atom: scan.atom.clone(),
        packet: *packet,
        t_center: scan.t_center,
        tau_list: vec![scan.tau],
        xm_list: scan.offsets.iter().map(|s| origin + s).collect(),
        methods: [scan.method].into_iter().collect(),
        tau_scan_mirror: origin,
        position_tau: scan.tau,
    };
    let r = run_position_scan(&preset, scan.tau, opts)?;
    Ok(r.estimate.expect("position scans carry an estimate").values)
}

/// Builds a sinogram from one-dimensional mirror scans, one per orientation.
///
/// Orientations along x (θ = π/2) or y (θ = 0) scan the corresponding factor
/// of the product packet; the remaining factors integrate to one. Oblique
/// orientations assume the source turns with the mirror, which leaves the
/// measured density unchanged only for in-plane isotropic packets centred on
/// the rotation point; anything else is reported as unsupported. Angles
/// outside [0, π) use `p(θ + π, s) = p(θ, −s)`.
pub fn simulate_3d_scan(
    packet: &SeparablePacket,
    scan: &TomoScan,
    angles: &[f64],
    opts: &ScanOptions,
) -> Result<Sinogram> {
    for p in [&packet.x, &packet.y, &packet.z] {
        p.validate()?;
    }
    let n = scan.offsets.len();
    if n > 1 && scan.offsets.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "offsets must be strictly increasing".into(),
        ));
    }
    const TOL: f64 = 1e-12;
    let isotropic = packet.isotropic_about(scan.center, scan.t_center, &scan.atom);
    let mut x_col: Option<Vec<f64>> = None;
    let mut y_col: Option<Vec<f64>> = None;
    let mut values = Vec::with_capacity(angles.len() * n);
    for &a in angles {
        let mut t = a.rem_euclid(2.0 * PI);
        let flip = t >= PI;
        if flip {
            t -= PI;
        }
        let (s, c) = t.sin_cos();
        let col = if (s - 1.0).abs() < TOL || (isotropic && c.abs() > TOL) {
            if x_col.is_none() {
                x_col = Some(axis_scan(&packet.x, scan.center.0, scan, opts)?);
            }
            x_col.as_ref()
        } else if (c - 1.0).abs() < TOL {
            if y_col.is_none() {
                y_col = Some(axis_scan(&packet.y, scan.center.1, scan, opts)?);
            }
            y_col.as_ref()
        } else {
            return Err(Error::Unsupported(format!(
                "orientation {a} rad needs an in-plane isotropic packet centred on the rotation point"
            )));
        };
        let col = col.expect("column computed above");
        if flip {
            // reversed profile sampled on the mirrored offsets
            let mirrored: Vec<f64> = scan.offsets.iter().rev().map(|o| -o).collect();
            if mirrored
                .iter()
                .zip(&scan.offsets)
                .any(|(a, b)| (a - b).abs() > 1e-9 * b.abs().max(1e-300))
            {
                return Err(Error::InvalidParameter(
                    "angles beyond π need offsets symmetric about zero".into(),
                ));
            }
            values.extend(col.iter().rev());
        } else {
            values.extend_from_slice(col);
        }
    }
    Ok(Sinogram {
        angles: angles.to_vec(),
        offsets: scan.offsets.clone(),
        values,
        center: scan.center,
    })
}

/// Phantoms available to [`tomo_demo`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhantomKind {
    /// Isotropic Gaussian of width 1 μm.
    Gaussian,
    /// Two 1 μm Gaussians 4 μm apart.
    TwoGaussian,
    /// Product of two slow caesium packets scanned by the pulsed mirror.
    Separable,
}

impl PhantomKind {
    pub const NAMES: [&'static str; 3] = ["gaussian", "two-gaussian", "separable"];

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(PhantomKind::Gaussian),
            "two-gaussian" => Ok(PhantomKind::TwoGaussian),
            "separable" => Ok(PhantomKind::Separable),
            other => Err(Error::Config(format!(
                "unknown phantom '{other}', valid phantoms: {}",
                Self::NAMES.join(", ")
            ))),
        }
    }
}

/// Sinogram, reconstruction and error of a phantom study.
#[derive(Debug, Clone)]
pub struct TomoDemo {
    pub sinogram: Sinogram,
    pub reconstruction: Reconstruction,
    /// Ground truth normalized on the reconstruction grid.
    pub truth: Density2D,
    /// Relative L2 error of the reconstruction.
    pub l2_error: f64,
    /// Grid spacing of the reconstruction, m.
    pub cell: f64,
    /// Largest local maxima of the truth and the reconstruction.
    pub truth_peaks: Vec<(f64, f64, f64)>,
    pub recon_peaks: Vec<(f64, f64, f64)>,
}

impl TomoDemo {
    /// Largest per-axis distance between matched peaks, in grid cells;
    /// `None` when the peak counts differ.
    pub fn peak_offset_cells(&self) -> Option<f64> {
        if self.truth_peaks.len() != self.recon_peaks.len() {
            return None;
        }
        let mut worst = 0.0f64;
        for t in &self.truth_peaks {
            let d = self
                .recon_peaks
                .iter()
                .map(|r| (r.0 - t.0).abs().max((r.1 - t.1).abs()))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d / self.cell);
        }
        Some(worst)
    }
}

type TruthFn = Box<dyn Fn(f64, f64) -> f64 + Sync>;

/// Builds the phantom's sinogram on `n_angles × n_offsets`, reconstructs it
/// on the square inscribed in the scanned disc and compares with the truth.
pub fn tomo_demo(
    kind: PhantomKind,
    n_angles: usize,
    n_offsets: usize,
    opts: &ScanOptions,
) -> Result<TomoDemo> {
    if n_angles == 0 || n_offsets < 8 {
        return Err(Error::InvalidParameter(
            "need at least one angle and eight offsets".into(),
        ));
    }
    let angles = uniform_angles(n_angles);
    let center = (0.0, 0.0);
    let (sinogram, half, truth_fn): (Sinogram, f64, TruthFn) = match kind {
        PhantomKind::Gaussian | PhantomKind::TwoGaussian => {
            let sigma = 1e-6;
            let ph = if kind == PhantomKind::Gaussian {
                Phantom::isotropic(sigma)
            } else {
                Phantom::two_gaussian(sigma)
            };
            let half = 7.0 * sigma;
            let s = ph.sinogram(center, &angles, &uniform_offsets(half, n_offsets));
            (s, half, Box::new(move |x, y| ph.density(x, y)))
        }
        PhantomKind::Separable => {
            let atom = AtomSpec::cesium();
            let t = 60e-6;
            let px = GaussianPacket::new(-0.66e-6, 0.011, 0.1e-6)?;
            let packet = SeparablePacket {
                x: px,
                y: px,
                z: GaussianPacket::new(-0.66e-6, 0.011, 0.1e-6)?,
            };
            let half = 6.0 * px.width_at(t, &atom);
            let scan = TomoScan {
                atom: atom.clone(),
                t_center: t,
                tau: 1e-6,
                center,
                offsets: uniform_offsets(half, n_offsets),
                method: Method::Kernel,
            };
            let s = simulate_3d_scan(&packet, &scan, &angles, opts)?;
            (
                s,
                half,
                Box::new(move |x, y| packet.planar_density(x, y, t, &atom)),
            )
        }
    };
    let grid = Grid2::square(center, half / 2f64.sqrt(), n_offsets)?;
    let reconstruction = fbp_reconstruct(&sinogram, grid)?;
    let truth = Density2D::from_fn(grid, truth_fn).normalized()?;
    let l2_error = relative_l2(&reconstruction.density, &truth)?;
    let n_peaks = if kind == PhantomKind::TwoGaussian {
        2
    } else {
        1
    };
    let mut truth_peaks = truth.peaks(0.3);
    truth_peaks.truncate(n_peaks);
    let mut recon_peaks = reconstruction.density.peaks(0.3);
    recon_peaks.truncate(n_peaks);
    Ok(TomoDemo {
        sinogram,
        reconstruction,
        truth,
        l2_error,
        cell: grid.dx,
        truth_peaks,
        recon_peaks,
    })
}

/// `angle_rad,offset_m,value` rows with a column header.
pub fn write_sinogram_csv(sino: &Sinogram, mut w: impl Write) -> Result<()> {
    writeln!(w, "angle_rad,offset_m,value")?;
    for (a, &ang) in sino.angles.iter().enumerate() {
        for (o, &off) in sino.offsets.iter().enumerate() {
            writeln!(
                w,
                "{ang:e},{off:e},{:e}",
                sino.values[a * sino.offsets.len() + o]
            )?;
        }
    }
    Ok(())
}

/// Reads the format of [`write_sinogram_csv`]; rows must be angle-major.
pub fn read_sinogram_csv(r: impl BufRead, center: (f64, f64)) -> Result<Sinogram> {
    let mut rows = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let s = line.trim();
        if s.is_empty() || s.starts_with('#') || s.starts_with("angle_rad") {
            continue;
        }
        let v: Vec<f64> = s
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        if v.len() != 3 {
            return Err(Error::Config(format!("line {}: expected 3 columns", i + 1)));
        }
        rows.push((v[0], v[1], v[2]));
    }
    let mut angles: Vec<f64> = Vec::new();
    for r in &rows {
        if angles.last() != Some(&r.0) {
            angles.push(r.0);
        }
    }
    if angles.is_empty() || rows.len() % angles.len() != 0 {
        return Err(Error::Config(
            "sinogram rows do not form a full angle × offset table".into(),
        ));
    }
    let n = rows.len() / angles.len();
    let offsets: Vec<f64> = rows[..n].iter().map(|r| r.1).collect();
    Ok(Sinogram {
        angles,
        offsets,
        values: rows.iter().map(|r| r.2).collect(),
        center,
    })
}

/// Density as a CSV matrix (one row per y node) after two header lines
/// giving the extents and spacing.
pub fn write_density_csv(d: &Density2D, mut w: impl Write) -> Result<()> {
    let g = &d.grid;
    writeln!(
        w,
        "# x_min={:e} x_max={:e} y_min={:e} y_max={:e}",
        g.x_min,
        g.x_max(),
        g.y_min,
        g.y_max()
    )?;
    writeln!(w, "# dx={:e} dy={:e} nx={} ny={}", g.dx, g.dy, g.nx, g.ny)?;
    for j in 0..g.ny {
        let row: Vec<String> = (0..g.nx).map(|i| format!("{:e}", d.get(i, j))).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anisotropic_projection_width() {
        let ph = Phantom {
            blobs: vec![Blob {
                weight: 1.0,
                cx: 0.0,
                cy: 0.0,
                sx: 2.0,
                sy: 0.5,
            }],
        };
        // at θ = 0 the line runs along x, leaving the y profile
        let v = ph.marginal((0.0, 0.0), 0.0, 0.0);
        assert!((v - 1.0 / ((2.0 * PI).sqrt() * 0.5)).abs() < 1e-14);
        let v = ph.marginal((0.0, 0.0), PI / 2.0, 0.0);
        assert!((v - 1.0 / ((2.0 * PI).sqrt() * 2.0)).abs() < 1e-14);
    }

    #[test]
    fn far_offset_is_zero() {
        let g = Grid2::square((0.0, 0.0), 5.0, 101).unwrap();
        let d = Phantom::isotropic(1.0).to_density(g);
        let m = plane_marginal(&d, (0.0, 0.0), 0.3, 50.0);
        assert!(m.out_of_support && m.value == 0.0);
        let m = plane_marginal(&d, (0.0, 0.0), 0.3, 4.0);
        assert!(!m.out_of_support && m.value < 1e-3);
    }

    #[test]
    fn zero_sinogram_gives_flagged_zeros() {
        let angles = uniform_angles(36);
        let offsets = uniform_offsets(3.0, 33);
        let s = Sinogram {
            values: vec![0.0; angles.len() * offsets.len()],
            angles,
            offsets,
            center: (0.0, 0.0),
        };
        let r = fbp_reconstruct(&s, Grid2::square((0.0, 0.0), 3.0, 33).unwrap()).unwrap();
        assert!(r.empty && !r.under_sampled);
        assert!(r.density.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn csv_round_trip() {
        let s = Phantom::isotropic(1.0).sinogram(
            (0.0, 0.0),
            &uniform_angles(4),
            &uniform_offsets(2.0, 5),
        );
        let mut buf = Vec::new();
        write_sinogram_csv(&s, &mut buf).unwrap();
        let back = read_sinogram_csv(&buf[..], (0.0, 0.0)).unwrap();
        assert_eq!(back, s);
    }
}
