//! Pulse-duration and mirror-position sweeps over experiment presets, with
//! CSV and gnuplot output.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    normalize_scan, nrefl_lowest_order, nrefl_third_order, validity_time, DensityEstimate,
    EstimateMethod,
};
use crate::kernel::{
    nrefl_exact, nrefl_exact_scan, nrefl_linear_regime, KernelParams, QuadratureSpec, Spectrum,
};
use crate::pulse::{gaussian_reflection, gaussian_reflection_scan, right_moving_edge, PulseConfig};
use crate::units::AtomSpec;
use crate::wavepacket::GaussianPacket;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "PULSED_MIRROR_WORKERS";

/// Ways of computing the reflection probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Image-method grid propagation.
    Grid,
    /// Kernel quadratic form.
    Kernel,
    /// Lowest-order √τ law.
    Eq9,
    /// √τ law with its first correction.
    Eq11,
    /// Linear-regime law |ψ|² v0 τ.
    Linear,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Grid,
        Method::Kernel,
        Method::Eq9,
        Method::Eq11,
        Method::Linear,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Grid => "grid",
            Method::Kernel => "kernel",
            Method::Eq9 => "eq9",
            Method::Eq11 => "eq11",
            Method::Linear => "linear",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown method '{s}', valid methods: grid, kernel, eq9, eq11, linear"
                ))
            })
    }

    /// Parses a comma separated list.
    pub fn parse_list(s: &str) -> Result<BTreeSet<Method>> {
        s.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(Method::parse)
            .collect()
    }
}

/// Scan axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Tau,
    Position,
}

impl Axis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::Tau => "tau",
            Axis::Position => "x",
        }
    }
}

/// A packet, a pulse centre and the sweeps to run over them.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPreset {
    pub id: String,
    pub atom: AtomSpec,
    pub packet: GaussianPacket,
    /// Pulse centre T, s.
    pub t_center: f64,
    /// Pulse durations for τ sweeps, s.
    pub tau_list: Vec<f64>,
    /// Mirror positions for position scans, m.
    pub xm_list: Vec<f64>,
    pub methods: BTreeSet<Method>,
    /// Mirror position used by τ sweeps, m.
    pub tau_scan_mirror: f64,
    /// Default pulse duration for position scans, s.
    pub position_tau: f64,
}

/// `n` points spaced evenly on a log scale from `a` to `b`.
pub fn log_spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else {
                (la + (lb - la) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Default mirror positions: 81 points over mean ± 5 widths at T.
pub fn default_positions(packet: &GaussianPacket, atom: &AtomSpec, t: f64) -> Vec<f64> {
    let c = packet.mean_at(t);
    let w = packet.width_at(t, atom);
    linspace(c - 5.0 * w, c + 5.0 * w, 81)
}

impl ExperimentPreset {
    pub const NAMES: [&'static str; 3] = ["fig3", "fig4", "fig5"];

    /// Slow caesium packet centred on the mirror at T = 60 μs; τ sweep from
    /// 0.01 to 5 μs.
    pub fn fig3() -> Self {
        let atom = AtomSpec::cesium();
        let packet = GaussianPacket::new(-0.66e-6, 0.011, 0.1e-6).expect("valid preset packet");
        let t = 60e-6;
        ExperimentPreset {
            id: "fig3".into(),
            xm_list: default_positions(&packet, &atom, t),
            // the packet arrives at the origin at T
            tau_scan_mirror: 0.0,
            atom,
            packet,
            t_center: t,
            tau_list: log_spaced(0.01e-6, 5e-6, 40),
            methods: Method::ALL.into_iter().collect(),
            position_tau: 1e-6,
        }
    }

    /// The same packet viewed as a mirror-position scan at τ = 1 and 5 μs.
    pub fn fig4() -> Self {
        ExperimentPreset {
            id: "fig4".into(),
            tau_list: vec![1e-6, 5e-6],
            ..Self::fig3()
        }
    }

    /// Fast, wide caesium packet after 50 ms of flight; τ from 5 to 30 μs.
    pub fn fig5() -> Self {
        let atom = AtomSpec::cesium();
        let packet = GaussianPacket::new(-12e-3, 0.25, 1.6e-6).expect("valid preset packet");
        let t = 50e-3;
        ExperimentPreset {
            id: "fig5".into(),
            xm_list: default_positions(&packet, &atom, t),
            tau_scan_mirror: packet.mean_at(t),
            atom,
            packet,
            t_center: t,
            tau_list: linspace(5e-6, 30e-6, 26),
            methods: [Method::Kernel, Method::Eq9, Method::Eq11, Method::Linear]
                .into_iter()
                .collect(),
            position_tau: 10e-6,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "fig3" => Ok(Self::fig3()),
            "fig4" => Ok(Self::fig4()),
            "fig5" => Ok(Self::fig5()),
            other => Err(Error::Config(format!(
                "unknown preset '{other}', valid presets: {}",
                Self::NAMES.join(", ")
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.packet.validate()?;
        let increasing = |v: &[f64]| !v.is_empty() && v.windows(2).all(|w| w[1] > w[0]);
        if !increasing(&self.tau_list) {
            return Err(Error::Config(
                "tau list must be nonempty and strictly increasing".into(),
            ));
        }
        if !increasing(&self.xm_list) {
            return Err(Error::Config(
                "mirror position list must be nonempty and strictly increasing".into(),
            ));
        }
        if self.tau_list[0] <= 0.0 || !(self.position_tau > 0.0) {
            return Err(Error::Config("pulse durations must be positive".into()));
        }
        let max_tau = self
            .tau_list
            .last()
            .copied()
            .unwrap_or(0.0)
            .max(self.position_tau);
        if !(self.t_center > 0.5 * max_tau) {
            return Err(Error::Config(format!(
                "pulse centre T = {:e} s must exceed half the longest pulse ({:e} s)",
                self.t_center,
                0.5 * max_tau
            )));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        Ok(())
    }
}

/// Worker pool settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanOptions {
    /// Worker threads; 0 lets rayon decide.
    pub workers: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self::from_env()
    }
}

impl ScanOptions {
    /// Reads [`WORKERS_ENV`]; unset or unparsable means automatic.
    pub fn from_env() -> Self {
        let workers = std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(0);
        ScanOptions { workers }
    }

    fn run<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
        Ok(pool.install(f))
    }
}

/// Straight-line fits of N(τ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    /// Slope of N against τ, 1/s.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// R² of the fit of N against √τ.
    pub sqrt_r_squared: f64,
    /// |ψ_T(x_M)|² v0, 1/s.
    pub expected_slope: f64,
    /// Column the fit was made to.
    pub source: Method,
}

/// Least-squares line through (x, y): slope, intercept and R².
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    (slope, intercept, 1.0 - ss_res / syy)
}

/// Output of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub preset: String,
    pub axis: Axis,
    pub t_center: f64,
    /// Pulse duration of a position scan.
    pub tau: Option<f64>,
    /// Mirror position of a τ sweep.
    pub x_m: Option<f64>,
    pub packet: GaussianPacket,
    pub atom: AtomSpec,
    pub methods: BTreeSet<Method>,
    pub axis_values: Vec<f64>,
    pub n_grid: Option<Vec<f64>>,
    pub n_kernel: Option<Vec<f64>>,
    pub n_eq9: Option<Vec<f64>>,
    pub n_eq11: Option<Vec<f64>>,
    pub n_linear: Option<Vec<f64>>,
    /// Rows where the corrected √τ law left its regime.
    pub eq11_out_of_regime: Option<Vec<bool>>,
    /// |ψ_T(x_M)|², 1/m.
    pub density_true: Vec<f64>,
    /// Normalized estimate of a position scan.
    pub estimate: Option<DensityEstimate>,
    /// Column the estimate was built from.
    pub estimate_source: Option<Method>,
    pub sqrt_alpha_k0: Vec<f64>,
    pub alpha_k0_dk: Vec<f64>,
    pub tau_over_tau_star: Vec<f64>,
    pub fit: Option<LinearFit>,
}

impl ScanResult {
    pub fn len(&self) -> usize {
        self.axis_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis_values.is_empty()
    }

    pub fn column(&self, m: Method) -> Option<&[f64]> {
        match m {
            Method::Grid => self.n_grid.as_deref(),
            Method::Kernel => self.n_kernel.as_deref(),
            Method::Eq9 => self.n_eq9.as_deref(),
            Method::Eq11 => self.n_eq11.as_deref(),
            Method::Linear => self.n_linear.as_deref(),
        }
    }

    /// The most accurate column available: kernel, then grid, then the
    /// analytic laws.
    pub fn best_column(&self) -> Option<(Method, &[f64])> {
        [
            Method::Kernel,
            Method::Grid,
            Method::Eq11,
            Method::Eq9,
            Method::Linear,
        ]
        .into_iter()
        .find_map(|m| self.column(m).map(|c| (m, c)))
    }

    /// Largest |grid − kernel| / kernel over the rows, when both ran.
    pub fn method_disagreement(&self) -> Option<f64> {
        let (g, k) = (self.n_grid.as_ref()?, self.n_kernel.as_ref()?);
        let peak = k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Some(
            g.iter()
                .zip(k)
                .filter(|(_, k)| k.abs() > 1e-6 * peak)
                .map(|(g, k)| ((g - k) / k).abs())
                .fold(0.0, f64::max),
        )
    }
}

/// Values of one τ-sweep row.
struct Row {
    grid: Option<f64>,
    kernel: Option<f64>,
    eq9: Option<f64>,
    eq11: Option<(f64, bool)>,
    linear: Option<f64>,
    density: f64,
    sqrt_alpha_k0: f64,
    alpha_k0_dk: f64,
    tau_ratio: f64,
}

fn analytic_row(preset: &ExperimentPreset, tau: f64, x_m: f64) -> Result<Row> {
    let (p, a, t) = (&preset.packet, &preset.atom, preset.t_center);
    let has = |m| preset.methods.contains(&m);
    let psi = p.psi(x_m, t, a);
    let psi_dd = p.psi_second_derivative(x_m, t, a);
    let lin = nrefl_linear_regime(p, a, t, tau, x_m);
    let eq9 = if has(Method::Eq9) {
        Some(nrefl_lowest_order(psi.norm_sqr(), tau, a)?)
    } else {
        None
    };
    let eq11 = if has(Method::Eq11) {
        let r = nrefl_third_order(psi, psi_dd, tau, a)?;
        Some((r.value, r.out_of_regime))
    } else {
        None
    };
    Ok(Row {
        grid: None,
        kernel: None,
        eq9,
        eq11,
        linear: has(Method::Linear).then_some(lin.value),
        density: psi.norm_sqr(),
        sqrt_alpha_k0: lin.sqrt_alpha_k0,
        alpha_k0_dk: lin.alpha_k0_dk,
        tau_ratio: tau / validity_time(psi, psi_dd, a),
    })
}

fn tau_row(preset: &ExperimentPreset, tau: f64, x_m: f64) -> Result<Row> {
    let ctx =
        |m: Method| move |e: Error| e.context(format!("tau={tau:e} s, method={}", m.as_str()));
    let mut row = analytic_row(preset, tau, x_m).map_err(ctx(Method::Eq9))?;
    let (p, a, t) = (&preset.packet, &preset.atom, preset.t_center);
    if preset.methods.contains(&Method::Grid) {
        let pulse = PulseConfig::new(t, tau, x_m, a).map_err(ctx(Method::Grid))?;
        row.grid = Some(
            gaussian_reflection(p, a, &pulse)
                .map_err(ctx(Method::Grid))?
                .value,
        );
    }
    if preset.methods.contains(&Method::Kernel) {
        let spectrum = Spectrum::Gaussian {
            packet: p,
            atom: a,
            t,
            x_m,
            edge: right_moving_edge(p),
        };
        let params = KernelParams::from_tau(tau, a).map_err(ctx(Method::Kernel))?;
        row.kernel = Some(
            nrefl_exact(spectrum, params, &QuadratureSpec::default())
                .map_err(ctx(Method::Kernel))?
                .value,
        );
    }
    Ok(row)
}

fn collect(
    preset: &ExperimentPreset,
    axis: Axis,
    axis_values: Vec<f64>,
    rows: Vec<Row>,
) -> ScanResult {
    let has = |m| preset.methods.contains(&m);
    let col = |m: Method, f: &dyn Fn(&Row) -> Option<f64>| -> Option<Vec<f64>> {
        has(m).then(|| rows.iter().map(|r| f(r).unwrap_or(f64::NAN)).collect())
    };
    ScanResult {
        preset: preset.id.clone(),
        axis,
        t_center: preset.t_center,
        tau: None,
        x_m: None,
        packet: preset.packet,
        atom: preset.atom.clone(),
        methods: preset.methods.clone(),
        n_grid: col(Method::Grid, &|r| r.grid),
        n_kernel: col(Method::Kernel, &|r| r.kernel),
        n_eq9: col(Method::Eq9, &|r| r.eq9),
        n_eq11: col(Method::Eq11, &|r| r.eq11.map(|v| v.0)),
        n_linear: col(Method::Linear, &|r| r.linear),
        eq11_out_of_regime: has(Method::Eq11)
            .then(|| rows.iter().map(|r| r.eq11.is_some_and(|v| v.1)).collect()),
        density_true: rows.iter().map(|r| r.density).collect(),
        estimate: None,
        estimate_source: None,
        sqrt_alpha_k0: rows.iter().map(|r| r.sqrt_alpha_k0).collect(),
        alpha_k0_dk: rows.iter().map(|r| r.alpha_k0_dk).collect(),
        tau_over_tau_star: rows.iter().map(|r| r.tau_ratio).collect(),
        fit: None,
        axis_values,
    }
}

fn tau_sweep(
    preset: &ExperimentPreset,
    taus: &[f64],
    x_m: f64,
    opts: &ScanOptions,
) -> Result<ScanResult> {
    preset.validate()?;
    let rows = opts.run(|| {
        taus.par_iter()
            .map(|&tau| tau_row(preset, tau, x_m))
            .collect::<Result<Vec<_>>>()
    })??;
    let mut out = collect(preset, Axis::Tau, taus.to_vec(), rows);
    out.x_m = Some(x_m);
    Ok(out)
}

/// N_refl against τ at the preset's τ-sweep mirror position.
pub fn run_tau_scan(preset: &ExperimentPreset, opts: &ScanOptions) -> Result<ScanResult> {
    tau_sweep(preset, &preset.tau_list, preset.tau_scan_mirror, opts)
}

/// N_refl against mirror position at pulse duration `tau`, with the
/// normalized density estimate.
pub fn run_position_scan(
    preset: &ExperimentPreset,
    tau: f64,
    opts: &ScanOptions,
) -> Result<ScanResult> {
    preset.validate()?;
    if !(tau > 0.0 && preset.t_center > 0.5 * tau) {
        return Err(Error::Config(format!(
            "pulse duration {tau:e} s out of range"
        )));
    }
    let (p, a, t) = (&preset.packet, &preset.atom, preset.t_center);
    let xs = &preset.xm_list;
    let ctx =
        |m: Method| move |e: Error| e.context(format!("tau={tau:e} s, method={}", m.as_str()));
    let (rows, grid, kernel) = opts.run(|| -> Result<_> {
        let rows = xs
            .par_iter()
            .map(|&x| analytic_row(preset, tau, x))
            .collect::<Result<Vec<_>>>()?;
        let grid = if preset.methods.contains(&Method::Grid) {
            let pulse =
                PulseConfig::new(t, tau, preset.tau_scan_mirror, a).map_err(ctx(Method::Grid))?;
            let g = gaussian_reflection_scan(p, a, &pulse, xs).map_err(ctx(Method::Grid))?;
            Some(g.iter().map(|r| r.value).collect::<Vec<_>>())
        } else {
            None
        };
        let kernel = if preset.methods.contains(&Method::Kernel) {
            let params = KernelParams::from_tau(tau, a).map_err(ctx(Method::Kernel))?;
            let k = nrefl_exact_scan(
                p,
                a,
                t,
                right_moving_edge(p),
                xs,
                params,
                &QuadratureSpec::default(),
            )
            .map_err(ctx(Method::Kernel))?;
            Some(k.iter().map(|r| r.value).collect::<Vec<_>>())
        } else {
            None
        };
        Ok((rows, grid, kernel))
    })??;
    let mut rows = rows;
    for (i, r) in rows.iter_mut().enumerate() {
        r.grid = grid.as_ref().map(|g| g[i]);
        r.kernel = kernel.as_ref().map(|k| k[i]);
    }
    let mut out = collect(preset, Axis::Position, xs.clone(), rows);
    out.tau = Some(tau);
    let (source, values) = out.best_column().expect("at least one method");
    let regime = if out.sqrt_alpha_k0[0] < 1.0 {
        EstimateMethod::NormalizedSqrt
    } else {
        EstimateMethod::NormalizedLinear
    };
    let estimate = normalize_scan(xs, values, regime, tau, t)?;
    out.estimate_source = Some(source);
    out.estimate = Some(estimate);
    Ok(out)
}

/// τ sweep at the packet centre with straight-line and √τ fits of the most
/// accurate column.
pub fn run_linear_regime_sweep(
    preset: &ExperimentPreset,
    opts: &ScanOptions,
) -> Result<ScanResult> {
    if preset.tau_list.is_empty() {
        return Err(Error::Precondition(
            "linear sweep needs at least one pulse duration".into(),
        ));
    }
    let x_m = preset.packet.mean_at(preset.t_center);
    let mut out = tau_sweep(preset, &preset.tau_list, x_m, opts)?;
    if out.len() < 3 {
        return Err(Error::Precondition(
            "linear sweep needs at least three pulse durations".into(),
        ));
    }
    let (source, n) = out.best_column().expect("at least one method");
    let (slope, intercept, r2) = fit_line(&out.axis_values, n);
    let roots: Vec<f64> = out.axis_values.iter().map(|t| t.sqrt()).collect();
    let (_, _, r2_sqrt) = fit_line(&roots, n);
    out.fit = Some(LinearFit {
        slope,
        intercept,
        r_squared: r2,
        sqrt_r_squared: r2_sqrt,
        expected_slope: out.density_true[0] * preset.packet.v0,
        source,
    });
    Ok(out)
}

/// CSV column names, in order.
pub const CSV_COLUMNS: [&str; 11] = [
    "axis_value",
    "N_grid",
    "N_kernel",
    "N_eq9",
    "N_eq11",
    "N_linear",
    "density_true",
    "density_estimate",
    "sqrt_alpha_k0",
    "alpha_k0_dk",
    "tau_over_tau_star",
];

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Writes the scan as CSV: one `#` metadata line, the column names, rows.
pub fn write_csv(r: &ScanResult, mut w: impl Write) -> Result<()> {
    let mut head = format!(
        "# preset={} axis={} T={:e}",
        r.preset,
        r.axis.as_str(),
        r.t_center
    );
    if let Some(tau) = r.tau {
        write!(head, " tau={tau:e}").ok();
    }
    if let Some(x) = r.x_m {
        write!(head, " x_m={x:e}").ok();
    }
    let methods: Vec<&str> = r.methods.iter().map(|m| m.as_str()).collect();
    write!(
        head,
        " atom={} mass={:e} x0={:e} v0={:e} delta_x={:e} methods={}",
        r.atom.name,
        r.atom.mass,
        r.packet.x0,
        r.packet.v0,
        r.packet.delta_x,
        methods.join(",")
    )
    .ok();
    if let (Some(e), Some(s)) = (&r.estimate, r.estimate_source) {
        write!(
            head,
            " estimate={} estimate_source={}",
            e.method.as_str(),
            s.as_str()
        )
        .ok();
    }
    if let Some(d) = r.method_disagreement() {
        write!(head, " max_grid_kernel_rel={d:e}").ok();
    }
    if let Some(f) = &r.fit {
        write!(
            head,
            " fit_source={} slope={:e} intercept={:e} r2={:e} r2_sqrt={:e} expected_slope={:e}",
            f.source.as_str(),
            f.slope,
            f.intercept,
            f.r_squared,
            f.sqrt_r_squared,
            f.expected_slope
        )
        .ok();
    }
    if let Some(flags) = &r.eq11_out_of_regime {
        let n = flags.iter().filter(|&&f| f).count();
        if n > 0 {
            write!(head, " eq11_out_of_regime_rows={n}").ok();
        }
    }
    writeln!(w, "{head}")?;
    writeln!(w, "{}", CSV_COLUMNS.join(","))?;
    let cell = |c: &Option<Vec<f64>>, i: usize| fmt_opt(c.as_ref().map(|v| v[i]));
    for i in 0..r.len() {
        let est = fmt_opt(r.estimate.as_ref().map(|e| e.values[i]));
        writeln!(
            w,
            "{:e},{},{},{},{},{},{:e},{},{:e},{:e},{:e}",
            r.axis_values[i],
            cell(&r.n_grid, i),
            cell(&r.n_kernel, i),
            cell(&r.n_eq9, i),
            cell(&r.n_eq11, i),
            cell(&r.n_linear, i),
            r.density_true[i],
            est,
            r.sqrt_alpha_k0[i],
            r.alpha_k0_dk[i],
            r.tau_over_tau_star[i],
        )?;
    }
    Ok(())
}

pub fn csv_string(r: &ScanResult) -> String {
    let mut buf = Vec::new();
    write_csv(r, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii csv")
}

/// Gnuplot commands drawing the scan stored in `csv_name`.
pub fn plot_script(r: &ScanResult, csv_name: &str) -> String {
    let png = csv_name.trim_end_matches(".csv");
    let mut s = String::new();
    writeln!(s, "set datafile separator ','").ok();
    writeln!(s, "set datafile commentschars '#'").ok();
    writeln!(s, "set key autotitle columnhead").ok();
    writeln!(s, "set terminal pngcairo size 900,600").ok();
    writeln!(s, "set output '{png}.png'").ok();
    let cols: Vec<(usize, &str, bool)> = vec![
        (2, "grid", r.n_grid.is_some()),
        (3, "kernel", r.n_kernel.is_some()),
        (4, "eq9", r.n_eq9.is_some()),
        (5, "eq11", r.n_eq11.is_some()),
        (6, "linear", r.n_linear.is_some()),
    ];
    match r.axis {
        Axis::Tau => {
            writeln!(s, "set logscale xy").ok();
            writeln!(s, "set xlabel 'pulse duration tau [s]'").ok();
            writeln!(s, "set ylabel 'reflection probability'").ok();
            let parts: Vec<String> = cols
                .iter()
                .filter(|c| c.2)
                .map(|(i, name, _)| {
                    format!("'{csv_name}' using 1:{i} with linespoints title '{name}'")
                })
                .collect();
            writeln!(s, "plot {}", parts.join(", \\\n     ")).ok();
        }
        Axis::Position => {
            writeln!(s, "set xlabel 'mirror position x_M [m]'").ok();
            writeln!(s, "set ylabel 'density [1/m]'").ok();
            writeln!(
                s,
                "plot '{csv_name}' using 1:7 with lines title '|psi_T(x)|^2', \\\n     '{csv_name}' using 1:8 with points pt 7 title 'normalized estimate'"
            )
            .ok();
        }
    }
    s
}

/// Default output file name of a scan.
pub fn default_file_name(r: &ScanResult) -> String {
    match (r.axis, r.fit.is_some()) {
        (Axis::Tau, true) => format!("{}_linear_sweep.csv", r.preset),
        (Axis::Tau, false) => format!("{}_tau_scan.csv", r.preset),
        (Axis::Position, _) => format!("{}_xscan.csv", r.preset),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for n in ExperimentPreset::NAMES {
            ExperimentPreset::by_name(n).unwrap().validate().unwrap();
        }
        let p = ExperimentPreset::fig3();
        assert_eq!(p.tau_list.len(), 40);
        assert_eq!(p.xm_list.len(), 81);
        assert!((p.tau_list[0] - 1e-8).abs() < 1e-22 && p.tau_list[39] == 5e-6);
        assert!(p.tau_scan_mirror.abs() < 1e-18);
        assert!(matches!(
            ExperimentPreset::by_name("nope"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn method_lists_parse() {
        let m = Method::parse_list("eq9, kernel").unwrap();
        assert_eq!(
            m.into_iter().collect::<Vec<_>>(),
            vec![Method::Kernel, Method::Eq9]
        );
        assert!(Method::parse_list("grid,bogus").is_err());
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let x = [1.0, 2.0, 3.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let (a, b, r2) = fit_line(&x, &y);
        assert!((a - 2.5).abs() < 1e-14 && (b + 1.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn empty_tau_list_is_a_precondition_error() {
        let mut p = ExperimentPreset::fig5();
        p.tau_list.clear();
        assert!(matches!(
            run_linear_regime_sweep(&p, &ScanOptions { workers: 1 }),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn analytic_only_tau_scan_leaves_exact_columns_empty() {
        let mut p = ExperimentPreset::fig3();
        p.methods = [Method::Eq9].into_iter().collect();
        let r = run_tau_scan(&p, &ScanOptions { workers: 1 }).unwrap();
        let csv = csv_string(&r);
        let row = csv.lines().nth(2).unwrap();
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), CSV_COLUMNS.len());
        assert!(cells[1].is_empty() && cells[2].is_empty() && !cells[3].is_empty());
    }
}
