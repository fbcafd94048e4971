//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 quadrature did not
//! converge, 1 anything else (including failed validation checks).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{Quantity, RawConfig, RunConfig};
use crate::error::{Error, Result};
use crate::scan::{
    csv_string, default_file_name, plot_script, run_linear_regime_sweep, run_position_scan,
    run_tau_scan, ScanOptions, ScanResult,
};
use crate::tomography::{tomo_demo, write_density_csv, write_sinogram_csv, PhantomKind};
use crate::units::Constants;
use crate::validation::{
    acceptance_checks, estimate_deviation, fast_checks, figure_files, format_table,
};

#[derive(Debug, Parser)]
#[command(
    name = "pulsed-mirror",
    version,
    about = "Reflection of slow atoms from a briefly switched hard-wall mirror"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reflection probability against pulse duration (default preset fig3).
    TauScan(ScanArgs),
    /// Reflection probability and density estimate against mirror position
    /// (default preset fig4).
    PositionScan {
        #[command(flatten)]
        common: ScanArgs,
        /// Pulse duration, seconds or with a unit suffix such as `30us`.
        #[arg(long)]
        tau: Option<String>,
    },
    /// τ sweep at the packet centre with a straight-line fit (default preset fig5).
    LinearSweep(ScanArgs),
    /// Filtered back-projection of a simulated orientation scan.
    TomoDemo {
        /// gaussian, two-gaussian or separable.
        #[arg(long, default_value = "two-gaussian")]
        phantom: String,
        #[arg(long, default_value_t = 60)]
        angles: usize,
        #[arg(long, default_value_t = 129)]
        offsets: usize,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Cross-oracle and invariant checks; `--full` runs the acceptance suite
    /// and writes the figure CSVs.
    Validate {
        #[arg(long)]
        full: bool,
        /// TOML table of physical constants to check instead of the built-in one.
        #[arg(long)]
        constants: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct ScanArgs {
    /// Built-in preset: fig3, fig4 or fig5.
    #[arg(long)]
    preset: Option<String>,
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated methods: grid, kernel, eq9, eq11, linear.
    #[arg(long)]
    methods: Option<String>,
    /// Worker threads (0 = automatic); defaults to the environment variable
    /// PULSED_MIRROR_WORKERS.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the fully resolved configuration to this file.
    #[arg(long)]
    emit_config: Option<PathBuf>,
}

/// Maps an error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Config(_) => 2,
        Error::NotConverged { .. } => 3,
        _ => 1,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn resolve(args: &ScanArgs, fallback: &str, tau: Option<&str>) -> Result<RunConfig> {
    let mut raw = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            RawConfig::from_toml(&text).map_err(|e| e.context(path.display().to_string()))?
        }
        None => RawConfig::default(),
    };
    if let Some(p) = &args.preset {
        raw.preset = Some(p.clone());
    }
    if let Some(m) = &args.methods {
        raw.methods = Some(m.split(',').map(|s| s.trim().to_string()).collect());
    }
    if let Some(w) = args.workers {
        raw.workers = Some(w);
    }
    if let Some(o) = &args.out {
        raw.output_dir = Some(o.to_string_lossy().into_owned());
    }
    if let Some(t) = tau {
        raw.pulse.position_tau = Some(Quantity::Text(t.to_string()));
    }
    let cfg = RunConfig::resolve(&raw, fallback, &Constants::default())?;
    if let Some(path) = &args.emit_config {
        write_file(path, &cfg.to_toml())?;
    }
    Ok(cfg)
}

fn options(workers: usize) -> ScanOptions {
    if workers > 0 {
        ScanOptions { workers }
    } else {
        ScanOptions::from_env()
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_scan(r: &ScanResult, dir: &Path) -> Result<PathBuf> {
    let name = default_file_name(r);
    let csv = dir.join(&name);
    write_file(&csv, &csv_string(r))?;
    write_file(&csv.with_extension("gp"), &plot_script(r, &name))?;
    Ok(csv)
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::TauScan(args) => {
            let cfg = resolve(&args, "fig3", None)?;
            let r = run_tau_scan(&cfg.preset, &options(cfg.workers))?;
            let path = write_scan(&r, &cfg.output_dir)?;
            println!("{} rows -> {}", r.len(), path.display());
            if let Some(d) = r.method_disagreement() {
                println!("max grid/kernel relative difference {d:.3e}");
            }
            Ok(0)
        }
        Command::PositionScan { common, tau } => {
            let cfg = resolve(&common, "fig4", tau.as_deref())?;
            let p = &cfg.preset;
            let r = run_position_scan(p, p.position_tau, &options(cfg.workers))?;
            let path = write_scan(&r, &cfg.output_dir)?;
            println!(
                "{} rows at tau = {:e} s -> {}",
                r.len(),
                p.position_tau,
                path.display()
            );
            if let Some(e) = &r.estimate {
                println!(
                    "estimate from {}: integral {:.9}",
                    e.method.as_str(),
                    e.integral()
                );
            }
            if let Some(d) = estimate_deviation(&r) {
                println!("max |estimate - density| / peak {d:.3e}");
            }
            Ok(0)
        }
        Command::LinearSweep(args) => {
            let cfg = resolve(&args, "fig5", None)?;
            let r = run_linear_regime_sweep(&cfg.preset, &options(cfg.workers))?;
            let path = write_scan(&r, &cfg.output_dir)?;
            println!("{} rows -> {}", r.len(), path.display());
            if let Some(f) = r.fit {
                println!(
                    "fit of {}: slope {:.4e} 1/s (expected {:.4e}), R^2 {:.6}, sqrt-fit R^2 {:.6}",
                    f.source.as_str(),
                    f.slope,
                    f.expected_slope,
                    f.r_squared,
                    f.sqrt_r_squared
                );
            }
            Ok(0)
        }
        Command::TomoDemo {
            phantom,
            angles,
            offsets,
            workers,
            out,
        } => {
            let kind = PhantomKind::parse(&phantom)?;
            let d = tomo_demo(kind, angles, offsets, &options(workers.unwrap_or(0)))?;
            let mut sino = Vec::new();
            write_sinogram_csv(&d.sinogram, &mut sino)?;
            let mut dens = Vec::new();
            write_density_csv(&d.reconstruction.density, &mut dens)?;
            write_file(
                &out.join("tomo_sinogram.csv"),
                &String::from_utf8_lossy(&sino),
            )?;
            write_file(
                &out.join("tomo_reconstruction.csv"),
                &String::from_utf8_lossy(&dens),
            )?;
            println!("phantom {phantom}: {angles} angles x {offsets} offsets");
            println!("L2 error {:.4e}", d.l2_error);
            if let Some(c) = d.peak_offset_cells() {
                println!("peak offset {c:.2} cells");
            }
            if d.reconstruction.under_sampled {
                println!("warning: fewer than 30 angles, reconstruction is under-sampled");
            }
            println!(
                "wrote {} and {}",
                out.join("tomo_sinogram.csv").display(),
                out.join("tomo_reconstruction.csv").display()
            );
            Ok(0)
        }
        Command::Validate {
            full,
            constants,
            workers,
            out,
        } => {
            let table = match &constants {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                    Constants::from_toml(&text)?
                }
                None => Constants::default(),
            };
            let opts = options(workers.unwrap_or(0));
            let mut checks = fast_checks(&table, &opts);
            if full {
                checks.extend(acceptance_checks(&opts));
                for (name, contents) in figure_files(&opts)? {
                    write_file(&out.join(name), &contents)?;
                }
            }
            print!("{}", format_table(&checks));
            if full {
                println!("figure files written to {}", out.display());
            }
            Ok(if checks.iter().all(|c| c.passed) {
                0
            } else {
                1
            })
        }
    }
}
