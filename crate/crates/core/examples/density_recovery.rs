//! Mirror-position scan turned into a normalized density estimate and
//! compared with |ψ_T(x)|².

use pulsed_mirror::scan::{run_position_scan, ExperimentPreset, ScanOptions};

fn main() -> pulsed_mirror::error::Result<()> {
    let opts = ScanOptions::from_env();
    for (preset, tau) in [
        (ExperimentPreset::fig4(), 1e-6),
        (ExperimentPreset::fig4(), 5e-6),
        (ExperimentPreset::fig5(), 30e-6),
    ] {
        let r = run_position_scan(&preset, tau, &opts)?;
        let est = r
            .estimate
            .as_ref()
            .expect("position scans carry an estimate");
        let peak = r.density_true.iter().copied().fold(0.0, f64::max);
        let dev = est
            .values
            .iter()
            .zip(&r.density_true)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!(
            "{} tau = {:>4.1} us: {} positions, estimate from {} ({}), integral {:.9}, max deviation {:.2}% of peak",
            preset.id,
            tau * 1e6,
            r.len(),
            r.estimate_source.unwrap().as_str(),
            est.method.as_str(),
            est.integral(),
            100.0 * dev / peak
        );
    }
    Ok(())
}
