//! Long pulses on a fast packet: N grows linearly in τ with slope |ψ|² v0.

use pulsed_mirror::kernel::nrefl_linear_regime;
use pulsed_mirror::scan::{run_linear_regime_sweep, ExperimentPreset, ScanOptions};

fn main() -> pulsed_mirror::error::Result<()> {
    let preset = ExperimentPreset::fig5();
    let x_m = preset.packet.mean_at(preset.t_center);
    let d = nrefl_linear_regime(&preset.packet, &preset.atom, preset.t_center, 10e-6, x_m);
    println!(
        "at tau = 10 us: sqrt(alpha) k0 = {:.2}, alpha k0 dk = {:.3}",
        d.sqrt_alpha_k0, d.alpha_k0_dk
    );

    let r = run_linear_regime_sweep(&preset, &ScanOptions::from_env())?;
    let fit = r.fit.unwrap();
    println!(
        "fit of {} over {} durations: slope {:.4e} 1/s, expected {:.4e}, R^2 {:.6} (sqrt fit {:.6})",
        fit.source.as_str(),
        r.len(),
        fit.slope,
        fit.expected_slope,
        fit.r_squared,
        fit.sqrt_r_squared
    );
    Ok(())
}
