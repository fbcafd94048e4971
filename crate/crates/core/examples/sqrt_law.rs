//! τ sweep at the packet centre: exact values against the √τ law and its
//! first correction.

use pulsed_mirror::scan::{run_tau_scan, ExperimentPreset, Method, ScanOptions};

fn main() -> pulsed_mirror::error::Result<()> {
    let mut preset = ExperimentPreset::fig3();
    preset.methods = [Method::Kernel, Method::Eq9, Method::Eq11]
        .into_iter()
        .collect();
    let r = run_tau_scan(&preset, &ScanOptions::from_env())?;

    let exact = r.column(Method::Kernel).unwrap();
    let eq9 = r.column(Method::Eq9).unwrap();
    let eq11 = r.column(Method::Eq11).unwrap();
    println!(
        "{:>10} {:>12} {:>10} {:>10} {:>8}",
        "tau [us]", "N exact", "sqrt law", "+corr", "tau/tau*"
    );
    for i in (0..r.len()).step_by(3) {
        println!(
            "{:>10.4} {:>12.5e} {:>+10.3} {:>+10.3} {:>8.3}",
            r.axis_values[i] * 1e6,
            exact[i],
            eq9[i] / exact[i] - 1.0,
            eq11[i] / exact[i] - 1.0,
            r.tau_over_tau_star[i]
        );
    }
    Ok(())
}
