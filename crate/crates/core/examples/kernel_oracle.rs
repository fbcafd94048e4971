//! Reflection probability from the momentum-space kernel compared with the
//! grid propagator over a range of pulse durations.

use pulsed_mirror::kernel::{kernel_I, nrefl_exact, KernelParams, QuadratureSpec, Spectrum};
use pulsed_mirror::pulse::{gaussian_reflection, right_moving_edge, PulseConfig};
use pulsed_mirror::units::AtomSpec;
use pulsed_mirror::wavepacket::GaussianPacket;

fn main() -> pulsed_mirror::error::Result<()> {
    let atom = AtomSpec::cesium();
    let packet = GaussianPacket::new(-0.66e-6, 0.011, 0.1e-6)?;
    let t = 60e-6;

    let params = KernelParams::from_tau(1e-6, &atom)?;
    let k0 = packet.k0(&atom);
    let a = kernel_I(k0, 1.1 * k0, params);
    let b = kernel_I(1.1 * k0, k0, params);
    println!(
        "I(k0, 1.1 k0) = {a:.6e}, conj I(1.1 k0, k0) = {:.6e}",
        b.conj()
    );

    println!(
        "{:>10} {:>14} {:>14} {:>10}",
        "tau [us]", "kernel", "grid", "rel diff"
    );
    for tau in [0.1e-6, 0.5e-6, 1e-6, 2e-6, 5e-6] {
        let params = KernelParams::from_tau(tau, &atom)?;
        let spectrum = Spectrum::Gaussian {
            packet: &packet,
            atom: &atom,
            t,
            x_m: 0.0,
            edge: right_moving_edge(&packet),
        };
        let exact = nrefl_exact(spectrum, params, &QuadratureSpec::default())?;
        let grid = gaussian_reflection(&packet, &atom, &PulseConfig::new(t, tau, 0.0, &atom)?)?;
        println!(
            "{:>10.2} {:>14.8e} {:>14.8e} {:>10.2e}",
            tau * 1e6,
            exact.value,
            grid.value,
            (exact.value - grid.value).abs() / exact.value
        );
    }
    Ok(())
}
