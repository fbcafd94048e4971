//! Spectral free evolution of a caesium packet checked against the closed form.

use pulsed_mirror::units::AtomSpec;
use pulsed_mirror::wavepacket::{
    density_moments, free_propagate, sample_gaussian, GaussianPacket, GridSpec,
};

fn main() -> pulsed_mirror::error::Result<()> {
    let atom = AtomSpec::cesium();
    let packet = GaussianPacket::new(-0.66e-6, 0.011, 0.1e-6)?;
    let grid = GridSpec::centered(-0.33e-6, 1e-9, 4096)?;

    let start = sample_gaussian(&packet, &atom, 0.0, &grid)?;
    for t in [20e-6, 40e-6, 60e-6] {
        let evolved = free_propagate(&start, t, &atom)?;
        let exact = sample_gaussian(&packet, &atom, t, &grid)?;
        let err = evolved
            .amps
            .iter()
            .zip(&exact.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            * grid.dx.sqrt();
        let m = density_moments(&evolved);
        println!(
            "t = {:>4.0} us  mean {:+.4e} m (expected {:+.4e})  width {:.4e} m (expected {:.4e})  max error {err:.1e}",
            t * 1e6,
            m.mean,
            packet.mean_at(t),
            m.spread,
            packet.width_at(t, &atom),
        );
    }
    Ok(())
}
