//! One pulse of the hard-wall mirror on a grid: reflected fraction, norm
//! bookkeeping and the amplitude at the wall during the pulse.

use pulsed_mirror::pulse::{
    apply_pulse, evolve_within_pulse, gaussian_reflection, prepare_incident, PulseConfig,
};
use pulsed_mirror::units::AtomSpec;
use pulsed_mirror::wavepacket::GaussianPacket;

fn main() -> pulsed_mirror::error::Result<()> {
    let atom = AtomSpec::cesium();
    let packet = GaussianPacket::new(-0.66e-6, 0.011, 0.1e-6)?;
    let pulse = PulseConfig::new(60e-6, 1e-6, 0.0, &atom)?;

    let incident = prepare_incident(&packet, &atom, &pulse)?;
    let out = apply_pulse(&incident, &pulse, &atom)?;
    println!("grid of {} nodes, dx = {:.3e} m", incident.n(), incident.dx);
    println!("reflected probability        {:.6e}", out.n_refl);
    println!(
        "norm before / after          {:.15} / {:.15}",
        out.input_norm_sqr,
        out.left_norm_sqr + out.right_norm_sqr
    );
    for f in [0.25, 0.5, 0.75] {
        let mid = evolve_within_pulse(&incident, &pulse, f * pulse.tau, &atom)?;
        println!(
            "|phi(x_M)| / max|phi| at {:.2} tau  {:.2e}",
            f,
            mid.wall_amplitude.norm() / mid.state.max_abs()
        );
    }

    // coarse, refined and extrapolated values
    let r = gaussian_reflection(&packet, &atom, &pulse)?;
    println!(
        "coarse {:.8e}  fine {:.8e}  extrapolated {:.8e}  ({} nodes)",
        r.coarse, r.fine, r.value, r.n_fine
    );
    Ok(())
}
