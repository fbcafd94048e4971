//! Orientation scans of planar phantoms inverted by filtered back-projection.

use pulsed_mirror::scan::ScanOptions;
use pulsed_mirror::tomography::{tomo_demo, PhantomKind};

fn main() -> pulsed_mirror::error::Result<()> {
    let opts = ScanOptions::from_env();
    for name in PhantomKind::NAMES {
        let demo = tomo_demo(PhantomKind::parse(name)?, 60, 129, &opts)?;
        println!(
            "{name:>13}: L2 error {:.3e}, peak offset {:?} cells",
            demo.l2_error,
            demo.peak_offset_cells()
        );
    }
    // too few orientations
    let sparse = tomo_demo(PhantomKind::TwoGaussian, 12, 129, &opts)?;
    println!(
        "  12 angles: L2 error {:.3e}, under-sampled {}",
        sparse.l2_error, sparse.reconstruction.under_sampled
    );
    Ok(())
}
