//! Projections, filtered back-projection and the 3D scan simulation.

use std::f64::consts::PI;
use std::io::Cursor;

use proptest::prelude::*;
use pulsed_mirror::error::Error;
use pulsed_mirror::scan::{run_position_scan, ExperimentPreset, Method, ScanOptions};
use pulsed_mirror::tomography::{
    fbp_reconstruct, plane_marginal, project, read_sinogram_csv, simulate_3d_scan, tomo_demo,
    uniform_angles, uniform_offsets, write_sinogram_csv, Blob, Grid2, Phantom, PhantomKind,
    SeparablePacket, Sinogram, TomoScan,
};
use pulsed_mirror::wavepacket::GaussianPacket;

fn opts() -> ScanOptions {
    ScanOptions::default()
}

#[test]
fn isotropic_phantom_is_recovered() {
    let d = tomo_demo(PhantomKind::Gaussian, 60, 129, &opts()).unwrap();
    assert!(d.l2_error < 0.03, "{}", d.l2_error);
    assert!(!d.reconstruction.under_sampled && !d.reconstruction.empty);
    assert!((d.reconstruction.density.integral() - 1.0).abs() < 1e-12);
    assert_eq!(d.peak_offset_cells(), Some(0.0));
}

#[test]
fn two_gaussian_peaks_land_within_a_cell() {
    let d = tomo_demo(PhantomKind::TwoGaussian, 60, 129, &opts()).unwrap();
    assert_eq!(d.recon_peaks.len(), 2);
    assert!(d.peak_offset_cells().unwrap() <= 1.0);
    assert!(d.l2_error < 0.05, "{}", d.l2_error);
}

#[test]
fn separable_packet_through_the_full_pipeline() {
    let d = tomo_demo(PhantomKind::Separable, 60, 129, &opts()).unwrap();
    assert!(d.l2_error < 0.05, "{}", d.l2_error);
}

#[test]
fn numerical_projection_matches_the_closed_form() {
    let ph = Phantom {
        blobs: vec![
            Blob {
                weight: 0.7,
                cx: 0.5,
                cy: -0.3,
                sx: 0.6,
                sy: 0.9,
            },
            Blob {
                weight: 0.3,
                cx: -1.0,
                cy: 0.8,
                sx: 0.5,
                sy: 0.5,
            },
        ],
    };
    let grid = Grid2::square((0.0, 0.0), 6.0, 241).unwrap();
    // bilinear interpolation limits agreement to about h²/8σ²
    let d = ph.to_density(grid);
    for (a, s) in [(0.0, 0.2), (0.7, -0.5), (PI / 2.0, 1.0), (2.5, 0.0)] {
        let num = plane_marginal(&d, (0.0, 0.0), a, s).value;
        let exact = ph.marginal((0.0, 0.0), a, s);
        assert!(
            (num - exact).abs() < 1e-3 * exact.max(1e-3),
            "θ={a} s={s}: {num} vs {exact}"
        );
    }
}

#[test]
fn scan_column_equals_the_one_dimensional_estimate() {
    let p = ExperimentPreset::fig3();
    let w = p.packet.width_at(p.t_center, &p.atom);
    let packet = SeparablePacket {
        x: p.packet,
        y: GaussianPacket::new(-0.3e-6, 0.005, 0.2e-6).unwrap(),
        z: GaussianPacket::new(0.0, 0.02, 1e-6).unwrap(),
    };
    let offsets = uniform_offsets(6.0 * w, 61);
    let scan = TomoScan {
        atom: p.atom.clone(),
        t_center: p.t_center,
        tau: 1e-6,
        center: (0.0, 0.0),
        offsets: offsets.clone(),
        method: Method::Kernel,
    };
    let sino = simulate_3d_scan(&packet, &scan, &[PI / 2.0, 1.5 * PI], &opts()).unwrap();
    let mut one = p.clone();
    one.xm_list = offsets;
    one.methods = [Method::Kernel].into_iter().collect();
    let e = run_position_scan(&one, 1e-6, &opts())
        .unwrap()
        .estimate
        .unwrap()
        .values;
    let peak = e.iter().copied().fold(0.0, f64::max);
    for (a, b) in sino.profile(0).iter().zip(&e) {
        assert!((a - b).abs() <= 1e-6 * peak);
    }
    // θ + π reverses the profile
    let rev: Vec<f64> = sino.profile(1).iter().rev().copied().collect();
    assert_eq!(rev, sino.profile(0));

    // θ = 0 scans the y factor, whatever x is doing
    let y_scan = TomoScan {
        center: (0.0, packet.y.mean_at(p.t_center)),
        offsets: uniform_offsets(6.0 * packet.y.width_at(p.t_center, &p.atom), 41),
        ..scan.clone()
    };
    let s0 = simulate_3d_scan(&packet, &y_scan, &[0.0], &opts()).unwrap();
    let wy = packet.y.width_at(p.t_center, &p.atom);
    let mid = s0.profile(0)[20];
    let expect = 1.0 / ((2.0 * PI).sqrt() * wy);
    assert!((mid / expect - 1.0).abs() < 0.05, "{mid} vs {expect}");

    // oblique orientations need an isotropic packet
    let e = simulate_3d_scan(&packet, &scan, &[0.3], &opts()).unwrap_err();
    assert!(matches!(e, Error::Unsupported(_)), "{e}");
}

#[test]
fn few_angles_and_empty_sinograms_are_flagged() {
    let ph = Phantom::isotropic(1.0);
    let offsets = uniform_offsets(7.0, 65);
    let grid = Grid2::square((0.0, 0.0), 7.0 / 2f64.sqrt(), 65).unwrap();
    let r = fbp_reconstruct(
        &ph.sinogram((0.0, 0.0), &uniform_angles(12), &offsets),
        grid,
    )
    .unwrap();
    assert!(r.under_sampled);

    let zero = Sinogram {
        angles: uniform_angles(40),
        offsets: offsets.clone(),
        values: vec![0.0; 40 * 65],
        center: (0.0, 0.0),
    };
    let r = fbp_reconstruct(&zero, grid).unwrap();
    assert!(r.empty && !r.under_sampled);
    assert!(r.density.values.iter().all(|&v| v == 0.0));

    let mut bent = zero.clone();
    bent.offsets[3] += 0.01;
    assert!(fbp_reconstruct(&bent, grid).is_err());
}

#[test]
fn sinogram_csv_round_trip() {
    let ph = Phantom::two_gaussian(1.0);
    let s = ph.sinogram((0.5, -0.5), &uniform_angles(7), &uniform_offsets(5.0, 33));
    let mut buf = Vec::new();
    write_sinogram_csv(&s, &mut buf).unwrap();
    let back = read_sinogram_csv(Cursor::new(buf), (0.5, -0.5)).unwrap();
    assert_eq!(back, s);
    let bad =
        read_sinogram_csv(Cursor::new("angle_rad,offset_m,value\n0,1\n"), (0.0, 0.0)).unwrap_err();
    assert!(bad.to_string().contains("line 2"), "{bad}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn every_projection_carries_the_full_mass(
        w in 0.2f64..3.0, cx in -1.0f64..1.0, cy in -1.0f64..1.0,
        sx in 0.4f64..1.2, sy in 0.4f64..1.2,
    ) {
        let ph = Phantom { blobs: vec![Blob { weight: w, cx, cy, sx, sy }] };
        let s = ph.sinogram((0.0, 0.0), &uniform_angles(9), &uniform_offsets(9.0, 181));
        for m in s.profile_integrals() {
            prop_assert!((m / w - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn back_projection_is_linear(a in 0.1f64..2.0, b in 0.1f64..2.0, shift in -1.5f64..1.5) {
        let angles = uniform_angles(36);
        let offsets = uniform_offsets(6.0, 49);
        let grid = Grid2::square((0.0, 0.0), 4.0, 33).unwrap();
        let p = Phantom { blobs: vec![Blob { weight: a, cx: shift, cy: 0.0, sx: 0.8, sy: 0.8 }] };
        let q = Phantom { blobs: vec![Blob { weight: b, cx: 0.0, cy: -shift, sx: 0.6, sy: 0.6 }] };
        let sp = p.sinogram((0.0, 0.0), &angles, &offsets);
        let sq = q.sinogram((0.0, 0.0), &angles, &offsets);
        let rp = fbp_reconstruct(&sp, grid).unwrap().unclipped;
        let rq = fbp_reconstruct(&sq, grid).unwrap().unclipped;
        let rs = fbp_reconstruct(&sp.add(&sq).unwrap(), grid).unwrap().unclipped;
        let scale = rs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for ((x, y), z) in rp.iter().zip(&rq).zip(&rs) {
            prop_assert!((x + y - z).abs() <= 1e-12 * scale);
        }
    }
}

#[test]
fn gridded_projection_matches_the_phantom_sinogram() {
    let ph = Phantom::isotropic(1.0);
    let grid = Grid2::square((0.0, 0.0), 6.0, 201).unwrap();
    let angles = uniform_angles(5);
    let offsets = uniform_offsets(3.0, 13);
    let a = project(&ph.to_density(grid), (0.0, 0.0), &angles, &offsets);
    let b = ph.sinogram((0.0, 0.0), &angles, &offsets);
    let peak = b.values.iter().copied().fold(0.0, f64::max);
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() < 1e-3 * peak, "{x} vs {y}");
    }
}
