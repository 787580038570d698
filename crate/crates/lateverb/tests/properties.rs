//! Property-based invariants over randomized rooms, receivers and signals.

use lateverb::absorption::sample_absorption;
use lateverb::analysis::coherence;
use lateverb::filter::gaussian_noise;
use lateverb::geometry::{direction_set, ShoeboxRoom, Vec3, ALL_WALLS, NUM_BANDS};
use lateverb::vbap::{builtin_layout_86, direction_from_angles, triangulate, vbap_gains};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Blended absorption is a convex combination of the wall coefficients:
    /// every a_k stays inside the per-band min/max wall alpha for any room,
    /// receiver and supported VRS count.
    #[test]
    fn absorption_stays_convex(
        dx in 2.0..25.0f64,
        dy in 2.0..25.0f64,
        dz in 2.0..25.0f64,
        alphas in proptest::array::uniform6(proptest::array::uniform7(0.0..1.0f64)),
        fx in 0.05..0.95f64,
        fy in 0.05..0.95f64,
        fz in 0.05..0.95f64,
        k_index in 0usize..5,
    ) {
        let room = ShoeboxRoom::new(Vec3::new(dx, dy, dz), alphas).unwrap();
        let recv = Vec3::new(fx * dx, fy * dy, fz * dz);
        let k = lateverb::geometry::SUPPORTED_VRS_COUNTS[k_index];
        let dirs = direction_set(k).unwrap();
        let sampled = sample_absorption(&room, recv, &dirs).unwrap();
        for coeffs in &sampled.coefficients {
            prop_assert_eq!(coeffs.len(), NUM_BANDS);
            for (b, &v) in coeffs.iter().enumerate() {
                let lo = ALL_WALLS.iter().map(|&w| room.alpha(w, b)).fold(f64::INFINITY, f64::min);
                let hi = ALL_WALLS.iter().map(|&w| room.alpha(w, b)).fold(0.0f64, f64::max);
                prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }
    }

    /// Interaural coherence estimates are always within [-1, 1].
    #[test]
    fn coherence_is_bounded(seed_l in 0u64..1000, seed_r in 0u64..1000, len in 512usize..4096) {
        let l = gaussian_noise(seed_l, len);
        let r = gaussian_noise(seed_r.wrapping_add(1_000_000), len);
        let c = coherence(&l, &r, 44100.0).unwrap();
        for &v in &c.values {
            prop_assert!((-1.0..=1.0).contains(&v), "IC = {v}");
        }
    }

    /// VBAP panning always yields nonnegative gains on at most three
    /// speakers with unit total energy, for any direction.
    #[test]
    fn vbap_gains_are_normalized(az in -180.0..180.0f64, el in -90.0..90.0f64) {
        let layout = builtin_layout_86();
        let tri = triangulate(&layout).unwrap();
        let pan = vbap_gains(direction_from_angles(az, el), &tri).unwrap();
        prop_assert!(pan.gains.len() <= 3);
        let mut energy = 0.0;
        for &(idx, g) in &pan.gains {
            prop_assert!(idx < layout.len());
            prop_assert!(g >= 0.0);
            energy += g * g;
        }
        prop_assert!((energy - 1.0).abs() <= 1e-9);
    }
}
