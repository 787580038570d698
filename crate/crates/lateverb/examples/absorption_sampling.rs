//! Samples the position-dependent absorption a_k seen by the virtual
//! reverb sources in the corridor benchmark room. Close to the highly
//! absorbing end wall that wall dominates many directions; far away its
//! influence shrinks to the few VRS that still point at it.
//!
//! Run with: cargo run --example absorption_sampling

use lateverb::absorption::sample_absorption;
use lateverb::geometry::{direction_set, Vec3};
use lateverb::scenario::{corridor_positions, corridor_room};

fn main() -> Result<(), lateverb::error::Error> {
    let room = corridor_room();
    let dirs = direction_set(24)?;
    let positions = corridor_positions();
    for p in &positions {
        let recv: Vec3 = p.receiver.position;
        let sampled = sample_absorption(&room, recv, &dirs)?;
        let band: Vec<f64> = sampled.coefficients.iter().map(|a| a[3]).collect();
        let mean = band.iter().sum::<f64>() / band.len() as f64;
        let strong = band.iter().filter(|&&a| a > 0.5).count();
        println!(
            "position {} ({:>6.2} m from the absorbing wall): 1 kHz a_k mean {mean:.3}, \
             {strong:>2}/24 VRS with a_k > 0.5",
            p.label, p.wall_distance
        );
    }
    Ok(())
}
