//! Evaluates interaural coherence in the corridor benchmark near the
//! absorbing wall: renders a diffuse field through K virtual reverb
//! sources, binauralizes with the analytic rigid-sphere HRIRs and reports
//! the frequency where each reduced K first diverges from the 96-VRS
//! reference (|delta IC| > 0.1, octave-smoothed).
//!
//! Takes about a minute; run with: cargo run --example binaural_metrics

use lateverb::analysis::{diffuse_field_eval, divergence_frequency};
use lateverb::hrir::sphere_hrir_set;
use lateverb::scenario::{corridor_positions, corridor_room};
use lateverb::vbap::builtin_layout_86;

fn main() -> Result<(), lateverb::error::Error> {
    let room = corridor_room();
    let position = &corridor_positions()[0];
    let layout = builtin_layout_86();
    let fs = 44100.0;
    let hrirs = sphere_hrir_set(&layout.directions, fs)?;
    let duration = 20.0;
    let seed = 4242;

    println!(
        "corridor position {} ({:.2} m from the absorbing wall), {duration} s noise",
        position.label, position.wall_distance
    );
    let (reference, _) = diffuse_field_eval(
        &room, position.receiver, 96, &layout, &hrirs, duration, seed, false,
    )?;
    for k in [6usize, 12, 24, 48] {
        let (ic, _) = diffuse_field_eval(
            &room, position.receiver, k, &layout, &hrirs, duration, seed, false,
        )?;
        match divergence_frequency(&reference, &ic, 0.1) {
            Some(f) => println!("K = {k:>2}: diverges from the reference above {f:.0} Hz"),
            None => println!("K = {k:>2}: matches the reference everywhere"),
        }
    }
    Ok(())
}
