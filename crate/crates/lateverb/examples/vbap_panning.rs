//! Pans a handful of directions on the built-in 86-loudspeaker layout with
//! vector-base amplitude panning and prints the active speakers and gains.
//!
//! Run with: cargo run --example vbap_panning

use lateverb::vbap::{builtin_layout_86, direction_from_angles, triangulate, vbap_gains};

fn main() -> Result<(), lateverb::error::Error> {
    let layout = builtin_layout_86();
    let tri = triangulate(&layout)?;
    println!(
        "layout '{}': {} speakers, {} hull triangles",
        layout.name,
        layout.len(),
        tri.triangles.len()
    );

    for (az, el) in [(0.0, 0.0), (17.0, 0.0), (95.0, 22.0), (-130.0, -50.0), (0.0, 90.0)] {
        let dir = direction_from_angles(az, el);
        let pan = vbap_gains(dir, &tri)?;
        let sum_sq: f64 = pan.gains.iter().map(|(_, g)| g * g).sum();
        print!("az {az:>6.1}  el {el:>5.1}  ->");
        for (idx, g) in &pan.gains {
            print!("  speaker {idx:>2} x {g:.3}");
        }
        println!("  (energy {sum_sq:.3})");
    }
    Ok(())
}
