//! Prints the supported VRS direction sets and their sphericity, the
//! convex-hull roundness measure that grows toward 1 as the set covers the
//! sphere more evenly.
//!
//! Run with: cargo run --example direction_sets

use lateverb::geometry::{direction_set, sphericity, SUPPORTED_VRS_COUNTS};

fn main() -> Result<(), lateverb::error::Error> {
    println!("{:>4}  {:>10}  first three directions", "K", "sphericity");
    for &k in &SUPPORTED_VRS_COUNTS {
        let set = direction_set(k)?;
        let psi = sphericity(&set)?;
        let preview: Vec<String> = set
            .directions()
            .iter()
            .take(3)
            .map(|d| format!("({:+.2} {:+.2} {:+.2})", d.x, d.y, d.z))
            .collect();
        println!("{k:>4}  {psi:>10.4}  {}", preview.join(" "));
    }
    Ok(())
}
