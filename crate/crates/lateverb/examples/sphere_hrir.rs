//! Builds the analytic rigid-sphere HRIRs and prints the interaural time
//! and level cues for sources around the horizontal plane.
//!
//! Run with: cargo run --example sphere_hrir

use lateverb::filter::{energy, fir_magnitude_at};
use lateverb::hrir::sphere_hrir;
use lateverb::vbap::direction_from_angles;

fn main() -> Result<(), lateverb::error::Error> {
    let fs = 44100.0;
    println!("{:>7}  {:>9}  {:>9}", "az deg", "ITD us", "ILD dB");
    for az in (0..=180).step_by(30) {
        let dir = direction_from_angles(az as f64, 0.0);
        let (left, right) = sphere_hrir(dir, fs);
        let onset = |h: &[f64]| {
            let peak = h.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
            h.iter().position(|&x| x.abs() >= peak * 0.5).unwrap_or(0)
        };
        let itd = (onset(&right) as f64 - onset(&left) as f64) / fs * 1e6;
        let broadband_ild = 10.0 * (energy(&left) / energy(&right)).log10();
        println!("{az:>7}  {itd:>9.0}  {broadband_ild:>9.2}");
    }

    // Spectral ILD at a fully lateral source: the head-shadow shelf shows
    // up above its 1.5-3 kHz transition.
    let (left, right) = sphere_hrir(direction_from_angles(90.0, 0.0), fs);
    println!();
    println!("lateral source (az 90), level difference across frequency:");
    for f in [500.0, 1000.0, 2000.0, 4000.0, 8000.0] {
        let db = 20.0
            * (fir_magnitude_at(&left, fs, f) / fir_magnitude_at(&right, fs, f)).log10();
        println!("  {f:>6.0} Hz: {db:>6.2} dB");
    }
    Ok(())
}
