//! Generates the pink percussive test pulse — unit peak, -60 dB envelope
//! at 36 ms, octave-band energy falling 3 dB per octave — verifies those
//! properties and writes it as a mono WAV.
//!
//! Run with: cargo run --example pink_stimulus

use lateverb::scenario::{pink_pulse, pink_pulse_decay_time, psd_slope_db_per_octave, PINK_PULSE_FS};
use lateverb::wav::write_wav;

fn main() -> Result<(), lateverb::error::Error> {
    let pulse = pink_pulse();
    let peak = pulse.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let t60 = pink_pulse_decay_time(&pulse, PINK_PULSE_FS);
    let slope = psd_slope_db_per_octave(&pulse, PINK_PULSE_FS, 100.0, 10000.0);
    println!("{} samples at {} Hz", pulse.len(), PINK_PULSE_FS);
    println!("peak amplitude: {peak:.6}");
    println!("envelope reaches -60 dB FS at {:.1} ms", t60 * 1e3);
    println!("octave-band spectral slope: {slope:.2} dB per octave");

    let out = std::env::temp_dir().join("pink_pulse.wav");
    write_wav(&out, &[pulse], PINK_PULSE_FS)?;
    println!("wrote {}", out.display());
    Ok(())
}
