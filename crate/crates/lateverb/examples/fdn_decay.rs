//! Designs the 96-channel feedback delay network for the corridor room,
//! runs it on an impulse and compares the Schroeder-measured RT60 per
//! octave band against the Eyring design target.
//!
//! Run with: cargo run --example fdn_decay

use lateverb::fdn::{design_fdn, measure_rt60, process, rt60_target, FDN_CHANNELS};
use lateverb::geometry::BAND_CENTERS;
use lateverb::scenario::corridor_room;

fn main() -> Result<(), lateverb::error::Error> {
    let room = corridor_room();
    let fs = 16000.0;
    let rt = rt60_target(&room);
    let config = design_fdn(&room, fs)?;

    let min = config.delays.iter().min().unwrap();
    let max = config.delays.iter().max().unwrap();
    let mean = config.delays.iter().sum::<usize>() as f64 / FDN_CHANNELS as f64;
    println!(
        "delays: {min}..{max} samples (mean {mean:.0}, mean free path {:.2} m)",
        mean / fs * 343.0
    );

    // Alternating-sign impulse excitation keeps the energy out of the
    // Householder matrix's -1 eigenvector, which would bias the early fit.
    let mut inputs = vec![vec![0.0; 1]; FDN_CHANNELS];
    for (i, c) in inputs.iter_mut().enumerate() {
        c[0] = if i % 2 == 0 { 1.0 } else { -1.0 };
    }
    let max_rt = rt.iter().cloned().fold(0.0f64, f64::max);
    let n = ((max_rt * 1.3 + 0.5) * fs) as usize;
    let out = process(&config, &inputs, n)?;
    let mix: Vec<f64> = (0..n).map(|t| out.iter().map(|c| c[t]).sum()).collect();

    println!("{:>8}  {:>10}  {:>10}  {:>7}", "band Hz", "target s", "measured s", "error");
    for (b, &fc) in BAND_CENTERS.iter().enumerate() {
        let measured = measure_rt60(&mix, fs, fc)?;
        println!(
            "{fc:>8.0}  {:>10.3}  {measured:>10.3}  {:>+6.1}%",
            rt[b],
            (measured - rt[b]) / rt[b] * 100.0
        );
    }
    Ok(())
}
