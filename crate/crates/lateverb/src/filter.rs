//! Shared filter machinery: minimum-phase FIR realization of 7-octave-band
//! gain targets, FFT convolution, and zero-phase octave band-pass filtering.
//!
//! The same band-gain FIR mechanism serves the image-source reflection
//! filters, the FDN in-loop attenuation filters, and the per-VRS output
//! absorption filters.

use crate::geometry::{BAND_CENTERS, NUM_BANDS};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// FIR length for band-gain filters at 44.1 kHz.
pub const BAND_FIR_TAPS: usize = 256;

/// Design grid size for the minimum-phase construction.
const DESIGN_FFT: usize = 4096;

/// Magnitudes below this floor are clamped before taking the log (a band
/// gain of exactly zero has no finite log magnitude).
const MAG_FLOOR: f64 = 1e-6;

pub fn fft_forward(buf: &mut [Complex<f64>]) {
    FftPlanner::new().plan_fft_forward(buf.len()).process(buf);
}

pub fn fft_inverse(buf: &mut [Complex<f64>]) {
    FftPlanner::new().plan_fft_inverse(buf.len()).process(buf);
    let scale = 1.0 / buf.len() as f64;
    for x in buf.iter_mut() {
        *x *= scale;
    }
}

/// Target magnitude at frequency `f` for octave-band `gains`: linear
/// interpolation in log-frequency between band centers, clamped to the edge
/// bands outside 125 Hz .. 8 kHz.
pub fn band_target_magnitude(gains: &[f64; NUM_BANDS], f: f64) -> f64 {
    if f <= BAND_CENTERS[0] {
        return gains[0];
    }
    if f >= BAND_CENTERS[NUM_BANDS - 1] {
        return gains[NUM_BANDS - 1];
    }
    let lf = f.log2();
    for b in 0..NUM_BANDS - 1 {
        let lo = BAND_CENTERS[b].log2();
        let hi = BAND_CENTERS[b + 1].log2();
        if lf <= hi {
            let w = (lf - lo) / (hi - lo);
            return gains[b] * (1.0 - w) + gains[b + 1] * w;
        }
    }
    gains[NUM_BANDS - 1]
}

/// Minimum-phase FIR with `taps` coefficients matching the octave-band gain
/// targets at sample rate `fs`.
///
/// Real cepstrum method on a dense grid; truncation error at the band
/// centers is compensated by re-designing with adjusted targets.
pub fn design_band_fir(gains: &[f64; NUM_BANDS], fs: f64, taps: usize) -> Vec<f64> {
    let mut adjusted = *gains;
    let mut fir = design_band_fir_once(&adjusted, fs, taps);
    for _ in 0..4 {
        let mut worst = 0.0f64;
        for (b, &fc) in BAND_CENTERS.iter().enumerate() {
            if fc >= fs / 2.0 {
                continue;
            }
            let achieved = fir_magnitude_at(&fir, fs, fc).max(MAG_FLOOR);
            let target = gains[b].max(MAG_FLOOR);
            worst = worst.max((achieved / target).ln().abs());
            adjusted[b] = (adjusted[b].max(MAG_FLOOR) * target / achieved).max(MAG_FLOOR);
        }
        if worst < 0.005 {
            break;
        }
        fir = design_band_fir_once(&adjusted, fs, taps);
    }
    fir
}

fn design_band_fir_once(gains: &[f64; NUM_BANDS], fs: f64, taps: usize) -> Vec<f64> {
    min_phase_fir(|f| band_target_magnitude(gains, f), fs, taps)
}

/// Minimum-phase FIR realizing an arbitrary magnitude response, evaluated
/// on the design grid (real cepstrum method).
pub fn min_phase_fir(magnitude: impl Fn(f64) -> f64, fs: f64, taps: usize) -> Vec<f64> {
    let n = DESIGN_FFT;
    let mut log_mag = vec![Complex::new(0.0, 0.0); n];
    for (i, v) in log_mag.iter_mut().enumerate() {
        // Hermitian grid: bin i and n-i share a magnitude.
        let k = i.min(n - i);
        let f = k as f64 * fs / n as f64;
        let m = magnitude(f).max(MAG_FLOOR);
        *v = Complex::new(m.ln(), 0.0);
    }
    // Real cepstrum.
    let mut cep = log_mag;
    fft_inverse(&mut cep);
    // Fold to a causal (minimum-phase) cepstrum.
    let mut folded = vec![Complex::new(0.0, 0.0); n];
    folded[0] = cep[0];
    folded[n / 2] = cep[n / 2];
    for i in 1..n / 2 {
        folded[i] = cep[i] + cep[n - i].conj();
    }
    fft_forward(&mut folded);
    for v in folded.iter_mut() {
        *v = v.exp();
    }
    fft_inverse(&mut folded);
    folded.iter().take(taps).map(|c| c.re).collect()
}

/// Magnitude response of an FIR at frequency `f` (direct DFT evaluation).
pub fn fir_magnitude_at(fir: &[f64], fs: f64, f: f64) -> f64 {
    let w = 2.0 * std::f64::consts::PI * f / fs;
    let mut re = 0.0;
    let mut im = 0.0;
    for (n, &h) in fir.iter().enumerate() {
        let phase = w * n as f64;
        re += h * phase.cos();
        im -= h * phase.sin();
    }
    (re * re + im * im).sqrt()
}

/// Full linear convolution, length `a.len() + b.len() - 1`.
pub fn fft_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    // Direct form wins for short kernels.
    let kernel = a.len().min(b.len());
    if kernel <= 64 {
        let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
        let mut out = vec![0.0; out_len];
        for (i, &s) in short.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            for (j, &l) in long.iter().enumerate() {
                out[i + j] += s * l;
            }
        }
        return out;
    }
    let n = out_len.next_power_of_two();
    let mut fa = vec![Complex::new(0.0, 0.0); n];
    let mut fb = vec![Complex::new(0.0, 0.0); n];
    for (x, &v) in fa.iter_mut().zip(a) {
        x.re = v;
    }
    for (x, &v) in fb.iter_mut().zip(b) {
        x.re = v;
    }
    fft_forward(&mut fa);
    fft_forward(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    fft_inverse(&mut fa);
    fa.iter().take(out_len).map(|c| c.re).collect()
}

/// Zero-phase octave band-pass around `f_center`: FFT of the whole signal,
/// raised-cosine band edges (1/6-octave transitions) at f_center / sqrt(2)
/// and f_center * sqrt(2), inverse FFT.
pub fn bandpass_zero_phase(signal: &[f64], fs: f64, f_center: f64) -> Vec<f64> {
    let n = signal.len().next_power_of_two().max(2);
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for (x, &v) in buf.iter_mut().zip(signal) {
        x.re = v;
    }
    fft_forward(&mut buf);
    let lo = f_center / 2.0f64.sqrt();
    let hi = f_center * 2.0f64.sqrt();
    let trans = 2.0f64.powf(1.0 / 12.0); // half of a 1/6-octave transition
    for (i, v) in buf.iter_mut().enumerate() {
        let k = i.min(n - i);
        let f = k as f64 * fs / n as f64;
        *v *= octave_mask(f, lo, hi, trans);
    }
    fft_inverse(&mut buf);
    buf.iter().take(signal.len()).map(|c| c.re).collect()
}

fn octave_mask(f: f64, lo: f64, hi: f64, trans: f64) -> f64 {
    if f <= 0.0 {
        return 0.0;
    }
    let edge = |f: f64, cutoff: f64| -> f64 {
        // Raised cosine in log-frequency over [cutoff/trans, cutoff*trans].
        let x = (f / cutoff).log2() / (2.0 * trans.log2());
        if x <= -0.5 {
            0.0
        } else if x >= 0.5 {
            1.0
        } else {
            0.5 * (1.0 + (std::f64::consts::PI * x).sin())
        }
    };
    edge(f, lo) * (1.0 - edge(f, hi))
}

/// Total energy of a signal.
pub fn energy(signal: &[f64]) -> f64 {
    signal.iter().map(|x| x * x).sum()
}

/// Seeded unit-variance Gaussian noise (ChaCha8 + Box-Muller); the one
/// source of randomness in the crate, fully determined by the seed.
pub fn gaussian_noise(seed: u64, len: usize) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(len + 1);
    while out.len() < len {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        out.push(r * c);
        out.push(r * s);
    }
    out.truncate(len);
    out
}
