//! Binauralization and the interaural-coherence / level-difference
//! evaluation: Welch cross-spectral estimates and the diffuse-field
//! protocol driving them.

use crate::absorption::sample_absorption;
use crate::error::{Error, Result};
use crate::filter::{design_band_fir, fft_forward, fft_inverse, gaussian_noise, BAND_FIR_TAPS};
use crate::geometry::{direction_set, Pose, ShoeboxRoom, NUM_BANDS};
use crate::hrir::HrirSet;
use crate::vbap::{triangulate, vbap_gains, LoudspeakerLayout};
use rustfft::num_complex::Complex;

/// Welch segment length in samples (512 at 44.1 kHz per the protocol).
pub const WELCH_WINDOW: usize = 512;
/// Hop for 75% overlap.
pub const WELCH_HOP: usize = WELCH_WINDOW / 4;

/// Interaural coherence per frequency bin.
#[derive(Debug, Clone)]
pub struct CoherenceCurve {
    pub freqs: Vec<f64>,
    pub values: Vec<f64>,
}

/// Interaural level difference in dB per frequency bin.
#[derive(Debug, Clone)]
pub struct IldCurve {
    pub freqs: Vec<f64>,
    pub values: Vec<f64>,
}

struct WelchSpectra {
    freqs: Vec<f64>,
    g_ll: Vec<f64>,
    g_rr: Vec<f64>,
    g_lr: Vec<Complex<f64>>,
}

/// Averaged auto- and cross-spectra over Hann-windowed segments with 75%
/// overlap.
fn welch_spectra(l: &[f64], r: &[f64], fs: f64) -> Result<WelchSpectra> {
    if l.len() != r.len() {
        return Err(Error::InvalidInput(format!(
            "channel lengths differ: {} vs {}",
            l.len(),
            r.len()
        )));
    }
    if l.len() < WELCH_WINDOW {
        return Err(Error::InvalidInput(format!(
            "signals shorter than one {WELCH_WINDOW}-sample window"
        )));
    }
    let window: Vec<f64> = (0..WELCH_WINDOW)
        .map(|n| {
            0.5 * (1.0
                - (2.0 * std::f64::consts::PI * n as f64 / WELCH_WINDOW as f64).cos())
        })
        .collect();
    let bins = WELCH_WINDOW / 2 + 1;
    let mut g_ll = vec![0.0; bins];
    let mut g_rr = vec![0.0; bins];
    let mut g_lr = vec![Complex::new(0.0, 0.0); bins];
    let mut segments = 0usize;
    let mut buf_l = vec![Complex::new(0.0, 0.0); WELCH_WINDOW];
    let mut buf_r = vec![Complex::new(0.0, 0.0); WELCH_WINDOW];
    let mut start = 0;
    while start + WELCH_WINDOW <= l.len() {
        for n in 0..WELCH_WINDOW {
            buf_l[n] = Complex::new(l[start + n] * window[n], 0.0);
            buf_r[n] = Complex::new(r[start + n] * window[n], 0.0);
        }
        fft_forward(&mut buf_l);
        fft_forward(&mut buf_r);
        for b in 0..bins {
            g_ll[b] += buf_l[b].norm_sqr();
            g_rr[b] += buf_r[b].norm_sqr();
            g_lr[b] += buf_l[b] * buf_r[b].conj();
        }
        segments += 1;
        start += WELCH_HOP;
    }
    let scale = 1.0 / segments as f64;
    for b in 0..bins {
        g_ll[b] *= scale;
        g_rr[b] *= scale;
        g_lr[b] *= scale;
    }
    Ok(WelchSpectra {
        freqs: (0..bins).map(|b| b as f64 * fs / WELCH_WINDOW as f64).collect(),
        g_ll,
        g_rr,
        g_lr,
    })
}

/// Interaural coherence C_lr(f) = Re(G_lr / sqrt(G_ll G_rr)).
pub fn coherence(l: &[f64], r: &[f64], fs: f64) -> Result<CoherenceCurve> {
    let s = welch_spectra(l, r, fs)?;
    let total_l: f64 = s.g_ll.iter().sum();
    let total_r: f64 = s.g_rr.iter().sum();
    if total_l <= 0.0 || total_r <= 0.0 {
        return Err(Error::UndefinedEstimate(
            "coherence of a zero-energy channel".into(),
        ));
    }
    let values = s
        .g_lr
        .iter()
        .zip(s.g_ll.iter().zip(&s.g_rr))
        .map(|(lr, (&ll, &rr))| {
            let denom = (ll * rr).sqrt();
            if denom > 0.0 {
                // Mathematically bounded by Cauchy-Schwarz; clamp away
                // the last-ulp overshoot of the division.
                (lr.re / denom).clamp(-1.0, 1.0)
            } else {
                0.0
            }
        })
        .collect();
    Ok(CoherenceCurve {
        freqs: s.freqs,
        values,
    })
}

/// Interaural level difference ILD(f) = 10 log10(G_ll / G_rr) dB.
pub fn ild(l: &[f64], r: &[f64], fs: f64) -> Result<IldCurve> {
    let s = welch_spectra(l, r, fs)?;
    let total_r: f64 = s.g_rr.iter().sum();
    if total_r <= 0.0 {
        return Err(Error::UndefinedEstimate(
            "ILD with a zero-energy right channel".into(),
        ));
    }
    let values = s
        .g_ll
        .iter()
        .zip(&s.g_rr)
        .map(|(&ll, &rr)| 10.0 * (ll / rr).log10())
        .collect();
    Ok(IldCurve {
        freqs: s.freqs,
        values,
    })
}

/// Convolves each loudspeaker channel with the HRIR pair of the angularly
/// nearest database direction and sums per ear.
pub fn binauralize(
    signals: &[Vec<f64>],
    layout: &LoudspeakerLayout,
    hrirs: &HrirSet,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if hrirs.is_empty() {
        return Err(Error::InvalidInput("empty HRIR set".into()));
    }
    if signals.len() != layout.len() {
        return Err(Error::InvalidInput(format!(
            "{} signals for a {}-speaker layout",
            signals.len(),
            layout.len()
        )));
    }
    let sig_len = signals.iter().map(Vec::len).max().unwrap_or(0);
    let hrir_len = hrirs.left.first().map_or(0, Vec::len);
    if sig_len == 0 || hrir_len == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let out_len = sig_len + hrir_len - 1;
    let mut left = vec![0.0; out_len];
    let mut right = vec![0.0; out_len];
    for (sig, &dir) in signals.iter().zip(&layout.directions) {
        if sig.iter().all(|&x| x == 0.0) {
            continue;
        }
        let idx = hrirs.nearest(dir);
        let l = crate::filter::fft_convolve(sig, &hrirs.left[idx]);
        let r = crate::filter::fft_convolve(sig, &hrirs.right[idx]);
        for (acc, v) in left.iter_mut().zip(&l) {
            *acc += v;
        }
        for (acc, v) in right.iter_mut().zip(&r) {
            *acc += v;
        }
    }
    Ok((left, right))
}

/// Octave-smoothed copy of `values`: each bin is replaced by the mean over
/// bins whose frequency lies within +-half an octave.
pub fn octave_smooth(freqs: &[f64], values: &[f64]) -> Vec<f64> {
    let sqrt2 = 2.0f64.sqrt();
    freqs
        .iter()
        .zip(values)
        .map(|(&f, &v)| {
            if f <= 0.0 {
                return v;
            }
            let (lo, hi) = (f / sqrt2, f * sqrt2);
            let mut acc = 0.0;
            let mut n = 0usize;
            for (&fj, &vj) in freqs.iter().zip(values) {
                if fj >= lo && fj <= hi {
                    acc += vj;
                    n += 1;
                }
            }
            acc / n as f64
        })
        .collect()
}

/// Lowest frequency at which the octave-smoothed |reference - test|
/// difference first exceeds `threshold`; `None` if it never does.
pub fn divergence_frequency(
    reference: &CoherenceCurve,
    test: &CoherenceCurve,
    threshold: f64,
) -> Option<f64> {
    let a = octave_smooth(&reference.freqs, &reference.values);
    let b = octave_smooth(&test.freqs, &test.values);
    reference
        .freqs
        .iter()
        .zip(a.iter().zip(&b))
        .find(|(&f, (x, y))| f > 0.0 && (*x - *y).abs() > threshold)
        .map(|(&f, _)| f)
}

/// Linear convolution of `signal` (pre-transformed) with a short kernel,
/// reusing the signal spectrum across kernels.
struct SignalSpectrum {
    spec: Vec<Complex<f64>>,
    sig_len: usize,
}

impl SignalSpectrum {
    fn new(signal: &[f64], max_kernel: usize) -> SignalSpectrum {
        let n = (signal.len() + max_kernel).next_power_of_two();
        let mut spec = vec![Complex::new(0.0, 0.0); n];
        for (x, &v) in spec.iter_mut().zip(signal) {
            x.re = v;
        }
        fft_forward(&mut spec);
        SignalSpectrum {
            spec,
            sig_len: signal.len(),
        }
    }

    fn convolve(&self, kernel: &[f64]) -> Vec<f64> {
        let n = self.spec.len();
        let mut fk = vec![Complex::new(0.0, 0.0); n];
        for (x, &v) in fk.iter_mut().zip(kernel) {
            x.re = v;
        }
        fft_forward(&mut fk);
        for (x, y) in fk.iter_mut().zip(&self.spec) {
            *x *= *y;
        }
        fft_inverse(&mut fk);
        fk.iter()
            .take(self.sig_len + kernel.len() - 1)
            .map(|c| c.re)
            .collect()
    }
}

/// The diffuse-field evaluation protocol: K independent seeded Gaussian
/// noises as VRS outputs, weighted by the sampled-absorption output filters
/// (or unit weights with `isotropic`), VBAP-panned at the VRS directions
/// (receiver yaw applied), binauralized, and reduced to IC and ILD curves.
/// Early reflections and the direct sound are excluded by construction.
#[allow(clippy::too_many_arguments)]
pub fn diffuse_field_eval(
    room: &ShoeboxRoom,
    receiver: Pose,
    k: usize,
    layout: &LoudspeakerLayout,
    hrirs: &HrirSet,
    duration: f64,
    seed: u64,
    isotropic: bool,
) -> Result<(CoherenceCurve, IldCurve)> {
    let fs = hrirs.fs;
    let n = (duration * fs).round() as usize;
    if n < WELCH_WINDOW {
        return Err(Error::InvalidArgument(format!(
            "duration {duration} s is shorter than one Welch window"
        )));
    }
    let dirs = direction_set(k)?;
    let tri = triangulate(layout)?;
    let sampled = if isotropic {
        None
    } else {
        Some(sample_absorption(room, receiver.position, &dirs)?)
    };
    let hrir_len = hrirs.left.first().map_or(0, Vec::len);
    let max_kernel = BAND_FIR_TAPS + hrir_len;
    let out_len = n + max_kernel - 1;
    let mut left = vec![0.0; out_len];
    let mut right = vec![0.0; out_len];

    for (j, &dir) in dirs.directions().iter().enumerate() {
        // Independent per-VRS noise, deterministically derived from the seed.
        let vrs_seed = seed.wrapping_add((j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let noise = gaussian_noise(vrs_seed, n);
        let spectrum = SignalSpectrum::new(&noise, max_kernel);

        // Per-VRS weight filter from the sampled absorption.
        let weight_fir: Vec<f64> = match &sampled {
            None => vec![1.0],
            Some(s) => {
                let mut gains = [0.0; NUM_BANDS];
                for (g, &a) in gains.iter_mut().zip(&s.coefficients[j]) {
                    *g = (1.0 - a).max(0.0).sqrt();
                }
                if gains.iter().all(|&g| (g - 1.0).abs() < 1e-12) {
                    vec![1.0]
                } else {
                    design_band_fir(&gains, fs, BAND_FIR_TAPS)
                }
            }
        };

        // Fold VBAP gains and nearest-neighbor HRIRs into one kernel per
        // ear (equivalent to pan-then-binauralize by linearity).
        let pan = vbap_gains(dir.rotated_z(-receiver.yaw_deg), &tri)?;
        let mut k_l = vec![0.0; hrir_len];
        let mut k_r = vec![0.0; hrir_len];
        for &(speaker, g) in &pan.gains {
            let idx = hrirs.nearest(layout.directions[speaker]);
            for (acc, &v) in k_l.iter_mut().zip(&hrirs.left[idx]) {
                *acc += g * v;
            }
            for (acc, &v) in k_r.iter_mut().zip(&hrirs.right[idx]) {
                *acc += g * v;
            }
        }
        let ear_kernel = |ear: &[f64]| -> Vec<f64> {
            if weight_fir.len() == 1 {
                ear.iter().map(|&v| v * weight_fir[0]).collect()
            } else {
                crate::filter::fft_convolve(&weight_fir, ear)
            }
        };
        for (acc, v) in left.iter_mut().zip(spectrum.convolve(&ear_kernel(&k_l))) {
            *acc += v;
        }
        for (acc, v) in right.iter_mut().zip(spectrum.convolve(&ear_kernel(&k_r))) {
            *acc += v;
        }
    }

    Ok((
        coherence(&left, &right, fs)?,
        ild(&left, &right, fs)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::hrir::sphere_hrir_set;
    use crate::vbap::builtin_layout_86;

    #[test]
    fn coherence_of_identical_signals_is_one() {
        let x = gaussian_noise(1, 8192);
        let c = coherence(&x, &x, 44100.0).unwrap();
        for (&f, &v) in c.freqs.iter().zip(&c.values) {
            assert!((v - 1.0).abs() < 1e-9, "{f} Hz: {v}");
        }
    }

    #[test]
    fn coherence_of_pure_delay_crosses_zero_at_quarter_period() {
        let fs = 44100.0;
        let tau = 20usize;
        let x = gaussian_noise(2, 1 << 17);
        let delayed: Vec<f64> = std::iter::repeat_n(0.0, tau)
            .chain(x.iter().copied())
            .take(x.len())
            .collect();
        let c = coherence(&x, &delayed, fs).unwrap();
        let first_zero = c
            .freqs
            .iter()
            .zip(c.values.windows(2))
            .find(|(_, w)| w[0] > 0.0 && w[1] <= 0.0)
            .map(|(&f, _)| f)
            .unwrap();
        let expected = fs / (4.0 * tau as f64);
        let bin = fs / WELCH_WINDOW as f64;
        assert!(
            (first_zero - expected).abs() <= bin,
            "zero at {first_zero} Hz, expected {expected} Hz"
        );
    }

    #[test]
    fn coherence_of_independent_noise_is_small() {
        let fs = 44100.0;
        let n = (10.0 * fs) as usize;
        let l = gaussian_noise(10, n);
        let r = gaussian_noise(11, n);
        let c = coherence(&l, &r, fs).unwrap();
        for (&f, &v) in c.freqs.iter().zip(&c.values) {
            if f > 100.0 {
                assert!(v.abs() < 0.1, "{f} Hz: {v}");
            }
            assert!(v.abs() <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn ild_oracles() {
        let fs = 44100.0;
        let l = gaussian_noise(3, 1 << 16);
        let same = ild(&l, &l, fs).unwrap();
        assert!(same.values.iter().all(|&v| v.abs() < 1e-9));

        let r: Vec<f64> = l.iter().map(|&x| x / 2.0).collect();
        let doubled = ild(&l, &r, fs).unwrap();
        for (&f, &v) in doubled.freqs.iter().zip(&doubled.values) {
            assert!((v - 6.0206).abs() < 0.01, "{f} Hz: {v}");
        }

        // Common scaling leaves both estimates unchanged.
        let l2: Vec<f64> = l.iter().map(|&x| 3.0 * x).collect();
        let r2: Vec<f64> = r.iter().map(|&x| 3.0 * x).collect();
        let scaled = ild(&l2, &r2, fs).unwrap();
        for (a, b) in doubled.values.iter().zip(&scaled.values) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_energy_channels_are_errors() {
        let x = gaussian_noise(4, 4096);
        let z = vec![0.0; 4096];
        assert!(coherence(&x, &z, 44100.0).is_err());
        assert!(ild(&x, &z, 44100.0).is_err());
    }

    #[test]
    fn binauralize_frontal_speaker_gives_identical_ears() {
        let layout = builtin_layout_86();
        let hrirs = sphere_hrir_set(&layout.directions, 44100.0).unwrap();
        let mut signals = vec![Vec::new(); 86];
        signals[0] = gaussian_noise(5, 8192); // azimuth 0, elevation 0
        for (i, s) in signals.iter_mut().enumerate() {
            if i > 0 {
                *s = vec![0.0; 8192];
            }
        }
        let (l, r) = binauralize(&signals, &layout, &hrirs).unwrap();
        assert_eq!(l, r);
        let c = coherence(&l, &r, 44100.0).unwrap();
        assert!(c.values.iter().all(|&v| (v - 1.0).abs() < 1e-9));

        let silent = vec![vec![0.0; 1024]; 86];
        let (l, r) = binauralize(&silent, &layout, &hrirs).unwrap();
        assert!(l.iter().chain(&r).all(|&x| x == 0.0));
    }

    #[test]
    fn binauralize_matches_brute_force_convolution() {
        let layout = builtin_layout_86();
        let fs = 44100.0;
        let hrirs = sphere_hrir_set(&layout.directions, fs).unwrap();
        // Independent noises on the two lateral speakers (+-90 deg).
        let left_idx = 12; // azimuth 90
        let right_idx = 36; // azimuth 270
        let mut signals = vec![vec![0.0; 16384]; 86];
        signals[left_idx] = gaussian_noise(6, 16384);
        signals[right_idx] = gaussian_noise(7, 16384);
        let (l, r) = binauralize(&signals, &layout, &hrirs).unwrap();
        // Oracle: explicit convolution and summation.
        let mut l_ref = vec![0.0; l.len()];
        let mut r_ref = vec![0.0; r.len()];
        for idx in [left_idx, right_idx] {
            let h = hrirs.nearest(layout.directions[idx]);
            for (i, &s) in signals[idx].iter().enumerate() {
                for (j, (&hl, &hr)) in hrirs.left[h].iter().zip(&hrirs.right[h]).enumerate() {
                    l_ref[i + j] += s * hl;
                    r_ref[i + j] += s * hr;
                }
            }
        }
        for (a, b) in l.iter().zip(&l_ref).chain(r.iter().zip(&r_ref)) {
            assert!((a - b).abs() < 1e-9);
        }
        let c = coherence(&l, &r, fs).unwrap();
        let c_ref = coherence(&l_ref, &r_ref, fs).unwrap();
        for (a, b) in c.values.iter().zip(&c_ref.values) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn diffuse_eval_is_position_invariant_in_homogeneous_rooms() {
        let room = ShoeboxRoom::uniform(Vec3::new(8.0, 6.0, 4.0), 0.35).unwrap();
        let layout = builtin_layout_86();
        let hrirs = sphere_hrir_set(&layout.directions, 16000.0).unwrap();
        let run = |pos: Vec3| {
            diffuse_field_eval(
                &room,
                Pose {
                    position: pos,
                    yaw_deg: 0.0,
                },
                6,
                &layout,
                &hrirs,
                2.0,
                99,
                false,
            )
            .unwrap()
        };
        let (c1, i1) = run(Vec3::new(2.0, 2.0, 1.5));
        let (c2, i2) = run(Vec3::new(6.0, 4.0, 2.5));
        assert_eq!(c1.values, c2.values);
        assert_eq!(i1.values, i2.values);
    }
}
