//! 96-channel physically-parameterized feedback delay network, pairwise
//! downmix to K VRS signals, per-VRS output absorption filtering, and the
//! Schroeder RT60 measurement oracle.

use crate::absorption::SampledAbsorption;
use crate::error::{Error, Result};
use crate::filter::{bandpass_zero_phase, design_band_fir, fft_convolve, BAND_FIR_TAPS};
use crate::geometry::{ShoeboxRoom, Vec3, ALL_WALLS, NUM_BANDS, SPEED_OF_SOUND};
use crate::ism::PulseTrain;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The FDN always operates with this channel count; lower VRS counts are
/// produced by downmixing the outputs.
pub const FDN_CHANNELS: usize = 96;

/// Fixed seed for the deterministic delay-length sampling.
const DELAY_SEED: u64 = 0x6c61_7465_7665_7262;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackMatrix {
    /// I - (2/N) * ones * ones^T; orthogonal with an O(N) multiply.
    Householder,
    /// Identity; degenerate diagnostic mode (channels never mix).
    Identity,
}

#[derive(Debug, Clone)]
pub struct FdnConfig {
    pub fs: f64,
    /// Delay line lengths in samples, pairwise distinct.
    pub delays: Vec<usize>,
    /// Per-channel in-loop attenuation FIR; `[1.0]` means unity (lossless).
    pub loop_firs: Vec<Vec<f64>>,
    pub feedback: FeedbackMatrix,
}

/// K VRS signals with their directions.
#[derive(Debug, Clone)]
pub struct VrsSignals {
    pub signals: Vec<Vec<f64>>,
    pub directions: Vec<Vec3>,
    pub fs: f64,
}

/// Eyring RT60 estimate per octave band from the area-weighted mean
/// absorption: RT60 = 0.161 V / (-S ln(1 - mean_alpha)).
pub fn rt60_target(room: &ShoeboxRoom) -> [f64; NUM_BANDS] {
    let v = room.volume();
    let s = room.surface_area();
    let mut rt = [0.0; NUM_BANDS];
    for (b, out) in rt.iter_mut().enumerate() {
        let mean_alpha = ALL_WALLS
            .iter()
            .map(|&w| room.wall_area(w) * room.alpha(w, b))
            .sum::<f64>()
            / s;
        // -ln(1 - 1) diverges and -ln(1 - 0) is zero; the IEEE limits give
        // RT60 = 0 and RT60 = inf respectively, which is what we want.
        *out = 0.161 * v / (-s * (1.0 - mean_alpha).ln());
    }
    rt
}

/// Samples one boundary-to-boundary free path: area-weighted wall point,
/// cosine-weighted direction, distance to the next boundary hit. The mean
/// of this distribution is the mean free path 4V/S.
fn sample_free_path(room: &ShoeboxRoom, rng: &mut ChaCha8Rng) -> f64 {
    let total = room.surface_area();
    let pick: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut wall = ALL_WALLS[0];
    for &w in &ALL_WALLS {
        acc += room.wall_area(w);
        if pick <= acc {
            wall = w;
            break;
        }
    }
    let d = room.dims;
    let (u1, u2): (f64, f64) = (rng.gen(), rng.gen());
    let origin = match wall.axis() {
        0 => Vec3::new(
            if wall.index() % 2 == 0 { 0.0 } else { d.x },
            u1 * d.y,
            u2 * d.z,
        ),
        1 => Vec3::new(
            u1 * d.x,
            if wall.index() % 2 == 0 { 0.0 } else { d.y },
            u2 * d.z,
        ),
        _ => Vec3::new(
            u1 * d.x,
            u2 * d.y,
            if wall.index() % 2 == 0 { 0.0 } else { d.z },
        ),
    };
    // Cosine-weighted hemisphere about the inward normal.
    let n = -wall.outward_normal();
    let (t1, t2) = match wall.axis() {
        0 => (Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)),
        1 => (Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0)),
        _ => (Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)),
    };
    let r: f64 = rng.gen::<f64>().sqrt();
    let phi: f64 = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
    let dir = t1.scale(r * phi.cos()) + t2.scale(r * phi.sin()) + n.scale((1.0 - r * r).sqrt());
    // Distance to the first boundary along dir.
    let mut t_exit = f64::INFINITY;
    for (o, v, dim) in [
        (origin.x, dir.x, d.x),
        (origin.y, dir.y, d.y),
        (origin.z, dir.z, d.z),
    ] {
        if v > 1e-12 {
            t_exit = t_exit.min((dim - o) / v);
        } else if v < -1e-12 {
            t_exit = t_exit.min(-o / v);
        }
    }
    t_exit.max(1e-3)
}

/// Number of previously chosen delays sharing a factor with `v`.
fn shared_factor_count(v: usize, chosen: &[usize]) -> usize {
    fn gcd(mut a: usize, mut b: usize) -> usize {
        while b != 0 {
            let t = b;
            b = a % b;
            a = t;
        }
        a
    }
    chosen.iter().filter(|&&c| gcd(v, c) > 1).count()
}

fn pick_distinct_delay(target: usize, chosen: &[usize], max_delay: usize) -> usize {
    let mut best: Option<(usize, usize, usize)> = None; // (score, |off|, value)
    for off in 0..=8isize {
        for sign in [1isize, -1] {
            if off == 0 && sign < 0 {
                continue;
            }
            let v = target as isize + sign * off;
            if v < 1 || v as usize > max_delay {
                continue;
            }
            let v = v as usize;
            if chosen.contains(&v) {
                continue;
            }
            let score = shared_factor_count(v, chosen);
            let key = (score, off.unsigned_abs(), v);
            if best.map_or(true, |b| key < b) {
                best = Some(key);
            }
        }
    }
    if let Some((_, _, v)) = best {
        return v;
    }
    // Dense neighborhood: take the nearest free value.
    let mut off = 9usize;
    loop {
        for v in [target.saturating_sub(off).max(1), target + off] {
            if v <= max_delay && !chosen.contains(&v) {
                return v;
            }
        }
        off += 1;
    }
}

fn design_delays(room: &ShoeboxRoom, fs: f64, seed: u64) -> Result<Vec<usize>> {
    let max_delay = fs as usize; // one-second delay buffer cap
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut delays = Vec::with_capacity(FDN_CHANNELS);
    for _ in 0..FDN_CHANNELS {
        let path = sample_free_path(room, &mut rng);
        let target = (path / SPEED_OF_SOUND * fs).round().max(1.0) as usize;
        if target > max_delay {
            return Err(Error::Config(format!(
                "delay of {target} samples exceeds the {max_delay}-sample buffer"
            )));
        }
        let v = pick_distinct_delay(target, &delays, max_delay);
        delays.push(v);
    }
    Ok(delays)
}

/// Group delay of an FIR at frequency `f`: Re(H_d / H) with
/// H_d = sum n h_n e^{-jwn}.
fn fir_group_delay(fir: &[f64], fs: f64, f: f64) -> f64 {
    let w = 2.0 * std::f64::consts::PI * f / fs;
    let (mut re, mut im, mut dre, mut dim) = (0.0, 0.0, 0.0, 0.0);
    for (n, &h) in fir.iter().enumerate() {
        let (s, c) = (w * n as f64).sin_cos();
        re += h * c;
        im -= h * s;
        dre += n as f64 * h * c;
        dim -= n as f64 * h * s;
    }
    let mag2 = re * re + im * im;
    if mag2 < 1e-20 {
        return 0.0;
    }
    (dre * re + dim * im) / mag2
}

/// Designs the in-loop attenuation FIR for one delay line. The filter's own
/// group delay lengthens the loop, so the per-band gain targets are designed
/// for the effective loop length m + tau(b) and refined once.
fn design_loop_fir(m: usize, rt: &[f64; NUM_BANDS], fs: f64) -> Vec<f64> {
    let mut tau = [0.0; NUM_BANDS];
    let mut fir = vec![1.0];
    for _ in 0..2 {
        let mut gains = [0.0; NUM_BANDS];
        for (b, g) in gains.iter_mut().enumerate() {
            // 60 dB over RT60 seconds, prorated to the loop transit time.
            *g = 10f64.powf(-3.0 * ((m as f64 + tau[b]) / fs) / rt[b]);
        }
        if gains.iter().all(|&g| g == 1.0) {
            return vec![1.0];
        }
        fir = design_band_fir(&gains, fs, BAND_FIR_TAPS);
        for (b, &fc) in crate::geometry::BAND_CENTERS.iter().enumerate() {
            if fc < fs / 2.0 {
                tau[b] = fir_group_delay(&fir, fs, fc).max(0.0);
            }
        }
    }
    fir
}

/// Designs the FDN for a room: delays sampled from the room's boundary-to-
/// boundary path lengths, in-loop 7-band attenuation targeting the Eyring
/// RT60, Householder feedback.
pub fn design_fdn(room: &ShoeboxRoom, fs: f64) -> Result<FdnConfig> {
    design_fdn_seeded(room, fs, DELAY_SEED)
}

/// `design_fdn` with an explicit seed for the delay-length sampling, so
/// renders can vary the tail realization while staying reproducible.
pub fn design_fdn_seeded(room: &ShoeboxRoom, fs: f64, seed: u64) -> Result<FdnConfig> {
    if fs < 8000.0 {
        return Err(Error::Config(format!("sample rate {fs} Hz below 8 kHz")));
    }
    let delays = design_delays(room, fs, seed)?;
    let rt = rt60_target(room);
    let loop_firs = delays
        .iter()
        .map(|&m| design_loop_fir(m, &rt, fs))
        .collect();
    Ok(FdnConfig {
        fs,
        delays,
        loop_firs,
        feedback: FeedbackMatrix::Householder,
    })
}

/// Same delays and feedback but unity in-loop gains: the network conserves
/// energy indefinitely.
pub fn design_fdn_lossless(room: &ShoeboxRoom, fs: f64) -> Result<FdnConfig> {
    if fs < 8000.0 {
        return Err(Error::Config(format!("sample rate {fs} Hz below 8 kHz")));
    }
    Ok(FdnConfig {
        fs,
        delays: design_delays(room, fs, DELAY_SEED)?,
        loop_firs: vec![vec![1.0]; FDN_CHANNELS],
        feedback: FeedbackMatrix::Householder,
    })
}

/// In-place Householder reflection I - (2/N) ones ones^T.
pub fn householder_mix(v: &mut [f64]) {
    let mean2 = 2.0 * v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= mean2;
    }
}

struct FirState {
    taps: Vec<f64>,
    history: Vec<f64>,
    pos: usize,
}

impl FirState {
    fn new(taps: &[f64]) -> Self {
        Self {
            taps: taps.to_vec(),
            history: vec![0.0; taps.len()],
            pos: 0,
        }
    }

    #[inline]
    fn step(&mut self, x: f64) -> f64 {
        if self.taps.len() == 1 {
            return self.taps[0] * x;
        }
        self.history[self.pos] = x;
        // history[pos] is the newest sample; taps run newest-first.
        let n = self.taps.len();
        let mut acc = 0.0;
        let (head, tail) = self.history.split_at(self.pos + 1);
        for (h, t) in head.iter().rev().zip(&self.taps) {
            acc += h * t;
        }
        for (h, t) in tail.iter().rev().zip(&self.taps[self.pos + 1..]) {
            acc += h * t;
        }
        self.pos = (self.pos + 1) % n;
        acc
    }
}

/// Runs the FDN recursion: per-channel delay, in-loop attenuation filter,
/// feedback mix, input injection. Returns the per-channel delay-line
/// outputs over `out_len` samples.
pub fn process(config: &FdnConfig, inputs: &[Vec<f64>], out_len: usize) -> Result<Vec<Vec<f64>>> {
    let n = config.delays.len();
    if inputs.len() != n {
        return Err(Error::InvalidInput(format!(
            "expected {n} input channels, got {}",
            inputs.len()
        )));
    }
    let mut lines: Vec<Vec<f64>> = config.delays.iter().map(|&m| vec![0.0; m]).collect();
    let mut heads = vec![0usize; n];
    let mut firs: Vec<FirState> = config.loop_firs.iter().map(|f| FirState::new(f)).collect();
    let mut outputs: Vec<Vec<f64>> = (0..n).map(|_| vec![0.0; out_len]).collect();
    let mut mixed = vec![0.0; n];

    for t in 0..out_len {
        for i in 0..n {
            let s = lines[i][heads[i]];
            outputs[i][t] = s;
            mixed[i] = firs[i].step(s);
        }
        match config.feedback {
            FeedbackMatrix::Householder => householder_mix(&mut mixed),
            FeedbackMatrix::Identity => {}
        }
        for i in 0..n {
            let inj = inputs[i].get(t).copied().unwrap_or(0.0);
            lines[i][heads[i]] = mixed[i] + inj;
            heads[i] = (heads[i] + 1) % config.delays[i];
        }
    }
    Ok(outputs)
}

/// Renders sparse band-filtered pulse trains into dense per-channel input
/// signals (each pulse becomes its band-gain FIR scaled by the pulse
/// amplitude, placed at its sample delay).
pub fn pulse_trains_to_signals(
    trains: &[PulseTrain],
    fs: f64,
    len: usize,
) -> Result<Vec<Vec<f64>>> {
    use std::collections::HashMap;
    let mut fir_cache: HashMap<[u64; NUM_BANDS], Vec<f64>> = HashMap::new();
    let mut signals = vec![vec![0.0; len]; trains.len()];
    for (c, train) in trains.iter().enumerate() {
        for pulse in &train.pulses {
            let start = (pulse.delay * fs).round() as usize;
            if start >= len
                || pulse.amplitude == 0.0
                || pulse.band_gain.iter().all(|&g| g.abs() < 1e-9)
            {
                continue;
            }
            let key = pulse.band_gain.map(f64::to_bits);
            let fir = fir_cache.entry(key).or_insert_with(|| {
                if pulse.band_gain.iter().all(|&g| g == 1.0) {
                    vec![1.0]
                } else {
                    design_band_fir(&pulse.band_gain, fs, BAND_FIR_TAPS)
                }
            });
            for (j, &h) in fir.iter().enumerate() {
                if start + j >= len {
                    break;
                }
                signals[c][start + j] += pulse.amplitude * h;
            }
        }
    }
    Ok(signals)
}

/// One downmix level: pairs over the previous level's channels and the
/// merged directions.
#[derive(Debug, Clone)]
pub struct DownmixLevel {
    pub pairs: Vec<(usize, usize)>,
    pub directions: Vec<Vec3>,
}

/// Sequential pairwise downmix plan 96 -> 48 -> 24 -> 12 -> 6, pairing the
/// two channels whose directions are angularly nearest at each level.
#[derive(Debug, Clone)]
pub struct DownmixPlan {
    pub levels: Vec<DownmixLevel>,
}

impl DownmixPlan {
    pub fn build(directions: &[Vec3]) -> Result<DownmixPlan> {
        if directions.len() != FDN_CHANNELS {
            return Err(Error::InvalidArgument(format!(
                "downmix plan starts from {FDN_CHANNELS} directions, got {}",
                directions.len()
            )));
        }
        let mut levels = Vec::new();
        let mut current = directions.to_vec();
        while current.len() > 6 {
            let n = current.len();
            // Greedy minimum-angle matching, ties by index.
            let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
            for i in 0..n {
                for j in (i + 1)..n {
                    edges.push((current[i].angle_to(current[j]), i, j));
                }
            }
            edges.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            let mut used = vec![false; n];
            let mut pairs = Vec::with_capacity(n / 2);
            for (_, i, j) in edges {
                if !used[i] && !used[j] {
                    used[i] = true;
                    used[j] = true;
                    pairs.push((i, j));
                }
            }
            pairs.sort();
            let dirs: Vec<Vec3> = pairs
                .iter()
                .map(|&(i, j)| (current[i] + current[j]).normalized())
                .collect();
            current = dirs.clone();
            levels.push(DownmixLevel {
                pairs,
                directions: dirs,
            });
        }
        Ok(DownmixPlan { levels })
    }
}

/// Applies the downmix plan level by level until `k` channels remain
/// (k = 96 is the identity). Paired channels are summed sample-wise with
/// no per-pair scaling.
pub fn downmix(
    signals: Vec<Vec<f64>>,
    directions: &[Vec3],
    plan: &DownmixPlan,
    k: usize,
    fs: f64,
) -> Result<VrsSignals> {
    if !crate::geometry::SUPPORTED_VRS_COUNTS.contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "cannot downmix to {k} channels"
        )));
    }
    let mut sigs = signals;
    let mut dirs = directions.to_vec();
    for level in &plan.levels {
        if sigs.len() == k {
            break;
        }
        let mut next = Vec::with_capacity(level.pairs.len());
        for &(i, j) in &level.pairs {
            let (a, b) = (&sigs[i], &sigs[j]);
            next.push(a.iter().zip(b).map(|(x, y)| x + y).collect());
        }
        sigs = next;
        dirs = level.directions.clone();
    }
    if sigs.len() != k {
        return Err(Error::InvalidArgument(format!(
            "downmix plan cannot reach {k} channels"
        )));
    }
    Ok(VrsSignals {
        signals: sigs,
        directions: dirs,
        fs,
    })
}

/// Filters each VRS by its absorption filter: band amplitude
/// sqrt(1 - a_k(b)) (reflection-factor convention). Output length equals
/// the input length.
pub fn apply_output_filters(vrs: &VrsSignals, sampled: &SampledAbsorption) -> Result<VrsSignals> {
    if sampled.len() != vrs.signals.len() {
        return Err(Error::InvalidInput(format!(
            "sampled absorption has {} entries for {} VRS",
            sampled.len(),
            vrs.signals.len()
        )));
    }
    let mut out = Vec::with_capacity(vrs.signals.len());
    for (sig, a) in vrs.signals.iter().zip(&sampled.coefficients) {
        let mut gains = [0.0; NUM_BANDS];
        for (g, &ak) in gains.iter_mut().zip(a) {
            *g = (1.0 - ak).max(0.0).sqrt();
        }
        if gains.iter().all(|&g| g == 1.0) {
            out.push(sig.clone());
        } else {
            let fir = design_band_fir(&gains, vrs.fs, BAND_FIR_TAPS);
            let mut filtered = fft_convolve(sig, &fir);
            filtered.truncate(sig.len());
            out.push(filtered);
        }
    }
    Ok(VrsSignals {
        signals: out,
        directions: vrs.directions.clone(),
        fs: vrs.fs,
    })
}

/// Schroeder RT60: octave band-pass, backward energy integration, linear
/// fit of the -5 .. -35 dB span.
pub fn measure_rt60(signal: &[f64], fs: f64, band_center: f64) -> Result<f64> {
    let band = bandpass_zero_phase(signal, fs, band_center);
    let mut edc: Vec<f64> = Vec::with_capacity(band.len());
    let mut acc = 0.0;
    for &x in band.iter().rev() {
        acc += x * x;
        edc.push(acc);
    }
    edc.reverse();
    let total = edc[0];
    if total <= 0.0 {
        return Err(Error::InsufficientDecay("silent signal".into()));
    }
    let db: Vec<f64> = edc.iter().map(|&e| 10.0 * (e / total).log10()).collect();
    let t5 = db.iter().position(|&d| d <= -5.0);
    let t35 = db.iter().position(|&d| d <= -35.0);
    let (Some(t5), Some(t35)) = (t5, t35) else {
        return Err(Error::InsufficientDecay(
            "decay span shorter than 30 dB".into(),
        ));
    };
    if t35 <= t5 + 1 {
        return Err(Error::InsufficientDecay("decay too abrupt to fit".into()));
    }
    // Least-squares line through (t, db) over the fit span.
    let pts = &db[t5..=t35];
    let n = pts.len() as f64;
    let mean_x = (pts.len() - 1) as f64 / 2.0;
    let mean_y = pts.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (i, &y) in pts.iter().enumerate() {
        let dx = i as f64 - mean_x;
        sxx += dx * dx;
        sxy += dx * (y - mean_y);
    }
    let slope_db_per_sample = sxy / sxx;
    if slope_db_per_sample >= 0.0 {
        return Err(Error::InsufficientDecay("energy does not decay".into()));
    }
    Ok(60.0 / (-slope_db_per_sample * fs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::gaussian_noise;
    use approx::assert_relative_eq;

    #[test]
    fn eyring_examples() {
        // Uniform cube, 10 m, alpha 0.3.
        let cube = ShoeboxRoom::uniform(Vec3::new(10.0, 10.0, 10.0), 0.3).unwrap();
        let rt = rt60_target(&cube);
        for &r in &rt {
            assert_relative_eq!(r, 0.161 * 1000.0 / (600.0 * 0.35667), epsilon = 1e-3);
        }
        // Corridor at 8 kHz: five walls 0.11, absorbing wall 0.99 -> ~1.34 s.
        let mut abs = [[0.11; NUM_BANDS]; 6];
        abs[0] = [0.99; NUM_BANDS];
        let corridor = ShoeboxRoom::new(Vec3::new(24.0, 8.0, 6.0), abs).unwrap();
        let rt = rt60_target(&corridor);
        assert!((rt[6] - 1.34).abs() < 0.01, "rt = {}", rt[6]);
        // Fully absorbing -> 0.
        let dead = ShoeboxRoom::uniform(Vec3::new(4.0, 3.0, 2.0), 1.0).unwrap();
        assert_eq!(rt60_target(&dead)[0], 0.0);
        // Fully reflective -> infinite.
        let live = ShoeboxRoom::uniform(Vec3::new(4.0, 3.0, 2.0), 0.0).unwrap();
        assert!(rt60_target(&live)[0].is_infinite());
    }

    #[test]
    fn delays_match_mean_free_path() {
        let mut abs = [[0.11; NUM_BANDS]; 6];
        abs[0] = [0.99; NUM_BANDS];
        let corridor = ShoeboxRoom::new(Vec3::new(24.0, 8.0, 6.0), abs).unwrap();
        let fs = 44100.0;
        let config = design_fdn(&corridor, fs).unwrap();
        assert_eq!(config.delays.len(), FDN_CHANNELS);
        // Pairwise distinct.
        let mut sorted = config.delays.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), FDN_CHANNELS);
        // Mean delay near the mean free path 4V/S = 6.0 m (~772 samples).
        let mean = config.delays.iter().sum::<usize>() as f64 / FDN_CHANNELS as f64;
        let expected = 4.0 * corridor.volume() / corridor.surface_area() / SPEED_OF_SOUND * fs;
        assert!(
            (mean - expected).abs() / expected < 0.15,
            "mean delay {mean} vs expected {expected}"
        );
    }

    #[test]
    fn householder_is_orthogonal() {
        let v = gaussian_noise(7, FDN_CHANNELS);
        let before: f64 = v.iter().map(|x| x * x).sum();
        let mut w = v.clone();
        householder_mix(&mut w);
        let after: f64 = w.iter().map(|x| x * x).sum();
        assert_relative_eq!(before, after, max_relative = 1e-12);
    }

    #[test]
    fn process_zero_input_and_linearity() {
        let room = ShoeboxRoom::uniform(Vec3::new(6.0, 5.0, 4.0), 0.4).unwrap();
        let config = design_fdn(&room, 16000.0).unwrap();
        let zeros = vec![vec![0.0; 100]; FDN_CHANNELS];
        let out = process(&config, &zeros, 2000).unwrap();
        assert!(out.iter().all(|c| c.iter().all(|&x| x == 0.0)));

        let mut inputs = vec![vec![0.0; 100]; FDN_CHANNELS];
        inputs[0][0] = 1.0;
        inputs[13][40] = -0.7;
        let out1 = process(&config, &inputs, 4000).unwrap();
        let scaled: Vec<Vec<f64>> = inputs
            .iter()
            .map(|c| c.iter().map(|&x| 3.5 * x).collect())
            .collect();
        let out2 = process(&config, &scaled, 4000).unwrap();
        for (a, b) in out1.iter().zip(&out2) {
            for (x, y) in a.iter().zip(b) {
                assert!((3.5 * x - y).abs() <= 1e-9 * y.abs().max(1.0));
            }
        }
    }

    #[test]
    fn identity_feedback_recirculates_at_delay_multiples() {
        let room = ShoeboxRoom::uniform(Vec3::new(6.0, 5.0, 4.0), 0.4).unwrap();
        let mut config = design_fdn_lossless(&room, 16000.0).unwrap();
        config.feedback = FeedbackMatrix::Identity;
        let mut inputs = vec![vec![0.0; 1]; FDN_CHANNELS];
        inputs[0][0] = 1.0;
        let m = config.delays[0];
        let out = process(&config, &inputs, 4 * m + 1).unwrap();
        for (t, &x) in out[0].iter().enumerate() {
            let expected = if t >= m && (t - m) % m == 0 { 1.0 } else { 0.0 };
            assert_eq!(x, expected, "t = {t}");
        }
    }

    #[test]
    fn lossless_network_does_not_decay() {
        let room = ShoeboxRoom::uniform(Vec3::new(6.0, 5.0, 4.0), 0.4).unwrap();
        let config = design_fdn_lossless(&room, 16000.0).unwrap();
        let mut inputs = vec![vec![0.0; 1]; FDN_CHANNELS];
        inputs[0][0] = 1.0;
        let n = 32000; // 2 s
        let out = process(&config, &inputs, n).unwrap();
        let window = 4000;
        let late_energy: f64 = out
            .iter()
            .map(|c| c[n - window..].iter().map(|x| x * x).sum::<f64>())
            .sum();
        assert!(late_energy > 1e-6, "lossless tail died: {late_energy}");
    }

    #[test]
    fn downmix_plan_halves_levels() {
        let dirs = crate::geometry::direction_set(96).unwrap();
        let plan = DownmixPlan::build(dirs.directions()).unwrap();
        let counts: Vec<usize> = plan.levels.iter().map(|l| l.directions.len()).collect();
        assert_eq!(counts, vec![48, 24, 12, 6]);
        for level in &plan.levels {
            for d in &level.directions {
                assert!((d.norm() - 1.0).abs() < 1e-9);
            }
            let mut seen: Vec<usize> = level
                .pairs
                .iter()
                .flat_map(|&(i, j)| [i, j])
                .collect();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), level.pairs.len() * 2);
        }
    }

    #[test]
    fn downmix_identity_and_coherent_sum() {
        let dirs = crate::geometry::direction_set(96).unwrap();
        let plan = DownmixPlan::build(dirs.directions()).unwrap();
        let sig: Vec<Vec<f64>> = (0..96).map(|i| vec![i as f64; 8]).collect();
        let out = downmix(sig.clone(), dirs.directions(), &plan, 96, 44100.0).unwrap();
        assert_eq!(out.signals, sig);
        // Identical signals in a pair double in amplitude.
        let same = vec![vec![1.0; 8]; 96];
        let out = downmix(same, dirs.directions(), &plan, 48, 44100.0).unwrap();
        for c in &out.signals {
            for &x in c {
                assert_eq!(x, 2.0);
            }
        }
    }

    #[test]
    fn output_filter_unit_and_deep() {
        let fs = 44100.0;
        let noise = gaussian_noise(42, 1 << 15);
        let vrs = VrsSignals {
            signals: vec![noise.clone()],
            directions: vec![Vec3::new(1.0, 0.0, 0.0)],
            fs,
        };
        let zero = SampledAbsorption {
            coefficients: vec![[0.0; NUM_BANDS]],
        };
        let out = apply_output_filters(&vrs, &zero).unwrap();
        assert_eq!(out.signals[0], noise);

        let deep = SampledAbsorption {
            coefficients: vec![[0.99; NUM_BANDS]],
        };
        let out = apply_output_filters(&vrs, &deep).unwrap();
        // sqrt(1 - 0.99) = 0.1 -> -20 dB, checked via in-band RMS.
        for &fc in &crate::geometry::BAND_CENTERS {
            let e_in = crate::filter::energy(&bandpass_zero_phase(&noise, fs, fc));
            let e_out = crate::filter::energy(&bandpass_zero_phase(&out.signals[0], fs, fc));
            let db = 10.0 * (e_out / e_in).log10();
            assert!((db + 20.0).abs() < 0.5, "{fc} Hz: {db} dB");
        }
    }

    #[test]
    fn measure_rt60_synthetic_decay() {
        let fs = 16000.0;
        let n = (2.5 * fs) as usize;
        let noise = gaussian_noise(11, n);
        let make = |rt: f64| -> Vec<f64> {
            noise
                .iter()
                .enumerate()
                .map(|(i, &x)| x * (-(i as f64 / fs) * 3.0 * std::f64::consts::LN_10 / rt).exp())
                .collect()
        };
        let rt1 = measure_rt60(&make(1.0), fs, 1000.0).unwrap();
        assert!((rt1 - 1.0).abs() < 0.05, "rt = {rt1}");
        let rt_half = measure_rt60(&make(0.5), fs, 1000.0).unwrap();
        assert!((rt_half - 0.5).abs() < 0.025, "rt = {rt_half}");
        assert!((rt1 / rt_half - 2.0).abs() < 0.2);
        // Constant signal: insufficient decay.
        assert!(measure_rt60(&vec![1.0; 8000], fs, 1000.0).is_err());
    }

    #[test]
    fn decay_matches_design_target_small() {
        // Quick self-consistency at 16 kHz; the acceptance suite covers the
        // corridor and cube at full rate.
        let room = ShoeboxRoom::uniform(Vec3::new(8.0, 6.0, 4.0), 0.25).unwrap();
        let fs = 16000.0;
        let config = design_fdn(&room, fs).unwrap();
        let rt = rt60_target(&room);
        // Alternating-sign excitation: a coherent all-ones impulse couples
        // entirely into the Householder -1 eigenvector and biases the
        // low-band Schroeder fit during the echo-density buildup.
        let mut inputs = vec![vec![0.0; 1]; FDN_CHANNELS];
        for (i, c) in inputs.iter_mut().enumerate() {
            c[0] = if i % 2 == 0 { 1.0 } else { -1.0 };
        }
        let dur = ((rt[0] * 1.5 + 0.5) * fs) as usize;
        let out = process(&config, &inputs, dur).unwrap();
        let mix: Vec<f64> = (0..dur).map(|t| out.iter().map(|c| c[t]).sum()).collect();
        for (b, &fc) in crate::geometry::BAND_CENTERS.iter().enumerate() {
            // At this reduced scale (short delays relative to RT60) the
            // 125 Hz octave holds too few independent modes for a stable
            // Schroeder fit; the acceptance suite covers it at full rate.
            if fc < 200.0 || fc > fs / 2.0 / 2.0f64.sqrt() {
                continue;
            }
            let measured = measure_rt60(&mix, fs, fc).unwrap();
            assert!(
                (measured - rt[b]).abs() / rt[b] < 0.1,
                "band {fc} Hz: measured {measured}, target {}",
                rt[b]
            );
        }
    }
}
