//! Multichannel room impulse response assembly: early reflections panned
//! discretely, the FDN tail downmixed to K VRS, absorption-filtered and
//! panned at the VRS directions.

use crate::absorption::sample_absorption;
use crate::error::{Error, Result};
use crate::fdn::{
    apply_output_filters, design_fdn_seeded, downmix, process, pulse_trains_to_signals,
    DownmixPlan,
};
use crate::filter::{design_band_fir, BAND_FIR_TAPS};
use crate::geometry::{direction_set, DirectionSet, Pose, ShoeboxRoom, Vec3, NUM_BANDS};
use crate::ism::{compute_image_sources, last_order_injection};
use crate::vbap::{triangulate, vbap_gains, LoudspeakerLayout, Triangulation};
use std::collections::HashMap;

/// Highest image-source order rendered discretely; the same order feeds
/// the FDN.
pub const ISM_ORDER: usize = 3;

#[derive(Debug, Clone)]
pub struct MrirMetadata {
    pub room: ShoeboxRoom,
    pub source: Vec3,
    pub receiver: Pose,
    pub k: usize,
    pub fs: f64,
    pub seed: u64,
    /// Sample index of the direct-sound arrival.
    pub direct_onset: usize,
    /// Sample index of the earliest FDN injection (first order-3 arrival).
    pub tail_onset: usize,
    pub note: String,
}

/// A multichannel room impulse response over a loudspeaker layout.
#[derive(Debug, Clone)]
pub struct Mrir {
    /// One impulse response per loudspeaker channel.
    pub channels: Vec<Vec<f64>>,
    pub fs: f64,
    pub metadata: MrirMetadata,
}

impl Mrir {
    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn num_frames(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }
}

/// Adds `kernel`, scaled by `gains` over the layout, into `channels` at
/// sample `start`.
fn accumulate_panned(
    channels: &mut [Vec<f64>],
    gains: &[(usize, f64)],
    kernel: &[f64],
    start: usize,
    scale: f64,
) {
    for &(speaker, g) in gains {
        let dst = &mut channels[speaker];
        for (j, &h) in kernel.iter().enumerate() {
            let Some(slot) = dst.get_mut(start + j) else {
                break;
            };
            *slot += scale * g * h;
        }
    }
}

fn band_fir_cached<'a>(
    cache: &'a mut HashMap<[u64; NUM_BANDS], Vec<f64>>,
    gains: &[f64; NUM_BANDS],
    fs: f64,
) -> &'a [f64] {
    cache
        .entry(gains.map(f64::to_bits))
        .or_insert_with(|| design_band_fir(gains, fs, BAND_FIR_TAPS))
}

/// Renders the MRIR for one source/receiver pair.
///
/// Early part: the direct sound and images of order 1..=3 are panned at
/// their arrival directions with 1/d gains, sample delays and per-band wall
/// filters. Late part: the order-3 images feed the 96-channel FDN; the
/// outputs are downmixed to `k` VRS, filtered by the sampled absorption at
/// the merged VRS directions, and panned. The receiver yaw rotates every
/// arrival direction by -yaw before panning.
pub fn render_mrir(
    room: &ShoeboxRoom,
    source: Vec3,
    receiver: Pose,
    k: usize,
    fs: f64,
    duration: f64,
    seed: u64,
    layout: &LoudspeakerLayout,
) -> Result<Mrir> {
    let len = (duration * fs).round() as usize;
    if len == 0 {
        return Err(Error::InvalidArgument(format!(
            "duration {duration} s renders no samples"
        )));
    }
    let tri = triangulate(layout)?;
    let images = compute_image_sources(room, source, receiver.position, ISM_ORDER)?;
    if (images[0].delay * fs).round() as usize >= len {
        return Err(Error::InvalidArgument(format!(
            "duration {duration} s ends before the direct sound arrives"
        )));
    }

    let mut channels = vec![vec![0.0; len]; layout.len()];
    let mut fir_cache: HashMap<[u64; NUM_BANDS], Vec<f64>> = HashMap::new();

    // Early part: every image panned discretely.
    for img in &images {
        if img.band_gain.iter().all(|&g| g.abs() < 1e-9) {
            continue;
        }
        let start = (img.delay * fs).round() as usize;
        if start >= len {
            continue;
        }
        let gains = vbap_gains(img.arrival_dir.rotated_z(-receiver.yaw_deg), &tri)?;
        let flat = img.band_gain.iter().all(|&g| (g - 1.0).abs() < 1e-12);
        if flat {
            accumulate_panned(&mut channels, &gains.gains, &[1.0], start, 1.0 / img.distance);
        } else {
            let kernel = band_fir_cached(&mut fir_cache, &img.band_gain, fs);
            accumulate_panned(&mut channels, &gains.gains, kernel, start, 1.0 / img.distance);
        }
    }

    // Late part: order-3 images drive the FDN.
    let dirs96 = direction_set(96)?;
    let trains = last_order_injection(&images, &dirs96)?;
    let inputs = pulse_trains_to_signals(&trains, fs, len)?;
    let config = design_fdn_seeded(room, fs, seed)?;
    let tail = process(&config, &inputs, len)?;
    let plan = DownmixPlan::build(dirs96.directions())?;
    let vrs = downmix(tail, dirs96.directions(), &plan, k, fs)?;
    let vrs_set = DirectionSet::from_directions(vrs.directions.clone())?;
    let sampled = sample_absorption(room, receiver.position, &vrs_set)?;
    let filtered = apply_output_filters(&vrs, &sampled)?;

    for (sig, &dir) in filtered.signals.iter().zip(&filtered.directions) {
        let gains = vbap_gains(dir.rotated_z(-receiver.yaw_deg), &tri)?;
        accumulate_panned(&mut channels, &gains.gains, sig, 0, 1.0);
    }

    let tail_onset = images
        .iter()
        .filter(|i| i.order == ISM_ORDER)
        .map(|i| (i.delay * fs).round() as usize)
        .min()
        .unwrap_or(0);
    Ok(Mrir {
        channels,
        fs,
        metadata: MrirMetadata {
            room: room.clone(),
            source,
            receiver,
            k,
            fs,
            seed,
            direct_onset: (images[0].delay * fs).round() as usize,
            tail_onset,
            note: "VBAP coloration-compensation filter omitted".into(),
        },
    })
}

/// Pans arbitrary source signals (one per direction) onto the layout —
/// shared by MRIR rendering and diffuse-field evaluation.
pub fn pan_signals(
    signals: &[Vec<f64>],
    directions: &[Vec3],
    yaw_deg: f64,
    layout: &LoudspeakerLayout,
    tri: &Triangulation,
    len: usize,
) -> Result<Vec<Vec<f64>>> {
    if signals.len() != directions.len() {
        return Err(Error::InvalidInput(format!(
            "{} signals for {} directions",
            signals.len(),
            directions.len()
        )));
    }
    let mut channels = vec![vec![0.0; len]; layout.len()];
    for (sig, &dir) in signals.iter().zip(directions) {
        let gains = vbap_gains(dir.rotated_z(-yaw_deg), tri)?;
        accumulate_panned(&mut channels, &gains.gains, sig, 0, 1.0);
    }
    Ok(channels)
}
