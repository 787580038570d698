//! Scenario files, the corridor benchmark positions, and the pink test
//! pulse.

use crate::error::{Error, Result};
use crate::filter::{bandpass_zero_phase, energy, min_phase_fir};
use crate::geometry::{
    wall_fov, Pose, ShoeboxRoom, Vec3, Wall, ALL_WALLS, BAND_CENTERS, NUM_BANDS,
    SUPPORTED_VRS_COUNTS,
};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayoutRef {
    Builtin,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HrirRef {
    Sphere,
    Directory(PathBuf),
}

/// A fully validated rendering/analysis scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub room: ShoeboxRoom,
    pub source: Vec3,
    pub receiver: Pose,
    pub k: usize,
    pub fs: f64,
    pub seed: u64,
    /// Render duration in seconds; `None` means max RT60 + 0.5 s.
    pub duration: Option<f64>,
    /// Diffuse-field evaluation duration in seconds.
    pub analysis_duration: f64,
    pub layout: LayoutRef,
    pub hrir: HrirRef,
}

fn parse_vec3(value: &str) -> Option<Vec3> {
    let parts: Vec<f64> = value
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .ok()?;
    (parts.len() == 3).then(|| Vec3::new(parts[0], parts[1], parts[2]))
}

fn wall_from_key(key: &str) -> Option<Wall> {
    Some(match key {
        "absorption_negx" => Wall::NegX,
        "absorption_posx" => Wall::PosX,
        "absorption_negy" => Wall::NegY,
        "absorption_posy" => Wall::PosY,
        "absorption_negz" => Wall::NegZ,
        "absorption_posz" => Wall::PosZ,
        _ => return None,
    })
}

/// Parses a scenario from text. Format: `[section]` headers (`room`,
/// `source`, `receiver`, `render`, `analysis`) and `key = value` lines;
/// `#` starts a comment. Unknown sections and keys are rejected.
pub fn parse_scenario_str(text: &str, path: &str) -> Result<Scenario> {
    let err = |line: usize, msg: String| Error::Scenario {
        path: path.to_string(),
        line,
        msg,
    };
    let mut section = String::new();
    let mut dims: Option<Vec3> = None;
    let mut absorption: [Option<[f64; NUM_BANDS]>; 6] = [None; 6];
    let mut source: Option<Vec3> = None;
    let mut recv_pos: Option<Vec3> = None;
    let mut yaw = 0.0;
    let mut k: Option<usize> = None;
    let mut fs = 44100.0;
    let mut seed = 0u64;
    let mut duration: Option<f64> = None;
    let mut analysis_duration = 60.0;
    let mut layout = LayoutRef::Builtin;
    let mut hrir = HrirRef::Sphere;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            if !["room", "source", "receiver", "render", "analysis"].contains(&name) {
                return Err(err(lineno, format!("unknown section [{name}]")));
            }
            section = name.to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(lineno, format!("expected `key = value`, got {line:?}")));
        };
        let (key, value) = (key.trim(), value.trim());
        match (section.as_str(), key) {
            ("room", "dims") => {
                dims = Some(
                    parse_vec3(value)
                        .ok_or_else(|| err(lineno, format!("bad dims {value:?}")))?,
                );
            }
            ("room", "absorption") => {
                let a: f64 = value
                    .parse()
                    .map_err(|_| err(lineno, format!("bad absorption {value:?}")))?;
                absorption = [Some([a; NUM_BANDS]); 6];
            }
            ("room", _) if wall_from_key(key).is_some() => {
                let wall = wall_from_key(key).unwrap();
                let vals: Vec<f64> = value
                    .split_whitespace()
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| err(lineno, format!("bad band values {value:?}")))?;
                let bands: [f64; NUM_BANDS] = match vals.len() {
                    1 => [vals[0]; NUM_BANDS],
                    NUM_BANDS => vals.try_into().unwrap(),
                    n => {
                        return Err(err(
                            lineno,
                            format!("expected 1 or {NUM_BANDS} band values, got {n}"),
                        ))
                    }
                };
                absorption[wall.index()] = Some(bands);
            }
            ("source", "position") => {
                source = Some(
                    parse_vec3(value)
                        .ok_or_else(|| err(lineno, format!("bad position {value:?}")))?,
                );
            }
            ("receiver", "position") => {
                recv_pos = Some(
                    parse_vec3(value)
                        .ok_or_else(|| err(lineno, format!("bad position {value:?}")))?,
                );
            }
            ("receiver", "yaw") => {
                yaw = value
                    .parse()
                    .map_err(|_| err(lineno, format!("bad yaw {value:?}")))?;
            }
            ("render", "k") => {
                let v: usize = value
                    .parse()
                    .map_err(|_| err(lineno, format!("bad k {value:?}")))?;
                if !SUPPORTED_VRS_COUNTS.contains(&v) {
                    return Err(err(
                        lineno,
                        format!("unsupported k = {v}; expected one of {SUPPORTED_VRS_COUNTS:?}"),
                    ));
                }
                k = Some(v);
            }
            ("render", "fs") => {
                fs = value
                    .parse()
                    .map_err(|_| err(lineno, format!("bad fs {value:?}")))?;
            }
            ("render", "seed") => {
                seed = value
                    .parse()
                    .map_err(|_| err(lineno, format!("bad seed {value:?}")))?;
            }
            ("render", "duration") => {
                duration = Some(
                    value
                        .parse()
                        .map_err(|_| err(lineno, format!("bad duration {value:?}")))?,
                );
            }
            ("render", "layout") => {
                layout = if value == "builtin-86" {
                    LayoutRef::Builtin
                } else {
                    LayoutRef::File(PathBuf::from(value))
                };
            }
            ("render", "hrir") => {
                hrir = if value == "sphere" {
                    HrirRef::Sphere
                } else {
                    HrirRef::Directory(PathBuf::from(value))
                };
            }
            ("analysis", "duration") => {
                analysis_duration = value
                    .parse()
                    .map_err(|_| err(lineno, format!("bad duration {value:?}")))?;
            }
            ("", _) => return Err(err(lineno, "key before any [section] header".into())),
            (s, k) => return Err(err(lineno, format!("unknown key {k:?} in section [{s}]"))),
        }
    }

    let dims = dims.ok_or_else(|| err(0, "missing [room] dims".into()))?;
    let mut abs = [[0.0; NUM_BANDS]; 6];
    for (w, a) in absorption.iter().enumerate() {
        abs[w] =
            a.ok_or_else(|| err(0, format!("missing absorption for wall {:?}", ALL_WALLS[w])))?;
    }
    let room = ShoeboxRoom::new(dims, abs).map_err(|e| err(0, e.to_string()))?;
    let source = source.ok_or_else(|| err(0, "missing [source] position".into()))?;
    let recv_pos = recv_pos.ok_or_else(|| err(0, "missing [receiver] position".into()))?;
    let k = k.ok_or_else(|| err(0, "missing [render] k".into()))?;
    if !room.contains_strictly(source) {
        return Err(err(0, "source lies outside the room".into()));
    }
    if !room.contains_strictly(recv_pos) {
        return Err(err(0, "receiver lies outside the room".into()));
    }
    Ok(Scenario {
        room,
        source,
        receiver: Pose {
            position: recv_pos,
            yaw_deg: yaw,
        },
        k,
        fs,
        seed,
        duration,
        analysis_duration,
        layout,
        hrir,
    })
}

/// Parses a scenario file.
pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario_str(&text, &path.display().to_string())
}

/// The corridor benchmark room: 24 x 8 x 6 m, strongly absorbing -x wall
/// (alpha 0.99 at all bands), the other walls rising from 0.01 at 125 Hz to
/// 0.11 at 8 kHz (linear in log-frequency).
pub fn corridor_room() -> ShoeboxRoom {
    let mut abs = [[0.0; NUM_BANDS]; 6];
    for (w, wall) in abs.iter_mut().enumerate() {
        for (b, a) in wall.iter_mut().enumerate() {
            *a = if w == Wall::NegX.index() {
                0.99
            } else {
                0.01 + 0.1 * b as f64 / (NUM_BANDS - 1) as f64
            };
        }
    }
    ShoeboxRoom::new(Vec3::new(24.0, 8.0, 6.0), abs).expect("corridor room is valid")
}

/// One of the corridor source/receiver placements.
#[derive(Debug, Clone)]
pub struct CorridorPosition {
    pub label: char,
    /// Distance of source and receiver from the absorbing wall, meters.
    pub wall_distance: f64,
    /// Field of view of the absorbing wall at the receiver, degrees.
    pub fov_deg: f64,
    pub source: Vec3,
    pub receiver: Pose,
}

/// The four corridor placements A-D: source and receiver at height 1.8 m,
/// 1.33 m from opposite sidewalls (5.34 m apart), both at the wall distance
/// solving wall_fov = 170, 110, 70 and 30 degrees. The receiver faces the
/// source (along -y, yaw -90 with front at +x).
pub fn corridor_positions() -> Vec<CorridorPosition> {
    let room = corridor_room();
    let targets = [('A', 170.0), ('B', 110.0), ('C', 70.0), ('D', 30.0)];
    let fov_at = |d: f64| -> f64 {
        wall_fov(&room, Wall::NegX, Vec3::new(d, 6.67, 1.8)).expect("receiver inside corridor")
    };
    targets
        .iter()
        .map(|&(label, fov_deg)| {
            // wall_fov decreases monotonically with distance: bisection.
            let (mut lo, mut hi) = (1e-6, room.dims.x - 1e-6);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if fov_at(mid) > fov_deg {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let d = 0.5 * (lo + hi);
            CorridorPosition {
                label,
                wall_distance: d,
                fov_deg,
                source: Vec3::new(d, 1.33, 1.8),
                receiver: Pose {
                    position: Vec3::new(d, 6.67, 1.8),
                    yaw_deg: -90.0,
                },
            }
        })
        .collect()
}

/// Builds the scenario for a corridor position.
pub fn corridor_scenario(position: &CorridorPosition, k: usize, seed: u64) -> Scenario {
    Scenario {
        room: corridor_room(),
        source: position.source,
        receiver: position.receiver,
        k,
        fs: 44100.0,
        seed,
        duration: None,
        analysis_duration: 60.0,
        layout: LayoutRef::Builtin,
        hrir: HrirRef::Sphere,
    }
}

/// Sample rate of the pink pulse.
pub const PINK_PULSE_FS: f64 = 44100.0;
const PINK_PULSE_LEN: usize = 8192;
/// Time at which the envelope must have decayed by 60 dB.
const PINK_DECAY_S: f64 = 0.036;

/// Peak-normalized envelope: maximum |x| over a short sliding window.
fn envelope_at(pulse: &[f64], center: usize, half: usize) -> f64 {
    let lo = center.saturating_sub(half);
    let hi = (center + half).min(pulse.len());
    pulse[lo..hi].iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

/// First time (seconds) the sliding-max envelope stays below -60 dB FS.
pub fn pink_pulse_decay_time(pulse: &[f64], fs: f64) -> f64 {
    let half = 32;
    for n in 0..pulse.len() {
        if envelope_at(pulse, n, half) <= 1e-3 {
            return n as f64 / fs;
        }
    }
    pulse.len() as f64 / fs
}

/// The test stimulus: a delta pulse filtered to a pink (-3 dB/octave
/// magnitude) spectrum, windowed by an exponential decay reaching -60 dB FS
/// at 36 ms, peak-normalized to 0 dB FS. Deterministic.
pub fn pink_pulse() -> Vec<f64> {
    let fs = PINK_PULSE_FS;
    // 1/sqrt(f) magnitude, flattened below 5 Hz to keep the minimum-phase
    // construction well conditioned. Extending the pink slope well below
    // the lowest octave band leaves enough low-frequency energy for the
    // natural tail to outlast the 36 ms target, so the window below always
    // trims rather than stretches.
    let f_ref = 5.0;
    let base = min_phase_fir(
        |f| (f_ref / f.max(f_ref)).sqrt(),
        fs,
        PINK_PULSE_LEN,
    );
    // Bisect the exponential window rate so the envelope hits -60 dB FS at
    // 36 ms; the pink tail itself already decays, so the window only trims
    // the remainder.
    let windowed = |rate: f64| -> Vec<f64> {
        let mut p: Vec<f64> = base
            .iter()
            .enumerate()
            .map(|(n, &x)| x * (-rate * n as f64 / fs).exp())
            .collect();
        let peak = p.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        for x in p.iter_mut() {
            *x /= peak;
        }
        p
    };
    let (mut lo, mut hi) = (0.0, 2000.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if pink_pulse_decay_time(&windowed(mid), fs) > PINK_DECAY_S {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    windowed(0.5 * (lo + hi))
}

/// Octave-band power spectral density slope of a signal in dB per octave,
/// least-squares fitted over the bands within [f_lo, f_hi].
pub fn psd_slope_db_per_octave(signal: &[f64], fs: f64, f_lo: f64, f_hi: f64) -> f64 {
    let mut pts = Vec::new();
    for &fc in &BAND_CENTERS {
        if fc < f_lo || fc > f_hi {
            continue;
        }
        let band = bandpass_zero_phase(signal, fs, fc);
        // PSD estimate: band energy over octave bandwidth.
        let bw = fc * (2.0f64.sqrt() - 1.0 / 2.0f64.sqrt());
        pts.push((fc.log2(), 10.0 * (energy(&band) / bw).log10()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in &pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    sxy / sxx
}
