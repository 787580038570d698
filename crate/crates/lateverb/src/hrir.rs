//! Head-related impulse response sets: file-loaded databases and an
//! analytic rigid-sphere model usable without external data.

use crate::error::{Error, Result};
use crate::filter::{fft_convolve, min_phase_fir};
use crate::geometry::{Vec3, SPEED_OF_SOUND};
use crate::vbap::direction_from_angles;
use crate::wav::read_wav;
use std::path::Path;

/// Head radius of the analytic sphere model, meters.
pub const HEAD_RADIUS: f64 = 0.0875;

/// Fixed length of analytic-sphere HRIRs in samples.
pub const SPHERE_HRIR_TAPS: usize = 192;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HrirProvenance {
    FileLoaded,
    AnalyticSphere,
}

/// A set of HRIR pairs indexed by direction.
#[derive(Debug, Clone)]
pub struct HrirSet {
    pub directions: Vec<Vec3>,
    pub left: Vec<Vec<f64>>,
    pub right: Vec<Vec<f64>>,
    pub fs: f64,
    pub provenance: HrirProvenance,
}

impl HrirSet {
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Index of the entry angularly nearest `direction`; ties go to the
    /// lowest index.
    pub fn nearest(&self, direction: Vec3) -> usize {
        let d = direction.normalized();
        let mut best = (0usize, f64::INFINITY);
        for (i, &e) in self.directions.iter().enumerate() {
            let ang = e.angle_to(d);
            if ang < best.1 - 1e-12 {
                best = (i, ang);
            }
        }
        best.0
    }
}

/// Woodworth delay of one ear relative to the head center: the direct-path
/// advantage -(a/c)cos(theta) on the near hemisphere, the wrapping path
/// (a/c)(theta - pi/2) on the far one. `theta` is the angle between the
/// source direction and the ear axis.
fn woodworth_delay(theta: f64) -> f64 {
    let a_c = HEAD_RADIUS / SPEED_OF_SOUND;
    if theta <= std::f64::consts::FRAC_PI_2 {
        -a_c * theta.cos()
    } else {
        a_c * (theta - std::f64::consts::FRAC_PI_2)
    }
}

/// Magnitude of the rigid-sphere transfer function for a plane wave and a
/// receiver on the sphere surface at angle `theta` from the incidence
/// direction, normalized to the free-field pressure (Rayleigh scattering
/// series; see Duda & Martens, JASA 1998, infinite source range):
///
///   Psi(mu, theta) = (1/mu^2) sum_m (2m+1) P_m(cos theta) i^(m-1) / h'_m(mu)
///
/// with mu = ka, P_m Legendre polynomials and h_m spherical Hankel
/// functions of the first kind. This captures the ipsilateral pressure
/// buildup (+6 dB at high ka), the contralateral shadow and its
/// angle-dependent diffraction ripple.
fn sphere_magnitude(f: f64, theta: f64) -> f64 {
    use rustfft::num_complex::Complex;
    let mu = 2.0 * std::f64::consts::PI * f * HEAD_RADIUS / SPEED_OF_SOUND;
    if mu < 1e-4 {
        return 1.0;
    }
    // The series measures theta from the propagation direction: a receiver
    // facing the source sits at theta = pi there, while `theta` here is
    // measured from the source direction.
    let x = -theta.cos();
    let terms = mu.ceil() as usize + 40;
    // Spherical Hankel h_m(mu) by upward recurrence (stable: the y_m part
    // dominates wherever the recurrence loses accuracy on j_m).
    let (sin_mu, cos_mu) = mu.sin_cos();
    let j0 = sin_mu / mu;
    let y0 = -cos_mu / mu;
    let j1 = sin_mu / (mu * mu) - cos_mu / mu;
    let y1 = -cos_mu / (mu * mu) - sin_mu / mu;
    let mut h_prev = Complex::new(j0, y0);
    let mut h = Complex::new(j1, y1);
    // Legendre recurrence.
    let mut p_prev = 1.0f64;
    let mut p = x;
    // i^(m-1) cycles with period 4, starting at i^-1 = -i for m = 0.
    let i_pow = [
        Complex::new(0.0, -1.0),
        Complex::new(1.0, 0.0),
        Complex::new(0.0, 1.0),
        Complex::new(-1.0, 0.0),
    ];
    // m = 0 term: h'_0 = -h_1.
    let mut sum = i_pow[0] / -h;
    for m in 1..=terms {
        // h'_m(mu) = h_(m-1)(mu) - (m+1)/mu * h_m(mu).
        let dh = h_prev - h * ((m as f64 + 1.0) / mu);
        sum += i_pow[m % 4] * ((2 * m + 1) as f64 * p) / dh;
        let h_next = h * ((2 * m + 1) as f64 / mu) - h_prev;
        h_prev = h;
        h = h_next;
        let p_next = (((2 * m + 1) as f64) * x * p - m as f64 * p_prev) / (m as f64 + 1.0);
        p_prev = p;
        p = p_next;
    }
    (sum / (mu * mu)).norm()
}

/// Extra head-shadow depth in dB at full effect (source diametrically
/// opposite the ear), on top of the sphere diffraction magnitude. A bare
/// sphere underestimates the lateral level difference of a real head
/// (no pinna, no torso); this shelf restores it.
const SHADOW_MAX_DB: f64 = 12.0;
const SHADOW_F_LO: f64 = 1500.0;
const SHADOW_F_HI: f64 = 3000.0;

/// High-shelf shadow weight: 0 below 1.5 kHz, 1 above 3 kHz, raised cosine
/// in log-frequency between.
fn shadow_weight(f: f64) -> f64 {
    if f <= SHADOW_F_LO {
        0.0
    } else if f >= SHADOW_F_HI {
        1.0
    } else {
        let x = (f / SHADOW_F_LO).log2() / (SHADOW_F_HI / SHADOW_F_LO).log2();
        0.5 * (1.0 - (std::f64::consts::PI * x).cos())
    }
}

/// One ear of the sphere model: minimum-phase diffraction-plus-shadow
/// magnitude convolved with a windowed-sinc fractional delay.
fn sphere_ear(theta: f64, fs: f64) -> Vec<f64> {
    // Shadow grows linearly once the source crosses the ear's lateral
    // plane; at theta = pi it reaches SHADOW_MAX_DB.
    let depth_db =
        SHADOW_MAX_DB * ((theta - std::f64::consts::FRAC_PI_2) / std::f64::consts::FRAC_PI_2)
            .max(0.0);
    let shelf = min_phase_fir(
        |f| sphere_magnitude(f, theta) * 10f64.powf(-depth_db * shadow_weight(f) / 20.0),
        fs,
        128,
    );
    // Bulk offset keeps every delay positive; shared by both ears so
    // interaural differences are unaffected.
    let offset = 2.0 * HEAD_RADIUS / SPEED_OF_SOUND;
    let delay = (woodworth_delay(theta) + offset) * fs;
    let sinc_len = 64usize;
    let mut frac = vec![0.0; sinc_len];
    for (n, v) in frac.iter_mut().enumerate() {
        let x = n as f64 - delay;
        let sinc = if x.abs() < 1e-12 {
            1.0
        } else {
            (std::f64::consts::PI * x).sin() / (std::f64::consts::PI * x)
        };
        // Hann window centered on the delay, spanning the kernel.
        let w = (n as f64 - delay) / sinc_len as f64 + 0.5;
        let window = if (0.0..=1.0).contains(&w) {
            0.5 * (1.0 - (2.0 * std::f64::consts::PI * w).cos())
        } else {
            0.0
        };
        *v = sinc * window;
    }
    let mut ir = fft_convolve(&frac, &shelf);
    ir.resize(SPHERE_HRIR_TAPS, 0.0);
    ir
}

/// Analytic rigid-sphere HRIR pair (left, right) for a source direction.
/// Ears sit on the +-y axis (left ear +y).
pub fn sphere_hrir(direction: Vec3, fs: f64) -> (Vec<f64>, Vec<f64>) {
    let d = direction.normalized();
    let theta_l = d.dot(Vec3::new(0.0, 1.0, 0.0)).clamp(-1.0, 1.0).acos();
    let theta_r = d.dot(Vec3::new(0.0, -1.0, 0.0)).clamp(-1.0, 1.0).acos();
    (sphere_ear(theta_l, fs), sphere_ear(theta_r, fs))
}

/// Builds an analytic-sphere HrirSet over the given directions.
pub fn sphere_hrir_set(directions: &[Vec3], fs: f64) -> Result<HrirSet> {
    if directions.is_empty() {
        return Err(Error::InvalidArgument("empty HRIR direction list".into()));
    }
    let mut left = Vec::with_capacity(directions.len());
    let mut right = Vec::with_capacity(directions.len());
    for &d in directions {
        let (l, r) = sphere_hrir(d, fs);
        left.push(l);
        right.push(r);
    }
    Ok(HrirSet {
        directions: directions.iter().map(|d| d.normalized()).collect(),
        left,
        right,
        fs,
        provenance: HrirProvenance::AnalyticSphere,
    })
}

/// Loads an HRIR set from a directory holding `manifest.txt` (header line
/// `fs_hz <value>`, then `azimuth_deg elevation_deg left_file right_file`
/// per entry) and mono 32-bit-float WAV files.
pub fn load_hrir_set(dir: &Path) -> Result<HrirSet> {
    let manifest = dir.join("manifest.txt");
    let text = std::fs::read_to_string(&manifest)
        .map_err(|e| Error::Format(format!("cannot read {}: {e}", manifest.display())))?;
    let mut fs: Option<f64> = None;
    let mut directions = Vec::new();
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut ir_len: Option<usize> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Format(format!("manifest line {}: {msg}", lineno + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] == "fs_hz" {
            if fields.len() != 2 {
                return Err(bad("expected `fs_hz <value>`".into()));
            }
            fs = Some(
                fields[1]
                    .parse()
                    .map_err(|_| bad(format!("bad sample rate {:?}", fields[1])))?,
            );
            continue;
        }
        if fields.len() != 4 {
            return Err(bad(
                "expected `azimuth_deg elevation_deg left_file right_file`".into(),
            ));
        }
        let az: f64 = fields[0]
            .parse()
            .map_err(|_| bad(format!("bad azimuth {:?}", fields[0])))?;
        let el: f64 = fields[1]
            .parse()
            .map_err(|_| bad(format!("bad elevation {:?}", fields[1])))?;
        let fs = fs.ok_or_else(|| bad("fs_hz header must precede entries".into()))?;
        let load_mono = |name: &str| -> Result<Vec<f64>> {
            let wav = read_wav(&dir.join(name))?;
            if wav.num_channels() != 1 {
                return Err(Error::Format(format!(
                    "{name}: expected mono, got {} channels",
                    wav.num_channels()
                )));
            }
            if (wav.fs - fs).abs() > 1e-6 {
                return Err(Error::Format(format!(
                    "{name}: sample rate {} does not match manifest {fs}",
                    wav.fs
                )));
            }
            Ok(wav.channels.into_iter().next().unwrap())
        };
        let l = load_mono(fields[2])?;
        let r = load_mono(fields[3])?;
        if l.len() != r.len() || ir_len.is_some_and(|n| n != l.len()) {
            return Err(bad("all IRs must share one length".into()));
        }
        ir_len = Some(l.len());
        directions.push(direction_from_angles(az, el));
        left.push(l);
        right.push(r);
    }
    let fs = fs.ok_or_else(|| Error::Format("manifest has no fs_hz header".into()))?;
    if directions.len() < 4 {
        return Err(Error::Format(format!(
            "HRIR set needs at least 4 directions, got {}",
            directions.len()
        )));
    }
    Ok(HrirSet {
        directions,
        left,
        right,
        fs,
        provenance: HrirProvenance::FileLoaded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::fir_magnitude_at;
    use crate::wav::write_wav;

    #[test]
    fn frontal_direction_is_symmetric() {
        let (l, r) = sphere_hrir(Vec3::new(1.0, 0.0, 0.0), 44100.0);
        assert_eq!(l, r);
        assert_eq!(l.len(), SPHERE_HRIR_TAPS);
    }

    #[test]
    fn antipodal_directions_mirror_ears() {
        let d = Vec3::new(0.3, 0.8, -0.2).normalized();
        let (l1, r1) = sphere_hrir(d, 44100.0);
        let (l2, r2) = sphere_hrir(-d, 44100.0);
        assert_eq!(l1, r2);
        assert_eq!(r1, l2);
    }

    #[test]
    fn lateral_lead_time_matches_woodworth() {
        // +90 deg azimuth: the left ear leads by a(theta + sin theta)/c at
        // theta = pi/2, about 0.656 ms.
        let fs = 44100.0;
        let (l, r) = sphere_hrir(Vec3::new(0.0, 1.0, 0.0), fs);
        let peak = |ir: &[f64]| -> usize {
            ir.iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
                .unwrap()
                .0
        };
        let lead_samples = peak(&r) as isize - peak(&l) as isize;
        let expected =
            HEAD_RADIUS * (std::f64::consts::FRAC_PI_2 + 1.0) / SPEED_OF_SOUND * fs;
        assert!(
            (lead_samples as f64 - expected).abs() <= 2.0,
            "lead {lead_samples} samples, expected {expected:.1}"
        );
    }

    #[test]
    fn contralateral_shadow_above_3khz() {
        let fs = 44100.0;
        let (l, r) = sphere_hrir(Vec3::new(0.0, 1.0, 0.0), fs);
        for f in [3000.0, 4000.0, 6000.0, 8000.0] {
            let shadow_db = 20.0 * (fir_magnitude_at(&l, fs, f) / fir_magnitude_at(&r, fs, f))
                .log10();
            assert!(shadow_db >= 6.0, "{f} Hz: {shadow_db:.2} dB");
        }
        // Low frequencies are barely shadowed.
        let low_db =
            20.0 * (fir_magnitude_at(&l, fs, 250.0) / fir_magnitude_at(&r, fs, 250.0)).log10();
        assert!(low_db < 2.0, "250 Hz: {low_db:.2} dB");
    }

    #[test]
    fn nearest_is_exact_on_own_directions() {
        let dirs: Vec<Vec3> = crate::vbap::builtin_layout_86().directions;
        let set = sphere_hrir_set(&dirs, 44100.0).unwrap();
        for (i, &d) in dirs.iter().enumerate() {
            assert_eq!(set.nearest(d), i);
        }
    }

    #[test]
    fn load_hrir_set_roundtrip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let fs = 44100.0;
        for (name, data) in [
            ("a_l.wav", vec![1.0, 0.5]),
            ("a_r.wav", vec![1.0, -0.5]),
            ("b_l.wav", vec![0.3, 0.0]),
            ("b_r.wav", vec![0.0, 0.3]),
        ] {
            write_wav(&dir.path().join(name), &[data], fs).unwrap();
        }
        let manifest = "fs_hz 44100\n\
                        0 0 a_l.wav a_r.wav\n\
                        90 0 b_l.wav b_r.wav\n\
                        180 0 a_l.wav a_r.wav\n\
                        0 90 b_l.wav b_r.wav\n";
        std::fs::write(dir.path().join("manifest.txt"), manifest).unwrap();
        let set = load_hrir_set(dir.path()).unwrap();
        assert_eq!(set.len(), 4);
        assert_eq!(set.fs, fs);
        assert_eq!(set.provenance, HrirProvenance::FileLoaded);
        assert_eq!(set.left[1], vec![0.30000001192092896, 0.0]);

        // fs mismatch between manifest and file.
        write_wav(&dir.path().join("c_l.wav"), &[vec![1.0]], 48000.0).unwrap();
        let manifest = "fs_hz 44100\n0 0 c_l.wav a_r.wav\n";
        std::fs::write(dir.path().join("manifest.txt"), manifest).unwrap();
        assert!(load_hrir_set(dir.path()).is_err());
    }
}
