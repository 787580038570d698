//! Shoebox image-source model: direct sound and specular reflections with
//! per-band wall-reflection products, delays and arrival directions.

use crate::error::{Error, Result};
use crate::geometry::{DirectionSet, ShoeboxRoom, Vec3, Wall, NUM_BANDS, SPEED_OF_SOUND};

#[derive(Debug, Clone)]
pub struct ImageSource {
    /// Reflection order; 0 is the direct sound.
    pub order: usize,
    pub position: Vec3,
    /// Product of per-wall pressure reflection factors sqrt(1 - alpha) per band.
    pub band_gain: [f64; NUM_BANDS],
    pub distance: f64,
    pub delay: f64,
    /// Unit vector from receiver toward the image, in room axes.
    pub arrival_dir: Vec3,
}

/// Enumerates the direct sound and all images of order 1..=max_order over
/// the standard shoebox mirror lattice.
pub fn compute_image_sources(
    room: &ShoeboxRoom,
    source: Vec3,
    receiver: Vec3,
    max_order: usize,
) -> Result<Vec<ImageSource>> {
    if !room.contains_strictly(source) || !room.contains_strictly(receiver) {
        return Err(Error::Geometry(
            "source and receiver must be strictly inside the room".into(),
        ));
    }
    if (source - receiver).norm() < 1e-12 {
        return Err(Error::Geometry("source coincides with receiver".into()));
    }

    let dims = [room.dims.x, room.dims.y, room.dims.z];
    let src = [source.x, source.y, source.z];
    let m_range = max_order as i64 + 1;
    let mut images = Vec::new();

    // Per axis: image coordinate (1 - 2p) s + 2 m L, with p in {0, 1} and
    // m integer. Reflection counts: |m - p| off the lower wall, |m| off the
    // upper wall.
    for px in 0..2i64 {
        for mx in -m_range..=m_range {
            let ox = (mx - px).unsigned_abs() as usize + mx.unsigned_abs() as usize;
            if ox > max_order {
                continue;
            }
            for py in 0..2i64 {
                for my in -m_range..=m_range {
                    let oy = (my - py).unsigned_abs() as usize + my.unsigned_abs() as usize;
                    if ox + oy > max_order {
                        continue;
                    }
                    for pz in 0..2i64 {
                        for mz in -m_range..=m_range {
                            let oz =
                                (mz - pz).unsigned_abs() as usize + mz.unsigned_abs() as usize;
                            let order = ox + oy + oz;
                            if order > max_order {
                                continue;
                            }
                            let p = [px, py, pz];
                            let m = [mx, my, mz];
                            let mut pos = [0.0; 3];
                            for a in 0..3 {
                                pos[a] = (1 - 2 * p[a]) as f64 * src[a]
                                    + 2.0 * m[a] as f64 * dims[a];
                            }
                            let position = Vec3::new(pos[0], pos[1], pos[2]);
                            let mut band_gain = [1.0; NUM_BANDS];
                            for a in 0..3 {
                                let lower = Wall::from_index(2 * a)?;
                                let upper = Wall::from_index(2 * a + 1)?;
                                let n_lower = (m[a] - p[a]).unsigned_abs() as u32;
                                let n_upper = m[a].unsigned_abs() as u32;
                                for b in 0..NUM_BANDS {
                                    let r_lo = (1.0 - room.alpha(lower, b)).sqrt();
                                    let r_hi = (1.0 - room.alpha(upper, b)).sqrt();
                                    band_gain[b] *=
                                        r_lo.powi(n_lower as i32) * r_hi.powi(n_upper as i32);
                                }
                            }
                            let to_image = position - receiver;
                            let distance = to_image.norm();
                            images.push(ImageSource {
                                order,
                                position,
                                band_gain,
                                distance,
                                delay: distance / SPEED_OF_SOUND,
                                arrival_dir: to_image.normalized(),
                            });
                        }
                    }
                }
            }
        }
    }

    // Deterministic order: by reflection order, then delay, then position.
    images.sort_by(|a, b| {
        a.order
            .cmp(&b.order)
            .then(a.delay.partial_cmp(&b.delay).unwrap())
            .then(a.position.x.partial_cmp(&b.position.x).unwrap())
            .then(a.position.y.partial_cmp(&b.position.y).unwrap())
            .then(a.position.z.partial_cmp(&b.position.z).unwrap())
    });
    Ok(images)
}

/// A sparse pulse train per FDN input channel: (sample-domain delay in
/// seconds, broadband amplitude, per-band gains).
#[derive(Debug, Clone, Default)]
pub struct PulseTrain {
    pub pulses: Vec<Pulse>,
}

#[derive(Debug, Clone)]
pub struct Pulse {
    pub delay: f64,
    pub amplitude: f64,
    pub band_gain: [f64; NUM_BANDS],
}

/// Assigns each highest-order image to the FDN input channel whose direction
/// is angularly nearest its arrival direction (ties to the lowest index).
pub fn last_order_injection(
    images: &[ImageSource],
    directions: &DirectionSet,
) -> Result<Vec<PulseTrain>> {
    let max_order = images.iter().map(|i| i.order).max().unwrap_or(0);
    let last: Vec<&ImageSource> = images.iter().filter(|i| i.order == max_order).collect();
    if last.is_empty() || max_order == 0 {
        return Err(Error::InvalidInput(
            "no highest-order images to inject".into(),
        ));
    }
    let mut trains = vec![PulseTrain::default(); directions.len()];
    for img in last {
        let mut best = (0usize, f64::INFINITY);
        for (c, &dir) in directions.directions().iter().enumerate() {
            let ang = dir.angle_to(img.arrival_dir);
            if ang < best.1 - 1e-12 {
                best = (c, ang);
            }
        }
        trains[best.0].pulses.push(Pulse {
            delay: img.delay,
            amplitude: 1.0 / img.distance,
            band_gain: img.band_gain,
        });
    }
    Ok(trains)
}
