//! Spatial subsampling of wall absorption onto the VRS directions.
//!
//! Each VRS direction is warped by elementwise division with the (absolute)
//! receiver-relative room-vertex vector of its octant, the contribution of
//! the octant's three walls is computed with the inverted wall normals as a
//! VBAP base, and the per-band wall absorption is blended with those gains.

use crate::error::{Error, Result};
use crate::geometry::{DirectionSet, ShoeboxRoom, Vec3, Wall, NUM_BANDS};

/// Components of the receiver-relative vertex vector are clamped to this
/// value (meters) so the warp stays bounded near a wall.
const MIN_VERTEX_DISTANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy)]
pub struct WarpedDirection {
    pub vrs_index: usize,
    pub vector: Vec3,
}

/// The octant of space around the receiver containing a VRS direction,
/// with the receiver-relative room vertex and the three bounding walls.
#[derive(Debug, Clone, Copy)]
pub struct OctantFrame {
    pub index: usize,
    /// Absolute values of the room-vertex coordinates relative to the
    /// receiver; all components strictly positive.
    pub vertex_abs: Vec3,
    /// The walls whose planes bound the octant, ordered x, y, z.
    pub walls: [Wall; 3],
}

#[derive(Debug, Clone, Copy)]
pub struct GainTriple {
    pub gains: [f64; 3],
    pub walls: [Wall; 3],
}

/// Per-VRS, per-band blended absorption coefficients.
#[derive(Debug, Clone)]
pub struct SampledAbsorption {
    /// `coefficients[k][band]`.
    pub coefficients: Vec<[f64; NUM_BANDS]>,
}

impl SampledAbsorption {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

/// Octant of `dir`: a zero component counts as positive.
fn octant_of(dir: Vec3) -> usize {
    (usize::from(dir.x < 0.0)) | (usize::from(dir.y < 0.0)) << 1 | (usize::from(dir.z < 0.0)) << 2
}

/// The octant frame for the octant containing `dir`, seen from `receiver`.
pub fn octant_frame(dir: Vec3, receiver: Vec3, room: &ShoeboxRoom) -> Result<OctantFrame> {
    if !room.contains_strictly(receiver) {
        return Err(Error::Geometry(
            "receiver must be strictly inside the room".into(),
        ));
    }
    let index = octant_of(dir);
    let neg = [index & 1 != 0, index & 2 != 0, index & 4 != 0];
    let vertex = Vec3::new(
        if neg[0] { 0.0 } else { room.dims.x },
        if neg[1] { 0.0 } else { room.dims.y },
        if neg[2] { 0.0 } else { room.dims.z },
    );
    let rel = vertex - receiver;
    let vertex_abs = Vec3::new(
        rel.x.abs().max(MIN_VERTEX_DISTANCE),
        rel.y.abs().max(MIN_VERTEX_DISTANCE),
        rel.z.abs().max(MIN_VERTEX_DISTANCE),
    );
    let walls = [
        if neg[0] { Wall::NegX } else { Wall::PosX },
        if neg[1] { Wall::NegY } else { Wall::PosY },
        if neg[2] { Wall::NegZ } else { Wall::PosZ },
    ];
    Ok(OctantFrame {
        index,
        vertex_abs,
        walls,
    })
}

/// Warps a VRS direction by elementwise division with the octant's
/// receiver-relative vertex vector, then renormalizes.
pub fn warp_direction(
    vrs_dir: Vec3,
    receiver: Vec3,
    room: &ShoeboxRoom,
) -> Result<(WarpedDirection, OctantFrame)> {
    let frame = octant_frame(vrs_dir, receiver, room)?;
    let v = frame.vertex_abs;
    let divided = Vec3::new(vrs_dir.x / v.x, vrs_dir.y / v.y, vrs_dir.z / v.z);
    Ok((
        WarpedDirection {
            vrs_index: 0,
            vector: divided.normalized(),
        },
        frame,
    ))
}

/// Contribution gains of the octant's three walls for a warped direction.
///
/// Solves g = w · N^-1 with the outward wall normals as base, then
/// normalizes to unit sum so the blended coefficient stays a convex
/// combination of the wall coefficients.
pub fn blend_gains(warped: &WarpedDirection, octant: &OctantFrame) -> Result<GainTriple> {
    let normals = octant.walls.map(Wall::outward_normal);
    let raw = solve_gains(warped.vector, &normals)?;
    let mut g = raw.map(|x| x.max(0.0));
    let sum: f64 = g.iter().sum();
    if sum <= 0.0 {
        return Err(Error::Geometry(
            "degenerate gain triple: all contributions zero".into(),
        ));
    }
    for x in &mut g {
        *x /= sum;
    }
    Ok(GainTriple {
        gains: g,
        walls: octant.walls,
    })
}

/// Solves dir = g1 n1 + g2 n2 + g3 n3 for g (general 3x3 solve; for an
/// axis-aligned room this reduces to the absolute component values).
fn solve_gains(dir: Vec3, normals: &[Vec3; 3]) -> Result<[f64; 3]> {
    let [n1, n2, n3] = *normals;
    let det = n1.dot(n2.cross(n3));
    if det.abs() < 1e-12 {
        return Err(Error::Geometry("singular wall-normal basis".into()));
    }
    // Cramer's rule on the transposed system g · N = dir.
    Ok([
        dir.dot(n2.cross(n3)) / det,
        n1.dot(dir.cross(n3)) / det,
        n1.dot(n2.cross(dir)) / det,
    ])
}

/// Blends per-band wall absorption into per-VRS sampled absorption.
pub fn sample_absorption(
    room: &ShoeboxRoom,
    receiver: Vec3,
    directions: &DirectionSet,
) -> Result<SampledAbsorption> {
    let mut coefficients = Vec::with_capacity(directions.len());
    for (k, &dir) in directions.directions().iter().enumerate() {
        let (mut warped, frame) = warp_direction(dir, receiver, room)?;
        warped.vrs_index = k;
        let triple = blend_gains(&warped, &frame)?;
        let mut a = [0.0; NUM_BANDS];
        for band in 0..NUM_BANDS {
            a[band] = triple
                .gains
                .iter()
                .zip(triple.walls)
                .map(|(&g, w)| g * room.alpha(w, band))
                .sum();
        }
        coefficients.push(a);
    }
    Ok(SampledAbsorption { coefficients })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{direction_set, ShoeboxRoom, ALL_WALLS, NUM_BANDS};
    use approx::assert_relative_eq;

    fn cube(side: f64) -> ShoeboxRoom {
        ShoeboxRoom::uniform(Vec3::new(side, side, side), 0.5).unwrap()
    }

    #[test]
    fn warp_identity_at_cube_center() {
        let room = cube(4.0);
        let center = Vec3::new(2.0, 2.0, 2.0);
        for &dir in direction_set(24).unwrap().directions() {
            let (w, _) = warp_direction(dir, center, &room).unwrap();
            assert!((w.vector - dir).norm() < 1e-12);
        }
    }

    #[test]
    fn warp_hand_example() {
        // vertex_abs = (2, 4, 6), dir = (1,1,1)/sqrt(3) -> (6, 3, 2)/7.
        let room = ShoeboxRoom::uniform(Vec3::new(3.0, 5.0, 7.0), 0.5).unwrap();
        let receiver = Vec3::new(1.0, 1.0, 1.0);
        let dir = Vec3::new(1.0, 1.0, 1.0).normalized();
        let (w, frame) = warp_direction(dir, receiver, &room).unwrap();
        assert_relative_eq!(frame.vertex_abs.x, 2.0);
        assert_relative_eq!(frame.vertex_abs.y, 4.0);
        assert_relative_eq!(frame.vertex_abs.z, 6.0);
        assert_relative_eq!(w.vector.x, 6.0 / 7.0, epsilon = 1e-12);
        assert_relative_eq!(w.vector.y, 3.0 / 7.0, epsilon = 1e-12);
        assert_relative_eq!(w.vector.z, 2.0 / 7.0, epsilon = 1e-12);
    }

    #[test]
    fn corner_direction_maps_to_cube_diagonal() {
        let room = ShoeboxRoom::uniform(Vec3::new(3.0, 5.0, 7.0), 0.5).unwrap();
        let receiver = Vec3::new(1.0, 2.0, 3.0);
        for ox in [false, true] {
            for oy in [false, true] {
                for oz in [false, true] {
                    let vertex = Vec3::new(
                        if ox { 0.0 } else { room.dims.x },
                        if oy { 0.0 } else { room.dims.y },
                        if oz { 0.0 } else { room.dims.z },
                    );
                    let dir = (vertex - receiver).normalized();
                    let (w, _) = warp_direction(dir, receiver, &room).unwrap();
                    let expected = Vec3::new(
                        if ox { -1.0 } else { 1.0 },
                        if oy { -1.0 } else { 1.0 },
                        if oz { -1.0 } else { 1.0 },
                    )
                    .normalized();
                    assert!(
                        (w.vector - expected).norm() < 1e-9,
                        "corner {vertex:?}: got {:?}, want {expected:?}",
                        w.vector
                    );
                }
            }
        }
    }

    #[test]
    fn gains_one_hot_on_wall_normal() {
        let room = cube(4.0);
        let receiver = Vec3::new(1.0, 2.0, 2.0);
        let (w, frame) = warp_direction(Vec3::new(1.0, 0.0, 0.0), receiver, &room).unwrap();
        let g = blend_gains(&w, &frame).unwrap();
        assert_relative_eq!(g.gains[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(g.gains[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(g.gains[2], 0.0, epsilon = 1e-12);
        assert_eq!(g.walls[0], Wall::PosX);
    }

    #[test]
    fn gains_equal_on_cube_diagonal() {
        let w = WarpedDirection {
            vrs_index: 0,
            vector: Vec3::new(1.0, 1.0, 1.0).normalized(),
        };
        let frame = OctantFrame {
            index: 0,
            vertex_abs: Vec3::new(1.0, 1.0, 1.0),
            walls: [Wall::PosX, Wall::PosY, Wall::PosZ],
        };
        let g = blend_gains(&w, &frame).unwrap();
        for x in g.gains {
            assert_relative_eq!(x, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn gains_abs_component_rule() {
        // warped = (6, 3, 2)/7 -> (6/11, 3/11, 2/11).
        let w = WarpedDirection {
            vrs_index: 0,
            vector: Vec3::new(6.0 / 7.0, 3.0 / 7.0, 2.0 / 7.0),
        };
        let frame = OctantFrame {
            index: 0,
            vertex_abs: Vec3::new(1.0, 1.0, 1.0),
            walls: [Wall::PosX, Wall::PosY, Wall::PosZ],
        };
        let g = blend_gains(&w, &frame).unwrap();
        assert_relative_eq!(g.gains[0], 6.0 / 11.0, epsilon = 1e-12);
        assert_relative_eq!(g.gains[1], 3.0 / 11.0, epsilon = 1e-12);
        assert_relative_eq!(g.gains[2], 2.0 / 11.0, epsilon = 1e-12);
    }

    #[test]
    fn homogeneous_room_reproduces_alpha() {
        let room = ShoeboxRoom::uniform(Vec3::new(8.0, 5.0, 3.0), 0.37).unwrap();
        let dirs = direction_set(24).unwrap();
        let receiver = Vec3::new(1.3, 4.1, 0.6);
        let sampled = sample_absorption(&room, receiver, &dirs).unwrap();
        for a in &sampled.coefficients {
            for &v in a {
                assert_relative_eq!(v, 0.37, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn convexity_bounds() {
        let mut abs = [[0.0; NUM_BANDS]; 6];
        for (w, bands) in abs.iter_mut().enumerate() {
            for (b, v) in bands.iter_mut().enumerate() {
                *v = ((w * 7 + b) as f64 * 0.123).fract();
            }
        }
        let room = ShoeboxRoom::new(Vec3::new(24.0, 8.0, 6.0), abs).unwrap();
        let dirs = direction_set(48).unwrap();
        let receiver = Vec3::new(3.0, 1.5, 2.2);
        let sampled = sample_absorption(&room, receiver, &dirs).unwrap();
        for band in 0..NUM_BANDS {
            let lo = ALL_WALLS
                .iter()
                .map(|&w| room.alpha(w, band))
                .fold(f64::INFINITY, f64::min);
            let hi = ALL_WALLS
                .iter()
                .map(|&w| room.alpha(w, band))
                .fold(f64::NEG_INFINITY, f64::max);
            for a in &sampled.coefficients {
                assert!(a[band] >= lo - 1e-9 && a[band] <= hi + 1e-9);
            }
        }
    }

    #[test]
    fn six_vrs_position_invariant() {
        let mut abs = [[0.05; NUM_BANDS]; 6];
        abs[0] = [0.99; NUM_BANDS];
        let room = ShoeboxRoom::new(Vec3::new(24.0, 8.0, 6.0), abs).unwrap();
        let dirs = direction_set(6).unwrap();
        let a1 = sample_absorption(&room, Vec3::new(0.5, 1.0, 1.0), &dirs).unwrap();
        let a2 = sample_absorption(&room, Vec3::new(20.0, 7.0, 5.0), &dirs).unwrap();
        for (x, y) in a1.coefficients.iter().zip(&a2.coefficients) {
            for (u, v) in x.iter().zip(y) {
                assert_eq!(u, v);
            }
        }
        // The -x-pointing VRS carries exactly the absorbing wall's alpha.
        assert_eq!(a1.coefficients[0][0], 0.99);
    }

    #[test]
    fn continuity_across_octant_crossing() {
        // Move the receiver along a straight 1 mm-step path that makes a
        // fixed VRS direction's octant vertex switch; a_k must stay smooth.
        let mut abs = [[0.05; NUM_BANDS]; 6];
        abs[0] = [0.99; NUM_BANDS];
        let room = ShoeboxRoom::new(Vec3::new(24.0, 8.0, 6.0), abs).unwrap();
        let dirs = direction_set(24).unwrap();
        let mut prev: Option<Vec<[f64; NUM_BANDS]>> = None;
        let steps = 400;
        for i in 0..=steps {
            let x = 2.0 + i as f64 * 0.001;
            let sampled =
                sample_absorption(&room, Vec3::new(x, 4.0, 3.0), &dirs).unwrap();
            if let Some(p) = prev {
                for (a, b) in sampled.coefficients.iter().zip(&p) {
                    for (u, v) in a.iter().zip(b) {
                        assert!(
                            (u - v).abs() < 1e-3,
                            "discontinuity at x = {x}: |{u} - {v}|"
                        );
                    }
                }
            }
            prev = Some(sampled.coefficients.clone());
        }
    }

    #[test]
    fn receiver_near_wall_is_clamped_not_error() {
        let room = cube(4.0);
        let receiver = Vec3::new(1e-9, 2.0, 2.0);
        let dirs = direction_set(12).unwrap();
        assert!(sample_absorption(&room, receiver, &dirs).is_ok());
    }
}
