//! Room and receiver geometry, octave-band bookkeeping, and the polyhedral
//! virtual-reverb-source (VRS) direction sets.

use crate::error::{Error, Result};
use crate::hull::ConvexHull;

/// Speed of sound in m/s used throughout the simulation.
pub const SPEED_OF_SOUND: f64 = 343.0;

/// Octave-band center frequencies in Hz.
pub const BAND_CENTERS: [f64; 7] = [125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0];

/// Number of octave bands.
pub const NUM_BANDS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        Vec3::new(self.x / n, self.y / n, self.z / n)
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    /// Angle to `other` in radians, both assumed unit norm.
    pub fn angle_to(self, other: Vec3) -> f64 {
        self.dot(other).clamp(-1.0, 1.0).acos()
    }

    /// Rotation about the z axis by `deg` degrees (counterclockwise seen from +z).
    pub fn rotated_z(self, deg: f64) -> Vec3 {
        let (s, c) = deg.to_radians().sin_cos();
        Vec3::new(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }

    pub fn component(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Wall of an axis-aligned shoebox room.
///
/// `NegX` is the wall in the plane x = 0, `PosX` the wall at x = Lx, and so on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wall {
    NegX,
    PosX,
    NegY,
    PosY,
    NegZ,
    PosZ,
}

pub const ALL_WALLS: [Wall; 6] = [
    Wall::NegX,
    Wall::PosX,
    Wall::NegY,
    Wall::PosY,
    Wall::NegZ,
    Wall::PosZ,
];

impl Wall {
    pub fn index(self) -> usize {
        match self {
            Wall::NegX => 0,
            Wall::PosX => 1,
            Wall::NegY => 2,
            Wall::PosY => 3,
            Wall::NegZ => 4,
            Wall::PosZ => 5,
        }
    }

    pub fn from_index(i: usize) -> Result<Wall> {
        ALL_WALLS
            .get(i)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("wall index {i} out of range")))
    }

    /// Axis (0 = x, 1 = y, 2 = z) this wall is perpendicular to.
    pub fn axis(self) -> usize {
        self.index() / 2
    }

    /// Outward-pointing unit normal (pointing out of the room).
    pub fn outward_normal(self) -> Vec3 {
        match self {
            Wall::NegX => Vec3::new(-1.0, 0.0, 0.0),
            Wall::PosX => Vec3::new(1.0, 0.0, 0.0),
            Wall::NegY => Vec3::new(0.0, -1.0, 0.0),
            Wall::PosY => Vec3::new(0.0, 1.0, 0.0),
            Wall::NegZ => Vec3::new(0.0, 0.0, -1.0),
            Wall::PosZ => Vec3::new(0.0, 0.0, 1.0),
        }
    }
}

/// Axis-aligned shoebox room with per-wall, per-octave-band absorption.
#[derive(Debug, Clone)]
pub struct ShoeboxRoom {
    pub dims: Vec3,
    /// `absorption[wall][band]`, walls ordered -x, +x, -y, +y, -z, +z.
    pub absorption: [[f64; NUM_BANDS]; 6],
}

impl ShoeboxRoom {
    pub fn new(dims: Vec3, absorption: [[f64; NUM_BANDS]; 6]) -> Result<Self> {
        if dims.x <= 0.0 || dims.y <= 0.0 || dims.z <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "room dimensions must be strictly positive, got {dims:?}"
            )));
        }
        for (w, bands) in absorption.iter().enumerate() {
            for (b, &a) in bands.iter().enumerate() {
                if !(0.0..=1.0).contains(&a) || !a.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "absorption[{w}][{b}] = {a} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(Self { dims, absorption })
    }

    /// Room with the same absorption on every wall and band.
    pub fn uniform(dims: Vec3, alpha: f64) -> Result<Self> {
        Self::new(dims, [[alpha; NUM_BANDS]; 6])
    }

    pub fn volume(&self) -> f64 {
        self.dims.x * self.dims.y * self.dims.z
    }

    pub fn surface_area(&self) -> f64 {
        let d = self.dims;
        2.0 * (d.x * d.y + d.x * d.z + d.y * d.z)
    }

    pub fn wall_area(&self, wall: Wall) -> f64 {
        let d = self.dims;
        match wall.axis() {
            0 => d.y * d.z,
            1 => d.x * d.z,
            _ => d.x * d.y,
        }
    }

    pub fn alpha(&self, wall: Wall, band: usize) -> f64 {
        self.absorption[wall.index()][band]
    }

    pub fn contains_strictly(&self, p: Vec3) -> bool {
        p.x > 0.0 && p.x < self.dims.x && p.y > 0.0 && p.y < self.dims.y && p.z > 0.0 && p.z < self.dims.z
    }
}

/// Receiver position and horizontal orientation.
#[derive(Debug, Clone, Copy)]
pub struct Pose {
    pub position: Vec3,
    /// Orientation in the horizontal plane, degrees. 0 is defined by the scenario.
    pub yaw_deg: f64,
}

/// Set of K unit directions for the virtual reverb sources.
#[derive(Debug, Clone)]
pub struct DirectionSet {
    directions: Vec<Vec3>,
}

impl DirectionSet {
    /// Wraps explicit directions (e.g. downmix-merged VRS directions),
    /// normalizing each.
    pub fn from_directions(directions: Vec<Vec3>) -> Result<DirectionSet> {
        if directions.is_empty() {
            return Err(Error::InvalidArgument("empty direction set".into()));
        }
        for d in &directions {
            if d.norm() < 1e-12 {
                return Err(Error::InvalidArgument("zero direction in set".into()));
            }
        }
        Ok(DirectionSet {
            directions: directions.iter().map(|d| d.normalized()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn directions(&self) -> &[Vec3] {
        &self.directions
    }

    pub fn get(&self, k: usize) -> Vec3 {
        self.directions[k]
    }
}

pub const SUPPORTED_VRS_COUNTS: [usize; 5] = [6, 12, 24, 48, 96];

/// Vertices of one snub cube with unit circumradius.
///
/// `mirrored = false` gives one enantiomorph, `true` the other.
fn snub_cube_vertices(mirrored: bool) -> Vec<Vec3> {
    // Tribonacci constant t: t^3 = t^2 + t + 1.
    let mut t = 1.8f64;
    for _ in 0..64 {
        t = (t * t + t + 1.0) / (t * t);
    }
    let a = 1.0;
    let b = 1.0 / t;
    let c = t;
    let base = [a, b, c];
    let mut verts = Vec::with_capacity(24);
    // Even permutations of (a, b, c) with an even number of minus signs and
    // odd permutations with an odd number of minus signs (or the opposite
    // pairing for the mirrored solid).
    let perms: [([usize; 3], bool); 6] = [
        ([0, 1, 2], true),
        ([1, 2, 0], true),
        ([2, 0, 1], true),
        ([0, 2, 1], false),
        ([2, 1, 0], false),
        ([1, 0, 2], false),
    ];
    for &(p, even_perm) in &perms {
        for signs in 0..8u32 {
            // One chirality takes even permutations with an even number of
            // minus signs and odd permutations with an odd number; the
            // mirrored solid takes the complementary pairing.
            let parity_even = signs.count_ones() % 2 == 0;
            if parity_even != (even_perm ^ mirrored) {
                continue;
            }
            let mut v = [0.0f64; 3];
            for i in 0..3 {
                let s = if signs >> i & 1 == 1 { -1.0 } else { 1.0 };
                v[i] = s * base[p[i]];
            }
            verts.push(Vec3::new(v[0], v[1], v[2]).normalized());
        }
    }
    debug_assert_eq!(verts.len(), 24);
    verts
}

/// Two points per cube face, on one face diagonal, symmetric about the face
/// center at fractional offset `t` of the half-diagonal. All faces use the
/// same diagonal orientation, which makes the set antipodally symmetric and
/// gives the highest hull sphericity over the diagonal placements.
fn twelve_point_set(t: f64) -> Vec<Vec3> {
    let mut dirs = Vec::with_capacity(12);
    for axis in 0..3usize {
        let (u, v) = match axis {
            0 => (Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)),
            1 => (Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0)),
            _ => (Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)),
        };
        let n = match axis {
            0 => Vec3::new(1.0, 0.0, 0.0),
            1 => Vec3::new(0.0, 1.0, 0.0),
            _ => Vec3::new(0.0, 0.0, 1.0),
        };
        let diag = (u + v).scale(t);
        dirs.push((n + diag).normalized());
        dirs.push((n - diag).normalized());
        dirs.push((-n + diag).normalized());
        dirs.push((-n - diag).normalized());
    }
    dirs
}

/// Union of both chiral snub cubes, with the second enantiomorph rotated
/// about z to maximize hull sphericity. The unrotated union has lower
/// sphericity than one snub cube (its vertex pairs cluster), so the relative
/// rotation is searched like the 12-point offset.
fn forty_eight_set() -> Vec<Vec3> {
    let a = snub_cube_vertices(false);
    let b = snub_cube_vertices(true);
    let make = |phi: f64| -> Vec<Vec3> {
        let mut v = a.clone();
        v.extend(b.iter().map(|d| d.rotated_z(phi)));
        v
    };
    let phi = search_rotation(&make);
    make(phi)
}

/// Deterministic 1-D search over a z rotation in (0, 90) degrees maximizing
/// hull sphericity: 0.25-degree grid, then 0.01-degree refinement.
fn search_rotation(make: &dyn Fn(f64) -> Vec<Vec3>) -> f64 {
    let score = |phi: f64| sphericity_of(&make(phi)).unwrap_or(f64::MIN);
    let mut best = (f64::MIN, 45.0);
    for i in 1..360 {
        let phi = i as f64 * 0.25;
        let psi = score(phi);
        if psi > best.0 {
            best = (psi, phi);
        }
    }
    let center = best.1;
    for i in 0..50 {
        let phi = center - 0.25 + i as f64 * 0.01;
        let psi = score(phi);
        if psi > best.0 {
            best = (psi, phi);
        }
    }
    best.1
}

fn sphericity_of(dirs: &[Vec3]) -> Result<f64> {
    let hull = ConvexHull::build(dirs)?;
    Ok(wadell_sphericity(hull.volume(), hull.area()))
}

/// Wadell sphericity of a solid with volume `v` and surface area `a`.
pub fn wadell_sphericity(v: f64, a: f64) -> f64 {
    std::f64::consts::PI.powf(1.0 / 3.0) * (6.0 * v).powf(2.0 / 3.0) / a
}

/// Construct the K VRS directions.
///
/// The searched constructions (12, 48, 96) are deterministic; results are
/// cached per K.
pub fn direction_set(k: usize) -> Result<DirectionSet> {
    use std::sync::OnceLock;
    static CACHE: [OnceLock<Vec<Vec3>>; 5] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    let slot = SUPPORTED_VRS_COUNTS
        .iter()
        .position(|&c| c == k)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "unsupported VRS count {k}, expected one of {SUPPORTED_VRS_COUNTS:?}"
            ))
        })?;
    let directions = CACHE[slot].get_or_init(|| build_direction_set(k)).clone();
    Ok(DirectionSet { directions })
}

fn build_direction_set(k: usize) -> Vec<Vec3> {
    match k {
        6 => ALL_WALLS.iter().map(|w| w.outward_normal()).collect(),
        12 => {
            // One-dimensional search for the face-diagonal offset that
            // maximizes hull sphericity.
            let mut best = (f64::MIN, 0.5);
            let mut lo = 0.05;
            let mut hi = 0.95;
            for _ in 0..6 {
                let steps = 24;
                for i in 0..=steps {
                    let t = lo + (hi - lo) * i as f64 / steps as f64;
                    let psi = sphericity_of(&twelve_point_set(t)).unwrap_or(f64::MIN);
                    if psi > best.0 {
                        best = (psi, t);
                    }
                }
                let span = (hi - lo) / 4.0;
                lo = (best.1 - span).max(0.01);
                hi = (best.1 + span).min(0.99);
            }
            twelve_point_set(best.1)
        }
        24 => snub_cube_vertices(false),
        48 => forty_eight_set(),
        96 => {
            // A plain second chiral pair duplicates the first (the snub cube
            // is invariant under 90-degree axis rotations), so the copy is
            // rotated about z by an angle chosen to maximize hull sphericity.
            let base = forty_eight_set();
            let make = |phi: f64| -> Vec<Vec3> {
                let mut v = base.clone();
                v.extend(base.iter().map(|d| d.rotated_z(phi)));
                v
            };
            let phi = search_rotation(&make);
            make(phi)
        }
        _ => unreachable!("validated by direction_set"),
    }
}

/// Wadell sphericity of the convex hull of the direction points.
pub fn sphericity(set: &DirectionSet) -> Result<f64> {
    if set.len() < 4 {
        return Err(Error::Geometry(
            "sphericity needs at least 4 non-coplanar points".into(),
        ));
    }
    sphericity_of(set.directions())
}

/// Horizontal angle in degrees subtended at `receiver` by the two vertical
/// edges of `wall`.
pub fn wall_fov(room: &ShoeboxRoom, wall: Wall, receiver: Vec3) -> Result<f64> {
    if !room.contains_strictly(receiver) {
        return Err(Error::Geometry(
            "receiver must be strictly inside the room".into(),
        ));
    }
    // Distance from receiver to the wall plane, and lateral distances to the
    // wall's two vertical edges. Vertical edges run along z for x/y walls;
    // for floor/ceiling the "horizontal" extent is taken along x.
    let axis = wall.axis();
    let d = match wall {
        Wall::NegX => receiver.x,
        Wall::PosX => room.dims.x - receiver.x,
        Wall::NegY => receiver.y,
        Wall::PosY => room.dims.y - receiver.y,
        Wall::NegZ => receiver.z,
        Wall::PosZ => room.dims.z - receiver.z,
    };
    if d <= 0.0 {
        return Err(Error::Geometry("receiver lies on the wall plane".into()));
    }
    // Lateral axis: the horizontal axis lying in the wall plane.
    let lat_axis = match axis {
        0 => 1, // x walls extend along y
        1 => 0, // y walls extend along x
        _ => 0, // floor/ceiling: use x extent
    };
    let lat = receiver.component(lat_axis);
    let lat_dim = room.dims.component(lat_axis);
    let fov = (lat / d).atan() + ((lat_dim - lat) / d).atan();
    Ok(fov.to_degrees())
}
