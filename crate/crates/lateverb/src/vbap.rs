//! Loudspeaker layouts and vector-base amplitude panning over a hull
//! triangulation of the array directions.

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::hull::ConvexHull;

/// A listener-centered spherical loudspeaker array.
#[derive(Debug, Clone)]
pub struct LoudspeakerLayout {
    pub directions: Vec<Vec3>,
    pub radius: f64,
    pub name: String,
}

/// Unit direction from azimuth (degrees, counterclockwise from front) and
/// elevation (degrees, up-positive). Front is +x, left +y, up +z.
pub fn direction_from_angles(azimuth_deg: f64, elevation_deg: f64) -> Vec3 {
    let az = azimuth_deg.to_radians();
    let el = elevation_deg.to_radians();
    Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin())
}

impl LoudspeakerLayout {
    pub fn new(directions: Vec<Vec3>, radius: f64, name: impl Into<String>) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "layout radius must be positive, got {radius}"
            )));
        }
        let directions: Vec<Vec3> = directions.iter().map(|d| d.normalized()).collect();
        Ok(LoudspeakerLayout {
            directions,
            radius,
            name: name.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

/// The 86-channel spherical array: a 48-speaker horizontal ring (7.5 deg
/// steps), 12-speaker rings at +-30 deg elevation (30 deg steps), 6-speaker
/// rings at +-60 deg (60 deg steps), and two polar speakers; radius 2.5 m.
/// Every ring contains a speaker at azimuth 0.
pub fn builtin_layout_86() -> LoudspeakerLayout {
    let mut dirs = Vec::with_capacity(86);
    let rings: [(f64, usize); 5] = [(0.0, 48), (30.0, 12), (-30.0, 12), (60.0, 6), (-60.0, 6)];
    for (el, count) in rings {
        let step = 360.0 / count as f64;
        for i in 0..count {
            dirs.push(direction_from_angles(i as f64 * step, el));
        }
    }
    dirs.push(direction_from_angles(0.0, 90.0));
    dirs.push(direction_from_angles(0.0, -90.0));
    LoudspeakerLayout::new(dirs, 2.5, "builtin-86").expect("builtin layout is valid")
}

/// Parses a layout file: a `radius_m <value>` header line followed by one
/// `azimuth_deg elevation_deg` line per speaker. `#` starts a comment.
pub fn parse_layout(text: &str, name: impl Into<String>) -> Result<LoudspeakerLayout> {
    let mut radius: Option<f64> = None;
    let mut dirs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: String| Error::Format(format!("layout line {}: {msg}", lineno + 1));
        if fields[0] == "radius_m" {
            if fields.len() != 2 {
                return Err(bad("expected `radius_m <value>`".into()));
            }
            let r: f64 = fields[1]
                .parse()
                .map_err(|_| bad(format!("bad radius {:?}", fields[1])))?;
            if r <= 0.0 {
                return Err(bad(format!("radius must be positive, got {r}")));
            }
            radius = Some(r);
        } else {
            if fields.len() != 2 {
                return Err(bad("expected `azimuth_deg elevation_deg`".into()));
            }
            let az: f64 = fields[0]
                .parse()
                .map_err(|_| bad(format!("bad azimuth {:?}", fields[0])))?;
            let el: f64 = fields[1]
                .parse()
                .map_err(|_| bad(format!("bad elevation {:?}", fields[1])))?;
            if !(-90.0..=90.0).contains(&el) {
                return Err(bad(format!("elevation {el} outside [-90, 90]")));
            }
            dirs.push(direction_from_angles(az, el));
        }
    }
    let radius = radius.ok_or_else(|| Error::Format("layout has no radius_m header".into()))?;
    if dirs.len() < 4 {
        return Err(Error::Format(format!(
            "layout needs at least 4 speakers, got {}",
            dirs.len()
        )));
    }
    LoudspeakerLayout::new(dirs, radius, name)
}

/// Up to three (speaker index, gain) pairs reproducing a target direction.
#[derive(Debug, Clone)]
pub struct PanningGains {
    pub direction: Vec3,
    pub gains: Vec<(usize, f64)>,
}

/// Hull triangulation of a layout, reused across panning queries.
#[derive(Debug, Clone)]
pub struct Triangulation {
    pub triangles: Vec<[usize; 3]>,
    directions: Vec<Vec3>,
}

/// Triangulates the layout directions; every unit direction on the sphere
/// falls in exactly one triangle (selection is deterministic).
pub fn triangulate(layout: &LoudspeakerLayout) -> Result<Triangulation> {
    let hull = ConvexHull::build(&layout.directions)?;
    if hull.points().len() != layout.directions.len() {
        return Err(Error::Geometry(
            "layout has speakers inside the hull of the others".into(),
        ));
    }
    Ok(Triangulation {
        triangles: hull.triangles().to_vec(),
        directions: layout.directions.clone(),
    })
}

/// Solves g such that g1*s1 + g2*s2 + g3*s3 = p (unnormalized VBAP gains).
fn solve_triangle(s: [Vec3; 3], p: Vec3) -> Option<[f64; 3]> {
    let det = s[0].dot(s[1].cross(s[2]));
    if det.abs() < 1e-12 {
        return None;
    }
    Some([
        p.dot(s[1].cross(s[2])) / det,
        s[0].dot(p.cross(s[2])) / det,
        s[0].dot(s[1].cross(p)) / det,
    ])
}

/// VBAP: finds the hull triangle containing the direction (the one
/// maximizing the minimum basis gain; ties to the first in hull order),
/// solves the 3x3 system, clamps negative boundary excursions at zero and
/// L2-normalizes.
pub fn vbap_gains(direction: Vec3, tri: &Triangulation) -> Result<PanningGains> {
    let p = direction.normalized();
    if !p.norm().is_finite() || p.norm() < 0.5 {
        return Err(Error::InvalidArgument("panning direction is zero".into()));
    }
    let mut best: Option<(f64, usize, [f64; 3])> = None;
    for (t, &verts) in tri.triangles.iter().enumerate() {
        let s = verts.map(|i| tri.directions[i]);
        let Some(g) = solve_triangle(s, p) else {
            continue;
        };
        let min_g = g[0].min(g[1]).min(g[2]);
        if best.is_none_or(|(bg, _, _)| min_g > bg) {
            best = Some((min_g, t, g));
        }
    }
    let (min_g, t, mut g) = best.ok_or_else(|| {
        Error::Geometry("triangulation has no non-degenerate triangles".into())
    })?;
    if min_g < -1e-6 {
        return Err(Error::Geometry(format!(
            "direction {p:?} outside every triangle (best excursion {min_g})"
        )));
    }
    for v in g.iter_mut() {
        *v = v.max(0.0);
    }
    let norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
    if norm < 1e-12 {
        return Err(Error::Geometry("degenerate panning solution".into()));
    }
    let verts = tri.triangles[t];
    let gains = verts
        .iter()
        .zip(&g)
        .filter(|(_, &gi)| gi > 0.0)
        .map(|(&i, &gi)| (i, gi / norm))
        .collect();
    Ok(PanningGains {
        direction: p,
        gains,
    })
}
