//! Incremental 3D convex hull over a small set of points.
//!
//! Inputs are direction sets and loudspeaker layouts (points on a sphere) or
//! polyhedron vertices; there are no interior points, so coplanar points are
//! treated as visible during insertion and fold into the triangulation.

use crate::error::{Error, Result};
use crate::geometry::Vec3;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
struct Face {
    verts: [usize; 3],
    normal: Vec3,
    offset: f64,
}

impl Face {
    fn new(points: &[Vec3], verts: [usize; 3], interior: Vec3) -> Face {
        let [a, b, c] = verts.map(|i| points[i]);
        let mut normal = (b - a).cross(c - a);
        let n = normal.norm();
        if n > 0.0 {
            normal = normal.scale(1.0 / n);
        }
        let mut offset = normal.dot(a);
        let mut verts = verts;
        if normal.dot(interior) > offset {
            // Flip so the normal points away from the interior.
            verts.swap(1, 2);
            normal = -normal;
            offset = -offset;
        }
        Face {
            verts,
            normal,
            offset,
        }
    }

    fn distance(&self, p: Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

#[derive(Debug, Clone)]
pub struct ConvexHull {
    points: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
}

impl ConvexHull {
    /// Builds the hull of `points`. Fails if the points are degenerate
    /// (fewer than 4, or all coplanar).
    pub fn build(points: &[Vec3]) -> Result<ConvexHull> {
        if points.len() < 4 {
            return Err(Error::Geometry(format!(
                "convex hull needs at least 4 points, got {}",
                points.len()
            )));
        }
        let points: Vec<Vec3> = points.to_vec();

        // Initial tetrahedron from 4 non-coplanar points.
        let (i0, i1) = {
            let mut best = (0, 1, 0.0);
            for i in 0..points.len() {
                for j in (i + 1)..points.len() {
                    let d = (points[i] - points[j]).norm();
                    if d > best.2 {
                        best = (i, j, d);
                    }
                }
            }
            if best.2 < EPS {
                return Err(Error::Geometry("all points coincide".into()));
            }
            (best.0, best.1)
        };
        let i2 = {
            let dir = (points[i1] - points[i0]).normalized();
            let mut best = (usize::MAX, 0.0);
            for (i, p) in points.iter().enumerate() {
                let v = *p - points[i0];
                let d = (v - dir.scale(v.dot(dir))).norm();
                if d > best.1 {
                    best = (i, d);
                }
            }
            if best.1 < EPS {
                return Err(Error::Geometry("points are collinear".into()));
            }
            best.0
        };
        let i3 = {
            let n = (points[i1] - points[i0])
                .cross(points[i2] - points[i0])
                .normalized();
            let mut best = (usize::MAX, 0.0);
            for (i, p) in points.iter().enumerate() {
                let d = n.dot(*p - points[i0]).abs();
                if d > best.1 {
                    best = (i, d);
                }
            }
            if best.1 < EPS {
                return Err(Error::Geometry("points are coplanar".into()));
            }
            best.0
        };

        let interior = (points[i0] + points[i1] + points[i2] + points[i3]).scale(0.25);
        let mut faces: Vec<Face> = [
            [i0, i1, i2],
            [i0, i1, i3],
            [i0, i2, i3],
            [i1, i2, i3],
        ]
        .into_iter()
        .map(|v| Face::new(&points, v, interior))
        .collect();

        let mut order: Vec<usize> = (0..points.len())
            .filter(|&i| i != i0 && i != i1 && i != i2 && i != i3)
            .collect();
        // Insert far points first; keeps intermediate hulls well-shaped.
        order.sort_by(|&a, &b| {
            let da = (points[a] - interior).norm();
            let db = (points[b] - interior).norm();
            db.partial_cmp(&da).unwrap().then(a.cmp(&b))
        });

        for p_idx in order {
            let p = points[p_idx];
            // Coplanar faces count as visible so that points lying in the
            // plane of an existing face still extend the triangulation.
            let visible: Vec<usize> = faces
                .iter()
                .enumerate()
                .filter(|(_, f)| f.distance(p) > -EPS)
                .map(|(i, _)| i)
                .collect();
            if visible.is_empty() {
                continue; // interior point
            }
            // A point strictly inside sees nothing beyond coplanar slack; if
            // it does not clear any face by EPS, and all "visible" faces are
            // merely coplanar, skip it unless it lies outside their triangles.
            if !visible.iter().any(|&i| faces[i].distance(p) > EPS) {
                let outside = visible
                    .iter()
                    .all(|&i| !point_in_face_prism(&points, &faces[i], p));
                if !outside {
                    continue;
                }
            }

            // Horizon: edges owned by exactly one visible face.
            use std::collections::HashMap;
            let mut edge_count: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
            for &fi in &visible {
                let v = faces[fi].verts;
                for e in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
                    let key = (e.0.min(e.1), e.0.max(e.1));
                    let entry = edge_count.entry(key).or_insert((0, 0));
                    entry.0 += 1;
                    entry.1 = fi;
                }
            }
            let horizon: Vec<(usize, usize)> = {
                let mut h: Vec<(usize, usize)> = edge_count
                    .iter()
                    .filter(|(_, &(count, _))| count == 1)
                    .map(|(&e, _)| e)
                    .collect();
                h.sort();
                h
            };
            if horizon.is_empty() {
                continue;
            }

            let mut keep: Vec<Face> = faces
                .iter()
                .enumerate()
                .filter(|(i, _)| !visible.contains(i))
                .map(|(_, f)| *f)
                .collect();
            for (a, b) in horizon {
                let f = Face::new(&points, [a, b, p_idx], interior);
                if f.normal.norm() > 0.5 {
                    keep.push(f);
                }
            }
            faces = keep;
        }

        Ok(ConvexHull {
            faces: faces.iter().map(|f| f.verts).collect(),
            points,
        })
    }

    /// Hull facets as vertex-index triangles, outward-oriented.
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn volume(&self) -> f64 {
        // Sum of signed tetrahedra against the origin; faces are
        // outward-oriented so the sum is the enclosed volume.
        self.faces
            .iter()
            .map(|&[a, b, c]| {
                let (pa, pb, pc) = (self.points[a], self.points[b], self.points[c]);
                pa.dot(pb.cross(pc)) / 6.0
            })
            .sum::<f64>()
            .abs()
    }

    pub fn area(&self) -> f64 {
        self.faces
            .iter()
            .map(|&[a, b, c]| {
                let (pa, pb, pc) = (self.points[a], self.points[b], self.points[c]);
                (pb - pa).cross(pc - pa).norm() / 2.0
            })
            .sum()
    }
}

/// Whether `p` projects into the triangle of `face` (used to distinguish a
/// coplanar point inside an existing facet from one extending the hull).
fn point_in_face_prism(points: &[Vec3], face: &Face, p: Vec3) -> bool {
    let [a, b, c] = face.verts.map(|i| points[i]);
    let n = face.normal;
    for (u, v) in [(a, b), (b, c), (c, a)] {
        let edge_n = (v - u).cross(n);
        if edge_n.dot(p - u) > EPS {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tetrahedron() {
        let pts = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        let hull = ConvexHull::build(&pts).unwrap();
        assert_eq!(hull.triangles().len(), 4);
        assert_relative_eq!(hull.volume(), 1.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn cube_with_coplanar_faces() {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push(Vec3::new(
                (i & 1) as f64,
                ((i >> 1) & 1) as f64,
                ((i >> 2) & 1) as f64,
            ));
        }
        let hull = ConvexHull::build(&pts).unwrap();
        assert_relative_eq!(hull.volume(), 1.0, epsilon = 1e-9);
        assert_relative_eq!(hull.area(), 6.0, epsilon = 1e-9);
        assert_eq!(hull.triangles().len(), 12);
    }

    #[test]
    fn octahedron() {
        let pts = [
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.0, 0.0, -1.0),
        ];
        let hull = ConvexHull::build(&pts).unwrap();
        assert_eq!(hull.triangles().len(), 8);
        assert_relative_eq!(hull.volume(), 4.0 / 3.0, epsilon = 1e-9);
        assert_relative_eq!(hull.area(), 4.0 * 3.0f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn coplanar_points_rejected() {
        let pts = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
        ];
        assert!(ConvexHull::build(&pts).is_err());
    }

    #[test]
    fn interior_points_ignored() {
        let mut pts = vec![
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.0, 0.0, -1.0),
        ];
        pts.push(Vec3::new(0.1, 0.1, 0.1));
        let hull = ConvexHull::build(&pts).unwrap();
        assert_relative_eq!(hull.volume(), 4.0 / 3.0, epsilon = 1e-9);
    }
}
