//! Triangular meshes of polygons.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use crate::error::{Error, Result};
use crate::geom::{BoundaryCondition, Point, Polygon};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub condition: BoundaryCondition,
    /// Index of the polygon edge this mesh edge lies on.
    pub source_edge: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub nodes: Vec<Point>,
    /// Counterclockwise node triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
}

const MIN_ANGLE_DEG: f64 = 25.0;

/// Coordinates are snapped to this grid in the canonical frame.
const SNAP: f64 = 1.0 / (1u64 << 40) as f64;

/// A rigid motion taking the polygon to its canonical frame: vertex 0 at
/// the origin, edge 0 along the positive x axis.
struct Frame {
    origin: Point,
    cos: f64,
    sin: f64,
}

impl Frame {
    fn of(poly: &Polygon) -> Frame {
        let (a, b) = poly.edge(0);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        Frame { origin: a, cos: (b[0] - a[0]) / len, sin: (b[1] - a[1]) / len }
    }

    fn to_canonical(&self, p: Point) -> Point {
        let (x, y) = (p[0] - self.origin[0], p[1] - self.origin[1]);
        let snap = |v: f64| (v / SNAP).round() * SNAP;
        [snap(self.cos * x + self.sin * y), snap(-self.sin * x + self.cos * y)]
    }

    fn to_input(&self, p: Point) -> Point {
        [self.origin[0] + self.cos * p[0] - self.sin * p[1], self.origin[1] + self.sin * p[0] + self.cos * p[1]]
    }
}

/// Constrained Delaunay mesh of `poly` with every edge at most `h` long.
///
/// Meshing happens in a canonical frame of the polygon, so rigid motions of
/// the input give congruent meshes.
pub fn triangulate(poly: &Polygon, h: f64) -> Result<Mesh> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::MeshFailure(format!("mesh size must be positive, got {h}")));
    }
    let frame = Frame::of(poly);
    let canon = Polygon::new(
        poly.vertices().iter().map(|&p| frame.to_canonical(p)).collect(),
        poly.edge_tags().to_vec(),
        poly.edge_roles().to_vec(),
    )
    .map_err(|e| Error::MeshFailure(format!("canonical polygon: {e}")))?;
    if canon.area() <= 1e-14 * canon.diameter().powi(2) {
        return Err(Error::MeshFailure("polygon has no area".into()));
    }
    let mut area = 0.3 * h * h;
    for _ in 0..12 {
        let mesh = build(&canon, h, area)?;
        if mesh.max_edge_length() <= h * (1.0 + 1e-12) {
            let mut nodes: Vec<Point> = mesh.nodes.iter().map(|&p| frame.to_input(p)).collect();
            restore_boundary(&mut nodes, &mesh, &canon, poly);
            return Ok(Mesh { nodes, ..mesh });
        }
        area *= 0.6;
    }
    Err(Error::MeshFailure(format!("could not reach mesh size {h}")))
}

/// Puts boundary nodes back on the input polygon, at the same fraction of
/// their edge as in the snapped canonical copy, so the mesh covers the
/// input exactly.
fn restore_boundary(nodes: &mut [Point], canon_mesh: &Mesh, canon: &Polygon, poly: &Polygon) {
    for e in &canon_mesh.boundary_edges {
        let (ca, cb) = canon.edge(e.source_edge);
        let (a, b) = poly.edge(e.source_edge);
        let d = [cb[0] - ca[0], cb[1] - ca[1]];
        for &i in &e.nodes {
            let p = canon_mesh.nodes[i];
            let t = (((p[0] - ca[0]) * d[0] + (p[1] - ca[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1])).clamp(0.0, 1.0);
            nodes[i] = if t <= 1e-12 {
                a
            } else if t >= 1.0 - 1e-12 {
                b
            } else {
                [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
            };
        }
    }
}

fn build(poly: &Polygon, h: f64, max_area: f64) -> Result<Mesh> {
    // Only the polygon vertices are inserted; the refiner splits long
    // constraint edges itself. Pre-subdividing a rotated edge yields points
    // that are not exactly collinear, and the resulting slivers stall the
    // size refinement.
    let points: Vec<Point2<f64>> = poly.vertices().iter().map(|p| Point2::new(p[0], p[1])).collect();
    let n = points.len();
    let edges: Vec<[usize; 2]> = (0..n).map(|i| [i, (i + 1) % n]).collect();
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> =
        ConstrainedDelaunayTriangulation::bulk_load_cdt(points, edges)
            .map_err(|e| Error::MeshFailure(format!("{e:?}")))?;
    cdt.refine(
        RefinementParameters::<f64>::new()
            .with_angle_limit(AngleLimit::from_deg(MIN_ANGLE_DEG))
            .with_max_allowed_area(max_area)
            .with_max_additional_vertices(5_000_000)
            .exclude_outer_faces(true),
    );
    let mut index = HashMap::new();
    let mut nodes = Vec::new();
    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        let vs = face.vertices();
        let pts = vs.map(|v| [v.position().x, v.position().y]);
        let centroid = [(pts[0][0] + pts[1][0] + pts[2][0]) / 3.0, (pts[0][1] + pts[1][1] + pts[2][1]) / 3.0];
        // Slivers between nearly collinear boundary points carry no area.
        let twice_area =
            (pts[1][0] - pts[0][0]) * (pts[2][1] - pts[0][1]) - (pts[2][0] - pts[0][0]) * (pts[1][1] - pts[0][1]);
        if !poly.contains(centroid) || twice_area.abs() <= 1e-10 * h * h {
            continue;
        }
        let tri = vs.map(|v| {
            *index.entry(v.fix().index()).or_insert_with(|| {
                nodes.push([v.position().x, v.position().y]);
                nodes.len() - 1
            })
        });
        triangles.push(tri);
    }
    if triangles.is_empty() {
        return Err(Error::MeshFailure("triangulation produced no interior triangles".into()));
    }
    let mut mesh = Mesh { nodes, triangles, boundary_edges: Vec::new() };
    for t in &mut mesh.triangles {
        if signed_area(&mesh.nodes, *t) < 0.0 {
            t.swap(1, 2);
        }
    }
    mesh.boundary_edges = classify_boundary(&mesh, poly)?;
    Ok(mesh)
}

fn signed_area(nodes: &[Point], t: [usize; 3]) -> f64 {
    let [a, b, c] = t.map(|i| nodes[i]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn classify_boundary(mesh: &Mesh, poly: &Polygon) -> Result<Vec<BoundaryEdge>> {
    let mut count: HashMap<(usize, usize), (usize, [usize; 2])> = HashMap::new();
    for t in &mesh.triangles {
        for i in 0..3 {
            let (a, b) = (t[i], t[(i + 1) % 3]);
            count.entry((a.min(b), a.max(b))).or_insert((0, [a, b])).0 += 1;
        }
    }
    let tol = 1e-9 * poly.diameter();
    let mut edges: Vec<BoundaryEdge> = Vec::new();
    let mut keys: Vec<_> = count.into_iter().filter(|(_, (c, _))| *c == 1).map(|(_, (_, e))| e).collect();
    keys.sort();
    for [a, b] in keys {
        let src = poly
            .edge_containing(mesh.nodes[a], mesh.nodes[b], tol)
            .ok_or_else(|| Error::MeshFailure("boundary edge off the polygon boundary".into()))?;
        edges.push(BoundaryEdge { nodes: [a, b], condition: poly.edge_tags()[src], source_edge: src });
    }
    Ok(edges)
}

/// Uniform red refinement: every triangle splits into four.
pub fn refine(mesh: &Mesh) -> Mesh {
    let mut nodes = mesh.nodes.clone();
    let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, nodes: &mut Vec<Point>| -> usize {
        *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let (p, q) = (nodes[a], nodes[b]);
            nodes.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
            nodes.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for &[a, b, c] in &mesh.triangles {
        let ab = midpoint(a, b, &mut nodes);
        let bc = midpoint(b, c, &mut nodes);
        let ca = midpoint(c, a, &mut nodes);
        triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
    }
    let mut boundary_edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for e in &mesh.boundary_edges {
        let m = midpoint(e.nodes[0], e.nodes[1], &mut nodes);
        boundary_edges.push(BoundaryEdge { nodes: [e.nodes[0], m], ..*e });
        boundary_edges.push(BoundaryEdge { nodes: [m, e.nodes[1]], ..*e });
    }
    Mesh { nodes, triangles, boundary_edges }
}

impl Mesh {
    /// The polygon as a single element (for triangles only).
    pub fn single_triangle(tri: &Polygon) -> Mesh {
        assert_eq!(tri.len(), 3);
        Mesh {
            nodes: tri.vertices().to_vec(),
            triangles: vec![[0, 1, 2]],
            boundary_edges: (0..3)
                .map(|i| BoundaryEdge { nodes: [i, (i + 1) % 3], condition: tri.edge_tags()[i], source_edge: i })
                .collect(),
        }
    }

    pub fn area(&self) -> f64 {
        self.triangles.iter().map(|&t| signed_area(&self.nodes, t)).sum()
    }

    pub fn max_edge_length(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| (0..3).map(move |i| (t[i], t[(i + 1) % 3])))
            .map(|(a, b)| crate::geom::dist(self.nodes[a], self.nodes[b]))
            .fold(0.0, f64::max)
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        let mut worst = 180.0f64;
        for t in &self.triangles {
            for i in 0..3 {
                let p = self.nodes[t[i]];
                let u = crate::geom::sub(self.nodes[t[(i + 1) % 3]], p);
                let v = crate::geom::sub(self.nodes[t[(i + 2) % 3]], p);
                let angle = crate::geom::cross(u, v).atan2(crate::geom::dot(u, v)).abs().to_degrees();
                worst = worst.min(angle);
            }
        }
        worst
    }

    /// Plain-text listing: node count, nodes, triangle count, triangles,
    /// boundary edges with their condition.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "nodes {}", self.nodes.len());
        for p in &self.nodes {
            let _ = writeln!(s, "{:.17e} {:.17e}", p[0], p[1]);
        }
        let _ = writeln!(s, "triangles {}", self.triangles.len());
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(s, "boundary_edges {}", self.boundary_edges.len());
        for e in &self.boundary_edges {
            let _ = writeln!(s, "{} {} {} {}", e.nodes[0], e.nodes[1], e.condition.symbol(), e.source_edge);
        }
        s
    }

    /// SVG drawing; Dirichlet edges red, Neumann edges blue.
    pub fn to_svg(&self) -> String {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &self.nodes {
            for c in 0..2 {
                lo[c] = lo[c].min(p[c]);
                hi[c] = hi[c].max(p[c]);
            }
        }
        let size = 800.0;
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        let scale = (size - 40.0) / span;
        let map = |p: Point| (20.0 + (p[0] - lo[0]) * scale, size - 20.0 - (p[1] - lo[1]) * scale);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
        );
        let _ = writeln!(s, r##"<g fill="none" stroke="#999" stroke-width="0.5">"##);
        for t in &self.triangles {
            let pts: Vec<String> =
                t.iter().map(|&i| map(self.nodes[i])).map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
            let _ = writeln!(s, r#"<polygon points="{}"/>"#, pts.join(" "));
        }
        let _ = writeln!(s, "</g>");
        for e in &self.boundary_edges {
            let (x1, y1) = map(self.nodes[e.nodes[0]]);
            let (x2, y2) = map(self.nodes[e.nodes[1]]);
            let color = match e.condition {
                BoundaryCondition::Dirichlet => "#d62728",
                BoundaryCondition::Neumann => "#1f77b4",
            };
            let _ = writeln!(
                s,
                r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="{color}" stroke-width="2"/>"#
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{t_junction, truncate, EdgeRole};

    fn unit_square() -> Polygon {
        Polygon::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![BoundaryCondition::Neumann; 4],
            vec![EdgeRole::Wall; 4],
        )
        .unwrap()
    }

    #[test]
    fn square_mesh_basics() {
        let m = triangulate(&unit_square(), 0.5).unwrap();
        assert!(m.triangles.len() >= 8);
        assert!((m.area() - 1.0).abs() < 1e-12);
        assert!(m.max_edge_length() <= 0.5 + 1e-12);
        let sources: std::collections::BTreeSet<usize> = m.boundary_edges.iter().map(|e| e.source_edge).collect();
        assert_eq!(sources.len(), 4);
        assert!(m.min_angle_deg() >= 15.0);
        assert!(m.triangles.iter().all(|&t| signed_area(&m.nodes, t) > 0.0));
    }

    #[test]
    fn refinement_counts() {
        let m = triangulate(&unit_square(), 0.5).unwrap();
        let r = refine(&m);
        assert_eq!(r.triangles.len(), 4 * m.triangles.len());
        assert_eq!(r.boundary_edges.len(), 2 * m.boundary_edges.len());
        assert_eq!(refine(&r).triangles.len(), 16 * m.triangles.len());
        assert!((r.area() - 1.0).abs() < 1e-12);
        assert!(r.triangles.iter().all(|&t| signed_area(&r.nodes, t) > 0.0));
    }

    #[test]
    fn truncated_t_boundary_density() {
        let poly = truncate(&t_junction(), 3.0).unwrap();
        let m = triangulate(&poly, 0.25).unwrap();
        let count = m.boundary_edges.len() as f64;
        let expected = poly.perimeter() / 0.25;
        assert!(count >= expected / 2.0 && count <= 2.0 * expected, "{count} vs {expected}");
        assert!(m.min_angle_deg() >= 15.0);
    }

    #[test]
    fn rejects_bad_size() {
        assert!(matches!(triangulate(&unit_square(), 0.0), Err(Error::MeshFailure(_))));
        assert!(matches!(triangulate(&unit_square(), f64::NAN), Err(Error::MeshFailure(_))));
    }

    #[test]
    fn dumps() {
        let m = triangulate(&unit_square(), 0.5).unwrap();
        assert!(m.to_text().starts_with(&format!("nodes {}", m.nodes.len())));
        let svg = m.to_svg();
        assert!(svg.starts_with("<svg") && svg.contains("#1f77b4"));
    }
}
