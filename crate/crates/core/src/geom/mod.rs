//! Geometric model of star waveguides.
//!
//! A waveguide is described by its bounded center and the half-infinite
//! branches glued to the center along artificial interfaces ("cuts").
//! Centers are polygons in the planar case, circular sectors for the
//! rounded-corner family, and axis-aligned boxes in the separable 3D case.

mod shapes;

pub use shapes::*;

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Absolute tolerance used when comparing vertex coordinates.
pub const COORD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryCondition {
    #[serde(rename = "D")]
    Dirichlet,
    #[serde(rename = "N")]
    Neumann,
}

impl BoundaryCondition {
    pub fn symbol(self) -> char {
        match self {
            BoundaryCondition::Dirichlet => 'D',
            BoundaryCondition::Neumann => 'N',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeRole {
    Wall,
    Cut,
}

/// Boundary conditions at the two ends of an interval (one box axis).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BCPair {
    pub left: BoundaryCondition,
    pub right: BoundaryCondition,
}

impl BCPair {
    pub const DD: BCPair = BCPair::new(BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet);
    pub const DN: BCPair = BCPair::new(BoundaryCondition::Dirichlet, BoundaryCondition::Neumann);
    pub const ND: BCPair = BCPair::new(BoundaryCondition::Neumann, BoundaryCondition::Dirichlet);
    pub const NN: BCPair = BCPair::new(BoundaryCondition::Neumann, BoundaryCondition::Neumann);

    pub const fn new(left: BoundaryCondition, right: BoundaryCondition) -> Self {
        BCPair { left, right }
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.left.symbol(), self.right.symbol())
    }
}

/// A simple, positively oriented polygon with per-edge boundary data.
///
/// Edge `i` joins `vertices[i]` to `vertices[(i + 1) % n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<Point>,
    edge_tags: Vec<BoundaryCondition>,
    edge_roles: Vec<EdgeRole>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>, edge_tags: Vec<BoundaryCondition>, edge_roles: Vec<EdgeRole>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidGeometry(format!("polygon needs at least 3 vertices, got {n}")));
        }
        if edge_tags.len() != n || edge_roles.len() != n {
            return Err(Error::InvalidGeometry(format!(
                "{} vertices but {} edge tags and {} edge roles",
                n,
                edge_tags.len(),
                edge_roles.len()
            )));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite vertex coordinate".into()));
        }
        let poly = Polygon { vertices, edge_tags, edge_roles };
        poly.check_simple()?;
        if poly.signed_area() <= 0.0 {
            return Err(Error::InvalidGeometry("polygon must be positively oriented with positive area".into()));
        }
        Ok(poly)
    }

    /// Polygon with every edge a Dirichlet wall.
    pub fn dirichlet(vertices: Vec<Point>) -> Result<Self> {
        let n = vertices.len();
        Polygon::new(vertices, vec![BoundaryCondition::Dirichlet; n], vec![EdgeRole::Wall; n])
    }

    /// Same polygon with every edge carrying `tag` (roles unchanged).
    pub fn with_uniform_tag(&self, tag: BoundaryCondition) -> Polygon {
        Polygon {
            vertices: self.vertices.clone(),
            edge_tags: vec![tag; self.len()],
            edge_roles: self.edge_roles.clone(),
        }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edge_tags(&self) -> &[BoundaryCondition] {
        &self.edge_tags
    }

    pub fn edge_roles(&self) -> &[EdgeRole] {
        &self.edge_roles
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge(&self, i: usize) -> (Point, Point) {
        let n = self.len();
        (self.vertices[i % n], self.vertices[(i + 1) % n])
    }

    pub fn edge_length(&self, i: usize) -> f64 {
        let (a, b) = self.edge(i);
        dist(a, b)
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.len();
        let mut s = 0.0;
        for i in 0..n {
            let (a, b) = self.edge(i);
            s += a[0] * b[1] - b[0] * a[1];
        }
        0.5 * s
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.len()).map(|i| self.edge_length(i)).sum()
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.vertices {
            for b in &self.vertices {
                d = d.max(dist(*a, *b));
            }
        }
        d
    }

    pub fn bbox(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for c in 0..2 {
                lo[c] = lo[c].min(v[c]);
                hi[c] = hi[c].max(v[c]);
            }
        }
        (lo, hi)
    }

    pub fn has_dirichlet(&self) -> bool {
        self.edge_tags.contains(&BoundaryCondition::Dirichlet)
    }

    /// Distance from `p` to edge `i`.
    pub fn distance_to_edge(&self, p: Point, i: usize) -> f64 {
        let (a, b) = self.edge(i);
        point_segment_distance(p, a, b)
    }

    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        (0..self.len()).map(|i| self.distance_to_edge(p, i)).fold(f64::INFINITY, f64::min)
    }

    /// Even-odd test; points on the boundary may go either way.
    pub fn contains(&self, p: Point) -> bool {
        let mut inside = false;
        let n = self.len();
        for i in 0..n {
            let (a, b) = self.edge(i);
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Interior or within `tol` of the boundary.
    pub fn contains_or_on(&self, p: Point, tol: f64) -> bool {
        self.contains(p) || self.distance_to_boundary(p) <= tol
    }

    /// Index of the edge whose segment contains both `a` and `b` within `tol`.
    pub fn edge_containing(&self, a: Point, b: Point, tol: f64) -> Option<usize> {
        (0..self.len()).find(|&i| self.distance_to_edge(a, i) <= tol && self.distance_to_edge(b, i) <= tol)
    }

    /// Applies a rigid motion (rotation by `angle` then translation).
    pub fn rigid_motion(&self, angle: f64, shift: Point) -> Polygon {
        let (s, c) = angle.sin_cos();
        Polygon {
            vertices: self
                .vertices
                .iter()
                .map(|v| [c * v[0] - s * v[1] + shift[0], s * v[0] + c * v[1] + shift[1]])
                .collect(),
            edge_tags: self.edge_tags.clone(),
            edge_roles: self.edge_roles.clone(),
        }
    }

    /// Image under `diag(c1, c2)` with boundary data transported.
    pub fn scaled(&self, c1: f64, c2: f64) -> Polygon {
        Polygon {
            vertices: self.vertices.iter().map(|v| [v[0] * c1, v[1] * c2]).collect(),
            edge_tags: self.edge_tags.clone(),
            edge_roles: self.edge_roles.clone(),
        }
    }

    /// `Some((lo, hi))` if this is an axis-aligned rectangle (collinear
    /// subdivisions of the sides allowed).
    pub fn axis_aligned_rectangle(&self) -> Option<(Point, Point)> {
        let (lo, hi) = self.bbox();
        let tol = COORD_TOL * (1.0 + self.diameter());
        let on_side = |v: &Point| {
            (v[0] - lo[0]).abs() <= tol
                || (v[0] - hi[0]).abs() <= tol
                || (v[1] - lo[1]).abs() <= tol
                || (v[1] - hi[1]).abs() <= tol
        };
        if !self.vertices.iter().all(on_side) {
            return None;
        }
        let area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
        if (self.area() - area).abs() > 1e-12 * area {
            return None;
        }
        Some((lo, hi))
    }

    fn check_simple(&self) -> Result<()> {
        let n = self.len();
        let scale = self.diameter().max(1e-300);
        for i in 0..n {
            if self.edge_length(i) <= COORD_TOL * scale {
                return Err(Error::InvalidGeometry(format!("edge {i} has zero length")));
            }
        }
        for i in 0..n {
            let (a, b) = self.edge(i);
            for j in (i + 1)..n {
                let (c, d) = self.edge(j);
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // Adjacent edges share exactly one endpoint; reject fold-backs.
                    let (shared, other_i, other_j) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                    let u = sub(other_i, shared);
                    let v = sub(other_j, shared);
                    if cross(u, v).abs() <= 1e-14 * norm(u) * norm(v) && dot(u, v) > 0.0 {
                        return Err(Error::InvalidGeometry(format!("edges {i} and {j} overlap")));
                    }
                } else if segments_intersect(a, b, c, d) {
                    return Err(Error::InvalidGeometry(format!("edges {i} and {j} intersect")));
                }
            }
        }
        Ok(())
    }
}

/// Branch cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCrossSection", into = "RawCrossSection")]
pub enum CrossSection {
    Interval { width: f64 },
    Rectangle { a: f64, b: f64 },
    Disk { radius: f64 },
}

impl CrossSection {
    pub fn dims(&self) -> Vec<f64> {
        match *self {
            CrossSection::Interval { width } => vec![width],
            CrossSection::Rectangle { a, b } => vec![a, b],
            CrossSection::Disk { radius } => vec![radius],
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CrossSection::Interval { .. } => "interval",
            CrossSection::Rectangle { .. } => "rectangle",
            CrossSection::Disk { .. } => "disk",
        }
    }

    /// Largest extent of the cross-section.
    pub fn max_width(&self) -> f64 {
        match *self {
            CrossSection::Interval { width } => width,
            CrossSection::Rectangle { a, b } => a.max(b),
            CrossSection::Disk { radius } => 2.0 * radius,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawCrossSection {
    #[serde(rename = "type")]
    kind: String,
    dims: Vec<f64>,
}

impl TryFrom<RawCrossSection> for CrossSection {
    type Error = Error;

    fn try_from(raw: RawCrossSection) -> Result<Self> {
        let cs = match (raw.kind.as_str(), raw.dims.as_slice()) {
            ("interval", [w]) => CrossSection::Interval { width: *w },
            ("rectangle", [a, b]) => CrossSection::Rectangle { a: *a, b: *b },
            ("disk", [r]) => CrossSection::Disk { radius: *r },
            (kind, dims) => return Err(Error::Config(format!("bad cross-section {kind:?} with {} dims", dims.len()))),
        };
        if cs.dims().iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::InvalidGeometry(format!("cross-section dimensions must be positive: {:?}", cs.dims())));
        }
        Ok(cs)
    }
}

impl From<CrossSection> for RawCrossSection {
    fn from(cs: CrossSection) -> Self {
        RawCrossSection { kind: cs.kind().to_string(), dims: cs.dims() }
    }
}

/// Bounded center of a waveguide.
#[derive(Debug, Clone, PartialEq)]
pub enum Center {
    Polygon(Polygon),
    /// Circular sector `{(r, θ): 0 < r < radius, 0 < θ < alpha}`. Edge 0 is
    /// the flat side on θ = 0, edge 1 the flat side on θ = alpha; both are
    /// cuts, the arc is a Dirichlet wall.
    Sector {
        alpha: f64,
        radius: f64,
    },
    /// Box `(0, d0) × (0, d1) × (0, d2)`. Face `2·axis` lies on coordinate 0,
    /// face `2·axis + 1` on coordinate `dims[axis]`.
    Box3 {
        dims: [f64; 3],
        face_tags: [BoundaryCondition; 6],
    },
}

impl Center {
    pub fn as_polygon(&self) -> Option<&Polygon> {
        match self {
            Center::Polygon(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_planar(&self) -> bool {
        !matches!(self, Center::Box3 { .. })
    }

    /// Per-axis condition pairs of a box center.
    pub fn box_bcs(&self) -> Option<[BCPair; 3]> {
        match self {
            Center::Box3 { face_tags, .. } => {
                Some([0, 1, 2].map(|a| BCPair::new(face_tags[2 * a], face_tags[2 * a + 1])))
            }
            _ => None,
        }
    }
}

/// A half-infinite branch glued to the cut with index `attach` (an edge of a
/// planar center, a face of a box center).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub attach: usize,
    pub cross_section: CrossSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Reflection `x2 -> -x2` across the horizontal line `x2 = 0`.
    Horizontal,
    /// Reflection `x1 -> -x1` across the vertical line `x1 = 0`.
    Vertical,
}

impl Axis {
    /// Coordinate flipped by the reflection.
    pub fn coordinate(self) -> usize {
        match self {
            Axis::Vertical => 0,
            Axis::Horizontal => 1,
        }
    }

    pub fn reflect(self, p: Point) -> Point {
        match self {
            Axis::Vertical => [-p[0], p[1]],
            Axis::Horizontal => [p[0], -p[1]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SymmetrySpec {
    pub axes: Vec<Axis>,
}

/// Parity `(j, k)`: `j` for the vertical mirror, `k` for the horizontal one.
/// Odd parity puts a Dirichlet condition on the mirror line.
pub type Parity = (u8, u8);

#[derive(Debug, Clone, PartialEq)]
pub struct StarWaveguideConfig {
    pub name: String,
    pub center: Center,
    pub branches: Vec<Branch>,
    pub symmetry: Option<SymmetrySpec>,
    /// Accept a center without any Dirichlet edge (pure Neumann DN operator).
    pub allow_pure_neumann: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCenter {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertices: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edge_tags: Option<Vec<BoundaryCondition>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edge_roles: Option<Vec<EdgeRole>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dims: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    face_tags: Option<[BoundaryCondition; 6]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBranch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edge: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    face: Option<usize>,
    cross_section: CrossSection,
}

/// On-disk layout of a configuration (TOML or JSON).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawConfig {
    name: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    allow_pure_neumann: bool,
    center: RawCenter,
    branches: Vec<RawBranch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    symmetry: Option<SymmetrySpec>,
}

impl TryFrom<RawConfig> for StarWaveguideConfig {
    type Error = Error;

    fn try_from(raw: RawConfig) -> Result<Self> {
        let c = raw.center;
        let missing = |what: &str| Error::Config(format!("center is missing `{what}`"));
        let center = match c.kind.as_deref().unwrap_or("polygon") {
            "polygon" => Center::Polygon(Polygon::new(
                c.vertices.ok_or_else(|| missing("vertices"))?,
                c.edge_tags.ok_or_else(|| missing("edge_tags"))?,
                c.edge_roles.ok_or_else(|| missing("edge_roles"))?,
            )?),
            "sector" => Center::Sector {
                alpha: c.alpha.ok_or_else(|| missing("alpha"))?,
                radius: c.radius.ok_or_else(|| missing("radius"))?,
            },
            "box3" => Center::Box3 {
                dims: c.dims.ok_or_else(|| missing("dims"))?,
                face_tags: c.face_tags.ok_or_else(|| missing("face_tags"))?,
            },
            other => return Err(Error::Config(format!("unknown center kind {other:?}"))),
        };
        let planar = center.is_planar();
        let branches = raw
            .branches
            .into_iter()
            .map(|b| {
                let attach = match (b.edge, b.face, planar) {
                    (Some(e), None, true) => e,
                    (None, Some(f), false) => f,
                    _ => return Err(Error::Config("planar branches need `edge`, box branches need `face`".into())),
                };
                Ok(Branch { attach, cross_section: b.cross_section })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StarWaveguideConfig {
            name: raw.name,
            center,
            branches,
            symmetry: raw.symmetry,
            allow_pure_neumann: raw.allow_pure_neumann,
        })
    }
}

impl From<&StarWaveguideConfig> for RawConfig {
    fn from(cfg: &StarWaveguideConfig) -> Self {
        let center = match &cfg.center {
            Center::Polygon(p) => RawCenter {
                vertices: Some(p.vertices.clone()),
                edge_tags: Some(p.edge_tags.clone()),
                edge_roles: Some(p.edge_roles.clone()),
                ..Default::default()
            },
            Center::Sector { alpha, radius } => RawCenter {
                kind: Some("sector".into()),
                alpha: Some(*alpha),
                radius: Some(*radius),
                ..Default::default()
            },
            Center::Box3 { dims, face_tags } => RawCenter {
                kind: Some("box3".into()),
                dims: Some(*dims),
                face_tags: Some(*face_tags),
                ..Default::default()
            },
        };
        let planar = cfg.center.is_planar();
        RawConfig {
            name: cfg.name.clone(),
            allow_pure_neumann: cfg.allow_pure_neumann,
            center,
            branches: cfg
                .branches
                .iter()
                .map(|b| RawBranch {
                    edge: planar.then_some(b.attach),
                    face: (!planar).then_some(b.attach),
                    cross_section: b.cross_section,
                })
                .collect(),
            symmetry: cfg.symmetry.clone(),
        }
    }
}

impl StarWaveguideConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        raw.try_into()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        raw.try_into()
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&RawConfig::from(self)).expect("config serializes")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(RawConfig::from(self)).expect("config serializes")
    }
}

/// A configuration whose invariants have been checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedConfig(StarWaveguideConfig);

impl ValidatedConfig {
    pub fn config(&self) -> &StarWaveguideConfig {
        &self.0
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn center(&self) -> &Center {
        &self.0.center
    }

    pub fn branches(&self) -> &[Branch] {
        &self.0.branches
    }

    pub fn symmetry(&self) -> Option<&SymmetrySpec> {
        self.0.symmetry.as_ref()
    }

    pub fn into_inner(self) -> StarWaveguideConfig {
        self.0
    }
}

/// Checks every structural invariant of `cfg`.
pub fn validate_config(cfg: StarWaveguideConfig) -> Result<ValidatedConfig> {
    if cfg.branches.is_empty() {
        return Err(Error::InvalidGeometry("a star waveguide needs at least one branch".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for b in &cfg.branches {
        if !seen.insert(b.attach) {
            return Err(Error::InvalidGeometry(format!("cut {} carries more than one branch", b.attach)));
        }
    }
    match &cfg.center {
        Center::Polygon(poly) => validate_polygon_center(poly, &cfg)?,
        Center::Sector { alpha, radius } => {
            if !(*alpha > 0.0 && *alpha < PI) || !(*radius > 0.0 && radius.is_finite()) {
                return Err(Error::InvalidGeometry(format!(
                    "sector needs 0 < alpha < π and radius > 0, got ({alpha}, {radius})"
                )));
            }
            for b in &cfg.branches {
                if b.attach > 1 {
                    return Err(Error::InvalidGeometry(format!("sector has cuts 0 and 1 only, got {}", b.attach)));
                }
                check_interval_width(&b.cross_section, *radius, b.attach)?;
            }
        }
        Center::Box3 { dims, face_tags } => {
            if dims.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
                return Err(Error::InvalidGeometry(format!("box dimensions must be positive: {dims:?}")));
            }
            if !cfg.allow_pure_neumann && !face_tags.contains(&BoundaryCondition::Dirichlet) {
                return Err(Error::InvalidGeometry("box center has no Dirichlet face".into()));
            }
            for b in &cfg.branches {
                if b.attach >= 6 {
                    return Err(Error::InvalidGeometry(format!("box has faces 0..6, got {}", b.attach)));
                }
                if face_tags[b.attach] != BoundaryCondition::Neumann {
                    return Err(Error::InvalidGeometry(format!("cut face {} must be Neumann", b.attach)));
                }
                let axis = b.attach / 2;
                let (fa, fb) = (dims[(axis + 1) % 3], dims[(axis + 2) % 3]);
                match b.cross_section {
                    CrossSection::Rectangle { a, b: bb } => {
                        let fits = (rel_close(a, fa) && rel_close(bb, fb)) || (rel_close(a, fb) && rel_close(bb, fa));
                        if !fits {
                            return Err(Error::InvalidGeometry(format!(
                                "rectangle branch {a}×{bb} does not match face {fa}×{fb}"
                            )));
                        }
                    }
                    CrossSection::Disk { radius } => {
                        if 2.0 * radius > fa.min(fb) * (1.0 + 1e-9) {
                            return Err(Error::InvalidGeometry(format!(
                                "disk of radius {radius} does not fit face {fa}×{fb}"
                            )));
                        }
                    }
                    CrossSection::Interval { .. } => {
                        return Err(Error::InvalidGeometry("interval cross-sections need a planar center".into()))
                    }
                }
            }
        }
    }
    Ok(ValidatedConfig(cfg))
}

fn validate_polygon_center(poly: &Polygon, cfg: &StarWaveguideConfig) -> Result<()> {
    for i in 0..poly.len() {
        if poly.edge_roles[i] == EdgeRole::Cut && poly.edge_tags[i] != BoundaryCondition::Neumann {
            return Err(Error::InvalidGeometry(format!("cut edge {i} must be Neumann")));
        }
    }
    if !cfg.allow_pure_neumann && !poly.has_dirichlet() {
        return Err(Error::InvalidGeometry("center has no Dirichlet edge".into()));
    }
    for b in &cfg.branches {
        if b.attach >= poly.len() {
            return Err(Error::InvalidGeometry(format!("branch references missing edge {}", b.attach)));
        }
        if poly.edge_roles[b.attach] != EdgeRole::Cut {
            return Err(Error::InvalidGeometry(format!("branch edge {} is not a cut", b.attach)));
        }
        check_interval_width(&b.cross_section, poly.edge_length(b.attach), b.attach)?;
    }
    if let Some(sym) = &cfg.symmetry {
        for &axis in &sym.axes {
            check_symmetric(poly, axis)?;
        }
    }
    Ok(())
}

fn check_interval_width(cs: &CrossSection, cut_length: f64, edge: usize) -> Result<()> {
    match cs {
        CrossSection::Interval { width } if rel_close(*width, cut_length) => Ok(()),
        CrossSection::Interval { width } => Err(Error::InvalidGeometry(format!(
            "branch width {width} does not match length {cut_length} of cut {edge}"
        ))),
        _ => Err(Error::InvalidGeometry("planar branches need interval cross-sections".into())),
    }
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

fn check_symmetric(poly: &Polygon, axis: Axis) -> Result<()> {
    let has =
        |p: Point| poly.vertices.iter().any(|v| (v[0] - p[0]).abs() <= COORD_TOL && (v[1] - p[1]).abs() <= COORD_TOL);
    if poly.vertices.iter().all(|v| has(axis.reflect(*v))) {
        Ok(())
    } else {
        Err(Error::NotSymmetric(format!("{axis:?}").to_lowercase()))
    }
}

/// Default number of chords used to inscribe a sector arc.
pub const DEFAULT_ARC_SEGMENTS: usize = 48;

/// Polygon used for planar meshing: the center itself, or for a sector the
/// polygon inscribed in it with `arc_segments` chords. The inscribed polygon
/// is contained in the sector.
pub fn planar_center(cfg: &ValidatedConfig, arc_segments: usize) -> Result<Polygon> {
    match cfg.center() {
        Center::Polygon(p) => Ok(p.clone()),
        Center::Sector { alpha, radius } => inscribed_sector(*alpha, *radius, arc_segments),
        Center::Box3 { .. } => Err(Error::InvalidGeometry("box centers have no planar polygon".into())),
    }
}

/// Maps a branch cut of the config to an edge index of [`planar_center`].
fn planar_cut_edge(cfg: &ValidatedConfig, attach: usize, poly: &Polygon) -> usize {
    match cfg.center() {
        Center::Sector { .. } => {
            if attach == 0 {
                0
            } else {
                poly.len() - 1
            }
        }
        _ => attach,
    }
}

fn inscribed_sector(alpha: f64, radius: f64, arc_segments: usize) -> Result<Polygon> {
    let m = arc_segments.max(1);
    let mut vertices = vec![[0.0, 0.0]];
    for i in 0..=m {
        let t = alpha * i as f64 / m as f64;
        vertices.push([radius * t.cos(), radius * t.sin()]);
    }
    let n = vertices.len();
    let mut tags = vec![BoundaryCondition::Dirichlet; n];
    let mut roles = vec![EdgeRole::Wall; n];
    for i in [0, n - 1] {
        tags[i] = BoundaryCondition::Neumann;
        roles[i] = EdgeRole::Cut;
    }
    Polygon::new(vertices, tags, roles)
}

struct Stubbed {
    poly: Polygon,
    /// New index of each far-end edge, in branch order.
    far_edges: Vec<usize>,
}

fn attach_stubs(
    base: &Polygon,
    cut_edges: &[usize],
    length: f64,
    far_tag: (BoundaryCondition, EdgeRole),
    all_dirichlet: bool,
) -> Result<Stubbed> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::OutOfRange(format!("stub length must be positive, got {length}")));
    }
    let n = base.len();
    let mut vertices = Vec::with_capacity(n + 2 * cut_edges.len());
    let mut tags = Vec::new();
    let mut roles = Vec::new();
    let mut far_edges = vec![0; cut_edges.len()];
    let wall = (BoundaryCondition::Dirichlet, EdgeRole::Wall);
    for i in 0..n {
        let (a, b) = base.edge(i);
        vertices.push(a);
        if let Some(slot) = cut_edges.iter().position(|&e| e == i) {
            let d = sub(b, a);
            let len = norm(d);
            let out = [d[1] / len * length, -d[0] / len * length];
            vertices.push(add(a, out));
            vertices.push(add(b, out));
            let start = tags.len();
            for (t, r) in [wall, far_tag, wall] {
                tags.push(t);
                roles.push(r);
            }
            far_edges[slot] = start + 1;
        } else if all_dirichlet {
            tags.push(BoundaryCondition::Dirichlet);
            roles.push(EdgeRole::Wall);
        } else {
            tags.push(base.edge_tags[i]);
            roles.push(base.edge_roles[i]);
        }
    }
    let poly = Polygon::new(vertices, tags, roles).map_err(|_| Error::StubOverlap { length })?;
    Ok(Stubbed { poly, far_edges })
}

/// Center plus a straight stub of the given length on every branch, with a
/// Dirichlet condition on the whole outer boundary. The result is a subset
/// of the waveguide, so its Dirichlet eigenvalues bound the waveguide's from
/// above.
pub fn truncate(cfg: &ValidatedConfig, length: f64) -> Result<Polygon> {
    truncate_with_arc(cfg, length, DEFAULT_ARC_SEGMENTS)
}

pub fn truncate_with_arc(cfg: &ValidatedConfig, length: f64, arc_segments: usize) -> Result<Polygon> {
    let base = planar_center(cfg, arc_segments)?;
    let cuts: Vec<usize> = cfg.branches().iter().map(|b| planar_cut_edge(cfg, b.attach, &base)).collect();
    attach_stubs(&base, &cuts, length, (BoundaryCondition::Dirichlet, EdgeRole::Wall), true).map(|s| s.poly)
}

/// Moves every cut outward by `depth`, absorbing that much of each branch
/// into the center. Only polygonal centers are supported.
pub fn enlarge_center(cfg: &ValidatedConfig, depth: f64) -> Result<ValidatedConfig> {
    let base = match cfg.center() {
        Center::Polygon(p) => p,
        _ => return Err(Error::InvalidGeometry("only polygonal centers can be enlarged".into())),
    };
    let cuts: Vec<usize> = cfg.branches().iter().map(|b| b.attach).collect();
    let stubbed = attach_stubs(base, &cuts, depth, (BoundaryCondition::Neumann, EdgeRole::Cut), false)?;
    let mut out = cfg.config().clone();
    out.center = Center::Polygon(stubbed.poly);
    for (b, e) in out.branches.iter_mut().zip(stubbed.far_edges) {
        b.attach = e;
    }
    validate_config(out)
}

/// Splits a symmetric polygon into the half or quarter domains of each
/// parity class. Mirror-line edges get Dirichlet for odd parity and Neumann
/// for even parity; original edges keep their data.
pub fn symmetry_reduce(poly: &Polygon, sym: &SymmetrySpec) -> Result<Vec<(Polygon, Parity)>> {
    let mut axes = sym.axes.clone();
    axes.sort_by_key(|a| a.coordinate());
    axes.dedup();
    for &axis in &axes {
        check_symmetric(poly, axis)?;
    }
    let vertical = axes.contains(&Axis::Vertical);
    let horizontal = axes.contains(&Axis::Horizontal);
    let mut parities = Vec::new();
    for k in 0..=u8::from(horizontal) {
        for j in 0..=u8::from(vertical) {
            parities.push((j, k));
        }
    }
    let mut clipped = poly.vertices.clone();
    for &axis in &axes {
        clipped = clip_half_plane(&clipped, axis.coordinate());
    }
    let scale = poly.diameter();
    let tol = 1e-10 * scale.max(1.0);
    let mut out = Vec::new();
    for parity in parities {
        let n = clipped.len();
        let mut tags = Vec::with_capacity(n);
        let mut roles = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = (clipped[i], clipped[(i + 1) % n]);
            let on_axis = axes.iter().find(|ax| {
                let c = ax.coordinate();
                a[c].abs() <= tol && b[c].abs() <= tol
            });
            if let Some(ax) = on_axis {
                let odd = match ax {
                    Axis::Vertical => parity.0 == 1,
                    Axis::Horizontal => parity.1 == 1,
                };
                tags.push(if odd { BoundaryCondition::Dirichlet } else { BoundaryCondition::Neumann });
                roles.push(EdgeRole::Wall);
            } else {
                let src = poly.edge_containing(a, b, tol).ok_or_else(|| {
                    Error::InvalidGeometry("clipped edge does not lie on the original boundary".into())
                })?;
                tags.push(poly.edge_tags[src]);
                roles.push(poly.edge_roles[src]);
            }
        }
        out.push((Polygon::new(clipped.clone(), tags, roles)?, parity));
    }
    Ok(out)
}

/// Sutherland–Hodgman clip of a closed ring to `p[coord] >= 0`.
fn clip_half_plane(ring: &[Point], coord: usize) -> Vec<Point> {
    let inside = |p: &Point| p[coord] >= -COORD_TOL;
    let mut out: Vec<Point> = Vec::new();
    let n = ring.len();
    for i in 0..n {
        let cur = ring[i];
        let next = ring[(i + 1) % n];
        match (inside(&cur), inside(&next)) {
            (true, true) => out.push(next),
            (true, false) => out.push(intersect_axis(cur, next, coord)),
            (false, true) => {
                out.push(intersect_axis(cur, next, coord));
                out.push(next);
            }
            (false, false) => {}
        }
    }
    let mut dedup: Vec<Point> = Vec::new();
    for p in out {
        if dedup.last().is_none_or(|q| dist(*q, p) > COORD_TOL) {
            dedup.push(p);
        }
    }
    while dedup.len() > 1 && dist(dedup[0], *dedup.last().unwrap()) <= COORD_TOL {
        dedup.pop();
    }
    // Snap mirror-line points exactly onto the line.
    for p in &mut dedup {
        if p[coord].abs() <= COORD_TOL {
            p[coord] = 0.0;
        }
    }
    dedup
}

fn intersect_axis(a: Point, b: Point, coord: usize) -> Point {
    let t = a[coord] / (a[coord] - b[coord]);
    let mut p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    p[coord] = 0.0;
    p
}

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub(crate) fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

pub(crate) fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = sub(b, a);
    let len2 = dot(d, d);
    let t = if len2 > 0.0 { (dot(sub(p, a), d) / len2).clamp(0.0, 1.0) } else { 0.0 };
    dist(p, [a[0] + t * d[0], a[1] + t * d[1]])
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    cross(sub(b, a), sub(c, a))
}

/// Closed-segment intersection test (touching counts).
pub(crate) fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let scale = [a, b, c, d].iter().map(|p| norm(*p)).fold(1.0, f64::max);
    let eps = 1e-14 * scale * scale;
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    let straddle = |x: f64, y: f64| (x > eps && y < -eps) || (x < -eps && y > eps);
    if straddle(d1, d2) && straddle(d3, d4) {
        return true;
    }
    let tol = 1e-12 * scale;
    point_segment_distance(a, c, d) <= tol
        || point_segment_distance(b, c, d) <= tol
        || point_segment_distance(c, a, b) <= tol
        || point_segment_distance(d, a, b) <= tol
}
