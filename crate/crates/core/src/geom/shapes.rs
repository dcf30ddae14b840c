//! Constructors for the junction families used throughout the crate.

use std::f64::consts::PI;

use super::{
    validate_config, Axis, BoundaryCondition, Branch, Center, CrossSection, EdgeRole, Point, Polygon,
    StarWaveguideConfig, SymmetrySpec, ValidatedConfig,
};
use crate::error::{Error, Result};

use BoundaryCondition::{Dirichlet as D, Neumann as N};
use EdgeRole::{Cut, Wall};

const UNIT: CrossSection = CrossSection::Interval { width: 1.0 };

fn unit_branches(edges: &[usize]) -> Vec<Branch> {
    edges.iter().map(|&attach| Branch { attach, cross_section: UNIT }).collect()
}

fn build(
    name: &str,
    vertices: Vec<Point>,
    edges: &[(BoundaryCondition, EdgeRole)],
    symmetry: Option<SymmetrySpec>,
    allow_pure_neumann: bool,
) -> Result<ValidatedConfig> {
    let poly = Polygon::new(vertices, edges.iter().map(|e| e.0).collect(), edges.iter().map(|e| e.1).collect())?;
    let cuts: Vec<usize> = (0..poly.len()).filter(|&i| poly.edge_roles()[i] == Cut).collect();
    validate_config(StarWaveguideConfig {
        name: name.to_string(),
        center: Center::Polygon(poly),
        branches: unit_branches(&cuts),
        symmetry,
        allow_pure_neumann,
    })
}

/// Unit square with unit strips on three sides; the bottom side is a wall.
pub fn t_junction() -> ValidatedConfig {
    build(
        "t_junction",
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        &[(D, Wall), (N, Cut), (N, Cut), (N, Cut)],
        None,
        false,
    )
    .expect("T-junction geometry is valid")
}

/// Unit equilateral triangle with a unit strip on every side.
pub fn y_junction() -> ValidatedConfig {
    let h = 3f64.sqrt() / 2.0;
    build(
        "y_junction",
        vec![[-0.5, 0.0], [0.5, 0.0], [0.0, h]],
        &[(N, Cut), (N, Cut), (N, Cut)],
        Some(SymmetrySpec { axes: vec![Axis::Vertical] }),
        true,
    )
    .expect("Y-junction geometry is valid")
}

/// Two unit strips crossing at right angles; the center is the unit square
/// centered at the origin.
pub fn crossing_strips(with_symmetry: bool) -> ValidatedConfig {
    let sym = with_symmetry.then(|| SymmetrySpec { axes: vec![Axis::Vertical, Axis::Horizontal] });
    build(
        if with_symmetry { "crossing_strips_symmetric" } else { "crossing_strips" },
        vec![[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]],
        &[(N, Cut); 4],
        sym,
        true,
    )
    .expect("crossing geometry is valid")
}

/// Straight unit strip; its center is the unit square between two cuts.
pub fn straight_strip() -> ValidatedConfig {
    build(
        "straight_strip",
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        &[(D, Wall), (N, Cut), (D, Wall), (N, Cut)],
        None,
        false,
    )
    .expect("strip geometry is valid")
}

/// Broken waveguide `{cot α |x2| − 1/sin α < x1 < cot α |x2|}`; the center is
/// the kite between the two cuts through the outer corner.
pub fn broken_waveguide(alpha: f64) -> Result<ValidatedConfig> {
    if !(alpha > 0.0 && alpha < PI / 2.0) {
        return Err(Error::OutOfRange(format!("broken waveguide needs α in (0, π/2), got {alpha}")));
    }
    let (s, c) = alpha.sin_cos();
    build(
        &format!("broken_waveguide_{alpha}"),
        vec![[0.0, 0.0], [-s, c], [-1.0 / s, 0.0], [-s, -c]],
        &[(N, Cut), (D, Wall), (D, Wall), (N, Cut)],
        Some(SymmetrySpec { axes: vec![Axis::Horizontal] }),
        false,
    )
}

/// Half-width-1/2 neighbourhood of three rays pointing down and at angles
/// `π/2 ∓ α`; `α = π/3` gives the Y-junction, `α = π/2` the T-junction. The
/// center is the smallest one bounded by cuts orthogonal to the rays.
pub fn y_alpha(alpha: f64) -> Result<ValidatedConfig> {
    if !(alpha > 0.0 && alpha <= PI / 2.0) {
        return Err(Error::OutOfRange(format!("Y_α family needs α in (0, π/2], got {alpha}")));
    }
    let (s, c) = alpha.sin_cos();
    let t = (alpha / 2.0).tan() / 2.0;
    let dir = [s, c];
    let nr = [c, -s];
    let at = |along: f64, across: f64| [along * dir[0] + across * nr[0], along * dir[1] + across * nr[1]];
    let mirror = |p: Point| [-p[0], p[1]];
    let apex = [0.0, 1.0 / (2.0 * s)];
    let name = format!("y_alpha_{alpha}");
    let sym = Some(SymmetrySpec { axes: vec![Axis::Vertical] });
    let third = PI / 3.0;
    if (alpha - third).abs() < 1e-12 {
        let h = 3f64.sqrt() / 2.0;
        let base = -t;
        return build(&name, vec![[-0.5, base], [0.5, base], [0.0, base + h]], &[(N, Cut); 3], sym, true);
    }
    if alpha < third {
        let cpt = at(alpha.cos() / s / 2.0, 0.5);
        build(
            &name,
            vec![[-0.5, -t], [0.5, -t], cpt, apex, mirror(cpt)],
            &[(N, Cut), (D, Wall), (N, Cut), (N, Cut), (D, Wall)],
            sym,
            false,
        )
    } else {
        let f = at(t, -0.5);
        if (alpha - PI / 2.0).abs() < 1e-12 {
            // The two upper walls are collinear: the T-junction square.
            return build(
                &name,
                vec![[-0.5, -t], [0.5, -t], f, mirror(f)],
                &[(N, Cut), (N, Cut), (D, Wall), (N, Cut)],
                sym,
                false,
            );
        }
        build(
            &name,
            vec![[-0.5, -t], [0.5, -t], f, apex, mirror(f)],
            &[(N, Cut), (N, Cut), (D, Wall), (D, Wall), (N, Cut)],
            sym,
            false,
        )
    }
}

/// Isosceles triangle obtained by extending the three cut lines of the
/// `y_alpha` center, with a Neumann condition on every side. Returns the
/// triangle together with its base length and height.
pub fn y_alpha_enclosure(alpha: f64) -> Result<(Polygon, f64, f64)> {
    if !(alpha > 0.0 && alpha < PI / 2.0) {
        return Err(Error::OutOfRange(format!("enclosure needs α in (0, π/2), got {alpha}")));
    }
    let (s, c) = alpha.sin_cos();
    let t = (alpha / 2.0).tan() / 2.0;
    let (base, height) = if alpha <= PI / 3.0 {
        let h = (2.0 - c) / (2.0 * s);
        (2.0 * h * c / s, h)
    } else {
        (1.0, alpha.tan() / 2.0)
    };
    let poly = Polygon::new(vec![[-base / 2.0, -t], [base / 2.0, -t], [0.0, -t + height]], vec![N; 3], vec![Wall; 3])?;
    Ok((poly, base, height))
}

/// Rectangle `(0, a) × (0, b)` with two unit strips on the side `x1 = 0`.
pub fn rectangle_family(a: f64, b: f64) -> Result<ValidatedConfig> {
    if !(a > 0.0 && b > 2.0) {
        return Err(Error::OutOfRange(format!("rectangle family needs a > 0 and b > 2, got ({a}, {b})")));
    }
    let gap = (b - 2.0) / 3.0;
    build(
        &format!("rectangle_{a}x{b}"),
        vec![
            [0.0, 0.0],
            [a, 0.0],
            [a, b],
            [0.0, b],
            [0.0, b - gap],
            [0.0, b - gap - 1.0],
            [0.0, gap + 1.0],
            [0.0, gap],
        ],
        &[(D, Wall), (D, Wall), (D, Wall), (D, Wall), (N, Cut), (D, Wall), (N, Cut), (D, Wall)],
        None,
        false,
    )
}

/// Unit-radius sector of opening α with unit strips on both flat sides.
pub fn rounded_corner(alpha: f64) -> Result<ValidatedConfig> {
    validate_config(StarWaveguideConfig {
        name: format!("rounded_corner_{alpha}"),
        center: Center::Sector { alpha, radius: 1.0 },
        branches: unit_branches(&[0, 1]),
        symmetry: None,
        allow_pure_neumann: false,
    })
}

fn unit_cube(name: &str, cs: CrossSection) -> ValidatedConfig {
    validate_config(StarWaveguideConfig {
        name: name.to_string(),
        center: Center::Box3 { dims: [1.0; 3], face_tags: [D, N, D, N, D, N] },
        branches: [1, 3, 5].iter().map(|&attach| Branch { attach, cross_section: cs }).collect(),
        symmetry: None,
        allow_pure_neumann: false,
    })
    .expect("cube geometry is valid")
}

/// Unit cube with square unit-side cylinders on three mutually adjacent faces.
pub fn cube_square_branches() -> ValidatedConfig {
    unit_cube("cube_square_branches", CrossSection::Rectangle { a: 1.0, b: 1.0 })
}

/// Unit cube with circular cylinders of radius 1/2 on three mutually
/// adjacent faces.
pub fn cube_disk_branches() -> ValidatedConfig {
    unit_cube("cube_disk_branches", CrossSection::Disk { radius: 0.5 })
}
