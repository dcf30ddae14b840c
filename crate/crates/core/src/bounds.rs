//! One-sided spectral bounds and the rules that transport them between
//! operators.
//!
//! A [`SpectralBound`] is a value together with the chain of rule
//! applications that produced it. The first step of a trace is a source (a
//! closed form, a numerical run, or the trivial bound 0); every later step is
//! a transformation that either keeps the value or rescales it, so
//! [`SpectralBound::replay`] can recompute the value from the trace alone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{cross_section_threshold, EigList, Formula};
use crate::geom::{BoundaryCondition, CrossSection, Polygon};

/// Relative tolerance for trace replay.
pub const REPLAY_TOL: f64 = 1e-13;

/// Per-step floating-point tolerance added to a bound's budget.
const STEP_TOL: f64 = 4.0 * f64::EPSILON;

/// Containment tolerance of the enclosure checks.
pub const CONTAINMENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    LowerBound,
    UpperBound,
    Estimate,
}

/// Handle naming a quadratic-form problem: a domain and its boundary
/// conditions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OperatorRef {
    pub domain: String,
    pub conditions: String,
}

impl OperatorRef {
    pub fn new(domain: impl Into<String>, conditions: impl Into<String>) -> Self {
        OperatorRef { domain: domain.into(), conditions: conditions.into() }
    }
}

impl std::fmt::Display for OperatorRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}[{}]", self.domain, self.conditions)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Rule {
    Formula(Formula),
    Numerical {
        method: String,
    },
    TrivialNonnegative,
    /// Capped at the threshold, where the branches' spectrum starts.
    DnBracket {
        from: OperatorRef,
        threshold: f64,
    },
    DirichletMonotone {
        from: OperatorRef,
    },
    NeumannEnclosure {
        enclosure: OperatorRef,
    },
    TagRelaxation {
        from: OperatorRef,
    },
    Scale {
        coeffs: Vec<f64>,
        capped: bool,
    },
    DirectSum {
        part: usize,
    },
    BoxComparison {
        from: OperatorRef,
    },
    /// The bound on index `k` is the eigenvalue with index `source_index` of
    /// a problem whose eigenfunctions contain the reflected ones.
    Reflection {
        from: OperatorRef,
        source_index: usize,
    },
    /// `λ_k ≥ λ_j` for `k > j`: reuses the bound on index `from_index`.
    MonotoneTail {
        from_index: usize,
    },
    /// Product with a Dirichlet interval of the given length: adds `(π/length)²`.
    IntervalProduct {
        length: f64,
    },
}

impl Rule {
    pub fn id(&self) -> &'static str {
        match self {
            Rule::Formula(_) => "formula",
            Rule::Numerical { .. } => "numerical",
            Rule::TrivialNonnegative => "trivial_nonnegative",
            Rule::DnBracket { .. } => "dn_bracket",
            Rule::DirichletMonotone { .. } => "dirichlet_monotone",
            Rule::NeumannEnclosure { .. } => "neumann_enclosure",
            Rule::TagRelaxation { .. } => "tag_relaxation",
            Rule::Scale { .. } => "scale",
            Rule::DirectSum { .. } => "direct_sum",
            Rule::BoxComparison { .. } => "box_comparison",
            Rule::Reflection { .. } => "reflection",
            Rule::IntervalProduct { .. } => "interval_product",
            Rule::MonotoneTail { .. } => "monotone_tail",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    #[serde(flatten)]
    pub rule: Rule,
    pub citation: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralBound {
    pub operator: OperatorRef,
    pub index: usize,
    pub value: f64,
    pub direction: Direction,
    pub trace: Vec<TraceStep>,
    /// Accumulated absolute floating-point tolerance.
    pub budget: f64,
}

/// Multiplier applied by [`Rule::Scale`].
pub fn scale_factor(coeffs: &[f64], capped: bool) -> f64 {
    let sharp = coeffs.iter().map(|c| c.powi(-2)).fold(f64::INFINITY, f64::min);
    if capped {
        sharp.min(1.0)
    } else {
        sharp
    }
}

impl SpectralBound {
    /// A bound with a single source step.
    pub fn new(operator: OperatorRef, index: usize, direction: Direction, source: TraceStep, tolerance: f64) -> Self {
        SpectralBound { operator, index, value: source.value, direction, trace: vec![source], budget: tolerance.abs() }
    }

    /// Value 0, valid for every nonnegative operator.
    pub fn trivial(operator: OperatorRef, index: usize) -> Self {
        let step = TraceStep { rule: Rule::TrivialNonnegative, citation: "nonnegative form".into(), value: 0.0 };
        SpectralBound::new(operator, index, Direction::LowerBound, step, 0.0)
    }

    pub fn is_lower(&self) -> bool {
        self.direction == Direction::LowerBound
    }

    fn extend(mut self, operator: OperatorRef, rule: Rule, citation: &str, value: f64) -> Self {
        let ratio = if self.value != 0.0 { (value / self.value).abs() } else { 1.0 };
        self.budget = self.budget * ratio + STEP_TOL * value.abs();
        self.trace.push(TraceStep { rule, citation: citation.to_string(), value });
        self.operator = operator;
        self.value = value;
        self
    }

    /// Recomputes the value from the trace.
    pub fn replay(&self) -> Result<f64> {
        let mut current: Option<f64> = None;
        for step in &self.trace {
            let v = match (&step.rule, current) {
                (Rule::Formula(f), _) => f.eval()?,
                (Rule::Numerical { .. }, _) => step.value,
                (Rule::TrivialNonnegative, _) => 0.0,
                (Rule::Scale { coeffs, capped }, Some(prev)) => prev * scale_factor(coeffs, *capped),
                (Rule::DnBracket { threshold, .. }, Some(prev)) => prev.min(*threshold),
                (Rule::IntervalProduct { length }, Some(prev)) => prev + interval_ground(*length),
                (_, Some(prev)) => prev,
                (rule, None) => {
                    return Err(Error::OutOfRange(format!("trace starts with the transformation `{}`", rule.id())))
                }
            };
            current = Some(v);
        }
        current.ok_or_else(|| Error::OutOfRange("empty trace".into()))
    }

    /// Whether replaying the trace reproduces every recorded step value.
    pub fn replays_exactly(&self) -> bool {
        let mut prefix = self.clone();
        for n in 1..=self.trace.len() {
            prefix.trace = self.trace[..n].to_vec();
            let recorded = self.trace[n - 1].value;
            match prefix.replay() {
                Ok(v) if (v - recorded).abs() <= REPLAY_TOL * recorded.abs().max(f64::MIN_POSITIVE) => {}
                _ => return false,
            }
        }
        self.trace.last().map(|s| s.value) == Some(self.value)
    }
}

fn require(bounds: &[SpectralBound], direction: Direction, rule: &str) -> Result<()> {
    match bounds.iter().find(|b| b.direction != direction) {
        Some(b) => Err(Error::DirectionMismatch(format!(
            "{rule} transports {direction:?} values, got {:?} for {} index {}",
            b.direction, b.operator, b.index
        ))),
        None => Ok(()),
    }
}

/// `λ_j(waveguide) ≥ min(λ_j(DN center), ν)`: the Neumann-cut waveguide
/// splits into the DN center and branches whose spectrum starts at `ν`.
pub fn dn_bracket(
    center_bounds: &[SpectralBound],
    threshold: f64,
    waveguide: &OperatorRef,
) -> Result<Vec<SpectralBound>> {
    require(center_bounds, Direction::LowerBound, "dn_bracket")?;
    Ok(center_bounds
        .iter()
        .map(|b| {
            let rule = Rule::DnBracket { from: b.operator.clone(), threshold };
            b.clone().extend(waveguide.clone(), rule, "DN bracketing", b.value.min(threshold))
        })
        .collect())
}

/// `λ_j(waveguide) ≤ λ_j(Dirichlet subdomain)`.
pub fn dirichlet_monotone(sub_bounds: &[SpectralBound], waveguide: &OperatorRef) -> Result<Vec<SpectralBound>> {
    require(sub_bounds, Direction::UpperBound, "dirichlet_monotone")?;
    Ok(sub_bounds
        .iter()
        .map(|b| {
            let rule = Rule::DirichletMonotone { from: b.operator.clone() };
            b.clone().extend(waveguide.clone(), rule, "Dirichlet domain monotonicity", b.value)
        })
        .collect())
}

/// Transports lower bounds to the image of the domain under
/// `diag(c_1, c_2, ...)`, multiplying by `min c_i⁻²` (capped at 1 when
/// `capped`).
pub fn scale_bound(
    src: &[SpectralBound],
    coeffs: &[f64],
    capped: bool,
    target: &OperatorRef,
) -> Result<Vec<SpectralBound>> {
    if let Some(&c) = coeffs.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
        return Err(Error::NonPositiveCoeff(c));
    }
    if coeffs.is_empty() {
        return Err(Error::OutOfRange("scale_bound needs at least one coefficient".into()));
    }
    require(src, Direction::LowerBound, "scale_bound")?;
    let factor = scale_factor(coeffs, capped);
    Ok(src
        .iter()
        .map(|b| {
            let rule = Rule::Scale { coeffs: coeffs.to_vec(), capped };
            b.clone().extend(target.clone(), rule, "anisotropic scaling, min-max", b.value * factor)
        })
        .collect())
}

/// Checks that `inner` lies in `outer` and that every Neumann edge of
/// `inner` lies on the boundary of `outer`, by sampling.
pub fn check_enclosure(inner: &Polygon, outer: &Polygon) -> Result<()> {
    const SAMPLES: usize = 64;
    for i in 0..inner.len() {
        let (a, b) = inner.edge(i);
        let neumann = inner.edge_tags()[i] == BoundaryCondition::Neumann;
        for s in 0..=SAMPLES {
            let t = s as f64 / SAMPLES as f64;
            let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            if !outer.contains_or_on(p, CONTAINMENT_TOL) {
                return Err(Error::ContainmentViolation(format!("point ({}, {}) of edge {i} is outside", p[0], p[1])));
            }
            if neumann && outer.distance_to_boundary(p) > CONTAINMENT_TOL {
                return Err(Error::ContainmentViolation(format!(
                    "Neumann edge {i} leaves the enclosure boundary at ({}, {})",
                    p[0], p[1]
                )));
            }
        }
    }
    Ok(())
}

/// `λ_k(C, DN) ≥ λ_k(M, Neumann)` for an enclosure `M ⊃ C` (zero extension
/// across the Dirichlet part of `∂C`).
pub fn neumann_enclosure(
    dn_problem: &OperatorRef,
    center: &Polygon,
    enclosure: &OperatorRef,
    enclosure_domain: &Polygon,
    enclosure_eigs: &EigList,
) -> Result<Vec<SpectralBound>> {
    let exact = enclosure_eigs.as_bounds(enclosure, Direction::LowerBound, "exact enclosure spectrum");
    neumann_enclosure_bounds(dn_problem, center, enclosure_domain, &exact)
}

/// As [`neumann_enclosure`] for an enclosure known only through lower
/// bounds.
pub fn neumann_enclosure_bounds(
    dn_problem: &OperatorRef,
    center: &Polygon,
    enclosure_domain: &Polygon,
    enclosure_bounds: &[SpectralBound],
) -> Result<Vec<SpectralBound>> {
    require(enclosure_bounds, Direction::LowerBound, "neumann_enclosure")?;
    check_enclosure(center, enclosure_domain)?;
    Ok(enclosure_bounds
        .iter()
        .map(|b| {
            let rule = Rule::NeumannEnclosure { enclosure: b.operator.clone() };
            b.clone().extend(dn_problem.clone(), rule, "Neumann enclosure by zero extension", b.value)
        })
        .collect())
}

fn interval_ground(length: f64) -> f64 {
    (std::f64::consts::PI / length).powi(2)
}

/// Upper bounds on `D × (0, length)` with a Dirichlet condition on the
/// interval ends, from upper bounds on `D`: the `k`-th sum
/// `λ_k(D) + (π/length)²` is an eigenvalue of the product.
pub fn interval_product(src: &[SpectralBound], length: f64, target: &OperatorRef) -> Result<Vec<SpectralBound>> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::NonPositiveCoeff(length));
    }
    require(src, Direction::UpperBound, "interval_product")?;
    Ok(src
        .iter()
        .map(|b| {
            let rule = Rule::IntervalProduct { length };
            b.clone().extend(target.clone(), rule, "separation of variables", b.value + interval_ground(length))
        })
        .collect())
}

/// `λ_k(DN) ≥ λ_k(all Neumann)` on the same domain.
pub fn tag_relaxation(src: &[SpectralBound], dn_problem: &OperatorRef) -> Result<Vec<SpectralBound>> {
    require(src, Direction::LowerBound, "tag_relaxation")?;
    Ok(src
        .iter()
        .map(|b| {
            let rule = Rule::TagRelaxation { from: b.operator.clone() };
            b.clone().extend(dn_problem.clone(), rule, "Dirichlet to Neumann relaxation", b.value)
        })
        .collect())
}

/// Lower bound on `λ_k` of `target` read off the eigenvalue with index
/// `picks[k-1]` of a problem that contains every reflected eigenfunction of
/// `target` in a symmetry class.
pub fn reflection(
    source: &[SpectralBound],
    picks: &[usize],
    target: &OperatorRef,
    citation: &str,
) -> Result<Vec<SpectralBound>> {
    require(source, Direction::LowerBound, "reflection")?;
    picks
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let b = source.get(p.wrapping_sub(1)).ok_or_else(|| {
                Error::OutOfRange(format!("reflection pick {p} beyond {} source bounds", source.len()))
            })?;
            let rule = Rule::Reflection { from: b.operator.clone(), source_index: p };
            let mut out = b.clone().extend(target.clone(), rule, citation, b.value);
            out.index = k + 1;
            Ok(out)
        })
        .collect()
}

/// Extends a list of lower bounds on indices `1..=len` to `1..=k` by
/// repeating the last value.
pub fn pad_lower(mut bounds: Vec<SpectralBound>, k: usize) -> Result<Vec<SpectralBound>> {
    require(&bounds, Direction::LowerBound, "pad_lower")?;
    let Some(last) = bounds.last().cloned() else {
        return Err(Error::OutOfRange("cannot pad an empty bound list".into()));
    };
    for index in bounds.len() + 1..=k {
        let rule = Rule::MonotoneTail { from_index: last.index };
        let op = last.operator.clone();
        let mut b = last.clone().extend(op, rule, "eigenvalues are nondecreasing", last.value);
        b.index = index;
        bounds.push(b);
    }
    Ok(bounds)
}

/// Named comparison `A ≥ B` between operators, transporting lower bounds of `B`.
pub fn box_comparison(src: &[SpectralBound], target: &OperatorRef, citation: &str) -> Result<Vec<SpectralBound>> {
    require(src, Direction::LowerBound, "box_comparison")?;
    Ok(src
        .iter()
        .map(|b| {
            let rule = Rule::BoxComparison { from: b.operator.clone() };
            b.clone().extend(target.clone(), rule, citation, b.value)
        })
        .collect())
}

/// Sorted merge of exact spectra of the summands of an orthogonal sum.
pub fn direct_sum_eigs(parts: &[EigList]) -> EigList {
    EigList::from_entries(parts.iter().flat_map(|p| p.entries().iter().cloned()).collect())
}

/// Merges bound lists on the summands of an orthogonal sum into bounds on
/// the sum.
///
/// Lower-bound lists are padded with their last value (eigenvalues are
/// nondecreasing), so the `k`-th merged value bounds the `k`-th eigenvalue
/// of the sum from below. Upper-bound lists merge without padding.
pub fn direct_sum(parts: &[Vec<SpectralBound>], target: &OperatorRef) -> Result<Vec<SpectralBound>> {
    let mut directions = parts.iter().flatten().map(|b| b.direction);
    let Some(direction) = directions.next() else {
        return Ok(Vec::new());
    };
    if directions.any(|d| d != direction) {
        return Err(Error::MixedDirections);
    }
    let total: usize = parts.iter().map(Vec::len).sum();
    let mut merged = Vec::with_capacity(total * parts.len());
    for (p, part) in parts.iter().enumerate() {
        let len = if direction == Direction::LowerBound && !part.is_empty() { total } else { part.len() };
        for j in 0..len {
            let b = &part[j.min(part.len() - 1)];
            let rule = Rule::DirectSum { part: p };
            let citation = if j < part.len() { "orthogonal sum" } else { "orthogonal sum, monotone tail" };
            merged.push(b.clone().extend(target.clone(), rule, citation, b.value));
        }
    }
    merged.sort_by(|a, b| a.value.total_cmp(&b.value));
    merged.truncate(total);
    for (k, b) in merged.iter_mut().enumerate() {
        b.index = k + 1;
    }
    Ok(merged)
}

/// `ν_j`, the bottom of the spectrum of a half-cylinder over `branch` with a
/// Neumann cut.
pub fn branch_threshold_floor(branch: &CrossSection) -> SpectralBound {
    let f = Formula::CrossSectionThreshold { cross_section: *branch };
    let value = cross_section_threshold(branch);
    let tol = f.tolerance() * value;
    SpectralBound::new(
        OperatorRef::new(format!("half_cylinder_{}", branch.kind()), "D-wall N-cut"),
        1,
        Direction::LowerBound,
        TraceStep { rule: Rule::Formula(f), citation: "separation of variables".into(), value },
        tol,
    )
}

/// Checks `lower ≤ upper (1 + 1e-9)` for every matching (operator, index).
pub fn check_consistency(lowers: &[SpectralBound], uppers: &[SpectralBound]) -> Result<()> {
    for lo in lowers.iter().filter(|b| b.direction == Direction::LowerBound) {
        for up in uppers.iter().filter(|b| b.direction == Direction::UpperBound) {
            if lo.operator == up.operator && lo.index == up.index && lo.value > up.value + 1e-9 * up.value.abs() {
                return Err(Error::InconsistentBounds(format!(
                    "{} index {}: lower {} > upper {}",
                    lo.operator, lo.index, lo.value, up.value
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::exact::{box_eigs, equilateral_eigs, TriangleBc};
    use crate::geom::{BCPair, EdgeRole};

    const PI2: f64 = PI * PI;

    fn op(name: &str) -> OperatorRef {
        OperatorRef::new(name, "test")
    }

    fn lowers(values: &[f64], name: &str) -> Vec<SpectralBound> {
        EigList::numerical(values, "fixture").as_bounds(&op(name), Direction::LowerBound, "fixture")
    }

    fn square(tags: [BoundaryCondition; 4]) -> Polygon {
        Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], tags.to_vec(), vec![EdgeRole::Wall; 4])
            .unwrap()
    }

    #[test]
    fn dn_bracket_examples() {
        let t = box_eigs(&[1.0, 1.0], &[BCPair::NN, BCPair::DN], 2).unwrap();
        let center = t.as_bounds(&op("t_center"), Direction::LowerBound, "exact");
        let out = dn_bracket(&center, PI2, &op("t_waveguide")).unwrap();
        assert!((out[0].value - PI2 / 4.0).abs() < 1e-12);
        assert_eq!(out[1].value, PI2);
        assert_eq!(out[1].operator, op("t_waveguide"));
        assert_eq!(out[1].trace.last().unwrap().rule.id(), "dn_bracket");
        assert!(out[1].replays_exactly());
        let zero = dn_bracket(&[SpectralBound::trivial(op("c"), 1)], PI2, &op("w")).unwrap();
        assert_eq!(zero[0].value, 0.0);
        let up = box_eigs(&[1.0], &[BCPair::DD], 1).unwrap().as_bounds(&op("c"), Direction::UpperBound, "x");
        assert!(matches!(dn_bracket(&up, PI2, &op("w")), Err(Error::DirectionMismatch(_))));
    }

    #[test]
    fn dirichlet_monotone_examples() {
        let l = 3.0;
        let strip = box_eigs(&[1.0, l], &[BCPair::DD, BCPair::DD], 1).unwrap();
        let ub = strip.as_bounds(&op("strip"), Direction::UpperBound, "exact");
        let out = dirichlet_monotone(&ub, &op("w")).unwrap();
        assert!((out[0].value - PI2 * (1.0 + 1.0 / (l * l))).abs() < 1e-12);
        assert_eq!(out[0].direction, Direction::UpperBound);
        assert!(matches!(dirichlet_monotone(&lowers(&[1.0], "x"), &op("w")), Err(Error::DirectionMismatch(_))));
    }

    #[test]
    fn scale_examples() {
        let src =
            box_eigs(&[1.0, 1.0], &[BCPair::DD; 2], 1).unwrap().as_bounds(&op("sq"), Direction::LowerBound, "exact");
        let out = scale_bound(&src, &[2.0, 1.0], false, &op("rect")).unwrap();
        assert!((out[0].value - PI2 / 2.0).abs() < 1e-12);
        let exact = box_eigs(&[2.0, 1.0], &[BCPair::DD; 2], 1).unwrap().get(0).unwrap();
        assert!(out[0].value <= exact + 1e-12);
        assert!(out[0].replays_exactly());
        let same = scale_bound(&src, &[1.0, 1.0], false, &op("sq")).unwrap();
        assert_eq!(same[0].value, src[0].value);
        assert_eq!(scale_bound(&src, &[0.5, 1.0], true, &op("x")).unwrap()[0].value, src[0].value);
        assert_eq!(scale_bound(&src, &[0.5, 1.0], false, &op("x")).unwrap()[0].value, src[0].value);
        assert!((scale_bound(&src, &[0.5, 0.5], false, &op("x")).unwrap()[0].value - 4.0 * src[0].value).abs() < 1e-12);
        assert!(matches!(scale_bound(&src, &[0.0, 1.0], false, &op("x")), Err(Error::NonPositiveCoeff(_))));
        assert!(matches!(scale_bound(&src, &[-1.0, 1.0], false, &op("x")), Err(Error::NonPositiveCoeff(_))));
    }

    #[test]
    fn broken_waveguide_scaling_example() {
        let alpha: f64 = 0.3;
        let src = lowers(&[0.0, 16.0 * PI2 / 9.0], "a_n_pi6");
        let c = (PI / 6.0).tan() / alpha.tan();
        let out = scale_bound(&src, &[c, 1.0], true, &op("a_n")).unwrap();
        assert!((out[1].value - 16.0 * PI2 * alpha.tan().powi(2) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn enclosure_examples() {
        use BoundaryCondition::{Dirichlet as D, Neumann as N};
        let c = square([D, N, N, N]);
        let m = square([N; 4]);
        let eigs = box_eigs(&[1.0, 1.0], &[BCPair::NN; 2], 3).unwrap();
        let out = neumann_enclosure(&op("dn"), &c, &op("neu"), &m, &eigs).unwrap();
        let exact = box_eigs(&[1.0, 1.0], &[BCPair::NN, BCPair::DN], 3).unwrap().values();
        for (b, e) in out.iter().zip(exact) {
            assert!(b.value <= e + 1e-12);
            assert!(b.replays_exactly());
        }
        let small = square([N; 4]).scaled(0.5, 0.5);
        assert!(matches!(
            neumann_enclosure(&op("dn"), &c, &op("neu"), &small, &eigs),
            Err(Error::ContainmentViolation(_))
        ));
        let big = square([N; 4]).scaled(2.0, 2.0);
        assert!(matches!(check_enclosure(&c, &big), Err(Error::ContainmentViolation(_))));
    }

    #[test]
    fn direct_sum_examples() {
        let a = interval(BCPair::DN);
        let b = interval(BCPair::NN);
        let merged = direct_sum_eigs(&[a, b]).values();
        let expected = [0.0, PI2 / 4.0, PI2, 9.0 * PI2 / 4.0];
        for (m, e) in merged.iter().zip(expected) {
            assert!((m - e).abs() < 1e-12);
        }
        assert!(direct_sum(&[], &op("x")).unwrap().is_empty());
        let up = vec![SpectralBound { direction: Direction::UpperBound, ..lowers(&[1.0], "u")[0].clone() }];
        assert!(matches!(direct_sum(&[lowers(&[1.0], "l"), up], &op("x")), Err(Error::MixedDirections)));
    }

    fn interval(bc: BCPair) -> EigList {
        crate::exact::interval_eigs(1.0, bc, 2)
    }

    #[test]
    fn direct_sum_pads_lower_lists() {
        let merged = direct_sum(&[lowers(&[5.0], "a"), lowers(&[0.0, 1.0, 2.0], "b")], &op("s")).unwrap();
        let values: Vec<f64> = merged.iter().map(|b| b.value).collect();
        assert_eq!(values, vec![0.0, 1.0, 2.0, 2.0]);
        let merged = direct_sum(&[lowers(&[0.5], "a"), lowers(&[0.0, 1.0, 2.0], "b")], &op("s")).unwrap();
        let values: Vec<f64> = merged.iter().map(|b| b.value).collect();
        assert_eq!(values, vec![0.0, 0.5, 0.5, 0.5]);
        assert!(merged.iter().enumerate().all(|(k, b)| b.index == k + 1 && b.replays_exactly()));
    }

    #[test]
    fn reflection_picks_symmetric_modes() {
        let side = 2.0 * 3f64.sqrt();
        let eq = equilateral_eigs(side, TriangleBc::AllDirichlet, 4).unwrap();
        let src = eq.as_bounds(&op("omega"), Direction::LowerBound, "exact");
        let out = reflection(&src, &[1, 4], &op("a_n"), "symmetric extension").unwrap();
        assert!((out[0].value - 4.0 * PI2 / 9.0).abs() < 1e-12);
        assert!((out[1].value - 16.0 * PI2 / 9.0).abs() < 1e-12);
        assert_eq!(out[1].index, 2);
        assert!(out[1].replays_exactly());
        assert!(reflection(&src, &[9], &op("a_n"), "x").is_err());
    }

    #[test]
    fn branch_floors() {
        for cs in [
            CrossSection::Interval { width: 1.0 },
            CrossSection::Disk { radius: 0.5 },
            CrossSection::Rectangle { a: 1.0, b: 1.0 },
        ] {
            let b = branch_threshold_floor(&cs);
            assert_eq!(b.value, cross_section_threshold(&cs));
            assert!(b.replays_exactly());
        }
        assert!((branch_threshold_floor(&CrossSection::Interval { width: 1.0 }).value - PI2).abs() < 1e-12);
        assert!((branch_threshold_floor(&CrossSection::Rectangle { a: 1.0, b: 1.0 }).value - 2.0 * PI2).abs() < 1e-12);
    }

    #[test]
    fn consistency_check() {
        let lo = lowers(&[2.0], "p");
        let mut up = lo.clone();
        up[0].direction = Direction::UpperBound;
        up[0].value = 1.0;
        assert!(matches!(check_consistency(&lo, &up), Err(Error::InconsistentBounds(_))));
        up[0].value = 2.0;
        assert!(check_consistency(&lo, &up).is_ok());
    }

    #[test]
    fn replay_detects_tampering() {
        let mut b = scale_bound(&lowers(&[3.0], "a"), &[2.0], false, &op("b")).unwrap().remove(0);
        assert!(b.replays_exactly());
        b.trace[1].value = 1.0;
        assert!(!b.replays_exactly());
    }

    #[test]
    fn trace_serializes_with_rule_ids() {
        let b = branch_threshold_floor(&CrossSection::Interval { width: 1.0 });
        let json = serde_json::to_value(&b).unwrap();
        assert_eq!(json["trace"][0]["rule"], "formula");
        assert_eq!(json["trace"][0]["formula"], "cross_section_threshold");
        let back: SpectralBound = serde_json::from_value(json).unwrap();
        assert_eq!(back, b);
    }
}
