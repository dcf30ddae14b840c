//! Certificates that a star waveguide has no eigenvalue at or above its
//! threshold.
//!
//! A waveguide with threshold `ν` is certified with `n` discrete
//! eigenvalues when `n` upper bounds lie below `ν` and the lower bound on the
//! `(n+1)`-th DN eigenvalue of the center lies above it: the first gives at
//! least `n` eigenvalues below `ν`, the second at most `n` in total. Both
//! margins must exceed the floating-point budget carried by the bounds.

mod lower;
mod presets;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    branch_threshold_floor, check_consistency, dirichlet_monotone, dn_bracket, interval_product, Direction,
    OperatorRef, SpectralBound,
};
use crate::error::{Error, Result};
use crate::exact::{box_eigs, BCPair};
use crate::fem::{polygon_spectrum, DEFAULT_H};
use crate::geom::{broken_waveguide, truncate, Center, ValidatedConfig};

pub use lower::{sector_tail_floor, LowerMethod, ParityBlock};
pub use presets::{broken_plan, preset, presets, y_alpha_plan, Preset, PRESET_NAMES};
pub use sweep::{
    broken_critical_angle, certified_range, certify_rectangle, rectangle_conditions, rectangle_region, sector_scan,
    sweep_broken, sweep_grid, sweep_y_alpha, y_alpha_critical_angles, RegionCell, SweepPoint,
};

/// Relative floor of the margin required against `ν`.
pub const BUDGET_FLOOR: f64 = 1e-8;

/// Largest number of FEM eigenvalues requested while counting.
const MAX_COUNT_K: usize = 64;

/// Strength of the evidence behind a verdict, weakest last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rigor {
    /// Closed forms and analytic inequalities only.
    Analytic,
    /// Rigorous bounds, some of them Rayleigh–Ritz values on a mesh.
    NumericallyAssisted,
    /// The existence of the discrete eigenvalues is taken from a citation.
    Conditional,
    /// Extrapolated estimates stand in for lower bounds.
    Heuristic,
}

/// How discrete eigenvalues below `ν` are exhibited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Counting {
    /// Dirichlet FEM on the center plus truncated branches.
    #[default]
    TruncatedFem,
    /// Exact Dirichlet spectrum of a rectangular or box center.
    DirichletBox,
    /// A planar broken waveguide of angle `alpha` times a Dirichlet interval
    /// of `length`, assumed to lie inside the waveguide.
    BrokenProduct { alpha: f64, length: f64 },
    /// Existence taken from the literature.
    Cited { n: usize, reference: String },
}

fn default_levels() -> usize {
    2
}

fn default_h0() -> f64 {
    DEFAULT_H
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationPlan {
    #[serde(default)]
    pub counting: Counting,
    #[serde(default)]
    pub lower: LowerMethod,
    /// Branch stub length for truncation; three times the widest branch by
    /// default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_length: Option<f64>,
    /// Nested mesh levels used for counting.
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_h0")]
    pub h0: f64,
    /// Recount with doubled length and one more level, and fail if the count
    /// changes.
    #[serde(default = "default_true")]
    pub stability_check: bool,
}

impl Default for CertificationPlan {
    fn default() -> Self {
        CertificationPlan {
            counting: Counting::default(),
            lower: LowerMethod::default(),
            truncation_length: None,
            levels: default_levels(),
            h0: default_h0(),
            stability_check: true,
        }
    }
}

impl CertificationPlan {
    /// Reads the optional `[plan]` table of a TOML config.
    pub fn from_toml_section(s: &str) -> Result<Option<Self>> {
        #[derive(Deserialize)]
        struct File {
            plan: Option<CertificationPlan>,
        }
        let f: File = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        Ok(f.plan)
    }
}

/// `ν`: the smallest branch threshold.
pub fn threshold(cfg: &ValidatedConfig) -> SpectralBound {
    cfg.branches()
        .iter()
        .map(|b| branch_threshold_floor(&b.cross_section))
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("validated configs have a branch")
}

/// Margin a bound must clear against `ν` to count as strict.
pub fn required_margin(bound: &SpectralBound, nu: &SpectralBound) -> f64 {
    (bound.budget + nu.budget).max(BUDGET_FLOOR * nu.value)
}

pub fn waveguide_operator(cfg: &ValidatedConfig) -> OperatorRef {
    OperatorRef::new(cfg.name(), "D")
}

pub fn center_operator(cfg: &ValidatedConfig) -> OperatorRef {
    OperatorRef::new(format!("{}_center", cfg.name()), "DN")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationRun {
    pub length: f64,
    pub levels: usize,
    pub dofs: usize,
    pub below: usize,
}

/// Discrete eigenvalues exhibited below `ν`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Count {
    pub n: usize,
    /// Upper bounds on the waveguide eigenvalues; the first `n` lie below `ν`.
    pub upper_bounds: Vec<SpectralBound>,
    pub citation: Option<String>,
    pub rigor: Rigor,
    pub runs: Vec<TruncationRun>,
}

fn below(bounds: &[SpectralBound], nu: &SpectralBound) -> usize {
    bounds.iter().take_while(|b| nu.value - b.value > required_margin(b, nu)).count()
}

/// Requests more eigenvalues until one of them is not below `ν`.
fn count_until_above(
    nu: &SpectralBound,
    mut produce: impl FnMut(usize) -> Result<(Vec<SpectralBound>, usize)>,
) -> Result<(usize, Vec<SpectralBound>, usize)> {
    let mut k = 4;
    loop {
        let (bounds, dofs) = produce(k)?;
        let n = below(&bounds, nu);
        if n < bounds.len() || k >= MAX_COUNT_K {
            return Ok((n, bounds, dofs));
        }
        k *= 2;
    }
}

fn fem_count(
    cfg: &ValidatedConfig,
    length: f64,
    plan: &CertificationPlan,
    levels: usize,
    nu: &SpectralBound,
    lift: &dyn Fn(Vec<SpectralBound>) -> Result<Vec<SpectralBound>>,
) -> Result<(Vec<SpectralBound>, TruncationRun)> {
    let poly = truncate(cfg, length)?;
    let op = OperatorRef::new(format!("{}_truncated_{length}", cfg.name()), "D");
    let (n, bounds, dofs) = count_until_above(nu, |k| {
        let spectrum = polygon_spectrum(&poly, k, plan.h0, levels)?;
        let dofs = spectrum.levels.last().map_or(0, |l| l.dofs);
        Ok((lift(spectrum.upper_bounds(&op))?, dofs))
    })?;
    Ok((bounds, TruncationRun { length, levels, dofs, below: n }))
}

fn truncated_count(
    cfg: &ValidatedConfig,
    plan: &CertificationPlan,
    nu: &SpectralBound,
    lift: &dyn Fn(Vec<SpectralBound>) -> Result<Vec<SpectralBound>>,
) -> Result<(Vec<SpectralBound>, Vec<TruncationRun>)> {
    let width = cfg.branches().iter().map(|b| b.cross_section.max_width()).fold(0.0, f64::max);
    let length = plan.truncation_length.unwrap_or(3.0 * width);
    let (bounds, run) = fem_count(cfg, length, plan, plan.levels, nu, lift)?;
    let mut runs = vec![run];
    if plan.stability_check {
        let (_, check) = fem_count(cfg, 2.0 * length, plan, plan.levels + 1, nu, lift)?;
        if check.below != runs[0].below {
            return Err(Error::UnstableCount(format!(
                "{} below ν at length {length}, {} at length {} with a finer mesh",
                runs[0].below,
                check.below,
                2.0 * length
            )));
        }
        runs.push(check);
    }
    Ok((bounds, runs))
}

/// Exhibits discrete eigenvalues of `cfg` below `ν` with the plan's method.
pub fn count_discrete(cfg: &ValidatedConfig, plan: &CertificationPlan, nu: &SpectralBound) -> Result<Count> {
    let wave = waveguide_operator(cfg);
    let (upper_bounds, runs, citation, rigor) = match &plan.counting {
        Counting::TruncatedFem => {
            let lift = |b: Vec<SpectralBound>| dirichlet_monotone(&b, &wave);
            let (bounds, runs) = truncated_count(cfg, plan, nu, &lift)?;
            (bounds, runs, None, Rigor::NumericallyAssisted)
        }
        Counting::DirichletBox => {
            let (dims, bcs): (Vec<f64>, Vec<BCPair>) = match cfg.center() {
                Center::Polygon(p) => {
                    let (lo, hi) = p
                        .axis_aligned_rectangle()
                        .ok_or_else(|| Error::NoPipeline("Dirichlet box counting needs a rectangular center".into()))?;
                    (vec![hi[0] - lo[0], hi[1] - lo[1]], vec![BCPair::DD; 2])
                }
                Center::Box3 { dims, .. } => (dims.to_vec(), vec![BCPair::DD; 3]),
                Center::Sector { .. } => return Err(Error::NoPipeline("Dirichlet box counting needs a box".into())),
            };
            let boxed = OperatorRef::new(format!("{}_center", cfg.name()), "D");
            let (_, bounds, _) = count_until_above(nu, |k| {
                let eigs = box_eigs(&dims, &bcs, k)?;
                Ok((
                    dirichlet_monotone(
                        &eigs.as_bounds(&boxed, Direction::UpperBound, "separation of variables"),
                        &wave,
                    )?,
                    0,
                ))
            })?;
            (bounds, Vec::new(), None, Rigor::Analytic)
        }
        Counting::BrokenProduct { alpha, length } => {
            let planar = broken_waveguide(*alpha)?;
            let product = OperatorRef::new(format!("{}_x_interval_{length}", planar.name()), "D");
            let lift = |b: Vec<SpectralBound>| {
                let lifted =
                    interval_product(&dirichlet_monotone(&b, &waveguide_operator(&planar))?, *length, &product)?;
                dirichlet_monotone(&lifted, &wave)
            };
            let (bounds, runs) = truncated_count(&planar, plan, nu, &lift)?;
            (bounds, runs, None, Rigor::NumericallyAssisted)
        }
        Counting::Cited { reference, .. } => (Vec::new(), Vec::new(), Some(reference.clone()), Rigor::Conditional),
    };
    let n = match &plan.counting {
        Counting::Cited { n, .. } => *n,
        _ => below(&upper_bounds, nu),
    };
    Ok(Count { n, upper_bounds, citation, rigor, runs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Outcome {
    CertifiedNoResonance { n_discrete: usize },
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub label: String,
    pub value: f64,
    pub required: f64,
}

impl Margin {
    pub fn holds(&self) -> bool {
        self.value > self.required
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub threshold: SpectralBound,
    pub outcome: Outcome,
    pub rigor: Rigor,
    pub margins: Vec<Margin>,
    pub upper_bounds: Vec<SpectralBound>,
    pub lower_bounds: Vec<SpectralBound>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub parity_blocks: Vec<ParityBlock>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub truncation_runs: Vec<TruncationRun>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub citations: Vec<String>,
}

impl Verdict {
    pub fn nu(&self) -> f64 {
        self.threshold.value
    }

    pub fn is_certified(&self) -> bool {
        matches!(self.outcome, Outcome::CertifiedNoResonance { .. })
    }

    pub fn n_discrete(&self) -> Option<usize> {
        match self.outcome {
            Outcome::CertifiedNoResonance { n_discrete } => Some(n_discrete),
            Outcome::Inconclusive { .. } => None,
        }
    }

    /// The deciding lower-bound margin (the smallest per-parity margin for
    /// parity certificates).
    pub fn lower_margin(&self) -> Option<&Margin> {
        self.margins
            .iter()
            .filter(|m| m.label.starts_with('L'))
            .min_by(|a, b| (a.value - a.required).total_cmp(&(b.value - b.required)))
    }
}

/// At least `k` lower bounds on the DN eigenvalues of the center.
pub fn dn_lower_bounds(
    cfg: &ValidatedConfig,
    plan: &CertificationPlan,
    k: usize,
) -> Result<(Vec<SpectralBound>, Rigor)> {
    lower::dn_lower_bounds(cfg, &plan.lower, k, &center_operator(cfg))
}

fn upper_margins(count: &Count, nu: &SpectralBound) -> Vec<Margin> {
    count.upper_bounds[..count.n.min(count.upper_bounds.len())]
        .iter()
        .map(|b| Margin {
            label: format!("ν − U_{}", b.index),
            value: nu.value - b.value,
            required: required_margin(b, nu),
        })
        .collect()
}

/// Runs the plan on `cfg`.
pub fn certify(cfg: &ValidatedConfig, plan: &CertificationPlan) -> Result<Verdict> {
    let nu = threshold(cfg);
    let count = count_discrete(cfg, plan, &nu)?;
    let mut margins = upper_margins(&count, &nu);
    let citations: Vec<String> = count.citation.iter().cloned().collect();
    if plan.lower == LowerMethod::ParityBlocks {
        return certify_parity(cfg, nu, count, margins, citations);
    }
    let n = count.n;
    let (lowers, lower_rigor) = dn_lower_bounds(cfg, plan, n + 1)?;
    if lower_rigor != Rigor::Heuristic {
        check_consistency(&dn_bracket(&lowers, nu.value, &waveguide_operator(cfg))?, &count.upper_bounds)?;
    }
    let next = &lowers[n];
    let required = required_margin(next, &nu);
    let margin = Margin { label: format!("L_{} − ν", n + 1), value: next.value - nu.value, required };
    let outcome = if margin.holds() {
        Outcome::CertifiedNoResonance { n_discrete: n }
    } else {
        Outcome::Inconclusive {
            reason: format!(
                "L_{} − ν = {:.6e} does not exceed the required margin {:.3e}",
                n + 1,
                margin.value,
                required
            ),
        }
    };
    margins.push(margin);
    Ok(Verdict {
        name: cfg.name().to_string(),
        threshold: nu,
        outcome,
        rigor: count.rigor.max(lower_rigor),
        margins,
        upper_bounds: count.upper_bounds,
        lower_bounds: lowers,
        parity_blocks: Vec::new(),
        truncation_runs: count.runs,
        citations,
    })
}

/// Each parity class is a sum of the quarter and half-strips. Eigenvalues
/// of the class below `ν` live in the quarter; a small potential on the
/// chosen summand separates them from the threshold, which requires the
/// next bound of that summand to clear `ν` strictly while the other
/// summands only need to stay at or above `ν`.
fn certify_parity(
    cfg: &ValidatedConfig,
    nu: SpectralBound,
    count: Count,
    mut margins: Vec<Margin>,
    citations: Vec<String>,
) -> Result<Verdict> {
    let blocks = lower::parity_blocks(cfg, &nu, |b| required_margin(b, &nu))?;
    let total: usize = blocks.iter().map(|b| b.below).sum();
    for b in &blocks {
        margins.push(Margin {
            label: format!("L[{}{}] {} − ν", b.parity.0, b.parity.1, b.perturbed),
            value: b.margin,
            required: b.required,
        });
    }
    let failing = blocks.iter().find(|b| b.margin <= b.required);
    let outcome = if total != count.n {
        Outcome::Inconclusive {
            reason: format!("parity blocks allow {total} eigenvalues below ν but {} were exhibited", count.n),
        }
    } else if let Some(b) = failing {
        Outcome::Inconclusive {
            reason: format!(
                "parity ({}, {}) margin {:.6e} does not exceed {:.3e}",
                b.parity.0, b.parity.1, b.margin, b.required
            ),
        }
    } else {
        Outcome::CertifiedNoResonance { n_discrete: total }
    };
    let lower_bounds = blocks.iter().flat_map(|b| b.quarter.iter().chain(&b.strips).cloned()).collect();
    Ok(Verdict {
        name: cfg.name().to_string(),
        threshold: nu,
        outcome,
        rigor: count.rigor.max(Rigor::Analytic),
        margins,
        upper_bounds: count.upper_bounds,
        lower_bounds,
        parity_blocks: blocks,
        truncation_runs: count.runs,
        citations,
    })
}
