//! The named examples and their certification plans.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use super::{CertificationPlan, Counting, LowerMethod};
use crate::error::Result;
use crate::geom::{
    broken_waveguide, crossing_strips, cube_disk_branches, cube_square_branches, rectangle_family, rounded_corner,
    t_junction, y_alpha, y_junction, ValidatedConfig,
};

pub const PRESET_NAMES: [&str; 9] = [
    "t_junction",
    "y_junction",
    "crossing_strips",
    "crossing_strips_symmetric",
    "rounded_corner",
    "broken_waveguide",
    "rectangle_family",
    "cube_square_branches",
    "cube_disk_branches",
];

/// Angle of the broken-waveguide preset.
pub const BROKEN_PRESET_ALPHA: f64 = 1.0;

/// Side lengths of the rectangle preset.
pub const RECTANGLE_PRESET: (f64, f64) = (2.381, 2.041);

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub config: ValidatedConfig,
    pub plan: CertificationPlan,
    /// Number of discrete eigenvalues a successful certificate reports;
    /// `None` when the preset is expected to stay inconclusive.
    pub expected_n: Option<usize>,
}

/// Plan for the broken waveguide of angle `alpha` with cited existence,
/// cheap enough for sweeps.
pub fn broken_plan(alpha: f64) -> CertificationPlan {
    CertificationPlan {
        counting: Counting::Cited {
            n: 1,
            reference: "broken waveguides have a discrete eigenvalue below the threshold for every angle".into(),
        },
        lower: LowerMethod::BrokenChain { alpha },
        ..CertificationPlan::default()
    }
}

/// Plan for `Y_α` with cited existence.
pub fn y_alpha_plan(alpha: f64) -> CertificationPlan {
    CertificationPlan {
        counting: Counting::Cited {
            n: 1,
            reference: "Y_α contains a broken waveguide, whose first eigenvalue lies below the threshold".into(),
        },
        lower: LowerMethod::YAlphaChain { alpha },
        ..CertificationPlan::default()
    }
}

fn build(name: &'static str) -> Result<Preset> {
    let default = CertificationPlan::default();
    let (config, plan, expected_n) = match name {
        "t_junction" => (t_junction(), default, Some(1)),
        "y_junction" => (y_junction(), default, Some(1)),
        "crossing_strips" => (crossing_strips(false), default, None),
        "crossing_strips_symmetric" => {
            (crossing_strips(true), CertificationPlan { lower: LowerMethod::ParityBlocks, ..default }, Some(1))
        }
        // The ground state sits close to the threshold, so the stubs are
        // longer and the mesh one level finer.
        "rounded_corner" => (
            rounded_corner(FRAC_PI_2)?,
            CertificationPlan { truncation_length: Some(6.0), levels: 3, ..default },
            Some(1),
        ),
        "broken_waveguide" => (
            broken_waveguide(BROKEN_PRESET_ALPHA)?,
            CertificationPlan { lower: LowerMethod::BrokenChain { alpha: BROKEN_PRESET_ALPHA }, ..default },
            Some(1),
        ),
        "rectangle_family" => (
            rectangle_family(RECTANGLE_PRESET.0, RECTANGLE_PRESET.1)?,
            CertificationPlan { counting: Counting::DirichletBox, ..default },
            Some(2),
        ),
        "cube_square_branches" => (
            cube_square_branches(),
            CertificationPlan { counting: Counting::BrokenProduct { alpha: FRAC_PI_4, length: 1.0 }, ..default },
            Some(1),
        ),
        "cube_disk_branches" => (
            cube_disk_branches(),
            CertificationPlan {
                counting: Counting::Cited {
                    n: 1,
                    reference: "sharply bent cylinders have a discrete eigenvalue below the threshold".into(),
                },
                ..default
            },
            Some(1),
        ),
        other => return Err(crate::Error::Config(format!("unknown preset {other:?}"))),
    };
    Ok(Preset { name, config, plan, expected_n })
}

pub fn preset(name: &str) -> Result<Preset> {
    let known = PRESET_NAMES
        .iter()
        .find(|n| **n == name)
        .ok_or_else(|| crate::Error::Config(format!("unknown preset {name:?}; known: {}", PRESET_NAMES.join(", "))))?;
    build(known)
}

pub fn presets() -> Vec<Preset> {
    PRESET_NAMES.iter().map(|n| build(n).expect("preset geometry is valid")).collect()
}

/// `Y_α` config and plan, for sweeps.
pub(crate) fn y_alpha_case(alpha: f64) -> Result<(ValidatedConfig, CertificationPlan)> {
    Ok((y_alpha(alpha)?, y_alpha_plan(alpha)))
}
