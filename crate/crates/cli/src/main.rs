use std::f64::consts::PI;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use star_spectra::certify::{self, CertificationPlan, Verdict, PRESET_NAMES};
use star_spectra::exact::{box_eigs, equilateral_eigs, interval_eigs, sector_dn_eigs, BCPair, EigList, TriangleBc};
use star_spectra::fem::{refine, triangulate};
use star_spectra::geom::{truncate, validate_config, StarWaveguideConfig, ValidatedConfig};
use star_spectra::report;

mod repro;

/// Spectral certification of star waveguide junctions.
///
/// Exit status: 0 when every requested certificate holds, 2 when a verdict
/// is inconclusive, 1 on errors. STAR_SPECTRA_THREADS caps the worker count.
#[derive(Parser, Debug)]
#[command(name = "star-spectra", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify absence of threshold resonances for a config or preset.
    Certify {
        /// TOML config, optionally with a `[plan]` table.
        config: Option<PathBuf>,
        /// Named preset instead of a config file.
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        /// Override the number of nested FEM levels.
        #[arg(long)]
        levels: Option<usize>,
        /// Override the truncation length of the branch stubs.
        #[arg(long)]
        truncation: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write to this file instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Closed-form eigenvalues of the model domains.
    Spectrum {
        #[arg(long, value_enum)]
        shape: Shape,
        /// `dirichlet` or `neumann` for the triangle; comma-separated pairs
        /// such as `DN,NN` (one per axis) for boxes and intervals.
        #[arg(long, default_value = "dirichlet")]
        bc: String,
        /// Triangle side.
        #[arg(long, default_value_t = 1.0)]
        side: f64,
        /// Comma-separated box dimensions, or the interval length.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        dims: Vec<f64>,
        /// Sector opening angle.
        #[arg(long, default_value_t = PI / 2.0)]
        alpha: f64,
        /// Sector radius.
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(short, default_value_t = 5)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Angle sweep of a one-parameter family, as CSV.
    Sweep {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, default_value_t = 0.35)]
        lo: f64,
        #[arg(long, default_value_t = 1.57)]
        hi: f64,
        #[arg(long, default_value_t = 0.005)]
        step: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Certified region of the rectangle family in (1/a, 1/b), as CSV.
    Region {
        #[arg(long, default_value_t = 100)]
        nx: usize,
        #[arg(long, default_value_t = 50)]
        ny: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Dump the mesh of a truncated planar junction.
    Mesh {
        config: Option<PathBuf>,
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        /// Stub length; defaults to three branch widths.
        #[arg(long)]
        truncation: Option<f64>,
        /// Coarse mesh size.
        #[arg(long, default_value_t = 0.25)]
        h: f64,
        /// Uniform refinements of the coarse mesh.
        #[arg(long, default_value_t = 0)]
        refinements: usize,
        #[arg(long, value_enum, default_value_t = MeshFormat::Text)]
        format: MeshFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the examples and compare with the published targets.
    Repro {
        /// Run every preset and family check.
        #[arg(long)]
        all: bool,
        /// Only these presets.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MeshFormat {
    Text,
    Svg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Shape {
    Equilateral,
    Box,
    Sector,
    Interval,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    Broken,
    YAlpha,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("STAR_SPECTRA_THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().with_context(|| format!("STAR_SPECTRA_THREADS={raw:?} is not a count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Certify { config, preset, levels, truncation, format, output } => {
            let (cfg, mut plan) = load_case(config.as_deref(), preset.as_deref())?;
            if let Some(l) = levels {
                plan.levels = l;
            }
            if truncation.is_some() {
                plan.truncation_length = truncation;
            }
            let verdict = certify::certify(&cfg, &plan)?;
            let text = match format {
                Format::Json => report::versioned_json(&verdict)?,
                Format::Text => report::summary(&verdict) + "\n",
            };
            emit(output.as_deref(), &text)?;
            if matches!(format, Format::Json) && output.is_some() {
                eprintln!("{}", report::summary(&verdict));
            }
            Ok(exit_code(&verdict))
        }
        Command::Spectrum { shape, bc, side, dims, alpha, radius, k, format } => {
            let list = spectrum(shape, &bc, side, &dims, alpha, radius, k)?;
            let text = match format {
                Format::Json => report::to_json(&list)?,
                Format::Text => {
                    list.values().iter().enumerate().map(|(i, v)| format!("{} {v:.16e}\n", i + 1)).collect()
                }
            };
            emit(None, &text)?;
            Ok(0)
        }
        Command::Sweep { family, lo, hi, step, output } => {
            let grid = certify::sweep_grid(lo, hi, step)?;
            let points = match family {
                Family::Broken => certify::sweep_broken(&grid)?,
                Family::YAlpha => certify::sweep_y_alpha(&grid)?,
            };
            emit(output.as_deref(), &csv_string(&points)?)?;
            match certify::certified_range(&points) {
                Some((a, b)) => eprintln!("certified on [{a:.6}, {b:.6}] ({} points)", points.len()),
                None => eprintln!("no certified angle on the grid"),
            }
            match family {
                Family::Broken => eprintln!("critical angle {:.12}", certify::broken_critical_angle()?),
                Family::YAlpha => {
                    let (a1, a2) = certify::y_alpha_critical_angles()?;
                    eprintln!("critical angles {a1:.12} {a2:.12}");
                }
            }
            Ok(0)
        }
        Command::Region { nx, ny, output } => {
            if nx < 10 || ny < 10 {
                bail!("region grid needs at least 10 cells per axis, got {nx}x{ny}");
            }
            let cells = certify::rectangle_region(nx, ny)?;
            emit(output.as_deref(), &csv_string(&cells)?)?;
            let inside = cells.iter().filter(|c| c.inside).count();
            let certified = cells.iter().filter(|c| c.certified).count();
            eprintln!("{inside} cells inside, {certified} certified");
            Ok(0)
        }
        Command::Mesh { config, preset, truncation, h, refinements, format, output } => {
            let (cfg, _) = load_case(config.as_deref(), preset.as_deref())?;
            if !cfg.center().is_planar() {
                bail!("{} has a three-dimensional center; only planar meshes are dumped", cfg.name());
            }
            let width = cfg.branches().iter().map(|b| b.cross_section.max_width()).fold(0.0, f64::max);
            let poly = truncate(&cfg, truncation.unwrap_or(3.0 * width))?;
            let mut mesh = triangulate(&poly, h)?;
            for _ in 0..refinements {
                mesh = refine(&mesh);
            }
            let text = match format {
                MeshFormat::Text => mesh.to_text(),
                MeshFormat::Svg => mesh.to_svg(),
            };
            emit(output.as_deref(), &text)?;
            eprintln!(
                "{} nodes, {} triangles, min angle {:.2} deg",
                mesh.nodes.len(),
                mesh.triangles.len(),
                mesh.min_angle_deg()
            );
            Ok(0)
        }
        Command::Repro { all, only } => {
            if !all && only.is_empty() {
                bail!("pass --all or --only <presets>");
            }
            let rows = repro::run(if all { None } else { Some(&only) })?;
            let mut out = io::stdout().lock();
            repro::print_table(&rows, &mut out)?;
            Ok(if rows.iter().all(|r| r.pass) { 0 } else { 2 })
        }
    }
}

fn exit_code(v: &Verdict) -> u8 {
    if v.is_certified() {
        0
    } else {
        2
    }
}

/// Config and plan from a TOML file or a preset name.
fn load_case(path: Option<&Path>, preset: Option<&str>) -> Result<(ValidatedConfig, CertificationPlan)> {
    match (path, preset) {
        (Some(p), None) => {
            let src = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let cfg = validate_config(StarWaveguideConfig::from_toml_str(&src)?)?;
            let plan = CertificationPlan::from_toml_section(&src)?.unwrap_or_default();
            Ok((cfg, plan))
        }
        (None, Some(name)) => {
            let p = certify::preset(name)?;
            Ok((p.config, p.plan))
        }
        _ => bail!("give a config path or --preset (one of {})", PRESET_NAMES.join(", ")),
    }
}

fn parse_pairs(s: &str) -> Result<Vec<BCPair>> {
    s.split(',')
        .map(|t| match t.trim().to_ascii_uppercase().as_str() {
            "DD" => Ok(BCPair::DD),
            "DN" => Ok(BCPair::DN),
            "ND" => Ok(BCPair::ND),
            "NN" => Ok(BCPair::NN),
            other => bail!("unknown boundary pair {other:?}; use DD, DN, ND or NN"),
        })
        .collect()
}

fn spectrum(shape: Shape, bc: &str, side: f64, dims: &[f64], alpha: f64, radius: f64, k: usize) -> Result<EigList> {
    Ok(match shape {
        Shape::Equilateral => {
            let tbc = match bc.to_ascii_lowercase().as_str() {
                "dirichlet" | "d" => TriangleBc::AllDirichlet,
                "neumann" | "n" => TriangleBc::AllNeumann,
                other => bail!("triangle boundary condition must be dirichlet or neumann, got {other:?}"),
            };
            equilateral_eigs(side, tbc, k)?
        }
        Shape::Box => {
            let mut pairs = parse_pairs(if bc == "dirichlet" { "DD" } else { bc })?;
            if pairs.len() == 1 {
                pairs = vec![pairs[0]; dims.len()];
            }
            box_eigs(dims, &pairs, k)?
        }
        Shape::Interval => {
            let [length] = dims else { bail!("an interval takes one length, got {dims:?}") };
            let pairs = parse_pairs(if bc == "dirichlet" { "DD" } else { bc })?;
            let [pair] = pairs[..] else { bail!("an interval takes one boundary pair") };
            interval_eigs(*length, pair, k)
        }
        Shape::Sector => sector_dn_eigs(alpha, radius, k, (k + 10, k + 10))?,
    })
}

fn csv_string<T: serde::Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}
