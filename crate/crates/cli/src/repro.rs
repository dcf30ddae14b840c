//! `repro`: every example against its published target.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use anyhow::Result;
use star_spectra::bessel::bessel_zero;
use star_spectra::certify::{self, presets, Outcome};

pub struct Row {
    pub target: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
    pub seconds: f64,
}

fn timed(target: &str, f: impl FnOnce() -> Result<(String, String, bool)>) -> Row {
    let start = Instant::now();
    let (expected, observed, pass) = f().unwrap_or_else(|e| ("-".into(), format!("error: {e}"), false));
    Row { target: target.into(), expected, observed, pass, seconds: start.elapsed().as_secs_f64() }
}

/// Runs the presets in `only` (all of them when `None`); the family checks
/// only run with the full set.
pub fn run(only: Option<&[String]>) -> Result<Vec<Row>> {
    if let Some(names) = only {
        for n in names {
            certify::preset(n)?;
        }
    }
    let mut rows = Vec::new();
    for p in presets().into_iter().filter(|p| only.is_none_or(|o| o.iter().any(|n| n == p.name))) {
        rows.push(timed(p.name, || {
            let v = certify::certify(&p.config, &p.plan)?;
            let expected = match p.expected_n {
                Some(n) => format!("certified n={n}"),
                None => "inconclusive".into(),
            };
            let observed = match &v.outcome {
                Outcome::CertifiedNoResonance { n_discrete } => format!("certified n={n_discrete}"),
                Outcome::Inconclusive { .. } => "inconclusive".into(),
            };
            Ok((expected.clone(), observed.clone(), expected == observed))
        }));
    }
    if only.is_some() {
        return Ok(rows);
    }
    let step = 0.005;
    rows.push(timed("broken sweep threshold", || {
        let grid = certify::sweep_grid(0.35, 1.57, step)?;
        let points = certify::sweep_broken(&grid)?;
        let first = certify::certified_range(&points).map_or(f64::NAN, |r| r.0);
        let target = 0.408637;
        Ok((format!("{target} ± {step}"), format!("{first:.6}"), (first - target).abs() <= step))
    }));
    rows.push(timed("Y_α critical angles", || {
        let (a1, a2) = certify::y_alpha_critical_angles()?;
        let e1 = (13f64.sqrt() - 3.0).acos();
        let e2 = (4.0 / 3f64.sqrt()).atan();
        let pass = (a1 - e1).abs() < 1e-10 && (a2 - e2).abs() < 1e-10;
        Ok((format!("{e1:.12} {e2:.12}"), format!("{a1:.12} {a2:.12}"), pass))
    }));
    rows.push(timed("Y_α sweep range", || {
        let (e1, e2) = ((13f64.sqrt() - 3.0).acos(), (4.0 / 3f64.sqrt()).atan());
        let points = certify::sweep_y_alpha(&certify::sweep_grid(0.35, 1.57, step)?)?;
        let (lo, hi) = certify::certified_range(&points).unwrap_or((f64::NAN, f64::NAN));
        let pass = (lo - e1).abs() <= step && (hi - e2).abs() <= step;
        Ok((format!("({e1:.6}, {e2:.6}) ± {step}"), format!("[{lo:.6}, {hi:.6}]"), pass))
    }));
    rows.push(timed("rectangle region", || {
        let cells = certify::rectangle_region(100, 50)?;
        let inside: Vec<_> = cells.iter().filter(|c| c.inside).collect();
        let good = inside.iter().filter(|c| c.n == Some(2)).count();
        let pass = !inside.is_empty() && good == inside.len();
        Ok(("inside cells all n=2".into(), format!("{good}/{} inside cells n=2", inside.len()), pass))
    }));
    rows.push(timed("sector scan", || {
        let j01 = bessel_zero(0.0, 1)?;
        let mut ok = j01 < PI;
        for alpha in [PI / 6.0, PI / 4.0, PI / 3.0, PI / 2.0, 3.0 * PI / 4.0] {
            ok &= certify::sector_scan(alpha, 1.0, 20, 20)?.iter().all(|&(_, _, v)| v > PI * PI);
        }
        Ok(("j01 < π, other modes > π²".into(), format!("j01 = {j01:.10}"), ok))
    }));
    Ok(rows)
}

pub fn print_table(rows: &[Row], out: &mut impl Write) -> Result<()> {
    let w = rows.iter().map(|r| r.target.chars().count()).max().unwrap_or(0);
    for r in rows {
        let status = if r.pass { "PASS" } else { "FAIL" };
        writeln!(
            out,
            "{status}  {:<w$}  expected {}  observed {}  ({:.1} s)",
            r.target, r.expected, r.observed, r.seconds
        )?;
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    writeln!(out, "{} checks, {failed} failed", rows.len())?;
    Ok(())
}
