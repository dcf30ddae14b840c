//! Acceptance targets, one line per criterion. Runs as a plain binary so
//! the lines come out in order even under `cargo test`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use star_spectra::bessel::{bessel_zero, bessel_zero_lower_bound};
use star_spectra::bounds::{check_consistency, direct_sum_eigs, dn_bracket, Direction};
use star_spectra::certify::{self, presets, sector_tail_floor, Outcome, Verdict};
use star_spectra::exact::{box_eigs, cross_section_threshold, equilateral_eigs, BCPair, EigList, TriangleBc};
use star_spectra::fem::polygon_spectrum;
use star_spectra::geom::{BoundaryCondition, CrossSection, EdgeRole, Polygon};

const PI2: f64 = PI * PI;
const STEP: f64 = 0.005;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(budget: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took <= budget, format!("took {took:.1?}, budget {budget:?}"))
}

fn s<T>(r: Result<T, impl std::fmt::Display>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn nth(list: &EigList, i: usize) -> Result<f64, String> {
    list.get(i).ok_or_else(|| format!("missing eigenvalue {}", i + 1))
}

fn exact_catalog() -> Check {
    let start = Instant::now();
    let sq = s(box_eigs(&[1.0, 1.0], &[BCPair::NN, BCPair::DN], 2))?;
    let neu = s(equilateral_eigs(1.0, TriangleBc::AllNeumann, 2))?;
    let dir = s(equilateral_eigs(2.0 * 3f64.sqrt(), TriangleBc::AllDirichlet, 4))?;
    let cube = s(box_eigs(&[1.0; 3], &[BCPair::DN; 3], 2))?;
    let disk = cross_section_threshold(&CrossSection::Disk { radius: 0.5 });
    let j01 = 2.404825557695773;
    let checks = [
        ("DN square λ2", nth(&sq, 1)?, 5.0 * PI2 / 4.0, 1e-12),
        ("Neumann triangle λ2", nth(&neu, 1)?, 16.0 * PI2 / 9.0, 1e-12),
        ("Dirichlet triangle λ1", nth(&dir, 0)?, 4.0 * PI2 / 9.0, 1e-12),
        ("Dirichlet triangle λ4", nth(&dir, 3)?, 16.0 * PI2 / 9.0, 1e-12),
        ("DN cube λ2", nth(&cube, 1)?, 11.0 * PI2 / 4.0, 1e-12),
        ("Disk(1/2) ν", disk, 4.0 * j01 * j01, 1e-5),
    ];
    for (what, got, want, tol) in checks {
        ensure(rel(got, want) <= tol, format!("{what}: {got} vs {want}"))?;
    }
    within(Duration::from_secs(1), start)?;
    Ok(format!("6 closed forms, ν(Disk 1/2) = {disk:.6}"))
}

fn fem_convergence() -> Check {
    let start = Instant::now();
    let (d, n) = (BoundaryCondition::Dirichlet, BoundaryCondition::Neumann);
    let square = s(Polygon::new(
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        vec![d, n, n, n],
        vec![EdgeRole::Wall; 4],
    ))?;
    let tri =
        s(Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [0.5, 0.75f64.sqrt()]], vec![n; 3], vec![EdgeRole::Wall; 3]))?;
    let mut detail = Vec::new();
    for (name, poly, exact) in [("DN square", square, 5.0 * PI2 / 4.0), ("Neumann triangle", tri, 16.0 * PI2 / 9.0)] {
        let spec = s(polygon_spectrum(&poly, 2, 0.25, 4))?;
        let seq: Vec<f64> = spec.levels.iter().map(|l| l.values[1]).collect();
        ensure(
            seq.iter().all(|&v| v >= exact * (1.0 - 1e-9)),
            format!("{name}: a level falls below λ2 = {exact}: {seq:?}"),
        )?;
        ensure(seq.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)), format!("{name}: levels not monotone: {seq:?}"))?;
        let err = rel(spec.extrapolated[1], exact);
        ensure(err <= 5e-3, format!("{name}: extrapolated λ2 off by {:.3}%", 100.0 * err))?;
        detail.push(format!("{name} {:.4}%", 100.0 * err));
    }
    within(Duration::from_secs(30), start)?;
    Ok(detail.join(", "))
}

fn broken_waveguide() -> Check {
    let start = Instant::now();
    let exact = (3f64.sqrt() / 4.0).atan();
    let critical = s(certify::broken_critical_angle())?;
    ensure((critical - exact).abs() < 1e-10, format!("critical angle {critical} vs arctan(√3/4) = {exact}"))?;
    for (alpha, want) in [(exact - 1e-6, false), (exact + 1e-6, true), (0.3, false), (1.2, true)] {
        let v = s(certify::certify(&s(star_spectra::geom::broken_waveguide(alpha))?, &certify::broken_plan(alpha)))?;
        ensure(v.is_certified() == want, format!("α = {alpha}: certified {} expected {want}", v.is_certified()))?;
    }
    let points = s(certify::sweep_broken(&s(certify::sweep_grid(0.35, 1.57, STEP))?))?;
    let (first, last) = certify::certified_range(&points).ok_or("sweep certifies nothing")?;
    ensure((first - 0.408637).abs() <= STEP, format!("sweep threshold {first}"))?;
    ensure(points.iter().all(|p| p.certified == (p.alpha > exact)), "sweep verdicts disagree with the closed form")?;
    ensure((last - 1.57).abs() < 1e-9, format!("sweep stops certifying at {last}"))?;
    within(Duration::from_secs(60), start)?;
    Ok(format!("critical {critical:.9}, sweep threshold {first:.3}"))
}

fn y_alpha_family() -> Check {
    let (e1, e2) = ((13f64.sqrt() - 3.0).acos(), (4.0 / 3f64.sqrt()).atan());
    let (a1, a2) = s(certify::y_alpha_critical_angles())?;
    ensure((a1 - e1).abs() < 1e-10 && (a2 - e2).abs() < 1e-10, format!("roots {a1}, {a2} vs {e1}, {e2}"))?;
    let points = s(certify::sweep_y_alpha(&s(certify::sweep_grid(0.35, 1.57, STEP))?))?;
    let (lo, hi) = certify::certified_range(&points).ok_or("sweep certifies nothing")?;
    ensure((lo - e1).abs() <= STEP && (hi - e2).abs() <= STEP, format!("certified [{lo}, {hi}]"))?;
    let contiguous = points.iter().all(|p| p.certified == (p.alpha >= lo && p.alpha <= hi));
    ensure(contiguous, "certified angles are not an interval")?;
    Ok(format!("α1 = {a1:.12}, α2 = {a2:.12}, sweep [{lo:.3}, {hi:.3}]"))
}

fn preset_verdict(name: &str) -> Result<Verdict, String> {
    let p = s(certify::preset(name))?;
    s(certify::certify(&p.config, &p.plan))
}

fn crossing_strips() -> Check {
    let plain = preset_verdict("crossing_strips")?;
    ensure(matches!(plain.outcome, Outcome::Inconclusive { .. }), "plain crossing certified")?;
    let m = plain.lower_margin().ok_or("no lower margin")?;
    ensure(m.value.abs() < 1e-12, format!("plain crossing margin {} not zero", m.value))?;
    let sym = preset_verdict("crossing_strips_symmetric")?;
    ensure(sym.n_discrete() == Some(1), format!("symmetric crossing: {:?}", sym.outcome))?;
    let block = |p: (u8, u8)| sym.parity_blocks.iter().find(|b| b.parity == p).ok_or(format!("no block {p:?}"));
    let close = |a: f64, b: f64| rel(a, b) < 1e-12;
    let odd = block((1, 1))?;
    ensure(close(odd.quarter[0].value, 2.0 * PI2) && odd.below == 0, "odd-odd floor is not 2π²")?;
    for (p, strip) in [((1, 0), 1), ((0, 1), 0)] {
        let b = block(p)?;
        ensure(b.quarter[0].value >= PI2 * (1.0 - 1e-12) && b.below == 0, format!("{p:?} quarter floor below π²"))?;
        ensure(close(b.strips[strip].value, 4.0 * PI2), format!("{p:?} orthogonal strip floor is not 4π²"))?;
    }
    let even = block((0, 0))?;
    ensure(even.below == 1 && close(even.quarter[1].value, 4.0 * PI2), "even-even next floor is not 4π²")?;
    Ok("plain margin 0, symmetric floors 2π², π²|4π², π²|4π², 4π²".into())
}

fn rectangle_family() -> Check {
    let v = preset_verdict("rectangle_family")?;
    ensure(v.n_discrete() == Some(2), format!("sample point: {:?}", v.outcome))?;
    let cells = s(certify::rectangle_region(100, 50))?;
    let inside: Vec<_> = cells.iter().filter(|c| c.inside).collect();
    ensure(!inside.is_empty(), "region is empty")?;
    ensure(inside.iter().all(|c| c.n == Some(2)), "an inside cell does not certify n = 2")?;
    ensure(certify::rectangle_conditions(0.42, 0.49), "(0.42, 0.49) outside")?;
    ensure(s(certify::certify_rectangle(0.42, 0.49))?.n_discrete() == Some(2), "(0.42, 0.49) not n = 2")?;
    ensure(!certify::rectangle_conditions(0.1, 0.1), "(0.1, 0.1) inside")?;
    ensure(!certify::rectangle_conditions(0.42, 0.5), "y = 1/2 inside")?;
    // Only the last inequality fails here.
    let (x, y) = (0.42, 0.45);
    ensure(4.0 * x * x + y * y < 1.0 && 6.25 * x * x + y * y > 1.0 && x * x / 4.0 + 4.0 * y * y < 1.0, "bad probe")?;
    let off = s(certify::certify_rectangle(x, y))?;
    ensure(off.n_discrete() != Some(2), "(0.42, 0.45) certified n = 2")?;
    Ok(format!("{} inside cells all n = 2, (0.42, 0.45) gives {:?}", inside.len(), off.n_discrete()))
}

fn rounded_corner() -> Check {
    let j01 = s(bessel_zero(0.0, 1))?;
    ensure(j01 < PI, format!("j01 = {j01}"))?;
    for alpha in [PI / 6.0, PI / 4.0, PI / 3.0, PI / 2.0, 3.0 * PI / 4.0] {
        let scan = s(certify::sector_scan(alpha, 1.0, 20, 20))?;
        ensure(scan.iter().all(|&(_, _, v)| v > PI2), format!("α = {alpha}: scan dips below π²"))?;
        for f in sector_tail_floor(alpha, 1.0) {
            ensure(s(f.eval())? > PI2, format!("α = {alpha}: tail floor {f:?} below π²"))?;
        }
    }
    let v = preset_verdict("rounded_corner")?;
    ensure(v.n_discrete() == Some(1), format!("rounded corner: {:?}", v.outcome))?;
    Ok(format!("j01 = {j01:.10}, 5 angles clear π²"))
}

fn property_grids() -> Check {
    for s_ in [0.0, 0.5, 1.0, 2.5, 6.0, 12.0] {
        for k in 1..=8 {
            let z = s(bessel_zero(s_, k))?;
            ensure(
                z < s(bessel_zero(s_ + 1.0, k))? && s(bessel_zero(s_ + 1.0, k))? < s(bessel_zero(s_, k + 1))?,
                format!("interlacing at ({s_}, {k})"),
            )?;
            ensure(s(bessel_zero_lower_bound(s_, k))? <= z, format!("floor above j_({s_},{k})"))?;
        }
    }
    let parts = [
        s(box_eigs(&[1.0, 2.0], &[BCPair::DD, BCPair::NN], 12))?,
        s(equilateral_eigs(1.3, TriangleBc::AllNeumann, 12))?,
        s(box_eigs(&[0.7], &[BCPair::DN], 12))?,
    ];
    let mut oracle: Vec<f64> = parts.iter().flat_map(|p| p.values()).collect();
    oracle.sort_by(f64::total_cmp);
    ensure(direct_sum_eigs(&parts).values() == oracle, "direct sum differs from sorted union")?;
    let (a, b) = (1.0, 1.7);
    let got = s(box_eigs(&[a, b], &[BCPair::DD, BCPair::DN], 40))?.values();
    let mut brute: Vec<f64> = (1..=30)
        .flat_map(|m| (0..30).map(move |n| PI2 * ((m * m) as f64 / (a * a) + (n as f64 + 0.5).powi(2) / (b * b))))
        .collect();
    brute.sort_by(f64::total_cmp);
    ensure(got.iter().zip(&brute).all(|(g, w)| rel(*g, *w) < 1e-12), "box_eigs differs from enumeration")?;
    let mut replayed = 0;
    let mut consistent = 0;
    for p in presets() {
        let v = s(certify::certify(&p.config, &p.plan))?;
        for bound in v.lower_bounds.iter().chain(&v.upper_bounds).chain(std::iter::once(&v.threshold)) {
            ensure(
                bound.replays_exactly() && s(bound.replay())? == s(bound.replay())?,
                format!("{}: trace does not replay", p.name),
            )?;
            replayed += 1;
        }
        if v.parity_blocks.is_empty() {
            let bracket = s(dn_bracket(&v.lower_bounds, v.nu(), &certify::waveguide_operator(&p.config)))?;
            s(check_consistency(&bracket, &v.upper_bounds))?;
            consistent += bracket
                .iter()
                .filter(|l| {
                    v.upper_bounds
                        .iter()
                        .any(|u| u.direction == Direction::UpperBound && u.index == l.index && u.operator == l.operator)
                })
                .count();
        }
    }
    ensure(consistent > 0, "consistency check compared nothing")?;
    Ok(format!("{replayed} traces replay, {consistent} lower/upper pairs consistent"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("exact catalog", exact_catalog),
        ("FEM convergence", fem_convergence),
        ("broken waveguide", broken_waveguide),
        ("Y_α family", y_alpha_family),
        ("crossing strips", crossing_strips),
        ("rectangle family", rectangle_family),
        ("rounded corner", rounded_corner),
        ("property grids", property_grids),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail} ({took:.1} s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why} ({took:.1} s)", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
