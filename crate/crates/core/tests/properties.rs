use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;
use star_spectra::bessel::{bessel_j, bessel_zero, bessel_zero_lower_bound};
use star_spectra::bounds::{
    direct_sum, direct_sum_eigs, scale_bound, Direction, OperatorRef, Rule, SpectralBound, TraceStep,
};
use star_spectra::exact::{box_eigs, equilateral_eigs, interval_eigs, BCPair, EigList, TriangleBc};
use star_spectra::fem::{assemble, polygon_spectrum, triangulate};
use star_spectra::geom::{BoundaryCondition, EdgeRole, Polygon};

const PI2: f64 = PI * PI;

fn bc_pair() -> impl Strategy<Value = BCPair> {
    prop_oneof![Just(BCPair::DD), Just(BCPair::DN), Just(BCPair::ND), Just(BCPair::NN)]
}

fn mode(length: f64, bc: BCPair, n: u32) -> f64 {
    let n = n as f64;
    let q = match bc {
        BCPair::DD => n,
        BCPair::NN => n - 1.0,
        _ => n - 0.5,
    };
    (PI * q / length).powi(2)
}

fn brute_box(dims: &[f64], bcs: &[BCPair], cap: u32) -> Vec<f64> {
    let mut out = vec![0.0];
    for (d, bc) in dims.iter().zip(bcs) {
        out = out.iter().flat_map(|&acc| (1..=cap).map(move |n| acc + mode(*d, *bc, n))).collect();
    }
    out.sort_by(f64::total_cmp);
    out
}

fn lower(op: &str, values: &[f64]) -> Vec<SpectralBound> {
    values
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let step =
                TraceStep { rule: Rule::Numerical { method: "fixture".into() }, citation: "fixture".into(), value: v };
            SpectralBound::new(OperatorRef::new(op, "DN"), j + 1, Direction::LowerBound, step, 0.0)
        })
        .collect()
}

fn quad(tags: [BoundaryCondition; 4], w: f64, h: f64) -> Polygon {
    Polygon::new(vec![[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]], tags.to_vec(), vec![EdgeRole::Wall; 4]).unwrap()
}

proptest! {
    #[test]
    fn bessel_zeros_interlace(s in 0.0f64..25.0, k in 1usize..8) {
        let here = bessel_zero(s, k).unwrap();
        let up = bessel_zero(s + 1.0, k).unwrap();
        let next = bessel_zero(s, k + 1).unwrap();
        prop_assert!(here < up && up < next, "j({s},{k}) = {here}, j({},{k}) = {up}, j({s},{}) = {next}", s + 1.0, k + 1);
        prop_assert!(bessel_j(s, here).abs() < 1e-10);
    }

    #[test]
    fn zero_floor_is_below_the_zero(s in 0.0f64..40.0, k in 1usize..12) {
        prop_assert!(bessel_zero_lower_bound(s, k).unwrap() <= bessel_zero(s, k).unwrap());
    }

    #[test]
    fn direct_sum_is_a_sorted_union(
        a in 0.3f64..3.0,
        b in 0.3f64..3.0,
        side in 0.3f64..3.0,
        bc in bc_pair(),
        k in 1usize..15,
    ) {
        let parts: Vec<EigList> = vec![
            interval_eigs(a, bc, k),
            box_eigs(&[a, b], &[bc, BCPair::DN], k).unwrap(),
            equilateral_eigs(side, TriangleBc::AllDirichlet, k).unwrap(),
        ];
        let mut oracle: Vec<f64> = parts.iter().flat_map(|p| p.values()).collect();
        oracle.sort_by(f64::total_cmp);
        prop_assert_eq!(direct_sum_eigs(&parts).values(), oracle);
    }

    #[test]
    fn direct_sum_of_lower_bounds_stays_below(
        mut x in prop::collection::vec(0.0f64..50.0, 1..6),
        mut y in prop::collection::vec(0.0f64..50.0, 1..6),
    ) {
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        let merged = direct_sum(&[lower("a", &x), lower("b", &y)], &OperatorRef::new("a+b", "DN")).unwrap();
        // Any spectra above the bounds: pad each part with its last value.
        let n = x.len() + y.len();
        let mut worst: Vec<f64> = x.iter().chain(&y).copied().collect();
        worst.extend(std::iter::repeat_n(*x.last().unwrap(), n));
        worst.extend(std::iter::repeat_n(*y.last().unwrap(), n));
        worst.sort_by(f64::total_cmp);
        prop_assert_eq!(merged.len(), n);
        for (j, b) in merged.iter().enumerate() {
            prop_assert_eq!(b.index, j + 1);
            prop_assert!(b.value <= worst[j]);
        }
    }

    #[test]
    fn box_matches_enumeration(
        dims in prop::collection::vec(0.2f64..4.0, 1..=2),
        bcs in prop::collection::vec(bc_pair(), 2),
        k in 1usize..40,
    ) {
        let bcs = &bcs[..dims.len()];
        let got = box_eigs(&dims, bcs, k).unwrap().values();
        let brute = brute_box(&dims, bcs, 30);
        prop_assert_eq!(got.len(), k);
        for (g, w) in got.iter().zip(&brute) {
            assert_relative_eq!(*g, *w, max_relative = 1e-12);
        }
    }

    #[test]
    fn scaled_traces_replay(
        values in prop::collection::vec(0.1f64..100.0, 1..5),
        c1 in 0.2f64..5.0,
        c2 in 0.2f64..5.0,
        capped in any::<bool>(),
    ) {
        let src = lower("t", &values);
        let out = scale_bound(&src, &[c1, c2], capped, &OperatorRef::new("s", "DN")).unwrap();
        for b in &out {
            prop_assert!(b.replays_exactly());
            prop_assert_eq!(b.replay().unwrap().to_bits(), b.replay().unwrap().to_bits());
        }
        let again = scale_bound(&src, &[c1, c2], capped, &OperatorRef::new("s", "DN")).unwrap();
        prop_assert_eq!(out, again);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mass_matrix_integrates_to_area(w in 0.5f64..2.0, h in 0.5f64..2.0) {
        let poly = quad([BoundaryCondition::Neumann; 4], w, h);
        let mesh = triangulate(&poly, 0.25).unwrap();
        assert_relative_eq!(mesh.area(), w * h, max_relative = 1e-12);
        assert_relative_eq!(assemble(&mesh).mass.total(), w * h, max_relative = 1e-12);
    }

    #[test]
    fn spectrum_survives_rigid_motion(angle in 0.0f64..(2.0 * PI), dx in -3.0f64..3.0, dy in -3.0f64..3.0) {
        let (d, n) = (BoundaryCondition::Dirichlet, BoundaryCondition::Neumann);
        let poly = quad([d, n, n, n], 1.3, 0.8);
        let moved = poly.rigid_motion(angle, [dx, dy]);
        let a = polygon_spectrum(&poly, 3, 0.25, 1).unwrap();
        let b = polygon_spectrum(&moved, 3, 0.25, 1).unwrap();
        for (x, y) in a.finest().iter().zip(b.finest()) {
            assert_relative_eq!(*x, *y, max_relative = 1e-10);
        }
    }

    #[test]
    fn refinement_lowers_upper_bounds(w in 0.6f64..1.6, h in 0.6f64..1.6) {
        let (d, n) = (BoundaryCondition::Dirichlet, BoundaryCondition::Neumann);
        let poly = quad([d, n, d, n], w, h);
        let exact = box_eigs(&[w, h], &[BCPair::NN, BCPair::DD], 3).unwrap().values();
        let spec = polygon_spectrum(&poly, 3, 0.25, 3).unwrap();
        for (j, e) in exact.iter().enumerate() {
            let seq: Vec<f64> = spec.levels.iter().map(|l| l.values[j]).collect();
            prop_assert!(seq.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-9)), "{seq:?}");
            prop_assert!(seq.iter().all(|&v| v >= e * (1.0 - 1e-9)), "{seq:?} vs {e}");
        }
    }
}

#[test]
fn boundary_conditions_order_the_square() {
    use BoundaryCondition::{Dirichlet as D, Neumann as N};
    let k = 4;
    let spectra: Vec<Vec<f64>> = [[D; 4], [D, D, D, N], [D, N, N, N], [N; 4]]
        .into_iter()
        .map(|tags| polygon_spectrum(&quad(tags, 1.0, 1.0), k, 0.25, 3).unwrap().finest().to_vec())
        .collect();
    for pair in spectra.windows(2) {
        for j in 0..k {
            assert!(pair[0][j] >= pair[1][j] * (1.0 - 1e-9), "{:?} vs {:?}", pair[0], pair[1]);
        }
    }
    assert!(spectra[0][0] >= 2.0 * PI2);
}
