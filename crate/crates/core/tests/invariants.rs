//! Property tests of structural invariants across the modules.

use std::f64::consts::PI;

use layered_ac_core::assemble::{mat_mul, mat_pow, rotation_matrix, sector_index, transpose};
use layered_ac_core::grid::SymGrid;
use layered_ac_core::one_dim::{find_heteroclinics, phi1, HeteroclinicOptions, Profile1D, Seed};
use layered_ac_core::potential::PotentialSpec;
use layered_ac_core::prism3d::{CapCondition, Field3D, PrismGrid};
use layered_ac_core::strip2d::{extrapolate_m2, phi2l, truncate_r, Field2D, RenormLevel, YBoundary};
use proptest::prelude::*;

fn wedge_offset(y: f64, z: f64, k: usize, j: usize) -> f64 {
    let back = z.atan2(y) + k as f64 * PI / j as f64;
    (back - PI / 2.0 + PI).rem_euclid(2.0 * PI) - PI
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn every_point_lies_in_the_sector_it_is_assigned(
        j in 2usize..=8,
        y in -10.0f64..10.0,
        z in -10.0f64..10.0,
    ) {
        prop_assume!(y.hypot(z) > 1e-6);
        let k = sector_index(y, z, j);
        prop_assert!(k < 2 * j);
        prop_assert!(wedge_offset(y, z, k, j).abs() <= PI / (2.0 * j as f64) + 1e-12);
    }

    #[test]
    fn rotation_advances_the_sector_off_faces(j in 2usize..=8, y in -10.0f64..10.0, z in -10.0f64..10.0) {
        let k = sector_index(y, z, j);
        let off = wedge_offset(y, z, k, j);
        prop_assume!((off.abs() - PI / (2.0 * j as f64)).abs() > 1e-9 && y.hypot(z) > 1e-6);
        let a = rotation_matrix::<f64>(j).unwrap();
        let (ry, rz) = (a[1][1] * y + a[1][2] * z, a[2][1] * y + a[2][2] * z);
        prop_assert_eq!(sector_index(ry, rz, j), (k + 1) % (2 * j));
    }

    #[test]
    fn quarter_storage_round_trips(vals in proptest::collection::vec(-2.0f64..2.0, 2 * 6 * 4)) {
        let xg = SymGrid::new(1.0, 11).unwrap();
        let yg = SymGrid::new(0.6, 7).unwrap();
        let v = Field2D::from_quarter(xg, yg, YBoundary::Neumann, &vals);
        prop_assert_eq!(v.to_quarter(), vals);
    }

    #[test]
    fn symmetric_fields_are_determined_by_a_quarter(a in 0.2f64..3.0, c in -1.0f64..1.0) {
        let xg = SymGrid::new(2.0, 21).unwrap();
        let yg = SymGrid::new(1.0, 9).unwrap();
        let v = Field2D::from_fn(xg, yg, YBoundary::Neumann, |x: f64, y: f64| {
            [(a * x).tanh() * (1.0 + c * y * y), c * y / (1.0 + x * x)]
        });
        prop_assert!(v.symmetry_defect() < 1e-15);
        let back = Field2D::from_quarter(xg, yg, YBoundary::Neumann, &v.to_quarter());
        prop_assert_eq!(back, v);
    }

    #[test]
    fn prism_quarter_round_trips(j in 2usize..=4, a in 0.3f64..2.0) {
        let grid = PrismGrid { x_extent: 1.0, hx: 0.25, hy: 0.2, hz: 0.2 };
        let u = Field3D::from_fn(j, 1.2, &grid, CapCondition::Neumann, |x: f64, y: f64, z: f64| {
            [(a * x).tanh() * (1.0 + 0.1 * z), y * z / (1.0 + x * x)]
        })
        .unwrap();
        let mut v = u.clone();
        v.levels.iter_mut().flatten().for_each(|p| *p = [0.0, 0.0]);
        v.set_from_quarter(&u.to_quarter());
        prop_assert_eq!(v, u);
    }

    #[test]
    fn truncation_is_an_idempotent_clamp(
        vals in proptest::collection::vec(-5.0f64..5.0, 2 * 6 * 4),
        radius in 1.1f64..4.0,
    ) {
        let xg = SymGrid::new(1.0, 11).unwrap();
        let yg = SymGrid::new(0.6, 7).unwrap();
        let v = Field2D::from_quarter(xg, yg, YBoundary::Neumann, &vals);
        let t = truncate_r(&v, radius).unwrap();
        prop_assert!(t.sup_norm() <= radius * (1.0 + 1e-15));
        prop_assert_eq!(&truncate_r(&t, radius).unwrap(), &t);
        for (p, q) in v.values.iter().zip(&t.values) {
            if p[0].hypot(p[1]) <= radius {
                prop_assert_eq!(p, q);
            }
        }
    }

    #[test]
    fn extrapolation_recovers_exponential_limits(
        m2 in 1.0f64..4.0,
        amp in 0.5f64..5.0,
        rate in 0.3f64..2.5,
    ) {
        let ls: Vec<f64> = [0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0].to_vec();
        let values: Vec<f64> = ls.iter().map(|l| m2 - amp * (-rate * l).exp()).collect();
        let fit = extrapolate_m2(&ls, &values).unwrap();
        prop_assert!((fit.m2 - m2).abs() <= 1e-7 * m2, "m2 {} vs {}", fit.m2, m2);
        prop_assert!((fit.rate - rate).abs() <= 1e-4 * rate);
        prop_assert!(fit.m2 >= values[values.len() - 1]);
    }

    #[test]
    fn potential_is_invariant_under_both_reflections(
        alpha in 0.0f64..3.0,
        gamma in 0.05f64..1.0,
        x1 in -2.0f64..2.0,
        x2 in -2.0f64..2.0,
    ) {
        let p = PotentialSpec::abg(alpha, gamma);
        let w = p.w([x1, x2]);
        prop_assert_eq!(w, p.w([-x1, x2]));
        prop_assert_eq!(w, p.w([x1, -x2]));
        prop_assert!(w >= 0.0);
    }

    #[test]
    fn phi1_is_invariant_under_the_bar_map(b in -1.5f64..1.5, s in 0.5f64..3.0) {
        let p = PotentialSpec::abg(2.0, 0.3);
        let g = SymGrid::with_spacing(6.0, 0.1).unwrap();
        let q = Profile1D::from_fn(g, |x: f64| [(s * x).tanh(), b / (s * x).cosh()]);
        let (e, e_bar) = (phi1(&p, &q), phi1(&p, &q.bar()));
        prop_assert!((e - e_bar).abs() <= 1e-12 * e.abs());
    }
}

#[test]
fn rotations_are_orthogonal_with_period_2j() {
    for j in 2..=8 {
        let a = rotation_matrix::<f64>(j).unwrap();
        let ata = mat_mul(&transpose(&a), &a);
        let p = mat_pow(&a, 2 * j);
        for r in 0..3 {
            for c in 0..3 {
                let id = if r == c { 1.0 } else { 0.0 };
                assert!((ata[r][c] - id).abs() < 1e-12);
                assert!((p[r][c] - id).abs() < 1e-12);
            }
        }
    }
}

/// A y-constant extension of any minimizer has zero renormalized strip
/// energy, for every strip width.
#[test]
fn y_constant_minimizers_have_zero_strip_energy() {
    let p = PotentialSpec::abg(2.0, 0.3);
    let xg = SymGrid::with_spacing(6.0, 0.1).unwrap();
    let ms = find_heteroclinics(&p, xg, &Seed::standard(), &HeteroclinicOptions::default()).unwrap();
    let m1 = RenormLevel::of(&ms);
    for h in &ms.profiles {
        for (extent, n) in [(0.1f64, 3), (0.5, 11), (2.0, 21), (7.0, 71)] {
            let v = Field2D::constant_in_y(&h.profile, SymGrid::new(extent, n).unwrap(), YBoundary::Neumann);
            assert!(phi2l(&p, &m1, &v).unwrap().abs() <= 1e-10 * extent.max(1.0));
        }
    }
}
