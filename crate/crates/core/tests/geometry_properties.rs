use std::f64::consts::PI;

use blowdown::geometry::{exp_map, log_map, normal_coordinates, normal_metric, ManifoldModel, Profile, TangentVector};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn bump_sor() -> ManifoldModel {
    ManifoldModel::surface_of_revolution(Profile::PerturbedSine { amplitude: 0.2, center: PI / 2.0, width: 0.6 })
        .unwrap()
}

fn ellipsoid() -> ManifoldModel {
    ManifoldModel::triaxial_ellipsoid(1.0, 0.8, 0.6).unwrap()
}

/// Connection coefficients from central differences of the metric.
fn christoffel_oracle(m: &ManifoldModel, u: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let n = u.len();
    let h = 1e-5;
    let dg: Vec<DMatrix<f64>> = (0..n)
        .map(|l| {
            let mut up = u.to_vec();
            let mut dn = u.to_vec();
            up[l] += h;
            dn[l] -= h;
            (m.metric_at(&up).unwrap() - m.metric_at(&dn).unwrap()) / (2.0 * h)
        })
        .collect();
    let ginv = m.metric_at(u).unwrap().try_inverse().unwrap();
    let mut gam = vec![vec![vec![0.0; n]; n]; n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                for l in 0..n {
                    v += 0.5 * ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                gam[k][i][j] = v;
            }
        }
    }
    gam
}

fn christoffel_error(m: &ManifoldModel, u: &[f64]) -> f64 {
    let got = m.christoffel_at(u).unwrap();
    let want = christoffel_oracle(m, u);
    let n = u.len();
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((got.get(k, i, j) - want[k][i][j]).abs());
            }
        }
    }
    worst
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
}

/// A point of `m` together with a tangent vector of length below `0.8 inj`.
fn sample(m: &ManifoldModel, u0: f64, u1: f64, angle: f64, frac: f64) -> (Vec<f64>, TangentVector) {
    let z = match m.representation() {
        blowdown::geometry::Representation::Embedded => m.chart_to_native(&[u0, u1]).unwrap(),
        blowdown::geometry::Representation::Chart => vec![u0, u1],
    };
    let len = frac * 0.8 * m.injectivity_radius();
    let v = TangentVector::new(z.clone(), vec![len * angle.cos(), len * angle.sin()]);
    (z, v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn connection_matches_metric_derivatives_on_revolution_surface(s in 0.2..(PI - 0.2), th in -PI..PI) {
        prop_assert!(christoffel_error(&bump_sor(), &[s, th]) < 1e-6);
    }

    #[test]
    fn connection_matches_metric_derivatives_on_ellipsoid(u in 0.2..(PI - 0.2), v in -PI..PI) {
        let m = ellipsoid();
        prop_assert!(christoffel_error(&m, &[u, v]) < 1e-6);
        prop_assert!(m.christoffel_at(&[u, v]).unwrap().symmetry_defect() < 1e-12);
    }

    #[test]
    fn connection_matches_metric_derivatives_on_three_sphere(a in 0.2..(PI - 0.2), b in 0.2..(PI - 0.2), c in -PI..PI) {
        let m = ManifoldModel::round_sphere(3, 1.5).unwrap();
        prop_assert!(christoffel_error(&m, &[a, b, c]) < 1e-6);
    }

    #[test]
    fn torus_connection_vanishes(x in -10.0..10.0f64, y in -10.0..10.0f64) {
        let g = ManifoldModel::square_torus(3.0).christoffel_at(&[x, y]).unwrap();
        for k in 0..2 { for i in 0..2 { for j in 0..2 {
            prop_assert_eq!(g.get(k, i, j), 0.0);
        }}}
    }

    #[test]
    fn exp_log_roundtrip(which in 0usize..4, u0 in 0.3..(PI - 0.3), u1 in -PI..PI, angle in 0.0..(2.0 * PI), frac in 0.01..1.0f64) {
        let m = match which {
            0 => ManifoldModel::unit_sphere(),
            1 => ManifoldModel::flat_torus([[2.0, 0.0], [0.7, 1.8]]).unwrap(),
            2 => bump_sor(),
            _ => ellipsoid(),
        };
        let (z, v) = sample(&m, u0, u1, angle, frac);
        let x = exp_map(&m, &z, &v).unwrap();
        let back = log_map(&m, &z, &x).unwrap();
        prop_assert!(euclid(back.components(), v.components()) <= 1e-7);
    }

    #[test]
    fn gauss_lemma_in_normal_coordinates(which in 0usize..3, u0 in 0.3..(PI - 0.3), u1 in -PI..PI, angle in 0.0..(2.0 * PI), frac in 0.05..1.0f64) {
        let m = match which {
            0 => ManifoldModel::unit_sphere(),
            1 => bump_sor(),
            _ => ellipsoid(),
        };
        let (z, v) = sample(&m, u0, u1, angle, frac);
        let x = v.components().to_vec();
        let g = normal_metric(&m, &z, &x).unwrap();
        let gx = &g * nalgebra::DVector::from_vec(x.clone());
        // The radial vector keeps its Euclidean length and stays orthogonal to the spheres.
        let r2: f64 = x.iter().map(|c| c * c).sum();
        let xgx: f64 = x.iter().zip(gx.iter()).map(|(a, b)| a * b).sum();
        prop_assert!((xgx - r2).abs() <= 1e-8 * (1.0 + r2), "{} vs {}", xgx, r2);
        for (gi, xi) in gx.iter().zip(&x) {
            prop_assert!((gi - xi).abs() <= 1e-7);
        }
    }

    #[test]
    fn cached_norm_matches_metric_norm(which in 0usize..3, u0 in 0.3..(PI - 0.3), u1 in -PI..PI, angle in 0.0..(2.0 * PI), frac in 0.01..1.0f64) {
        let m = match which {
            0 => ManifoldModel::unit_sphere(),
            1 => bump_sor(),
            _ => ellipsoid(),
        };
        let (_, v) = sample(&m, u0, u1, angle, frac);
        let exact = v.metric_norm(&m).unwrap();
        prop_assert!((v.norm() - exact).abs() <= 1e-12 * (1.0 + exact));
    }
}

#[test]
fn sphere_normal_radius_is_great_circle_distance() {
    let m = ManifoldModel::unit_sphere();
    let z = m.pole().unwrap();
    for &(t, p) in &[(0.1, 0.0), (0.7, 1.3), (1.9, -2.2), (2.8, 3.0)] {
        let x = m.chart_to_native(&[t, p]).unwrap();
        let nc = normal_coordinates(&m, &z, &x).unwrap();
        let r = nc.iter().map(|c| c * c).sum::<f64>().sqrt();
        let dist = x.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0).acos();
        assert!((r - dist).abs() < 1e-10, "{r} vs {dist}");
    }
}

#[test]
fn revolution_surface_with_sine_profile_has_round_sphere_connection() {
    let m = ManifoldModel::surface_of_revolution(Profile::Sine).unwrap();
    for &s in &[0.3, 1.0, 2.2] {
        let g = m.christoffel_at(&[s, 0.4]).unwrap();
        assert!((g.get(0, 1, 1) + s.sin() * s.cos()).abs() < 1e-12);
        assert!((g.get(1, 0, 1) - s.cos() / s.sin()).abs() < 1e-12);
    }
}

#[test]
fn points_on_the_surface_satisfy_the_level_set() {
    let m = ellipsoid();
    for &(u, v) in &[(0.4, 0.1), (1.5, 2.0), (2.7, -1.0)] {
        let x = m.chart_to_native(&[u, v]).unwrap();
        assert!(m.level_set(&x).abs() < 1e-14);
        let back = m.native_to_chart(&x).unwrap();
        assert!((back[0] - u).abs() < 1e-12 && (back[1] - v).abs() < 1e-12);
    }
}

/// Near the bump the chart offset overshoots the true distance by more than
/// the injectivity radius; the log map must still recover the vector.
#[test]
fn log_map_recovers_vectors_whose_chart_offset_overshoots() {
    let m = bump_sor();
    let (z, v) = sample(&m, 1.2701211353912392, 0.0, 2.8751785667262255, 0.8519523427574506);
    let x = exp_map(&m, &z, &v).unwrap();
    let back = log_map(&m, &z, &x).unwrap();
    assert!(euclid(back.components(), v.components()) <= 1e-7);
}

/// Shooting across a pole of the revolution surface passes through iterates
/// outside the injectivity ball before settling.
#[test]
fn log_map_survives_transient_iterates_outside_the_ball() {
    let m = bump_sor();
    let (z, v) = sample(&m, 1.1103849440989795, 0.0, 3.1801679819052016, 0.9689364642936703);
    let x = exp_map(&m, &z, &v).unwrap();
    let back = log_map(&m, &z, &x).unwrap();
    assert!(euclid(back.components(), v.components()) <= 1e-7);
}
