use std::f64::consts::PI;

use blowdown::geometry::Profile;
use blowdown::spectral::{
    apply_complement, apply_window, band_check, evaluation_grid, projector_sup_norm, random_torus_coefficients,
    smoothed_sum, sor_basis, sphere_basis, sphere_index, square_lattice_basis, sup_norm, torus_basis,
    CoefficientVector, DirectionCutoff, EigenData, RandomSpectrum, SmoothingKernel, SupOptions, WindowSpec,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{seq::index::sample, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Number of dual lattice vectors of length at most `lambda`, by brute force.
fn lattice_count(basis: [[f64; 2]; 2], lambda: f64) -> usize {
    let det = basis[0][0] * basis[1][1] - basis[0][1] * basis[1][0];
    // Rows of the dual basis satisfy b_i . d_j = delta_ij.
    let d0 = [basis[1][1] / det, -basis[1][0] / det];
    let d1 = [-basis[0][1] / det, basis[0][0] / det];
    let r = 200;
    let mut n = 0;
    for p in -r..=r {
        for q in -r..=r {
            let k = [
                2.0 * PI * (p as f64 * d0[0] + q as f64 * d1[0]),
                2.0 * PI * (p as f64 * d0[1] + q as f64 * d1[1]),
            ];
            if (k[0] * k[0] + k[1] * k[1]).sqrt() <= lambda {
                n += 1;
            }
        }
    }
    n
}

fn count_up_to(b: &EigenData, lambda: f64) -> usize {
    b.eigenvalues().iter().filter(|&&l| l <= lambda).count()
}

#[test]
fn counting_functions_follow_weyl_law() {
    let lam = 100.0;
    let torus = square_lattice_basis(2.0 * PI, lam).unwrap();
    let weyl = torus.volume() * lam * lam / (4.0 * PI);
    let ratio = count_up_to(&torus, lam) as f64 / weyl;
    assert!((ratio - 1.0).abs() <= 0.05, "torus ratio {ratio}");
    let sphere = sphere_basis(101).unwrap();
    let ratio = count_up_to(&sphere, lam) as f64 / (sphere.volume() * lam * lam / (4.0 * PI));
    assert!((ratio - 1.0).abs() <= 0.05, "sphere ratio {ratio}");
}

#[test]
fn skew_torus_spectrum_matches_lattice_enumeration() {
    let b = [[2.0, 0.0], [0.7, 1.6]];
    let basis = torus_basis(b, 30.0).unwrap();
    for lam in [3.0, 10.0, 17.5, 30.0] {
        assert_eq!(count_up_to(&basis, lam), lattice_count(b, lam), "lambda {lam}");
    }
}

#[test]
fn sine_revolution_spectrum_matches_sphere_counts() {
    let sor = sor_basis(&Profile::Sine, 12, 12.0).unwrap();
    for l in 0..11usize {
        let ev = ((l * (l + 1)) as f64).sqrt();
        let c = sor.clusters().iter().find(|c| (c.lambda - ev).abs() < 1e-3);
        let c = c.unwrap_or_else(|| panic!("no cluster near {ev}"));
        assert_eq!(c.indices.len(), 2 * l + 1, "degree {l}");
    }
}

fn random_vector(basis: &EigenData, seed: u64) -> CoefficientVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CoefficientVector::new(
        basis,
        (0..basis.len()).map(|j| (j, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn windows_split_the_norm(seed in 0u64..1000, lo in 0.0..20.0f64, width in 0.01..10.0f64) {
        let basis = sphere_basis(20).unwrap();
        let f = random_vector(&basis, seed);
        let w = WindowSpec::sharp(lo, width).unwrap();
        let inside = apply_window(&w, &f).norm();
        let outside = apply_complement(&w, &f).norm();
        prop_assert!(inside <= f.norm() + 1e-12);
        prop_assert!((inside * inside + outside * outside - f.norm().powi(2)).abs() <= 1e-10 * f.norm().powi(2));
    }

    #[test]
    fn sphere_cluster_density_is_uniform(l in 1usize..40, t in 0.0..PI, p in -PI..PI) {
        let basis = sphere_basis(40).unwrap();
        let ev = ((l * (l + 1)) as f64).sqrt();
        let w = WindowSpec::centered(ev, 0.1).unwrap();
        let x = [t.cos(), t.sin() * p.cos(), t.sin() * p.sin()];
        let d = basis.window_density(&w, &x).unwrap();
        let want = (2 * l + 1) as f64 / (4.0 * PI);
        prop_assert!((d - want).abs() <= 1e-9 * want);
    }

    #[test]
    fn torus_window_density_is_count_over_area(lo in 1.0..40.0f64, width in 0.05..3.0f64, x in 0.0..1.0f64, y in 0.0..1.0f64) {
        let basis = square_lattice_basis(1.0, 20.0 * PI).unwrap();
        let w = WindowSpec::sharp(lo * PI / 2.0, width).unwrap();
        let n = basis.window_range(&w).len() as f64;
        let d = basis.window_density(&w, &[x, y]).unwrap();
        prop_assert!((d - n / basis.volume()).abs() <= 1e-9 * (1.0 + n));
    }
}

#[test]
fn projector_norms_match_closed_forms() {
    let sphere = sphere_basis(60).unwrap();
    let grid = evaluation_grid(&sphere, 1.0, 2.0);
    for l in [5usize, 20, 59] {
        let ev = ((l * (l + 1)) as f64).sqrt();
        let s = projector_sup_norm(&sphere, &WindowSpec::centered(ev, 0.2).unwrap(), &grid).unwrap();
        assert!((s - ((2 * l + 1) as f64 / (4.0 * PI)).sqrt()).abs() < 1e-9);
    }
    let b = [[1.0, 0.0], [0.3, 1.2]];
    let torus = torus_basis(b, 80.0).unwrap();
    let grid = evaluation_grid(&torus, 1.0, 2.0);
    for (lo, hi) in [(10.0, 12.0), (40.0, 40.5), (60.0, 75.0)] {
        let n = (lattice_count(b, hi) - lattice_count(b, lo - 1e-12)) as f64;
        let s = projector_sup_norm(&torus, &WindowSpec::Sharp { lo, hi }, &grid).unwrap();
        assert!((s - (n / torus.volume()).sqrt()).abs() < 1e-9, "[{lo}, {hi}]");
    }
}

#[test]
fn sphere_windows_saturate_while_torus_windows_shrink() {
    let lam = 200.0;
    let sphere = sphere_basis(202).unwrap();
    let sgrid = evaluation_grid(&sphere, 1.0, 2.0);
    let torus = square_lattice_basis(2.0 * PI, lam + 2.0).unwrap();
    let tgrid = evaluation_grid(&torus, 1.0, 2.0);
    let l = (lam - 0.5f64).round();
    let ev = (l * (l + 1.0)).sqrt();
    let mut sphere_vals = Vec::new();
    let mut torus_vals = Vec::new();
    for delta in [0.05, 0.2, 0.8] {
        let w = WindowSpec::centered(ev, delta / 2.0).unwrap();
        sphere_vals.push(projector_sup_norm(&sphere, &w, &sgrid).unwrap().powi(2));
        let w = WindowSpec::sharp(lam, delta).unwrap();
        torus_vals.push(projector_sup_norm(&torus, &w, &tgrid).unwrap().powi(2));
    }
    // The sphere keeps the whole cluster at every width; the torus loses mass with the width.
    for v in &sphere_vals {
        assert!((v - sphere_vals[0]).abs() < 1e-9 && v / lam >= 1.0 / (2.0 * PI) - 0.01);
    }
    assert!(torus_vals[0] < torus_vals[1] && torus_vals[1] < torus_vals[2]);
    assert!(sphere_vals[0] > 5.0 * torus_vals[0], "{sphere_vals:?} {torus_vals:?}");
}

#[test]
fn random_subsets_are_orthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let bases = [
        sphere_basis(25).unwrap(),
        torus_basis([[2.0, 0.0], [0.7, 1.6]], 25.0).unwrap(),
        sor_basis(&Profile::PerturbedSine { amplitude: 0.2, center: PI / 2.0, width: 0.6 }, 6, 10.0).unwrap(),
    ];
    for basis in &bases {
        let idx: Vec<usize> = sample(&mut rng, basis.len(), 20).into_vec();
        let g = basis.gram_matrix(&idx).unwrap();
        for (a, row) in g.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((v - want).norm() < 1e-8, "{}: G[{a}][{b}] = {v}", basis.label());
            }
        }
    }
}

#[test]
fn smoothed_sum_dominates_the_unit_window() {
    let kernel = SmoothingKernel::standard();
    let floor = (0..=100).map(|i| kernel.weight(-(i as f64) / 100.0)).fold(f64::INFINITY, f64::min);
    assert!(floor > 0.0);
    let reach = kernel.tail_start();
    let torus = square_lattice_basis(2.0 * PI, 60.0 + reach + 1.0).unwrap();
    let sphere = sphere_basis((60.0 + reach) as usize + 3).unwrap();
    let pts: [(&EigenData, Vec<f64>); 2] = [(&torus, vec![0.3, 1.1]), (&sphere, vec![0.6, 0.8, 0.0])];
    for (basis, x) in pts {
        for lam in [20.0, 40.0, 60.0] {
            let s = smoothed_sum(basis, 1.0, lam, &x, None).unwrap();
            let sharp = basis.window_density(&WindowSpec::sharp(lam, 1.0).unwrap(), &x).unwrap();
            assert!(s >= floor * sharp, "{} at {lam}: {s} < {floor} * {sharp}", basis.label());
        }
    }
}

#[test]
fn kernel_weight_decays_faster_than_fourth_power() {
    let k = SmoothingKernel::standard();
    let scaled = |t: f64| k.weight(t) * (1.0 + t.abs()).powi(4);
    let head = (0..=2000).map(|i| scaled(i as f64 * 0.05)).fold(0.0, f64::max);
    let tail = (0..=4000).map(|i| scaled(100.0 + i as f64 * 0.1)).fold(0.0, f64::max);
    assert!(head.is_finite() && tail <= head, "tail {tail} head {head}");
    assert!((0..=400).all(|i| k.weight(i as f64 * 0.5) >= 0.0));
}

/// Smoothed sum on the integer lattice (square torus of side `2 pi`) by direct enumeration.
fn lattice_smoothed_sum(t_smooth: f64, lambda: f64) -> f64 {
    let k = SmoothingKernel::standard();
    let r = (lambda + k.tail_start() / t_smooth).ceil() as i64 + 1;
    let mut acc = 0.0;
    for p in -r..=r {
        for q in -r..=r {
            let nu = ((p * p + q * q) as f64).sqrt();
            acc += k.weight(t_smooth * (lambda - nu));
        }
    }
    acc / (4.0 * PI * PI)
}

#[test]
fn smoothed_sum_matches_lattice_enumeration() {
    for (t, lam) in [(50.0, 5.0), (1.0, 30.0), (4.0, 60.0)] {
        let reach = SmoothingKernel::standard().tail_start() / t;
        let basis = square_lattice_basis(2.0 * PI, lam + reach + 1.0).unwrap();
        let s = smoothed_sum(&basis, t, lam, &[0.4, 0.9], None).unwrap();
        let want = lattice_smoothed_sum(t, lam);
        assert!((s / want - 1.0).abs() < 1e-6, "T = {t}, lambda = {lam}: {s} vs {want}");
    }
}

#[test]
fn cap_sums_scale_with_cap_measure() {
    let reach = SmoothingKernel::standard().tail_start();
    let basis = square_lattice_basis(2.0 * PI, 200.0 + reach + 1.0).unwrap();
    let mut per = Vec::new();
    for m in [0.01, 0.04, 0.16] {
        let b = DirectionCutoff::with_measure(0.3, m).unwrap();
        per.push(smoothed_sum(&basis, 1.0, 200.0, &[0.0, 0.0], Some(&b)).unwrap() / m);
    }
    let lo = per.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = per.iter().copied().fold(0.0, f64::max);
    assert!(hi / lo < 1.5, "{per:?}");
}

#[test]
fn unit_band_estimates_hold_with_one_constant() {
    let basis = square_lattice_basis(2.0 * PI, 200.0).unwrap();
    let opts = SupOptions::default();
    let lam = 80.0;
    let g = random_torus_coefficients(&basis, &RandomSpectrum { lambda: lam, spectrum_max: 200.0, seed: 3 }).unwrap();
    let ratios: Vec<f64> = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
        .iter()
        .map(|&k| band_check(&basis, &g, lam, k, &opts).unwrap().ratio())
        .collect();
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    assert!(worst.is_finite() && worst < 1.0, "{ratios:?}");
}

#[test]
fn zonal_sup_sits_at_the_pole() {
    let basis = sphere_basis(30).unwrap();
    for l in [4usize, 17, 30] {
        let f = CoefficientVector::eigenfunction(&basis, sphere_index(l, 0)).unwrap();
        let est = sup_norm(&basis, &f, &SupOptions::default()).unwrap();
        assert!((est.value - ((2 * l + 1) as f64 / (4.0 * PI)).sqrt()).abs() < 1e-6);
        assert!(est.location[0].abs() > 1.0 - 1e-6);
    }
}
