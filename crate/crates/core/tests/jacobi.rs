mod common;

use heatframe::error::Error;
use heatframe::geometry::make_jacobi_space;
use heatframe::jacobi::{
    build_basis, carre_du_champ_report, eigenvalue, form_report, orthonormal_at, poincare_constant,
    poincare_ratio, verify_poincare, Ball, JacobiParams,
};
use heatframe::sampling::Sampler;
use proptest::prelude::*;

use common::{jacobi, weighted_integral};

#[test]
fn recurrence_orthonormal_against_quadrature_oracle() {
    for (gamma, alpha) in [(0.0, 0.0), (0.5, -0.3), (-0.5, -0.5), (1.5, 0.25)] {
        let params = JacobiParams::new(gamma, alpha).unwrap();
        for (i, m) in [(0, 0), (1, 1), (2, 5), (4, 4), (3, 6), (7, 7)] {
            let g = weighted_integral(
                |x| {
                    let (p, _) = orthonormal_at(params, 7, x);
                    p[i] * p[m]
                },
                gamma,
                alpha,
            );
            let target = if i == m { 1.0 } else { 0.0 };
            assert!(
                (g - target).abs() < 1e-9,
                "({gamma},{alpha}) <P{i},P{m}> = {g}"
            );
        }
    }
}

#[test]
fn discrete_orthonormality() {
    for (gamma, alpha) in [(0.0, 0.0), (0.5, -0.3)] {
        let (_, _, basis) = jacobi(gamma, alpha, 64, 63);
        assert!(basis.orthonormality_defect() <= 1e-10);
        assert!(basis.orthonormality_report().unwrap().passed);
    }
}

#[test]
fn degree_beyond_nodes_rejected() {
    let space = make_jacobi_space(JacobiParams::LEGENDRE, 10).unwrap();
    assert!(matches!(
        build_basis(&space, JacobiParams::LEGENDRE, 10),
        Err(Error::Exactness { .. })
    ));
}

#[test]
fn eigenvalues() {
    assert_eq!(eigenvalue(1, JacobiParams::LEGENDRE), 2.0);
    assert_eq!(eigenvalue(3, JacobiParams::LEGENDRE), 12.0);
    let p = JacobiParams::new(0.5, -0.3).unwrap();
    assert!((eigenvalue(2, p) - 2.0 * 3.2).abs() < 1e-15);
}

#[test]
fn derivative_recurrence_matches_finite_difference() {
    let params = JacobiParams::new(0.5, -0.3).unwrap();
    let h = 1e-6;
    for x in [-0.9, -0.3, 0.1, 0.7] {
        let (_, d) = orthonormal_at(params, 9, x);
        let (pp, _) = orthonormal_at(params, 9, x + h);
        let (pm, _) = orthonormal_at(params, 9, x - h);
        for i in 0..=9 {
            let fd = (pp[i] - pm[i]) / (2.0 * h);
            assert!((fd - d[i]).abs() < 1e-6 * d[i].abs().max(1.0));
        }
    }
}

#[test]
fn carre_du_champ_random_pairs() {
    for (gamma, alpha) in [(0.0, 0.0), (0.5, -0.3)] {
        let (_, _, basis) = jacobi(gamma, alpha, 64, 40);
        let mut rng = Sampler::new(11);
        for _ in 0..20 {
            let f = rng.coefficients(20);
            let g = rng.coefficients(20);
            let r = carre_du_champ_report(&basis, &f, &g).unwrap();
            assert!(r.passed, "{r:?}");
            let gff = basis.carre_du_champ(&f, &f).unwrap();
            assert!(gff.iter().all(|&v| v >= -1e-10));
        }
    }
}

#[test]
fn carre_du_champ_rejects_overflowing_products() {
    let (_, _, basis) = jacobi(0.0, 0.0, 32, 10);
    let f = vec![0.0; 11];
    let mut g = f.clone();
    g[10] = 1.0;
    let mut h = f.clone();
    h[1] = 1.0;
    assert!(matches!(
        basis.carre_du_champ(&g, &h),
        Err(Error::Truncation(_))
    ));
}

#[test]
fn form_identity_random_pairs() {
    let (_, _, basis) = jacobi(0.5, -0.3, 64, 40);
    let mut rng = Sampler::new(5);
    for _ in 0..20 {
        let f = rng.coefficients(40);
        let g = rng.coefficients(40);
        let r = form_report(&basis, &f, &g).unwrap();
        assert!(r.passed, "{r:?}");
        // coefficient-space value of the form: Σ β_i f_i g_i
        let spectral: f64 = (0..=40).map(|i| basis.eigenvalues[i] * f[i] * g[i]).sum();
        assert!((r.context["omega"] - spectral).abs() < 1e-9 * spectral.abs().max(1.0));
    }
}

#[test]
fn synthesis_round_trip() {
    let (_, _, basis) = jacobi(0.5, -0.3, 48, 30);
    let c = Sampler::new(3).coefficients(30);
    let back = basis.coefficients(&basis.synthesize(&c).unwrap()).unwrap();
    assert!(common::max_abs_diff(&c, &back) < 1e-12);
}

#[test]
fn poincare_linear_function_on_whole_interval() {
    // f = x on [-1, 1] Legendre: variance 2/3, energy ∫(1 - x^2) dx = 4/3
    let (_, _, basis) = jacobi(0.0, 0.0, 32, 10);
    let mut f = vec![0.0; 2];
    f[1] = 1.0;
    let r = 1.0;
    // the arc |θ - π/2| < 1 in θ covers x in (-sin 1, sin 1)
    let s = 1f64.sin();
    let scale = orthonormal_at(JacobiParams::LEGENDRE, 1, 0.5).0[1] / 0.5;
    let var = scale * scale * 2.0 * s.powi(3) / 3.0;
    let energy = scale * scale * (2.0 * s - 2.0 * s.powi(3) / 3.0);
    let got = poincare_ratio(
        &basis,
        &f,
        Ball {
            center: 0.0,
            radius: r,
        },
    )
    .unwrap()
    .unwrap();
    assert!((got - var / energy).abs() < 1e-12);
}

#[test]
fn poincare_constant_is_stable() {
    let params = JacobiParams::new(0.5, -0.3).unwrap();
    let mut rng = Sampler::new(8);
    let functions: Vec<Vec<f64>> = (0..10).map(|_| rng.coefficients(12)).collect();
    let balls: Vec<Ball> = (0..10)
        .map(|_| Ball {
            center: rng.uniform(-1.0, 1.0),
            radius: rng.uniform(0.05, 1.0),
        })
        .collect();
    let fit = verify_poincare(params, 32, 20, &functions, &balls).unwrap();
    assert!(fit.stable, "{fit:?}");
    let k = fit.constant("K").unwrap();
    assert!(k.is_finite() && k > 0.0);
    let space = make_jacobi_space(params, 32).unwrap();
    let basis = build_basis(&space, params, 20).unwrap();
    assert!(poincare_constant(
        &basis,
        &functions,
        &[Ball {
            center: 0.0,
            radius: 1.5
        }]
    )
    .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn gamma_nonnegative(seed in 0u64..1000, deg in 1usize..15) {
        let (_, _, basis) = jacobi(0.5, -0.3, 40, 30);
        let f = Sampler::new(seed).coefficients(deg);
        let g = basis.carre_du_champ(&f, &f).unwrap();
        prop_assert!(g.iter().all(|&v| v >= -1e-10));
    }
}
