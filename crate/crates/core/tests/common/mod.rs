//! Independent reference computations for the integration tests.
#![allow(dead_code)]

use heatframe::geometry::{make_jacobi_space, MetricMeasureSpace};
use heatframe::jacobi::{build_basis, JacobiParams, SpectralBasis};

/// Tanh-sinh (double exponential) quadrature of `f` over `[a, b]`. Handles
/// integrable endpoint singularities; `f` is never evaluated at the endpoints.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    tanh_sinh_gaps(|x, _, _| f(x), a, b)
}

/// Tanh-sinh quadrature where `f(x, x - a, b - x)` also receives the distances
/// to both endpoints, computed without cancellation.
pub fn tanh_sinh_gaps<F: Fn(f64, f64, f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let h = 1.0 / 64.0;
    let limit = (6.0 / h) as i64;
    let mut sum = 0.0;
    for k in -limit..=limit {
        let t = k as f64 * h;
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let w = std::f64::consts::FRAC_PI_2 * t.cosh() / (u.cosh() * u.cosh());
        // 1 - |tanh u|
        let gap = half / (u.abs().exp() * u.cosh());
        if gap <= 0.0 || w == 0.0 {
            continue;
        }
        let (left, right) = if u < 0.0 {
            (gap, 2.0 * half - gap)
        } else {
            (2.0 * half - gap, gap)
        };
        let x = if u < 0.0 { a + left } else { b - right };
        sum += w * f(x, left, right);
    }
    sum * h * half
}

/// `∫_{-1}^{1} g(x) (1 - x)^gamma (1 + x)^alpha dx` by tanh-sinh.
pub fn weighted_integral<F: Fn(f64) -> f64>(g: F, gamma: f64, alpha: f64) -> f64 {
    tanh_sinh_gaps(
        |x, left, right| g(x) * right.powf(gamma) * left.powf(alpha),
        -1.0,
        1.0,
    )
}

pub fn legendre_space(n: usize) -> MetricMeasureSpace {
    make_jacobi_space(JacobiParams::LEGENDRE, n).unwrap()
}

pub fn jacobi(
    gamma: f64,
    alpha: f64,
    n: usize,
    degree: usize,
) -> (JacobiParams, MetricMeasureSpace, SpectralBasis) {
    let params = JacobiParams::new(gamma, alpha).unwrap();
    let space = make_jacobi_space(params, n).unwrap();
    let basis = build_basis(&space, params, degree).unwrap();
    (params, space, basis)
}

/// Ball volume by a direct scan of the space's points.
pub fn brute_ball_volume(space: &MetricMeasureSpace, center: usize, r: f64) -> f64 {
    let c = space.points()[center].acos();
    space
        .points()
        .iter()
        .zip(space.weights())
        .filter(|(x, _)| (x.acos() - c).abs() < r)
        .map(|(_, w)| w)
        .sum()
}

/// Node closest to `x`.
pub fn nearest_node(space: &MetricMeasureSpace, x: f64) -> usize {
    let mut best = 0;
    for (i, p) in space.points().iter().enumerate() {
        if (p - x).abs() < (space.points()[best] - x).abs() {
            best = i;
        }
    }
    best
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
