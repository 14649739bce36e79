//! Heat kernel `h_t(x, y) = Σ_i e^(-β_i t) P_i(x) P_i(y)` on a Jacobi space,
//! identity checks, and fits of the Gaussian and Hölder constants.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{make_jacobi_space, MetricMeasureSpace};
use crate::jacobi::{build_basis, eigenvalue, JacobiParams, SpectralBasis};
use crate::report::{FitReport, VerificationReport};

/// Largest acceptable `e^(-β_N t)` for the smallest time in use.
pub const TAIL_TOL: f64 = 1e-12;

/// Gaussian fits only use pairs with `d^2 / t` up to this value; further out the
/// kernel falls below what double precision resolves next to its diagonal.
pub const GAUSSIAN_EXPONENT_CUTOFF: f64 = 16.0;

/// Hölder triples use increments `d(s2, s2') / √t` in `[HOLDER_MIN_STEP, 1]`.
pub const HOLDER_MIN_STEP: f64 = 0.25;

/// Relative change under refinement below which a fit counts as stable.
pub const FIT_STABILITY: f64 = 0.20;

#[derive(Debug, Clone, PartialEq)]
pub struct HeatKernelEval {
    pub t: f64,
    /// `table[i][j] = h_t(x_i, x_j)`
    pub table: Vec<Vec<f64>>,
    pub truncation_degree: usize,
    /// `e^(-β_N t)`
    pub tail_bound: f64,
}

impl HeatKernelEval {
    pub fn n_nodes(&self) -> usize {
        self.table.len()
    }

    /// `(R_t f)(x_j) = Σ_i w_i h_t(x_i, x_j) f(x_i)`
    pub fn apply(&self, weights: &[f64], f: &[f64]) -> Result<Vec<f64>> {
        let n = self.n_nodes();
        if weights.len() != n || f.len() != n {
            return Err(Error::Contract(format!(
                "kernel has {n} nodes, got {} weights and {} values",
                weights.len(),
                f.len()
            )));
        }
        Ok((0..n)
            .map(|j| (0..n).map(|i| weights[i] * self.table[i][j] * f[i]).sum())
            .collect())
    }

    /// CSV with header `x_index,y_index,value`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x_index", "y_index", "value"])?;
        for (i, row) in self.table.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                w.write_record([i.to_string(), j.to_string(), v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Smallest `N` with `e^(-β_N t_min) < tol`.
pub fn degree_for_tail(params: JacobiParams, t_min: f64, tol: f64) -> Result<usize> {
    if !(t_min > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {t_min}")));
    }
    let target = -tol.ln() / t_min;
    let mut n = 1;
    while eigenvalue(n, params) <= target {
        n += 1;
    }
    Ok(n)
}

pub fn heat_kernel(basis: &SpectralBasis, t: f64) -> Result<HeatKernelEval> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    let n = basis.n_nodes();
    let decay: Vec<f64> = basis.eigenvalues.iter().map(|b| (-b * t).exp()).collect();
    // e_i (P_i(x) P_i(y)) is symmetric in x and y bit for bit
    let table: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|a| {
            (0..n)
                .map(|b| {
                    basis
                        .values
                        .iter()
                        .zip(&decay)
                        .map(|(row, e)| e * (row[a] * row[b]))
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(HeatKernelEval {
        t,
        table,
        truncation_degree: basis.degree,
        tail_bound: (-basis.eigenvalues[basis.degree] * t).exp(),
    })
}

fn check_kernel(space: &MetricMeasureSpace, kernel: &HeatKernelEval) -> Result<()> {
    if kernel.n_nodes() != space.len() {
        return Err(Error::Contract(format!(
            "kernel has {} nodes but the space has {}",
            kernel.n_nodes(),
            space.len()
        )));
    }
    Ok(())
}

/// `max_i |Σ_j w_j h_t(x_i, x_j) - 1| <= 1e-8`
pub fn verify_markov(
    space: &MetricMeasureSpace,
    kernel: &HeatKernelEval,
) -> Result<VerificationReport> {
    check_kernel(space, kernel)?;
    let defect = kernel
        .table
        .iter()
        .map(|row| {
            let s: f64 = row.iter().zip(space.weights()).map(|(h, w)| w * h).sum();
            (s - 1.0).abs()
        })
        .fold(0.0, f64::max);
    Ok(VerificationReport::upper("heat.markov", defect, 1e-8, 1.0)?
        .with("t", kernel.t)
        .with("degree", kernel.truncation_degree as f64))
}

/// `max |h_{t+s} - ∫ h_t(·, v) h_s(v, ·) dσ(v)| <= 1e-7 max |h_{t+s}|`
pub fn verify_semigroup(
    space: &MetricMeasureSpace,
    basis: &SpectralBasis,
    t: f64,
    s: f64,
) -> Result<VerificationReport> {
    if !(t > 0.0 && s > 0.0) {
        return Err(Error::Precondition(format!(
            "times must be positive, got {t} and {s}"
        )));
    }
    let ht = heat_kernel(basis, t)?;
    let hs = heat_kernel(basis, s)?;
    let hts = heat_kernel(basis, t + s)?;
    check_kernel(space, &hts)?;
    let w = space.weights();
    let n = space.len();
    let defect = (0..n)
        .into_par_iter()
        .map(|x| {
            (0..n)
                .map(|y| {
                    let composed: f64 =
                        (0..n).map(|v| w[v] * ht.table[x][v] * hs.table[v][y]).sum();
                    (hts.table[x][y] - composed).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max);
    let scale = hts
        .table
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(
        VerificationReport::upper("heat.semigroup", defect / scale, 1e-7, 1.0)?
            .with("t", t)
            .with("s", s),
    )
}

/// `‖R_t P_i - e^(-β_i t) P_i‖_∞ <= 1e-9` for `i <= max_index`.
pub fn verify_eigen_action(
    space: &MetricMeasureSpace,
    basis: &SpectralBasis,
    kernel: &HeatKernelEval,
    max_index: usize,
) -> Result<Vec<VerificationReport>> {
    check_kernel(space, kernel)?;
    if max_index > basis.degree {
        return Err(Error::Truncation(format!(
            "index {max_index} exceeds basis degree {}",
            basis.degree
        )));
    }
    (0..=max_index)
        .map(|i| {
            let applied = kernel.apply(space.weights(), &basis.values[i])?;
            let factor = (-basis.eigenvalues[i] * kernel.t).exp();
            let defect = applied
                .iter()
                .zip(&basis.values[i])
                .map(|(a, p)| (a - factor * p).abs())
                .fold(0.0, f64::max);
            Ok(
                VerificationReport::upper("heat.eigen_action", defect, 1e-9, factor)?
                    .with("i", i as f64)
                    .with("t", kernel.t),
            )
        })
        .collect()
}

fn check_times(basis: &SpectralBasis, t_grid: &[f64]) -> Result<f64> {
    if t_grid.is_empty() {
        return Err(Error::Sampling("empty time grid".into()));
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
        return Err(Error::Domain(format!("times must lie in (0, 1], got {t}")));
    }
    let t_min = t_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let tail = (-basis.eigenvalues[basis.degree] * t_min).exp();
    if tail >= TAIL_TOL {
        return Err(Error::TruncationTail {
            t: t_min,
            tail,
            tolerance: TAIL_TOL,
        });
    }
    Ok(t_min)
}

/// Pairs `(x, y)` of all points with `d^2 / t <= GAUSSIAN_EXPONENT_CUTOFF`,
/// diagonal included.
pub fn gaussian_pairs(space: &MetricMeasureSpace, t: f64) -> Vec<(usize, usize)> {
    let n = space.len();
    let mut out = Vec::new();
    for x in 0..n {
        for y in x..n {
            let d = space.distance(x, y);
            if d * d / t <= GAUSSIAN_EXPONENT_CUTOFF {
                out.push((x, y));
            }
        }
    }
    out
}

/// Normalized samples `(u, ρ)` with `u = d^2 / t` and
/// `ρ = h_t(x, y) (|B(x, √t)| |B(y, √t)|)^(1/2)`.
fn normalized_samples(
    space: &MetricMeasureSpace,
    kernel: &HeatKernelEval,
    pairs: &[(usize, usize)],
) -> Result<Vec<(f64, f64)>> {
    let t = kernel.t;
    let volumes = space.ball_volumes(t.sqrt());
    pairs
        .iter()
        .map(|&(x, y)| {
            if x >= space.len() || y >= space.len() {
                return Err(Error::Domain(format!("pair ({x}, {y}) outside the space")));
            }
            let d = space.distance(x, y);
            Ok((
                d * d / t,
                kernel.table[x][y] * (volumes[x] * volumes[y]).sqrt(),
            ))
        })
        .collect()
}

/// Fitted Gaussian constants for `c1' e^(-c1 u) <= ρ <= K e^(-a u)`.
///
/// `K` is twice the largest on-diagonal ratio and `a` the largest decay rate
/// compatible with it; `c1'` is half the smallest on-diagonal ratio and `c1`
/// the smallest rate compatible with it. Pairs with `d^2 / t` above
/// [`GAUSSIAN_EXPONENT_CUTOFF`] are ignored.
pub fn fit_gaussian_bounds(
    space: &MetricMeasureSpace,
    basis: &SpectralBasis,
    t_grid: &[f64],
    pairs: &[(usize, usize)],
) -> Result<FitReport> {
    check_times(basis, t_grid)?;
    let mut samples = Vec::new();
    for &t in t_grid {
        let kernel = heat_kernel(basis, t)?;
        let mut with_diag: Vec<(usize, usize)> = (0..space.len()).map(|x| (x, x)).collect();
        with_diag.extend(pairs.iter().copied().filter(|&(x, y)| {
            let d = space.distance(x, y);
            x != y && d * d / t <= GAUSSIAN_EXPONENT_CUTOFF
        }));
        samples.extend(normalized_samples(space, &kernel, &with_diag)?);
    }
    let diagonal = samples.iter().filter(|(u, _)| *u == 0.0).map(|&(_, r)| r);
    let max_diag = diagonal.clone().fold(f64::NEG_INFINITY, f64::max);
    let min_diag = diagonal.fold(f64::INFINITY, f64::min);
    let big_k = 2.0 * max_diag;
    let c1_prime = 0.5 * min_diag;
    let mut a = f64::INFINITY;
    let mut c1 = 0.0f64;
    for &(u, rho) in samples.iter().filter(|(u, _)| *u > 0.0) {
        if rho <= 0.0 {
            c1 = f64::INFINITY;
            continue;
        }
        a = a.min((big_k / rho).ln() / u);
        c1 = c1.max((c1_prime / rho).ln() / u);
    }
    let finite_positive = big_k > 0.0 && a > 0.0 && c1_prime > 0.0;
    let mut report = FitReport::new("heat.gaussian", samples.len())?
        .with("K", big_k)
        .with("a", a)
        .with("c1_prime", c1_prime)
        .with("c1", c1);
    report.stable = finite_positive && report.all_finite();
    Ok(report)
}

/// Fits at `(n_nodes, degree)` and at twice both, over every admissible pair;
/// the coarse report carries the relative change and the stability verdict.
pub fn gaussian_fit_study(
    params: JacobiParams,
    n_nodes: usize,
    degree: usize,
    t_grid: &[f64],
) -> Result<FitReport> {
    let fit = |n: usize, deg: usize| -> Result<FitReport> {
        let space = make_jacobi_space(params, n)?;
        let basis = build_basis(&space, params, deg)?;
        // the widest time admits the most pairs; narrower ones are filtered
        let t_max = t_grid.iter().copied().fold(0.0, f64::max);
        let pairs = gaussian_pairs(&space, t_max);
        fit_gaussian_bounds(&space, &basis, t_grid, &pairs)
    };
    let coarse = fit(n_nodes, degree)?;
    let fine = fit(2 * n_nodes, 2 * degree)?;
    let ok = coarse.stable && fine.stable;
    let mut report = coarse.compare(&fine, FIT_STABILITY);
    report.stable &= ok;
    for (key, value) in &fine.fitted_constants {
        report = report.with(&format!("{key}_refined"), *value);
    }
    Ok(report)
}

/// Triples `(s1, s2, s2')` of all points with
/// `HOLDER_MIN_STEP <= d(s2, s2') / √t <= 1`.
pub fn holder_triples(space: &MetricMeasureSpace, t: f64) -> Vec<(usize, usize, usize)> {
    let n = space.len();
    let root = t.sqrt();
    let mut steps = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let v = space.distance(a, b) / root;
            if (HOLDER_MIN_STEP..=1.0).contains(&v) {
                steps.push((a, b));
            }
        }
    }
    (0..n)
        .flat_map(|s1| steps.iter().map(move |&(a, b)| (s1, a, b)))
        .collect()
}

/// Hölder fit for `|h_t(s1, s2) - h_t(s1, s2')| <= K_H v^γ_H G(s1, s2)` with
/// `v = d(s2, s2') / √t <= 1` and
/// `G = e^(-a_H d(s1, s2)^2 / t) / (|B(s1, √t)| |B(s2, √t)|)^(1/2)`.
///
/// `a_H` is half the Gaussian rate fitted on the same space, `K_H` twice the
/// largest normalized increment, and `γ_H` the largest exponent compatible with
/// `K_H`. Triples far enough apart that `d(s1, s2)^2 / t` exceeds the Gaussian
/// cutoff are skipped.
pub fn verify_holder(
    space: &MetricMeasureSpace,
    basis: &SpectralBasis,
    t_grid: &[f64],
    triples_for: impl Fn(f64) -> Vec<(usize, usize, usize)>,
) -> Result<FitReport> {
    let t_max = t_grid.iter().copied().fold(0.0, f64::max);
    let gaussian = fit_gaussian_bounds(space, basis, t_grid, &gaussian_pairs(space, t_max))?;
    let a_h = 0.5 * gaussian.constant("a").unwrap_or(f64::NAN);
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for &t in t_grid {
        let kernel = heat_kernel(basis, t)?;
        let root = t.sqrt();
        let volumes = space.ball_volumes(root);
        for (s1, s2, s2p) in triples_for(t) {
            if s1.max(s2).max(s2p) >= space.len() {
                return Err(Error::Domain("triple outside the space".into()));
            }
            let v = space.distance(s2, s2p) / root;
            if v > 1.0 + 1e-12 {
                return Err(Error::Precondition(format!(
                    "d(s2, s2') = {} exceeds sqrt(t) = {root}",
                    space.distance(s2, s2p)
                )));
            }
            let d = space.distance(s1, s2);
            if v == 0.0 || d * d / t > GAUSSIAN_EXPONENT_CUTOFF {
                continue;
            }
            let envelope = (-a_h * d * d / t).exp() / (volumes[s1] * volumes[s2]).sqrt();
            let increment = (kernel.table[s1][s2] - kernel.table[s1][s2p]).abs();
            samples.push((v, increment / envelope));
        }
    }
    if samples.is_empty() {
        return Err(Error::Sampling("no admissible Hölder triples".into()));
    }
    let k_h = 2.0 * samples.iter().map(|s| s.1).fold(0.0, f64::max);
    let exponent = samples
        .iter()
        .filter(|&&(v, r)| v < 1.0 && r > 0.0)
        .map(|&(v, r)| (k_h / r).ln() / -v.ln())
        .fold(f64::INFINITY, f64::min);
    let mut report = FitReport::new("heat.holder", samples.len())?
        .with("K_H", k_h)
        .with("gamma_H", exponent)
        .with("a_H", a_h);
    report.stable = report.all_finite() && exponent > 0.0 && k_h > 0.0;
    Ok(report)
}

/// Hölder fit at `(n_nodes, degree)` and at twice both over every admissible
/// triple, compared like [`gaussian_fit_study`].
pub fn holder_fit_study(
    params: JacobiParams,
    n_nodes: usize,
    degree: usize,
    t_grid: &[f64],
) -> Result<FitReport> {
    let fit = |n: usize, deg: usize| -> Result<FitReport> {
        let space = make_jacobi_space(params, n)?;
        let basis = build_basis(&space, params, deg)?;
        verify_holder(&space, &basis, t_grid, |t| holder_triples(&space, t))
    };
    let coarse = fit(n_nodes, degree)?;
    let fine = fit(2 * n_nodes, 2 * degree)?;
    let ok = coarse.stable && fine.stable;
    let mut report = coarse.compare(&fine, FIT_STABILITY);
    report.stable &= ok;
    for (key, value) in &fine.fitted_constants {
        report = report.with(&format!("{key}_refined"), *value);
    }
    Ok(report)
}
