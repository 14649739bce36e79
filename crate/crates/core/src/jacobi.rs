//! Orthonormal Jacobi polynomials on `[-1, 1]` and the calculus of the Jacobi
//! operator `L f = -(w u f')' / w` with `u = 1 - x^2`.
//!
//! Everything is carried out on the Gauss–Jacobi nodes of a
//! [`MetricMeasureSpace`] built by [`crate::geometry::make_jacobi_space`]:
//! functions are nodal value vectors or coefficient vectors in the orthonormal
//! basis, and `L` acts diagonally on coefficients with eigenvalues
//! `i (i + gamma + alpha + 1)`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::geometry::{MetricKind, MetricMeasureSpace};
use crate::quadrature::GaussJacobi;
use crate::report::{FitReport, VerificationReport};

/// Exponents of the weight `(1 - x)^gamma (1 + x)^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiParams {
    pub gamma: f64,
    pub alpha: f64,
}

impl JacobiParams {
    pub const LEGENDRE: JacobiParams = JacobiParams {
        gamma: 0.0,
        alpha: 0.0,
    };

    pub fn new(gamma: f64, alpha: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > -1.0 && alpha.is_finite() && alpha > -1.0) {
            return Err(Error::Domain(format!(
                "Jacobi exponents must exceed -1, got gamma = {gamma}, alpha = {alpha}"
            )));
        }
        Ok(Self { gamma, alpha })
    }

    pub fn weight(&self, x: f64) -> f64 {
        (1.0 - x).powf(self.gamma) * (1.0 + x).powf(self.alpha)
    }

    /// `∫_{-1}^{1} w(x) dx = 2^(g+a+1) Γ(g+1) Γ(a+1) / Γ(g+a+2)`.
    pub fn total_mass(&self) -> f64 {
        let (g, a) = (self.gamma, self.alpha);
        ((g + a + 1.0) * std::f64::consts::LN_2 + ln_gamma(g + 1.0) + ln_gamma(a + 1.0)
            - ln_gamma(g + a + 2.0))
        .exp()
    }
}

/// `β_i = i (i + gamma + alpha + 1)`.
pub fn eigenvalue(i: usize, params: JacobiParams) -> f64 {
    let i = i as f64;
    i * (i + params.gamma + params.alpha + 1.0)
}

/// Orthonormal three-term recurrence
/// `b_{i+1} p_{i+1} = (x - a_i) p_i - b_i p_{i-1}`.
///
/// `diag[i] = a_i` and `off[i] = b_{i+1}` for `i < n`.
#[derive(Debug, Clone)]
pub(crate) struct Recurrence {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    pub p0: f64,
}

pub(crate) fn recurrence(params: JacobiParams, n: usize) -> Recurrence {
    // standard Jacobi (a, b) with weight (1-x)^a (1+x)^b
    let (a, b) = (params.gamma, params.alpha);
    let ab = a + b;
    let diag = (0..n)
        .map(|i| {
            if i == 0 {
                (b - a) / (ab + 2.0)
            } else {
                let s = 2.0 * i as f64 + ab;
                (b * b - a * a) / (s * (s + 2.0))
            }
        })
        .collect();
    let off = (1..=n)
        .map(|i| {
            let fi = i as f64;
            let sq = if i == 1 {
                // the (1 + a + b) factors cancel analytically
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                let s = 2.0 * fi + ab;
                4.0 * fi * (fi + a) * (fi + b) * (fi + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            sq.sqrt()
        })
        .collect();
    Recurrence {
        diag,
        off,
        p0: 1.0 / params.total_mass().sqrt(),
    }
}

/// Values and first derivatives of the orthonormal polynomials
/// `p_0..=p_degree` at `x`, using the recurrence and its derivative.
pub fn orthonormal_at(params: JacobiParams, degree: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let rec = recurrence(params, degree.max(1));
    let mut p = Vec::with_capacity(degree + 1);
    let mut d = Vec::with_capacity(degree + 1);
    p.push(rec.p0);
    d.push(0.0);
    for i in 0..degree {
        let (pm, dm) = if i == 0 {
            (0.0, 0.0)
        } else {
            (p[i - 1], d[i - 1])
        };
        let b_prev = if i == 0 { 0.0 } else { rec.off[i - 1] };
        p.push(((x - rec.diag[i]) * p[i] - b_prev * pm) / rec.off[i]);
        d.push(((x - rec.diag[i]) * d[i] + p[i] - b_prev * dm) / rec.off[i]);
    }
    (p, d)
}

/// Orthonormal Jacobi polynomial values on the nodes of a Jacobi space.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    pub params: JacobiParams,
    pub degree: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `values[i][j] = P_i(x_j)`
    pub values: Vec<Vec<f64>>,
    /// `derivatives[i][j] = P_i'(x_j)`
    pub derivatives: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
}

/// Nodal values with the sup-norm of the part lost to truncation at degree N.
#[derive(Debug, Clone, PartialEq)]
pub struct Projected {
    pub values: Vec<f64>,
    pub truncation: f64,
}

/// Nodal residual above which [`SpectralBasis::apply_l`] flags truncation.
pub const TRUNCATION_TOL: f64 = 1e-9;

/// Builds `P_0..=P_degree` on the nodes of `space`, normalized so that the
/// discrete weighted norm of every row is 1.
pub fn build_basis(
    space: &MetricMeasureSpace,
    params: JacobiParams,
    degree: usize,
) -> Result<SpectralBasis> {
    if space.metric_kind() != MetricKind::Arccos {
        return Err(Error::Contract(
            "spectral basis needs a Jacobi space with the arccos metric".into(),
        ));
    }
    let n = space.len();
    if degree + 1 > n {
        return Err(Error::Exactness {
            degree,
            required: degree + 1,
            nodes: n,
        });
    }
    let nodes = space.points().to_vec();
    let weights = space.weights().to_vec();
    let mut values = vec![vec![0.0; n]; degree + 1];
    let mut derivatives = vec![vec![0.0; n]; degree + 1];
    for (j, &x) in nodes.iter().enumerate() {
        let (p, d) = orthonormal_at(params, degree, x);
        for i in 0..=degree {
            values[i][j] = p[i];
            derivatives[i][j] = d[i];
        }
    }
    for (row, drow) in values.iter_mut().zip(derivatives.iter_mut()) {
        let norm: f64 = row
            .iter()
            .zip(&weights)
            .map(|(v, w)| w * v * v)
            .sum::<f64>()
            .sqrt();
        row.iter_mut().for_each(|v| *v /= norm);
        drow.iter_mut().for_each(|v| *v /= norm);
    }
    let eigenvalues = (0..=degree).map(|i| eigenvalue(i, params)).collect();
    Ok(SpectralBasis {
        params,
        degree,
        nodes,
        weights,
        values,
        derivatives,
        eigenvalues,
    })
}

/// Index of the last nonzero coefficient (0 for the zero vector).
pub fn poly_degree(coeffs: &[f64]) -> usize {
    coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
}

impl SpectralBasis {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.n_nodes() {
            return Err(Error::Contract(format!(
                "expected {} nodal values, got {}",
                self.n_nodes(),
                f.len()
            )));
        }
        Ok(())
    }

    fn check_coeffs(&self, c: &[f64]) -> Result<()> {
        if c.len() > self.degree + 1 {
            return Err(Error::Truncation(format!(
                "{} coefficients exceed basis degree {}",
                c.len(),
                self.degree
            )));
        }
        Ok(())
    }

    /// CSV with header `i,beta_i,node_0,...`: one row per basis function with
    /// its nodal values.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["i".to_string(), "beta_i".to_string()];
        header.extend((0..self.n_nodes()).map(|j| format!("node_{j}")));
        w.write_record(&header)?;
        for (i, row) in self.values.iter().enumerate() {
            let mut rec = vec![i.to_string(), self.eigenvalues[i].to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Weighted discrete inner product of two nodal vectors.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(f.iter().zip(g))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    /// Coefficients `⟨f, P_i⟩` for `i <= N`.
    pub fn coefficients(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f)?;
        Ok(self.values.iter().map(|row| self.inner(f, row)).collect())
    }

    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check_coeffs(coeffs)?;
        Ok(self.combine(&self.values, coeffs))
    }

    /// Nodal values of `f'` for `f` given by coefficients.
    pub fn derivative(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check_coeffs(coeffs)?;
        Ok(self.combine(&self.derivatives, coeffs))
    }

    fn combine(&self, table: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_nodes()];
        for (row, &c) in table.iter().zip(coeffs) {
            if c != 0.0 {
                out.iter_mut().zip(row).for_each(|(o, v)| *o += c * v);
            }
        }
        out
    }

    /// Projects nodal `f` onto degree `<= N` and reports what was lost.
    pub fn project(&self, f: &[f64]) -> Result<Projected> {
        let coeffs = self.coefficients(f)?;
        let values = self.combine(&self.values, &coeffs);
        let truncation = sup_diff(&values, f);
        Ok(Projected { values, truncation })
    }

    /// `L` on coefficients: multiplies coefficient `i` by `β_i`.
    pub fn apply_l_coeffs(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check_coeffs(coeffs)?;
        Ok(coeffs
            .iter()
            .zip(&self.eigenvalues)
            .map(|(c, b)| c * b)
            .collect())
    }

    /// Spectral application of `L` to nodal values. `truncation` carries the
    /// sup-norm of the component of `f` above degree `N`; callers treat values
    /// above [`TRUNCATION_TOL`] as a warning.
    pub fn apply_l(&self, f: &[f64]) -> Result<Projected> {
        let coeffs = self.coefficients(f)?;
        let truncation = sup_diff(&self.combine(&self.values, &coeffs), f);
        let lc = self.apply_l_coeffs(&coeffs)?;
        Ok(Projected {
            values: self.combine(&self.values, &lc),
            truncation,
        })
    }

    /// `ω(f, g) = ∫ (1 - x^2) f' g' w dx` by quadrature on the nodes.
    pub fn form_omega(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        let df = self.derivative(f)?;
        let dg = self.derivative(g)?;
        Ok(self
            .nodes
            .iter()
            .zip(&self.weights)
            .zip(df.iter().zip(&dg))
            .map(|((x, w), (a, b))| w * (1.0 - x * x) * a * b)
            .sum())
    }

    /// `Γ(f, g) = ½ (f Lg + g Lf - L(fg))` at the nodes.
    ///
    /// The product `fg` must stay within the basis: `deg f + deg g <= N`.
    pub fn carre_du_champ(&self, f: &[f64], g: &[f64]) -> Result<Vec<f64>> {
        self.check_coeffs(f)?;
        self.check_coeffs(g)?;
        let total = poly_degree(f) + poly_degree(g);
        if total > self.degree {
            return Err(Error::Truncation(format!(
                "deg f + deg g = {total} exceeds basis degree {}",
                self.degree
            )));
        }
        let fv = self.combine(&self.values, f);
        let gv = self.combine(&self.values, g);
        let lf = self.combine(&self.values, &self.apply_l_coeffs(f)?);
        let lg = self.combine(&self.values, &self.apply_l_coeffs(g)?);
        let prod: Vec<f64> = fv.iter().zip(&gv).map(|(a, b)| a * b).collect();
        let lprod = self.apply_l(&prod)?;
        Ok((0..self.n_nodes())
            .map(|j| 0.5 * (fv[j] * lg[j] + gv[j] * lf[j] - lprod.values[j]))
            .collect())
    }

    /// `(1 - x^2) f'(x) g'(x)` at the nodes from the derivative recurrence.
    pub fn carre_du_champ_direct(&self, f: &[f64], g: &[f64]) -> Result<Vec<f64>> {
        let df = self.derivative(f)?;
        let dg = self.derivative(g)?;
        Ok(self
            .nodes
            .iter()
            .zip(df.iter().zip(&dg))
            .map(|(x, (a, b))| (1.0 - x * x) * a * b)
            .collect())
    }

    /// `max_{i,m} |Σ_j w_j P_i(x_j) P_m(x_j) - δ_im|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..=self.degree {
            for m in i..=self.degree {
                let g = self.inner(&self.values[i], &self.values[m]);
                let target = if i == m { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    pub fn orthonormality_report(&self) -> Result<VerificationReport> {
        Ok(VerificationReport::upper(
            "jacobi.orthonormality",
            self.orthonormality_defect(),
            1e-10,
            1.0,
        )?
        .with("degree", self.degree as f64)
        .with("n_nodes", self.n_nodes() as f64))
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Form symmetry `⟨Lf, g⟩ = ω(f, g) = ⟨f, Lg⟩` for one pair.
pub fn form_report(basis: &SpectralBasis, f: &[f64], g: &[f64]) -> Result<VerificationReport> {
    let omega = basis.form_omega(f, g)?;
    let fv = basis.synthesize(f)?;
    let gv = basis.synthesize(g)?;
    let lf = basis.synthesize(&basis.apply_l_coeffs(f)?)?;
    let lg = basis.synthesize(&basis.apply_l_coeffs(g)?)?;
    let left = basis.inner(&lf, &gv);
    let right = basis.inner(&fv, &lg);
    let defect = (left - omega).abs().max((right - omega).abs());
    let scale = omega.abs().max(1.0);
    Ok(
        VerificationReport::upper("jacobi.form", defect, 1e-9 * scale, 1.0)?
            .with("omega", omega)
            .with("deg_f", poly_degree(f) as f64)
            .with("deg_g", poly_degree(g) as f64),
    )
}

/// Operator-identity Γ against `(1 - x^2) f' g'` for one pair.
pub fn carre_du_champ_report(
    basis: &SpectralBasis,
    f: &[f64],
    g: &[f64],
) -> Result<VerificationReport> {
    let op = basis.carre_du_champ(f, g)?;
    let direct = basis.carre_du_champ_direct(f, g)?;
    Ok(
        VerificationReport::upper("jacobi.carre_du_champ", sup_diff(&op, &direct), 1e-8, 1.0)?
            .with("deg_f", poly_degree(f) as f64)
            .with("deg_g", poly_degree(g) as f64),
    )
}

/// A ball for the Poincaré check, centred at an ambient coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: f64,
    pub radius: f64,
}

/// Points of the angular Gauss–Legendre rule used for ball integrals.
const BALL_RULE_POINTS: usize = 192;

fn ball_rule() -> Result<GaussJacobi> {
    GaussJacobi::new(JacobiParams::LEGENDRE, BALL_RULE_POINTS)
}

/// `∫_B |f - f_B|^2 dσ / (r^2 ∫_B Γ(f, f) dσ)` for `f` given by coefficients.
/// `None` when `f` is constant on the ball.
///
/// The ball is the arc `|θ - arccos c| < r` of `θ = arccos x`; both integrals
/// use a Gauss–Legendre rule in `θ` with `dσ = w(cos θ) sin θ dθ`, so they do
/// not depend on where the space's nodes fall.
pub fn poincare_ratio(basis: &SpectralBasis, f: &[f64], ball: Ball) -> Result<Option<f64>> {
    ratio_with_rule(basis, f, ball, &ball_rule()?)
}

fn ratio_with_rule(
    basis: &SpectralBasis,
    f: &[f64],
    ball: Ball,
    rule: &GaussJacobi,
) -> Result<Option<f64>> {
    basis.check_coeffs(f)?;
    if !(-1.0..=1.0).contains(&ball.center) {
        return Err(Error::Domain(format!(
            "ball center {} lies outside [-1, 1]",
            ball.center
        )));
    }
    if !(ball.radius > 0.0) {
        return Err(Error::DegenerateBall {
            center: ball.center,
            radius: ball.radius,
        });
    }
    let theta = ball.center.acos();
    let lo = (theta - ball.radius).max(0.0);
    let hi = (theta + ball.radius).min(std::f64::consts::PI);
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let degree = f.len().saturating_sub(1);
    let mut samples = Vec::with_capacity(rule.len());
    for (z, wz) in rule.nodes.iter().zip(&rule.weights) {
        let angle = mid + half * z;
        let x = angle.cos();
        let wt = half * wz * basis.params.weight(x) * angle.sin();
        let (p, d) = orthonormal_at(basis.params, degree, x);
        let fx: f64 = f.iter().zip(&p).map(|(c, v)| c * v).sum();
        let dfx: f64 = f.iter().zip(&d).map(|(c, v)| c * v).sum();
        samples.push((wt, fx, (1.0 - x * x) * dfx * dfx));
    }
    let mass: f64 = samples.iter().map(|s| s.0).sum();
    let mean = samples.iter().map(|s| s.0 * s.1).sum::<f64>() / mass;
    let lhs: f64 = samples.iter().map(|s| s.0 * (s.1 - mean).powi(2)).sum();
    let energy: f64 = samples.iter().map(|s| s.0 * s.2).sum();
    let size: f64 = samples.iter().map(|s| s.0 * s.1 * s.1).sum();
    // constants on the ball: both sides are rounding noise
    if energy <= 1e-13 * size.max(f64::MIN_POSITIVE) {
        return Ok(None);
    }
    Ok(Some(lhs / (ball.radius * ball.radius * energy)))
}

/// Smallest `K` with `∫_B |f - f_B|^2 <= K r^2 ∫_B Γ(f, f)` over all sampled
/// functions (coefficient vectors) and balls (radii must not exceed 1).
pub fn poincare_constant(
    basis: &SpectralBasis,
    functions: &[Vec<f64>],
    balls: &[Ball],
) -> Result<FitReport> {
    if let Some(b) = balls.iter().find(|b| !(b.radius > 0.0 && b.radius <= 1.0)) {
        return Err(Error::Precondition(format!(
            "Poincaré balls need 0 < r <= 1, got r = {}",
            b.radius
        )));
    }
    let rule = ball_rule()?;
    let mut worst = 0.0f64;
    let mut count = 0;
    for f in functions {
        for &ball in balls {
            if let Some(ratio) = ratio_with_rule(basis, f, ball, &rule)? {
                worst = worst.max(ratio);
                count += 1;
            }
        }
    }
    Ok(FitReport::new("jacobi.poincare", count)?.with("K", worst))
}

/// Poincaré constant with the basis built at `n_nodes` and at `2 n_nodes`
/// (degree doubled as well); stable when the two differ by less than 10 %.
pub fn verify_poincare(
    params: JacobiParams,
    n_nodes: usize,
    degree: usize,
    functions: &[Vec<f64>],
    balls: &[Ball],
) -> Result<FitReport> {
    let fit = |n: usize, deg: usize| -> Result<FitReport> {
        let space = crate::geometry::make_jacobi_space(params, n)?;
        let basis = build_basis(&space, params, deg)?;
        poincare_constant(&basis, functions, balls)
    };
    let coarse = fit(n_nodes, degree)?;
    let fine = fit(2 * n_nodes, 2 * degree)?;
    let refined = fine.constant("K").unwrap_or(f64::NAN);
    Ok(coarse.compare(&fine, 0.10).with("K_refined", refined))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_jacobi_space;

    fn legendre(n: usize, degree: usize) -> (MetricMeasureSpace, SpectralBasis) {
        let space = make_jacobi_space(JacobiParams::LEGENDRE, n).unwrap();
        let basis = build_basis(&space, JacobiParams::LEGENDRE, degree).unwrap();
        (space, basis)
    }

    #[test]
    fn basis_csv_rows() {
        let (_, basis) = legendre(6, 3);
        let mut buf = Vec::new();
        basis.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "i,beta_i,node_0,node_1,node_2,node_3,node_4,node_5"
        );
        assert!(lines.nth(1).unwrap().starts_with("1,2,"));
    }

    #[test]
    fn eigenvalue_formula() {
        assert_eq!(eigenvalue(0, JacobiParams::new(0.3, -0.7).unwrap()), 0.0);
        assert_eq!(eigenvalue(1, JacobiParams::LEGENDRE), 2.0);
        assert_eq!(eigenvalue(2, JacobiParams::new(0.5, 0.5).unwrap()), 8.0);
    }

    #[test]
    fn params_out_of_range() {
        assert!(JacobiParams::new(-1.0, 0.0).is_err());
        assert!(JacobiParams::new(0.0, f64::NAN).is_err());
    }

    #[test]
    fn low_degree_legendre_shapes() {
        let (_, basis) = legendre(16, 3);
        for (j, &x) in basis.nodes.iter().enumerate() {
            assert!((basis.values[0][j] - 0.5f64.sqrt()).abs() < 1e-14);
            assert!((basis.values[1][j] - x * 1.5f64.sqrt()).abs() < 1e-14);
            assert!((basis.derivatives[1][j] - 1.5f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn exactness_error_when_degree_too_large() {
        let space = make_jacobi_space(JacobiParams::LEGENDRE, 2).unwrap();
        assert!(matches!(
            build_basis(&space, JacobiParams::LEGENDRE, 40),
            Err(Error::Exactness { .. })
        ));
    }

    #[test]
    fn l_on_basis_functions_and_constants() {
        let (_, basis) = legendre(32, 12);
        for i in 0..=12 {
            let out = basis.apply_l(&basis.values[i]).unwrap();
            for j in 0..32 {
                let expect = basis.eigenvalues[i] * basis.values[i][j];
                assert!((out.values[j] - expect).abs() < 1e-9, "i = {i}");
            }
        }
        let out = basis.apply_l(&[3.0; 32]).unwrap();
        assert!(out.values.iter().all(|v| v.abs() < 1e-11));
    }

    #[test]
    fn l_of_x_squared() {
        let (_, basis) = legendre(32, 10);
        let f: Vec<f64> = basis.nodes.iter().map(|x| x * x).collect();
        let out = basis.apply_l(&f).unwrap();
        assert!(out.truncation < 1e-13);
        for (v, x) in out.values.iter().zip(&basis.nodes) {
            assert!((v - (-2.0 + 6.0 * x * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_is_flagged() {
        let (_, basis) = legendre(32, 4);
        let f: Vec<f64> = basis.nodes.iter().map(|x| x.powi(9)).collect();
        assert!(basis.apply_l(&f).unwrap().truncation > TRUNCATION_TOL);
    }

    #[test]
    fn omega_examples() {
        let (_, basis) = legendre(32, 10);
        let p1 = [0.0, 1.0];
        assert!((basis.form_omega(&p1, &p1).unwrap() - 2.0).abs() < 1e-13);
        let c = [1.3];
        assert_eq!(basis.form_omega(&c, &[0.2, -0.4, 0.9]).unwrap(), 0.0);
    }

    #[test]
    fn gamma_of_x_is_one_minus_x_squared() {
        let (_, basis) = legendre(32, 10);
        // x = sqrt(2/3) P_1
        let x = [0.0, (2.0f64 / 3.0).sqrt()];
        let g = basis.carre_du_champ(&x, &x).unwrap();
        for (v, node) in g.iter().zip(&basis.nodes) {
            assert!((v - (1.0 - node * node)).abs() < 1e-12);
        }
        let constant = [2.0];
        assert!(basis
            .carre_du_champ(&constant, &[0.1, 0.5, -0.3])
            .unwrap()
            .iter()
            .all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn gamma_degree_overflow() {
        let (_, basis) = legendre(16, 6);
        let f = [0.0, 0.0, 0.0, 0.0, 1.0];
        assert!(matches!(
            basis.carre_du_champ(&f, &f),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn poincare_whole_space_p1() {
        let (_, basis) = legendre(64, 10);
        let r = std::f64::consts::PI;
        let ratio = poincare_ratio(
            &basis,
            &[0.0, 1.0],
            Ball {
                center: 0.0,
                radius: r,
            },
        )
        .unwrap()
        .unwrap();
        // ∫ P_1^2 = 1 and ∫ (1 - x^2) (3/2) dx = 2
        assert!((ratio - 1.0 / (2.0 * r * r)).abs() < 1e-12);
        assert_eq!(
            poincare_ratio(
                &basis,
                &[1.0],
                Ball {
                    center: 0.0,
                    radius: 0.5
                }
            )
            .unwrap(),
            None
        );
    }
}
