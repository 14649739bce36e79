//! Integral operators on a discretized space: application, the envelope
//! Young bound, the Schur test, spectral multipliers and the dyadic band
//! decomposition sampled on a net.

use std::io::Write;

use serde::Serialize;

use crate::envelope::{Envelope, EnvelopeParams};
use crate::error::{Error, Result};
use crate::geometry::MetricMeasureSpace;
use crate::heat::HeatKernelEval;
use crate::jacobi::SpectralBasis;
use crate::nets::{build_maximal_net, build_partition, Net};
use crate::report::{relative_change, FitReport, VerificationReport, MARGIN_RTOL};

/// `|H(x, y)| <= a' E_{δ,ς}(x, y)` at every node pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domination {
    pub a_prime: f64,
    pub params: EnvelopeParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelOperator {
    /// `table[i][j] = H(x_i, x_j)`
    pub table: Vec<Vec<f64>>,
    pub domination: Option<Domination>,
}

impl KernelOperator {
    pub fn new(table: Vec<Vec<f64>>) -> Result<Self> {
        let n = table.len();
        if table.iter().any(|row| row.len() != n) {
            return Err(Error::Contract("kernel table must be square".into()));
        }
        Ok(Self {
            table,
            domination: None,
        })
    }

    pub fn from_heat(kernel: &HeatKernelEval) -> Self {
        Self {
            table: kernel.table.clone(),
            domination: None,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.table.len()
    }

    fn check_space(&self, space: &MetricMeasureSpace) -> Result<()> {
        if self.n_nodes() != space.len() {
            return Err(Error::Contract(format!(
                "operator has {} nodes but the space has {}",
                self.n_nodes(),
                space.len()
            )));
        }
        Ok(())
    }

    /// Largest `|H| / E` over node pairs.
    pub fn domination_ratio(
        &self,
        space: &MetricMeasureSpace,
        params: EnvelopeParams,
    ) -> Result<f64> {
        self.check_space(space)?;
        let env = Envelope::new(space, params)?;
        let mut worst = 0.0f64;
        for (i, row) in self.table.iter().enumerate() {
            for (j, h) in row.iter().enumerate() {
                worst = worst.max(h.abs() / env.eval(i, j));
            }
        }
        Ok(worst)
    }

    /// Attaches a certificate after checking it at every node pair.
    pub fn with_domination(
        mut self,
        space: &MetricMeasureSpace,
        a_prime: f64,
        params: EnvelopeParams,
    ) -> Result<Self> {
        let needed = self.domination_ratio(space, params)?;
        if needed > a_prime * (1.0 + MARGIN_RTOL) {
            return Err(Error::Contract(format!(
                "kernel needs a' >= {needed}, certificate claims {a_prime}"
            )));
        }
        self.domination = Some(Domination { a_prime, params });
        Ok(self)
    }

    /// Attaches the smallest valid certificate.
    pub fn fit_domination(
        self,
        space: &MetricMeasureSpace,
        params: EnvelopeParams,
    ) -> Result<Self> {
        let a_prime = self.domination_ratio(space, params)?;
        self.with_domination(space, a_prime, params)
    }
}

/// `(H f)(x_j) = Σ_i w_i H(x_i, x_j) f(x_i)`
pub fn apply_operator(
    space: &MetricMeasureSpace,
    op: &KernelOperator,
    f: &[f64],
) -> Result<Vec<f64>> {
    op.check_space(space)?;
    if f.len() != space.len() {
        return Err(Error::Contract(format!(
            "expected {} values, got {}",
            space.len(),
            f.len()
        )));
    }
    let w = space.weights();
    let n = space.len();
    Ok((0..n)
        .map(|j| (0..n).map(|i| w[i] * op.table[i][j] * f[i]).sum())
        .collect())
}

/// Weighted `L^p` norm; `p = ∞` gives the max norm.
pub fn lp_norm(weights: &[f64], f: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return f.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    weights
        .iter()
        .zip(f)
        .map(|(w, v)| w * v.abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// `1/r = 1 - 1/p + 1/q`; needs `1 <= p <= q <= ∞`.
pub fn young_exponent(p: f64, q: f64) -> Result<f64> {
    if !(p >= 1.0 && q >= p) {
        return Err(Error::Precondition(format!(
            "exponents need 1 <= p <= q, got p = {p}, q = {q}"
        )));
    }
    let inv_r = 1.0 - 1.0 / p + 1.0 / q;
    Ok(1.0 / inv_r)
}

/// Young-type bound `‖H f‖_q <= a δ^(k (1/q - 1/p)) ‖f‖_p` with
/// `a = a' â^(k (1/r - 1)) 2^(2k + 1)`, one report per trial function.
pub fn verify_young(
    space: &MetricMeasureSpace,
    op: &KernelOperator,
    p: f64,
    q: f64,
    trials: &[Vec<f64>],
    a_caret: f64,
) -> Result<Vec<VerificationReport>> {
    let dom = op
        .domination
        .ok_or_else(|| Error::Precondition("Young bound needs a domination certificate".into()))?;
    let params = dom.params;
    let kf = params.k as f64;
    if params.sigma_exp < 2.0 * kf + 1.0 {
        return Err(Error::Precondition(format!(
            "Young bound needs sigma >= 2k + 1 (sigma = {}, k = {kf})",
            params.sigma_exp
        )));
    }
    if params.delta > 1.0 {
        return Err(Error::Precondition(format!(
            "Young bound needs delta <= 1, got {}",
            params.delta
        )));
    }
    if !(a_caret > 0.0) {
        return Err(Error::Precondition(format!(
            "non-collapsing constant must be positive, got {a_caret}"
        )));
    }
    let r = young_exponent(p, q)?;
    let a = dom.a_prime * a_caret.powf(kf * (1.0 / r - 1.0)) * (2.0 * kf + 1.0).exp2();
    let scale = params.delta.powf(kf * (1.0 / q - 1.0 / p));
    let w = space.weights();
    trials
        .iter()
        .enumerate()
        .map(|(trial, f)| {
            let hf = apply_operator(space, op, f)?;
            let lhs = lp_norm(w, &hf, q);
            let rhs = a * scale * lp_norm(w, f, p);
            Ok(VerificationReport::upper("young", lhs, rhs, a)?
                .with("p", p)
                .with("q", q)
                .with("r", r)
                .with("trial", trial as f64)
                .with("delta", params.delta)
                .with("a_prime", dom.a_prime)
                .with("k", kf))
        })
        .collect()
}

/// Largest weighted `L^r` norm over the rows and columns of the kernel.
pub fn schur_constant(space: &MetricMeasureSpace, op: &KernelOperator, r: f64) -> Result<f64> {
    op.check_space(space)?;
    let n = space.len();
    let w = space.weights();
    let mut worst = 0.0f64;
    for a in 0..n {
        let row: Vec<f64> = (0..n).map(|b| op.table[a][b]).collect();
        let col: Vec<f64> = (0..n).map(|b| op.table[b][a]).collect();
        worst = worst.max(lp_norm(w, &row, r)).max(lp_norm(w, &col, r));
    }
    Ok(worst)
}

/// Schur test `‖H f‖_q <= C ‖f‖_p` with `C` from [`schur_constant`] at the
/// exponent `r` fixed by `p` and `q`; one report per trial.
pub fn verify_schur(
    space: &MetricMeasureSpace,
    op: &KernelOperator,
    p: f64,
    q: f64,
    trials: &[Vec<f64>],
) -> Result<Vec<VerificationReport>> {
    let r = young_exponent(p, q)?;
    let c = schur_constant(space, op, r)?;
    let w = space.weights();
    trials
        .iter()
        .enumerate()
        .map(|(trial, f)| {
            let hf = apply_operator(space, op, f)?;
            let lhs = lp_norm(w, &hf, q);
            let rhs = c * lp_norm(w, f, p);
            Ok(VerificationReport::upper("schur", lhs, rhs, c)?
                .with("p", p)
                .with("q", q)
                .with("r", r)
                .with("trial", trial as f64))
        })
        .collect()
}

/// Kernel `Σ_i m(i) P_i(x) P_i(y)` for a multiplier indexed by basis position.
pub fn spectral_multiplier_indexed(
    basis: &SpectralBasis,
    m: impl Fn(usize) -> f64,
) -> KernelOperator {
    let n = basis.n_nodes();
    let factors: Vec<f64> = (0..=basis.degree).map(m).collect();
    let table = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    basis
                        .values
                        .iter()
                        .zip(&factors)
                        .filter(|(_, m)| **m != 0.0)
                        .map(|(row, m)| m * (row[a] * row[b]))
                        .sum()
                })
                .collect()
        })
        .collect();
    KernelOperator {
        table,
        domination: None,
    }
}

/// Kernel `Σ_i m(β_i) P_i(x) P_i(y)`.
pub fn spectral_multiplier(basis: &SpectralBasis, m: impl Fn(f64) -> f64) -> KernelOperator {
    spectral_multiplier_indexed(basis, |i| m(basis.eigenvalues[i]))
}

/// Basis indices `start..end` of spectral block `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Block {
    pub j: usize,
    pub start: usize,
    pub end: usize,
}

/// Block of an eigenvalue: 0 for `β = 0`, 1 for `0 < β <= 4`, otherwise the
/// `j` with `4^(j-1) < β <= 4^j`.
pub fn block_index(beta: f64) -> usize {
    if beta <= 0.0 {
        0
    } else {
        ((beta.log2() / 2.0).ceil().max(1.0)) as usize
    }
}

/// Nonempty blocks covering `0..=N` in order.
pub fn band_blocks(eigenvalues: &[f64]) -> Vec<Block> {
    let mut blocks: Vec<Block> = Vec::new();
    for (i, &beta) in eigenvalues.iter().enumerate() {
        let j = block_index(beta);
        match blocks.last_mut() {
            Some(b) if b.j == j => b.end = i + 1,
            _ => blocks.push(Block {
                j,
                start: i,
                end: i + 1,
            }),
        }
    }
    blocks
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandDecomposition {
    pub blocks: Vec<Block>,
    /// `‖Q_j f‖_2^2`
    pub block_energies: Vec<f64>,
    /// `√|P_ι| (Q_j f)(ι)` per block, in net center order
    pub net_coefficients: Vec<Vec<f64>>,
    /// Nodal values of `Q_j f`.
    pub components: Vec<Vec<f64>>,
    /// `Σ_j Q_j f`
    pub reconstruction: Vec<f64>,
}

impl BandDecomposition {
    /// Largest `max(c_j / e_j, e_j / c_j)` over blocks carrying energy, with
    /// `c_j` the net-coefficient energy and `e_j` the block energy.
    pub fn frame_ratio(&self) -> f64 {
        let total: f64 = self.block_energies.iter().sum();
        self.block_energies
            .iter()
            .zip(&self.net_coefficients)
            .filter(|(e, _)| **e > 1e-20 * total.max(f64::MIN_POSITIVE))
            .map(|(e, c)| {
                let sampled: f64 = c.iter().map(|v| v * v).sum();
                (sampled / e).max(e / sampled)
            })
            .fold(1.0, f64::max)
    }

    /// CSV with header `j,center_index,coefficient`.
    pub fn write_csv<W: Write>(&self, net: &Net, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["j", "center_index", "coefficient"])?;
        for (block, coeffs) in self.blocks.iter().zip(&self.net_coefficients) {
            for (&center, c) in net.centers.iter().zip(coeffs) {
                w.write_record([block.j.to_string(), center.to_string(), c.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Splits nodal `f` into spectral blocks `Q_j f`, each applied as the kernel of
/// the block's indicator multiplier, and samples every block on the net.
pub fn band_decompose(
    space: &MetricMeasureSpace,
    basis: &SpectralBasis,
    net: &Net,
    f: &[f64],
) -> Result<BandDecomposition> {
    if basis.n_nodes() != space.len() || net.assignment.len() != space.len() {
        return Err(Error::Contract(
            "net, basis and space must share the same points".into(),
        ));
    }
    let masses = net.cell_masses(space)?;
    let blocks = band_blocks(&basis.eigenvalues);
    let mut components = Vec::with_capacity(blocks.len());
    let mut block_energies = Vec::with_capacity(blocks.len());
    let mut net_coefficients = Vec::with_capacity(blocks.len());
    for block in &blocks {
        let op = spectral_multiplier_indexed(basis, |i| {
            if (block.start..block.end).contains(&i) {
                1.0
            } else {
                0.0
            }
        });
        let qf = apply_operator(space, &op, f)?;
        block_energies.push(basis.inner(&qf, &qf));
        net_coefficients.push(
            net.centers
                .iter()
                .zip(&masses)
                .map(|(&c, m)| m.sqrt() * qf[c])
                .collect(),
        );
        components.push(qf);
    }
    let reconstruction = (0..space.len())
        .map(|x| components.iter().map(|c| c[x]).sum())
        .collect();
    Ok(BandDecomposition {
        blocks,
        block_energies,
        net_coefficients,
        components,
        reconstruction,
    })
}

/// Parseval and reconstruction reports for `f` of degree at most `N`.
pub fn band_reports(
    basis: &SpectralBasis,
    f: &[f64],
    dec: &BandDecomposition,
) -> Result<Vec<VerificationReport>> {
    let norm2 = basis.inner(f, f);
    let energy: f64 = dec.block_energies.iter().sum();
    let recon = dec
        .reconstruction
        .iter()
        .zip(f)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(vec![
        VerificationReport::upper("band.parseval", (energy - norm2).abs(), 1e-10, 1.0)?
            .with("norm_squared", norm2),
        VerificationReport::upper("band.reconstruction", recon, 1e-10, 1.0)?,
    ])
}

/// Frame ratio over `functions` on the net at `delta` and at `delta / 2`.
pub fn band_frame_study(
    space: &MetricMeasureSpace,
    basis: &SpectralBasis,
    functions: &[Vec<f64>],
    delta: f64,
) -> Result<FitReport> {
    let ratio_at = |d: f64| -> Result<f64> {
        let net = build_partition(space, &build_maximal_net(space, d)?)?;
        let mut worst = 1.0f64;
        for f in functions {
            worst = worst.max(band_decompose(space, basis, &net, f)?.frame_ratio());
        }
        Ok(worst)
    };
    let coarse = ratio_at(delta)?;
    let fine = ratio_at(delta / 2.0)?;
    let mut report = FitReport::new("band.frame", functions.len())?
        .with("F", coarse)
        .with("F_refined", fine);
    report.max_margin = relative_change(coarse, fine);
    report.stable = coarse.is_finite() && fine.is_finite();
    Ok(report)
}
