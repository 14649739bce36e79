//! Command-line runs: the full verification suite, kernel export, net export
//! and band decomposition export.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::envelope::{
    envelope_lp_norm, verify_envelope_scaling, verify_lemma_integrals, EnvelopeParams,
};
use crate::error::{Error, Result};
use crate::geometry::{
    doubling_profile_exhaustive, make_jacobi_space, verify_ball_growth, BallGrowthSamples,
    DoublingProfile, MetricMeasureSpace,
};
use crate::heat::{
    gaussian_fit_study, heat_kernel, holder_fit_study, verify_eigen_action, verify_markov,
    verify_semigroup,
};
use crate::jacobi::{
    build_basis, carre_du_champ_report, form_report, verify_poincare, Ball, JacobiParams,
    SpectralBasis,
};
use crate::nets::{
    build_maximal_net, build_partition, net_invariant_reports, verify_net_sums, Net,
};
use crate::operators::{
    band_decompose, band_frame_study, band_reports, lp_norm, verify_schur, verify_young,
    KernelOperator,
};
use crate::report::{aggregate, all_passed, CheckSummary, FitReport, VerificationReport};
use crate::sampling::Sampler;

/// Samples per inequality family in the verification suite.
pub const SUITE_SAMPLES: usize = 50;
/// Random trial functions per exponent pair in the operator bounds.
pub const OPERATOR_TRIALS: usize = 20;
/// Times used by the Gaussian and Hölder fits.
pub const FIT_TIMES: [f64; 5] = [0.05, 0.1, 0.2, 0.5, 1.0];
/// `(p, q)` pairs for the Young and Schur bounds.
pub const EXPONENT_PAIRS: [(f64, f64); 5] = [
    (1.0, 1.0),
    (1.0, 2.0),
    (2.0, 2.0),
    (1.0, f64::INFINITY),
    (2.0, f64::INFINITY),
];

#[derive(Debug, Parser)]
#[command(
    name = "heatframe",
    version,
    about = "Heat kernel, net and frame checks on Jacobi spaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every inequality check and write a JSON summary
    Verify(CommonArgs),
    /// Write the heat kernel table as CSV
    Kernel(CommonArgs),
    /// Write a maximal net as CSV plus its partition as JSON
    Net(CommonArgs),
    /// Write the band decomposition of a function as CSV
    Decompose {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated basis coefficients of the function; random from the seed if absent
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        coeffs: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
    #[arg(long, default_value_t = 40)]
    pub degree: usize,
    #[arg(long, default_value_t = 0.5)]
    pub t: f64,
    #[arg(long, default_value_t = 0.2)]
    pub delta: f64,
    /// Envelope decay exponent; 2k + 1 if absent
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Use this doubling exponent instead of the estimated one
    #[arg(long)]
    pub k_override: Option<u32>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output path; standard output if absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Verify,
    Kernel,
    Net,
    Decompose,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub gamma: f64,
    pub alpha: f64,
    pub n_nodes: usize,
    pub degree: usize,
    pub t: f64,
    pub delta: f64,
    pub sigma_exp: Option<f64>,
    pub k_override: Option<u32>,
    pub seed: u64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub coeffs: Option<Vec<f64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: CommandKind::Verify,
            gamma: 0.0,
            alpha: 0.0,
            n_nodes: 64,
            degree: 40,
            t: 0.5,
            delta: 0.2,
            sigma_exp: None,
            k_override: None,
            seed: 1,
            out: None,
            coeffs: None,
        }
    }
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Self {
        let (command, common, coeffs) = match cli.command {
            Command::Verify(c) => (CommandKind::Verify, c, None),
            Command::Kernel(c) => (CommandKind::Kernel, c, None),
            Command::Net(c) => (CommandKind::Net, c, None),
            Command::Decompose { common, coeffs } => (CommandKind::Decompose, common, coeffs),
        };
        Self {
            command,
            gamma: common.gamma,
            alpha: common.alpha,
            n_nodes: common.nodes,
            degree: common.degree,
            t: common.t,
            delta: common.delta,
            sigma_exp: common.sigma,
            k_override: common.k_override,
            seed: common.seed,
            out: common.out,
            coeffs,
        }
    }

    pub fn params(&self) -> Result<JacobiParams> {
        JacobiParams::new(self.gamma, self.alpha)
    }

    fn validate(&self) -> Result<()> {
        self.params()?;
        if self.n_nodes < 2 {
            return Err(Error::Domain(format!(
                "need at least 2 nodes, got {}",
                self.n_nodes
            )));
        }
        if self.degree + 1 > self.n_nodes {
            return Err(Error::Exactness {
                degree: self.degree,
                required: self.degree + 1,
                nodes: self.n_nodes,
            });
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::Domain(format!("t must be positive, got {}", self.t)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Domain(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if let Some(s) = self.sigma_exp {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Domain(format!("sigma must be positive, got {s}")));
            }
        }
        if self.k_override == Some(0) {
            return Err(Error::Domain("k override must be at least 1".into()));
        }
        Ok(())
    }
}

/// Fit outcome; fits that cannot run (for example a truncation too short for
/// the smallest time) keep the error text instead of a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitOutcome {
    pub bound_id: String,
    pub report: Option<FitReport>,
    pub error: Option<String>,
}

impl FitOutcome {
    fn from_result(bound_id: &str, r: Result<FitReport>) -> Self {
        match r {
            Ok(report) => Self {
                bound_id: bound_id.to_string(),
                report: Some(report),
                error: None,
            },
            Err(e) => Self {
                bound_id: bound_id.to_string(),
                report: None,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub config: RunConfig,
    pub profile: DoublingProfile,
    pub k: u32,
    pub sigma_exp: f64,
    pub passed: bool,
    pub summaries: Vec<CheckSummary>,
    pub fits: Vec<FitOutcome>,
}

/// Space, basis, doubling data and the exponents in use for a config.
pub struct Setup {
    pub params: JacobiParams,
    pub space: MetricMeasureSpace,
    pub basis: SpectralBasis,
    pub profile: DoublingProfile,
    pub k: u32,
    pub sigma_exp: f64,
}

pub fn setup(config: &RunConfig) -> Result<Setup> {
    config.validate()?;
    let params = config.params()?;
    let space = make_jacobi_space(params, config.n_nodes)?;
    let basis = build_basis(&space, params, config.degree)?;
    let profile = doubling_profile_exhaustive(&space)?;
    let k = config.k_override.unwrap_or_else(|| profile.k());
    let sigma_exp = config.sigma_exp.unwrap_or((2 * k + 1) as f64);
    Ok(Setup {
        params,
        space,
        basis,
        profile,
        k,
        sigma_exp,
    })
}

/// Random function of degree at most `N` as nodal values.
fn random_function(basis: &SpectralBasis, sampler: &mut Sampler) -> Result<Vec<f64>> {
    basis.synthesize(&sampler.coefficients(basis.degree))
}

/// Every check of the suite; the summary's `passed` gates the exit code.
pub fn run_suite(config: &RunConfig) -> Result<(Vec<VerificationReport>, VerifySummary)> {
    let Setup {
        params,
        space,
        basis,
        profile,
        k,
        sigma_exp,
    } = setup(config)?;
    let mut rng = Sampler::new(config.seed);
    let n = space.len();
    let delta = config.delta;
    let mut reports: Vec<VerificationReport> = Vec::new();

    // ball growth
    let diam = space.diameter();
    let mesh = space.mesh_width();
    let mut samples = BallGrowthSamples::default();
    for _ in 0..SUITE_SAMPLES {
        let r = rng.uniform(mesh, diam);
        let beta = rng.uniform(1.0, 4.0);
        samples.dilation.push((rng.index(n), r, beta));
        let r = rng.uniform(mesh, diam);
        samples.recentering.push((rng.index(n), rng.index(n), r));
        samples.lower.push(rng.uniform(mesh, 1.0));
        let r = rng.uniform(mesh, diam / 3.0);
        samples.reverse.push((rng.index(n), r));
    }
    reports.extend(verify_ball_growth(&space, &profile, k, &samples)?);

    // envelope algebra and integral bounds
    let env_params = EnvelopeParams::new(delta, sigma_exp, k)?;
    for beta in [0.5, 2.0] {
        let pairs = rng.pairs(n, SUITE_SAMPLES);
        reports.extend(verify_envelope_scaling(&space, env_params, beta, &pairs)?);
    }
    for p in [1.0, 2.0, 4.0] {
        for _ in 0..SUITE_SAMPLES {
            match envelope_lp_norm(&space, env_params, rng.index(n), p) {
                Ok(r) => reports.push(r),
                Err(Error::Domain(_)) => break,
                Err(e) => return Err(e),
            }
        }
    }
    let pairs = rng.pairs(n, SUITE_SAMPLES);
    reports.extend(verify_lemma_integrals(&space, env_params, &pairs)?);

    // nets
    let net = build_partition(&space, &build_maximal_net(&space, delta)?)?;
    reports.extend(net_invariant_reports(&space, &net)?);
    for _ in 0..SUITE_SAMPLES {
        let (s1, s2) = (rng.index(n), rng.index(n));
        let delta_star = delta * rng.uniform(1.0, 3.0);
        reports.extend(verify_net_sums(
            &space, &net, s1, s2, delta_star, sigma_exp, k,
        )?);
    }

    // Jacobi calculus
    reports.push(basis.orthonormality_report()?);
    let half = basis.degree / 2;
    for _ in 0..OPERATOR_TRIALS {
        let f = rng.coefficients(half);
        let g = rng.coefficients(half);
        reports.push(form_report(&basis, &f, &g)?);
        reports.push(carre_du_champ_report(&basis, &f, &g)?);
    }

    // heat semigroup identities
    let mut times = vec![0.05, 0.1, 0.5, 1.0, config.t];
    times.sort_by(f64::total_cmp);
    times.dedup();
    for &t in &times {
        reports.push(verify_markov(&space, &heat_kernel(&basis, t)?)?);
    }
    for _ in 0..10 {
        let (t, s) = (rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0));
        reports.push(verify_semigroup(&space, &basis, t, s)?);
    }
    let top = basis.degree.min(10);
    for t in [0.1, 0.5] {
        reports.extend(verify_eigen_action(
            &space,
            &basis,
            &heat_kernel(&basis, t)?,
            top,
        )?);
    }

    // operator bounds on the heat kernel at t = δ^2
    let kernel = KernelOperator::from_heat(&heat_kernel(&basis, delta * delta)?);
    let young_ok = sigma_exp >= (2 * k + 1) as f64 && delta <= 1.0;
    let certified = if young_ok {
        Some(kernel.clone().fit_domination(&space, env_params)?)
    } else {
        None
    };
    let a_caret = (-(k as f64)).exp2() * profile.a_noncollapse;
    for (p, q) in EXPONENT_PAIRS {
        let trials: Vec<Vec<f64>> = (0..OPERATOR_TRIALS)
            .map(|_| {
                let f = random_function(&basis, &mut rng)?;
                let norm = lp_norm(space.weights(), &f, p);
                Ok(f.iter().map(|v| v / norm).collect())
            })
            .collect::<Result<_>>()?;
        if let Some(op) = &certified {
            reports.extend(verify_young(&space, op, p, q, &trials, a_caret)?);
        }
        reports.extend(verify_schur(&space, &kernel, p, q, &trials)?);
    }

    // band decomposition
    let functions: Vec<Vec<f64>> = (0..OPERATOR_TRIALS)
        .map(|_| random_function(&basis, &mut rng))
        .collect::<Result<_>>()?;
    for f in &functions {
        let dec = band_decompose(&space, &basis, &net, f)?;
        reports.extend(band_reports(&basis, f, &dec)?);
    }

    // fits (reported, never gating)
    let mut fits = vec![
        FitOutcome::from_result(
            "heat.gaussian",
            gaussian_fit_study(params, config.n_nodes, config.degree, &FIT_TIMES),
        ),
        FitOutcome::from_result(
            "heat.holder",
            holder_fit_study(params, config.n_nodes, config.degree, &FIT_TIMES),
        ),
    ];
    let poly: Vec<Vec<f64>> = (0..5)
        .map(|_| rng.coefficients(basis.degree.min(10)))
        .collect();
    let balls: Vec<Ball> = (0..SUITE_SAMPLES)
        .map(|_| Ball {
            center: rng.uniform(-1.0, 1.0),
            radius: rng.uniform(0.05, 1.0),
        })
        .collect();
    fits.push(FitOutcome::from_result(
        "jacobi.poincare",
        verify_poincare(params, config.n_nodes, config.degree, &poly, &balls),
    ));
    fits.push(FitOutcome::from_result(
        "band.frame",
        band_frame_study(&space, &basis, &functions[..5], delta),
    ));

    let summary = VerifySummary {
        config: config.clone(),
        profile,
        k,
        sigma_exp,
        passed: all_passed(&reports),
        summaries: aggregate(&reports)?,
        fits,
    };
    Ok((reports, summary))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Runs the suite and writes the JSON summary; `Ok(true)` iff every asserted
/// check passed.
pub fn run_verify(config: &RunConfig) -> Result<bool> {
    let (_, summary) = run_suite(config)?;
    let mut out = open_output(config.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &summary)?;
    writeln!(out)?;
    out.flush()?;
    Ok(summary.passed)
}

pub fn run_kernel(config: &RunConfig) -> Result<bool> {
    config.validate()?;
    let params = config.params()?;
    let space = make_jacobi_space(params, config.n_nodes)?;
    let basis = build_basis(&space, params, config.degree)?;
    let kernel = heat_kernel(&basis, config.t)?;
    kernel.write_csv(open_output(config.out.as_deref())?)?;
    Ok(true)
}

/// Net as CSV (`center,point,cell_mass`, one row per center) and, when an
/// output path is given, the JSON net next to it with extension `.json`.
pub fn run_net(config: &RunConfig) -> Result<bool> {
    config.validate()?;
    let space = make_jacobi_space(config.params()?, config.n_nodes)?;
    let net = build_partition(&space, &build_maximal_net(&space, config.delta)?)?;
    write_net_csv(&space, &net, open_output(config.out.as_deref())?)?;
    if let Some(path) = &config.out {
        let file = BufWriter::new(File::create(path.with_extension("json"))?);
        serde_json::to_writer(file, &net)?;
    }
    Ok(true)
}

pub fn write_net_csv<W: Write>(space: &MetricMeasureSpace, net: &Net, writer: W) -> Result<()> {
    let masses = net.cell_masses(space)?;
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["center", "point", "cell_mass"])?;
    for (&c, m) in net.centers.iter().zip(&masses) {
        w.write_record([c.to_string(), space.points()[c].to_string(), m.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run_decompose(config: &RunConfig) -> Result<bool> {
    let Setup { space, basis, .. } = setup(config)?;
    let coeffs = match &config.coeffs {
        Some(c) => c.clone(),
        None => Sampler::new(config.seed).coefficients(basis.degree),
    };
    let f = basis.synthesize(&coeffs)?;
    let net = build_partition(&space, &build_maximal_net(&space, config.delta)?)?;
    let dec = band_decompose(&space, &basis, &net, &f)?;
    dec.write_csv(&net, open_output(config.out.as_deref())?)?;
    Ok(true)
}

pub fn run(config: &RunConfig) -> Result<bool> {
    match config.command {
        CommandKind::Verify => run_verify(config),
        CommandKind::Kernel => run_kernel(config),
        CommandKind::Net => run_net(config),
        CommandKind::Decompose => run_decompose(config),
    }
}
