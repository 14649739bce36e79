//! The localization envelope
//! `E(s1, s2) = (|B(s1, δ)| |B(s2, δ)|)^(-1/2) (1 + d(s1, s2) / δ)^(-ς)`
//! and checks of its scaling and integral bounds.

use crate::error::{Error, Result};
use crate::geometry::MetricMeasureSpace;
use crate::report::VerificationReport;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeParams {
    pub delta: f64,
    /// Decay exponent ς.
    pub sigma_exp: f64,
    /// Doubling exponent used in the constants.
    pub k: u32,
}

impl EnvelopeParams {
    pub fn new(delta: f64, sigma_exp: f64, k: u32) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Domain(format!(
                "delta must be positive, got {delta}"
            )));
        }
        if !(sigma_exp > 0.0 && sigma_exp.is_finite()) {
            return Err(Error::Domain(format!(
                "sigma must be positive, got {sigma_exp}"
            )));
        }
        if k == 0 {
            return Err(Error::Domain(
                "doubling exponent k must be at least 1".into(),
            ));
        }
        Ok(Self {
            delta,
            sigma_exp,
            k,
        })
    }

    /// `ς = 2k + 1`.
    pub fn with_default_sigma(delta: f64, k: u32) -> Result<Self> {
        Self::new(delta, (2 * k + 1) as f64, k)
    }

    pub fn with_delta(self, delta: f64) -> Result<Self> {
        Self::new(delta, self.sigma_exp, self.k)
    }

    fn kf(&self) -> f64 {
        self.k as f64
    }

    /// `(1 + d / δ)^(-exponent)`
    pub fn decay(&self, d: f64, exponent: f64) -> f64 {
        (1.0 + d / self.delta).powf(-exponent)
    }
}

/// Constants of the integral bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateConstants {
    k: f64,
    sigma: f64,
}

impl EstimateConstants {
    pub fn new(params: &EnvelopeParams) -> Self {
        Self {
            k: params.kf(),
            sigma: params.sigma_exp,
        }
    }

    /// `(2^-k - 2^-ς)^-1`, needs `ς > k`.
    pub fn a1(&self) -> Result<f64> {
        if self.sigma <= self.k {
            return Err(Error::Precondition(format!(
                "a1 needs sigma > k (sigma = {}, k = {})",
                self.sigma, self.k
            )));
        }
        Ok(1.0 / ((-self.k).exp2() - (-self.sigma).exp2()))
    }

    /// `2^(ς+k+1) / (2^-k - 2^(k-ς))`, needs `ς > 2k`.
    pub fn a2(&self) -> Result<f64> {
        if self.sigma <= 2.0 * self.k {
            return Err(Error::Precondition(format!(
                "a2 needs sigma > 2k (sigma = {}, k = {})",
                self.sigma, self.k
            )));
        }
        Ok((self.sigma + self.k + 1.0).exp2() / ((-self.k).exp2() - (self.k - self.sigma).exp2()))
    }

    /// `(2^(kp/2) / (2^-k - 2^(-(ς - k/2) p)))^(1/p)`, needs `ς > k (1/2 + 1/p)`.
    pub fn a_p(&self, p: f64) -> Result<f64> {
        if !(p > 0.0) {
            return Err(Error::Domain(format!("p must be positive, got {p}")));
        }
        if self.sigma <= self.k * (0.5 + 1.0 / p) {
            return Err(Error::Domain(format!(
                "the L^{p} bound needs sigma > k (1/2 + 1/p) (sigma = {}, k = {})",
                self.sigma, self.k
            )));
        }
        let denom = (-self.k).exp2() - (-(self.sigma - self.k / 2.0) * p).exp2();
        Ok(((self.k * p / 2.0).exp2() / denom).powf(1.0 / p))
    }
}

/// Envelope with the ball volumes `|B(s, δ)|` of every point cached.
#[derive(Debug, Clone)]
pub struct Envelope<'a> {
    space: &'a MetricMeasureSpace,
    params: EnvelopeParams,
    volumes: Vec<f64>,
}

impl<'a> Envelope<'a> {
    pub fn new(space: &'a MetricMeasureSpace, params: EnvelopeParams) -> Result<Self> {
        let volumes = space.ball_volumes(params.delta);
        if let Some(center) = volumes.iter().position(|&v| v <= 0.0) {
            return Err(Error::Resolution {
                center,
                radius: params.delta,
            });
        }
        Ok(Self {
            space,
            params,
            volumes,
        })
    }

    pub fn params(&self) -> &EnvelopeParams {
        &self.params
    }

    /// `|B(s, δ)|`
    pub fn volume(&self, s: usize) -> f64 {
        self.volumes[s]
    }

    pub fn eval(&self, s1: usize, s2: usize) -> f64 {
        let d = self.space.distance(s1, s2);
        (self.volumes[s1] * self.volumes[s2]).sqrt().recip()
            * self.params.decay(d, self.params.sigma_exp)
    }
}

fn check_point(space: &MetricMeasureSpace, s: usize) -> Result<()> {
    if s >= space.len() {
        return Err(Error::Domain(format!(
            "point {s} is not in a {}-point space",
            space.len()
        )));
    }
    Ok(())
}

pub fn envelope(
    space: &MetricMeasureSpace,
    params: EnvelopeParams,
    s1: usize,
    s2: usize,
) -> Result<f64> {
    check_point(space, s1)?;
    check_point(space, s2)?;
    let delta = params.delta;
    let v1 = space.ball_volume(s1, delta)?;
    let v2 = space.ball_volume(s2, delta)?;
    if v1 <= 0.0 {
        return Err(Error::Resolution {
            center: s1,
            radius: delta,
        });
    }
    if v2 <= 0.0 {
        return Err(Error::Resolution {
            center: s2,
            radius: delta,
        });
    }
    Ok((v1 * v2).sqrt().recip() * params.decay(space.distance(s1, s2), params.sigma_exp))
}

/// `(∫ E(s1, y)^p dσ(y))^(1/p)` against `a(p) |B(s1, δ)|^(1/p - 1)`.
pub fn envelope_lp_norm(
    space: &MetricMeasureSpace,
    params: EnvelopeParams,
    s1: usize,
    p: f64,
) -> Result<VerificationReport> {
    check_point(space, s1)?;
    let a = EstimateConstants::new(&params).a_p(p)?;
    let env = Envelope::new(space, params)?;
    let integral: f64 = (0..space.len())
        .map(|y| space.weights()[y] * env.eval(s1, y).powf(p))
        .sum();
    let norm = integral.powf(1.0 / p);
    let bound = a * env.volume(s1).powf(1.0 / p - 1.0);
    Ok(VerificationReport::upper("envelope.lp", norm, bound, a)?
        .with("s1", s1 as f64)
        .with("p", p)
        .with("delta", params.delta)
        .with("sigma", params.sigma_exp)
        .with("k", params.kf()))
}

/// Pointwise scaling bounds on sampled pairs: the one-volume form for every
/// pair, then `E_{βδ} <= (2/β)^k E_δ` when `β < 1` or `E_{βδ} <= β^ς E_δ`
/// when `β >= 1`.
pub fn verify_envelope_scaling(
    space: &MetricMeasureSpace,
    params: EnvelopeParams,
    beta: f64,
    pairs: &[(usize, usize)],
) -> Result<Vec<VerificationReport>> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Precondition(format!(
            "beta must be positive, got {beta}"
        )));
    }
    let base = Envelope::new(space, params)?;
    let scaled = Envelope::new(space, params.with_delta(beta * params.delta)?)?;
    let kf = params.kf();
    let sigma = params.sigma_exp;
    let mut out = Vec::with_capacity(2 * pairs.len());
    for &(s1, s2) in pairs {
        check_point(space, s1)?;
        check_point(space, s2)?;
        let e = base.eval(s1, s2);
        let d = space.distance(s1, s2);
        let c_one = (kf / 2.0).exp2();
        let rhs_one = c_one / base.volume(s1) * (1.0 + d / params.delta).powf(sigma - kf / 2.0);
        out.push(
            VerificationReport::upper("envelope.one_volume", e, rhs_one, c_one)?
                .with("s1", s1 as f64)
                .with("s2", s2 as f64)
                .with("delta", params.delta),
        );
        let e_scaled = scaled.eval(s1, s2);
        let (id, constant) = if beta < 1.0 {
            ("envelope.shrink", (2.0 / beta).powf(kf))
        } else {
            ("envelope.grow", beta.powf(sigma))
        };
        out.push(
            VerificationReport::upper(id, e_scaled, constant * e, constant)?
                .with("s1", s1 as f64)
                .with("s2", s2 as f64)
                .with("beta", beta)
                .with("delta", params.delta),
        );
    }
    Ok(out)
}

/// Integral bounds on sampled pairs. Parts whose exponent condition fails
/// (`ς > k` for a and b, `ς > 2k` for c and self-reproduction) are skipped.
///
/// Part b is reported three times with the same integral on the left and the
/// successive bounds of its chain on the right.
pub fn verify_lemma_integrals(
    space: &MetricMeasureSpace,
    params: EnvelopeParams,
    pairs: &[(usize, usize)],
) -> Result<Vec<VerificationReport>> {
    let env = Envelope::new(space, params)?;
    let consts = EstimateConstants::new(&params);
    let a1 = consts.a1().ok();
    let a2 = consts.a2().ok();
    let (kf, sigma, delta) = (params.kf(), params.sigma_exp, params.delta);
    let w = space.weights();
    let n = space.len();
    let mut out = Vec::new();
    for &(s1, s2) in pairs {
        check_point(space, s1)?;
        check_point(space, s2)?;
        let d12 = space.distance(s1, s2);
        let decay12 = params.decay(d12, sigma);
        let ctx = |r: VerificationReport| {
            r.with("s1", s1 as f64)
                .with("s2", s2 as f64)
                .with("delta", delta)
                .with("sigma", sigma)
                .with("k", kf)
        };
        if let Some(a1) = a1 {
            let decay1: Vec<f64> = (0..n)
                .map(|y| params.decay(space.distance(s1, y), sigma))
                .collect();
            let decay2: Vec<f64> = (0..n)
                .map(|y| params.decay(space.distance(s2, y), sigma))
                .collect();
            let int_a: f64 = (0..n).map(|y| w[y] * decay1[y]).sum();
            out.push(ctx(VerificationReport::upper(
                "lemma.a",
                int_a,
                a1 * env.volume(s1),
                a1,
            )?));

            let int_b: f64 = (0..n).map(|v| w[v] * decay1[v] * decay2[v]).sum();
            let c_b = sigma.exp2() * a1;
            let first = c_b * (env.volume(s1) + env.volume(s2)) * decay12;
            out.push(ctx(VerificationReport::upper(
                "lemma.b", int_b, first, c_b,
            )?));
            let c_chain = c_b * (kf.exp2() + 1.0);
            let second = c_chain * env.volume(s1) * params.decay(d12, sigma - kf);
            out.push(ctx(VerificationReport::upper(
                "lemma.b.chain",
                int_b,
                second,
                c_chain,
            )?));
            let last = c_chain * env.volume(s1);
            out.push(ctx(VerificationReport::upper(
                "lemma.b.final",
                int_b,
                last,
                c_chain,
            )?));
        }
        if let Some(a2) = a2 {
            let int_c: f64 = (0..n)
                .map(|v| {
                    w[v] / env.volume(v)
                        * params.decay(space.distance(s1, v), sigma)
                        * params.decay(space.distance(s2, v), sigma)
                })
                .sum();
            out.push(ctx(VerificationReport::upper(
                "lemma.c",
                int_c,
                a2 * decay12,
                a2,
            )?));

            let int_q: f64 = (0..n)
                .map(|v| w[v] * env.eval(s1, v) * env.eval(v, s2))
                .sum();
            out.push(ctx(VerificationReport::upper(
                "envelope.reproduce",
                int_q,
                a2 * env.eval(s1, s2),
                a2,
            )?));
        }
    }
    Ok(out)
}
