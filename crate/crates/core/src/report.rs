//! Verification reports shared by every inequality check.
//!
//! A [`VerificationReport`] records one evaluated inequality: both sides, the
//! constant the bound was printed with, and the signed margin. Constant-fitting
//! procedures (Gaussian bounds, Hölder exponent, Poincaré constant, frame
//! bounds) produce a [`FitReport`] instead, since there is no target to pass
//! against, only finiteness and stability under refinement.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack absorbing floating-point noise in exact inequalities.
pub const MARGIN_RTOL: f64 = 1e-12;

/// Every check id a [`VerificationReport`] may carry.
pub const CHECK_REGISTRY: &[&str] = &[
    "ball.J",
    "ball.K",
    "ball.Y",
    "ball.reverse",
    "envelope.one_volume",
    "envelope.shrink",
    "envelope.grow",
    "envelope.lp",
    "envelope.reproduce",
    "lemma.a",
    "lemma.b",
    "lemma.b.chain",
    "lemma.b.final",
    "lemma.c",
    "net.separation",
    "net.covering",
    "net.sandwich",
    "net.mass",
    "thm.sum.R",
    "thm.sum.S",
    "thm.sum.T",
    "thm.sum.U",
    "thm.sum.V",
    "jacobi.orthonormality",
    "jacobi.form",
    "jacobi.carre_du_champ",
    "heat.markov",
    "heat.semigroup",
    "heat.eigen_action",
    "young",
    "schur",
    "band.parseval",
    "band.reconstruction",
];

/// Every bound id a [`FitReport`] may carry.
pub const FIT_REGISTRY: &[&str] = &[
    "heat.gaussian",
    "heat.holder",
    "jacobi.poincare",
    "band.frame",
];

pub fn is_registered(check_id: &str) -> bool {
    CHECK_REGISTRY.contains(&check_id)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `lhs <= rhs`
    Upper,
    /// `lhs >= rhs`
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check_id: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Constant of the bound being checked, as stated before any fitting.
    #[serde(rename = "paper_constant")]
    pub stated_constant: f64,
    pub margin: f64,
    pub passed: bool,
    pub context: BTreeMap<String, f64>,
}

impl VerificationReport {
    pub fn new(
        check_id: &str,
        direction: Direction,
        lhs: f64,
        rhs: f64,
        stated_constant: f64,
    ) -> Result<Self> {
        if !is_registered(check_id) {
            return Err(Error::UnknownCheck(check_id.to_string()));
        }
        let margin = match direction {
            Direction::Upper => rhs - lhs,
            Direction::Lower => lhs - rhs,
        };
        Ok(Self {
            check_id: check_id.to_string(),
            lhs,
            rhs,
            stated_constant,
            margin,
            passed: margin_passes(margin, rhs),
            context: BTreeMap::new(),
        })
    }

    /// Report for `lhs <= rhs`.
    pub fn upper(check_id: &str, lhs: f64, rhs: f64, stated_constant: f64) -> Result<Self> {
        Self::new(check_id, Direction::Upper, lhs, rhs, stated_constant)
    }

    /// Report for `lhs >= rhs`.
    pub fn lower(check_id: &str, lhs: f64, rhs: f64, stated_constant: f64) -> Result<Self> {
        Self::new(check_id, Direction::Lower, lhs, rhs, stated_constant)
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.context.insert(key.to_string(), value);
        self
    }
}

/// `margin >= -1e-12 * max(1, |rhs|)`; NaN margins fail.
pub fn margin_passes(margin: f64, rhs: f64) -> bool {
    margin >= -MARGIN_RTOL * rhs.abs().max(1.0)
}

/// Constant-fitting outcome. `max_margin` is the largest relative change of a
/// fitted constant between the coarse and the refined resolution (0 when no
/// refinement was compared).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub bound_id: String,
    pub fitted_constants: BTreeMap<String, f64>,
    pub n_samples: usize,
    pub max_margin: f64,
    pub stable: bool,
}

impl FitReport {
    pub fn new(bound_id: &str, n_samples: usize) -> Result<Self> {
        if !FIT_REGISTRY.contains(&bound_id) {
            return Err(Error::UnknownCheck(bound_id.to_string()));
        }
        Ok(Self {
            bound_id: bound_id.to_string(),
            fitted_constants: BTreeMap::new(),
            n_samples,
            max_margin: 0.0,
            stable: true,
        })
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.fitted_constants.insert(key.to_string(), value);
        self
    }

    pub fn constant(&self, key: &str) -> Option<f64> {
        self.fitted_constants.get(key).copied()
    }

    pub fn all_finite(&self) -> bool {
        self.fitted_constants.values().all(|v| v.is_finite())
    }

    /// Compares `self` (coarse) with `refined` constant by constant and returns
    /// the coarse report annotated with the relative change and stability flag.
    pub fn compare(mut self, refined: &FitReport, rel_tol: f64) -> Self {
        let mut worst = 0.0f64;
        for (key, &coarse) in &self.fitted_constants {
            let fine = refined.constant(key).unwrap_or(f64::NAN);
            let change = relative_change(coarse, fine);
            worst = if change.is_nan() {
                f64::INFINITY
            } else {
                worst.max(change)
            };
        }
        self.max_margin = worst;
        self.stable = worst < rel_tol && self.all_finite() && refined.all_finite();
        self
    }
}

/// `|a - b| / max(|a|, |b|)`, 0 when both vanish.
pub fn relative_change(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub check_id: String,
    pub count: usize,
    pub pass_rate: f64,
    pub worst_margin: f64,
    pub worst_context: BTreeMap<String, f64>,
}

/// Groups reports by check id. The result is sorted by id and does not depend
/// on the order of `reports`.
pub fn aggregate(reports: &[VerificationReport]) -> Result<Vec<CheckSummary>> {
    if reports.is_empty() {
        return Err(Error::Domain(
            "cannot aggregate an empty report list".into(),
        ));
    }
    let mut groups: BTreeMap<&str, Vec<&VerificationReport>> = BTreeMap::new();
    for r in reports {
        groups.entry(r.check_id.as_str()).or_default().push(r);
    }
    Ok(groups
        .into_iter()
        .map(|(id, group)| {
            let passed = group.iter().filter(|r| r.passed).count();
            let worst = group
                .iter()
                .copied()
                .min_by(|a, b| worse_first(a, b))
                .expect("group is nonempty");
            CheckSummary {
                check_id: id.to_string(),
                count: group.len(),
                pass_rate: passed as f64 / group.len() as f64,
                worst_margin: worst.margin,
                worst_context: worst.context.clone(),
            }
        })
        .collect())
}

// Total order: smaller margin first, then context, then sides.
fn worse_first(a: &VerificationReport, b: &VerificationReport) -> Ordering {
    a.margin
        .total_cmp(&b.margin)
        .then_with(|| cmp_context(&a.context, &b.context))
        .then_with(|| a.lhs.total_cmp(&b.lhs))
        .then_with(|| a.rhs.total_cmp(&b.rhs))
}

fn cmp_context(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> Ordering {
    let mut ia = a.iter();
    let mut ib = b.iter();
    loop {
        match (ia.next(), ib.next()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some((ka, va)), Some((kb, vb))) => {
                let ord = ka.cmp(kb).then_with(|| va.total_cmp(vb));
                if ord != Ordering::Equal {
                    return ord;
                }
            }
        }
    }
}

/// True when every report passed.
pub fn all_passed(reports: &[VerificationReport]) -> bool {
    reports.iter().all(|r| r.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(id: &str, lhs: f64, rhs: f64) -> VerificationReport {
        VerificationReport::upper(id, lhs, rhs, 1.0).unwrap()
    }

    #[test]
    fn unknown_id_rejected() {
        assert_eq!(
            VerificationReport::upper("made.up", 0.0, 1.0, 1.0),
            Err(Error::UnknownCheck("made.up".into()))
        );
        assert!(FitReport::new("lemma.a", 1).is_err());
    }

    #[test]
    fn margin_sign_follows_direction() {
        let up = VerificationReport::upper("lemma.a", 1.0, 3.0, 4.0).unwrap();
        assert_eq!(up.margin, 2.0);
        assert!(up.passed);
        let low = VerificationReport::lower("ball.Y", 1.0, 3.0, 4.0).unwrap();
        assert_eq!(low.margin, -2.0);
        assert!(!low.passed);
    }

    #[test]
    fn relative_tolerance_absorbs_rounding() {
        let r = report("lemma.a", 1e6 * (1.0 + 1e-13), 1e6);
        assert!(r.passed);
        let r = report("lemma.a", 1.0 + 1e-9, 1.0);
        assert!(!r.passed);
        let r = report("lemma.a", f64::NAN, 1.0);
        assert!(!r.passed);
    }

    #[test]
    fn all_passing_rate_is_one() {
        let reports: Vec<_> = (0..5)
            .map(|i| report("thm.sum.S", i as f64, 10.0))
            .collect();
        let summary = aggregate(&reports).unwrap();
        assert_eq!(summary.len(), 1);
        assert_eq!(summary[0].pass_rate, 1.0);
        assert_eq!(summary[0].count, 5);
        assert_eq!(summary[0].worst_margin, 6.0);
    }

    #[test]
    fn one_failure_in_ten() {
        let mut reports: Vec<_> = (0..9).map(|_| report("young", 1.0, 2.0)).collect();
        reports.push(report("young", 3.0, 2.0).with("trial", 9.0));
        let summary = aggregate(&reports).unwrap();
        assert_eq!(summary[0].pass_rate, 0.9);
        assert_eq!(summary[0].worst_margin, -1.0);
        assert_eq!(summary[0].worst_context.get("trial"), Some(&9.0));
    }

    #[test]
    fn mixed_ids_one_row_each() {
        let reports = vec![
            report("lemma.a", 1.0, 2.0),
            report("lemma.c", 1.0, 2.0),
            report("lemma.a", 1.5, 2.0),
        ];
        let summary = aggregate(&reports).unwrap();
        let ids: Vec<_> = summary.iter().map(|s| s.check_id.as_str()).collect();
        assert_eq!(ids, ["lemma.a", "lemma.c"]);
        assert_eq!(summary[0].count, 2);
    }

    #[test]
    fn empty_aggregate_is_error() {
        assert!(matches!(aggregate(&[]), Err(Error::Domain(_))));
    }

    #[test]
    fn fit_comparison() {
        let coarse = FitReport::new("heat.gaussian", 10).unwrap().with("K", 1.0);
        let fine = FitReport::new("heat.gaussian", 20).unwrap().with("K", 1.1);
        let cmp = coarse.clone().compare(&fine, 0.2);
        assert!(cmp.stable);
        assert!((cmp.max_margin - 0.1 / 1.1).abs() < 1e-15);
        let cmp = coarse.compare(&fine.with("K", 2.0), 0.2);
        assert!(!cmp.stable);
    }
}
