//! Maximal δ-nets and the partition subordinate to them.
//!
//! Nets are built by a greedy sweep over the points in stored order, so they
//! are maximal with respect to the discretization rather than the continuum.

use serde::{Deserialize, Serialize};

use crate::envelope::{Envelope, EnvelopeParams};
use crate::error::{Error, Result};
use crate::geometry::MetricMeasureSpace;
use crate::report::VerificationReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub delta: f64,
    /// Point indices of the centers, in admission order.
    pub centers: Vec<usize>,
    /// Cell (position in `centers`) of every point; empty until
    /// [`build_partition`] runs.
    pub assignment: Vec<usize>,
}

impl Net {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn is_partitioned(&self) -> bool {
        !self.assignment.is_empty()
    }

    /// `σ(P_ι)` for every cell.
    pub fn cell_masses(&self, space: &MetricMeasureSpace) -> Result<Vec<f64>> {
        if self.assignment.len() != space.len() {
            return Err(Error::Contract(
                "net has no partition for this space".into(),
            ));
        }
        let mut masses = vec![0.0; self.centers.len()];
        for (p, &cell) in self.assignment.iter().enumerate() {
            masses[cell] += space.weights()[p];
        }
        Ok(masses)
    }

    /// Point indices of every cell.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        let mut cells = vec![Vec::new(); self.centers.len()];
        for (p, &cell) in self.assignment.iter().enumerate() {
            cells[cell].push(p);
        }
        cells
    }
}

pub fn build_maximal_net(space: &MetricMeasureSpace, delta: f64) -> Result<Net> {
    if space.is_empty() {
        return Err(Error::Domain("cannot build a net on an empty space".into()));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let mut centers: Vec<usize> = Vec::new();
    for p in 0..space.len() {
        if centers.iter().all(|&c| space.distance(p, c) >= delta) {
            centers.push(p);
        }
    }
    Ok(Net {
        delta,
        centers,
        assignment: Vec::new(),
    })
}

fn check_maximal(space: &MetricMeasureSpace, net: &Net) -> Result<()> {
    if net.centers.is_empty() {
        return Err(Error::Contract("net has no centers".into()));
    }
    let delta = net.delta;
    for (a, &i) in net.centers.iter().enumerate() {
        if i >= space.len() {
            return Err(Error::Contract(format!(
                "center {i} is not a point of the space"
            )));
        }
        for &j in &net.centers[a + 1..] {
            if space.distance(i, j) < delta {
                return Err(Error::Contract(format!(
                    "centers {i} and {j} are closer than delta = {delta}"
                )));
            }
        }
    }
    for p in 0..space.len() {
        if net.centers.iter().all(|&c| space.distance(p, c) >= delta) {
            return Err(Error::Contract(format!(
                "point {p} is at least delta = {delta} from every center; the net is not maximal"
            )));
        }
    }
    Ok(())
}

/// Fills the assignment: cell `j` takes the points of `B(ι_j, δ)` not already
/// taken and outside `B(ρ, δ/2)` for every other center `ρ`; points left over
/// join their nearest center, earlier centers winning ties.
pub fn build_partition(space: &MetricMeasureSpace, net: &Net) -> Result<Net> {
    check_maximal(space, net)?;
    let delta = net.delta;
    let half = delta / 2.0;
    let n = space.len();
    let mut assignment: Vec<Option<usize>> = vec![None; n];
    // the center owning each point's half-ball, if any (half-balls are disjoint)
    let half_owner: Vec<Option<usize>> = (0..n)
        .map(|p| {
            net.centers
                .iter()
                .position(|&c| space.distance(p, c) < half)
        })
        .collect();
    for (j, &c) in net.centers.iter().enumerate() {
        for p in 0..n {
            if assignment[p].is_none()
                && space.distance(p, c) < delta
                && half_owner[p].is_none_or(|owner| owner == j)
            {
                assignment[p] = Some(j);
            }
        }
    }
    let assignment = assignment
        .into_iter()
        .enumerate()
        .map(|(p, cell)| {
            cell.unwrap_or_else(|| {
                let mut best = 0;
                for (j, &c) in net.centers.iter().enumerate() {
                    if space.distance(p, c) < space.distance(p, net.centers[best]) {
                        best = j;
                    }
                }
                best
            })
        })
        .collect();
    Ok(Net {
        delta,
        centers: net.centers.clone(),
        assignment,
    })
}

/// Separation, covering, sandwich and mass reports for a partitioned net.
pub fn net_invariant_reports(
    space: &MetricMeasureSpace,
    net: &Net,
) -> Result<Vec<VerificationReport>> {
    let delta = net.delta;
    let masses = net.cell_masses(space)?;
    let mut min_sep = f64::INFINITY;
    for (a, &i) in net.centers.iter().enumerate() {
        for &j in &net.centers[a + 1..] {
            min_sep = min_sep.min(space.distance(i, j));
        }
    }
    // a lone center is vacuously separated
    let min_sep = if min_sep.is_finite() { min_sep } else { delta };
    let covering = (0..space.len())
        .map(|p| {
            net.centers
                .iter()
                .map(|&c| space.distance(p, c))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let mut violations = 0usize;
    for (p, &cell) in net.assignment.iter().enumerate() {
        if space.distance(p, net.centers[cell]) >= delta {
            violations += 1;
        }
        for (j, &c) in net.centers.iter().enumerate() {
            if j != cell && space.distance(p, c) < delta / 2.0 {
                violations += 1;
            }
        }
    }
    let total = space.total_mass();
    let cell_sum: f64 = masses.iter().sum();
    let ctx = |r: VerificationReport| r.with("delta", delta).with("centers", net.len() as f64);
    Ok(vec![
        ctx(VerificationReport::lower(
            "net.separation",
            min_sep,
            delta,
            1.0,
        )?),
        ctx(VerificationReport::upper(
            "net.covering",
            covering,
            delta,
            1.0,
        )?),
        ctx(VerificationReport::upper(
            "net.sandwich",
            violations as f64,
            0.0,
            1.0,
        )?),
        ctx(VerificationReport::upper(
            "net.mass",
            (cell_sum - total).abs(),
            1e-12 * total,
            1.0,
        )?),
    ])
}

/// Sums over net centers at a point `s1` (and a second point `s2` for the
/// envelope products), all with integer doubling exponent `k`:
///
/// - `Σ |P_ι| (1 + d(s1, ι)/δ)^(-k-1) <= 2^(2k+2) |B(s1, δ)|`
/// - `Σ (1 + d(s1, ι)/δ)^(-2k-1) <= 2^(3k+2)`
/// - `Σ |P_ι| / |B(ι, δ⋆)| (1 + d(s1, ι)/δ⋆)^(-2k-1) <= 2^(3k+2)`
/// - `Σ |P_ι| E_δ⋆(s1, ι) E_δ⋆(s2, ι) <= 2^(ς+3k+3) E_δ⋆(s1, s2)`
/// - `Σ (1 + d(s1, ι)/δ)^(-ς) (1 + d(s2, ι)/δ)^(-ς) <= 2^(ς+2k+3) (1 + d(s1, s2)/δ)^(-ς)`
///
/// The last two are skipped when `ς < 2k + 1`.
pub fn verify_net_sums(
    space: &MetricMeasureSpace,
    net: &Net,
    s1: usize,
    s2: usize,
    delta_star: f64,
    sigma_exp: f64,
    k: u32,
) -> Result<Vec<VerificationReport>> {
    let delta = net.delta;
    if !(delta_star >= delta) {
        return Err(Error::Precondition(format!(
            "delta_star = {delta_star} must be at least delta = {delta}"
        )));
    }
    if s1 >= space.len() || s2 >= space.len() {
        return Err(Error::Domain("sample point outside the space".into()));
    }
    let masses = net.cell_masses(space)?;
    let kf = k as f64;
    let dist1: Vec<f64> = net.centers.iter().map(|&c| space.distance(s1, c)).collect();
    let ctx = |r: VerificationReport| {
        r.with("s1", s1 as f64)
            .with("s2", s2 as f64)
            .with("delta", delta)
            .with("delta_star", delta_star)
            .with("k", kf)
    };
    let mut out = Vec::new();

    let c_r = (2.0 * kf + 2.0).exp2();
    let sum_r: f64 = masses
        .iter()
        .zip(&dist1)
        .map(|(m, d)| m * (1.0 + d / delta).powf(-kf - 1.0))
        .sum();
    let vol = space.ball_volume(s1, delta)?;
    out.push(ctx(VerificationReport::upper(
        "thm.sum.R",
        sum_r,
        c_r * vol,
        c_r,
    )?));

    let c_s = (3.0 * kf + 2.0).exp2();
    let sum_s: f64 = dist1
        .iter()
        .map(|d| (1.0 + d / delta).powf(-2.0 * kf - 1.0))
        .sum();
    out.push(ctx(VerificationReport::upper(
        "thm.sum.S",
        sum_s,
        c_s,
        c_s,
    )?));

    let star_volumes = space.ball_volumes(delta_star);
    let sum_t: f64 = net
        .centers
        .iter()
        .zip(&masses)
        .zip(&dist1)
        .map(|((&c, m), d)| m / star_volumes[c] * (1.0 + d / delta_star).powf(-2.0 * kf - 1.0))
        .sum();
    out.push(ctx(VerificationReport::upper(
        "thm.sum.T",
        sum_t,
        c_s,
        c_s,
    )?));

    if sigma_exp >= 2.0 * kf + 1.0 {
        let env = Envelope::new(space, EnvelopeParams::new(delta_star, sigma_exp, k)?)?;
        let c_u = (sigma_exp + 3.0 * kf + 3.0).exp2();
        let sum_u: f64 = net
            .centers
            .iter()
            .zip(&masses)
            .map(|(&c, m)| m * env.eval(s1, c) * env.eval(s2, c))
            .sum();
        out.push(ctx(VerificationReport::upper(
            "thm.sum.U",
            sum_u,
            c_u * env.eval(s1, s2),
            c_u,
        )?
        .with("sigma", sigma_exp)));

        let c_v = (sigma_exp + 2.0 * kf + 3.0).exp2();
        let sum_v: f64 = net
            .centers
            .iter()
            .zip(&dist1)
            .map(|(&c, d1)| {
                (1.0 + d1 / delta).powf(-sigma_exp)
                    * (1.0 + space.distance(s2, c) / delta).powf(-sigma_exp)
            })
            .sum();
        let rhs_v = c_v * (1.0 + space.distance(s1, s2) / delta).powf(-sigma_exp);
        out.push(ctx(VerificationReport::upper(
            "thm.sum.V",
            sum_v,
            rhs_v,
            c_v,
        )?
        .with("sigma", sigma_exp)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricKind;

    fn tenths() -> MetricMeasureSpace {
        let pts: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        MetricMeasureSpace::new(pts, vec![0.1; 11], MetricKind::Euclidean).unwrap()
    }

    #[test]
    fn greedy_sweep_example() {
        let space = tenths();
        let net = build_maximal_net(&space, 0.35).unwrap();
        assert_eq!(net.centers, [0, 4, 8]);
        let net = build_partition(&space, &net).unwrap();
        // 0.5 sits within 0.175 of 0.4
        assert_eq!(net.centers[net.assignment[5]], 4);
        for (j, &c) in net.centers.iter().enumerate() {
            assert_eq!(net.assignment[c], j);
        }
    }

    #[test]
    fn large_delta_single_center() {
        let space = tenths();
        let net = build_partition(&space, &build_maximal_net(&space, 5.0).unwrap()).unwrap();
        assert_eq!(net.centers, [0]);
        assert!(net.assignment.iter().all(|&c| c == 0));
    }

    #[test]
    fn small_delta_every_point() {
        let space = tenths();
        let net = build_maximal_net(&space, 0.05).unwrap();
        assert_eq!(net.centers, (0..=10).collect::<Vec<_>>());
    }

    #[test]
    fn bad_inputs() {
        let space = tenths();
        assert!(matches!(
            build_maximal_net(&space, 0.0),
            Err(Error::Domain(_))
        ));
        let sparse = Net {
            delta: 0.35,
            centers: vec![0],
            assignment: vec![],
        };
        assert!(matches!(
            build_partition(&space, &sparse),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn invariants_pass() {
        let space = tenths();
        for delta in [0.05, 0.15, 0.35, 0.6, 2.0] {
            let net = build_partition(&space, &build_maximal_net(&space, delta).unwrap()).unwrap();
            for r in net_invariant_reports(&space, &net).unwrap() {
                assert!(r.passed, "{} at delta = {delta}", r.check_id);
            }
        }
    }

    #[test]
    fn s_constant_for_k_one() {
        let space = tenths();
        let net = build_partition(&space, &build_maximal_net(&space, 0.35).unwrap()).unwrap();
        let reports = verify_net_sums(&space, &net, 2, 9, 0.35, 3.0, 1).unwrap();
        let s = reports.iter().find(|r| r.check_id == "thm.sum.S").unwrap();
        assert_eq!(s.stated_constant, 32.0);
        assert_eq!(reports.len(), 5);
        assert!(verify_net_sums(&space, &net, 2, 9, 0.1, 3.0, 1).is_err());
    }

    #[test]
    fn json_shape() {
        let space = tenths();
        let net = build_partition(&space, &build_maximal_net(&space, 0.35).unwrap()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&net).unwrap();
        assert_eq!(v["centers"], serde_json::json!([0, 4, 8]));
        assert_eq!(v["assignment"].as_array().unwrap().len(), 11);
    }
}
