//! Discretized metric measure spaces.
//!
//! A space is a finite list of points with positive quadrature weights and a
//! metric. Balls are open, `B(s, r) = { y : d(s, y) < r }`, and every volume
//! is a sum of weights, so the full pairwise distance table is computed once
//! at construction.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::JacobiParams;
use crate::quadrature::GaussJacobi;
use crate::report::VerificationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    /// `d(x, y) = |arccos x - arccos y|` on `[-1, 1]`
    Arccos,
    Euclidean,
    CustomTable,
}

/// Tolerance on the triangle inequality for tabulated metrics.
const TRIANGLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct MetricMeasureSpace {
    points: Vec<f64>,
    weights: Vec<f64>,
    kind: MetricKind,
    // row-major n x n
    dist: Vec<f64>,
    diameter: f64,
    mesh: f64,
}

impl MetricMeasureSpace {
    /// Space on real coordinates with the arccos or euclidean metric.
    pub fn new(points: Vec<f64>, weights: Vec<f64>, kind: MetricKind) -> Result<Self> {
        let coords: Vec<f64> = match kind {
            MetricKind::Arccos => {
                if let Some(x) = points.iter().find(|x| !(-1.0..=1.0).contains(*x)) {
                    return Err(Error::Domain(format!(
                        "arccos metric needs points in [-1, 1], got {x}"
                    )));
                }
                points.iter().map(|x| x.acos()).collect()
            }
            MetricKind::Euclidean => points.clone(),
            MetricKind::CustomTable => {
                return Err(Error::Domain("use from_table for tabulated metrics".into()))
            }
        };
        let n = points.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = (coords[i] - coords[j]).abs();
            }
        }
        let mut sorted = coords;
        sorted.sort_by(f64::total_cmp);
        let mesh = sorted.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        Self::assemble(points, weights, kind, dist, Some(mesh))
    }

    /// Space with an explicit distance table; the metric axioms are checked on
    /// every triple.
    #[allow(clippy::needless_range_loop)]
    pub fn from_table(points: Vec<f64>, weights: Vec<f64>, table: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(Error::Domain(format!("distance table must be {n} x {n}")));
        }
        for i in 0..n {
            if table[i][i] != 0.0 {
                return Err(Error::Domain(format!(
                    "d({i}, {i}) = {} is not zero",
                    table[i][i]
                )));
            }
            for j in 0..n {
                let d = table[i][j];
                if !(d.is_finite() && d >= 0.0) || d != table[j][i] {
                    return Err(Error::Domain(format!(
                        "d({i}, {j}) is not a symmetric nonnegative distance"
                    )));
                }
                if i != j && d == 0.0 {
                    return Err(Error::Domain(format!("points {i} and {j} coincide")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if table[i][k] > table[i][j] + table[j][k] + TRIANGLE_TOL {
                        return Err(Error::Domain(format!(
                            "triangle inequality fails on ({i}, {j}, {k})"
                        )));
                    }
                }
            }
        }
        let dist = table.into_iter().flatten().collect();
        Self::assemble(points, weights, MetricKind::CustomTable, dist, None)
    }

    fn assemble(
        points: Vec<f64>,
        weights: Vec<f64>,
        kind: MetricKind,
        dist: Vec<f64>,
        mesh: Option<f64>,
    ) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::Domain("a space needs at least one point".into()));
        }
        if weights.len() != n {
            return Err(Error::Domain(format!(
                "{n} points but {} weights",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Domain(format!(
                "weights must be strictly positive, got {w}"
            )));
        }
        let diameter = dist.iter().copied().fold(0.0, f64::max);
        // nearest-neighbour radius for tables
        let mesh = mesh.unwrap_or_else(|| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .filter(|&j| j != i)
                        .map(|j| dist[i * n + j])
                        .fold(f64::INFINITY, f64::min)
                })
                .filter(|d| d.is_finite())
                .fold(0.0, f64::max)
        });
        Ok(Self {
            points,
            weights,
            kind,
            dist,
            diameter,
            mesh,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn metric_kind(&self) -> MetricKind {
        self.kind
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Largest gap between metrically adjacent points (largest nearest-neighbour
    /// distance for tabulated metrics). Radii below it are not resolved.
    pub fn mesh_width(&self) -> f64 {
        self.mesh
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }

    pub fn distance_row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.dist[i * n..(i + 1) * n]
    }

    fn check_index(&self, center: usize) -> Result<()> {
        if center >= self.len() {
            return Err(Error::Domain(format!(
                "center {center} is not a point of a {}-point space",
                self.len()
            )));
        }
        Ok(())
    }

    /// Distance from an ambient coordinate to point `j`.
    pub fn distance_to_coord(&self, coord: f64, j: usize) -> Result<f64> {
        match self.kind {
            MetricKind::Arccos => {
                if !(-1.0..=1.0).contains(&coord) {
                    return Err(Error::Domain(format!("{coord} lies outside [-1, 1]")));
                }
                Ok((coord.acos() - self.points[j].acos()).abs())
            }
            MetricKind::Euclidean => Ok((coord - self.points[j]).abs()),
            MetricKind::CustomTable => Err(Error::Domain(
                "tabulated spaces have no ambient coordinates".into(),
            )),
        }
    }

    /// Index of the point equal to `coord`, if any.
    pub fn locate(&self, coord: f64) -> Result<usize> {
        self.points
            .iter()
            .position(|&p| p == coord)
            .ok_or_else(|| Error::Domain(format!("{coord} is not a point of the space")))
    }

    pub fn ball_volume(&self, center: usize, r: f64) -> Result<f64> {
        self.check_index(center)?;
        if !(r >= 0.0) {
            return Err(Error::Domain(format!(
                "radius must be nonnegative, got {r}"
            )));
        }
        Ok(self
            .distance_row(center)
            .iter()
            .zip(&self.weights)
            .filter(|(d, _)| **d < r)
            .map(|(_, w)| w)
            .sum())
    }

    /// `|B(s, r)|` for every point `s`.
    pub fn ball_volumes(&self, r: f64) -> Vec<f64> {
        (0..self.len())
            .map(|s| {
                self.distance_row(s)
                    .iter()
                    .zip(&self.weights)
                    .filter(|(d, _)| **d < r)
                    .map(|(_, w)| w)
                    .sum()
            })
            .collect()
    }

    pub fn ball_members(&self, center: usize, r: f64) -> Result<Vec<usize>> {
        self.check_index(center)?;
        Ok((0..self.len())
            .filter(|&j| self.distance(center, j) < r)
            .collect())
    }

    /// Points within `r` of an ambient coordinate.
    pub fn ball_members_at(&self, coord: f64, r: f64) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for j in 0..self.len() {
            if self.distance_to_coord(coord, j)? < r {
                out.push(j);
            }
        }
        Ok(out)
    }

    /// `m_B(f) = σ(B)^{-1} ∫_B f dσ`.
    pub fn mean_value(&self, f: &[f64], center: usize, r: f64) -> Result<f64> {
        if f.len() != self.len() {
            return Err(Error::Contract(format!(
                "expected {} values, got {}",
                self.len(),
                f.len()
            )));
        }
        let members = self.ball_members(center, r)?;
        if members.is_empty() {
            return Err(Error::DegenerateBall {
                center: self.points[center],
                radius: r,
            });
        }
        let mass: f64 = members.iter().map(|&j| self.weights[j]).sum();
        Ok(members.iter().map(|&j| self.weights[j] * f[j]).sum::<f64>() / mass)
    }

    /// Largest triangle-inequality excess and symmetry defect over the given
    /// triples.
    pub fn metric_defect(&self, triples: &[(usize, usize, usize)]) -> f64 {
        triples
            .iter()
            .map(|&(i, j, k)| {
                let tri = self.distance(i, k) - self.distance(i, j) - self.distance(j, k);
                let sym = (self.distance(i, j) - self.distance(j, i)).abs();
                tri.max(sym).max(self.distance(i, i))
            })
            .fold(0.0, f64::max)
    }

    /// CSV with header `point,weight`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["point", "weight"])?;
        for (p, wt) in self.points.iter().zip(&self.weights) {
            w.write_record([p.to_string(), wt.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, kind: MetricKind) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["point", "weight"] {
            return Err(Error::Io(format!(
                "expected header `point,weight`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Io(format!("bad number `{s}`: {e}")))
            };
            points.push(parse(&rec[0])?);
            weights.push(parse(&rec[1])?);
        }
        Self::new(points, weights, kind)
    }
}

/// Gauss–Jacobi nodes and weights for `(1 - x)^gamma (1 + x)^alpha` with the
/// arccos metric.
pub fn make_jacobi_space(params: JacobiParams, n_nodes: usize) -> Result<MetricMeasureSpace> {
    let params = JacobiParams::new(params.gamma, params.alpha)?;
    let rule = GaussJacobi::new(params, n_nodes)?;
    MetricMeasureSpace::new(rule.nodes, rule.weights, MetricKind::Arccos)
}

/// Empirical doubling data of a space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublingProfile {
    /// `log2 sup σ(B(s, 2r)) / σ(B(s, r))`
    pub k_hat: f64,
    /// `log2 inf` of the same ratio over resolved radii `mesh < r <= diam / 3`
    pub alpha_hat: f64,
    /// `min_s σ(B(s, 1))`
    pub a_noncollapse: f64,
    /// `2^(-k_hat) a_noncollapse`
    pub a_caret: f64,
}

impl DoublingProfile {
    /// `k_hat` rounded up to an integer (at least 1) for use in constants.
    pub fn k(&self) -> u32 {
        ((self.k_hat - 1e-12).ceil().max(1.0)) as u32
    }
}

/// Sorted distances from one center with cumulative weights.
struct RadialProfile {
    dists: Vec<f64>,
    cumulative: Vec<f64>,
}

impl RadialProfile {
    fn new(space: &MetricMeasureSpace, center: usize) -> Self {
        let mut pairs: Vec<(f64, f64)> = space
            .distance_row(center)
            .iter()
            .copied()
            .zip(space.weights().iter().copied())
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        let cumulative = pairs
            .iter()
            .map(|&(_, w)| {
                acc += w;
                acc
            })
            .collect();
        Self {
            dists: pairs.into_iter().map(|(d, _)| d).collect(),
            cumulative,
        }
    }

    fn volume(&self, r: f64) -> f64 {
        let count = self.dists.partition_point(|&d| d < r);
        if count == 0 {
            0.0
        } else {
            self.cumulative[count - 1]
        }
    }
}

fn profile_from(
    space: &MetricMeasureSpace,
    centers: &[usize],
    radii_for: impl Fn(usize) -> Vec<f64>,
) -> Result<DoublingProfile> {
    if centers.is_empty() {
        return Err(Error::Sampling("no centers sampled".into()));
    }
    let third = space.diameter() / 3.0;
    let floor = space.mesh_width();
    let mut sup = 1.0f64;
    let mut inf = f64::INFINITY;
    let mut noncollapse = f64::INFINITY;
    for &s in centers {
        space.check_index(s)?;
        let radial = RadialProfile::new(space, s);
        let radii = radii_for(s);
        if radii.is_empty() {
            return Err(Error::Sampling("no radii sampled".into()));
        }
        for r in radii {
            if !(r > 0.0) {
                return Err(Error::Domain(format!("radius must be positive, got {r}")));
            }
            let inner = radial.volume(r);
            if inner <= 0.0 {
                return Err(Error::Resolution {
                    center: s,
                    radius: r,
                });
            }
            let ratio = radial.volume(2.0 * r) / inner;
            sup = sup.max(ratio);
            if r > floor && r <= third {
                inf = inf.min(ratio);
            }
        }
        noncollapse = noncollapse.min(radial.volume(1.0));
    }
    if noncollapse <= 0.0 {
        return Err(Error::Resolution {
            center: centers[0],
            radius: 1.0,
        });
    }
    let k_hat = sup.log2();
    let alpha_hat = if inf.is_finite() {
        inf.log2().max(0.0)
    } else {
        0.0
    };
    Ok(DoublingProfile {
        k_hat,
        alpha_hat: alpha_hat.min(k_hat),
        a_noncollapse: noncollapse,
        a_caret: (-k_hat).exp2() * noncollapse,
    })
}

/// Doubling profile over sampled centers and radii.
///
/// The reverse exponent only uses radii in `(mesh, diam / 3]`: below the mesh
/// width a ball can contain a single point at both radii.
pub fn estimate_doubling(
    space: &MetricMeasureSpace,
    centers: &[usize],
    radii: &[f64],
) -> Result<DoublingProfile> {
    if radii.is_empty() {
        return Err(Error::Sampling("no radii sampled".into()));
    }
    profile_from(space, centers, |_| radii.to_vec())
}

/// Doubling profile over every center and every radius.
///
/// For a fixed center the ratio `σ(B(s, 2r)) / σ(B(s, r))` only changes at
/// `r = d` or `r = d / 2` for distances `d` from that center and is constant on
/// the left-open intervals between them, so evaluating at those breakpoints
/// (plus `diam / 3` and one radius past the diameter) gives the exact supremum
/// and infimum.
pub fn doubling_profile_exhaustive(space: &MetricMeasureSpace) -> Result<DoublingProfile> {
    let centers: Vec<usize> = (0..space.len()).collect();
    let extra = [space.diameter() / 3.0, 2.0 * space.diameter() + 1.0];
    profile_from(space, &centers, |s| {
        let mut radii: Vec<f64> = space
            .distance_row(s)
            .iter()
            .filter(|&&d| d > 0.0)
            .flat_map(|&d| [d, 0.5 * d])
            .chain(extra.iter().copied().filter(|&r| r > 0.0))
            .collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        radii
    })
}

/// Sample sets for [`verify_ball_growth`].
#[derive(Debug, Clone, Default)]
pub struct BallGrowthSamples {
    /// `(s, r, β)` with `β > 1` for `|B(s, βr)| <= (2β)^k |B(s, r)|`
    pub dilation: Vec<(usize, f64, f64)>,
    /// `(s1, s2, r)` for `|B(s1, r)| <= 2^k (1 + d/r)^k |B(s2, r)|`
    pub recentering: Vec<(usize, usize, f64)>,
    /// `r <= 1` for `inf_s |B(s, r)| >= â r^k`
    pub lower: Vec<f64>,
    /// `(s, r)` with `mesh < r <= diam / 3` for `|B(s, 2r)| >= (1 + 10^-k) |B(s, r)|`
    pub reverse: Vec<(usize, f64)>,
}

/// Ball-growth consequences of doubling with integer exponent `k` and
/// `â = 2^-k a` where `a` is the profile's non-collapsing constant.
pub fn verify_ball_growth(
    space: &MetricMeasureSpace,
    profile: &DoublingProfile,
    k: u32,
    samples: &BallGrowthSamples,
) -> Result<Vec<VerificationReport>> {
    let kf = k as f64;
    let mut out = Vec::new();
    for &(s, r, beta) in &samples.dilation {
        let constant = (2.0 * beta).powf(kf);
        let small = space.ball_volume(s, r)?;
        let large = space.ball_volume(s, beta * r)?;
        out.push(
            VerificationReport::upper("ball.J", large, constant * small, constant)?
                .with("s", s as f64)
                .with("r", r)
                .with("beta", beta)
                .with("k", kf),
        );
    }
    for &(s1, s2, r) in &samples.recentering {
        let d = space.distance(s1, s2);
        let constant = kf.exp2() * (1.0 + d / r).powf(kf);
        let lhs = space.ball_volume(s1, r)?;
        let rhs = constant * space.ball_volume(s2, r)?;
        out.push(
            VerificationReport::upper("ball.K", lhs, rhs, constant)?
                .with("s1", s1 as f64)
                .with("s2", s2 as f64)
                .with("r", r)
                .with("k", kf),
        );
    }
    let a_caret = (-kf).exp2() * profile.a_noncollapse;
    for &r in &samples.lower {
        let inf = space
            .ball_volumes(r)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        out.push(
            VerificationReport::lower("ball.Y", inf, a_caret * r.powf(kf), a_caret)?
                .with("r", r)
                .with("k", kf),
        );
    }
    let factor = 1.0 + 10f64.powf(-kf);
    for &(s, r) in &samples.reverse {
        let small = space.ball_volume(s, r)?;
        let large = space.ball_volume(s, 2.0 * r)?;
        out.push(
            VerificationReport::lower("ball.reverse", large, factor * small, factor)?
                .with("s", s as f64)
                .with("r", r)
                .with("k", kf),
        );
    }
    Ok(out)
}
