//! Jones beta numbers and their metric substitutes.
//!
//! * `beta_inf`, `beta_p`: Euclidean deviation from the best line in a ball,
//!   normalized by the ball diameter `2r`.
//! * `beta2_ball`: radius-normalized triple integral of `∂` over a ball.
//! * `beta_tilde_arc`: the arc version with parameter-ordered `∂1`.
//! * `dyadic_excess_sum`: telescoping sum of `∂1` over dyadic intervals.
//!
//! The infimum over lines in `beta_inf` is taken over a finite candidate set
//! (lines through pairs of points plus the orthogonal-regression line), so it
//! is an upper bound on the exact thinnest-cylinder value.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{delta1_from_sides, delta_from_sides};
use crate::curves::{Curve, CurveArc, Filtration};
use crate::error::{Error, Result};
use crate::metric::{Ball, EuclideanCloud, MetricSpace, PointSubset, WeightedSet};
use crate::nets::MultiresolutionFamily;
use crate::triples::{estimate_symmetric, index_ordered_sum, EstimatorSettings, Mode, TripleEstimate};

const ISOTROPY_GAP: f64 = 1e-6;

/// Weighted centroid and scatter matrix `sum w (x - c)(x - c)^T`.
fn weighted_scatter(points: &[&[f64]], weights: &[f64]) -> Option<(Vec<f64>, DMatrix<f64>)> {
    let dim = points.first()?.len();
    let mass: f64 = weights.iter().sum();
    if !(mass > 0.0) || dim == 0 {
        return None;
    }
    let mut centroid = vec![0.0; dim];
    for (p, w) in points.iter().zip(weights) {
        for (c, x) in centroid.iter_mut().zip(p.iter()) {
            *c += w * x / mass;
        }
    }
    let mut scatter = DMatrix::<f64>::zeros(dim, dim);
    for (p, w) in points.iter().zip(weights) {
        for i in 0..dim {
            let di = p[i] - centroid[i];
            for j in 0..dim {
                scatter[(i, j)] += w * di * (p[j] - centroid[j]);
            }
        }
    }
    Some((centroid, scatter))
}

/// A line in R^d given by a point and a unit direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
}

impl Line {
    pub fn through(p: &[f64], q: &[f64]) -> Option<Line> {
        let d: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
        let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return None;
        }
        Some(Line {
            point: p.to_vec(),
            direction: d.iter().map(|x| x / norm).collect(),
        })
    }

    /// Weighted total-least-squares line: through the weighted centroid along
    /// the top eigenvector of the weighted scatter matrix. `None` when the two
    /// largest eigenvalues agree to within a relative `1e-6`, where every
    /// direction is (almost) optimal and the eigenvector is unstable.
    pub fn orthogonal_regression(points: &[&[f64]], weights: &[f64]) -> Option<Line> {
        let (centroid, scatter) = weighted_scatter(points, weights)?;
        let dim = centroid.len();
        let eig = SymmetricEigen::new(scatter);
        let top = eig.eigenvalues.imax();
        let top_val = eig.eigenvalues[top];
        let runner_up = (0..dim)
            .filter(|&i| i != top)
            .map(|i| eig.eigenvalues[i])
            .fold(f64::NEG_INFINITY, f64::max);
        // a (near) tie leaves the direction undetermined by the data
        if dim > 1 && top_val - runner_up <= ISOTROPY_GAP * top_val.abs() {
            return None;
        }
        let v = eig.eigenvectors.column(top);
        let norm = v.norm();
        let direction = if norm > 0.0 {
            v.iter().map(|x| x / norm).collect()
        } else {
            let mut e = vec![0.0; dim];
            e[0] = 1.0;
            e
        };
        Some(Line {
            point: centroid,
            direction,
        })
    }

    pub fn dist_sq(&self, x: &[f64]) -> f64 {
        let vu: f64 = (0..x.len()).map(|i| (x[i] - self.point[i]) * self.direction[i]).sum();
        // explicit perpendicular component; |v|^2 - (v.u)^2 cancels badly near the line
        (0..x.len())
            .map(|i| {
                let r = x[i] - self.point[i] - vu * self.direction[i];
                r * r
            })
            .sum()
    }

    pub fn dist(&self, x: &[f64]) -> f64 {
        self.dist_sq(x).sqrt()
    }

    /// Largest distance from the line to any of `points`.
    pub fn max_offset(&self, points: &[&[f64]]) -> f64 {
        points.iter().map(|p| self.dist_sq(p)).fold(0.0, f64::max).sqrt()
    }
}

/// A beta value for one ball with estimator metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaReport {
    pub ball: Ball,
    pub value: f64,
    /// Points of the domain inside the ball.
    pub members: usize,
    /// Diameter of the ball's intersection with the domain.
    pub set_diam: f64,
    /// Candidate lines tried (`beta_inf`) or triples evaluated (`beta2_ball`).
    pub evaluated: u64,
    pub mode: Mode,
    pub std_error: f64,
    /// For `beta2_ball`: the triple integral of `∂` over the ball.
    pub integral: f64,
}

fn euclidean(space: &MetricSpace) -> Result<&EuclideanCloud> {
    space
        .as_euclidean()
        .ok_or_else(|| Error::Unsupported("beta_inf/beta_p need a Euclidean point cloud".into()))
}

fn max_offset_bounded(line: &Line, points: &[&[f64]], bound_sq: f64) -> f64 {
    let mut worst = 0.0_f64;
    for p in points {
        worst = worst.max(line.dist_sq(p));
        if worst >= bound_sq {
            break;
        }
    }
    worst
}

/// Smallest maximal offset over the candidate lines and the number tried.
fn thinnest_candidate(points: &[&[f64]]) -> (f64, u64) {
    let n = points.len();
    let ones = vec![1.0; n];
    let mut best_sq = f64::INFINITY;
    let mut tried = 0u64;
    if let Some(reg) = Line::orthogonal_regression(points, &ones) {
        best_sq = max_offset_bounded(&reg, points, best_sq);
        tried += 1;
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if let Some(line) = Line::through(points[a], points[b]) {
                tried += 1;
                let w = max_offset_bounded(&line, points, best_sq);
                if w < best_sq {
                    best_sq = w;
                }
            }
            if best_sq == 0.0 {
                return (0.0, tried);
            }
        }
    }
    (best_sq.sqrt(), tried)
}

/// `(1 / diam B) * min_L max_{x in B ∩ domain} dist(x, L)` over candidate lines,
/// with `diam B = 2 * radius`.
pub fn beta_inf(space: &MetricSpace, ball: &Ball, domain: &PointSubset) -> Result<BetaReport> {
    let cloud = euclidean(space)?;
    let members = space.ball_members(ball, domain)?;
    let points: Vec<&[f64]> = members.iter().map(|i| cloud.point(i)).collect();
    let set_diam = space.diam_of(members.as_slice());
    let (width, tried) = if points.len() <= 2 {
        (0.0, 0)
    } else {
        thinnest_candidate(&points)
    };
    Ok(BetaReport {
        ball: *ball,
        value: width / (2.0 * ball.radius),
        members: members.len(),
        set_diam,
        evaluated: tried,
        mode: Mode::Det,
        std_error: 0.0,
        integral: 0.0,
    })
}

/// `L^p` beta number of the measure `sum_i weights[i] δ_i` on a ball, p in {1, 2}.
pub fn beta_p(space: &MetricSpace, ball: &Ball, weights: &[f64], p: u32) -> Result<f64> {
    let cloud = euclidean(space)?;
    if weights.len() != space.len() {
        return Err(Error::usage("one weight per point required"));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::domain("weights must be non-negative"));
    }
    let members = space.ball_members(ball, &PointSubset::all(space.len()))?;
    let points: Vec<&[f64]> = members.iter().map(|i| cloud.point(i)).collect();
    let w: Vec<f64> = members.iter().map(|i| weights[i]).collect();
    let mass: f64 = w.iter().sum();
    if !(mass > 0.0) {
        return Err(Error::domain("zero mass in ball"));
    }
    let diam = 2.0 * ball.radius;
    match p {
        2 => {
            // optimal mean square offset: scatter trace minus its top eigenvalue
            let (_, scatter) = weighted_scatter(&points, &w).unwrap();
            let trace = scatter.trace();
            let top = SymmetricEigen::new(scatter).eigenvalues.max();
            Ok(((trace - top) / mass).max(0.0).sqrt() / diam)
        }
        1 => {
            let mean_offset = |line: &Line| {
                points.iter().zip(&w).map(|(x, wi)| wi * line.dist(x)).sum::<f64>() / mass
            };
            let mut best = Line::orthogonal_regression(&points, &w)
                .map(|l| mean_offset(&l))
                .unwrap_or(f64::INFINITY);
            if points.len() < 2 {
                best = 0.0;
            }
            for a in 0..points.len() {
                for b in (a + 1)..points.len() {
                    if let Some(l) = Line::through(points[a], points[b]) {
                        best = best.min(mean_offset(&l));
                    }
                }
            }
            Ok(best / diam)
        }
        _ => Err(Error::domain(format!("beta_p supports p = 1 or 2, got {p}"))),
    }
}

/// `beta_2(B)` with `beta_2^2 radius = radius^-3 ∭_{(B ∩ Γ)^3} ∂`, the triple
/// integral discretized over the weighted samples inside the ball.
pub fn beta2_ball(
    samples: &WeightedSet,
    ball: &Ball,
    settings: &EstimatorSettings,
    stream: u64,
) -> Result<BetaReport> {
    let space = &samples.space;
    let members = space.ball_members(ball, &PointSubset::all(space.len()))?;
    let ids = members.as_slice();
    let dm = space.distance_matrix(ids);
    let local: Vec<usize> = (0..ids.len()).collect();
    let w: Vec<f64> = ids.iter().map(|&i| samples.weights[i]).collect();
    let est = if ids.len() < 3 {
        TripleEstimate::zero()
    } else {
        estimate_symmetric(&dm, &local, &w, settings, stream, delta_from_sides)
    };
    let value_sq = est.value / ball.radius.powi(4);
    Ok(BetaReport {
        ball: *ball,
        value: value_sq.max(0.0).sqrt(),
        members: ids.len(),
        set_diam: space.diam_of(ids),
        evaluated: est.evaluated,
        mode: est.mode,
        std_error: est.std_error,
        integral: est.value,
    })
}

/// Arc beta number `β̃(τ)` with
/// `β̃^2 diam(τ) = ℓ(τ)^-3 ∫_{x<y<z} ∂1(γ(x), γ(y), γ(z))`, by midpoint
/// quadrature on `m` cells.
pub fn beta_tilde_arc(curve: &Curve, arc: &CurveArc, m: usize) -> Result<f64> {
    if m < 3 {
        return Err(Error::domain("beta_tilde needs at least 3 samples"));
    }
    let len = arc.length();
    if !(len > 0.0) {
        return Ok(0.0);
    }
    if !curve.is_closed() && (arc.start < 0.0 || arc.end > curve.length() * (1.0 + 1e-12)) {
        return Err(Error::domain("arc outside the curve domain"));
    }
    let h = len / m as f64;
    let mut pts = Vec::with_capacity(m + 2);
    for i in 0..m {
        pts.push(curve.point_at(arc.start + (i as f64 + 0.5) * h)?);
    }
    let n = pts.len();
    let mut data = vec![0.0; n * n];
    for a in 0..n {
        for b in (a + 1)..n {
            let d = curve.dist_between(&pts[a], &pts[b]);
            data[a * n + b] = d;
            data[b * n + a] = d;
        }
    }
    let dm = crate::metric::ExplicitMetric::from_matrix_unchecked(n, data)?;
    let dm = MetricSpace::Explicit(dm).full_distance_matrix();
    let idx: Vec<usize> = (0..n).collect();
    let w = vec![h; n];
    let integral = index_ordered_sum(&dm, &idx, &w, true, delta1_from_sides);

    let ends = [curve.point_at(arc.start)?, curve.point_at(arc.end)?];
    let mut diam = curve.dist_between(&ends[0], &ends[1]);
    for p in &pts {
        for e in &ends {
            diam = diam.max(curve.dist_between(p, e));
        }
    }
    for a in 0..n {
        diam = diam.max(dm.row(a).iter().cloned().fold(0.0, f64::max));
    }
    if diam == 0.0 {
        return Ok(0.0);
    }
    Ok((integral / len.powi(3) / diam).max(0.0).sqrt())
}

/// Level-by-level terms of the dyadic excess sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicExcess {
    pub filtration: Filtration,
    pub total: f64,
    /// `per_level[k-1]` sums `∂1(γ(a), γ(mid), γ(b))` over the `2^(k-1)`
    /// intervals of length `2^-(k-1)`.
    pub per_level: Vec<f64>,
    pub curve_length: f64,
}

/// `sum ∂1(γ(a_I), γ(mid_I), γ(b_I))` over dyadic intervals of levels
/// `1..=depth` of the normalized circle, level 1 being the whole circle.
/// Telescopes to a polygon length, hence never exceeds the curve length.
pub fn dyadic_excess_sum(curve: &Curve, filtration: Filtration, depth: u32) -> Result<DyadicExcess> {
    if !curve.is_closed() {
        return Err(Error::domain("dyadic excess needs a closed curve"));
    }
    if depth == 0 || depth > 30 {
        return Err(Error::domain(format!("depth must lie in 1..=30, got {depth}")));
    }
    let len = curve.length();
    let grid = 1usize << depth;
    let pts = (0..grid)
        .map(|i| {
            let t = (i as f64 / grid as f64 + filtration.offset()).rem_euclid(1.0);
            curve.point_at(t * len)
        })
        .collect::<Result<Vec<_>>>()?;
    let at = |i: usize| &pts[i % grid];
    let mut per_level = Vec::with_capacity(depth as usize);
    for level in 1..=depth {
        let step = grid >> (level - 1);
        let half = step / 2;
        let mut sum = 0.0;
        for j in 0..(1usize << (level - 1)) {
            let (a, mid, b) = (at(j * step), at(j * step + half), at((j + 1) * step));
            sum += delta1_from_sides(
                curve.dist_between(a, mid),
                curve.dist_between(mid, b),
                curve.dist_between(a, b),
            );
        }
        per_level.push(sum);
    }
    Ok(DyadicExcess {
        filtration,
        total: per_level.iter().sum(),
        per_level,
        curve_length: len,
    })
}

/// One ball's row in a multiresolution sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallRow {
    pub scale: i32,
    pub center: usize,
    pub radius: f64,
    pub members: usize,
    pub set_diam: f64,
    pub beta: f64,
    /// This ball's term of the sum.
    pub contribution: f64,
    pub evaluated: u64,
    pub mode: Mode,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiresSum {
    pub total: f64,
    pub balls: Vec<BallRow>,
}

/// `sum_{B in family} beta_inf(B)^2 diam(B)` with `diam(B) = 2 r`.
pub fn beta_inf_multires_sum(
    space: &MetricSpace,
    domain: &PointSubset,
    family: &MultiresolutionFamily,
) -> Result<MultiresSum> {
    euclidean(space)?;
    let balls: Vec<_> = family.balls().collect();
    let rows = balls
        .par_iter()
        .map(|fb| {
            let r = beta_inf(space, &fb.ball, domain)?;
            Ok(BallRow {
                scale: fb.n,
                center: fb.ball.center,
                radius: fb.ball.radius,
                members: r.members,
                set_diam: r.set_diam,
                beta: r.value,
                contribution: r.value * r.value * 2.0 * fb.ball.radius,
                evaluated: r.evaluated,
                mode: Mode::Det,
                std_error: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MultiresSum {
        total: rows.iter().map(|r| r.contribution).sum(),
        balls: rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::Filtration;
    use std::f64::consts::{PI, TAU};

    fn cloud(pts: &[[f64; 2]]) -> MetricSpace {
        EuclideanCloud::new(pts.iter().map(|p| p.to_vec()).collect())
            .unwrap()
            .into()
    }

    fn circle_curve(m: usize, r: f64) -> Curve {
        let pts: Vec<Vec<f64>> = (0..m)
            .map(|k| {
                let t = TAU * k as f64 / m as f64;
                vec![r * t.cos(), r * t.sin()]
            })
            .collect();
        Curve::from_points(&pts, true).unwrap()
    }

    #[test]
    fn collinear_and_tiny_sets() {
        let s = cloud(&[[0.0, 0.0], [1.0, 1.0], [3.0, 3.0]]);
        let all = PointSubset::all(3);
        let b = Ball::new(0, 10.0).unwrap();
        assert!(beta_inf(&s, &b, &all).unwrap().value < 1e-15);
        let one = beta_inf(&s, &Ball::new(0, 0.5).unwrap(), &all).unwrap();
        assert_eq!((one.value, one.members), (0.0, 1));
        let w = vec![1.0; 3];
        assert!(beta_p(&s, &b, &w, 2).unwrap() < 1e-15);
        assert!(beta_p(&s, &b, &w, 1).unwrap() < 1e-15);
    }

    #[test]
    fn triangle_candidates() {
        let h = 0.1;
        let s = cloud(&[[0.0, 0.0], [1.0, 0.0], [0.5, h]]);
        let b = Ball::new(0, 1.0).unwrap();
        let d = 2.0;
        let pts: Vec<&[f64]> = (0..3).map(|i| s.as_euclidean().unwrap().point(i)).collect();
        let base = Line::through(pts[0], pts[1]).unwrap();
        assert!((base.max_offset(&pts) / d - h / d).abs() < 1e-15);
        let r = beta_inf(&s, &b, &PointSubset::all(3)).unwrap();
        // never worse than the base line, never better than half the smallest altitude
        assert!(r.value <= h / d + 1e-15);
        assert!(r.value >= 0.5 * h / d - 1e-15);
        assert_eq!(r.evaluated, 4);
    }

    #[test]
    fn cross_rms_offset() {
        // best L2 line is the x axis; offsets 0, 0, a, a
        let a = 0.4;
        let s = cloud(&[[-1.0, 0.0], [1.0, 0.0], [0.0, a], [0.0, -a]]);
        let b = Ball::new(0, 2.0).unwrap();
        let v = beta_p(&s, &b, &[1.0; 4], 2).unwrap();
        let rms = (2.0 * a * a / 4.0_f64).sqrt();
        assert!((v - rms / 4.0).abs() < 1e-12);
        assert!(matches!(beta_p(&s, &b, &[1.0; 4], 3), Err(Error::Domain(_))));
        assert!(matches!(
            beta_p(&s, &Ball::new(0, 0.1).unwrap(), &[0.0, 1.0, 1.0, 1.0], 2),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn isotropic_sets_skip_regression() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let pts: Vec<&[f64]> = sq.iter().map(|p| p.as_slice()).collect();
        assert!(Line::orthogonal_regression(&pts, &[1.0; 4]).is_none());
        let s = cloud(&sq);
        let b = Ball::new(0, 2.0).unwrap();
        // best pair line is a diagonal: offsets 0, 0, 1/sqrt2, 1/sqrt2
        let v1 = beta_p(&s, &b, &[1.0; 4], 1).unwrap();
        assert!((v1 - 0.5f64.sqrt() / 2.0 / 4.0).abs() < 1e-12, "{v1}");
        // any line through the centre: mean square offset 1/4
        let v2 = beta_p(&s, &b, &[1.0; 4], 2).unwrap();
        assert!((v2 - 0.5 / 4.0).abs() < 1e-12);
        let v = beta_inf(&s, &b, &PointSubset::all(4)).unwrap();
        assert!((v.value - 0.5f64.sqrt() / 4.0).abs() < 1e-12);
        assert_eq!(v.evaluated, 6);
    }

    #[test]
    fn beta_inf_needs_euclidean() {
        let m = crate::metric::ExplicitMetric::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let s: MetricSpace = m.into();
        let r = beta_inf(&s, &Ball::new(0, 1.0).unwrap(), &PointSubset::all(2));
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }

    #[test]
    fn beta2_vanishes_on_segment_and_is_dilation_invariant() {
        let seg = Curve::from_points(&[vec![0.0, 0.0], vec![2.0, 0.0]], false).unwrap();
        let s = seg.sample_uniform(60).unwrap();
        let b = Ball::new(30, 0.7).unwrap();
        let r = beta2_ball(&s.set, &b, &EstimatorSettings::default(), 0).unwrap();
        assert_eq!(r.value, 0.0);

        let c = circle_curve(90, 1.0).sample_uniform(80).unwrap();
        let b = Ball::new(0, 0.9).unwrap();
        let v = beta2_ball(&c.set, &b, &EstimatorSettings::default(), 0).unwrap().value;
        let big = c.set.scaled(3.0);
        let v3 = beta2_ball(&big, &b.dilate(3.0), &EstimatorSettings::default(), 0)
            .unwrap()
            .value;
        assert!(v > 0.0);
        assert!((v - v3).abs() < 1e-12 * v);
    }

    #[test]
    fn beta_tilde_segment_and_dilation() {
        let seg = Curve::from_points(&[vec![0.0, 0.0], vec![1.0, 1.0]], false).unwrap();
        let arc = CurveArc::new(0.1, 1.2).unwrap();
        assert_eq!(beta_tilde_arc(&seg, &arc, 40).unwrap(), 0.0);
        let c = circle_curve(400, 1.0);
        let arc = CurveArc::new(0.0, c.length() / 2.0).unwrap();
        let v = beta_tilde_arc(&c, &arc, 60).unwrap();
        let c5 = c.scaled(5.0);
        let arc5 = CurveArc::new(0.0, c5.length() / 2.0).unwrap();
        let v5 = beta_tilde_arc(&c5, &arc5, 60).unwrap();
        assert!((v - v5).abs() < 1e-10 * v);
        assert_eq!(beta_tilde_arc(&c, &CurveArc::new(1.0, 1.0).unwrap(), 10).unwrap(), 0.0);
        assert!(beta_tilde_arc(&c, &arc, 2).is_err());
    }

    #[test]
    fn dyadic_excess_first_level_on_closed_curve() {
        let c = circle_curve(360, 1.0);
        let e = dyadic_excess_sum(&c, Filtration::Standard, 1).unwrap();
        let half = c.point_at(c.length() / 2.0).unwrap();
        let start = c.point_at(0.0).unwrap();
        assert!((e.total - 2.0 * c.dist_between(&start, &half)).abs() < 1e-12);
        assert!((e.total - 4.0).abs() < 1e-3);
    }

    #[test]
    fn dyadic_excess_bounded_and_monotone() {
        let c = circle_curve(360, 1.0);
        for f in [Filtration::Standard, Filtration::Third] {
            let e = dyadic_excess_sum(&c, f, 12).unwrap();
            let mut partial = 0.0;
            for term in &e.per_level {
                assert!(*term >= 0.0);
                partial += term;
                assert!(partial <= c.length() + 1e-9);
            }
            assert!(e.total <= 2.0 * PI);
        }
        let back = Curve::from_points(&[vec![0.0, 0.0], vec![1.0, 0.0]], true).unwrap();
        let e = dyadic_excess_sum(&back, Filtration::Third, 8).unwrap();
        assert!(e.total <= 2.0 + 1e-12);
        let open = Curve::from_points(&[vec![0.0], vec![1.0]], false).unwrap();
        assert!(dyadic_excess_sum(&open, Filtration::Standard, 3).is_err());
    }
}
