//! Polyline curves parameterized by arc length, their arcs inside balls,
//! dyadic filtrations of the circle, and regularity measurement.
//!
//! A curve is an ordered list of vertex ids into a [`MetricSpace`]. In a
//! Euclidean cloud points between vertices are interpolated linearly; in any
//! other space the curve only "exists" at its vertices and queries resolve to
//! the nearest vertex in parameter.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{euclidean_dist, Ball, EuclideanCloud, MetricSpace, WeightedSet};

/// Relative tolerance for parameter comparisons (fraction of curve length).
const PARAM_TOL: f64 = 1e-12;

/// A location on a curve: explicit coordinates (Euclidean curves) or a vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvePoint {
    Coords(Vec<f64>),
    Vertex(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    space: MetricSpace,
    vertices: Vec<usize>,
    closed: bool,
    /// Arc length at each vertex; for closed curves a final entry holds the
    /// total length (return to the first vertex).
    cumulative: Vec<f64>,
}

/// Parameter interval `[start, end]` of a curve. On closed curves `end` may
/// exceed the curve length, meaning the arc wraps through parameter 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveArc {
    pub start: f64,
    pub end: f64,
}

impl CurveArc {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start <= end) {
            return Err(Error::domain(format!("arc [{start}, {end}] is reversed")));
        }
        Ok(CurveArc { start, end })
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

impl Curve {
    pub fn new(space: MetricSpace, vertices: Vec<usize>, closed: bool) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::domain("curve without vertices"));
        }
        for &v in &vertices {
            space.dist(v, v)?;
        }
        let n = vertices.len();
        let segments = if closed && n > 1 { n } else { n - 1 };
        let mut cumulative = Vec::with_capacity(segments + 1);
        cumulative.push(0.0);
        for k in 0..segments {
            let d = space.d(vertices[k], vertices[(k + 1) % n]);
            if !(d > 0.0) {
                return Err(Error::Validation(format!(
                    "consecutive vertices {k} and {} coincide",
                    (k + 1) % n
                )));
            }
            cumulative.push(cumulative[k] + d);
        }
        Ok(Curve {
            space,
            vertices,
            closed,
            cumulative,
        })
    }

    /// Euclidean polyline through `points`; repeated coordinates share one id.
    pub fn from_points(points: &[Vec<f64>], closed: bool) -> Result<Self> {
        let mut ids: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut unique = Vec::new();
        let mut vertices = Vec::with_capacity(points.len());
        for p in points {
            let key: Vec<u64> = p.iter().map(|x| x.to_bits()).collect();
            let id = *ids.entry(key).or_insert_with(|| {
                unique.push(p.clone());
                unique.len() - 1
            });
            vertices.push(id);
        }
        Curve::new(EuclideanCloud::new(unique)?.into(), vertices, closed)
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Arc-length parameter of vertex number `k` (position in the vertex list).
    pub fn vertex_param(&self, k: usize) -> f64 {
        self.cumulative[k]
    }

    fn segment_count(&self) -> usize {
        self.cumulative.len() - 1
    }

    /// Coordinates of every vertex position (Euclidean curves only).
    pub fn vertex_coords(&self) -> Option<Vec<Vec<f64>>> {
        let c = self.space.as_euclidean()?;
        Some(self.vertices.iter().map(|&v| c.point(v).to_vec()).collect())
    }

    fn normalize(&self, s: f64) -> Result<f64> {
        let len = self.length();
        if !s.is_finite() {
            return Err(Error::domain("non-finite curve parameter"));
        }
        if self.closed {
            if len == 0.0 {
                return Ok(0.0);
            }
            let t = s.rem_euclid(len);
            Ok(if t >= len { 0.0 } else { t })
        } else {
            let tol = PARAM_TOL * len.max(1.0);
            if s < -tol || s > len + tol {
                return Err(Error::domain(format!(
                    "parameter {s} outside open curve domain [0, {len}]"
                )));
            }
            Ok(s.clamp(0.0, len))
        }
    }

    /// Segment index `k` and its local fraction for a normalized parameter.
    fn locate(&self, s: f64) -> (usize, f64) {
        let segs = self.segment_count();
        if segs == 0 {
            return (0, 0.0);
        }
        let k = self.cumulative.partition_point(|&c| c <= s).saturating_sub(1);
        let k = k.min(segs - 1);
        let len = self.cumulative[k + 1] - self.cumulative[k];
        (k, ((s - self.cumulative[k]) / len).clamp(0.0, 1.0))
    }

    fn vertex_at(&self, k: usize) -> usize {
        self.vertices[k % self.vertices.len()]
    }

    /// The point `gamma(s)`. Closed curves wrap modulo the length.
    pub fn point_at(&self, s: f64) -> Result<CurvePoint> {
        let s = self.normalize(s)?;
        let (k, t) = self.locate(s);
        let (a, b) = (self.vertex_at(k), self.vertex_at(k + 1));
        Ok(match &self.space {
            MetricSpace::Euclidean(c) => {
                if t == 0.0 || self.segment_count() == 0 {
                    CurvePoint::Coords(c.point(a).to_vec())
                } else if t == 1.0 {
                    CurvePoint::Coords(c.point(b).to_vec())
                } else {
                    let (p, q) = (c.point(a), c.point(b));
                    CurvePoint::Coords(p.iter().zip(q).map(|(x, y)| x + t * (y - x)).collect())
                }
            }
            _ => CurvePoint::Vertex(if t <= 0.5 { a } else { b }),
        })
    }

    pub fn coords_of<'a>(&'a self, p: &'a CurvePoint) -> Option<&'a [f64]> {
        match p {
            CurvePoint::Coords(x) => Some(x),
            CurvePoint::Vertex(v) => self.space.as_euclidean().map(|c| c.point(*v)),
        }
    }

    /// Distance between two curve locations.
    pub fn dist_between(&self, p: &CurvePoint, q: &CurvePoint) -> f64 {
        match (p, q) {
            (CurvePoint::Vertex(a), CurvePoint::Vertex(b)) => self.space.d(*a, *b),
            _ => match (self.coords_of(p), self.coords_of(q)) {
                (Some(x), Some(y)) => euclidean_dist(x, y),
                _ => f64::NAN,
            },
        }
    }

    /// The curve with every distance multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Curve {
        Curve {
            space: self.space.scaled(lambda),
            vertices: self.vertices.clone(),
            closed: self.closed,
            cumulative: self.cumulative.iter().map(|c| c * lambda).collect(),
        }
    }

    /// Builds a curve over the same space (or, for Euclidean curves, a fresh
    /// cloud) through the given locations; consecutive repeats are dropped.
    pub fn through_points(&self, points: &[CurvePoint], closed: bool) -> Result<Curve> {
        let mut pts: Vec<&CurvePoint> = Vec::with_capacity(points.len());
        for p in points {
            if pts.last().map_or(true, |q| self.dist_between(q, p) > 0.0) {
                pts.push(p);
            }
        }
        if closed && pts.len() > 1 && self.dist_between(pts[0], pts[pts.len() - 1]) == 0.0 {
            pts.pop();
        }
        if self.space.is_euclidean() {
            let coords: Vec<Vec<f64>> = pts
                .iter()
                .map(|p| self.coords_of(p).unwrap().to_vec())
                .collect();
            Curve::from_points(&coords, closed)
        } else {
            let ids = pts
                .iter()
                .map(|p| match p {
                    CurvePoint::Vertex(v) => Ok(*v),
                    CurvePoint::Coords(_) => Err(Error::usage("coordinates on a non-Euclidean curve")),
                })
                .collect::<Result<Vec<_>>>()?;
            Curve::new(self.space.clone(), ids, closed)
        }
    }

    /// `m` samples at the midpoints of `m` equal parameter cells, each carrying
    /// mass `length / m`. Samples landing on the same location are merged and
    /// their masses added.
    pub fn sample_uniform(&self, m: usize) -> Result<CurveSamples> {
        if m == 0 {
            return Err(Error::domain("sample count must be positive"));
        }
        let len = self.length();
        let h = len / m as f64;
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut points: Vec<CurvePoint> = Vec::new();
        let mut params = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for i in 0..m {
            let s = (i as f64 + 0.5) * h;
            let p = self.point_at(s)?;
            let key = match &p {
                CurvePoint::Coords(x) => x.iter().map(|v| v.to_bits()).collect(),
                CurvePoint::Vertex(v) => vec![*v as u64],
            };
            match index.get(&key) {
                Some(&k) => weights[k] += h,
                None => {
                    index.insert(key, points.len());
                    points.push(p);
                    params.push(s);
                    weights.push(h);
                }
            }
        }
        let space = match &self.space {
            MetricSpace::Euclidean(c) => {
                let coords = points
                    .iter()
                    .flat_map(|p| self.coords_of(p).unwrap().to_vec())
                    .collect();
                MetricSpace::Euclidean(EuclideanCloud::from_flat(c.dim(), coords)?)
            }
            other => {
                let ids: Vec<usize> = points
                    .iter()
                    .map(|p| match p {
                        CurvePoint::Vertex(v) => *v,
                        CurvePoint::Coords(_) => unreachable!(),
                    })
                    .collect();
                other.restrict(&ids)
            }
        };
        Ok(CurveSamples {
            set: WeightedSet::new(space, weights)?,
            params,
            points,
            requested: m,
            spacing: h,
            length: len,
        })
    }

    /// Maximal parameter intervals whose image lies in the closed ball
    /// `Ball(center, radius)`.
    pub fn components_in_ball(&self, center: &CurvePoint, radius: f64) -> Vec<CurveArc> {
        let len = self.length();
        let tol = PARAM_TOL * len.max(1.0);
        let mut raw: Vec<(f64, f64)> = Vec::new();
        if let Some(cloud) = self.space.as_euclidean() {
            let c = self.coords_of(center).unwrap().to_vec();
            if self.segment_count() == 0 {
                if euclidean_dist(cloud.point(self.vertices[0]), &c) <= radius {
                    raw.push((0.0, 0.0));
                }
            }
            for k in 0..self.segment_count() {
                let (p, q) = (cloud.point(self.vertex_at(k)), cloud.point(self.vertex_at(k + 1)));
                if let Some((u0, u1)) = segment_ball_interval(p, q, &c, radius) {
                    let (s0, s1) = (self.cumulative[k], self.cumulative[k + 1]);
                    raw.push((s0 + u0 * (s1 - s0), s0 + u1 * (s1 - s0)));
                }
            }
        } else {
            let n = self.vertices.len();
            let inside: Vec<bool> = self
                .vertices
                .iter()
                .map(|&v| self.dist_between(center, &CurvePoint::Vertex(v)) <= radius)
                .collect();
            for k in 0..n {
                if inside[k] {
                    raw.push((self.cumulative[k], self.cumulative[k]));
                }
                if k < self.segment_count() && inside[k] && inside[(k + 1) % n] {
                    raw.push((self.cumulative[k], self.cumulative[k + 1]));
                }
            }
        }
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut arcs: Vec<CurveArc> = Vec::new();
        for (a, b) in raw {
            match arcs.last_mut() {
                Some(last) if a <= last.end + tol => last.end = last.end.max(b),
                _ => arcs.push(CurveArc { start: a, end: b }),
            }
        }
        if self.closed && arcs.len() > 1 {
            let first = arcs[0];
            let last = *arcs.last().unwrap();
            if first.start <= tol && last.end >= len - tol {
                arcs.pop();
                arcs[0] = CurveArc {
                    start: last.start,
                    end: first.end + len,
                };
                arcs.sort_by(|a, b| a.start.total_cmp(&b.start));
            }
        }
        if self.closed {
            if let [only] = arcs.as_slice() {
                if only.length() >= len - tol {
                    return vec![CurveArc { start: 0.0, end: len }];
                }
            }
        }
        arcs
    }

    /// Components of the preimage of a ball centred at a point of the space.
    pub fn lambda_components(&self, ball: &Ball) -> Result<Vec<CurveArc>> {
        self.space.dist(ball.center, ball.center)?;
        let center = match self.space.as_euclidean() {
            Some(c) => CurvePoint::Coords(c.point(ball.center).to_vec()),
            None => CurvePoint::Vertex(ball.center),
        };
        Ok(self.components_in_ball(&center, ball.radius))
    }

    /// Pairs `(tau, tau^i)`: every arc of the ball and the arc of the
    /// `2^i`-dilated ball containing it.
    pub fn lambda_extensions(&self, ball: &Ball, i: u32) -> Result<Vec<(CurveArc, CurveArc)>> {
        let inner = self.lambda_components(ball)?;
        let outer = self.lambda_components(&ball.dilate(2f64.powi(i as i32)))?;
        Ok(inner
            .into_iter()
            .filter_map(|tau| {
                outer
                    .iter()
                    .find(|big| self.arc_contains(big, &tau))
                    .map(|big| (tau, *big))
            })
            .collect())
    }

    /// Whether `inner` lies within `outer` in parameter.
    pub fn arc_contains(&self, outer: &CurveArc, inner: &CurveArc) -> bool {
        let len = self.length();
        let tol = PARAM_TOL * len.max(1.0) * 16.0;
        if self.closed {
            if outer.length() >= len - tol {
                return true;
            }
            let mut off = (inner.start - outer.start).rem_euclid(len);
            if off > len - tol {
                off = 0.0;
            }
            off + inner.length() <= outer.length() + tol
        } else {
            inner.start >= outer.start - tol && inner.end <= outer.end + tol
        }
    }

    /// Polyline of an arc: its endpoints and every vertex strictly between.
    pub fn arc_points(&self, arc: &CurveArc) -> Result<Vec<CurvePoint>> {
        let len = self.length();
        let mut out = vec![self.point_at(arc.start)?];
        let laps: &[f64] = if self.closed { &[0.0, 1.0, 2.0] } else { &[0.0] };
        for lap in laps {
            for k in 0..self.vertices.len() {
                let s = self.cumulative[k] + lap * len;
                if s > arc.start && s < arc.end {
                    out.push(CurvePoint::Vertex(self.vertices[k]));
                }
            }
        }
        out.push(self.point_at(arc.end)?);
        Ok(out)
    }
}

/// Parameter interval `[u0, u1] ⊂ [0, 1]` of the segment `p + u (q - p)`
/// inside the closed ball.
fn segment_ball_interval(p: &[f64], q: &[f64], c: &[f64], r: f64) -> Option<(f64, f64)> {
    let mut a = 0.0;
    let mut b = 0.0;
    let mut cc = 0.0;
    for i in 0..p.len() {
        let d = q[i] - p[i];
        let e = p[i] - c[i];
        a += d * d;
        b += 2.0 * d * e;
        cc += e * e;
    }
    cc -= r * r;
    let disc = b * b - 4.0 * a * cc;
    if a == 0.0 || disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // numerically stable roots
    let qv = -0.5 * (b + b.signum() * sq);
    let (mut r0, mut r1) = if qv == 0.0 {
        (0.0, 0.0)
    } else {
        (qv / a, cc / qv)
    };
    if r0 > r1 {
        std::mem::swap(&mut r0, &mut r1);
    }
    let (u0, u1) = (r0.max(0.0), r1.min(1.0));
    // endpoints inside the ball are authoritative
    let u0 = if cc <= 0.0 { 0.0 } else { u0 };
    let end_inside = q.iter().zip(c).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() <= r * r;
    let u1 = if end_inside { 1.0 } else { u1 };
    if u0 <= u1 {
        Some((u0, u1))
    } else {
        None
    }
}

/// Uniform arc-length samples of a curve with their quadrature masses.
#[derive(Clone, Debug)]
pub struct CurveSamples {
    pub set: WeightedSet,
    /// Arc-length parameter of each (merged) sample.
    pub params: Vec<f64>,
    pub points: Vec<CurvePoint>,
    /// Number of parameter cells requested.
    pub requested: usize,
    /// Parameter cell width `length / requested`.
    pub spacing: f64,
    pub length: f64,
}

impl CurveSamples {
    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    pub fn space(&self) -> &MetricSpace {
        &self.set.space
    }

    pub fn weights(&self) -> &[f64] {
        &self.set.weights
    }

    /// Distance from an arbitrary curve location to every sample.
    pub fn distances_from(&self, curve: &Curve, p: &CurvePoint) -> Vec<f64> {
        self.points.iter().map(|q| curve.dist_between(p, q)).collect()
    }
}

/// Result of [`measure_regularity`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityEstimate {
    pub constant: f64,
    /// Parameter of the worst trial's center.
    pub center: f64,
    pub radius: f64,
    /// Preimage length of the worst trial's ball.
    pub mu: f64,
}

/// Worst ratio `max(r / mu, mu / r)` over trials `(center parameter, radius)`,
/// where `mu` is the parameter length of the preimage of the ball.
pub fn measure_regularity(curve: &Curve, trials: &[(f64, f64)]) -> Result<RegularityEstimate> {
    if trials.is_empty() {
        return Err(Error::domain("regularity needs at least one trial"));
    }
    let mut best: Option<RegularityEstimate> = None;
    for &(s, r) in trials {
        if !(r > 0.0) {
            return Err(Error::domain(format!("trial radius must be positive, got {r}")));
        }
        let center = curve.point_at(s)?;
        let mu: f64 = curve
            .components_in_ball(&center, r)
            .iter()
            .map(CurveArc::length)
            .sum();
        let ratio = if mu > 0.0 { (r / mu).max(mu / r) } else { f64::INFINITY };
        if best.map_or(true, |b| ratio > b.constant) {
            best = Some(RegularityEstimate {
                constant: ratio,
                center: s,
                radius: r,
                mu,
            });
        }
    }
    Ok(best.unwrap())
}

/// The two dyadic filtrations of the unit circle `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Filtration {
    /// Standard dyadic intervals of `[0, 1]`.
    Standard,
    /// Standard intervals rotated by one third of a turn.
    Third,
}

impl Filtration {
    pub fn offset(self) -> f64 {
        match self {
            Filtration::Standard => 0.0,
            Filtration::Third => 1.0 / 3.0,
        }
    }
}

/// Interval `offset + [index, index + 1] / 2^level` of a filtration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub filtration: Filtration,
    pub level: u32,
    pub index: u64,
}

impl DyadicInterval {
    pub fn length(&self) -> f64 {
        2f64.powi(-(self.level as i32))
    }

    /// Start point on the circle, in `[0, 1)`.
    pub fn start(&self) -> f64 {
        (self.filtration.offset() + self.index as f64 * self.length()).rem_euclid(1.0)
    }

    pub fn children(&self) -> [DyadicInterval; 2] {
        let child = |k| DyadicInterval {
            filtration: self.filtration,
            level: self.level + 1,
            index: 2 * self.index + k,
        };
        [child(0), child(1)]
    }
}

/// All intervals of a filtration at `level`.
pub fn dyadic_level(filtration: Filtration, level: u32) -> impl Iterator<Item = DyadicInterval> {
    (0..(1u64 << level)).map(move |index| DyadicInterval {
        filtration,
        level,
        index,
    })
}

/// An interval `[start, start + length]` on the circle `R / Z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleInterval {
    pub start: f64,
    pub length: f64,
}

const MAX_LEVEL: u32 = 52;

fn smallest_containing(j: &CircleInterval, filtration: Filtration) -> DyadicInterval {
    let a = (j.start - filtration.offset()).rem_euclid(1.0);
    let b = a + j.length;
    let mut found = DyadicInterval {
        filtration,
        level: 0,
        index: 0,
    };
    if b > 1.0 {
        return found;
    }
    for level in 1..=MAX_LEVEL {
        let scale = 2f64.powi(level as i32);
        let index = (a * scale).floor();
        if b * scale > index + 1.0 {
            break;
        }
        found = DyadicInterval {
            filtration,
            level,
            index: index as u64,
        };
    }
    found
}

/// Smallest interval of either filtration containing `j`, preferring the
/// standard filtration on ties. Its length is at most `6 |j|` whenever
/// `|j| < 1/6`.
pub fn one_third_containing(j: &CircleInterval) -> Result<DyadicInterval> {
    if !(j.length >= 0.0 && j.length < 1.0 / 6.0) || !j.start.is_finite() {
        return Err(Error::domain(format!(
            "interval length must lie in [0, 1/6), got {}",
            j.length
        )));
    }
    let std = smallest_containing(j, Filtration::Standard);
    let third = smallest_containing(j, Filtration::Third);
    let best = if third.level > std.level { third } else { std };
    if best.length() > 6.0 * j.length {
        return Err(Error::domain(format!(
            "no dyadic interval within factor 6 of length {}",
            j.length
        )));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::ExplicitMetric;
    use std::f64::consts::{PI, TAU};

    fn unit_square() -> Curve {
        Curve::from_points(
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
            true,
        )
        .unwrap()
    }

    fn circle(m: usize) -> Curve {
        let pts: Vec<Vec<f64>> = (0..m)
            .map(|k| {
                let t = TAU * k as f64 / m as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
        Curve::from_points(&pts, true).unwrap()
    }

    fn coords(p: CurvePoint) -> Vec<f64> {
        match p {
            CurvePoint::Coords(x) => x,
            _ => panic!("expected coordinates"),
        }
    }

    #[test]
    fn square_parameterization() {
        let c = unit_square();
        assert_eq!(c.length(), 4.0);
        assert_eq!(coords(c.point_at(0.5).unwrap()), vec![0.5, 0.0]);
        assert_eq!(c.point_at(4.0).unwrap(), c.point_at(0.0).unwrap());
        assert_eq!(coords(c.point_at(2.0).unwrap()), vec![1.0, 1.0]);
        assert_eq!(coords(c.point_at(-0.5).unwrap()), vec![0.0, 0.5]);
    }

    #[test]
    fn open_curve_domain() {
        let c = Curve::from_points(&[vec![0.0], vec![2.0]], false).unwrap();
        assert!(c.point_at(2.5).is_err());
        assert_eq!(coords(c.point_at(2.0).unwrap()), vec![2.0]);
    }

    #[test]
    fn rejects_repeated_consecutive_vertices() {
        let r = Curve::from_points(&[vec![0.0], vec![0.0], vec![1.0]], false);
        assert!(r.is_err());
    }

    #[test]
    fn explicit_curve_resolves_to_vertices() {
        let m = ExplicitMetric::new(3, vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0]).unwrap();
        let c = Curve::new(m.into(), vec![0, 1, 2], false).unwrap();
        assert_eq!(c.point_at(0.4).unwrap(), CurvePoint::Vertex(0));
        assert_eq!(c.point_at(0.6).unwrap(), CurvePoint::Vertex(1));
        let s = c.sample_uniform(6).unwrap();
        assert_eq!(s.len(), 3);
        assert!((s.set.total_mass() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn arc_length_is_one_lipschitz() {
        let c = circle(50);
        let len = c.length();
        for i in 0..40 {
            for j in 0..40 {
                let (s, t) = (len * i as f64 / 40.0, len * j as f64 / 37.0);
                let d = c.dist_between(&c.point_at(s).unwrap(), &c.point_at(t).unwrap());
                assert!(d <= (s - t).abs() + 1e-12);
            }
        }
    }

    #[test]
    fn out_and_back_samples_merge() {
        let c = Curve::from_points(&[vec![0.0, 0.0], vec![1.0, 0.0]], true).unwrap();
        assert_eq!(c.length(), 2.0);
        let s = c.sample_uniform(8).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.weights().iter().all(|&w| w == 0.5));
    }

    #[test]
    fn whole_circle_in_ball() {
        let c = circle(64);
        let arcs = c.components_in_ball(&CurvePoint::Coords(vec![0.0, 0.0]), 1.5);
        assert_eq!(arcs, vec![CurveArc { start: 0.0, end: c.length() }]);
        let none = c.components_in_ball(&CurvePoint::Coords(vec![5.0, 0.0]), 1.0);
        assert!(none.is_empty());
    }

    #[test]
    fn quarter_sector_arc() {
        // chord of a 45 degree half-angle: the ball centred on the circle
        // captures a 90 degree arc
        let m = 720;
        let c = circle(m);
        let r = 2.0 * (PI / 8.0).sin();
        let arcs = c.lambda_components(&Ball::new(0, r).unwrap()).unwrap();
        assert_eq!(arcs.len(), 1);
        let scale = c.length() / TAU;
        assert!((arcs[0].length() - scale * PI / 2.0).abs() < 2.0 * TAU / m as f64);
        // wraps through parameter 0
        assert!(arcs[0].end > c.length());
    }

    #[test]
    fn arcs_disjoint_and_inside() {
        let c = Curve::from_points(
            &[vec![0.0, 0.0], vec![4.0, 0.0], vec![4.0, 0.3], vec![0.0, 0.3], vec![0.0, 2.0]],
            false,
        )
        .unwrap();
        let center = CurvePoint::Coords(vec![2.0, 0.1]);
        let arcs = c.components_in_ball(&center, 1.0);
        assert_eq!(arcs.len(), 2);
        assert!(arcs[0].end < arcs[1].start);
        for a in &arcs {
            for k in 0..=20 {
                let s = a.start + a.length() * k as f64 / 20.0;
                assert!(c.dist_between(&center, &c.point_at(s).unwrap()) <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn extensions_contain_their_arcs() {
        let c = circle(200);
        let ext = c.lambda_extensions(&Ball::new(10, 0.2).unwrap(), 2).unwrap();
        assert_eq!(ext.len(), 1);
        let (tau, big) = ext[0];
        assert!(big.length() > tau.length());
        assert!(c.arc_contains(&big, &tau));
    }

    #[test]
    fn regularity_of_segment_and_circle() {
        let seg = Curve::from_points(&[vec![0.0], vec![1.0]], false).unwrap();
        let est = measure_regularity(&seg, &[(0.5, 0.1), (0.3, 0.05)]).unwrap();
        assert!((est.constant - 2.0).abs() < 1e-9);
        let c = circle(720);
        let trials: Vec<(f64, f64)> = (1..20).map(|k| (0.3 * k as f64, 0.1 * k as f64)).collect();
        let est = measure_regularity(&c, &trials).unwrap();
        assert!(est.constant >= 2.0 - 1e-6 && est.constant <= PI + 1e-6);
        assert!(measure_regularity(&c, &[]).is_err());
    }

    #[test]
    fn one_third_examples() {
        let i = one_third_containing(&CircleInterval { start: 0.49, length: 0.02 }).unwrap();
        assert_eq!(i.filtration, Filtration::Third);
        assert_eq!((i.level, i.index), (5, 5));
        assert!((i.start() - (1.0 / 3.0 + 5.0 / 32.0)).abs() < 1e-15);

        let d = DyadicInterval { filtration: Filtration::Standard, level: 4, index: 7 };
        let got = one_third_containing(&CircleInterval { start: d.start(), length: d.length() }).unwrap();
        assert_eq!(got, d);

        let wrap = one_third_containing(&CircleInterval { start: 0.99, length: 0.02 }).unwrap();
        assert_eq!(wrap.filtration, Filtration::Third);
        assert!(wrap.length() <= 0.12);

        assert!(one_third_containing(&CircleInterval { start: 0.1, length: 1.0 / 6.0 }).is_err());
    }

    #[test]
    fn filtration_levels_partition() {
        for f in [Filtration::Standard, Filtration::Third] {
            for level in 0..6 {
                let total: f64 = dyadic_level(f, level).map(|i| i.length()).sum();
                assert!((total - 1.0).abs() < 1e-15);
                for i in dyadic_level(f, level) {
                    let [a, b] = i.children();
                    assert!((a.length() + b.length() - i.length()).abs() < 1e-15);
                    assert!(((a.start() - i.start()).rem_euclid(1.0)).abs() < 1e-15);
                }
            }
        }
    }
}
