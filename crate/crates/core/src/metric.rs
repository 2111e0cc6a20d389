//! Finite metric spaces, closed balls, and subset diameters.
//!
//! Every other module works on top of [`MetricSpace`]. A space is either a
//! cloud of points in R^d, an explicit distance matrix, or a power transform
//! `dist^alpha` of another space (the snowflake construction).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this size the triangle inequality is checked on random triples only.
pub const EXHAUSTIVE_CHECK_LIMIT: usize = 300;
const SAMPLED_TRIPLES: usize = 100_000;
const SYMMETRY_TOL: f64 = 1e-12;
const TRIANGLE_TOL: f64 = 1e-9;

/// Points in R^d stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EuclideanCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl EuclideanCloud {
    /// Builds a cloud from rows. Rejects ragged rows, non-finite values and
    /// repeated points (the identity axiom needs distinct points).
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::Validation("points have differing dimensions".into()));
        }
        let coords = points.into_iter().flatten().collect();
        Self::from_flat(dim, coords)
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 && !coords.is_empty() {
            return Err(Error::Validation("zero-dimensional points".into()));
        }
        if dim > 0 && coords.len() % dim != 0 {
            return Err(Error::Validation("coordinate count is not a multiple of dim".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Validation("non-finite coordinate".into()));
        }
        let cloud = EuclideanCloud { dim, coords };
        cloud.check_distinct()?;
        Ok(cloud)
    }

    fn check_distinct(&self) -> Result<()> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.point(a)
                .iter()
                .zip(self.point(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for w in order.windows(2) {
            if self.point(w[0]) == self.point(w[1]) {
                return Err(Error::Validation(format!(
                    "points {} and {} coincide",
                    w[0].min(w[1]),
                    w[0].max(w[1])
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim.max(1))
    }
}

pub fn euclidean_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// An explicit symmetric distance matrix. Serializes as `{"n": .., "dist": [..]}`
/// with `dist` row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplicitMetric {
    n: usize,
    dist: Vec<f64>,
}

impl ExplicitMetric {
    /// Validates the metric axioms before accepting the matrix.
    pub fn new(n: usize, dist: Vec<f64>) -> Result<Self> {
        let m = Self::from_matrix_unchecked(n, dist)?;
        m.validate()?;
        Ok(m)
    }

    /// Shape check only; use for matrices derived from an already valid metric.
    pub fn from_matrix_unchecked(n: usize, dist: Vec<f64>) -> Result<Self> {
        if dist.len() != n * n {
            return Err(Error::Validation(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                dist.len()
            )));
        }
        Ok(ExplicitMetric { n, dist })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        let scale = self.dist.iter().cloned().fold(0.0_f64, f64::max);
        if self.dist.iter().any(|d| !d.is_finite()) {
            return Err(Error::Validation("non-finite distance".into()));
        }
        for i in 0..n {
            if self.get(i, i) != 0.0 {
                return Err(Error::Validation(format!("dist({i},{i}) is not zero")));
            }
            for j in (i + 1)..n {
                let (a, b) = (self.get(i, j), self.get(j, i));
                if (a - b).abs() > SYMMETRY_TOL * scale.max(1.0) {
                    return Err(Error::Validation(format!("asymmetric at ({i},{j})")));
                }
                if a <= 0.0 {
                    return Err(Error::Validation(format!("dist({i},{j}) is not positive")));
                }
            }
        }
        check_triangle(n, |i, j| self.get(i, j), TRIANGLE_TOL * scale)
    }
}

fn check_triangle(n: usize, d: impl Fn(usize, usize) -> f64, tol: f64) -> Result<()> {
    let violation = |i: usize, j: usize, k: usize| d(i, k) > d(i, j) + d(j, k) + tol;
    let report = |i, j, k| {
        Err(Error::Validation(format!(
            "triangle inequality fails for ({i},{j},{k})"
        )))
    };
    if n <= EXHAUSTIVE_CHECK_LIMIT {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if violation(i, j, k) {
                        return report(i, j, k);
                    }
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..SAMPLED_TRIPLES {
            let (i, j, k) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
            if violation(i, j, k) {
                return report(i, j, k);
            }
        }
    }
    Ok(())
}

/// A finite metric space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSpace {
    Euclidean(EuclideanCloud),
    Explicit(ExplicitMetric),
    /// `dist_base^exponent` with exponent in (0, 1].
    Power {
        base: Box<MetricSpace>,
        exponent: f64,
    },
}

impl From<EuclideanCloud> for MetricSpace {
    fn from(c: EuclideanCloud) -> Self {
        MetricSpace::Euclidean(c)
    }
}

impl From<ExplicitMetric> for MetricSpace {
    fn from(m: ExplicitMetric) -> Self {
        MetricSpace::Explicit(m)
    }
}

impl MetricSpace {
    pub fn power(base: MetricSpace, exponent: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent <= 1.0) {
            return Err(Error::domain(format!(
                "power exponent must lie in (0, 1], got {exponent}"
            )));
        }
        Ok(MetricSpace::Power {
            base: Box::new(base),
            exponent,
        })
    }

    pub fn len(&self) -> usize {
        match self {
            MetricSpace::Euclidean(c) => c.len(),
            MetricSpace::Explicit(m) => m.len(),
            MetricSpace::Power { base, .. } => base.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_euclidean(&self) -> Option<&EuclideanCloud> {
        match self {
            MetricSpace::Euclidean(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_euclidean(&self) -> bool {
        self.as_euclidean().is_some()
    }

    fn check_id(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::usage(format!(
                "point id {i} out of range for a space of {} points",
                self.len()
            )))
        }
    }

    /// Distance with id validation.
    pub fn dist(&self, i: usize, j: usize) -> Result<f64> {
        self.check_id(i)?;
        self.check_id(j)?;
        Ok(self.d(i, j))
    }

    /// Distance without id validation; panics on out-of-range ids.
    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        match self {
            MetricSpace::Euclidean(c) => euclidean_dist(c.point(i), c.point(j)),
            MetricSpace::Explicit(m) => m.get(i, j),
            MetricSpace::Power { base, exponent } => base.d(i, j).powf(*exponent),
        }
    }

    /// Points of `domain` inside the closed ball.
    pub fn ball_members(&self, ball: &Ball, domain: &PointSubset) -> Result<PointSubset> {
        self.check_id(ball.center)?;
        self.check_subset(domain)?;
        let ids = domain
            .iter()
            .filter(|&j| self.d(ball.center, j) <= ball.radius)
            .collect();
        Ok(PointSubset(ids))
    }

    pub fn subset_diam(&self, subset: &PointSubset) -> Result<f64> {
        if subset.is_empty() {
            return Err(Error::domain("diameter of an empty set"));
        }
        self.check_subset(subset)?;
        Ok(self.diam_of(subset.as_slice()))
    }

    pub(crate) fn diam_of(&self, ids: &[usize]) -> f64 {
        let mut best = 0.0_f64;
        for (a, &i) in ids.iter().enumerate() {
            for &j in &ids[a + 1..] {
                best = best.max(self.d(i, j));
            }
        }
        best
    }

    pub fn check_subset(&self, subset: &PointSubset) -> Result<()> {
        match subset.iter().find(|&i| i >= self.len()) {
            Some(i) => self.check_id(i),
            None => Ok(()),
        }
    }

    /// Dense distance matrix over `ids` (local indices follow `ids` order).
    pub fn distance_matrix(&self, ids: &[usize]) -> DistanceMatrix {
        let n = ids.len();
        let mut data = vec![0.0; n * n];
        for a in 0..n {
            for b in (a + 1)..n {
                let d = self.d(ids[a], ids[b]);
                data[a * n + b] = d;
                data[b * n + a] = d;
            }
        }
        DistanceMatrix { n, data }
    }

    pub fn full_distance_matrix(&self) -> DistanceMatrix {
        let ids: Vec<usize> = (0..self.len()).collect();
        self.distance_matrix(&ids)
    }

    /// Sub-space on `ids`, renumbered `0..ids.len()`.
    pub fn restrict(&self, ids: &[usize]) -> MetricSpace {
        match self {
            MetricSpace::Euclidean(c) => MetricSpace::Euclidean(EuclideanCloud {
                dim: c.dim,
                coords: ids.iter().flat_map(|&i| c.point(i).iter().copied()).collect(),
            }),
            MetricSpace::Explicit(m) => {
                let n = ids.len();
                let mut dist = Vec::with_capacity(n * n);
                for &i in ids {
                    dist.extend(ids.iter().map(|&j| m.get(i, j)));
                }
                MetricSpace::Explicit(ExplicitMetric { n, dist })
            }
            MetricSpace::Power { base, exponent } => MetricSpace::Power {
                base: Box::new(base.restrict(ids)),
                exponent: *exponent,
            },
        }
    }

    /// The same space with every distance multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> MetricSpace {
        match self {
            MetricSpace::Euclidean(c) => MetricSpace::Euclidean(EuclideanCloud {
                dim: c.dim,
                coords: c.coords.iter().map(|x| x * lambda).collect(),
            }),
            MetricSpace::Explicit(m) => MetricSpace::Explicit(ExplicitMetric {
                n: m.n,
                dist: m.dist.iter().map(|x| x * lambda).collect(),
            }),
            MetricSpace::Power { base, exponent } => MetricSpace::Power {
                base: Box::new(base.scaled(lambda.powf(1.0 / exponent))),
                exponent: *exponent,
            },
        }
    }

    /// Checks symmetry, identity and the triangle inequality
    /// (exhaustive up to [`EXHAUSTIVE_CHECK_LIMIT`] points, sampled above).
    pub fn validate_axioms(&self) -> Result<()> {
        let n = self.len();
        let mut scale = 0.0_f64;
        for i in 0..n {
            if self.d(i, i) != 0.0 {
                return Err(Error::Validation(format!("dist({i},{i}) is not zero")));
            }
            for j in (i + 1)..n {
                let d = self.d(i, j);
                if !(d > 0.0) || (d - self.d(j, i)).abs() > SYMMETRY_TOL * d.max(1.0) {
                    return Err(Error::Validation(format!("axiom failure at ({i},{j})")));
                }
                scale = scale.max(d);
            }
        }
        check_triangle(n, |i, j| self.d(i, j), TRIANGLE_TOL * scale)
    }
}

/// Closed ball `{y : dist(center, y) <= radius}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::domain(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Ball { center, radius })
    }

    /// `lambda * B`: same center, radius scaled.
    pub fn dilate(&self, lambda: f64) -> Ball {
        Ball {
            center: self.center,
            radius: self.radius * lambda,
        }
    }
}

/// Ordered list of distinct point ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointSubset(Vec<usize>);

impl PointSubset {
    pub fn new(ids: Vec<usize>) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(ids.len());
        if let Some(dup) = ids.iter().find(|i| !seen.insert(**i)) {
            return Err(Error::usage(format!("point id {dup} repeated in subset")));
        }
        Ok(PointSubset(ids))
    }

    pub fn all(n: usize) -> Self {
        PointSubset((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.0.contains(&id)
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

/// Dense symmetric matrix of pairwise distances, row-major.
#[derive(Clone, Debug)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// A finite set with per-point masses approximating H^1 restricted to the set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedSet {
    pub space: MetricSpace,
    pub weights: Vec<f64>,
}

impl WeightedSet {
    pub fn new(space: MetricSpace, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(Error::usage(format!(
                "{} weights for {} points",
                weights.len(),
                space.len()
            )));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::domain("weights must be finite and non-negative"));
        }
        Ok(WeightedSet { space, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Dilation by `lambda`: distances and masses both scale.
    pub fn scaled(&self, lambda: f64) -> WeightedSet {
        WeightedSet {
            space: self.space.scaled(lambda),
            weights: self.weights.iter().map(|w| w * lambda).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> MetricSpace {
        EuclideanCloud::new(xs.iter().map(|&x| vec![x]).collect())
            .unwrap()
            .into()
    }

    #[test]
    fn pythagorean_distance() {
        let s: MetricSpace = EuclideanCloud::new(vec![vec![0.0, 0.0], vec![3.0, 4.0]])
            .unwrap()
            .into();
        assert_eq!(s.dist(0, 1).unwrap(), 5.0);
        assert_eq!(s.dist(1, 1).unwrap(), 0.0);
        assert!(matches!(s.dist(0, 2), Err(Error::Usage(_))));
    }

    #[test]
    fn power_transform_of_segment() {
        let s = MetricSpace::power(line(&[0.0, 4.0]), 0.5).unwrap();
        assert_eq!(s.dist(0, 1).unwrap(), 2.0);
        assert!(MetricSpace::power(line(&[0.0, 1.0]), 1.5).is_err());
        assert!(MetricSpace::power(line(&[0.0, 1.0]), 0.0).is_err());
    }

    #[test]
    fn closed_ball_membership() {
        let s = line(&[0.0, 1.0, 2.0, 3.0]);
        let dom = PointSubset::all(4);
        let m = s.ball_members(&Ball::new(1, 1.0).unwrap(), &dom).unwrap();
        assert_eq!(m.as_slice(), &[0, 1, 2]);
        let m = s.ball_members(&Ball::new(1, 0.5).unwrap(), &dom).unwrap();
        assert_eq!(m.as_slice(), &[1]);
        let m = s.ball_members(&Ball::new(1, 3.0).unwrap(), &dom).unwrap();
        assert_eq!(m, dom);
        assert!(Ball::new(0, 0.0).is_err());
    }

    #[test]
    fn dilated_ball_keeps_center() {
        let b = Ball::new(3, 0.5).unwrap().dilate(4.0);
        assert_eq!(b, Ball { center: 3, radius: 2.0 });
    }

    #[test]
    fn diameters() {
        let s: MetricSpace =
            EuclideanCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]])
                .unwrap()
                .into();
        let d = s.subset_diam(&PointSubset::all(3)).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.subset_diam(&PointSubset::new(vec![2]).unwrap()).unwrap(), 0.0);
        assert!(matches!(
            s.subset_diam(&PointSubset::default()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn circle_diameter_by_pairs() {
        let m = 360;
        let pts = (0..m)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / m as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
        let s: MetricSpace = EuclideanCloud::new(pts).unwrap().into();
        let d = s.subset_diam(&PointSubset::all(m)).unwrap();
        assert!((d - 2.0).abs() < 1e-3);
    }

    #[test]
    fn explicit_metric_validation() {
        // path metric on three points
        let ok = ExplicitMetric::new(3, vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0]);
        assert!(ok.is_ok());
        let asym = ExplicitMetric::new(2, vec![0.0, 1.0, 1.1, 0.0]);
        assert!(matches!(asym, Err(Error::Validation(_))));
        let tri = ExplicitMetric::new(3, vec![0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0]);
        assert!(matches!(tri, Err(Error::Validation(_))));
        let zero = ExplicitMetric::new(2, vec![0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(zero, Err(Error::Validation(_))));
        let shape = ExplicitMetric::new(2, vec![0.0, 1.0, 1.0]);
        assert!(shape.is_err());
    }

    #[test]
    fn explicit_metric_json_shape() {
        let m = ExplicitMetric::new(2, vec![0.0, 1.5, 1.5, 0.0]).unwrap();
        let v = serde_json::to_value(&m).unwrap();
        assert_eq!(v, serde_json::json!({"n": 2, "dist": [0.0, 1.5, 1.5, 0.0]}));
    }

    #[test]
    fn duplicate_points_rejected() {
        let r = EuclideanCloud::new(vec![vec![1.0, 2.0], vec![0.0, 0.0], vec![1.0, 2.0]]);
        assert!(matches!(r, Err(Error::Validation(_))));
    }

    #[test]
    fn subset_rejects_repeats() {
        assert!(PointSubset::new(vec![0, 1, 0]).is_err());
    }

    #[test]
    fn restrict_and_scale() {
        let s = line(&[0.0, 1.0, 3.0, 7.0]);
        let r = s.restrict(&[3, 1]);
        assert_eq!(r.d(0, 1), 6.0);
        let p = MetricSpace::power(s.clone(), 0.5).unwrap().scaled(2.0);
        assert!((p.d(0, 3) - 2.0 * 7f64.sqrt()).abs() < 1e-12);
    }

    fn random_cloud() -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(-10.0..10.0f64, 2), 2..25)
    }

    proptest! {
        #[test]
        fn power_transform_is_a_metric(pts in random_cloud(), alpha in 0.05..=1.0f64) {
            if let Ok(c) = EuclideanCloud::new(pts) {
                let s = MetricSpace::power(c.into(), alpha).unwrap();
                prop_assert!(s.validate_axioms().is_ok());
            }
        }

        #[test]
        fn ball_members_monotone_in_radius(pts in random_cloud(), r1 in 0.01..5.0f64, dr in 0.0..5.0f64) {
            if let Ok(c) = EuclideanCloud::new(pts) {
                let s: MetricSpace = c.into();
                let dom = PointSubset::all(s.len());
                let small = s.ball_members(&Ball::new(0, r1).unwrap(), &dom).unwrap();
                let big = s.ball_members(&Ball::new(0, r1 + dr).unwrap(), &dom).unwrap();
                prop_assert!(small.iter().all(|i| big.contains(i)));
            }
        }
    }
}
