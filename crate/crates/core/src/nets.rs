//! Epsilon-nets and multiresolution ball families.
//!
//! A net at scale `n` is a `2^-n`-separated, `2^-n`-covering subset built by
//! greedy sequential insertion. The family attaches a ball of radius
//! `A * 2^-n` to every net point at every scale.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Ball, MetricSpace, PointSubset};

/// Order in which candidates are offered to the greedy net builder.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InsertionOrder {
    #[default]
    Input,
    FarthestFirst,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub epsilon: f64,
    pub members: PointSubset,
    pub domain: PointSubset,
}

impl Net {
    /// Distinct members are pairwise more than epsilon apart.
    pub fn is_separated(&self, space: &MetricSpace) -> bool {
        let m = self.members.as_slice();
        m.iter().enumerate().all(|(a, &i)| {
            m[a + 1..]
                .iter()
                .all(|&j| space.d(i, j) > self.epsilon)
        })
    }

    /// Every domain point lies within epsilon of some member.
    pub fn is_covering(&self, space: &MetricSpace) -> bool {
        self.domain
            .iter()
            .all(|y| self.members.iter().any(|x| space.d(x, y) <= self.epsilon))
    }
}

fn farthest_first(space: &MetricSpace, domain: &[usize]) -> Vec<usize> {
    let n = domain.len();
    if n == 0 {
        return Vec::new();
    }
    let mut order = Vec::with_capacity(n);
    let mut taken = vec![false; n];
    let mut gap = vec![f64::INFINITY; n];
    let mut next = 0;
    for _ in 0..n {
        taken[next] = true;
        order.push(domain[next]);
        let c = domain[next];
        let mut best: Option<(f64, usize)> = None;
        for k in 0..n {
            if taken[k] {
                continue;
            }
            gap[k] = gap[k].min(space.d(c, domain[k]));
            if best.map_or(true, |(g, _)| gap[k] > g) {
                best = Some((gap[k], k));
            }
        }
        match best {
            Some((_, k)) => next = k,
            None => break,
        }
    }
    order
}

fn ordered_candidates(space: &MetricSpace, domain: &PointSubset, order: InsertionOrder) -> Vec<usize> {
    match order {
        InsertionOrder::Input => domain.as_slice().to_vec(),
        InsertionOrder::FarthestFirst => farthest_first(space, domain.as_slice()),
    }
}

fn greedy_insert(space: &MetricSpace, candidates: &[usize], epsilon: f64, seed: Vec<usize>) -> Vec<usize> {
    let mut members = seed;
    for &y in candidates {
        if members.iter().all(|&x| space.d(x, y) > epsilon) {
            members.push(y);
        }
    }
    members
}

pub fn build_net(
    space: &MetricSpace,
    domain: &PointSubset,
    epsilon: f64,
    order: InsertionOrder,
) -> Result<Net> {
    if !(epsilon > 0.0) {
        return Err(Error::domain(format!("net epsilon must be positive, got {epsilon}")));
    }
    if domain.is_empty() {
        return Err(Error::domain("net of an empty domain"));
    }
    space.check_subset(domain)?;
    let candidates = ordered_candidates(space, domain, order);
    let members = greedy_insert(space, &candidates, epsilon, Vec::new());
    Ok(Net {
        epsilon,
        members: PointSubset::new(members)?,
        domain: domain.clone(),
    })
}

/// Parameters of a multiresolution family. Missing scale bounds are derived
/// from the data (see [`default_scale_range`]).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub a: f64,
    pub n_min: Option<i32>,
    pub n_max: Option<i32>,
    pub nested: bool,
    pub order: InsertionOrder,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams {
            a: 2.0,
            n_min: None,
            n_max: None,
            nested: false,
            order: InsertionOrder::Input,
        }
    }
}

/// Nets and balls of one scale `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleLevel {
    pub n: i32,
    pub epsilon: f64,
    pub radius: f64,
    pub net: Net,
}

impl ScaleLevel {
    pub fn balls(&self) -> impl Iterator<Item = Ball> + '_ {
        self.net.members.iter().map(move |c| Ball {
            center: c,
            radius: self.radius,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiresolutionFamily {
    pub a: f64,
    pub n_min: i32,
    pub n_max: i32,
    pub nested: bool,
    pub order: InsertionOrder,
    /// Length unit: scale `n` uses `epsilon = unit * 2^-n`. 1 unless dilated.
    pub unit: f64,
    pub scales: Vec<ScaleLevel>,
    pub warnings: Vec<String>,
}

/// A family ball tagged with its scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyBall {
    pub n: i32,
    pub ball: Ball,
}

impl MultiresolutionFamily {
    pub fn balls(&self) -> impl Iterator<Item = FamilyBall> + '_ {
        self.scales
            .iter()
            .flat_map(|s| s.balls().map(move |ball| FamilyBall { n: s.n, ball }))
    }

    pub fn ball_count(&self) -> usize {
        self.scales.iter().map(|s| s.net.members.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.ball_count() == 0
    }

    /// The family of the dilated space `lambda * M`: same net members, all
    /// lengths multiplied by `lambda`.
    pub fn dilated(&self, lambda: f64) -> MultiresolutionFamily {
        let mut f = self.clone();
        f.unit *= lambda;
        for s in &mut f.scales {
            s.epsilon *= lambda;
            s.radius *= lambda;
            s.net.epsilon *= lambda;
        }
        f
    }
}

/// Largest `n` with `2^-n >= diam` and smallest `n` with `2^-n` below the
/// minimum positive spacing of `k`.
pub fn default_scale_range(space: &MetricSpace, k: &PointSubset) -> (i32, i32) {
    let ids = k.as_slice();
    let mut diam = 0.0_f64;
    let mut spacing = f64::INFINITY;
    for (a, &i) in ids.iter().enumerate() {
        for &j in &ids[a + 1..] {
            let d = space.d(i, j);
            diam = diam.max(d);
            if d > 0.0 {
                spacing = spacing.min(d);
            }
        }
    }
    let n_min = if diam > 0.0 { (-diam.log2()).floor() as i32 } else { 0 };
    let n_max = if spacing.is_finite() {
        (-spacing.log2()).floor() as i32 + 1
    } else {
        n_min
    };
    (n_min, n_max.max(n_min))
}

pub fn build_family(
    space: &MetricSpace,
    k: &PointSubset,
    params: &FamilyParams,
) -> Result<MultiresolutionFamily> {
    if !(params.a > 1.0) {
        return Err(Error::domain(format!("family constant A must exceed 1, got {}", params.a)));
    }
    if k.is_empty() {
        return Err(Error::domain("multiresolution family of an empty set"));
    }
    space.check_subset(k)?;
    let (dmin, dmax) = default_scale_range(space, k);
    let n_min = params.n_min.unwrap_or(dmin);
    let n_max = params.n_max.unwrap_or(dmax.max(n_min));
    if n_min > n_max {
        return Err(Error::domain(format!("n_min {n_min} exceeds n_max {n_max}")));
    }
    let mut warnings = Vec::new();
    let diam = space.diam_of(k.as_slice());
    if params.nested && 2f64.powi(-n_min) < diam {
        warnings.push(format!(
            "nested family starts at n_min = {n_min} but 2^-n_min = {} < diam(K) = {diam}",
            2f64.powi(-n_min)
        ));
    }

    let candidates = ordered_candidates(space, k, params.order);
    let scale_ids: Vec<i32> = (n_min..=n_max).collect();
    let nets: Vec<Vec<usize>> = if params.nested {
        let mut out: Vec<Vec<usize>> = Vec::with_capacity(scale_ids.len());
        for &n in &scale_ids {
            let seed = out.last().cloned().unwrap_or_default();
            out.push(greedy_insert(space, &candidates, 2f64.powi(-n), seed));
        }
        out
    } else {
        scale_ids
            .par_iter()
            .map(|&n| greedy_insert(space, &candidates, 2f64.powi(-n), Vec::new()))
            .collect()
    };

    let scales = scale_ids
        .iter()
        .zip(nets)
        .map(|(&n, members)| {
            let epsilon = 2f64.powi(-n);
            Ok(ScaleLevel {
                n,
                epsilon,
                radius: params.a * epsilon,
                net: Net {
                    epsilon,
                    members: PointSubset::new(members)?,
                    domain: k.clone(),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(MultiresolutionFamily {
        a: params.a,
        n_min,
        n_max,
        nested: params.nested,
        order: params.order,
        unit: 1.0,
        scales,
        warnings,
    })
}
