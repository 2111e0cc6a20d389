//! Pointwise triple functionals: the excess `∂1`, its symmetrization `∂`,
//! Menger curvature, and the A-comparability predicate.
//!
//! The `*_from_sides` helpers take the three pairwise distances directly and
//! are what the O(m^3) kernels call; the id-based functions validate ids and
//! delegate to them.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metric::MetricSpace;

/// Excess values below this multiple of the triangle's perimeter are rounding
/// noise and are reported as exactly zero.
const EXCESS_NOISE: f64 = 8.0 * f64::EPSILON;
/// Triangles with area below `COLLINEAR_AREA * longest_side^2` count as collinear.
const COLLINEAR_AREA: f64 = 1e-14;

/// Pairwise distances of an ordered triple `(x1, x2, x3)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleDistances {
    pub d12: f64,
    pub d23: f64,
    pub d13: f64,
}

impl TripleDistances {
    pub fn new(d12: f64, d23: f64, d13: f64) -> Self {
        TripleDistances { d12, d23, d13 }
    }

    pub fn of(space: &MetricSpace, x1: usize, x2: usize, x3: usize) -> Result<Self> {
        Ok(TripleDistances {
            d12: space.dist(x1, x2)?,
            d23: space.dist(x2, x3)?,
            d13: space.dist(x1, x3)?,
        })
    }

    pub fn diam(&self) -> f64 {
        self.d12.max(self.d23).max(self.d13)
    }

    pub fn delta1(&self) -> f64 {
        delta1_from_sides(self.d12, self.d23, self.d13)
    }

    pub fn delta(&self) -> f64 {
        delta_from_sides(self.d12, self.d23, self.d13)
    }

    pub fn menger(&self) -> f64 {
        menger_from_sides(self.d12, self.d23, self.d13)
    }

    pub fn is_comparable(&self, a: f64) -> bool {
        comparable_from_sides(self.d12, self.d23, self.d13, a)
    }
}

#[inline]
fn snap(excess: f64, perimeter: f64) -> f64 {
    if excess <= EXCESS_NOISE * perimeter {
        0.0
    } else {
        excess
    }
}

/// `dist(x1,x2) + dist(x2,x3) - dist(x1,x3)` with `x2` in the middle.
#[inline]
pub fn delta1_from_sides(d12: f64, d23: f64, d13: f64) -> f64 {
    snap(d12 + d23 - d13, d12 + d23 + d13)
}

/// Minimum of `∂1` over the three choices of middle point: the perimeter minus
/// twice the longest side.
#[inline]
pub fn delta_from_sides(a: f64, b: f64, c: f64) -> f64 {
    let s = a + b + c;
    snap(s - 2.0 * a.max(b).max(c), s)
}

/// Reciprocal circumradius of a planar triangle with the given side lengths.
/// Zero for collinear or degenerate triples.
#[inline]
pub fn menger_from_sides(x: f64, y: f64, z: f64) -> f64 {
    // sort so that a >= b >= c
    let (mut a, mut b, mut c) = (x, y, z);
    if a < b {
        std::mem::swap(&mut a, &mut b);
    }
    if b < c {
        std::mem::swap(&mut b, &mut c);
    }
    if a < b {
        std::mem::swap(&mut a, &mut b);
    }
    if c <= 0.0 || snap(b + c - a, a + b + c) == 0.0 {
        return 0.0;
    }
    // Kahan's form of Heron's formula; the parenthesization matters.
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    if p <= 0.0 {
        return 0.0;
    }
    let area = 0.25 * p.sqrt();
    if area < COLLINEAR_AREA * a * a {
        return 0.0;
    }
    4.0 * area / (a * b * c)
}

/// `A * min pairwise distance >= diameter`; coincident points never qualify.
#[inline]
pub fn comparable_from_sides(x: f64, y: f64, z: f64, a: f64) -> bool {
    let lo = x.min(y).min(z);
    lo > 0.0 && a * lo >= x.max(y).max(z)
}

pub fn delta1(space: &MetricSpace, x1: usize, x2: usize, x3: usize) -> Result<f64> {
    Ok(TripleDistances::of(space, x1, x2, x3)?.delta1())
}

pub fn delta(space: &MetricSpace, x1: usize, x2: usize, x3: usize) -> Result<f64> {
    Ok(TripleDistances::of(space, x1, x2, x3)?.delta())
}

pub fn menger(space: &MetricSpace, x1: usize, x2: usize, x3: usize) -> Result<f64> {
    Ok(TripleDistances::of(space, x1, x2, x3)?.menger())
}

pub fn is_comparable(space: &MetricSpace, x1: usize, x2: usize, x3: usize, a: f64) -> Result<bool> {
    Ok(TripleDistances::of(space, x1, x2, x3)?.is_comparable(a))
}
