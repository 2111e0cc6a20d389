//! Both sides of the curvature inequalities, evaluated on sampled curves.
//!
//! Every functional returns a [`FunctionalReport`] carrying the value, the
//! reference quantity it is compared against (curve length or radius), and
//! the estimator settings used. Nothing here asserts a bound: constants are
//! measured and reported.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beta::{beta2_ball, BallRow};
use crate::curvature::{comparable_from_sides, delta_from_sides, menger_from_sides};
use crate::curves::{Curve, CurveArc, CurvePoint, CurveSamples};
use crate::error::{Error, Result};
use crate::metric::{Ball, DistanceMatrix, PointSubset, WeightedSet};
use crate::nets::{build_family, FamilyParams, MultiresolutionFamily};
use crate::triples::{estimate_symmetric, EstimatorSettings, Mode, TripleEstimate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    Global,
    Multires,
    LocalizedGlobal,
    LocalizedMultires,
    Hahlomaa,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorMeta {
    /// Requested samples along the curve (0 when the input was a weighted set).
    pub samples: usize,
    /// Distinct sample locations actually used.
    pub points: usize,
    pub mode: Mode,
    pub std_error: f64,
    pub seed: u64,
    pub triple_cap: u64,
    pub mc_samples: u64,
    /// Triples evaluated (deterministic) or drawn (Monte Carlo), all balls.
    pub evaluated: u64,
}

impl EstimatorMeta {
    fn new(settings: &EstimatorSettings, samples: usize, points: usize) -> Self {
        EstimatorMeta {
            samples,
            points,
            mode: Mode::Det,
            std_error: 0.0,
            seed: settings.seed,
            triple_cap: settings.triple_cap,
            mc_samples: settings.mc_samples,
            evaluated: 0,
        }
    }

    fn absorb(&mut self, est: &TripleEstimate) {
        if est.mode == Mode::Mc {
            self.mode = Mode::Mc;
        }
        self.std_error = self.std_error.hypot(est.std_error);
        self.evaluated += est.evaluated;
    }
}

/// Connector bookkeeping when a ball meets several components of the curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gluing {
    /// Components of `Γ ∩ Ball(z, 10R)` meeting `Ball(z, R)`.
    pub components: usize,
    pub arcs: Vec<CurveArc>,
    /// Total length of the connectors joining consecutive components.
    pub connector_length: f64,
    /// `20 * P * R`.
    pub bound: f64,
    /// Length of the glued path.
    pub glued_length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub functional: Functional,
    pub value: f64,
    pub reference: f64,
    /// `value / reference`.
    pub ratio: f64,
    pub estimator: EstimatorMeta,
    pub balls: Vec<BallRow>,
    pub gluing: Option<Gluing>,
}

impl FunctionalReport {
    fn new(functional: Functional, value: f64, reference: f64, estimator: EstimatorMeta) -> Self {
        FunctionalReport {
            functional,
            value,
            reference,
            ratio: if reference > 0.0 { value / reference } else { f64::NAN },
            estimator,
            balls: Vec::new(),
            gluing: None,
        }
    }
}

fn inv_diam_cubed_delta(a: f64, b: f64, c: f64) -> f64 {
    let diam = a.max(b).max(c);
    if diam > 0.0 {
        delta_from_sides(a, b, c) / (diam * diam * diam)
    } else {
        0.0
    }
}

fn full_matrix(set: &WeightedSet) -> DistanceMatrix {
    set.space.full_distance_matrix()
}

/// `∭_{S^3} ∂ diam^-3` over the sample points `ids`.
fn global_sum(set: &WeightedSet, dm: &DistanceMatrix, ids: &[usize], settings: &EstimatorSettings) -> TripleEstimate {
    estimate_symmetric(dm, ids, &set.weights, settings, 0, inv_diam_cubed_delta)
}

fn check_samples(m: usize) -> Result<()> {
    if m < 3 {
        return Err(Error::domain(format!("need at least 3 samples, got {m}")));
    }
    Ok(())
}

/// `∭_{Γ^3} ∂(x, y, z) diam{x, y, z}^-3` by `m` uniform arc-length samples of
/// mass `ℓ/m`; reference is the curve length.
pub fn global_curvature_functional(curve: &Curve, m: usize, settings: &EstimatorSettings) -> Result<FunctionalReport> {
    check_samples(m)?;
    let samples = curve.sample_uniform(m)?;
    let dm = full_matrix(&samples.set);
    let ids: Vec<usize> = (0..samples.len()).collect();
    let est = global_sum(&samples.set, &dm, &ids, settings);
    let mut meta = EstimatorMeta::new(settings, m, samples.len());
    meta.absorb(&est);
    Ok(FunctionalReport::new(Functional::Global, est.value, curve.length(), meta))
}

fn ball_rows(
    set: &WeightedSet,
    balls: &[(i32, Ball)],
    settings: &EstimatorSettings,
) -> Result<Vec<BallRow>> {
    balls
        .par_iter()
        .enumerate()
        .map(|(k, &(n, ball))| {
            let r = beta2_ball(set, &ball, settings, k as u64)?;
            Ok(BallRow {
                scale: n,
                center: ball.center,
                radius: ball.radius,
                members: r.members,
                set_diam: r.set_diam,
                beta: r.value,
                contribution: r.integral / ball.radius.powi(3),
                evaluated: r.evaluated,
                mode: r.mode,
                std_error: r.std_error,
            })
        })
        .collect()
}

fn multires_report(
    functional: Functional,
    set: &WeightedSet,
    balls: &[(i32, Ball)],
    reference: f64,
    settings: &EstimatorSettings,
    m: usize,
) -> Result<FunctionalReport> {
    let rows = ball_rows(set, balls, settings)?;
    let mut meta = EstimatorMeta::new(settings, m, set.len());
    for r in &rows {
        meta.absorb(&TripleEstimate {
            value: 0.0,
            std_error: r.std_error / r.radius.powi(3),
            evaluated: r.evaluated,
            mode: r.mode,
        });
    }
    let total = rows.iter().map(|r| r.contribution).sum();
    let mut report = FunctionalReport::new(functional, total, reference, meta);
    report.balls = rows;
    Ok(report)
}

/// `sum_{B} ∭_{(B ∩ Γ)^3} ∂ radius(B)^-3` over the balls of `family`, which
/// must be built over `samples.set.space`.
pub fn multires_curvature_sum(
    samples: &CurveSamples,
    family: &MultiresolutionFamily,
    settings: &EstimatorSettings,
) -> Result<FunctionalReport> {
    let mut r = multires_on_set(&samples.set, family, samples.length, settings)?;
    r.estimator.samples = samples.requested;
    Ok(r)
}

/// [`multires_curvature_sum`] for an arbitrary weighted set, with a caller
/// supplied reference quantity.
pub fn multires_on_set(
    set: &WeightedSet,
    family: &MultiresolutionFamily,
    reference: f64,
    settings: &EstimatorSettings,
) -> Result<FunctionalReport> {
    let balls: Vec<(i32, Ball)> = family.balls().map(|b| (b.n, b.ball)).collect();
    multires_report(Functional::Multires, set, &balls, reference, settings, 0)
}

/// Samples the curve and builds the family over all samples before calling
/// [`multires_curvature_sum`].
pub fn multires_for_curve(
    curve: &Curve,
    m: usize,
    params: &FamilyParams,
    settings: &EstimatorSettings,
) -> Result<(FunctionalReport, MultiresolutionFamily)> {
    check_samples(m)?;
    let samples = curve.sample_uniform(m)?;
    let family = build_family(samples.space(), &PointSubset::all(samples.len()), params)?;
    Ok((multires_curvature_sum(&samples, &family, settings)?, family))
}

/// Which integrand a localized evaluation uses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Localized {
    Global,
    Multires(FamilyParams),
}

fn components_meeting(curve: &Curve, z: &CurvePoint, r: f64) -> Vec<CurveArc> {
    let inner = curve.components_in_ball(z, r);
    curve
        .components_in_ball(z, 10.0 * r)
        .into_iter()
        .filter(|big| inner.iter().any(|small| curve.arc_contains(big, small)))
        .collect()
}

/// Joins the arcs in parameter order, end of one to start of the next.
fn glue(curve: &Curve, arcs: &[CurveArc]) -> Result<(Curve, f64)> {
    let mut points: Vec<CurvePoint> = Vec::new();
    let mut connectors = 0.0;
    for arc in arcs {
        let pts = curve.arc_points(arc)?;
        if let Some(last) = points.last() {
            connectors += curve.dist_between(last, &pts[0]);
        }
        points.extend(pts);
    }
    Ok((curve.through_points(&points, false)?, connectors))
}

/// The functional restricted to `Ball(z, R)`, `z = γ(s)`: triples inside the
/// ball (global) or family balls contained in it (multires), reference `R`.
///
/// When several components of `Γ ∩ Ball(z, 10R)` meet `Ball(z, R)` they are
/// chained by connectors into one path, resampled at the spacing of the `m`
/// samples of the whole curve, and the functional is evaluated on that path.
pub fn localized_functional(
    curve: &Curve,
    s: f64,
    radius: f64,
    which: Localized,
    m: usize,
    settings: &EstimatorSettings,
) -> Result<FunctionalReport> {
    if !(radius > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {radius}")));
    }
    check_samples(m)?;
    let z = curve.point_at(s)?;
    let arcs = components_meeting(curve, &z, radius);
    let spacing = curve.length() / m as f64;
    let (samples, gluing, source) = if arcs.len() > 1 {
        let (glued, connector_length) = glue(curve, &arcs)?;
        let count = ((glued.length() / spacing).ceil() as usize).max(3);
        let p = arcs.len();
        let gluing = Gluing {
            components: p,
            arcs,
            connector_length,
            bound: 20.0 * p as f64 * radius,
            glued_length: glued.length(),
        };
        (glued.sample_uniform(count)?, Some(gluing), Some(glued))
    } else {
        (curve.sample_uniform(m)?, None, None)
    };
    let source_curve = source.as_ref().unwrap_or(curve);
    let dz = samples.distances_from(source_curve, &z);
    let inside: Vec<usize> = (0..samples.len()).filter(|&i| dz[i] <= radius).collect();

    let mut report = match which {
        Localized::Global => {
            let dm = full_matrix(&samples.set);
            let est = global_sum(&samples.set, &dm, &inside, settings);
            let mut meta = EstimatorMeta::new(settings, samples.requested, inside.len());
            meta.absorb(&est);
            FunctionalReport::new(Functional::LocalizedGlobal, est.value, radius, meta)
        }
        Localized::Multires(params) => {
            let balls: Vec<(i32, Ball)> = if inside.is_empty() {
                Vec::new()
            } else {
                let family = build_family(samples.space(), &PointSubset::new(inside)?, &params)?;
                family
                    .balls()
                    .filter(|b| dz[b.ball.center] + b.ball.radius <= radius)
                    .map(|b| (b.n, b.ball))
                    .collect()
            };
            multires_report(
                Functional::LocalizedMultires,
                &samples.set,
                &balls,
                radius,
                settings,
                samples.requested,
            )?
        }
    };
    report.gluing = gluing;
    Ok(report)
}

/// `∭ c^2 dμ^3` over ordered triples of distinct points of `Ball(z, R)` that
/// are `A`-comparable (`A * min side >= max side`); reference `R`.
pub fn hahlomaa_condition_sum(
    set: &WeightedSet,
    a: f64,
    z: usize,
    radius: f64,
    settings: &EstimatorSettings,
) -> Result<FunctionalReport> {
    if !(a >= 1.0) {
        return Err(Error::domain(format!("comparability constant must be at least 1, got {a}")));
    }
    if !(radius > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {radius}")));
    }
    let ball = Ball::new(z, radius)?;
    let members = set.space.ball_members(&ball, &PointSubset::all(set.len()))?;
    let ids = members.as_slice();
    let dm = set.space.distance_matrix(ids);
    let w: Vec<f64> = ids.iter().map(|&i| set.weights[i]).collect();
    let local: Vec<usize> = (0..ids.len()).collect();
    let est = estimate_symmetric(&dm, &local, &w, settings, 0, |x, y, u| {
        if comparable_from_sides(x, y, u, a) {
            let c = menger_from_sides(x, y, u);
            c * c
        } else {
            0.0
        }
    });
    let mut meta = EstimatorMeta::new(settings, 0, ids.len());
    meta.absorb(&est);
    Ok(FunctionalReport::new(Functional::Hahlomaa, est.value, radius, meta))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleCount {
    pub n: i32,
    pub radius: f64,
    pub balls: usize,
    /// Balls `B` whose dilate `4B` holds at least `ℓ/6` of the curve.
    pub large: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LargeBallReport {
    pub length: f64,
    pub scales: Vec<ScaleCount>,
    /// Largest per-scale count.
    pub constant: usize,
}

/// Per scale, the number of family balls with `ℓ(Γ ∩ 4B) >= ℓ/6`. Ball
/// centres index `samples`, over which the family was built.
pub fn large_ball_diagnostic(
    curve: &Curve,
    samples: &CurveSamples,
    family: &MultiresolutionFamily,
) -> LargeBallReport {
    let len = curve.length();
    let scales: Vec<ScaleCount> = family
        .scales
        .iter()
        .map(|level| {
            let large = level
                .net
                .members
                .iter()
                .filter(|&c| {
                    let caught: f64 = curve
                        .components_in_ball(&samples.points[c], 4.0 * level.radius)
                        .iter()
                        .map(CurveArc::length)
                        .sum();
                    caught >= len / 6.0
                })
                .count();
            ScaleCount {
                n: level.n,
                radius: level.radius,
                balls: level.net.members.len(),
                large,
            }
        })
        .collect();
    LargeBallReport {
        length: len,
        constant: scales.iter().map(|s| s.large).max().unwrap_or(0),
        scales,
    }
}
