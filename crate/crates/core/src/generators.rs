//! Test inputs with known lengths: smooth and fractal curves, a Cantor dust,
//! a metric tree and a snowflaked segment.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curves::Curve;
use crate::error::{Error, Result};
use crate::metric::{EuclideanCloud, ExplicitMetric, MetricSpace};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GeneratorKind {
    Segment,
    Circle,
    /// Two half circles of radius `scale` joined by sides of length `2 * scale`.
    Stadium,
    KochPrefix { level: u32 },
    LipschitzGraph { seed: u64, amplitude: f64 },
    FourCornerCantor { level: u32 },
    StarTree { arms: usize, arm_length: f64 },
    SnowflakeSegment { alpha: f64 },
}

/// `m` is the vertex count (per arm for star trees; unused by Koch and Cantor).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub m: usize,
    pub scale: f64,
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub space: MetricSpace,
    pub curve: Option<Curve>,
    /// Point masses, for inputs that are not curves.
    pub weights: Option<Vec<f64>>,
    /// Length of the limiting object when it is finite and known.
    pub analytic_length: Option<f64>,
}

impl Generated {
    /// Closed-form length minus polyline length.
    pub fn length_deficit(&self) -> Option<f64> {
        Some(self.analytic_length? - self.curve.as_ref()?.length())
    }
}

fn parse_num<T: FromStr>(field: &str, what: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::usage(format!("cannot parse {what} from {field:?}")))
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    /// Forms (optional fields in brackets):
    /// `segment[:L[:m]]`, `circle[:r[:m]]`, `stadium[:r[:m]]`,
    /// `koch[:level[:scale]]`, `lipschitz[:seed[:amplitude[:m[:scale]]]]`,
    /// `cantor[:level[:scale]]`, `star[:arms[:arm_length[:m]]]`,
    /// `snowflake[:alpha[:m[:scale]]]`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let arg = |k: usize| parts.get(k).copied().filter(|p| !p.is_empty());
        let f64_at = |k: usize, default: f64, what: &str| arg(k).map_or(Ok(default), |p| parse_num::<f64>(p, what));
        let usize_at = |k: usize, default: usize, what: &str| arg(k).map_or(Ok(default), |p| parse_num::<usize>(p, what));
        let max_fields = match parts[0] {
            "segment" | "circle" | "stadium" | "koch" | "cantor" => 2,
            "star" | "snowflake" => 3,
            "lipschitz" => 4,
            other => return Err(Error::usage(format!("unknown generator {other:?}"))),
        };
        if parts.len() > max_fields + 1 {
            return Err(Error::usage(format!("too many fields in generator spec {s:?}")));
        }
        let spec = match parts[0] {
            "segment" => GeneratorSpec {
                kind: GeneratorKind::Segment,
                scale: f64_at(1, 1.0, "length")?,
                m: usize_at(2, 2, "m")?,
            },
            "circle" => GeneratorSpec {
                kind: GeneratorKind::Circle,
                scale: f64_at(1, 1.0, "radius")?,
                m: usize_at(2, 360, "m")?,
            },
            "stadium" => GeneratorSpec {
                kind: GeneratorKind::Stadium,
                scale: f64_at(1, 1.0, "radius")?,
                m: usize_at(2, 360, "m")?,
            },
            "koch" => GeneratorSpec {
                kind: GeneratorKind::KochPrefix {
                    level: usize_at(1, 3, "level")? as u32,
                },
                scale: f64_at(2, 1.0, "scale")?,
                m: 2,
            },
            "lipschitz" => GeneratorSpec {
                kind: GeneratorKind::LipschitzGraph {
                    seed: arg(1).map_or(Ok(0), |p| parse_num(p, "seed"))?,
                    amplitude: f64_at(2, 1.0, "amplitude")?,
                },
                m: usize_at(3, 200, "m")?,
                scale: f64_at(4, 1.0, "scale")?,
            },
            "cantor" => GeneratorSpec {
                kind: GeneratorKind::FourCornerCantor {
                    level: usize_at(1, 3, "level")? as u32,
                },
                scale: f64_at(2, 1.0, "scale")?,
                m: 2,
            },
            "star" => GeneratorSpec {
                kind: GeneratorKind::StarTree {
                    arms: usize_at(1, 3, "arms")?,
                    arm_length: f64_at(2, 1.0, "arm length")?,
                },
                m: usize_at(3, 20, "m")?,
                scale: 1.0,
            },
            _ => GeneratorSpec {
                kind: GeneratorKind::SnowflakeSegment {
                    alpha: f64_at(1, 0.5, "alpha")?,
                },
                m: usize_at(2, 100, "m")?,
                scale: f64_at(3, 1.0, "scale")?,
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GeneratorKind::Segment => write!(f, "segment:{}:{}", self.scale, self.m),
            GeneratorKind::Circle => write!(f, "circle:{}:{}", self.scale, self.m),
            GeneratorKind::Stadium => write!(f, "stadium:{}:{}", self.scale, self.m),
            GeneratorKind::KochPrefix { level } => write!(f, "koch:{level}:{}", self.scale),
            GeneratorKind::LipschitzGraph { seed, amplitude } => {
                write!(f, "lipschitz:{seed}:{amplitude}:{}:{}", self.m, self.scale)
            }
            GeneratorKind::FourCornerCantor { level } => write!(f, "cantor:{level}:{}", self.scale),
            GeneratorKind::StarTree { arms, arm_length } => write!(f, "star:{arms}:{arm_length}:{}", self.m),
            GeneratorKind::SnowflakeSegment { alpha } => write!(f, "snowflake:{alpha}:{}:{}", self.m, self.scale),
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::domain(format!("scale must be positive, got {}", self.scale)));
        }
        if self.m < 2 {
            return Err(Error::domain(format!("resolution must be at least 2, got {}", self.m)));
        }
        match self.kind {
            GeneratorKind::Circle | GeneratorKind::Stadium if self.m < 3 => {
                Err(Error::domain("closed curves need at least 3 vertices"))
            }
            GeneratorKind::KochPrefix { level } if level > 10 => {
                Err(Error::domain(format!("Koch level {level} too large (max 10)")))
            }
            GeneratorKind::FourCornerCantor { level } if level > 6 => {
                Err(Error::domain(format!("Cantor level {level} too large (max 6)")))
            }
            GeneratorKind::LipschitzGraph { amplitude, .. } if !(amplitude >= 0.0 && amplitude.is_finite()) => {
                Err(Error::domain(format!("amplitude must be non-negative, got {amplitude}")))
            }
            GeneratorKind::StarTree { arms, arm_length } if arms == 0 || !(arm_length > 0.0) => {
                Err(Error::domain("star tree needs at least one arm of positive length"))
            }
            GeneratorKind::SnowflakeSegment { alpha } if !(alpha > 0.0 && alpha <= 1.0) => {
                Err(Error::domain(format!("snowflake exponent must lie in (0, 1], got {alpha}")))
            }
            _ => Ok(()),
        }
    }
}

fn curve_output(points: Vec<Vec<f64>>, closed: bool, analytic: Option<f64>) -> Result<Generated> {
    let curve = Curve::from_points(&points, closed)?;
    Ok(Generated {
        space: curve.space().clone(),
        curve: Some(curve),
        weights: None,
        analytic_length: analytic,
    })
}

fn koch_points(level: u32, scale: f64) -> Vec<Vec<f64>> {
    let mut pts = vec![[0.0, 0.0], [scale, 0.0]];
    let (s, c) = (PI / 3.0).sin_cos();
    for _ in 0..level {
        let mut next = Vec::with_capacity(4 * pts.len());
        for w in pts.windows(2) {
            let (p, q) = (w[0], w[1]);
            let d = [(q[0] - p[0]) / 3.0, (q[1] - p[1]) / 3.0];
            let a = [p[0] + d[0], p[1] + d[1]];
            let b = [a[0] + c * d[0] - s * d[1], a[1] + s * d[0] + c * d[1]];
            let e = [p[0] + 2.0 * d[0], p[1] + 2.0 * d[1]];
            next.extend([p, a, b, e]);
        }
        next.push(*pts.last().unwrap());
        pts = next;
    }
    pts.into_iter().map(|p| p.to_vec()).collect()
}

fn cantor_points(level: u32, scale: f64) -> Vec<Vec<f64>> {
    let mut pts = vec![[0.5, 0.5]];
    let mut side = 1.0;
    for _ in 0..level {
        let off = 0.375 * side;
        pts = pts
            .iter()
            .flat_map(|p| {
                [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)]
                    .map(|(dx, dy)| [p[0] + dx * off, p[1] + dy * off])
            })
            .collect();
        side /= 4.0;
    }
    pts.into_iter().map(|p| vec![scale * p[0], scale * p[1]]).collect()
}

/// Centre is point 0; arm `a` holds points `1 + a * m ..= (a + 1) * m`, the
/// `j`-th at distance `j * arm_length / m` from the centre.
fn star_metric(arms: usize, arm_length: f64, m: usize) -> Result<ExplicitMetric> {
    let n = 1 + arms * m;
    let h = arm_length / m as f64;
    let place = |i: usize| if i == 0 { (usize::MAX, 0) } else { ((i - 1) / m, (i - 1) % m + 1) };
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let ((ai, ri), (aj, rj)) = (place(i), place(j));
            dist[i * n + j] = if i == j {
                0.0
            } else if ai == aj {
                ri.abs_diff(rj) as f64 * h
            } else {
                (ri + rj) as f64 * h
            };
        }
    }
    if n <= 300 {
        ExplicitMetric::new(n, dist)
    } else {
        ExplicitMetric::from_matrix_unchecked(n, dist)
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<Generated> {
    spec.validate()?;
    let (m, r) = (spec.m, spec.scale);
    match spec.kind {
        GeneratorKind::Segment => {
            let pts = (0..m).map(|i| vec![r * i as f64 / (m - 1) as f64, 0.0]).collect();
            curve_output(pts, false, Some(r))
        }
        GeneratorKind::Circle => {
            let pts = (0..m)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / m as f64;
                    vec![r * t.cos(), r * t.sin()]
                })
                .collect();
            curve_output(pts, true, Some(2.0 * PI * r))
        }
        GeneratorKind::Stadium => {
            let per_arc = (m / 2).max(2);
            let mut pts = Vec::with_capacity(2 * per_arc + 2);
            for (cx, t0) in [(r, -PI / 2.0), (-r, PI / 2.0)] {
                for k in 0..=per_arc {
                    let t = t0 + PI * k as f64 / per_arc as f64;
                    pts.push(vec![cx + r * t.cos(), r * t.sin()]);
                }
            }
            curve_output(pts, true, Some(2.0 * PI * r + 4.0 * r))
        }
        GeneratorKind::KochPrefix { level } => {
            curve_output(koch_points(level, r), false, Some(r * (4.0f64 / 3.0).powi(level as i32)))
        }
        GeneratorKind::LipschitzGraph { seed, amplitude } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = r / (m - 1) as f64;
            let mut y = 0.0;
            let mut pts = Vec::with_capacity(m);
            for i in 0..m {
                pts.push(vec![i as f64 * h, y]);
                y += amplitude * h * rng.gen_range(-1.0..=1.0);
            }
            curve_output(pts, false, None)
        }
        GeneratorKind::FourCornerCantor { level } => {
            let pts = cantor_points(level, r);
            let n = pts.len();
            Ok(Generated {
                space: EuclideanCloud::new(pts)?.into(),
                curve: None,
                weights: Some(vec![1.0 / n as f64; n]),
                analytic_length: None,
            })
        }
        GeneratorKind::StarTree { arms, arm_length } => {
            let space: MetricSpace = star_metric(arms, arm_length, m)?.into();
            let mut walk = Vec::with_capacity(2 * arms * m);
            for a in 0..arms {
                walk.push(0);
                walk.extend((1..=m).map(|j| 1 + a * m + j - 1));
                walk.extend((1..m).rev().map(|j| 1 + a * m + j - 1));
            }
            let curve = Curve::new(space.clone(), walk, true)?;
            Ok(Generated {
                space,
                curve: Some(curve),
                weights: None,
                analytic_length: Some(arms as f64 * arm_length),
            })
        }
        GeneratorKind::SnowflakeSegment { alpha } => {
            // dilation by r of the snowflaked space scales the base by r^(1/alpha)
            let base_len = r.powf(1.0 / alpha);
            let base = EuclideanCloud::new((0..m).map(|i| vec![base_len * i as f64 / (m - 1) as f64]).collect())?;
            let space = MetricSpace::power(base.into(), alpha)?;
            let curve = Curve::new(space.clone(), (0..m).collect(), false)?;
            Ok(Generated {
                space,
                curve: Some(curve),
                weights: None,
                analytic_length: if alpha == 1.0 { Some(r) } else { None },
            })
        }
    }
}
