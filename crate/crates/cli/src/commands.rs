use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use curvelab_core::beta::beta_inf_multires_sum;
use curvelab_core::curvature::TripleDistances;
use curvelab_core::curves::{Curve, CurveSamples};
use curvelab_core::generators::{generate, GeneratorSpec};
use curvelab_core::io::{self, Svg, TourFile};
use curvelab_core::metric::{EuclideanCloud, MetricSpace, PointSubset, WeightedSet};
use curvelab_core::nets::{build_family, MultiresolutionFamily};
use curvelab_core::spanning::parameterize_connected_set;
use curvelab_core::verify::{
    global_curvature_functional, hahlomaa_condition_sum, large_ball_diagnostic, localized_functional,
    multires_curvature_sum, multires_on_set, FunctionalReport, Localized,
};
use curvelab_core::{Error, Result};

use crate::config::{FunctionalArg, RunConfig};

struct Input {
    space: MetricSpace,
    curve: Option<Curve>,
    weights: Option<Vec<f64>>,
    analytic_length: Option<f64>,
}

fn load_input(cfg: &RunConfig) -> Result<Input> {
    if let Some(spec) = &cfg.generator {
        let g = generate(&spec.parse::<GeneratorSpec>()?)?;
        return Ok(Input {
            space: g.space,
            curve: g.curve,
            weights: g.weights,
            analytic_length: g.analytic_length,
        });
    }
    if let Some(path) = &cfg.curve {
        let curve = io::load_curve(path)?;
        return Ok(Input {
            space: curve.space().clone(),
            curve: Some(curve),
            weights: None,
            analytic_length: None,
        });
    }
    let path = cfg.input.as_ref().ok_or_else(|| Error::Usage("no input".into()))?;
    Ok(Input {
        space: io::load_space(path)?,
        curve: None,
        weights: None,
        analytic_length: None,
    })
}

impl Input {
    fn curve(&self) -> Result<&Curve> {
        self.curve
            .as_ref()
            .ok_or_else(|| Error::Usage("this functional needs a curve (--curve or a curve generator)".into()))
    }

    /// Uniform samples of the curve, or the points themselves with their
    /// generator weights (uniform mass 1 otherwise).
    fn weighted(&self, m: usize) -> Result<(WeightedSet, Option<CurveSamples>)> {
        match &self.curve {
            Some(c) => {
                let s = c.sample_uniform(m)?;
                Ok((s.set.clone(), Some(s)))
            }
            None => {
                let n = self.space.len();
                let w = self.weights.clone().unwrap_or_else(|| vec![1.0 / n as f64; n]);
                Ok((WeightedSet::new(self.space.clone(), w)?, None))
            }
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

/// Writes the JSON report to `--out` or stdout.
fn emit(cfg: &RunConfig, command: &str, body: Value) -> Result<()> {
    let mut doc = json!({ "command": command, "config": cfg });
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    match &cfg.out {
        Some(p) => write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn write_svg(cfg: &RunConfig, svg: Svg) -> Result<()> {
    if let Some(p) = &cfg.svg {
        write_text(p, &svg.render()?)?;
    }
    Ok(())
}

fn write_rows(cfg: &RunConfig, report: &FunctionalReport) -> Result<()> {
    if let Some(p) = &cfg.csv {
        io::write_ball_rows(fs::File::create(p)?, &report.balls)?;
    }
    Ok(())
}

pub fn generate_cmd(cfg: &RunConfig) -> Result<()> {
    let spec: GeneratorSpec = cfg
        .generator
        .as_deref()
        .ok_or_else(|| Error::Usage("generate needs --gen".into()))?
        .parse()?;
    let g = generate(&spec)?;
    let summary_cfg = RunConfig { out: None, ..cfg.clone() };
    if let Some(path) = &cfg.out {
        let file = fs::File::create(path)?;
        match (&g.curve, g.space.as_euclidean()) {
            (Some(c), Some(_)) => io::write_curve(file, c)?,
            (None, Some(cloud)) => io::write_point_cloud(file, cloud)?,
            _ => io::write_explicit_metric(file, &g.space)?,
        }
    }
    write_svg(
        cfg,
        Svg {
            points: if g.curve.is_none() { g.space.as_euclidean() } else { None },
            curve: g.curve.as_ref().filter(|c| c.space().is_euclidean()),
            ..Default::default()
        },
    )?;
    emit(
        &summary_cfg,
        "generate",
        json!({
            "spec": spec.to_string(),
            "points": g.space.len(),
            "closed": g.curve.as_ref().map(|c| c.is_closed()),
            "length": g.curve.as_ref().map(|c| c.length()),
            "analytic_length": g.analytic_length,
            "length_deficit": g.length_deficit(),
            "data": cfg.out,
        }),
    )
}

fn family_over(space: &MetricSpace, cfg: &RunConfig) -> Result<MultiresolutionFamily> {
    build_family(space, &PointSubset::all(space.len()), &cfg.family())
}

fn family_json(f: &MultiresolutionFamily) -> Value {
    json!({
        "A": f.a,
        "n_min": f.n_min,
        "n_max": f.n_max,
        "nested": f.nested,
        "ball_count": f.ball_count(),
        "warnings": f.warnings,
        "scales": f.scales.iter().map(|s| json!({
            "n": s.n,
            "epsilon": s.epsilon,
            "radius": s.radius,
            "centers": s.net.members,
        })).collect::<Vec<_>>(),
    })
}

pub fn nets_cmd(cfg: &RunConfig) -> Result<()> {
    let input = load_input(cfg)?;
    let family = family_over(&input.space, cfg)?;
    write_svg(
        cfg,
        Svg {
            points: input.space.as_euclidean(),
            curve: input.curve.as_ref().filter(|c| c.space().is_euclidean()),
            family: Some(&family),
            ..Default::default()
        },
    )?;
    emit(cfg, "nets", json!({ "points": input.space.len(), "family": family_json(&family) }))
}

pub fn beta_cmd(cfg: &RunConfig) -> Result<()> {
    let input = load_input(cfg)?;
    let (set, samples) = input.weighted(cfg.samples())?;
    let family = family_over(&set.space, cfg)?;
    let settings = cfg.estimator();
    let beta2 = match &samples {
        Some(s) => multires_curvature_sum(s, &family, &settings)?,
        None => multires_on_set(&set, &family, f64::NAN, &settings)?,
    };
    let beta_inf = if set.space.is_euclidean() {
        Some(beta_inf_multires_sum(&set.space, &PointSubset::all(set.len()), &family)?)
    } else {
        None
    };
    if let Some(p) = &cfg.csv {
        let rows = beta_inf.as_ref().map_or(&beta2.balls, |b| &b.balls);
        io::write_ball_rows(fs::File::create(p)?, rows)?;
    }
    write_svg(
        cfg,
        Svg {
            points: set.space.as_euclidean(),
            curve: input.curve.as_ref().filter(|c| c.space().is_euclidean()),
            family: Some(&family),
            ..Default::default()
        },
    )?;
    emit(
        cfg,
        "beta",
        json!({
            "family": { "A": family.a, "n_min": family.n_min, "n_max": family.n_max, "ball_count": family.ball_count() },
            "beta_inf": to_value(&beta_inf)?,
            "beta2": to_value(&beta2)?,
        }),
    )
}

pub fn curvature_cmd(cfg: &RunConfig) -> Result<()> {
    let input = load_input(cfg)?;
    let text = cfg
        .triple
        .as_deref()
        .ok_or_else(|| Error::Usage("curvature needs --triple i,j,k".into()))?;
    let ids = text
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Usage(format!("bad point id {t:?}"))))
        .collect::<Result<Vec<_>>>()?;
    let [i, j, k] = ids[..] else {
        return Err(Error::Usage("--triple takes exactly three ids".into()));
    };
    let t = TripleDistances::of(&input.space, i, j, k)?;
    let a = cfg.a.unwrap_or(3.0);
    emit(
        cfg,
        "curvature",
        json!({
            "triple": [i, j, k],
            "distances": [t.d12, t.d23, t.d13],
            "diam": t.diam(),
            "delta1": t.delta1(),
            "delta": t.delta(),
            "menger": t.menger(),
            "comparable": t.is_comparable(a),
        }),
    )
}

pub fn verify_cmd(cfg: &RunConfig) -> Result<()> {
    let input = load_input(cfg)?;
    let m = cfg.samples();
    let settings = cfg.estimator();
    let functional = cfg.functional.unwrap_or(FunctionalArg::Global);
    let report = match functional {
        FunctionalArg::Global => global_curvature_functional(input.curve()?, m, &settings)?,
        FunctionalArg::Multires => {
            let s = input.curve()?.sample_uniform(m)?;
            let family = family_over(s.space(), cfg)?;
            multires_curvature_sum(&s, &family, &settings)?
        }
        FunctionalArg::Localized | FunctionalArg::LocalizedMultires => {
            let radius = cfg
                .radius
                .ok_or_else(|| Error::Usage("localized functionals need --R".into()))?;
            let which = if functional == FunctionalArg::Localized {
                Localized::Global
            } else {
                Localized::Multires(cfg.family())
            };
            localized_functional(input.curve()?, cfg.at.unwrap_or(0.0), radius, which, m, &settings)?
        }
        FunctionalArg::Hahlomaa => {
            let (set, _) = input.weighted(m)?;
            let center = cfg.center.unwrap_or(0);
            let radius = match cfg.radius {
                Some(r) => r,
                None => 2.0 * set.space.subset_diam(&PointSubset::all(set.len()))?.max(f64::MIN_POSITIVE),
            };
            hahlomaa_condition_sum(&set, cfg.a.unwrap_or(3.0), center, radius, &settings)?
        }
        FunctionalArg::LargeBalls => {
            let curve = input.curve()?;
            let s = curve.sample_uniform(m)?;
            let family = family_over(s.space(), cfg)?;
            let rep = large_ball_diagnostic(curve, &s, &family);
            return emit(cfg, "verify", json!({ "large_balls": to_value(&rep)? }));
        }
    };
    write_rows(cfg, &report)?;
    write_svg(
        cfg,
        Svg {
            curve: input.curve.as_ref().filter(|c| c.space().is_euclidean()),
            points: if input.curve.is_none() { input.space.as_euclidean() } else { None },
            ..Default::default()
        },
    )?;
    emit(
        cfg,
        "verify",
        json!({
            "value": report.value,
            "reference": report.reference,
            "ratio": report.ratio,
            "analytic_length": input.analytic_length,
            "report": to_value(&report)?,
        }),
    )
}

fn tour_body(input: &Input, n: i32) -> Result<(Value, TourFile, curvelab_core::spanning::NetGraph)> {
    let p = parameterize_connected_set(&input.space, &PointSubset::all(input.space.len()), n)?;
    let reference = input
        .analytic_length
        .or_else(|| input.curve.as_ref().map(|c| c.length()));
    let edge_length = p.graph.total_length();
    let file = TourFile::new(&p.graph, &p.tour);
    let body = json!({
        "scale": n,
        "epsilon": p.net.epsilon,
        "net_points": p.net.members.len(),
        "edges": p.graph.edges.len(),
        "conformant": p.graph.conformant,
        "edge_length": edge_length,
        "count_bound": p.count_bound(),
        "tour_length": p.tour.length,
        "reference_length": reference,
        "lipschitz_bound": reference.map(|l| 32.0 * l),
        "within_bound": reference.map(|l| p.tour.length <= 32.0 * l),
        "hausdorff_gap": { "graph_to_set": p.gap.graph_to_set, "set_to_graph": p.gap.set_to_graph, "total": p.gap.total(), "bound": 5.0 * p.net.epsilon },
        "tour": to_value(&file)?,
    });
    Ok((body, file, p.graph))
}

pub fn tour_cmd(cfg: &RunConfig) -> Result<()> {
    let input = load_input(cfg)?;
    let n = cfg.scale.ok_or_else(|| Error::Usage("tour needs --scale n".into()))?;
    let (body, _, graph) = tour_body(&input, n)?;
    write_svg(
        cfg,
        Svg {
            points: input.space.as_euclidean(),
            curve: input.curve.as_ref().filter(|c| c.space().is_euclidean()),
            graph: Some(&graph),
            ..Default::default()
        },
    )?;
    emit(cfg, "tour", body)
}

/// Runs every stage that applies to the input and writes one report.
pub fn report_cmd(cfg: &RunConfig) -> Result<()> {
    let input = load_input(cfg)?;
    let m = cfg.samples();
    let settings = cfg.estimator();
    let mut body = serde_json::Map::new();
    body.insert("points".into(), json!(input.space.len()));
    body.insert("analytic_length".into(), json!(input.analytic_length));

    let (set, samples) = input.weighted(m)?;
    let family = family_over(&set.space, cfg)?;
    body.insert("family".into(), family_json(&family));

    let mut table: Option<FunctionalReport> = None;
    if let (Some(curve), Some(s)) = (&input.curve, &samples) {
        body.insert("global".into(), to_value(&global_curvature_functional(curve, m, &settings)?)?);
        let multi = multires_curvature_sum(s, &family, &settings)?;
        body.insert("multires".into(), to_value(&multi)?);
        body.insert("large_balls".into(), to_value(&large_ball_diagnostic(curve, s, &family))?);
        table = Some(multi);
    } else {
        let a = cfg.a.unwrap_or(3.0);
        let radius = 2.0 * set.space.subset_diam(&PointSubset::all(set.len()))?.max(f64::MIN_POSITIVE);
        body.insert("hahlomaa".into(), to_value(&hahlomaa_condition_sum(&set, a, 0, radius, &settings)?)?);
    }
    if set.space.is_euclidean() {
        let b = beta_inf_multires_sum(&set.space, &PointSubset::all(set.len()), &family)?;
        body.insert("beta_inf".into(), to_value(&b)?);
    }
    let mut graph = None;
    if let Some(n) = cfg.scale {
        let (t, _, g) = tour_body(&input, n)?;
        body.insert("tour".into(), t);
        graph = Some(g);
    }
    if let Some(t) = &table {
        write_rows(cfg, t)?;
    }
    let cloud: Option<&EuclideanCloud> = set.space.as_euclidean();
    write_svg(
        cfg,
        Svg {
            points: if graph.is_some() { input.space.as_euclidean() } else { cloud },
            curve: input.curve.as_ref().filter(|c| c.space().is_euclidean()),
            family: if graph.is_some() { None } else { Some(&family) },
            graph: graph.as_ref(),
        },
    )?;
    emit(cfg, "report", Value::Object(body))
}
