//! File formats.
//!
//! * point cloud: CSV without header, one point per row
//! * curve: CSV, optional first line `closed` or `open` (default open), then
//!   one vertex per row
//! * explicit metric: JSON `{"n": int, "dist": [row-major n*n floats]}`
//! * tour: JSON `{"vertices", "edges", "order"}`

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::beta::BallRow;
use crate::curves::Curve;
use crate::error::{Error, Result};
use crate::metric::{EuclideanCloud, ExplicitMetric, MetricSpace};
use crate::nets::MultiresolutionFamily;
use crate::spanning::{NetGraph, Tour};

fn parse_rows<R: Read>(reader: R, what: &str) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Validation(format!("{what} row {}: {e}", k + 1)))?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Validation(format!("{what} row {}: not a number: {f:?}", k + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Validation(format!("{what} has no rows")));
    }
    Ok(rows)
}

pub fn read_point_cloud<R: Read>(reader: R) -> Result<EuclideanCloud> {
    EuclideanCloud::new(parse_rows(reader, "point cloud")?)
        .map_err(|e| Error::Validation(e.to_string()))
}

pub fn load_point_cloud(path: &Path) -> Result<EuclideanCloud> {
    read_point_cloud(fs::File::open(path)?)
}

pub fn write_point_cloud<W: Write>(writer: W, cloud: &EuclideanCloud) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for p in cloud.points() {
        w.write_record(p.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve(text: &str) -> Result<Curve> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    let (closed, body) = match first.trim() {
        "closed" => (true, rest),
        "open" => (false, rest),
        _ => (false, text),
    };
    let rows = parse_rows(body.as_bytes(), "curve")?;
    Curve::from_points(&rows, closed)
}

pub fn load_curve(path: &Path) -> Result<Curve> {
    read_curve(&fs::read_to_string(path)?)
}

/// Euclidean curves only: vertices in curve order.
pub fn write_curve<W: Write>(mut writer: W, curve: &Curve) -> Result<()> {
    let coords = curve
        .vertex_coords()
        .ok_or_else(|| Error::Unsupported("curve CSV needs a Euclidean curve".into()))?;
    writeln!(writer, "{}", if curve.is_closed() { "closed" } else { "open" })?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for p in coords {
        w.write_record(p.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct MetricFile {
    n: usize,
    dist: Vec<f64>,
}

pub fn read_explicit_metric(text: &str) -> Result<ExplicitMetric> {
    let file: MetricFile =
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("explicit metric JSON: {e}")))?;
    ExplicitMetric::new(file.n, file.dist)
}

pub fn load_explicit_metric(path: &Path) -> Result<ExplicitMetric> {
    read_explicit_metric(&fs::read_to_string(path)?)
}

pub fn write_explicit_metric<W: Write>(writer: W, space: &MetricSpace) -> Result<()> {
    let dm = space.full_distance_matrix();
    let n = dm.len();
    let dist = (0..n).flat_map(|i| dm.row(i).to_vec()).collect();
    serde_json::to_writer(writer, &MetricFile { n, dist })?;
    Ok(())
}

/// A point cloud (`.csv`) or an explicit metric (`.json`), by extension.
pub fn load_space(path: &Path) -> Result<MetricSpace> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => Ok(load_explicit_metric(path)?.into()),
        Some("csv") | Some("txt") | None => Ok(load_point_cloud(path)?.into()),
        Some(other) => Err(Error::usage(format!("unrecognised input extension .{other}"))),
    }
}

pub fn write_ball_rows<W: Write>(writer: W, rows: &[BallRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TourFile {
    /// Net point ids.
    pub vertices: Vec<usize>,
    /// `[a, b, length]`.
    pub edges: Vec<(usize, usize, f64)>,
    /// Visiting order, closed (first id repeated at the end).
    pub order: Vec<usize>,
}

impl TourFile {
    pub fn new(graph: &NetGraph, tour: &Tour) -> Self {
        TourFile {
            vertices: graph.vertices.clone(),
            edges: graph.edges.iter().map(|e| (e.a, e.b, e.length)).collect(),
            order: tour.vertices.clone(),
        }
    }
}

/// Layers of a 2-D picture.
#[derive(Default)]
pub struct Svg<'a> {
    pub points: Option<&'a EuclideanCloud>,
    pub curve: Option<&'a Curve>,
    /// Balls drawn as circles around points of `points`.
    pub family: Option<&'a MultiresolutionFamily>,
    pub graph: Option<&'a NetGraph>,
}

impl Svg<'_> {
    pub fn render(&self) -> Result<String> {
        let mut xs: Vec<[f64; 2]> = Vec::new();
        let two_d = |p: &[f64]| -> Result<[f64; 2]> {
            match p {
                [x, y] => Ok([*x, *y]),
                _ => Err(Error::Unsupported("SVG output needs planar data".into())),
            }
        };
        if let Some(c) = self.points {
            for p in c.points() {
                xs.push(two_d(p)?);
            }
        }
        let curve_pts = match self.curve {
            Some(c) => {
                let v = c
                    .vertex_coords()
                    .ok_or_else(|| Error::Unsupported("SVG output needs a Euclidean curve".into()))?;
                v.iter().map(|p| two_d(p)).collect::<Result<Vec<_>>>()?
            }
            None => Vec::new(),
        };
        xs.extend(&curve_pts);
        if xs.is_empty() {
            return Err(Error::usage("nothing to draw"));
        }
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &xs {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        let size = 800.0;
        let pad = 0.05 * span;
        let scale = size / (span + 2.0 * pad);
        let map = |p: [f64; 2]| ((p[0] - lo[0] + pad) * scale, size - (p[1] - lo[1] + pad) * scale);
        let stroke = 1.0;
        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n"
        ));
        out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        if let (Some(fam), Some(c)) = (self.family, self.points) {
            out.push_str("<g fill=\"none\" stroke=\"#4a7ebb\" stroke-opacity=\"0.25\">\n");
            for b in fam.balls() {
                let (x, y) = map(two_d(c.point(b.ball.center))?);
                out.push_str(&format!(
                    "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{:.2}\" stroke-width=\"{stroke}\"/>\n",
                    b.ball.radius * scale
                ));
            }
            out.push_str("</g>\n");
        }
        if !curve_pts.is_empty() {
            let closed = self.curve.map_or(false, |c| c.is_closed());
            let path: Vec<String> = curve_pts
                .iter()
                .map(|&p| {
                    let (x, y) = map(p);
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            let tag = if closed { "polygon" } else { "polyline" };
            out.push_str(&format!(
                "<{tag} points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"{stroke}\"/>\n",
                path.join(" ")
            ));
        }
        if let (Some(g), Some(c)) = (self.graph, self.points) {
            out.push_str("<g stroke=\"#c0392b\" stroke-width=\"2\">\n");
            for e in &g.edges {
                let (x1, y1) = map(two_d(c.point(e.a))?);
                let (x2, y2) = map(two_d(c.point(e.b))?);
                out.push_str(&format!(
                    "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\"/>\n"
                ));
            }
            out.push_str("</g>\n");
        }
        if let Some(c) = self.points {
            out.push_str("<g fill=\"#333\">\n");
            for p in c.points() {
                let (x, y) = map(two_d(p)?);
                out.push_str(&format!("<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"1.5\"/>\n"));
            }
            out.push_str("</g>\n");
        }
        out.push_str("</svg>\n");
        Ok(out)
    }
}
