//! Net graphs, doubled Euler tours and Lipschitz parameterizations of
//! connected sampled sets.
//!
//! Pipeline: a `2^-n`-net `X_n` of the sample, a forest `E_n` joining net
//! points closer than `8 * 2^-n` (shortest pairs first, union-find), and a
//! closed circuit walking every edge of `E_n` once in each direction.

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::curves::Curve;
use crate::error::{Error, Result};
use crate::metric::{euclidean_dist, MetricSpace, PointSubset};
use crate::nets::{build_net, InsertionOrder, Net};

/// Connection radius in units of the net epsilon.
pub const CONNECTION_FACTOR: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    /// Space ids, `a < b`.
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetGraph {
    /// Space ids of the net points.
    pub vertices: Vec<usize>,
    pub edges: Vec<Edge>,
    pub epsilon: f64,
    /// Pairs strictly closer than this were eligible for an edge.
    pub radius: f64,
    /// False when the radius differs from `8 * epsilon`.
    pub conformant: bool,
    /// Per vertex position: `(neighbour position, edge index)` in edge order.
    #[serde(skip)]
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl NetGraph {
    /// Graph on `vertices` with the given edges; lengths are taken from the space.
    pub fn from_edges(space: &MetricSpace, vertices: Vec<usize>, pairs: &[(usize, usize)]) -> Result<Self> {
        space.check_subset(&PointSubset::new(vertices.clone())?)?;
        let mut edges = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            if a == b {
                return Err(Error::Validation(format!("self-loop at {a}")));
            }
            let (a, b) = (a.min(b), a.max(b));
            if !vertices.contains(&a) || !vertices.contains(&b) {
                return Err(Error::usage(format!("edge ({a}, {b}) leaves the vertex set")));
            }
            if edges.iter().any(|e: &Edge| e.a == a && e.b == b) {
                return Err(Error::Validation(format!("duplicate edge ({a}, {b})")));
            }
            edges.push(Edge { a, b, length: space.d(a, b) });
        }
        Ok(NetGraph::assemble(vertices, edges, 0.0, f64::INFINITY, false))
    }

    fn assemble(vertices: Vec<usize>, edges: Vec<Edge>, epsilon: f64, radius: f64, conformant: bool) -> Self {
        let mut adjacency = vec![Vec::new(); vertices.len()];
        let pos = |id: usize| vertices.iter().position(|&v| v == id).unwrap();
        for (k, e) in edges.iter().enumerate() {
            let (pa, pb) = (pos(e.a), pos(e.b));
            adjacency[pa].push((pb, k));
            adjacency[pb].push((pa, k));
        }
        NetGraph {
            vertices,
            edges,
            epsilon,
            radius,
            conformant,
            adjacency,
        }
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn neighbours(&self, pos: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[pos].iter().map(|&(p, _)| p)
    }

    fn position(&self, id: usize) -> Option<usize> {
        self.vertices.iter().position(|&v| v == id)
    }

    /// Component label per vertex position.
    fn components(&self) -> Vec<usize> {
        let mut uf = UnionFind::<usize>::new(self.vertices.len());
        for e in &self.edges {
            uf.union(self.position(e.a).unwrap(), self.position(e.b).unwrap());
        }
        uf.into_labeling()
    }

    pub fn is_connected(&self) -> bool {
        let labels = self.components();
        labels.iter().all(|&l| l == labels[0])
    }
}

/// Candidate pairs of net points closer than `radius`, ascending by
/// `(length, smaller id, larger id)`.
fn candidate_pairs(space: &MetricSpace, ids: &[usize], radius: f64) -> Vec<(f64, usize, usize, usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..ids.len() {
        for j in (i + 1)..ids.len() {
            let d = space.d(ids[i], ids[j]);
            if d < radius {
                let (a, b) = (ids[i].min(ids[j]), ids[i].max(ids[j]));
                let (pa, pb) = if ids[i] < ids[j] { (i, j) } else { (j, i) };
                pairs.push((d, a, b, pa, pb));
            }
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    pairs
}

/// `E_n` for a net with the literal `8 * epsilon` connection radius.
pub fn build_net_graph(space: &MetricSpace, net: &Net) -> Result<NetGraph> {
    build_net_graph_with_radius(space, net, CONNECTION_FACTOR * net.epsilon)
}

/// Like [`build_net_graph`] with an explicit connection radius. Graphs built
/// with any other radius than `8 * epsilon` are marked non-conformant.
pub fn build_net_graph_with_radius(space: &MetricSpace, net: &Net, radius: f64) -> Result<NetGraph> {
    if !(radius > 0.0) {
        return Err(Error::domain("connection radius must be positive"));
    }
    let ids = net.members.as_slice();
    let mut uf = UnionFind::<usize>::new(ids.len());
    let mut edges = Vec::new();
    for (d, a, b, pa, pb) in candidate_pairs(space, ids, radius) {
        if uf.union(pa, pb) {
            edges.push(Edge { a, b, length: d });
            if edges.len() + 1 == ids.len() {
                break;
            }
        }
    }
    if ids.len() > 1 && edges.len() + 1 < ids.len() {
        let labels = uf.into_labeling();
        let root = labels[0];
        let mut best = (f64::INFINITY, ids[0], ids[0]);
        for i in 0..ids.len() {
            if labels[i] != root {
                continue;
            }
            for j in 0..ids.len() {
                if labels[j] != root {
                    let d = space.d(ids[i], ids[j]);
                    if d < best.0 {
                        best = (d, ids[i], ids[j]);
                    }
                }
            }
        }
        return Err(Error::Disconnected {
            first: best.1,
            second: best.2,
            gap: best.0,
            threshold: radius,
        });
    }
    let conformant = radius == CONNECTION_FACTOR * net.epsilon;
    Ok(NetGraph::assemble(ids.to_vec(), edges, net.epsilon, radius, conformant))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TourStep {
    pub edge: usize,
    /// True when the step walks the edge from `a` to `b`.
    pub forward: bool,
}

/// Closed walk; `vertices` starts and ends at the same id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    pub vertices: Vec<usize>,
    pub steps: Vec<TourStep>,
    pub length: f64,
}

impl Tour {
    /// Checks that consecutive vertices are joined by the referenced edge and
    /// that every edge is walked exactly once in each direction.
    pub fn audit(&self, graph: &NetGraph) -> Result<()> {
        if self.vertices.len() != self.steps.len() + 1 {
            return Err(Error::Validation("tour vertex and step counts disagree".into()));
        }
        if self.vertices.first() != self.vertices.last() {
            return Err(Error::Validation("tour is not closed".into()));
        }
        let mut seen = vec![[0u32; 2]; graph.edges.len()];
        for (k, step) in self.steps.iter().enumerate() {
            let e = graph
                .edges
                .get(step.edge)
                .ok_or_else(|| Error::Validation(format!("step {k} references unknown edge")))?;
            let (from, to) = if step.forward { (e.a, e.b) } else { (e.b, e.a) };
            if self.vertices[k] != from || self.vertices[k + 1] != to {
                return Err(Error::Validation(format!("step {k} does not follow edge {}", step.edge)));
            }
            seen[step.edge][step.forward as usize] += 1;
        }
        if let Some(k) = seen.iter().position(|c| *c != [1, 1]) {
            return Err(Error::Validation(format!(
                "edge {k} walked {} times backward and {} times forward",
                seen[k][0], seen[k][1]
            )));
        }
        Ok(())
    }
}

/// Hierholzer's circuit on the graph with every edge doubled into two
/// opposite arcs, starting at the lowest vertex id.
pub fn double_euler_tour(graph: &NetGraph) -> Result<Tour> {
    if graph.vertices.is_empty() {
        return Err(Error::domain("tour of an empty graph"));
    }
    if !graph.is_connected() {
        return Err(Error::domain("tour of a disconnected graph"));
    }
    let start = (0..graph.vertices.len())
        .min_by_key(|&p| graph.vertices[p])
        .unwrap();
    // arc 2k walks edge k forward (a -> b), arc 2k + 1 backward
    let mut used = vec![false; 2 * graph.edges.len()];
    let mut cursor = vec![0usize; graph.vertices.len()];
    let out_arc = |pos: usize, slot: usize| -> (usize, usize) {
        let (nbr, k) = graph.adjacency[pos][slot];
        let from_a = graph.vertices[pos] == graph.edges[k].a;
        (nbr, 2 * k + (!from_a) as usize)
    };
    // stack of (vertex position, arc used to arrive)
    let mut stack: Vec<(usize, Option<usize>)> = vec![(start, None)];
    let mut circuit: Vec<(usize, Option<usize>)> = Vec::new();
    while let Some(&(v, _)) = stack.last() {
        let mut next = None;
        // each incident edge offers exactly one arc leaving v
        while cursor[v] < graph.adjacency[v].len() {
            let slot = cursor[v];
            cursor[v] += 1;
            let (nbr, arc) = out_arc(v, slot);
            if !used[arc] {
                used[arc] = true;
                next = Some((nbr, Some(arc)));
                break;
            }
        }
        match next {
            Some(step) => stack.push(step),
            None => circuit.push(stack.pop().unwrap()),
        }
    }
    circuit.reverse();
    let vertices: Vec<usize> = circuit.iter().map(|&(p, _)| graph.vertices[p]).collect();
    let steps: Vec<TourStep> = circuit[1..]
        .iter()
        .map(|&(_, arc)| {
            let arc = arc.unwrap();
            TourStep {
                edge: arc / 2,
                forward: arc % 2 == 0,
            }
        })
        .collect();
    let length = steps.iter().map(|s| graph.edges[s.edge].length).sum();
    Ok(Tour {
        vertices,
        steps,
        length,
    })
}

/// Two one-sided distances between the sample and the graph `E_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HausdorffGap {
    /// `sup_{x in E_n} dist(x, sample)`, an upper bound when edges are segments.
    pub graph_to_set: f64,
    /// `sup_{y in sample} dist(E_n, y)`.
    pub set_to_graph: f64,
}

impl HausdorffGap {
    pub fn total(&self) -> f64 {
        self.graph_to_set + self.set_to_graph
    }
}

fn segment_point_dist(p: &[f64], q: &[f64], x: &[f64]) -> f64 {
    let mut dd = 0.0;
    let mut dx = 0.0;
    for i in 0..p.len() {
        dd += (q[i] - p[i]) * (q[i] - p[i]);
        dx += (x[i] - p[i]) * (q[i] - p[i]);
    }
    let t = if dd > 0.0 { (dx / dd).clamp(0.0, 1.0) } else { 0.0 };
    let proj: Vec<f64> = p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect();
    euclidean_dist(&proj, x)
}

/// Gap between `domain` and the graph. In Euclidean clouds edges are
/// straight segments; the graph-to-set side is sampled at step `epsilon / 64`
/// and padded by half a step, which bounds it from above since the distance
/// to a set is 1-Lipschitz. Elsewhere the graph consists of its vertices.
pub fn hausdorff_gap(space: &MetricSpace, domain: &PointSubset, graph: &NetGraph) -> HausdorffGap {
    let dom = domain.as_slice();
    if let (Some(cloud), false) = (space.as_euclidean(), graph.edges.is_empty()) {
        let set_to_graph = dom
            .iter()
            .map(|&y| {
                graph
                    .edges
                    .iter()
                    .map(|e| segment_point_dist(cloud.point(e.a), cloud.point(e.b), cloud.point(y)))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        let step = graph.epsilon.max(f64::MIN_POSITIVE) / 64.0;
        let mut graph_to_set: f64 = 0.0;
        for e in &graph.edges {
            let (p, q) = (cloud.point(e.a), cloud.point(e.b));
            let k = (e.length / step).ceil().max(1.0) as usize;
            let h = e.length / k as f64;
            for i in 0..=k {
                let t = i as f64 / k as f64;
                let x: Vec<f64> = p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect();
                let d = dom
                    .iter()
                    .map(|&y| euclidean_dist(&x, cloud.point(y)))
                    .fold(f64::INFINITY, f64::min);
                let pad = if i == 0 || i == k { 0.0 } else { 0.5 * h };
                graph_to_set = graph_to_set.max(d + pad);
            }
        }
        HausdorffGap {
            graph_to_set,
            set_to_graph,
        }
    } else {
        let nearest = |x: usize, set: &[usize]| set.iter().map(|&y| space.d(x, y)).fold(f64::INFINITY, f64::min);
        HausdorffGap {
            graph_to_set: graph.vertices.iter().map(|&x| nearest(x, dom)).fold(0.0, f64::max),
            set_to_graph: dom.iter().map(|&y| nearest(y, &graph.vertices)).fold(0.0, f64::max),
        }
    }
}

/// Everything produced on the way from a sample to its closed parameterization.
#[derive(Clone, Debug)]
pub struct Parameterization {
    pub scale: i32,
    pub net: Net,
    pub graph: NetGraph,
    pub tour: Tour,
    /// Closed curve through the tour; its length is `2 * graph.total_length()`.
    pub curve: Curve,
    pub gap: HausdorffGap,
}

impl Parameterization {
    /// Bound on the graph length from the net size: `#X_n * 8 * epsilon`.
    pub fn count_bound(&self) -> f64 {
        self.net.members.len() as f64 * CONNECTION_FACTOR * self.net.epsilon
    }
}

/// Net at `2^-n`, net graph, doubled tour and the closed curve realizing it.
pub fn parameterize_connected_set(space: &MetricSpace, domain: &PointSubset, n: i32) -> Result<Parameterization> {
    let epsilon = (-n as f64).exp2();
    let net = build_net(space, domain, epsilon, InsertionOrder::Input)?;
    let graph = build_net_graph(space, &net)?;
    let tour = double_euler_tour(&graph)?;
    let mut path = tour.vertices.clone();
    if path.len() > 1 {
        path.pop();
    }
    let curve = Curve::new(space.clone(), path, true)?;
    let gap = hausdorff_gap(space, domain, &graph);
    Ok(Parameterization {
        scale: n,
        net,
        graph,
        tour,
        curve,
        gap,
    })
}
