//! Metric graphs used as direction spaces of graph cones.
//!
//! Points of the graph are addressed as `(edge, offset)` with the offset
//! measured from the edge's `u` endpoint. All-pairs vertex distances are
//! computed once at construction; any point-to-point distance is then the
//! best of the four endpoint combinations (plus the direct route when both
//! points sit on the same edge), which is the same as running Dijkstra on the
//! vertex set augmented with the two query points.

use std::f64::consts::PI;

use petgraph::algo::{connected_components, dijkstra};
use petgraph::graph::{NodeIndex, UnGraph};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub length: f64,
}

/// A connected metric graph with positive edge lengths.
#[derive(Debug, Clone)]
pub struct MetricGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    incident: Vec<Vec<usize>>,
    dist: Vec<Vec<f64>>,
}

impl PartialEq for MetricGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertex_count == other.vertex_count && self.edges == other.edges
    }
}

/// An affine function `slope * x + icpt` of a position parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Line {
    pub slope: f64,
    pub icpt: f64,
}

impl Line {
    fn new(slope: f64, icpt: f64) -> Self {
        Line { slope, icpt }
    }

    pub fn at(&self, x: f64) -> f64 {
        self.slope * x + self.icpt
    }

    /// Parameter where the line reaches `level`, if it is not flat.
    pub fn solve(&self, level: f64) -> Option<f64> {
        (self.slope != 0.0).then(|| (level - self.icpt) / self.slope)
    }

    pub fn crossing(&self, other: &Line) -> Option<f64> {
        (self.slope != other.slope).then(|| (other.icpt - self.icpt) / (self.slope - other.slope))
    }
}

/// Distance from a fixed graph point to the points `(edge, o)` for `o` in
/// `[lo, hi]`, written as the pointwise minimum of `lines`.
#[derive(Debug, Clone)]
pub(crate) struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub lines: Vec<Line>,
}

impl Piece {
    pub fn eval(&self, o: f64) -> f64 {
        self.lines.iter().map(|l| l.at(o)).fold(f64::INFINITY, f64::min)
    }
}

/// A closed interval of offsets on one edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeInterval {
    pub edge: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Segment {
    edge: usize,
    from: f64,
    to: f64,
}

impl Segment {
    fn len(&self) -> f64 {
        (self.to - self.from).abs()
    }
}

impl MetricGraph {
    pub fn new(vertex_count: usize, edges: Vec<Edge>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidSpace("graph needs at least one vertex".into()));
        }
        let mut incident = vec![Vec::new(); vertex_count];
        let mut g = UnGraph::<(), f64>::with_capacity(vertex_count, edges.len());
        for _ in 0..vertex_count {
            g.add_node(());
        }
        for (id, e) in edges.iter().enumerate() {
            if e.u >= vertex_count || e.v >= vertex_count {
                return Err(Error::InvalidSpace(format!("edge {id} references a missing vertex")));
            }
            if e.u == e.v {
                return Err(Error::InvalidSpace(format!("edge {id} is a loop")));
            }
            if !(e.length.is_finite() && e.length > 0.0) {
                return Err(Error::InvalidSpace(format!("edge {id} must have positive length")));
            }
            incident[e.u].push(id);
            incident[e.v].push(id);
            g.add_edge(NodeIndex::new(e.u), NodeIndex::new(e.v), e.length);
        }
        if connected_components(&g) != 1 {
            return Err(Error::InvalidSpace("graph must be connected".into()));
        }
        let dist = (0..vertex_count)
            .map(|s| {
                let reach = dijkstra(&g, NodeIndex::new(s), None, |e| *e.weight());
                (0..vertex_count).map(|t| reach[&NodeIndex::new(t)]).collect()
            })
            .collect();
        Ok(MetricGraph { vertex_count, edges, incident, dist })
    }

    /// The Petersen graph with all edges of length `π/2`; its cone is the
    /// tree space of four-leaf phylogenies.
    pub fn petersen() -> Self {
        let mut edges = Vec::with_capacity(15);
        let half = PI / 2.0;
        for i in 0..5 {
            edges.push(Edge { u: i, v: (i + 1) % 5, length: half });
        }
        for i in 0..5 {
            edges.push(Edge { u: i, v: i + 5, length: half });
        }
        for i in 0..5 {
            edges.push(Edge { u: 5 + i, v: 5 + (i + 2) % 5, length: half });
        }
        MetricGraph::new(10, edges).expect("petersen graph is valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_distance(&self, a: usize, b: usize) -> f64 {
        self.dist[a][b]
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.vertex_count
    }

    pub(crate) fn check(&self, edge: usize, offset: f64) -> Result<(usize, f64)> {
        let e = self
            .edges
            .get(edge)
            .ok_or_else(|| Error::InvalidDirection(format!("edge id {edge} out of range")))?;
        if !offset.is_finite() || offset < -TIE_TOL || offset > e.length + TIE_TOL {
            return Err(Error::InvalidDirection(format!(
                "offset {offset} outside [0, {}] on edge {edge}",
                e.length
            )));
        }
        Ok(self.canonical(edge, offset.clamp(0.0, e.length)))
    }

    /// Vertices are addressed through their lowest-numbered incident edge.
    pub(crate) fn canonical(&self, edge: usize, offset: f64) -> (usize, f64) {
        let e = self.edges[edge];
        let vertex = if offset == 0.0 {
            e.u
        } else if offset == e.length {
            e.v
        } else {
            return (edge, offset);
        };
        self.vertex_position(vertex)
    }

    fn vertex_position(&self, vertex: usize) -> (usize, f64) {
        let id = self.incident[vertex][0];
        let e = self.edges[id];
        (id, if e.u == vertex { 0.0 } else { e.length })
    }

    fn to_vertex(&self, (edge, offset): (usize, f64), x: usize) -> f64 {
        let e = self.edges[edge];
        (offset + self.dist[e.u][x]).min(e.length - offset + self.dist[e.v][x])
    }

    pub fn distance(&self, a: (usize, f64), b: (usize, f64)) -> f64 {
        let eb = self.edges[b.0];
        let mut best = (b.1 + self.to_vertex(a, eb.u)).min(eb.length - b.1 + self.to_vertex(a, eb.v));
        if a.0 == b.0 {
            best = best.min((a.1 - b.1).abs());
        }
        best
    }

    /// Distance from `from` to every point of `edge`, as pieces of min-of-lines.
    pub(crate) fn profile(&self, from: (usize, f64), edge: usize) -> Vec<Piece> {
        let e = self.edges[edge];
        let via_u = Line::new(1.0, self.to_vertex(from, e.u));
        let via_v = Line::new(-1.0, e.length + self.to_vertex(from, e.v));
        if from.0 != edge {
            return vec![Piece { lo: 0.0, hi: e.length, lines: vec![via_u, via_v] }];
        }
        let s = from.1;
        let mut pieces = Vec::with_capacity(2);
        if s > 0.0 {
            pieces.push(Piece { lo: 0.0, hi: s, lines: vec![via_u, via_v, Line::new(-1.0, s)] });
        }
        if s < e.length {
            pieces.push(Piece { lo: s, hi: e.length, lines: vec![via_u, via_v, Line::new(1.0, -s)] });
        }
        pieces
    }

    /// Closed per-edge intervals of points at distance at least `level` from `from`.
    pub(crate) fn superlevel(&self, from: (usize, f64), level: f64, tol: f64) -> Vec<EdgeInterval> {
        let mut out: Vec<EdgeInterval> = Vec::new();
        for edge in 0..self.edges.len() {
            for piece in self.profile(from, edge) {
                let (mut lo, mut hi) = (piece.lo, piece.hi);
                for l in &piece.lines {
                    if l.slope > 0.0 {
                        lo = lo.max((level - tol - l.icpt) / l.slope);
                    } else if l.slope < 0.0 {
                        hi = hi.min((level - tol - l.icpt) / l.slope);
                    } else if l.icpt < level - tol {
                        hi = f64::NEG_INFINITY;
                    }
                }
                if lo <= hi {
                    match out.last_mut() {
                        Some(prev) if prev.edge == edge && (lo - prev.hi).abs() <= tol => prev.hi = hi,
                        _ => out.push(EdgeInterval { edge, lo, hi }),
                    }
                }
            }
        }
        out
    }

    /// True when the intervals contain more than one distinct graph point.
    /// Intervals produced with slack `tol` around a single point are at most
    /// a few `tol` wide, so narrower ones count as points.
    pub(crate) fn has_several_points(&self, intervals: &[EdgeInterval], tol: f64) -> bool {
        let mut seen: Vec<(usize, f64)> = Vec::new();
        for iv in intervals {
            if iv.hi - iv.lo > 4.0 * tol {
                return true;
            }
            let len = self.edges[iv.edge].length;
            let mid = 0.5 * (iv.lo + iv.hi);
            let snapped = if mid <= tol {
                0.0
            } else if mid >= len - tol {
                len
            } else {
                mid
            };
            let p = self.canonical(iv.edge, snapped);
            if !seen.iter().any(|q| q.0 == p.0 && (q.1 - p.1).abs() <= tol) {
                seen.push(p);
            }
            if seen.len() > 1 {
                return true;
            }
        }
        false
    }

    /// Exact minimum over the graph of the eccentricity `max_τ d(σ, τ)`,
    /// together with the positions where it is (nearly) attained.
    pub(crate) fn min_eccentricity(&self) -> (f64, Vec<(usize, f64)>) {
        let mut best = f64::INFINITY;
        let mut at: Vec<(usize, f64)> = Vec::new();
        for edge in 0..self.edges.len() {
            let terms = self.eccentricity_terms(edge);
            let len = self.edges[edge].length;
            let eval = |s: f64| {
                terms
                    .iter()
                    .map(|t| t.iter().map(|l| l.at(s)).fold(f64::INFINITY, f64::min))
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            let lines: Vec<Line> = terms.iter().flatten().copied().collect();
            let mut cands = vec![0.0, len];
            for (i, a) in lines.iter().enumerate() {
                for b in &lines[i + 1..] {
                    if let Some(s) = a.crossing(b) {
                        if s > 0.0 && s < len {
                            cands.push(s);
                        }
                    }
                }
            }
            cands.sort_by(f64::total_cmp);
            cands.dedup_by(|a, b| (*a - *b).abs() <= TIE_TOL);
            let mut extra = Vec::new();
            for w in cands.windows(2) {
                extra.push(0.5 * (w[0] + w[1]));
            }
            for s in cands.into_iter().chain(extra) {
                let v = eval(s);
                if v < best - 1e-9 {
                    best = v;
                    at.clear();
                }
                if v <= best + 1e-9 {
                    at.push((edge, s));
                }
            }
        }
        (best, at)
    }

    /// Eccentricity of the point at offset `s` on `edge` as a max over terms,
    /// each the min of lines in `s`. Splitting the edge at `s` turns every
    /// term into the midpoint formula `(L + d(a) + d(b)) / 2`.
    fn eccentricity_terms(&self, edge: usize) -> Vec<Vec<Line>> {
        let e = self.edges[edge];
        let len = e.length;
        let to = |x: usize| [Line::new(1.0, self.dist[e.u][x]), Line::new(-1.0, len + self.dist[e.v][x])];
        let mut terms = Vec::with_capacity(self.edges.len() + 1);
        for (id, t) in self.edges.iter().enumerate() {
            if id == edge {
                continue;
            }
            let mut term = Vec::with_capacity(4);
            for la in to(t.u) {
                for lb in to(t.v) {
                    term.push(Line::new(0.5 * (la.slope + lb.slope), 0.5 * (t.length + la.icpt + lb.icpt)));
                }
            }
            terms.push(term);
        }
        terms.push(vec![Line::new(1.0, 0.0), Line::new(0.0, 0.5 * (len + self.dist[e.v][e.u]))]);
        terms.push(vec![Line::new(-1.0, len), Line::new(0.0, 0.5 * (len + self.dist[e.u][e.v]))]);
        terms
    }

    /// Shortest path between two graph points; ties are broken by the
    /// lexicographically smallest sequence of traversed edge ids.
    fn shortest_path(&self, a: (usize, f64), b: (usize, f64)) -> Vec<Segment> {
        let ea = self.edges[a.0];
        let eb = self.edges[b.0];
        let mut best: Option<(f64, Vec<usize>, Vec<Segment>)> = None;
        let mut consider = |len: f64, segs: Vec<Segment>| {
            let ids: Vec<usize> = segs.iter().filter(|s| s.len() > 0.0).map(|s| s.edge).collect();
            let better = match &best {
                None => true,
                Some((bl, bids, _)) => len < bl - TIE_TOL || (len <= bl + TIE_TOL && ids < *bids),
            };
            if better {
                best = Some((len, ids, segs));
            }
        };
        if a.0 == b.0 {
            consider((a.1 - b.1).abs(), vec![Segment { edge: a.0, from: a.1, to: b.1 }]);
        }
        for (x, xpos) in [(ea.u, 0.0), (ea.v, ea.length)] {
            for (y, ypos) in [(eb.u, 0.0), (eb.v, eb.length)] {
                let len = (a.1 - xpos).abs() + self.dist[x][y] + (b.1 - ypos).abs();
                let mut segs = vec![Segment { edge: a.0, from: a.1, to: xpos }];
                segs.extend(self.vertex_path(x, y));
                segs.push(Segment { edge: b.0, from: ypos, to: b.1 });
                consider(len, segs);
            }
        }
        best.map(|(_, _, s)| s).unwrap_or_default()
    }

    fn vertex_path(&self, from: usize, to: usize) -> Vec<Segment> {
        let mut segs = Vec::new();
        let mut x = from;
        while x != to {
            let remaining = self.dist[x][to];
            let step = self.incident[x]
                .iter()
                .copied()
                .find(|&id| {
                    let e = self.edges[id];
                    let y = if e.u == x { e.v } else { e.u };
                    e.length + self.dist[y][to] <= remaining + TIE_TOL
                })
                .expect("connected graph has a next hop");
            let e = self.edges[step];
            if e.u == x {
                segs.push(Segment { edge: step, from: 0.0, to: e.length });
                x = e.v;
            } else {
                segs.push(Segment { edge: step, from: e.length, to: 0.0 });
                x = e.u;
            }
        }
        segs
    }

    /// The point at arc length `t` along the shortest path from `a` to `b`.
    pub(crate) fn walk(&self, a: (usize, f64), b: (usize, f64), t: f64) -> (usize, f64) {
        let mut left = t;
        let path = self.shortest_path(a, b);
        for seg in &path {
            let len = seg.len();
            if left <= len {
                let frac = if len > 0.0 { left / len } else { 0.0 };
                let o = seg.from + (seg.to - seg.from) * frac;
                return self.canonical(seg.edge, o.clamp(0.0, self.edges[seg.edge].length));
            }
            left -= len;
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn petersen_is_cubic_with_diameter_two() {
        let g = MetricGraph::petersen();
        assert!(g.incident.iter().all(|inc| inc.len() == 3));
        let diam = (0..10)
            .flat_map(|a| (0..10).map(move |b| (a, b)))
            .map(|(a, b)| g.vertex_distance(a, b))
            .fold(0.0, f64::max);
        assert!((diam - PI).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_graphs() {
        let disconnected = MetricGraph::new(3, vec![Edge { u: 0, v: 1, length: 1.0 }]);
        assert!(disconnected.is_err());
        let zero = MetricGraph::new(2, vec![Edge { u: 0, v: 1, length: 0.0 }]);
        assert!(zero.is_err());
        let looped = MetricGraph::new(1, vec![Edge { u: 0, v: 0, length: 1.0 }]);
        assert!(looped.is_err());
    }

    #[test]
    fn vertices_canonicalize_to_lowest_edge() {
        let g = MetricGraph::petersen();
        // vertex 1 is the v end of edge 0 and the u end of edges 1 and 6
        assert_eq!(g.canonical(1, 0.0), (0, PI / 2.0));
        assert_eq!(g.canonical(6, 0.0), (0, PI / 2.0));
    }

    #[test]
    fn walk_reaches_endpoints() {
        let g = MetricGraph::petersen();
        let a = (0, 0.3);
        let b = (12, 1.0);
        let d = g.distance(a, b);
        let end = g.walk(a, b, d);
        assert!(g.distance(end, b) < 1e-12);
        let mid = g.walk(a, b, 0.5 * d);
        assert!((g.distance(a, mid) - 0.5 * d).abs() < 1e-12);
        assert!((g.distance(mid, b) - 0.5 * d).abs() < 1e-12);
    }

    #[test]
    fn tree_detection() {
        let star = MetricGraph::new(
            4,
            vec![
                Edge { u: 0, v: 1, length: 1.0 },
                Edge { u: 0, v: 2, length: 1.0 },
                Edge { u: 0, v: 3, length: 1.0 },
            ],
        )
        .unwrap();
        assert!(star.is_tree());
        assert!(!MetricGraph::petersen().is_tree());
    }
}
