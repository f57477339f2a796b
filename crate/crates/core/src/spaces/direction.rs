use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::graph::{Edge, EdgeInterval, MetricGraph};
use crate::error::{Error, Result};

/// Coordinate of a direction: a leg index, an angle on a circle, or a
/// position `(edge, offset)` on a metric graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Direction {
    Index(usize),
    Angle(f64),
    Edge { edge: usize, offset: f64 },
}

impl Direction {
    /// Total order used for deterministic tie-breaking.
    pub fn cmp_coord(&self, other: &Direction) -> Ordering {
        use Direction::*;
        match (self, other) {
            (Index(a), Index(b)) => a.cmp(b),
            (Angle(a), Angle(b)) => a.total_cmp(b),
            (Edge { edge: e1, offset: o1 }, Edge { edge: e2, offset: o2 }) => {
                e1.cmp(e2).then(o1.total_cmp(o2))
            }
            _ => self.rank().cmp(&other.rank()),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Direction::Index(_) => 0,
            Direction::Angle(_) => 1,
            Direction::Edge { .. } => 2,
        }
    }

    pub fn index(&self) -> Option<usize> {
        match self {
            Direction::Index(i) => Some(*i),
            _ => None,
        }
    }

    pub(crate) fn graph_pos(&self) -> (usize, f64) {
        match self {
            Direction::Edge { edge, offset } => (*edge, *offset),
            _ => unreachable!("graph position requested for a non-graph direction"),
        }
    }

    pub(crate) fn angle(&self) -> f64 {
        match self {
            Direction::Angle(a) => *a,
            _ => unreachable!("angle requested for a non-circle direction"),
        }
    }
}

/// Direction space `N` of a Euclidean cone.
#[derive(Debug, Clone, PartialEq)]
pub enum DirectionSpace {
    /// Finitely many directions with a symmetric matrix of angles.
    FiniteSet(Vec<Vec<f64>>),
    /// A circle of total length `alpha` with the quotient metric.
    Circle { alpha: f64 },
    Graph(MetricGraph),
}

/// Directions at angle `π` from a given direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shadow {
    Indices { indices: Vec<usize> },
    /// Closed arc starting at `start` and running forward for `length`
    /// (a single point when `length` is zero).
    Arc { start: f64, length: f64 },
    Intervals { intervals: Vec<EdgeInterval> },
    Empty,
}

impl DirectionSpace {
    pub fn spider(legs: usize) -> Result<Self> {
        if legs == 0 {
            return Err(Error::InvalidSpace("a spider needs at least one leg".into()));
        }
        let m = (0..legs)
            .map(|i| (0..legs).map(|j| if i == j { 0.0 } else { PI }).collect())
            .collect();
        Ok(DirectionSpace::FiniteSet(m))
    }

    pub fn finite(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::InvalidSpace("distance matrix is empty".into()));
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidSpace(format!("distance matrix row {i} has wrong length")));
            }
            if row[i] != 0.0 {
                return Err(Error::InvalidSpace(format!("diagonal entry {i} is not zero")));
            }
            for (j, &d) in row.iter().enumerate() {
                if !(d.is_finite() && d >= 0.0) {
                    return Err(Error::InvalidSpace(format!("entry ({i},{j}) must be finite and nonnegative")));
                }
                if d != matrix[j][i] {
                    return Err(Error::InvalidSpace(format!("distance matrix is not symmetric at ({i},{j})")));
                }
                if i != j && d == 0.0 {
                    return Err(Error::InvalidSpace(format!("distinct directions {i} and {j} at distance 0")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if matrix[i][k] > matrix[i][j] + matrix[j][k] + 1e-12 {
                        return Err(Error::InvalidSpace(format!(
                            "triangle inequality fails for ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(DirectionSpace::FiniteSet(matrix))
    }

    pub fn circle(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidSpace(format!("circle length must be positive, got {alpha}")));
        }
        Ok(DirectionSpace::Circle { alpha })
    }

    pub fn graph(vertex_count: usize, edges: Vec<Edge>) -> Result<Self> {
        Ok(DirectionSpace::Graph(MetricGraph::new(vertex_count, edges)?))
    }

    /// Number of directions of a finite direction space.
    pub fn finite_len(&self) -> Option<usize> {
        match self {
            DirectionSpace::FiniteSet(m) => Some(m.len()),
            _ => None,
        }
    }

    /// All off-diagonal angles are at least `π`, so the cone is a metric tree.
    pub fn is_spider_like(&self) -> bool {
        match self {
            DirectionSpace::FiniteSet(m) => m
                .iter()
                .enumerate()
                .all(|(i, row)| row.iter().enumerate().all(|(j, &d)| i == j || d >= PI)),
            _ => false,
        }
    }

    /// Validates a coordinate and returns its canonical form.
    pub fn check(&self, dir: Direction) -> Result<Direction> {
        match (self, dir) {
            (DirectionSpace::FiniteSet(m), Direction::Index(i)) => {
                if i < m.len() {
                    Ok(dir)
                } else {
                    Err(Error::InvalidDirection(format!("index {i} out of range 0..{}", m.len())))
                }
            }
            (DirectionSpace::Circle { alpha }, Direction::Angle(a)) => {
                if !a.is_finite() {
                    return Err(Error::InvalidDirection("angle must be finite".into()));
                }
                let r = a.rem_euclid(*alpha);
                Ok(Direction::Angle(if r >= *alpha { 0.0 } else { r }))
            }
            (DirectionSpace::Circle { .. }, Direction::Index(i)) => self.check(Direction::Angle(i as f64)),
            (DirectionSpace::Graph(g), Direction::Edge { edge, offset }) => {
                let (edge, offset) = g.check(edge, offset)?;
                Ok(Direction::Edge { edge, offset })
            }
            _ => Err(Error::InvalidDirection(format!("{dir:?} does not address this direction space"))),
        }
    }

    /// Raw distance `d_N` between two canonical directions (not capped at π).
    pub fn distance(&self, a: &Direction, b: &Direction) -> f64 {
        match self {
            DirectionSpace::FiniteSet(m) => m[a.index().unwrap()][b.index().unwrap()],
            DirectionSpace::Circle { alpha } => circle_distance(*alpha, a.angle(), b.angle()),
            DirectionSpace::Graph(g) => {
                let (a, b) = if a.cmp_coord(b).is_le() { (a, b) } else { (b, a) };
                g.distance(a.graph_pos(), b.graph_pos())
            }
        }
    }

    /// Angle at the cone point, `min(d_N, π)`.
    pub fn angle(&self, a: &Direction, b: &Direction) -> f64 {
        self.distance(a, b).min(PI)
    }

    /// Direction at distance `s` from `a` along a shortest path towards `b`.
    pub(crate) fn interpolate(&self, a: &Direction, b: &Direction, s: f64) -> Result<Direction> {
        match self {
            DirectionSpace::FiniteSet(_) => {
                if s <= 0.0 {
                    Ok(*a)
                } else if s >= self.distance(a, b) {
                    Ok(*b)
                } else {
                    Err(Error::NoGeodesic("finite direction sets have no intermediate directions".into()))
                }
            }
            DirectionSpace::Circle { alpha } => {
                let delta = (b.angle() - a.angle()).rem_euclid(*alpha);
                let signed = if delta <= alpha - delta { s } else { -s };
                self.check(Direction::Angle(a.angle() + signed))
            }
            DirectionSpace::Graph(g) => {
                let (edge, offset) = g.walk(a.graph_pos(), b.graph_pos(), s);
                Ok(Direction::Edge { edge, offset })
            }
        }
    }

    /// The shadow `{τ : min(d_N(σ, τ), π) = π}` of a direction.
    pub fn shadow(&self, sigma: &Direction) -> Shadow {
        self.shadow_with_tol(sigma, 1e-9)
    }

    pub fn shadow_with_tol(&self, sigma: &Direction, tol: f64) -> Shadow {
        match self {
            DirectionSpace::FiniteSet(m) => {
                let i = sigma.index().unwrap();
                let indices: Vec<usize> = (0..m.len()).filter(|&j| m[i][j] >= PI - tol).collect();
                if indices.is_empty() {
                    Shadow::Empty
                } else {
                    Shadow::Indices { indices }
                }
            }
            DirectionSpace::Circle { alpha } => {
                let length = alpha - 2.0 * PI;
                if length < -tol {
                    Shadow::Empty
                } else {
                    Shadow::Arc { start: (sigma.angle() + PI).rem_euclid(*alpha), length: length.max(0.0) }
                }
            }
            DirectionSpace::Graph(g) => {
                let intervals = g.superlevel(sigma.graph_pos(), PI, tol);
                if intervals.is_empty() {
                    Shadow::Empty
                } else {
                    Shadow::Intervals { intervals }
                }
            }
        }
    }

    pub fn shadow_is_nontrivial(&self, shadow: &Shadow) -> bool {
        let tol = 1e-9;
        match shadow {
            Shadow::Indices { indices } => indices.len() > 1,
            Shadow::Arc { length, .. } => *length > tol,
            Shadow::Intervals { intervals } => match self {
                DirectionSpace::Graph(g) => g.has_several_points(intervals, tol),
                _ => false,
            },
            Shadow::Empty => false,
        }
    }

    /// Whether every direction has a shadow with more than one element.
    ///
    /// Decided exactly: by enumeration for finite sets, by the arc length
    /// `α − 2π` for circles, and for graphs through the minimum over the
    /// graph of the eccentricity `max_τ d(σ, τ)`, which is piecewise linear.
    pub fn is_prismatic(&self) -> bool {
        let tol = 1e-9;
        match self {
            DirectionSpace::FiniteSet(m) => {
                (0..m.len()).all(|i| self.shadow_is_nontrivial(&self.shadow(&Direction::Index(i))))
            }
            DirectionSpace::Circle { alpha } => alpha - 2.0 * PI > tol,
            DirectionSpace::Graph(g) => {
                let (ecc, at) = g.min_eccentricity();
                if ecc > PI + tol {
                    true
                } else if ecc < PI - tol {
                    false
                } else {
                    at.into_iter().all(|(edge, s)| {
                        let (edge, offset) = g.canonical(edge, s);
                        let sh = self.shadow(&Direction::Edge { edge, offset });
                        self.shadow_is_nontrivial(&sh)
                    })
                }
            }
        }
    }

    /// Evenly spaced directions; every direction for finite sets.
    pub fn grid(&self, per_unit: usize) -> Vec<Direction> {
        match self {
            DirectionSpace::FiniteSet(m) => (0..m.len()).map(Direction::Index).collect(),
            DirectionSpace::Circle { alpha } => {
                let n = per_unit.max(1);
                (0..n).map(|i| Direction::Angle(alpha * i as f64 / n as f64)).collect()
            }
            DirectionSpace::Graph(g) => {
                let mut out = Vec::new();
                for (id, e) in g.edges().iter().enumerate() {
                    let k = ((e.length * per_unit as f64 / (2.0 * PI)).ceil() as usize).max(1);
                    for i in 0..k {
                        let (edge, offset) = g.canonical(id, e.length * i as f64 / k as f64);
                        let d = Direction::Edge { edge, offset };
                        if !out.contains(&d) {
                            out.push(d);
                        }
                    }
                }
                out
            }
        }
    }
}

pub(crate) fn circle_distance(alpha: f64, a: f64, b: f64) -> f64 {
    // ordered so that the result is exactly symmetric
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let delta = (hi - lo).rem_euclid(alpha);
    delta.min(alpha - delta)
}
