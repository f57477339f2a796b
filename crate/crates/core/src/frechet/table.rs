//! Pulls of a fixed atom set tabulated over the direction space.
//!
//! Resampling keeps the support of a measure and only changes its weights,
//! so Monte Carlo code builds one table per support and evaluates
//! `min_σ ∇_σ F(𝒪)` for many weight vectors. On circles and graphs the
//! direction space is cut at every breakpoint; on each piece every pull is
//! `p cos x + q sin x + g`, so the minimum over a piece is closed form.

use std::f64::consts::{PI, TAU};

use super::circle_angle;
use crate::spaces::{Direction, DirectionSpace, Point, Space};

#[derive(Debug, Clone)]
struct Piece {
    lo: f64,
    hi: f64,
    edge: Option<usize>,
    /// per atom `(p, q, g)`
    coef: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone)]
enum Kind {
    /// `pulls[σ][i]`
    Finite(Vec<Vec<f64>>),
    Pieces(Vec<Piece>),
}

/// Pull table for a fixed support.
#[derive(Debug, Clone)]
pub struct PullTable {
    kind: Kind,
    atoms: usize,
    graph: Option<crate::spaces::MetricGraph>,
}

impl PullTable {
    pub fn new(space: &Space, points: &[Point]) -> PullTable {
        let atoms = points.len();
        let ds = space.directions();
        match ds {
            DirectionSpace::FiniteSet(m) => {
                let pulls = (0..m.len())
                    .map(|s| points.iter().map(|z| super::pull(space, &Direction::Index(s), z)).collect())
                    .collect();
                PullTable { kind: Kind::Finite(pulls), atoms, graph: None }
            }
            DirectionSpace::Circle { alpha } => PullTable {
                kind: Kind::Pieces(circle_pieces(*alpha, points)),
                atoms,
                graph: None,
            },
            DirectionSpace::Graph(g) => PullTable {
                kind: Kind::Pieces(graph_pieces(g, points)),
                atoms,
                graph: Some(g.clone()),
            },
        }
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    /// `min_σ −Σ w_i φ_σ(z_i)` together with a minimizing direction.
    pub fn min_derivative(&self, weights: &[f64]) -> (Direction, f64) {
        debug_assert_eq!(weights.len(), self.atoms);
        match &self.kind {
            Kind::Finite(pulls) => {
                let mut best = (0, f64::INFINITY);
                for (s, row) in pulls.iter().enumerate() {
                    let v = -dot(row, weights);
                    if v < best.1 {
                        best = (s, v);
                    }
                }
                (Direction::Index(best.0), best.1)
            }
            Kind::Pieces(pieces) => {
                let mut best = (f64::INFINITY, 0.0, None);
                for p in pieces {
                    let (mut a, mut b, mut g) = (0.0, 0.0, 0.0);
                    for (&(pc, qc, gc), &w) in p.coef.iter().zip(weights) {
                        a += w * pc;
                        b += w * qc;
                        g += w * gc;
                    }
                    let value = |x: f64| -(a * x.cos() + b * x.sin() + g);
                    let mut consider = |x: f64| {
                        let v = value(x);
                        if v < best.0 {
                            best = (v, x, p.edge);
                        }
                    };
                    consider(p.lo);
                    consider(p.hi);
                    if a != 0.0 || b != 0.0 {
                        let peak = b.atan2(a);
                        let k = ((p.lo - peak) / TAU).ceil();
                        let x = peak + k * TAU;
                        if x <= p.hi {
                            consider(x);
                        }
                    }
                }
                let (v, x, edge) = best;
                let dir = match (edge, &self.graph) {
                    (Some(e), Some(g)) => {
                        let (edge, offset) = g.canonical(e, x);
                        Direction::Edge { edge, offset }
                    }
                    _ => Direction::Angle(x),
                };
                (dir, v)
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Coefficients of `r cos(s x + k)` with the distance capped at `π`.
fn coef(r: f64, dist_at_mid: f64, slope: f64, icpt: f64) -> (f64, f64, f64) {
    if dist_at_mid >= PI {
        (0.0, 0.0, -r)
    } else if slope == 0.0 {
        (0.0, 0.0, r * icpt.cos())
    } else {
        (r * icpt.cos(), -slope * r * icpt.sin(), 0.0)
    }
}

fn circle_pieces(alpha: f64, points: &[Point]) -> Vec<Piece> {
    let mut breaks = vec![0.0, alpha];
    for z in points {
        if let Some(d) = z.dir() {
            let t = d.angle();
            for b in [t, t + PI, t - PI, t + 0.5 * alpha] {
                breaks.push(b.rem_euclid(alpha));
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
    breaks
        .windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            let mid = 0.5 * (lo + hi);
            let coef = points
                .iter()
                .map(|z| match z.dir() {
                    None => (0.0, 0.0, 0.0),
                    Some(d) => {
                        let t = d.angle();
                        let delta = (mid - t).rem_euclid(alpha);
                        let dm = circle_angle(alpha, mid, t);
                        // distance is s·x + k near the midpoint
                        let (s, k) = if delta <= alpha - delta { (1.0, delta - mid) } else { (-1.0, alpha - delta + mid) };
                        coef(z.radius(), dm, s, k)
                    }
                })
                .collect();
            Piece { lo, hi, edge: None, coef }
        })
        .collect()
}

fn graph_pieces(g: &crate::spaces::MetricGraph, points: &[Point]) -> Vec<Piece> {
    let positions: Vec<Option<(usize, f64)>> = points.iter().map(|z| z.dir().map(|d| d.graph_pos())).collect();
    let mut out = Vec::new();
    for (edge, e) in g.edges().iter().enumerate() {
        let profiles: Vec<_> = positions.iter().map(|p| p.map(|a| g.profile(a, edge))).collect();
        let mut breaks = vec![0.0, e.length];
        for prof in profiles.iter().flatten() {
            for piece in prof {
                breaks.push(piece.lo);
                breaks.push(piece.hi);
                for (i, l) in piece.lines.iter().enumerate() {
                    if let Some(o) = l.solve(PI) {
                        breaks.push(o);
                    }
                    for m in &piece.lines[i + 1..] {
                        if let Some(o) = l.crossing(m) {
                            breaks.push(o);
                        }
                    }
                }
            }
        }
        breaks.retain(|&o| (0.0..=e.length).contains(&o));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
        for w in breaks.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mid = 0.5 * (lo + hi);
            let coef = points
                .iter()
                .zip(&profiles)
                .map(|(z, prof)| match prof {
                    None => (0.0, 0.0, 0.0),
                    Some(prof) => {
                        let piece = prof
                            .iter()
                            .find(|p| p.lo <= mid && mid <= p.hi)
                            .expect("profile covers the edge");
                        let dm = piece.eval(mid);
                        let line = piece.lines.iter().find(|l| l.at(mid) == dm).expect("nonempty piece");
                        coef(z.radius(), dm, line.slope, line.icpt)
                    }
                })
                .collect();
            out.push(Piece { lo, hi, edge: Some(edge), coef });
        }
    }
    out
}
