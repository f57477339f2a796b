//! Minimization of a directional-derivative profile over a continuous
//! direction space.
//!
//! The profile `σ ↦ −Σ c_i cos(min(d(σ, σ_i), π))` is smooth between
//! breakpoints: where some `d(σ, σ_i)` reaches `π` (the cap) or has a kink.
//! Each breakpoint interval is split into pieces no longer than `π/2`, on
//! which the profile is a single sinusoid and hence unimodal, and every
//! piece is searched by golden section. Breakpoints are kept as candidates.

use std::f64::consts::PI;

use crate::spaces::{Direction, MetricGraph};

pub const GOLDEN_TOL: f64 = 1e-10;
const MAX_PIECE: f64 = PI / 2.0;

/// Golden-section search for a minimum of `f` on `[a, b]`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Best candidate so far, with ties resolved to the smallest coordinate.
pub(crate) struct Best {
    pub dir: Direction,
    pub value: f64,
    tie_tol: f64,
}

impl Best {
    pub fn new(dir: Direction, value: f64, tie_tol: f64) -> Self {
        Best { dir, value, tie_tol }
    }

    /// Values within `tie_tol` count as ties only between well-separated
    /// candidates; nearby candidates sit on the same local minimum.
    pub fn offer(&mut self, dir: Direction, value: f64) {
        let tie = (value - self.value).abs() <= self.tie_tol && !near(&dir, &self.dir);
        let wins = if tie { dir.cmp_coord(&self.dir).is_lt() } else { value < self.value };
        if wins {
            self.dir = dir;
            self.value = value;
        }
    }
}

fn near(a: &Direction, b: &Direction) -> bool {
    const SEP: f64 = 1e-6;
    match (a, b) {
        (Direction::Angle(x), Direction::Angle(y)) => (x - y).abs() < SEP,
        (Direction::Edge { edge: e1, offset: o1 }, Direction::Edge { edge: e2, offset: o2 }) => {
            e1 == e2 && (o1 - o2).abs() < SEP
        }
        _ => a == b,
    }
}

/// Exact minimizer of a sinusoid `A cos x + B sin x + C` on `[lo, hi]`,
/// fitted through the endpoints and midpoint.
fn sinusoid_min<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Option<f64> {
    let h = 0.5 * (hi - lo);
    if h < 1e-3 {
        return None;
    }
    let mid = lo + h;
    let (fm, f0, fp) = (f(lo), f(mid), f(hi));
    let b = (fp - fm) / (2.0 * h.sin());
    let a = (0.5 * (fp + fm) - f0) / (h.cos() - 1.0);
    if a == 0.0 && b == 0.0 {
        return None;
    }
    let x = mid + (-b).atan2(-a);
    (lo..=hi).contains(&x).then_some(x)
}

/// Searches the sorted breakpoint list on `[lo, hi]`, feeding candidates to `emit`.
fn search_between<F, E>(f: &F, breaks: &[f64], emit: &mut E)
where
    F: Fn(f64) -> f64,
    E: FnMut(f64, f64),
{
    for &b in breaks {
        emit(b, f(b));
    }
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= GOLDEN_TOL {
            continue;
        }
        let pieces = ((b - a) / MAX_PIECE).ceil().max(1.0) as usize;
        let step = (b - a) / pieces as f64;
        for k in 0..pieces {
            let lo = a + step * k as f64;
            let hi = if k + 1 == pieces { b } else { lo + step };
            let (x, fx) = golden_section(f, lo, hi, GOLDEN_TOL);
            // polish the golden-section point with the closed-form minimizer
            match sinusoid_min(f, lo, hi).map(|y| (y, f(y))) {
                Some((y, fy)) if fy <= fx => emit(y, fy),
                _ => emit(x, fx),
            }
            emit(hi, f(hi));
        }
    }
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
    v
}

/// Minimum of `θ ↦ −Σ c_i cos(min(d_α(θ, θ_i), π))` on a circle of length `alpha`.
pub(crate) fn min_on_circle(alpha: f64, atoms: &[(f64, f64)], tie_tol: f64) -> (f64, f64) {
    let f = |theta: f64| -> f64 {
        -atoms
            .iter()
            .map(|&(t, c)| c * super::circle_angle(alpha, theta, t).cos())
            .sum::<f64>()
    };
    let mut breaks = vec![0.0, alpha];
    for &(t, _) in atoms {
        for b in [t, t + PI, t - PI, t + 0.5 * alpha] {
            breaks.push(b.rem_euclid(alpha));
        }
    }
    let breaks = sorted_unique(breaks);
    let mut best = Best::new(Direction::Angle(0.0), f(0.0), tie_tol);
    search_between(&f, &breaks, &mut |x, fx| {
        let x = if x >= alpha { 0.0 } else { x };
        best.offer(Direction::Angle(x), fx);
    });
    (best.dir.angle(), best.value)
}

/// Minimum over a metric graph; atoms are `(position, c_i)` pairs.
pub(crate) fn min_on_graph(
    g: &MetricGraph,
    atoms: &[((usize, f64), f64)],
    tie_tol: f64,
) -> ((usize, f64), f64) {
    let start = g.canonical(0, 0.0);
    let value_at = |pos: (usize, f64)| -> f64 {
        -atoms
            .iter()
            .map(|&(a, c)| c * g.distance(pos, a).min(PI).cos())
            .sum::<f64>()
    };
    let mut best = Best::new(Direction::Edge { edge: start.0, offset: start.1 }, value_at(start), tie_tol);
    for (edge, e) in g.edges().iter().enumerate() {
        let mut breaks = vec![0.0, e.length];
        for &(a, _) in atoms {
            for piece in g.profile(a, edge) {
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
        let breaks = sorted_unique(breaks.into_iter().filter(|&o| (0.0..=e.length).contains(&o)).collect());
        let f = |o: f64| value_at((edge, o));
        search_between(&f, &breaks, &mut |o, fo| {
            let (ce, co) = g.canonical(edge, o.clamp(0.0, e.length));
            best.offer(Direction::Edge { edge: ce, offset: co }, fo);
        });
    }
    (best.dir.graph_pos(), best.value)
}
