//! Fréchet functions, pulls and directional derivatives at the cone point.
//!
//! For a cone, the Fréchet function restricted to the ray in direction `σ`
//! is the parabola `F(𝒪) + r ∇_σ F(𝒪) + r²/2`, so the mean is
//! `(σ*, max(0, −∇_σ* F(𝒪)))` with `σ*` minimizing the directional
//! derivative. Open books reduce to the spider marginal plus a Euclidean mean.

mod curvature;
mod search;
mod table;

use std::f64::consts::PI;

use serde::Serialize;

pub use curvature::{c_kappa_epsilon, c_kappa_report, psi, CKappaReport};
pub use search::golden_section;
pub use table::PullTable;

use crate::error::{Error, Result};
use crate::spaces::{Direction, DirectionSpace, Measure, Point, Space};

/// Means closer to the cone point than this (relative to the first moment)
/// are reported as the cone point itself.
pub const APEX_TOL: f64 = 1e-12;

/// Derivatives at `𝒪` sampled on a set of directions, with the exact minimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeProfile {
    pub values: Vec<(Direction, f64)>,
    pub min_value: f64,
    pub argmin: Direction,
    /// `L_𝒪 = Σ w_i d(𝒪, z_i)`, the Lipschitz constant of `σ ↦ ∇_σ F`.
    pub lipschitz: f64,
}

pub(crate) fn circle_angle(alpha: f64, a: f64, b: f64) -> f64 {
    crate::spaces::circle_distance(alpha, a, b).min(PI)
}

/// `½ Σ w_i d²(x, z_i)`, or the Fréchet difference against `anchor`.
pub fn frechet_value(space: &Space, measure: &Measure, x: &Point, anchor: Option<&Point>) -> f64 {
    measure
        .atoms()
        .iter()
        .map(|(z, w)| {
            let dx = space.distance(x, z);
            let sq = match anchor {
                Some(y) => {
                    let dy = space.distance(y, z);
                    (dx - dy) * (dx + dy)
                }
                None => dx * dx,
            };
            0.5 * w * sq
        })
        .sum()
}

/// Pull of `z` in direction `σ` at the cone point: `r_z cos(min(d(σ, dir z), π))`.
///
/// On open books `σ` is a page and the pull is the folding map of `z`.
pub fn pull(space: &Space, sigma: &Direction, z: &Point) -> f64 {
    match z.dir() {
        None => 0.0,
        Some(d) => z.radius() * space.directions().angle(sigma, d).cos(),
    }
}

/// `∇_σ F_P(𝒪) = −Σ w_i φ_σ(z_i)`.
pub fn directional_derivative(space: &Space, measure: &Measure, sigma: &Direction) -> f64 {
    -measure.atoms().iter().map(|(z, w)| w * pull(space, sigma, z)).sum::<f64>()
}

fn first_moment(measure: &Measure) -> f64 {
    measure.atoms().iter().map(|(z, w)| w * z.radius()).sum()
}

fn tie_tol(measure: &Measure) -> f64 {
    1e-12 * first_moment(measure).max(1.0)
}

/// Direction of steepest descent at `𝒪` and the derivative there.
///
/// Exact enumeration on finite direction sets; breakpoint-aware golden
/// section on circles and graphs. Ties go to the smallest coordinate.
pub fn min_directional_derivative(space: &Space, measure: &Measure) -> (Direction, f64) {
    let tol = tie_tol(measure);
    match space.directions() {
        DirectionSpace::FiniteSet(m) => {
            let mut best = search::Best::new(
                Direction::Index(0),
                directional_derivative(space, measure, &Direction::Index(0)),
                tol,
            );
            for i in 1..m.len() {
                let d = Direction::Index(i);
                best.offer(d, directional_derivative(space, measure, &d));
            }
            (best.dir, best.value)
        }
        DirectionSpace::Circle { alpha } => {
            let atoms: Vec<(f64, f64)> = measure
                .atoms()
                .iter()
                .filter_map(|(z, w)| z.dir().map(|d| (d.angle(), w * z.radius())))
                .collect();
            let (theta, v) = search::min_on_circle(*alpha, &atoms, tol);
            (Direction::Angle(theta), v)
        }
        DirectionSpace::Graph(g) => {
            let atoms: Vec<((usize, f64), f64)> = measure
                .atoms()
                .iter()
                .filter_map(|(z, w)| z.dir().map(|d| (d.graph_pos(), w * z.radius())))
                .collect();
            let ((edge, offset), v) = search::min_on_graph(g, &atoms, tol);
            (Direction::Edge { edge, offset }, v)
        }
    }
}

/// Derivatives on `grid` (every direction when the direction set is finite
/// and no grid is given) together with the exact minimum.
pub fn derivative_profile(space: &Space, measure: &Measure, grid: Option<&[Direction]>) -> DerivativeProfile {
    let dirs = match grid {
        Some(g) => g.to_vec(),
        None => space.directions().grid(360),
    };
    let values = dirs
        .into_iter()
        .map(|d| (d, directional_derivative(space, measure, &d)))
        .collect();
    let (argmin, min_value) = min_directional_derivative(space, measure);
    DerivativeProfile { values, min_value, argmin, lipschitz: first_moment(measure) }
}

/// Radius of the cone mean given the minimal directional derivative.
pub(crate) fn mean_radius(measure: &Measure, min_value: f64) -> f64 {
    let r = -min_value;
    if r <= APEX_TOL * first_moment(measure).max(1.0) {
        0.0
    } else {
        r
    }
}

/// Fréchet mean on a cone: `(σ*, 0 ∨ −∇_σ* F_P(𝒪))`.
pub fn cone_mean(space: &Space, measure: &Measure) -> Result<Point> {
    if space.is_open_book() {
        return Err(Error::Unsupported("use open_book_mean for open books".into()));
    }
    let (dir, min) = min_directional_derivative(space, measure);
    space.make_point(Some(dir), mean_radius(measure, min), Vec::new())
}

/// Fréchet mean on an open book: spider-marginal mean paired with the
/// Euclidean mean of the spine coordinates.
pub fn open_book_mean(space: &Space, measure: &Measure) -> Result<Point> {
    let Space::OpenBook(book) = space else {
        return Err(Error::Unsupported("open_book_mean needs an open book".into()));
    };
    let (dir, min) = min_directional_derivative(space, measure);
    let mut euclid = vec![0.0; book.dim() - 1];
    for (z, w) in measure.atoms() {
        for (acc, x) in euclid.iter_mut().zip(z.euclid()) {
            *acc += w * x;
        }
    }
    space.make_point(Some(dir), mean_radius(measure, min), euclid)
}

/// Fréchet mean on any supported space.
pub fn mean(space: &Space, measure: &Measure) -> Result<Point> {
    if space.is_open_book() {
        open_book_mean(space, measure)
    } else {
        cone_mean(space, measure)
    }
}

/// `L_x = Σ w_i d(x, z_i)`.
pub fn lipschitz_l(space: &Space, measure: &Measure, x: &Point) -> f64 {
    measure.atoms().iter().map(|(z, w)| w * space.distance(x, z)).sum()
}
