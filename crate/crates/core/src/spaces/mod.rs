//! Euclidean cones over direction spaces, and open books.
//!
//! A cone point is a pair `(direction, radius)`; every zero-radius pair is
//! the cone point `𝒪` and is stored without a direction. Distances follow the
//! law of cosines with the angle `min(d_N, π)`.

mod direction;
mod graph;
mod measure;

use std::f64::consts::PI;

use serde::Serialize;

pub use direction::{Direction, DirectionSpace, Shadow};
pub(crate) use direction::circle_distance;
pub use graph::{Edge, EdgeInterval, MetricGraph};
pub use measure::Measure;

use crate::error::{Error, Result};

/// `𝔄_K × ℝ^{d−1}` with the product metric.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenBook {
    pages: usize,
    dim: usize,
    spider: DirectionSpace,
}

impl OpenBook {
    pub fn pages(&self) -> usize {
        self.pages
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Space {
    Cone(DirectionSpace),
    OpenBook(OpenBook),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Point {
    #[serde(rename = "dir")]
    dir: Option<Direction>,
    #[serde(rename = "r")]
    radius: f64,
    #[serde(rename = "eu", skip_serializing_if = "Vec::is_empty")]
    euclid: Vec<f64>,
}

impl Point {
    /// Direction coordinate; `None` at the cone point (or on the spine).
    pub fn dir(&self) -> Option<&Direction> {
        self.dir.as_ref()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Spine coordinates of an open-book point; empty on cones.
    pub fn euclid(&self) -> &[f64] {
        &self.euclid
    }

    /// The point has zero radius (the cone point, or a spine point).
    pub fn is_apex(&self) -> bool {
        self.dir.is_none()
    }
}

impl Space {
    pub fn spider(legs: usize) -> Result<Self> {
        Ok(Space::Cone(DirectionSpace::spider(legs)?))
    }

    pub fn finite_cone(matrix: Vec<Vec<f64>>) -> Result<Self> {
        Ok(Space::Cone(DirectionSpace::finite(matrix)?))
    }

    /// Cone over a circle of length `alpha`; the plane when `alpha = 2π`.
    pub fn kale(alpha: f64) -> Result<Self> {
        Ok(Space::Cone(DirectionSpace::circle(alpha)?))
    }

    pub fn graph_cone(vertex_count: usize, edges: Vec<Edge>) -> Result<Self> {
        Ok(Space::Cone(DirectionSpace::graph(vertex_count, edges)?))
    }

    /// BHV tree space on four leaves.
    pub fn petersen_cone() -> Self {
        Space::Cone(DirectionSpace::Graph(MetricGraph::petersen()))
    }

    pub fn open_book(pages: usize, dim: usize) -> Result<Self> {
        if pages < 3 {
            return Err(Error::InvalidSpace(format!("open books need at least 3 pages, got {pages}")));
        }
        if dim < 2 {
            return Err(Error::InvalidSpace(format!("open books need dimension at least 2, got {dim}")));
        }
        Ok(Space::OpenBook(OpenBook { pages, dim, spider: DirectionSpace::spider(pages)? }))
    }

    /// Direction space at the cone point; the spider factor for open books.
    pub fn directions(&self) -> &DirectionSpace {
        match self {
            Space::Cone(ds) => ds,
            Space::OpenBook(b) => &b.spider,
        }
    }

    pub fn is_open_book(&self) -> bool {
        matches!(self, Space::OpenBook(_))
    }

    fn euclid_len(&self) -> usize {
        match self {
            Space::Cone(_) => 0,
            Space::OpenBook(b) => b.dim - 1,
        }
    }

    /// Builds and canonicalizes a point from raw parts.
    pub fn make_point(&self, dir: Option<Direction>, radius: f64, euclid: Vec<f64>) -> Result<Point> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::InvalidPoint(format!("radius must be finite and nonnegative, got {radius}")));
        }
        if euclid.len() != self.euclid_len() {
            return Err(Error::InvalidPoint(format!(
                "expected {} euclidean coordinates, got {}",
                self.euclid_len(),
                euclid.len()
            )));
        }
        if euclid.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidPoint("euclidean coordinates must be finite".into()));
        }
        let dir = if radius == 0.0 {
            None
        } else {
            let d = dir.ok_or_else(|| Error::InvalidPoint("positive radius needs a direction".into()))?;
            Some(self.directions().check(d)?)
        };
        Ok(Point { dir, radius, euclid })
    }

    pub fn point(&self, dir: Direction, radius: f64) -> Result<Point> {
        self.make_point(Some(dir), radius, Vec::new())
    }

    pub fn book_point(&self, page: usize, x0: f64, euclid: Vec<f64>) -> Result<Point> {
        self.make_point(Some(Direction::Index(page)), x0, euclid)
    }

    pub fn apex(&self) -> Point {
        Point { dir: None, radius: 0.0, euclid: vec![0.0; self.euclid_len()] }
    }

    /// Re-validates a point against this space.
    pub fn check_point(&self, p: &Point) -> Result<()> {
        let q = self.make_point(p.dir, p.radius, p.euclid.clone())?;
        if &q != p {
            return Err(Error::InvalidPoint("point is not in canonical form for this space".into()));
        }
        Ok(())
    }

    /// Angle at the cone point between the directions of two points
    /// (π whenever either of them is the cone point).
    pub fn angle_at_apex(&self, x: &Point, y: &Point) -> f64 {
        match (&x.dir, &y.dir) {
            (Some(a), Some(b)) => self.directions().angle(a, b),
            _ => PI,
        }
    }

    pub fn distance(&self, x: &Point, y: &Point) -> f64 {
        let cone = cone_part_distance(x.radius, y.radius, self.angle_at_apex(x, y));
        if x.euclid.is_empty() {
            return cone;
        }
        let sq: f64 = x.euclid.iter().zip(&y.euclid).map(|(a, b)| (a - b) * (a - b)).sum();
        if sq == 0.0 {
            cone
        } else {
            (cone * cone + sq).sqrt()
        }
    }

    /// Distance with validation of both points.
    pub fn try_distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.distance(x, y))
    }

    /// Point at fraction `t` along the geodesic from `x` to `y`.
    ///
    /// When the angle at `𝒪` is at least `π` the geodesic runs through the
    /// cone point; otherwise it is the straight segment in the planar
    /// unfolding of the sector spanned by the two directions.
    pub fn geodesic_point(&self, x: &Point, y: &Point, t: f64) -> Result<Point> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfRange(format!("geodesic fraction {t} outside [0, 1]")));
        }
        if t == 0.0 {
            return Ok(x.clone());
        }
        if t == 1.0 {
            return Ok(y.clone());
        }
        let euclid: Vec<f64> = x.euclid.iter().zip(&y.euclid).map(|(a, b)| a + t * (b - a)).collect();
        let (s, u) = (x.radius, y.radius);
        let theta = self.angle_at_apex(x, y);
        let (dir, radius) = if theta >= PI {
            let pos = t * (s + u);
            if pos <= s {
                (x.dir, s - pos)
            } else {
                (y.dir, pos - s)
            }
        } else if theta == 0.0 {
            (x.dir, s + t * (u - s))
        } else {
            let px = (1.0 - t) * s + t * u * theta.cos();
            let py = t * u * theta.sin();
            let phi = py.atan2(px).clamp(0.0, theta);
            let (a, b) = (x.dir.as_ref().unwrap(), y.dir.as_ref().unwrap());
            (Some(self.directions().interpolate(a, b, phi)?), px.hypot(py))
        };
        self.make_point(dir, radius, euclid)
    }
}

fn cone_part_distance(s: f64, t: f64, theta: f64) -> f64 {
    if theta == 0.0 {
        (s - t).abs()
    } else if theta >= PI {
        s + t
    } else {
        let h = (0.5 * theta).sin();
        ((s - t) * (s - t) + 4.0 * s * t * h * h).sqrt()
    }
}

/// Angle at `x` of the comparison triangle in the model plane of curvature
/// `kappa`, given the three side lengths.
pub fn comparison_angle(kappa: f64, dxy: f64, dxz: f64, dyz: f64) -> Result<f64> {
    if !(dxy > 0.0 && dxz > 0.0) {
        return Err(Error::DegenerateTriangle("sides at the vertex must be positive".into()));
    }
    if dyz < 0.0 || !dyz.is_finite() || !dxy.is_finite() || !dxz.is_finite() {
        return Err(Error::DegenerateTriangle("side lengths must be finite and nonnegative".into()));
    }
    let slack = 1e-12 * (dxy + dxz + dyz);
    if dyz > dxy + dxz + slack || dxy > dxz + dyz + slack || dxz > dxy + dyz + slack {
        return Err(Error::DegenerateTriangle("side lengths violate the triangle inequality".into()));
    }
    let cos = if kappa < 0.0 {
        let k = (-kappa).sqrt();
        let (a, b, c) = (k * dxy, k * dxz, k * dyz);
        (a.cosh() * b.cosh() - c.cosh()) / (a.sinh() * b.sinh())
    } else if kappa == 0.0 {
        (dxy * dxy + dxz * dxz - dyz * dyz) / (2.0 * dxy * dxz)
    } else {
        let r = PI / kappa.sqrt();
        if dxy + dxz + dyz >= 2.0 * r {
            return Err(Error::DegenerateTriangle(format!("perimeter must be below {}", 2.0 * r)));
        }
        let k = kappa.sqrt();
        let (a, b, c) = (k * dxy, k * dxz, k * dyz);
        (c.cos() - a.cos() * b.cos()) / (a.sin() * b.sin())
    };
    Ok(cos.clamp(-1.0, 1.0).acos())
}
