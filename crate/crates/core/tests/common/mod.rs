#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stickygeom_core::spaces::{Direction, DirectionSpace, Edge, Measure, Point, Space};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Geodesic spaces used by the property suites.
pub fn geodesic_variants() -> Vec<(&'static str, Space)> {
    vec![
        ("spider4", Space::spider(4).unwrap()),
        ("kale3pi", Space::kale(3.0 * PI).unwrap()),
        ("kale2pi+0.3", Space::kale(2.0 * PI + 0.3).unwrap()),
        ("plane", Space::kale(2.0 * PI).unwrap()),
        ("petersen", Space::petersen_cone()),
        ("book3x2", Space::open_book(3, 2).unwrap()),
    ]
}

/// A finite cone whose directions are not all at angle π.
pub fn finite_cone() -> Space {
    let m = vec![
        vec![0.0, 1.2, 2.5, 3.6],
        vec![1.2, 0.0, 1.5, 2.7],
        vec![2.5, 1.5, 0.0, 1.9],
        vec![3.6, 2.7, 1.9, 0.0],
    ];
    Space::finite_cone(m).unwrap()
}

/// A theta graph: two vertices joined by three paths of length `π`.
pub fn theta_graph() -> Space {
    let h = PI / 2.0;
    let edges = vec![
        Edge { u: 0, v: 2, length: h },
        Edge { u: 2, v: 1, length: h },
        Edge { u: 0, v: 3, length: h },
        Edge { u: 3, v: 1, length: h },
        Edge { u: 0, v: 1, length: PI },
    ];
    Space::graph_cone(4, edges).unwrap()
}

pub fn random_direction<R: Rng>(space: &Space, rng: &mut R) -> Direction {
    match space.directions() {
        DirectionSpace::FiniteSet(m) => Direction::Index(rng.gen_range(0..m.len())),
        DirectionSpace::Circle { alpha } => Direction::Angle(rng.gen_range(0.0..*alpha)),
        DirectionSpace::Graph(g) => {
            let e = rng.gen_range(0..g.edges().len());
            let len = g.edges()[e].length;
            space.directions().check(Direction::Edge { edge: e, offset: rng.gen_range(0.0..len) }).unwrap()
        }
    }
}

/// Random point with radius up to `rmax`; one in ten is the cone point.
pub fn random_point<R: Rng>(space: &Space, rng: &mut R, rmax: f64) -> Point {
    let euclid: Vec<f64> = match space {
        Space::OpenBook(b) => (0..b.dim() - 1).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        Space::Cone(_) => Vec::new(),
    };
    if rng.gen_bool(0.1) {
        return space.make_point(None, 0.0, euclid).unwrap();
    }
    let dir = random_direction(space, rng);
    space.make_point(Some(dir), rng.gen_range(0.05..rmax), euclid).unwrap()
}

pub fn random_weights<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|w| w / s).collect()
}

pub fn measure_from(space: &Space, points: Vec<Point>, weights: &[f64]) -> Measure {
    Measure::new(space, points.into_iter().zip(weights.iter().copied()).collect()).unwrap()
}

/// Random measure with between 1 and `max_atoms` atoms.
pub fn random_measure<R: Rng>(space: &Space, rng: &mut R, max_atoms: usize) -> Measure {
    let k = rng.gen_range(1..=max_atoms);
    let pts = (0..k).map(|_| random_point(space, rng, 2.0)).collect();
    let w = random_weights(rng, k);
    measure_from(space, pts, &w)
}
