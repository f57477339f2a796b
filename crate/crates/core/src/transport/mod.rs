//! Wasserstein distances and f-divergences between finitely supported measures.

mod divergence;
mod simplex;

pub use divergence::{f_divergence, perturbed_divergence, CustomGenerator, FDivergenceKind};
pub use simplex::transport_cost;

use crate::error::{Error, Result};
use crate::spaces::{Measure, Point, Space};

/// `(1−t)·P + t·δ_y`, merging `y` into an existing atom.
pub fn perturbed_measure(space: &Space, p: &Measure, y: &Point, t: f64) -> Result<Measure> {
    space.check_point(y)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfRange(format!("t must lie in [0, 1], got {t}")));
    }
    if t == 0.0 {
        return Ok(p.clone());
    }
    if t == 1.0 {
        return Ok(Measure::dirac(y.clone()));
    }
    let mut atoms: Vec<(Point, f64)> = p.atoms().iter().map(|(z, w)| (z.clone(), (1.0 - t) * w)).collect();
    match atoms.iter_mut().find(|(z, _)| z == y) {
        Some((_, w)) => *w += t,
        None => atoms.push((y.clone(), t)),
    }
    Ok(Measure::from_parts(atoms))
}

/// Largest distance between two atoms of either measure.
pub fn support_diameter(space: &Space, p: &Measure, q: &Measure) -> f64 {
    let pts: Vec<&Point> = p.points().chain(q.points()).collect();
    let mut d: f64 = 0.0;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            d = d.max(space.distance(a, b));
        }
    }
    d
}

/// `W_q(P, Q)` from the exact transportation problem with costs `d^q`.
pub fn wq_lp(space: &Space, p: &Measure, q: &Measure, exponent: f64) -> Result<f64> {
    if !(exponent >= 1.0 && exponent.is_finite()) {
        return Err(Error::OutOfRange(format!("exponent must be at least 1, got {exponent}")));
    }
    let cost: Vec<Vec<f64>> = p
        .points()
        .map(|x| q.points().map(|y| space.distance(x, y).powf(exponent)).collect())
        .collect();
    let a: Vec<f64> = p.weights().collect();
    let b: Vec<f64> = q.weights().collect();
    Ok(transport_cost(&a, &b, &cost)?.powf(1.0 / exponent))
}

/// `W_1` on a spider (any finite cone whose directions are pairwise at angle
/// `≥ π`, which makes the cone a metric tree): per leg, the integral over
/// cut positions `s` of `|P(beyond s) − Q(beyond s)|`.
///
/// Other spaces are not metric trees and fall back to [`wq_lp`].
pub fn w1_tree(space: &Space, p: &Measure, q: &Measure) -> Result<f64> {
    let legs = match space {
        Space::Cone(ds) if ds.is_spider_like() => ds.finite_len().unwrap(),
        _ => return wq_lp(space, p, q, 1.0),
    };
    let mut per_leg: Vec<Vec<(f64, f64)>> = vec![Vec::new(); legs];
    for (z, w) in p.atoms() {
        if let Some(d) = z.dir() {
            per_leg[d.index().unwrap()].push((z.radius(), *w));
        }
    }
    for (z, w) in q.atoms() {
        if let Some(d) = z.dir() {
            per_leg[d.index().unwrap()].push((z.radius(), -w));
        }
    }
    let mut total = 0.0;
    for mut leg in per_leg {
        // sweep inward from the far end, carrying the mass difference beyond the cut
        leg.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut beyond = 0.0;
        for (k, &(r, w)) in leg.iter().enumerate() {
            beyond += w;
            let next = leg.get(k + 1).map_or(0.0, |x| x.0);
            total += beyond.abs() * (r - next);
        }
    }
    Ok(total)
}
