use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use super::{Point, Space};
use crate::error::{Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A finitely supported probability measure.
///
/// Atoms are distinct points with strictly positive weights summing to one;
/// repeated points are merged on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    atoms: Vec<(Point, f64)>,
}

impl Measure {
    pub fn new(space: &Space, atoms: Vec<(Point, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("measure has no atoms".into()));
        }
        let mut merged: Vec<(Point, f64)> = Vec::with_capacity(atoms.len());
        for (i, (p, w)) in atoms.into_iter().enumerate() {
            space
                .check_point(&p)
                .map_err(|e| Error::InvalidMeasure(format!("atom {i}: {e}")))?;
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidMeasure(format!("atom {i}: weight must be positive, got {w}")));
            }
            match merged.iter_mut().find(|(q, _)| *q == p) {
                Some((_, acc)) => *acc += w,
                None => merged.push((p, w)),
            }
        }
        let total: f64 = merged.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasure(format!("weights must sum to 1, got {total}")));
        }
        Ok(Measure { atoms: merged })
    }

    pub fn dirac(point: Point) -> Self {
        Measure { atoms: vec![(point, 1.0)] }
    }

    /// Equal weights on the given points.
    pub fn uniform(space: &Space, points: Vec<Point>) -> Result<Self> {
        let w = 1.0 / points.len().max(1) as f64;
        let total = w * points.len() as f64;
        let mut atoms: Vec<(Point, f64)> = points.into_iter().map(|p| (p, w)).collect();
        // absorb the rounding of 1/n into the last atom
        if let Some(last) = atoms.last_mut() {
            last.1 += 1.0 - total;
        }
        Measure::new(space, atoms)
    }

    pub fn atoms(&self) -> &[(Point, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &Point> {
        self.atoms.iter().map(|(p, _)| p)
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|(_, w)| *w)
    }

    /// Mass of the measure at a point (zero off the support).
    pub fn mass_at(&self, p: &Point) -> f64 {
        self.atoms.iter().find(|(q, _)| q == p).map_or(0.0, |(_, w)| *w)
    }

    /// Empirical measure of a sample given as counts per atom.
    pub fn from_counts(&self, counts: &[u32]) -> Measure {
        let n: u32 = counts.iter().sum();
        let atoms = self
            .atoms
            .iter()
            .zip(counts)
            .filter(|(_, &c)| c > 0)
            .map(|((p, _), &c)| (p.clone(), c as f64 / n as f64))
            .collect();
        Measure { atoms }
    }

    /// Builds a measure from already-validated atoms.
    pub(crate) fn from_parts(atoms: Vec<(Point, f64)>) -> Measure {
        Measure { atoms }
    }
}

impl Serialize for Measure {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Atom<'a> {
            point: &'a Point,
            weight: f64,
        }
        let mut seq = serializer.serialize_seq(Some(self.atoms.len()))?;
        for (point, weight) in &self.atoms {
            seq.serialize_element(&Atom { point, weight: *weight })?;
        }
        seq.end()
    }
}
