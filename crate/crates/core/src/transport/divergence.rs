use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::spaces::{Measure, Point, Space};

type Generator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied convex generator with `f(1) = 0` and finite `f(0)`.
#[derive(Clone)]
pub struct CustomGenerator {
    name: String,
    f: Generator,
    slope_at_infinity: f64,
}

impl CustomGenerator {
    /// `slope_at_infinity` is `lim f(x)/x` as `x → ∞`, charged per unit of
    /// mass that the second measure does not cover (may be `+∞`).
    pub fn new<F>(name: impl Into<String>, f: F, slope_at_infinity: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if f(1.0).abs() > 1e-12 {
            return Err(Error::OutOfRange("generator must vanish at 1".into()));
        }
        if !f(0.0).is_finite() {
            return Err(Error::OutOfRange("generator must be finite at 0".into()));
        }
        if slope_at_infinity.is_nan() {
            return Err(Error::OutOfRange("slope at infinity must be a number".into()));
        }
        Ok(CustomGenerator { name: name.into(), f: Arc::new(f), slope_at_infinity })
    }
}

impl fmt::Debug for CustomGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomGenerator").field("name", &self.name).finish()
    }
}

#[derive(Debug, Clone)]
pub enum FDivergenceKind {
    TotalVariation,
    KullbackLeibler,
    JensenShannon,
    SquaredHellinger,
    Custom(CustomGenerator),
}

impl FDivergenceKind {
    pub const BUILT_IN: [FDivergenceKind; 4] = [
        FDivergenceKind::TotalVariation,
        FDivergenceKind::KullbackLeibler,
        FDivergenceKind::JensenShannon,
        FDivergenceKind::SquaredHellinger,
    ];

    pub fn name(&self) -> &str {
        match self {
            FDivergenceKind::TotalVariation => "tv",
            FDivergenceKind::KullbackLeibler => "kl",
            FDivergenceKind::JensenShannon => "js",
            FDivergenceKind::SquaredHellinger => "hellinger",
            FDivergenceKind::Custom(c) => &c.name,
        }
    }

    pub fn from_name(name: &str) -> Option<FDivergenceKind> {
        Self::BUILT_IN.into_iter().find(|k| k.name() == name)
    }

    /// The generator `f`, extended to `x = 0` by continuity.
    pub fn f(&self, x: f64) -> f64 {
        match self {
            FDivergenceKind::TotalVariation => 0.5 * (x - 1.0).abs(),
            FDivergenceKind::KullbackLeibler => xlogx(x),
            FDivergenceKind::JensenShannon => -(x + 1.0) * ((x + 1.0) / 2.0).ln() + xlogx(x),
            FDivergenceKind::SquaredHellinger => 2.0 * (1.0 - x.sqrt()),
            FDivergenceKind::Custom(c) => (c.f)(x),
        }
    }

    /// `f'(∞) = lim f(x)/x`.
    pub fn slope_at_infinity(&self) -> f64 {
        match self {
            FDivergenceKind::TotalVariation => 0.5,
            FDivergenceKind::KullbackLeibler => f64::INFINITY,
            FDivergenceKind::JensenShannon => std::f64::consts::LN_2,
            FDivergenceKind::SquaredHellinger => 0.0,
            FDivergenceKind::Custom(c) => c.slope_at_infinity,
        }
    }

    fn finish(&self, d: f64) -> f64 {
        match self {
            FDivergenceKind::TotalVariation => d.clamp(0.0, 1.0),
            FDivergenceKind::Custom(_) => d,
            _ => d.max(0.0),
        }
    }
}

impl Serialize for FDivergenceKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `D_f(P‖Q) = Σ q f(p/q)` over the union support, with `p f'(∞)` for mass
/// outside the support of `Q`.
pub fn f_divergence(p: &Measure, q: &Measure, kind: &FDivergenceKind) -> f64 {
    let mut d = 0.0;
    for (z, qw) in q.atoms() {
        d += qw * kind.f(p.mass_at(z) / qw);
    }
    let uncovered: f64 = p.atoms().iter().filter(|(z, _)| q.mass_at(z) == 0.0).map(|(_, w)| w).sum();
    if uncovered > 0.0 {
        d += uncovered * kind.slope_at_infinity();
    }
    kind.finish(d)
}

/// Closed form of `D_f(P‖P_y^t)` with `w_y = P({y})`:
/// `(1−t)(1−w_y) f(1/(1−t)) + (t + (1−t)w_y) f(w_y/((1−t)w_y + t))`.
pub fn perturbed_divergence(space: &Space, p: &Measure, y: &Point, t: f64, kind: &FDivergenceKind) -> Result<f64> {
    space.check_point(y)?;
    if !(0.0..1.0).contains(&t) {
        return Err(Error::OutOfRange(format!("t must lie in [0, 1), got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let wy = p.mass_at(y);
    let rest = (1.0 - t) * (1.0 - wy);
    let mut d = if rest > 0.0 { rest * kind.f(1.0 / (1.0 - t)) } else { 0.0 };
    d += (t + (1.0 - t) * wy) * kind.f(wy / ((1.0 - t) * wy + t));
    Ok(kind.finish(d))
}
