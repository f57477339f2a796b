//! Stickiness of Fréchet means at the cone point.
//!
//! The computable certificate is the minimal directional derivative
//! `c_min = min_σ ∇_σ F_P(𝒪)`: the mean sticks to `𝒪` when it is positive.
//! Perturbation thresholds and sample-mean frequencies are the other flavors.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frechet::{self, PullTable};
use crate::sampling::{derive_seed, mean_se, run_trials, trial_rng, CountSampler};
use crate::spaces::{Direction, DirectionSpace, Measure, Point, Space};
use crate::transport::perturbed_measure;

/// Tolerance on `c_min` separating the three labels.
pub const STICKY_TOL: f64 = 1e-10;
const ZERO_PULL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Sticky,
    Boundary,
    Nonsticky,
}

impl Label {
    pub fn from_c_min(c_min: f64) -> Label {
        if c_min > STICKY_TOL {
            Label::Sticky
        } else if c_min < -STICKY_TOL {
            Label::Nonsticky
        } else {
            Label::Boundary
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Sticky => "sticky",
            Label::Boundary => "boundary",
            Label::Nonsticky => "nonsticky",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StickinessReport {
    pub label: Label,
    pub c_min: f64,
    pub argmin_direction: Direction,
    /// Evaluated at the cone point (the spine point `(𝒪, ē)` on open books).
    pub pull_condition: bool,
    pub mean: Point,
}

/// Directional classification of `P` at the cone point (the spine on open books).
pub fn classify(space: &Space, measure: &Measure) -> StickinessReport {
    let (argmin_direction, c_min) = frechet::min_directional_derivative(space, measure);
    let label = Label::from_c_min(c_min);
    let mut mean = frechet::mean(space, measure).expect("mean of a validated measure");
    if label != Label::Nonsticky && !mean.is_apex() {
        mean = space
            .make_point(None, 0.0, mean.euclid().to_vec())
            .expect("spine point of a valid mean");
    }
    StickinessReport {
        label,
        c_min,
        argmin_direction,
        pull_condition: pull_condition(space, measure),
        mean,
    }
}

/// First folded moments `m_j = Σ w_i φ_j(z_i)` of an open book, one per page.
pub fn folded_moments(space: &Space, measure: &Measure) -> Result<Vec<f64>> {
    let Space::OpenBook(book) = space else {
        return Err(Error::Unsupported("folded moments need an open book".into()));
    };
    Ok((0..book.pages())
        .map(|j| -frechet::directional_derivative(space, measure, &Direction::Index(j)))
        .collect())
}

/// `m_θ = Σ w_i r_i cos(min(π, d_α(θ, θ_i)))` on a kale.
pub fn kale_folded_moment(space: &Space, measure: &Measure, theta: f64) -> Result<f64> {
    let Space::Cone(DirectionSpace::Circle { .. }) = space else {
        return Err(Error::Unsupported("folded moments in an angle need a circle cone".into()));
    };
    let d = space.directions().check(Direction::Angle(theta))?;
    Ok(-frechet::directional_derivative(space, measure, &d))
}

/// `sup_θ m_θ` with a maximizing angle.
pub fn kale_max_folded_moment(space: &Space, measure: &Measure) -> Result<(f64, f64)> {
    let Space::Cone(DirectionSpace::Circle { .. }) = space else {
        return Err(Error::Unsupported("folded moments in an angle need a circle cone".into()));
    };
    let (d, v) = frechet::min_directional_derivative(space, measure);
    Ok((d.angle(), -v))
}

fn vanishes(p: f64, z: &Point) -> bool {
    p.abs() <= ZERO_PULL_TOL * z.radius().max(1.0)
}

/// True iff no direction at the cone point has a pull vanishing on every atom.
pub fn pull_condition(space: &Space, measure: &Measure) -> bool {
    let atoms: Vec<&Point> = measure.points().filter(|z| !z.is_apex()).collect();
    if let Space::OpenBook(book) = space {
        return open_book_pull_condition(book.pages(), book.dim(), measure);
    }
    let Some(first) = atoms.first() else {
        return false;
    };
    let all_vanish = |sigma: &Direction| atoms.iter().all(|z| vanishes(frechet::pull(space, sigma, z), z));
    match space.directions() {
        DirectionSpace::FiniteSet(m) => !(0..m.len()).any(|s| all_vanish(&Direction::Index(s))),
        DirectionSpace::Circle { alpha } => {
            let t = first.dir().unwrap().angle();
            let cands = [(t + FRAC_PI_2).rem_euclid(*alpha), (t - FRAC_PI_2).rem_euclid(*alpha)];
            !cands.iter().any(|&c| all_vanish(&Direction::Angle(c)))
        }
        DirectionSpace::Graph(g) => {
            let from = first.dir().unwrap().graph_pos();
            let mut cands = Vec::new();
            for (edge, e) in g.edges().iter().enumerate() {
                for piece in g.profile(from, edge) {
                    for l in &piece.lines {
                        if let Some(o) = l.solve(FRAC_PI_2) {
                            if o >= piece.lo - 1e-12 && o <= piece.hi + 1e-12 {
                                let o = o.clamp(0.0, e.length);
                                if (g.distance(from, (edge, o)) - FRAC_PI_2).abs() <= 1e-12 {
                                    let (edge, offset) = g.canonical(edge, o);
                                    cands.push(Direction::Edge { edge, offset });
                                }
                            }
                        }
                    }
                }
            }
            !cands.iter().any(all_vanish)
        }
    }
}

/// At the spine point `(𝒪, ē)`, a direction into page `j` mixed with a spine
/// direction `u` pulls `z` by `cos ψ·φ_j(z) + sin ψ·⟨u, z̄ − ē⟩`. The pull
/// vanishes on every atom for some direction iff that linear system is
/// rank deficient for some page.
fn open_book_pull_condition(pages: usize, dim: usize, measure: &Measure) -> bool {
    let n = measure.len();
    let mut mean = vec![0.0; dim - 1];
    for (z, w) in measure.atoms() {
        for (m, x) in mean.iter_mut().zip(z.euclid()) {
            *m += w * x;
        }
    }
    for j in 0..pages {
        let a = DMatrix::from_fn(n, dim, |i, c| {
            let z = &measure.atoms()[i].0;
            if c == 0 {
                match z.dir() {
                    None => 0.0,
                    Some(d) if d.index() == Some(j) => z.radius(),
                    Some(_) => -z.radius(),
                }
            } else {
                z.euclid()[c - 1] - mean[c - 1]
            }
        });
        let scale = a.amax().max(1.0);
        if a.rank(1e-10 * scale) < dim {
            return false;
        }
    }
    true
}

/// `t* = sup{t ∈ [0,1] : min_σ ∇_σ F_{P_y^s}(𝒪) ≥ 0 for all s ≤ t}`.
///
/// Per direction the derivative is affine in `t`, `(1−t)a_σ − t b_σ` with
/// `a_σ = ∇_σ F_P(𝒪)` and `b_σ = φ_σ(y)`, so `t* = inf_{b_σ>0} a_σ/(a_σ+b_σ)`.
/// Finite direction sets are enumerated; circles and graphs use Dinkelbach
/// iterations on the ratio. Returns 0 when `P` is not sticky to begin with,
/// and otherwise 1 when `y` is the cone point (or on the spine).
pub fn perturbation_threshold(space: &Space, measure: &Measure, y: &Point) -> Result<f64> {
    space.check_point(y)?;
    let (_, c0) = frechet::min_directional_derivative(space, measure);
    if c0 < -STICKY_TOL {
        return Ok(0.0);
    }
    if y.is_apex() {
        return Ok(1.0);
    }
    let ratio = |sigma: &Direction| -> Option<f64> {
        let a = frechet::directional_derivative(space, measure, sigma).max(0.0);
        let b = frechet::pull(space, sigma, y);
        (b > 0.0).then(|| a / (a + b))
    };
    if let DirectionSpace::FiniteSet(m) = space.directions() {
        let t = (0..m.len())
            .filter_map(|s| ratio(&Direction::Index(s)))
            .fold(1.0, f64::min);
        return Ok(t);
    }
    let scale = measure.atoms().iter().map(|(z, w)| w * z.radius()).sum::<f64>().max(y.radius()).max(1.0);
    let mut t = ratio(y.dir().unwrap()).unwrap_or(1.0);
    for _ in 0..200 {
        let q = perturbed_measure(space, measure, y, t)?;
        let (sigma, v) = frechet::min_directional_derivative(space, &q);
        if v >= -1e-14 * scale {
            break;
        }
        match ratio(&sigma) {
            Some(next) if next < t => t = next,
            _ => break,
        }
    }
    Ok(t)
}

/// Monte Carlo estimate of `ℙ(𝔟(P_n) ≠ 𝒪)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleEstimate {
    pub n: usize,
    pub trials: u64,
    pub p_hat: f64,
    pub se: f64,
}

/// Frequency with which the sample mean of `n` i.i.d. draws leaves the cone
/// point (the spine on open books).
pub fn sample_sticking(space: &Space, measure: &Measure, n: usize, trials: u64, seed: u64) -> Result<SampleEstimate> {
    if trials == 0 {
        return Err(Error::OutOfRange("trials must be positive".into()));
    }
    if n == 0 {
        return Err(Error::OutOfRange("sample size must be positive".into()));
    }
    let points: Vec<Point> = measure.points().cloned().collect();
    let weights: Vec<f64> = measure.weights().collect();
    let table = PullTable::new(space, &points);
    let sampler = CountSampler::new(&weights)?;
    let off = run_trials(trials, |trial| {
        let mut rng = trial_rng(seed, trial);
        let freq = sampler.frequencies(&mut rng, n);
        let (_, v) = table.min_derivative(&freq);
        if v < -STICKY_TOL {
            1.0
        } else {
            0.0
        }
    });
    let (p_hat, se) = mean_se(&off);
    Ok(SampleEstimate { n, trials, p_hat, se: if trials < 2 { 0.0 } else { se } })
}

/// One row of a decay experiment, with the shape of the exponential bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRow {
    pub n: usize,
    pub trials: u64,
    pub p_hat: f64,
    pub se: f64,
    pub bound: f64,
}

/// Non-sticking frequencies over a strictly increasing grid of sample sizes.
/// Each size uses its own seed derived from `seed` and `n`.
pub fn decay_table(
    space: &Space,
    measure: &Measure,
    ns: &[usize],
    trials: u64,
    seed: u64,
    k: f64,
) -> Result<Vec<DecayRow>> {
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::OutOfRange("sample sizes must be strictly increasing".into()));
    }
    let (_, c_min) = frechet::min_directional_derivative(space, measure);
    ns.iter()
        .map(|&n| {
            let e = sample_sticking(space, measure, n, trials, derive_seed(seed, n as u64))?;
            Ok(DecayRow { n, trials, p_hat: e.p_hat, se: e.se, bound: tail_bound(c_min, k, n) })
        })
        .collect()
}

/// `(√n c_min)^k exp(−2 n c_min²)`, the shape of the non-sticking tail up to
/// an unknown constant; `k = 0` gives the pure exponential.
pub fn tail_bound(c_min: f64, k: f64, n: usize) -> f64 {
    let n = n as f64;
    (n.sqrt() * c_min).powf(k) * (-2.0 * n * c_min * c_min).exp()
}
