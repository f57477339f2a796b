//! Modulation of sample means and the CLT for directional derivatives.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frechet::{self, PullTable};
use crate::sampling::{mean_se, pairwise_sum, run_trials, trial_rng, CountSampler};
use crate::spaces::{Direction, DirectionSpace, Measure, Point, Space};
use crate::stickiness::STICKY_TOL;

/// Compositions beyond this count are not enumerated exactly.
const MAX_COMPOSITIONS: f64 = 5e6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulationEstimate {
    pub n: usize,
    pub q: f64,
    /// `n^{q/2} E d^q(𝒪, μ̂_n) / E d^q(𝒪, X₁)`; exact when `exact` is set.
    pub m_hat: f64,
    /// Zero for exact values.
    pub se: f64,
    pub denominator: f64,
    pub exact: bool,
    /// The Monte Carlo estimate, kept for cross-validation.
    pub mc_m_hat: f64,
    pub mc_se: f64,
}

/// Modulation `𝔪_n^q` at the cone point. Finite direction sets are
/// enumerated exactly over multinomial counts when that is tractable; the
/// Monte Carlo estimate is always reported alongside.
pub fn modulation(
    space: &Space,
    measure: &Measure,
    n: usize,
    q: f64,
    trials: u64,
    seed: u64,
) -> Result<ModulationEstimate> {
    if space.is_open_book() {
        return Err(Error::Unsupported("modulation is computed on cones".into()));
    }
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::OutOfRange(format!("moment order must be at least 1, got {q}")));
    }
    if n == 0 || trials < 2 {
        return Err(Error::OutOfRange("need n ≥ 1 and at least 2 trials".into()));
    }
    let (_, c_min) = frechet::min_directional_derivative(space, measure);
    if c_min < -STICKY_TOL {
        return Err(Error::OutOfRange("the mean of P is not the cone point".into()));
    }
    let denominator: f64 = measure.atoms().iter().map(|(z, w)| w * z.radius().powf(q)).sum();
    if denominator <= 0.0 {
        return Err(Error::OutOfRange("P is the point mass at the cone point".into()));
    }
    let scale = (n as f64).powf(q / 2.0) / denominator;
    let points: Vec<Point> = measure.points().cloned().collect();
    let weights: Vec<f64> = measure.weights().collect();
    let table = PullTable::new(space, &points);
    let sampler = CountSampler::new(&weights)?;
    let draws = run_trials(trials, |t| {
        let freq = sampler.frequencies(&mut trial_rng(seed, t), n);
        let r = (-table.min_derivative(&freq).1).max(0.0);
        r.powf(q)
    });
    let (mean, se) = mean_se(&draws);
    let (mc_m_hat, mc_se) = (scale * mean, scale * se);
    let exact = exact_expectation(space, measure, n, |r| r.powf(q));
    Ok(match exact {
        Some(e) => ModulationEstimate { n, q, m_hat: scale * e, se: 0.0, denominator, exact: true, mc_m_hat, mc_se },
        None => ModulationEstimate { n, q, m_hat: mc_m_hat, se: mc_se, denominator, exact: false, mc_m_hat, mc_se },
    })
}

/// `E g(d(𝒪, μ̂_n))` by enumerating multinomial counts, for finite
/// direction sets with a tractable number of compositions.
pub fn exact_expectation<G: Fn(f64) -> f64>(space: &Space, measure: &Measure, n: usize, g: G) -> Option<f64> {
    if !matches!(space.directions(), DirectionSpace::FiniteSet(_)) {
        return None;
    }
    let k = measure.len();
    if compositions(n, k) > MAX_COMPOSITIONS {
        return None;
    }
    let points: Vec<Point> = measure.points().cloned().collect();
    let weights: Vec<f64> = measure.weights().collect();
    let table = PullTable::new(space, &points);
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=n).scan(0.0, |acc, i| {
            *acc += (i as f64).ln();
            Some(*acc)
        }))
        .collect();
    let ln_w: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    let mut terms = Vec::new();
    let mut counts = vec![0usize; k];
    let mut freq = vec![0.0; k];
    enumerate(n, 0, &mut counts, &mut |c| {
        let mut lp = ln_fact[n];
        for (i, &ci) in c.iter().enumerate() {
            lp += ci as f64 * ln_w[i] - ln_fact[ci];
            freq[i] = ci as f64 / n as f64;
        }
        let r = (-table.min_derivative(&freq).1).max(0.0);
        terms.push(lp.exp() * g(r));
    });
    Some(pairwise_sum(&terms))
}

fn compositions(n: usize, k: usize) -> f64 {
    // C(n + k − 1, k − 1)
    (1..k).map(|i| (n + i) as f64 / i as f64).product()
}

fn enumerate<F: FnMut(&[usize])>(left: usize, at: usize, counts: &mut Vec<usize>, f: &mut F) {
    if at + 1 == counts.len() {
        counts[at] = left;
        f(counts);
        return;
    }
    for c in 0..=left {
        counts[at] = c;
        enumerate(left - c, at + 1, counts, f);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceMatrix {
    pub grid: Vec<Direction>,
    /// `E[φ_σ φ_τ]`.
    pub uncentered_form: Vec<Vec<f64>>,
    /// `E[φ_σ φ_τ] − E[φ_σ] E[φ_τ]`, the covariance of the centered process.
    pub centered_form: Vec<Vec<f64>>,
    pub min_eigenvalue: f64,
    pub positive_semidefinite: bool,
}

/// Covariance functional of the CLT for directional derivatives at `𝒪`,
/// in the uncentered form and the centered form.
pub fn clt_covariance(space: &Space, measure: &Measure, grid: &[Direction]) -> Result<CovarianceMatrix> {
    let grid = check_grid(space, grid)?;
    let pulls = pull_rows(space, measure, &grid);
    let g = grid.len();
    let weights: Vec<f64> = measure.weights().collect();
    let means: Vec<f64> = pulls.iter().map(|row| row.iter().zip(&weights).map(|(p, w)| p * w).sum()).collect();
    let mut uncentered = vec![vec![0.0; g]; g];
    let mut centered = vec![vec![0.0; g]; g];
    for i in 0..g {
        for j in 0..=i {
            let e: f64 = (0..weights.len()).map(|a| weights[a] * pulls[i][a] * pulls[j][a]).sum();
            uncentered[i][j] = e;
            uncentered[j][i] = e;
            let c = e - means[i] * means[j];
            centered[i][j] = c;
            centered[j][i] = c;
        }
    }
    let eig = SymmetricEigen::new(DMatrix::from_fn(g, g, |i, j| centered[i][j])).eigenvalues;
    let min_eigenvalue = eig.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(CovarianceMatrix {
        grid,
        uncentered_form: uncentered,
        centered_form: centered,
        min_eigenvalue,
        positive_semidefinite: min_eigenvalue >= -1e-10,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalCovariance {
    pub grid: Vec<Direction>,
    pub n: usize,
    pub trials: u64,
    pub covariance: Vec<Vec<f64>>,
    /// Standard errors of the entries, from the per-trial products.
    pub se: Vec<Vec<f64>>,
}

/// Sample covariance over trials of `√n(∇F_{P_n}(𝒪) − ∇F_P(𝒪))` on `grid`.
pub fn clt_simulate(
    space: &Space,
    measure: &Measure,
    grid: &[Direction],
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<EmpiricalCovariance> {
    if trials < 2 {
        return Err(Error::OutOfRange("need at least 2 trials".into()));
    }
    if n == 0 {
        return Err(Error::OutOfRange("sample size must be positive".into()));
    }
    let grid = check_grid(space, grid)?;
    let pulls = pull_rows(space, measure, &grid);
    let weights: Vec<f64> = measure.weights().collect();
    let sampler = CountSampler::new(&weights)?;
    let root_n = (n as f64).sqrt();
    let ys: Vec<Vec<f64>> = run_trials(trials, |t| {
        let freq = sampler.frequencies(&mut trial_rng(seed, t), n);
        pulls
            .iter()
            .map(|row| {
                let diff: f64 = row.iter().zip(freq.iter().zip(&weights)).map(|(p, (f, w))| p * (w - f)).sum();
                root_n * diff
            })
            .collect()
    });
    let g = grid.len();
    let means: Vec<f64> = (0..g)
        .map(|i| pairwise_sum(&ys.iter().map(|y| y[i]).collect::<Vec<_>>()) / trials as f64)
        .collect();
    let tf = trials as f64;
    let mut covariance = vec![vec![0.0; g]; g];
    let mut se = vec![vec![0.0; g]; g];
    for i in 0..g {
        for j in 0..=i {
            let prods: Vec<f64> = ys.iter().map(|y| (y[i] - means[i]) * (y[j] - means[j])).collect();
            let (m, s) = mean_se(&prods);
            let c = m * tf / (tf - 1.0);
            covariance[i][j] = c;
            covariance[j][i] = c;
            se[i][j] = s;
            se[j][i] = s;
        }
    }
    Ok(EmpiricalCovariance { grid, n, trials, covariance, se })
}

fn check_grid(space: &Space, grid: &[Direction]) -> Result<Vec<Direction>> {
    if grid.is_empty() {
        return Err(Error::OutOfRange("direction grid is empty".into()));
    }
    grid.iter().map(|d| space.directions().check(*d)).collect()
}

/// `pulls[σ][i] = φ_σ(z_i)`.
fn pull_rows(space: &Space, measure: &Measure, grid: &[Direction]) -> Vec<Vec<f64>> {
    grid.iter()
        .map(|s| measure.points().map(|z| frechet::pull(space, s, z)).collect())
        .collect()
}

/// Least-squares slope of `ln p` against `n`, skipping zero frequencies.
/// Needs two usable points; otherwise returns `−∞`.
pub fn decay_fit(results: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = results.iter().filter(|(_, p)| *p > 0.0).map(|&(n, p)| (n, p.ln())).collect();
    if pts.len() < 2 {
        return f64::NEG_INFINITY;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return f64::NEG_INFINITY;
    }
    sxy / sxx
}
