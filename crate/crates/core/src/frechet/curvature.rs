//! Lipschitz constant of pulls on spaces with positive upper curvature bound.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

const GRID: usize = 401;

/// `Ψ(a, b, θ)`: ratio of the tangent-cone distance to the spherical distance
/// of two points at polar angles `a`, `b` separated by `θ`.
pub fn psi(a: f64, b: f64, theta: f64) -> f64 {
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let (st, ct) = theta.sin_cos();
    let half = (0.5 * theta).sin();
    psi_parts(a, b, sa, ca, sb, cb, st, ct, half * half)
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn psi_parts(a: f64, b: f64, sa: f64, ca: f64, sb: f64, cb: f64, st: f64, ct: f64, half_sq: f64) -> f64 {
    if (a == 0.0 && b == 0.0) || (theta_is_zero(st, ct) && a == b) {
        return 1.0;
    }
    let num = ((a - b) * (a - b) + 4.0 * a * b * half_sq).sqrt();
    // u = (cos a, sin a cos θ, sin a sin θ), v = (cos b, sin b, 0)
    let dot = ca * cb + sa * sb * ct;
    let cx = -sa * st * sb;
    let cy = sa * st * cb;
    let cz = ca * sb - sa * ct * cb;
    let den = (cx * cx + cy * cy + cz * cz).sqrt().atan2(dot);
    if den == 0.0 {
        return 1.0;
    }
    num / den
}

fn theta_is_zero(st: f64, ct: f64) -> bool {
    st == 0.0 && ct > 0.0
}

/// Grid maximum and refined maximum of `Ψ`, with the maximizer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CKappaReport {
    pub kappa: f64,
    pub epsilon: f64,
    pub value: f64,
    pub grid_value: f64,
    /// `value − grid_value`, the measured gain of the local refinement.
    pub refinement_gain: f64,
    pub argmax: [f64; 3],
}

/// `C_κ(ε)`; exactly one when `κ ≤ 0`.
pub fn c_kappa_epsilon(kappa: f64, epsilon: f64) -> Result<f64> {
    Ok(c_kappa_report(kappa, epsilon)?.value)
}

pub fn c_kappa_report(kappa: f64, epsilon: f64) -> Result<CKappaReport> {
    if !(epsilon > 0.0 && epsilon < PI) {
        return Err(Error::OutOfRange(format!("epsilon must lie in (0, π), got {epsilon}")));
    }
    if !kappa.is_finite() {
        return Err(Error::OutOfRange(format!("curvature must be finite, got {kappa}")));
    }
    if kappa <= 0.0 {
        return Ok(CKappaReport {
            kappa,
            epsilon,
            value: 1.0,
            grid_value: 1.0,
            refinement_gain: 0.0,
            argmax: [0.0; 3],
        });
    }
    // rescaling the metric by √κ maps the problem to κ = 1
    let top = PI - epsilon;
    let side: Vec<(f64, f64, f64)> = (0..GRID)
        .map(|i| {
            let a = top * i as f64 / (GRID - 1) as f64;
            let (s, c) = a.sin_cos();
            (a, s, c)
        })
        .collect();
    let angles: Vec<(f64, f64, f64, f64)> = (0..GRID)
        .map(|i| {
            let t = PI * i as f64 / (GRID - 1) as f64;
            let (s, c) = t.sin_cos();
            let h = (0.5 * t).sin();
            (t, s, c, h * h)
        })
        .collect();
    let (grid_value, argmax) = (0..GRID)
        .into_par_iter()
        .map(|i| {
            let (a, sa, ca) = side[i];
            let mut best = (f64::NEG_INFINITY, [0.0; 3]);
            for &(b, sb, cb) in &side {
                for &(t, st, ct, hs) in &angles {
                    let v = psi_parts(a, b, sa, ca, sb, cb, st, ct, hs);
                    if v > best.0 {
                        best = (v, [a, b, t]);
                    }
                }
            }
            best
        })
        .reduce(|| (f64::NEG_INFINITY, [0.0; 3]), |x, y| if y.0 > x.0 { y } else { x });
    let upper = [top, top, PI];
    let step = [top / (GRID - 1) as f64, top / (GRID - 1) as f64, PI / (GRID - 1) as f64];
    let (x, v) = nelder_mead_max(|p| psi(p[0], p[1], p[2]), argmax, step, upper);
    let (value, argmax) = if v > grid_value { (v, x) } else { (grid_value, argmax) };
    Ok(CKappaReport {
        kappa,
        epsilon,
        value,
        grid_value,
        refinement_gain: value - grid_value,
        argmax,
    })
}

/// Nelder–Mead maximization on the box `[0, upper]`, clamping every trial point.
fn nelder_mead_max<F: Fn(&[f64; 3]) -> f64>(f: F, start: [f64; 3], step: [f64; 3], upper: [f64; 3]) -> ([f64; 3], f64) {
    let clamp = |mut p: [f64; 3]| {
        for k in 0..3 {
            p[k] = p[k].clamp(0.0, upper[k]);
        }
        p
    };
    // minimize −f
    let g = |p: &[f64; 3]| -f(p);
    let mut simplex: Vec<([f64; 3], f64)> = vec![(start, g(&start))];
    for k in 0..3 {
        let mut p = start;
        p[k] = if p[k] + step[k] <= upper[k] { p[k] + step[k] } else { p[k] - step[k] };
        let p = clamp(p);
        simplex.push((p, g(&p)));
    }
    for _ in 0..5000 {
        simplex.sort_by(|x, y| x.1.total_cmp(&y.1));
        if (simplex[3].1 - simplex[0].1).abs() < 1e-15 {
            break;
        }
        let mut centroid = [0.0; 3];
        for (p, _) in &simplex[..3] {
            for k in 0..3 {
                centroid[k] += p[k] / 3.0;
            }
        }
        let worst = simplex[3];
        let along = |t: f64| {
            let mut p = [0.0; 3];
            for k in 0..3 {
                p[k] = centroid[k] + t * (worst.0[k] - centroid[k]);
            }
            clamp(p)
        };
        let r = along(-1.0);
        let fr = g(&r);
        if fr < simplex[0].1 {
            let e = along(-2.0);
            let fe = g(&e);
            simplex[3] = if fe < fr { (e, fe) } else { (r, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (r, fr);
        } else {
            let c = if fr < worst.1 { along(-0.5) } else { along(0.5) };
            let fc = g(&c);
            if fc < worst.1.min(fr) {
                simplex[3] = (c, fc);
            } else {
                let best = simplex[0].0;
                for entry in simplex.iter_mut().skip(1) {
                    let mut p = [0.0; 3];
                    for k in 0..3 {
                        p[k] = best[k] + 0.5 * (entry.0[k] - best[k]);
                    }
                    *entry = (p, g(&p));
                }
            }
        }
    }
    simplex.sort_by(|x, y| x.1.total_cmp(&y.1));
    (simplex[0].0, -simplex[0].1)
}
