//! Transportation simplex (MODI method) for small dense instances.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Optimal coupling cost `min Σ x_ij c_ij` subject to row sums `supply` and
/// column sums `demand`.
///
/// Starts from the northwest-corner basis (degenerate cells included, so the
/// basis is always a spanning tree), enters cells by Dantzig's rule and falls
/// back to Bland's rule after an iteration budget. The result is checked
/// against the dual solution.
pub fn transport_cost(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> Result<f64> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 {
        return Err(Error::InvalidMeasure("empty marginal".into()));
    }
    let scale = cost.iter().flatten().fold(0.0f64, |a, &c| a.max(c.abs())).max(1.0);
    let mut b: Vec<f64> = demand.to_vec();
    // absorb rounding so both marginals carry the same mass
    let gap = supply.iter().sum::<f64>() - b.iter().sum::<f64>();
    if gap.abs() > 1e-9 {
        return Err(Error::InvalidMeasure(format!("marginals differ in mass by {gap}")));
    }
    b[n - 1] += gap;

    let mut x = vec![vec![0.0; n]; m];
    let mut basic = vec![vec![false; n]; m];
    let (mut ra, mut rb) = (supply.to_vec(), b.clone());
    let (mut i, mut j) = (0, 0);
    loop {
        let f = ra[i].min(rb[j]).max(0.0);
        x[i][j] = f;
        basic[i][j] = true;
        ra[i] -= f;
        rb[j] -= f;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if (ra[i] <= rb[j] && i < m - 1) || j == n - 1 {
            i += 1;
        } else {
            j += 1;
        }
    }

    let eps = 1e-12 * scale;
    let budget = 50 * (m + n) * (m + n);
    let mut iter = 0;
    loop {
        let (u, v) = potentials(&basic, cost);
        let mut enter: Option<(usize, usize, f64)> = None;
        'scan: for (i, row) in cost.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if basic[i][j] {
                    continue;
                }
                let r = c - u[i] - v[j];
                if r < -eps {
                    if iter >= budget {
                        enter = Some((i, j, r));
                        break 'scan;
                    }
                    if enter.is_none_or(|e| r < e.2) {
                        enter = Some((i, j, r));
                    }
                }
            }
        }
        let Some((ei, ej, _)) = enter else {
            return verify(&x, &u, &v, supply, &b, cost, scale);
        };
        iter += 1;
        if iter > 20 * budget {
            return Err(Error::Numerical("transportation simplex did not converge".into()));
        }
        let path = tree_path(&basic, ei, ej);
        // cells of the cycle after the entering one alternate −, +, −, ...
        let mut theta = f64::INFINITY;
        let mut leave = (0, 0);
        for (k, &(pi, pj)) in path.iter().enumerate() {
            if k % 2 == 0 && x[pi][pj] < theta {
                theta = x[pi][pj];
                leave = (pi, pj);
            }
        }
        for (k, &(pi, pj)) in path.iter().enumerate() {
            if k % 2 == 0 {
                x[pi][pj] -= theta;
            } else {
                x[pi][pj] += theta;
            }
        }
        x[ei][ej] = theta;
        basic[ei][ej] = true;
        basic[leave.0][leave.1] = false;
        x[leave.0][leave.1] = 0.0;
    }
}

/// Dual potentials with `u_0 = 0` and `u_i + v_j = c_ij` on basic cells.
fn potentials(basic: &[Vec<bool>], cost: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = (basic.len(), basic[0].len());
    let mut u = vec![f64::NAN; m];
    let mut v = vec![f64::NAN; n];
    u[0] = 0.0;
    let mut queue = VecDeque::from([(true, 0usize)]);
    while let Some((is_row, k)) = queue.pop_front() {
        if is_row {
            for j in 0..n {
                if basic[k][j] && v[j].is_nan() {
                    v[j] = cost[k][j] - u[k];
                    queue.push_back((false, j));
                }
            }
        } else {
            for i in 0..m {
                if basic[i][k] && u[i].is_nan() {
                    u[i] = cost[i][k] - v[k];
                    queue.push_back((true, i));
                }
            }
        }
    }
    (u, v)
}

/// Basic cells on the tree path from column `to_col` back to row `from_row`,
/// in that order.
fn tree_path(basic: &[Vec<bool>], from_row: usize, to_col: usize) -> Vec<(usize, usize)> {
    let (m, n) = (basic.len(), basic[0].len());
    // nodes: rows 0..m, columns m..m+n; search from the column
    let mut parent: Vec<Option<usize>> = vec![None; m + n];
    let start = m + to_col;
    let target = from_row;
    let mut seen = vec![false; m + n];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        if node == target {
            break;
        }
        let next: Vec<usize> = if node < m {
            (0..n).filter(|&j| basic[node][j]).map(|j| m + j).collect()
        } else {
            (0..m).filter(|&i| basic[i][node - m]).collect()
        };
        for nb in next {
            if !seen[nb] {
                seen[nb] = true;
                parent[nb] = Some(node);
                queue.push_back(nb);
            }
        }
    }
    let mut cells = Vec::new();
    let mut node = target;
    while let Some(p) = parent[node] {
        cells.push(if node < m { (node, p - m) } else { (p, node - m) });
        node = p;
    }
    // collected from the row end; the cell touching the entering column comes first
    cells.reverse();
    cells
}

fn verify(x: &[Vec<f64>], u: &[f64], v: &[f64], a: &[f64], b: &[f64], cost: &[Vec<f64>], scale: f64) -> Result<f64> {
    let primal: f64 = x.iter().zip(cost).flat_map(|(xr, cr)| xr.iter().zip(cr).map(|(x, c)| x * c)).sum();
    let dual: f64 = a.iter().zip(u).map(|(a, u)| a * u).sum::<f64>() + b.iter().zip(v).map(|(b, v)| b * v).sum::<f64>();
    if (primal - dual).abs() > 1e-10 * scale.max(primal.abs()) {
        return Err(Error::Numerical(format!("duality gap {} exceeds tolerance", primal - dual)));
    }
    for (i, row) in cost.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c - u[i] - v[j] < -1e-10 * scale {
                return Err(Error::Numerical("negative reduced cost at optimum".into()));
            }
        }
    }
    Ok(primal.max(0.0))
}
