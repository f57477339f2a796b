use serde_json::{json, Value};
use stickygeom_core::asymptotics::{clt_covariance, clt_simulate, decay_fit, modulation};
use stickygeom_core::frechet::{self, derivative_profile};
use stickygeom_core::spaces::{Direction, Point};
use stickygeom_core::stickiness::{classify, decay_table, perturbation_threshold};
use stickygeom_core::transport::{
    f_divergence, perturbed_divergence, perturbed_measure, support_diameter, w1_tree, wq_lp, FDivergenceKind,
};
use stickygeom_core::Error;

use crate::config::{Command, ExperimentConfig};
use crate::report::{num, Cell, Report, Table};

const DEFAULT_TRIALS: u64 = 1000;
const DEFAULT_T_GRID: [f64; 3] = [0.01, 0.1, 0.5];
const DEFAULT_DECAY_NS: [usize; 5] = [10, 20, 40, 80, 160];
const DEFAULT_MODULATION_NS: [usize; 3] = [50, 200, 800];
const DEFAULT_CLT_N: usize = 500;
const DEFAULT_PROFILE_GRID: usize = 360;
const DEFAULT_CLT_GRID: usize = 8;

/// Failure of a command, with the process exit code it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunError {
    pub code: u8,
    pub message: String,
}

impl RunError {
    pub fn usage(message: impl Into<String>) -> Self {
        RunError { code: 2, message: message.into() }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numerical(_) | Error::NoGeodesic(_) | Error::DegenerateTriangle(_) => 3,
            _ => 2,
        };
        RunError { code, message: e.to_string() }
    }
}

type Outcome = Result<Report, RunError>;

fn dir_text(d: &Direction) -> String {
    serde_json::to_string(d).expect("directions serialize")
}

fn point_json(p: &Point) -> Value {
    serde_json::to_value(p).expect("points serialize")
}

fn require_seed(cfg: &ExperimentConfig, command: Command) -> Result<u64, RunError> {
    cfg.parameters
        .seed
        .ok_or_else(|| RunError::usage(format!("{command} needs a seed (parameters.seed or --seed)")))
}

pub fn execute(cfg: &ExperimentConfig, command: Command) -> Outcome {
    match command {
        Command::Mean => mean(cfg),
        Command::Derivs => derivs(cfg),
        Command::Classify => classify_cmd(cfg),
        Command::Perturb => perturb(cfg),
        Command::Wasserstein => wasserstein(cfg),
        Command::Divergence => divergence(cfg),
        Command::SampleSim => sample_sim(cfg),
        Command::Modulation => modulation_cmd(cfg),
        Command::Clt => clt(cfg),
        Command::Prismatic => prismatic(cfg),
    }
}

fn mean(cfg: &ExperimentConfig) -> Outcome {
    let (space, p) = (&cfg.space, &cfg.measure);
    let m = frechet::mean(space, p)?;
    let value = frechet::frechet_value(space, p, &m, None);
    let (argmin, c_min) = frechet::min_directional_derivative(space, p);
    let summary = format!("mean: radius {} (c_min {})", short(m.radius()), short(c_min));
    let json = json!({
        "command": "mean",
        "mean": point_json(&m),
        "frechet_value": num(value),
        "c_min": num(c_min),
        "argmin_direction": argmin,
    });
    let table = Table::fields(vec![
        ("mean", point_json(&m).to_string().into()),
        ("radius", m.radius().into()),
        ("frechet_value", value.into()),
        ("c_min", c_min.into()),
        ("argmin_direction", dir_text(&argmin).into()),
    ]);
    Ok(Report { summary, json, table })
}

fn derivs(cfg: &ExperimentConfig) -> Outcome {
    let grid = cfg.space.directions().grid(cfg.parameters.grid.unwrap_or(DEFAULT_PROFILE_GRID));
    let prof = derivative_profile(&cfg.space, &cfg.measure, Some(&grid));
    let mut table = Table::new(vec!["i", "direction", "derivative"]);
    for (i, (d, v)) in prof.values.iter().enumerate() {
        table.push(vec![i.into(), dir_text(d).into(), (*v).into()]);
    }
    let summary = format!(
        "derivs: {} directions, minimum {} at {}",
        prof.values.len(),
        short(prof.min_value),
        dir_text(&prof.argmin)
    );
    let values: Vec<Value> = prof.values.iter().map(|(d, v)| json!({"direction": d, "derivative": num(*v)})).collect();
    let json = json!({
        "command": "derivs",
        "values": values,
        "min_value": num(prof.min_value),
        "argmin": prof.argmin,
        "lipschitz": num(prof.lipschitz),
    });
    Ok(Report { summary, json, table })
}

fn classify_cmd(cfg: &ExperimentConfig) -> Outcome {
    let r = classify(&cfg.space, &cfg.measure);
    let prismatic = cfg.space.directions().is_prismatic();
    let summary = format!("classify: {} (c_min {})", r.label.as_str(), short(r.c_min));
    let json = json!({
        "command": "classify",
        "label": r.label.as_str(),
        "c_min": num(r.c_min),
        "argmin_direction": r.argmin_direction,
        "pull_condition": r.pull_condition,
        "mean": point_json(&r.mean),
        "prismatic": prismatic,
    });
    let table = Table::fields(vec![
        ("label", r.label.as_str().into()),
        ("c_min", r.c_min.into()),
        ("argmin_direction", dir_text(&r.argmin_direction).into()),
        ("pull_condition", r.pull_condition.into()),
        ("mean", point_json(&r.mean).to_string().into()),
        ("prismatic", prismatic.into()),
    ]);
    Ok(Report { summary, json, table })
}

fn perturb(cfg: &ExperimentConfig) -> Outcome {
    let y = cfg.parameters.y.as_ref().ok_or_else(|| RunError::usage("perturb needs parameters.y"))?;
    let ts = cfg.parameters.t_grid.clone().unwrap_or(DEFAULT_T_GRID.to_vec());
    let threshold = perturbation_threshold(&cfg.space, &cfg.measure, y)?;
    let mut table = Table::new(vec!["t", "label", "c_min", "threshold"]);
    let mut rows = Vec::new();
    for &t in &ts {
        let q = perturbed_measure(&cfg.space, &cfg.measure, y, t)?;
        let r = classify(&cfg.space, &q);
        table.push(vec![t.into(), r.label.as_str().into(), r.c_min.into(), threshold.into()]);
        rows.push(json!({"t": num(t), "label": r.label.as_str(), "c_min": num(r.c_min)}));
    }
    let summary = format!("perturb: threshold {} over {} values of t", short(threshold), ts.len());
    let json = json!({
        "command": "perturb",
        "y": point_json(y),
        "threshold": num(threshold),
        "rows": rows,
    });
    Ok(Report { summary, json, table })
}

fn wasserstein(cfg: &ExperimentConfig) -> Outcome {
    let other = cfg
        .parameters
        .other
        .as_ref()
        .ok_or_else(|| RunError::usage("wasserstein needs parameters.other"))?;
    let (space, p) = (&cfg.space, &cfg.measure);
    let q = cfg.parameters.q.unwrap_or(1.0);
    let w1 = wq_lp(space, p, other, 1.0)?;
    let tree = w1_tree(space, p, other)?;
    let wq = wq_lp(space, p, other, q)?;
    let tv = f_divergence(p, other, &FDivergenceKind::TotalVariation);
    let diam = support_diameter(space, p, other);
    let summary = format!("wasserstein: W1 {} W{} {}", short(w1), q, short(wq));
    let json = json!({
        "command": "wasserstein",
        "w1": num(w1),
        "w1_tree": num(tree),
        "q": num(q),
        "wq": num(wq),
        "tv": num(tv),
        "diameter": num(diam),
        "diam_tv_bound": num(diam * tv),
    });
    let table = Table::fields(vec![
        ("w1", w1.into()),
        ("w1_tree", tree.into()),
        ("q", q.into()),
        ("wq", wq.into()),
        ("tv", tv.into()),
        ("diameter", diam.into()),
        ("diam_tv_bound", (diam * tv).into()),
    ]);
    Ok(Report { summary, json, table })
}

fn kinds(cfg: &ExperimentConfig) -> Vec<FDivergenceKind> {
    match &cfg.parameters.divergences {
        Some(names) => names.iter().filter_map(|n| FDivergenceKind::from_name(n)).collect(),
        None => FDivergenceKind::BUILT_IN.to_vec(),
    }
}

fn divergence(cfg: &ExperimentConfig) -> Outcome {
    let (space, p) = (&cfg.space, &cfg.measure);
    if let Some(y) = &cfg.parameters.y {
        let ts = cfg.parameters.t_grid.clone().unwrap_or(DEFAULT_T_GRID.to_vec());
        let mut table = Table::new(vec!["kind", "t", "closed_form", "direct"]);
        let mut rows = Vec::new();
        let mut worst: f64 = 0.0;
        for k in kinds(cfg) {
            for &t in &ts {
                let closed = perturbed_divergence(space, p, y, t, &k)?;
                let direct = f_divergence(p, &perturbed_measure(space, p, y, t)?, &k);
                if closed.is_finite() || direct.is_finite() {
                    worst = worst.max((closed - direct).abs());
                }
                table.push(vec![k.name().into(), t.into(), closed.into(), direct.into()]);
                rows.push(json!({"kind": k.name(), "t": num(t), "closed_form": num(closed), "direct": num(direct)}));
            }
        }
        let summary = format!("divergence: {} rows, largest closed-form gap {}", rows.len(), short(worst));
        let json = json!({"command": "divergence", "y": point_json(y), "rows": rows, "max_gap": num(worst)});
        return Ok(Report { summary, json, table });
    }
    let other = cfg
        .parameters
        .other
        .as_ref()
        .ok_or_else(|| RunError::usage("divergence needs parameters.y or parameters.other"))?;
    let mut table = Table::new(vec!["kind", "value"]);
    let mut values = serde_json::Map::new();
    for k in kinds(cfg) {
        let d = f_divergence(p, other, &k);
        table.push(vec![k.name().into(), d.into()]);
        values.insert(k.name().to_string(), num(d));
    }
    let summary = format!("divergence: {} generators against parameters.other", values.len());
    let json = json!({"command": "divergence", "values": values});
    Ok(Report { summary, json, table })
}

fn sample_sim(cfg: &ExperimentConfig) -> Outcome {
    let seed = require_seed(cfg, Command::SampleSim)?;
    let ns = cfg.parameters.n_grid.clone().unwrap_or(DEFAULT_DECAY_NS.to_vec());
    let trials = cfg.parameters.trials.unwrap_or(DEFAULT_TRIALS);
    let k = cfg.parameters.k.unwrap_or(0.0);
    let (_, c_min) = frechet::min_directional_derivative(&cfg.space, &cfg.measure);
    let rows = decay_table(&cfg.space, &cfg.measure, &ns, trials, seed, k)?;
    let slope = decay_fit(&rows.iter().map(|r| (r.n as f64, r.p_hat)).collect::<Vec<_>>());
    let mut table = Table::new(vec!["n", "trials", "p_hat", "se", "bound"]);
    for r in &rows {
        table.push(vec![r.n.into(), r.trials.into(), r.p_hat.into(), r.se.into(), r.bound.into()]);
    }
    let summary = format!(
        "sample-sim: {} sizes, p_hat at n={} is {}",
        rows.len(),
        ns[ns.len() - 1],
        short(rows[rows.len() - 1].p_hat)
    );
    let json_rows: Vec<Value> = rows
        .iter()
        .map(|r| json!({"n": r.n, "trials": r.trials, "p_hat": num(r.p_hat), "se": num(r.se), "bound": num(r.bound)}))
        .collect();
    let json = json!({
        "command": "sample-sim",
        "seed": seed,
        "c_min": num(c_min),
        "k": num(k),
        "rows": json_rows,
        "fitted_slope": num(slope),
        "reference_slope": num(-2.0 * c_min * c_min),
    });
    Ok(Report { summary, json, table })
}

fn modulation_cmd(cfg: &ExperimentConfig) -> Outcome {
    let seed = require_seed(cfg, Command::Modulation)?;
    let ns = cfg.parameters.n_grid.clone().unwrap_or(DEFAULT_MODULATION_NS.to_vec());
    let trials = cfg.parameters.trials.unwrap_or(DEFAULT_TRIALS);
    let q = cfg.parameters.q.unwrap_or(2.0);
    let mut table = Table::new(vec!["n", "q", "m_hat", "se"]);
    let mut rows = Vec::new();
    for &n in &ns {
        let m = modulation(&cfg.space, &cfg.measure, n, q, trials, stickygeom_core::sampling::derive_seed(seed, n as u64))?;
        table.push(vec![n.into(), q.into(), m.m_hat.into(), m.se.into()]);
        rows.push(json!({
            "n": n,
            "q": num(q),
            "m_hat": num(m.m_hat),
            "se": num(m.se),
            "exact": m.exact,
            "mc_m_hat": num(m.mc_m_hat),
            "mc_se": num(m.mc_se),
        }));
    }
    let last = &table.rows[table.rows.len() - 1];
    let summary = format!("modulation: m_hat at n={} is {}", ns[ns.len() - 1], cell_text(&last[2]));
    let json = json!({"command": "modulation", "seed": seed, "trials": trials, "rows": rows});
    Ok(Report { summary, json, table })
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Float(x) => short(*x),
        other => format!("{other:?}"),
    }
}

fn clt(cfg: &ExperimentConfig) -> Outcome {
    let seed = require_seed(cfg, Command::Clt)?;
    let grid = cfg.space.directions().grid(cfg.parameters.grid.unwrap_or(DEFAULT_CLT_GRID));
    let n = cfg.parameters.n.unwrap_or(DEFAULT_CLT_N);
    let trials = cfg.parameters.trials.unwrap_or(DEFAULT_TRIALS);
    let cov = clt_covariance(&cfg.space, &cfg.measure, &grid)?;
    let emp = clt_simulate(&cfg.space, &cfg.measure, &grid, n, trials, seed)?;
    let g = grid.len();
    let mut table = Table::new(vec!["i", "j", "uncentered_cov", "centered_cov", "empirical_cov", "se"]);
    let mut discrepancy: f64 = 0.0;
    for i in 0..g {
        for j in 0..g {
            discrepancy = discrepancy.max((cov.uncentered_form[i][j] - cov.centered_form[i][j]).abs());
            table.push(vec![
                i.into(),
                j.into(),
                cov.uncentered_form[i][j].into(),
                cov.centered_form[i][j].into(),
                emp.covariance[i][j].into(),
                emp.se[i][j].into(),
            ]);
        }
    }
    let summary = format!(
        "clt: {g} directions, n={n}, uncentered/centered discrepancy {}",
        short(discrepancy)
    );
    let matrix = |m: &Vec<Vec<f64>>| -> Value { m.iter().map(|r| r.iter().map(|&x| num(x)).collect::<Vec<_>>()).collect() };
    let json = json!({
        "command": "clt",
        "seed": seed,
        "n": n,
        "trials": trials,
        "grid": grid,
        "uncentered_form": matrix(&cov.uncentered_form),
        "centered_form": matrix(&cov.centered_form),
        "empirical": matrix(&emp.covariance),
        "se": matrix(&emp.se),
        "min_eigenvalue": num(cov.min_eigenvalue),
        "positive_semidefinite": cov.positive_semidefinite,
        "max_form_discrepancy": num(discrepancy),
    });
    Ok(Report { summary, json, table })
}

fn prismatic(cfg: &ExperimentConfig) -> Outcome {
    let p = cfg.space.directions().is_prismatic();
    Ok(Report {
        summary: format!("prismatic: {p}"),
        json: json!({"command": "prismatic", "prismatic": p}),
        table: Table::fields(vec![("prismatic", p.into())]),
    })
}

fn short(x: f64) -> String {
    if x != 0.0 && x.is_finite() && !(1e-4..1e6).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}
