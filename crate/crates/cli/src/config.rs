//! Experiment configs: parsing, validation with JSON-pointer paths, and a
//! canonical serialization.

use std::fmt;
use std::path::PathBuf;

use serde_json::{json, Map, Value};
use stickygeom_core::spaces::{Direction, DirectionSpace, Edge, Measure, Point, Space};

/// Weight sums further than this from one are rejected.
const WEIGHT_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Mean,
    Derivs,
    Classify,
    Perturb,
    Wasserstein,
    Divergence,
    SampleSim,
    Modulation,
    Clt,
    Prismatic,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::Mean,
        Command::Derivs,
        Command::Classify,
        Command::Perturb,
        Command::Wasserstein,
        Command::Divergence,
        Command::SampleSim,
        Command::Modulation,
        Command::Clt,
        Command::Prismatic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Mean => "mean",
            Command::Derivs => "derivs",
            Command::Classify => "classify",
            Command::Perturb => "perturb",
            Command::Wasserstein => "wasserstein",
            Command::Divergence => "divergence",
            Command::SampleSim => "sample-sim",
            Command::Modulation => "modulation",
            Command::Clt => "clt",
            Command::Prismatic => "prismatic",
        }
    }

    pub fn from_name(name: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == name)
    }

    /// Commands that draw random samples and therefore need a seed.
    pub fn is_stochastic(self) -> bool {
        matches!(self, Command::SampleSim | Command::Modulation | Command::Clt)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Csv,
    #[default]
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn from_name(name: &str) -> Option<Format> {
        match name {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

/// The space as written in the config.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceSpec {
    Spider { legs: usize },
    FiniteCone { distance_matrix: Vec<Vec<f64>> },
    Kale { alpha: f64 },
    GraphCone { vertices: usize, edges: Vec<Edge> },
    OpenBook { pages: usize, dim: usize },
}

impl SpaceSpec {
    pub fn build(&self) -> stickygeom_core::Result<Space> {
        match self {
            SpaceSpec::Spider { legs } => Space::spider(*legs),
            SpaceSpec::FiniteCone { distance_matrix } => Space::finite_cone(distance_matrix.clone()),
            SpaceSpec::Kale { alpha } => Space::kale(*alpha),
            SpaceSpec::GraphCone { vertices, edges } => Space::graph_cone(*vertices, edges.clone()),
            SpaceSpec::OpenBook { pages, dim } => Space::open_book(*pages, *dim),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            SpaceSpec::Spider { legs } => json!({"kind": "spider", "K": legs}),
            SpaceSpec::FiniteCone { distance_matrix } => {
                json!({"kind": "finite_cone", "distance_matrix": distance_matrix})
            }
            SpaceSpec::Kale { alpha } => json!({"kind": "kale", "alpha": alpha}),
            SpaceSpec::GraphCone { vertices, edges } => {
                let edges: Vec<Value> = edges.iter().map(|e| json!([e.u, e.v, e.length])).collect();
                json!({"kind": "graph_cone", "vertices": vertices, "edges": edges})
            }
            SpaceSpec::OpenBook { pages, dim } => json!({"kind": "open_book", "K": pages, "d": dim}),
        }
    }
}

/// Command-specific parameters; every field is optional in the file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Parameters {
    /// Perturbation point.
    pub y: Option<Point>,
    pub t_grid: Option<Vec<f64>>,
    pub n_grid: Option<Vec<usize>>,
    /// Sample size for the CLT simulation.
    pub n: Option<usize>,
    /// Moment order (modulation) or transport exponent (wasserstein).
    pub q: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    /// Directions per `2π` of direction space for profiles and CLT grids.
    pub grid: Option<usize>,
    /// Covering exponent of the tail bound.
    pub k: Option<f64>,
    /// Second measure for wasserstein and divergence.
    pub other: Option<Measure>,
    /// f-divergence generators by name.
    pub divergences: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Output {
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub space_spec: SpaceSpec,
    pub space: Space,
    pub measure: Measure,
    pub command: Option<Command>,
    pub parameters: Parameters,
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError {
    /// JSON pointer to the offending value; empty for the whole document.
    pub pointer: String,
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pointer.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.pointer, self.message)
        }
    }
}

struct Errors(Vec<ValidationError>);

impl Errors {
    fn push(&mut self, pointer: &str, message: impl Into<String>) {
        self.0.push(ValidationError { pointer: pointer.to_string(), message: message.into() });
    }
}

fn child(ptr: &str, key: impl fmt::Display) -> String {
    let key = key.to_string().replace('~', "~0").replace('/', "~1");
    format!("{ptr}/{key}")
}

/// Parses and validates a config, reporting every violation found.
pub fn validate(text: &str) -> Result<ExperimentConfig, Vec<ValidationError>> {
    let mut errs = Errors(Vec::new());
    let root: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => {
            errs.push("", format!("invalid JSON: {e}"));
            return Err(errs.0);
        }
    };
    let Some(obj) = root.as_object() else {
        errs.push("", "config must be a JSON object");
        return Err(errs.0);
    };
    unknown_keys(obj, "", &["space", "measure", "command", "parameters", "output"], &mut errs);

    let spec = match obj.get("space") {
        Some(v) => parse_space(v, "/space", &mut errs),
        None => {
            errs.push("/space", "missing");
            None
        }
    };
    let space = spec.as_ref().and_then(|s| match s.build() {
        Ok(space) => Some(space),
        Err(e) => {
            errs.push("/space", e.to_string());
            None
        }
    });
    let measure = match obj.get("measure") {
        Some(v) => parse_measure(space.as_ref(), v, "/measure", &mut errs),
        None => {
            errs.push("/measure", "missing");
            None
        }
    };
    let command = obj.get("command").and_then(|v| match v.as_str().and_then(Command::from_name) {
        Some(c) => Some(c),
        None => {
            errs.push("/command", format!("expected one of {}", command_list()));
            None
        }
    });
    let parameters = match obj.get("parameters") {
        Some(v) => parse_parameters(space.as_ref(), v, "/parameters", &mut errs),
        None => Parameters::default(),
    };
    let output = match obj.get("output") {
        Some(v) => parse_output(v, "/output", &mut errs),
        None => Output::default(),
    };

    match (spec, space, measure) {
        (Some(space_spec), Some(space), Some(measure)) if errs.0.is_empty() => {
            Ok(ExperimentConfig { space_spec, space, measure, command, parameters, output })
        }
        _ => Err(errs.0),
    }
}

fn command_list() -> String {
    Command::ALL.iter().map(|c| c.name()).collect::<Vec<_>>().join(", ")
}

fn unknown_keys(obj: &Map<String, Value>, ptr: &str, allowed: &[&str], errs: &mut Errors) {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            errs.push(&child(ptr, key), "unknown field");
        }
    }
}

fn as_object<'a>(v: &'a Value, ptr: &str, errs: &mut Errors) -> Option<&'a Map<String, Value>> {
    let o = v.as_object();
    if o.is_none() {
        errs.push(ptr, "expected an object");
    }
    o
}

fn get_usize(obj: &Map<String, Value>, key: &str, ptr: &str, errs: &mut Errors) -> Option<usize> {
    let p = child(ptr, key);
    match obj.get(key) {
        None => {
            errs.push(&p, "missing");
            None
        }
        Some(v) => usize_value(v, &p, errs),
    }
}

fn usize_value(v: &Value, ptr: &str, errs: &mut Errors) -> Option<usize> {
    match v.as_u64().and_then(|x| usize::try_from(x).ok()) {
        Some(x) => Some(x),
        None => {
            errs.push(ptr, "expected a nonnegative integer");
            None
        }
    }
}

fn finite_value(v: &Value, ptr: &str, errs: &mut Errors) -> Option<f64> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Some(x),
        _ => {
            errs.push(ptr, "expected a finite number");
            None
        }
    }
}

fn get_finite(obj: &Map<String, Value>, key: &str, ptr: &str, errs: &mut Errors) -> Option<f64> {
    let p = child(ptr, key);
    match obj.get(key) {
        None => {
            errs.push(&p, "missing");
            None
        }
        Some(v) => finite_value(v, &p, errs),
    }
}

fn parse_space(v: &Value, ptr: &str, errs: &mut Errors) -> Option<SpaceSpec> {
    let obj = as_object(v, ptr, errs)?;
    let kind_ptr = child(ptr, "kind");
    let Some(kind) = obj.get("kind").and_then(Value::as_str) else {
        errs.push(&kind_ptr, "expected one of spider, finite_cone, kale, graph_cone, open_book");
        return None;
    };
    match kind {
        "spider" => {
            unknown_keys(obj, ptr, &["kind", "K"], errs);
            Some(SpaceSpec::Spider { legs: get_usize(obj, "K", ptr, errs)? })
        }
        "finite_cone" => {
            unknown_keys(obj, ptr, &["kind", "distance_matrix"], errs);
            let mp = child(ptr, "distance_matrix");
            let Some(rows) = obj.get("distance_matrix").and_then(Value::as_array) else {
                errs.push(&mp, "expected an array of rows");
                return None;
            };
            let before = errs.0.len();
            let matrix: Vec<Vec<f64>> = rows
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    let rp = child(&mp, i);
                    match row.as_array() {
                        Some(r) => r
                            .iter()
                            .enumerate()
                            .map(|(j, x)| finite_value(x, &child(&rp, j), errs).unwrap_or(0.0))
                            .collect(),
                        None => {
                            errs.push(&rp, "expected an array");
                            Vec::new()
                        }
                    }
                })
                .collect();
            (errs.0.len() == before).then_some(SpaceSpec::FiniteCone { distance_matrix: matrix })
        }
        "kale" => {
            unknown_keys(obj, ptr, &["kind", "alpha"], errs);
            Some(SpaceSpec::Kale { alpha: get_finite(obj, "alpha", ptr, errs)? })
        }
        "graph_cone" => {
            unknown_keys(obj, ptr, &["kind", "vertices", "edges"], errs);
            let vertices = get_usize(obj, "vertices", ptr, errs);
            let ep = child(ptr, "edges");
            let Some(list) = obj.get("edges").and_then(Value::as_array) else {
                errs.push(&ep, "expected an array of [u, v, length] triples");
                return None;
            };
            let before = errs.0.len();
            let edges: Vec<Edge> = list
                .iter()
                .enumerate()
                .filter_map(|(i, e)| {
                    let p = child(&ep, i);
                    match e.as_array().map(Vec::as_slice) {
                        Some([u, v, l]) => {
                            let u = usize_value(u, &child(&p, 0), errs);
                            let v = usize_value(v, &child(&p, 1), errs);
                            let l = finite_value(l, &child(&p, 2), errs);
                            Some(Edge { u: u?, v: v?, length: l? })
                        }
                        _ => {
                            errs.push(&p, "expected [u, v, length]");
                            None
                        }
                    }
                })
                .collect();
            (errs.0.len() == before).then_some(SpaceSpec::GraphCone { vertices: vertices?, edges })
        }
        "open_book" => {
            unknown_keys(obj, ptr, &["kind", "K", "d"], errs);
            let pages = get_usize(obj, "K", ptr, errs);
            let dim = get_usize(obj, "d", ptr, errs);
            Some(SpaceSpec::OpenBook { pages: pages?, dim: dim? })
        }
        other => {
            errs.push(&kind_ptr, format!("unknown space kind {other:?}"));
            None
        }
    }
}

fn parse_direction(space: &Space, v: &Value, ptr: &str, errs: &mut Errors) -> Option<Direction> {
    match space.directions() {
        DirectionSpace::FiniteSet(_) => usize_value(v, ptr, errs).map(Direction::Index),
        DirectionSpace::Circle { .. } => finite_value(v, ptr, errs).map(Direction::Angle),
        DirectionSpace::Graph(_) => {
            let obj = as_object(v, ptr, errs)?;
            unknown_keys(obj, ptr, &["edge", "offset"], errs);
            let edge = get_usize(obj, "edge", ptr, errs);
            let offset = get_finite(obj, "offset", ptr, errs);
            Some(Direction::Edge { edge: edge?, offset: offset? })
        }
    }
}

/// Without a valid space only the radius and shape are checked.
fn parse_point(space: Option<&Space>, v: &Value, ptr: &str, errs: &mut Errors) -> Option<Point> {
    let obj = as_object(v, ptr, errs)?;
    unknown_keys(obj, ptr, &["dir", "r", "eu"], errs);
    let rp = child(ptr, "r");
    let radius = match obj.get("r").and_then(Value::as_f64) {
        Some(r) if r.is_finite() && r >= 0.0 => Some(r),
        Some(r) => {
            errs.push(&rp, format!("radius must be nonnegative and finite, got {r}"));
            None
        }
        None => {
            errs.push(&rp, "expected a nonnegative number");
            None
        }
    };
    let euclid = match obj.get("eu") {
        None => Some(Vec::new()),
        Some(Value::Array(xs)) => {
            let ep = child(ptr, "eu");
            let out: Vec<Option<f64>> =
                xs.iter().enumerate().map(|(i, x)| finite_value(x, &child(&ep, i), errs)).collect();
            out.into_iter().collect()
        }
        Some(_) => {
            errs.push(&child(ptr, "eu"), "expected an array of numbers");
            None
        }
    };
    let space = space?;
    let dp = child(ptr, "dir");
    let dir = match obj.get("dir") {
        None | Some(Value::Null) => Some(None),
        Some(d) => parse_direction(space, d, &dp, errs).map(Some),
    };
    let (radius, euclid, dir) = (radius?, euclid?, dir?);
    if radius > 0.0 && dir.is_none() {
        errs.push(&dp, "a point with positive radius needs a direction");
        return None;
    }
    match space.make_point(dir, radius, euclid) {
        Ok(p) => Some(p),
        Err(e) => {
            errs.push(ptr, e.to_string());
            None
        }
    }
}

fn parse_measure(space: Option<&Space>, v: &Value, ptr: &str, errs: &mut Errors) -> Option<Measure> {
    let Some(list) = v.as_array() else {
        errs.push(ptr, "expected an array of {point, weight} atoms");
        return None;
    };
    if list.is_empty() {
        errs.push(ptr, "measure has no atoms");
        return None;
    }
    let before = errs.0.len();
    let mut atoms = Vec::with_capacity(list.len());
    let mut total = 0.0;
    let mut weights_ok = true;
    for (i, atom) in list.iter().enumerate() {
        let ap = child(ptr, i);
        let Some(obj) = as_object(atom, &ap, errs) else { continue };
        unknown_keys(obj, &ap, &["point", "weight"], errs);
        let point = match obj.get("point") {
            Some(p) => parse_point(space, p, &child(&ap, "point"), errs),
            None => {
                errs.push(&child(&ap, "point"), "missing");
                None
            }
        };
        let wp = child(&ap, "weight");
        let weight = match obj.get("weight").and_then(Value::as_f64) {
            Some(w) if w.is_finite() && w > 0.0 => {
                total += w;
                Some(w)
            }
            _ => {
                weights_ok = false;
                errs.push(&wp, "weight must be a positive number");
                None
            }
        };
        if let (Some(p), Some(w)) = (point, weight) {
            atoms.push((p, w));
        }
    }
    if weights_ok && atoms_seen(list) && (total - 1.0).abs() > WEIGHT_SUM_TOL {
        errs.push(ptr, format!("weights must sum to 1, got {total}"));
    }
    if errs.0.len() != before {
        return None;
    }
    let space = space?;
    if (total - 1.0).abs() > 1e-12 {
        // fold decimal rounding into the last atom
        if let Some(last) = atoms.last_mut() {
            last.1 += 1.0 - total;
        }
    }
    match Measure::new(space, atoms) {
        Ok(m) => Some(m),
        Err(e) => {
            errs.push(ptr, e.to_string());
            None
        }
    }
}

fn atoms_seen(list: &[Value]) -> bool {
    list.iter().all(Value::is_object)
}

fn parse_parameters(space: Option<&Space>, v: &Value, ptr: &str, errs: &mut Errors) -> Parameters {
    let mut p = Parameters::default();
    let Some(obj) = as_object(v, ptr, errs) else { return p };
    unknown_keys(
        obj,
        ptr,
        &["y", "t_grid", "n_grid", "n", "q", "trials", "seed", "grid", "k", "other", "divergences"],
        errs,
    );
    for (key, v) in obj {
        let kp = child(ptr, key);
        match key.as_str() {
            "y" => p.y = parse_point(space, v, &kp, errs),
            "t_grid" => {
                p.t_grid = number_list(v, &kp, errs);
                if let Some(ts) = &p.t_grid {
                    for (i, t) in ts.iter().enumerate() {
                        if !(0.0..1.0).contains(t) {
                            errs.push(&child(&kp, i), format!("t must lie in [0, 1), got {t}"));
                        }
                    }
                }
            }
            "n_grid" => {
                let Some(list) = v.as_array() else {
                    errs.push(&kp, "expected an array of sample sizes");
                    continue;
                };
                let ns: Option<Vec<usize>> =
                    list.iter().enumerate().map(|(i, x)| positive(x, &child(&kp, i), errs)).collect();
                if let Some(ns) = &ns {
                    if ns.is_empty() {
                        errs.push(&kp, "needs at least one sample size");
                    }
                    if ns.windows(2).any(|w| w[0] >= w[1]) {
                        errs.push(&kp, "sample sizes must be strictly increasing");
                    }
                }
                p.n_grid = ns;
            }
            "n" => p.n = positive(v, &kp, errs),
            "q" => {
                p.q = finite_value(v, &kp, errs);
                if p.q.is_some_and(|q| q < 1.0) {
                    errs.push(&kp, "order must be at least 1");
                }
            }
            "trials" => {
                p.trials = positive(v, &kp, errs).map(|t| t as u64);
                if p.trials == Some(1) {
                    errs.push(&kp, "need at least 2 trials");
                }
            }
            "seed" => match v.as_u64() {
                Some(s) => p.seed = Some(s),
                None => errs.push(&kp, "expected an unsigned 64-bit integer"),
            },
            "grid" => p.grid = positive(v, &kp, errs),
            "k" => {
                p.k = finite_value(v, &kp, errs);
                if p.k.is_some_and(|k| k < 0.0) {
                    errs.push(&kp, "covering exponent must be nonnegative");
                }
            }
            "other" => p.other = parse_measure(space, v, &kp, errs),
            "divergences" => {
                let Some(list) = v.as_array() else {
                    errs.push(&kp, "expected an array of generator names");
                    continue;
                };
                let mut names = Vec::new();
                for (i, x) in list.iter().enumerate() {
                    match x.as_str() {
                        Some(s @ ("tv" | "kl" | "js" | "hellinger")) => names.push(s.to_string()),
                        _ => errs.push(&child(&kp, i), "expected one of tv, kl, js, hellinger"),
                    }
                }
                p.divergences = Some(names);
            }
            _ => {}
        }
    }
    p
}

fn positive(v: &Value, ptr: &str, errs: &mut Errors) -> Option<usize> {
    match usize_value(v, ptr, errs) {
        Some(0) => {
            errs.push(ptr, "must be positive");
            None
        }
        x => x,
    }
}

fn number_list(v: &Value, ptr: &str, errs: &mut Errors) -> Option<Vec<f64>> {
    let Some(list) = v.as_array() else {
        errs.push(ptr, "expected an array of numbers");
        return None;
    };
    list.iter().enumerate().map(|(i, x)| finite_value(x, &child(ptr, i), errs)).collect()
}

fn parse_output(v: &Value, ptr: &str, errs: &mut Errors) -> Output {
    let mut out = Output::default();
    let Some(obj) = as_object(v, ptr, errs) else { return out };
    unknown_keys(obj, ptr, &["path", "format"], errs);
    if let Some(p) = obj.get("path") {
        match p.as_str() {
            Some(s) if !s.is_empty() => out.path = Some(PathBuf::from(s)),
            _ => errs.push(&child(ptr, "path"), "expected a nonempty string"),
        }
    }
    if let Some(f) = obj.get("format") {
        match f.as_str().and_then(Format::from_name) {
            Some(f) => out.format = f,
            None => errs.push(&child(ptr, "format"), "expected csv or json"),
        }
    }
    out
}

fn measure_json(m: &Measure) -> Value {
    serde_json::to_value(m).expect("measures serialize")
}

impl ExperimentConfig {
    /// Canonical JSON form: object keys sorted, points canonicalized,
    /// repeated atoms merged, absent parameters omitted.
    pub fn to_json(&self) -> Value {
        let mut root = Map::new();
        root.insert("space".into(), self.space_spec.to_json());
        root.insert("measure".into(), measure_json(&self.measure));
        if let Some(c) = self.command {
            root.insert("command".into(), c.name().into());
        }
        let p = &self.parameters;
        let mut params = Map::new();
        let mut put = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                params.insert(k.into(), v);
            }
        };
        put("y", p.y.as_ref().map(|y| serde_json::to_value(y).expect("points serialize")));
        put("t_grid", p.t_grid.as_ref().map(|t| json!(t)));
        put("n_grid", p.n_grid.as_ref().map(|n| json!(n)));
        put("n", p.n.map(|n| json!(n)));
        put("q", p.q.map(|q| json!(q)));
        put("trials", p.trials.map(|t| json!(t)));
        put("seed", p.seed.map(|s| json!(s)));
        put("grid", p.grid.map(|g| json!(g)));
        put("k", p.k.map(|k| json!(k)));
        put("other", p.other.as_ref().map(measure_json));
        put("divergences", p.divergences.as_ref().map(|d| json!(d)));
        if !params.is_empty() {
            root.insert("parameters".into(), Value::Object(params));
        }
        let mut out = Map::new();
        if let Some(path) = &self.output.path {
            out.insert("path".into(), path.to_string_lossy().into_owned().into());
        }
        out.insert("format".into(), self.output.format.name().into());
        root.insert("output".into(), Value::Object(out));
        Value::Object(root)
    }

    pub fn to_canonical_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("config serializes")
    }
}
