//! Strict JSON configuration: a single archivable document per run, with
//! unknown keys rejected by name at every level. Command-line flags act as
//! overrides on top.

use serde_json::Value;
use slowent_core::NormSpec;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub action: ActionConfig,
    pub norm: NormSpec,
    /// Absent means Haar: gamma_i = multiplicity.
    pub gammas: Option<Vec<f64>>,
    pub estimator: EstimatorConfig,
    pub search: Option<SearchConfig>,
    pub output: OutputConfig,
}

#[derive(Debug, Clone)]
pub struct ActionConfig {
    pub dim: usize,
    pub rank: usize,
    pub generators: Vec<Vec<Vec<i64>>>,
}

#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    pub eps: f64,
    pub s_grid: Vec<f64>,
    pub samples: u64,
    pub seed: u64,
    pub delta: f64,
    /// None: pick per-s automatically (ball-resolving, capped at eps/4).
    pub grid_resolution: Option<f64>,
    pub cover_s_grid: Option<Vec<f64>>,
    /// Covering radius; defaults to `eps`.
    pub cover_eps: Option<f64>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            eps: 0.02,
            s_grid: (4..=12).map(|s| s as f64).collect(),
            samples: 1_000_000,
            seed: 42,
            delta: 0.05,
            grid_resolution: None,
            cover_s_grid: None,
            cover_eps: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub family: String,
    pub budget: usize,
}

#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub directory: String,
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: "out".to_string(),
            formats: vec!["json".to_string(), "csv".to_string()],
        }
    }
}

#[derive(Debug)]
pub struct ConfigParse(pub String);

impl std::fmt::Display for ConfigParse {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ConfigParse: {}", self.0)
    }
}
impl std::error::Error for ConfigParse {}

fn fail<T>(msg: impl Into<String>) -> Result<T, ConfigParse> {
    Err(ConfigParse(msg.into()))
}

fn check_keys(obj: &serde_json::Map<String, Value>, allowed: &[&str], ctx: &str) -> Result<(), ConfigParse> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return fail(format!("unknown key \"{key}\" in {ctx}"));
        }
    }
    Ok(())
}

fn as_object<'v>(v: &'v Value, ctx: &str) -> Result<&'v serde_json::Map<String, Value>, ConfigParse> {
    v.as_object().ok_or_else(|| ConfigParse(format!("{ctx} must be an object")))
}

fn get_f64(v: &Value, ctx: &str) -> Result<f64, ConfigParse> {
    v.as_f64().ok_or_else(|| ConfigParse(format!("{ctx} must be a number")))
}

fn get_u64(v: &Value, ctx: &str) -> Result<u64, ConfigParse> {
    v.as_u64().ok_or_else(|| ConfigParse(format!("{ctx} must be a nonnegative integer")))
}

fn get_f64_list(v: &Value, ctx: &str) -> Result<Vec<f64>, ConfigParse> {
    let arr = v.as_array().ok_or_else(|| ConfigParse(format!("{ctx} must be an array")))?;
    arr.iter().map(|x| get_f64(x, ctx)).collect()
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigParse> {
    let root: Value = serde_json::from_str(text).map_err(|e| ConfigParse(e.to_string()))?;
    let obj = as_object(&root, "config root")?;
    check_keys(
        obj,
        &["action", "norm", "gammas", "estimator", "search", "output"],
        "config root",
    )?;

    let action = parse_action(obj.get("action").ok_or_else(|| ConfigParse("missing \"action\"".into()))?)?;
    let norm = parse_norm(obj.get("norm").ok_or_else(|| ConfigParse("missing \"norm\"".into()))?)?;
    let gammas = match obj.get("gammas") {
        None | Some(Value::Null) => None,
        Some(v) => Some(get_f64_list(v, "gammas")?),
    };
    let estimator = match obj.get("estimator") {
        None => EstimatorConfig::default(),
        Some(v) => parse_estimator(v)?,
    };
    let search = match obj.get("search") {
        None | Some(Value::Null) => None,
        Some(v) => Some(parse_search(v)?),
    };
    let output = match obj.get("output") {
        None => OutputConfig::default(),
        Some(v) => parse_output(v)?,
    };
    Ok(RunConfig {
        action,
        norm,
        gammas,
        estimator,
        search,
        output,
    })
}

fn parse_action(v: &Value) -> Result<ActionConfig, ConfigParse> {
    let obj = as_object(v, "action")?;
    check_keys(obj, &["dim", "rank", "generators"], "action")?;
    let gens_v = obj
        .get("generators")
        .ok_or_else(|| ConfigParse("missing \"action.generators\"".into()))?;
    let gens_arr = gens_v
        .as_array()
        .ok_or_else(|| ConfigParse("action.generators must be an array of matrices".into()))?;
    let mut generators = Vec::with_capacity(gens_arr.len());
    for (gi, g) in gens_arr.iter().enumerate() {
        let rows = g
            .as_array()
            .ok_or_else(|| ConfigParse(format!("generator {gi} must be an array of rows")))?;
        let mut matrix = Vec::with_capacity(rows.len());
        for (ri, r) in rows.iter().enumerate() {
            let row = r
                .as_array()
                .ok_or_else(|| ConfigParse(format!("generator {gi} row {ri} must be an array")))?;
            let mut out = Vec::with_capacity(row.len());
            for e in row {
                let val = e.as_i64().ok_or_else(|| {
                    ConfigParse(format!("generator {gi} row {ri}: entries must be integers"))
                })?;
                out.push(val);
            }
            matrix.push(out);
        }
        generators.push(matrix);
    }
    let dim = match obj.get("dim") {
        Some(v) => get_u64(v, "action.dim")? as usize,
        None => generators.first().map(|g| g.len()).unwrap_or(0),
    };
    let rank = match obj.get("rank") {
        Some(v) => get_u64(v, "action.rank")? as usize,
        None => generators.len(),
    };
    if rank != generators.len() {
        return fail(format!(
            "action.rank = {rank} but {} generators given",
            generators.len()
        ));
    }
    if let Some(g) = generators.first() {
        if g.len() != dim {
            return fail(format!(
                "action.dim = {dim} but generators are {}x{}",
                g.len(),
                g.len()
            ));
        }
    }
    Ok(ActionConfig {
        dim,
        rank,
        generators,
    })
}

fn parse_norm(v: &Value) -> Result<NormSpec, ConfigParse> {
    let obj = as_object(v, "norm")?;
    let kind = obj
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| ConfigParse("norm.kind must be a string".into()))?;
    match kind {
        "l1" => {
            check_keys(obj, &["kind"], "norm")?;
            Ok(NormSpec::L1)
        }
        "l2" => {
            check_keys(obj, &["kind"], "norm")?;
            Ok(NormSpec::L2)
        }
        "linf" => {
            check_keys(obj, &["kind"], "norm")?;
            Ok(NormSpec::Linf)
        }
        "weighted_box" => {
            check_keys(obj, &["kind", "weights"], "norm")?;
            let w = obj
                .get("weights")
                .ok_or_else(|| ConfigParse("weighted_box norm needs \"weights\"".into()))?;
            Ok(NormSpec::WeightedBox {
                weights: get_f64_list(w, "norm.weights")?,
            })
        }
        "polytope" => {
            check_keys(obj, &["kind", "vertices"], "norm")?;
            let verts = obj
                .get("vertices")
                .and_then(|v| v.as_array())
                .ok_or_else(|| ConfigParse("polytope norm needs \"vertices\" array".into()))?;
            let vertices = verts
                .iter()
                .map(|v| get_f64_list(v, "norm.vertices"))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(NormSpec::Polytope { vertices })
        }
        "ellipsoid" => {
            check_keys(obj, &["kind", "matrix"], "norm")?;
            let rows = obj
                .get("matrix")
                .and_then(|v| v.as_array())
                .ok_or_else(|| ConfigParse("ellipsoid norm needs \"matrix\"".into()))?;
            let matrix = rows
                .iter()
                .map(|v| get_f64_list(v, "norm.matrix"))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(NormSpec::Ellipsoid { matrix })
        }
        other => fail(format!(
            "unknown norm kind \"{other}\" (expected l1, l2, linf, weighted_box, polytope, ellipsoid)"
        )),
    }
}

fn parse_estimator(v: &Value) -> Result<EstimatorConfig, ConfigParse> {
    let obj = as_object(v, "estimator")?;
    check_keys(
        obj,
        &[
            "eps",
            "s_grid",
            "samples",
            "seed",
            "delta",
            "grid_resolution",
            "cover_s_grid",
            "cover_eps",
        ],
        "estimator",
    )?;
    let mut cfg = EstimatorConfig::default();
    if let Some(v) = obj.get("eps") {
        cfg.eps = get_f64(v, "estimator.eps")?;
    }
    if let Some(v) = obj.get("s_grid") {
        cfg.s_grid = get_f64_list(v, "estimator.s_grid")?;
    }
    if let Some(v) = obj.get("samples") {
        cfg.samples = get_u64(v, "estimator.samples")?;
    }
    if let Some(v) = obj.get("seed") {
        cfg.seed = get_u64(v, "estimator.seed")?;
    }
    if let Some(v) = obj.get("delta") {
        cfg.delta = get_f64(v, "estimator.delta")?;
    }
    match obj.get("grid_resolution") {
        None | Some(Value::Null) => {}
        Some(v) => cfg.grid_resolution = Some(get_f64(v, "estimator.grid_resolution")?),
    }
    match obj.get("cover_s_grid") {
        None | Some(Value::Null) => {}
        Some(v) => cfg.cover_s_grid = Some(get_f64_list(v, "estimator.cover_s_grid")?),
    }
    match obj.get("cover_eps") {
        None | Some(Value::Null) => {}
        Some(v) => cfg.cover_eps = Some(get_f64(v, "estimator.cover_eps")?),
    }
    Ok(cfg)
}

fn parse_search(v: &Value) -> Result<SearchConfig, ConfigParse> {
    let obj = as_object(v, "search")?;
    check_keys(obj, &["family", "budget"], "search")?;
    let family = obj
        .get("family")
        .and_then(|f| f.as_str())
        .unwrap_or("weighted_box")
        .to_string();
    if family != "weighted_box" && family != "ellipsoid" {
        return fail(format!(
            "unknown search family \"{family}\" (expected weighted_box or ellipsoid)"
        ));
    }
    let budget = match obj.get("budget") {
        Some(v) => get_u64(v, "search.budget")? as usize,
        None => 2000,
    };
    Ok(SearchConfig { family, budget })
}

fn parse_output(v: &Value) -> Result<OutputConfig, ConfigParse> {
    let obj = as_object(v, "output")?;
    check_keys(obj, &["directory", "formats"], "output")?;
    let mut cfg = OutputConfig::default();
    if let Some(v) = obj.get("directory") {
        cfg.directory = v
            .as_str()
            .ok_or_else(|| ConfigParse("output.directory must be a string".into()))?
            .to_string();
    }
    if let Some(v) = obj.get("formats") {
        let arr = v
            .as_array()
            .ok_or_else(|| ConfigParse("output.formats must be an array".into()))?;
        cfg.formats = arr
            .iter()
            .map(|f| {
                let s = f
                    .as_str()
                    .ok_or_else(|| ConfigParse("output.formats entries must be strings".into()))?;
                if !["json", "csv", "svg"].contains(&s) {
                    return fail(format!("unknown output format \"{s}\""));
                }
                Ok(s.to_string())
            })
            .collect::<Result<Vec<_>, _>>()?;
    }
    Ok(cfg)
}
