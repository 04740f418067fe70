use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use tlim::simulators::Lattice;
use tlim::store::{csv as store_csv, packed, SampleMatrix};
use tlim::Error;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    AllFailed(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
            CliError::AllFailed(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Io(m) | CliError::AllFailed(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Parse { .. } | Error::OutOfRange { .. } | Error::Format(_) | Error::Json(_) => {
                CliError::Io(e.to_string())
            }
            Error::AllReplicatesFailed { .. } => CliError::AllFailed(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub fn io_err(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn config_err(m: impl Into<String>) -> CliError {
    CliError::Config(m.into())
}

/// Flags given on the command line win over keys in the TOML file.
pub fn merge_config<T: Serialize + DeserializeOwned>(cli: &T, file: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = file else {
        return Ok(serde_json::from_value(serde_json::to_value(cli).expect("args serialize")).expect("args round-trip"));
    };
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let from_file: toml::Value = toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let mut merged = serde_json::to_value(from_file).map_err(|e| config_err(e.to_string()))?;
    let Value::Object(flags) = serde_json::to_value(cli).expect("args serialize") else {
        unreachable!("argument structs serialize to objects")
    };
    let target = merged.as_object_mut().ok_or_else(|| config_err("config file must be a table"))?;
    for (k, v) in flags {
        let unset = v.is_null() || v.as_array().is_some_and(|a| a.is_empty());
        if !unset || !target.contains_key(&k) {
            target.insert(k, v);
        }
    }
    serde_json::from_value(merged).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub fn load_matrix(path: &Path) -> Result<SampleMatrix, CliError> {
    if !path.exists() {
        return Err(io_err(path, "no such file"));
    }
    let m = if is_csv(path) {
        let schema = store_csv::infer_schema(path)?;
        store_csv::load_csv(path, &schema)?
    } else {
        packed::read(path)?
    };
    Ok(m)
}

pub fn save_matrix(m: &SampleMatrix, path: &Path) -> Result<(), CliError> {
    if is_csv(path) {
        store_csv::write_csv(m, path)?;
    } else {
        packed::write(m, path)?;
    }
    Ok(())
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn manifest(command: &str, argv: &[String], seed: Option<u64>, config: &impl Serialize) -> Value {
    json!({
        "command": command,
        "args": argv.get(1..).unwrap_or_default(),
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
    })
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("json values serialize");
    std::fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

/// The manifest written next to a dataset, if any.
pub fn read_source_manifest(data: &Path) -> Option<Value> {
    let text = std::fs::read_to_string(manifest_path(data)).ok()?;
    serde_json::from_str(&text).ok()
}

pub fn seed_or_entropy(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random::<u64>)
}

/// Resolves a variable given by name or by index.
pub fn var_index(m: &SampleMatrix, token: &str) -> Result<usize, CliError> {
    let token = token.trim();
    if let Ok(i) = m.index_of(token) {
        return Ok(i);
    }
    match token.parse::<usize>() {
        Ok(i) if i < m.n_vars() => Ok(i),
        _ => Err(config_err(format!("unknown variable '{token}'"))),
    }
}

pub fn var_list(m: &SampleMatrix, text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',').filter(|t| !t.trim().is_empty()).map(|t| var_index(m, t)).collect()
}

/// Lattice side from the flag, or from a square number of binary columns.
pub fn lattice_for(m: &SampleMatrix, side: Option<usize>) -> Result<Lattice, CliError> {
    let side = match side {
        Some(s) => s,
        None => {
            let n = m.discrete_vars().len();
            let s = (n as f64).sqrt().round() as usize;
            if s * s != n || s < 2 {
                return Err(config_err(format!("cannot infer a lattice from {n} variables; pass --L")));
            }
            s
        }
    };
    if side * side > m.n_vars() {
        return Err(config_err(format!("lattice side {side} needs {} columns", side * side)));
    }
    Ok(Lattice::new(side))
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items.len() < k {
        return vec![];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        for mut rest in combinations(&items[i + 1..], k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Expands a `--targets` value into tuples.
pub fn target_tuples(
    m: &SampleMatrix,
    targets: &str,
    order: Option<usize>,
    side: Option<usize>,
    outcome: Option<usize>,
) -> Result<Vec<Vec<usize>>, CliError> {
    let lattice = || lattice_for(m, side);
    let discrete: Vec<usize> = m.discrete_vars().into_iter().filter(|&v| Some(v) != outcome).collect();
    Ok(match targets {
        "nn-pairs" => lattice()?.nn_pairs().into_iter().map(|(a, b)| vec![a, b]).collect(),
        "non-nn-pairs" => lattice()?.non_nn_pairs().into_iter().map(|(a, b)| vec![a, b]).collect(),
        "plaquettes" => lattice()?.plaquettes().into_iter().map(|p| p.to_vec()).collect(),
        "plaquette-triples" => lattice()?.plaquette_triples().into_iter().map(|p| p.to_vec()).collect(),
        "sites" => (0..lattice()?.n_sites()).map(|s| vec![s]).collect(),
        "all-pairs" => combinations(&discrete, 2),
        "all" => {
            let k = order.ok_or_else(|| config_err("--targets all needs --order"))?;
            if k == 0 {
                return Err(config_err("--order must be at least 1"));
            }
            combinations(&discrete, k)
        }
        explicit => explicit
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|tuple| tuple.split('-').map(|v| var_index(m, v)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?,
    })
}

/// Parent sets from a JSON file: a neighbour map, or explicit tuples.
pub enum ParentsFile {
    Neighbours(Vec<Vec<usize>>),
    Tuples(Vec<(Vec<usize>, Vec<usize>)>),
}

pub fn read_parents_file(m: &SampleMatrix, path: &Path) -> Result<ParentsFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| io_err(path, e))?;
    let as_vars = |x: &Value| -> Result<Vec<usize>, CliError> {
        x.as_array()
            .ok_or_else(|| config_err("expected an array of variables"))?
            .iter()
            .map(|e| match e {
                Value::String(s) => var_index(m, s),
                Value::Number(n) => var_index(m, &n.to_string()),
                _ => Err(config_err("variables are names or indices")),
            })
            .collect()
    };
    if let Some(map) = v.get("neighbours").and_then(Value::as_object) {
        let mut nb = vec![Vec::new(); m.n_vars()];
        for (k, list) in map {
            nb[var_index(m, k)?] = as_vars(list)?;
        }
        return Ok(ParentsFile::Neighbours(nb));
    }
    if let Some(list) = v.get("tuples").and_then(Value::as_array) {
        let tuples = list
            .iter()
            .map(|t| Ok((as_vars(&t["targets"])?, as_vars(&t["conditioning"])?)))
            .collect::<Result<_, CliError>>()?;
        return Ok(ParentsFile::Tuples(tuples));
    }
    Err(config_err(format!("{}: expected a \"neighbours\" or \"tuples\" key", path.display())))
}

/// Union of the listed neighbours of the targets, minus the targets.
pub fn neighbour_blanket(nb: &[Vec<usize>], targets: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = targets.iter().flat_map(|&t| nb[t].iter().copied()).filter(|v| !targets.contains(v)).collect();
    out.sort_unstable();
    out.dedup();
    out
}
