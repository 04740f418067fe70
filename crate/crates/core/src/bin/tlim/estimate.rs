use std::path::Path;

use serde_json::{json, Value};

use tlim::estimators::{coupling_factor, EstimatorConfig, InteractionEstimate, TargetSpec};
use tlim::independence::{blanket_screen, DEFAULT_THRESHOLD};
use tlim::uncertainty::{estimate_batch, BatchKind, BootstrapConfig, TupleResult};
use tlim::{DataView, SampleMatrix};

use crate::common::{
    config_err, lattice_for, load_matrix, manifest, neighbour_blanket, read_parents_file, read_source_manifest,
    seed_or_entropy, target_tuples, var_list, write_json, CliError, ParentsFile,
};
use crate::{EstimateArgs, ScreenArgs};

/// Tuples paired with their conditioning sets (`None` means "everything else").
type Plan = Vec<(Vec<usize>, Option<Vec<usize>>)>;

struct PlanRequest<'a> {
    targets: &'a str,
    order: Option<usize>,
    condition: &'a str,
    parents_file: Option<&'a Path>,
    cond_vars: Option<&'a str>,
    model: Option<&'a str>,
    side: Option<usize>,
    outcome: Option<usize>,
}

type ConditioningRule = Box<dyn Fn(&[usize]) -> Option<Vec<usize>>>;

fn plan(m: &SampleMatrix, r: &PlanRequest<'_>) -> Result<Plan, CliError> {
    if let (Some(path), "parents") = (r.parents_file, r.condition) {
        if let ParentsFile::Tuples(t) = read_parents_file(m, path)? {
            let mut t: Plan = t.into_iter().map(|(tg, c)| (tg, Some(c))).collect();
            t.sort();
            return Ok(t);
        }
    }
    let mut tuples = target_tuples(m, r.targets, r.order, r.side, r.outcome)?;
    tuples.sort();
    let conditioning: ConditioningRule = match r.condition {
        "full" => Box::new(|_| None),
        "none" => Box::new(|_| Some(Vec::new())),
        "list" => {
            let vars = var_list(m, r.cond_vars.ok_or_else(|| config_err("--condition list needs --cond-vars"))?)?;
            Box::new(move |t| Some(vars.iter().copied().filter(|v| !t.contains(v)).collect()))
        }
        "parents" => match r.parents_file {
            Some(path) => match read_parents_file(m, path)? {
                ParentsFile::Neighbours(nb) => Box::new(move |t| Some(neighbour_blanket(&nb, t))),
                ParentsFile::Tuples(_) => unreachable!("handled above"),
            },
            None => {
                let lattice = lattice_for(m, r.side)?;
                match r.model.unwrap_or("ising") {
                    "ising" => Box::new(move |t| Some(lattice.ising_blanket(t))),
                    "plaquette" => Box::new(move |t| Some(lattice.plaquette_blanket(t))),
                    other => return Err(config_err(format!("no parent sets for model '{other}'"))),
                }
            }
        },
        other => return Err(config_err(format!("unknown conditioning mode '{other}'"))),
    };
    Ok(tuples.into_iter().map(|t| {
        let c = conditioning(&t);
        (t, c)
    }).collect())
}

fn names(m: &SampleMatrix, vars: &[usize]) -> Vec<String> {
    vars.iter().map(|&v| m.variable(v).name.clone()).collect()
}

fn record(m: &SampleMatrix, r: &TupleResult, label: &str) -> Value {
    let t = &r.spec.targets;
    let mut rec = json!({
        "targets": t,
        "names": names(m, t),
        "conditioning": label,
    });
    let est: &InteractionEstimate = match &r.estimate {
        Ok(e) => e,
        Err(e) => {
            rec["error"] = json!(e.to_string());
            return rec;
        }
    };
    let factor = coupling_factor(t.len()).ok().filter(|_| est.log_value.is_some());
    let reference: Vec<(String, u8)> = est.reference.pairs().iter().map(|&(v, x)| (m.variable(v).name.clone(), x)).collect();
    rec["conditioning_vars"] = json!(reference.iter().map(|(n, _)| n).collect::<Vec<_>>());
    rec["reference"] = json!(reference);
    rec["transitions"] = json!(est.transitions);
    rec["kind"] = json!(est.kind);
    rec["value"] = json!(est.value);
    rec["log_value"] = json!(est.log_value);
    rec["coupling"] = json!(factor.map(|f| est.log_scale() / f));
    rec["cells"] = json!(est.cells);
    rec["flags"] = json!(est.flags);
    match &r.boot {
        Some(Ok(b)) => {
            rec["boot"] = b.record();
            rec["coupling_stderr"] = json!(factor.map(|f| b.stderr / f.abs()));
        }
        Some(Err(e)) => rec["boot"] = json!({"error": e.to_string()}),
        None => {}
    }
    rec
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn write_records_csv(path: &Path, records: &[Value]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| crate::common::io_err(path, e))?;
    let header = ["targets", "conditioning", "kind", "value", "log_value", "coupling", "coupling_stderr", "stderr", "ci_low", "ci_high", "status", "error"];
    w.write_record(header).map_err(|e| crate::common::io_err(path, e))?;
    for r in records {
        let names: Vec<String> = r["names"].as_array().into_iter().flatten().map(csv_cell).collect();
        let boot = &r["boot"];
        let row = [
            names.join("-"),
            csv_cell(&r["conditioning"]),
            csv_cell(&r["kind"]),
            csv_cell(&r["value"]),
            csv_cell(&r["log_value"]),
            csv_cell(&r["coupling"]),
            csv_cell(&r["coupling_stderr"]),
            csv_cell(&boot["stderr"]),
            csv_cell(&boot["ci"][0]),
            csv_cell(&boot["ci"][1]),
            csv_cell(&r["flags"]["status"]),
            csv_cell(&r["error"]),
        ];
        w.write_record(&row).map_err(|e| crate::common::io_err(path, e))?;
    }
    w.flush().map_err(|e| crate::common::io_err(path, e))
}

fn input_path(p: &Option<std::path::PathBuf>) -> Result<&Path, CliError> {
    p.as_deref().ok_or_else(|| config_err("--input is required"))
}

fn emit(output: Option<&Path>, doc: &Value, records: &[Value]) -> Result<(), CliError> {
    match output {
        Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => {
            write_records_csv(p, records)?;
            write_json(&crate::common::manifest_path(p), &doc["manifest"])
        }
        Some(p) => write_json(p, doc),
        None => {
            println!("{}", serde_json::to_string_pretty(doc).expect("json values serialize"));
            Ok(())
        }
    }
}

pub fn run_estimate(mut a: EstimateArgs, argv: Vec<String>) -> Result<(), CliError> {
    let seed = seed_or_entropy(a.seed);
    a.seed = Some(seed);
    let input = input_path(&a.input)?;
    let m = load_matrix(input)?;

    let kind_name = a.kind.clone().unwrap_or_else(|| if a.outcome.is_some() { "additive" } else { "multiplicative" }.into());
    let (kind, outcome) = match kind_name.as_str() {
        "multiplicative" => (BatchKind::Multiplicative, None),
        "additive" => {
            let name = a.outcome.as_deref().ok_or_else(|| config_err("additive estimates need --outcome"))?;
            let o = crate::common::var_index(&m, name)?;
            (BatchKind::Additive { outcome: o }, Some(o))
        }
        other => return Err(config_err(format!("unknown estimate kind '{other}'"))),
    };
    let strata = match &a.strata {
        Some(s) => var_list(&m, s)?,
        None => Vec::new(),
    };
    let condition = a.condition.clone().unwrap_or_else(|| "full".into());
    let default_targets = if outcome.is_some() { "all" } else { "nn-pairs" };
    let targets = a.targets.clone().unwrap_or_else(|| default_targets.into());
    let order = a.order.or((targets == "all").then_some(if outcome.is_some() { 1 } else { 2 }));
    let planned = plan(
        &m,
        &PlanRequest {
            targets: &targets,
            order,
            condition: &condition,
            parents_file: a.parents_file.as_deref(),
            cond_vars: a.cond_vars.as_deref(),
            model: a.model.as_deref(),
            side: a.side,
            outcome,
        },
    )?;
    let planned: Plan = planned.into_iter().filter(|(t, _)| t.iter().all(|v| !strata.contains(v))).collect();
    if planned.is_empty() {
        return Err(config_err("no tuples to estimate"));
    }
    let specs: Vec<TargetSpec> = planned
        .into_iter()
        .map(|(t, c)| {
            let s = TargetSpec::new(t).with_strata(strata.clone());
            match c {
                Some(c) => s.with_conditioning(c.into_iter().filter(|v| !strata.contains(v)).collect::<Vec<_>>()),
                None => s,
            }
        })
        .collect();

    let cfg = EstimatorConfig::flagging(a.min_bin.unwrap_or(EstimatorConfig::default().min_bin_count));
    let replicates = a.boot_b.unwrap_or(100);
    let boot = (replicates > 0).then_some(BootstrapConfig { replicates, seed });
    let results = estimate_batch(&m, &specs, kind, &cfg, boot.as_ref());

    let records: Vec<Value> = results.iter().map(|r| record(&m, r, &condition)).collect();
    let n_failed = results.iter().filter(|r| r.estimate.is_err()).count();
    let doc = json!({
        "manifest": manifest("estimate", &argv, Some(seed), &a),
        "source": read_source_manifest(input).map(|s| s["config"].clone()),
        "records": records,
    });
    emit(a.output.as_deref(), &doc, &records)?;
    eprintln!("{} tuples, {} failed", results.len(), n_failed);
    if n_failed == results.len() {
        return Err(CliError::AllFailed(format!("all {n_failed} tuples failed")));
    }
    Ok(())
}

pub fn run_screen(a: ScreenArgs, argv: Vec<String>) -> Result<(), CliError> {
    let input = input_path(&a.input)?;
    let m = load_matrix(input)?;
    let condition = a.condition.clone().unwrap_or_else(|| "none".into());
    let targets = a.targets.clone().unwrap_or_else(|| "all-pairs".into());
    let planned = plan(
        &m,
        &PlanRequest {
            targets: &targets,
            order: Some(2),
            condition: &condition,
            parents_file: a.parents_file.as_deref(),
            cond_vars: a.cond_vars.as_deref(),
            model: a.model.as_deref(),
            side: a.side,
            outcome: None,
        },
    )?;
    let mut pairs = Vec::with_capacity(planned.len());
    let mut parents = Vec::with_capacity(planned.len());
    for (t, c) in planned {
        let [i, j] = t[..] else {
            return Err(config_err("screening needs pairs"));
        };
        pairs.push((i, j));
        parents.push(c.unwrap_or_else(|| {
            m.discrete_vars().into_iter().filter(|v| *v != i && *v != j).collect()
        }));
    }
    let threshold = a.threshold.unwrap_or(DEFAULT_THRESHOLD);
    let rows = blanket_screen(&DataView::new(&m), &pairs, &parents)?;

    let records: Vec<Value> = rows
        .iter()
        .map(|r| {
            let mut rec = json!({
                "pair": names(&m, &[r.pair.0, r.pair.1]),
                "parents": names(&m, &r.parents),
            });
            match &r.result {
                Ok(t) => {
                    rec["statistic"] = json!(t.statistic);
                    rec["dof"] = json!(t.dof);
                    rec["p_value"] = json!(t.p_value);
                    rec["verdict"] = json!(t.verdict(threshold));
                }
                Err(e) => rec["error"] = json!(e.to_string()),
            }
            rec
        })
        .collect();
    let n_failed = rows.iter().filter(|r| r.result.is_err()).count();
    let doc = json!({
        "manifest": manifest("screen", &argv, None, &a),
        "source": read_source_manifest(input).map(|s| s["config"].clone()),
        "threshold": threshold,
        "records": records,
    });
    match a.output.as_deref() {
        Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => {
            let mut w = csv::Writer::from_path(p).map_err(|e| crate::common::io_err(p, e))?;
            w.write_record(["pair", "parents", "statistic", "dof", "p_value", "verdict", "error"])
                .map_err(|e| crate::common::io_err(p, e))?;
            for r in &records {
                let pair: Vec<String> = r["pair"].as_array().into_iter().flatten().map(csv_cell).collect();
                let par: Vec<String> = r["parents"].as_array().into_iter().flatten().map(csv_cell).collect();
                w.write_record([
                    pair.join("-"),
                    par.join(" "),
                    csv_cell(&r["statistic"]),
                    csv_cell(&r["dof"]),
                    csv_cell(&r["p_value"]),
                    csv_cell(&r["verdict"]),
                    csv_cell(&r["error"]),
                ])
                .map_err(|e| crate::common::io_err(p, e))?;
            }
            w.flush().map_err(|e| crate::common::io_err(p, e))?;
            write_json(&crate::common::manifest_path(p), &doc["manifest"])?;
        }
        Some(p) => write_json(p, &doc)?,
        None => println!("{}", serde_json::to_string_pretty(&doc).expect("json values serialize")),
    }
    if n_failed == rows.len() {
        return Err(CliError::AllFailed(format!("all {n_failed} pairs failed")));
    }
    Ok(())
}
