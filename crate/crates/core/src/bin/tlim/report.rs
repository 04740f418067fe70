use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::common::{config_err, io_err, load_matrix, CliError};
use crate::ReportArgs;

/// Tuple count, couplings and their standard errors of one conditioning/order group.
type OrderGroup = (usize, Vec<f64>, Vec<f64>);

fn read_doc(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| io_err(path, e))
}

struct Table {
    path: PathBuf,
    writer: csv::Writer<std::fs::File>,
}

impl Table {
    fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self, CliError> {
        let path = dir.join(name);
        let mut writer = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
        writer.write_record(header).map_err(|e| io_err(&path, e))?;
        Ok(Table { path, writer })
    }

    fn row(&mut self, cells: &[String]) -> Result<(), CliError> {
        self.writer.write_record(cells).map_err(|e| io_err(&self.path, e))
    }

    fn finish(mut self) -> Result<PathBuf, CliError> {
        self.writer.flush().map_err(|e| io_err(&self.path, e))?;
        Ok(self.path)
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// Equal-width histogram over `[lo, hi]`; the last bin is closed.
fn histogram(xs: &[f64], bins: usize, lo: f64, hi: f64) -> Vec<(f64, f64, usize)> {
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in xs {
        if width > 0.0 {
            let k = (((x - lo) / width).floor() as isize).clamp(0, bins as isize - 1) as usize;
            counts[k] += 1;
        } else {
            counts[0] += 1;
        }
    }
    counts.into_iter().enumerate().map(|(k, c)| (lo + k as f64 * width, lo + (k + 1) as f64 * width, c)).collect()
}

pub fn run(a: ReportArgs) -> Result<(), CliError> {
    let dir = a.output.clone().ok_or_else(|| config_err("report needs -o <directory>"))?;
    std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let bins = a.bins.unwrap_or(20);
    if bins == 0 {
        return Err(config_err("--bins must be positive"));
    }
    let mut written = Vec::new();

    if !a.estimates.is_empty() {
        let mut per_tuple = Table::create(
            &dir,
            "per_tuple.csv",
            &["source", "temperature", "targets", "order", "conditioning", "coupling", "coupling_stderr", "log_value", "stderr", "ci_low", "ci_high", "status"],
        )?;
        let mut bin_sizes = Table::create(&dir, "bin_sizes.csv", &["source", "temperature", "targets", "cell", "support"])?;
        let mut summary = Table::create(
            &dir,
            "coupling_vs_temperature.csv",
            &["source", "temperature", "conditioning", "order", "n_tuples", "n_estimable", "mean_coupling", "sd_coupling", "mean_stderr"],
        )?;
        for path in &a.estimates {
            let doc = read_doc(path)?;
            let src = path.display().to_string();
            let temp = cell(&doc["source"]["T"]);
            let records = doc["records"].as_array().cloned().unwrap_or_default();
            let mut by_order: BTreeMap<(String, usize), OrderGroup> = Default::default();
            for r in &records {
                let names: Vec<String> = r["names"].as_array().into_iter().flatten().map(cell).collect();
                let order = names.len();
                let entry = by_order.entry((cell(&r["conditioning"]), order)).or_default();
                entry.0 += 1;
                let boot = &r["boot"];
                per_tuple.row(&[
                    src.clone(),
                    temp.clone(),
                    names.join("-"),
                    order.to_string(),
                    cell(&r["conditioning"]),
                    cell(&r["coupling"]),
                    cell(&r["coupling_stderr"]),
                    cell(&r["log_value"]),
                    cell(&boot["stderr"]),
                    cell(&boot["ci"][0]),
                    cell(&boot["ci"][1]),
                    if r["error"].is_null() { cell(&r["flags"]["status"]) } else { "error".into() },
                ])?;
                for c in r["cells"].as_array().into_iter().flatten() {
                    let assignment: Vec<String> = c["assignment"].as_array().into_iter().flatten().map(cell).collect();
                    bin_sizes.row(&[src.clone(), temp.clone(), names.join("-"), assignment.join(""), cell(&c["support"])])?;
                }
                if let Some(k) = r["coupling"].as_f64() {
                    entry.1.push(k);
                    if let Some(s) = r["coupling_stderr"].as_f64() {
                        entry.2.push(s);
                    }
                }
            }
            for ((cond, order), (n, ks, ses)) in by_order {
                let (mean, sd) = if ks.is_empty() { (f64::NAN, f64::NAN) } else { mean_sd(&ks) };
                let se = if ses.is_empty() { f64::NAN } else { mean_sd(&ses).0 };
                summary.row(&[
                    src.clone(),
                    temp.clone(),
                    cond,
                    order.to_string(),
                    n.to_string(),
                    ks.len().to_string(),
                    mean.to_string(),
                    sd.to_string(),
                    se.to_string(),
                ])?;
            }
        }
        written.push(per_tuple.finish()?);
        written.push(bin_sizes.finish()?);
        written.push(summary.finish()?);
    }

    if !a.screens.is_empty() {
        let mut t = Table::create(&dir, "pvalues.csv", &["source", "temperature", "n_parents", "bin_low", "bin_high", "count"])?;
        for path in &a.screens {
            let doc = read_doc(path)?;
            let records = doc["records"].as_array().cloned().unwrap_or_default();
            let mut groups: BTreeMap<usize, Vec<f64>> = Default::default();
            for r in &records {
                if let Some(p) = r["p_value"].as_f64() {
                    let k = r["parents"].as_array().map_or(0, Vec::len);
                    groups.entry(k).or_default().push(p);
                }
            }
            for (k, ps) in groups {
                for (lo, hi, c) in histogram(&ps, bins, 0.0, 1.0) {
                    t.row(&[
                        path.display().to_string(),
                        cell(&doc["source"]["T"]),
                        k.to_string(),
                        lo.to_string(),
                        hi.to_string(),
                        c.to_string(),
                    ])?;
                }
            }
        }
        written.push(t.finish()?);
    }

    if !a.traits.is_empty() {
        let mut t = Table::create(&dir, "height_histogram.csv", &["source", "bin_low", "bin_high", "count", "mean", "sd"])?;
        for path in &a.traits {
            let m = load_matrix(path)?;
            let o = (0..m.n_vars())
                .find(|&v| m.outcome_values(v).is_some())
                .ok_or_else(|| config_err(format!("{}: no outcome column", path.display())))?;
            let y = m.outcome_values(o).expect("outcome column");
            let (mean, sd) = mean_sd(y);
            let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for (a, b, c) in histogram(y, bins, lo, hi) {
                t.row(&[path.display().to_string(), a.to_string(), b.to_string(), c.to_string(), mean.to_string(), sd.to_string()])?;
            }
        }
        written.push(t.finish()?);
    }

    if written.is_empty() {
        return Err(config_err("nothing to report; pass --estimates, --screens or --traits"));
    }
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}
