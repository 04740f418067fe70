use serde_json::json;

use tlim::simulators::{metropolis, simulate_trait, HamiltonianConfig, SamplerConfig, TraitConfig};

use crate::common::{config_err, manifest, manifest_path, save_matrix, seed_or_entropy, write_json, CliError};
use crate::SimulateArgs;

pub fn run(mut a: SimulateArgs, argv: Vec<String>) -> Result<(), CliError> {
    let seed = seed_or_entropy(a.seed);
    a.seed = Some(seed);
    let model = a.model.clone().unwrap_or_else(|| "ising".into());

    let (matrix, summary, config) = match model.as_str() {
        "ising" | "plaquette" => {
            let side = a.side.unwrap_or(8);
            let t = a.temperature.ok_or_else(|| config_err("--T is required for lattice models"))?;
            let mut cfg = if model == "ising" {
                HamiltonianConfig::ising(side, t)
            } else {
                HamiltonianConfig::plaquette(side, t, 0.2)
            };
            if let Some(j) = a.coupling {
                cfg.couplings = tlim::simulators::Couplings::Uniform(j);
            }
            let mut sc = SamplerConfig::new(a.n.unwrap_or(100_000), seed);
            sc.burn_in = a.burn_in.unwrap_or(sc.burn_in);
            sc.thin = a.thin.unwrap_or(sc.thin);
            sc.chains = a.chains.unwrap_or(sc.chains);
            if cfg.near_critical() {
                eprintln!("warning: T={t} is close to the critical point; samples are strongly autocorrelated, consider a larger --thin");
            }
            let out = metropolis(&cfg, &sc)?;
            let summary = json!({
                "n_samples": out.matrix.n_samples(),
                "acceptance_rate": out.acceptance_rate,
                "mean_energy": out.mean_energy,
            });
            (out.matrix, summary, json!({"hamiltonian": cfg, "sampler": sc}))
        }
        "trait" => {
            let mut cfg = match a.preset.as_deref().unwrap_or("ukbb") {
                "ukbb" => TraitConfig::ukbb(seed),
                "regression" => TraitConfig::regression(1000, seed),
                other => return Err(config_err(format!("unknown trait preset '{other}'"))),
            };
            if let Some(n) = a.n {
                cfg.n_individuals = n;
            }
            let m = simulate_trait(&cfg)?;
            let y = m.outcome_values(0).expect("trait data starts with the outcome");
            let mean = y.iter().sum::<f64>() / y.len() as f64;
            let sd = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (y.len() as f64 - 1.0).max(1.0)).sqrt();
            let summary = json!({"n_samples": y.len(), "outcome_mean": mean, "outcome_sd": sd});
            (m, summary, json!({"trait": cfg}))
        }
        other => return Err(config_err(format!("unknown model '{other}'"))),
    };

    println!("{summary}");
    if let Some(out) = &a.output {
        save_matrix(&matrix, out)?;
        let mut man = manifest("simulate", &argv, Some(seed), &a);
        man["model"] = config;
        man["summary"] = summary;
        write_json(&manifest_path(out), &man)?;
    }
    Ok(())
}
