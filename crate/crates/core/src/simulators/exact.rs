//! Brute-force enumeration of small binary systems.
//!
//! State `s` assigns variable `k` the value `(s >> k) & 1`. Everything here
//! works from the probability table directly, so it can serve as the
//! reference against which the sample-based estimators are checked.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::metropolis::HamiltonianConfig;
use crate::error::{CellSupport, Error, Result};
use crate::estimators::{cell_sign, TargetSpec};
use crate::store::{BitColumn, SampleMatrix, SampleMatrixBuilder, VariableMeta};

pub const MAX_EXACT_VARS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    n_vars: usize,
    probs: Vec<f64>,
}

pub enum ExactKind<'a> {
    Multiplicative,
    /// `ln I^m`, summed in log space.
    LogMultiplicative,
    /// Additive interaction of an outcome given as a function of the state.
    Additive(&'a dyn Fn(usize) -> f64),
}

impl ExactDistribution {
    /// Normalises `exp(log_weights)`; the table has one entry per state.
    pub fn from_log_weights(n_vars: usize, log_weights: &[f64]) -> Result<Self> {
        if n_vars > MAX_EXACT_VARS {
            return Err(Error::SizeLimit { sites: n_vars, limit: MAX_EXACT_VARS });
        }
        if log_weights.len() != 1 << n_vars {
            return Err(Error::InvalidConfig(format!("{} weights for {n_vars} variables", log_weights.len())));
        }
        let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::InvalidConfig("log weights must contain a finite maximum".into()));
        }
        let w: Vec<f64> = log_weights.iter().map(|l| (l - max).exp()).collect();
        let z: f64 = w.iter().sum();
        Ok(Self { n_vars, probs: w.into_iter().map(|x| x / z).collect() })
    }

    /// Boltzmann weights `exp(-E)` from an energy per state.
    pub fn from_energies(n_vars: usize, energies: &[f64]) -> Result<Self> {
        let lw: Vec<f64> = energies.iter().map(|e| -e).collect();
        Self::from_log_weights(n_vars, &lw)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn probability(&self, state: usize) -> f64 {
        self.probs[state]
    }

    /// Total probability of states matching every `(var, value)` pair.
    pub fn mass(&self, pairs: &[(usize, u8)]) -> f64 {
        let (mask, want) = masks(pairs);
        self.probs.iter().enumerate().filter(|(s, _)| s & mask == want).map(|(_, p)| p).sum()
    }

    /// `P(var = value | given)`.
    pub fn conditional(&self, var: usize, value: u8, given: &[(usize, u8)]) -> f64 {
        let mut joint = given.to_vec();
        joint.push((var, value));
        self.mass(&joint) / self.mass(given)
    }

    /// One row per state, weighted by its probability, plus an optional
    /// outcome column `Y` computed from the state.
    pub fn weighted_samples(&self, outcome: Option<&dyn Fn(usize) -> f64>) -> Result<(SampleMatrix, Vec<f64>)> {
        let states = 1usize << self.n_vars;
        let mut b = SampleMatrixBuilder::new(states);
        for k in 0..self.n_vars {
            b = b.binary(VariableMeta::binary(format!("x{k}")), BitColumn::from_bools((0..states).map(|s| s >> k & 1 == 1)));
        }
        if let Some(y) = outcome {
            b = b.outcome(VariableMeta::outcome("Y"), (0..states).map(y).collect());
        }
        Ok((b.build()?, self.probs.clone()))
    }

    /// `n` independent draws.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleMatrix> {
        let dist = WeightedIndex::new(&self.probs).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let states: Vec<usize> = (0..n).map(|_| dist.sample(&mut rng)).collect();
        let mut b = SampleMatrixBuilder::new(n);
        for k in 0..self.n_vars {
            b = b.binary(VariableMeta::binary(format!("x{k}")), BitColumn::from_bools(states.iter().map(|s| s >> k & 1 == 1)));
        }
        b.build()
    }
}

fn masks(pairs: &[(usize, u8)]) -> (usize, usize) {
    pairs.iter().fold((0, 0), |(m, w), &(v, x)| (m | 1 << v, w | (x as usize & 1) << v))
}

/// Exact Boltzmann distribution of a lattice model over all `2^(side^2)` states.
pub fn enumerate_distribution(cfg: &HamiltonianConfig) -> Result<ExactDistribution> {
    let n = cfg.side * cfg.side;
    if n > MAX_EXACT_VARS {
        return Err(Error::SizeLimit { sites: n, limit: MAX_EXACT_VARS });
    }
    let model = cfg.compile()?;
    let lw: Vec<f64> = (0..1usize << n)
        .map(|s| {
            let spins: Vec<i8> = (0..n).map(|k| if s >> k & 1 == 1 { 1 } else { -1 }).collect();
            model.log_weight(&spins)
        })
        .collect();
    ExactDistribution::from_log_weights(n, &lw)
}

/// The interaction of `spec` with probabilities in place of frequencies.
pub fn exact_interaction(d: &ExactDistribution, spec: &TargetSpec, kind: ExactKind<'_>) -> Result<f64> {
    let n_vars = d.n_vars;
    let n = spec.targets.len();
    if n == 0 || spec.targets.iter().any(|&t| t >= n_vars) {
        return Err(Error::InvalidSpec("targets must be non-empty and in range".into()));
    }
    if !spec.covariate_strata.is_empty() {
        return Err(Error::InvalidSpec("covariate strata are not supported on exact tables".into()));
    }
    let transitions = spec.transitions.clone().unwrap_or_else(|| vec![(0, 1); n]);
    if transitions.len() != n || transitions.iter().any(|&(f, t)| f > 1 || t > 1 || f == t) {
        return Err(Error::InvalidSpec("exact tables need binary transitions".into()));
    }
    let conditioning: Vec<usize> = match &spec.conditioning {
        Some(c) => c.clone(),
        None => (0..n_vars).filter(|v| !spec.targets.contains(v)).collect(),
    };
    let mut reference: Vec<(usize, u8)> = conditioning.iter().map(|&c| (c, 0)).collect();
    if let Some(r) = &spec.reference {
        for &(v, x) in r.pairs() {
            match reference.iter_mut().find(|(c, _)| *c == v) {
                Some(slot) => slot.1 = x,
                None => return Err(Error::InvalidSpec(format!("reference variable {v} is not conditioned on"))),
            }
        }
    }
    let (ref_mask, ref_want) = masks(&reference);

    let cells = 1usize << n;
    let mut mass = vec![0.0; cells];
    let mut y_mass = vec![0.0; cells];
    for (s, &p) in d.probs.iter().enumerate() {
        if s & ref_mask != ref_want {
            continue;
        }
        let c = (0..n).filter(|&k| (s >> spec.targets[k] & 1) as u8 == transitions[k].1).map(|k| 1 << k).sum::<usize>();
        mass[c] += p;
        if let ExactKind::Additive(y) = &kind {
            y_mass[c] += p * y(s);
        }
    }
    let cell_values = |c: usize| -> Vec<u8> {
        transitions.iter().enumerate().map(|(k, &(f, t))| if c >> k & 1 == 1 { t } else { f }).collect()
    };
    let zero: Vec<CellSupport> =
        (0..cells).filter(|&c| mass[c] <= 0.0).map(|c| CellSupport { cell: cell_values(c), support: 0.0 }).collect();
    if !zero.is_empty() {
        return Err(Error::ZeroCell { cells: zero });
    }

    let log_sum = || (0..cells).map(|c| cell_sign(c, n) * mass[c].ln()).sum::<f64>();
    Ok(match kind {
        ExactKind::Multiplicative => log_sum().exp(),
        ExactKind::LogMultiplicative => log_sum(),
        ExactKind::Additive(_) => (0..cells).map(|c| cell_sign(c, n) * y_mass[c] / mass[c]).sum(),
    })
}
