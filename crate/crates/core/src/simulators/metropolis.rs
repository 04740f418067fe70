use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lattice::Lattice;
use crate::error::{Error, Result};
use crate::store::{Basis, BitColumn, SampleMatrix, SampleMatrixBuilder, VariableKind, VariableMeta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `E = -sum_{i != j} J_ij s_i s_j` over ordered nearest-neighbour pairs.
    IsingPair,
    /// `E = -sum_p J_p s_a s_b s_c s_d` over unit squares.
    Plaquette4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Couplings {
    Uniform(f64),
    /// One value per bond (in [`Lattice::bonds`] order) or per plaquette anchor.
    Table(Vec<f64>),
}

/// A lattice Hamiltonian in the ±1 basis with periodic boundaries.
/// States are weighted by `exp(-E / T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianConfig {
    pub side: usize,
    pub temperature: f64,
    pub kind: ModelKind,
    pub couplings: Couplings,
}

/// Critical temperature of the square-lattice Ising model with unit bond strength.
pub const ISING_TC: f64 = 2.269_185_314_213_022;

impl HamiltonianConfig {
    /// Ising model with `J = 1/2`, so the coupling seen by the estimators is `1/(2T)`.
    pub fn ising(side: usize, temperature: f64) -> Self {
        Self { side, temperature, kind: ModelKind::IsingPair, couplings: Couplings::Uniform(0.5) }
    }

    pub fn plaquette(side: usize, temperature: f64, j: f64) -> Self {
        Self { side, temperature, kind: ModelKind::Plaquette4, couplings: Couplings::Uniform(j) }
    }

    pub fn lattice(&self) -> Lattice {
        Lattice::new(self.side)
    }

    pub fn n_terms(&self) -> usize {
        match self.kind {
            ModelKind::IsingPair => 2 * self.side * self.side,
            ModelKind::Plaquette4 => self.side * self.side,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.side < 2 {
            return Err(Error::InvalidConfig(format!("lattice side {} < 2", self.side)));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidConfig(format!("temperature {} must be positive", self.temperature)));
        }
        match &self.couplings {
            Couplings::Uniform(j) if !j.is_finite() => Err(Error::InvalidConfig("coupling must be finite".into())),
            Couplings::Table(t) if t.len() != self.n_terms() => Err(Error::InvalidConfig(format!(
                "coupling table has {} entries, expected {}",
                t.len(),
                self.n_terms()
            ))),
            Couplings::Table(t) if t.iter().any(|j| !j.is_finite()) => {
                Err(Error::InvalidConfig("coupling table must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    /// `J_term / T`, the dimensionless coupling of one bond or plaquette.
    pub fn effective(&self, term: usize) -> f64 {
        let j = match &self.couplings {
            Couplings::Uniform(j) => *j,
            Couplings::Table(t) => t[term],
        };
        j / self.temperature
    }

    /// Uniform `J / T`, or `None` for a coupling table.
    pub fn uniform_effective(&self) -> Option<f64> {
        match self.couplings {
            Couplings::Uniform(j) => Some(j / self.temperature),
            Couplings::Table(_) => None,
        }
    }

    /// Ising runs this close to the critical point decorrelate slowly.
    pub fn near_critical(&self) -> bool {
        self.kind == ModelKind::IsingPair
            && matches!(self.couplings, Couplings::Uniform(j) if ((self.temperature / (2.0 * j)) - ISING_TC).abs() < 0.2)
    }

    pub(crate) fn compile(&self) -> Result<Compiled> {
        self.validate()?;
        let lattice = self.lattice();
        let eff: Vec<f64> = (0..self.n_terms()).map(|t| self.effective(t)).collect();
        let (terms, site_terms): (Vec<Vec<usize>>, Vec<[usize; 4]>) = match self.kind {
            ModelKind::IsingPair => (
                lattice.bonds().into_iter().map(|(a, b)| vec![a, b]).collect(),
                (0..lattice.n_sites()).map(|s| lattice.bonds_of(s)).collect(),
            ),
            ModelKind::Plaquette4 => (
                lattice.plaquettes().into_iter().map(|p| p.to_vec()).collect(),
                (0..lattice.n_sites()).map(|s| lattice.plaquettes_of(s)).collect(),
            ),
        };
        // ordered pairs count each bond twice
        let scale = match self.kind {
            ModelKind::IsingPair => 2.0,
            ModelKind::Plaquette4 => 1.0,
        };
        Ok(Compiled { n_sites: lattice.n_sites(), temperature: self.temperature, scale, eff, terms, site_terms })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub n_sites: usize,
    temperature: f64,
    scale: f64,
    eff: Vec<f64>,
    terms: Vec<Vec<usize>>,
    site_terms: Vec<[usize; 4]>,
}

impl Compiled {
    /// `-E / T` of a ±1 configuration, summed term by term.
    pub fn log_weight(&self, spins: &[i8]) -> f64 {
        self.terms
            .iter()
            .zip(&self.eff)
            .map(|(t, &k)| self.scale * k * t.iter().map(|&s| spins[s] as f64).product::<f64>())
            .sum()
    }

    pub fn energy(&self, spins: &[i8]) -> f64 {
        -self.temperature * self.log_weight(spins)
    }

    /// Change in `-E / T` if `site` flips: every term holding it changes sign.
    #[inline]
    pub fn flip_delta(&self, spins: &[i8], site: usize) -> f64 {
        let mut acc = 0.0;
        for &t in &self.site_terms[site] {
            let prod: f64 = self.terms[t].iter().map(|&s| spins[s] as f64).product();
            acc += self.eff[t] * prod;
        }
        -2.0 * self.scale * acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// Sweeps discarded before recording; one sweep is one proposal per site.
    pub burn_in: usize,
    /// Sweeps between recorded samples.
    pub thin: usize,
    /// Independent chains, each with its own stream of `seed`. Rows are
    /// ordered chain by chain.
    pub chains: usize,
}

impl SamplerConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self { n_samples, seed, burn_in: 1000, thin: 10, chains: 8 }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub matrix: SampleMatrix,
    pub acceptance_rate: f64,
    /// Mean of `E` over recorded samples.
    pub mean_energy: f64,
}

struct ChainOutput {
    /// Recorded states, `words_per_row` words each, bit k = site k up.
    rows: Vec<u64>,
    accepted: u64,
    proposed: u64,
    energy_sum: f64,
}

fn run_chain(model: &Compiled, sc: &SamplerConfig, chain: usize, n_rows: usize) -> ChainOutput {
    let n = model.n_sites;
    let wpr = n.div_ceil(64);
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    rng.set_stream(chain as u64);
    let mut spins: Vec<i8> = (0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
    let mut lw = model.log_weight(&spins);
    let (mut accepted, mut proposed) = (0u64, 0u64);

    let mut sweep = |spins: &mut Vec<i8>, lw: &mut f64, rng: &mut ChaCha8Rng| {
        for _ in 0..n {
            let s = rng.random_range(0..n);
            let d = model.flip_delta(spins, s);
            proposed += 1;
            if d >= 0.0 || rng.random::<f64>() < d.exp() {
                spins[s] = -spins[s];
                *lw += d;
                accepted += 1;
            }
        }
    };

    for _ in 0..sc.burn_in {
        sweep(&mut spins, &mut lw, &mut rng);
    }
    let mut rows = vec![0u64; n_rows * wpr];
    let mut energy_sum = 0.0;
    for r in 0..n_rows {
        for _ in 0..sc.thin {
            sweep(&mut spins, &mut lw, &mut rng);
        }
        let row = &mut rows[r * wpr..(r + 1) * wpr];
        for (s, &v) in spins.iter().enumerate() {
            if v == 1 {
                row[s >> 6] |= 1 << (s & 63);
            }
        }
        energy_sum += model.energy(&spins);
    }
    ChainOutput { rows, accepted, proposed, energy_sum }
}

/// Single-flip Metropolis sampling of any lattice model. Output columns are
/// sites in row-major order, named `s<k>`, in the 0/1 basis.
pub fn metropolis(cfg: &HamiltonianConfig, sc: &SamplerConfig) -> Result<SimulationOutput> {
    let model = cfg.compile()?;
    if sc.n_samples == 0 || sc.chains == 0 || sc.thin == 0 {
        return Err(Error::InvalidConfig("n_samples, chains and thin must be positive".into()));
    }
    let chains = sc.chains.min(sc.n_samples);
    let per_chain: Vec<usize> =
        (0..chains).map(|c| sc.n_samples / chains + usize::from(c < sc.n_samples % chains)).collect();
    let outputs: Vec<ChainOutput> =
        (0..chains).into_par_iter().map(|c| run_chain(&model, sc, c, per_chain[c])).collect();

    let n = model.n_sites;
    let wpr = n.div_ceil(64);
    let mut cols = vec![BitColumn::zeros(sc.n_samples); n];
    let mut row = 0;
    for out in &outputs {
        for state in out.rows.chunks_exact(wpr) {
            for (s, col) in cols.iter_mut().enumerate() {
                if state[s >> 6] >> (s & 63) & 1 == 1 {
                    col.set(row, true);
                }
            }
            row += 1;
        }
    }
    let mut b = SampleMatrixBuilder::new(sc.n_samples);
    for (s, col) in cols.into_iter().enumerate() {
        b = b.binary(VariableMeta { name: format!("s{s}"), kind: VariableKind::Binary, basis: Basis::SpinPm1 }, col);
    }
    let accepted: u64 = outputs.iter().map(|o| o.accepted).sum();
    let proposed: u64 = outputs.iter().map(|o| o.proposed).sum();
    Ok(SimulationOutput {
        matrix: b.build()?,
        acceptance_rate: accepted as f64 / proposed.max(1) as f64,
        mean_energy: outputs.iter().map(|o| o.energy_sum).sum::<f64>() / sc.n_samples as f64,
    })
}

pub fn ising_metropolis(cfg: &HamiltonianConfig, sc: &SamplerConfig) -> Result<SimulationOutput> {
    if cfg.kind != ModelKind::IsingPair {
        return Err(Error::InvalidConfig("expected an Ising pair model".into()));
    }
    metropolis(cfg, sc)
}

pub fn plaquette_metropolis(cfg: &HamiltonianConfig, sc: &SamplerConfig) -> Result<SimulationOutput> {
    if cfg.kind != ModelKind::Plaquette4 {
        return Err(Error::InvalidConfig("expected a plaquette model".into()));
    }
    metropolis(cfg, sc)
}
