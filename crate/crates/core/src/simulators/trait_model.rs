//! Linear trait models over binary variants with pairwise and triple terms.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::{BitColumn, SampleMatrix, SampleMatrixBuilder, VariableMeta};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub intercept: f64,
    /// Fraction of individuals in this stratum.
    pub share: f64,
}

/// `Y = intercept(stratum) + sum a_j V_j + sum a_ij V_i V_j + sum a_ijk V_i V_j V_k + noise`.
/// Variant indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraitConfig {
    pub n_individuals: usize,
    pub variant_frequencies: Vec<f64>,
    pub linear: Vec<f64>,
    #[serde(default)]
    pub pairwise: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub triple: Vec<(usize, usize, usize, f64)>,
    pub strata: Vec<Stratum>,
    pub noise_sd: f64,
    #[serde(default)]
    pub seed: u64,
}

impl TraitConfig {
    /// Height-like trait: two sexes, six variants, `V1 V2` interaction 5, noise sd 5.
    /// The sex baselines are set so the population mean is 168.5 and the sd 9.3.
    pub fn ukbb(seed: u64) -> Self {
        Self {
            n_individuals: 20_000,
            variant_frequencies: vec![0.8, 0.7, 0.5, 0.5, 0.5, 0.5],
            linear: vec![2.0, 6.0, -3.0, 6.0, -1.5, 6.0],
            pairwise: vec![(0, 1, 5.0)],
            triple: vec![],
            strata: vec![Stratum { intercept: 152.4, share: 0.5 }, Stratum { intercept: 159.9, share: 0.5 }],
            noise_sd: 5.0,
            seed,
        }
    }

    /// Three treatments with pair terms (5, -2.5, 0) and triple term 2, unit noise.
    pub fn regression(n_individuals: usize, seed: u64) -> Self {
        Self {
            n_individuals,
            variant_frequencies: vec![0.4, 0.7, 0.5],
            linear: vec![-2.0, 10.0, 0.0],
            pairwise: vec![(0, 1, 5.0), (0, 2, -2.5), (1, 2, 0.0)],
            triple: vec![(0, 1, 2, 2.0)],
            strata: vec![Stratum { intercept: -1.5, share: 1.0 }],
            noise_sd: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.variant_frequencies.len();
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_individuals == 0 {
            return bad("n_individuals must be positive".into());
        }
        if self.variant_frequencies.iter().any(|&f| !(f > 0.0 && f < 1.0)) {
            return bad("variant frequencies must lie in (0, 1)".into());
        }
        if self.linear.len() != k {
            return bad(format!("{} linear coefficients for {k} variants", self.linear.len()));
        }
        let idx_ok = |i: usize| i < k;
        if self.pairwise.iter().any(|&(i, j, _)| !idx_ok(i) || !idx_ok(j) || i == j)
            || self.triple.iter().any(|&(i, j, l, _)| !idx_ok(i) || !idx_ok(j) || !idx_ok(l) || i == j || j == l || i == l)
        {
            return bad("interaction indices must be distinct variants".into());
        }
        if self.strata.is_empty() || self.strata.len() > 256 {
            return bad("need between 1 and 256 strata".into());
        }
        let total: f64 = self.strata.iter().map(|s| s.share).sum();
        if self.strata.iter().any(|s| s.share.is_nan() || s.share < 0.0) || (total - 1.0).abs() > 1e-9 {
            return bad("stratum shares must be non-negative and sum to 1".into());
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return bad("noise_sd must be finite and non-negative".into());
        }
        Ok(())
    }

    fn has_stratum_column(&self) -> bool {
        self.strata.iter().any(|s| s.intercept != self.strata[0].intercept)
    }

    fn signal(&self, v: &[bool]) -> f64 {
        let x = |i: usize| v[i] as u8 as f64;
        let lin: f64 = self.linear.iter().enumerate().map(|(i, a)| a * x(i)).sum();
        let pair: f64 = self.pairwise.iter().map(|&(i, j, a)| a * x(i) * x(j)).sum();
        let triple: f64 = self.triple.iter().map(|&(i, j, l, a)| a * x(i) * x(j) * x(l)).sum();
        lin + pair + triple
    }

    /// Stratum sizes: each share rounded down, the remainder going to the last stratum.
    fn stratum_sizes(&self) -> Vec<usize> {
        let n = self.n_individuals;
        let mut sizes: Vec<usize> = self.strata.iter().map(|s| (s.share * n as f64).floor() as usize).collect();
        let used: usize = sizes.iter().sum();
        *sizes.last_mut().unwrap() += n - used;
        sizes
    }

    /// Population mean and standard deviation of the outcome, by enumerating
    /// variant configurations.
    pub fn outcome_moments(&self) -> Result<(f64, f64)> {
        self.validate()?;
        let k = self.variant_frequencies.len();
        if k > 20 {
            return Err(Error::SizeLimit { sites: k, limit: 20 });
        }
        let (mut m1, mut m2) = (0.0, 0.0);
        for st in &self.strata {
            for s in 0..1usize << k {
                let v: Vec<bool> = (0..k).map(|i| s >> i & 1 == 1).collect();
                let p: f64 = v
                    .iter()
                    .zip(&self.variant_frequencies)
                    .map(|(&on, &f)| if on { f } else { 1.0 - f })
                    .product::<f64>()
                    * st.share;
                let y = st.intercept + self.signal(&v);
                m1 += p * y;
                m2 += p * (y * y + self.noise_sd * self.noise_sd);
            }
        }
        Ok((m1, (m2 - m1 * m1).max(0.0).sqrt()))
    }
}

/// Draws individuals stratum by stratum. Columns: `Y`, `V1..Vk`, then
/// `stratum` when intercepts differ between strata.
pub fn simulate_trait(cfg: &TraitConfig) -> Result<SampleMatrix> {
    cfg.validate()?;
    let n = cfg.n_individuals;
    let k = cfg.variant_frequencies.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise_sd).map_err(|e| Error::InvalidConfig(e.to_string()))?;

    let mut y = Vec::with_capacity(n);
    let mut variants = vec![Vec::with_capacity(n); k];
    let mut labels = Vec::with_capacity(n);
    let mut v = vec![false; k];
    for (label, (size, st)) in cfg.stratum_sizes().into_iter().zip(&cfg.strata).enumerate() {
        for _ in 0..size {
            for (slot, &f) in v.iter_mut().zip(&cfg.variant_frequencies) {
                *slot = rng.random_bool(f);
            }
            for (col, &on) in variants.iter_mut().zip(&v) {
                col.push(on);
            }
            y.push(st.intercept + cfg.signal(&v) + noise.sample(&mut rng));
            labels.push(label as u8);
        }
    }

    let mut b = SampleMatrixBuilder::new(n).outcome(VariableMeta::outcome("Y"), y);
    for (i, col) in variants.into_iter().enumerate() {
        b = b.binary(VariableMeta::binary(format!("V{}", i + 1)), BitColumn::from_bools(col));
    }
    if cfg.has_stratum_column() {
        b = match cfg.strata.len() {
            2 => b.binary(VariableMeta::binary("stratum"), BitColumn::from_bools(labels.iter().map(|&l| l == 1))),
            s => b.categorical(VariableMeta::categorical("stratum", s as u16), labels),
        };
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_model_is_constant() {
        let cfg = TraitConfig {
            n_individuals: 100,
            variant_frequencies: vec![0.3, 0.6],
            linear: vec![0.0, 0.0],
            pairwise: vec![],
            triple: vec![],
            strata: vec![Stratum { intercept: 7.5, share: 1.0 }],
            noise_sd: 0.0,
            seed: 1,
        };
        let m = simulate_trait(&cfg).unwrap();
        assert!(m.outcome_values(0).unwrap().iter().all(|&y| y == 7.5));
        assert_eq!(m.n_vars(), 3);
    }

    #[test]
    fn noiseless_outcome_follows_formula() {
        let mut cfg = TraitConfig::regression(500, 3);
        cfg.noise_sd = 0.0;
        let m = simulate_trait(&cfg).unwrap();
        for r in 0..500 {
            let v: Vec<bool> = (1..4).map(|c| m.binary_column(c).unwrap().get(r)).collect();
            let t = |i: usize| v[i] as u8 as f64;
            let expect = -1.5 - 2.0 * t(0) + 10.0 * t(1) + 5.0 * t(0) * t(1) - 2.5 * t(0) * t(2) + 2.0 * t(0) * t(1) * t(2);
            assert_eq!(m.value(0, r), expect);
        }
    }

    #[test]
    fn ukbb_layout_and_moments() {
        let cfg = TraitConfig::ukbb(0);
        let m = simulate_trait(&cfg).unwrap();
        assert_eq!(m.variables().last().unwrap().name, "stratum");
        assert_eq!(m.binary_column(7).unwrap().count_ones(), 10_000);
        let (mean, sd) = cfg.outcome_moments().unwrap();
        let ys = m.outcome_values(0).unwrap();
        let emp = ys.iter().sum::<f64>() / ys.len() as f64;
        assert!((emp - mean).abs() < 4.0 * sd / (ys.len() as f64).sqrt());
    }

    #[test]
    fn validation() {
        let mut c = TraitConfig::regression(10, 0);
        c.variant_frequencies[0] = 1.0;
        assert!(c.validate().is_err());
        let mut c = TraitConfig::regression(10, 0);
        c.pairwise.push((1, 1, 1.0));
        assert!(c.validate().is_err());
    }
}
