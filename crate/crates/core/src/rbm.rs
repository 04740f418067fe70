//! Closed-form couplings of a restricted Boltzmann machine's visible marginal.
//!
//! Summing out binary hidden units leaves
//! `ln p(v) = sum_j b_j v_j + sum_i softplus(c_i + sum_j w_ij v_j) - ln Z`,
//! so any alternating product of visible probabilities reduces to an
//! alternating sum of softplus terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::cell_sign;

/// Weights are `hidden x visible`, row-major: `w[i][j]` links hidden `i` to visible `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbmParams {
    /// Visible units.
    pub m: usize,
    /// Hidden units.
    pub n: usize,
    pub w: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

/// `ln(1 + e^x)` without overflow for large `|x|`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

impl RbmParams {
    pub fn new(w: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let p = Self { m: b.len(), n: c.len(), w, b, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.b.len() != self.m || self.c.len() != self.n || self.w.len() != self.n {
            return Err(Error::InvalidConfig("RBM dimensions disagree".into()));
        }
        if self.w.iter().any(|row| row.len() != self.m) {
            return Err(Error::InvalidConfig(format!("every weight row needs {} entries", self.m)));
        }
        let all = self.w.iter().flatten().chain(&self.b).chain(&self.c);
        if all.copied().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("RBM parameters must be finite".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    fn check_indices(&self, k: &[usize]) -> Result<()> {
        for (i, &j) in k.iter().enumerate() {
            if j >= self.m {
                return Err(Error::InvalidSpec(format!("visible index {j} out of range ({} visible)", self.m)));
            }
            if k[..i].contains(&j) {
                return Err(Error::InvalidSpec(format!("visible index {j} repeated")));
            }
        }
        Ok(())
    }

    /// Unnormalised `ln p(v)`.
    pub fn visible_log_marginal(&self, v: &[u8]) -> Result<f64> {
        if v.len() != self.m || v.iter().any(|&x| x > 1) {
            return Err(Error::InvalidAssignment(format!("need a binary vector of length {}", self.m)));
        }
        let on = |j: usize| v[j] == 1;
        let bias: f64 = (0..self.m).filter(|&j| on(j)).map(|j| self.b[j]).sum();
        let hidden: f64 = (0..self.n)
            .map(|i| softplus(self.c[i] + (0..self.m).filter(|&j| on(j)).map(|j| self.w[i][j]).sum::<f64>()))
            .sum();
        Ok(bias + hidden)
    }

    /// `ln I^m` over visible units `k`, other visibles held at 0.
    pub fn npoint_log_interaction(&self, k: &[usize]) -> Result<f64> {
        if k.is_empty() {
            return Err(Error::InvalidSpec("need at least one visible index".into()));
        }
        self.check_indices(k)?;
        let n = k.len();
        let mut total = 0.0;
        for i in 0..self.n {
            for sub in 0..1usize << n {
                let x = self.c[i] + (0..n).filter(|&q| sub >> q & 1 == 1).map(|q| self.w[i][k[q]]).sum::<f64>();
                total += cell_sign(sub, n) * softplus(x);
            }
        }
        // a visible bias only survives the alternating sum for a single unit
        if n == 1 {
            total += self.b[k[0]];
        }
        Ok(total)
    }

    /// Pairwise coupling in the ±1 basis: `ln I^m / 8`.
    pub fn pair_coupling(&self, j1: usize, j2: usize) -> Result<f64> {
        if j1 == j2 {
            return Err(Error::InvalidSpec("pair coupling needs two distinct units".into()));
        }
        Ok(self.npoint_log_interaction(&[j1, j2])? / 8.0)
    }

    /// Unnormalised log weights of all `2^m` visible states (bit j = unit j).
    pub fn visible_log_weights(&self) -> Result<Vec<f64>> {
        if self.m > crate::simulators::MAX_EXACT_VARS {
            return Err(Error::SizeLimit { sites: self.m, limit: crate::simulators::MAX_EXACT_VARS });
        }
        (0..1usize << self.m)
            .map(|s| {
                let v: Vec<u8> = (0..self.m).map(|j| (s >> j & 1) as u8).collect();
                self.visible_log_marginal(&v)
            })
            .collect()
    }
}
