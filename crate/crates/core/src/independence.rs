//! Stratified Pearson χ² tests of pairwise (conditional) independence.
//!
//! Each observed configuration of the conditioning variables is a stratum.
//! A stratum contributes its 2x2 Pearson statistic and one degree of freedom
//! when all four expected counts reach [`MIN_EXPECTED`].

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::store::{DataView, VariableKind};

pub const MIN_EXPECTED: f64 = 5.0;
pub const DEFAULT_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceTest {
    pub pair: (usize, usize),
    pub conditioning: Vec<usize>,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub n_strata_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Dependent,
    Independent,
}

impl IndependenceTest {
    pub fn verdict(&self, threshold: f64) -> Verdict {
        if self.p_value < threshold {
            Verdict::Dependent
        } else {
            Verdict::Independent
        }
    }
}

fn pearson_2x2(o: &[f64; 4]) -> Option<f64> {
    let n: f64 = o.iter().sum();
    if n <= 0.0 {
        return None;
    }
    let rows = [o[0] + o[1], o[2] + o[3]];
    let cols = [o[0] + o[2], o[1] + o[3]];
    let mut stat = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            let e = rows[a] * cols[b] / n;
            if e < MIN_EXPECTED {
                return None;
            }
            stat += (o[2 * a + b] - e).powi(2) / e;
        }
    }
    Some(stat)
}

/// Tests `x_i ⊥ x_j | conditioning` on binary `i`, `j`.
pub fn chi_squared_pair(view: &DataView<'_>, i: usize, j: usize, conditioning: &[usize]) -> Result<IndependenceTest> {
    let m = view.matrix();
    for v in [i, j].iter().chain(conditioning) {
        if *v >= m.n_vars() {
            return Err(Error::InvalidSpec(format!("variable index {v} out of range")));
        }
    }
    if i == j {
        return Err(Error::InvalidSpec("a pair needs two distinct variables".into()));
    }
    if m.variable(i).kind != VariableKind::Binary || m.variable(j).kind != VariableKind::Binary {
        return Err(Error::InvalidSpec("χ² pair tests need binary variables".into()));
    }
    if conditioning.contains(&i) || conditioning.contains(&j) {
        return Err(Error::InvalidSpec("conditioning set must exclude the pair".into()));
    }
    if let Some(&c) = conditioning.iter().find(|&&c| !m.variable(c).kind.is_discrete()) {
        return Err(Error::InvalidSpec(format!("cannot stratify on outcome '{}'", m.variable(c).name)));
    }

    let (ci, cj) = (m.binary_column(i).unwrap(), m.binary_column(j).unwrap());
    let mut strata: BTreeMap<Vec<u8>, [f64; 4]> = BTreeMap::new();
    let mut key = vec![0u8; conditioning.len()];
    for row in 0..m.n_samples() {
        let w = view.weight(row);
        if w == 0.0 {
            continue;
        }
        for (k, &c) in key.iter_mut().zip(conditioning) {
            *k = m.label(c, row).unwrap();
        }
        let cell = 2 * ci.get(row) as usize + cj.get(row) as usize;
        match strata.get_mut(&key[..]) {
            Some(counts) => counts[cell] += w,
            None => {
                let mut counts = [0.0; 4];
                counts[cell] = w;
                strata.insert(key.clone(), counts);
            }
        }
    }

    let (mut statistic, mut dof) = (0.0, 0usize);
    for counts in strata.values() {
        if let Some(s) = pearson_2x2(counts) {
            statistic += s;
            dof += 1;
        }
    }
    if dof == 0 {
        return Err(Error::NoUsableStrata);
    }
    let dist = ChiSquared::new(dof as f64).expect("dof is positive");
    Ok(IndependenceTest {
        pair: (i, j),
        conditioning: conditioning.to_vec(),
        statistic,
        dof,
        p_value: dist.sf(statistic).clamp(0.0, 1.0),
        n_strata_used: dof,
    })
}

#[derive(Debug)]
pub struct ScreenRow {
    pub pair: (usize, usize),
    pub parents: Vec<usize>,
    pub result: Result<IndependenceTest>,
}

impl ScreenRow {
    pub fn verdict(&self, threshold: f64) -> Option<Verdict> {
        self.result.as_ref().ok().map(|t| t.verdict(threshold))
    }
}

/// Tests every pair given its parent set, in parallel. A pair whose test
/// fails keeps its error; the rest of the batch is unaffected.
pub fn blanket_screen(view: &DataView<'_>, pairs: &[(usize, usize)], parents: &[Vec<usize>]) -> Result<Vec<ScreenRow>> {
    if pairs.len() != parents.len() {
        return Err(Error::InvalidSpec(format!("{} parent sets for {} pairs", parents.len(), pairs.len())));
    }
    Ok(pairs
        .par_iter()
        .zip(parents.par_iter())
        .map(|(&(i, j), ps)| ScreenRow { pair: (i, j), parents: ps.clone(), result: chi_squared_pair(view, i, j, ps) })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{BitColumn, SampleMatrix, SampleMatrixBuilder, VariableMeta};
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn coins(n: usize, k: usize, seed: u64) -> SampleMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = SampleMatrixBuilder::new(n);
        for c in 0..k {
            b = b.binary(VariableMeta::binary(format!("c{c}")), BitColumn::from_bools((0..n).map(|_| rng.random_bool(0.5))));
        }
        b.build().unwrap()
    }

    #[test]
    fn textbook_table() {
        // [[20, 30], [30, 20]]: expected 25 everywhere, statistic 4
        assert!((pearson_2x2(&[20.0, 30.0, 30.0, 20.0]).unwrap() - 4.0).abs() < 1e-12);
        assert!(pearson_2x2(&[1.0, 1.0, 1.0, 100.0]).is_none());
    }

    #[test]
    fn identical_columns_are_dependent() {
        let m = coins(1000, 1, 1);
        let col = m.binary_column(0).unwrap().clone();
        let m = SampleMatrixBuilder::new(1000)
            .binary(VariableMeta::binary("a"), col.clone())
            .binary(VariableMeta::binary("b"), col)
            .build()
            .unwrap();
        let t = chi_squared_pair(&DataView::new(&m), 0, 1, &[]).unwrap();
        assert!(t.p_value < 1e-100);
        assert_eq!(t.dof, 1);
    }

    #[test]
    fn symmetric_in_pair_order() {
        let m = coins(3000, 4, 2);
        let v = DataView::new(&m);
        let a = chi_squared_pair(&v, 0, 1, &[2, 3]).unwrap();
        let b = chi_squared_pair(&v, 1, 0, &[2, 3]).unwrap();
        assert!((a.statistic - b.statistic).abs() < 1e-12);
        assert_eq!(a.dof, 4);
        assert!((0.0..=1.0).contains(&a.p_value));
    }

    #[test]
    fn no_usable_strata() {
        let m = coins(12, 3, 3);
        assert!(matches!(chi_squared_pair(&DataView::new(&m), 0, 1, &[2]), Err(Error::NoUsableStrata)));
    }

    #[test]
    fn screen_keeps_per_pair_errors() {
        let m = coins(40, 4, 4);
        let rows = blanket_screen(&DataView::new(&m), &[(0, 1), (0, 1)], &[vec![], vec![2, 3]]).unwrap();
        assert!(rows[0].result.is_ok());
        assert!(rows[1].result.is_err());
        assert_eq!(rows[1].verdict(0.1), None);
    }
}
