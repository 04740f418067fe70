use std::collections::BTreeMap;

use super::spec::ResolvedSpec;
use crate::store::SampleMatrix;

/// Rows falling in each interaction cell, grouped by covariate stratum.
///
/// Built once per spec from the unweighted matrix; any weighting of the
/// same rows (bootstrap multiplicities, exact probabilities) is then a
/// cheap pass over these lists.
#[derive(Debug, Clone)]
pub(crate) struct CellIndex {
    n_cells: usize,
    /// `[stratum][cell]` row lists.
    cells: Vec<Vec<Vec<u32>>>,
    /// All rows of each stratum; empty when there is no stratification.
    stratum_rows: Vec<Vec<u32>>,
}

#[derive(Debug, Clone)]
pub(crate) struct StratumTable {
    /// Share of total weight in this stratum.
    pub freq: f64,
    pub support: Vec<f64>,
    pub sum_y: Vec<f64>,
}

impl CellIndex {
    pub fn build(m: &SampleMatrix, spec: &ResolvedSpec) -> Self {
        let n_cells = spec.n_cells();
        let ref_mask = m.mask(&spec.reference);
        let per_cell: Vec<Vec<u32>> = (0..n_cells)
            .map(|c| {
                let mut mask = ref_mask.clone();
                for (&t, v) in spec.targets.iter().zip(spec.cell_values(c)) {
                    m.restrict(&mut mask, t, v);
                }
                mask.iter_ones().map(|r| r as u32).collect()
            })
            .collect();

        if spec.strata.is_empty() {
            return Self { n_cells, cells: vec![per_cell], stratum_rows: Vec::new() };
        }

        let label = |row: usize| -> Vec<u8> { spec.strata.iter().map(|&s| m.label(s, row).unwrap()).collect() };
        let mut ids: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
        let mut stratum_rows: Vec<Vec<u32>> = Vec::new();
        for row in 0..m.n_samples() {
            let next = ids.len();
            let id = *ids.entry(label(row)).or_insert(next);
            if id == stratum_rows.len() {
                stratum_rows.push(Vec::new());
            }
            stratum_rows[id].push(row as u32);
        }
        let mut cells = vec![vec![Vec::new(); n_cells]; stratum_rows.len()];
        for (c, rows) in per_cell.into_iter().enumerate() {
            for r in rows {
                cells[ids[&label(r as usize)]][c].push(r);
            }
        }
        Self { n_cells, cells, stratum_rows }
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Weighted supports, and outcome sums when `y` is given.
    pub fn table(&self, weights: Option<&[f64]>, y: Option<&dyn Fn(usize) -> f64>) -> Vec<StratumTable> {
        let w = |r: u32| weights.map_or(1.0, |w| w[r as usize]);
        let totals: Vec<f64> = if self.stratum_rows.is_empty() {
            vec![1.0]
        } else {
            self.stratum_rows.iter().map(|rows| rows.iter().map(|&r| w(r)).sum()).collect()
        };
        let grand: f64 = totals.iter().sum();
        self.cells
            .iter()
            .zip(&totals)
            .map(|(cells, &t)| {
                let mut support = Vec::with_capacity(self.n_cells);
                let mut sum_y = Vec::with_capacity(self.n_cells);
                for rows in cells {
                    support.push(rows.iter().map(|&r| w(r)).sum());
                    sum_y.push(match y {
                        Some(y) => rows.iter().map(|&r| w(r) * y(r as usize)).sum(),
                        None => 0.0,
                    });
                }
                StratumTable { freq: if grand > 0.0 { t / grand } else { 0.0 }, support, sum_y }
            })
            .collect()
    }
}
