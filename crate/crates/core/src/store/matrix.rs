use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::bits::{BitColumn, Mask};
use crate::error::{CellSupport, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum VariableKind {
    Binary,
    /// `categories` labels, `0..categories`.
    Categorical { categories: u16 },
    Outcome,
}

impl VariableKind {
    /// Number of category labels, `None` for real-valued outcomes.
    pub fn categories(self) -> Option<u16> {
        match self {
            VariableKind::Binary => Some(2),
            VariableKind::Categorical { categories } => Some(categories),
            VariableKind::Outcome => None,
        }
    }

    pub fn is_discrete(self) -> bool {
        !matches!(self, VariableKind::Outcome)
    }
}

/// Encoding a binary column was converted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    #[default]
    ZeroOne,
    SpinPm1,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableMeta {
    pub name: String,
    pub kind: VariableKind,
    #[serde(default)]
    pub basis: Basis,
}

impl VariableMeta {
    pub fn binary(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: VariableKind::Binary, basis: Basis::ZeroOne }
    }

    pub fn categorical(name: impl Into<String>, categories: u16) -> Self {
        Self { name: name.into(), kind: VariableKind::Categorical { categories }, basis: Basis::ZeroOne }
    }

    pub fn outcome(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: VariableKind::Outcome, basis: Basis::ZeroOne }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Column {
    Binary(BitColumn),
    /// Raw labels plus one indicator plane per label.
    Categorical { values: Vec<u8>, planes: Vec<BitColumn> },
    Outcome(Vec<f64>),
}

/// Observations over discrete variables plus optional real-valued outcomes.
///
/// Immutable once built; share it freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    n_samples: usize,
    variables: Vec<VariableMeta>,
    columns: Vec<Column>,
}

/// Column-at-a-time construction of a [`SampleMatrix`].
#[derive(Debug, Default)]
pub struct SampleMatrixBuilder {
    n_samples: usize,
    variables: Vec<VariableMeta>,
    columns: Vec<Column>,
}

impl SampleMatrixBuilder {
    pub fn new(n_samples: usize) -> Self {
        Self { n_samples, ..Default::default() }
    }

    pub fn binary(mut self, meta: VariableMeta, column: BitColumn) -> Self {
        self.variables.push(meta);
        self.columns.push(Column::Binary(column));
        self
    }

    pub fn categorical(mut self, meta: VariableMeta, values: Vec<u8>) -> Self {
        let k = meta.kind.categories().unwrap_or(0) as usize;
        let planes = (0..k).map(|c| BitColumn::from_bools(values.iter().map(|&v| v as usize == c))).collect();
        self.variables.push(meta);
        self.columns.push(Column::Categorical { values, planes });
        self
    }

    pub fn outcome(mut self, meta: VariableMeta, values: Vec<f64>) -> Self {
        self.variables.push(meta);
        self.columns.push(Column::Outcome(values));
        self
    }

    pub fn build(self) -> Result<SampleMatrix> {
        let n = self.n_samples;
        if n == 0 {
            return Err(Error::Schema("a sample matrix needs at least one row".into()));
        }
        let mut seen = HashSet::new();
        for meta in &self.variables {
            if !seen.insert(meta.name.as_str()) {
                return Err(Error::DuplicateName(meta.name.clone()));
            }
        }
        for (meta, col) in self.variables.iter().zip(&self.columns) {
            let len = match col {
                Column::Binary(c) => c.len(),
                Column::Categorical { values, .. } => values.len(),
                Column::Outcome(v) => v.len(),
            };
            if len != n {
                return Err(Error::Schema(format!("column '{}' has {len} entries, expected {n}", meta.name)));
            }
            match (meta.kind, col) {
                (VariableKind::Binary, Column::Binary(_)) | (VariableKind::Outcome, Column::Outcome(_)) => {}
                (VariableKind::Categorical { categories }, Column::Categorical { values, .. }) => {
                    if !(2..=256).contains(&categories) {
                        return Err(Error::Schema(format!(
                            "categorical '{}' declares {categories} categories (need 2..=256)",
                            meta.name
                        )));
                    }
                    if let Some(row) = values.iter().position(|&v| v as u16 >= categories) {
                        return Err(Error::OutOfRange {
                            variable: meta.name.clone(),
                            row,
                            value: values[row].to_string(),
                        });
                    }
                }
                _ => return Err(Error::Schema(format!("column '{}' does not match its declared kind", meta.name))),
            }
        }
        Ok(SampleMatrix { n_samples: n, variables: self.variables, columns: self.columns })
    }
}

/// A partial assignment of category values to variables.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Assignment(Vec<(usize, u8)>);

impl Assignment {
    pub fn new(pairs: Vec<(usize, u8)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for &(v, _) in &pairs {
            if !seen.insert(v) {
                return Err(Error::InvalidAssignment(format!("variable {v} assigned twice")));
            }
        }
        Ok(Self(pairs))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Every listed variable pinned to 0.
    pub fn zeros(vars: &[usize]) -> Self {
        Self(vars.iter().map(|&v| (v, 0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, u8)] {
        &self.0
    }

    pub fn value_of(&self, var: usize) -> Option<u8> {
        self.0.iter().find(|(v, _)| *v == var).map(|&(_, x)| x)
    }

    pub fn contains(&self, var: usize) -> bool {
        self.0.iter().any(|(v, _)| *v == var)
    }

    /// This assignment extended by `extra`; fails on overlap.
    pub fn extended(&self, extra: &[(usize, u8)]) -> Result<Self> {
        let mut pairs = self.0.clone();
        pairs.extend_from_slice(extra);
        Self::new(pairs)
    }

    pub fn validate(&self, m: &SampleMatrix) -> Result<()> {
        for &(var, value) in &self.0 {
            let meta = m
                .variables
                .get(var)
                .ok_or_else(|| Error::InvalidAssignment(format!("variable index {var} out of range")))?;
            match meta.kind.categories() {
                None => {
                    return Err(Error::InvalidAssignment(format!("cannot condition on outcome '{}'", meta.name)))
                }
                Some(k) if value as u16 >= k => {
                    return Err(Error::InvalidAssignment(format!(
                        "value {value} outside the {k} categories of '{}'",
                        meta.name
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalMean {
    pub mean: f64,
    pub support: f64,
}

impl SampleMatrix {
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[VariableMeta] {
        &self.variables
    }

    pub fn variable(&self, var: usize) -> &VariableMeta {
        &self.variables[var]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Indices of all binary and categorical variables.
    pub fn discrete_vars(&self) -> Vec<usize> {
        (0..self.n_vars()).filter(|&i| self.variables[i].kind.is_discrete()).collect()
    }

    pub(crate) fn column(&self, var: usize) -> &Column {
        &self.columns[var]
    }

    pub fn binary_column(&self, var: usize) -> Option<&BitColumn> {
        match &self.columns[var] {
            Column::Binary(c) => Some(c),
            _ => None,
        }
    }

    pub fn categorical_values(&self, var: usize) -> Option<&[u8]> {
        match &self.columns[var] {
            Column::Categorical { values, .. } => Some(values),
            _ => None,
        }
    }

    pub fn outcome_values(&self, var: usize) -> Option<&[f64]> {
        match &self.columns[var] {
            Column::Outcome(v) => Some(v),
            _ => None,
        }
    }

    /// Cell value as a real: the bit, the label, or the outcome.
    #[inline]
    pub fn value(&self, var: usize, row: usize) -> f64 {
        match &self.columns[var] {
            Column::Binary(c) => c.get(row) as u8 as f64,
            Column::Categorical { values, .. } => values[row] as f64,
            Column::Outcome(v) => v[row],
        }
    }

    /// Discrete label of a cell; outcomes have none.
    #[inline]
    pub fn label(&self, var: usize, row: usize) -> Option<u8> {
        match &self.columns[var] {
            Column::Binary(c) => Some(c.get(row) as u8),
            Column::Categorical { values, .. } => Some(values[row]),
            Column::Outcome(_) => None,
        }
    }

    pub(crate) fn restrict(&self, mask: &mut Mask, var: usize, value: u8) {
        match &self.columns[var] {
            Column::Binary(c) => mask.restrict(c, value == 1),
            Column::Categorical { planes, .. } => mask.restrict(&planes[value as usize], true),
            Column::Outcome(_) => unreachable!("assignments are validated against outcome columns"),
        }
    }

    /// Rows matching every pair of a (validated) assignment.
    pub fn mask(&self, a: &Assignment) -> Mask {
        let mut mask = Mask::all(self.n_samples);
        for &(var, value) in a.pairs() {
            self.restrict(&mut mask, var, value);
        }
        mask
    }

    /// Number of rows matching `a`. Invalid assignments match nothing.
    pub fn count_assignment(&self, a: &Assignment) -> u64 {
        if a.validate(self).is_err() {
            return 0;
        }
        self.mask(a).count_ones()
    }

    /// Mean of `target` over rows matching `cond`; fails below `min_bin_count` rows.
    pub fn conditional_mean(&self, target: usize, cond: &Assignment, min_bin_count: f64) -> Result<ConditionalMean> {
        DataView::new(self).conditional_mean(target, cond, min_bin_count)
    }

    /// Builds a binary matrix from ±1 spins: -1 becomes 0 and +1 becomes 1.
    pub fn from_spins<R: AsRef<[i8]>>(spins: &[R]) -> Result<Self> {
        let n = spins.len();
        let width = spins.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut cols = vec![BitColumn::zeros(n); width];
        for (row, r) in spins.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != width {
                return Err(Error::Schema(format!("spin row {row} has {} entries, expected {width}", r.len())));
            }
            for (col, &s) in r.iter().enumerate() {
                match s {
                    1 => cols[col].set(row, true),
                    -1 => {}
                    other => return Err(Error::InvalidSpin { row, column: col, value: other as i64 }),
                }
            }
        }
        let mut b = SampleMatrixBuilder::new(n);
        for (i, c) in cols.into_iter().enumerate() {
            let meta = VariableMeta { name: format!("s{i}"), kind: VariableKind::Binary, basis: Basis::SpinPm1 };
            b = b.binary(meta, c);
        }
        b.build()
    }

    /// Inverse of [`SampleMatrix::from_spins`] over the binary columns.
    pub fn to_spins(&self) -> Vec<Vec<i8>> {
        let cols: Vec<&BitColumn> = (0..self.n_vars()).filter_map(|v| self.binary_column(v)).collect();
        (0..self.n_samples)
            .map(|row| cols.iter().map(|c| if c.get(row) { 1 } else { -1 }).collect())
            .collect()
    }
}

/// A matrix seen through optional per-row weights.
///
/// Weights let bootstrap replicates (integer multiplicities) and exact
/// distributions (probabilities) flow through the same estimator code.
#[derive(Debug, Clone, Copy)]
pub struct DataView<'a> {
    matrix: &'a SampleMatrix,
    weights: Option<&'a [f64]>,
}

impl<'a> DataView<'a> {
    pub fn new(matrix: &'a SampleMatrix) -> Self {
        Self { matrix, weights: None }
    }

    pub fn weighted(matrix: &'a SampleMatrix, weights: &'a [f64]) -> Result<Self> {
        if weights.len() != matrix.n_samples() {
            return Err(Error::Schema(format!(
                "{} weights for {} rows",
                weights.len(),
                matrix.n_samples()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Schema("weights must be finite and non-negative".into()));
        }
        Ok(Self { matrix, weights: Some(weights) })
    }

    pub fn matrix(&self) -> &'a SampleMatrix {
        self.matrix
    }

    pub fn weights(&self) -> Option<&'a [f64]> {
        self.weights
    }

    /// Total weight (row count when unweighted).
    pub fn total(&self) -> f64 {
        match self.weights {
            None => self.matrix.n_samples() as f64,
            Some(w) => w.iter().sum(),
        }
    }

    pub fn support(&self, mask: &Mask) -> f64 {
        match self.weights {
            None => mask.count_ones() as f64,
            Some(w) => mask.weighted_sum(w),
        }
    }

    #[inline]
    pub fn weight(&self, row: usize) -> f64 {
        self.weights.map_or(1.0, |w| w[row])
    }

    pub fn count(&self, a: &Assignment) -> Result<f64> {
        a.validate(self.matrix)?;
        Ok(self.support(&self.matrix.mask(a)))
    }

    pub fn conditional_mean(&self, target: usize, cond: &Assignment, min_bin_count: f64) -> Result<ConditionalMean> {
        let m = self.matrix;
        if target >= m.n_vars() {
            return Err(Error::InvalidAssignment(format!("target index {target} out of range")));
        }
        if cond.contains(target) {
            return Err(Error::InvalidAssignment(format!("target {target} also appears in the condition")));
        }
        cond.validate(m)?;
        let mask = m.mask(cond);
        let support = self.support(&mask);
        if support < min_bin_count || support == 0.0 {
            let cell = cond.pairs().iter().map(|&(_, v)| v).collect();
            return Err(Error::InsufficientSupport { min: min_bin_count, cells: vec![CellSupport { cell, support }] });
        }
        let total = match (m.binary_column(target), self.weights) {
            (Some(col), None) => {
                let mut hit = mask.clone();
                hit.restrict(col, true);
                hit.count_ones() as f64
            }
            _ => mask.iter_ones().map(|r| self.weight(r) * m.value(target, r)).sum(),
        };
        Ok(ConditionalMean { mean: total / support, support })
    }
}
