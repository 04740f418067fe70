//! Additive and multiplicative n-point interaction estimators.
//!
//! Both read the same 2^n cell grid: every target takes its "from" or
//! "to" category while the conditioning set sits at the reference values.
//! Cells are indexed by the integer whose bit k is set when target k takes
//! its "to" category.

mod additive;
mod cells;
mod multiplicative;
mod spec;

use serde::{Deserialize, Serialize};

pub use additive::{additive_interaction, additive_interaction_categorical, ate};
pub use multiplicative::{multiplicative_interaction, multiplicative_via_expectations};
pub use spec::{cell_sign, ResolvedSpec, TargetSpec};

use crate::error::{CellSupport, Error, Result};
use crate::store::{Assignment, SampleMatrix};
use cells::CellIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportPolicy {
    /// Any cell below `min_bin_count` is an `InsufficientSupport` error.
    #[default]
    Strict,
    /// Low cells are reported in the estimate's flags; only empty cells fail.
    Flag,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub min_bin_count: f64,
    pub policy: SupportPolicy,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { min_bin_count: 10.0, policy: SupportPolicy::Strict }
    }
}

impl EstimatorConfig {
    pub fn flagging(min_bin_count: f64) -> Self {
        Self { min_bin_count, policy: SupportPolicy::Flag }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    Additive,
    Multiplicative,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    /// Target values of this cell, in target order.
    pub assignment: Vec<u8>,
    /// Outcome mean (additive) or probability given the reference (multiplicative).
    pub mean: f64,
    pub support: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SupportFlag {
    Ok,
    LowSupport { cells: Vec<CellSupport> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionEstimate {
    pub kind: EstimateKind,
    pub targets: Vec<usize>,
    pub transitions: Vec<(u8, u8)>,
    pub reference: Assignment,
    pub value: f64,
    /// `ln(value)` for multiplicative estimates.
    pub log_value: Option<f64>,
    pub cells: Vec<CellSummary>,
    pub flags: SupportFlag,
}

impl InteractionEstimate {
    pub fn is_ok(&self) -> bool {
        self.flags == SupportFlag::Ok
    }

    /// The number on the additive scale: `ln I^m` or `I^a`.
    pub fn log_scale(&self) -> f64 {
        self.log_value.unwrap_or(self.value)
    }
}

/// Divisor turning `ln I^m` of an n-tuple into a coupling of the ±1-basis
/// Hamiltonian. Known up to order 4 only.
pub fn coupling_factor(order: usize) -> Result<f64> {
    match order {
        1 => Ok(-8.0),
        2 => Ok(8.0),
        3 => Ok(-8.0),
        4 => Ok(16.0),
        n => Err(Error::UnsupportedOrder(n)),
    }
}

pub fn coupling_from_interaction(est: &InteractionEstimate, order: usize) -> Result<f64> {
    let log_value = match (est.kind, est.log_value) {
        (EstimateKind::Multiplicative, Some(l)) => l,
        _ => return Err(Error::InvalidSpec("coupling conversion needs a multiplicative estimate".into())),
    };
    Ok(log_value / coupling_factor(order)?)
}

/// A spec resolved and indexed against one matrix, ready to be evaluated
/// under any row weighting. This is what bootstrap loops should hold on to.
#[derive(Debug, Clone)]
pub struct PreparedEstimator<'a> {
    matrix: &'a SampleMatrix,
    kind: EstimateKind,
    outcome: Option<usize>,
    spec: ResolvedSpec,
    index: CellIndex,
    cfg: EstimatorConfig,
}

impl<'a> PreparedEstimator<'a> {
    pub fn multiplicative(m: &'a SampleMatrix, spec: &TargetSpec, cfg: EstimatorConfig) -> Result<Self> {
        let spec = spec.resolve(m, None)?;
        if !spec.strata.is_empty() {
            return Err(Error::InvalidSpec("covariate strata apply to additive estimates only".into()));
        }
        let index = CellIndex::build(m, &spec);
        Ok(Self { matrix: m, kind: EstimateKind::Multiplicative, outcome: None, spec, index, cfg })
    }

    pub fn additive(m: &'a SampleMatrix, outcome: usize, spec: &TargetSpec, cfg: EstimatorConfig) -> Result<Self> {
        let spec = spec.resolve(m, Some(outcome))?;
        let index = CellIndex::build(m, &spec);
        Ok(Self { matrix: m, kind: EstimateKind::Additive, outcome: Some(outcome), spec, index, cfg })
    }

    pub fn spec(&self) -> &ResolvedSpec {
        &self.spec
    }

    pub fn kind(&self) -> EstimateKind {
        self.kind
    }

    /// Evaluates on the prepared matrix, rows weighted by `weights` (1 each when `None`).
    pub fn evaluate(&self, weights: Option<&[f64]>) -> Result<InteractionEstimate> {
        if let Some(w) = weights {
            if w.len() != self.matrix.n_samples() {
                return Err(Error::Schema(format!("{} weights for {} rows", w.len(), self.matrix.n_samples())));
            }
        }
        match self.kind {
            EstimateKind::Multiplicative => multiplicative::evaluate(self, weights),
            EstimateKind::Additive => additive::evaluate(self, weights),
        }
    }

    /// Cell supports under the spec's conditioning, without estimating anything.
    pub fn bin_counts(&self, weights: Option<&[f64]>) -> Vec<f64> {
        let tables = self.index.table(weights, None);
        (0..self.index.n_cells()).map(|c| tables.iter().map(|t| t.support[c]).sum()).collect()
    }
}

/// Splits cells into empty ones and ones below the threshold.
fn deficient(spec: &ResolvedSpec, supports: &[f64], min: f64) -> (Vec<CellSupport>, Vec<CellSupport>) {
    let mut zero = Vec::new();
    let mut low = Vec::new();
    for (c, &s) in supports.iter().enumerate() {
        let cs = CellSupport { cell: spec.cell_values(c), support: s };
        if s <= 0.0 {
            zero.push(cs);
        } else if s < min {
            low.push(cs);
        }
    }
    (zero, low)
}

fn flags_or_error(low: Vec<CellSupport>, cfg: &EstimatorConfig) -> Result<SupportFlag> {
    if low.is_empty() {
        return Ok(SupportFlag::Ok);
    }
    match cfg.policy {
        SupportPolicy::Strict => Err(Error::InsufficientSupport { min: cfg.min_bin_count, cells: low }),
        SupportPolicy::Flag => Ok(SupportFlag::LowSupport { cells: low }),
    }
}
