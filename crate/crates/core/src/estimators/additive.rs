use super::multiplicative::canonical_cells;
use super::spec::{cell_sign, TargetSpec};
use super::{deficient, flags_or_error, CellSummary, EstimateKind, EstimatorConfig, InteractionEstimate, PreparedEstimator};
use crate::error::{Error, Result};
use crate::store::DataView;

pub(super) fn evaluate(p: &PreparedEstimator<'_>, weights: Option<&[f64]>) -> Result<InteractionEstimate> {
    let spec = &p.spec;
    let m = p.matrix;
    let outcome = p.outcome.expect("additive estimators carry an outcome");
    let y = |r: usize| m.value(outcome, r);
    let tables = p.index.table(weights, Some(&y));
    let active: Vec<_> = tables.iter().filter(|t| t.freq > 0.0).collect();
    let n_cells = spec.n_cells();

    // a stratum thin in one cell makes that cell's average unreliable
    let weakest: Vec<f64> = (0..n_cells)
        .map(|c| active.iter().map(|t| t.support[c]).fold(f64::INFINITY, f64::min))
        .collect();
    let (zero, low) = deficient(spec, &weakest, p.cfg.min_bin_count);
    if !zero.is_empty() {
        let mut cells = zero;
        cells.extend(low);
        return Err(Error::InsufficientSupport { min: p.cfg.min_bin_count, cells });
    }
    let flags = flags_or_error(low, &p.cfg)?;

    let means: Vec<f64> = (0..n_cells)
        .map(|c| active.iter().map(|t| t.freq * t.sum_y[c] / t.support[c]).sum())
        .collect();
    let value = canonical_cells(&spec.targets)
        .iter()
        .enumerate()
        .map(|(cc, &c)| cell_sign(cc, spec.order()) * means[c])
        .sum();

    Ok(InteractionEstimate {
        kind: EstimateKind::Additive,
        targets: spec.targets.clone(),
        transitions: spec.transitions.clone(),
        reference: spec.reference.clone(),
        value,
        log_value: None,
        cells: (0..n_cells)
            .map(|c| CellSummary {
                assignment: spec.cell_values(c),
                mean: means[c],
                support: tables.iter().map(|t| t.support[c]).sum(),
            })
            .collect(),
        flags,
    })
}

/// Alternating sum of conditional outcome means over the 2^n target cells.
pub fn additive_interaction(
    view: &DataView<'_>,
    outcome: usize,
    spec: &TargetSpec,
    cfg: &EstimatorConfig,
) -> Result<InteractionEstimate> {
    PreparedEstimator::additive(view.matrix(), outcome, spec, *cfg)?.evaluate(view.weights())
}

/// [`additive_interaction`] with explicit category transitions per target.
pub fn additive_interaction_categorical(
    view: &DataView<'_>,
    outcome: usize,
    spec: &TargetSpec,
    cfg: &EstimatorConfig,
) -> Result<InteractionEstimate> {
    if spec.transitions.is_none() {
        return Err(Error::InvalidSpec("categorical interaction needs explicit transitions".into()));
    }
    additive_interaction(view, outcome, spec, cfg)
}

/// Average treatment effect of the single target on `outcome`.
pub fn ate(view: &DataView<'_>, outcome: usize, spec: &TargetSpec, cfg: &EstimatorConfig) -> Result<f64> {
    if spec.order() != 1 {
        return Err(Error::InvalidSpec(format!("ATE needs one treatment, got {}", spec.order())));
    }
    Ok(additive_interaction(view, outcome, spec, cfg)?.value)
}
