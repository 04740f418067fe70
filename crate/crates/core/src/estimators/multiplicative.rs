use super::spec::{cell_sign, TargetSpec};
use super::{deficient, flags_or_error, CellSummary, EstimateKind, EstimatorConfig, InteractionEstimate, PreparedEstimator};
use crate::error::{CellSupport, Error, Result};
use crate::store::DataView;

/// Maps canonical cell indices (targets sorted by variable index) to the
/// spec's own cell indices, so reordering the targets cannot change the
/// order of floating-point operations.
pub(super) fn canonical_cells(targets: &[usize]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..targets.len()).collect();
    perm.sort_by_key(|&k| targets[k]);
    (0..1usize << targets.len())
        .map(|cc| perm.iter().enumerate().filter(|(k, _)| cc >> k & 1 == 1).map(|(_, &p)| 1 << p).sum())
        .collect()
}

/// Alternating product of cell counts. Cells are paired across the first
/// canonical target so each factor is a plain ratio.
fn alternating_ratio(counts: &[f64], order: &[usize], n: usize) -> f64 {
    let mut value = 1.0;
    for cc in (0..order.len()).filter(|cc| cc & 1 == 1) {
        let (on, off) = (counts[order[cc]], counts[order[cc ^ 1]]);
        value *= if cell_sign(cc, n) > 0.0 { on / off } else { off / on };
    }
    value
}

pub(super) fn evaluate(p: &PreparedEstimator<'_>, weights: Option<&[f64]>) -> Result<InteractionEstimate> {
    let spec = &p.spec;
    let counts = p.index.table(weights, None).swap_remove(0).support;
    let (zero, low) = deficient(spec, &counts, p.cfg.min_bin_count);
    if !zero.is_empty() {
        return Err(Error::ZeroCell { cells: zero });
    }
    let flags = flags_or_error(low, &p.cfg)?;

    let value = alternating_ratio(&counts, &canonical_cells(&spec.targets), spec.order());
    let total: f64 = counts.iter().sum();
    Ok(InteractionEstimate {
        kind: EstimateKind::Multiplicative,
        targets: spec.targets.clone(),
        transitions: spec.transitions.clone(),
        reference: spec.reference.clone(),
        value,
        log_value: Some(value.ln()),
        cells: counts
            .iter()
            .enumerate()
            .map(|(c, &s)| CellSummary { assignment: spec.cell_values(c), mean: s / total, support: s })
            .collect(),
        flags,
    })
}

/// Alternating product of conditional probabilities, computed from joint cell counts.
pub fn multiplicative_interaction(
    view: &DataView<'_>,
    spec: &TargetSpec,
    cfg: &EstimatorConfig,
) -> Result<InteractionEstimate> {
    PreparedEstimator::multiplicative(view.matrix(), spec, *cfg)?.evaluate(view.weights())
}

/// The same quantity assembled from conditional means of the first target
/// given each on/off pattern of the others: with `R = p/(1-p)`,
/// `I^m = prod_b R(b)^((-1)^(n-1-|b|))`.
pub fn multiplicative_via_expectations(
    view: &DataView<'_>,
    spec: &TargetSpec,
    cfg: &EstimatorConfig,
) -> Result<InteractionEstimate> {
    let m = view.matrix();
    let spec = spec.resolve(m, None)?;
    if !spec.all_binary(m) {
        return Err(Error::InvalidSpec("the expectation form needs binary targets".into()));
    }
    if !spec.strata.is_empty() {
        return Err(Error::InvalidSpec("covariate strata apply to additive estimates only".into()));
    }
    let n = spec.order();
    let (first, (from, to)) = (spec.targets[0], spec.transitions[0]);

    let mut value = 1.0;
    for b in 0..1usize << (n - 1) {
        let rest: Vec<(usize, u8)> = spec.targets[1..]
            .iter()
            .zip(&spec.transitions[1..])
            .enumerate()
            .map(|(k, (&t, &(f, o)))| (t, if b >> k & 1 == 1 { o } else { f }))
            .collect();
        let cond = spec.reference.extended(&rest)?;
        let mean = match view.conditional_mean(first, &cond, 0.0) {
            Ok(cm) => cm.mean,
            Err(Error::InsufficientSupport { .. }) => f64::NAN,
            Err(e) => return Err(e),
        };
        if !(mean > 0.0 && mean < 1.0) {
            return Err(Error::DegenerateMean { cell: rest.iter().map(|&(_, v)| v).collect(), mean });
        }
        let (p_to, p_from) = if to == 1 && from == 0 {
            (mean, 1.0 - mean)
        } else if to == 0 && from == 1 {
            (1.0 - mean, mean)
        } else {
            (1.0, 1.0)
        };
        let r = p_to / p_from;
        value *= if cell_sign(b, n - 1) > 0.0 { r } else { 1.0 / r };
    }

    let counts: Vec<f64> = (0..spec.n_cells())
        .map(|c| view.count(&spec.cell_assignment(c)))
        .collect::<Result<_>>()?;
    let low: Vec<CellSupport> = counts
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < cfg.min_bin_count)
        .map(|(c, &s)| CellSupport { cell: spec.cell_values(c), support: s })
        .collect();
    let flags = flags_or_error(low, cfg)?;
    let total: f64 = counts.iter().sum();
    Ok(InteractionEstimate {
        kind: EstimateKind::Multiplicative,
        targets: spec.targets.clone(),
        transitions: spec.transitions.clone(),
        reference: spec.reference.clone(),
        value,
        log_value: Some(value.ln()),
        cells: counts
            .iter()
            .enumerate()
            .map(|(c, &s)| CellSummary { assignment: spec.cell_values(c), mean: s / total, support: s })
            .collect(),
        flags,
    })
}
