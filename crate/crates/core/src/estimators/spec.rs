use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::{Assignment, SampleMatrix, VariableKind};

/// Which tuple to estimate and what to hold fixed while doing it.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TargetSpec {
    pub targets: Vec<usize>,
    /// Per-target (from, to) categories; `None` means (0, 1) everywhere.
    #[serde(default)]
    pub transitions: Option<Vec<(u8, u8)>>,
    /// Variables pinned to the reference; `None` means every other discrete variable.
    #[serde(default)]
    pub conditioning: Option<Vec<usize>>,
    /// Values for the conditioning set; unlisted conditioning variables sit at 0.
    #[serde(default)]
    pub reference: Option<Assignment>,
    /// Discrete covariates averaged over outside the conditional expectation.
    #[serde(default)]
    pub covariate_strata: Vec<usize>,
}

impl TargetSpec {
    pub fn new(targets: impl Into<Vec<usize>>) -> Self {
        Self { targets: targets.into(), ..Default::default() }
    }

    pub fn with_conditioning(mut self, vars: impl Into<Vec<usize>>) -> Self {
        self.conditioning = Some(vars.into());
        self
    }

    pub fn with_reference(mut self, reference: Assignment) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn with_transitions(mut self, transitions: impl Into<Vec<(u8, u8)>>) -> Self {
        self.transitions = Some(transitions.into());
        self
    }

    pub fn with_strata(mut self, vars: impl Into<Vec<usize>>) -> Self {
        self.covariate_strata = vars.into();
        self
    }

    pub fn order(&self) -> usize {
        self.targets.len()
    }

    /// Checks the spec against `m` and fills in defaults. `outcome` is kept
    /// out of the default conditioning set.
    pub fn resolve(&self, m: &SampleMatrix, outcome: Option<usize>) -> Result<ResolvedSpec> {
        let n = self.targets.len();
        if n == 0 {
            return Err(Error::InvalidSpec("need at least one target".into()));
        }
        if n > m.n_vars() {
            return Err(Error::InvalidSpec(format!("{n} targets but only {} variables", m.n_vars())));
        }
        let in_range = |v: usize, what: &str| {
            if v >= m.n_vars() {
                Err(Error::InvalidSpec(format!("{what} index {v} out of range")))
            } else {
                Ok(())
            }
        };
        for (i, &t) in self.targets.iter().enumerate() {
            in_range(t, "target")?;
            if self.targets[..i].contains(&t) {
                return Err(Error::InvalidSpec(format!("target {t} listed twice")));
            }
            if !m.variable(t).kind.is_discrete() {
                return Err(Error::InvalidSpec(format!("target '{}' is an outcome", m.variable(t).name)));
            }
            if Some(t) == outcome {
                return Err(Error::InvalidSpec(format!("'{}' is both target and outcome", m.variable(t).name)));
            }
        }

        let transitions = match &self.transitions {
            None => vec![(0, 1); n],
            Some(tr) if tr.len() != n => {
                return Err(Error::InvalidSpec(format!("{} transitions for {n} targets", tr.len())))
            }
            Some(tr) => tr.clone(),
        };
        for (&t, &(from, to)) in self.targets.iter().zip(&transitions) {
            let k = m.variable(t).kind.categories().unwrap_or(0);
            if from as u16 >= k || to as u16 >= k {
                return Err(Error::InvalidSpec(format!(
                    "transition {from}->{to} outside the {k} categories of '{}'",
                    m.variable(t).name
                )));
            }
        }

        for &s in &self.covariate_strata {
            in_range(s, "stratum")?;
            if !m.variable(s).kind.is_discrete() {
                return Err(Error::InvalidSpec(format!("stratum '{}' is not discrete", m.variable(s).name)));
            }
            if self.targets.contains(&s) || Some(s) == outcome {
                return Err(Error::InvalidSpec(format!("stratum {s} overlaps the targets or outcome")));
            }
        }

        let conditioning: Vec<usize> = match &self.conditioning {
            Some(c) => c.clone(),
            None => m
                .discrete_vars()
                .into_iter()
                .filter(|v| !self.targets.contains(v) && !self.covariate_strata.contains(v) && Some(*v) != outcome)
                .collect(),
        };
        for (i, &c) in conditioning.iter().enumerate() {
            in_range(c, "conditioning")?;
            if self.targets.contains(&c) {
                return Err(Error::InvalidSpec(format!("variable {c} is both target and conditioning")));
            }
            if self.covariate_strata.contains(&c) || Some(c) == outcome {
                return Err(Error::InvalidSpec(format!("conditioning variable {c} is a stratum or the outcome")));
            }
            if conditioning[..i].contains(&c) {
                return Err(Error::InvalidSpec(format!("conditioning variable {c} listed twice")));
            }
        }

        let mut pairs: Vec<(usize, u8)> = conditioning.iter().map(|&c| (c, 0)).collect();
        if let Some(r) = &self.reference {
            for &(var, value) in r.pairs() {
                let slot = pairs
                    .iter_mut()
                    .find(|(v, _)| *v == var)
                    .ok_or_else(|| Error::InvalidSpec(format!("reference variable {var} is not conditioned on")))?;
                slot.1 = value;
            }
        }
        let reference = Assignment::new(pairs)?;
        reference.validate(m)?;

        if let Some(o) = outcome {
            in_range(o, "outcome")?;
        }
        Ok(ResolvedSpec { targets: self.targets.clone(), transitions, reference, strata: self.covariate_strata.clone() })
    }
}

/// A [`TargetSpec`] with defaults applied and validated against a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedSpec {
    pub targets: Vec<usize>,
    pub transitions: Vec<(u8, u8)>,
    pub reference: Assignment,
    pub strata: Vec<usize>,
}

impl ResolvedSpec {
    pub fn order(&self) -> usize {
        self.targets.len()
    }

    pub fn n_cells(&self) -> usize {
        1 << self.targets.len()
    }

    /// Target values of cell `c`: bit k of `c` selects the "to" category of target k.
    pub fn cell_values(&self, c: usize) -> Vec<u8> {
        self.transitions
            .iter()
            .enumerate()
            .map(|(k, &(from, to))| if c >> k & 1 == 1 { to } else { from })
            .collect()
    }

    pub fn cell_assignment(&self, c: usize) -> Assignment {
        let extra: Vec<(usize, u8)> = self.targets.iter().copied().zip(self.cell_values(c)).collect();
        self.reference.extended(&extra).expect("targets are disjoint from the reference")
    }

    pub fn all_binary(&self, m: &SampleMatrix) -> bool {
        self.targets.iter().all(|&t| m.variable(t).kind == VariableKind::Binary)
    }
}

/// `(-1)^(n - |J|)` for the cell whose "on" set is `c`.
#[inline]
pub fn cell_sign(c: usize, n: usize) -> f64 {
    if (n - c.count_ones() as usize).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{BitColumn, SampleMatrixBuilder, VariableMeta};

    fn m() -> SampleMatrix {
        SampleMatrixBuilder::new(2)
            .outcome(VariableMeta::outcome("y"), vec![0.0, 1.0])
            .binary(VariableMeta::binary("a"), BitColumn::zeros(2))
            .binary(VariableMeta::binary("b"), BitColumn::zeros(2))
            .categorical(VariableMeta::categorical("c", 3), vec![0, 2])
            .build()
            .unwrap()
    }

    #[test]
    fn default_conditioning_skips_targets_and_outcome() {
        let r = TargetSpec::new([1]).resolve(&m(), Some(0)).unwrap();
        assert_eq!(r.reference.pairs(), &[(2, 0), (3, 0)]);
        assert_eq!(r.transitions, vec![(0, 1)]);
    }

    #[test]
    fn cell_layout_lsb_first() {
        let r = TargetSpec::new([2, 1]).with_conditioning([]).resolve(&m(), None).unwrap();
        assert_eq!(r.cell_values(1), vec![1, 0]);
        assert_eq!(r.cell_assignment(2).pairs(), &[(2, 0), (1, 1)]);
        assert_eq!(cell_sign(0, 2), 1.0);
        assert_eq!(cell_sign(1, 2), -1.0);
        assert_eq!(cell_sign(3, 2), 1.0);
    }

    #[test]
    fn rejects_bad_specs() {
        let m = m();
        assert!(TargetSpec::new([1, 1]).resolve(&m, None).is_err());
        assert!(TargetSpec::new([0]).resolve(&m, None).is_err());
        assert!(TargetSpec::new([1]).with_conditioning([1]).resolve(&m, None).is_err());
        assert!(TargetSpec::new([3]).with_transitions([(0, 3)]).resolve(&m, None).is_err());
        assert!(TargetSpec::new([1])
            .with_conditioning([2])
            .with_reference(Assignment::new(vec![(3, 1)]).unwrap())
            .resolve(&m, None)
            .is_err());
        assert!(TargetSpec::new(Vec::new()).resolve(&m, None).is_err());
    }
}
