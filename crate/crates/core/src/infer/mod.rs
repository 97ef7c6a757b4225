//! Exact inference: variable elimination and junction-tree belief propagation.

mod elimination;
mod junction;

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::factor::DiscreteFactor;
use crate::model::DiscreteBayesianNetwork;

pub use elimination::{elimination_order, greedy_order, induced_width, ve_query, EliminationHeuristic};
pub use junction::{build_junction_tree, JunctionEdge, JunctionTree};

/// Hard observations and likelihood (virtual) evidence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Evidence {
    hard: Vec<(String, usize)>,
    likelihoods: Vec<(String, Vec<f64>)>,
}

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds the hard observation `var = state`.
    pub fn observe(mut self, var: impl Into<String>, state: usize) -> Self {
        self.hard.push((var.into(), state));
        self
    }

    /// Adds virtual evidence: a likelihood over the states of `var`.
    pub fn likelihood(mut self, var: impl Into<String>, values: Vec<f64>) -> Self {
        self.likelihoods.push((var.into(), values));
        self
    }

    pub fn hard(&self) -> &[(String, usize)] {
        &self.hard
    }

    pub fn virtual_evidence(&self) -> &[(String, Vec<f64>)] {
        &self.likelihoods
    }

    pub fn is_empty(&self) -> bool {
        self.hard.is_empty() && self.likelihoods.is_empty()
    }

    pub fn hard_variables(&self) -> BTreeSet<&str> {
        self.hard.iter().map(|(v, _)| v.as_str()).collect()
    }

    /// Checks names, states and likelihood shapes against `bn`.
    pub fn validate(&self, bn: &DiscreteBayesianNetwork) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (v, s) in &self.hard {
            let card = bn.cardinality(v)?;
            if *s >= card {
                return Err(Error::StateOutOfRange {
                    variable: v.clone(),
                    state: *s,
                    cardinality: card,
                });
            }
            if !seen.insert(v.as_str()) {
                return Err(Error::InvalidEvidence(format!("`{v}` given twice")));
            }
        }
        for (v, l) in &self.likelihoods {
            let card = bn.cardinality(v)?;
            if l.len() != card {
                return Err(Error::InvalidEvidence(format!(
                    "likelihood for `{v}` has {} entries, expected {card}",
                    l.len()
                )));
            }
            if l.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::InvalidEvidence(format!(
                    "likelihood for `{v}` has a negative or non-finite entry"
                )));
            }
            if l.iter().all(|x| *x == 0.0) {
                return Err(Error::InvalidEvidence(format!(
                    "likelihood for `{v}` is identically zero"
                )));
            }
            if !seen.insert(v.as_str()) {
                return Err(Error::InvalidEvidence(format!("`{v}` given twice")));
            }
        }
        Ok(())
    }

    /// One factor per virtual evidence entry.
    pub(crate) fn likelihood_factors(&self) -> Vec<DiscreteFactor> {
        self.likelihoods
            .iter()
            .map(|(v, l)| DiscreteFactor::new(vec![v.clone()], vec![l.len()], l.clone()).expect("validated likelihood"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{TabularCpd, VariableMeta};

    fn chain() -> DiscreteBayesianNetwork {
        DiscreteBayesianNetwork::new(
            vec![
                VariableMeta::with_cardinality("A", 2).unwrap(),
                VariableMeta::with_cardinality("B", 2).unwrap(),
            ],
            vec![
                TabularCpd::new("A", 2, &[], vec![0.6, 0.4]).unwrap(),
                TabularCpd::new("B", 2, &[("A", 2)], vec![0.7, 0.3, 0.2, 0.8]).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn evidence_validation() {
        let bn = chain();
        assert!(Evidence::new().observe("A", 1).validate(&bn).is_ok());
        assert!(matches!(
            Evidence::new().observe("A", 2).validate(&bn),
            Err(Error::StateOutOfRange { .. })
        ));
        assert!(Evidence::new().observe("Q", 0).validate(&bn).is_err());
        assert!(Evidence::new()
            .observe("A", 0)
            .likelihood("A", vec![1.0, 1.0])
            .validate(&bn)
            .is_err());
        assert!(Evidence::new().likelihood("B", vec![0.0, 0.0]).validate(&bn).is_err());
        assert!(Evidence::new().likelihood("B", vec![1.0]).validate(&bn).is_err());
        assert!(Evidence::new().likelihood("B", vec![-1.0, 2.0]).validate(&bn).is_err());
    }
}
