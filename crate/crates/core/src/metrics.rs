//! Model testing: data log-likelihood, structure scores, and the F1 agreement
//! between implied and observed pairwise dependence.

use std::collections::{BTreeMap, BTreeSet};

use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::graph::{d_separated, Dag};
use crate::infer::{build_junction_tree, Evidence};
use crate::learn::{ci_test, CiMethod};
use crate::model::DiscreteBayesianNetwork;

pub use crate::learn::structure_score;

/// Σ_rows weight · ln P(row). Latent variables are summed out.
pub fn log_likelihood(bn: &DiscreteBayesianNetwork, data: &DataTable) -> Result<f64> {
    let observed = bn.observed();
    let mut columns = Vec::with_capacity(observed.len());
    for v in &observed {
        let idx = data.column_index(v)?;
        let dm = data.meta(v)?;
        if dm.cardinality() != bn.cardinality(v)? {
            return Err(Error::CardinalityMismatch {
                variable: v.clone(),
                left: bn.cardinality(v)?,
                right: dm.cardinality(),
            });
        }
        if data.column_has_missing(v)? {
            return Err(Error::MissingDataPresent(v.clone()));
        }
        columns.push(idx);
    }
    // rows grouped by observed values, each group scored once
    let mut groups: BTreeMap<Vec<usize>, (f64, Vec<usize>)> = BTreeMap::new();
    for row in 0..data.n_rows() {
        let w = data.weight(row);
        if w == 0.0 {
            continue;
        }
        let key: Vec<usize> = columns.iter().map(|&c| data.cell(row, c).expect("complete")).collect();
        let g = groups.entry(key).or_insert((0.0, Vec::new()));
        g.0 += w;
        g.1.push(row);
    }
    let jt = if bn.latents().is_empty() {
        None
    } else {
        Some(build_junction_tree(bn)?)
    };
    let mut total = 0.0;
    let mut zero_rows = Vec::new();
    for (states, (w, rows)) in &groups {
        let p = match &jt {
            None => {
                let value: BTreeMap<&str, usize> = observed
                    .iter()
                    .map(String::as_str)
                    .zip(states.iter().copied())
                    .collect();
                let mut lp = 0.0;
                for v in &observed {
                    let cpd = bn.cpd(v)?;
                    let ps: Vec<usize> = cpd.parents().iter().map(|p| value[p.as_str()]).collect();
                    lp += cpd.probability(value[v.as_str()], &ps).ln();
                }
                lp
            }
            Some(jt) => {
                let mut ev = Evidence::new();
                for (v, s) in observed.iter().zip(states) {
                    ev = ev.observe(v.clone(), *s);
                }
                match jt.calibrate(&ev) {
                    Ok(cal) => cal.evidence_probability()?.ln(),
                    Err(Error::ImpossibleEvidence) => f64::NEG_INFINITY,
                    Err(e) => return Err(e),
                }
            }
        };
        if p == f64::NEG_INFINITY {
            zero_rows.extend(rows.iter().copied());
        } else {
            total += w * p;
        }
    }
    if !zero_rows.is_empty() {
        zero_rows.sort_unstable();
        return Err(Error::LogZero { rows: zero_rows });
    }
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct CorrelationScoreConfig {
    pub ci_method: CiMethod,
    pub alpha: f64,
}

impl Default for CorrelationScoreConfig {
    fn default() -> Self {
        Self {
            ci_method: CiMethod::chi_squared(),
            alpha: 0.05,
        }
    }
}

/// F1 of model-implied dependence (predictions) against data dependence
/// (ground truth), with the confusion counts behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationScore {
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
}

impl CorrelationScore {
    pub fn precision(&self) -> f64 {
        let d = self.true_positives + self.false_positives;
        if d == 0 {
            0.0
        } else {
            self.true_positives as f64 / d as f64
        }
    }

    pub fn recall(&self) -> f64 {
        let d = self.true_positives + self.false_negatives;
        if d == 0 {
            0.0
        } else {
            self.true_positives as f64 / d as f64
        }
    }
}

/// Compares marginal d-connection in `dag` with marginal dependence tests on
/// `data` for every unordered pair of observed nodes.
pub fn correlation_score(
    dag: &Dag,
    latents: &BTreeSet<String>,
    data: &DataTable,
    config: &CorrelationScoreConfig,
) -> Result<CorrelationScore> {
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(Error::InvalidAlpha(config.alpha));
    }
    let nodes: Vec<&str> = dag.nodes().filter(|n| !latents.contains(*n)).collect();
    let (mut tp, mut fp, mut fneg, mut tn) = (0, 0, 0, 0);
    let empty = BTreeSet::new();
    for (i, x) in nodes.iter().enumerate() {
        for y in &nodes[i + 1..] {
            let predicted = !d_separated(
                dag,
                &BTreeSet::from([x.to_string()]),
                &BTreeSet::from([y.to_string()]),
                &empty,
            )?;
            let actual = ci_test::<&str>(data, x, y, &[], &config.ci_method)?.p_value < config.alpha;
            match (predicted, actual) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fneg += 1,
                (false, false) => tn += 1,
            }
        }
    }
    let f1 = if tp == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fneg) as f64
    };
    Ok(CorrelationScore {
        f1,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fneg,
        true_negatives: tn,
    })
}

/// [`correlation_score`] on a network's graph and latent set.
pub fn correlation_score_model(
    bn: &DiscreteBayesianNetwork,
    data: &DataTable,
    config: &CorrelationScoreConfig,
) -> Result<CorrelationScore> {
    correlation_score(bn.dag(), bn.latents(), data, config)
}
