//! Max-min parents-and-children candidate discovery and the hybrid MMHC learner.

use std::collections::{BTreeMap, BTreeSet};

use super::ci::{CiMethod, CiOracle, DataCiTest};
use super::hill_climb::{hill_climb, HillClimbOptions};
use super::pc::{check_alpha, combinations};
use super::score::ScoreMethod;
use crate::data::DataTable;
use crate::error::Result;
use crate::graph::Dag;

/// Association strength of a test outcome: zero when independence is
/// accepted, otherwise `-ln p`.
fn association(p: f64, alpha: f64) -> f64 {
    if p >= alpha {
        0.0
    } else {
        -p.max(f64::MIN_POSITIVE).ln()
    }
}

fn subsets(set: &[String], max: Option<usize>) -> Vec<Vec<String>> {
    let top = max.map_or(set.len(), |m| m.min(set.len()));
    (0..=top).flat_map(|k| combinations(set, k)).collect()
}

fn candidates_for<O: CiOracle + ?Sized>(
    oracle: &O,
    target: &str,
    variables: &[String],
    alpha: f64,
    max_cond_size: Option<usize>,
) -> Result<BTreeSet<String>> {
    let mut cpc: Vec<String> = Vec::new();
    let mut excluded: BTreeSet<String> = BTreeSet::new();
    // forward phase: repeatedly admit the variable whose weakest association is strongest
    loop {
        let mut best: Option<(f64, &String)> = None;
        for x in variables {
            if x == target || cpc.contains(x) || excluded.contains(x) {
                continue;
            }
            let mut min_assoc = f64::INFINITY;
            for s in subsets(&cpc, max_cond_size) {
                min_assoc = min_assoc.min(association(oracle.p_value(x, target, &s)?, alpha));
                if min_assoc == 0.0 {
                    break;
                }
            }
            if min_assoc == 0.0 {
                excluded.insert(x.clone());
            } else if best.is_none_or(|(b, _)| min_assoc > b) {
                best = Some((min_assoc, x));
            }
        }
        match best {
            Some((_, x)) => cpc.push(x.clone()),
            None => break,
        }
    }
    // backward phase: drop members separable by a subset of the others
    let mut i = 0;
    while i < cpc.len() {
        let x = cpc[i].clone();
        let rest: Vec<String> = cpc.iter().filter(|c| **c != x).cloned().collect();
        let mut separated = false;
        for s in subsets(&rest, max_cond_size) {
            if oracle.p_value(&x, target, &s)? >= alpha {
                separated = true;
                break;
            }
        }
        if separated {
            cpc.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(cpc.into_iter().collect())
}

/// Candidate neighbour sets for every variable, symmetrized by intersection.
pub fn mmpc_with_oracle<O: CiOracle + ?Sized>(
    oracle: &O,
    variables: &[String],
    alpha: f64,
    max_cond_size: Option<usize>,
) -> Result<BTreeMap<String, BTreeSet<String>>> {
    check_alpha(alpha)?;
    let mut vars = variables.to_vec();
    vars.sort();
    vars.dedup();
    let mut raw = BTreeMap::new();
    for t in &vars {
        raw.insert(t.clone(), candidates_for(oracle, t, &vars, alpha, max_cond_size)?);
    }
    Ok(raw
        .iter()
        .map(|(t, cs)| {
            let sym = cs.iter().filter(|c| raw[*c].contains(t)).cloned().collect();
            (t.clone(), sym)
        })
        .collect())
}

fn observed(data: &DataTable) -> Vec<String> {
    data.column_names()
        .into_iter()
        .filter(|c| !data.latent_columns().contains(c))
        .collect()
}

pub fn mmpc(data: &DataTable, alpha: f64, method: &CiMethod) -> Result<BTreeMap<String, BTreeSet<String>>> {
    let test = DataCiTest {
        data,
        method: method.clone(),
    };
    mmpc_with_oracle(&test, &observed(data), alpha, None)
}

/// Hill climbing from the empty graph, restricted to pairs that MMPC kept.
pub fn mmhc(data: &DataTable, alpha: f64, ci: &CiMethod, score: &ScoreMethod) -> Result<Dag> {
    let candidates = mmpc(data, alpha, ci)?;
    mmhc_from_candidates(data, &candidates, score)
}

pub(crate) fn mmhc_from_candidates(
    data: &DataTable,
    candidates: &BTreeMap<String, BTreeSet<String>>,
    score: &ScoreMethod,
) -> Result<Dag> {
    let vars = observed(data);
    let mut blacklist = BTreeSet::new();
    for x in &vars {
        for y in &vars {
            if x != y && !candidates.get(x).is_some_and(|c| c.contains(y)) {
                blacklist.insert((x.clone(), y.clone()));
            }
        }
    }
    let opts = HillClimbOptions {
        blacklist,
        ..Default::default()
    };
    hill_climb(data, score, &opts)
}
