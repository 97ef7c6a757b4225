//! Parameter estimation for a fixed graph: maximum likelihood, Bayesian
//! posterior mean, and expectation maximization for incomplete data.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::factor::DiscreteFactor;
use crate::graph::Dag;
use crate::infer::{build_junction_tree, Evidence};
use crate::model::{DiscreteBayesianNetwork, TabularCpd, VariableMeta};

/// Dirichlet prior used by [`bayes_fit`].
#[derive(Debug, Clone, PartialEq)]
pub enum PriorSpec {
    /// Pseudo-counts per family, laid out like the CPD values (parents in
    /// lexicographic order, parent-configuration major, child state fastest).
    Dirichlet(BTreeMap<String, Vec<f64>>),
    /// `ess / (r * q)` pseudo-counts per cell.
    BDeu { ess: f64 },
    /// One pseudo-count per cell.
    K2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmConfig {
    pub max_iter: usize,
    /// Stop once the observed-data log-likelihood improves by less than this.
    pub tol: f64,
    pub seed: u64,
    /// Amplitude of the random perturbation of the uniform starting CPDs.
    pub init_noise: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-4,
            seed: 0,
            init_noise: 0.01,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmResult {
    pub model: DiscreteBayesianNetwork,
    /// Observed-data log-likelihood of the parameters entering each iteration.
    pub log_likelihoods: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Variables of every node, taken from the data or, for latents, from `latents`.
fn node_metas(dag: &Dag, data: &DataTable, latents: &[VariableMeta]) -> Result<Vec<VariableMeta>> {
    let latent: BTreeMap<&str, &VariableMeta> = latents.iter().map(|m| (m.name(), m)).collect();
    dag.nodes()
        .map(|n| match latent.get(n) {
            Some(m) => {
                if data.has_column(n) && data.column(n)?.iter().any(Option::is_some) {
                    return Err(Error::InvalidData(format!("latent column `{n}` has observed values")));
                }
                Ok((*m).clone())
            }
            None => data.meta(n).cloned(),
        })
        .collect()
}

fn family(dag: &Dag, child: &str) -> Vec<String> {
    let mut f: Vec<String> = dag.parents(child).iter().cloned().collect();
    f.push(child.to_string());
    f
}

/// Normalizes each column of a family count table; empty columns become uniform.
fn cpd_from_counts(counts: &DiscreteFactor) -> Result<TabularCpd> {
    let r = *counts.cards().last().expect("family has a child");
    let mut values = counts.values().to_vec();
    for col in values.chunks_mut(r) {
        let s: f64 = col.iter().sum();
        if s > 0.0 {
            col.iter_mut().for_each(|v| *v /= s);
        } else {
            col.iter_mut().for_each(|v| *v = 1.0 / r as f64);
        }
    }
    TabularCpd::from_factor(DiscreteFactor::new(
        counts.scope().to_vec(),
        counts.cards().to_vec(),
        values,
    )?)
}

fn assemble(
    dag: &Dag,
    metas: Vec<VariableMeta>,
    cpds: Vec<TabularCpd>,
    latents: BTreeSet<String>,
) -> Result<DiscreteBayesianNetwork> {
    DiscreteBayesianNetwork::from_parts(dag.clone(), metas, cpds, latents)
}

fn complete_counts(dag: &Dag, data: &DataTable) -> Result<Vec<DiscreteFactor>> {
    for n in dag.nodes() {
        if data.column_has_missing(n)? {
            return Err(Error::MissingDataPresent(n.to_string()));
        }
    }
    dag.nodes().map(|n| data.contingency(&family(dag, n))).collect()
}

/// Maximum-likelihood CPDs from weighted frequencies.
pub fn mle_fit(dag: &Dag, data: &DataTable) -> Result<DiscreteBayesianNetwork> {
    let metas = node_metas(dag, data, &[])?;
    let counts = complete_counts(dag, data)?;
    let cpds = counts.iter().map(cpd_from_counts).collect::<Result<Vec<_>>>()?;
    assemble(dag, metas, cpds, BTreeSet::new())
}

/// Posterior-mean CPDs under a Dirichlet prior.
pub fn bayes_fit(dag: &Dag, data: &DataTable, prior: &PriorSpec) -> Result<DiscreteBayesianNetwork> {
    let metas = node_metas(dag, data, &[])?;
    let counts = complete_counts(dag, data)?;
    if let PriorSpec::Dirichlet(table) = prior {
        if let Some(extra) = table.keys().find(|k| !dag.contains(k)) {
            return Err(Error::InvalidPrior(format!("prior given for unknown family `{extra}`")));
        }
    }
    let mut cpds = Vec::with_capacity(counts.len());
    for c in &counts {
        let child = c.scope().last().expect("child").clone();
        let r = *c.cards().last().expect("child");
        let cells = c.values().len();
        let q = cells / r;
        let pseudo: Vec<f64> = match prior {
            PriorSpec::K2 => vec![1.0; cells],
            PriorSpec::BDeu { ess } => {
                if !(*ess > 0.0 && ess.is_finite()) {
                    return Err(Error::InvalidPrior(format!("ess must be positive, got {ess}")));
                }
                vec![ess / (r * q) as f64; cells]
            }
            PriorSpec::Dirichlet(table) => {
                let p = table
                    .get(&child)
                    .ok_or_else(|| Error::InvalidPrior(format!("no pseudo-counts for `{child}`")))?;
                if p.len() != cells {
                    return Err(Error::InvalidPrior(format!(
                        "pseudo-counts for `{child}` have {} entries, expected {cells}",
                        p.len()
                    )));
                }
                if p.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
                    return Err(Error::InvalidPrior(format!(
                        "pseudo-counts for `{child}` must be positive"
                    )));
                }
                p.clone()
            }
        };
        let values = c.values().iter().zip(&pseudo).map(|(n, a)| n + a).collect();
        let posterior = DiscreteFactor::new(c.scope().to_vec(), c.cards().to_vec(), values)?;
        cpds.push(cpd_from_counts(&posterior)?);
    }
    assemble(dag, metas, cpds, BTreeSet::new())
}

/// Uniform CPDs plus seeded additive noise, renormalized.
fn initial_model(
    dag: &Dag,
    metas: &[VariableMeta],
    latents: BTreeSet<String>,
    config: &EmConfig,
) -> Result<DiscreteBayesianNetwork> {
    let card: BTreeMap<&str, usize> = metas.iter().map(|m| (m.name(), m.cardinality())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut cpds = Vec::new();
    for n in dag.nodes() {
        let scope = family(dag, n);
        let cards: Vec<usize> = scope.iter().map(|v| card[v.as_str()]).collect();
        let size: usize = cards.iter().product();
        let r = card[n];
        let values: Vec<f64> = (0..size)
            .map(|_| 1.0 / r as f64 + config.init_noise * rng.gen::<f64>())
            .collect();
        cpds.push(cpd_from_counts(&DiscreteFactor::new(scope, cards, values)?)?);
    }
    assemble(dag, metas.to_vec(), cpds, latents)
}

/// Expectation maximization from seeded near-uniform starting parameters.
///
/// `latents` declares variables that are never observed; their columns may be
/// absent from `data` or present and entirely missing.
pub fn em_fit(dag: &Dag, data: &DataTable, latents: &[VariableMeta], config: &EmConfig) -> Result<EmResult> {
    let metas = node_metas(dag, data, latents)?;
    let latent_names = latents.iter().map(|m| m.name().to_string()).collect();
    let init = initial_model(dag, &metas, latent_names, config)?;
    em_fit_from(&init, data, config)
}

/// Expectation maximization starting from the parameters of `initial`.
pub fn em_fit_from(initial: &DiscreteBayesianNetwork, data: &DataTable, config: &EmConfig) -> Result<EmResult> {
    if config.max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    if config.tol.is_nan() || config.tol <= 0.0 {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let dag = initial.dag().clone();
    let nodes: Vec<String> = dag.nodes().map(String::from).collect();
    // column index in `data` for each node, None when the node is latent
    let mut columns = Vec::with_capacity(nodes.len());
    for n in &nodes {
        if initial.is_latent(n) {
            columns.push(None);
        } else {
            let idx = data.column_index(n)?;
            let dm = data.meta(n)?;
            if dm.cardinality() != initial.cardinality(n)? {
                return Err(Error::CardinalityMismatch {
                    variable: n.clone(),
                    left: initial.cardinality(n)?,
                    right: dm.cardinality(),
                });
            }
            columns.push(Some(idx));
        }
    }
    // rows grouped by their observed pattern
    let mut patterns: BTreeMap<Vec<Option<usize>>, f64> = BTreeMap::new();
    for row in 0..data.n_rows() {
        let key: Vec<Option<usize>> = columns.iter().map(|c| c.and_then(|i| data.cell(row, i))).collect();
        *patterns.entry(key).or_insert(0.0) += data.weight(row);
    }
    patterns.retain(|k, w| *w > 0.0 && k.iter().any(Option::is_some));
    if patterns.is_empty() {
        return Err(Error::NoObservedData);
    }

    let mut model = initial.clone();
    let mut lls = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iter {
        iterations += 1;
        let (counts, ll) = expected_counts(&model, &nodes, &patterns)?;
        let prev = lls.last().copied();
        lls.push(ll);
        let cpds = counts.iter().map(cpd_from_counts).collect::<Result<Vec<_>>>()?;
        let mut next = assemble(&dag, model.metas().cloned().collect(), cpds, model.latents().clone())?;
        next.metadata = model.metadata.clone();
        model = next;
        if prev.is_some_and(|p| (ll - p).abs() < config.tol) {
            converged = true;
            break;
        }
    }
    Ok(EmResult {
        model,
        log_likelihoods: lls,
        iterations,
        converged,
    })
}

/// E-step: expected family counts and the observed-data log-likelihood.
fn expected_counts(
    model: &DiscreteBayesianNetwork,
    nodes: &[String],
    patterns: &BTreeMap<Vec<Option<usize>>, f64>,
) -> Result<(Vec<DiscreteFactor>, f64)> {
    let dag = model.dag();
    let families: Vec<Vec<String>> = nodes.iter().map(|n| family(dag, n)).collect();
    let position: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut counts: Vec<DiscreteFactor> = families
        .iter()
        .map(|f| {
            let cards = f.iter().map(|v| model.cardinality(v)).collect::<Result<Vec<_>>>()?;
            DiscreteFactor::constant(f.clone(), cards, 0.0)
        })
        .collect::<Result<_>>()?;
    let jt = build_junction_tree(model)?;
    let mut ll = 0.0;
    for (pattern, &w) in patterns {
        if pattern.iter().all(Option::is_some) {
            for (i, f) in families.iter().enumerate() {
                let states: Vec<usize> = f.iter().map(|v| pattern[position[v.as_str()]].unwrap()).collect();
                let cpd = model.cpd(&nodes[i])?;
                ll += w * cpd
                    .probability(states[states.len() - 1], &states[..states.len() - 1])
                    .ln();
                let off = counts[i].offset(&states);
                counts[i].values_mut()[off] += w;
            }
            continue;
        }
        let mut ev = Evidence::new();
        for (n, s) in nodes.iter().zip(pattern) {
            if let Some(s) = s {
                ev = ev.observe(n.clone(), *s);
            }
        }
        let cal = jt.calibrate(&ev)?;
        ll += w * cal.evidence_probability()?.ln();
        for (i, f) in families.iter().enumerate() {
            let post = cal.query(f)?.reorder(f)?;
            for (c, p) in counts[i].values_mut().iter_mut().zip(post.values()) {
                *c += w * p;
            }
        }
    }
    Ok((counts, ll))
}
