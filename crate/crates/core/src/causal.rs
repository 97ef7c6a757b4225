//! Graphical identification of causal effects (adjustment sets and
//! instrumental variables) and discrete effect estimation by inference.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::factor::DiscreteFactor;
use crate::graph::{d_separated, Dag};
use crate::infer::{ve_query, EliminationHeuristic, Evidence};
use crate::learn::combinations;
use crate::model::DiscreteBayesianNetwork;

/// Default cap on the number of sets or instruments returned.
pub const DEFAULT_RESULT_LIMIT: usize = 100;

/// An exposure/outcome pair on a graph whose latent nodes cannot be adjusted for.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalQuery {
    pub dag: Dag,
    pub exposure: String,
    pub outcome: String,
    pub latents: BTreeSet<String>,
}

impl CausalQuery {
    pub fn new<I, S>(dag: Dag, exposure: &str, outcome: &str, latents: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        dag.require(exposure)?;
        dag.require(outcome)?;
        if exposure == outcome {
            return Err(Error::InvalidQuery("exposure and outcome must differ".into()));
        }
        let latents: BTreeSet<String> = latents.into_iter().map(Into::into).collect();
        for l in &latents {
            dag.require(l)?;
        }
        if latents.contains(exposure) || latents.contains(outcome) {
            return Err(Error::InvalidQuery("exposure and outcome must be observed".into()));
        }
        Ok(Self {
            dag,
            exposure: exposure.to_string(),
            outcome: outcome.to_string(),
            latents,
        })
    }

    /// The query on `bn`'s graph with its latent variables.
    pub fn from_model(bn: &DiscreteBayesianNetwork, exposure: &str, outcome: &str) -> Result<Self> {
        Self::new(bn.dag().clone(), exposure, outcome, bn.latents().iter().cloned())
    }

    fn observed(&self) -> impl Iterator<Item = &str> + '_ {
        self.dag.nodes().filter(|n| !self.latents.contains(*n))
    }

    /// Nodes other than the exposure lying on a directed path from exposure to outcome.
    fn causal_nodes(&self) -> BTreeSet<String> {
        let below: BTreeSet<String> = self.dag.descendants_of([self.exposure.as_str()]);
        let above: BTreeSet<String> = self.dag.ancestors_of([self.outcome.as_str()]);
        below
            .intersection(&above)
            .filter(|n| **n != self.exposure)
            .cloned()
            .collect()
    }

    /// The graph without the first edge of every proper causal path.
    fn proper_backdoor_graph(&self, causal: &BTreeSet<String>) -> Dag {
        let mut g = self.dag.clone();
        for c in self.dag.children(&self.exposure).clone() {
            if causal.contains(&c) {
                g.remove_edge(&self.exposure, &c);
            }
        }
        g
    }
}

fn singleton(s: &str) -> BTreeSet<String> {
    BTreeSet::from([s.to_string()])
}

fn check_members(q: &CausalQuery, z: &BTreeSet<String>) -> Result<()> {
    for v in z {
        q.dag.require(v)?;
    }
    Ok(())
}

/// Generalized adjustment criterion: `z` avoids every descendant of a proper
/// causal-path node and blocks all non-causal paths.
pub fn is_valid_adjustment_set(q: &CausalQuery, z: &BTreeSet<String>) -> Result<bool> {
    check_members(q, z)?;
    if z.contains(&q.exposure) || z.contains(&q.outcome) || z.iter().any(|v| q.latents.contains(v)) {
        return Ok(false);
    }
    let causal = q.causal_nodes();
    let forbidden = q.dag.descendants_of(causal.iter().map(String::as_str));
    if z.iter().any(|v| forbidden.contains(v)) {
        return Ok(false);
    }
    let g = q.proper_backdoor_graph(&causal);
    d_separated(&g, &singleton(&q.exposure), &singleton(&q.outcome), z)
}

/// Pearl's back-door criterion: no descendant of the exposure, and every
/// path entering the exposure through a parent is blocked.
pub fn is_backdoor_set(q: &CausalQuery, z: &BTreeSet<String>) -> Result<bool> {
    check_members(q, z)?;
    if z.contains(&q.exposure) || z.contains(&q.outcome) || z.iter().any(|v| q.latents.contains(v)) {
        return Ok(false);
    }
    let below = q.dag.descendants_of([q.exposure.as_str()]);
    if z.iter().any(|v| below.contains(v)) {
        return Ok(false);
    }
    let mut g = q.dag.clone();
    for c in q.dag.children(&q.exposure).clone() {
        g.remove_edge(&q.exposure, &c);
    }
    d_separated(&g, &singleton(&q.exposure), &singleton(&q.outcome), z)
}

/// All inclusion-minimal valid adjustment sets, by increasing size and
/// lexicographically within a size, up to [`DEFAULT_RESULT_LIMIT`] sets.
pub fn minimal_adjustment_sets(q: &CausalQuery) -> Result<Vec<BTreeSet<String>>> {
    minimal_adjustment_sets_limited(q, DEFAULT_RESULT_LIMIT)
}

pub fn minimal_adjustment_sets_limited(q: &CausalQuery, limit: usize) -> Result<Vec<BTreeSet<String>>> {
    // minimal sets lie among observed ancestors of exposure or outcome that
    // are not descendants of the exposure
    let relevant = q.dag.ancestors_of([q.exposure.as_str(), q.outcome.as_str()]);
    let below = q.dag.descendants_of([q.exposure.as_str()]);
    let pool: Vec<String> = q
        .observed()
        .filter(|n| relevant.contains(*n) && !below.contains(*n) && *n != q.outcome)
        .map(String::from)
        .collect();
    let mut found: Vec<BTreeSet<String>> = Vec::new();
    for k in 0..=pool.len() {
        for combo in combinations(&pool, k) {
            if found.len() >= limit {
                return Ok(found);
            }
            let z: BTreeSet<String> = combo.into_iter().collect();
            if found.iter().any(|m| m.is_subset(&z)) {
                continue;
            }
            if is_valid_adjustment_set(q, &z)? {
                found.push(z);
            }
        }
    }
    Ok(found)
}

/// An instrument with the set it must be conditioned on (empty for a plain IV).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct IvResult {
    pub instrument: String,
    pub conditioning_set: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IvOptions {
    /// Largest conditioning set tried; unbounded when `None`.
    pub max_conditioning_size: Option<usize>,
    pub limit: usize,
}

impl Default for IvOptions {
    fn default() -> Self {
        Self {
            max_conditioning_size: None,
            limit: DEFAULT_RESULT_LIMIT,
        }
    }
}

fn without_direct_edge(q: &CausalQuery) -> Result<Dag> {
    if !q.dag.has_edge(&q.exposure, &q.outcome) {
        return Err(Error::NoDirectedEdge {
            exposure: q.exposure.clone(),
            outcome: q.outcome.clone(),
        });
    }
    let mut g = q.dag.clone();
    g.remove_edge(&q.exposure, &q.outcome);
    Ok(g)
}

/// Checks the three defining conditions of a conditional instrument directly.
pub fn is_conditional_instrument(q: &CausalQuery, z: &str, w: &BTreeSet<String>) -> Result<bool> {
    q.dag.require(z)?;
    check_members(q, w)?;
    let reduced = without_direct_edge(q)?;
    if z == q.exposure || z == q.outcome || q.latents.contains(z) {
        return Ok(false);
    }
    if w.contains(z) || w.contains(&q.exposure) || w.contains(&q.outcome) || w.iter().any(|v| q.latents.contains(v)) {
        return Ok(false);
    }
    let below_outcome = q.dag.descendants_of([q.outcome.as_str()]);
    if w.iter().any(|v| below_outcome.contains(v)) {
        return Ok(false);
    }
    let zs = singleton(z);
    let relevant = !d_separated(&q.dag, &zs, &singleton(&q.exposure), w)?;
    let exclusion = d_separated(&reduced, &zs, &singleton(&q.outcome), w)?;
    Ok(relevant && exclusion)
}

/// Instruments for the exposure→outcome edge. Each observed candidate is
/// returned with every inclusion-minimal conditioning set drawn from the
/// observed ancestors of exposure, outcome and instrument.
pub fn instrumental_variables(q: &CausalQuery, opts: &IvOptions) -> Result<Vec<IvResult>> {
    let reduced = without_direct_edge(q)?;
    let below_outcome = q.dag.descendants_of([q.outcome.as_str()]);
    let mut out = Vec::new();
    for z in q.observed() {
        if z == q.exposure || z == q.outcome {
            continue;
        }
        let relevant = reduced.ancestors_of([q.exposure.as_str(), q.outcome.as_str(), z]);
        let pool: Vec<String> = q
            .observed()
            .filter(|n| {
                relevant.contains(*n) && !below_outcome.contains(*n) && *n != z && *n != q.exposure && *n != q.outcome
            })
            .map(String::from)
            .collect();
        let top = opts.max_conditioning_size.map_or(pool.len(), |m| m.min(pool.len()));
        let mut found: Vec<BTreeSet<String>> = Vec::new();
        for k in 0..=top {
            for combo in combinations(&pool, k) {
                let w: BTreeSet<String> = combo.into_iter().collect();
                if found.iter().any(|m| m.is_subset(&w)) {
                    continue;
                }
                if is_conditional_instrument(q, z, &w)? {
                    found.push(w);
                }
            }
        }
        for w in found {
            if out.len() >= opts.limit {
                return Ok(out);
            }
            out.push(IvResult {
                instrument: z.to_string(),
                conditioning_set: w,
            });
        }
    }
    Ok(out)
}

/// Interventional distributions `P(outcome | do(exposure = x))` per exposure state.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalEffect {
    pub effects: BTreeMap<usize, DiscreteFactor>,
    /// `(exposure state, adjustment states)` strata with `P(x, z) = 0` but
    /// `P(z) > 0`; they were skipped and the remaining mass renormalized.
    pub impossible_strata: Vec<(usize, Vec<usize>)>,
}

/// Back-door adjustment `Σ_z P(y | x, z) P(z)` computed by variable elimination.
pub fn causal_effect_discrete(
    bn: &DiscreteBayesianNetwork,
    exposure: &str,
    outcome: &str,
    adjustment: &BTreeSet<String>,
) -> Result<CausalEffect> {
    bn.meta(exposure)?;
    bn.meta(outcome)?;
    if exposure == outcome || adjustment.contains(exposure) || adjustment.contains(outcome) {
        return Err(Error::InvalidQuery(
            "adjustment set must not contain exposure or outcome".into(),
        ));
    }
    let zs: Vec<String> = adjustment.iter().cloned().collect();
    let mut scope = zs.clone();
    scope.push(exposure.to_string());
    scope.push(outcome.to_string());
    let joint = ve_query(bn, &scope, &Evidence::new(), &EliminationHeuristic::MinFill)?.reorder(&scope)?;
    let rx = bn.cardinality(exposure)?;
    let ry = bn.cardinality(outcome)?;

    let mut acc = vec![vec![0.0; ry]; rx];
    let mut impossible = Vec::new();
    let zcards: Vec<usize> = zs.iter().map(|z| bn.cardinality(z)).collect::<Result<_>>()?;
    for (zi, block) in joint.values().chunks(rx * ry).enumerate() {
        let pz: f64 = block.iter().sum();
        if pz <= 0.0 {
            continue;
        }
        for x in 0..rx {
            let row = &block[x * ry..(x + 1) * ry];
            let pxz: f64 = row.iter().sum();
            if pxz <= 0.0 {
                impossible.push((x, unravel(zi, &zcards)));
                continue;
            }
            for (a, p) in acc[x].iter_mut().zip(row) {
                *a += pz * p / pxz;
            }
        }
    }
    let mut effects = BTreeMap::new();
    for (x, values) in acc.into_iter().enumerate() {
        if values.iter().sum::<f64>() > 0.0 {
            let f = DiscreteFactor::new(vec![outcome.to_string()], vec![ry], values)?.normalize()?;
            effects.insert(x, f);
        }
    }
    Ok(CausalEffect {
        effects,
        impossible_strata: impossible,
    })
}

fn unravel(mut index: usize, cards: &[usize]) -> Vec<usize> {
    let mut out = vec![0; cards.len()];
    for i in (0..cards.len()).rev() {
        out[i] = index % cards[i];
        index /= cards[i];
    }
    out
}

/// `P(outcome | do(exposure = state))` on the mutilated network.
pub fn do_query(bn: &DiscreteBayesianNetwork, exposure: &str, state: usize, outcome: &str) -> Result<DiscreteFactor> {
    let m = bn.intervene(exposure, state)?;
    ve_query(&m, &[outcome], &Evidence::new(), &EliminationHeuristic::MinFill)
}
