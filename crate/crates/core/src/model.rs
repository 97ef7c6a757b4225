//! Variables, conditional probability tables and fully specified networks.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::factor::DiscreteFactor;
use crate::graph::{topological_order, Dag};

/// Column sums of a CPD must be within this distance of 1.
pub const CPD_TOLERANCE: f64 = 1e-9;

/// Default cap on the number of entries of a materialised joint table.
pub const DEFAULT_JOINT_CAP: usize = 10_000_000;

/// Name and ordered state labels of a discrete variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct VariableMeta {
    name: String,
    states: Vec<String>,
}

impl VariableMeta {
    pub fn new<S: Into<String>>(name: impl Into<String>, states: Vec<S>) -> Result<Self> {
        let name = name.into();
        let states: Vec<String> = states.into_iter().map(Into::into).collect();
        if name.is_empty() {
            return Err(Error::InvalidVariable("empty variable name".into()));
        }
        if states.len() < 2 {
            return Err(Error::InvalidVariable(format!(
                "`{name}` needs at least two states, got {}",
                states.len()
            )));
        }
        let unique: BTreeSet<&String> = states.iter().collect();
        if unique.len() != states.len() {
            return Err(Error::InvalidVariable(format!("`{name}` has duplicate state labels")));
        }
        if states.iter().any(String::is_empty) {
            return Err(Error::InvalidVariable(format!("`{name}` has an empty state label")));
        }
        Ok(VariableMeta { name, states })
    }

    /// States labelled `0`, `1`, … `cardinality - 1`.
    pub fn with_cardinality(name: impl Into<String>, cardinality: usize) -> Result<Self> {
        Self::new(name, (0..cardinality).map(|i| i.to_string()).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::UnknownState {
                variable: self.name.clone(),
                state: label.to_string(),
            })
    }
}

/// `P(child | parents)` stored as a factor over `parents ++ [child]`, so each
/// parent configuration owns a contiguous column of child probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularCpd {
    child: String,
    parents: Vec<String>,
    factor: DiscreteFactor,
}

impl TabularCpd {
    /// `values` are parent-configuration major, child state fastest.
    pub fn new(
        child: impl Into<String>,
        child_card: usize,
        parents: &[(&str, usize)],
        values: Vec<f64>,
    ) -> Result<Self> {
        let child = child.into();
        let mut scope: Vec<String> = parents.iter().map(|(p, _)| p.to_string()).collect();
        let mut cards: Vec<usize> = parents.iter().map(|(_, c)| *c).collect();
        scope.push(child.clone());
        cards.push(child_card);
        let factor = DiscreteFactor::new(scope, cards, values).map_err(|e| Error::InvalidCpd {
            child: child.clone(),
            reason: e.to_string(),
        })?;
        Self::from_factor(factor)
    }

    /// Interprets the last scope variable of `factor` as the child.
    pub fn from_factor(factor: DiscreteFactor) -> Result<Self> {
        let Some(child) = factor.scope().last().cloned() else {
            return Err(Error::InvalidCpd {
                child: String::new(),
                reason: "empty scope".into(),
            });
        };
        let parents = factor.scope()[..factor.scope().len() - 1].to_vec();
        let r = *factor.cards().last().expect("nonempty");
        for (j, col) in factor.values().chunks(r).enumerate() {
            let s: f64 = col.iter().sum();
            if (s - 1.0).abs() > CPD_TOLERANCE {
                return Err(Error::InvalidCpd {
                    child,
                    reason: format!("column {j} sums to {s}"),
                });
            }
        }
        Ok(TabularCpd { child, parents, factor })
    }

    pub fn uniform(child: impl Into<String>, child_card: usize, parents: &[(&str, usize)]) -> Result<Self> {
        let q: usize = parents.iter().map(|(_, c)| c).product();
        Self::new(
            child,
            child_card,
            parents,
            vec![1.0 / child_card as f64; q * child_card],
        )
    }

    /// Root CPD putting all mass on `state`.
    pub fn point_mass(child: impl Into<String>, child_card: usize, state: usize) -> Result<Self> {
        let child = child.into();
        if state >= child_card {
            return Err(Error::StateOutOfRange {
                variable: child,
                state,
                cardinality: child_card,
            });
        }
        let mut v = vec![0.0; child_card];
        v[state] = 1.0;
        Self::new(child, child_card, &[], v)
    }

    pub fn child(&self) -> &str {
        &self.child
    }

    pub fn parents(&self) -> &[String] {
        &self.parents
    }

    pub fn factor(&self) -> &DiscreteFactor {
        &self.factor
    }

    pub fn child_cardinality(&self) -> usize {
        *self.factor.cards().last().expect("nonempty")
    }

    pub fn parent_cardinalities(&self) -> &[usize] {
        &self.factor.cards()[..self.parents.len()]
    }

    pub fn parent_configurations(&self) -> usize {
        self.parent_cardinalities().iter().product()
    }

    /// Child distribution for the parent configuration with flat index `config`.
    pub fn column(&self, config: usize) -> &[f64] {
        let r = self.child_cardinality();
        &self.factor.values()[config * r..(config + 1) * r]
    }

    /// Flat index of a parent assignment given in `parents()` order.
    pub fn config_index(&self, parent_states: &[usize]) -> usize {
        let mut idx = 0;
        for (s, c) in parent_states.iter().zip(self.parent_cardinalities()) {
            idx = idx * c + s;
        }
        idx
    }

    pub fn probability(&self, child_state: usize, parent_states: &[usize]) -> f64 {
        self.column(self.config_index(parent_states))[child_state]
    }
}

/// Free-form annotations carried through model interchange.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelMetadata {
    pub name: Option<String>,
    pub properties: Vec<String>,
    pub variable_properties: BTreeMap<String, Vec<String>>,
}

/// A DAG with one CPD per node.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBayesianNetwork {
    dag: Dag,
    metas: BTreeMap<String, VariableMeta>,
    cpds: BTreeMap<String, TabularCpd>,
    latents: BTreeSet<String>,
    pub metadata: ModelMetadata,
}

impl DiscreteBayesianNetwork {
    /// Builds the network; the graph is implied by the CPD parent lists.
    pub fn new(metas: Vec<VariableMeta>, cpds: Vec<TabularCpd>) -> Result<Self> {
        let mut dag = Dag::new();
        for m in &metas {
            dag.add_node(m.name())?;
        }
        for c in &cpds {
            for p in c.parents() {
                if !dag.contains(p) {
                    return Err(Error::UnknownVariable(p.clone()));
                }
                if !dag.contains(c.child()) {
                    return Err(Error::UnknownVariable(c.child().to_string()));
                }
                dag.add_edge(p, c.child())?;
            }
        }
        Self::from_parts(dag, metas, cpds, BTreeSet::new())
    }

    pub fn from_parts(
        dag: Dag,
        metas: Vec<VariableMeta>,
        cpds: Vec<TabularCpd>,
        latents: BTreeSet<String>,
    ) -> Result<Self> {
        let mut meta_map = BTreeMap::new();
        for m in metas {
            if meta_map.insert(m.name().to_string(), m.clone()).is_some() {
                return Err(Error::InvalidModel(format!("`{}` declared twice", m.name())));
            }
        }
        for n in dag.nodes() {
            if !meta_map.contains_key(n) {
                return Err(Error::InvalidModel(format!("no states declared for `{n}`")));
            }
        }
        if meta_map.len() != dag.node_count() {
            let extra = meta_map.keys().find(|k| !dag.contains(k)).expect("extra meta");
            return Err(Error::InvalidModel(format!("`{extra}` is not a graph node")));
        }
        let mut cpd_map = BTreeMap::new();
        for cpd in cpds {
            let child = cpd.child().to_string();
            dag.require(&child)?;
            let declared: BTreeSet<&String> = cpd.parents().iter().collect();
            let graph: BTreeSet<&String> = dag.parents(&child).iter().collect();
            if declared != graph {
                return Err(Error::InvalidModel(format!(
                    "CPD parents of `{child}` differ from its graph parents"
                )));
            }
            for (v, &c) in cpd.factor().scope().iter().zip(cpd.factor().cards()) {
                let expected = meta_map[v].cardinality();
                if c != expected {
                    return Err(Error::CardinalityMismatch {
                        variable: v.clone(),
                        left: expected,
                        right: c,
                    });
                }
            }
            if cpd_map.insert(child.clone(), cpd).is_some() {
                return Err(Error::InvalidModel(format!("two CPDs for `{child}`")));
            }
        }
        for n in dag.nodes() {
            if !cpd_map.contains_key(n) {
                return Err(Error::InvalidModel(format!("no CPD for `{n}`")));
            }
        }
        for l in &latents {
            dag.require(l)?;
        }
        Ok(DiscreteBayesianNetwork {
            dag,
            metas: meta_map,
            cpds: cpd_map,
            latents,
            metadata: ModelMetadata::default(),
        })
    }

    pub fn with_latents<I, S>(mut self, latents: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        for l in latents {
            let l = l.into();
            self.dag.require(&l)?;
            self.latents.insert(l);
        }
        Ok(self)
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> + '_ {
        self.metas.keys().map(String::as_str)
    }

    pub fn meta(&self, var: &str) -> Result<&VariableMeta> {
        self.metas
            .get(var)
            .ok_or_else(|| Error::UnknownVariable(var.to_string()))
    }

    pub fn metas(&self) -> impl Iterator<Item = &VariableMeta> + '_ {
        self.metas.values()
    }

    pub fn cardinality(&self, var: &str) -> Result<usize> {
        self.meta(var).map(VariableMeta::cardinality)
    }

    pub fn cpd(&self, var: &str) -> Result<&TabularCpd> {
        self.cpds
            .get(var)
            .ok_or_else(|| Error::UnknownVariable(var.to_string()))
    }

    pub fn cpds(&self) -> impl Iterator<Item = &TabularCpd> + '_ {
        self.cpds.values()
    }

    pub fn latents(&self) -> &BTreeSet<String> {
        &self.latents
    }

    pub fn is_latent(&self, var: &str) -> bool {
        self.latents.contains(var)
    }

    /// Non-latent variables in lexicographic order.
    pub fn observed(&self) -> Vec<String> {
        self.variables()
            .filter(|v| !self.is_latent(v))
            .map(str::to_string)
            .collect()
    }

    pub fn state_index(&self, var: &str, label: &str) -> Result<usize> {
        self.meta(var)?.state_index(label)
    }

    /// Returns a copy with `cpd` swapped in for its child; the graph follows
    /// the new parent list.
    pub fn replace_cpd(&self, cpd: TabularCpd) -> Result<Self> {
        let child = cpd.child().to_string();
        self.dag.require(&child)?;
        let mut dag = self.dag.clone();
        for p in self.dag.parents(&child).clone() {
            dag.remove_edge(&p, &child);
        }
        for p in cpd.parents() {
            dag.require(p)?;
            dag.add_edge(p, &child)?;
        }
        let mut cpds: Vec<TabularCpd> = self.cpds.values().filter(|c| c.child() != child).cloned().collect();
        cpds.push(cpd);
        let mut out = Self::from_parts(dag, self.metas.values().cloned().collect(), cpds, self.latents.clone())?;
        out.metadata = self.metadata.clone();
        Ok(out)
    }

    /// The mutilated network for `do(var = state)`: incoming edges are cut
    /// and the CPD becomes a point mass.
    pub fn intervene(&self, var: &str, state: usize) -> Result<Self> {
        let card = self.cardinality(var)?;
        self.replace_cpd(TabularCpd::point_mass(var, card, state)?)
    }

    pub fn topological_order(&self) -> Vec<String> {
        topological_order(&self.dag).expect("network graph is acyclic")
    }

    /// Number of entries of the full joint table.
    pub fn state_space_size(&self) -> u128 {
        self.metas.values().map(|m| m.cardinality() as u128).product()
    }
}

/// Product of all CPDs, materialised as one table over every variable.
pub fn joint_distribution(bn: &DiscreteBayesianNetwork) -> Result<DiscreteFactor> {
    joint_distribution_capped(bn, DEFAULT_JOINT_CAP)
}

pub fn joint_distribution_capped(bn: &DiscreteBayesianNetwork, cap: usize) -> Result<DiscreteFactor> {
    let size = bn.state_space_size();
    if size > cap as u128 {
        return Err(Error::StateSpaceTooLarge { size, cap });
    }
    let mut acc = DiscreteFactor::unit();
    for v in bn.topological_order() {
        acc = acc.product(bn.cpd(&v)?.factor())?;
    }
    Ok(acc)
}
