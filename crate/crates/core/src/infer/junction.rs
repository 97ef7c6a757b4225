use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{ve_query, EliminationHeuristic, Evidence};
use crate::error::{Error, Result};
use crate::factor::{product_all, DiscreteFactor};
use crate::graph::moralize;
use crate::model::DiscreteBayesianNetwork;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JunctionEdge {
    pub a: usize,
    pub b: usize,
    pub separator: Vec<String>,
}

/// Clique tree of a triangulated moral graph. Calibration produces a new
/// tree; the uncalibrated potentials are kept so the same tree can be
/// recalibrated under different evidence.
#[derive(Debug, Clone)]
pub struct JunctionTree {
    model: DiscreteBayesianNetwork,
    cliques: Vec<Vec<String>>,
    edges: Vec<JunctionEdge>,
    potentials: Vec<DiscreteFactor>,
    beliefs: Option<Vec<DiscreteFactor>>,
    evidence: Evidence,
}

/// Moralize, triangulate by min-fill elimination, keep maximal cliques and
/// join them with a maximum-weight spanning tree on separator sizes.
pub fn build_junction_tree(bn: &DiscreteBayesianNetwork) -> Result<JunctionTree> {
    JunctionTree::new(bn)
}

impl JunctionTree {
    pub fn new(bn: &DiscreteBayesianNetwork) -> Result<Self> {
        let moral = moralize(bn.dag());
        let cards: BTreeMap<String, usize> = bn.metas().map(|m| (m.name().to_string(), m.cardinality())).collect();
        let all: BTreeSet<String> = bn.variables().map(str::to_string).collect();
        let order = super::greedy_order(&moral, &cards, &all, &EliminationHeuristic::MinFill)?;

        let mut g = moral.clone();
        let mut candidates: Vec<BTreeSet<String>> = Vec::new();
        for v in &order {
            let mut c: BTreeSet<String> = g.neighbors(v).clone();
            c.insert(v.clone());
            candidates.push(c);
            let ns: Vec<String> = g.neighbors(v).iter().cloned().collect();
            for i in 0..ns.len() {
                for j in i + 1..ns.len() {
                    g.add_edge(&ns[i], &ns[j]);
                }
            }
            g.remove_node(v);
        }
        let mut cliques: Vec<BTreeSet<String>> = Vec::new();
        for (i, c) in candidates.iter().enumerate() {
            let dominated = candidates
                .iter()
                .enumerate()
                .any(|(j, d)| j != i && c.is_subset(d) && (c.len() < d.len() || j < i));
            if !dominated {
                cliques.push(c.clone());
            }
        }

        let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
        for i in 0..cliques.len() {
            for j in i + 1..cliques.len() {
                pairs.push((cliques[i].intersection(&cliques[j]).count(), i, j));
            }
        }
        pairs.sort_by(|x, y| y.0.cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
        let mut root: Vec<usize> = (0..cliques.len()).collect();
        fn find(root: &mut [usize], i: usize) -> usize {
            let mut i = i;
            while root[i] != i {
                root[i] = root[root[i]];
                i = root[i];
            }
            i
        }
        let mut edges = Vec::new();
        for (_, i, j) in pairs {
            let (ri, rj) = (find(&mut root, i), find(&mut root, j));
            if ri != rj {
                root[ri] = rj;
                edges.push(JunctionEdge {
                    a: i,
                    b: j,
                    separator: cliques[i].intersection(&cliques[j]).cloned().collect(),
                });
            }
        }

        let cliques: Vec<Vec<String>> = cliques.into_iter().map(|c| c.into_iter().collect()).collect();
        let mut potentials: Vec<DiscreteFactor> = cliques
            .iter()
            .map(|c| DiscreteFactor::constant(c.clone(), c.iter().map(|v| cards[v]).collect(), 1.0))
            .collect::<Result<_>>()?;
        for cpd in bn.cpds() {
            let family = cpd.factor().scope();
            let home = cliques
                .iter()
                .position(|c| family.iter().all(|v| c.contains(v)))
                .expect("every family is inside a clique of the triangulated moral graph");
            potentials[home] = potentials[home].product(cpd.factor())?.reorder(&cliques[home])?;
        }
        Ok(JunctionTree {
            model: bn.clone(),
            cliques,
            edges,
            potentials,
            beliefs: None,
            evidence: Evidence::new(),
        })
    }

    pub fn cliques(&self) -> &[Vec<String>] {
        &self.cliques
    }

    pub fn edges(&self) -> &[JunctionEdge] {
        &self.edges
    }

    pub fn is_calibrated(&self) -> bool {
        self.beliefs.is_some()
    }

    pub fn evidence(&self) -> &Evidence {
        &self.evidence
    }

    pub fn model(&self) -> &DiscreteBayesianNetwork {
        &self.model
    }

    /// Calibrated clique potentials, or `NotCalibrated`.
    pub fn beliefs(&self) -> Result<&[DiscreteFactor]> {
        self.beliefs.as_deref().ok_or(Error::NotCalibrated)
    }

    /// Every variable's host cliques form a connected subtree.
    pub fn has_running_intersection(&self) -> bool {
        let adj = self.adjacency();
        for v in self.model.variables() {
            let hosts: BTreeSet<usize> = (0..self.cliques.len())
                .filter(|&i| self.cliques[i].iter().any(|x| x == v))
                .collect();
            let Some(&start) = hosts.iter().next() else {
                return false;
            };
            let mut seen = BTreeSet::from([start]);
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                for &(j, _) in &adj[i] {
                    if hosts.contains(&j) && seen.insert(j) {
                        stack.push(j);
                    }
                }
            }
            if seen != hosts {
                return false;
            }
        }
        self.edges.len() + 1 == self.cliques.len().max(1)
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.cliques.len()];
        for (k, e) in self.edges.iter().enumerate() {
            adj[e.a].push((e.b, k));
            adj[e.b].push((e.a, k));
        }
        adj
    }

    fn host_of(&self, var: &str) -> usize {
        self.cliques
            .iter()
            .position(|c| c.iter().any(|x| x == var))
            .expect("every variable is in some clique")
    }

    /// Two-pass sum-product message passing (collect to clique 0, then
    /// distribute). Hard evidence enters as an indicator and virtual evidence
    /// as a likelihood on the first clique holding the variable.
    pub fn calibrate(&self, evidence: &Evidence) -> Result<JunctionTree> {
        evidence.validate(&self.model)?;
        let mut pots = self.potentials.clone();
        for (v, s) in evidence.hard() {
            let card = self.model.cardinality(v)?;
            let mut ind = vec![0.0; card];
            ind[*s] = 1.0;
            let h = self.host_of(v);
            let f = DiscreteFactor::new(vec![v.clone()], vec![card], ind)?;
            pots[h] = pots[h].product(&f)?;
        }
        for f in evidence.likelihood_factors() {
            let h = self.host_of(&f.scope()[0]);
            pots[h] = pots[h].product(&f)?;
        }

        let adj = self.adjacency();
        let n = self.cliques.len();
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        if n > 0 {
            queue.push_back(0);
            seen[0] = true;
        }
        while let Some(i) = queue.pop_front() {
            order.push(i);
            for &(j, _) in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    parent[j] = Some(i);
                    queue.push_back(j);
                }
            }
        }

        let sep = |i: usize, j: usize| -> &Vec<String> {
            let k = adj[i].iter().find(|(x, _)| *x == j).expect("adjacent").1;
            &self.edges[k].separator
        };
        let mut messages: BTreeMap<(usize, usize), DiscreteFactor> = BTreeMap::new();
        let send =
            |from: usize, to: usize, messages: &BTreeMap<(usize, usize), DiscreteFactor>| -> Result<DiscreteFactor> {
                let incoming: Vec<&DiscreteFactor> = adj[from]
                    .iter()
                    .filter(|(k, _)| *k != to)
                    .map(|(k, _)| &messages[&(*k, from)])
                    .collect();
                let mut acc = pots[from].clone();
                for m in incoming {
                    acc = acc.product(m)?;
                }
                acc.marginal(sep(from, to))
            };
        for &i in order.iter().rev() {
            if let Some(p) = parent[i] {
                let m = send(i, p, &messages)?;
                messages.insert((i, p), m);
            }
        }
        for &i in &order {
            for &(j, _) in &adj[i] {
                if parent[j] == Some(i) {
                    let m = send(i, j, &messages)?;
                    messages.insert((i, j), m);
                }
            }
        }
        let mut beliefs = Vec::with_capacity(n);
        for i in 0..n {
            let mut b = pots[i].clone();
            for &(j, _) in &adj[i] {
                b = b.product(&messages[&(j, i)])?;
            }
            beliefs.push(b.reorder(&self.cliques[i])?);
        }
        if beliefs.first().is_some_and(|b| b.total() <= 0.0) {
            return Err(Error::ImpossibleEvidence);
        }
        Ok(JunctionTree {
            model: self.model.clone(),
            cliques: self.cliques.clone(),
            edges: self.edges.clone(),
            potentials: self.potentials.clone(),
            beliefs: Some(beliefs),
            evidence: evidence.clone(),
        })
    }

    /// Probability of the calibrated evidence (the common total of every belief).
    pub fn evidence_probability(&self) -> Result<f64> {
        Ok(self.beliefs()?.first().map_or(1.0, DiscreteFactor::total))
    }

    /// Normalized marginal over `query`, read from the smallest clique that
    /// holds all of it; falls back to variable elimination otherwise.
    pub fn query<S: AsRef<str>>(&self, query: &[S]) -> Result<DiscreteFactor> {
        let beliefs = self.beliefs()?;
        if query.is_empty() {
            return Err(Error::InvalidArgument("empty query".into()));
        }
        for q in query {
            self.model.meta(q.as_ref())?;
        }
        let host = (0..self.cliques.len())
            .filter(|&i| query.iter().all(|q| self.cliques[i].iter().any(|x| x == q.as_ref())))
            .min_by_key(|&i| (self.cliques[i].len(), i));
        match host {
            Some(i) => Ok(beliefs[i].marginal(query)?.normalize()?.canonical()),
            None => ve_query(&self.model, query, &self.evidence, &EliminationHeuristic::MinFill),
        }
    }

    /// Uncalibrated product of all clique potentials (the model's joint).
    pub fn potential_product(&self) -> Result<DiscreteFactor> {
        product_all(&self.potentials)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{TabularCpd, VariableMeta};

    fn bn_from(edges: &[(&str, &str)], nodes: &[&str]) -> DiscreteBayesianNetwork {
        let metas = nodes
            .iter()
            .map(|n| VariableMeta::with_cardinality(*n, 2).unwrap())
            .collect();
        let cpds = nodes
            .iter()
            .enumerate()
            .map(|(k, n)| {
                let ps: Vec<(&str, usize)> = edges.iter().filter(|(_, c)| c == n).map(|(p, _)| (*p, 2)).collect();
                let q = 1usize << ps.len();
                let vals = (0..q)
                    .flat_map(|j| {
                        let p = 0.1 + 0.8 * (((k + 1) * (j + 3)) % 7) as f64 / 7.0;
                        [p, 1.0 - p]
                    })
                    .collect();
                TabularCpd::new(*n, 2, &ps, vals).unwrap()
            })
            .collect();
        DiscreteBayesianNetwork::new(metas, cpds).unwrap()
    }

    fn sets(jt: &JunctionTree) -> Vec<Vec<&str>> {
        jt.cliques()
            .iter()
            .map(|c| c.iter().map(String::as_str).collect())
            .collect()
    }

    #[test]
    fn chain_cliques() {
        let jt = build_junction_tree(&bn_from(&[("A", "B"), ("B", "C")], &["A", "B", "C"])).unwrap();
        assert_eq!(sets(&jt), [vec!["A", "B"], vec!["B", "C"]]);
        assert_eq!(jt.edges()[0].separator, ["B"]);
        assert!(jt.has_running_intersection());
        assert!(!jt.is_calibrated());
        assert_eq!(jt.query(&["A"]), Err(Error::NotCalibrated));
    }

    #[test]
    fn collider_single_clique() {
        let jt = build_junction_tree(&bn_from(&[("A", "C"), ("B", "C")], &["A", "B", "C"])).unwrap();
        assert_eq!(sets(&jt), [vec!["A", "B", "C"]]);
    }

    #[test]
    fn sprinkler_cliques() {
        let bn = bn_from(&[("C", "S"), ("C", "R"), ("S", "W"), ("R", "W")], &["C", "R", "S", "W"]);
        let jt = build_junction_tree(&bn).unwrap();
        assert_eq!(sets(&jt), [vec!["C", "R", "S"], vec!["R", "S", "W"]]);
        assert_eq!(jt.edges()[0].separator, ["R", "S"]);
    }

    #[test]
    fn calibration_matches_ve_and_agrees_on_separators() {
        let bn = bn_from(&[("C", "S"), ("C", "R"), ("S", "W"), ("R", "W")], &["C", "R", "S", "W"]);
        let jt = build_junction_tree(&bn).unwrap();
        let ev = Evidence::new().observe("W", 1).likelihood("C", vec![0.3, 0.9]);
        let cal = jt.calibrate(&ev).unwrap();
        for v in ["C", "R", "S"] {
            let bp = cal.query(&[v]).unwrap();
            let ve = ve_query(&bn, &[v], &ev, &EliminationHeuristic::MinFill).unwrap();
            assert!(bp.max_abs_diff(&ve).unwrap() < 1e-12);
        }
        let b = cal.beliefs().unwrap();
        for e in cal.edges() {
            let x = b[e.a].marginal(&e.separator).unwrap();
            let y = b[e.b].marginal(&e.separator).unwrap();
            assert!(x.max_abs_diff(&y).unwrap() < 1e-12);
        }
        let again = cal.calibrate(&ev).unwrap();
        for (x, y) in again.beliefs().unwrap().iter().zip(b) {
            assert!(x.max_abs_diff(y).unwrap() < 1e-15);
        }
        // cross-clique query goes through elimination
        let cw = cal.query(&["C", "W"]);
        assert!(cw.is_err()); // W is observed
        let cs = cal.query(&["C", "S"]).unwrap();
        let ve = ve_query(&bn, &["C", "S"], &ev, &EliminationHeuristic::MinFill).unwrap();
        assert!(cs.max_abs_diff(&ve).unwrap() < 1e-12);
    }

    #[test]
    fn disconnected_model_uses_empty_separators() {
        let bn = bn_from(&[("A", "B")], &["A", "B", "C"]);
        let jt = build_junction_tree(&bn).unwrap();
        assert!(jt.has_running_intersection());
        let cal = jt.calibrate(&Evidence::new().observe("C", 0)).unwrap();
        let pa = cal.query(&["A"]).unwrap();
        let ve = ve_query(&bn, &["A"], &Evidence::new(), &EliminationHeuristic::MinFill).unwrap();
        assert!(pa.max_abs_diff(&ve).unwrap() < 1e-12);
    }
}
