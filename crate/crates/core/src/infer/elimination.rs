use std::collections::{BTreeMap, BTreeSet};

use super::Evidence;
use crate::error::{Error, Result};
use crate::factor::{product_all, DiscreteFactor};
use crate::graph::{moralize, UndirectedGraph};
use crate::model::DiscreteBayesianNetwork;

/// Greedy rule for choosing the next variable to sum out.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum EliminationHeuristic {
    /// Fewest fill-in edges.
    #[default]
    MinFill,
    /// Fewest neighbours.
    MinNeighbours,
    /// Smallest product of neighbour cardinalities.
    MinWeight,
    /// Smallest total weight of fill-in edges, an edge weighing the product
    /// of its endpoint cardinalities.
    WeightedMinFill,
    /// An explicit order; must be a permutation of the variables eliminated.
    Fixed(Vec<String>),
}

impl EliminationHeuristic {
    pub fn all_greedy() -> [EliminationHeuristic; 4] {
        [
            EliminationHeuristic::MinFill,
            EliminationHeuristic::MinNeighbours,
            EliminationHeuristic::MinWeight,
            EliminationHeuristic::WeightedMinFill,
        ]
    }

    fn cost(&self, g: &UndirectedGraph, cards: &BTreeMap<String, usize>, v: &str) -> f64 {
        let ns: Vec<&String> = g.neighbors(v).iter().collect();
        let fill = |weighted: bool| {
            let mut total = 0.0;
            for i in 0..ns.len() {
                for j in i + 1..ns.len() {
                    if !g.has_edge(ns[i], ns[j]) {
                        total += if weighted {
                            (cards[ns[i]] * cards[ns[j]]) as f64
                        } else {
                            1.0
                        };
                    }
                }
            }
            total
        };
        match self {
            EliminationHeuristic::MinFill => fill(false),
            EliminationHeuristic::WeightedMinFill => fill(true),
            EliminationHeuristic::MinNeighbours => ns.len() as f64,
            EliminationHeuristic::MinWeight => ns.iter().map(|n| cards[*n] as f64).product(),
            EliminationHeuristic::Fixed(_) => 0.0,
        }
    }
}

/// Connects all neighbours of `v` and removes it.
fn eliminate_node(g: &mut UndirectedGraph, v: &str) {
    let ns: Vec<String> = g.neighbors(v).iter().cloned().collect();
    for i in 0..ns.len() {
        for j in i + 1..ns.len() {
            g.add_edge(&ns[i], &ns[j]);
        }
    }
    g.remove_node(v);
}

/// Greedy elimination order of `candidates` on the interaction graph `g`.
/// Ties go to the lexicographically smallest name.
pub fn greedy_order(
    g: &UndirectedGraph,
    cards: &BTreeMap<String, usize>,
    candidates: &BTreeSet<String>,
    heuristic: &EliminationHeuristic,
) -> Result<Vec<String>> {
    for c in candidates {
        if !g.contains(c) {
            return Err(Error::UnknownVariable(c.clone()));
        }
    }
    if let EliminationHeuristic::Fixed(order) = heuristic {
        let as_set: BTreeSet<String> = order.iter().cloned().collect();
        if as_set.len() != order.len() || &as_set != candidates {
            return Err(Error::InvalidFixedOrder(format!(
                "{order:?} is not a permutation of {candidates:?}"
            )));
        }
        return Ok(order.clone());
    }
    let mut g = g.clone();
    let mut left = candidates.clone();
    let mut order = Vec::with_capacity(left.len());
    while !left.is_empty() {
        let mut best: Option<(&String, f64)> = None;
        for v in &left {
            let c = heuristic.cost(&g, cards, v);
            if best.is_none_or(|(_, b)| c < b) {
                best = Some((v, c));
            }
        }
        let v = best.expect("nonempty").0.clone();
        eliminate_node(&mut g, &v);
        left.remove(&v);
        order.push(v);
    }
    Ok(order)
}

/// Largest neighbourhood met while eliminating `order` from `g`.
pub fn induced_width(g: &UndirectedGraph, order: &[String]) -> usize {
    let mut g = g.clone();
    let mut width = 0;
    for v in order {
        width = width.max(g.neighbors(v).len());
        eliminate_node(&mut g, v);
    }
    width
}

fn cardinalities(bn: &DiscreteBayesianNetwork) -> BTreeMap<String, usize> {
    bn.metas().map(|m| (m.name().to_string(), m.cardinality())).collect()
}

/// Elimination order for `to_eliminate` on the moral graph of `bn`.
pub fn elimination_order(
    bn: &DiscreteBayesianNetwork,
    to_eliminate: &BTreeSet<String>,
    heuristic: &EliminationHeuristic,
) -> Result<Vec<String>> {
    greedy_order(&moralize(bn.dag()), &cardinalities(bn), to_eliminate, heuristic)
}

/// `P(query | evidence)`, normalized, with the scope in lexicographic order.
pub fn ve_query<S: AsRef<str>>(
    bn: &DiscreteBayesianNetwork,
    query: &[S],
    evidence: &Evidence,
    heuristic: &EliminationHeuristic,
) -> Result<DiscreteFactor> {
    evidence.validate(bn)?;
    if query.is_empty() {
        return Err(Error::InvalidArgument("empty query".into()));
    }
    let hard_vars = evidence.hard_variables();
    let mut query_set = BTreeSet::new();
    for q in query {
        let q = q.as_ref();
        bn.meta(q)?;
        if hard_vars.contains(q) {
            return Err(Error::InvalidArgument(format!("`{q}` is both queried and observed")));
        }
        if !query_set.insert(q.to_string()) {
            return Err(Error::InvalidArgument(format!("`{q}` queried twice")));
        }
    }

    let mut factors: Vec<DiscreteFactor> = Vec::with_capacity(bn.dag().node_count());
    for cpd in bn.cpds() {
        let f = cpd.factor();
        let local: Vec<(&str, usize)> = evidence
            .hard()
            .iter()
            .filter(|(v, _)| f.position(v).is_some())
            .map(|(v, s)| (v.as_str(), *s))
            .collect();
        factors.push(if local.is_empty() { f.clone() } else { f.reduce(&local)? });
    }
    factors.extend(evidence.likelihood_factors());

    let mut graph = UndirectedGraph::new();
    for v in bn.variables().filter(|v| !hard_vars.contains(v)) {
        graph.add_node(v);
    }
    for f in &factors {
        for (i, a) in f.scope().iter().enumerate() {
            for b in &f.scope()[i + 1..] {
                graph.add_edge(a, b);
            }
        }
    }
    let to_eliminate: BTreeSet<String> = bn
        .variables()
        .filter(|v| !hard_vars.contains(v) && !query_set.contains(*v))
        .map(str::to_string)
        .collect();
    let order = greedy_order(&graph, &cardinalities(bn), &to_eliminate, heuristic)?;

    for v in &order {
        let (touching, rest): (Vec<_>, Vec<_>) = factors.into_iter().partition(|f| f.position(v).is_some());
        factors = rest;
        let joint = product_all(&touching)?;
        factors.push(joint.marginalize(&[v])?);
    }
    let result = product_all(&factors)?;
    let result = result.normalize().map_err(|_| Error::ImpossibleEvidence)?;
    Ok(result.canonical())
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

    fn graph(edges: &[(&str, &str)]) -> UndirectedGraph {
        let mut g = UndirectedGraph::new();
        for (a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    fn binary_cards(g: &UndirectedGraph) -> BTreeMap<String, usize> {
        g.nodes().map(|n| (n.to_string(), 2)).collect()
    }

    fn all(g: &UndirectedGraph) -> BTreeSet<String> {
        g.nodes().map(str::to_string).collect()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn chain_min_fill_is_lexicographic() {
        let g = graph(&[("A", "B"), ("B", "C")]);
        let o = greedy_order(&g, &binary_cards(&g), &all(&g), &EliminationHeuristic::MinFill).unwrap();
        assert_eq!(o, ["A", "B", "C"]);
    }

    #[test]
    fn star_min_neighbours_takes_leaves_first() {
        let g = graph(&[("X", "L1"), ("X", "L2"), ("X", "L3")]);
        let o = greedy_order(&g, &binary_cards(&g), &all(&g), &EliminationHeuristic::MinNeighbours).unwrap();
        assert_eq!(&o[..2], ["L1", "L2"]);
        assert_ne!(o[0], "X");
    }

    #[test]
    fn four_cycle_min_fill_first_pick() {
        let g = graph(&[("A", "B"), ("B", "C"), ("C", "D"), ("D", "A")]);
        let o = greedy_order(&g, &binary_cards(&g), &all(&g), &EliminationHeuristic::MinFill).unwrap();
        assert_eq!(o[0], "A");
    }

    #[test]
    fn weighted_heuristics_use_cardinalities() {
        // X has two neighbours of cardinality 2, Y one of cardinality 5.
        let g = graph(&[("X", "A"), ("X", "B"), ("Y", "C")]);
        let mut cards = binary_cards(&g);
        cards.insert("C".into(), 5);
        let cands: BTreeSet<String> = ["X", "Y"].iter().map(|s| s.to_string()).collect();
        let o = greedy_order(&g, &cards, &cands, &EliminationHeuristic::MinWeight).unwrap();
        assert_eq!(o[0], "X");
        let o = greedy_order(&g, &cards, &cands, &EliminationHeuristic::MinNeighbours).unwrap();
        assert_eq!(o[0], "Y");
        let o = greedy_order(&g, &cards, &cands, &EliminationHeuristic::WeightedMinFill).unwrap();
        assert_eq!(o[0], "Y");
    }

    #[test]
    fn fixed_order_validation() {
        let g = graph(&[("A", "B")]);
        let bad = EliminationHeuristic::Fixed(vec!["A".into()]);
        assert!(matches!(
            greedy_order(&g, &binary_cards(&g), &all(&g), &bad),
            Err(Error::InvalidFixedOrder(_))
        ));
        let ok = EliminationHeuristic::Fixed(vec!["B".into(), "A".into()]);
        assert_eq!(greedy_order(&g, &binary_cards(&g), &all(&g), &ok).unwrap(), ["B", "A"]);
    }

    #[test]
    fn ve_chain_examples() {
        let bn = chain();
        let h = EliminationHeuristic::MinFill;
        let pb = ve_query(&bn, &["B"], &Evidence::new(), &h).unwrap();
        assert!(close(pb.values(), &[0.5, 0.5], 1e-12));
        let pa = ve_query(&bn, &["A"], &Evidence::new().observe("B", 0), &h).unwrap();
        assert!(close(pa.values(), &[0.84, 0.16], 1e-12));
        let root = ve_query(&bn, &["A"], &Evidence::new(), &h).unwrap();
        assert!(close(root.values(), &[0.6, 0.4], 1e-12));
        let flat = ve_query(&bn, &["A"], &Evidence::new().likelihood("B", vec![1.0, 1.0]), &h).unwrap();
        assert!(close(flat.values(), &[0.6, 0.4], 1e-12));
    }

    #[test]
    fn ve_orders_scope_lexicographically() {
        let bn = chain();
        let f = ve_query(&bn, &["B", "A"], &Evidence::new(), &EliminationHeuristic::MinFill).unwrap();
        assert_eq!(f.scope(), ["A", "B"]);
        assert!(close(f.values(), &[0.42, 0.18, 0.08, 0.32], 1e-12));
    }

    #[test]
    fn ve_errors() {
        let bn = chain();
        let h = EliminationHeuristic::MinFill;
        assert!(ve_query(&bn, &["A"], &Evidence::new().observe("A", 0), &h).is_err());
        assert!(matches!(
            ve_query(&bn, &["Q"], &Evidence::new(), &h),
            Err(Error::UnknownVariable(_))
        ));
        let det = DiscreteBayesianNetwork::new(
            vec![
                VariableMeta::with_cardinality("A", 2).unwrap(),
                VariableMeta::with_cardinality("B", 2).unwrap(),
            ],
            vec![
                TabularCpd::new("A", 2, &[], vec![1.0, 0.0]).unwrap(),
                TabularCpd::new("B", 2, &[("A", 2)], vec![1.0, 0.0, 0.5, 0.5]).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(
            ve_query(&det, &["A"], &Evidence::new().observe("B", 1), &h),
            Err(Error::ImpossibleEvidence)
        );
    }

    #[test]
    fn tree_width_is_one() {
        let g = graph(&[("A", "B"), ("B", "C"), ("B", "D"), ("D", "E")]);
        let o = greedy_order(&g, &binary_cards(&g), &all(&g), &EliminationHeuristic::MinFill).unwrap();
        assert_eq!(induced_width(&g, &o), 1);
    }
}
