//! Shared helpers for the integration tests: random models and brute-force oracles.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use bnkit::infer::Evidence;
use bnkit::{Dag, DiscreteBayesianNetwork, TabularCpd, VariableMeta};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn node_name(i: usize) -> String {
    format!("N{i}")
}

/// Random DAG over `n` nodes: each forward pair of a shuffled order is an
/// edge with probability `p`.
pub fn random_dag<R: Rng>(rng: &mut R, n: usize, p: f64) -> Dag {
    let mut order: Vec<String> = (0..n).map(node_name).collect();
    order.shuffle(rng);
    let mut dag = Dag::new();
    for v in &order {
        dag.add_node(v).unwrap();
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                dag.add_edge(&order[i], &order[j]).unwrap();
            }
        }
    }
    dag
}

fn random_column<R: Rng>(rng: &mut R, r: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..r).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// Strictly positive random CPDs on `dag` with cardinalities in `2..=max_card`.
pub fn random_model<R: Rng>(rng: &mut R, dag: &Dag, max_card: usize) -> DiscreteBayesianNetwork {
    let cards: BTreeMap<String, usize> = dag
        .nodes()
        .map(|v| (v.to_string(), rng.gen_range(2..=max_card)))
        .collect();
    let metas: Vec<VariableMeta> = cards
        .iter()
        .map(|(v, &c)| VariableMeta::with_cardinality(v.as_str(), c).unwrap())
        .collect();
    let mut cpds = Vec::new();
    for v in dag.nodes() {
        let parents: Vec<(&str, usize)> = dag.parents(v).iter().map(|p| (p.as_str(), cards[p])).collect();
        let q: usize = parents.iter().map(|(_, c)| c).product();
        let r = cards[v];
        let values: Vec<f64> = (0..q).flat_map(|_| random_column(rng, r)).collect();
        cpds.push(TabularCpd::new(v, r, &parents, values).unwrap());
    }
    DiscreteBayesianNetwork::new(metas, cpds).unwrap()
}

pub fn random_network<R: Rng>(rng: &mut R, max_nodes: usize, max_card: usize) -> DiscreteBayesianNetwork {
    let n = rng.gen_range(2..=max_nodes);
    let dag = random_dag(rng, n, 0.4);
    random_model(rng, &dag, max_card)
}

/// Every full assignment of the model's variables (lexicographic order) with
/// its probability, computed by multiplying CPD entries.
pub fn joint_table(bn: &DiscreteBayesianNetwork) -> (Vec<String>, Vec<(Vec<usize>, f64)>) {
    let vars: Vec<String> = bn.variables().map(String::from).collect();
    let cards: Vec<usize> = vars.iter().map(|v| bn.cardinality(v).unwrap()).collect();
    let index: BTreeMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let mut out = Vec::new();
    let mut assign = vec![0usize; vars.len()];
    loop {
        let mut p = 1.0;
        for v in &vars {
            let cpd = bn.cpd(v).unwrap();
            let ps: Vec<usize> = cpd.parents().iter().map(|q| assign[index[q.as_str()]]).collect();
            p *= cpd.probability(assign[index[v.as_str()]], &ps);
        }
        out.push((assign.clone(), p));
        let mut k = vars.len();
        loop {
            if k == 0 {
                return (vars, out);
            }
            k -= 1;
            assign[k] += 1;
            if assign[k] < cards[k] {
                break;
            }
            assign[k] = 0;
        }
    }
}

/// P(query | evidence) by enumeration; `query` is given in lexicographic
/// order and the result is laid out row-major over it. `None` when the
/// evidence has probability zero.
pub fn brute_posterior(bn: &DiscreteBayesianNetwork, query: &[String], ev: &Evidence) -> Option<Vec<f64>> {
    let (vars, joint) = joint_table(bn);
    let pos = |v: &str| vars.iter().position(|x| x == v).unwrap();
    let qpos: Vec<usize> = query.iter().map(|q| pos(q)).collect();
    let qcards: Vec<usize> = query.iter().map(|q| bn.cardinality(q).unwrap()).collect();
    let mut out = vec![0.0; qcards.iter().product()];
    for (assign, p) in joint {
        if ev.hard().iter().any(|(v, s)| assign[pos(v)] != *s) {
            continue;
        }
        let mut w = p;
        for (v, l) in ev.virtual_evidence() {
            w *= l[assign[pos(v)]];
        }
        let mut idx = 0;
        for (k, &qp) in qpos.iter().enumerate() {
            idx = idx * qcards[k] + assign[qp];
        }
        out[idx] += w;
    }
    let z: f64 = out.iter().sum();
    if z <= 0.0 {
        return None;
    }
    Some(out.into_iter().map(|v| v / z).collect())
}

/// Random hard evidence on some variables and likelihoods on others,
/// leaving at least one variable free; returns the evidence and the free
/// variables.
pub fn random_evidence<R: Rng>(rng: &mut R, bn: &DiscreteBayesianNetwork) -> (Evidence, Vec<String>) {
    let mut vars: Vec<String> = bn.variables().map(String::from).collect();
    vars.shuffle(rng);
    let keep = rng.gen_range(1..=vars.len());
    let mut ev = Evidence::new();
    let mut free = Vec::new();
    for (i, v) in vars.iter().enumerate() {
        let card = bn.cardinality(v).unwrap();
        if i < keep {
            free.push(v.clone());
            if rng.gen_bool(0.3) {
                let l: Vec<f64> = (0..card).map(|_| rng.gen_range(0.0..1.0)).collect();
                ev = ev.likelihood(v.clone(), l);
            }
        } else if rng.gen_bool(0.5) {
            ev = ev.observe(v.clone(), rng.gen_range(0..card));
        } else {
            let l: Vec<f64> = (0..card).map(|_| rng.gen_range(0.05..1.0)).collect();
            ev = ev.likelihood(v.clone(), l);
        }
    }
    free.sort();
    (ev, free)
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Weighted empirical distribution of one column.
pub fn empirical(data: &bnkit::DataTable, var: &str) -> Vec<f64> {
    let card = data.meta(var).unwrap().cardinality();
    let col = data.column(var).unwrap();
    let mut out = vec![0.0; card];
    for (row, cell) in col.iter().enumerate() {
        if let Some(s) = cell {
            out[*s] += data.weight(row);
        }
    }
    let z: f64 = out.iter().sum();
    out.into_iter().map(|v| v / z).collect()
}

/// All simple paths between `a` and `b` in the skeleton of `dag`.
pub fn simple_paths(dag: &Dag, a: &str, b: &str) -> Vec<Vec<String>> {
    fn walk(dag: &Dag, path: &mut Vec<String>, b: &str, out: &mut Vec<Vec<String>>) {
        let last = path.last().unwrap().clone();
        if last == b {
            out.push(path.clone());
            return;
        }
        let next: BTreeSet<String> = dag.parents(&last).union(dag.children(&last)).cloned().collect();
        for n in next {
            if !path.contains(&n) {
                path.push(n);
                walk(dag, path, b, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(dag, &mut vec![a.to_string()], b, &mut out);
    out
}

/// Whether `path` is blocked by `z`: some non-collider on it is in `z`, or
/// some collider has neither itself nor a descendant in `z`.
pub fn path_blocked(dag: &Dag, path: &[String], z: &BTreeSet<String>) -> bool {
    for i in 1..path.len().saturating_sub(1) {
        let (prev, mid, next) = (&path[i - 1], &path[i], &path[i + 1]);
        let collider = dag.has_edge(prev, mid) && dag.has_edge(next, mid);
        if collider {
            let mut below = dag.descendants_of([mid.as_str()]);
            below.insert(mid.clone());
            if below.is_disjoint(z) {
                return true;
            }
        } else if z.contains(mid) {
            return true;
        }
    }
    false
}

/// d-separation of two single nodes by enumerating every path.
pub fn path_separated(dag: &Dag, a: &str, b: &str, z: &BTreeSet<String>) -> bool {
    simple_paths(dag, a, b).iter().all(|p| path_blocked(dag, p, z))
}
