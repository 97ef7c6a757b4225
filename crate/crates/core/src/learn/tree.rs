//! Tree-structured learners: Chow-Liu trees and tree-augmented naive Bayes.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::graph::Dag;

/// User-supplied edge weight: `(data, x, y, conditioning variable) -> weight`.
pub type CustomEdgeWeight = Arc<dyn Fn(&DataTable, &str, &str, Option<&str>) -> Result<f64> + Send + Sync>;

#[derive(Clone, Default)]
pub enum EdgeWeight {
    /// Empirical mutual information in nats (conditional when a class is given).
    #[default]
    MutualInformation,
    /// Mutual information divided by the mean of the two entropies.
    NormalizedMutualInformation,
    Custom(CustomEdgeWeight),
}

impl fmt::Debug for EdgeWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeWeight::MutualInformation => f.write_str("MutualInformation"),
            EdgeWeight::NormalizedMutualInformation => f.write_str("NormalizedMutualInformation"),
            EdgeWeight::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// (I(X;Y|C), H(X|C), H(Y|C)) from a table laid out as [C, X, Y].
fn information(values: &[f64], rx: usize, ry: usize) -> (f64, f64, f64) {
    let total: f64 = values.iter().sum();
    let (mut mi, mut hx, mut hy) = (0.0, 0.0, 0.0);
    if total <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    for block in values.chunks(rx * ry) {
        let n: f64 = block.iter().sum();
        if n <= 0.0 {
            continue;
        }
        let rows: Vec<f64> = (0..rx).map(|i| block[i * ry..(i + 1) * ry].iter().sum()).collect();
        let cols: Vec<f64> = (0..ry).map(|j| (0..rx).map(|i| block[i * ry + j]).sum()).collect();
        for i in 0..rx {
            for j in 0..ry {
                let o = block[i * ry + j];
                if o > 0.0 {
                    mi += o / total * (o * n / (rows[i] * cols[j])).ln();
                }
            }
        }
        for &r in &rows {
            if r > 0.0 {
                hx -= r / total * (r / n).ln();
            }
        }
        for &c in &cols {
            if c > 0.0 {
                hy -= c / total * (c / n).ln();
            }
        }
    }
    (mi.max(0.0), hx, hy)
}

/// Weight of the pair `(x, y)`, optionally conditioned on `given`.
pub fn edge_weight(data: &DataTable, x: &str, y: &str, given: Option<&str>, weight: &EdgeWeight) -> Result<f64> {
    if let EdgeWeight::Custom(f) = weight {
        for v in [Some(x), Some(y), given].into_iter().flatten() {
            data.column_index(v)?;
        }
        return f(data, x, y, given);
    }
    let mut vars: Vec<&str> = given.into_iter().collect();
    vars.push(x);
    vars.push(y);
    let table = data.contingency(&vars)?;
    let cards = table.cards();
    let (mi, hx, hy) = information(table.values(), cards[cards.len() - 2], cards[cards.len() - 1]);
    Ok(match weight {
        EdgeWeight::MutualInformation => mi,
        EdgeWeight::NormalizedMutualInformation => {
            let denom = 0.5 * (hx + hy);
            if denom > 0.0 {
                mi / denom
            } else {
                0.0
            }
        }
        EdgeWeight::Custom(_) => unreachable!(),
    })
}

/// Kruskal's maximum spanning forest. Ties are broken by the lexicographic
/// order of the `(a, b)` key, so the result is deterministic.
pub fn maximum_spanning_tree(
    nodes: &[String],
    weights: &BTreeMap<(String, String), f64>,
) -> Result<Vec<(String, String)>> {
    let mut edges: Vec<(&(String, String), f64)> = weights.iter().map(|(k, w)| (k, *w)).collect();
    if let Some((k, _)) = edges.iter().find(|(_, w)| w.is_nan()) {
        return Err(Error::DisconnectedWeights(k.0.clone(), k.1.clone()));
    }
    edges.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let index: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut tree = Vec::new();
    for ((a, b), _) in edges {
        let (Some(&ia), Some(&ib)) = (index.get(a.as_str()), index.get(b.as_str())) else {
            return Err(Error::UnknownVariable(if index.contains_key(a.as_str()) {
                b.clone()
            } else {
                a.clone()
            }));
        };
        let (ra, rb) = (find(&mut parent, ia), find(&mut parent, ib));
        if ra != rb {
            parent[ra] = rb;
            tree.push((a.clone(), b.clone()));
        }
    }
    Ok(tree)
}

/// Directs an undirected tree away from `root` (breadth first, neighbours in
/// lexicographic order); other components are rooted at their smallest node.
fn orient_tree(nodes: &[String], tree: &[(String, String)], root: &str) -> Result<Dag> {
    let mut adj: BTreeMap<&str, BTreeSet<&str>> = nodes.iter().map(|n| (n.as_str(), BTreeSet::new())).collect();
    for (a, b) in tree {
        adj.get_mut(a.as_str()).unwrap().insert(b);
        adj.get_mut(b.as_str()).unwrap().insert(a);
    }
    let mut dag = Dag::new();
    for n in nodes {
        dag.add_node(n)?;
    }
    let mut seen = BTreeSet::new();
    let roots = std::iter::once(root).chain(nodes.iter().map(String::as_str));
    for r in roots {
        if !seen.insert(r) {
            continue;
        }
        let mut queue = VecDeque::from([r]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if seen.insert(v) {
                    dag.add_edge(u, v)?;
                    queue.push_back(v);
                }
            }
        }
    }
    Ok(dag)
}

fn pairwise(
    data: &DataTable,
    vars: &[String],
    given: Option<&str>,
    weight: &EdgeWeight,
) -> Result<BTreeMap<(String, String), f64>> {
    let mut w = BTreeMap::new();
    for (i, a) in vars.iter().enumerate() {
        for b in &vars[i + 1..] {
            w.insert((a.clone(), b.clone()), edge_weight(data, a, b, given, weight)?);
        }
    }
    Ok(w)
}

fn sorted_observed(data: &DataTable) -> Vec<String> {
    let mut v: Vec<String> = data
        .column_names()
        .into_iter()
        .filter(|c| !data.latent_columns().contains(c))
        .collect();
    v.sort();
    v
}

/// Chow-Liu tree over the observed columns; `root` defaults to the
/// lexicographically smallest variable.
pub fn chow_liu(data: &DataTable, weight: &EdgeWeight, root: Option<&str>) -> Result<Dag> {
    let vars = sorted_observed(data);
    if vars.len() < 2 {
        return Err(Error::InvalidArgument("a tree needs at least two variables".into()));
    }
    let root = root.unwrap_or(&vars[0]);
    if !vars.iter().any(|v| v == root) {
        return Err(Error::UnknownVariable(root.to_string()));
    }
    let weights = pairwise(data, &vars, None, weight)?;
    let tree = maximum_spanning_tree(&vars, &weights)?;
    orient_tree(&vars, &tree, root)
}

/// Tree-augmented naive Bayes: `class_var` is a parent of every feature and
/// the features form a maximum spanning tree under class-conditional weights.
pub fn tan(data: &DataTable, class_var: &str, weight: &EdgeWeight, root: Option<&str>) -> Result<Dag> {
    let vars = sorted_observed(data);
    if !vars.iter().any(|v| v == class_var) {
        return Err(Error::UnknownVariable(class_var.to_string()));
    }
    let features: Vec<String> = vars.iter().filter(|v| *v != class_var).cloned().collect();
    if features.len() < 2 {
        return Err(Error::InvalidArgument(
            "tan needs at least two feature variables".into(),
        ));
    }
    let root = root.unwrap_or(&features[0]);
    if !features.iter().any(|v| v == root) {
        return Err(Error::UnknownVariable(root.to_string()));
    }
    let weights = pairwise(data, &features, Some(class_var), weight)?;
    let tree = maximum_spanning_tree(&features, &weights)?;
    let mut dag = orient_tree(&features, &tree, root)?;
    dag.add_node(class_var)?;
    for f in &features {
        dag.add_edge(class_var, f)?;
    }
    Ok(dag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VariableMeta;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn key(a: &str, b: &str) -> (String, String) {
        (a.to_string(), b.to_string())
    }

    fn table(names: &[&str], rows: &[Vec<usize>]) -> DataTable {
        let metas = names
            .iter()
            .map(|n| VariableMeta::with_cardinality(*n, 2).unwrap())
            .collect();
        DataTable::from_codes(metas, rows).unwrap()
    }

    #[test]
    fn custom_weights_pick_heaviest_tree() {
        let d = table(&["A", "B", "C"], &[vec![0, 0, 0]]);
        let w = EdgeWeight::Custom(Arc::new(|_, x, y, _| {
            Ok(match (x, y) {
                ("A", "B") => 0.5,
                ("B", "C") => 0.3,
                _ => 0.1,
            })
        }));
        let dag = chow_liu(&d, &w, None).unwrap();
        assert_eq!(dag.edges(), vec![key("A", "B"), key("B", "C")]);
        let dag = chow_liu(&d, &w, Some("C")).unwrap();
        assert_eq!(dag.edges(), vec![key("B", "A"), key("C", "B")]);
    }

    #[test]
    fn identical_columns_break_ties_lexicographically() {
        let rows: Vec<Vec<usize>> = (0..20).map(|i| vec![i % 2; 4]).collect();
        let d = table(&["A", "B", "C", "D"], &rows);
        let dag = chow_liu(&d, &EdgeWeight::MutualInformation, None).unwrap();
        assert_eq!(dag.edges(), vec![key("A", "B"), key("A", "C"), key("A", "D")]);
    }

    #[test]
    fn nan_weight_is_an_error() {
        let d = table(&["A", "B"], &[vec![0, 0]]);
        let w = EdgeWeight::Custom(Arc::new(|_, _, _, _| Ok(f64::NAN)));
        assert!(matches!(chow_liu(&d, &w, None), Err(Error::DisconnectedWeights(..))));
        assert!(matches!(
            chow_liu(&d, &EdgeWeight::MutualInformation, Some("Q")),
            Err(Error::UnknownVariable(_))
        ));
    }

    #[test]
    fn mutual_information_by_hand() {
        // perfectly copied fair coin: I = ln 2, H = ln 2
        let d = table(&["A", "B"], &[vec![0, 0], vec![1, 1], vec![0, 0], vec![1, 1]]);
        let mi = edge_weight(&d, "A", "B", None, &EdgeWeight::MutualInformation).unwrap();
        assert!((mi - 2f64.ln()).abs() < 1e-12);
        let nmi = edge_weight(&d, "A", "B", None, &EdgeWeight::NormalizedMutualInformation).unwrap();
        assert!((nmi - 1.0).abs() < 1e-12);
        let d = table(&["A", "B"], &[vec![0, 0], vec![1, 1], vec![0, 1], vec![1, 0]]);
        let mi = edge_weight(&d, "A", "B", None, &EdgeWeight::MutualInformation).unwrap();
        assert!(mi.abs() < 1e-12);
    }

    fn spanning_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let mut out = Vec::new();
        for choice in crate::learn::pc::combinations(&pairs, n - 1) {
            let mut p: Vec<usize> = (0..n).collect();
            fn find(p: &mut [usize], mut i: usize) -> usize {
                while p[i] != i {
                    i = p[i];
                }
                i
            }
            let mut ok = true;
            for &(a, b) in &choice {
                let (ra, rb) = (find(&mut p, a), find(&mut p, b));
                if ra == rb {
                    ok = false;
                    break;
                }
                p[ra] = rb;
            }
            if ok {
                out.push(choice);
            }
        }
        out
    }

    #[test]
    fn maximum_over_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=6 {
            let trees = spanning_trees(n);
            assert_eq!(trees.len(), n.pow(n as u32 - 2));
            let names: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
            for _ in 0..10 {
                let mut w = BTreeMap::new();
                for i in 0..n {
                    for j in i + 1..n {
                        w.insert((names[i].clone(), names[j].clone()), rng.gen_range(0.0..1.0));
                    }
                }
                let tree = maximum_spanning_tree(&names, &w).unwrap();
                let got: f64 = tree.iter().map(|e| w[e]).sum();
                let best = trees
                    .iter()
                    .map(|t| {
                        t.iter()
                            .map(|&(i, j)| w[&(names[i].clone(), names[j].clone())])
                            .sum::<f64>()
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                assert!(got >= best - 1e-12);
            }
        }
    }

    #[test]
    fn tan_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // F1 and F2 copy each other within class; F3 is noise
        let rows: Vec<Vec<usize>> = (0..2_000)
            .map(|_| {
                let c = usize::from(rng.gen_bool(0.5));
                let f1 = if rng.gen_bool(0.7) { c } else { 1 - c };
                let f2 = if rng.gen_bool(0.9) { f1 } else { 1 - f1 };
                let f3 = if rng.gen_bool(0.9) { f2 } else { 1 - f2 };
                vec![c, f1, f2, f3]
            })
            .collect();
        let d = table(&["C", "F1", "F2", "F3"], &rows);
        let dag = tan(&d, "C", &EdgeWeight::MutualInformation, None).unwrap();
        for f in ["F1", "F2", "F3"] {
            assert!(dag.has_edge("C", f));
            assert!(dag.parents(f).len() <= 2);
        }
        assert!(dag.has_edge("F1", "F2") && dag.has_edge("F2", "F3"));
        assert_eq!(dag.edge_count(), 5);
        assert!(matches!(
            tan(&d, "Q", &EdgeWeight::MutualInformation, None),
            Err(Error::UnknownVariable(_))
        ));
    }
}
