//! PC-Stable: level-wise skeleton discovery with frozen adjacencies, then
//! orientation from separating sets and Meek closure.

use std::collections::{BTreeMap, BTreeSet};

use super::ci::{CiMethod, CiOracle, DataCiTest};
use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::graph::{apply_meek_rules, Pdag};

/// Output of [`pc_stable_with_oracle`].
#[derive(Debug, Clone)]
pub struct PcResult {
    pub pdag: Pdag,
    /// Separating set recorded for each removed pair `(a, b)` with `a < b`.
    pub sepsets: BTreeMap<(String, String), Vec<String>>,
    pub tests_performed: usize,
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// All `k`-subsets of `items`, in lexicographic order of positions.
pub(crate) fn combinations<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let n = items.len();
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i].clone()).collect());
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn pair(a: &str, b: &str) -> (String, String) {
    if a < b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// PC-Stable over `variables` using any independence oracle.
///
/// `max_cond_size` bounds the conditioning-set size; `None` means unbounded.
pub fn pc_stable_with_oracle<O: CiOracle + ?Sized>(
    oracle: &O,
    variables: &[String],
    alpha: f64,
    max_cond_size: Option<usize>,
) -> Result<PcResult> {
    check_alpha(alpha)?;
    let vars: BTreeSet<String> = variables.iter().cloned().collect();
    if vars.len() != variables.len() {
        return Err(Error::InvalidArgument("duplicate variable names".into()));
    }
    let mut adj: BTreeMap<String, BTreeSet<String>> = vars
        .iter()
        .map(|v| (v.clone(), vars.iter().filter(|u| *u != v).cloned().collect()))
        .collect();
    let mut sepsets = BTreeMap::new();
    let mut tests = 0usize;

    let mut level = 0usize;
    while max_cond_size.is_none_or(|m| level <= m) {
        let frozen = adj.clone();
        let mut testable = false;
        for x in &vars {
            for y in &frozen[x] {
                if !adj[x].contains(y) {
                    continue;
                }
                let candidates: Vec<String> = frozen[x].iter().filter(|c| *c != y).cloned().collect();
                if candidates.len() < level {
                    continue;
                }
                testable = true;
                for s in combinations(&candidates, level) {
                    tests += 1;
                    if oracle.p_value(x, y, &s)? >= alpha {
                        adj.get_mut(x).unwrap().remove(y);
                        adj.get_mut(y).unwrap().remove(x);
                        sepsets.insert(pair(x, y), s);
                        break;
                    }
                }
            }
        }
        if !testable {
            break;
        }
        level += 1;
    }

    let mut pdag = Pdag::new();
    for v in &vars {
        pdag.add_node(v);
    }
    for (x, ns) in &adj {
        for y in ns {
            if x < y {
                pdag.add_undirected(x, y)?;
            }
        }
    }
    // unshielded triples x - z - y with z outside sepset(x, y) become colliders
    for x in &vars {
        for y in vars.range::<String, _>((std::ops::Bound::Excluded(x), std::ops::Bound::Unbounded)) {
            if adj[x].contains(y) {
                continue;
            }
            let Some(sep) = sepsets.get(&pair(x, y)) else { continue };
            for z in adj[x].intersection(&adj[y]) {
                if sep.contains(z) {
                    continue;
                }
                if pdag.has_undirected(x, z) {
                    pdag.orient(x, z);
                }
                if pdag.has_undirected(y, z) {
                    pdag.orient(y, z);
                }
            }
        }
    }
    apply_meek_rules(&mut pdag);
    Ok(PcResult {
        pdag,
        sepsets,
        tests_performed: tests,
    })
}

/// PC-Stable on the observed columns of `data`.
pub fn pc_stable(data: &DataTable, alpha: f64, max_cond_size: Option<usize>, method: &CiMethod) -> Result<Pdag> {
    let vars: Vec<String> = data
        .column_names()
        .into_iter()
        .filter(|c| !data.latent_columns().contains(c))
        .collect();
    let test = DataCiTest {
        data,
        method: method.clone(),
    };
    Ok(pc_stable_with_oracle(&test, &vars, alpha, max_cond_size)?.pdag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Dag;
    use crate::learn::ci::DSeparationOracle;

    fn run(dag: &Dag) -> Pdag {
        let vars: Vec<String> = dag.nodes().map(String::from).collect();
        pc_stable_with_oracle(&DSeparationOracle { dag }, &vars, 0.05, None)
            .unwrap()
            .pdag
    }

    #[test]
    fn combinations_are_lexicographic() {
        let items = ["a", "b", "c", "d"];
        let c = combinations(&items, 2);
        assert_eq!(c.len(), 6);
        assert_eq!(c[0], vec!["a", "b"]);
        assert_eq!(c[5], vec!["c", "d"]);
        assert_eq!(combinations(&items, 0), vec![Vec::<&str>::new()]);
        assert_eq!(combinations(&items, 4).len(), 1);
        assert!(combinations(&items, 5).is_empty());
    }

    #[test]
    fn chain_is_unoriented() {
        let dag = Dag::from_edges(["A", "B", "C"], &[("A", "B"), ("B", "C")]).unwrap();
        let p = run(&dag);
        assert!(p.directed_edges().is_empty());
        assert!(p.has_undirected("A", "B") && p.has_undirected("B", "C"));
        assert!(!p.is_adjacent("A", "C"));
    }

    #[test]
    fn collider_is_oriented() {
        let dag = Dag::from_edges(["A", "B", "C"], &[("A", "C"), ("B", "C")]).unwrap();
        let p = run(&dag);
        assert!(p.has_directed("A", "C") && p.has_directed("B", "C"));
        assert!(p.undirected_edges().is_empty());
    }

    #[test]
    fn empty_graph() {
        let mut dag = Dag::new();
        for n in ["A", "B", "C"] {
            dag.add_node(n).unwrap();
        }
        let p = run(&dag);
        assert!(p.skeleton().is_empty());
    }

    #[test]
    fn bad_alpha() {
        let dag = Dag::from_edges(["A", "B"], &[("A", "B")]).unwrap();
        let vars = vec!["A".to_string(), "B".to_string()];
        for a in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(matches!(
                pc_stable_with_oracle(&DSeparationOracle { dag: &dag }, &vars, a, None),
                Err(Error::InvalidAlpha(_))
            ));
        }
    }

    #[test]
    fn max_cond_size_limits_levels() {
        // A -> B -> C -> D: separating A from D needs a conditioning set
        let dag = Dag::from_edges(["A", "B", "C", "D"], &[("A", "B"), ("B", "C"), ("C", "D")]).unwrap();
        let vars: Vec<String> = dag.nodes().map(String::from).collect();
        let r = pc_stable_with_oracle(&DSeparationOracle { dag: &dag }, &vars, 0.05, Some(0)).unwrap();
        assert!(r.pdag.is_adjacent("A", "D"));
        let r = pc_stable_with_oracle(&DSeparationOracle { dag: &dag }, &vars, 0.05, Some(1)).unwrap();
        assert!(!r.pdag.is_adjacent("A", "D"));
        assert_eq!(r.sepsets[&("A".to_string(), "C".to_string())], vec!["B".to_string()]);
    }
}
