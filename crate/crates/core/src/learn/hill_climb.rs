//! Greedy score-based search over add / remove / reverse moves with a tabu list.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use super::score::{local_score, ScoreMethod};
use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::graph::Dag;

/// A single edge operation, `(from, to)` naming the edge it touches.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    Add(String, String),
    Remove(String, String),
    Reverse(String, String),
}

impl Move {
    fn inverse(&self) -> Move {
        match self {
            Move::Add(a, b) => Move::Remove(a.clone(), b.clone()),
            Move::Remove(a, b) => Move::Add(a.clone(), b.clone()),
            Move::Reverse(a, b) => Move::Reverse(b.clone(), a.clone()),
        }
    }

    /// Applies the move to `dag`.
    pub fn apply(&self, dag: &mut Dag) -> Result<()> {
        match self {
            Move::Add(a, b) => dag.add_edge(a, b),
            Move::Remove(a, b) => {
                dag.remove_edge(a, b);
                Ok(())
            }
            Move::Reverse(a, b) => {
                dag.remove_edge(a, b);
                dag.add_edge(b, a)
            }
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Add(a, b) => write!(f, "+{a}->{b}"),
            Move::Remove(a, b) => write!(f, "-{a}->{b}"),
            Move::Reverse(a, b) => write!(f, "{a}->{b} reversed"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HillClimbOptions {
    /// Starting graph; the empty graph over the data columns when `None`.
    pub start: Option<Dag>,
    pub max_indegree: Option<usize>,
    pub tabu_length: usize,
    /// Edges that must be present in the result; added to the start graph
    /// if missing and never removed or reversed.
    pub whitelist: BTreeSet<(String, String)>,
    /// Edges that may never appear.
    pub blacklist: BTreeSet<(String, String)>,
    pub max_iter: usize,
    /// Minimum improvement for a move to be accepted.
    pub epsilon: f64,
}

impl Default for HillClimbOptions {
    fn default() -> Self {
        Self {
            start: None,
            max_indegree: None,
            tabu_length: 100,
            whitelist: BTreeSet::new(),
            blacklist: BTreeSet::new(),
            max_iter: 1_000_000,
            epsilon: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HillClimbResult {
    pub dag: Dag,
    pub score: f64,
    /// Accepted moves in order.
    pub moves: Vec<Move>,
    /// Score change predicted for each accepted move.
    pub deltas: Vec<f64>,
    /// Total score before any move, then after each accepted move.
    pub trace: Vec<f64>,
}

/// Memoized local scores keyed by child and (sorted) parent set.
pub(crate) struct ScoreCache<'a> {
    data: &'a DataTable,
    method: &'a ScoreMethod,
    cache: HashMap<(String, Vec<String>), f64>,
}

impl<'a> ScoreCache<'a> {
    pub(crate) fn new(data: &'a DataTable, method: &'a ScoreMethod) -> Self {
        Self {
            data,
            method,
            cache: HashMap::new(),
        }
    }

    pub(crate) fn score(&mut self, child: &str, parents: &BTreeSet<String>) -> Result<f64> {
        let key = (child.to_string(), parents.iter().cloned().collect::<Vec<_>>());
        if let Some(&s) = self.cache.get(&key) {
            return Ok(s);
        }
        let s = local_score(child, &key.1, self.data, self.method)?;
        self.cache.insert(key, s);
        Ok(s)
    }
}

const NOISE: f64 = 1e-11;

fn with(set: &BTreeSet<String>, extra: &str) -> BTreeSet<String> {
    let mut s = set.clone();
    s.insert(extra.to_string());
    s
}

fn without(set: &BTreeSet<String>, gone: &str) -> BTreeSet<String> {
    let mut s = set.clone();
    s.remove(gone);
    s
}

fn prepare_start(variables: &[String], opts: &HillClimbOptions) -> Result<Dag> {
    let known: BTreeSet<&str> = variables.iter().map(String::as_str).collect();
    for (a, b) in opts.whitelist.iter().chain(&opts.blacklist) {
        for v in [a, b] {
            if !known.contains(v.as_str()) {
                return Err(Error::UnknownVariable(v.clone()));
            }
        }
    }
    if let Some(e) = opts.whitelist.intersection(&opts.blacklist).next() {
        return Err(Error::InvalidConstraints(format!(
            "edge {} -> {} is both required and forbidden",
            e.0, e.1
        )));
    }
    let mut dag = match &opts.start {
        Some(s) => {
            for n in s.nodes() {
                if !known.contains(n) {
                    return Err(Error::UnknownVariable(n.to_string()));
                }
            }
            s.clone()
        }
        None => Dag::new(),
    };
    for v in variables {
        if !dag.contains(v) {
            dag.add_node(v)?;
        }
    }
    for (a, b) in dag.edges() {
        if opts.blacklist.contains(&(a.clone(), b.clone())) {
            return Err(Error::InvalidConstraints(format!(
                "start graph contains forbidden edge {a} -> {b}"
            )));
        }
    }
    for (a, b) in &opts.whitelist {
        if dag.has_edge(a, b) {
            continue;
        }
        if dag.has_edge(b, a) {
            return Err(Error::InvalidConstraints(format!(
                "start graph has {b} -> {a} but {a} -> {b} is required"
            )));
        }
        dag.add_edge(a, b).map_err(|e| match e {
            Error::CycleDetected => Error::InvalidConstraints(format!("required edge {a} -> {b} creates a cycle")),
            other => other,
        })?;
    }
    if let Some(m) = opts.max_indegree {
        for n in dag.nodes() {
            if dag.parents(n).len() > m {
                return Err(Error::InvalidConstraints(format!(
                    "`{n}` has more than {m} parents in the start graph"
                )));
            }
        }
    }
    Ok(dag)
}

/// Hill climbing returning the final graph only.
pub fn hill_climb(data: &DataTable, method: &ScoreMethod, opts: &HillClimbOptions) -> Result<Dag> {
    Ok(hill_climb_traced(data, method, opts)?.dag)
}

struct Search<'a> {
    opts: &'a HillClimbOptions,
    nodes: Vec<String>,
    cache: ScoreCache<'a>,
}

/// Outcome of scanning every candidate move of one graph.
struct Scan {
    best: Option<(f64, Move)>,
    /// Reversals whose score change is within tolerance of zero.
    neutral: Vec<(f64, Move)>,
}

impl Search<'_> {
    fn total(&mut self, dag: &Dag) -> Result<f64> {
        let mut t = 0.0;
        for n in dag.nodes() {
            t += self.cache.score(n, dag.parents(n))?;
        }
        Ok(t)
    }

    fn indegree_ok(&self, n: usize) -> bool {
        self.opts.max_indegree.is_none_or(|m| n <= m)
    }

    fn scan(&mut self, dag: &mut Dag, tabu: &VecDeque<Move>, noise: f64) -> Result<Scan> {
        let opts = self.opts;
        let mut best: Option<(f64, Move)> = None;
        let mut neutral = Vec::new();
        for x in &self.nodes {
            for y in &self.nodes {
                if x == y {
                    continue;
                }
                let edge = (x.clone(), y.clone());
                let mut candidates: Vec<(Move, f64)> = Vec::new();
                if dag.has_edge(x, y) {
                    if !opts.whitelist.contains(&edge) {
                        let py = dag.parents(y);
                        let d_remove = self.cache.score(y, &without(py, x))? - self.cache.score(y, py)?;
                        candidates.push((Move::Remove(x.clone(), y.clone()), d_remove));

                        let reversed = (y.clone(), x.clone());
                        if !opts.blacklist.contains(&reversed) && self.indegree_ok(dag.parents(x).len() + 1) {
                            dag.remove_edge(x, y);
                            let other_path = dag.has_directed_path(x, y);
                            dag.add_edge(x, y)?;
                            if !other_path {
                                let px = dag.parents(x);
                                let d = d_remove + self.cache.score(x, &with(px, y))? - self.cache.score(x, px)?;
                                candidates.push((Move::Reverse(x.clone(), y.clone()), d));
                            }
                        }
                    }
                } else if !dag.is_adjacent(x, y)
                    && !opts.blacklist.contains(&edge)
                    && self.indegree_ok(dag.parents(y).len() + 1)
                    && !dag.has_directed_path(y, x)
                {
                    let py = dag.parents(y);
                    let d = self.cache.score(y, &with(py, x))? - self.cache.score(y, py)?;
                    candidates.push((Move::Add(x.clone(), y.clone()), d));
                }
                for (m, d) in candidates {
                    if tabu.contains(&m) {
                        continue;
                    }
                    if matches!(m, Move::Reverse(..)) && d.abs() <= opts.epsilon + noise {
                        neutral.push((d, m.clone()));
                    }
                    if best.as_ref().is_none_or(|(bd, _)| d > *bd + noise) {
                        best = Some((d, m));
                    }
                }
            }
        }
        Ok(Scan { best, neutral })
    }

    /// Breadth-first walk over graphs reachable from `dag` by score-neutral
    /// reversals, visiting at most `tabu_length` of them. Returns the path
    /// to the first graph that has an improving move, followed by that move.
    fn escape(&mut self, dag: &Dag, noise: f64) -> Result<Option<Vec<(f64, Move)>>> {
        let no_tabu = VecDeque::new();
        let mut visited: BTreeSet<Vec<(String, String)>> = BTreeSet::new();
        visited.insert(dag.edges());
        let mut queue: VecDeque<(Dag, Vec<(f64, Move)>)> = VecDeque::from([(dag.clone(), Vec::new())]);
        while let Some((mut g, path)) = queue.pop_front() {
            let scan = self.scan(&mut g, &no_tabu, noise)?;
            if !path.is_empty() {
                if let Some((d, m)) = scan.best.filter(|(d, _)| *d > self.opts.epsilon + noise) {
                    let mut path = path;
                    path.push((d, m));
                    return Ok(Some(path));
                }
            }
            for (d, m) in scan.neutral {
                if visited.len() >= self.opts.tabu_length {
                    break;
                }
                let mut next = g.clone();
                m.apply(&mut next)?;
                if visited.insert(next.edges()) {
                    let mut p = path.clone();
                    p.push((d, m));
                    queue.push_back((next, p));
                }
            }
        }
        Ok(None)
    }
}

/// Hill climbing over the observed columns of `data`, recording every move.
///
/// Candidates are scanned for every ordered pair `(x, y)` in lexicographic
/// order (remove and reverse for present edges, add for absent ones); the
/// first candidate with the strictly largest improvement is taken. When
/// nothing improves, graphs reachable by score-neutral reversals are searched
/// breadth-first (up to `tabu_length` of them) for one that has an improving
/// move; the search stops when there is none.
pub fn hill_climb_traced(data: &DataTable, method: &ScoreMethod, opts: &HillClimbOptions) -> Result<HillClimbResult> {
    let variables: Vec<String> = data
        .column_names()
        .into_iter()
        .filter(|c| !data.latent_columns().contains(c))
        .collect();
    let mut dag = prepare_start(&variables, opts)?;
    let mut search = Search {
        opts,
        nodes: dag.nodes().map(String::from).collect(),
        cache: ScoreCache::new(data, method),
    };

    let mut tabu: VecDeque<Move> = VecDeque::new();
    let mut moves = Vec::new();
    let mut deltas = Vec::new();
    let mut trace = vec![search.total(&dag)?];

    for _ in 0..opts.max_iter {
        // floating-point noise floor for comparing score differences
        let noise = NOISE * trace.last().expect("initial score").abs().max(1.0);
        let scan = search.scan(&mut dag, &tabu, noise)?;
        let steps = match scan.best {
            Some((delta, mv)) if delta > opts.epsilon + noise => vec![(delta, mv)],
            _ => match search.escape(&dag, noise)? {
                Some(path) => path,
                None => break,
            },
        };
        for (delta, mv) in steps {
            mv.apply(&mut dag)?;
            if opts.tabu_length > 0 {
                tabu.push_back(mv.inverse());
                while tabu.len() > opts.tabu_length {
                    tabu.pop_front();
                }
            }
            moves.push(mv);
            deltas.push(delta);
            trace.push(search.total(&dag)?);
        }
    }
    let score = *trace.last().expect("initial score");
    Ok(HillClimbResult {
        dag,
        score,
        moves,
        deltas,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::score::structure_score;
    use crate::model::VariableMeta;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn metas(names: &[&str]) -> Vec<VariableMeta> {
        names
            .iter()
            .map(|n| VariableMeta::with_cardinality(*n, 2).unwrap())
            .collect()
    }

    /// B copies A with probability 0.9; C is independent noise.
    fn sample(n: usize, seed: u64) -> DataTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<usize>> = (0..n)
            .map(|_| {
                let a = usize::from(rng.gen_bool(0.5));
                let b = if rng.gen_bool(0.9) { a } else { 1 - a };
                let c = usize::from(rng.gen_bool(0.3));
                vec![a, b, c]
            })
            .collect();
        DataTable::from_codes(metas(&["A", "B", "C"]), &rows).unwrap()
    }

    #[test]
    fn finds_the_dependent_pair_only() {
        let d = sample(10_000, 1);
        let dag = hill_climb(&d, &ScoreMethod::Bic, &HillClimbOptions::default()).unwrap();
        assert_eq!(dag.edge_count(), 1);
        assert!(dag.is_adjacent("A", "B"));
        // the chosen edge beats the empty graph by direct score comparison
        let empty = Dag::from_edges(["A", "B", "C"], &[] as &[(&str, &str)]).unwrap();
        let s_dag = structure_score(&dag, &d, &ScoreMethod::Bic).unwrap();
        let s_empty = structure_score(&empty, &d, &ScoreMethod::Bic).unwrap();
        assert!(s_dag > s_empty);
        // lexicographic scan with strict improvement keeps A -> B
        assert!(dag.has_edge("A", "B"));
    }

    #[test]
    fn deltas_match_full_rescoring() {
        let d = sample(500, 7);
        for method in [
            ScoreMethod::Bic,
            ScoreMethod::Aic,
            ScoreMethod::K2,
            ScoreMethod::BDeu { ess: 5.0 },
            ScoreMethod::BDs { ess: 5.0 },
        ] {
            let r = hill_climb_traced(&d, &method, &HillClimbOptions::default()).unwrap();
            let mut dag = Dag::from_edges(["A", "B", "C"], &[] as &[(&str, &str)]).unwrap();
            let mut prev = structure_score(&dag, &d, &method).unwrap();
            assert!((prev - r.trace[0]).abs() < 1e-9);
            for (m, delta) in r.moves.iter().zip(&r.deltas) {
                m.apply(&mut dag).unwrap();
                let now = structure_score(&dag, &d, &method).unwrap();
                assert!((now - prev - delta).abs() < 1e-9, "{method:?} {m}");
                prev = now;
            }
            assert!(r.trace.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn neutral_reversals_escape_a_complete_graph() {
        let truth = crate::catalog::sprinkler();
        let d = crate::simulate::forward_sample(&truth, 10_000, 0).unwrap();
        let r = hill_climb_traced(&d, &ScoreMethod::Bic, &HillClimbOptions::default()).unwrap();
        assert!(r.moves.iter().any(|m| matches!(m, Move::Reverse(..))));
        assert_eq!(r.dag.skeleton(), truth.dag().skeleton());
        assert_eq!(r.dag.v_structures(), truth.dag().v_structures());
        let no_walk = HillClimbOptions {
            tabu_length: 0,
            ..Default::default()
        };
        let stuck = hill_climb(&d, &ScoreMethod::Bic, &no_walk).unwrap();
        assert_eq!(stuck.edge_count(), 6);
        assert!(r.trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    }

    #[test]
    fn optimal_start_is_unchanged() {
        let d = sample(2_000, 3);
        let first = hill_climb(&d, &ScoreMethod::Bic, &HillClimbOptions::default()).unwrap();
        let opts = HillClimbOptions {
            start: Some(first.clone()),
            ..Default::default()
        };
        let r = hill_climb_traced(&d, &ScoreMethod::Bic, &opts).unwrap();
        assert!(r.moves.is_empty());
        assert_eq!(r.dag, first);
    }

    #[test]
    fn constraints() {
        let d = sample(2_000, 5);
        let e = |a: &str, b: &str| (a.to_string(), b.to_string());
        let opts = HillClimbOptions {
            blacklist: [e("A", "B"), e("B", "A")].into(),
            ..Default::default()
        };
        let dag = hill_climb(&d, &ScoreMethod::Bic, &opts).unwrap();
        assert!(!dag.is_adjacent("A", "B"));

        let opts = HillClimbOptions {
            whitelist: [e("C", "A")].into(),
            ..Default::default()
        };
        let dag = hill_climb(&d, &ScoreMethod::Bic, &opts).unwrap();
        assert!(dag.has_edge("C", "A"));

        let cyclic = HillClimbOptions {
            whitelist: [e("A", "B"), e("B", "C"), e("C", "A")].into(),
            ..Default::default()
        };
        assert!(matches!(
            hill_climb(&d, &ScoreMethod::Bic, &cyclic),
            Err(Error::InvalidConstraints(_))
        ));
        let clash = HillClimbOptions {
            whitelist: [e("A", "B")].into(),
            blacklist: [e("A", "B")].into(),
            ..Default::default()
        };
        assert!(matches!(
            hill_climb(&d, &ScoreMethod::Bic, &clash),
            Err(Error::InvalidConstraints(_))
        ));
    }

    #[test]
    fn indegree_and_iteration_limits() {
        // C depends on both A and B
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rows: Vec<Vec<usize>> = (0..5_000)
            .map(|_| {
                let a = usize::from(rng.gen_bool(0.5));
                let b = usize::from(rng.gen_bool(0.5));
                let c = if rng.gen_bool(0.95) { a ^ b } else { 1 - (a ^ b) };
                vec![a, b, c]
            })
            .collect();
        let d = DataTable::from_codes(metas(&["A", "B", "C"]), &rows).unwrap();
        let opts = HillClimbOptions {
            max_indegree: Some(1),
            ..Default::default()
        };
        let dag = hill_climb(&d, &ScoreMethod::Bic, &opts).unwrap();
        assert!(dag.nodes().all(|n| dag.parents(n).len() <= 1));
        let opts = HillClimbOptions {
            max_iter: 1,
            ..Default::default()
        };
        let r = hill_climb_traced(&d, &ScoreMethod::Bic, &opts).unwrap();
        assert!(r.moves.len() <= 1);
    }
}
