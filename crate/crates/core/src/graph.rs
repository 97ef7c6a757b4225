//! Directed, partially directed and undirected graphs over named variables.
//!
//! All collections are ordered so that iteration, and therefore every
//! algorithm built on top of these types, is lexicographic in variable names.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};

/// A directed acyclic graph. Construction rejects self-loops, duplicate
/// edges, dangling endpoints and cycles.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dag {
    parents: BTreeMap<String, BTreeSet<String>>,
    children: BTreeMap<String, BTreeSet<String>>,
}

impl Dag {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a DAG from a node list and an edge list. Edge endpoints are
    /// added as nodes if they are not already listed.
    pub fn from_edges<N, S>(nodes: N, edges: &[(S, S)]) -> Result<Self>
    where
        N: IntoIterator,
        N::Item: AsRef<str>,
        S: AsRef<str>,
    {
        let mut dag = Dag::new();
        for n in nodes {
            dag.add_node(n.as_ref())?;
        }
        for (p, c) in edges {
            dag.add_node(p.as_ref()).ok();
            dag.add_node(c.as_ref()).ok();
            dag.add_edge(p.as_ref(), c.as_ref())?;
        }
        Ok(dag)
    }

    /// Adds an isolated node. Adding an existing node is a no-op.
    pub fn add_node(&mut self, name: &str) -> Result<()> {
        if name.is_empty() {
            return Err(Error::InvalidVariable("empty variable name".into()));
        }
        self.parents.entry(name.to_string()).or_default();
        self.children.entry(name.to_string()).or_default();
        Ok(())
    }

    pub fn add_edge(&mut self, parent: &str, child: &str) -> Result<()> {
        self.require(parent)?;
        self.require(child)?;
        if parent == child {
            return Err(Error::InvalidGraph(format!("self-loop on `{parent}`")));
        }
        if self.has_edge(parent, child) {
            return Err(Error::InvalidGraph(format!("duplicate edge `{parent}` -> `{child}`")));
        }
        if self.has_directed_path(child, parent) {
            return Err(Error::CycleDetected);
        }
        self.parents.get_mut(child).expect("checked").insert(parent.to_string());
        self.children
            .get_mut(parent)
            .expect("checked")
            .insert(child.to_string());
        Ok(())
    }

    /// Removes an edge, returning whether it was present.
    pub fn remove_edge(&mut self, parent: &str, child: &str) -> bool {
        let removed = self.parents.get_mut(child).map(|s| s.remove(parent)).unwrap_or(false);
        if removed {
            if let Some(s) = self.children.get_mut(parent) {
                s.remove(child);
            }
        }
        removed
    }

    pub fn contains(&self, name: &str) -> bool {
        self.parents.contains_key(name)
    }

    pub(crate) fn require(&self, name: &str) -> Result<()> {
        if self.contains(name) {
            Ok(())
        } else {
            Err(Error::UnknownVariable(name.to_string()))
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> + '_ {
        self.parents.keys().map(String::as_str)
    }

    pub fn node_count(&self) -> usize {
        self.parents.len()
    }

    pub fn edge_count(&self) -> usize {
        self.parents.values().map(BTreeSet::len).sum()
    }

    /// Edges as `(parent, child)` pairs, sorted by parent then child.
    pub fn edges(&self) -> Vec<(String, String)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (p, cs) in &self.children {
            for c in cs {
                out.push((p.clone(), c.clone()));
            }
        }
        out
    }

    pub fn has_edge(&self, parent: &str, child: &str) -> bool {
        self.parents.get(child).map(|s| s.contains(parent)).unwrap_or(false)
    }

    pub fn is_adjacent(&self, a: &str, b: &str) -> bool {
        self.has_edge(a, b) || self.has_edge(b, a)
    }

    /// Parents of `node`; empty for unknown nodes.
    pub fn parents(&self, node: &str) -> &BTreeSet<String> {
        static EMPTY: BTreeSet<String> = BTreeSet::new();
        self.parents.get(node).unwrap_or(&EMPTY)
    }

    pub fn children(&self, node: &str) -> &BTreeSet<String> {
        static EMPTY: BTreeSet<String> = BTreeSet::new();
        self.children.get(node).unwrap_or(&EMPTY)
    }

    /// True when a directed path `from -> ... -> to` of length ≥ 0 exists.
    pub fn has_directed_path(&self, from: &str, to: &str) -> bool {
        if from == to {
            return true;
        }
        let mut stack = vec![from];
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            for c in self.children(n) {
                if c == to {
                    return true;
                }
                if seen.insert(c.as_str()) {
                    stack.push(c);
                }
            }
        }
        false
    }

    /// `nodes` together with all their ancestors.
    pub fn ancestors_of<'a, I>(&self, nodes: I) -> BTreeSet<String>
    where
        I: IntoIterator<Item = &'a str>,
    {
        self.closure(nodes, true)
    }

    /// `nodes` together with all their descendants.
    pub fn descendants_of<'a, I>(&self, nodes: I) -> BTreeSet<String>
    where
        I: IntoIterator<Item = &'a str>,
    {
        self.closure(nodes, false)
    }

    fn closure<'a, I>(&self, nodes: I, upward: bool) -> BTreeSet<String>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut out = BTreeSet::new();
        let mut stack: Vec<String> = Vec::new();
        for n in nodes {
            if out.insert(n.to_string()) {
                stack.push(n.to_string());
            }
        }
        while let Some(n) = stack.pop() {
            let next = if upward { self.parents(&n) } else { self.children(&n) };
            for m in next {
                if out.insert(m.clone()) {
                    stack.push(m.clone());
                }
            }
        }
        out
    }

    /// Unordered adjacent pairs `(a, b)` with `a < b`.
    pub fn skeleton(&self) -> BTreeSet<(String, String)> {
        self.edges()
            .into_iter()
            .map(|(p, c)| if p < c { (p, c) } else { (c, p) })
            .collect()
    }

    /// Unshielded colliders `(a, c, b)` meaning `a -> c <- b`, `a < b`, `a` and `b` non-adjacent.
    pub fn v_structures(&self) -> BTreeSet<(String, String, String)> {
        let mut out = BTreeSet::new();
        for c in self.nodes() {
            let ps: Vec<&String> = self.parents(c).iter().collect();
            for i in 0..ps.len() {
                for j in i + 1..ps.len() {
                    if !self.is_adjacent(ps[i], ps[j]) {
                        out.insert((ps[i].clone(), c.to_string(), ps[j].clone()));
                    }
                }
            }
        }
        out
    }

    /// The completed partially directed graph representing this DAG's
    /// Markov equivalence class.
    pub fn cpdag(&self) -> Pdag {
        let mut p = Pdag::new();
        for n in self.nodes() {
            p.add_node(n);
        }
        for (a, b) in self.skeleton() {
            p.add_undirected(&a, &b).expect("fresh skeleton");
        }
        for (a, c, b) in self.v_structures() {
            p.orient(&a, &c);
            p.orient(&b, &c);
        }
        apply_meek_rules(&mut p);
        p
    }
}

/// Nodes ordered so that every parent precedes its children, ties broken
/// lexicographically.
pub fn topological_order(dag: &Dag) -> Result<Vec<String>> {
    let mut indeg: BTreeMap<&str, usize> = dag.nodes().map(|n| (n, dag.parents(n).len())).collect();
    let mut ready: BTreeSet<&str> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&n, _)| n).collect();
    let mut order = Vec::with_capacity(indeg.len());
    while let Some(n) = ready.pop_first() {
        order.push(n.to_string());
        for c in dag.children(n) {
            let d = indeg.get_mut(c.as_str()).expect("child is a node");
            *d -= 1;
            if *d == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() != dag.node_count() {
        return Err(Error::CycleDetected);
    }
    Ok(order)
}

/// Whether every path between `x` and `y` is blocked by `z`.
///
/// Reachability over (node, direction) states: a trail may pass a
/// non-collider that is not in `z`, and a collider that has itself or a
/// descendant in `z`.
pub fn d_separated(dag: &Dag, x: &BTreeSet<String>, y: &BTreeSet<String>, z: &BTreeSet<String>) -> Result<bool> {
    for n in x.iter().chain(y).chain(z) {
        dag.require(n)?;
    }
    if x.iter().any(|n| y.contains(n) || z.contains(n)) || y.iter().any(|n| z.contains(n)) {
        return Err(Error::InvalidArgument(
            "d-separation sets must be pairwise disjoint".into(),
        ));
    }
    let reachable = d_connected_nodes(dag, x.iter().map(String::as_str), z);
    Ok(!y.iter().any(|n| reachable.contains(n)))
}

/// All nodes reachable from `sources` along active trails given `z`.
pub(crate) fn d_connected_nodes<'a, I>(dag: &Dag, sources: I, z: &BTreeSet<String>) -> BTreeSet<String>
where
    I: IntoIterator<Item = &'a str>,
{
    let anc_z = dag.ancestors_of(z.iter().map(String::as_str));
    // `true`: arrived from a child (moving up), `false`: arrived from a parent.
    let mut queue: VecDeque<(String, bool)> = sources.into_iter().map(|s| (s.to_string(), true)).collect();
    let mut visited: BTreeSet<(String, bool)> = BTreeSet::new();
    let mut reachable = BTreeSet::new();
    while let Some((node, up)) = queue.pop_front() {
        if !visited.insert((node.clone(), up)) {
            continue;
        }
        let in_z = z.contains(&node);
        if !in_z {
            reachable.insert(node.clone());
        }
        if up && !in_z {
            for p in dag.parents(&node) {
                queue.push_back((p.clone(), true));
            }
            for c in dag.children(&node) {
                queue.push_back((c.clone(), false));
            }
        } else if !up {
            if !in_z {
                for c in dag.children(&node) {
                    queue.push_back((c.clone(), false));
                }
            }
            if anc_z.contains(&node) {
                for p in dag.parents(&node) {
                    queue.push_back((p.clone(), true));
                }
            }
        }
    }
    reachable
}

/// Simple undirected graph, used for moral graphs and elimination.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UndirectedGraph {
    adj: BTreeMap<String, BTreeSet<String>>,
}

impl UndirectedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, n: &str) {
        self.adj.entry(n.to_string()).or_default();
    }

    pub fn add_edge(&mut self, a: &str, b: &str) {
        if a == b {
            return;
        }
        self.adj.entry(a.to_string()).or_default().insert(b.to_string());
        self.adj.entry(b.to_string()).or_default().insert(a.to_string());
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        self.adj.get(a).map(|s| s.contains(b)).unwrap_or(false)
    }

    pub fn contains(&self, n: &str) -> bool {
        self.adj.contains_key(n)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> + '_ {
        self.adj.keys().map(String::as_str)
    }

    pub fn neighbors(&self, n: &str) -> &BTreeSet<String> {
        static EMPTY: BTreeSet<String> = BTreeSet::new();
        self.adj.get(n).unwrap_or(&EMPTY)
    }

    /// Edges as `(a, b)` with `a < b`.
    pub fn edges(&self) -> BTreeSet<(String, String)> {
        let mut out = BTreeSet::new();
        for (a, ns) in &self.adj {
            for b in ns {
                if a < b {
                    out.insert((a.clone(), b.clone()));
                }
            }
        }
        out
    }

    pub fn remove_node(&mut self, n: &str) {
        if let Some(ns) = self.adj.remove(n) {
            for m in ns {
                if let Some(s) = self.adj.get_mut(&m) {
                    s.remove(n);
                }
            }
        }
    }
}

/// Undirects every edge and connects all co-parents of each node.
pub fn moralize(dag: &Dag) -> UndirectedGraph {
    let mut g = UndirectedGraph::new();
    for n in dag.nodes() {
        g.add_node(n);
        let ps: Vec<&String> = dag.parents(n).iter().collect();
        for (i, p) in ps.iter().enumerate() {
            g.add_edge(p, n);
            for q in &ps[i + 1..] {
                g.add_edge(p, q);
            }
        }
    }
    g
}

/// Partially directed graph: a mix of directed and undirected edges with at
/// most one edge per unordered pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pdag {
    nodes: BTreeSet<String>,
    directed: BTreeSet<(String, String)>,
    undirected: BTreeSet<(String, String)>,
}

fn ordered_pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl Pdag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, n: &str) {
        self.nodes.insert(n.to_string());
    }

    fn check_new_pair(&self, a: &str, b: &str) -> Result<()> {
        for n in [a, b] {
            if !self.nodes.contains(n) {
                return Err(Error::UnknownVariable(n.to_string()));
            }
        }
        if a == b {
            return Err(Error::InvalidGraph(format!("self-loop on `{a}`")));
        }
        if self.is_adjacent(a, b) {
            return Err(Error::InvalidGraph(format!("`{a}` and `{b}` are already adjacent")));
        }
        Ok(())
    }

    pub fn add_directed(&mut self, from: &str, to: &str) -> Result<()> {
        self.check_new_pair(from, to)?;
        self.directed.insert((from.to_string(), to.to_string()));
        Ok(())
    }

    pub fn add_undirected(&mut self, a: &str, b: &str) -> Result<()> {
        self.check_new_pair(a, b)?;
        self.undirected.insert(ordered_pair(a, b));
        Ok(())
    }

    /// Turns the undirected edge `from - to` into `from -> to`. Returns
    /// false when there is no such undirected edge.
    pub fn orient(&mut self, from: &str, to: &str) -> bool {
        if self.undirected.remove(&ordered_pair(from, to)) {
            self.directed.insert((from.to_string(), to.to_string()));
            true
        } else {
            false
        }
    }

    pub fn remove_edge(&mut self, a: &str, b: &str) {
        self.undirected.remove(&ordered_pair(a, b));
        self.directed.remove(&(a.to_string(), b.to_string()));
        self.directed.remove(&(b.to_string(), a.to_string()));
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> + '_ {
        self.nodes.iter().map(String::as_str)
    }

    pub fn directed_edges(&self) -> &BTreeSet<(String, String)> {
        &self.directed
    }

    pub fn undirected_edges(&self) -> &BTreeSet<(String, String)> {
        &self.undirected
    }

    pub fn has_directed(&self, from: &str, to: &str) -> bool {
        self.directed.contains(&(from.to_string(), to.to_string()))
    }

    pub fn has_undirected(&self, a: &str, b: &str) -> bool {
        self.undirected.contains(&ordered_pair(a, b))
    }

    pub fn is_adjacent(&self, a: &str, b: &str) -> bool {
        self.has_undirected(a, b) || self.has_directed(a, b) || self.has_directed(b, a)
    }

    pub fn adjacent(&self, n: &str) -> BTreeSet<String> {
        let mut out = self.undirected_neighbors(n);
        for (a, b) in &self.directed {
            if a == n {
                out.insert(b.clone());
            } else if b == n {
                out.insert(a.clone());
            }
        }
        out
    }

    pub fn undirected_neighbors(&self, n: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (a, b) in &self.undirected {
            if a == n {
                out.insert(b.clone());
            } else if b == n {
                out.insert(a.clone());
            }
        }
        out
    }

    pub fn skeleton(&self) -> BTreeSet<(String, String)> {
        self.undirected
            .iter()
            .cloned()
            .chain(self.directed.iter().map(|(a, b)| ordered_pair(a, b)))
            .collect()
    }

    /// Unshielded colliders formed by directed edges only.
    pub fn v_structures(&self) -> BTreeSet<(String, String, String)> {
        let mut into: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (a, b) in &self.directed {
            into.entry(b.as_str()).or_default().push(a.as_str());
        }
        let mut out = BTreeSet::new();
        for (c, ps) in into {
            for i in 0..ps.len() {
                for j in i + 1..ps.len() {
                    if !self.is_adjacent(ps[i], ps[j]) {
                        let (a, b) = ordered_pair(ps[i], ps[j]);
                        out.insert((a, c.to_string(), b));
                    }
                }
            }
        }
        out
    }
}

impl From<&Dag> for Pdag {
    fn from(dag: &Dag) -> Self {
        let mut p = Pdag::new();
        for n in dag.nodes() {
            p.add_node(n);
        }
        for (a, b) in dag.edges() {
            p.directed.insert((a, b));
        }
        p
    }
}

/// Applies Meek's orientation rules R1–R4 until no rule fires.
pub fn apply_meek_rules(p: &mut Pdag) {
    loop {
        let mut changed = false;
        let undirected: Vec<(String, String)> = p.undirected.iter().cloned().collect();
        for (u, v) in undirected {
            for (a, b) in [(u.clone(), v.clone()), (v.clone(), u.clone())] {
                if !p.has_undirected(&a, &b) {
                    break;
                }
                if meek_fires(p, &a, &b) {
                    p.orient(&a, &b);
                    changed = true;
                    break;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// Whether some Meek rule forces the undirected edge `a - b` into `a -> b`.
fn meek_fires(p: &Pdag, a: &str, b: &str) -> bool {
    let nodes: Vec<&str> = p.nodes().collect();
    // R1: c -> a - b, c and b non-adjacent.
    for &c in &nodes {
        if c != b && p.has_directed(c, a) && !p.is_adjacent(c, b) {
            return true;
        }
    }
    // R2: a -> c -> b.
    for &c in &nodes {
        if p.has_directed(a, c) && p.has_directed(c, b) {
            return true;
        }
    }
    // R3: a - c -> b and a - d -> b with c, d non-adjacent.
    let mids: Vec<&str> = nodes
        .iter()
        .copied()
        .filter(|&c| p.has_undirected(a, c) && p.has_directed(c, b))
        .collect();
    for i in 0..mids.len() {
        for j in i + 1..mids.len() {
            if !p.is_adjacent(mids[i], mids[j]) {
                return true;
            }
        }
    }
    // R4: a - c -> d -> b with c, b non-adjacent and a, d adjacent.
    for &c in &nodes {
        if !p.has_undirected(a, c) || p.is_adjacent(c, b) || c == b {
            continue;
        }
        for &d in &nodes {
            if p.has_directed(c, d) && p.has_directed(d, b) && p.is_adjacent(a, d) {
                return true;
            }
        }
    }
    false
}

/// Extends a partially directed graph to a DAG with the same skeleton and
/// v-structures.
///
/// Repeatedly removes a sink candidate: a node with no outgoing directed
/// edge whose undirected neighbours are adjacent to all its other
/// neighbours; its undirected edges are pointed into it. Among candidates
/// the lexicographically largest is taken, so an isolated undirected edge
/// `A - B` becomes `A -> B`.
pub fn pdag_to_dag(p: &Pdag) -> Result<Dag> {
    let mut work = p.clone();
    let mut dag = Dag::new();
    for n in p.nodes() {
        dag.add_node(n)?;
    }
    let mut remaining: BTreeSet<String> = p.nodes.clone();
    while !remaining.is_empty() {
        let mut chosen = None;
        for x in remaining.iter().rev() {
            let has_out = work.directed.iter().any(|(a, _)| a == x);
            if has_out {
                continue;
            }
            let adj = work.adjacent(x);
            let ok = work
                .undirected_neighbors(x)
                .iter()
                .all(|y| adj.iter().filter(|&z| z != y).all(|z| work.is_adjacent(y, z)));
            if ok {
                chosen = Some(x.clone());
                break;
            }
        }
        let x = chosen.ok_or(Error::NotExtendable)?;
        for y in work.undirected_neighbors(&x) {
            dag.add_edge(&y, &x).map_err(|_| Error::NotExtendable)?;
        }
        let incoming: Vec<String> = work
            .directed
            .iter()
            .filter(|(_, b)| *b == x)
            .map(|(a, _)| a.clone())
            .collect();
        for y in incoming {
            dag.add_edge(&y, &x).map_err(|_| Error::NotExtendable)?;
        }
        work.directed.retain(|(a, b)| *a != x && *b != x);
        work.undirected.retain(|(a, b)| *a != x && *b != x);
        work.nodes.remove(&x);
        remaining.remove(&x);
    }
    Ok(dag)
}
