//! UAI `BAYES` files, with a comment sidecar for variable and state names.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::{cpd_from_table, normalize_columns, semantic};
use crate::error::{Error, ParseDiagnostic, Result};
use crate::graph::Dag;
use crate::model::{DiscreteBayesianNetwork, VariableMeta};

struct Word<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

struct Cursor<'a> {
    words: Vec<Word<'a>>,
    pos: usize,
    end: (usize, usize),
}

impl<'a> Cursor<'a> {
    fn next(&mut self, what: &str) -> Result<&Word<'a>> {
        let Some(w) = self.words.get(self.pos) else {
            return Err(Error::Parse(ParseDiagnostic::error(
                self.end.0,
                self.end.1,
                format!("expected {what}, found end of input"),
            )));
        };
        self.pos += 1;
        Ok(w)
    }

    fn int(&mut self, what: &str) -> Result<(usize, usize)> {
        let w = self.next(what)?;
        let v = w.text.parse::<usize>().map_err(|_| {
            Error::Parse(ParseDiagnostic::error(
                w.line,
                w.col,
                format!("expected {what}, found `{}`", w.text),
            ))
        })?;
        Ok((v, w.line))
    }

    fn float(&mut self) -> Result<f64> {
        let w = self.next("a probability")?;
        w.text.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
            Error::Parse(ParseDiagnostic::error(
                w.line,
                w.col,
                format!("expected a probability, found `{}`", w.text),
            ))
        })
    }
}

#[derive(Default)]
struct Sidecar {
    names: BTreeMap<usize, String>,
    states: BTreeMap<usize, Vec<String>>,
}

fn sidecar_line(line: &str, lineno: usize, side: &mut Sidecar) -> Result<()> {
    let body = line.trim_start().trim_start_matches('#').trim_start();
    let mut parts = body.splitn(3, ' ');
    let (Some(kind), Some(idx), Some(value)) = (parts.next(), parts.next(), parts.next()) else {
        return Ok(());
    };
    if kind != "name" && kind != "state" {
        return Ok(());
    }
    let idx: usize = idx
        .parse()
        .map_err(|_| Error::Parse(ParseDiagnostic::error(lineno, 1, format!("bad sidecar index `{idx}`"))))?;
    let value = value.trim_end_matches('\r').to_string();
    if kind == "name" {
        if side.names.insert(idx, value).is_some() {
            return Err(semantic(lineno, format!("variable {idx} named twice")));
        }
    } else {
        side.states.entry(idx).or_default().push(value);
    }
    Ok(())
}

/// Parses a UAI `BAYES` file. `# name i <name>` and `# state i <label>`
/// comment lines supply names; without them variables are called `v0`, `v1`, …
pub fn parse_uai(text: &str) -> Result<DiscreteBayesianNetwork> {
    let mut words = Vec::new();
    let mut side = Sidecar::default();
    let mut end = (1, 1);
    for (i, line) in text.split('\n').enumerate() {
        let lineno = i + 1;
        if line.trim_start().starts_with('#') {
            sidecar_line(line, lineno, &mut side)?;
            continue;
        }
        let mut col = 1;
        let mut start: Option<(usize, usize)> = None;
        for (byte, ch) in line.char_indices() {
            if ch.is_whitespace() {
                if let Some((b, c)) = start.take() {
                    words.push(Word {
                        text: &line[b..byte],
                        line: lineno,
                        col: c,
                    });
                }
            } else if start.is_none() {
                start = Some((byte, col));
            }
            col += 1;
        }
        if let Some((b, c)) = start {
            words.push(Word {
                text: &line[b..],
                line: lineno,
                col: c,
            });
        }
        end = (lineno, col);
    }
    let mut cur = Cursor { words, pos: 0, end };

    let pre = cur.next("a `BAYES` preamble")?;
    match pre.text {
        "BAYES" => {}
        "MARKOV" => return Err(Error::NotBayes { line: pre.line }),
        other => {
            return Err(Error::Parse(ParseDiagnostic::error(
                pre.line,
                pre.col,
                format!("expected `BAYES`, found `{other}`"),
            )))
        }
    }
    let (n, n_line) = cur.int("a variable count")?;
    if n > cur.words.len() {
        return Err(semantic(n_line, format!("{n} variables cannot fit in the file")));
    }
    let mut cards = Vec::with_capacity(n);
    for _ in 0..n {
        let (c, line) = cur.int("a cardinality")?;
        if c < 2 || c > cur.words.len() {
            return Err(semantic(line, format!("cardinality {c} out of range")));
        }
        cards.push(c);
    }
    let (m, m_line) = cur.int("a function count")?;
    if m != n {
        return Err(semantic(m_line, format!("{m} functions for {n} variables")));
    }
    let mut scopes = Vec::with_capacity(m);
    for _ in 0..m {
        let (k, line) = cur.int("a scope size")?;
        if k == 0 || k > n {
            return Err(semantic(line, format!("scope size {k} out of range")));
        }
        let mut scope = Vec::with_capacity(k);
        for _ in 0..k {
            let (v, line) = cur.int("a variable index")?;
            if v >= n {
                return Err(semantic(line, format!("variable index {v} out of range")));
            }
            if scope.contains(&v) {
                return Err(semantic(line, format!("variable {v} repeated in a scope")));
            }
            scope.push(v);
        }
        scopes.push((scope, line));
    }

    let mut metas = Vec::with_capacity(n);
    let mut names = Vec::with_capacity(n);
    for (i, &card) in cards.iter().enumerate() {
        let name = side.names.get(&i).cloned().unwrap_or_else(|| format!("v{i}"));
        let states = match side.states.get(&i) {
            Some(s) => {
                if s.len() != card {
                    return Err(semantic(
                        1,
                        format!("variable {i} has {} state names for cardinality {card}", s.len()),
                    ));
                }
                s.clone()
            }
            None => (0..card).map(|s| s.to_string()).collect(),
        };
        metas.push(VariableMeta::new(name.clone(), states).map_err(|e| semantic(1, e.to_string()))?);
        names.push(name);
    }
    if names.iter().collect::<BTreeSet<_>>().len() != n {
        return Err(semantic(1, "duplicate variable names"));
    }

    let mut dag = Dag::new();
    for name in &names {
        dag.add_node(name).map_err(|e| semantic(1, e.to_string()))?;
    }
    let mut cpds = BTreeMap::new();
    for (scope, line) in &scopes {
        let (t, t_line) = cur.int("a table size")?;
        let child = *scope.last().expect("nonempty scope");
        let expected = scope
            .iter()
            .try_fold(1usize, |acc, &v| acc.checked_mul(cards[v]))
            .filter(|&e| e <= cur.words.len())
            .ok_or_else(|| semantic(*line, "table larger than the file"))?;
        if t != expected {
            return Err(semantic(t_line, format!("table has {t} entries, expected {expected}")));
        }
        let mut values = Vec::with_capacity(t);
        for _ in 0..t {
            values.push(cur.float()?);
        }
        normalize_columns(&mut values, cards[child]).map_err(|m| semantic(t_line, m))?;
        let parents: Vec<(String, usize)> = scope[..scope.len() - 1]
            .iter()
            .map(|&p| (names[p].clone(), cards[p]))
            .collect();
        let cpd = cpd_from_table(&names[child], cards[child], &parents, values)
            .map_err(|e| semantic(t_line, e.to_string()))?;
        for (p, _) in &parents {
            dag.add_edge(p, &names[child])
                .map_err(|e| semantic(*line, e.to_string()))?;
        }
        if cpds.insert(child, cpd).is_some() {
            return Err(semantic(*line, format!("two functions for variable {child}")));
        }
    }
    if let Some(w) = cur.words.get(cur.pos) {
        return Err(Error::Parse(ParseDiagnostic::error(
            w.line,
            w.col,
            format!("unexpected trailing `{}`", w.text),
        )));
    }
    DiscreteBayesianNetwork::from_parts(dag, metas, cpds.into_values().collect(), BTreeSet::new())
        .map_err(|e| semantic(1, e.to_string()))
}

/// Writes a UAI `BAYES` file with variables indexed in lexicographic name
/// order, followed by the name sidecar.
pub fn serialize_uai(bn: &DiscreteBayesianNetwork) -> String {
    let names: Vec<&str> = bn.variables().collect();
    let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let mut out = String::from("BAYES\n");
    let _ = writeln!(out, "{}", names.len());
    let cards: Vec<String> = bn.metas().map(|m| m.cardinality().to_string()).collect();
    let _ = writeln!(out, "{}", cards.join(" "));
    let _ = writeln!(out, "{}", names.len());
    for cpd in bn.cpds() {
        let mut scope: Vec<String> = cpd.parents().iter().map(|p| index[p.as_str()].to_string()).collect();
        scope.push(index[cpd.child()].to_string());
        let _ = writeln!(out, "{} {}", scope.len(), scope.join(" "));
    }
    for cpd in bn.cpds() {
        out.push('\n');
        let _ = writeln!(out, "{}", cpd.factor().len());
        for col in cpd.factor().values().chunks(cpd.child_cardinality()) {
            let cells: Vec<String> = col.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, " {}", cells.join(" "));
        }
    }
    out.push('\n');
    for (i, meta) in bn.metas().enumerate() {
        let _ = writeln!(out, "# name {i} {}", meta.name());
        for s in meta.states() {
            let _ = writeln!(out, "# state {i} {s}");
        }
    }
    out
}
