//! Textual BIF (0.15 dialect).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::{cpd_from_table, format_column, normalize_columns, semantic};
use crate::error::{Error, ParseDiagnostic, Result};
use crate::graph::Dag;
use crate::model::{DiscreteBayesianNetwork, ModelMetadata, TabularCpd, VariableMeta};

const MAX_TABLE: usize = 1 << 24;

const PUNCT: &[char] = &['{', '}', '(', ')', '[', ']', ';', ',', '|'];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Punct(char),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

impl Token {
    fn describe(&self) -> String {
        match &self.tok {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(&self.tok, Tok::Word(x) if x == w)
    }
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    // ends of the last two tokens consumed
    prev_end: (usize, usize),
    before: (usize, usize),
    peeked: Option<Token>,
}

impl Lexer {
    fn new(text: &str) -> Self {
        Lexer {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            prev_end: (1, 1),
            before: (1, 1),
            peeked: None,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = *self.chars.get(self.pos)?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn skip_trivia(&mut self) -> Result<()> {
        loop {
            match (self.at(0), self.at(1)) {
                (Some(c), _) if c.is_whitespace() => {
                    self.bump();
                }
                (Some('/'), Some('/')) => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                (Some('/'), Some('*')) => {
                    let (line, col) = (self.line, self.col);
                    self.bump();
                    self.bump();
                    loop {
                        match (self.at(0), self.at(1)) {
                            (Some('*'), Some('/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            (Some(_), _) => {
                                self.bump();
                            }
                            (None, _) => {
                                return Err(Error::Parse(ParseDiagnostic::error(
                                    line,
                                    col,
                                    "unterminated block comment",
                                )))
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn lex(&mut self) -> Result<Token> {
        self.skip_trivia()?;
        let (line, col) = (self.line, self.col);
        let Some(c) = self.at(0) else {
            return Ok(Token {
                tok: Tok::Eof,
                line,
                col,
            });
        };
        let tok = if PUNCT.contains(&c) {
            self.bump();
            Tok::Punct(c)
        } else if c == '"' {
            self.bump();
            let mut w = String::new();
            loop {
                match self.bump() {
                    Some('"') => break,
                    Some(ch) => w.push(ch),
                    None => return Err(Error::Parse(ParseDiagnostic::error(line, col, "unterminated string"))),
                }
            }
            Tok::Word(w)
        } else {
            let mut w = String::new();
            while let Some(ch) = self.at(0) {
                let comment = ch == '/' && matches!(self.at(1), Some('/') | Some('*'));
                if ch.is_whitespace() || PUNCT.contains(&ch) || ch == '"' || comment {
                    break;
                }
                w.push(ch);
                self.bump();
            }
            Tok::Word(w)
        };
        Ok(Token { tok, line, col })
    }

    fn next(&mut self) -> Result<Token> {
        let t = match self.peeked.take() {
            Some(t) => t,
            None => self.lex()?,
        };
        self.before = self.prev_end;
        self.prev_end = (self.line, self.col);
        Ok(t)
    }

    fn peek(&mut self) -> Result<&Token> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lex()?);
        }
        Ok(self.peeked.as_ref().expect("peeked"))
    }

    /// Error for an unexpected token. A token that sits on a later line than
    /// the previous one is reported at the end of the previous token, where
    /// the missing piece belongs.
    fn unexpected(&self, found: &Token, wanted: &str) -> Error {
        let (line, col) = if found.line > self.before.0 || found.tok == Tok::Eof {
            self.before
        } else {
            (found.line, found.col)
        };
        Error::Parse(ParseDiagnostic::error(
            line,
            col,
            format!("expected {wanted}, found {}", found.describe()),
        ))
    }

    fn expect_punct(&mut self, c: char) -> Result<Token> {
        let t = self.next()?;
        if t.tok == Tok::Punct(c) {
            Ok(t)
        } else {
            Err(self.unexpected(&t, &format!("`{c}`")))
        }
    }

    fn expect_word(&mut self, what: &str) -> Result<(String, Token)> {
        let t = self.next()?;
        match &t.tok {
            Tok::Word(w) => Ok((w.clone(), t)),
            _ => Err(self.unexpected(&t, what)),
        }
    }

    fn expect_number(&mut self) -> Result<f64> {
        let (w, t) = self.expect_word("a number")?;
        w.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Parse(ParseDiagnostic::error(t.line, t.col, format!("`{w}` is not a number"))))
    }

    /// Raw text after a `property` keyword, up to the closing `;`.
    fn property(&mut self, start: &Token) -> Result<String> {
        debug_assert!(self.peeked.is_none());
        let mut raw = String::new();
        let mut quoted = false;
        loop {
            match self.bump() {
                Some(';') if !quoted => break,
                Some(c) => {
                    if c == '"' {
                        quoted = !quoted;
                    }
                    raw.push(c);
                }
                None => {
                    return Err(Error::Parse(ParseDiagnostic::error(
                        start.line,
                        start.col,
                        "unterminated property",
                    )))
                }
            }
        }
        self.before = self.prev_end;
        self.prev_end = (self.line, self.col);
        Ok(raw.trim().to_string())
    }

    /// Numbers up to `;`, commas optional.
    fn numbers(&mut self) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        loop {
            match &self.peek()?.tok {
                Tok::Punct(';') => {
                    self.next()?;
                    return Ok(out);
                }
                Tok::Punct(',') if !out.is_empty() => {
                    self.next()?;
                }
                _ => out.push(self.expect_number()?),
            }
        }
    }

    /// `a, b, c` up to (and consuming) `close`.
    fn word_list(&mut self, close: char, what: &str) -> Result<Vec<String>> {
        let mut out = Vec::new();
        loop {
            let (w, _) = self.expect_word(what)?;
            out.push(w);
            let t = self.next()?;
            match t.tok {
                Tok::Punct(',') => continue,
                Tok::Punct(c) if c == close => return Ok(out),
                _ => return Err(self.unexpected(&t, &format!("`,` or `{close}`"))),
            }
        }
    }
}

struct VariableDecl {
    meta: VariableMeta,
    properties: Vec<String>,
    line: usize,
}

enum Entry {
    Table(Vec<f64>),
    Default(Vec<f64>),
    Config(Vec<String>, Vec<f64>),
}

struct ProbabilityDecl {
    child: String,
    parents: Vec<String>,
    entries: Vec<(usize, Entry)>,
    line: usize,
}

fn parse_variable(lx: &mut Lexer, start: &Token) -> Result<VariableDecl> {
    let (name, _) = lx.expect_word("a variable name")?;
    lx.expect_punct('{')?;
    let mut states: Option<(Vec<String>, usize, usize)> = None;
    let mut properties = Vec::new();
    loop {
        let t = lx.next()?;
        if t.tok == Tok::Punct('}') {
            break;
        }
        if t.is_word("property") {
            properties.push(lx.property(&t)?);
        } else if t.is_word("type") {
            let (kind, kt) = lx.expect_word("`discrete`")?;
            if kind != "discrete" {
                return Err(Error::Parse(ParseDiagnostic::error(
                    kt.line,
                    kt.col,
                    format!("only discrete variables are supported, found `{kind}`"),
                )));
            }
            lx.expect_punct('[')?;
            let (k, kt) = lx.expect_word("a state count")?;
            let k: usize = k.parse().map_err(|_| {
                Error::Parse(ParseDiagnostic::error(
                    kt.line,
                    kt.col,
                    format!("`{k}` is not a state count"),
                ))
            })?;
            lx.expect_punct(']')?;
            lx.expect_punct('{')?;
            let list = lx.word_list('}', "a state name")?;
            lx.expect_punct(';')?;
            if states.is_some() {
                return Err(semantic(t.line, format!("`{name}` has two type declarations")));
            }
            states = Some((list, k, t.line));
        } else {
            return Err(lx.unexpected(&t, "`type`, `property` or `}`"));
        }
    }
    let Some((list, k, line)) = states else {
        return Err(semantic(
            start.line,
            format!("variable `{name}` has no type declaration"),
        ));
    };
    if list.len() != k {
        return Err(semantic(
            line,
            format!("`{name}` declares {k} states but lists {}", list.len()),
        ));
    }
    let meta = VariableMeta::new(name, list).map_err(|e| semantic(line, e.to_string()))?;
    Ok(VariableDecl {
        meta,
        properties,
        line: start.line,
    })
}

fn parse_probability(lx: &mut Lexer, start: &Token, warnings: &mut Vec<ParseDiagnostic>) -> Result<ProbabilityDecl> {
    lx.expect_punct('(')?;
    let (child, _) = lx.expect_word("a variable name")?;
    let t = lx.next()?;
    let parents = match t.tok {
        Tok::Punct(')') => Vec::new(),
        Tok::Punct('|') => lx.word_list(')', "a parent name")?,
        _ => return Err(lx.unexpected(&t, "`|` or `)`")),
    };
    lx.expect_punct('{')?;
    let mut entries = Vec::new();
    loop {
        let t = lx.next()?;
        match &t.tok {
            Tok::Punct('}') => break,
            Tok::Punct('(') => {
                let states = lx.word_list(')', "a parent state")?;
                let values = lx.numbers()?;
                entries.push((t.line, Entry::Config(states, values)));
            }
            Tok::Word(w) if w == "table" => entries.push((t.line, Entry::Table(lx.numbers()?))),
            Tok::Word(w) if w == "default" => entries.push((t.line, Entry::Default(lx.numbers()?))),
            Tok::Word(w) if w == "property" => {
                lx.property(&t)?;
                warnings.push(ParseDiagnostic::warning(
                    t.line,
                    t.col,
                    "properties inside probability blocks are ignored",
                ));
            }
            _ => return Err(lx.unexpected(&t, "`table`, `default`, `(` or `}`")),
        }
    }
    Ok(ProbabilityDecl {
        child,
        parents,
        entries,
        line: start.line,
    })
}

/// Parses BIF text into a network.
pub fn parse_bif(text: &str) -> Result<DiscreteBayesianNetwork> {
    parse_bif_with_warnings(text).map(|(bn, _)| bn)
}

/// Like [`parse_bif`], also returning the warnings collected on the way.
pub fn parse_bif_with_warnings(text: &str) -> Result<(DiscreteBayesianNetwork, Vec<ParseDiagnostic>)> {
    let mut lx = Lexer::new(text);
    let mut warnings = Vec::new();
    let mut metadata = ModelMetadata::default();
    let mut seen_network = false;
    let mut variables: Vec<VariableDecl> = Vec::new();
    let mut blocks: Vec<ProbabilityDecl> = Vec::new();
    loop {
        let t = lx.next()?;
        match &t.tok {
            Tok::Eof => break,
            Tok::Word(w) if w == "network" => {
                if seen_network {
                    return Err(semantic(t.line, "second network block"));
                }
                seen_network = true;
                let (name, _) = lx.expect_word("a network name")?;
                metadata.name = Some(name);
                lx.expect_punct('{')?;
                loop {
                    let t = lx.next()?;
                    if t.tok == Tok::Punct('}') {
                        break;
                    }
                    if t.is_word("property") {
                        metadata.properties.push(lx.property(&t)?);
                    } else {
                        return Err(lx.unexpected(&t, "`property` or `}`"));
                    }
                }
            }
            Tok::Word(w) if w == "variable" => variables.push(parse_variable(&mut lx, &t)?),
            Tok::Word(w) if w == "probability" => blocks.push(parse_probability(&mut lx, &t, &mut warnings)?),
            _ => return Err(lx.unexpected(&t, "`network`, `variable` or `probability`")),
        }
    }
    let bn = assemble(variables, blocks, metadata, &mut warnings)?;
    Ok((bn, warnings))
}

fn assemble(
    variables: Vec<VariableDecl>,
    blocks: Vec<ProbabilityDecl>,
    mut metadata: ModelMetadata,
    warnings: &mut Vec<ParseDiagnostic>,
) -> Result<DiscreteBayesianNetwork> {
    let mut decls: BTreeMap<String, VariableDecl> = BTreeMap::new();
    for v in variables {
        if decls.contains_key(v.meta.name()) {
            return Err(semantic(v.line, format!("variable `{}` declared twice", v.meta.name())));
        }
        decls.insert(v.meta.name().to_string(), v);
    }
    let mut dag = Dag::new();
    for name in decls.keys() {
        dag.add_node(name).map_err(|e| semantic(1, e.to_string()))?;
    }
    let mut cpds: BTreeMap<String, TabularCpd> = BTreeMap::new();
    for b in blocks {
        let Some(child) = decls.get(&b.child) else {
            return Err(semantic(
                b.line,
                format!("probability for undeclared variable `{}`", b.child),
            ));
        };
        if cpds.contains_key(&b.child) {
            return Err(semantic(b.line, format!("two probability blocks for `{}`", b.child)));
        }
        let mut parents = Vec::with_capacity(b.parents.len());
        let mut unique = BTreeSet::new();
        for p in &b.parents {
            let Some(pd) = decls.get(p) else {
                return Err(semantic(b.line, format!("undeclared parent `{p}`")));
            };
            if p == &b.child || !unique.insert(p) {
                return Err(semantic(b.line, format!("invalid parent list for `{}`", b.child)));
            }
            parents.push((p.clone(), pd.meta.cardinality()));
        }
        let r = child.meta.cardinality();
        let q = parents
            .iter()
            .try_fold(1usize, |acc, (_, c)| acc.checked_mul(*c))
            .filter(|q| q.checked_mul(r).is_some_and(|n| n <= MAX_TABLE))
            .ok_or_else(|| semantic(b.line, format!("table for `{}` is too large", b.child)))?;
        let values = table_values(&b, &parents, &decls, r, q)?;
        let mut values = values;
        match normalize_columns(&mut values, r) {
            Ok(true) => warnings.push(ParseDiagnostic::warning(
                b.line,
                1,
                format!("renormalized columns of `{}`", b.child),
            )),
            Ok(false) => {}
            Err(msg) => return Err(semantic(b.line, format!("`{}`: {msg}", b.child))),
        }
        let cpd = cpd_from_table(&b.child, r, &parents, values).map_err(|e| semantic(b.line, e.to_string()))?;
        for (p, _) in &parents {
            dag.add_edge(p, &b.child).map_err(|e| semantic(b.line, e.to_string()))?;
        }
        cpds.insert(b.child.clone(), cpd);
    }
    for (name, d) in &decls {
        if !cpds.contains_key(name) {
            return Err(semantic(d.line, format!("no probability block for `{name}`")));
        }
    }
    let mut metas = Vec::with_capacity(decls.len());
    for (name, d) in decls {
        if !d.properties.is_empty() {
            metadata.variable_properties.insert(name, d.properties);
        }
        metas.push(d.meta);
    }
    let mut bn = DiscreteBayesianNetwork::from_parts(dag, metas, cpds.into_values().collect(), BTreeSet::new())
        .map_err(|e| semantic(1, e.to_string()))?;
    bn.metadata = metadata;
    Ok(bn)
}

/// Values of one probability block laid out over `parents ++ [child]` in
/// declared parent order.
fn table_values(
    b: &ProbabilityDecl,
    parents: &[(String, usize)],
    decls: &BTreeMap<String, VariableDecl>,
    r: usize,
    q: usize,
) -> Result<Vec<f64>> {
    let mut table: Option<Vec<f64>> = None;
    let mut default: Option<Vec<f64>> = None;
    let mut columns: Vec<Option<Vec<f64>>> = vec![None; q];
    let mut any_config = false;
    for (line, entry) in &b.entries {
        match entry {
            Entry::Table(v) => {
                if table.is_some() {
                    return Err(semantic(*line, format!("two tables for `{}`", b.child)));
                }
                if v.len() != q * r {
                    return Err(semantic(
                        *line,
                        format!("table for `{}` has {} values, expected {}", b.child, v.len(), q * r),
                    ));
                }
                table = Some(v.clone());
            }
            Entry::Default(v) => {
                if v.len() != r {
                    return Err(semantic(
                        *line,
                        format!("default row has {} values, expected {r}", v.len()),
                    ));
                }
                default = Some(v.clone());
            }
            Entry::Config(states, v) => {
                any_config = true;
                if states.len() != parents.len() {
                    return Err(semantic(
                        *line,
                        format!("{} parent states given, expected {}", states.len(), parents.len()),
                    ));
                }
                if v.len() != r {
                    return Err(semantic(*line, format!("{} values given, expected {r}", v.len())));
                }
                let mut idx = 0;
                for ((p, card), s) in parents.iter().zip(states) {
                    let si = decls[p]
                        .meta
                        .state_index(s)
                        .map_err(|e| semantic(*line, e.to_string()))?;
                    idx = idx * card + si;
                }
                if columns[idx].is_some() {
                    return Err(semantic(*line, "parent configuration given twice"));
                }
                columns[idx] = Some(v.clone());
            }
        }
    }
    if let Some(t) = table {
        if any_config || default.is_some() {
            return Err(semantic(
                b.line,
                format!("`{}` mixes a table with per-configuration rows", b.child),
            ));
        }
        return Ok(t);
    }
    let mut out = Vec::with_capacity(q * r);
    for col in columns {
        match col.or_else(|| default.clone()) {
            Some(c) => out.extend(c),
            None => {
                return Err(semantic(
                    b.line,
                    format!("`{}` is missing rows for some parent configurations", b.child),
                ))
            }
        }
    }
    Ok(out)
}

fn quote(word: &str) -> String {
    let plain = !word.is_empty()
        && !word
            .chars()
            .any(|c| c.is_whitespace() || PUNCT.contains(&c) || c == '"')
        && !word.contains("//")
        && !word.contains("/*");
    if plain {
        word.to_string()
    } else {
        format!("\"{word}\"")
    }
}

/// Canonical BIF: variables in lexicographic order, `table` rows only,
/// six significant digits, LF line endings.
pub fn serialize_bif(bn: &DiscreteBayesianNetwork) -> String {
    let mut out = String::new();
    let name = bn.metadata.name.as_deref().unwrap_or("unknown");
    let _ = writeln!(out, "network {} {{", quote(name));
    for p in &bn.metadata.properties {
        let _ = writeln!(out, "  property {p};");
    }
    out.push_str("}\n");
    for meta in bn.metas() {
        let states: Vec<String> = meta.states().iter().map(|s| quote(s)).collect();
        let _ = writeln!(out, "variable {} {{", quote(meta.name()));
        let _ = writeln!(
            out,
            "  type discrete [ {} ] {{ {} }};",
            meta.cardinality(),
            states.join(", ")
        );
        if let Some(props) = bn.metadata.variable_properties.get(meta.name()) {
            for p in props {
                let _ = writeln!(out, "  property {p};");
            }
        }
        out.push_str("}\n");
    }
    for cpd in bn.cpds() {
        let child = quote(cpd.child());
        if cpd.parents().is_empty() {
            let _ = writeln!(out, "probability ( {child} ) {{");
        } else {
            let parents: Vec<String> = cpd.parents().iter().map(|p| quote(p)).collect();
            let _ = writeln!(out, "probability ( {child} | {} ) {{", parents.join(", "));
        }
        let mut cells = Vec::with_capacity(cpd.factor().len());
        for col in cpd.factor().values().chunks(cpd.child_cardinality()) {
            cells.extend(format_column(col));
        }
        let _ = writeln!(out, "  table {};", cells.join(", "));
        out.push_str("}\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPRINKLER_FRAGMENT: &str = "network test {\n  property \"version 1\";\n}\n\
        // comment\n\
        variable Rain {\n  type discrete [ 2 ] { yes, no };\n  property weather;\n}\n\
        /* a\n block */\n\
        variable Wet {\n  type discrete [ 2 ] { wet, dry };\n}\n\
        probability ( Rain ) {\n  table 0.2, 0.8;\n}\n\
        probability ( Wet | Rain ) {\n  ( yes ) 0.9, 0.1;\n  ( no ) 0.05, 0.95;\n}\n";

    #[test]
    fn parses_both_table_forms() {
        let bn = parse_bif(SPRINKLER_FRAGMENT).unwrap();
        assert_eq!(bn.cpd("Rain").unwrap().factor().values(), &[0.2, 0.8]);
        assert_eq!(bn.cpd("Wet").unwrap().factor().values(), &[0.9, 0.1, 0.05, 0.95]);
        assert_eq!(bn.meta("Wet").unwrap().states(), &["wet", "dry"]);
        assert_eq!(bn.metadata.name.as_deref(), Some("test"));
        assert_eq!(bn.metadata.properties, vec!["\"version 1\"".to_string()]);
        assert_eq!(bn.metadata.variable_properties["Rain"], vec!["weather".to_string()]);
    }

    #[test]
    fn parentless_table() {
        let bn =
            parse_bif("variable A { type discrete [ 2 ] { a, b }; }\nprobability ( A ) { table 0.5 0.5; }").unwrap();
        assert_eq!(bn.cpd("A").unwrap().factor().values(), &[0.5, 0.5]);
    }

    #[test]
    fn missing_semicolon_points_at_its_line() {
        let text = "variable A {\n  type discrete [ 2 ] { a, b }\n}\n";
        let err = parse_bif(text).unwrap_err();
        assert_eq!(err.kind(), "ParseError");
        assert_eq!(err.position().unwrap().0, 2);
    }

    #[test]
    fn declared_parent_order_is_respected() {
        // table given over (B, A) order; stored over (A, B)
        let text = "variable A { type discrete [ 2 ] { a0, a1 }; }\n\
            variable B { type discrete [ 2 ] { b0, b1 }; }\n\
            variable C { type discrete [ 2 ] { c0, c1 }; }\n\
            probability ( A ) { table 0.5, 0.5; }\n\
            probability ( B ) { table 0.5, 0.5; }\n\
            probability ( C | B, A ) { table 0.1, 0.9, 0.2, 0.8, 0.3, 0.7, 0.4, 0.6; }\n";
        let bn = parse_bif(text).unwrap();
        let cpd = bn.cpd("C").unwrap();
        assert_eq!(cpd.parents(), &["A", "B"]);
        // A=1, B=0 was the third column in declared order
        assert_eq!(cpd.probability(0, &[1, 0]), 0.2);
        assert_eq!(cpd.probability(0, &[0, 1]), 0.3);
    }

    #[test]
    fn semantic_errors() {
        let undeclared = "variable A { type discrete [ 2 ] { a, b }; }\nprobability ( A | Z ) { table 0.5, 0.5; }";
        let e = parse_bif(undeclared).unwrap_err();
        assert_eq!((e.kind(), e.position()), ("SemanticError", Some((2, 1))));
        let count = "variable A { type discrete [ 2 ] { a, b }; }\nprobability ( A ) { table 0.5; }";
        assert_eq!(parse_bif(count).unwrap_err().kind(), "SemanticError");
        let sum = "variable A { type discrete [ 2 ] { a, b }; }\nprobability ( A ) { table 0.5, 0.6; }";
        assert_eq!(parse_bif(sum).unwrap_err().kind(), "SemanticError");
        let ok = "variable A { type discrete [ 2 ] { a, b }; }\nprobability ( A ) { table 0.5, 0.5000005; }";
        let (_, w) = parse_bif_with_warnings(ok).unwrap();
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn serialization_is_canonical_and_round_trips() {
        let bn = parse_bif(SPRINKLER_FRAGMENT).unwrap();
        let text = serialize_bif(&bn);
        assert_eq!(text, serialize_bif(&bn));
        assert!(!text.contains('\r'));
        assert!(text.contains("table 0.9, 0.1, 0.05, 0.95;"));
        let again = parse_bif(&text).unwrap();
        assert_eq!(again, bn);
        assert_eq!(serialize_bif(&again), text);
    }

    #[test]
    fn odd_names_are_quoted() {
        let bn = DiscreteBayesianNetwork::new(
            vec![VariableMeta::new("two words", vec!["a,b", "c"]).unwrap()],
            vec![TabularCpd::new("two words", 2, &[], vec![0.25, 0.75]).unwrap()],
        )
        .unwrap();
        let again = parse_bif(&serialize_bif(&bn)).unwrap();
        assert_eq!(again.meta("two words").unwrap(), bn.meta("two words").unwrap());
    }
}
