//! Dense nonnegative tables over discrete variables.
//!
//! Values are stored row-major with the last scope variable varying fastest.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFactor {
    scope: Vec<String>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

/// Row-major strides for `cards` (last axis fastest).
pub(crate) fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

/// For every flat position of a table with shape `cards` (row-major), the
/// offset `Σ assignment[i] * mapped[i]`.
fn mapped_offsets(cards: &[usize], mapped: &[usize]) -> Vec<usize> {
    let total: usize = cards.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut assignment = vec![0usize; cards.len()];
    let mut offset = 0usize;
    for _ in 0..total {
        out.push(offset);
        for i in (0..cards.len()).rev() {
            assignment[i] += 1;
            offset += mapped[i];
            if assignment[i] < cards[i] {
                break;
            }
            offset -= mapped[i] * cards[i];
            assignment[i] = 0;
        }
    }
    out
}

impl DiscreteFactor {
    pub fn new<S: Into<String>>(scope: Vec<S>, cards: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let scope: Vec<String> = scope.into_iter().map(Into::into).collect();
        if scope.len() != cards.len() {
            return Err(Error::InvalidFactor(format!(
                "{} scope variables but {} cardinalities",
                scope.len(),
                cards.len()
            )));
        }
        let unique: BTreeSet<&String> = scope.iter().collect();
        if unique.len() != scope.len() {
            return Err(Error::InvalidFactor("duplicate scope variable".into()));
        }
        if cards.contains(&0) {
            return Err(Error::InvalidFactor("zero cardinality".into()));
        }
        let expected: usize = cards.iter().product();
        if values.len() != expected {
            return Err(Error::InvalidFactor(format!(
                "expected {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidFactor(format!("invalid entry {v}")));
        }
        Ok(DiscreteFactor { scope, cards, values })
    }

    /// The multiplicative identity: empty scope holding 1.
    pub fn unit() -> Self {
        Self::scalar(1.0)
    }

    pub fn scalar(value: f64) -> Self {
        DiscreteFactor {
            scope: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    /// A factor over `scope` filled with `value`.
    pub fn constant<S: Into<String>>(scope: Vec<S>, cards: Vec<usize>, value: f64) -> Result<Self> {
        let n = cards.iter().product();
        Self::new(scope, cards, vec![value; n])
    }

    pub fn scope(&self) -> &[String] {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn position(&self, var: &str) -> Option<usize> {
        self.scope.iter().position(|v| v == var)
    }

    pub fn cardinality(&self, var: &str) -> Option<usize> {
        self.position(var).map(|i| self.cards[i])
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Row-major offset of a full assignment given in scope order.
    pub fn offset(&self, assignment: &[usize]) -> usize {
        assignment.iter().zip(strides(&self.cards)).map(|(a, s)| a * s).sum()
    }

    /// Entry at a full assignment given in scope order.
    pub fn get(&self, assignment: &[usize]) -> f64 {
        self.values[self.offset(assignment)]
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Pointwise product over the union scope (this factor's order, then the
    /// other's new variables).
    pub fn product(&self, other: &DiscreteFactor) -> Result<DiscreteFactor> {
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        for (v, &c) in other.scope.iter().zip(&other.cards) {
            match self.position(v) {
                Some(i) if self.cards[i] != c => {
                    return Err(Error::CardinalityMismatch {
                        variable: v.clone(),
                        left: self.cards[i],
                        right: c,
                    })
                }
                Some(_) => {}
                None => {
                    scope.push(v.clone());
                    cards.push(c);
                }
            }
        }
        let map_a = self.project(&scope);
        let map_b = other.project(&scope);
        let off_a = mapped_offsets(&cards, &map_a);
        let off_b = mapped_offsets(&cards, &map_b);
        let values = off_a
            .iter()
            .zip(&off_b)
            .map(|(&i, &j)| self.values[i] * other.values[j])
            .collect();
        Ok(DiscreteFactor { scope, cards, values })
    }

    /// Strides of this factor expressed along `target` (0 for absent variables).
    fn project(&self, target: &[String]) -> Vec<usize> {
        let own = strides(&self.cards);
        target
            .iter()
            .map(|v| self.position(v).map(|i| own[i]).unwrap_or(0))
            .collect()
    }

    /// Sums out `vars`, preserving the order of the surviving variables.
    pub fn marginalize<S: AsRef<str>>(&self, vars: &[S]) -> Result<DiscreteFactor> {
        for v in vars {
            if self.position(v.as_ref()).is_none() {
                return Err(Error::UnknownVariable(v.as_ref().to_string()));
            }
        }
        let drop: BTreeSet<&str> = vars.iter().map(AsRef::as_ref).collect();
        let keep: Vec<usize> = (0..self.scope.len())
            .filter(|&i| !drop.contains(self.scope[i].as_str()))
            .collect();
        let scope: Vec<String> = keep.iter().map(|&i| self.scope[i].clone()).collect();
        let cards: Vec<usize> = keep.iter().map(|&i| self.cards[i]).collect();
        let out_strides = strides(&cards);
        let mut mapped = vec![0usize; self.scope.len()];
        for (k, &i) in keep.iter().enumerate() {
            mapped[i] = out_strides[k];
        }
        let mut values = vec![0.0; cards.iter().product()];
        for (src, dst) in mapped_offsets(&self.cards, &mapped).into_iter().enumerate() {
            values[dst] += self.values[src];
        }
        Ok(DiscreteFactor { scope, cards, values })
    }

    /// Keeps only `vars` (in this factor's order), summing out the rest.
    pub fn marginal<S: AsRef<str>>(&self, vars: &[S]) -> Result<DiscreteFactor> {
        for v in vars {
            if self.position(v.as_ref()).is_none() {
                return Err(Error::UnknownVariable(v.as_ref().to_string()));
            }
        }
        let keep: BTreeSet<&str> = vars.iter().map(AsRef::as_ref).collect();
        let drop: Vec<&String> = self.scope.iter().filter(|v| !keep.contains(v.as_str())).collect();
        self.marginalize(&drop)
    }

    /// Slices the table at the given assignments; assigned variables leave the scope.
    pub fn reduce<S: AsRef<str>>(&self, assignments: &[(S, usize)]) -> Result<DiscreteFactor> {
        let own = strides(&self.cards);
        let mut base = 0usize;
        let mut fixed = vec![false; self.scope.len()];
        for (v, s) in assignments {
            let v = v.as_ref();
            let i = self.position(v).ok_or_else(|| Error::UnknownVariable(v.to_string()))?;
            if *s >= self.cards[i] {
                return Err(Error::StateOutOfRange {
                    variable: v.to_string(),
                    state: *s,
                    cardinality: self.cards[i],
                });
            }
            if fixed[i] {
                return Err(Error::InvalidArgument(format!("`{v}` assigned twice")));
            }
            fixed[i] = true;
            base += s * own[i];
        }
        let keep: Vec<usize> = (0..self.scope.len()).filter(|&i| !fixed[i]).collect();
        let scope: Vec<String> = keep.iter().map(|&i| self.scope[i].clone()).collect();
        let cards: Vec<usize> = keep.iter().map(|&i| self.cards[i]).collect();
        let mapped: Vec<usize> = keep.iter().map(|&i| own[i]).collect();
        let values = mapped_offsets(&cards, &mapped)
            .into_iter()
            .map(|o| self.values[base + o])
            .collect();
        Ok(DiscreteFactor { scope, cards, values })
    }

    /// Rescales to unit total mass.
    pub fn normalize(&self) -> Result<DiscreteFactor> {
        let total = self.total();
        if total <= 0.0 || !total.is_finite() {
            return Err(Error::ZeroMass);
        }
        Ok(DiscreteFactor {
            scope: self.scope.clone(),
            cards: self.cards.clone(),
            values: self.values.iter().map(|v| v / total).collect(),
        })
    }

    /// Same table with its scope permuted into `order`.
    pub fn reorder<S: AsRef<str>>(&self, order: &[S]) -> Result<DiscreteFactor> {
        if order.len() != self.scope.len() {
            return Err(Error::InvalidArgument(
                "reorder needs a permutation of the scope".into(),
            ));
        }
        let scope: Vec<String> = order.iter().map(|v| v.as_ref().to_string()).collect();
        let mut cards = Vec::with_capacity(scope.len());
        for v in &scope {
            cards.push(self.cardinality(v).ok_or_else(|| Error::UnknownVariable(v.clone()))?);
        }
        let unique: BTreeSet<&String> = scope.iter().collect();
        if unique.len() != scope.len() {
            return Err(Error::InvalidArgument("duplicate variable in order".into()));
        }
        let mapped = self.project(&scope);
        let values = mapped_offsets(&cards, &mapped)
            .into_iter()
            .map(|o| self.values[o])
            .collect();
        Ok(DiscreteFactor { scope, cards, values })
    }

    /// Same table with the scope sorted lexicographically.
    pub fn canonical(&self) -> DiscreteFactor {
        let mut order = self.scope.clone();
        order.sort();
        self.reorder(&order).expect("permutation of own scope")
    }

    /// Largest absolute entry difference after aligning `other` to this scope.
    pub fn max_abs_diff(&self, other: &DiscreteFactor) -> Result<f64> {
        let aligned = other.reorder(&self.scope)?;
        if aligned.cards != self.cards {
            return Err(Error::InvalidArgument("cardinalities differ".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&aligned.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Product of a list of factors; the unit factor for an empty list.
pub fn product_all<'a, I>(factors: I) -> Result<DiscreteFactor>
where
    I: IntoIterator<Item = &'a DiscreteFactor>,
{
    let mut acc = DiscreteFactor::unit();
    for f in factors {
        acc = acc.product(f)?;
    }
    Ok(acc)
}
