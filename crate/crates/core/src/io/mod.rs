//! Model interchange (BIF, UAI) and CSV datasets.

mod bif;
mod csv;
mod uai;

pub use self::bif::{parse_bif, parse_bif_with_warnings, serialize_bif};
pub use self::csv::{read_csv, write_csv, WEIGHT_COLUMN};
pub use self::uai::{parse_uai, serialize_uai};

use crate::error::{Error, Result};
use crate::factor::DiscreteFactor;
use crate::model::{TabularCpd, CPD_TOLERANCE};

/// Columns may be off by this much before a parser rejects them; anything
/// within it is renormalized.
pub const SUM_TOLERANCE: f64 = 1e-6;

/// Decimal exponent and the value rounded to six significant digits.
fn sig6(x: f64) -> (i32, f64) {
    let s = format!("{x:.5e}");
    let exp: i32 = s[s.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    (exp, s.parse().expect("float"))
}

/// `%g`-style rendering with six significant digits.
pub(crate) fn format_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let (exp, rounded) = sig6(x);
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let mut s = format!("{rounded:.decimals$}");
        if s.contains('.') {
            while s.ends_with('0') {
                s.pop();
            }
            if s.ends_with('.') {
                s.pop();
            }
        }
        s
    } else {
        let s = format!("{rounded:.5e}");
        let (mantissa, e) = s.split_once('e').expect("exponent");
        let mut m = mantissa.to_string();
        if m.contains('.') {
            while m.ends_with('0') {
                m.pop();
            }
            if m.ends_with('.') {
                m.pop();
            }
        }
        format!("{m}e{e}")
    }
}

/// Renders a probability column with six significant digits, nudging
/// individual entries by one unit in the last digit when that keeps the
/// printed column closer to summing to one.
pub(crate) fn format_column(values: &[f64]) -> Vec<String> {
    let mut rounded: Vec<f64> = Vec::with_capacity(values.len());
    let mut grid: Vec<f64> = Vec::with_capacity(values.len());
    for &v in values {
        if v == 0.0 {
            rounded.push(0.0);
            grid.push(0.0);
        } else {
            let (exp, r) = sig6(v);
            rounded.push(r);
            grid.push(10f64.powi(exp - 5));
        }
    }
    let target: f64 = values.iter().sum();
    for _ in 0..values.len() {
        let residual: f64 = rounded.iter().sum::<f64>() - target;
        let mut best: Option<(usize, f64)> = None;
        for i in 0..values.len() {
            if grid[i] == 0.0 {
                continue;
            }
            let moved = rounded[i] - residual.signum() * grid[i];
            if moved <= 0.0 || (moved - values[i]).abs() >= grid[i] {
                continue;
            }
            let gain = residual.abs() - (residual - (rounded[i] - moved)).abs();
            if gain > 1e-15 && best.is_none_or(|(_, g)| gain > g) {
                best = Some((i, gain));
            }
        }
        match best {
            Some((i, _)) => {
                rounded[i] -= residual.signum() * grid[i];
                rounded[i] = sig6(rounded[i]).1;
            }
            None => break,
        }
    }
    rounded.into_iter().map(format_g6).collect()
}

/// Checks each child column of a parsed table. Columns within
/// [`SUM_TOLERANCE`] are renormalized; the flag reports whether any column
/// was off by more than float noise.
pub(crate) fn normalize_columns(values: &mut [f64], child_card: usize) -> std::result::Result<bool, String> {
    let mut touched = false;
    for (j, col) in values.chunks_mut(child_card).enumerate() {
        if let Some(v) = col.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(format!("column {j} contains invalid probability {v}"));
        }
        let s: f64 = col.iter().sum();
        if (s - 1.0).abs() > SUM_TOLERANCE {
            return Err(format!("column {j} sums to {s}"));
        }
        if (s - 1.0).abs() > CPD_TOLERANCE {
            touched = true;
        }
        if (s - 1.0).abs() > 1e-12 {
            for v in col.iter_mut() {
                *v /= s;
            }
        }
    }
    Ok(touched)
}

/// CPD from a table laid out over `parents ++ [child]` in the given parent
/// order, stored with lexicographic parents.
pub(crate) fn cpd_from_table(
    child: &str,
    child_card: usize,
    parents: &[(String, usize)],
    values: Vec<f64>,
) -> Result<TabularCpd> {
    let mut scope: Vec<String> = parents.iter().map(|(p, _)| p.clone()).collect();
    let mut cards: Vec<usize> = parents.iter().map(|(_, c)| *c).collect();
    scope.push(child.to_string());
    cards.push(child_card);
    let factor = DiscreteFactor::new(scope, cards, values)?;
    let mut order: Vec<String> = parents.iter().map(|(p, _)| p.clone()).collect();
    order.sort();
    order.push(child.to_string());
    TabularCpd::from_factor(factor.reorder(&order)?)
}

pub(crate) fn semantic(line: usize, message: impl Into<String>) -> Error {
    Error::Semantic {
        line,
        message: message.into(),
    }
}

/// Reads a model file, choosing the parser by extension (`.uai` or BIF).
pub fn read_model(path: &std::path::Path) -> Result<crate::model::DiscreteBayesianNetwork> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    if is_uai(path) {
        parse_uai(&text)
    } else {
        parse_bif(&text)
    }
}

pub(crate) fn is_uai(path: &std::path::Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("uai"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_g6(0.5), "0.5");
        assert_eq!(format_g6(1.0), "1");
        assert_eq!(format_g6(0.123456789), "0.123457");
        assert_eq!(format_g6(1.0 / 3.0), "0.333333");
        assert_eq!(format_g6(2.5e-7), "2.5e-7");
        assert_eq!(format_g6(0.00012345678), "0.000123457");
        assert_eq!(format_g6(0.0), "0");
    }

    #[test]
    fn columns_print_close_to_one() {
        let col = [0.1234564, 0.2345674, 0.6419762];
        let printed: Vec<f64> = format_column(&col).iter().map(|s| s.parse().unwrap()).collect();
        let sum: f64 = printed.iter().sum();
        assert!((sum - 1.0).abs() <= 5e-7, "{sum}");
        for (a, b) in printed.iter().zip(&col) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
