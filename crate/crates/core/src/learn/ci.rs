//! Conditional independence tests from the Cressie-Read power-divergence family.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::graph::{d_separated, Dag};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// User-supplied test: `(data, x, y, conditioning set) -> result`.
pub type CustomCiTest = Arc<dyn Fn(&DataTable, &str, &str, &[String]) -> Result<CiResult> + Send + Sync>;

#[derive(Clone)]
pub enum CiMethod {
    /// Power divergence with exponent `lambda`; 1 is Pearson's chi-squared,
    /// 0 the G-test (log-likelihood ratio), -1 the modified G-test.
    PowerDivergence {
        lambda: f64,
    },
    Custom(CustomCiTest),
}

impl CiMethod {
    pub fn chi_squared() -> Self {
        CiMethod::PowerDivergence { lambda: 1.0 }
    }

    pub fn g_test() -> Self {
        CiMethod::PowerDivergence { lambda: 0.0 }
    }

    /// The Cressie-Read recommended exponent 2/3.
    pub fn cressie_read() -> Self {
        CiMethod::PowerDivergence { lambda: 2.0 / 3.0 }
    }
}

impl Default for CiMethod {
    fn default() -> Self {
        Self::chi_squared()
    }
}

impl fmt::Debug for CiMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CiMethod::PowerDivergence { lambda } => f.debug_struct("PowerDivergence").field("lambda", lambda).finish(),
            CiMethod::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Contribution of one cell to the (unscaled) divergence sum.
fn divergence_term(observed: f64, expected: f64, lambda: f64) -> f64 {
    if lambda.abs() < 1e-12 {
        if observed > 0.0 {
            observed * (observed / expected).ln()
        } else {
            0.0
        }
    } else if (lambda + 1.0).abs() < 1e-12 {
        if observed > 0.0 {
            expected * (expected / observed).ln()
        } else {
            f64::INFINITY
        }
    } else if observed == 0.0 {
        if lambda > -1.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        observed * ((observed / expected).powf(lambda) - 1.0)
    }
}

fn scale(lambda: f64) -> f64 {
    if lambda.abs() < 1e-12 || (lambda + 1.0).abs() < 1e-12 {
        2.0
    } else {
        2.0 / (lambda * (lambda + 1.0))
    }
}

/// Tests `x ⊥ y | z` on the weighted contingency table stratified by `z`.
///
/// Rows missing any tested column are dropped. Strata with zero weight are
/// skipped; within a stratum, cells with zero expected count are dropped and
/// the degrees of freedom use only the nonempty rows and columns.
pub fn ci_test<S: AsRef<str>>(data: &DataTable, x: &str, y: &str, z: &[S], method: &CiMethod) -> Result<CiResult> {
    let z: Vec<String> = z.iter().map(|s| s.as_ref().to_string()).collect();
    if x == y {
        return Err(Error::InvalidArgument("x and y must differ".into()));
    }
    if z.iter().any(|v| v == x || v == y) {
        return Err(Error::InvalidArgument(
            "conditioning set must not contain x or y".into(),
        ));
    }
    let lambda = match method {
        CiMethod::Custom(f) => {
            for v in [x, y].into_iter().chain(z.iter().map(String::as_str)) {
                data.column_index(v)?;
            }
            let r = f(data, x, y, &z)?;
            if !(0.0..=1.0).contains(&r.p_value) {
                return Err(Error::InvalidArgument(format!(
                    "custom test returned p-value {}",
                    r.p_value
                )));
            }
            return Ok(r);
        }
        CiMethod::PowerDivergence { lambda } => *lambda,
    };
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument("power-divergence lambda must be finite".into()));
    }
    let mut vars: Vec<&str> = z.iter().map(String::as_str).collect();
    vars.push(x);
    vars.push(y);
    let table = data.contingency(&vars)?;
    let cards = table.cards();
    let rx = cards[cards.len() - 2];
    let ry = cards[cards.len() - 1];

    let mut sum = 0.0;
    let mut dof = 0usize;
    let mut any = false;
    for stratum in table.values().chunks(rx * ry) {
        let n: f64 = stratum.iter().sum();
        if n <= 0.0 {
            continue;
        }
        any = true;
        let rows: Vec<f64> = (0..rx).map(|i| stratum[i * ry..(i + 1) * ry].iter().sum()).collect();
        let cols: Vec<f64> = (0..ry).map(|j| (0..rx).map(|i| stratum[i * ry + j]).sum()).collect();
        let nr = rows.iter().filter(|&&r| r > 0.0).count();
        let nc = cols.iter().filter(|&&c| c > 0.0).count();
        dof += (nr.saturating_sub(1)) * (nc.saturating_sub(1));
        for i in 0..rx {
            for j in 0..ry {
                let e = rows[i] * cols[j] / n;
                if e > 0.0 {
                    sum += divergence_term(stratum[i * ry + j], e, lambda);
                }
            }
        }
    }
    if !any {
        return Err(Error::InsufficientData(format!(
            "no complete rows to test `{x}` against `{y}`"
        )));
    }
    let statistic = (scale(lambda) * sum).max(0.0);
    let p_value = if dof == 0 {
        1.0
    } else if statistic.is_infinite() {
        0.0
    } else {
        ChiSquared::new(dof as f64)
            .expect("positive dof")
            .sf(statistic)
            .clamp(0.0, 1.0)
    };
    Ok(CiResult {
        statistic,
        dof,
        p_value,
    })
}

/// Source of independence judgements for constraint-based learners. A
/// returned value at or above the significance level means "independent".
pub trait CiOracle {
    fn p_value(&self, x: &str, y: &str, z: &[String]) -> Result<f64>;
}

/// Statistical test on a dataset.
pub struct DataCiTest<'a> {
    pub data: &'a DataTable,
    pub method: CiMethod,
}

impl CiOracle for DataCiTest<'_> {
    fn p_value(&self, x: &str, y: &str, z: &[String]) -> Result<f64> {
        Ok(ci_test(self.data, x, y, z, &self.method)?.p_value)
    }
}

/// Perfect test read off a known graph: 1 when d-separated, 0 otherwise.
pub struct DSeparationOracle<'a> {
    pub dag: &'a Dag,
}

impl CiOracle for DSeparationOracle<'_> {
    fn p_value(&self, x: &str, y: &str, z: &[String]) -> Result<f64> {
        let xs = BTreeSet::from([x.to_string()]);
        let ys = BTreeSet::from([y.to_string()]);
        let zs: BTreeSet<String> = z.iter().cloned().collect();
        Ok(if d_separated(self.dag, &xs, &ys, &zs)? {
            1.0
        } else {
            0.0
        })
    }
}
