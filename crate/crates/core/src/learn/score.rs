//! Decomposable structure scores. Higher is better for every method.

use std::fmt;
use std::sync::Arc;

use statrs::function::gamma::ln_gamma;

use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::graph::Dag;

/// User-supplied local score: `(child, parents, data) -> score`.
pub type CustomScore = Arc<dyn Fn(&str, &[String], &DataTable) -> Result<f64> + Send + Sync>;

#[derive(Clone)]
pub enum ScoreMethod {
    /// Cooper-Herskovits marginal likelihood with all-ones Dirichlet prior.
    K2,
    /// Bayesian Dirichlet equivalent uniform with the given equivalent sample size.
    BDeu {
        ess: f64,
    },
    /// BDeu with the prior spread only over parent configurations seen in the data.
    BDs {
        ess: f64,
    },
    Bic,
    Aic,
    Custom(CustomScore),
}

impl fmt::Debug for ScoreMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreMethod::K2 => f.write_str("K2"),
            ScoreMethod::BDeu { ess } => write!(f, "BDeu {{ ess: {ess} }}"),
            ScoreMethod::BDs { ess } => write!(f, "BDs {{ ess: {ess} }}"),
            ScoreMethod::Bic => f.write_str("Bic"),
            ScoreMethod::Aic => f.write_str("Aic"),
            ScoreMethod::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Σ_j [lnΓ(α_j) − lnΓ(α_j + N_j) + Σ_k (lnΓ(α_jk + N_jk) − lnΓ(α_jk))]
/// over the parent configurations `j` for which `alpha(j)` is `Some`.
fn dirichlet_marginal(counts: &[f64], r: usize, alpha: impl Fn(f64) -> Option<f64>) -> f64 {
    let mut total = 0.0;
    for col in counts.chunks(r) {
        let nj: f64 = col.iter().sum();
        let Some(a) = alpha(nj) else { continue };
        total += ln_gamma(a * r as f64) - ln_gamma(a * r as f64 + nj);
        for &n in col {
            total += ln_gamma(a + n) - ln_gamma(a);
        }
    }
    total
}

fn log_likelihood(counts: &[f64], r: usize) -> f64 {
    let mut ll = 0.0;
    for col in counts.chunks(r) {
        let nj: f64 = col.iter().sum();
        for &n in col {
            if n > 0.0 {
                ll += n * (n / nj).ln();
            }
        }
    }
    ll
}

/// Score of one family `child | parents` on the rows complete for it.
pub fn local_score<S: AsRef<str>>(child: &str, parents: &[S], data: &DataTable, method: &ScoreMethod) -> Result<f64> {
    let parents: Vec<String> = parents.iter().map(|p| p.as_ref().to_string()).collect();
    if parents.iter().any(|p| p == child) {
        return Err(Error::InvalidArgument(format!("`{child}` listed as its own parent")));
    }
    if let ScoreMethod::Custom(f) = method {
        data.column_index(child)?;
        for p in &parents {
            data.column_index(p)?;
        }
        return f(child, &parents, data);
    }
    let mut vars = parents.clone();
    vars.push(child.to_string());
    let table = data.contingency(&vars)?;
    let counts = table.values();
    let r = *table.cards().last().expect("child");
    let q = counts.len() / r;
    let n: f64 = counts.iter().sum();
    if n <= 0.0 {
        return Err(Error::InsufficientData(format!("no complete rows for `{child}`")));
    }
    let free = ((r - 1) * q) as f64;
    Ok(match method {
        ScoreMethod::Bic => log_likelihood(counts, r) - 0.5 * n.ln() * free,
        ScoreMethod::Aic => log_likelihood(counts, r) - free,
        ScoreMethod::K2 => dirichlet_marginal(counts, r, |_| Some(1.0)),
        ScoreMethod::BDeu { ess } => {
            check_ess(*ess)?;
            let a = ess / (q * r) as f64;
            dirichlet_marginal(counts, r, |_| Some(a))
        }
        ScoreMethod::BDs { ess } => {
            check_ess(*ess)?;
            let observed = counts.chunks(r).filter(|c| c.iter().sum::<f64>() > 0.0).count();
            let a = ess / (observed * r) as f64;
            dirichlet_marginal(counts, r, |nj| (nj > 0.0).then_some(a))
        }
        ScoreMethod::Custom(_) => unreachable!(),
    })
}

fn check_ess(ess: f64) -> Result<()> {
    if ess > 0.0 && ess.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "equivalent sample size must be positive, got {ess}"
        )))
    }
}

/// Sum of local scores over every node of `dag`, parents taken in
/// lexicographic order.
pub fn structure_score(dag: &Dag, data: &DataTable, method: &ScoreMethod) -> Result<f64> {
    let mut total = 0.0;
    for n in dag.nodes() {
        let ps: Vec<&String> = dag.parents(n).iter().collect();
        total += local_score(n, &ps, data, method)?;
    }
    Ok(total)
}
