//! Sampling from a network, optionally under evidence and interventions, and
//! approximate inference built on it.
//!
//! Rows are generated in blocks of [`BLOCK_SIZE`]; block `b` draws from a
//! ChaCha8 generator seeded with the user seed on stream `b`, consuming one
//! uniform per variable per row in topological order. Output for a seed is
//! therefore identical on every platform.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::factor::DiscreteFactor;
use crate::infer::Evidence;
use crate::model::{DiscreteBayesianNetwork, TabularCpd};

pub const BLOCK_SIZE: usize = 4096;

/// How hard and virtual evidence shape the sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SamplingMode {
    /// Evidence variables are clamped and rows carry importance weights.
    #[default]
    LikelihoodWeighting,
    /// `n` unconstrained proposals; rows contradicting hard evidence are
    /// dropped and virtual evidence accepts a row with probability
    /// proportional to its likelihood. Surviving rows have weight 1.
    Rejection,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimulationSpec {
    pub n: usize,
    pub seed: u64,
    pub hard_evidence: Vec<(String, usize)>,
    pub virtual_evidence: Vec<(String, Vec<f64>)>,
    pub hard_intervention: Vec<(String, usize)>,
    /// Replacement mechanisms; each CPD must keep the variable's parent set.
    pub virtual_intervention: Vec<TabularCpd>,
    pub mode: SamplingMode,
}

impl SimulationSpec {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            ..Default::default()
        }
    }

    pub fn evidence(&self) -> Evidence {
        let mut ev = Evidence::new();
        for (v, s) in &self.hard_evidence {
            ev = ev.observe(v.clone(), *s);
        }
        for (v, l) in &self.virtual_evidence {
            ev = ev.likelihood(v.clone(), l.clone());
        }
        ev
    }

    /// Checks roles, states and replacement CPDs against `bn`.
    pub fn validate(&self, bn: &DiscreteBayesianNetwork) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("sample size must be at least 1".into()));
        }
        let mut seen = BTreeSet::new();
        let names = self
            .hard_evidence
            .iter()
            .map(|(v, _)| v.as_str())
            .chain(self.virtual_evidence.iter().map(|(v, _)| v.as_str()))
            .chain(self.hard_intervention.iter().map(|(v, _)| v.as_str()))
            .chain(self.virtual_intervention.iter().map(TabularCpd::child));
        for v in names {
            bn.meta(v)?;
            if !seen.insert(v) {
                return Err(Error::IncompatibleSpec(format!("`{v}` has more than one role")));
            }
        }
        self.evidence().validate(bn)?;
        for (v, s) in &self.hard_intervention {
            let card = bn.cardinality(v)?;
            if *s >= card {
                return Err(Error::StateOutOfRange {
                    variable: v.clone(),
                    state: *s,
                    cardinality: card,
                });
            }
        }
        for cpd in &self.virtual_intervention {
            let v = cpd.child();
            let declared: BTreeSet<&String> = cpd.parents().iter().collect();
            let graph: BTreeSet<&String> = bn.dag().parents(v).iter().collect();
            if declared != graph {
                return Err(Error::IncompatibleSpec(format!(
                    "replacement CPD for `{v}` must keep its parents"
                )));
            }
            for (name, &c) in cpd.factor().scope().iter().zip(cpd.factor().cards()) {
                let expected = bn.cardinality(name)?;
                if c != expected {
                    return Err(Error::CardinalityMismatch {
                        variable: name.clone(),
                        left: expected,
                        right: c,
                    });
                }
            }
        }
        Ok(())
    }
}

/// The model after applying the spec's interventions.
pub fn intervened_model(bn: &DiscreteBayesianNetwork, spec: &SimulationSpec) -> Result<DiscreteBayesianNetwork> {
    let mut model = bn.clone();
    for (v, s) in &spec.hard_intervention {
        model = model.intervene(v, *s)?;
    }
    for cpd in &spec.virtual_intervention {
        model = model.replace_cpd(cpd.clone())?;
    }
    Ok(model)
}

/// Inverse-CDF draw from a probability column.
fn draw(column: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, p) in column.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    // rounding left u above the final cumulative sum: take the last state with mass
    column.iter().rposition(|p| *p > 0.0).unwrap_or(column.len() - 1)
}

struct Node<'a> {
    cpd: &'a TabularCpd,
    parents: Vec<usize>,
    clamp: Option<usize>,
    likelihood: Option<&'a [f64]>,
}

/// Plain ancestral sampling; no weights are attached.
pub fn forward_sample(bn: &DiscreteBayesianNetwork, n: usize, seed: u64) -> Result<DataTable> {
    let spec = SimulationSpec::new(n, seed);
    Ok(simulate(bn, &spec)?.without_weights())
}

/// Samples `spec.n` rows (or, in rejection mode, what survives of `spec.n`
/// proposals). Columns follow the model's variable order; latent variables
/// are included and flagged.
pub fn simulate(bn: &DiscreteBayesianNetwork, spec: &SimulationSpec) -> Result<DataTable> {
    spec.validate(bn)?;
    let model = intervened_model(bn, spec)?;
    let vars: Vec<String> = model.variables().map(String::from).collect();
    let index = |v: &str| vars.iter().position(|x| x == v).expect("model variable");
    let order = model.topological_order();
    let rejection = spec.mode == SamplingMode::Rejection;
    let nodes: Vec<(usize, Node)> = order
        .iter()
        .map(|v| {
            let cpd = model.cpd(v).expect("model variable");
            let node = Node {
                cpd,
                parents: cpd.parents().iter().map(|p| index(p)).collect(),
                clamp: spec.hard_evidence.iter().find(|(x, _)| x == v).map(|(_, s)| *s),
                likelihood: spec
                    .virtual_evidence
                    .iter()
                    .find(|(x, _)| x == v)
                    .map(|(_, l)| l.as_slice()),
            };
            (index(v), node)
        })
        .collect();
    let max_likelihood: Vec<f64> = nodes
        .iter()
        .map(|(_, nd)| nd.likelihood.map_or(1.0, |l| l.iter().cloned().fold(0.0, f64::max)))
        .collect();

    let mut cells: Vec<Vec<Option<usize>>> = vec![Vec::with_capacity(spec.n); vars.len()];
    let mut weights = Vec::with_capacity(spec.n);
    let mut state = vec![0usize; vars.len()];
    let mut parent_states = Vec::new();
    for block in 0..spec.n.div_ceil(BLOCK_SIZE) {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(block as u64);
        let rows = BLOCK_SIZE.min(spec.n - block * BLOCK_SIZE);
        for _ in 0..rows {
            let mut w = 1.0;
            let mut accept = true;
            for (k, (i, nd)) in nodes.iter().enumerate() {
                parent_states.clear();
                parent_states.extend(nd.parents.iter().map(|&p| state[p]));
                let column = nd.cpd.column(nd.cpd.config_index(&parent_states));
                let u: f64 = rng.gen();
                let s = match (nd.clamp, rejection) {
                    (Some(obs), false) => {
                        w *= column[obs];
                        obs
                    }
                    (Some(obs), true) => {
                        let s = draw(column, u);
                        accept &= s == obs;
                        s
                    }
                    (None, _) => draw(column, u),
                };
                if let Some(l) = nd.likelihood {
                    if rejection {
                        // acceptance reads the draw's relative position inside its state's interval
                        let lo: f64 = column[..s].iter().sum();
                        let frac = if column[s] > 0.0 { (u - lo) / column[s] } else { 0.0 };
                        accept &= frac.clamp(0.0, 1.0) < l[s] / max_likelihood[k];
                    } else {
                        w *= l[s];
                    }
                }
                state[*i] = s;
            }
            if rejection && !accept {
                continue;
            }
            for (c, s) in cells.iter_mut().zip(&state) {
                c.push(Some(*s));
            }
            weights.push(w);
        }
    }
    let metas = vars
        .iter()
        .map(|v| model.meta(v).cloned())
        .collect::<Result<Vec<_>>>()?;
    let mut table = DataTable::from_columns(metas, cells)?.with_weights(weights)?;
    for l in model.latents() {
        table = table.mark_latent(l)?;
    }
    Ok(table)
}

/// Approximate posterior with its effective sample size `(Σw)² / Σw²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxResult {
    pub distribution: DiscreteFactor,
    pub effective_sample_size: f64,
}

/// Likelihood-weighted estimate of P(query | evidence) from `n` samples.
pub fn approx_query<S: AsRef<str>>(
    bn: &DiscreteBayesianNetwork,
    query: &[S],
    evidence: &Evidence,
    n: usize,
    seed: u64,
) -> Result<ApproxResult> {
    if query.is_empty() {
        return Err(Error::InvalidArgument("empty query".into()));
    }
    for q in query {
        bn.meta(q.as_ref())?;
    }
    let spec = SimulationSpec {
        n,
        seed,
        hard_evidence: evidence.hard().to_vec(),
        virtual_evidence: evidence.virtual_evidence().to_vec(),
        ..Default::default()
    };
    let sample = simulate(bn, &spec)?;
    let w = sample.weights().unwrap_or(&[]);
    let total: f64 = w.iter().sum();
    let sq: f64 = w.iter().map(|x| x * x).sum();
    if total <= 0.0 {
        return Err(Error::ImpossibleEvidence);
    }
    let distribution = sample.contingency(query)?.normalize()?.canonical();
    Ok(ApproxResult {
        distribution,
        effective_sample_size: total * total / sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VariableMeta;

    fn chain() -> DiscreteBayesianNetwork {
        DiscreteBayesianNetwork::new(
            vec![
                VariableMeta::with_cardinality("A", 2).unwrap(),
                VariableMeta::with_cardinality("B", 2).unwrap(),
            ],
            vec![
                TabularCpd::new("A", 2, &[], vec![0.6, 0.4]).unwrap(),
                TabularCpd::new("B", 2, &[("A", 2)], vec![0.7, 0.3, 0.2, 0.8]).unwrap(),
            ],
        )
        .unwrap()
    }

    fn weighted_freq(t: &DataTable, var: &str, state: usize) -> f64 {
        let f = t.contingency(&[var]).unwrap();
        f.values()[state] / f.total()
    }

    #[test]
    fn root_frequency_and_determinism() {
        let bn = chain();
        let t = forward_sample(&bn, 100_000, 1).unwrap();
        let f = weighted_freq(&t, "A", 0);
        assert!((0.59..=0.61).contains(&f), "{f}");
        assert!(t.weights().is_none());
        assert_eq!(t, forward_sample(&bn, 100_000, 1).unwrap());
        assert_ne!(t, forward_sample(&bn, 100_000, 2).unwrap());
        let s = simulate(&bn, &SimulationSpec::new(5_000, 3)).unwrap();
        assert!(s.weights().unwrap().iter().all(|w| *w == 1.0));
    }

    #[test]
    fn point_mass_gives_constant_column() {
        let bn = chain().replace_cpd(TabularCpd::point_mass("A", 2, 1).unwrap()).unwrap();
        let t = forward_sample(&bn, 1_000, 0).unwrap();
        assert!(t.column("A").unwrap().iter().all(|c| *c == Some(1)));
    }

    #[test]
    fn hard_intervention_spares_ancestors() {
        let spec = SimulationSpec {
            hard_intervention: vec![("B".into(), 1)],
            ..SimulationSpec::new(100_000, 4)
        };
        let t = simulate(&chain(), &spec).unwrap();
        assert!((weighted_freq(&t, "A", 0) - 0.6).abs() < 0.01);
        assert!(t.column("B").unwrap().iter().all(|c| *c == Some(1)));
    }

    #[test]
    fn hard_evidence_by_weighting_and_rejection() {
        for mode in [SamplingMode::LikelihoodWeighting, SamplingMode::Rejection] {
            let spec = SimulationSpec {
                hard_evidence: vec![("B".into(), 0)],
                mode,
                ..SimulationSpec::new(100_000, 5)
            };
            let t = simulate(&chain(), &spec).unwrap();
            assert!((weighted_freq(&t, "A", 0) - 0.84).abs() < 0.01, "{mode:?}");
            assert!(t.column("B").unwrap().iter().all(|c| *c == Some(0)));
        }
    }

    #[test]
    fn virtual_evidence_by_weighting_and_rejection() {
        // likelihood [0.9, 0.3] on B: P(A=0 | ve) = 0.6(0.63+0.09) / (0.6*0.72 + 0.4*0.42)
        let expect = 0.6 * 0.72 / (0.6 * 0.72 + 0.4 * 0.42);
        for mode in [SamplingMode::LikelihoodWeighting, SamplingMode::Rejection] {
            let spec = SimulationSpec {
                virtual_evidence: vec![("B".into(), vec![0.9, 0.3])],
                mode,
                ..SimulationSpec::new(100_000, 6)
            };
            let t = simulate(&chain(), &spec).unwrap();
            assert!((weighted_freq(&t, "A", 0) - expect).abs() < 0.01, "{mode:?}");
        }
    }

    #[test]
    fn virtual_intervention_replaces_mechanism() {
        let spec = SimulationSpec {
            virtual_intervention: vec![TabularCpd::uniform("B", 2, &[("A", 2)]).unwrap()],
            ..SimulationSpec::new(100_000, 7)
        };
        let t = simulate(&chain(), &spec).unwrap();
        assert!((weighted_freq(&t, "B", 0) - 0.5).abs() < 0.01);
        let bad = SimulationSpec {
            virtual_intervention: vec![TabularCpd::uniform("B", 2, &[]).unwrap()],
            ..SimulationSpec::new(10, 7)
        };
        assert!(matches!(simulate(&chain(), &bad), Err(Error::IncompatibleSpec(_))));
        let bad = SimulationSpec {
            virtual_intervention: vec![TabularCpd::uniform("B", 3, &[("A", 2)]).unwrap()],
            ..SimulationSpec::new(10, 7)
        };
        assert!(matches!(
            simulate(&chain(), &bad),
            Err(Error::CardinalityMismatch { .. })
        ));
    }

    #[test]
    fn conflicting_roles() {
        let spec = SimulationSpec {
            hard_evidence: vec![("B".into(), 0)],
            hard_intervention: vec![("B".into(), 1)],
            ..SimulationSpec::new(10, 0)
        };
        assert!(matches!(simulate(&chain(), &spec), Err(Error::IncompatibleSpec(_))));
        assert!(simulate(&chain(), &SimulationSpec::new(0, 0)).is_err());
    }

    #[test]
    fn approximate_queries() {
        let bn = chain();
        let r = approx_query(&bn, &["B"], &Evidence::new(), 100_000, 8).unwrap();
        assert!((r.distribution.values()[0] - 0.5).abs() < 0.01);
        assert!((r.effective_sample_size - 100_000.0).abs() < 1e-6);
        let r = approx_query(&bn, &["A"], &Evidence::new().observe("B", 0), 100_000, 9).unwrap();
        assert!((r.distribution.values()[0] - 0.84).abs() < 0.02);
        assert!(r.effective_sample_size < 100_000.0);
        let r = approx_query(&bn, &["B"], &Evidence::new().observe("B", 1), 1_000, 9).unwrap();
        assert_eq!(r.distribution.values(), &[0.0, 1.0]);
    }

    #[test]
    fn impossible_evidence() {
        let bn = chain().replace_cpd(TabularCpd::point_mass("A", 2, 0).unwrap()).unwrap();
        let bn = bn
            .replace_cpd(TabularCpd::new("B", 2, &[("A", 2)], vec![1.0, 0.0, 0.5, 0.5]).unwrap())
            .unwrap();
        assert!(matches!(
            approx_query(&bn, &["A"], &Evidence::new().observe("B", 1), 1_000, 0),
            Err(Error::ImpossibleEvidence)
        ));
    }
}
