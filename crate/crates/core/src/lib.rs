//! Discrete Bayesian networks end to end: learn a structure from data, fit
//! its parameters, query it exactly or by simulation, identify causal
//! effects, score it against data, and move it between BIF and UAI files.

pub mod catalog;
pub mod causal;
pub mod cli;
pub mod data;
pub mod error;
pub mod factor;
pub mod fit;
pub mod graph;
pub mod infer;
pub mod io;
pub mod learn;
pub mod metrics;
pub mod model;
pub mod simulate;

pub use data::DataTable;
pub use error::{Error, ParseDiagnostic, Result, Severity};
pub use factor::DiscreteFactor;
pub use graph::{d_separated, moralize, pdag_to_dag, topological_order, Dag, Pdag, UndirectedGraph};
pub use model::{joint_distribution, DiscreteBayesianNetwork, TabularCpd, VariableMeta};
