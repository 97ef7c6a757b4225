//! Structure learning from data.

mod ci;
mod hill_climb;
mod mmhc;
mod pc;
mod score;
mod tree;

pub use ci::{ci_test, CiMethod, CiOracle, CiResult, CustomCiTest, DSeparationOracle, DataCiTest};
pub use hill_climb::{hill_climb, hill_climb_traced, HillClimbOptions, HillClimbResult, Move};
pub use mmhc::{mmhc, mmpc, mmpc_with_oracle};
pub(crate) use pc::combinations;
pub use pc::{pc_stable, pc_stable_with_oracle, PcResult};
pub use score::{local_score, structure_score, CustomScore, ScoreMethod};
pub use tree::{chow_liu, edge_weight, maximum_spanning_tree, tan, CustomEdgeWeight, EdgeWeight};
