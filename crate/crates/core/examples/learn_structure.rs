//! Recover the sprinkler graph from simulated data with PC, hill climbing
//! and MMHC, then a Chow-Liu tree.

use bnkit::catalog;
use bnkit::learn::{chow_liu, hill_climb, mmhc, pc_stable, CiMethod, EdgeWeight, HillClimbOptions, ScoreMethod};
use bnkit::simulate::forward_sample;

fn main() -> bnkit::Result<()> {
    let truth = catalog::sprinkler();
    let data = forward_sample(&truth, 10_000, 42)?;
    println!("true edges: {:?}", truth.dag().edges());

    let cpdag = pc_stable(&data, 0.01, None, &CiMethod::chi_squared())?;
    println!("pc directed:   {:?}", cpdag.directed_edges());
    println!("pc undirected: {:?}", cpdag.undirected_edges());

    let hc = hill_climb(&data, &ScoreMethod::Bic, &HillClimbOptions::default())?;
    println!("hc:   {:?}", hc.edges());

    let hybrid = mmhc(&data, 0.01, &CiMethod::g_test(), &ScoreMethod::BDeu { ess: 10.0 })?;
    println!("mmhc: {:?}", hybrid.edges());

    let tree = chow_liu(&data, &EdgeWeight::MutualInformation, Some("Cloudy"))?;
    println!("chow-liu: {:?}", tree.edges());
    Ok(())
}
