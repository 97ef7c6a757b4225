//! Posterior queries on the asia network with variable elimination and
//! belief propagation.

use bnkit::catalog;
use bnkit::infer::{build_junction_tree, ve_query, EliminationHeuristic, Evidence};

fn main() -> bnkit::Result<()> {
    let bn = catalog::asia();
    let yes = |v: &str| bn.state_index(v, "yes");

    let evidence = Evidence::new()
        .observe("dysp", yes("dysp")?)
        .observe("smoke", yes("smoke")?);
    let lung = ve_query(&bn, &["lung"], &evidence, &EliminationHeuristic::MinFill)?;
    println!("P(lung | dysp=yes, smoke=yes) = {:?}", lung.values());

    let jt = build_junction_tree(&bn)?;
    println!("junction tree cliques: {:?}", jt.cliques());
    let calibrated = jt.calibrate(&evidence)?;
    println!("P(evidence) = {:.6}", calibrated.evidence_probability()?);
    println!(
        "P(bronc | evidence) via BP = {:?}",
        calibrated.query(&["bronc"])?.values()
    );

    // a noisy x-ray reading enters as a likelihood
    let soft = Evidence::new().likelihood("xray", vec![0.8, 0.2]);
    let tub = ve_query(&bn, &["tub"], &soft, &EliminationHeuristic::WeightedMinFill)?;
    println!("P(tub | soft xray) = {:?}", tub.values());
    Ok(())
}
