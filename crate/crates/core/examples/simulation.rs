//! Forward sampling, likelihood weighting under evidence, interventions and
//! approximate queries.

use bnkit::catalog;
use bnkit::infer::{ve_query, EliminationHeuristic, Evidence};
use bnkit::simulate::{approx_query, simulate, SimulationSpec};

fn main() -> bnkit::Result<()> {
    let bn = catalog::sprinkler();
    let wet = bn.state_index("WetGrass", "T")?;

    let mut spec = SimulationSpec::new(20_000, 1);
    spec.hard_evidence.push(("WetGrass".into(), wet));
    let weighted = simulate(&bn, &spec)?;
    println!(
        "{} weighted rows, total weight {:.1}",
        weighted.n_rows(),
        weighted.total_weight()
    );

    let mut spec = SimulationSpec::new(20_000, 1);
    spec.hard_intervention
        .push(("Sprinkler".into(), bn.state_index("Sprinkler", "T")?));
    let intervened = simulate(&bn, &spec)?;
    let rain = intervened.column("Rain")?;
    let share = rain.iter().filter(|s| **s == Some(1)).count() as f64 / rain.len() as f64;
    println!("P(Rain=T | do(Sprinkler=T)) ~ {share:.3}");

    let evidence = Evidence::new().observe("WetGrass", wet);
    let approx = approx_query(&bn, &["Rain"], &evidence, 100_000, 9)?;
    let exact = ve_query(&bn, &["Rain"], &evidence, &EliminationHeuristic::MinFill)?;
    println!(
        "P(Rain | WetGrass=T): approx {:?} (ESS {:.0}), exact {:?}",
        approx.distribution.values(),
        approx.effective_sample_size,
        exact.values()
    );
    Ok(())
}
