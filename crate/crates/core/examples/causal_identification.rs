//! Adjustment sets, instruments and an adjusted causal effect.

use std::collections::BTreeSet;

use bnkit::causal::{
    causal_effect_discrete, do_query, instrumental_variables, minimal_adjustment_sets, CausalQuery, IvOptions,
};
use bnkit::{Dag, DiscreteBayesianNetwork, TabularCpd, VariableMeta};

fn main() -> bnkit::Result<()> {
    let dag = Dag::from_edges(
        ["U", "X", "Y", "Z", "W"],
        &[("W", "X"), ("W", "Y"), ("X", "Y"), ("Z", "X"), ("U", "X"), ("U", "Y")],
    )?;
    let q = CausalQuery::new(dag.clone(), "X", "Y", ["U"])?;
    println!("adjustment sets with U hidden: {:?}", minimal_adjustment_sets(&q)?);
    for iv in instrumental_variables(&q, &IvOptions::default())? {
        println!("instrument {} given {:?}", iv.instrument, iv.conditioning_set);
    }

    let q = CausalQuery::new(dag, "X", "Y", Vec::<String>::new())?;
    println!("adjustment sets with U observed: {:?}", minimal_adjustment_sets(&q)?);

    let metas = ["W", "X", "Y"]
        .map(|v| VariableMeta::with_cardinality(v, 2))
        .into_iter()
        .collect::<bnkit::Result<Vec<_>>>()?;
    let bn = DiscreteBayesianNetwork::new(
        metas,
        vec![
            TabularCpd::new("W", 2, &[], vec![0.4, 0.6])?,
            TabularCpd::new("X", 2, &[("W", 2)], vec![0.8, 0.2, 0.3, 0.7])?,
            TabularCpd::new(
                "Y",
                2,
                &[("W", 2), ("X", 2)],
                vec![0.9, 0.1, 0.6, 0.4, 0.5, 0.5, 0.2, 0.8],
            )?,
        ],
    )?;
    let effect = causal_effect_discrete(&bn, "X", "Y", &BTreeSet::from(["W".to_string()]))?;
    for (x, dist) in &effect.effects {
        println!(
            "P(Y | do(X={x})) = {:?}  oracle {:?}",
            dist.values(),
            do_query(&bn, "X", *x, "Y")?.values()
        );
    }
    Ok(())
}
