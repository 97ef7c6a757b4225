//! Maximum likelihood, Bayesian and EM parameter estimation.

use bnkit::fit::{bayes_fit, em_fit, mle_fit, EmConfig, PriorSpec};
use bnkit::io::parse_bif;
use bnkit::simulate::forward_sample;

const LATENT: &str = "
variable H { type discrete [ 2 ] { h0, h1 }; }
variable A { type discrete [ 2 ] { 0, 1 }; }
variable B { type discrete [ 2 ] { 0, 1 }; }
variable C { type discrete [ 2 ] { 0, 1 }; }
probability ( H ) { table 0.3, 0.7; }
probability ( A | H ) { table 0.9, 0.1, 0.2, 0.8; }
probability ( B | H ) { table 0.85, 0.15, 0.1, 0.9; }
probability ( C | H ) { table 0.7, 0.3, 0.25, 0.75; }
";

fn main() -> bnkit::Result<()> {
    let truth = parse_bif(LATENT)?;
    let full = forward_sample(&truth, 5_000, 7)?;

    let mle = mle_fit(truth.dag(), &full)?;
    println!("MLE P(A | H): {:?}", mle.cpd("A")?.factor().values());

    let bayes = bayes_fit(truth.dag(), &full, &PriorSpec::BDeu { ess: 5.0 })?;
    println!("BDeu P(A | H): {:?}", bayes.cpd("A")?.factor().values());

    // hide H and learn it back
    let observed = full.drop_latent_columns();
    let visible = bnkit::DataTable::from_columns(
        ["A", "B", "C"]
            .iter()
            .map(|v| observed.meta(v).cloned())
            .collect::<bnkit::Result<_>>()?,
        ["A", "B", "C"]
            .iter()
            .map(|v| observed.column(v).map(<[_]>::to_vec))
            .collect::<bnkit::Result<_>>()?,
    )?;
    let fit = em_fit(truth.dag(), &visible, &[truth.meta("H")?.clone()], &EmConfig::default())?;
    println!(
        "EM: {} iterations, converged: {}, final log-likelihood {:.3}",
        fit.iterations,
        fit.converged,
        fit.log_likelihoods.last().copied().unwrap_or(f64::NAN)
    );
    println!("EM P(H): {:?}", fit.model.cpd("H")?.factor().values());
    Ok(())
}
