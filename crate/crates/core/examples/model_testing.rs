//! Scores a candidate graph and a fitted model against held-out data.

use bnkit::catalog;
use bnkit::fit::mle_fit;
use bnkit::learn::ScoreMethod;
use bnkit::metrics::{correlation_score_model, log_likelihood, structure_score, CorrelationScoreConfig};
use bnkit::simulate::forward_sample;

fn main() -> bnkit::Result<()> {
    let truth = catalog::sprinkler();
    let train = forward_sample(&truth, 5_000, 1)?;
    let test = forward_sample(&truth, 2_000, 2)?;

    let fitted = mle_fit(truth.dag(), &train)?;
    println!("held-out log-likelihood: {:.2}", log_likelihood(&fitted, &test)?);
    println!(
        "BIC of the true graph: {:.2}",
        structure_score(truth.dag(), &test, &ScoreMethod::Bic)?
    );

    let s = correlation_score_model(&fitted, &test, &CorrelationScoreConfig::default())?;
    println!(
        "dependence agreement: F1 {:.3} (tp {}, fp {}, fn {}, tn {})",
        s.f1, s.true_positives, s.false_positives, s.false_negatives, s.true_negatives
    );
    Ok(())
}
