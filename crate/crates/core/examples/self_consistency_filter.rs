//! Filter sampled chain-of-thought rationales by how well each one supports
//! its own answer, then vote. Uses the bundled adversarial suite, where a
//! wrong answer wins the plain vote on some questions, and an oracle
//! verifier that knows which rationales are consistent.

use evkit::dataset::RuleConverter;
use evkit::scoring::{PromptTemplate, Scorer};
use evkit::selfconsistency::fixtures::AdversarialSuite;
use evkit::selfconsistency::{group_samples, run_pipeline, FilterConfig};
use evkit::ScoringConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let suite = AdversarialSuite::generate(0);
    let template = PromptTemplate::default_template();
    let converter = RuleConverter;
    let oracle = suite.oracle_backend(&template, &converter);
    let config = ScoringConfig::default();
    let scorer = Scorer::new(&oracle, &template, &config);

    let groups = group_samples(suite.samples())?;
    let report = run_pipeline(groups, &scorer, &converter, &FilterConfig::default(), 8)?;
    println!(
        "{} questions, k = {}: vanilla {:.2}, filtered {:.2}",
        report.questions, report.k, report.vanilla_accuracy, report.filtered_accuracy
    );
    for t in report.traces.iter().filter(|t| t.filtered_correct() && !t.vanilla_correct()) {
        println!(
            "  {}: vote {:?} -> {:?} (gold {:?})",
            t.question_id, t.vanilla_answer, t.filtered_answer, t.gold_answer
        );
    }
    println!("backend calls: {}", oracle.calls());
    Ok(())
}
