//! Macro-F1, the majority baseline and a per-dataset results table.

use evkit::metrics::{grouped_report, macro_f1, macro_f1_with, majority_baseline, AbsentClassPolicy, GroupKey, ResultsTable};
use evkit::scoring::ScoredInstance;
use evkit::{Category, Label};

fn row(id: usize, dataset: &str, gold: Label, predicted: Label) -> ScoredInstance {
    ScoredInstance {
        id: format!("{dataset}-{id}"),
        dataset: dataset.into(),
        category: Category::Nli,
        reasoning_type: None,
        gold,
        predicted: Some(predicted),
        score: None,
        unmatched_generation: false,
        error: None,
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let golds: Vec<Label> = (0..1000).map(|i| if i % 2 == 0 { Label::Support } else { Label::NotSupport }).collect();
    println!("majority baseline, balanced set: {:.2}", majority_baseline(&golds)?);
    let constant = vec![Label::Support; golds.len()];
    println!(
        "same predictor averaged over both classes: {:.4}",
        macro_f1_with(&constant, &golds, AbsentClassPolicy::ZeroUnionClasses)?
    );
    println!("all-support golds, all-support predictions: {}", macro_f1(&constant, &constant)?);

    let mut rows = Vec::new();
    for i in 0..40 {
        let gold = if i % 2 == 0 { Label::Support } else { Label::NotSupport };
        let flip = if gold == Label::Support { Label::NotSupport } else { Label::Support };
        rows.push(row(i, "anli", gold, if i % 5 == 0 { flip } else { gold }));
        rows.push(row(i, "strategyqa", gold, if i % 3 == 0 { flip } else { gold }));
    }
    let sys_a = grouped_report(&rows, GroupKey::Dataset);
    for r in rows.iter_mut() {
        r.predicted = Some(Label::Support);
    }
    let sys_b = grouped_report(&rows, GroupKey::Dataset);

    let mut table = ResultsTable::new();
    table.add_system("verifier", &sys_a);
    table.add_system("always-yes", &sys_b);
    print!("\n{}", table.render());
    Ok(())
}
