//! Agreement between annotators who judged each instance on a 5-point
//! support scale.

use evkit::metrics::{agreement_summary, fleiss_kappa, pairwise_agreement, AgreementLabels, AnnotationRecord, Judgment};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = [
        ("i1", [Judgment::Support, Judgment::Support, Judgment::Support]),
        ("i2", [Judgment::Support, Judgment::PartiallySupport, Judgment::Irrelevant]),
        ("i3", [Judgment::Contradict, Judgment::PartiallyContradict, Judgment::Contradict]),
        ("i4", [Judgment::PartiallySupport, Judgment::Contradict, Judgment::Support]),
    ];
    let mut records = Vec::new();
    for (instance, judgments) in &table {
        for (r, j) in judgments.iter().enumerate() {
            records.push(AnnotationRecord {
                instance_id: instance.to_string(),
                rater_id: format!("rater{r}"),
                judgment: *j,
            });
        }
    }
    let summary = agreement_summary(&records, AgreementLabels::Collapsed)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);

    println!("\npairwise on [A, A, B]: {:?}", pairwise_agreement(&[vec!['A', 'A', 'B']]).ratio);
    let counts = vec![vec![3, 0], vec![0, 3], vec![2, 1]];
    println!("kappa on a small count matrix: {:.4}", fleiss_kappa(&counts)?);
    Ok(())
}
