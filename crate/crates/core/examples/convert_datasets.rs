//! Turn NLI, multiple-choice QA and rationale records into binary
//! entailment instances, then mine ranking pairs from the QA options.

use evkit::dataset::{
    convert_nli, convert_qa, convert_rationale, mine_negatives_from_options, NliItem, NliLabel, QaItem,
    RationaleItem, RuleConverter,
};
use evkit::Label;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let converter = RuleConverter;

    let nli = NliItem {
        id: None,
        dataset: Some("toy-nli".into()),
        premise: "A man is playing a guitar on stage.".into(),
        hypothesis: "A person is making music.".into(),
        label: NliLabel::Entail,
    };
    let inst = convert_nli(&nli, "nli-0")?;
    println!("{:<10} {:<12} {}", inst.id, inst.gold.as_str(), inst.hypothesis);

    let qa = QaItem {
        id: Some("q1".into()),
        dataset: Some("toy-qa".into()),
        context: "Mia packed an umbrella because the forecast said rain all afternoon.".into(),
        question: "Why did Mia pack an umbrella?".into(),
        choices: vec![
            "rain was forecast".into(),
            "she was going to the beach".into(),
            "it was a gift".into(),
        ],
        correct_index: 0,
    };
    for inst in convert_qa(&qa, "qa-0", &converter)? {
        println!("{:<10} {:<12} {}", inst.id, inst.gold.as_str(), inst.hypothesis);
    }

    let rationale = RationaleItem {
        id: Some("r1".into()),
        dataset: Some("toy-rationale".into()),
        hypothesis: None,
        question: Some("Where do fish live?".into()),
        answer: Some("in water".into()),
        rationale: "Fish breathe through gills, which extract oxygen from water.".into(),
        gold: Label::Support,
        explains: None,
    };
    if let Some(inst) = convert_rationale(&rationale, "rat-0", &converter)? {
        println!("{:<10} {:<12} {}", inst.id, inst.gold.as_str(), inst.hypothesis);
    }

    println!("\nranking pairs mined from the QA options:");
    for pair in mine_negatives_from_options(&qa, &converter)? {
        println!("  {}  >  {}", pair.strong_hypothesis, pair.weak_hypothesis);
    }
    Ok(())
}
