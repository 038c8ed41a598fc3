//! Train the hashed-feature scorer with the classification objective and
//! with the margin-ranking objective, then compare how each scores
//! distractors of graded closeness.
//!
//! The last part repeats the ranking run with the hinge sign flipped, which
//! pushes the weaker hypothesis up instead of down.

use evkit::objectives::synthetic::{attribute_instances, graded_instances, graded_items, ranking_pairs, GRADE_KEY};
use evkit::objectives::{decision_margin_stats, train, Objective, RankingOrientation, TrainData, TrainingConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = 1;
    let cls_train = attribute_instances(2000, seed, "train");
    let cls_dev = attribute_instances(500, seed + 100, "dev");
    let rank_train = ranking_pairs(2000, seed);
    let rank_dev = ranking_pairs(500, seed + 100);
    let graded = graded_instances(&graded_items(300, seed + 200, "graded"));

    let cls = train(
        TrainData::Instances(&cls_train),
        TrainData::Instances(&cls_dev),
        &TrainingConfig::desk_scale(Objective::Classification),
    )?;
    println!("classification: dev macro-F1 {:.3} at step {}", cls.best.dev_metric, cls.best.step);

    let rank_cfg = TrainingConfig::desk_scale(Objective::Ranking);
    let rank = train(TrainData::Pairs(&rank_train), TrainData::Pairs(&rank_dev), &rank_cfg)?;
    println!("ranking: dev pair accuracy {:.3} at step {}", rank.best.dev_metric, rank.best.step);

    println!("\nmean score by grade (1.00 is the correct option):");
    println!("{:<8} {:>14} {:>9}", "grade", "classification", "ranking");
    let cls_scorer = cls.best.scorer();
    let rank_scorer = rank.best.scorer();
    for grade in ["1.00", "0.75", "0.50", "0.25"] {
        let rows: Vec<_> = graded.iter().filter(|r| r.source.get(GRADE_KEY).map(String::as_str) == Some(grade)).collect();
        let mean = |f: &dyn Fn(&str, &str) -> f64| rows.iter().map(|r| f(&r.premise, &r.hypothesis)).sum::<f64>() / rows.len() as f64;
        println!(
            "{grade:<8} {:>14.3} {:>9.3}",
            mean(&|p, h| cls_scorer.score(p, h)),
            mean(&|p, h| rank_scorer.score(p, h))
        );
    }
    for (name, scorer) in [("classification", &cls_scorer), ("ranking", &rank_scorer)] {
        let stats = decision_margin_stats(scorer, &graded);
        println!(
            "{name}: incorrect-option score variance {:.4}, spread of grade means {:.4}",
            stats.variance.unwrap_or(0.0),
            stats.grade_mean_variance.unwrap_or(0.0)
        );
    }

    let literal = TrainingConfig {
        orientation: RankingOrientation::PaperLiteral,
        ..rank_cfg
    };
    let flipped = train(TrainData::Pairs(&rank_train), TrainData::Pairs(&rank_dev), &literal)?;
    let final_metric = flipped.log.last().map(|l| l.dev_metric).unwrap_or(0.0);
    println!("\nflipped hinge sign: final dev pair accuracy {final_metric:.3}");
    Ok(())
}
