use evkit::cli::{overlap, split_rendered};
use evkit::dataset::io::parse_records;
use evkit::metrics::{fleiss_kappa, macro_f1, pairwise_agreement};
use evkit::objectives::{ranking_loss, RankingOrientation};
use evkit::scoring::{entailment_score, PromptTemplate};
use evkit::selfconsistency::{filter_top_k, majority_vote, TieBreak};
use evkit::{Category, EvInstance, Label, ScoringConfig};
use proptest::prelude::*;

fn label() -> impl Strategy<Value = Label> {
    prop_oneof![Just(Label::Support), Just(Label::NotSupport)]
}

proptest! {
    #[test]
    fn score_is_a_probability(y in 0.0f64..1.0, n in 0.0f64..1.0) {
        let cfg = ScoringConfig::default();
        let s = entailment_score(y, n, &cfg).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
        let t = entailment_score(n, y, &cfg).unwrap();
        prop_assert!((s + t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn macro_f1_is_bounded_and_order_free(pairs in prop::collection::vec((label(), label()), 1..60), rot in 0usize..60) {
        let (p, g): (Vec<Label>, Vec<Label>) = pairs.iter().cloned().unzip();
        let f = macro_f1(&p, &g).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        let r = rot % pairs.len();
        let (mut p2, mut g2) = (p.clone(), g.clone());
        p2.rotate_left(r);
        g2.rotate_left(r);
        prop_assert_eq!(f, macro_f1(&p2, &g2).unwrap());
        prop_assert_eq!(macro_f1(&g, &g).unwrap(), 1.0);
    }

    #[test]
    fn top_k_partitions_indices(scores in prop::collection::vec(prop::option::of(0.0f64..1.0), 0..50), k in 1usize..60) {
        let top = filter_top_k(&scores, k);
        let mut all: Vec<usize> = top.kept.iter().chain(&top.discarded).chain(&top.unscored).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..scores.len()).collect::<Vec<_>>());
        let scored = scores.iter().filter(|s| s.is_some()).count();
        prop_assert_eq!(top.kept.len(), k.min(scored));
        for w in top.kept.windows(2) {
            prop_assert!(scores[w[0]].unwrap() >= scores[w[1]].unwrap());
        }
        if let (Some(&last), Some(&first_out)) = (top.kept.last(), top.discarded.first()) {
            prop_assert!(scores[last].unwrap() >= scores[first_out].unwrap());
        }
    }

    #[test]
    fn vote_returns_a_plurality_answer(votes in prop::collection::vec((0u8..4, 0.0f64..1.0), 1..30)) {
        let answers: Vec<String> = votes.iter().map(|(a, _)| format!("a{a}")).collect();
        let refs: Vec<&str> = answers.iter().map(String::as_str).collect();
        let scores: Vec<f64> = votes.iter().map(|v| v.1).collect();
        for tb in [TieBreak::ScoreSum, TieBreak::Lexicographic] {
            let winner = majority_vote(&refs, &scores, tb).unwrap();
            let count = |x: &str| refs.iter().filter(|r| **r == x).count();
            let best = refs.iter().map(|r| count(r)).max().unwrap();
            prop_assert_eq!(count(&winner), best);
        }
    }

    #[test]
    fn kappa_never_exceeds_one(rows in prop::collection::vec(prop::collection::vec(0u64..4, 3), 1..20)) {
        let n: u64 = 4;
        let counts: Vec<Vec<u64>> = rows
            .iter()
            .map(|r| {
                let a = r[0].min(n);
                let b = r[1].min(n - a);
                vec![a, b, n - a - b]
            })
            .collect();
        let k = fleiss_kappa(&counts).unwrap();
        prop_assert!(k <= 1.0 + 1e-12);
    }

    #[test]
    fn pairwise_ratio_is_a_fraction(items in prop::collection::vec(prop::collection::vec(0u8..3, 0..6), 1..10)) {
        let agreement = pairwise_agreement(&items);
        if let Some(r) = agreement.ratio {
            prop_assert!((0.0..=1.0).contains(&r));
        }
        prop_assert!(agreement.agreeing_pairs <= agreement.total_pairs);
    }

    #[test]
    fn hinge_is_nonnegative_and_zero_past_margin(s in 0.0f64..1.0, w in 0.0f64..1.0, m in 0.0f64..1.0) {
        let l = ranking_loss(s, w, m);
        prop_assert!(l >= 0.0);
        if s - w >= m {
            prop_assert_eq!(l, 0.0);
        }
        prop_assert_eq!(RankingOrientation::Intent.hinge_arg(s, w, m), m - (s - w));
    }

    #[test]
    fn rendered_prompt_splits_back(p in "[A-Za-z][A-Za-z ,]{0,40}\\.", h in "[A-Za-z][A-Za-z ]{0,30}\\.", which in 0usize..5) {
        let t = PromptTemplate::variant(&format!("P{}", which + 1)).unwrap();
        let (p2, h2) = split_rendered(&t, &t.render(&p, &h)).unwrap();
        prop_assert_eq!(&p2, &p);
        prop_assert_eq!(&h2, &h);
        prop_assert!(overlap(&p, &p) == 1.0 || overlap(&p, &p) == 0.0);
    }

    #[test]
    fn instance_jsonl_round_trip(premise in "[^\\n]{1,40}", hypothesis in "[^\\n]{1,40}", gold in label()) {
        prop_assume!(!premise.trim().is_empty() && !hypothesis.trim().is_empty());
        let inst = EvInstance {
            id: "x".into(),
            dataset: "d".into(),
            category: Category::Nli,
            premise,
            hypothesis,
            gold,
            reasoning_type: None,
            source: Default::default(),
        };
        let line = serde_json::to_string(&inst).unwrap() + "\n";
        let back = parse_records::<EvInstance, _>(line.as_bytes()).unwrap();
        prop_assert_eq!(back, vec![inst]);
    }
}
