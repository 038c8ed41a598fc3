//! Seeded synthetic data with a known answer: attribute statements about
//! objects described by four attribute slots.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{
    convert_qa, mine_negatives_from_options, pairs_from_generated, parse_generated_negatives, Category,
    EvInstance, Label, QaItem, RankPair, RuleConverter,
};
use crate::hashing::fork_seed;

pub const GRADE_KEY: &str = "grade";
pub const SYNTHETIC_DATASET: &str = "synthetic";

const ENTITIES: [&str; 24] = [
    "box", "chair", "lamp", "vase", "table", "bottle", "basket", "bucket", "clock", "kettle", "mirror",
    "shelf", "spoon", "bowl", "cup", "plate", "brush", "drum", "fan", "hat", "jar", "key", "pot", "tray",
];

const SLOTS: [[&str; 8]; 4] = [
    ["red", "blue", "green", "yellow", "black", "white", "purple", "orange"],
    ["wooden", "metal", "plastic", "glass", "stone", "paper", "leather", "woolen"],
    ["round", "square", "oval", "flat", "long", "curved", "pointed", "hollow"],
    ["tiny", "small", "large", "huge", "heavy", "light", "thin", "thick"],
];

struct Object {
    entity: &'static str,
    values: [usize; 4],
}

impl Object {
    fn random(rng: &mut impl Rng) -> Self {
        Self {
            entity: ENTITIES.choose(rng).expect("non-empty"),
            values: std::array::from_fn(|_| rng.random_range(0..8)),
        }
    }

    fn description(&self) -> String {
        words(&self.values).join(" ")
    }

    fn premise(&self) -> String {
        format!("The {} is {}.", self.entity, self.description())
    }

    fn attribute(&self, slot: usize, value: usize) -> String {
        format!("The {} is {}.", self.entity, SLOTS[slot][value])
    }
}

fn words(values: &[usize; 4]) -> Vec<&'static str> {
    values.iter().enumerate().map(|(s, &v)| SLOTS[s][v]).collect()
}

fn other_value(rng: &mut impl Rng, not: usize) -> usize {
    let v = rng.random_range(0..7);
    if v >= not {
        v + 1
    } else {
        v
    }
}

/// Balanced support / not_support instances. A support hypothesis restates
/// one attribute of the premise; a not_support hypothesis gives that slot a
/// different value.
pub fn attribute_instances(n: usize, seed: u64, id_prefix: &str) -> Vec<EvInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(fork_seed(seed, "synthetic/instances"));
    (0..n)
        .map(|i| {
            let obj = Object::random(&mut rng);
            let slot = rng.random_range(0..4);
            let support = i % 2 == 0;
            let value = if support {
                obj.values[slot]
            } else {
                other_value(&mut rng, obj.values[slot])
            };
            EvInstance {
                id: format!("{id_prefix}-{i:05}"),
                dataset: SYNTHETIC_DATASET.into(),
                category: Category::Nli,
                premise: obj.premise(),
                hypothesis: obj.attribute(slot, value),
                gold: if support { Label::Support } else { Label::NotSupport },
                reasoning_type: None,
                source: Default::default(),
            }
        })
        .collect()
}

/// A multiple-choice item whose incorrect options share a controlled number
/// of attribute words with the correct one.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedItem {
    pub item: QaItem,
    /// Fraction of the correct answer's words each choice shares; 1.0 for
    /// the correct choice.
    pub grades: Vec<f64>,
}

/// Items with four choices: the correct description and distractors
/// sharing 3, 2 and 1 of its four words (grades 0.75, 0.5, 0.25), in
/// shuffled positions.
pub fn graded_items(n: usize, seed: u64, id_prefix: &str) -> Vec<GradedItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(fork_seed(seed, "synthetic/graded"));
    (0..n)
        .map(|i| {
            let obj = Object::random(&mut rng);
            let mut options = vec![(obj.description(), 1.0)];
            for shared in [3usize, 2, 1] {
                let mut slots = [0usize, 1, 2, 3];
                slots.shuffle(&mut rng);
                let mut values = obj.values;
                for &s in &slots[shared..] {
                    values[s] = other_value(&mut rng, obj.values[s]);
                }
                options.push((words(&values).join(" "), shared as f64 / 4.0));
            }
            options.shuffle(&mut rng);
            let correct_index = options.iter().position(|(_, g)| *g == 1.0).expect("correct option present");
            GradedItem {
                item: QaItem {
                    id: Some(format!("{id_prefix}-{i:05}")),
                    dataset: Some(SYNTHETIC_DATASET.into()),
                    context: obj.premise(),
                    question: format!("What is the {}?", obj.entity),
                    choices: options.iter().map(|(c, _)| c.clone()).collect(),
                    correct_index,
                },
                grades: options.iter().map(|(_, g)| *g).collect(),
            }
        })
        .collect()
}

/// Converts graded items to instances tagged with their grade.
pub fn graded_instances(items: &[GradedItem]) -> Vec<EvInstance> {
    let converter = RuleConverter;
    items
        .iter()
        .flat_map(|g| {
            let mut rows = convert_qa(&g.item, "graded", &converter).expect("generated items are valid");
            for (row, grade) in rows.iter_mut().zip(&g.grades) {
                row.source.insert(GRADE_KEY.into(), format!("{grade:.2}"));
            }
            rows
        })
        .collect()
}

/// Numbered generator output listing five contradicted variants of a
/// single-attribute hypothesis, as a negative generator would return it.
fn generated_negatives_text(rng: &mut impl Rng, obj: &Object, slot: usize) -> String {
    let mut alternatives: Vec<usize> = (0..8).filter(|&v| v != obj.values[slot]).collect();
    alternatives.shuffle(rng);
    alternatives
        .iter()
        .take(5)
        .enumerate()
        .map(|(k, &v)| format!("{}. {}", k + 1, obj.attribute(slot, v)))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Ranking pairs mixing both provenance types: incorrect options of graded
/// items and generated contradictions of single-attribute hypotheses.
/// Half the pairs (rounded up) come from options.
pub fn ranking_pairs(n: usize, seed: u64) -> Vec<RankPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(fork_seed(seed, "synthetic/pairs"));
    let converter = RuleConverter;
    let n_options = n.div_ceil(2);
    let mut from_options = Vec::with_capacity(n_options + 3);
    for g in graded_items(n_options.div_ceil(3), fork_seed(seed, "pairs/options"), "pair") {
        from_options.extend(mine_negatives_from_options(&g.item, &converter).expect("valid item"));
    }
    from_options.truncate(n_options);

    let mut generated = Vec::with_capacity(n - n_options + 5);
    while generated.len() < n - n_options {
        let obj = Object::random(&mut rng);
        let slot = rng.random_range(0..4);
        let instance = EvInstance {
            id: "g".into(),
            dataset: SYNTHETIC_DATASET.into(),
            category: Category::Nli,
            premise: obj.premise(),
            hypothesis: obj.attribute(slot, obj.values[slot]),
            gold: Label::Support,
            reasoning_type: None,
            source: Default::default(),
        };
        let parsed = parse_generated_negatives(&generated_negatives_text(&mut rng, &obj, slot));
        let mut pairs = pairs_from_generated(&instance, &parsed.hypotheses);
        pairs.truncate(1 + rng.random_range(0..2));
        generated.extend(pairs);
    }
    generated.truncate(n - n_options);

    let mut all = from_options;
    all.extend(generated);
    all.shuffle(&mut rng);
    all
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Provenance;

    #[test]
    fn instances_are_balanced_and_deterministic() {
        let a = attribute_instances(100, 1, "t");
        assert_eq!(a, attribute_instances(100, 1, "t"));
        assert_ne!(a, attribute_instances(100, 2, "t"));
        assert_eq!(a.iter().filter(|i| i.gold == Label::Support).count(), 50);
        for inst in &a {
            let value = inst.hypothesis.trim_end_matches('.').rsplit(' ').next().unwrap();
            let in_premise = inst.premise.trim_end_matches('.').split(' ').any(|w| w == value);
            assert_eq!(in_premise, inst.gold == Label::Support, "{inst:?}");
        }
    }

    #[test]
    fn graded_items_share_the_stated_fraction() {
        for g in graded_items(50, 3, "g") {
            let correct: Vec<&str> = g.item.choices[g.item.correct_index].split(' ').collect();
            for (choice, grade) in g.item.choices.iter().zip(&g.grades) {
                let shared = choice.split(' ').zip(&correct).filter(|(a, b)| a == *b).count();
                assert_eq!(shared as f64 / 4.0, *grade);
            }
            assert!(g.item.validate().is_ok());
        }
        let rows = graded_instances(&graded_items(2, 3, "g"));
        assert_eq!(rows.len(), 8);
        assert!(rows.iter().all(|r| r.hypothesis.starts_with("The ") && r.source.contains_key(GRADE_KEY)));
    }

    #[test]
    fn pairs_mix_provenance() {
        let pairs = ranking_pairs(101, 5);
        assert_eq!(pairs.len(), 101);
        let options = pairs.iter().filter(|p| p.provenance == Provenance::IncorrectOption).count();
        assert_eq!(options, 51);
        assert!(pairs.iter().all(|p| p.validate().is_ok()));
    }
}
