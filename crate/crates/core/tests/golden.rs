use std::path::PathBuf;

use evkit::dataset::question_to_statement;
use evkit::scoring::{Demo, PromptTemplate};
use evkit::Label;

const PREMISE: &str = "The red ball is under the table.";
const HYPOTHESIS: &str = "The ball is red.";

fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn default_prompt() {
    let rendered = PromptTemplate::default_template().render(PREMISE, HYPOTHESIS);
    assert_eq!(rendered + "\n", golden("default_prompt.txt"));
}

#[test]
fn prompt_variants() {
    for name in ["P1", "P2", "P3", "P4", "P5"] {
        let rendered = PromptTemplate::variant(name).unwrap().render(PREMISE, HYPOTHESIS);
        assert_eq!(rendered + "\n", golden(&format!("prompt_{name}.txt")), "{name}");
    }
}

#[test]
fn two_demo_few_shot() {
    let demos = vec![
        Demo {
            premise: "Anna watered the plants every morning before work.".into(),
            hypothesis: "Anna takes care of plants.".into(),
            answer: Label::Support,
        },
        Demo {
            premise: "The museum closes at five on weekdays.".into(),
            hypothesis: "The museum is open all night on Tuesdays.".into(),
            answer: Label::NotSupport,
        },
    ];
    let rendered = PromptTemplate::default_template().with_demos(demos).render(PREMISE, HYPOTHESIS);
    assert_eq!(rendered + "\n", golden("few_shot_2.txt"));
}

#[test]
fn question_to_statement_table() {
    let table = golden("statements.tsv");
    let mut checked = 0;
    for line in table.lines().filter(|l| !l.starts_with('#') && !l.is_empty()) {
        let f: Vec<&str> = line.split('\t').collect();
        let got = question_to_statement(f[0], f[1]);
        assert_eq!((got.rule.as_str(), got.text.as_str()), (f[2], f[3]), "{line}");
        checked += 1;
    }
    assert!(checked >= 10);
}
