//! Score instances with an offline backend. The lexical-overlap mock stands
//! in for a completion service; a cache makes the second pass free.
//!
//! Pass `--http <base-url> <model>` to score against a real
//! OpenAI-compatible completion endpoint instead.

use evkit::cli::overlap_backend;
use evkit::scoring::{batch_score, ApiMode, Backend, HttpBackend, MemoryCache, PromptTemplate, Scorer};
use evkit::{Category, EvInstance, Label, ScoringConfig};

fn instance(id: &str, premise: &str, hypothesis: &str, gold: Label) -> EvInstance {
    EvInstance {
        id: id.into(),
        dataset: "demo".into(),
        category: Category::Nli,
        premise: premise.into(),
        hypothesis: hypothesis.into(),
        gold,
        reasoning_type: None,
        source: Default::default(),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let instances = vec![
        instance("a", "The red car is parked by the house.", "The car is red.", Label::Support),
        instance("b", "The red car is parked by the house.", "A bicycle flew overhead.", Label::NotSupport),
        instance("c", "Tom baked bread for his sister.", "Tom baked bread.", Label::Support),
    ];
    let template = PromptTemplate::default_template();
    let config = ScoringConfig::default();

    let args: Vec<String> = std::env::args().collect();
    let mock = overlap_backend(template.clone());
    let http;
    let backend: &dyn Backend = if args.len() == 4 && args[1] == "--http" {
        http = HttpBackend::new(&args[2], &args[3], ApiMode::Completion).with_top_n(5);
        &http
    } else {
        &mock
    };

    println!("prompt for `a`:\n{}\n", template.render(&instances[0].premise, &instances[0].hypothesis));

    let cache = MemoryCache::new();
    let scorer = Scorer::new(backend, &template, &config).with_cache(&cache);
    let rows = batch_score(&instances, &scorer, 4)?;
    for r in &rows {
        let s = r.score.as_ref().map(|s| s.value).unwrap_or(f64::NAN);
        println!("{}  score {:.3}  predicted {:?}  gold {:?}", r.id, s, r.predicted, r.gold);
    }
    let first = mock.calls();
    batch_score(&instances, &scorer, 4)?;
    println!("\nbackend calls: first pass {first}, second pass {}", mock.calls() - first);
    Ok(())
}
