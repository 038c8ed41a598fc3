//! Compare analytic gradients of both objectives against central finite
//! differences on a small random scorer.

use evkit::objectives::{batch_loss, gradient, Example, Featurizer, LossSettings, TinyScorer};
use evkit::Label;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let featurizer = Featurizer::new(512, 7);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut scorer = TinyScorer::zeros(featurizer.clone());
    let params: Vec<f64> = (0..513).map(|_| rng.random_range(-0.5..0.5)).collect();
    scorer.set_params(&params);

    let x = |p: &str, h: &str| featurizer.featurize(p, h);
    let batches = [
        (
            "classification",
            vec![
                Example::Labeled { x: x("the cat sat on the mat", "a cat sat"), gold: Label::Support },
                Example::Labeled { x: x("the cat sat on the mat", "a dog ran"), gold: Label::NotSupport },
            ],
        ),
        (
            "ranking",
            vec![Example::Pair {
                strong: x("the box is red and small", "the box is red"),
                weak: x("the box is red and small", "the box is blue"),
            }],
        ),
    ];
    let settings = LossSettings { margin: 2.0, ..LossSettings::default() };
    let h = 1e-6;
    for (name, batch) in &batches {
        let analytic = gradient(&scorer, batch, settings).to_dense(512);
        let mut worst = 0.0f64;
        let mut p = params.clone();
        for i in 0..p.len() {
            let orig = p[i];
            p[i] = orig + h;
            scorer.set_params(&p);
            let up = batch_loss(&scorer, batch, settings);
            p[i] = orig - h;
            scorer.set_params(&p);
            let down = batch_loss(&scorer, batch, settings);
            p[i] = orig;
            let numeric = (up - down) / (2.0 * h);
            worst = worst.max((numeric - analytic[i]).abs());
        }
        scorer.set_params(&params);
        let norm = analytic.iter().map(|g| g * g).sum::<f64>().sqrt();
        println!("{name}: |grad| {norm:.4}, largest coordinate difference {worst:.2e}");
    }
}
