//! Filtered accuracy as a function of k on simulated verifier scores drawn
//! from Beta distributions.

use evkit::selfconsistency::fixtures::{beta_noise_groups, BetaNoiseConfig};
use evkit::selfconsistency::{k_ablation, TieBreak, DEFAULT_K_SET};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for p_correct in [0.5, 0.3, 0.22] {
        let groups = beta_noise_groups(&BetaNoiseConfig {
            p_correct,
            ..BetaNoiseConfig::default()
        });
        let ab = k_ablation(&groups, &DEFAULT_K_SET, TieBreak::ScoreSum)?;
        let points: Vec<String> = ab.points.iter().map(|p| format!("k={} {:.3}", p.k, p.accuracy)).collect();
        println!("p_correct {p_correct:.2}: vanilla {:.3} | {}", ab.vanilla_accuracy, points.join("  "));
    }
    Ok(())
}
