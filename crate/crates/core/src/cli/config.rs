use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::objectives::TrainingConfig;
use crate::scoring::ScoringConfig;
use crate::selfconsistency::FilterConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSection {
    pub url: Option<String>,
    pub model: Option<String>,
    /// "completion" or "chat".
    pub api_mode: Option<String>,
    pub top_logprobs: Option<usize>,
    /// Name of the environment variable holding the API key.
    pub api_key_env: Option<String>,
}

/// Contents of a `--config` TOML file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub cache_dir: Option<PathBuf>,
    pub log_level: Option<String>,
    pub parallelism: Option<usize>,
    pub template: Option<String>,
    pub template_file: Option<PathBuf>,
    pub converter_url: Option<String>,
    pub backend: BackendSection,
    pub scoring: Option<ScoringConfig>,
    pub training: Option<TrainingConfig>,
    pub filter: Option<FilterConfig>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::from_io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

/// First present value wins: flag, then file, then default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Backend settings after precedence resolution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedBackend {
    pub url: String,
    pub model: Option<String>,
    pub api_mode: String,
    pub top_logprobs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
}

/// Effective configuration of a run, echoed into its manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    pub parallelism: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<ResolvedBackend>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scoring: Option<ScoringConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub training: Option<TrainingConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converter_url: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        assert_eq!(pick(Some(1), Some(2), 3), 1);
        assert_eq!(pick(None, Some(2), 3), 2);
        assert_eq!(pick(None::<i32>, None, 3), 3);
    }

    #[test]
    fn parses_partial_sections() {
        let cfg: FileConfig = toml::from_str(
            r#"
            seed = 9
            [backend]
            url = "http://localhost:8000/v1"
            [scoring]
            threshold = 0.6
            [training]
            margin = 0.3
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(9));
        let scoring = cfg.scoring.unwrap();
        assert_eq!(scoring.threshold, 0.6);
        assert_eq!(scoring.yes_aliases, ScoringConfig::default().yes_aliases);
        assert_eq!(cfg.training.unwrap().total_steps, 1400);
        assert!(toml::from_str::<FileConfig>("bogus = 1").is_err());
    }
}
