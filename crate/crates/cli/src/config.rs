use std::path::{Path, PathBuf};

use anyhow::Context;
use astnit::TokenizerKind;
use serde::Deserialize;

/// Settings read from `--config`. Command-line flags override these, and
/// these override built-in defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub json: Option<bool>,
    pub tokenizer: Option<String>,
    /// Relative paths resolve against the config file's directory.
    pub rules: Option<PathBuf>,
    pub kind: Option<String>,
    pub template: Option<String>,
    pub seed: Option<u64>,
    pub code_field: Option<String>,
    pub summary_field: Option<String>,
    pub min_summary_words: Option<usize>,
}

impl Config {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text, path.parent())
    }

    pub fn parse(text: &str, base: Option<&Path>) -> anyhow::Result<Self> {
        let mut config: Config = toml::from_str(text).context("invalid config")?;
        if let (Some(rules), Some(base)) = (&config.rules, base) {
            if rules.is_relative() {
                config.rules = Some(base.join(rules));
            }
        }
        if let Some(tok) = &config.tokenizer {
            tok.parse::<TokenizerKind>().map_err(anyhow::Error::msg)?;
        }
        if let Some(kind) = &config.kind {
            kind.parse::<astnit::ReprKind>()
                .map_err(anyhow::Error::msg)?;
        }
        Ok(config)
    }

    pub fn tokenizer(&self) -> TokenizerKind {
        self.tokenizer
            .as_deref()
            .and_then(|t| t.parse().ok())
            .unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_rules_resolve_against_config_dir() {
        let config = Config::parse(
            "rules = \"r.txt\"\ntokenizer = \"chars\"",
            Some(Path::new("/etc/x")),
        )
        .unwrap();
        assert_eq!(config.rules.as_deref().unwrap(), Path::new("/etc/x/r.txt"));
        assert_eq!(config.tokenizer(), TokenizerKind::Chars);
    }

    #[test]
    fn rejects_unknown_keys_and_values() {
        assert!(Config::parse("colour = 1", None).is_err());
        assert!(Config::parse("tokenizer = \"bpe\"", None).is_err());
        assert!(Config::parse("kind = \"ast\"", None).is_err());
    }
}
