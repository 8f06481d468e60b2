//! Router configuration, read from a TOML file. Relative paths are resolved
//! against the directory holding the file.

use std::fmt;
use std::path::{Path, PathBuf};

use router_core::nn::BodyPartClass;
use serde::{Deserialize, Serialize};

/// Environment variable that overrides the configured listen address.
pub const LISTEN_ENV: &str = "ROUTER_LISTEN";

pub const DEFAULT_THRESHOLD: f64 = 0.9;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("threshold {0} is outside [0, 1]")]
    ThresholdOutOfRange(f64),
    #[error("destination for {class} is empty")]
    EmptyDestination { class: BodyPartClass },
}

/// Where images of one class are delivered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Destination {
    Directory(PathBuf),
    Url(String),
}

impl Destination {
    fn parse(text: &str, base: &Path) -> Self {
        if text.starts_with("http://") || text.starts_with("https://") {
            Destination::Url(text.to_string())
        } else {
            Destination::Directory(base.join(text))
        }
    }
}

impl fmt::Display for Destination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Destination::Directory(p) => write!(f, "{}", p.display()),
            Destination::Url(u) => f.write_str(u),
        }
    }
}

/// Whether the second reading round covers every queued item or only the
/// items whose first-round label disagrees with the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondRound {
    #[default]
    All,
    Disagreements,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DestinationTable {
    abdominal: String,
    adult_chest: String,
    pediatric_chest: String,
    spine: String,
    others: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "default_threshold")]
    threshold: f64,
    watch_dir: String,
    weights: String,
    #[serde(default = "default_input_size")]
    input_size: usize,
    #[serde(default = "default_listen")]
    listen: String,
    state_dir: String,
    api_token: Option<String>,
    #[serde(default)]
    second_round: SecondRound,
    #[serde(default = "default_retry_backoff_ms")]
    retry_backoff_ms: u64,
    destinations: DestinationTable,
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

fn default_input_size() -> usize {
    router_core::pixel::MODEL_INPUT_SIZE
}

fn default_listen() -> String {
    "127.0.0.1:8080".into()
}

fn default_retry_backoff_ms() -> u64 {
    200
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteConfig {
    /// One destination per class, indexed by class code.
    pub destinations: [Destination; 5],
    /// Minimum top-class probability for automatic routing.
    pub threshold: f64,
    pub watch_dir: PathBuf,
    pub weights: PathBuf,
    /// Side length the classifier input is resampled to.
    pub input_size: usize,
    pub listen: String,
    /// Holds the audit log, review queue, quarantine and failed deliveries.
    pub state_dir: PathBuf,
    pub api_token: Option<String>,
    pub second_round: SecondRound,
    /// Delay before the second delivery attempt; doubled for the third.
    pub retry_backoff_ms: u64,
}

impl RouteConfig {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        let d = raw.destinations;
        let texts = [
            d.abdominal,
            d.adult_chest,
            d.pediatric_chest,
            d.spine,
            d.others,
        ];
        for (class, t) in BodyPartClass::ALL.into_iter().zip(&texts) {
            if t.trim().is_empty() {
                return Err(ConfigError::EmptyDestination { class });
            }
        }
        let config = Self {
            destinations: texts.map(|t| Destination::parse(&t, base)),
            threshold: raw.threshold,
            watch_dir: base.join(raw.watch_dir),
            weights: base.join(raw.weights),
            input_size: raw.input_size,
            listen: raw.listen,
            state_dir: base.join(raw.state_dir),
            api_token: raw.api_token,
            second_round: raw.second_round,
            retry_backoff_ms: raw.retry_backoff_ms,
        };
        config.validate()?;
        Ok(config)
    }

    /// Reads `path`; `ROUTER_LISTEN`, when set, replaces `listen`.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut config = Self::from_toml(&text, base)?;
        if let Ok(listen) = std::env::var(LISTEN_ENV) {
            config.listen = listen;
        }
        Ok(config)
    }

    /// Directory-only configuration rooted at `root`, used by tests and the
    /// `ingest` command when no config file is given.
    pub fn local(root: &Path) -> Self {
        Self {
            destinations: BodyPartClass::ALL
                .map(|c| Destination::Directory(root.join("routed").join(c.name()))),
            threshold: DEFAULT_THRESHOLD,
            watch_dir: root.join("inbox"),
            weights: root.join("routernet.rnmw"),
            input_size: default_input_size(),
            listen: default_listen(),
            state_dir: root.join("state"),
            api_token: None,
            second_round: SecondRound::All,
            retry_backoff_ms: default_retry_backoff_ms(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(ConfigError::ThresholdOutOfRange(self.threshold));
        }
        Ok(())
    }

    pub fn destination(&self, class: BodyPartClass) -> &Destination {
        &self.destinations[class.code()]
    }

    pub fn audit_path(&self) -> PathBuf {
        self.state_dir.join("audit.jsonl")
    }

    pub fn review_dir(&self) -> PathBuf {
        self.state_dir.join("review")
    }

    pub fn quarantine_dir(&self) -> PathBuf {
        self.state_dir.join("quarantine")
    }

    pub fn failed_dir(&self) -> PathBuf {
        self.state_dir.join("failed")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: &str = include_str!("../router.example.toml");

    #[test]
    fn reference_file_parses() {
        let c = RouteConfig::from_toml(REFERENCE, Path::new("/srv/router")).unwrap();
        assert_eq!(c.threshold, 0.9);
        assert_eq!(c.watch_dir, Path::new("/srv/router/inbox"));
        assert_eq!(
            c.destination(BodyPartClass::Spine),
            &Destination::Url("http://127.0.0.1:9100/spine".into())
        );
        assert_eq!(
            c.destination(BodyPartClass::AdultChest),
            &Destination::Directory("/srv/router/routed/adult_chest".into())
        );
        assert_eq!(c.second_round, SecondRound::All);
        assert_eq!(c.audit_path(), Path::new("/srv/router/state/audit.jsonl"));
    }

    #[test]
    fn threshold_defaults_and_bounds() {
        let without = REFERENCE.replace("threshold = 0.9\n", "");
        let c = RouteConfig::from_toml(&without, Path::new(".")).unwrap();
        assert_eq!(c.threshold, DEFAULT_THRESHOLD);
        let bad = REFERENCE.replace("threshold = 0.9", "threshold = 1.5");
        assert!(matches!(
            RouteConfig::from_toml(&bad, Path::new(".")),
            Err(ConfigError::ThresholdOutOfRange(_))
        ));
    }

    #[test]
    fn every_class_needs_a_destination() {
        let missing = REFERENCE
            .lines()
            .filter(|l| !l.starts_with("others"))
            .collect::<Vec<_>>()
            .join("\n");
        assert!(matches!(
            RouteConfig::from_toml(&missing, Path::new(".")),
            Err(ConfigError::Parse(_))
        ));
        let empty = REFERENCE.replace("others = \"routed/others\"", "others = \"\"");
        assert!(matches!(
            RouteConfig::from_toml(&empty, Path::new(".")),
            Err(ConfigError::EmptyDestination {
                class: BodyPartClass::Others
            })
        ));
    }
}
