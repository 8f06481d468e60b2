//! Delivery of routed files to directory or HTTP destinations.

use std::path::{Path, PathBuf};
use std::thread;
use std::time::Duration;

use crate::config::Destination;
use crate::fsutil::{unique_path, write_atomic};

/// Delivery attempts made for a URL destination before giving up.
pub const MAX_ATTEMPTS: u32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum DeliveryError {
    #[error("cannot write to {path}: {source}")]
    Directory {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{url} unavailable after {attempts} attempts: {last}")]
    DestinationUnavailable {
        url: String,
        attempts: u32,
        last: String,
    },
}

/// Metadata forwarded with an HTTP delivery as `x-router-*` headers.
#[derive(Debug, Clone)]
pub struct DeliveryMeta<'a> {
    pub id: &'a str,
    pub class: &'a str,
    pub confidence: f64,
    pub sha256: &'a str,
}

/// Outcome of a successful delivery: the location written to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delivered {
    pub location: String,
    pub attempts: u32,
}

pub fn deliver(
    bytes: &[u8],
    file_stem: &str,
    destination: &Destination,
    meta: &DeliveryMeta<'_>,
    backoff: Duration,
) -> Result<Delivered, DeliveryError> {
    match destination {
        Destination::Directory(dir) => {
            let path = store(dir, file_stem, bytes)?;
            Ok(Delivered {
                location: path.display().to_string(),
                attempts: 1,
            })
        }
        Destination::Url(url) => post_with_retry(url, bytes, meta, backoff),
    }
}

/// Writes `bytes` atomically into `dir` under a name not yet taken.
pub fn store(dir: &Path, file_stem: &str, bytes: &[u8]) -> Result<PathBuf, DeliveryError> {
    let wrap = |source| DeliveryError::Directory {
        path: dir.to_path_buf(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(wrap)?;
    let path = unique_path(dir, file_stem, "dcm");
    write_atomic(&path, bytes).map_err(wrap)?;
    Ok(path)
}

fn post_with_retry(
    url: &str,
    bytes: &[u8],
    meta: &DeliveryMeta<'_>,
    backoff: Duration,
) -> Result<Delivered, DeliveryError> {
    let agent = ureq::AgentBuilder::new()
        .timeout_connect(Duration::from_secs(5))
        .timeout(Duration::from_secs(30))
        .build();
    let mut last = String::new();
    for attempt in 1..=MAX_ATTEMPTS {
        if attempt > 1 {
            thread::sleep(backoff * 2u32.pow(attempt - 2));
        }
        let result = agent
            .post(url)
            .set("content-type", "application/dicom")
            .set("x-router-id", meta.id)
            .set("x-router-class", meta.class)
            .set("x-router-confidence", &format!("{:.6}", meta.confidence))
            .set("x-router-sha256", meta.sha256)
            .send_bytes(bytes);
        match result {
            Ok(_) => {
                return Ok(Delivered {
                    location: url.to_string(),
                    attempts: attempt,
                })
            }
            Err(e) => {
                tracing::warn!(url, attempt, error = %e, "delivery attempt failed");
                last = e.to_string();
            }
        }
    }
    Err(DeliveryError::DestinationUnavailable {
        url: url.to_string(),
        attempts: MAX_ATTEMPTS,
        last,
    })
}
