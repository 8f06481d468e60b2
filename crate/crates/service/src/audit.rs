//! Append-only JSONL audit trail. Every ingest writes exactly one line;
//! appends are serialized and fsynced before the call returns.

use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use router_core::nn::{BodyPartClass, NUM_CLASSES};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Routed,
    QueuedForReview,
    Failed,
    /// Content already ingested; the copy was quarantined, not routed.
    Duplicate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub ts: DateTime<Utc>,
    pub id: String,
    pub class: Option<BodyPartClass>,
    pub probs: Option<[f64; NUM_CLASSES]>,
    pub latency_s: Option<f64>,
    /// Terminal location of the file: a directory path or URL.
    pub destination: String,
    pub status: Status,
    /// Hex SHA-256 of the ingested bytes.
    pub sha256: String,
}

#[derive(Debug)]
pub struct AuditLog {
    path: PathBuf,
    file: Mutex<File>,
}

impl AuditLog {
    pub fn open(path: &Path) -> io::Result<Self> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            path: path.to_path_buf(),
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes one record as a single line and syncs it to disk.
    pub fn append(&self, record: &AuditRecord) -> io::Result<()> {
        let mut line = serde_json::to_vec(record)?;
        line.push(b'\n');
        let mut file = self.file.lock().unwrap_or_else(|e| e.into_inner());
        file.write_all(&line)?;
        file.sync_data()
    }
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Replay {
    pub records: Vec<AuditRecord>,
    /// Set when the final line was incomplete and skipped.
    pub torn_tail: bool,
}

impl Replay {
    pub fn count(&self, status: Status) -> usize {
        self.records.iter().filter(|r| r.status == status).count()
    }

    /// Routed records per class code.
    pub fn routed_per_class(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0; NUM_CLASSES];
        for r in &self.records {
            if let (Status::Routed, Some(c)) = (r.status, r.class) {
                counts[c.code()] += 1;
            }
        }
        counts
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("audit line {line} is corrupt: {source}")]
    Corrupt {
        line: usize,
        source: serde_json::Error,
    },
}

/// Parses an audit log. A missing file is empty. Only the final line may
/// be malformed (a crash mid-append); it is dropped and flagged. A path
/// that is not a regular file (a device or pipe) has no history.
pub fn replay(path: &Path) -> Result<Replay, ReplayError> {
    if std::fs::metadata(path).is_ok_and(|m| !m.is_file()) {
        return Ok(Replay::default());
    }
    let text = match std::fs::read(path) {
        Ok(bytes) => bytes,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Replay::default()),
        Err(e) => return Err(e.into()),
    };
    let lines: Vec<&[u8]> = text.split(|&b| b == b'\n').collect();
    let mut out = Replay::default();
    for (i, line) in lines.iter().enumerate() {
        if line.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        match serde_json::from_slice(line) {
            Ok(r) => out.records.push(r),
            Err(_) if i + 1 == lines.len() => out.torn_tail = true,
            Err(source) => {
                return Err(ReplayError::Corrupt {
                    line: i + 1,
                    source,
                })
            }
        }
    }
    Ok(out)
}
