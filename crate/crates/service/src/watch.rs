//! Inbox polling. A file is ingested once its size has been observed equal
//! on two consecutive polls, so half-written files are left alone.

use std::collections::HashMap;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::router::{IngestError, Ingested, Router};

pub const POLL_INTERVAL: Duration = Duration::from_millis(200);

#[derive(Debug, thiserror::Error)]
pub enum WatchError {
    #[error("cannot watch {path}: {source}")]
    Setup { path: PathBuf, source: io::Error },
}

#[derive(Debug)]
pub struct Watcher {
    dir: PathBuf,
    /// Size seen on the previous poll for every candidate file.
    last_size: HashMap<PathBuf, u64>,
}

/// Result of one file handled by a poll.
#[derive(Debug)]
pub struct WatchEvent {
    pub path: PathBuf,
    pub outcome: Result<Ingested, IngestError>,
}

fn is_candidate(path: &Path) -> bool {
    let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
        return false;
    };
    // hidden files are how writers stage partial output
    !name.starts_with('.') && !name.ends_with(".tmp") && !name.ends_with(".part")
}

impl Watcher {
    pub fn new(dir: &Path) -> Result<Self, WatchError> {
        let meta = std::fs::metadata(dir).map_err(|source| WatchError::Setup {
            path: dir.to_path_buf(),
            source,
        })?;
        if !meta.is_dir() {
            return Err(WatchError::Setup {
                path: dir.to_path_buf(),
                source: io::Error::new(io::ErrorKind::InvalidInput, "not a directory"),
            });
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            last_size: HashMap::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Scans the inbox once and ingests every file whose size matches the
    /// previous poll. Files are handled in name order.
    pub fn poll_once(&mut self, router: &Router) -> io::Result<Vec<WatchEvent>> {
        let mut current = HashMap::new();
        for entry in std::fs::read_dir(&self.dir)? {
            let entry = entry?;
            let path = entry.path();
            let Ok(meta) = entry.metadata() else { continue };
            if meta.is_file() && is_candidate(&path) {
                current.insert(path, meta.len());
            }
        }
        let mut stable: Vec<PathBuf> = current
            .iter()
            .filter(|(p, size)| self.last_size.get(*p) == Some(size))
            .map(|(p, _)| p.clone())
            .collect();
        stable.sort();

        let mut events = Vec::with_capacity(stable.len());
        for path in stable {
            let bytes = match std::fs::read(&path) {
                Ok(b) => b,
                // vanished or unreadable since the scan; look again next poll
                Err(_) => continue,
            };
            if bytes.len() as u64 != current[&path] {
                current.insert(path.clone(), bytes.len() as u64);
                continue;
            }
            let outcome = router.ingest(&bytes, Some(&path));
            if outcome.is_ok() {
                current.remove(&path);
            }
            events.push(WatchEvent { path, outcome });
        }
        self.last_size = current;
        Ok(events)
    }

    /// Polls every [`POLL_INTERVAL`] until `stop` returns true.
    pub fn run(&mut self, router: &Router, mut stop: impl FnMut() -> bool) -> io::Result<()> {
        while !stop() {
            for event in self.poll_once(router)? {
                if let Err(e) = event.outcome {
                    tracing::error!(path = %event.path.display(), error = %e, "ingest failed");
                }
            }
            std::thread::sleep(POLL_INTERVAL);
        }
        Ok(())
    }
}
