//! Ingest: hash, parse, classify, then route, queue for review or
//! quarantine, with exactly one audit record per call.

use std::collections::{HashMap, HashSet};
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use chrono::Utc;
use router_core::dicom::{parse_file, tags, DicomError};
use router_core::nn::{predict, Backend, BodyPartClass, NUM_CLASSES};
use router_core::pixel::{export_png, preprocess_to, render, PipelineError};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::audit::{self, AuditLog, AuditRecord, Status};
use crate::config::RouteConfig;
use crate::delivery::{self, DeliveryMeta};
use crate::fsutil::safe_name;
use crate::review::{ReviewItem, ReviewQueue};

/// The routing decision for one ingest; it is also the audit line.
pub type RoutingDecision = AuditRecord;

/// Response of the side-effect-free classify call.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub id: String,
    pub class: BodyPartClass,
    pub probs: [f64; NUM_CLASSES],
    pub latency_s: f64,
}

/// Why an input could not be read as an image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputProblem {
    /// No Part-10 preamble and magic: not a DICOM file at all.
    NotDicom(String),
    /// DICOM framing present but the content is unusable.
    Malformed(String),
}

impl InputProblem {
    fn from_pipeline(e: &PipelineError) -> Self {
        match e {
            PipelineError::Dicom(DicomError::TooShort { .. } | DicomError::MissingMagic) => {
                InputProblem::NotDicom(e.to_string())
            }
            _ => InputProblem::Malformed(e.to_string()),
        }
    }

    pub fn message(&self) -> &str {
        match self {
            InputProblem::NotDicom(m) | InputProblem::Malformed(m) => m,
        }
    }
}

/// Non-routing outcome detail attached to an audited ingest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Problem {
    Input(InputProblem),
    Backend(String),
    Delivery(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub decision: RoutingDecision,
    pub problem: Option<Problem>,
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("no classifier is loaded")]
    BackendNotLoaded,
    #[error("audit log unavailable; ingest is disabled until restart")]
    Degraded,
    #[error("audit append failed: {0}")]
    AuditWrite(io::Error),
    #[error("cannot store file: {0}")]
    Storage(String),
}

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error("no classifier is loaded")]
    BackendNotLoaded,
    #[error("{}", .0.message())]
    Input(InputProblem),
    #[error("classifier failed: {0}")]
    Backend(String),
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// SOP Instance UID when the bytes parse and carry one, else `None`.
fn instance_uid(bytes: &[u8]) -> Result<Option<String>, PipelineError> {
    let file = parse_file(bytes)?;
    Ok(file
        .dataset
        .get_str(tags::SOP_INSTANCE_UID)
        .map(|s| s.trim_end_matches(['\0', ' ']).to_string())
        .filter(|s| !s.is_empty()))
}

pub struct Router {
    config: RouteConfig,
    backend: RwLock<Option<Arc<dyn Backend>>>,
    audit: AuditLog,
    review: ReviewQueue,
    /// Content hashes already ingested.
    seen: Mutex<HashSet<String>>,
    item_locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    /// Stored copy of each item, for PNG renditions.
    locations: Mutex<HashMap<String, PathBuf>>,
    degraded: AtomicBool,
}

impl Router {
    /// Opens the state directory and rebuilds the duplicate index and item
    /// locations from the audit log.
    pub fn open(config: RouteConfig, backend: Option<Arc<dyn Backend>>) -> io::Result<Self> {
        config
            .validate()
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
        for dir in [config.quarantine_dir(), config.failed_dir()] {
            std::fs::create_dir_all(dir)?;
        }
        let history = audit::replay(&config.audit_path())
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        if history.torn_tail {
            tracing::warn!("audit log ends in a torn line; it was skipped");
        }
        let mut seen = HashSet::new();
        let mut locations = HashMap::new();
        for r in &history.records {
            seen.insert(r.sha256.clone());
            if r.status != Status::Duplicate && Path::new(&r.destination).is_file() {
                locations.insert(r.id.clone(), PathBuf::from(&r.destination));
            }
        }
        Ok(Self {
            audit: AuditLog::open(&config.audit_path())?,
            review: ReviewQueue::open(&config.review_dir(), config.second_round)?,
            config,
            backend: RwLock::new(backend),
            seen: Mutex::new(seen),
            item_locks: Mutex::new(HashMap::new()),
            locations: Mutex::new(locations),
            degraded: AtomicBool::new(false),
        })
    }

    pub fn config(&self) -> &RouteConfig {
        &self.config
    }

    pub fn review(&self) -> &ReviewQueue {
        &self.review
    }

    pub fn audit_path(&self) -> &Path {
        self.audit.path()
    }

    pub fn is_degraded(&self) -> bool {
        self.degraded.load(Ordering::SeqCst)
    }

    pub fn backend(&self) -> Option<Arc<dyn Backend>> {
        self.backend
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .clone()
    }

    pub fn set_backend(&self, backend: Option<Arc<dyn Backend>>) {
        *self.backend.write().unwrap_or_else(|e| e.into_inner()) = backend;
    }

    /// Classifies without storing, routing or auditing anything.
    pub fn classify(&self, bytes: &[u8]) -> Result<Classification, ClassifyError> {
        let backend = self.backend().ok_or(ClassifyError::BackendNotLoaded)?;
        let input = |e: PipelineError| ClassifyError::Input(InputProblem::from_pipeline(&e));
        let id = instance_uid(bytes)
            .map_err(input)?
            .unwrap_or_else(|| sha256_hex(bytes));
        let image = preprocess_to(bytes, backend.input_size()).map_err(input)?;
        let p =
            predict(backend.as_ref(), &image).map_err(|e| ClassifyError::Backend(e.to_string()))?;
        Ok(Classification {
            id,
            class: p.class,
            probs: p.probabilities,
            latency_s: p.latency_s,
        })
    }

    fn item_lock(&self, id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.item_locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(id.to_string()).or_default().clone()
    }

    fn release_item_lock(&self, id: &str, lock: Arc<Mutex<()>>) {
        let mut locks = self.item_locks.lock().unwrap_or_else(|e| e.into_inner());
        // the map and `lock` are the only holders: nobody else waits on it
        if Arc::strong_count(&lock) == 2 {
            locks.remove(id);
        }
    }

    /// Ingests one file. `source`, when given, is the inbox path the bytes
    /// were read from; it is removed once the bytes are safely stored
    /// elsewhere. Every call that returns `Ok` appended one audit record.
    pub fn ingest(&self, bytes: &[u8], source: Option<&Path>) -> Result<Ingested, IngestError> {
        if self.is_degraded() {
            return Err(IngestError::Degraded);
        }
        let backend = self.backend().ok_or(IngestError::BackendNotLoaded)?;
        let sha256 = sha256_hex(bytes);
        let parsed = instance_uid(bytes);
        let id = match &parsed {
            Ok(Some(uid)) => uid.clone(),
            _ => sha256.clone(),
        };
        let lock = self.item_lock(&id);
        let result = {
            let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
            self.ingest_locked(bytes, source, backend.as_ref(), id.clone(), sha256, parsed)
        };
        self.release_item_lock(&id, lock);
        result
    }

    fn ingest_locked(
        &self,
        bytes: &[u8],
        source: Option<&Path>,
        backend: &dyn Backend,
        id: String,
        sha256: String,
        parsed: Result<Option<String>, PipelineError>,
    ) -> Result<Ingested, IngestError> {
        let stem = safe_name(&id);
        let first_time = self
            .seen
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(sha256.clone());
        let mut decision = RoutingDecision {
            ts: Utc::now(),
            id: id.clone(),
            class: None,
            probs: None,
            latency_s: None,
            destination: String::new(),
            status: Status::Failed,
            sha256: sha256.clone(),
        };

        if !first_time {
            let path = self.store(
                &self.config.quarantine_dir(),
                &format!("{stem}.duplicate"),
                bytes,
            )?;
            decision.status = Status::Duplicate;
            decision.destination = path.display().to_string();
            return self.finish(decision, None, source, None);
        }

        let image = parsed.and_then(|_| preprocess_to(bytes, backend.input_size()));
        let image = match image {
            Ok(image) => image,
            Err(e) => {
                let path = self.store(&self.config.quarantine_dir(), &stem, bytes)?;
                decision.destination = path.display().to_string();
                let problem = Problem::Input(InputProblem::from_pipeline(&e));
                return self.finish(decision, Some(problem), source, None);
            }
        };

        let prediction = match predict(backend, &image) {
            Ok(p) => p,
            Err(e) => {
                // a later retry of the same bytes should not count as a duplicate
                self.seen
                    .lock()
                    .unwrap_or_else(|e| e.into_inner())
                    .remove(&sha256);
                let path = self.store(&self.config.failed_dir(), &stem, bytes)?;
                decision.destination = path.display().to_string();
                return self.finish(
                    decision,
                    Some(Problem::Backend(e.to_string())),
                    source,
                    None,
                );
            }
        };
        decision.class = Some(prediction.class);
        decision.probs = Some(prediction.probabilities);
        decision.latency_s = Some(prediction.latency_s);

        if prediction.confidence() < self.config.threshold {
            let path = self.store(&self.config.review_dir(), &stem, bytes)?;
            self.review
                .enqueue(ReviewItem::new(
                    id.clone(),
                    prediction.probabilities,
                    prediction.class,
                ))
                .map_err(|e| IngestError::Storage(e.to_string()))?;
            decision.status = Status::QueuedForReview;
            decision.destination = path.display().to_string();
            return self.finish(decision, None, source, Some(path));
        }

        let meta = DeliveryMeta {
            id: &id,
            class: prediction.class.name(),
            confidence: prediction.confidence(),
            sha256: &sha256,
        };
        let backoff = Duration::from_millis(self.config.retry_backoff_ms);
        match delivery::deliver(
            bytes,
            &stem,
            self.config.destination(prediction.class),
            &meta,
            backoff,
        ) {
            Ok(done) => {
                decision.status = Status::Routed;
                let stored = Path::new(&done.location)
                    .is_file()
                    .then(|| PathBuf::from(&done.location));
                decision.destination = done.location;
                self.finish(decision, None, source, stored)
            }
            Err(e) => {
                let path = self.store(&self.config.failed_dir(), &stem, bytes)?;
                decision.destination = path.display().to_string();
                self.finish(
                    decision,
                    Some(Problem::Delivery(e.to_string())),
                    source,
                    Some(path),
                )
            }
        }
    }

    fn store(&self, dir: &Path, stem: &str, bytes: &[u8]) -> Result<PathBuf, IngestError> {
        delivery::store(dir, stem, bytes).map_err(|e| IngestError::Storage(e.to_string()))
    }

    /// Removes the inbox copy, records the item location and appends the
    /// audit record.
    fn finish(
        &self,
        mut decision: RoutingDecision,
        problem: Option<Problem>,
        source: Option<&Path>,
        stored: Option<PathBuf>,
    ) -> Result<Ingested, IngestError> {
        if let Some(src) = source {
            if let Err(e) = std::fs::remove_file(src) {
                tracing::warn!(path = %src.display(), error = %e, "cannot remove ingested file");
            }
        }
        if let Some(path) = stored {
            self.locations
                .lock()
                .unwrap_or_else(|e| e.into_inner())
                .insert(decision.id.clone(), path);
        }
        decision.ts = Utc::now();
        if let Err(e) = self.audit.append(&decision) {
            tracing::error!(error = %e, "audit append failed; disabling ingest");
            self.degraded.store(true, Ordering::SeqCst);
            return Err(IngestError::AuditWrite(e));
        }
        tracing::info!(
            id = %decision.id,
            status = ?decision.status,
            destination = %decision.destination,
            "ingested"
        );
        Ok(Ingested { decision, problem })
    }

    /// PNG rendition of a stored item, if its file is still on disk.
    pub fn image_png(&self, id: &str) -> Option<Result<Vec<u8>, PipelineError>> {
        let path = self
            .locations
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .or_else(|| {
                let p = self
                    .config
                    .review_dir()
                    .join(format!("{}.dcm", safe_name(id)));
                p.is_file().then_some(p)
            })?;
        let bytes = std::fs::read(path).ok()?;
        Some(render(&bytes).map(|img| export_png(&img)))
    }
}
