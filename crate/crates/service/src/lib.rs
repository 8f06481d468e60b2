//! DICOM body-part router: classifies incoming radiographs and forwards
//! them per class, holding low-confidence images for human review.

pub mod api;
pub mod audit;
pub mod config;
pub mod delivery;
pub mod fsutil;
pub mod review;
pub mod router;
pub mod samples;
pub mod watch;

pub use audit::{replay, AuditLog, AuditRecord, Replay, Status};
pub use config::{Destination, RouteConfig, SecondRound};
pub use router::{Classification, IngestError, Ingested, Router, RoutingDecision};
pub use watch::Watcher;
