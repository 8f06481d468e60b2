//! Low-confidence review queue with the two-reader protocol: two
//! independent readings, consensus when they agree, a third (adjudicating)
//! reading when they do not.

use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use router_core::nn::{BodyPartClass, NUM_CLASSES};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::SecondRound;

/// The reading a label belongs to. On the wire: `1`, `2` or
/// `"adjudication"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Round {
    First,
    Second,
    Adjudication,
}

impl Serialize for Round {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Round::First => s.serialize_u8(1),
            Round::Second => s.serialize_u8(2),
            Round::Adjudication => s.serialize_str("adjudication"),
        }
    }
}

impl<'de> Deserialize<'de> for Round {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Number(u64),
            Text(String),
        }
        match Wire::deserialize(d)? {
            Wire::Number(1) => Ok(Round::First),
            Wire::Number(2) => Ok(Round::Second),
            Wire::Text(t) if t == "1" => Ok(Round::First),
            Wire::Text(t) if t == "2" => Ok(Round::Second),
            Wire::Text(t) if t == "adjudication" => Ok(Round::Adjudication),
            _ => Err(serde::de::Error::custom(
                "round must be 1, 2 or \"adjudication\"",
            )),
        }
    }
}

/// A class given either by name or by integer code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ClassInput(pub BodyPartClass);

impl<'de> Deserialize<'de> for ClassInput {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Number(u64),
            Text(String),
        }
        let text = match Wire::deserialize(d)? {
            Wire::Number(n) => n.to_string(),
            Wire::Text(t) => t,
        };
        text.parse()
            .map(ClassInput)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct LabelRequest {
    pub reader: String,
    pub round: Round,
    pub class: ClassInput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub reader: String,
    pub class: BodyPartClass,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReviewState {
    PendingRound1,
    PendingRound2,
    NeedsAdjudication,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewItem {
    pub id: String,
    pub probs: [f64; NUM_CLASSES],
    /// The model's top class.
    pub predicted: BodyPartClass,
    pub max_prob: f64,
    pub queued_at: DateTime<Utc>,
    pub round1: Option<Label>,
    pub round2: Option<Label>,
    pub adjudication: Option<Label>,
    pub consensus: Option<BodyPartClass>,
    pub state: ReviewState,
}

impl ReviewItem {
    pub fn new(id: String, probs: [f64; NUM_CLASSES], predicted: BodyPartClass) -> Self {
        Self {
            id,
            probs,
            predicted,
            max_prob: probs[predicted.code()],
            queued_at: Utc::now(),
            round1: None,
            round2: None,
            adjudication: None,
            consensus: None,
            state: ReviewState::PendingRound1,
        }
    }

    /// Applies one reading, enforcing round order and reader separation.
    pub fn apply(&mut self, req: &LabelRequest, mode: SecondRound) -> Result<(), ReviewError> {
        let label = Label {
            reader: req.reader.clone(),
            class: req.class.0,
            at: Utc::now(),
        };
        match (req.round, self.state) {
            (Round::First, ReviewState::PendingRound1) => {
                let agrees_with_model = label.class == self.predicted;
                self.round1 = Some(label);
                if mode == SecondRound::Disagreements && agrees_with_model {
                    self.consensus = Some(self.predicted);
                    self.state = ReviewState::Closed;
                } else {
                    self.state = ReviewState::PendingRound2;
                }
            }
            (Round::Second, ReviewState::PendingRound2) => {
                let first = self.round1.as_ref().expect("round 1 precedes round 2");
                if first.reader == label.reader {
                    return Err(ReviewError::SameReader);
                }
                if first.class == label.class {
                    self.consensus = Some(label.class);
                    self.state = ReviewState::Closed;
                } else {
                    self.state = ReviewState::NeedsAdjudication;
                }
                self.round2 = Some(label);
            }
            (Round::Adjudication, ReviewState::NeedsAdjudication) => {
                self.consensus = Some(label.class);
                self.adjudication = Some(label);
                self.state = ReviewState::Closed;
            }
            (round, state) => return Err(ReviewError::NotPending { round, state }),
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReviewError {
    #[error("no review item {0}")]
    UnknownItem(String),
    #[error("round {round:?} is not open; item is {state:?}")]
    NotPending { round: Round, state: ReviewState },
    #[error("the second reading must come from a different reader")]
    SameReader,
    #[error("reader id is empty")]
    EmptyReader,
    #[error("cannot persist review queue: {0}")]
    Io(#[from] io::Error),
}

/// Queue persisted as `queue.json`, rewritten atomically on every change.
/// Mutations are serialized by an internal lock.
#[derive(Debug)]
pub struct ReviewQueue {
    path: PathBuf,
    mode: SecondRound,
    items: Mutex<BTreeMap<String, ReviewItem>>,
}

impl ReviewQueue {
    pub fn open(dir: &Path, mode: SecondRound) -> io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("queue.json");
        let items = match std::fs::read(&path) {
            Ok(bytes) => {
                let list: Vec<ReviewItem> = serde_json::from_slice(&bytes)?;
                list.into_iter().map(|i| (i.id.clone(), i)).collect()
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(e),
        };
        Ok(Self {
            path,
            mode,
            items: Mutex::new(items),
        })
    }

    fn persist(&self, items: &BTreeMap<String, ReviewItem>) -> io::Result<()> {
        let list: Vec<&ReviewItem> = items.values().collect();
        crate::fsutil::write_atomic(&self.path, &serde_json::to_vec_pretty(&list)?)
    }

    pub fn enqueue(&self, item: ReviewItem) -> io::Result<()> {
        let mut items = self.items.lock().unwrap_or_else(|e| e.into_inner());
        items.insert(item.id.clone(), item);
        self.persist(&items)
    }

    pub fn get(&self, id: &str) -> Option<ReviewItem> {
        let items = self.items.lock().unwrap_or_else(|e| e.into_inner());
        items.get(id).cloned()
    }

    /// Items still awaiting a reading, lowest model confidence first.
    pub fn open_items(&self) -> Vec<ReviewItem> {
        let items = self.items.lock().unwrap_or_else(|e| e.into_inner());
        let mut open: Vec<ReviewItem> = items
            .values()
            .filter(|i| i.state != ReviewState::Closed)
            .cloned()
            .collect();
        open.sort_by(|a, b| a.max_prob.total_cmp(&b.max_prob).then(a.id.cmp(&b.id)));
        open
    }

    pub fn len(&self) -> usize {
        self.items.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn label(&self, id: &str, req: &LabelRequest) -> Result<ReviewItem, ReviewError> {
        if req.reader.trim().is_empty() {
            return Err(ReviewError::EmptyReader);
        }
        let mut items = self.items.lock().unwrap_or_else(|e| e.into_inner());
        let item = items
            .get_mut(id)
            .ok_or_else(|| ReviewError::UnknownItem(id.to_string()))?;
        let before = item.clone();
        item.apply(req, self.mode)?;
        let updated = item.clone();
        if let Err(e) = self.persist(&items) {
            items.insert(id.to_string(), before);
            return Err(e.into());
        }
        Ok(updated)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(reader: &str, round: Round, class: BodyPartClass) -> LabelRequest {
        LabelRequest {
            reader: reader.into(),
            round,
            class: ClassInput(class),
        }
    }

    fn item() -> ReviewItem {
        ReviewItem::new(
            "1.2.3".into(),
            [0.3, 0.3, 0.2, 0.1, 0.1],
            BodyPartClass::Abdominal,
        )
    }

    #[test]
    fn agreeing_rounds_reach_consensus() {
        let mut it = item();
        it.apply(
            &req("a", Round::First, BodyPartClass::Spine),
            SecondRound::All,
        )
        .unwrap();
        assert_eq!(it.state, ReviewState::PendingRound2);
        it.apply(
            &req("b", Round::Second, BodyPartClass::Spine),
            SecondRound::All,
        )
        .unwrap();
        assert_eq!(it.state, ReviewState::Closed);
        assert_eq!(it.consensus, Some(BodyPartClass::Spine));
    }

    #[test]
    fn disagreement_needs_adjudication() {
        let mut it = item();
        it.apply(
            &req("a", Round::First, BodyPartClass::Spine),
            SecondRound::All,
        )
        .unwrap();
        it.apply(
            &req("b", Round::Second, BodyPartClass::Others),
            SecondRound::All,
        )
        .unwrap();
        assert_eq!(it.state, ReviewState::NeedsAdjudication);
        assert_eq!(it.consensus, None);
        it.apply(
            &req("c", Round::Adjudication, BodyPartClass::AdultChest),
            SecondRound::All,
        )
        .unwrap();
        assert_eq!(it.consensus, Some(BodyPartClass::AdultChest));
        assert_eq!(it.state, ReviewState::Closed);
    }

    #[test]
    fn out_of_order_and_same_reader_are_rejected() {
        let mut it = item();
        let spine = BodyPartClass::Spine;
        assert!(matches!(
            it.apply(&req("a", Round::Second, spine), SecondRound::All),
            Err(ReviewError::NotPending { .. })
        ));
        assert!(matches!(
            it.apply(&req("a", Round::Adjudication, spine), SecondRound::All),
            Err(ReviewError::NotPending { .. })
        ));
        it.apply(&req("a", Round::First, spine), SecondRound::All)
            .unwrap();
        assert!(matches!(
            it.apply(&req("a", Round::First, spine), SecondRound::All),
            Err(ReviewError::NotPending { .. })
        ));
        assert!(matches!(
            it.apply(&req("a", Round::Second, spine), SecondRound::All),
            Err(ReviewError::SameReader)
        ));
        assert_eq!(it.state, ReviewState::PendingRound2);
    }

    #[test]
    fn disagreement_mode_closes_on_model_agreement() {
        let mut it = item();
        it.apply(
            &req("a", Round::First, BodyPartClass::Abdominal),
            SecondRound::Disagreements,
        )
        .unwrap();
        assert_eq!(it.state, ReviewState::Closed);
        assert_eq!(it.consensus, Some(BodyPartClass::Abdominal));

        let mut other = item();
        other
            .apply(
                &req("a", Round::First, BodyPartClass::Spine),
                SecondRound::Disagreements,
            )
            .unwrap();
        assert_eq!(other.state, ReviewState::PendingRound2);
    }

    #[test]
    fn wire_format_of_rounds_and_classes() {
        let r: LabelRequest =
            serde_json::from_str(r#"{"reader":"a","round":1,"class":"spine"}"#).unwrap();
        assert_eq!(r.round, Round::First);
        assert_eq!(r.class.0, BodyPartClass::Spine);
        let r: LabelRequest =
            serde_json::from_str(r#"{"reader":"a","round":"adjudication","class":2}"#).unwrap();
        assert_eq!(r.round, Round::Adjudication);
        assert_eq!(r.class.0, BodyPartClass::PediatricChest);
        assert!(
            serde_json::from_str::<LabelRequest>(r#"{"reader":"a","round":3,"class":0}"#).is_err()
        );
        assert!(
            serde_json::from_str::<LabelRequest>(r#"{"reader":"a","round":1,"class":9}"#).is_err()
        );
        assert_eq!(serde_json::to_string(&Round::Second).unwrap(), "2");
    }

    #[test]
    fn queue_persists_and_sorts_by_confidence() {
        let dir = tempfile::tempdir().unwrap();
        let q = ReviewQueue::open(dir.path(), SecondRound::All).unwrap();
        q.enqueue(ReviewItem::new(
            "b".into(),
            [0.5, 0.5, 0.0, 0.0, 0.0],
            BodyPartClass::Abdominal,
        ))
        .unwrap();
        q.enqueue(ReviewItem::new(
            "a".into(),
            [0.8, 0.2, 0.0, 0.0, 0.0],
            BodyPartClass::Abdominal,
        ))
        .unwrap();
        let ids: Vec<_> = q.open_items().into_iter().map(|i| i.id).collect();
        assert_eq!(ids, ["b", "a"]);

        q.label("a", &req("r1", Round::First, BodyPartClass::Spine))
            .unwrap();
        q.label("a", &req("r2", Round::Second, BodyPartClass::Spine))
            .unwrap();
        assert_eq!(q.open_items().len(), 1);
        assert!(matches!(
            q.label("zz", &req("r1", Round::First, BodyPartClass::Spine)),
            Err(ReviewError::UnknownItem(_))
        ));

        let reopened = ReviewQueue::open(dir.path(), SecondRound::All).unwrap();
        assert_eq!(reopened.len(), 2);
        assert_eq!(
            reopened.get("a").unwrap().consensus,
            Some(BodyPartClass::Spine)
        );
    }
}
