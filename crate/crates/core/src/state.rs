//! Log events and the in-memory state they fold into.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::clock::Timestamp;
use crate::error::CoreError;
use crate::id::SketchId;
use crate::model::{Anchor, Annotation, DirectedLink, Link, LinkDirection, Revision, Sketch};
use crate::store::RecordKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Event {
    SketchCreated { id: SketchId, created_at: Timestamp, root: Revision },
    RevisionAdded { sketch: SketchId, revision: Revision },
    AnnotationAdded { sketch: SketchId, seq: u32, annotation: Annotation },
    LinkCreated { link: Link },
    LinkDeleted { link_id: Uuid },
}

impl Event {
    pub fn kind(&self) -> RecordKind {
        match self {
            Event::SketchCreated { .. } => RecordKind::SketchCreated,
            Event::RevisionAdded { .. } => RecordKind::RevisionAdded,
            Event::AnnotationAdded { .. } => RecordKind::AnnotationAdded,
            Event::LinkCreated { .. } => RecordKind::LinkCreated,
            Event::LinkDeleted { .. } => RecordKind::LinkDeleted,
        }
    }

    pub fn payload(&self) -> String {
        serde_json::to_string(self).expect("events always serialize")
    }

    /// Decodes a payload and checks it against the record kind it was
    /// logged under.
    pub fn decode(kind: RecordKind, payload: &str) -> Result<Self, String> {
        let event: Event = serde_json::from_str(payload).map_err(|e| e.to_string())?;
        if event.kind() != kind {
            return Err(format!("payload does not match record kind {kind}"));
        }
        Ok(event)
    }
}

#[derive(Debug, Default)]
pub struct State {
    sketches: HashMap<SketchId, Sketch>,
    creation_order: Vec<SketchId>,
    links: HashMap<Uuid, Link>,
    link_order: Vec<Uuid>,
    links_by_sketch: HashMap<SketchId, Vec<Uuid>>,
}

impl State {
    pub fn sketch(&self, id: &SketchId) -> Result<&Sketch, CoreError> {
        self.sketches.get(id).ok_or(CoreError::UnknownSketch(*id))
    }

    pub fn contains(&self, id: &SketchId) -> bool {
        self.sketches.contains_key(id)
    }

    /// Sketches in creation order.
    pub fn sketches(&self) -> impl DoubleEndedIterator<Item = &Sketch> {
        self.creation_order.iter().map(|id| &self.sketches[id])
    }

    /// Links in creation order.
    pub fn links(&self) -> impl Iterator<Item = &Link> {
        self.link_order.iter().map(|id| &self.links[id])
    }

    pub fn link(&self, id: &Uuid) -> Option<&Link> {
        self.links.get(id)
    }

    /// Every link touching `sketch`, in creation order. A link whose both
    /// ends sit on `sketch` appears twice, once per direction.
    pub fn links_of(&self, sketch: &SketchId) -> Vec<DirectedLink> {
        let mut out = Vec::new();
        for id in self.links_by_sketch.get(sketch).into_iter().flatten() {
            let link = &self.links[id];
            if link.source.sketch == *sketch {
                out.push(DirectedLink { direction: LinkDirection::Outgoing, link: link.clone() });
            }
            if link.target.sketch == *sketch {
                out.push(DirectedLink { direction: LinkDirection::Incoming, link: link.clone() });
            }
        }
        out
    }

    pub fn check_anchor(&self, anchor: &Anchor) -> Result<(), CoreError> {
        let sketch = self
            .sketches
            .get(&anchor.sketch)
            .ok_or_else(|| CoreError::UnknownAnchor(format!("no sketch {}", anchor.sketch)))?;
        if let Some(seq) = anchor.revision {
            if sketch.revision(seq).is_none() {
                return Err(CoreError::UnknownAnchor(format!(
                    "sketch {} has no revision {seq}",
                    anchor.sketch
                )));
            }
        }
        Ok(())
    }

    /// Structural checks an event must pass before it may be logged or
    /// replayed.
    pub fn validate(&self, event: &Event) -> Result<(), CoreError> {
        match event {
            Event::SketchCreated { id, created_at, root } => {
                if self.contains(id) {
                    return Err(CoreError::DuplicateId(*id));
                }
                if root.seq != 1 || !root.annotations.is_empty() || root.created_at != *created_at {
                    return Err(CoreError::MalformedRecord(format!("malformed root revision for {id}")));
                }
                Ok(())
            }
            Event::RevisionAdded { sketch, revision } => {
                let head = self.sketch(sketch)?.head();
                if revision.seq != head.seq + 1 {
                    return Err(CoreError::StaleHead {
                        expected: revision.seq.saturating_sub(1),
                        actual: head.seq,
                    });
                }
                if revision.commit_message.trim().is_empty() {
                    return Err(CoreError::EmptyCommitMessage);
                }
                if revision.created_at < head.created_at || !revision.annotations.is_empty() {
                    return Err(CoreError::MalformedRecord(format!(
                        "malformed revision {} for {sketch}",
                        revision.seq
                    )));
                }
                Ok(())
            }
            Event::AnnotationAdded { sketch, seq, annotation } => {
                self.sketch(sketch)?
                    .revision(*seq)
                    .ok_or(CoreError::UnknownRevision { sketch: *sketch, seq: *seq })?;
                annotation.content.validate()
            }
            Event::LinkCreated { link } => {
                self.check_anchor(&link.source)?;
                self.check_anchor(&link.target)?;
                if link.source == link.target {
                    return Err(CoreError::SelfLink);
                }
                if self.links.contains_key(&link.id) {
                    return Err(CoreError::MalformedRecord(format!("link id {} reused", link.id)));
                }
                Ok(())
            }
            Event::LinkDeleted { link_id } => match self.links.contains_key(link_id) {
                true => Ok(()),
                false => Err(CoreError::UnknownLink(*link_id)),
            },
        }
    }

    /// Folds a validated event into the state.
    pub fn apply(&mut self, event: Event) {
        match event {
            Event::SketchCreated { id, created_at, root } => {
                self.sketches.insert(id, Sketch { id, created_at, revisions: vec![root] });
                self.creation_order.push(id);
            }
            Event::RevisionAdded { sketch, revision } => {
                self.sketches.get_mut(&sketch).expect("validated").revisions.push(revision);
            }
            Event::AnnotationAdded { sketch, seq, annotation } => {
                let sketch = self.sketches.get_mut(&sketch).expect("validated");
                sketch.revisions[seq as usize - 1].annotations.push(annotation);
            }
            Event::LinkCreated { link } => {
                let id = link.id;
                for sketch in [link.source.sketch, link.target.sketch] {
                    let ids = self.links_by_sketch.entry(sketch).or_default();
                    if !ids.contains(&id) {
                        ids.push(id);
                    }
                }
                self.links.insert(id, link);
                self.link_order.push(id);
            }
            Event::LinkDeleted { link_id } => {
                if let Some(link) = self.links.remove(&link_id) {
                    for sketch in [link.source.sketch, link.target.sketch] {
                        if let Some(ids) = self.links_by_sketch.get_mut(&sketch) {
                            ids.retain(|id| *id != link_id);
                        }
                    }
                    self.link_order.retain(|id| *id != link_id);
                }
            }
        }
    }
}
