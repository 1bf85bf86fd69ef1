use std::path::Path;
use std::sync::{Arc, Mutex, MutexGuard, RwLock, RwLockReadGuard};

use serde::Serialize;
use uuid::Uuid;

use crate::clock::{Clock, SystemClock};
use crate::error::{CoreError, Result, StoreError};
use crate::id::{IdSource, RandomIds, SketchId};
use crate::model::{
    Anchor, AnchorRequest, Annotation, AnnotationContent, DirectedLink, Link, Medium, Metadata, Rect,
    Revision, RevisionSummary, Sketch,
};
use crate::state::{Event, State};
use crate::store::{BlobRef, Store};

/// Raster formats a revision image may have.
pub const IMAGE_MIME_TYPES: [&str; 2] = ["image/png", "image/jpeg"];

/// Input for [`Sketchbook::add_revision`].
#[derive(Debug, Clone)]
pub struct NewRevision {
    pub image: BlobRef,
    pub medium: Medium,
    pub commit_message: String,
    /// Head seq the caller based this revision on.
    pub expected_head: u32,
    /// Start from the previous head's metadata. Fields set in `metadata`
    /// are laid on top, so an empty `metadata` copies the head exactly.
    pub carry_metadata: bool,
    pub metadata: Metadata,
}

/// The sketch collection: every lifecycle operation, backed by a [`Store`].
///
/// Writes are serialized through one writer lock and become visible only
/// after their record is durable. Reads take a shared lock on the replayed
/// state and return owned snapshots.
pub struct Sketchbook {
    store: Store,
    state: RwLock<State>,
    writer: Mutex<()>,
    clock: Arc<dyn Clock>,
    ids: Arc<dyn IdSource>,
}

impl std::fmt::Debug for Sketchbook {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Sketchbook").field("root", &self.store.root()).finish_non_exhaustive()
    }
}

#[derive(Serialize)]
struct StateDump<'a> {
    sketches: Vec<&'a Sketch>,
    links: Vec<&'a Link>,
}

impl Sketchbook {
    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        Self::open_with(root, Arc::new(SystemClock), Arc::new(RandomIds))
    }

    /// Opens with explicit time and id sources (deterministic replays in tests).
    pub fn open_with(root: impl AsRef<Path>, clock: Arc<dyn Clock>, ids: Arc<dyn IdSource>) -> Result<Self> {
        let (store, records) = Store::open(root)?;
        let mut state = State::default();
        for record in records {
            let corrupt = |reason: String| StoreError::CorruptLog { line: record.seq as usize, reason };
            let event = Event::decode(record.kind, &record.payload).map_err(corrupt)?;
            state.validate(&event).map_err(|e| corrupt(e.to_string()))?;
            state.apply(event);
        }
        check_blob_references(&store, &state)?;

        Ok(Self { store, state: RwLock::new(state), writer: Mutex::new(()), clock, ids })
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    fn read(&self) -> RwLockReadGuard<'_, State> {
        self.state.read().expect("state lock poisoned")
    }

    fn lock_writer(&self) -> MutexGuard<'_, ()> {
        self.writer.lock().expect("writer lock poisoned")
    }

    /// Validates, logs and applies `event`. Callers hold the writer lock.
    fn commit(&self, event: Event) -> Result<()> {
        self.read().validate(&event)?;
        self.store.append_record(event.kind(), &event.payload())?;
        self.state.write().expect("state lock poisoned").apply(event);
        Ok(())
    }

    pub fn put_blob(&self, bytes: &[u8], mime: &str) -> Result<BlobRef> {
        Ok(self.store.put_blob(bytes, mime)?)
    }

    pub fn get_blob(&self, blob: &BlobRef) -> Result<Vec<u8>> {
        Ok(self.store.get_blob(blob)?)
    }

    pub fn get_blob_by_hash(&self, hash: &str) -> Result<Vec<u8>> {
        Ok(self.store.blobs().get(hash)?)
    }

    fn require_blob(&self, blob: &BlobRef) -> Result<()> {
        if self.store.blobs().contains(&blob.hash) {
            Ok(())
        } else {
            Err(CoreError::MissingBlob(blob.hash.clone()))
        }
    }

    fn require_image(&self, image: &BlobRef) -> Result<()> {
        if !IMAGE_MIME_TYPES.contains(&image.mime.as_str()) {
            return Err(CoreError::UnsupportedMedia(image.mime.clone()));
        }
        self.require_blob(image)
    }

    /// Creates a sketch whose root revision shows `image`. With `id: None`
    /// a fresh UUID is minted; otherwise the given id (typically read off a
    /// pre-printed label) is bound.
    pub fn create_sketch(
        &self,
        id: Option<SketchId>,
        image: BlobRef,
        medium: Medium,
        metadata: Metadata,
    ) -> Result<Sketch> {
        self.require_image(&image)?;
        let _writer = self.lock_writer();
        let id = match id {
            Some(id) => id,
            None => loop {
                let candidate = self.ids.next_sketch_id();
                if !self.read().contains(&candidate) {
                    break candidate;
                }
            },
        };
        if self.read().contains(&id) {
            return Err(CoreError::DuplicateId(id));
        }
        let created_at = self.clock.now();
        let root = Revision {
            seq: 1,
            image,
            medium,
            commit_message: String::new(),
            metadata: metadata.normalized(),
            annotations: Vec::new(),
            created_at,
        };
        self.commit(Event::SketchCreated { id, created_at, root })?;
        self.sketch(&id)
    }

    /// Appends a revision on top of `expected_head`. Fails with
    /// [`CoreError::StaleHead`] if another revision landed first.
    pub fn add_revision(&self, sketch: &SketchId, new: NewRevision) -> Result<Revision> {
        let commit_message = new.commit_message.trim().to_string();
        self.require_image(&new.image)?;
        let _writer = self.lock_writer();
        let revision = {
            let state = self.read();
            let head = state.sketch(sketch)?.head();
            if commit_message.is_empty() {
                return Err(CoreError::EmptyCommitMessage);
            }
            if new.expected_head != head.seq {
                return Err(CoreError::StaleHead { expected: new.expected_head, actual: head.seq });
            }
            let metadata = if new.carry_metadata {
                head.metadata.overlaid_with(&new.metadata)
            } else {
                new.metadata.normalized()
            };
            Revision {
                seq: head.seq + 1,
                image: new.image,
                medium: new.medium,
                commit_message,
                metadata,
                annotations: Vec::new(),
                // Never earlier than the head, whatever the wall clock says.
                created_at: self.clock.now().max(head.created_at),
            }
        };
        self.commit(Event::RevisionAdded { sketch: *sketch, revision: revision.clone() })?;
        Ok(revision)
    }

    pub fn get_history(&self, sketch: &SketchId) -> Result<Vec<RevisionSummary>> {
        Ok(self.read().sketch(sketch)?.revisions.iter().map(Revision::summary).collect())
    }

    pub fn attach_annotation(
        &self,
        sketch: &SketchId,
        seq: u32,
        content: AnnotationContent,
    ) -> Result<Annotation> {
        content.validate()?;
        if let Some(blob) = content.blob() {
            self.require_blob(blob)?;
        }
        let _writer = self.lock_writer();
        self.read()
            .sketch(sketch)?
            .revision(seq)
            .ok_or(CoreError::UnknownRevision { sketch: *sketch, seq })?;
        let annotation = Annotation { id: self.ids.next_uuid(), content, created_at: self.clock.now() };
        self.commit(Event::AnnotationAdded { sketch: *sketch, seq, annotation: annotation.clone() })?;
        Ok(annotation)
    }

    fn resolve_anchor(state: &State, request: &AnchorRequest) -> Result<Anchor> {
        let region = request.region.map(Rect::try_from).transpose()?;
        let sketch = state
            .sketch(&request.sketch)
            .map_err(|_| CoreError::UnknownAnchor(format!("no sketch {}", request.sketch)))?;
        let revision = match (request.revision, request.follow_latest) {
            (Some(seq), _) => Some(seq),
            (None, true) => None,
            (None, false) => Some(sketch.head_seq()),
        };
        let anchor = Anchor { sketch: request.sketch, revision, region };
        state.check_anchor(&anchor)?;
        Ok(anchor)
    }

    pub fn create_link(
        &self,
        source: &AnchorRequest,
        target: &AnchorRequest,
        label: Option<String>,
    ) -> Result<Link> {
        let _writer = self.lock_writer();
        let link = {
            let state = self.read();
            let source = Self::resolve_anchor(&state, source)?;
            let target = Self::resolve_anchor(&state, target)?;
            if source == target {
                return Err(CoreError::SelfLink);
            }
            Link {
                id: self.ids.next_uuid(),
                source,
                target,
                label: label.map(|l| l.trim().to_string()).filter(|l| !l.is_empty()),
                created_at: self.clock.now(),
            }
        };
        self.commit(Event::LinkCreated { link: link.clone() })?;
        Ok(link)
    }

    pub fn list_links(&self, sketch: &SketchId) -> Result<Vec<DirectedLink>> {
        let state = self.read();
        state.sketch(sketch)?;
        Ok(state.links_of(sketch))
    }

    pub fn link(&self, id: &Uuid) -> Option<Link> {
        self.read().link(id).cloned()
    }

    pub fn delete_link(&self, id: &Uuid) -> Result<()> {
        let _writer = self.lock_writer();
        self.commit(Event::LinkDeleted { link_id: *id })
    }

    /// The sketch and its head revision, the view a scanned label opens.
    pub fn resolve(&self, id: &SketchId) -> Result<(Sketch, Revision)> {
        let sketch = self.sketch(id)?;
        let head = sketch.head().clone();
        Ok((sketch, head))
    }

    pub fn sketch(&self, id: &SketchId) -> Result<Sketch> {
        self.read().sketch(id).cloned()
    }

    pub fn contains(&self, id: &SketchId) -> bool {
        self.read().contains(id)
    }

    /// All sketches, most recently created first.
    pub fn sketches(&self) -> Vec<Sketch> {
        self.read().sketches().rev().cloned().collect()
    }

    /// Canonical JSON rendering of the whole state: sketches and links in
    /// creation order. Equal states render to identical bytes.
    pub fn export_state(&self) -> String {
        let state = self.read();
        let dump = StateDump { sketches: state.sketches().collect(), links: state.links().collect() };
        serde_json::to_string_pretty(&dump).expect("state always serializes")
    }
}

fn check_blob_references(store: &Store, state: &State) -> Result<(), StoreError> {
    for sketch in state.sketches() {
        for revision in &sketch.revisions {
            let blobs = std::iter::once(&revision.image)
                .chain(revision.annotations.iter().filter_map(|a| a.content.blob()));
            for blob in blobs {
                if !store.blobs().contains(&blob.hash) {
                    return Err(StoreError::CorruptLog {
                        line: 0,
                        reason: format!(
                            "sketch {} revision {} references missing blob {}",
                            sketch.id, revision.seq, blob.hash
                        ),
                    });
                }
            }
        }
    }
    Ok(())
}
