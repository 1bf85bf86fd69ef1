//! Sketch lifecycle management.
//!
//! A [`Sketch`] is the lineage of every captured or digitally produced
//! image state that shares one [`SketchId`]. Revisions form a strictly
//! linear chain; concurrent writers are reconciled with an expected-head
//! check instead of branching. Revisions carry [`Metadata`] and
//! [`Annotation`]s, and [`Link`]s connect whole sketches or rectangular
//! regions of them.
//!
//! Everything is persisted by [`store::Store`]: a content-addressed blob
//! directory plus an append-only record log that is replayed on open.

mod book;
pub mod clock;
pub mod error;
pub mod id;
pub mod model;
pub mod state;
pub mod store;

pub use book::{NewRevision, Sketchbook, IMAGE_MIME_TYPES};
pub use clock::{Clock, SteppingClock, SystemClock, Timestamp};
pub use error::{CoreError, Result, StoreError};
pub use id::{IdSource, RandomIds, SeededIds, SketchId};
pub use model::{
    Anchor, AnchorRequest, Annotation, AnnotationContent, AnnotationKind, DirectedLink, Link, LinkDirection,
    Medium, Metadata, MetadataEntry, Rect, RectSpec, Revision, RevisionSummary, Sketch,
};
pub use store::BlobRef;

/// A fresh random (version-4) sketch id.
pub fn new_uuid() -> SketchId {
    RandomIds.next_sketch_id()
}
