//! Request and response types of the REST API, and the [`Api`] trait that
//! both the in-process [`Service`](crate::Service) and remote clients
//! implement.

use roundtrip_core::{
    AnchorRequest, Annotation, CoreError, DirectedLink, Link, Medium, Metadata, Revision, Sketch, SketchId,
    StoreError, Timestamp,
};
use roundtrip_identity::IdentityError;
use serde::{Deserialize, Serialize};
use uuid::Uuid;

/// Error body returned by every failing endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{code}: {message}")]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub message: String,
}

/// HTTP status for an error code. Unlisted codes are server faults.
pub fn status_for_code(code: &str) -> u16 {
    match code {
        "bad-request" | "invalid-id" | "invalid-hash" => 400,
        "unknown-sketch" | "unknown-revision" | "unknown-link" | "unknown-blob" | "not-found" => 404,
        "duplicate-id" | "stale-head" => 409,
        "payload-too-large" => 413,
        "unsupported-media-type" => 415,
        "empty-commit-message"
        | "commit-message-required"
        | "missing-blob"
        | "invalid-annotation"
        | "unknown-anchor"
        | "invalid-region"
        | "self-link"
        | "empty-blob"
        | "unreadable-image"
        | "payload-not-uuid"
        | "wrong-count"
        | "payload-too-long" => 422,
        _ => 500,
    }
}

impl ApiError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        Self { status: status_for_code(code), code: code.to_string(), message: message.into() }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new("bad-request", message)
    }

    pub fn commit_message_required(sketch: SketchId) -> Self {
        Self::new(
            "commit-message-required",
            format!("the label belongs to existing sketch {sketch}; a commit message is required to add a revision"),
        )
    }

    pub fn unsupported_media(what: impl Into<String>) -> Self {
        Self::new("unsupported-media-type", format!("{}; images must be PNG or JPEG", what.into()))
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        ApiError::new(e.code(), e.to_string())
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError::new(e.code(), e.to_string())
    }
}

impl From<IdentityError> for ApiError {
    fn from(e: IdentityError) -> Self {
        ApiError::new(e.code(), e.to_string())
    }
}

pub type ApiResult<T> = Result<T, ApiError>;

/// Entry of the sketch overview.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SketchSummary {
    pub id: SketchId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub head_seq: u32,
    pub created_at: Timestamp,
    pub updated_at: Timestamp,
    /// Path of the head image, usable as a thumbnail source.
    pub thumbnail: String,
}

impl SketchSummary {
    pub fn of(sketch: &Sketch) -> Self {
        let head = sketch.head();
        Self {
            id: sketch.id,
            title: head.metadata.title.clone(),
            head_seq: head.seq,
            created_at: sketch.created_at,
            updated_at: head.created_at,
            thumbnail: image_path(sketch.id, head.seq),
        }
    }
}

pub fn image_path(id: SketchId, seq: u32) -> String {
    format!("/api/sketches/{id}/revisions/{seq}/image")
}

/// A sketch with its whole history and every link touching it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SketchDetail {
    pub id: SketchId,
    pub created_at: Timestamp,
    pub head_seq: u32,
    pub revisions: Vec<Revision>,
    pub links: Vec<DirectedLink>,
}

/// Upload handled by the ingest pipeline.
#[derive(Debug, Clone, Default)]
pub struct IngestRequest {
    pub image: Vec<u8>,
    /// Id to bind when the image carries no label.
    pub uuid: Option<SketchId>,
    /// Needed only when the label resolves to an existing sketch.
    pub commit_message: Option<String>,
    pub medium: Option<Medium>,
    pub metadata: Metadata,
    /// Applies to revision appends; defaults to carrying metadata over.
    pub carry_metadata: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IngestPath {
    SketchCreated,
    RevisionAppended,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestOutcome {
    pub path: IngestPath,
    pub sketch: SketchId,
    pub seq: u32,
    /// Label id read from the image, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<SketchId>,
    pub revision: Revision,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RevisionUpload {
    pub image: Vec<u8>,
    pub commit_message: String,
    pub expected_head: u32,
    pub carry_metadata: bool,
    pub medium: Medium,
    pub metadata: Metadata,
}

#[derive(Debug, Clone)]
pub enum AnnotationUpload {
    Text(String),
    Audio { mime: String, bytes: Vec<u8> },
    Video { mime: String, bytes: Vec<u8> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateLinkRequest {
    pub source: AnchorRequest,
    pub target: AnchorRequest,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
#[allow(clippy::large_enum_variant)]
pub enum ScanResult {
    Resolved {
        sketch: SketchSummary,
        head: Revision,
        links: Vec<DirectedLink>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        warnings: Vec<String>,
    },
    UnknownId {
        uuid: SketchId,
    },
    NoCode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSheetDocument {
    /// Distinct ids on the sheet, top row first.
    pub ids: Vec<SketchId>,
    pub svg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Download {
    pub mime: String,
    pub bytes: Vec<u8>,
}

/// Every operation exposed over HTTP.
pub trait Api {
    fn ingest(&self, request: IngestRequest) -> ApiResult<IngestOutcome>;
    fn list_sketches(&self) -> ApiResult<Vec<SketchSummary>>;
    fn sketch(&self, id: SketchId) -> ApiResult<SketchDetail>;
    fn add_revision(&self, id: SketchId, upload: RevisionUpload) -> ApiResult<Revision>;
    fn attach_annotation(&self, id: SketchId, seq: u32, upload: AnnotationUpload) -> ApiResult<Annotation>;
    fn list_links(&self, id: SketchId) -> ApiResult<Vec<DirectedLink>>;
    fn create_link(&self, request: CreateLinkRequest) -> ApiResult<Link>;
    fn delete_link(&self, id: Uuid) -> ApiResult<()>;
    fn scan(&self, image: Vec<u8>) -> ApiResult<ScanResult>;
    fn label_sheet(&self, for_sketch: Option<SketchId>) -> ApiResult<LabelSheetDocument>;
    fn revision_image(&self, id: SketchId, seq: u32) -> ApiResult<Download>;
    fn blob(&self, hash: &str) -> ApiResult<Download>;
}
