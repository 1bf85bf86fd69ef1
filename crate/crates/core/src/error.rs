use std::io;
use std::path::PathBuf;

use thiserror::Error;
use uuid::Uuid;

use crate::id::SketchId;

pub type Result<T, E = CoreError> = std::result::Result<T, E>;

/// Failures of the persistence layer.
#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),

    #[error("blob {0} is not stored")]
    UnknownBlob(String),

    #[error("blob {hash} failed verification (stored bytes hash to {actual})")]
    CorruptionDetected { hash: String, actual: String },

    #[error("refusing to store an empty blob")]
    EmptyBlob,

    #[error("malformed blob hash {0:?}")]
    InvalidHash(String),

    #[error("store format version {found:?} is not supported (expected {expected:?})")]
    IncompatibleFormat { found: String, expected: String },

    #[error("record log is corrupt at line {line}: {reason}")]
    CorruptLog { line: usize, reason: String },

    #[error("store at {0} is locked by another process")]
    Locked(PathBuf),
}

/// Failures of sketch lifecycle operations.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("a sketch with id {0} already exists")]
    DuplicateId(SketchId),

    #[error("blob {0} does not exist")]
    MissingBlob(String),

    #[error("no sketch with id {0}")]
    UnknownSketch(SketchId),

    #[error("commit message must not be empty")]
    EmptyCommitMessage,

    #[error("head moved: expected revision {expected}, current head is {actual}")]
    StaleHead { expected: u32, actual: u32 },

    #[error("sketch {sketch} has no revision {seq}")]
    UnknownRevision { sketch: SketchId, seq: u32 },

    #[error("invalid annotation: {0}")]
    InvalidAnnotation(String),

    #[error("anchor does not resolve: {0}")]
    UnknownAnchor(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("a link cannot connect an anchor to itself")]
    SelfLink,

    #[error("no link with id {0}")]
    UnknownLink(Uuid),

    #[error("{0:?} is not a canonical UUID")]
    InvalidId(String),

    #[error("unsupported media type {0:?}")]
    UnsupportedMedia(String),

    #[error("malformed record: {0}")]
    MalformedRecord(String),

    #[error(transparent)]
    Store(#[from] StoreError),
}

impl CoreError {
    /// Stable machine-readable code, used verbatim by the REST API and CLI.
    pub fn code(&self) -> &'static str {
        match self {
            CoreError::DuplicateId(_) => "duplicate-id",
            CoreError::MissingBlob(_) => "missing-blob",
            CoreError::UnknownSketch(_) => "unknown-sketch",
            CoreError::EmptyCommitMessage => "empty-commit-message",
            CoreError::StaleHead { .. } => "stale-head",
            CoreError::UnknownRevision { .. } => "unknown-revision",
            CoreError::InvalidAnnotation(_) => "invalid-annotation",
            CoreError::UnknownAnchor(_) => "unknown-anchor",
            CoreError::InvalidRegion(_) => "invalid-region",
            CoreError::SelfLink => "self-link",
            CoreError::UnknownLink(_) => "unknown-link",
            CoreError::InvalidId(_) => "invalid-id",
            CoreError::UnsupportedMedia(_) => "unsupported-media-type",
            CoreError::MalformedRecord(_) => "malformed-record",
            CoreError::Store(e) => e.code(),
        }
    }
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::Io(_) => "io-failure",
            StoreError::UnknownBlob(_) => "unknown-blob",
            StoreError::CorruptionDetected { .. } => "corruption-detected",
            StoreError::EmptyBlob => "empty-blob",
            StoreError::InvalidHash(_) => "invalid-hash",
            StoreError::IncompatibleFormat { .. } => "incompatible-format-version",
            StoreError::CorruptLog { .. } => "corrupt-log",
            StoreError::Locked(_) => "store-locked",
        }
    }
}
