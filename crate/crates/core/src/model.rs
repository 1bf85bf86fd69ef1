//! Domain values: sketches, their revisions, annotations and anchored links.
//!
//! Everything here is a plain immutable snapshot. Mutation happens only by
//! appending events through [`crate::Sketchbook`].

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::clock::Timestamp;
use crate::error::CoreError;
use crate::id::SketchId;
use crate::store::BlobRef;

/// How a revision's image came into existence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Medium {
    /// Photo or scan of a physical sketch.
    AnalogCapture,
    /// File produced with a digital tool.
    DigitalUpload,
}

impl Medium {
    pub fn as_str(self) -> &'static str {
        match self {
            Medium::AnalogCapture => "analog-capture",
            Medium::DigitalUpload => "digital-upload",
        }
    }
}

impl std::str::FromStr for Medium {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "analog-capture" | "analog" => Ok(Medium::AnalogCapture),
            "digital-upload" | "digital" => Ok(Medium::DigitalUpload),
            other => Err(format!("unknown medium {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataEntry {
    pub key: String,
    pub value: String,
}

/// Context captured alongside an image.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<NaiveDate>,
    #[serde(default)]
    pub extra: Vec<MetadataEntry>,
}

impl Metadata {
    /// Trims authors, drops blanks and duplicates (first occurrence wins);
    /// a blank title becomes `None`.
    pub fn normalized(mut self) -> Self {
        let mut authors: Vec<String> = Vec::with_capacity(self.authors.len());
        for author in self.authors.drain(..) {
            let author = author.trim();
            if !author.is_empty() && !authors.iter().any(|a| a == author) {
                authors.push(author.to_string());
            }
        }
        self.authors = authors;
        self.title = self.title.map(|t| t.trim().to_string()).filter(|t| !t.is_empty());
        self
    }

    pub fn is_empty(&self) -> bool {
        self.title.is_none() && self.authors.is_empty() && self.date.is_none() && self.extra.is_empty()
    }

    /// `self` with every field that `edits` actually sets laid on top.
    /// Extra entries are upserted by key.
    pub fn overlaid_with(&self, edits: &Metadata) -> Metadata {
        let mut merged = self.clone();
        if edits.title.is_some() {
            merged.title = edits.title.clone();
        }
        if !edits.authors.is_empty() {
            merged.authors = edits.authors.clone();
        }
        if edits.date.is_some() {
            merged.date = edits.date;
        }
        for entry in &edits.extra {
            match merged.extra.iter_mut().find(|e| e.key == entry.key) {
                Some(existing) => existing.value = entry.value.clone(),
                None => merged.extra.push(entry.clone()),
            }
        }
        merged.normalized()
    }
}

/// Payload of an annotation; the serialized `kind` tag is text, audio or video.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AnnotationContent {
    Text { body: String },
    Audio { blob: BlobRef },
    Video { blob: BlobRef },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnotationKind {
    Text,
    Audio,
    Video,
}

impl AnnotationContent {
    pub fn kind(&self) -> AnnotationKind {
        match self {
            AnnotationContent::Text { .. } => AnnotationKind::Text,
            AnnotationContent::Audio { .. } => AnnotationKind::Audio,
            AnnotationContent::Video { .. } => AnnotationKind::Video,
        }
    }

    pub fn blob(&self) -> Option<&BlobRef> {
        match self {
            AnnotationContent::Text { .. } => None,
            AnnotationContent::Audio { blob } | AnnotationContent::Video { blob } => Some(blob),
        }
    }

    /// Text must be non-blank; media blobs must carry a MIME type of the
    /// matching family (`audio/...` or `video/...`).
    pub fn validate(&self) -> Result<(), CoreError> {
        match self {
            AnnotationContent::Text { body } if body.trim().is_empty() => {
                Err(CoreError::InvalidAnnotation("text annotation body is empty".into()))
            }
            AnnotationContent::Text { .. } => Ok(()),
            AnnotationContent::Audio { blob } => check_mime_family(&blob.mime, "audio/"),
            AnnotationContent::Video { blob } => check_mime_family(&blob.mime, "video/"),
        }
    }
}

fn check_mime_family(mime: &str, prefix: &str) -> Result<(), CoreError> {
    if mime.len() > prefix.len() && mime.to_ascii_lowercase().starts_with(prefix) {
        Ok(())
    } else {
        Err(CoreError::InvalidAnnotation(format!(
            "mime type {mime:?} does not match a {} annotation",
            prefix.trim_end_matches('/')
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub id: Uuid,
    #[serde(flatten)]
    pub content: AnnotationContent,
    pub created_at: Timestamp,
}

/// One immutable image state in a sketch's linear history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Revision {
    pub seq: u32,
    pub image: BlobRef,
    pub medium: Medium,
    pub commit_message: String,
    pub metadata: Metadata,
    #[serde(default)]
    pub annotations: Vec<Annotation>,
    pub created_at: Timestamp,
}

impl Revision {
    pub fn summary(&self) -> RevisionSummary {
        RevisionSummary {
            seq: self.seq,
            commit_message: self.commit_message.clone(),
            medium: self.medium,
            created_at: self.created_at,
            image: self.image.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevisionSummary {
    pub seq: u32,
    pub commit_message: String,
    pub medium: Medium,
    pub created_at: Timestamp,
    pub image: BlobRef,
}

/// The lineage of all revisions sharing one id. `revisions[k]` has seq `k + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sketch {
    pub id: SketchId,
    pub created_at: Timestamp,
    pub revisions: Vec<Revision>,
}

impl Sketch {
    pub fn head(&self) -> &Revision {
        self.revisions.last().expect("sketch without revisions")
    }

    pub fn head_seq(&self) -> u32 {
        self.head().seq
    }

    pub fn revision(&self, seq: u32) -> Option<&Revision> {
        let index = usize::try_from(seq).ok()?.checked_sub(1)?;
        self.revisions.get(index)
    }
}

/// Axis-aligned region in fractions of image width and height.
///
/// Construction and deserialization both enforce
/// `0 <= x0 < x1 <= 1` and `0 <= y0 < y1 <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RectSpec", into = "RectSpec")]
pub struct Rect {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

/// Unvalidated rectangle coordinates as they arrive from a client.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectSpec {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, CoreError> {
        let unit = |v: f64| v.is_finite() && (0.0..=1.0).contains(&v);
        if ![x0, y0, x1, y1].into_iter().all(unit) {
            return Err(CoreError::InvalidRegion(format!(
                "coordinates ({x0}, {y0}, {x1}, {y1}) must lie in [0, 1]"
            )));
        }
        if x0 >= x1 || y0 >= y1 {
            return Err(CoreError::InvalidRegion(format!(
                "({x0}, {y0}, {x1}, {y1}) is degenerate or inverted"
            )));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.x0, self.y0, self.x1, self.y1]
    }
}

impl TryFrom<RectSpec> for Rect {
    type Error = CoreError;

    fn try_from(spec: RectSpec) -> Result<Self, Self::Error> {
        Rect::new(spec.x0, spec.y0, spec.x1, spec.y1)
    }
}

impl From<Rect> for RectSpec {
    fn from(r: Rect) -> Self {
        RectSpec { x0: r.x0, y0: r.y0, x1: r.x1, y1: r.y1 }
    }
}

/// Resolved link endpoint. `revision: None` floats to the head at
/// resolution time; `region: None` means the whole image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub sketch: SketchId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revision: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Rect>,
}

/// Client-side description of an anchor, resolved by `create_link`.
///
/// With no `revision` the anchor is pinned to the head current at link
/// creation, unless `follow_latest` asks it to float. An explicit
/// `revision` always pins and takes precedence over `follow_latest`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorRequest {
    pub sketch: SketchId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revision: Option<u32>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub follow_latest: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RectSpec>,
}

impl AnchorRequest {
    pub fn whole(sketch: SketchId) -> Self {
        Self { sketch, revision: None, follow_latest: false, region: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub id: Uuid,
    pub source: Anchor,
    pub target: Anchor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkDirection {
    Outgoing,
    Incoming,
}

/// A link as seen from one of its endpoint sketches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectedLink {
    pub direction: LinkDirection,
    #[serde(flatten)]
    pub link: Link,
}
