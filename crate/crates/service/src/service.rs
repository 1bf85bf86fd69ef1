use std::sync::Arc;

use roundtrip_core::{
    Annotation, AnnotationContent, BlobRef, CoreError, DirectedLink, Link, Medium, NewRevision, Revision,
    SketchId, Sketchbook,
};
use roundtrip_identity::{
    detect_label_in_capture, generate_label_sheet, generate_labels_for, load_raster, sniff_raster,
    IdentityError,
};
use uuid::Uuid;

use crate::api::*;

/// The API implemented directly on a [`Sketchbook`]. Cheap to clone.
#[derive(Debug, Clone)]
pub struct Service {
    book: Arc<Sketchbook>,
}

/// What the ingest pipeline read off an uploaded image.
struct LabelReading {
    id: Option<SketchId>,
    warnings: Vec<String>,
}

impl Service {
    pub fn new(book: Sketchbook) -> Self {
        Self { book: Arc::new(book) }
    }

    pub fn from_shared(book: Arc<Sketchbook>) -> Self {
        Self { book }
    }

    pub fn book(&self) -> &Sketchbook {
        &self.book
    }

    fn store_image(&self, bytes: &[u8]) -> ApiResult<BlobRef> {
        let format = sniff_raster(bytes)
            .ok_or_else(|| ApiError::unsupported_media("upload is not a PNG or JPEG image"))?;
        Ok(self.book.put_blob(bytes, format.mime())?)
    }

    fn read_label(bytes: &[u8]) -> ApiResult<LabelReading> {
        let image = load_raster(bytes)?;
        match detect_label_in_capture(&image) {
            Ok(Some(found)) => {
                let warnings = found
                    .others
                    .iter()
                    .map(|other| {
                        format!(
                            "image shows more than one label; used {} (top-left), ignored {other}",
                            found.id
                        )
                    })
                    .collect();
                Ok(LabelReading { id: Some(found.id), warnings })
            }
            Ok(None) => Ok(LabelReading { id: None, warnings: Vec::new() }),
            Err(IdentityError::PayloadNotUuid(payload)) => Ok(LabelReading {
                id: None,
                warnings: vec![format!("ignored a QR code that is not a sketch label (payload {payload:?})")],
            }),
            Err(e) => Err(e.into()),
        }
    }

    fn append_to_head(
        &self,
        id: SketchId,
        image: BlobRef,
        commit_message: String,
        request: &IngestRequest,
    ) -> ApiResult<Revision> {
        loop {
            let head = self.book.sketch(&id)?.head_seq();
            let new = NewRevision {
                image: image.clone(),
                medium: request.medium.unwrap_or(Medium::AnalogCapture),
                commit_message: commit_message.clone(),
                expected_head: head,
                carry_metadata: request.carry_metadata.unwrap_or(true),
                metadata: request.metadata.clone(),
            };
            match self.book.add_revision(&id, new) {
                Err(CoreError::StaleHead { .. }) => continue,
                other => return Ok(other?),
            }
        }
    }

    /// Validates the annotation before its media blob is written.
    fn media_annotation(
        &self,
        id: &SketchId,
        mime: &str,
        bytes: &[u8],
        wrap: fn(BlobRef) -> AnnotationContent,
    ) -> ApiResult<AnnotationContent> {
        let placeholder = BlobRef { hash: String::new(), mime: mime.to_string(), size: 0 };
        wrap(placeholder).validate()?;
        self.book.sketch(id)?;
        Ok(wrap(self.book.put_blob(bytes, mime)?))
    }

    fn find_blob(&self, hash: &str) -> Option<BlobRef> {
        self.book.sketches().into_iter().find_map(|sketch| {
            sketch.revisions.into_iter().find_map(|revision| {
                if revision.image.hash == hash {
                    return Some(revision.image);
                }
                revision
                    .annotations
                    .into_iter()
                    .find_map(|a| a.content.blob().filter(|b| b.hash == hash).cloned())
            })
        })
    }
}

impl Api for Service {
    /// Label in the image first, then the explicit id, then a fresh one.
    fn ingest(&self, request: IngestRequest) -> ApiResult<IngestOutcome> {
        if sniff_raster(&request.image).is_none() {
            return Err(ApiError::unsupported_media("upload is not a PNG or JPEG image"));
        }
        let LabelReading { id: label, mut warnings } = Self::read_label(&request.image)?;

        if let (Some(label), Some(explicit)) = (label, request.uuid) {
            if label != explicit {
                warnings.push(format!("image label {label} takes precedence over requested id {explicit}"));
            }
        }

        if let Some(id) = label.filter(|id| self.book.contains(id)) {
            let message = request
                .commit_message
                .as_deref()
                .map(str::trim)
                .filter(|m| !m.is_empty())
                .ok_or_else(|| ApiError::commit_message_required(id))?
                .to_string();
            let image = self.store_image(&request.image)?;
            let revision = self.append_to_head(id, image, message, &request)?;
            return Ok(IngestOutcome {
                path: IngestPath::RevisionAppended,
                sketch: id,
                seq: revision.seq,
                label: Some(id),
                revision,
                warnings,
            });
        }

        let image = self.store_image(&request.image)?;
        let sketch = self.book.create_sketch(
            label.or(request.uuid),
            image,
            request.medium.unwrap_or(Medium::AnalogCapture),
            request.metadata.clone(),
        )?;
        let revision = sketch.head().clone();
        Ok(IngestOutcome {
            path: IngestPath::SketchCreated,
            sketch: sketch.id,
            seq: revision.seq,
            label,
            revision,
            warnings,
        })
    }

    fn list_sketches(&self) -> ApiResult<Vec<SketchSummary>> {
        Ok(self.book.sketches().iter().map(SketchSummary::of).collect())
    }

    fn sketch(&self, id: SketchId) -> ApiResult<SketchDetail> {
        let sketch = self.book.sketch(&id)?;
        let links = self.book.list_links(&id)?;
        Ok(SketchDetail {
            id: sketch.id,
            created_at: sketch.created_at,
            head_seq: sketch.head_seq(),
            revisions: sketch.revisions,
            links,
        })
    }

    fn add_revision(&self, id: SketchId, upload: RevisionUpload) -> ApiResult<Revision> {
        // Unknown sketches are reported before the blob is written.
        self.book.sketch(&id)?;
        let image = self.store_image(&upload.image)?;
        Ok(self.book.add_revision(
            &id,
            NewRevision {
                image,
                medium: upload.medium,
                commit_message: upload.commit_message,
                expected_head: upload.expected_head,
                carry_metadata: upload.carry_metadata,
                metadata: upload.metadata,
            },
        )?)
    }

    fn attach_annotation(&self, id: SketchId, seq: u32, upload: AnnotationUpload) -> ApiResult<Annotation> {
        let content = match upload {
            AnnotationUpload::Text(body) => AnnotationContent::Text { body },
            AnnotationUpload::Audio { mime, bytes } => {
                self.media_annotation(&id, &mime, &bytes, |blob| AnnotationContent::Audio { blob })?
            }
            AnnotationUpload::Video { mime, bytes } => {
                self.media_annotation(&id, &mime, &bytes, |blob| AnnotationContent::Video { blob })?
            }
        };
        Ok(self.book.attach_annotation(&id, seq, content)?)
    }

    fn list_links(&self, id: SketchId) -> ApiResult<Vec<DirectedLink>> {
        Ok(self.book.list_links(&id)?)
    }

    fn create_link(&self, request: CreateLinkRequest) -> ApiResult<Link> {
        Ok(self.book.create_link(&request.source, &request.target, request.label)?)
    }

    fn delete_link(&self, id: Uuid) -> ApiResult<()> {
        Ok(self.book.delete_link(&id)?)
    }

    fn scan(&self, image: Vec<u8>) -> ApiResult<ScanResult> {
        if sniff_raster(&image).is_none() {
            return Err(ApiError::unsupported_media("upload is not a PNG or JPEG image"));
        }
        let found = match detect_label_in_capture(&load_raster(&image)?)? {
            Some(found) => found,
            None => return Ok(ScanResult::NoCode),
        };
        if !self.book.contains(&found.id) {
            return Ok(ScanResult::UnknownId { uuid: found.id });
        }
        let (sketch, head) = self.book.resolve(&found.id)?;
        let links = self.book.list_links(&found.id)?;
        let warnings = found
            .others
            .iter()
            .map(|other| format!("image shows more than one label; ignored {other}"))
            .collect();
        Ok(ScanResult::Resolved { sketch: SketchSummary::of(&sketch), head, links, warnings })
    }

    fn label_sheet(&self, for_sketch: Option<SketchId>) -> ApiResult<LabelSheetDocument> {
        let sheet = match for_sketch {
            Some(id) => {
                self.book.sketch(&id)?;
                generate_labels_for(id)
            }
            None => generate_label_sheet(None)?,
        };
        Ok(LabelSheetDocument { ids: sheet.distinct_ids(), svg: sheet.svg })
    }

    fn revision_image(&self, id: SketchId, seq: u32) -> ApiResult<Download> {
        let sketch = self.book.sketch(&id)?;
        let revision = sketch.revision(seq).ok_or(CoreError::UnknownRevision { sketch: id, seq })?;
        Ok(Download { mime: revision.image.mime.clone(), bytes: self.book.get_blob(&revision.image)? })
    }

    fn blob(&self, hash: &str) -> ApiResult<Download> {
        let bytes = self.book.get_blob_by_hash(hash)?;
        let mime =
            self.find_blob(hash).map(|b| b.mime).unwrap_or_else(|| "application/octet-stream".to_string());
        Ok(Download { mime, bytes })
    }
}
