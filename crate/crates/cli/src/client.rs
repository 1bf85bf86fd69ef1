//! [`Api`] over HTTP, talking to a running `roundtrip serve`.

use reqwest::blocking::multipart::{Form, Part};
use reqwest::blocking::{Client, RequestBuilder, Response};
use reqwest::header::CONTENT_TYPE;
use roundtrip_core::{Annotation, DirectedLink, Link, Medium, Metadata, Revision, SketchId};
use roundtrip_service::*;
use serde::de::DeserializeOwned;
use uuid::Uuid;

#[derive(Debug, Clone)]
pub struct HttpClient {
    base: String,
    http: Client,
}

fn transport_error(e: reqwest::Error) -> ApiError {
    ApiError::new("connection-failed", e.to_string())
}

fn image_part(bytes: Vec<u8>) -> Part {
    Part::bytes(bytes).file_name("image")
}

fn metadata_fields(mut form: Form, metadata: &Metadata) -> Form {
    if let Some(title) = &metadata.title {
        form = form.text("title", title.clone());
    }
    for author in &metadata.authors {
        form = form.text("author", author.clone());
    }
    if let Some(date) = metadata.date {
        form = form.text("date", date.format("%Y-%m-%d").to_string());
    }
    for entry in &metadata.extra {
        form = form.text("extra", format!("{}={}", entry.key, entry.value));
    }
    form
}

fn medium_field(form: Form, medium: Option<Medium>) -> Form {
    match medium {
        Some(m) => form.text("medium", m.as_str()),
        None => form,
    }
}

impl HttpClient {
    pub fn new(base: &str) -> Self {
        Self { base: base.trim_end_matches('/').to_string(), http: Client::new() }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    fn send(&self, request: RequestBuilder) -> ApiResult<Response> {
        let response = request.send().map_err(transport_error)?;
        if response.status().is_success() {
            return Ok(response);
        }
        let status = response.status().as_u16();
        let body = response.bytes().map_err(transport_error)?;
        Err(serde_json::from_slice::<ApiError>(&body).unwrap_or_else(|_| ApiError {
            status,
            code: "http-error".into(),
            message: String::from_utf8_lossy(&body).into_owned(),
        }))
    }

    fn json<T: DeserializeOwned>(&self, request: RequestBuilder) -> ApiResult<T> {
        let response = self.send(request)?;
        response.json().map_err(|e| ApiError::new("bad-response", format!("unexpected response body: {e}")))
    }

    fn download(&self, path: &str) -> ApiResult<Download> {
        let response = self.send(self.http.get(self.url(path)))?;
        let mime = response
            .headers()
            .get(CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .unwrap_or("application/octet-stream")
            .to_string();
        let bytes = response.bytes().map_err(transport_error)?.to_vec();
        Ok(Download { mime, bytes })
    }
}

impl Api for HttpClient {
    fn ingest(&self, request: IngestRequest) -> ApiResult<IngestOutcome> {
        let mut form = Form::new().part("image", image_part(request.image));
        if let Some(uuid) = request.uuid {
            form = form.text("uuid", uuid.to_string());
        }
        if let Some(message) = request.commit_message {
            form = form.text("commit_message", message);
        }
        if let Some(carry) = request.carry_metadata {
            form = form.text("carry_metadata", carry.to_string());
        }
        form = medium_field(form, request.medium);
        form = metadata_fields(form, &request.metadata);
        self.json(self.http.post(self.url("/api/sketches")).multipart(form))
    }

    fn list_sketches(&self) -> ApiResult<Vec<SketchSummary>> {
        self.json(self.http.get(self.url("/api/sketches")))
    }

    fn sketch(&self, id: SketchId) -> ApiResult<SketchDetail> {
        self.json(self.http.get(self.url(&format!("/api/sketches/{id}"))))
    }

    fn add_revision(&self, id: SketchId, upload: RevisionUpload) -> ApiResult<Revision> {
        let mut form = Form::new()
            .part("image", image_part(upload.image))
            .text("commit_message", upload.commit_message)
            .text("expected_head", upload.expected_head.to_string())
            .text("carry_metadata", upload.carry_metadata.to_string());
        form = medium_field(form, Some(upload.medium));
        form = metadata_fields(form, &upload.metadata);
        self.json(self.http.post(self.url(&format!("/api/sketches/{id}/revisions"))).multipart(form))
    }

    fn attach_annotation(&self, id: SketchId, seq: u32, upload: AnnotationUpload) -> ApiResult<Annotation> {
        let request = self.http.post(self.url(&format!("/api/sketches/{id}/revisions/{seq}/annotations")));
        let request = match upload {
            AnnotationUpload::Text(body) => request.json(&serde_json::json!({"kind": "text", "body": body})),
            AnnotationUpload::Audio { mime, bytes } => request.multipart(
                Form::new()
                    .text("kind", "audio")
                    .text("mime", mime)
                    .part("file", Part::bytes(bytes).file_name("audio")),
            ),
            AnnotationUpload::Video { mime, bytes } => request.multipart(
                Form::new()
                    .text("kind", "video")
                    .text("mime", mime)
                    .part("file", Part::bytes(bytes).file_name("video")),
            ),
        };
        self.json(request)
    }

    fn list_links(&self, id: SketchId) -> ApiResult<Vec<DirectedLink>> {
        self.json(self.http.get(self.url(&format!("/api/sketches/{id}/links"))))
    }

    fn create_link(&self, request: CreateLinkRequest) -> ApiResult<Link> {
        self.json(self.http.post(self.url("/api/links")).json(&request))
    }

    fn delete_link(&self, id: Uuid) -> ApiResult<()> {
        self.send(self.http.delete(self.url(&format!("/api/links/{id}"))))?;
        Ok(())
    }

    fn scan(&self, image: Vec<u8>) -> ApiResult<ScanResult> {
        let form = Form::new().part("image", image_part(image));
        self.json(self.http.post(self.url("/api/scan")).multipart(form))
    }

    fn label_sheet(&self, for_sketch: Option<SketchId>) -> ApiResult<LabelSheetDocument> {
        let path = match for_sketch {
            Some(id) => format!("/api/labels/sheet?for_sketch={id}"),
            None => "/api/labels/sheet".to_string(),
        };
        let response = self.send(self.http.get(self.url(&path)))?;
        let ids = response
            .headers()
            .get(LABEL_IDS_HEADER)
            .and_then(|v| v.to_str().ok())
            .unwrap_or_default()
            .split(',')
            .filter_map(|s| s.parse().ok())
            .collect();
        let svg = response.text().map_err(transport_error)?;
        Ok(LabelSheetDocument { ids, svg })
    }

    fn revision_image(&self, id: SketchId, seq: u32) -> ApiResult<Download> {
        self.download(&image_path(id, seq))
    }

    fn blob(&self, hash: &str) -> ApiResult<Download> {
        self.download(&format!("/api/blobs/{hash}"))
    }
}
