//! Axum routes. Handlers parse the request, run the matching [`Api`] call on
//! the blocking pool and translate [`ApiError`] into a JSON error body.

use std::path::PathBuf;

use axum::body::Bytes;
use axum::extract::multipart::MultipartError;
use axum::extract::{DefaultBodyLimit, FromRequest, Multipart, Path, Query, Request, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use chrono::NaiveDate;
use roundtrip_core::{Medium, Metadata, MetadataEntry, SketchId};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use tower_http::services::ServeDir;
use uuid::Uuid;

use crate::api::*;
use crate::Service;

/// Default cap on request bodies.
pub const DEFAULT_MAX_UPLOAD: usize = 50 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct RouterOptions {
    pub max_upload: usize,
    /// Directory with the web UI bundle, served at `/` when present.
    pub ui_dir: Option<PathBuf>,
}

impl Default for RouterOptions {
    fn default() -> Self {
        Self { max_upload: DEFAULT_MAX_UPLOAD, ui_dir: None }
    }
}

pub fn router(service: Service, options: RouterOptions) -> Router {
    let api = Router::new()
        .route("/api/sketches", post(ingest).get(list_sketches))
        .route("/api/sketches/{id}", get(sketch))
        .route("/api/sketches/{id}/links", get(list_links))
        .route("/api/sketches/{id}/revisions", post(add_revision))
        .route("/api/sketches/{id}/revisions/{seq}/annotations", post(annotate))
        .route("/api/sketches/{id}/revisions/{seq}/image", get(revision_image))
        .route("/api/links", post(create_link))
        .route("/api/links/{id}", delete(delete_link))
        .route("/api/scan", post(scan))
        .route("/api/labels/sheet", get(label_sheet))
        .route("/api/blobs/{hash}", get(blob))
        .route("/api/{*rest}", axum::routing::any(api_not_found))
        .layer(DefaultBodyLimit::max(options.max_upload))
        .with_state(service);
    match options.ui_dir.filter(|dir| dir.is_dir()) {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

type Reply<T> = Result<T, ApiError>;

async fn blocking<T, F>(service: Service, f: F) -> Reply<T>
where
    T: Send + 'static,
    F: FnOnce(&Service) -> ApiResult<T> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&service))
        .await
        .map_err(|e| ApiError::new("internal", format!("request handler failed: {e}")))?
}

fn created<T: serde::Serialize>(value: T) -> Response {
    (StatusCode::CREATED, Json(value)).into_response()
}

fn parse_id(raw: &str) -> Reply<SketchId> {
    SketchId::parse_canonical(raw)
        .ok_or_else(|| ApiError::new("invalid-id", format!("{raw:?} is not a canonical UUID")))
}

fn parse_uuid(raw: &str) -> Reply<Uuid> {
    parse_id(raw).map(|id| *id.as_uuid())
}

fn parse_seq(raw: &str) -> Reply<u32> {
    raw.parse().map_err(|_| ApiError::bad_request(format!("{raw:?} is not a revision number")))
}

fn parse_json<T: DeserializeOwned>(body: &[u8]) -> Reply<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

fn multipart_error(e: MultipartError) -> ApiError {
    if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
        ApiError::new("payload-too-large", e.body_text())
    } else {
        ApiError::bad_request(e.body_text())
    }
}

fn is_json(request: &Request) -> bool {
    request
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("application/json"))
}

/// All parts of a multipart body, in order.
struct Form {
    parts: Vec<Part>,
}

struct Part {
    name: String,
    content_type: Option<String>,
    bytes: Bytes,
}

impl Form {
    async fn read(request: Request) -> Reply<Form> {
        let mut multipart =
            Multipart::from_request(request, &()).await.map_err(|e| ApiError::bad_request(e.body_text()))?;
        let mut parts = Vec::new();
        while let Some(field) = multipart.next_field().await.map_err(multipart_error)? {
            let name = field.name().unwrap_or_default().to_string();
            let content_type = field.content_type().map(str::to_string);
            let bytes = field.bytes().await.map_err(multipart_error)?;
            parts.push(Part { name, content_type, bytes });
        }
        Ok(Form { parts })
    }

    fn part(&self, name: &str) -> Option<&Part> {
        self.parts.iter().find(|p| p.name == name)
    }

    fn file(&self, name: &str) -> Reply<&Part> {
        self.part(name).ok_or_else(|| ApiError::bad_request(format!("multipart field {name:?} is required")))
    }

    fn texts(&self, name: &str) -> Reply<Vec<String>> {
        self.parts
            .iter()
            .filter(|p| p.name == name)
            .map(|p| {
                String::from_utf8(p.bytes.to_vec())
                    .map_err(|_| ApiError::bad_request(format!("field {name:?} is not UTF-8")))
            })
            .collect()
    }

    fn text(&self, name: &str) -> Reply<Option<String>> {
        Ok(self.texts(name)?.into_iter().next())
    }

    fn parsed<T>(&self, name: &str, parse: impl Fn(&str) -> Option<T>) -> Reply<Option<T>> {
        match self.text(name)? {
            None => Ok(None),
            Some(raw) => parse(raw.trim())
                .map(Some)
                .ok_or_else(|| ApiError::bad_request(format!("field {name:?} has invalid value {raw:?}"))),
        }
    }

    fn flag(&self, name: &str) -> Reply<Option<bool>> {
        self.parsed(name, |v| match v {
            "true" | "1" | "yes" | "on" => Some(true),
            "false" | "0" | "no" | "off" => Some(false),
            _ => None,
        })
    }

    fn medium(&self) -> Reply<Option<Medium>> {
        self.parsed("medium", |v| v.parse().ok())
    }

    /// `title`, repeated `author`, `date` (YYYY-MM-DD) and repeated
    /// `extra` fields of the form `key=value`.
    fn metadata(&self) -> Reply<Metadata> {
        let extra = self
            .texts("extra")?
            .into_iter()
            .map(|kv| match kv.split_once('=') {
                Some((k, v)) if !k.trim().is_empty() => {
                    Ok(MetadataEntry { key: k.trim().to_string(), value: v.trim().to_string() })
                }
                _ => Err(ApiError::bad_request(format!("extra field {kv:?} is not key=value"))),
            })
            .collect::<Reply<Vec<_>>>()?;
        Ok(Metadata {
            title: self.text("title")?,
            authors: self.texts("author")?,
            date: self.parsed("date", |v| NaiveDate::parse_from_str(v, "%Y-%m-%d").ok())?,
            extra,
        }
        .normalized())
    }
}

async fn ingest(State(service): State<Service>, request: Request) -> Reply<Response> {
    let form = Form::read(request).await?;
    let ingest = IngestRequest {
        image: form.file("image")?.bytes.to_vec(),
        uuid: form.parsed("uuid", SketchId::parse_canonical)?,
        commit_message: form.text("commit_message")?,
        medium: form.medium()?,
        metadata: form.metadata()?,
        carry_metadata: form.flag("carry_metadata")?,
    };
    Ok(created(blocking(service, move |s| s.ingest(ingest)).await?))
}

async fn list_sketches(State(service): State<Service>) -> Reply<Json<Vec<SketchSummary>>> {
    Ok(Json(blocking(service, |s| s.list_sketches()).await?))
}

async fn sketch(State(service): State<Service>, Path(id): Path<String>) -> Reply<Json<SketchDetail>> {
    let id = parse_id(&id)?;
    Ok(Json(blocking(service, move |s| s.sketch(id)).await?))
}

async fn list_links(
    State(service): State<Service>,
    Path(id): Path<String>,
) -> Reply<Json<Vec<roundtrip_core::DirectedLink>>> {
    let id = parse_id(&id)?;
    Ok(Json(blocking(service, move |s| s.list_links(id)).await?))
}

async fn add_revision(
    State(service): State<Service>,
    Path(id): Path<String>,
    request: Request,
) -> Reply<Response> {
    let id = parse_id(&id)?;
    let form = Form::read(request).await?;
    let upload = RevisionUpload {
        image: form.file("image")?.bytes.to_vec(),
        commit_message: form.text("commit_message")?.unwrap_or_default(),
        expected_head: form
            .parsed("expected_head", |v| v.parse().ok())?
            .ok_or_else(|| ApiError::bad_request("field \"expected_head\" is required"))?,
        carry_metadata: form.flag("carry_metadata")?.unwrap_or(false),
        medium: form.medium()?.unwrap_or(Medium::DigitalUpload),
        metadata: form.metadata()?,
    };
    Ok(created(blocking(service, move |s| s.add_revision(id, upload)).await?))
}

#[derive(Deserialize)]
struct TextAnnotation {
    kind: String,
    body: String,
}

async fn annotate(
    State(service): State<Service>,
    Path((id, seq)): Path<(String, String)>,
    request: Request,
) -> Reply<Response> {
    let id = parse_id(&id)?;
    let seq = parse_seq(&seq)?;
    let upload = if is_json(&request) {
        let body =
            Bytes::from_request(request, &()).await.map_err(|e| ApiError::bad_request(e.body_text()))?;
        let text: TextAnnotation = parse_json(&body)?;
        if text.kind != "text" {
            return Err(ApiError::bad_request(
                "JSON annotations must be text; upload audio and video as multipart",
            ));
        }
        AnnotationUpload::Text(text.body)
    } else {
        let form = Form::read(request).await?;
        let kind = form.text("kind")?.unwrap_or_default();
        match kind.as_str() {
            "text" => AnnotationUpload::Text(form.text("body")?.unwrap_or_default()),
            "audio" | "video" => {
                let file = form.file("file")?;
                let mime = match form.text("mime")? {
                    Some(mime) => mime,
                    None => file.content_type.clone().unwrap_or_default(),
                };
                let bytes = file.bytes.to_vec();
                if kind == "audio" {
                    AnnotationUpload::Audio { mime, bytes }
                } else {
                    AnnotationUpload::Video { mime, bytes }
                }
            }
            other => {
                return Err(ApiError::new("invalid-annotation", format!("unknown annotation kind {other:?}")))
            }
        }
    };
    Ok(created(blocking(service, move |s| s.attach_annotation(id, seq, upload)).await?))
}

async fn create_link(State(service): State<Service>, body: Bytes) -> Reply<Response> {
    let request: CreateLinkRequest = parse_json(&body)?;
    Ok(created(blocking(service, move |s| s.create_link(request)).await?))
}

async fn delete_link(State(service): State<Service>, Path(id): Path<String>) -> Reply<StatusCode> {
    let id = parse_uuid(&id)?;
    blocking(service, move |s| s.delete_link(id)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn scan(State(service): State<Service>, request: Request) -> Reply<Json<ScanResult>> {
    let form = Form::read(request).await?;
    let image = form.file("image")?.bytes.to_vec();
    Ok(Json(blocking(service, move |s| s.scan(image)).await?))
}

#[derive(Deserialize)]
struct SheetQuery {
    for_sketch: Option<String>,
}

/// Header listing the sheet's distinct ids, comma separated.
pub const LABEL_IDS_HEADER: &str = "x-label-ids";

async fn label_sheet(State(service): State<Service>, Query(query): Query<SheetQuery>) -> Reply<Response> {
    let for_sketch = query.for_sketch.as_deref().map(parse_id).transpose()?;
    let sheet = blocking(service, move |s| s.label_sheet(for_sketch)).await?;
    let ids = sheet.ids.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
    Ok((
        [
            (header::CONTENT_TYPE, HeaderValue::from_static("image/svg+xml")),
            (
                header::HeaderName::from_static(LABEL_IDS_HEADER),
                HeaderValue::from_str(&ids).expect("uuids are valid header text"),
            ),
        ],
        sheet.svg,
    )
        .into_response())
}

fn download(d: Download) -> Response {
    let mime = HeaderValue::from_str(&d.mime)
        .unwrap_or_else(|_| HeaderValue::from_static("application/octet-stream"));
    ([(header::CONTENT_TYPE, mime)], d.bytes).into_response()
}

async fn revision_image(
    State(service): State<Service>,
    Path((id, seq)): Path<(String, String)>,
) -> Reply<Response> {
    let id = parse_id(&id)?;
    let seq = parse_seq(&seq)?;
    Ok(download(blocking(service, move |s| s.revision_image(id, seq)).await?))
}

async fn blob(State(service): State<Service>, Path(hash): Path<String>) -> Reply<Response> {
    Ok(download(blocking(service, move |s| s.blob(&hash)).await?))
}

async fn api_not_found(request: Request) -> ApiError {
    ApiError::new("not-found", format!("no endpoint {} {}", request.method(), request.uri().path()))
}
