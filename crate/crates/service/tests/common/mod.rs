#![allow(dead_code)]

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use roundtrip_core::{SeededIds, SketchId, Sketchbook, SteppingClock};
use roundtrip_identity::synthetic::{capture_with_label, sketch_canvas};
use roundtrip_identity::{encode_png, render_modules, QrCode};
use roundtrip_service::{router, RouterOptions, Service};
use serde_json::Value;
use tower::ServiceExt;

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub service: Service,
    pub app: Router,
}

pub fn fixture() -> Fixture {
    fixture_with(RouterOptions::default())
}

pub fn fixture_with(options: RouterOptions) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let book = Sketchbook::open_with(
        dir.path(),
        Arc::new(SteppingClock::new(1_700_000_000, 1)),
        Arc::new(SeededIds::new(7)),
    )
    .unwrap();
    let service = Service::new(book);
    let app = router(service.clone(), options);
    Fixture { dir, service, app }
}

pub struct Reply {
    pub status: StatusCode,
    pub content_type: Option<String>,
    pub headers: axum::http::HeaderMap,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body)
            .unwrap_or_else(|e| panic!("body is not JSON ({e}): {}", String::from_utf8_lossy(&self.body)))
    }

    pub fn code(&self) -> String {
        self.json()["code"].as_str().unwrap_or_default().to_string()
    }

    #[track_caller]
    pub fn expect(self, status: u16) -> Self {
        assert_eq!(self.status.as_u16(), status, "body: {}", String::from_utf8_lossy(&self.body));
        self
    }

    #[track_caller]
    pub fn expect_error(self, status: u16, code: &str) -> Self {
        let reply = self.expect(status);
        assert_eq!(reply.code(), code);
        assert_eq!(reply.json()["status"], status);
        reply
    }
}

pub async fn send(app: &Router, request: Request<Body>) -> Reply {
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let headers = response.headers().clone();
    let content_type = headers.get(header::CONTENT_TYPE).map(|v| v.to_str().unwrap().to_string());
    let body = response.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply { status, content_type, headers, body }
}

pub async fn get(app: &Router, uri: &str) -> Reply {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

pub async fn delete(app: &Router, uri: &str) -> Reply {
    send(app, Request::builder().method(Method::DELETE).uri(uri).body(Body::empty()).unwrap()).await
}

pub async fn post_json(app: &Router, uri: &str, body: Value) -> Reply {
    send(
        app,
        Request::post(uri)
            .header(header::CONTENT_TYPE, "application/json")
            .body(Body::from(body.to_string()))
            .unwrap(),
    )
    .await
}

/// One multipart part: a text field, or a file when `content_type` is set.
pub enum Field<'a> {
    Text(&'a str, &'a str),
    File(&'a str, &'a str, &'a [u8]),
}

const BOUNDARY: &str = "roundtrip-test-boundary-7f3a";

pub fn multipart_body(fields: &[Field]) -> Vec<u8> {
    let mut body = Vec::new();
    for field in fields {
        body.extend_from_slice(format!("--{BOUNDARY}\r\n").as_bytes());
        match field {
            Field::Text(name, value) => {
                body.extend_from_slice(
                    format!("Content-Disposition: form-data; name=\"{name}\"\r\n\r\n{value}\r\n").as_bytes(),
                );
            }
            Field::File(name, content_type, bytes) => {
                body.extend_from_slice(
                    format!(
                        "Content-Disposition: form-data; name=\"{name}\"; filename=\"upload\"\r\nContent-Type: {content_type}\r\n\r\n"
                    )
                    .as_bytes(),
                );
                body.extend_from_slice(bytes);
                body.extend_from_slice(b"\r\n");
            }
        }
    }
    body.extend_from_slice(format!("--{BOUNDARY}--\r\n").as_bytes());
    body
}

pub async fn post_multipart(app: &Router, uri: &str, fields: &[Field<'_>]) -> Reply {
    send(
        app,
        Request::post(uri)
            .header(header::CONTENT_TYPE, format!("multipart/form-data; boundary={BOUNDARY}"))
            .body(Body::from(multipart_body(fields)))
            .unwrap(),
    )
    .await
}

pub fn plain_png(seed: u64) -> Vec<u8> {
    encode_png(&sketch_canvas(320, 240, seed, 12))
}

pub fn plain_jpeg(seed: u64) -> Vec<u8> {
    let mut out = std::io::Cursor::new(Vec::new());
    sketch_canvas(320, 240, seed, 12).write_to(&mut out, image::ImageFormat::Jpeg).unwrap();
    out.into_inner()
}

/// A 2000×1500 capture with a 150 px label of `id`.
pub fn labelled_capture(id: SketchId, seed: u64) -> Vec<u8> {
    encode_png(&capture_with_label(2000, 1500, Some(id), 150, seed))
}

/// A close-up photo of a single label.
pub fn label_photo(id: SketchId) -> Vec<u8> {
    encode_png(&render_modules(&roundtrip_identity::encode_qr(id), 6))
}

pub fn qr_photo(payload: &str) -> Vec<u8> {
    encode_png(&render_modules(&QrCode::encode_bytes(payload.as_bytes()).unwrap(), 6))
}

pub const GIF: &[u8] = b"GIF89a\x01\x00\x01\x00\x80\x00\x00\xff\xff\xff\x00\x00\x00!\xf9\x04\x00\x00\x00\x00\x00,\x00\x00\x00\x00\x01\x00\x01\x00\x00\x02\x02D\x01\x00;";

pub async fn create(app: &Router, image: &[u8], extra: &[Field<'_>]) -> Value {
    let mut fields = vec![Field::File("image", "image/png", image)];
    fields.extend(extra.iter().map(|f| match f {
        Field::Text(n, v) => Field::Text(n, v),
        Field::File(n, t, b) => Field::File(n, t, b),
    }));
    post_multipart(app, "/api/sketches", &fields).await.expect(201).json()
}

pub fn id_of(v: &Value) -> SketchId {
    v["sketch"].as_str().unwrap().parse().unwrap()
}
