//! HTTP service for the sketch store.
//!
//! [`Service`] implements every operation of the [`Api`] trait in process;
//! [`http::router`] exposes the same operations as a JSON/multipart REST
//! API. Errors travel as [`ApiError`] bodies with a stable `code`.
//!
//! | status | codes |
//! |--------|-------|
//! | 400 | `bad-request`, `invalid-id`, `invalid-hash` |
//! | 404 | `unknown-sketch`, `unknown-revision`, `unknown-link`, `unknown-blob`, `not-found` |
//! | 409 | `duplicate-id`, `stale-head` |
//! | 413 | `payload-too-large` |
//! | 415 | `unsupported-media-type` |
//! | 422 | `empty-commit-message`, `commit-message-required`, `missing-blob`, `invalid-annotation`, `unknown-anchor`, `invalid-region`, `self-link`, `empty-blob`, `unreadable-image`, `payload-not-uuid`, `wrong-count`, `payload-too-long` |
//! | 500 | `corruption-detected`, `corrupt-log`, `io-failure`, `incompatible-format-version`, `store-locked`, `malformed-record`, `internal` |

pub mod api;
pub mod http;
pub mod server;
mod service;

pub use api::*;
pub use http::{router, RouterOptions, DEFAULT_MAX_UPLOAD, LABEL_IDS_HEADER};
pub use server::{BackgroundServer, ServerConfig};
pub use service::Service;
