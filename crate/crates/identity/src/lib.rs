//! Sketch identification: QR labels encoding sketch UUIDs.
//!
//! The label payload is the bare canonical UUID text, encoded at error
//! correction level M so the symbol stays legible printed at 1 cm². Labels
//! are read back either from a close-up scan ([`decode_qr`]) or from a
//! photo of a whole sketch where the label is a small patch
//! ([`detect_label_in_capture`]).

mod decode;
pub mod qr;
mod raster;
pub mod sheet;
pub mod synthetic;

use roundtrip_core::SketchId;
use thiserror::Error;

pub use decode::{decode_gray, decode_qr, detect_label_in_capture, Detection, WINDOW};
pub use qr::QrCode;
pub use raster::{encode_png, load_raster, rasterize, render_modules, sniff_raster, RasterFormat};
pub use sheet::{generate_label_sheet, generate_labels_for, LabelSheet};

/// Printed label edge at 300 dpi: 1 cm.
pub const LABEL_PX_300DPI: u32 = 118;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IdentityError {
    #[error("image cannot be decoded: {0}")]
    UnreadableImage(String),

    #[error("QR code found but its payload {0:?} is not a UUID")]
    PayloadNotUuid(String),

    #[error("a label sheet needs exactly 13 distinct ids (got {given}, {distinct} distinct)")]
    WrongCount { given: usize, distinct: usize },

    #[error("payload of {0} bytes does not fit a supported QR version")]
    PayloadTooLong(usize),
}

impl IdentityError {
    pub fn code(&self) -> &'static str {
        match self {
            IdentityError::UnreadableImage(_) => "unreadable-image",
            IdentityError::PayloadNotUuid(_) => "payload-not-uuid",
            IdentityError::WrongCount { .. } => "wrong-count",
            IdentityError::PayloadTooLong(_) => "payload-too-long",
        }
    }
}

/// A fresh version-4 sketch id.
pub fn new_uuid() -> SketchId {
    roundtrip_core::new_uuid()
}

/// The QR symbol for `id`. Deterministic.
pub fn encode_qr(id: SketchId) -> QrCode {
    QrCode::encode_bytes(id.to_string().as_bytes()).expect("a UUID always fits version 3")
}
