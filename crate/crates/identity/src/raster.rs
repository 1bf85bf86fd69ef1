use image::{DynamicImage, GrayImage, ImageFormat, Luma};

use crate::qr::{QrCode, QUIET_ZONE};
use crate::IdentityError;

/// Raster formats accepted for captures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasterFormat {
    Png,
    Jpeg,
}

impl RasterFormat {
    pub fn mime(self) -> &'static str {
        match self {
            RasterFormat::Png => "image/png",
            RasterFormat::Jpeg => "image/jpeg",
        }
    }

    fn image_format(self) -> ImageFormat {
        match self {
            RasterFormat::Png => ImageFormat::Png,
            RasterFormat::Jpeg => ImageFormat::Jpeg,
        }
    }
}

/// Identifies PNG or JPEG by magic bytes; anything else is `None`.
pub fn sniff_raster(bytes: &[u8]) -> Option<RasterFormat> {
    if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        Some(RasterFormat::Png)
    } else if bytes.starts_with(&[0xFF, 0xD8, 0xFF]) {
        Some(RasterFormat::Jpeg)
    } else {
        None
    }
}

/// Decodes PNG or JPEG bytes.
pub fn load_raster(bytes: &[u8]) -> Result<DynamicImage, IdentityError> {
    let format =
        sniff_raster(bytes).ok_or_else(|| IdentityError::UnreadableImage("not a PNG or JPEG file".into()))?;
    image::load_from_memory_with_format(bytes, format.image_format())
        .map_err(|e| IdentityError::UnreadableImage(e.to_string()))
}

/// Renders `code` plus its quiet zone into a `px`×`px` grayscale image.
///
/// Each pixel is the mean of a 4×4 grid of samples, so module edges that do
/// not fall on pixel boundaries come out gray as they would from a scanner.
pub fn rasterize(code: &QrCode, px: u32) -> GrayImage {
    const SAMPLES: u32 = 4;
    let modules = (code.size() + 2 * QUIET_ZONE) as f64;
    let scale = modules / f64::from(px);
    GrayImage::from_fn(px, px, |x, y| {
        let mut dark = 0u32;
        for sy in 0..SAMPLES {
            for sx in 0..SAMPLES {
                let mx = (f64::from(x) + (f64::from(sx) + 0.5) / f64::from(SAMPLES)) * scale;
                let my = (f64::from(y) + (f64::from(sy) + 0.5) / f64::from(SAMPLES)) * scale;
                let (mx, my) = (mx as usize, my as usize);
                if mx >= QUIET_ZONE && my >= QUIET_ZONE && code.is_dark(mx - QUIET_ZONE, my - QUIET_ZONE) {
                    dark += 1;
                }
            }
        }
        Luma([(255 - dark * 255 / (SAMPLES * SAMPLES)) as u8])
    })
}

/// Crisp rendering with `module_px` pixels per module.
pub fn render_modules(code: &QrCode, module_px: u32) -> GrayImage {
    let side = (code.size() + 2 * QUIET_ZONE) as u32 * module_px;
    GrayImage::from_fn(side, side, |x, y| {
        let mx = (x / module_px) as usize;
        let my = (y / module_px) as usize;
        let dark = mx >= QUIET_ZONE && my >= QUIET_ZONE && code.is_dark(mx - QUIET_ZONE, my - QUIET_ZONE);
        Luma([if dark { 0 } else { 255 }])
    })
}

/// PNG encoding of a grayscale image.
pub fn encode_png(image: &GrayImage) -> Vec<u8> {
    let mut out = std::io::Cursor::new(Vec::new());
    image.write_to(&mut out, ImageFormat::Png).expect("in-memory PNG encoding");
    out.into_inner()
}
