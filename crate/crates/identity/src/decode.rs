//! Reading sketch ids back out of raster images.

use image::imageops::{self, FilterType};
use image::{DynamicImage, GrayImage};
use roundtrip_core::SketchId;

use crate::IdentityError;

/// Side length of the sliding windows in the last detection pass.
pub const WINDOW: u32 = 512;
const STRIDE: u32 = WINDOW / 2;

/// A label found in an image.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub id: SketchId,
    /// Symbol center in the coordinates of the searched image.
    pub center: (f32, f32),
    /// Other distinct ids decoded in the same pass, in top-left-first order.
    pub others: Vec<SketchId>,
}

impl Detection {
    pub fn is_ambiguous(&self) -> bool {
        !self.others.is_empty()
    }
}

/// One successfully error-corrected symbol.
#[derive(Debug, Clone)]
struct Symbol {
    payload: String,
    center: (f32, f32),
}

/// Runs the decoder over `img`, mapping symbol centers through
/// `origin + point / scale`.
fn scan(img: &GrayImage, origin: (f32, f32), scale: f32) -> Vec<Symbol> {
    let (w, h) = img.dimensions();
    if w == 0 || h == 0 {
        return Vec::new();
    }
    let mut prepared = rqrr::PreparedImage::prepare_from_greyscale(w as usize, h as usize, |x, y| {
        img.get_pixel(x as u32, y as u32).0[0]
    });
    prepared
        .detect_grids()
        .into_iter()
        .filter_map(|grid| {
            let (_, payload) = grid.decode().ok()?;
            let (sx, sy) =
                grid.bounds.iter().fold((0.0f32, 0.0f32), |(ax, ay), p| (ax + p.x as f32, ay + p.y as f32));
            Some(Symbol { payload, center: (origin.0 + sx / 4.0 / scale, origin.1 + sy / 4.0 / scale) })
        })
        .collect()
}

/// Outcome of one detection pass.
enum PassResult {
    Found(Detection),
    /// Symbols decoded, none carrying a UUID; holds the first payload.
    OnlyForeign(String),
    Nothing,
}

/// Picks the top-left-most UUID symbol: smallest `x + y` of its center,
/// then smallest `y`.
fn choose(symbols: Vec<Symbol>) -> PassResult {
    let mut valid: Vec<(SketchId, (f32, f32))> = symbols
        .iter()
        .filter_map(|s| SketchId::parse_canonical(&s.payload).map(|id| (id, s.center)))
        .collect();
    if valid.is_empty() {
        return match symbols.into_iter().next() {
            Some(s) => PassResult::OnlyForeign(s.payload),
            None => PassResult::Nothing,
        };
    }
    valid.sort_by(|(_, a), (_, b)| {
        (a.0 + a.1).total_cmp(&(b.0 + b.1)).then(a.1.total_cmp(&b.1)).then(a.0.total_cmp(&b.0))
    });
    let (id, center) = valid[0];
    let mut others: Vec<SketchId> = Vec::new();
    for (other, _) in &valid[1..] {
        if *other != id && !others.contains(other) {
            others.push(*other);
        }
    }
    PassResult::Found(Detection { id, center, others })
}

fn finish(foreign: Option<String>) -> Result<Option<Detection>, IdentityError> {
    match foreign {
        Some(payload) => Err(IdentityError::PayloadNotUuid(payload)),
        None => Ok(None),
    }
}

/// Decodes the whole image in a single pass.
///
/// Returns the top-left-most symbol whose payload is a canonical UUID,
/// `Ok(None)` if no symbol decodes, and [`IdentityError::PayloadNotUuid`]
/// if symbols decode but none carries a UUID.
pub fn decode_qr(image: &DynamicImage) -> Result<Option<SketchId>, IdentityError> {
    decode_gray(&image.to_luma8())
}

pub fn decode_gray(image: &GrayImage) -> Result<Option<SketchId>, IdentityError> {
    match choose(scan(image, (0.0, 0.0), 1.0)) {
        PassResult::Found(d) => Ok(Some(d.id)),
        PassResult::OnlyForeign(payload) => Err(IdentityError::PayloadNotUuid(payload)),
        PassResult::Nothing => Ok(None),
    }
}

/// Window origins covering `len` pixels with `WINDOW`-sized tiles.
fn window_starts(len: u32) -> Vec<u32> {
    if len <= WINDOW {
        return vec![0];
    }
    let mut starts: Vec<u32> = (0..=(len - WINDOW)).step_by(STRIDE as usize).collect();
    if *starts.last().unwrap() != len - WINDOW {
        starts.push(len - WINDOW);
    }
    starts
}

/// Finds a small label inside a large capture photo.
///
/// Three passes, stopping at the first that yields a UUID:
/// 1. the full image;
/// 2. each quadrant upscaled 2×;
/// 3. a grid of 512 px windows at half-window stride.
///
/// Within a pass the top-left-most detection wins; other ids seen in the
/// same pass are reported in [`Detection::others`].
pub fn detect_label_in_capture(image: &DynamicImage) -> Result<Option<Detection>, IdentityError> {
    let gray = image.to_luma8();
    let (w, h) = gray.dimensions();
    let mut foreign: Option<String> = None;
    let mut settle = |result: PassResult| match result {
        PassResult::Found(d) => Some(d),
        PassResult::OnlyForeign(p) => {
            foreign.get_or_insert(p);
            None
        }
        PassResult::Nothing => None,
    };

    if let Some(found) = settle(choose(scan(&gray, (0.0, 0.0), 1.0))) {
        return Ok(Some(found));
    }

    let (hw, hh) = (w.div_ceil(2), h.div_ceil(2));
    if hw >= 2 && hh >= 2 {
        let mut symbols = Vec::new();
        for (qx, qy) in [(0, 0), (w - hw, 0), (0, h - hh), (w - hw, h - hh)] {
            let quadrant = imageops::crop_imm(&gray, qx, qy, hw, hh).to_image();
            let upscaled = imageops::resize(&quadrant, hw * 2, hh * 2, FilterType::Triangle);
            symbols.extend(scan(&upscaled, (qx as f32, qy as f32), 2.0));
        }
        if let Some(found) = settle(choose(symbols)) {
            return Ok(Some(found));
        }
    }

    let (xs, ys) = (window_starts(w), window_starts(h));
    if xs.len() > 1 || ys.len() > 1 {
        let mut symbols = Vec::new();
        for &y in &ys {
            for &x in &xs {
                let window = imageops::crop_imm(&gray, x, y, WINDOW.min(w), WINDOW.min(h)).to_image();
                symbols.extend(scan(&window, (x as f32, y as f32), 1.0));
            }
        }
        if let Some(found) = settle(choose(symbols)) {
            return Ok(Some(found));
        }
    }

    finish(foreign)
}
