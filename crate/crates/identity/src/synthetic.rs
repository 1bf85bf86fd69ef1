//! Synthetic capture photos for tests and demos: a paper-colored canvas
//! with pen strokes, optionally with a label pasted on.

use image::{imageops, GrayImage, Luma};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roundtrip_core::SketchId;

use crate::{encode_qr, rasterize};

/// Off-white canvas with `strokes` random dark pen lines, reproducible
/// from `seed`.
pub fn sketch_canvas(width: u32, height: u32, seed: u64, strokes: usize) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = GrayImage::from_fn(width, height, |_, _| Luma([rng.random_range(228..=240)]));
    for _ in 0..strokes {
        let (x0, y0) = (rng.random_range(0..width) as f32, rng.random_range(0..height) as f32);
        let (x1, y1) = (rng.random_range(0..width) as f32, rng.random_range(0..height) as f32);
        let thickness = rng.random_range(2..6) as f32;
        let ink = rng.random_range(20..90);
        draw_line(&mut img, (x0, y0), (x1, y1), thickness, ink);
    }
    img
}

fn draw_line(img: &mut GrayImage, from: (f32, f32), to: (f32, f32), thickness: f32, ink: u8) {
    let steps = ((to.0 - from.0).abs().max((to.1 - from.1).abs()) as usize).max(1);
    let r = (thickness / 2.0).ceil() as i64;
    for i in 0..=steps {
        let t = i as f32 / steps as f32;
        let cx = (from.0 + (to.0 - from.0) * t) as i64;
        let cy = (from.1 + (to.1 - from.1) * t) as i64;
        for dy in -r..=r {
            for dx in -r..=r {
                let (x, y) = (cx + dx, cy + dy);
                if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
                    img.put_pixel(x as u32, y as u32, Luma([ink]));
                }
            }
        }
    }
}

/// Pastes the label for `id`, rendered at `px`×`px`, with its top-left
/// corner at (`x`, `y`).
pub fn paste_label(canvas: &mut GrayImage, id: SketchId, px: u32, x: u32, y: u32) {
    let label = rasterize(&encode_qr(id), px);
    imageops::replace(canvas, &label, i64::from(x), i64::from(y));
}

/// A `width`×`height` capture with the label for `id` (if any) pasted
/// near the bottom-right corner at `label_px` pixels.
pub fn capture_with_label(
    width: u32,
    height: u32,
    id: Option<SketchId>,
    label_px: u32,
    seed: u64,
) -> GrayImage {
    let mut canvas = sketch_canvas(width, height, seed, 40);
    if let Some(id) = id {
        let margin = (width.min(height) / 40).max(4);
        paste_label(&mut canvas, id, label_px, width - label_px - margin, height - label_px - margin);
    }
    canvas
}
