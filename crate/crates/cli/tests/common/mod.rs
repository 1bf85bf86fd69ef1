#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use clap::Parser;
use resvg::{tiny_skia, usvg};
use roundtrip_cli::{run_with, Cli};
use roundtrip_core::{SeededIds, SketchId, Sketchbook, SteppingClock};
use roundtrip_identity::sheet::{
    label_origin_mm, LABELS_PER_ROW, LABEL_MM, PAGE_HEIGHT_MM, PAGE_WIDTH_MM, ROWS,
};
use roundtrip_identity::synthetic::{capture_with_label, sketch_canvas};
use roundtrip_identity::{encode_png, encode_qr, render_modules};
use roundtrip_service::{Api, Service};

/// A store whose clock and id source are fixed, so identical operation
/// sequences produce identical bytes.
pub fn deterministic_book(root: &Path) -> Sketchbook {
    Sketchbook::open_with(root, Arc::new(SteppingClock::new(1_700_000_000, 7)), Arc::new(SeededIds::new(42)))
        .unwrap()
}

pub fn deterministic_service(root: &Path) -> Service {
    Service::new(deterministic_book(root))
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Run {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_str(&self.stdout)
            .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {:?}", self.stdout))
    }
}

pub fn cli(api: &dyn Api, args: &[&str]) -> Run {
    let parsed = Cli::try_parse_from(std::iter::once("roundtrip").chain(args.iter().copied()))
        .unwrap_or_else(|e| panic!("bad test arguments {args:?}: {e}"));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with(&parsed, api, &mut out, &mut err);
    Run { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

pub fn write_png(path: &Path, seed: u64) {
    std::fs::write(path, encode_png(&sketch_canvas(320, 240, seed, 12))).unwrap();
}

pub fn write_jpeg(path: &Path, seed: u64) {
    sketch_canvas(320, 240, seed, 12).save_with_format(path, image::ImageFormat::Jpeg).unwrap();
}

pub fn write_capture(path: &Path, label: Option<SketchId>, seed: u64) {
    std::fs::write(path, encode_png(&capture_with_label(2000, 1500, label, 150, seed))).unwrap();
}

pub fn write_label_photo(path: &Path, id: SketchId) {
    std::fs::write(path, encode_png(&render_modules(&encode_qr(id), 6))).unwrap();
}

/// Renders each label cell of an SVG sheet with resvg and reads it with
/// rqrr. Returns the decoded text per cell, row-major.
pub fn decode_sheet(svg: &str) -> Vec<Vec<Option<String>>> {
    const DPI: f32 = 600.0;
    let tree = usvg::Tree::from_str(svg, &usvg::Options::default()).unwrap();
    let size = tree.size();
    let scale = DPI / 25.4;
    let (sx, sy) =
        (PAGE_WIDTH_MM as f32 * scale / size.width(), PAGE_HEIGHT_MM as f32 * scale / size.height());
    let side = ((LABEL_MM + 2.0) as f32 * scale).ceil() as u32;
    (0..ROWS)
        .map(|row| {
            (0..LABELS_PER_ROW)
                .map(|col| {
                    let (x, y) = label_origin_mm(row, col);
                    let (x0, y0) = ((x - 1.0) as f32 * scale, (y - 1.0) as f32 * scale);
                    let mut pixmap = tiny_skia::Pixmap::new(side, side).unwrap();
                    pixmap.fill(tiny_skia::Color::WHITE);
                    let transform = tiny_skia::Transform::from_scale(sx, sy).post_translate(-x0, -y0);
                    resvg::render(&tree, transform, &mut pixmap.as_mut());
                    let mut prepared =
                        rqrr::PreparedImage::prepare_from_greyscale(side as usize, side as usize, |x, y| {
                            let p = pixmap.pixel(x as u32, y as u32).unwrap();
                            ((p.red() as u32 * 299 + p.green() as u32 * 587 + p.blue() as u32 * 114) / 1000)
                                as u8
                        });
                    let grids = prepared.detect_grids();
                    grids.first().and_then(|g| g.decode().ok()).map(|(_, text)| text)
                })
                .collect()
        })
        .collect()
}

/// Decoded cell texts with their multiplicities, in first-seen order.
pub fn sheet_census(svg: &str) -> Vec<(Option<String>, usize)> {
    let mut census: Vec<(Option<String>, usize)> = Vec::new();
    for cell in decode_sheet(svg).into_iter().flatten() {
        match census.iter_mut().find(|(text, _)| *text == cell) {
            Some((_, n)) => *n += 1,
            None => census.push((cell, 1)),
        }
    }
    census
}
