//! Printable QR label sheets.
//!
//! A sheet is an A4 portrait SVG holding 13 rows of 10 identical 1 cm
//! labels. Every label is a `<g class="label">` carrying its full UUID in
//! `data-uuid`, and under each row the first eight hex characters are
//! printed for matching by eye. Output is a pure function of the ids, so
//! sheets for fixed ids are byte-identical.

use std::collections::HashSet;
use std::fmt::Write;

use roundtrip_core::{new_uuid, SketchId};

use crate::qr::QUIET_ZONE;
use crate::{encode_qr, IdentityError};

pub const ROWS: usize = 13;
pub const LABELS_PER_ROW: usize = 10;
pub const LABELS_PER_SHEET: usize = ROWS * LABELS_PER_ROW;

/// Page geometry in millimetres.
pub const PAGE_WIDTH_MM: f64 = 210.0;
pub const PAGE_HEIGHT_MM: f64 = 297.0;
pub const MARGIN_MM: f64 = 5.0;
/// Printed label side, quiet zone included.
pub const LABEL_MM: f64 = 10.0;
pub const COLUMN_PITCH_MM: f64 = 20.0;
pub const ROW_PITCH_MM: f64 = 22.0;

/// Top-left corner of the label at `row`, `col`, in millimetres.
pub fn label_origin_mm(row: usize, col: usize) -> (f64, f64) {
    let x = MARGIN_MM + col as f64 * COLUMN_PITCH_MM + (COLUMN_PITCH_MM - LABEL_MM) / 2.0;
    let y = MARGIN_MM + row as f64 * ROW_PITCH_MM + 1.0;
    (x, y)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSheet {
    /// Id printed in each row, top to bottom.
    pub rows: Vec<SketchId>,
    pub svg: String,
}

impl LabelSheet {
    /// Distinct ids on the sheet, in row order.
    pub fn distinct_ids(&self) -> Vec<SketchId> {
        let mut seen = HashSet::new();
        self.rows.iter().copied().filter(|id| seen.insert(*id)).collect()
    }
}

/// A sheet of 13 distinct ids, either the given ones (row `k` gets
/// `ids[k]`) or freshly minted.
pub fn generate_label_sheet(ids: Option<&[SketchId]>) -> Result<LabelSheet, IdentityError> {
    let rows: Vec<SketchId> = match ids {
        Some(ids) => {
            let distinct = ids.iter().collect::<HashSet<_>>().len();
            if ids.len() != ROWS || distinct != ROWS {
                return Err(IdentityError::WrongCount { given: ids.len(), distinct });
            }
            ids.to_vec()
        }
        None => {
            let mut fresh: Vec<SketchId> = Vec::with_capacity(ROWS);
            while fresh.len() < ROWS {
                let id = new_uuid();
                if !fresh.contains(&id) {
                    fresh.push(id);
                }
            }
            fresh
        }
    };
    let svg = render_svg(&rows);
    Ok(LabelSheet { rows, svg })
}

/// A full sheet where every label carries `id`, for marking new analog
/// revisions of an existing sketch.
pub fn generate_labels_for(id: SketchId) -> LabelSheet {
    let rows = vec![id; ROWS];
    let svg = render_svg(&rows);
    LabelSheet { rows, svg }
}

fn fmt_mm(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn render_svg(rows: &[SketchId]) -> String {
    let mut svg = String::with_capacity(64 * 1024);
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" version="1.1" width="{w}mm" height="{h}mm" viewBox="0 0 {w} {h}">"#,
        w = fmt_mm(PAGE_WIDTH_MM),
        h = fmt_mm(PAGE_HEIGHT_MM),
    );
    let _ = writeln!(svg, "<title>QR label sheet</title>");

    let _ = writeln!(svg, "<defs>");
    let mut defined = HashSet::new();
    for id in rows {
        if !defined.insert(*id) {
            continue;
        }
        let code = encode_qr(*id);
        let side = code.size() + 2 * QUIET_ZONE;
        let mut path = String::new();
        for (x, y, width) in code.dark_runs() {
            let _ = write!(path, "M{x} {y}h{width}v1h-{width}z");
        }
        let _ = writeln!(
            svg,
            r##"<symbol id="qr-{id}" viewBox="-{q} -{q} {side} {side}"><rect x="-{q}" y="-{q}" width="{side}" height="{side}" fill="#fff"/><path d="{path}" fill="#000"/></symbol>"##,
            q = QUIET_ZONE,
        );
    }
    let _ = writeln!(svg, "</defs>");

    let _ = writeln!(
        svg,
        r##"<rect x="0" y="0" width="{}" height="{}" fill="#fff"/>"##,
        fmt_mm(PAGE_WIDTH_MM),
        fmt_mm(PAGE_HEIGHT_MM),
    );
    for (row, id) in rows.iter().enumerate() {
        let _ = writeln!(svg, r#"<g class="row" data-row="{row}" data-uuid="{id}">"#);
        for col in 0..LABELS_PER_ROW {
            let (x, y) = label_origin_mm(row, col);
            let _ = writeln!(
                svg,
                r##"<g class="label" data-uuid="{id}" data-row="{row}" data-col="{col}"><use xlink:href="#qr-{id}" x="{x}" y="{y}" width="{s}" height="{s}"/></g>"##,
                x = fmt_mm(x),
                y = fmt_mm(y),
                s = fmt_mm(LABEL_MM),
            );
        }
        let (x, y) = label_origin_mm(row, 0);
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" font-family="monospace" font-size="3" fill="#000">{}</text>"##,
            fmt_mm(x),
            fmt_mm(y + LABEL_MM + 3.5),
            id.short(),
        );
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    svg
}
