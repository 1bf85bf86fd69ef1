//! Parsing of sketch references given on the command line:
//! `uuid`, `uuid@seq`, `uuid@latest` and `...:x0,y0,x1,y1`.

use roundtrip_core::{AnchorRequest, Rect, RectSpec, SketchId};

use crate::CliError;

fn parse_id(text: &str) -> Result<SketchId, CliError> {
    text.parse().map_err(|_| CliError::InvalidArgument(format!("{text:?} is not a UUID")))
}

fn parse_seq(text: &str) -> Result<u32, CliError> {
    text.parse()
        .ok()
        .filter(|seq| *seq > 0)
        .ok_or_else(|| CliError::InvalidArgument(format!("{text:?} is not a revision number")))
}

/// `x0,y0,x1,y1`, normalized to the image, with `0 <= x0 < x1 <= 1` and
/// likewise for y.
pub fn parse_rect(text: &str) -> Result<RectSpec, CliError> {
    let values: Vec<f64> = text
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::MalformedRect(text.to_string()))?;
    let [x0, y0, x1, y1] = values[..] else {
        return Err(CliError::MalformedRect(text.to_string()));
    };
    Rect::new(x0, y0, x1, y1).map_err(|_| CliError::MalformedRect(text.to_string()))?;
    Ok(RectSpec { x0, y0, x1, y1 })
}

/// `uuid[@seq|@latest][:x0,y0,x1,y1]`.
pub fn parse_anchor(text: &str) -> Result<AnchorRequest, CliError> {
    let (target, rect) = match text.split_once(':') {
        Some((target, rect)) => (target, Some(parse_rect(rect)?)),
        None => (text, None),
    };
    let (id, revision) = match target.split_once('@') {
        Some((id, rev)) => (id, Some(rev)),
        None => (target, None),
    };
    let mut anchor = AnchorRequest::whole(parse_id(id)?);
    anchor.region = rect;
    match revision {
        None => {}
        Some("latest") => anchor.follow_latest = true,
        Some(seq) => anchor.revision = Some(parse_seq(seq)?),
    }
    Ok(anchor)
}

/// `uuid[@seq]`; no seq means the head.
pub fn parse_revision_ref(text: &str) -> Result<(SketchId, Option<u32>), CliError> {
    match text.split_once('@') {
        Some((id, seq)) => Ok((parse_id(id)?, Some(parse_seq(seq)?))),
        None => Ok((parse_id(text)?, None)),
    }
}
