//! Append-only record log.
//!
//! One record per line, fields separated by tabs:
//!
//! ```text
//! <seq>\t<kind>\t<payload-json>\t<crc32-hex>\n
//! ```
//!
//! The CRC-32 covers everything before the last tab. Line 0 is a header
//! record (`0\theader\t{"format":1}\t...`). Compact JSON never contains a raw
//! tab or newline, so the separators are unambiguous.
//!
//! A record counts only once its trailing newline is on disk. On open, an
//! unterminated or checksum-failing final line is a torn write and gets
//! truncated; damage anywhere earlier is reported as [`StoreError::CorruptLog`].

use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::StoreError;

pub const FORMAT_VERSION: u32 = 1;
const HEADER_KIND: &str = "header";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecordKind {
    SketchCreated,
    RevisionAdded,
    AnnotationAdded,
    LinkCreated,
    LinkDeleted,
}

impl RecordKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordKind::SketchCreated => "sketch-created",
            RecordKind::RevisionAdded => "revision-added",
            RecordKind::AnnotationAdded => "annotation-added",
            RecordKind::LinkCreated => "link-created",
            RecordKind::LinkDeleted => "link-deleted",
        }
    }
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RecordKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "sketch-created" => RecordKind::SketchCreated,
            "revision-added" => RecordKind::RevisionAdded,
            "annotation-added" => RecordKind::AnnotationAdded,
            "link-created" => RecordKind::LinkCreated,
            "link-deleted" => RecordKind::LinkDeleted,
            other => return Err(format!("unknown record kind {other:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogRecord {
    pub seq: u64,
    pub kind: RecordKind,
    pub payload: String,
}

#[derive(Debug)]
pub struct RecordLog {
    file: File,
    len: u64,
    next_seq: u64,
}

fn encode_line(seq: u64, kind: &str, payload: &str) -> String {
    let body = format!("{seq}\t{kind}\t{payload}");
    let crc = crc32fast::hash(body.as_bytes());
    format!("{body}\t{crc:08x}\n")
}

/// Parses one line without its newline into `(seq, kind, payload)`.
fn decode_line(line: &str) -> Result<(u64, &str, &str), String> {
    let (body, crc) = line.rsplit_once('\t').ok_or("missing checksum")?;
    let expected = u32::from_str_radix(crc, 16).map_err(|_| "malformed checksum")?;
    if crc.len() != 8 || crc32fast::hash(body.as_bytes()) != expected {
        return Err("checksum mismatch".into());
    }
    let mut fields = body.splitn(3, '\t');
    let seq = fields.next().and_then(|s| s.parse::<u64>().ok()).ok_or("malformed sequence number")?;
    let kind = fields.next().ok_or("missing kind")?;
    let payload = fields.next().ok_or("missing payload")?;
    Ok((seq, kind, payload))
}

impl RecordLog {
    /// Opens or creates the log, truncating a torn tail, and returns every
    /// intact record after the header in order.
    pub fn open(path: &Path) -> Result<(Self, Vec<LogRecord>), StoreError> {
        let mut file = OpenOptions::new().read(true).append(true).create(true).open(path)?;
        let mut raw = Vec::new();
        file.read_to_end(&mut raw)?;

        let mut records = Vec::new();
        let mut good_len = 0usize;
        let mut expected_seq = 0u64;
        let mut line_no = 0usize;
        let mut rest = &raw[..];

        while !rest.is_empty() {
            let Some(newline) = rest.iter().position(|&b| b == b'\n') else {
                break; // unterminated tail
            };
            let line = &rest[..newline];
            let is_last = newline + 1 == rest.len();
            let parsed = std::str::from_utf8(line)
                .map_err(|_| "invalid utf-8".to_string())
                .and_then(decode_line)
                .and_then(|(seq, kind, payload)| {
                    if seq != expected_seq {
                        return Err(format!("expected sequence {expected_seq}, found {seq}"));
                    }
                    Ok((seq, kind, payload))
                });
            let (seq, kind, payload) = match parsed {
                Ok(fields) => fields,
                Err(_) if is_last => break,
                Err(reason) => return Err(StoreError::CorruptLog { line: line_no, reason }),
            };

            if seq == 0 {
                if kind != HEADER_KIND {
                    return Err(StoreError::CorruptLog { line: 0, reason: "missing header record".into() });
                }
                check_header(payload)?;
            } else {
                let kind = kind.parse().map_err(|reason| StoreError::CorruptLog { line: line_no, reason })?;
                records.push(LogRecord { seq, kind, payload: payload.to_string() });
            }

            expected_seq += 1;
            line_no += 1;
            good_len += newline + 1;
            rest = &rest[newline + 1..];
        }

        if good_len < raw.len() {
            file.set_len(good_len as u64)?;
            file.sync_all()?;
        }

        let mut log = RecordLog { file, len: good_len as u64, next_seq: expected_seq };
        if log.next_seq == 0 {
            let header = format!("{{\"format\":{FORMAT_VERSION}}}");
            log.write_line(&encode_line(0, HEADER_KIND, &header))?;
            log.next_seq = 1;
        }
        Ok((log, records))
    }

    /// Appends one record and returns its sequence number once it is
    /// durable on disk.
    pub fn append(&mut self, kind: RecordKind, payload: &str) -> Result<u64, StoreError> {
        assert!(!payload.contains(['\n', '\t']), "record payload must be single-line compact JSON");
        let seq = self.next_seq;
        self.write_line(&encode_line(seq, kind.as_str(), payload))?;
        self.next_seq += 1;
        Ok(seq)
    }

    /// Sequence number the next append will receive.
    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    fn write_line(&mut self, line: &str) -> Result<(), StoreError> {
        let result = self.file.write_all(line.as_bytes()).and_then(|()| self.file.sync_data());
        if let Err(e) = result {
            // Drop whatever part of the line made it out so the next append
            // does not land behind a torn record.
            let _ = self.file.set_len(self.len);
            return Err(e.into());
        }
        self.len += line.len() as u64;
        Ok(())
    }
}

fn check_header(payload: &str) -> Result<(), StoreError> {
    let found = serde_json::from_str::<serde_json::Value>(payload)
        .ok()
        .and_then(|v| v.get("format").and_then(|f| f.as_u64()));
    match found {
        Some(v) if v == u64::from(FORMAT_VERSION) => Ok(()),
        _ => Err(StoreError::IncompatibleFormat {
            found: payload.to_string(),
            expected: FORMAT_VERSION.to_string(),
        }),
    }
}
