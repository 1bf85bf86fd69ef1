use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use roundtrip_core::{
    Anchor, AnnotationContent, DirectedLink, Medium, Metadata, MetadataEntry, Revision, RevisionSummary,
    SketchId, Sketchbook,
};
use roundtrip_service::server::run_blocking;
use roundtrip_service::*;
use serde::Serialize;
use serde_json::json;
use uuid::Uuid;

use crate::args::{Cli, Command, MetadataArgs, OutputFormat};
use crate::refs::{parse_anchor, parse_revision_ref};
use crate::{report, CliError};

type Result<T = ()> = std::result::Result<T, CliError>;

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::Unreadable { path: path.to_path_buf(), reason: e.to_string() })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result {
    std::fs::write(path, bytes).map_err(CliError::Output)
}

fn sketch_id(text: &str) -> Result<SketchId> {
    text.parse().map_err(|_| CliError::InvalidArgument(format!("{text:?} is not a UUID")))
}

fn medium(text: &str) -> Result<Medium> {
    text.parse().map_err(CliError::InvalidArgument)
}

fn metadata(args: &MetadataArgs) -> Result<Metadata> {
    let date = args
        .date
        .as_deref()
        .map(|d| {
            NaiveDate::parse_from_str(d, "%Y-%m-%d")
                .ok()
                .ok_or_else(|| CliError::InvalidArgument(format!("{d:?} is not a YYYY-MM-DD date")))
        })
        .transpose()?;
    let extra = args
        .extra
        .iter()
        .map(|kv| match kv.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => {
                Ok(MetadataEntry { key: k.trim().to_string(), value: v.trim().to_string() })
            }
            _ => Err(CliError::InvalidArgument(format!("{kv:?} is not key=value"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Metadata { title: args.title.clone(), authors: args.authors.clone(), date, extra }.normalized())
}

fn guess_media_mime(path: &Path, family: &str) -> String {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or_default().to_ascii_lowercase();
    let subtype = match (family, ext.as_str()) {
        ("audio", "ogg" | "oga" | "opus") => "ogg",
        ("audio", "mp3") => "mpeg",
        ("audio", "m4a") => "mp4",
        ("audio", ext @ ("wav" | "aac" | "flac" | "webm")) => ext,
        ("video", "ogv") => "ogg",
        ("video", "mov") => "quicktime",
        ("video", "mkv") => "x-matroska",
        ("video", "avi") => "x-msvideo",
        ("video", ext @ ("mp4" | "webm")) => ext,
        _ => return "application/octet-stream".into(),
    };
    format!("{family}/{subtype}")
}

struct Printer<'a> {
    format: OutputFormat,
    out: &'a mut dyn Write,
}

impl Printer<'_> {
    /// Writes `value` as one JSON line, or `human` lines otherwise.
    fn emit<T: Serialize>(&mut self, value: &T, human: impl FnOnce() -> Vec<String>) -> Result {
        match self.format {
            OutputFormat::Json => {
                writeln!(self.out, "{}", serde_json::to_string(value).expect("serializable"))?
            }
            OutputFormat::Human => {
                for line in human() {
                    writeln!(self.out, "{line}")?;
                }
            }
        }
        Ok(())
    }
}

fn describe_anchor(anchor: &Anchor) -> String {
    let mut text = anchor.sketch.to_string();
    match anchor.revision {
        Some(seq) => text.push_str(&format!("@{seq}")),
        None => text.push_str("@latest"),
    }
    if let Some(region) = anchor.region {
        let [x0, y0, x1, y1] = region.coords();
        text.push_str(&format!(":{x0},{y0},{x1},{y1}"));
    }
    text
}

fn describe_link(link: &DirectedLink) -> String {
    let label = link.link.label.as_deref().map(|l| format!(" \"{l}\"")).unwrap_or_default();
    format!(
        "{}\t{}\t{} -> {}{label}",
        serde_json::to_value(link.direction).expect("serializable").as_str().unwrap_or_default(),
        link.link.id,
        describe_anchor(&link.link.source),
        describe_anchor(&link.link.target),
    )
}

fn describe_revision(r: &RevisionSummary) -> String {
    let message = if r.commit_message.is_empty() { "(initial)" } else { &r.commit_message };
    format!("{}\t{}\t{}\t{message}", r.seq, r.created_at.format("%Y-%m-%dT%H:%M:%SZ"), r.medium.as_str())
}

fn head_of(api: &dyn Api, id: SketchId) -> Result<u32> {
    Ok(api.sketch(id)?.head_seq)
}

/// Runs one subcommand against `api`, writing its result to `out`.
pub fn execute(command: &Command, format: OutputFormat, api: &dyn Api, out: &mut dyn Write) -> Result {
    let mut p = Printer { format, out };
    match command {
        Command::Capture {
            image,
            metadata: meta,
            commit_message,
            uuid,
            medium: medium_arg,
            no_carry_metadata,
        } => {
            let request = IngestRequest {
                image: read_file(image)?,
                uuid: uuid.as_deref().map(sketch_id).transpose()?,
                commit_message: commit_message.clone(),
                medium: medium_arg.as_deref().map(medium).transpose()?,
                metadata: metadata(meta)?,
                carry_metadata: no_carry_metadata.then_some(false),
            };
            let outcome = api.ingest(request)?;
            p.emit(&outcome, || {
                let verb = match outcome.path {
                    IngestPath::SketchCreated => "created",
                    IngestPath::RevisionAppended => "revision",
                };
                let mut lines = vec![format!("{verb} {} rev {}", outcome.sketch, outcome.seq)];
                lines.extend(outcome.warnings.iter().map(|w| format!("warning: {w}")));
                lines
            })
        }
        Command::Revise {
            sketch,
            image,
            commit_message,
            expected_head,
            carry_metadata,
            metadata: meta,
            medium: medium_arg,
        } => {
            let id = sketch_id(sketch)?;
            let image = read_file(image)?;
            let upload = RevisionUpload {
                image,
                commit_message: commit_message.clone(),
                expected_head: match expected_head {
                    Some(head) => *head,
                    None => head_of(api, id)?,
                },
                carry_metadata: *carry_metadata,
                medium: medium(medium_arg)?,
                metadata: metadata(meta)?,
            };
            let revision: Revision = api.add_revision(id, upload)?;
            p.emit(&revision, || vec![format!("revision {id} rev {}", revision.seq)])
        }
        Command::Scan { image } => {
            let result = api.scan(read_file(image)?)?;
            p.emit(&result, || match &result {
                ScanResult::Resolved { sketch, head, links, warnings } => {
                    let mut lines = vec![
                        format!("resolved {}", sketch.id),
                        format!("head {}", describe_revision(&head.summary())),
                    ];
                    lines.extend(links.iter().map(describe_link));
                    lines.extend(warnings.iter().map(|w| format!("warning: {w}")));
                    lines
                }
                ScanResult::UnknownId { uuid } => vec![format!("unknown-id {uuid}")],
                ScanResult::NoCode => vec!["no-code".to_string()],
            })
        }
        Command::History { sketch } => {
            let detail = api.sketch(sketch_id(sketch)?)?;
            let history: Vec<RevisionSummary> = detail.revisions.iter().map(Revision::summary).collect();
            p.emit(&history, || history.iter().map(describe_revision).collect())
        }
        Command::Show { sketch } => {
            let detail = api.sketch(sketch_id(sketch)?)?;
            p.emit(&detail, || {
                let head = detail.revisions.last().expect("a sketch has a root revision");
                let meta = &head.metadata;
                let mut lines =
                    vec![format!("sketch {}", detail.id), format!("head rev {}", detail.head_seq)];
                if let Some(title) = &meta.title {
                    lines.push(format!("title {title}"));
                }
                if !meta.authors.is_empty() {
                    lines.push(format!("authors {}", meta.authors.join(", ")));
                }
                if let Some(date) = meta.date {
                    lines.push(format!("date {date}"));
                }
                for e in &meta.extra {
                    lines.push(format!("{} {}", e.key, e.value));
                }
                for r in &detail.revisions {
                    lines.push(format!("rev {}", describe_revision(&r.summary())));
                    for a in &r.annotations {
                        let text = match &a.content {
                            AnnotationContent::Text { body } => format!("text: {body}"),
                            AnnotationContent::Audio { blob } => format!("audio: {}", blob.hash),
                            AnnotationContent::Video { blob } => format!("video: {}", blob.hash),
                        };
                        lines.push(format!("  {} {text}", a.id));
                    }
                }
                lines.extend(detail.links.iter().map(describe_link));
                lines
            })
        }
        Command::List => {
            let sketches = api.list_sketches()?;
            p.emit(&sketches, || {
                sketches
                    .iter()
                    .map(|s| format!("{}\trev {}\t{}", s.id, s.head_seq, s.title.as_deref().unwrap_or("")))
                    .collect()
            })
        }
        Command::Link { source, target, label } => {
            let request = CreateLinkRequest {
                source: parse_anchor(source)?,
                target: parse_anchor(target)?,
                label: label.clone(),
            };
            let link = api.create_link(request)?;
            p.emit(&link, || vec![format!("link {}", link.id)])
        }
        Command::Unlink { link } => {
            let id = Uuid::parse_str(link)
                .map_err(|_| CliError::InvalidArgument(format!("{link:?} is not a UUID")))?;
            api.delete_link(id)?;
            p.emit(&json!({"deleted": id}), || vec![format!("deleted link {id}")])
        }
        Command::Links { sketch } => {
            let links = api.list_links(sketch_id(sketch)?)?;
            p.emit(&links, || links.iter().map(describe_link).collect())
        }
        Command::Annotate { revision, text, audio, video, mime } => {
            let (id, seq) = parse_revision_ref(revision)?;
            let seq = match seq {
                Some(seq) => seq,
                None => head_of(api, id)?,
            };
            let upload = match (text, audio, video) {
                (Some(body), None, None) => AnnotationUpload::Text(body.clone()),
                (None, Some(path), None) => AnnotationUpload::Audio {
                    mime: mime.clone().unwrap_or_else(|| guess_media_mime(path, "audio")),
                    bytes: read_file(path)?,
                },
                (None, None, Some(path)) => AnnotationUpload::Video {
                    mime: mime.clone().unwrap_or_else(|| guess_media_mime(path, "video")),
                    bytes: read_file(path)?,
                },
                _ => {
                    return Err(CliError::InvalidArgument(
                        "give exactly one of --text, --audio or --video".into(),
                    ))
                }
            };
            let annotation = api.attach_annotation(id, seq, upload)?;
            p.emit(&annotation, || vec![format!("annotation {} on {id}@{seq}", annotation.id)])
        }
        Command::Labels { for_sketch, output } => {
            let for_sketch = for_sketch.as_deref().map(sketch_id).transpose()?;
            let sheet = api.label_sheet(for_sketch)?;
            write_file(output, sheet.svg.as_bytes())?;
            p.emit(&json!({"path": output, "ids": sheet.ids}), || {
                let mut lines = vec![format!("wrote {}", output.display())];
                lines.extend(sheet.ids.iter().map(|id| format!("{} {id}", id.short())));
                lines
            })
        }
        Command::Export { revision, output } => {
            let (id, seq) = parse_revision_ref(revision)?;
            let seq = match seq {
                Some(seq) => seq,
                None => head_of(api, id)?,
            };
            let image = api.revision_image(id, seq)?;
            write_file(output, &image.bytes)?;
            p.emit(
                &json!({"path": output, "sketch": id, "seq": seq, "mime": image.mime, "bytes": image.bytes.len()}),
                || vec![format!("wrote {} ({}, {} bytes)", output.display(), image.mime, image.bytes.len())],
            )
        }
        Command::Serve { .. } => {
            Err(CliError::InvalidArgument("serve runs its own server and takes no --server".into()))
        }
    }
}

pub(crate) fn serve(
    cli: &Cli,
    addr: Option<&str>,
    ui_dir: Option<PathBuf>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let mut config = match ServerConfig::from_env() {
        Ok(config) => config,
        Err(e) => return report(&CliError::InvalidArgument(e.to_string()), cli.output_format, err),
    };
    if let Some(addr) = addr {
        match addr.parse() {
            Ok(addr) => config.addr = addr,
            Err(_) => {
                let e = CliError::InvalidArgument(format!("{addr:?} is not a socket address"));
                return report(&e, cli.output_format, err);
            }
        }
    }
    if ui_dir.is_some() {
        config.options.ui_dir = ui_dir;
    }
    let book = match Sketchbook::open(&cli.store) {
        Ok(book) => book,
        Err(e) => return report(&CliError::Api(e.into()), cli.output_format, err),
    };
    let store = cli.store.display().to_string();
    let result = run_blocking(config.addr, Service::new(book), config.options, |bound| {
        let _ = writeln!(out, "serving {store} on http://{bound}");
        let _ = out.flush();
    });
    match result {
        Ok(()) => 0,
        Err(e) => report(&CliError::Output(e), cli.output_format, err),
    }
}
