use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "roundtrip", version, about = "Capture, version and link sketches")]
pub struct Cli {
    /// Server URL, or "embedded" to open the store directly.
    #[arg(long, env = "ROUNDTRIP_SERVER", global = true)]
    pub server: Option<String>,

    /// Store directory for embedded mode and `serve`.
    #[arg(long, env = "ROUNDTRIP_STORE", default_value = "./data", global = true)]
    pub store: PathBuf,

    #[arg(long, value_enum, default_value_t = OutputFormat::Human, global = true)]
    pub output_format: OutputFormat,

    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    /// The server URL, unless running embedded.
    pub fn server_url(&self) -> Option<&str> {
        self.server.as_deref().map(str::trim).filter(|s| !s.is_empty() && *s != "embedded")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Human,
    Json,
}

#[derive(Debug, Args, Default)]
pub struct MetadataArgs {
    #[arg(long)]
    pub title: Option<String>,
    /// Repeatable.
    #[arg(long = "author")]
    pub authors: Vec<String>,
    /// YYYY-MM-DD.
    #[arg(long)]
    pub date: Option<String>,
    /// Free-form `key=value`, repeatable.
    #[arg(long = "extra")]
    pub extra: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest a photo or scan: appends to the labelled sketch or creates one.
    Capture {
        image: PathBuf,
        #[command(flatten)]
        metadata: MetadataArgs,
        /// Required when the image's label belongs to an existing sketch.
        #[arg(long, short = 'm')]
        commit_message: Option<String>,
        /// Id to bind if the image carries no label.
        #[arg(long)]
        uuid: Option<String>,
        #[arg(long)]
        medium: Option<String>,
        /// Do not carry the previous head's metadata into an appended revision.
        #[arg(long)]
        no_carry_metadata: bool,
    },
    /// Add a revision to a known sketch.
    Revise {
        sketch: String,
        image: PathBuf,
        #[arg(long, short = 'm')]
        commit_message: String,
        /// Defaults to the current head.
        #[arg(long)]
        expected_head: Option<u32>,
        /// Start from the head's metadata.
        #[arg(long)]
        carry_metadata: bool,
        #[command(flatten)]
        metadata: MetadataArgs,
        #[arg(long, default_value = "digital-upload")]
        medium: String,
    },
    /// Resolve the label in an image to a sketch.
    Scan { image: PathBuf },
    /// Revisions of a sketch, oldest first.
    History { sketch: String },
    /// Full record of a sketch.
    Show { sketch: String },
    /// All sketches, newest first.
    List,
    /// Link two anchors: `uuid[@seq|@latest][:x0,y0,x1,y1]`.
    Link {
        source: String,
        target: String,
        #[arg(long)]
        label: Option<String>,
    },
    /// Delete a link.
    Unlink { link: String },
    /// Links touching a sketch.
    Links { sketch: String },
    /// Attach text, audio or video to `uuid@seq`.
    Annotate {
        revision: String,
        #[arg(long, group = "content")]
        text: Option<String>,
        #[arg(long, group = "content")]
        audio: Option<PathBuf>,
        #[arg(long, group = "content")]
        video: Option<PathBuf>,
        /// MIME type of the audio or video file; guessed from the extension otherwise.
        #[arg(long)]
        mime: Option<String>,
    },
    /// Write a printable label sheet.
    Labels {
        /// Fill the sheet with this sketch's id instead of 13 fresh ones.
        #[arg(long = "for")]
        for_sketch: Option<String>,
        #[arg(long, short = 'o')]
        output: PathBuf,
    },
    /// Write the original image bytes of `uuid[@seq]`.
    Export {
        revision: String,
        #[arg(long, short = 'o')]
        output: PathBuf,
    },
    /// Run the HTTP service.
    Serve {
        /// Overrides ROUNDTRIP_ADDR.
        #[arg(long)]
        addr: Option<String>,
        /// Web UI bundle to serve at `/`; overrides ROUNDTRIP_UI_DIR.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
}
