//! Acceptance suite. Runs every primary criterion, prints one PASS or FAIL
//! line per criterion and exits non-zero if any failed.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Barrier};
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use common::*;
use image::{imageops, GrayImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roundtrip_cli::HttpClient;
use roundtrip_core::*;
use roundtrip_identity::sheet::{generate_label_sheet, LABELS_PER_ROW, ROWS};
use roundtrip_identity::synthetic::{capture_with_label, sketch_canvas};
use roundtrip_identity::{decode_gray, encode_png, encode_qr, rasterize, LABEL_PX_300DPI};
use roundtrip_service::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("qr-round-trip", qr_round_trip),
        ("label-sheet-oracle", label_sheet_oracle),
        ("ingest-pipeline", ingest_pipeline),
        ("history-linearity", history_linearity),
        ("crash-consistency", crash_consistency),
        ("api-core-equivalence", api_core_equivalence),
        ("metadata-transfer", metadata_transfer),
        ("blob-round-trip", blob_round_trip),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            Err(panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .map(|m| format!("panicked: {m}"))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.2}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} ({secs:.2}s)");
            }
        }
    }
    println!("{} of {} criteria passed", 8 - failed, 8);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn random_id(rng: &mut impl Rng) -> SketchId {
    SketchId::from_uuid(uuid::Builder::from_random_bytes(rng.random()).into_uuid())
}

fn rotations(img: &GrayImage) -> [GrayImage; 4] {
    [img.clone(), imageops::rotate90(img), imageops::rotate180(img), imageops::rotate270(img)]
}

fn qr_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0001);
    let started = Instant::now();
    let mut decoded = 0;
    for _ in 0..100 {
        let id = random_id(&mut rng);
        let label = rasterize(&encode_qr(id), LABEL_PX_300DPI);
        ensure!(label.dimensions() == (118, 118), "label is {:?} px", label.dimensions());
        for (turn, img) in rotations(&label).iter().enumerate() {
            let got = decode_gray(img).map_err(|e| format!("{id} at {}deg: {e}", turn * 90))?;
            ensure!(got == Some(id), "{id} at {}deg decoded as {got:?}", turn * 90);
            decoded += 1;
        }
    }
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("100/100 ids, {decoded} decodes incl. rotations in {:.2}s", elapsed.as_secs_f64()))
}

fn label_sheet_oracle() -> Outcome {
    let sheet = generate_label_sheet(None).map_err(|e| e.to_string())?;
    let census = sheet_census(&sheet.svg);
    ensure!(census.len() == ROWS, "{} distinct cell texts: {census:?}", census.len());
    for (text, count) in &census {
        let id = text
            .as_deref()
            .and_then(SketchId::parse_canonical)
            .ok_or_else(|| format!("undecodable or non-uuid cell: {text:?}"))?;
        ensure!(sheet.rows.contains(&id), "{id} is not on the sheet");
        ensure!(*count == LABELS_PER_ROW, "{id} appears {count} times");
    }

    let fixed: Vec<SketchId> =
        (0..ROWS).map(|i| format!("00000000-0000-4000-8000-{i:012x}").parse().unwrap()).collect();
    let svg = generate_label_sheet(Some(&fixed)).map_err(|e| e.to_string())?.svg;
    let golden_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../identity/tests/golden/label_sheet.svg");
    let golden =
        std::fs::read_to_string(&golden_path).map_err(|e| format!("{}: {e}", golden_path.display()))?;
    ensure!(svg == golden, "fixed-id sheet differs from the golden file");
    Ok(format!("{ROWS} distinct ids x {LABELS_PER_ROW} copies decoded; fixed-id SVG matches golden"))
}

fn png_of(img: &GrayImage) -> Vec<u8> {
    encode_png(img)
}

fn ingest_pipeline() -> Outcome {
    let store = tempfile::tempdir().unwrap();
    let service = deterministic_service(store.path());
    let known = service
        .ingest(IngestRequest { image: png_of(&sketch_canvas(640, 480, 1, 12)), ..Default::default() })
        .map_err(|e| e.to_string())?
        .sketch;
    for n in 2..=3 {
        service
            .add_revision(
                known,
                RevisionUpload {
                    image: png_of(&sketch_canvas(640, 480, n, 12)),
                    commit_message: format!("pass {n}"),
                    expected_head: n as u32 - 1,
                    carry_metadata: true,
                    medium: Medium::DigitalUpload,
                    metadata: Metadata::default(),
                },
            )
            .map_err(|e| e.to_string())?;
    }
    let head = service.book().sketch(&known).map_err(|e| e.to_string())?.head_seq();

    const SEED: u64 = 77;
    let labelled = service
        .ingest(IngestRequest {
            image: png_of(&capture_with_label(2000, 1500, Some(known), 150, SEED)),
            commit_message: Some("photographed after markup".into()),
            ..Default::default()
        })
        .map_err(|e| e.to_string())?;
    ensure!(labelled.path == IngestPath::RevisionAppended, "labelled capture took path {:?}", labelled.path);
    ensure!(labelled.sketch == known, "appended to {} instead of {known}", labelled.sketch);
    ensure!(labelled.seq == head + 1, "seq {} after head {head}", labelled.seq);

    let before: Vec<SketchId> = service.book().sketches().iter().map(|s| s.id).collect();
    let plain = service
        .ingest(IngestRequest {
            image: png_of(&capture_with_label(2000, 1500, None, 150, SEED)),
            ..Default::default()
        })
        .map_err(|e| e.to_string())?;
    ensure!(plain.path == IngestPath::SketchCreated, "unlabelled capture took path {:?}", plain.path);
    ensure!(!before.contains(&plain.sketch), "reused existing id {}", plain.sketch);
    ensure!(plain.seq == 1, "new sketch starts at seq {}", plain.seq);
    Ok(format!(
        "labelled capture appended rev {} (head was {head}); unlabelled copy created {}",
        labelled.seq, plain.sketch
    ))
}

fn history_linearity() -> Outcome {
    let store = tempfile::tempdir().unwrap();
    let book = Arc::new(Sketchbook::open(store.path()).map_err(|e| e.to_string())?);
    let root = book.put_blob(b"root image", "image/png").unwrap();
    let id = book
        .create_sketch(None, root, Medium::AnalogCapture, Metadata::default())
        .map_err(|e| e.to_string())?
        .id;
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0004);
    const ROUNDS: u32 = 50;
    for round in 0..ROUNDS {
        let head = book.sketch(&id).map_err(|e| e.to_string())?.head_seq();
        let barrier = Arc::new(Barrier::new(2));
        let handles: Vec<_> = (0..2)
            .map(|t| {
                let (book, barrier) = (Arc::clone(&book), Arc::clone(&barrier));
                let jitter = Duration::from_micros(rng.random_range(0..200));
                let image =
                    book.put_blob(format!("round {round} thread {t}").as_bytes(), "image/png").unwrap();
                std::thread::spawn(move || {
                    barrier.wait();
                    std::thread::sleep(jitter);
                    book.add_revision(
                        &id,
                        NewRevision {
                            image,
                            medium: Medium::DigitalUpload,
                            commit_message: format!("round {round} thread {t}"),
                            expected_head: head,
                            carry_metadata: true,
                            metadata: Metadata::default(),
                        },
                    )
                })
            })
            .collect();
        let results: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        let ok = results.iter().filter(|r| r.is_ok()).count();
        let stale = results.iter().filter(|r| matches!(r, Err(CoreError::StaleHead { .. }))).count();
        ensure!(ok == 1 && stale == 1, "round {round}: {results:?}");
    }
    let seqs: Vec<u32> = book.get_history(&id).map_err(|e| e.to_string())?.iter().map(|r| r.seq).collect();
    let expected: Vec<u32> = (1..=ROUNDS + 1).collect();
    ensure!(seqs == expected, "history seqs {seqs:?}");
    drop(book);
    let reopened = Sketchbook::open(store.path()).map_err(|e| e.to_string())?;
    let replayed: Vec<u32> =
        reopened.get_history(&id).map_err(|e| e.to_string())?.iter().map(|r| r.seq).collect();
    ensure!(replayed == expected, "replayed seqs {replayed:?}");
    Ok(format!("{ROUNDS} interleavings, one winner and one stale-head each; seqs 1..{}", ROUNDS + 1))
}

fn crash_consistency() -> Outcome {
    let store = tempfile::tempdir().unwrap();
    let log = store.path().join("log");
    let (snapshot, cut_from, image) = {
        let book = Sketchbook::open(store.path()).map_err(|e| e.to_string())?;
        let mut ids = Vec::new();
        for i in 0..3 {
            let img = book.put_blob(format!("sketch {i}").as_bytes(), "image/png").unwrap();
            ids.push(book.create_sketch(None, img, Medium::AnalogCapture, Metadata::default()).unwrap().id);
        }
        book.create_link(&AnchorRequest::whole(ids[0]), &AnchorRequest::whole(ids[1]), None).unwrap();
        let snapshot = book.export_state();
        let cut_from = std::fs::metadata(&log).unwrap().len();
        let image = book.put_blob(b"the final revision", "image/png").unwrap();
        book.add_revision(
            &ids[2],
            NewRevision {
                image: image.clone(),
                medium: Medium::DigitalUpload,
                commit_message: "final".into(),
                expected_head: 1,
                carry_metadata: true,
                metadata: Metadata::default(),
            },
        )
        .unwrap();
        (snapshot, cut_from, image)
    };
    let full = std::fs::read(&log).unwrap();
    ensure!((full.len() as u64) > cut_from, "final record was not written");
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0005);
    for _ in 0..100 {
        let cut = rng.random_range(cut_from..full.len() as u64) as usize;
        std::fs::write(&log, &full[..cut]).unwrap();
        let book = Sketchbook::open(store.path()).map_err(|e| format!("reopen after cut at {cut}: {e}"))?;
        ensure!(book.export_state() == snapshot, "state after cut at byte {cut} differs from snapshot");
    }

    std::fs::write(&log, &full).unwrap();
    let blob_path = store.path().join("blobs").join(&image.hash[..2]).join(&image.hash);
    let mut bytes = std::fs::read(&blob_path).unwrap();
    bytes[3] ^= 0x10;
    std::fs::write(&blob_path, bytes).unwrap();
    let book = Sketchbook::open(store.path()).map_err(|e| e.to_string())?;
    let direct = book.get_blob(&image);
    ensure!(
        matches!(&direct, Err(e) if e.code() == "corruption-detected"),
        "flipped blob read returned {direct:?}"
    );
    let service = Service::new(book);
    let sketch = service.book().sketches().into_iter().find(|s| s.head().image == image).unwrap();
    match service.revision_image(sketch.id, 2) {
        Err(e) if e.code == "corruption-detected" && e.status == 500 => {}
        other => return Err(format!("image endpoint returned {other:?}")),
    }
    Ok("100 truncation points restore the pre-append snapshot; bit flip reported as corruption-detected"
        .into())
}

/// One executed step of a scripted CLI session.
#[derive(Debug, PartialEq)]
struct Step {
    args: Vec<String>,
    code: i32,
    stdout: String,
    stderr: String,
}

struct Script<'a> {
    api: &'a dyn Api,
    steps: Vec<Step>,
}

impl Script<'_> {
    fn run(&mut self, args: &[&str]) -> serde_json::Value {
        let mut full = vec!["--output-format", "json"];
        full.extend_from_slice(args);
        let run = cli(self.api, &full);
        let value = serde_json::from_str(&run.stdout).unwrap_or(serde_json::Value::Null);
        self.steps.push(Step {
            args: args.iter().map(|s| s.to_string()).collect(),
            code: run.code,
            stdout: run.stdout,
            stderr: run.stderr,
        });
        value
    }
}

fn str_of(v: &serde_json::Value, key: &str) -> String {
    v[key].as_str().unwrap_or_else(|| panic!("no {key} in {v}")).to_string()
}

struct Inputs {
    dir: tempfile::TempDir,
}

impl Inputs {
    fn new() -> Self {
        let inputs = Inputs { dir: tempfile::tempdir().unwrap() };
        for (name, seed) in
            [("a.png", 1), ("b.png", 2), ("c.png", 3), ("r1.png", 4), ("r2.png", 5), ("r4.png", 7)]
        {
            write_png(&inputs.path(name), seed);
        }
        write_jpeg(&inputs.path("r3.jpg"), 6);
        std::fs::write(inputs.path("memo.wav"), b"RIFF....WAVEfmt memo").unwrap();
        std::fs::create_dir(inputs.path("out")).unwrap();
        inputs
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }
}

/// Thirty CLI steps: creation, carried revisions, annotations, links, an
/// unlink, scans, a labelled capture and a handful of expected failures.
fn scenario(api: &dyn Api, inputs: &Inputs) -> Vec<Step> {
    let mut s = Script { api, steps: Vec::new() };
    let f = |name: &str| inputs.arg(name);
    let a = str_of(
        &s.run(&[
            "capture",
            &f("a.png"),
            "--title",
            "Atrium",
            "--author",
            "R. Ito",
            "--date",
            "2024-05-02",
            "--extra",
            "phase=concept",
        ]),
        "sketch",
    );
    let b = str_of(&s.run(&["capture", &f("b.png"), "--title", "Stair"]), "sketch");
    let c = str_of(&s.run(&["capture", &f("c.png")]), "sketch");
    s.run(&["list"]);
    s.run(&["revise", &a, &f("r1.png"), "-m", "massing", "--carry-metadata"]);
    s.run(&["revise", &a, &f("r2.png"), "-m", "stair core", "--carry-metadata", "--title", "Atrium v2"]);
    s.run(&["revise", &a, &f("r3.jpg"), "-m", "facade", "--carry-metadata", "--extra", "phase=design"]);
    s.run(&["history", &a]);
    s.run(&["show", &a]);
    s.run(&["annotate", &format!("{a}@2"), "--text", "check the stair"]);
    s.run(&["annotate", &a, "--audio", &f("memo.wav")]);
    let l1 = str_of(
        &s.run(&["link", &format!("{a}:0.2,0.2,0.6,0.5"), &format!("{b}@latest"), "--label", "detail"]),
        "id",
    );
    s.run(&["link", &b, &format!("{c}@1"), "--label", "context"]);
    s.run(&["links", &a]);
    s.run(&["links", &b]);
    s.run(&["unlink", &l1]);
    s.run(&["links", &b]);
    s.run(&["links", &c]);

    let a_id: SketchId = a.parse().unwrap();
    let photo = inputs.path(&format!("photo-{a}.png"));
    write_label_photo(&photo, a_id);
    s.run(&["scan", &photo.display().to_string()]);
    s.run(&["scan", &f("b.png")]);
    let b_capture = inputs.path(&format!("capture-{b}.png"));
    write_capture(&b_capture, Some(b.parse().unwrap()), 11);
    s.run(&["capture", &b_capture.display().to_string(), "-m", "pencil over print"]);
    let c_capture = inputs.path(&format!("capture-{c}.png"));
    write_capture(&c_capture, Some(c.parse().unwrap()), 12);
    s.run(&["capture", &c_capture.display().to_string()]);
    s.run(&["history", &b]);
    s.run(&["export", &format!("{a}@1"), "-o", &f("out/a1.png")]);
    s.run(&["export", &a, "-o", &f("out/a-head.jpg")]);
    s.run(&["show", &c]);
    s.run(&["revise", &c, &f("r4.png"), "-m", "stale", "--expected-head", "5"]);
    s.run(&["annotate", &format!("{a}@9"), "--text", "nowhere"]);
    s.run(&["list"]);
    s.run(&["show", &b]);
    s.steps
}

fn log_bytes(root: &Path) -> Vec<u8> {
    std::fs::read(root.join("log")).unwrap()
}

fn api_core_equivalence() -> Outcome {
    let inputs = Inputs::new();

    let embedded_store = tempfile::tempdir().unwrap();
    let embedded = deterministic_service(embedded_store.path());
    let embedded_steps = scenario(&embedded, &inputs);
    let embedded_state = embedded.book().export_state();

    let server_store = tempfile::tempdir().unwrap();
    let book = Arc::new(deterministic_book(server_store.path()));
    let server = BackgroundServer::start(
        "127.0.0.1:0".parse().unwrap(),
        Service::from_shared(Arc::clone(&book)),
        RouterOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let server_steps = scenario(&HttpClient::new(&server.url()), &inputs);
    let server_state = book.export_state();

    ensure!(embedded_steps.len() == 30, "scenario has {} steps", embedded_steps.len());
    for (e, s) in embedded_steps.iter().zip(&server_steps) {
        ensure!(e == s, "step {:?} diverged:\n embedded {e:?}\n server   {s:?}", e.args);
    }
    let failures = embedded_steps.iter().filter(|s| s.code != 0).count();
    ensure!(failures == 3, "expected 3 deliberate failures, saw {failures}: {embedded_steps:#?}");
    ensure!(embedded_state == server_state, "exported states differ");
    let (el, sl) = (log_bytes(embedded_store.path()), log_bytes(server_store.path()));
    ensure!(el == sl, "log files differ ({} vs {} bytes)", el.len(), sl.len());
    Ok(format!(
        "30 steps identical in both modes; log ({} bytes) and exported state ({} bytes) byte-identical",
        el.len(),
        embedded_state.len()
    ))
}

fn random_metadata(rng: &mut impl Rng) -> Metadata {
    let word = |rng: &mut dyn rand::RngCore| -> String {
        let len = rng.random_range(1..12);
        (0..len).map(|_| rng.random_range(b'a'..=b'z') as char).collect()
    };
    Metadata {
        title: rng.random_bool(0.8).then(|| word(rng)),
        authors: (0..rng.random_range(0..4)).map(|i| format!("{} {i}", word(rng))).collect(),
        date: rng.random_bool(0.7).then(|| {
            NaiveDate::from_ymd_opt(
                rng.random_range(1990..2030),
                rng.random_range(1..=12),
                rng.random_range(1..=28),
            )
            .unwrap()
        }),
        extra: (0..rng.random_range(0..4))
            .map(|i| MetadataEntry { key: format!("k{i}"), value: word(rng) })
            .collect(),
    }
}

fn metadata_transfer() -> Outcome {
    let store = tempfile::tempdir().unwrap();
    let service = deterministic_service(store.path());
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0007);
    const CASES: u64 = 40;
    for case in 0..CASES {
        let metadata = random_metadata(&mut rng);
        let created = service
            .ingest(IngestRequest {
                image: png_of(&sketch_canvas(64, 48, case, 3)),
                metadata: metadata.clone(),
                ..Default::default()
            })
            .map_err(|e| e.to_string())?;
        let head = created.revision.metadata.clone();
        ensure!(head == metadata, "case {case}: stored {head:?} for {metadata:?}");
        let carried = service
            .add_revision(
                created.sketch,
                RevisionUpload {
                    image: png_of(&sketch_canvas(64, 48, case + 1000, 3)),
                    commit_message: "carry".into(),
                    expected_head: 1,
                    carry_metadata: true,
                    medium: Medium::DigitalUpload,
                    metadata: Metadata::default(),
                },
            )
            .map_err(|e| e.to_string())?;
        ensure!(carried.metadata == head, "case {case}: carried {:?} from {head:?}", carried.metadata);
        let (t, a, d, x) = (
            &carried.metadata.title,
            &carried.metadata.authors,
            &carried.metadata.date,
            &carried.metadata.extra,
        );
        ensure!(
            *t == head.title && *a == head.authors && *d == head.date && *x == head.extra,
            "case {case}: field mismatch"
        );
    }

    let known = service.list_sketches().unwrap()[0].id;
    let head = service.book().sketch(&known).unwrap().head().metadata.clone();
    let appended = service
        .ingest(IngestRequest {
            image: png_of(&capture_with_label(2000, 1500, Some(known), 150, 5)),
            commit_message: Some("photo of the print".into()),
            ..Default::default()
        })
        .map_err(|e| e.to_string())?;
    ensure!(appended.path == IngestPath::RevisionAppended, "labelled ingest took {:?}", appended.path);
    ensure!(appended.revision.metadata == head, "ingest default did not carry metadata");
    Ok(format!("{CASES} random metadata sets carried field-for-field; labelled ingest carries by default"))
}

fn blob_round_trip() -> Outcome {
    let store = tempfile::tempdir().unwrap();
    let files = tempfile::tempdir().unwrap();
    let server = BackgroundServer::start(
        "127.0.0.1:0".parse().unwrap(),
        deterministic_service(store.path()),
        RouterOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let api = HttpClient::new(&server.url());
    let mut checked = 0;
    for seed in 0..5u64 {
        let png_path = files.path().join(format!("{seed}.png"));
        let jpeg_path = files.path().join(format!("{seed}.jpg"));
        write_png(&png_path, seed);
        write_jpeg(&jpeg_path, seed + 100);
        let (png, jpeg) = (std::fs::read(&png_path).unwrap(), std::fs::read(&jpeg_path).unwrap());
        let created = api
            .ingest(IngestRequest { image: png.clone(), ..Default::default() })
            .map_err(|e| e.to_string())?;
        api.add_revision(
            created.sketch,
            RevisionUpload {
                image: jpeg.clone(),
                commit_message: "jpeg".into(),
                expected_head: 1,
                carry_metadata: false,
                medium: Medium::DigitalUpload,
                metadata: Metadata::default(),
            },
        )
        .map_err(|e| e.to_string())?;
        for (seq, bytes, mime) in [(1, &png, "image/png"), (2, &jpeg, "image/jpeg")] {
            let got = api.revision_image(created.sketch, seq).map_err(|e| e.to_string())?;
            ensure!(got.bytes == *bytes, "seed {seed} rev {seq}: bytes differ");
            ensure!(got.mime == mime, "seed {seed} rev {seq}: mime {}", got.mime);
            checked += 1;
        }
    }
    Ok(format!("{checked} PNG/JPEG images returned byte-identical over HTTP"))
}
