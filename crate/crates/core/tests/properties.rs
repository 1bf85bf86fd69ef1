//! Property tests over random operation sequences, checked against a
//! brute-force model.

use std::collections::BTreeMap;

use proptest::prelude::*;
use roundtrip_core::*;

#[derive(Debug, Clone)]
enum Op {
    Create,
    Append { sketch: usize, lag: u32 },
    Link { from: usize, to: usize },
    Unlink { link: usize },
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        1 => Just(Op::Create),
        4 => (0usize..6, 0u32..3).prop_map(|(sketch, lag)| Op::Append { sketch, lag }),
        2 => (0usize..6, 0usize..6).prop_map(|(from, to)| Op::Link { from, to }),
        1 => (0usize..8).prop_map(|link| Op::Unlink { link }),
    ]
}

fn image(book: &Sketchbook, n: usize) -> BlobRef {
    book.put_blob(format!("img-{n}").as_bytes(), "image/png").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn state_matches_brute_force_model(ops in prop::collection::vec(op(), 1..40)) {
        let dir = tempfile::tempdir().unwrap();
        let book = Sketchbook::open(dir.path()).unwrap();
        let mut ids: Vec<SketchId> = Vec::new();
        let mut heads: BTreeMap<SketchId, u32> = BTreeMap::new();
        let mut links: Vec<(uuid::Uuid, SketchId, SketchId)> = Vec::new();

        for (n, op) in ops.iter().enumerate() {
            match *op {
                Op::Create => {
                    let s = book.create_sketch(None, image(&book, n), Medium::AnalogCapture, Metadata::default()).unwrap();
                    ids.push(s.id);
                    heads.insert(s.id, 1);
                }
                Op::Append { sketch, lag } if !ids.is_empty() => {
                    let id = ids[sketch % ids.len()];
                    let head = heads[&id];
                    let expected = head.saturating_sub(lag).max(1);
                    let result = book.add_revision(&id, NewRevision {
                        image: image(&book, n),
                        medium: Medium::DigitalUpload,
                        commit_message: format!("op {n}"),
                        expected_head: expected,
                        carry_metadata: true,
                        metadata: Metadata::default(),
                    });
                    if expected == head {
                        prop_assert_eq!(result.unwrap().seq, head + 1);
                        heads.insert(id, head + 1);
                    } else {
                        let is_stale = matches!(result, Err(CoreError::StaleHead { .. }));
                        prop_assert!(is_stale);
                    }
                }
                Op::Link { from, to } if !ids.is_empty() => {
                    let (a, b) = (ids[from % ids.len()], ids[to % ids.len()]);
                    match book.create_link(&AnchorRequest::whole(a), &AnchorRequest::whole(b), None) {
                        Ok(link) => links.push((link.id, a, b)),
                        Err(e) => prop_assert_eq!(a, b, "{}", e),
                    }
                }
                Op::Unlink { link } if !links.is_empty() => {
                    let (id, _, _) = links.remove(link % links.len());
                    book.delete_link(&id).unwrap();
                }
                _ => {}
            }
        }

        for id in &ids {
            // Linearity: seqs are exactly 1..=n.
            let seqs: Vec<u32> = book.get_history(id).unwrap().iter().map(|r| r.seq).collect();
            let expected: Vec<u32> = (1..=heads[id]).collect();
            prop_assert_eq!(seqs, expected);
            prop_assert_eq!(book.resolve(id).unwrap().1.seq, heads[id]);

            // Links: enumerate the table by brute force.
            let listed = book.list_links(id).unwrap();
            let outgoing = links.iter().filter(|(_, a, _)| a == id).count();
            let incoming = links.iter().filter(|(_, _, b)| b == id).count();
            prop_assert_eq!(
                listed.iter().filter(|l| l.direction == LinkDirection::Outgoing).count(),
                outgoing
            );
            prop_assert_eq!(
                listed.iter().filter(|l| l.direction == LinkDirection::Incoming).count(),
                incoming
            );
        }

        // Replay reproduces the same state byte for byte.
        let before = book.export_state();
        drop(book);
        let reopened = Sketchbook::open(dir.path()).unwrap();
        prop_assert_eq!(reopened.export_state(), before);
    }

    #[test]
    fn resolve_after_k_appends(k in 0u32..12) {
        let dir = tempfile::tempdir().unwrap();
        let book = Sketchbook::open(dir.path()).unwrap();
        let s = book.create_sketch(None, image(&book, 0), Medium::AnalogCapture, Metadata::default()).unwrap();
        for i in 0..k {
            book.add_revision(&s.id, NewRevision {
                image: image(&book, i as usize + 1),
                medium: Medium::DigitalUpload,
                commit_message: "next".into(),
                expected_head: i + 1,
                carry_metadata: false,
                metadata: Metadata::default(),
            }).unwrap();
        }
        prop_assert_eq!(book.resolve(&s.id).unwrap().1.seq, 1 + k);
    }

    #[test]
    fn carry_metadata_is_exact(
        title in proptest::option::of("[a-zA-Z0-9 ]{1,20}"),
        authors in prop::collection::vec("[a-zA-Z]{1,8}", 0..4),
        extra in prop::collection::vec(("[a-z]{1,5}", "[a-z0-9]{0,6}"), 0..3),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let book = Sketchbook::open(dir.path()).unwrap();
        let meta = Metadata {
            title,
            authors,
            date: chrono::NaiveDate::from_ymd_opt(2016, 3, 14),
            extra: extra.into_iter().map(|(key, value)| MetadataEntry { key, value }).collect(),
        };
        let s = book.create_sketch(None, image(&book, 0), Medium::AnalogCapture, meta).unwrap();
        let head_meta = s.head().metadata.clone();
        let r = book.add_revision(&s.id, NewRevision {
            image: image(&book, 1),
            medium: Medium::AnalogCapture,
            commit_message: "carry".into(),
            expected_head: 1,
            carry_metadata: true,
            metadata: Metadata::default(),
        }).unwrap();
        prop_assert_eq!(r.metadata, head_meta);
    }
}
