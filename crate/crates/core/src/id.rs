//! Sketch identifiers and the sources that mint them.

use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::error::CoreError;

/// Length of the canonical hyphenated UUID text form.
pub const CANONICAL_LEN: usize = 36;

/// Identifier shared by every revision of one sketch.
///
/// Always rendered in the canonical lowercase `8-4-4-4-12` form, which is
/// also the exact payload printed into QR labels.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SketchId(Uuid);

impl SketchId {
    pub fn from_uuid(uuid: Uuid) -> Self {
        Self(uuid)
    }

    pub fn as_uuid(&self) -> &Uuid {
        &self.0
    }

    /// Parses only the exact canonical form: 36 characters, lowercase hex,
    /// hyphens at positions 8, 13, 18 and 23.
    pub fn parse_canonical(s: &str) -> Option<Self> {
        if !is_hyphenated_hex(s) || s.bytes().any(|b| b.is_ascii_uppercase()) {
            return None;
        }
        Uuid::parse_str(s).ok().map(Self)
    }

    /// First eight hex characters, printed next to labels for manual matching.
    pub fn short(&self) -> String {
        self.to_string()[..8].to_string()
    }
}

fn is_hyphenated_hex(s: &str) -> bool {
    s.len() == CANONICAL_LEN
        && s.bytes().enumerate().all(|(i, b)| match i {
            8 | 13 | 18 | 23 => b == b'-',
            _ => b.is_ascii_hexdigit(),
        })
}

impl fmt::Display for SketchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0.hyphenated(), f)
    }
}

impl fmt::Debug for SketchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SketchId({self})")
    }
}

/// Accepts the hyphenated form in either case and normalizes to lowercase.
impl FromStr for SketchId {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if !is_hyphenated_hex(s) {
            return Err(CoreError::InvalidId(s.to_string()));
        }
        Uuid::parse_str(s).map(Self).map_err(|_| CoreError::InvalidId(s.to_string()))
    }
}

impl TryFrom<String> for SketchId {
    type Error = CoreError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<SketchId> for String {
    fn from(id: SketchId) -> Self {
        id.to_string()
    }
}

/// Mints version-4 UUIDs for sketches, annotations and links.
pub trait IdSource: Send + Sync {
    fn next_uuid(&self) -> Uuid;

    fn next_sketch_id(&self) -> SketchId {
        SketchId(self.next_uuid())
    }
}

/// Operating-system randomness.
#[derive(Debug, Default, Clone, Copy)]
pub struct RandomIds;

impl IdSource for RandomIds {
    fn next_uuid(&self) -> Uuid {
        Uuid::new_v4()
    }
}

/// Reproducible v4 UUIDs from a seeded ChaCha stream.
#[derive(Debug)]
pub struct SeededIds {
    rng: Mutex<ChaCha20Rng>,
}

impl SeededIds {
    pub fn new(seed: u64) -> Self {
        Self { rng: Mutex::new(ChaCha20Rng::seed_from_u64(seed)) }
    }
}

impl IdSource for SeededIds {
    fn next_uuid(&self) -> Uuid {
        let mut bytes = [0u8; 16];
        self.rng.lock().expect("id rng poisoned").fill_bytes(&mut bytes);
        uuid::Builder::from_random_bytes(bytes).into_uuid()
    }
}
