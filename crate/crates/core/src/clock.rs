use std::sync::atomic::{AtomicI64, Ordering};

use chrono::{DateTime, SubsecRound, TimeZone, Utc};

/// Server-assigned UTC time, truncated to whole seconds.
pub type Timestamp = DateTime<Utc>;

pub trait Clock: Send + Sync {
    fn now(&self) -> Timestamp;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Timestamp {
        Utc::now().trunc_subsecs(0)
    }
}

/// Deterministic clock that advances a fixed number of seconds per reading.
#[derive(Debug)]
pub struct SteppingClock {
    next: AtomicI64,
    step: i64,
}

impl SteppingClock {
    pub fn new(start_unix: i64, step_secs: i64) -> Self {
        Self { next: AtomicI64::new(start_unix), step: step_secs }
    }
}

impl Clock for SteppingClock {
    fn now(&self) -> Timestamp {
        let secs = self.next.fetch_add(self.step, Ordering::SeqCst);
        Utc.timestamp_opt(secs, 0).single().expect("stepping clock out of range")
    }
}
