//! Files, reports and commands behind the `nnrank` binary.

pub mod bundle;
pub mod commands;
pub mod format;
pub mod report;

use std::time::Instant;

use nnrank_core::verify::Clock;

/// Microseconds since the clock was created.
pub struct StdClock(Instant);

impl StdClock {
    pub fn start() -> Self {
        StdClock(Instant::now())
    }
}

impl Clock for StdClock {
    fn now_micros(&self) -> u64 {
        self.0.elapsed().as_micros() as u64
    }
}
