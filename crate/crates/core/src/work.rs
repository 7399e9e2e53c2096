use std::sync::atomic::{AtomicU64, Ordering};

/// Counts conservation (A) sub-flow invocations, the cost axis of the
/// convergence studies. Each integration owns its own counter.
#[derive(Debug, Default)]
pub struct WorkCounter {
    a_flows: AtomicU64,
}

impl WorkCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_a_flow(&self) {
        self.a_flows.fetch_add(1, Ordering::Relaxed);
    }

    pub fn a_flows(&self) -> u64 {
        self.a_flows.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.a_flows.store(0, Ordering::Relaxed);
    }
}
