use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::Completion;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenCounts {
    pub input: u64,
    pub output: u64,
}

/// Point-in-time copy of the ledger, as written to `ledger.json`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerSnapshot {
    pub tokens_per_model: BTreeMap<String, TokenCounts>,
    pub calls_per_tag: BTreeMap<String, u64>,
    /// Summed wall time of all calls, seconds.
    pub wall_time_s: f64,
}

impl LedgerSnapshot {
    pub fn total_calls(&self) -> u64 {
        self.calls_per_tag.values().sum()
    }

    /// Adds another snapshot, e.g. one from a resumed earlier run.
    pub fn merge(&mut self, other: &LedgerSnapshot) {
        for (m, t) in &other.tokens_per_model {
            let e = self.tokens_per_model.entry(m.clone()).or_default();
            e.input += t.input;
            e.output += t.output;
        }
        for (tag, n) in &other.calls_per_tag {
            *self.calls_per_tag.entry(tag.clone()).or_default() += n;
        }
        self.wall_time_s += other.wall_time_s;
    }
}

/// Usage accounting. All counters only grow.
#[derive(Debug, Default)]
pub struct UsageLedger {
    inner: Mutex<LedgerSnapshot>,
}

impl UsageLedger {
    pub fn record(&self, model: &str, tag: &str, completion: &Completion, elapsed: Duration) {
        let mut s = self.inner.lock().unwrap();
        let t = s.tokens_per_model.entry(model.to_string()).or_default();
        t.input += completion.input_tokens;
        t.output += completion.output_tokens;
        *s.calls_per_tag.entry(tag.to_string()).or_default() += 1;
        s.wall_time_s += elapsed.as_secs_f64();
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        self.inner.lock().unwrap().clone()
    }

    pub fn calls(&self, tag: &str) -> u64 {
        self.inner.lock().unwrap().calls_per_tag.get(tag).copied().unwrap_or(0)
    }
}
