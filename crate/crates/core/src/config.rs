use crate::exec::Execution;

/// Default ceiling on universe size for explicit tables and exhaustive scans.
pub const DEFAULT_CAP: usize = 16;
/// Default ceiling for the Lehmann audit, which quantifies over subset triples.
pub const DEFAULT_AUDIT_CAP: usize = 8;
pub const DEFAULT_TRIALS: usize = 10_000;

/// Knobs shared by every exhaustive or sampled check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Config {
    pub cap: usize,
    pub audit_cap: usize,
    pub seed: u64,
    pub trials: usize,
    pub execution: Execution,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            cap: DEFAULT_CAP,
            audit_cap: DEFAULT_AUDIT_CAP,
            seed: 0,
            trials: DEFAULT_TRIALS,
            execution: Execution::default(),
        }
    }
}

impl Config {
    pub fn sequential(mut self) -> Self {
        self.execution = Execution::Sequential;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }
}
