//! Path-independent choice functions, their hyper-order characterisations,
//! and stable sets of contracts in two-sided markets.
//!
//! Contract sets are bitmasks over a universe of at most 64 contracts.
//! Exhaustive scans go through [`exec`] and run on rayon unless the
//! `parallel` feature is disabled or [`Execution::Sequential`] is chosen.

pub mod choice;
pub mod config;
pub mod error;
pub mod exec;
pub mod hyperorder;
pub mod market;
pub mod oracle;
pub mod set;
pub mod stability;

pub use choice::{union, ChoiceFunction, LinearOrder};
pub use config::Config;
pub use error::{Error, Result};
pub use exec::Execution;
pub use market::MarketInstance;
pub use set::{ContractSet, Universe};
pub use stability::{SemiStablePair, Side, SidePair};
