//! Prescriptive process monitoring: decide, per ongoing case, whether to
//! intervene now or keep waiting, under a bounded pool of intervention
//! resources.
//!
//! The pipeline, bottom to top:
//!
//! * [`event_log`] — parse raw event-log CSVs, clean incomplete cases, split
//!   temporally, and expand traces into fixed-length prefix datasets with
//!   aggregate feature encoding.
//! * [`ensemble`] — bagged decision-tree ensembles predicting the probability
//!   of a negative case outcome, with entropy-based decomposition of
//!   predictive uncertainty into aleatoric and epistemic parts.
//! * [`causal`] — two-model uplift estimation of the treatment effect
//!   (reduction in negative-outcome probability if treated now).
//! * [`future_state`] — nearest-neighbor lookup over historical prefixes to
//!   project how a case's scores will look one step ahead.
//! * [`policy`] — cost/gain algebra turning scores into treat/wait decisions,
//!   including opportunity-cost comparison against the projected future.
//! * [`allocator`] — bounded resource pool with stochastic treatment
//!   durations and timestamp-driven release.
//! * [`replay`] — deterministic chronological re-enactment of an event log
//!   under a policy and resource budget, plus policy-grid sweeps and a
//!   synthetic log generator.
//!
//! On top sit [`config`] (flat key-value settings with defaults),
//! [`pipeline`] (one-call orchestration of the stages above), and
//! [`manifest`] (run manifests with input digests for reproducibility).
//!
//! Every stochastic component threads explicit seeds; equal inputs and seeds
//! reproduce results bit-for-bit.
//!
//! Runnable walkthroughs live in `examples/` (one per capability):
//! `cargo run -p prpm --example <name>` with
//! `uncertainty_decomposition`, `decision_gains`, `uplift_estimation`,
//! `future_state_lookup`, `resource_allocation`, `event_log_pipeline`, or
//! `full_sweep`.

pub mod allocator;
pub mod causal;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod event_log;
pub mod future_state;
pub mod manifest;
pub mod pipeline;
pub mod policy;
pub mod replay;
pub mod seed;

pub use error::{Error, Result};
