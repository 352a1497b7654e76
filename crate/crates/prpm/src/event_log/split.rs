//! Temporal train/valid/test split.
//!
//! Cases are ordered by the timestamp of their first event (case id breaks
//! ties) and cut into contiguous blocks, so models never train on cases that
//! start after the evaluation period begins.

use crate::error::{Error, Result};

use super::Trace;

/// Contiguous temporal split of completed traces.
#[derive(Debug)]
pub struct TemporalSplit {
    pub train: Vec<Trace>,
    pub valid: Vec<Trace>,
    pub test: Vec<Trace>,
}

/// Split traces into train/valid/test by case start time.
///
/// Boundaries use floored cumulative fractions: train gets
/// `floor(train_frac·n)`, train+valid together `floor((train_frac+valid_frac)·n)`,
/// test the remainder. Fractions must be positive and sum to 1 (within 1e-9).
pub fn temporal_split(
    mut traces: Vec<Trace>,
    train_frac: f64,
    valid_frac: f64,
    test_frac: f64,
) -> Result<TemporalSplit> {
    let fracs = [train_frac, valid_frac, test_frac];
    if fracs.iter().any(|f| !f.is_finite() || *f <= 0.0) {
        return Err(Error::Config(format!(
            "split fractions must all be positive, got {train_frac}/{valid_frac}/{test_frac}"
        )));
    }
    if (fracs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "split fractions must sum to 1, got {train_frac}/{valid_frac}/{test_frac}"
        )));
    }
    if traces.len() < 3 {
        return Err(Error::TooFewTraces(traces.len()));
    }

    traces.sort_by(|a, b| {
        a.start_time()
            .cmp(&b.start_time())
            .then_with(|| a.case_id.cmp(&b.case_id))
    });

    let n = traces.len();
    let train_end = (train_frac * n as f64).floor() as usize;
    let valid_end = ((train_frac + valid_frac) * n as f64).floor() as usize;
    let valid_end = valid_end.min(n).max(train_end);

    let test = traces.split_off(valid_end);
    let valid = traces.split_off(train_end);
    Ok(TemporalSplit {
        train: traces,
        valid,
        test,
    })
}
