//! Two-model uplift estimation.
//!
//! The treatment effect of intervening on a prefix is estimated with a
//! T-learner: one ensemble fitted on treated instances, one on untreated,
//! and `cate(x) = p_neg_control(x) − p_neg_treated(x)`. Positive values mean
//! the intervention reduces the negative-outcome probability, so the
//! downstream filter "effect > 0" selects beneficial treatments. Confounders
//! enter both arms as ordinary features — no orthogonalization, a known-bias
//! simplification.

use serde::{Deserialize, Serialize};

use crate::ensemble::{Ensemble, TreeParams};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Prefix instances partitioned by whether the case was ever treated.
#[derive(Debug, Clone, Default)]
pub struct CausalDataset {
    pub treated_features: Vec<Vec<f64>>,
    pub treated_labels: Vec<bool>,
    pub control_features: Vec<Vec<f64>>,
    pub control_labels: Vec<bool>,
}

impl CausalDataset {
    /// Route one instance into its arm. Labels are `true` for the negative
    /// outcome.
    pub fn push(&mut self, features: Vec<f64>, negative: bool, treated: bool) {
        if treated {
            self.treated_features.push(features);
            self.treated_labels.push(negative);
        } else {
            self.control_features.push(features);
            self.control_labels.push(negative);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpliftParams {
    /// Ensemble size per arm.
    pub members: usize,
    pub tree: TreeParams,
    /// Minimum instances per arm; thinner arms give effect estimates too
    /// noisy to act on.
    pub min_arm_size: usize,
}

impl Default for UpliftParams {
    fn default() -> Self {
        UpliftParams {
            members: crate::ensemble::DEFAULT_MEMBERS,
            tree: TreeParams::default(),
            min_arm_size: 20,
        }
    }
}

/// Paired outcome models for the treated and untreated arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpliftModel {
    pub model_treated: Ensemble,
    pub model_control: Ensemble,
}

/// Fit both arms. The two ensembles get distinct seeds derived from `seed`,
/// so refits with equal inputs are bit-identical.
pub fn fit_uplift(dataset: &CausalDataset, params: &UpliftParams, seed: u64) -> Result<UpliftModel> {
    let check_arm = |arm: &'static str, count: usize| {
        if count < params.min_arm_size {
            Err(Error::ThinArm {
                arm,
                count,
                floor: params.min_arm_size,
            })
        } else {
            Ok(())
        }
    };
    check_arm("treated", dataset.treated_features.len())?;
    check_arm("control", dataset.control_features.len())?;

    let model_treated = Ensemble::train(
        &dataset.treated_features,
        &dataset.treated_labels,
        params.members,
        &params.tree,
        derive_seed(seed, 0),
    )?;
    let model_control = Ensemble::train(
        &dataset.control_features,
        &dataset.control_labels,
        params.members,
        &params.tree,
        derive_seed(seed, 1),
    )?;
    Ok(UpliftModel {
        model_treated,
        model_control,
    })
}

impl UpliftModel {
    /// Estimated reduction in negative-outcome probability if treated now.
    pub fn cate(&self, features: &[f64]) -> Result<f64> {
        let control = self.model_control.predict_proba(features)?;
        let treated = self.model_treated.predict_proba(features)?;
        Ok(control - treated)
    }

    /// Sub-models swapped; negates every effect estimate exactly.
    pub fn swapped(&self) -> UpliftModel {
        UpliftModel {
            model_treated: self.model_control.clone(),
            model_control: self.model_treated.clone(),
        }
    }
}
