//! RandAugment variant: per image, draw `n` transforms from the subsets named
//! by the slot order, execute each with a shared probability, then take a
//! random square crop.
//!
//! A [`TransformPlan`] holds every random choice (kinds, flags, magnitudes,
//! sample-pairing partners, crop offset, and the seed of the kernel stream),
//! so executing a logged plan reproduces the augmented image exactly.

mod config;
mod log;
mod plan;

pub use config::{LevelMode, MagnitudeMode, PartnerScope, PolicyConfig, SlotSubset};
pub use log::{read_plan_log, write_plan_log, PlanRecord, PLAN_LOG_HEADER};
pub use plan::{
    execute_plan, level_to_magnitude, sample_plan, Draw, NoPartners, PartnerSource, PlanContext, TransformPlan,
};
