//! Reasoning over pragmatic contextual goal models.
//!
//! A goal model is an AND/OR refinement tree whose nodes are applicable only
//! under certain contexts. Pragmatic goals additionally carry
//! context-dependent quality constraints, and leaves advertise the quality
//! they deliver per context. Given the set of contexts that currently hold,
//! [`reasoner::is_achievable`] decides whether the root can be achieved and
//! returns the leaves to execute; [`sweep`] repeats that over every context
//! set to find the unachievable ones.
//!
//! The numeric types are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`, which is what the document format stores.

pub mod context;
pub mod fixtures;
pub mod format;
pub mod genmodel;
pub mod model;
pub mod reasoner;
mod scalar;
pub mod sweep;

pub use context::{ContextError, ContextSet};
pub use format::{parse_model, parse_model_bytes, serialize_model, FormatError};
pub use genmodel::{GenError, GeneratorConfig};
pub use model::{Comparison, Condition, Decomposition, NodeId, Plan};
pub use reasoner::{EvalStats, ReasonError};
pub use scalar::Scalar;
pub use sweep::{SweepError, SweepReport, TimingReport};

pub type Model = model::CgmModel<f64>;
pub type Node = model::RefinementNode<f64>;
pub type QualityConstraint = model::QualityConstraint<f64>;
pub type Interpretation = model::Interpretation<f64>;
pub type ProvidedQuality = model::ProvidedQuality<f64>;
pub type EffectiveConstraints = context::EffectiveConstraints<f64>;
pub type AchievabilityOutcome = model::AchievabilityOutcome<f64>;
pub type Evaluation = reasoner::Evaluation<f64>;

pub type ModelF32 = model::CgmModel<f32>;
pub type EffectiveConstraintsF32 = context::EffectiveConstraints<f32>;
