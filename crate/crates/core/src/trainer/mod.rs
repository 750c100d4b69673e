//! Residual training of the radiance cache: surface sampling, the Monte
//! Carlo residual, per-face loss statistics and adaptive LOD.

pub mod distribution;
pub mod lod;
pub mod model;
pub mod residual;
pub mod train;

pub use distribution::{FaceDistribution, SurfaceSample};
pub use lod::{update_lod, FaceLossStats, LodChange, RefinementReport};
pub use model::{
    predict_radiance, ConstantRadiance, EmittedRadiance, FnRadiance, InputLayout, ModelGradients, RadianceField,
    RadianceModel, ShadingQuery,
};
pub use residual::{estimate_residual, ResidualPlan, ResidualTerm};
pub use train::{estimate_loss, lod_update_steps, ModelConfig, StepReport, TrainConfig, TrainState, Trainer};
