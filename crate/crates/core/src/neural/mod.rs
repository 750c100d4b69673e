//! Input encodings, the radiance network and its optimizer.

pub mod adam;
pub mod mlp;
pub mod oneblob;
pub mod schedule;
pub mod sh;

pub use adam::{AdamConfig, OptimizerState, StepOutcome};
pub use mlp::{Dense, Mlp, MlpShape, MlpTape};
pub use oneblob::oneblob_encode;
pub use schedule::schedule_m;
pub use sh::sh_encode;
