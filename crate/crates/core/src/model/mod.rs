//! The operator network: pointwise lifting, stacked Sumudu spectral layers
//! with a pointwise linear bias path, and a two-stage pointwise projection.

mod checkpoint;
mod config;
mod interp;
mod sno;
mod spectral;

pub(crate) use checkpoint::check_major;
pub use checkpoint::{load_checkpoint, save_checkpoint, sidecar_path, SIDECAR_VERSION};
pub use config::ModelConfig;
pub use interp::{linear_interp_weights, InterpOp};
pub use sno::{forward, forward_at_resolution, init_model, LayerParams, SnoModel};
pub use spectral::{spectral_path, SpectralConv};
