//! Dense tensors with just enough reverse-mode differentiation for the
//! operator network, plus Adam, the relative L2 loss and a named-tensor
//! archive format for checkpoints.

mod adam;
mod archive;
mod ops;
mod params;
mod tape;
mod tensor;

pub use adam::{adam_step, AdamState};
pub use archive::{read_archive, write_archive, ARCHIVE_MAGIC, ARCHIVE_VERSION};
pub use ops::{
    activation, activation_backward, activation_grad, gelu, linear, linear_backward, rel_l2_loss,
};
pub use params::{ParamId, ParamStore};
pub use tape::{CustomOp, Tape, Var};
pub use tensor::Tensor;
