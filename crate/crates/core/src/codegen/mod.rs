//! Kernel planning and emission of device kernels, host driver and manifest.
mod artifact;
mod cexpr;
mod device;
mod host;
mod plan;
mod templates;

pub use artifact::*;
pub use device::{emit_device, emit_kernel};
pub use host::emit_host;
pub use plan::*;
