//! Semantic analysis of FIR into MIR.

pub mod analyze;
pub mod display;
pub mod effects;
pub mod mir;
pub mod placement;

pub use analyze::{analyze, analyze_with_channels, infer_model, DEFAULT_CHANNELS};
pub use display::{expr_text, render_mir};
pub use effects::{compute_effects, index_class, refresh_effects};
pub use mir::*;
pub use placement::{detect_properties, device_table};

use crate::diag::Diagnostic;

/// Parses and analyzes `source` in one step.
pub fn compile_source(source: &str) -> Result<MirProgram, Diagnostic> {
    let fir = crate::frontend::parse_source(source)?;
    analyze(&fir)
}
