//! Pragma strings for every module kind. The HLS dialect lives here only.

use super::plan::Module;

/// Pragmas placed at the top of a module function. `{lanes}` is substituted.
pub fn module_pragmas(m: Module) -> &'static [&'static str] {
    match m {
        Module::BurstRead | Module::BurstWrite => &["#pragma HLS INLINE off"],
        Module::EdgePropRead | Module::FrontierCheck => &["#pragma HLS INLINE off"],
        Module::EdgeOperation | Module::VertexOperation => &["#pragma HLS INLINE off"],
        Module::StreamDuplicate => &["#pragma HLS INLINE off"],
        Module::Shuffle => &["#pragma HLS INLINE off", "#pragma HLS ARRAY_PARTITION variable=bank_used complete"],
        Module::RawResolver => &["#pragma HLS INLINE off"],
        Module::Reduce => &["#pragma HLS INLINE off"],
        Module::UramCache => &["#pragma HLS INLINE off", "#pragma HLS BIND_STORAGE variable=gt_uram type=ram_2p impl=uram"],
    }
}

/// Pragmas placed at the head of a module's main loop.
pub fn loop_pragmas(m: Module) -> &'static [&'static str] {
    match m {
        Module::BurstRead | Module::BurstWrite | Module::EdgePropRead => &["#pragma HLS PIPELINE II=1"],
        Module::FrontierCheck | Module::EdgeOperation | Module::VertexOperation => &["#pragma HLS PIPELINE II=1"],
        Module::StreamDuplicate => &["#pragma HLS PIPELINE II=1"],
        Module::Shuffle => &["#pragma HLS PIPELINE II=1", "#pragma HLS UNROLL factor={lanes}"],
        Module::RawResolver | Module::Reduce => &["#pragma HLS PIPELINE II=1", "#pragma HLS DEPENDENCE variable=gt_uram inter false"],
        Module::UramCache => &["#pragma HLS PIPELINE II=1"],
    }
}

pub const DATAFLOW: &str = "#pragma HLS DATAFLOW";
pub const LANE_PARTITION: &str = "#pragma HLS ARRAY_PARTITION variable={var} complete";
pub const STREAM_DEPTH: &str = "#pragma HLS STREAM variable={var} depth=64";

/// Interface pragma for a device buffer on a memory channel.
pub fn interface(port: &str, bundle: &str) -> String {
    format!("#pragma HLS INTERFACE m_axi port={port} offset=slave bundle={bundle}")
}

pub fn scalar_interface(port: &str) -> String {
    format!("#pragma HLS INTERFACE s_axilite port={port}")
}

pub fn fill(template: &str, lanes: u32) -> String {
    template.replace("{lanes}", &lanes.to_string())
}
