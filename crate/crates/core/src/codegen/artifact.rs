//! The emitted file set and its manifest.

use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::device::emit_kernel;
use super::host::emit_host;
use super::plan::KernelPlan;
use crate::sema::MirProgram;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestKernel {
    pub name: String,
    pub file: String,
    pub model: String,
    pub stream: String,
    pub chain: Vec<String>,
    pub functions: Vec<String>,
    pub arguments: Vec<String>,
    pub graph_buffers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestProperty {
    pub name: String,
    pub element: String,
    pub value_type: String,
    pub memory_unit_id: u32,
    pub channel: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub program: String,
    pub lanes: u32,
    pub channels: u32,
    pub kernels: Vec<ManifestKernel>,
    pub host: String,
    pub properties: Vec<ManifestProperty>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceFile {
    pub kernel: String,
    pub path: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmittedArtifact {
    pub device: Vec<DeviceFile>,
    pub host: String,
    pub manifest: Manifest,
}

pub const HOST_PATH: &str = "host/main.c-like";
pub const MANIFEST_PATH: &str = "manifest.json";

/// Emits device files, host driver and manifest for a planned program.
pub fn emit(program: &str, plan: &KernelPlan, mir: &MirProgram) -> EmittedArtifact {
    let device: Vec<DeviceFile> = plan
        .kernels
        .iter()
        .map(|k| DeviceFile { kernel: k.name.clone(), path: format!("device/{}.cl-c", k.name), text: emit_kernel(mir, k) })
        .collect();
    let kernels = plan
        .kernels
        .iter()
        .zip(&device)
        .map(|(k, d)| ManifestKernel {
            name: k.name.clone(),
            file: d.path.clone(),
            model: k.model.label().to_string(),
            stream: format!("{:?}", k.stream),
            chain: k.chain.iter().map(|m| m.label().to_string()).collect(),
            functions: k.chain.iter().map(|m| m.function().to_string()).collect(),
            arguments: k.argument_names().into_iter().chain(k.scalar_arguments().into_iter().map(String::from)).collect(),
            graph_buffers: k.graph_buffers.iter().map(|g| g.name().to_string()).collect(),
        })
        .collect();
    let mut properties: Vec<ManifestProperty> = mir
        .properties
        .iter()
        .filter_map(|p| {
            Some(ManifestProperty {
                name: p.name.clone(),
                element: format!("{:?}", p.element_kind).to_lowercase(),
                value_type: p.value_type.name().to_string(),
                memory_unit_id: p.memory_unit_id?,
                channel: p.channel_index?,
            })
        })
        .collect();
    properties.sort_by_key(|p| p.memory_unit_id);
    EmittedArtifact {
        device,
        host: emit_host(plan, mir),
        manifest: Manifest {
            program: program.to_string(),
            lanes: plan.lanes,
            channels: plan.channels,
            kernels,
            host: HOST_PATH.to_string(),
            properties,
        },
    }
}

impl EmittedArtifact {
    pub fn manifest_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        s.push('\n');
        s
    }

    /// Every output file as `(relative path, contents)`, in a fixed order.
    pub fn files(&self) -> Vec<(String, String)> {
        let mut v: Vec<(String, String)> = self.device.iter().map(|d| (d.path.clone(), d.text.clone())).collect();
        v.push((HOST_PATH.to_string(), self.host.clone()));
        v.push((MANIFEST_PATH.to_string(), self.manifest_json()));
        v
    }

    /// Files under `dir` that are missing or differ from this artifact.
    pub fn diff_against(&self, dir: &Path) -> Vec<String> {
        self.files()
            .into_iter()
            .filter(|(rel, text)| std::fs::read_to_string(dir.join(rel)).ok().as_deref() != Some(text.as_str()))
            .map(|(rel, _)| rel)
            .collect()
    }

    pub fn write_to(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for (rel, text) in self.files() {
            let path = dir.join(&rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&path, text)?;
            written.push(path);
        }
        Ok(written)
    }
}
