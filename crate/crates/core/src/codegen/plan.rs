use serde::Serialize;

use crate::sema::*;

/// A hardware module of the back-end dataflow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Module {
    BurstRead,
    EdgePropRead,
    FrontierCheck,
    EdgeOperation,
    VertexOperation,
    BurstWrite,
    StreamDuplicate,
    Shuffle,
    RawResolver,
    Reduce,
    UramCache,
}

impl Module {
    pub fn label(self) -> &'static str {
        match self {
            Module::BurstRead => "burst-read",
            Module::EdgePropRead => "edge-prop-read",
            Module::FrontierCheck => "frontier-check",
            Module::EdgeOperation => "edge-operation",
            Module::VertexOperation => "vertex-operation",
            Module::BurstWrite => "burst-write",
            Module::StreamDuplicate => "stream-duplicate",
            Module::Shuffle => "shuffle",
            Module::RawResolver => "raw-resolver",
            Module::Reduce => "reduce",
            Module::UramCache => "uram-cache",
        }
    }

    /// Name of the device function implementing the module.
    pub fn function(self) -> &'static str {
        match self {
            Module::BurstRead => "burst_read",
            Module::EdgePropRead => "edge_prop_read",
            Module::FrontierCheck => "frontier_check",
            Module::EdgeOperation => "edge_operation",
            Module::VertexOperation => "vertex_operation",
            Module::BurstWrite => "burst_write",
            Module::StreamDuplicate => "stream_duplicate",
            Module::Shuffle => "shuffle",
            Module::RawResolver => "raw_resolve",
            Module::Reduce => "reduce",
            Module::UramCache => "uram_cache",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccessMode {
    Read,
    Write,
    ReadWrite,
}

/// A device buffer bound to a kernel argument.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropBinding {
    pub prop: PropId,
    pub name: String,
    pub memory_unit_id: u32,
    pub channel: u32,
    pub access: AccessMode,
    /// Set for scalar cells.
    pub scalar: Option<ScalarId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphBuffer {
    EdgeSrc,
    EdgeDst,
    EdgeWeight,
    RowOffsets,
    Columns,
}

impl GraphBuffer {
    pub fn name(self) -> &'static str {
        match self {
            GraphBuffer::EdgeSrc => "edge_src",
            GraphBuffer::EdgeDst => "edge_dst",
            GraphBuffer::EdgeWeight => "edge_weight",
            GraphBuffer::RowOffsets => "row_offsets",
            GraphBuffer::Columns => "columns",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanKernel {
    pub name: String,
    pub function: FuncId,
    pub model: ProcessingModel,
    pub stream: UpdateStreamClass,
    pub chain: Vec<Module>,
    pub graph_buffers: Vec<GraphBuffer>,
    /// Vector properties and scalar cells, ascending by memory-unit id.
    pub properties: Vec<PropBinding>,
    pub lanes: u32,
    /// Rendered frontier predicate, for VCP-traversal kernels that have one.
    pub frontier: Option<String>,
    pub invocations: Vec<InvocationId>,
}

impl PlanKernel {
    pub fn has(&self, m: Module) -> bool {
        self.chain.contains(&m)
    }

    /// Formal argument names in order: graph buffers, then properties by memory-unit id.
    pub fn argument_names(&self) -> Vec<String> {
        let mut v: Vec<String> = self.graph_buffers.iter().map(|g| g.name().to_string()).collect();
        v.extend(self.properties.iter().map(|p| p.name.clone()));
        v
    }

    /// On-chip bytes per destination vertex: four per written vector property.
    pub fn bytes_per_vertex(&self) -> u64 {
        let written = self.properties.iter().filter(|b| b.scalar.is_none() && b.access != AccessMode::Read).count();
        4 * written.max(1) as u64
    }

    /// Trailing by-value arguments after the buffers.
    pub fn scalar_arguments(&self) -> Vec<&'static str> {
        let mut v = vec!["num_vertices", "num_edges"];
        if self.stream == UpdateStreamClass::Unordered {
            v.push("partition_size");
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelPlan {
    pub kernels: Vec<PlanKernel>,
    pub lanes: u32,
    pub channels: u32,
    pub weighted: bool,
}

impl KernelPlan {
    pub fn kernel_for(&self, function: FuncId) -> Option<&PlanKernel> {
        self.kernels.iter().find(|k| k.function == function)
    }
}

/// Module chain for a kernel. Unordered streams go through duplication,
/// shuffle, RAW resolution, reduction and the URAM cache before write-back.
pub fn module_chain(model: ProcessingModel, stream: UpdateStreamClass, weighted: bool, frontier: bool) -> Vec<Module> {
    let mut chain = vec![Module::BurstRead];
    if model == ProcessingModel::Ecp && weighted {
        chain.push(Module::EdgePropRead);
    }
    if model == ProcessingModel::VcpTraversal && frontier {
        chain.push(Module::FrontierCheck);
    }
    chain.push(match model {
        ProcessingModel::Ecp => Module::EdgeOperation,
        _ => Module::VertexOperation,
    });
    if stream == UpdateStreamClass::Unordered {
        chain.extend([Module::StreamDuplicate, Module::Shuffle, Module::RawResolver, Module::Reduce, Module::UramCache]);
    }
    chain.push(Module::BurstWrite);
    chain
}

fn reads_only_owned(f: &MirFunction, e: &Expr) -> bool {
    let owned = f.param(ParamRole::Vertex).map(|p| p.local);
    let mut ok = true;
    e.visit(&mut |sub| match &sub.kind {
        ExprKind::Local(l) => ok &= Some(*l) == owned,
        ExprKind::Prop { index, .. } => ok &= matches!(index.kind, ExprKind::Local(l) if Some(l) == owned),
        _ => {}
    });
    ok
}

fn contains_neighbor_loop(stmts: &[Stmt]) -> bool {
    let mut found = false;
    walk_stmts(stmts, &mut |s| found |= matches!(s.kind, StmtKind::ForNeighbors { .. }));
    found
}

/// The guard of a traversal kernel: the outermost `if` without `else` whose
/// condition reads only the owned vertex's properties, scalars and constants,
/// and that encloses the neighbor loop.
pub fn frontier_predicate(f: &MirFunction) -> Option<&Expr> {
    f.body.iter().find_map(|s| match &s.kind {
        StmtKind::If { cond, then_body, else_body }
            if else_body.is_empty() && reads_only_owned(f, cond) && contains_neighbor_loop(then_body) =>
        {
            Some(cond)
        }
        _ => None,
    })
}

fn bindings(mir: &MirProgram, f: &MirFunction) -> Vec<PropBinding> {
    let fx = &f.effects;
    let mut out = Vec::new();
    for (pid, info) in mir.properties.iter().enumerate() {
        let (Some(unit), Some(channel)) = (info.memory_unit_id, info.channel_index) else { continue };
        let (access, scalar) = match info.storage {
            Storage::Vector => {
                let read = fx.reads_prop(pid);
                let write = fx.written_props().contains(&pid);
                let rw = fx.reductions.iter().chain(&fx.lane_accumulations).any(|a| a.prop == pid);
                match (read || rw, write) {
                    (true, true) => (AccessMode::ReadWrite, None),
                    (true, false) => (AccessMode::Read, None),
                    (false, true) => (AccessMode::Write, None),
                    (false, false) => continue,
                }
            }
            Storage::ScalarCell { scalar } if fx.scalar_reads.contains(&scalar) => (AccessMode::Read, Some(scalar)),
            Storage::ScalarCell { .. } => continue,
        };
        out.push(PropBinding { prop: pid, name: info.name.clone(), memory_unit_id: unit, channel, access, scalar });
    }
    out.sort_by_key(|b| b.memory_unit_id);
    out
}

/// Builds one plan kernel per distinct function invoked by `process`, in
/// first-invocation order.
pub fn plan_kernels(mir: &MirProgram, lanes: u32, channels: u32) -> KernelPlan {
    let mut kernels: Vec<PlanKernel> = Vec::new();
    let weighted = mir.graph.weighted;
    for inv in mir.process_invocations() {
        if let Some(k) = kernels.iter_mut().find(|k| k.function == inv.function) {
            k.invocations.push(inv.id);
            continue;
        }
        let f = &mir.functions[inv.function];
        let model = inv.model.expect("process invocation without a model");
        let stream = inv.stream.unwrap_or(UpdateStreamClass::Unordered);
        let frontier = match model {
            ProcessingModel::VcpTraversal => frontier_predicate(f).map(|e| expr_text(mir, f, e)),
            _ => None,
        };
        let graph_buffers = match model {
            ProcessingModel::Ecp if weighted => vec![GraphBuffer::EdgeSrc, GraphBuffer::EdgeDst, GraphBuffer::EdgeWeight],
            ProcessingModel::Ecp => vec![GraphBuffer::EdgeSrc, GraphBuffer::EdgeDst],
            ProcessingModel::VcpTraversal => vec![GraphBuffer::RowOffsets, GraphBuffer::Columns],
            ProcessingModel::VcpApply => vec![],
        };
        kernels.push(PlanKernel {
            name: f.name.clone(),
            function: inv.function,
            model,
            stream,
            chain: module_chain(model, stream, weighted, frontier.is_some()),
            graph_buffers,
            properties: bindings(mir, f),
            lanes: lanes.max(1),
            frontier,
            invocations: vec![inv.id],
        });
    }
    KernelPlan { kernels, lanes: lanes.max(1), channels, weighted }
}
