//! MIR-to-MIR transformations: pipeline-conflict decoupling, unroll
//! legalization and update-stream classification.

mod classify;
mod decouple;
mod legalize;

pub use classify::{classify_kernel, classify_update_stream};
pub use decouple::decouple_pipeline_conflicts;
pub use legalize::legalize_unroll;

use serde::Serialize;

use crate::diag::Diagnostic;
use crate::sema::*;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PassReport {
    pub pass: String,
    pub kernels_rewritten: usize,
    pub temporaries_introduced: usize,
    pub reductions_recognized: usize,
}

impl PassReport {
    fn new(pass: &str) -> Self {
        PassReport { pass: pass.to_string(), kernels_rewritten: 0, temporaries_introduced: 0, reductions_recognized: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PassOptions {
    pub decouple: bool,
    /// Lane count for unroll legalization; `None` skips the pass.
    pub legalize: Option<u32>,
}

impl PassOptions {
    pub fn all(lanes: u32) -> Self {
        PassOptions { decouple: true, legalize: Some(lanes) }
    }

    pub fn none() -> Self {
        PassOptions { decouple: false, legalize: None }
    }
}

/// Runs the enabled passes in order (decouple, legalize) and then classifies
/// every process invocation. Classification always runs.
pub fn run_passes(mir: MirProgram, options: PassOptions) -> Result<(MirProgram, Vec<PassReport>), Diagnostic> {
    let mut reports = Vec::new();
    let mut mir = mir;
    if options.decouple {
        let (m, r) = decouple_pipeline_conflicts(mir);
        mir = m;
        reports.push(r);
    }
    if let Some(lanes) = options.legalize {
        let (m, r) = legalize_unroll(mir, lanes)?;
        mir = m;
        reports.push(r);
    }
    Ok((classify_update_stream(mir), reports))
}

/// Renumbers the schedule in the textual order of `main`, rewriting
/// `Invoke` ids to match.
pub(crate) fn renumber_schedule(mir: &mut MirProgram) {
    let mut order = Vec::new();
    walk_stmts(&mir.main.body, &mut |s| {
        if let StmtKind::Invoke(id) = s.kind {
            order.push(id);
        }
    });
    let mut remap = vec![usize::MAX; mir.schedule.len()];
    let mut schedule = Vec::with_capacity(order.len());
    for (new, old) in order.iter().enumerate() {
        remap[*old] = new;
        let mut inv = mir.schedule[*old].clone();
        inv.id = new;
        schedule.push(inv);
    }
    walk_stmts_mut(&mut mir.main.body, &mut |s| {
        if let StmtKind::Invoke(id) = &mut s.kind {
            *id = remap[*id];
        }
    });
    mir.schedule = schedule;
}

/// A name not yet used by any property, scalar or function.
pub(crate) fn fresh_name(mir: &MirProgram, base: &str) -> String {
    let taken = |n: &str| {
        mir.properties.iter().any(|p| p.name == n)
            || mir.scalars.iter().any(|s| s.name == n)
            || mir.functions.iter().any(|f| f.name == n)
            || n == "main"
    };
    if !taken(base) {
        return base.to_string();
    }
    (1..).map(|i| format!("{base}{i}")).find(|n| !taken(n)).unwrap()
}
