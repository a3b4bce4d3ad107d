//! Lane shuffle into banked on-chip memory.

use crate::interp::Value;
use crate::sema::{PropId, ReduceOp};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Update {
    pub prop: PropId,
    pub index: usize,
    pub op: ReduceOp,
    pub value: Value,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ShuffleOutcome {
    pub routings: u64,
    pub steps: u64,
    pub stalls: u64,
    pub violations: u64,
}

pub fn bank_of(index: usize, lanes: usize) -> usize {
    index % lanes.max(1)
}

/// Duplicates `updates` round-robin over `lanes` lanes, so each shuffle step
/// sees one group of up to `lanes` consecutive updates. Updates of a group
/// are routed to bank `index mod lanes`; a bank takes one update per step and
/// later arrivals for the same bank stall to the next step, keeping per-lane
/// order. `apply` is called in application order.
pub fn shuffle_apply<E>(
    updates: &[Update],
    lanes: usize,
    mut apply: impl FnMut(&Update) -> Result<(), E>,
) -> Result<ShuffleOutcome, E> {
    let lanes = lanes.max(1);
    let mut out = ShuffleOutcome::default();
    let mut queues: Vec<Vec<&Update>> = vec![Vec::new(); lanes];
    let mut used = vec![false; lanes];
    for group in updates.chunks(lanes) {
        for q in queues.iter_mut() {
            q.clear();
        }
        for u in group {
            queues[bank_of(u.index, lanes)].push(u);
            out.routings += 1;
        }
        let depth = queues.iter().map(Vec::len).max().unwrap_or(0);
        out.stalls += depth.saturating_sub(1) as u64;
        for step in 0..depth {
            used.iter_mut().for_each(|b| *b = false);
            for q in &queues {
                if let Some(u) = q.get(step) {
                    let b = bank_of(u.index, lanes);
                    if used[b] {
                        out.violations += 1;
                    }
                    used[b] = true;
                    apply(u)?;
                }
            }
            out.steps += 1;
        }
    }
    Ok(out)
}
