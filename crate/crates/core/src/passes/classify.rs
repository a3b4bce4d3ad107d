use crate::sema::*;

/// Sequential when every write lands on the kernel's own element; lane
/// accumulations are combined after the sweep and do not count.
pub fn classify_kernel(f: &MirFunction) -> UpdateStreamClass {
    let owned = f.effects.writes.iter().chain(&f.effects.reductions).all(|a| a.index == IndexClass::Owned);
    if owned {
        UpdateStreamClass::Sequential
    } else {
        UpdateStreamClass::Unordered
    }
}

/// Assigns an update-stream class to every process invocation.
pub fn classify_update_stream(mut mir: MirProgram) -> MirProgram {
    refresh_effects(&mut mir);
    for i in 0..mir.schedule.len() {
        let inv = &mir.schedule[i];
        let class = match inv.op {
            Operator::Process => Some(classify_kernel(&mir.functions[inv.function])),
            Operator::Init => None,
        };
        mir.schedule[i].stream = class;
    }
    mir
}
