//! Property detection: device placement, memory-unit ids and channel indices.

use super::mir::*;

/// Places every vector property on the device and materializes scalars read
/// by device kernels as single-cell device properties.
///
/// Memory-unit ids are dense: vector properties first in declaration order,
/// then scalar cells in scalar order. Re-running after a pass has added
/// properties renumbers consistently.
pub fn detect_properties(mut mir: MirProgram, channels: u32) -> MirProgram {
    let channels = channels.max(1);
    mir.channels = channels;

    let mut device_scalars: Vec<ScalarId> = Vec::new();
    for fid in mir.device_functions() {
        for s in &mir.functions[fid].effects.scalar_reads {
            if !device_scalars.contains(s) {
                device_scalars.push(*s);
            }
        }
    }
    device_scalars.sort_unstable();

    for (i, s) in mir.scalars.iter_mut().enumerate() {
        s.placement = if device_scalars.contains(&i) { Placement::Device } else { Placement::Host };
    }
    for s in &device_scalars {
        let exists = mir.properties.iter().any(|p| p.storage == Storage::ScalarCell { scalar: *s });
        if !exists {
            let info = &mir.scalars[*s];
            mir.properties.push(PropertyInfo {
                name: info.name.clone(),
                element_kind: ElementKind::Scalar,
                value_type: info.ty,
                placement: Placement::Device,
                memory_unit_id: None,
                channel_index: None,
                storage: Storage::ScalarCell { scalar: *s },
                span: info.span,
            });
        }
    }
    // Cells for scalars no longer read on the device go back to the host.
    let mut next = 0u32;
    let order: Vec<PropId> = {
        let mut vectors: Vec<PropId> = (0..mir.properties.len()).filter(|p| mir.properties[*p].is_vector()).collect();
        let mut cells: Vec<(ScalarId, PropId)> = mir
            .properties
            .iter()
            .enumerate()
            .filter_map(|(i, p)| match p.storage {
                Storage::ScalarCell { scalar } if device_scalars.contains(&scalar) => Some((scalar, i)),
                _ => None,
            })
            .collect();
        cells.sort_unstable();
        vectors.extend(cells.into_iter().map(|(_, p)| p));
        vectors
    };
    for p in mir.properties.iter_mut() {
        p.placement = Placement::Host;
        p.memory_unit_id = None;
        p.channel_index = None;
    }
    for pid in order {
        let p = &mut mir.properties[pid];
        p.placement = Placement::Device;
        p.memory_unit_id = Some(next);
        p.channel_index = Some(next % channels);
        next += 1;
    }
    mir
}

/// Device properties ordered by memory-unit id.
pub fn device_table(mir: &MirProgram) -> Vec<(PropId, &PropertyInfo)> {
    let mut v: Vec<(PropId, &PropertyInfo)> =
        mir.properties.iter().enumerate().filter(|(_, p)| p.memory_unit_id.is_some()).collect();
    v.sort_by_key(|(_, p)| p.memory_unit_id);
    v
}
