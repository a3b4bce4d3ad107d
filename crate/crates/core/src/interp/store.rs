use serde::Serialize;

use super::exec::{eval_host, Program};
use super::value::Value;
use super::RuntimeError;
use crate::sema::{ElementKind, MirProgram, PropId, Storage};

/// Property arrays plus the host scalar environment. Scalar cells have no
/// array of their own; kernels read them from `scalars`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyStore {
    pub names: Vec<String>,
    pub values: Vec<Vec<Value>>,
    pub scalar_names: Vec<String>,
    pub scalars: Vec<Value>,
}

impl PropertyStore {
    /// Allocates default-valued arrays and evaluates scalar initializers in
    /// declaration order.
    pub fn new(p: &Program) -> Result<Self, RuntimeError> {
        let mir = p.mir;
        let values = mir
            .properties
            .iter()
            .map(|info| match (info.storage, info.element_kind) {
                (Storage::ScalarCell { .. }, _) | (_, ElementKind::Scalar) => vec![],
                (_, ElementKind::Vertex) => vec![Value::default_for(info.value_type); p.graph.vertex_count],
                (_, ElementKind::Edge) => vec![Value::default_for(info.value_type); p.graph.edge_count()],
            })
            .collect();
        let mut store = PropertyStore {
            names: mir.properties.iter().map(|i| i.name.clone()).collect(),
            values,
            scalar_names: mir.scalars.iter().map(|s| s.name.clone()).collect(),
            scalars: mir.scalars.iter().map(|s| Value::default_for(s.ty)).collect(),
        };
        for (i, s) in mir.scalars.iter().enumerate() {
            if let Some(init) = &s.init {
                store.scalars[i] = eval_host(p, &store, init)?;
            }
        }
        Ok(store)
    }

    /// A vector property's values, looked up by name.
    pub fn property(&self, name: &str) -> Option<&[Value]> {
        self.prop_id(name).map(|p| self.values[p].as_slice())
    }

    pub fn prop_id(&self, name: &str) -> Option<PropId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn scalar(&self, name: &str) -> Option<Value> {
        self.scalar_names.iter().position(|n| n == name).map(|i| self.scalars[i])
    }

    /// Compares the properties named in `names` between two stores.
    pub fn matches(&self, other: &PropertyStore, names: &[&str], rel: f64) -> Result<(), String> {
        for n in names {
            let (a, b) = match (self.property(n), other.property(n)) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(format!("property `{n}` missing")),
            };
            if a.len() != b.len() {
                return Err(format!("`{n}`: lengths {} and {}", a.len(), b.len()));
            }
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                if !x.close_to(*y, rel) {
                    return Err(format!("`{n}`[{i}]: {x} vs {y}"));
                }
            }
        }
        Ok(())
    }
}

/// Names of the program's own vector properties, in declaration order.
pub fn vector_names(mir: &MirProgram) -> Vec<&str> {
    mir.vector_properties().map(|(_, p)| p.name.as_str()).collect()
}
