use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::numerics::scalar::Real;
use crate::numerics::tensor::Tensor;

/// Ordered collection of named learnable tensors. Iteration order is
/// insertion order, which every seeded routine (init, optimizer state,
/// checkpointing) relies on for determinism.
#[derive(Clone, Debug, Default)]
pub struct ParameterStore<T> {
    entries: IndexMap<String, Tensor<T>>,
}

impl<T: Real> ParameterStore<T> {
    pub fn new() -> Self {
        ParameterStore {
            entries: IndexMap::new(),
        }
    }

    /// Insert a parameter; `requires_grad` is forced on. Duplicate names are
    /// rejected.
    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor<T>) -> Result<()> {
        let name = name.into();
        if self.entries.contains_key(&name) {
            return Err(Error::config(format!("duplicate parameter name '{name}'")));
        }
        self.entries.insert(name, tensor.with_requires_grad(true));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn get(&self, name: &str) -> Result<&Tensor<T>> {
        self.entries
            .get(name)
            .ok_or_else(|| Error::config(format!("unknown parameter '{name}'")))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Tensor<T>> {
        self.entries
            .get_mut(name)
            .ok_or_else(|| Error::config(format!("unknown parameter '{name}'")))
    }

    pub(crate) fn slot_of(&self, name: &str) -> Result<usize> {
        self.entries
            .get_index_of(name)
            .ok_or_else(|| Error::config(format!("unknown parameter '{name}'")))
    }

    pub(crate) fn by_slot(&self, slot: usize) -> &Tensor<T> {
        self.entries.get_index(slot).unwrap().1
    }

    pub(crate) fn by_slot_mut(&mut self, slot: usize) -> &mut Tensor<T> {
        self.entries.get_index_mut(slot).unwrap().1
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor<T>)> {
        self.entries.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|n| n.as_str())
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Tensor<T>> {
        self.entries.values_mut()
    }

    pub fn zero_grads(&mut self) {
        for t in self.entries.values_mut() {
            t.zero_grad();
        }
    }

    /// Total number of scalar entries across all parameters.
    pub fn total_len(&self) -> usize {
        self.entries.values().map(|t| t.numel()).sum()
    }
}
