use std::collections::HashMap;

use super::tensor::Tensor;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Named parameters, each with a same-shaped gradient accumulator.
/// Iteration follows insertion order.
#[derive(Debug, Clone, Default)]
pub struct ParamStore {
    names: Vec<String>,
    values: Vec<Tensor>,
    grads: Vec<Tensor>,
    populated: Vec<bool>,
    index: HashMap<String, usize>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, value: Tensor) -> Result<ParamId> {
        if self.index.contains_key(name) {
            return Err(Error::Config(format!("duplicate parameter name `{name}`")));
        }
        let id = self.values.len();
        self.index.insert(name.to_owned(), id);
        self.names.push(name.to_owned());
        self.grads.push(Tensor::zeros(value.shape()));
        self.populated.push(false);
        self.values.push(value);
        Ok(ParamId(id))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total scalar count across all parameters.
    pub fn num_values(&self) -> usize {
        self.values.iter().map(Tensor::len).sum()
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.index.get(name).copied().map(ParamId)
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn value(&self, id: ParamId) -> &Tensor {
        &self.values[id.0]
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.values[id.0]
    }

    pub fn grad(&self, id: ParamId) -> &Tensor {
        &self.grads[id.0]
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.values.len()).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(String::as_str).zip(&self.values)
    }

    pub fn accumulate_grad(&mut self, id: ParamId, grad: &Tensor) -> Result<()> {
        let slot = &mut self.grads[id.0];
        if slot.shape() != grad.shape() {
            return Err(Error::ShapeMismatch(format!(
                "gradient for `{}`: {:?} vs {:?}",
                self.names[id.0],
                grad.shape(),
                slot.shape()
            )));
        }
        slot.add_assign(grad);
        self.populated[id.0] = true;
        Ok(())
    }

    /// Mark every gradient as present (zero when nothing flowed into it).
    pub fn mark_all_populated(&mut self) {
        self.populated.iter_mut().for_each(|p| *p = true);
    }

    pub fn zero_grad(&mut self) {
        for g in &mut self.grads {
            g.fill(0.0);
        }
        self.populated.iter_mut().for_each(|p| *p = false);
    }

    pub(crate) fn missing_grad(&self) -> Option<&str> {
        self.populated.iter().position(|p| !p).map(|i| self.names[i].as_str())
    }

    pub(crate) fn values_and_grads_mut(&mut self) -> (&mut [Tensor], &[Tensor]) {
        (&mut self.values, &self.grads)
    }

    /// Replace every value from `(name, tensor)` pairs; names and shapes must
    /// match exactly.
    pub fn load_values(&mut self, entries: Vec<(String, Tensor)>) -> Result<()> {
        if entries.len() != self.len() {
            return Err(Error::Format(format!(
                "archive holds {} tensors, model expects {}",
                entries.len(),
                self.len()
            )));
        }
        let mut staged = Vec::with_capacity(entries.len());
        for (name, t) in entries {
            let id = self
                .id(&name)
                .ok_or_else(|| Error::Format(format!("unexpected tensor `{name}`")))?;
            if self.values[id.0].shape() != t.shape() {
                return Err(Error::Format(format!(
                    "tensor `{name}` has shape {:?}, expected {:?}",
                    t.shape(),
                    self.values[id.0].shape()
                )));
            }
            staged.push((id, t));
        }
        for (id, t) in staged {
            self.values[id.0] = t;
        }
        Ok(())
    }
}
