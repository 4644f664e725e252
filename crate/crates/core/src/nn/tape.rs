use std::sync::atomic::{AtomicU64, Ordering};

use super::ops;
use super::params::{ParamId, ParamStore};
use super::tensor::Tensor;
use crate::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var {
    tape: u64,
    index: usize,
}

/// Vector-Jacobian product of an operation recorded with [`Tape::custom`].
pub trait CustomOp {
    /// Gradients for each input (`None` when an input receives nothing).
    fn backward(&self, inputs: &[&Tensor], output: &Tensor, grad_out: &Tensor) -> Result<Vec<Option<Tensor>>>;
}

enum Node {
    Input,
    Param(ParamId),
    Linear { x: usize, w: usize, b: usize },
    Activation { x: usize },
    Add { a: usize, b: usize },
    Sum { x: usize },
    RelL2 { pred: usize, grad: Tensor },
    Custom { inputs: Vec<usize>, op: Box<dyn CustomOp> },
}

/// Reverse-mode record of one forward pass.
///
/// Values are stored in creation order, which is already a topological
/// order, so `backward` walks the record once in reverse.
pub struct Tape {
    id: u64,
    nodes: Vec<Node>,
    values: Vec<Tensor>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        static NEXT: AtomicU64 = AtomicU64::new(0);
        Self { id: NEXT.fetch_add(1, Ordering::Relaxed), nodes: Vec::new(), values: Vec::new() }
    }

    fn push(&mut self, node: Node, value: Tensor) -> Var {
        self.nodes.push(node);
        self.values.push(value);
        Var { tape: self.id, index: self.values.len() - 1 }
    }

    fn idx(&self, v: Var) -> Result<usize> {
        if v.tape != self.id || v.index >= self.values.len() {
            return Err(Error::NoTape);
        }
        Ok(v.index)
    }

    pub fn value(&self, v: Var) -> Result<&Tensor> {
        Ok(&self.values[self.idx(v)?])
    }

    pub fn input(&mut self, t: Tensor) -> Var {
        self.push(Node::Input, t)
    }

    pub fn param(&mut self, store: &ParamStore, id: ParamId) -> Var {
        self.push(Node::Param(id), store.value(id).clone())
    }

    pub fn linear(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let (x, w, b) = (self.idx(x)?, self.idx(w)?, self.idx(b)?);
        let y = ops::linear(&self.values[x], &self.values[w], &self.values[b])?;
        y.ensure_finite("linear")?;
        Ok(self.push(Node::Linear { x, w, b }, y))
    }

    pub fn activation(&mut self, x: Var) -> Result<Var> {
        let x = self.idx(x)?;
        let y = ops::activation(&self.values[x]);
        y.ensure_finite("activation")?;
        Ok(self.push(Node::Activation { x }, y))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (a, b) = (self.idx(a)?, self.idx(b)?);
        if self.values[a].shape() != self.values[b].shape() {
            return Err(Error::ShapeMismatch(format!(
                "add: {:?} vs {:?}",
                self.values[a].shape(),
                self.values[b].shape()
            )));
        }
        let mut y = self.values[a].clone();
        y.add_assign(&self.values[b]);
        y.ensure_finite("add")?;
        Ok(self.push(Node::Add { a, b }, y))
    }

    /// Sum of all elements as a one-element tensor.
    pub fn sum(&mut self, x: Var) -> Result<Var> {
        let x = self.idx(x)?;
        let s = self.values[x].data().iter().sum();
        Ok(self.push(Node::Sum { x }, Tensor::scalar(s)))
    }

    pub fn rel_l2(&mut self, pred: Var, truth: &Tensor) -> Result<Var> {
        let pred = self.idx(pred)?;
        let (loss, grad) = ops::rel_l2_loss(&self.values[pred], truth)?;
        Ok(self.push(Node::RelL2 { pred, grad }, Tensor::scalar(loss)))
    }

    /// Record a value computed outside the tape together with its backward rule.
    pub fn custom(&mut self, inputs: &[Var], output: Tensor, op: Box<dyn CustomOp>) -> Result<Var> {
        let inputs = inputs.iter().map(|&v| self.idx(v)).collect::<Result<Vec<_>>>()?;
        output.ensure_finite("custom op")?;
        Ok(self.push(Node::Custom { inputs, op }, output))
    }

    /// Propagate d(loss)/d(·) back to every parameter node and accumulate the
    /// results into `store`. Every parameter is marked as having a gradient.
    pub fn backward(&self, loss: Var, store: &mut ParamStore) -> Result<()> {
        let root = self.idx(loss)?;
        if self.values[root].len() != 1 {
            return Err(Error::ShapeMismatch(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.values[root].shape()
            )));
        }
        let mut grads: Vec<Option<Tensor>> = (0..=root).map(|_| None).collect();
        grads[root] = Some(Tensor::from_vec(self.values[root].shape(), vec![1.0])?);

        fn acc(slot: &mut Option<Tensor>, g: Tensor) {
            match slot {
                Some(s) => s.add_assign(&g),
                None => *slot = Some(g),
            }
        }

        for i in (0..=root).rev() {
            let Some(g) = grads[i].take() else { continue };
            match &self.nodes[i] {
                Node::Input => {}
                Node::Param(id) => store.accumulate_grad(*id, &g)?,
                Node::Linear { x, w, b } => {
                    let (dx, dw, db) = ops::linear_backward(&self.values[*x], &self.values[*w], &g)?;
                    acc(&mut grads[*x], dx);
                    acc(&mut grads[*w], dw);
                    acc(&mut grads[*b], db);
                }
                Node::Activation { x } => {
                    acc(&mut grads[*x], ops::activation_backward(&self.values[*x], &g));
                }
                Node::Add { a, b } => {
                    acc(&mut grads[*a], g.clone());
                    acc(&mut grads[*b], g);
                }
                Node::Sum { x } => {
                    let s = g.data()[0];
                    acc(&mut grads[*x], Tensor::full(self.values[*x].shape(), s));
                }
                Node::RelL2 { pred, grad } => {
                    let s = g.data()[0];
                    let mut d = grad.clone();
                    d.data_mut().iter_mut().for_each(|v| *v *= s);
                    acc(&mut grads[*pred], d);
                }
                Node::Custom { inputs, op } => {
                    let ins: Vec<&Tensor> = inputs.iter().map(|&k| &self.values[k]).collect();
                    let outs = op.backward(&ins, &self.values[i], &g)?;
                    for (&k, d) in inputs.iter().zip(outs) {
                        if let Some(d) = d {
                            acc(&mut grads[k], d);
                        }
                    }
                }
            }
        }
        store.mark_all_populated();
        Ok(())
    }
}
