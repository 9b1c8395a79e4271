use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{NnError, Tensor};

/// Handle of a parameter inside a [`ParamStore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub usize);

#[derive(Clone, Debug)]
pub struct Parameter {
    pub name: String,
    pub value: Tensor,
    pub trainable: bool,
}

/// Named parameter tensors. Names are unique.
#[derive(Clone, Debug, Default)]
pub struct ParamStore {
    params: Vec<Parameter>,
    by_name: HashMap<String, ParamId>,
}

/// How a freshly created parameter is initialized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Init {
    /// Uniform in ±sqrt(6 / (rows + cols)).
    Glorot,
    /// Uniform in ±scale.
    Uniform(f64),
    Constant(f64),
    Zeros,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Registers an already-built tensor.
    pub fn insert(&mut self, name: &str, value: Tensor, trainable: bool) -> Result<ParamId, NnError> {
        if self.by_name.contains_key(name) {
            return Err(NnError::DuplicateParam(name.to_string()));
        }
        if !value.is_finite() {
            return Err(NnError::NonFinite(name.to_string()));
        }
        let id = ParamId(self.params.len());
        self.params.push(Parameter {
            name: name.to_string(),
            value,
            trainable,
        });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    /// Creates a parameter of the given shape, drawing values from `rng`.
    pub fn add(
        &mut self,
        name: &str,
        shape: &[usize],
        init: Init,
        rng: &mut ChaCha8Rng,
    ) -> Result<ParamId, NnError> {
        if shape.contains(&0) {
            return Err(NnError::Dimension {
                op: "init",
                detail: format!("parameter {name} has empty shape {shape:?}"),
            });
        }
        let mut t = Tensor::zeros(shape);
        match init {
            Init::Glorot => {
                let bound = (6.0 / (t.rows() + t.cols()) as f64).sqrt();
                t.data_mut()
                    .iter_mut()
                    .for_each(|v| *v = rng.gen_range(-bound..bound));
            }
            Init::Uniform(scale) => {
                t.data_mut()
                    .iter_mut()
                    .for_each(|v| *v = rng.gen_range(-scale..scale));
            }
            Init::Constant(c) => t.fill(c),
            Init::Zeros => {}
        }
        self.insert(name, t, true)
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.by_name.get(name).copied()
    }

    /// Looks up a parameter by name and checks its shape.
    pub fn expect(&self, name: &str, shape: &[usize]) -> Result<ParamId, NnError> {
        let id = self.id(name).ok_or_else(|| NnError::MissingParam(name.to_string()))?;
        let actual = self.get(id).value.shape();
        if actual != shape {
            return Err(NnError::Dimension {
                op: "bind",
                detail: format!("parameter {name} has shape {actual:?}, expected {shape:?}"),
            });
        }
        Ok(id)
    }

    pub fn get(&self, id: ParamId) -> &Parameter {
        &self.params[id.0]
    }

    pub fn value(&self, id: ParamId) -> &Tensor {
        &self.params[id.0].value
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.params[id.0].value
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Parameter)> {
        self.params.iter().enumerate().map(|(i, p)| (ParamId(i), p))
    }

    pub(crate) fn params_mut(&mut self) -> &mut [Parameter] {
        &mut self.params
    }

    /// Bit-for-bit equality of names, flags and values.
    pub fn bitwise_eq(&self, other: &ParamStore) -> bool {
        self.params.len() == other.params.len()
            && self.params.iter().zip(&other.params).all(|(a, b)| {
                a.name == b.name && a.trainable == b.trainable && a.value.bitwise_eq(&b.value)
            })
    }
}

/// Accumulated d(loss)/d(param), dense per parameter, allocated on first touch.
#[derive(Clone, Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn new(store: &ParamStore) -> Self {
        Gradients {
            grads: vec![None; store.len()],
        }
    }

    pub(crate) fn slot(&mut self, store: &ParamStore, id: ParamId) -> &mut Tensor {
        if self.grads.len() <= id.0 {
            self.grads.resize(id.0 + 1, None);
        }
        self.grads[id.0].get_or_insert_with(|| Tensor::zeros(store.value(id).shape()))
    }

    /// Gradient for `id`, `None` when nothing reached it (an all-zero gradient).
    pub fn get(&self, id: ParamId) -> Option<&Tensor> {
        self.grads.get(id.0).and_then(|g| g.as_ref())
    }

    /// Dense gradient for `id`; zeros when unreachable.
    pub fn dense(&self, store: &ParamStore, id: ParamId) -> Tensor {
        self.get(id)
            .cloned()
            .unwrap_or_else(|| Tensor::zeros(store.value(id).shape()))
    }

    pub fn clear(&mut self) {
        self.grads.iter_mut().for_each(|g| *g = None);
    }

    pub fn is_zero(&self) -> bool {
        self.grads
            .iter()
            .flatten()
            .all(|t| t.data().iter().all(|&v| v == 0.0))
    }
}
