use rand_chacha::ChaCha8Rng;

use super::{Graph, Init, NnError, NodeId, ParamId, ParamStore};

/// One-hidden-layer perceptron `W2 · tanh(W1 x + b1) + b2`, linear output.
#[derive(Clone, Debug)]
pub struct Mlp {
    input_dim: usize,
    hidden_dim: usize,
    output_dim: usize,
    w1: ParamId,
    b1: ParamId,
    w2: ParamId,
    b2: ParamId,
}

impl Mlp {
    pub fn new(
        store: &mut ParamStore,
        prefix: &str,
        input_dim: usize,
        hidden_dim: usize,
        output_dim: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self, NnError> {
        Ok(Mlp {
            input_dim,
            hidden_dim,
            output_dim,
            w1: store.add(&format!("{prefix}.w1"), &[hidden_dim, input_dim], Init::Glorot, rng)?,
            b1: store.add(&format!("{prefix}.b1"), &[hidden_dim], Init::Zeros, rng)?,
            w2: store.add(&format!("{prefix}.w2"), &[output_dim, hidden_dim], Init::Glorot, rng)?,
            b2: store.add(&format!("{prefix}.b2"), &[output_dim], Init::Zeros, rng)?,
        })
    }

    pub fn bind(
        store: &ParamStore,
        prefix: &str,
        input_dim: usize,
        hidden_dim: usize,
        output_dim: usize,
    ) -> Result<Self, NnError> {
        Ok(Mlp {
            input_dim,
            hidden_dim,
            output_dim,
            w1: store.expect(&format!("{prefix}.w1"), &[hidden_dim, input_dim])?,
            b1: store.expect(&format!("{prefix}.b1"), &[hidden_dim])?,
            w2: store.expect(&format!("{prefix}.w2"), &[output_dim, hidden_dim])?,
            b2: store.expect(&format!("{prefix}.b2"), &[output_dim])?,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    /// Applies the network to the concatenation of `xs`.
    pub fn apply(&self, g: &mut Graph, xs: &[NodeId]) -> Result<NodeId, NnError> {
        let total: usize = xs.iter().map(|&x| g.dim(x)).sum();
        if total != self.input_dim {
            return Err(NnError::Dimension {
                op: "mlp",
                detail: format!("input has dim {total}, mlp expects {}", self.input_dim),
            });
        }
        let hidden = g.affine(self.w1, Some(self.b1), xs)?;
        let hidden = g.tanh(hidden);
        g.affine(self.w2, Some(self.b2), &[hidden])
    }

    pub fn param_ids(&self) -> [ParamId; 4] {
        [self.w1, self.b1, self.w2, self.b2]
    }
}
