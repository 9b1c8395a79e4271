use rand_chacha::ChaCha8Rng;

use super::{Graph, Init, NnError, NodeId, ParamId, ParamStore};

#[derive(Clone, Debug)]
struct LstmLayer {
    /// Gate weights, shape `[4H, in + H]`, gate order input, forget, output, candidate.
    w: ParamId,
    b: ParamId,
}

/// A stacked LSTM: shapes plus the ids of its parameters.
#[derive(Clone, Debug)]
pub struct Lstm {
    input_dim: usize,
    hidden_dim: usize,
    layers: Vec<LstmLayer>,
}

/// Persistent recurrent state. Advancing returns a new state and leaves this one intact,
/// so a state can be continued along several different paths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LstmState {
    hidden: Vec<NodeId>,
    cell: Vec<NodeId>,
    steps: usize,
}

impl LstmState {
    /// Hidden vector of the top layer.
    pub fn output(&self) -> NodeId {
        *self.hidden.last().expect("lstm has at least one layer")
    }

    /// How many inputs have been consumed since `initial`.
    pub fn steps(&self) -> usize {
        self.steps
    }
}

impl Lstm {
    /// Registers fresh parameters under `prefix`. Forget-gate biases start at 1.
    pub fn new(
        store: &mut ParamStore,
        prefix: &str,
        input_dim: usize,
        hidden_dim: usize,
        num_layers: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self, NnError> {
        if num_layers == 0 {
            return Err(NnError::Dimension {
                op: "lstm",
                detail: format!("{prefix}: zero layers"),
            });
        }
        let mut layers = Vec::with_capacity(num_layers);
        for k in 0..num_layers {
            let in_dim = if k == 0 { input_dim } else { hidden_dim };
            let w = store.add(
                &format!("{prefix}.l{k}.w"),
                &[4 * hidden_dim, in_dim + hidden_dim],
                Init::Glorot,
                rng,
            )?;
            let b = store.add(&format!("{prefix}.l{k}.b"), &[4 * hidden_dim], Init::Zeros, rng)?;
            store.value_mut(b).data_mut()[hidden_dim..2 * hidden_dim].fill(1.0);
            layers.push(LstmLayer { w, b });
        }
        Ok(Lstm {
            input_dim,
            hidden_dim,
            layers,
        })
    }

    /// Re-attaches to parameters already present in `store` (e.g. after loading).
    pub fn bind(
        store: &ParamStore,
        prefix: &str,
        input_dim: usize,
        hidden_dim: usize,
        num_layers: usize,
    ) -> Result<Self, NnError> {
        let layers = (0..num_layers)
            .map(|k| {
                let in_dim = if k == 0 { input_dim } else { hidden_dim };
                Ok(LstmLayer {
                    w: store.expect(&format!("{prefix}.l{k}.w"), &[4 * hidden_dim, in_dim + hidden_dim])?,
                    b: store.expect(&format!("{prefix}.l{k}.b"), &[4 * hidden_dim])?,
                })
            })
            .collect::<Result<Vec<_>, NnError>>()?;
        Ok(Lstm {
            input_dim,
            hidden_dim,
            layers,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn initial(&self, g: &mut Graph) -> LstmState {
        let zero_h = g.zeros(self.hidden_dim);
        let zero_c = g.zeros(self.hidden_dim);
        LstmState {
            hidden: vec![zero_h; self.layers.len()],
            cell: vec![zero_c; self.layers.len()],
            steps: 0,
        }
    }

    pub fn advance(&self, g: &mut Graph, state: &LstmState, x: NodeId) -> Result<LstmState, NnError> {
        if g.dim(x) != self.input_dim {
            return Err(NnError::Dimension {
                op: "lstm_advance",
                detail: format!("input has dim {}, lstm expects {}", g.dim(x), self.input_dim),
            });
        }
        let h = self.hidden_dim;
        let mut hidden = Vec::with_capacity(self.layers.len());
        let mut cell = Vec::with_capacity(self.layers.len());
        let mut input = x;
        for (k, layer) in self.layers.iter().enumerate() {
            let pre = g.affine(layer.w, Some(layer.b), &[input, state.hidden[k]])?;
            let i_pre = g.slice(pre, 0, h)?;
            let f_pre = g.slice(pre, h, h)?;
            let o_pre = g.slice(pre, 2 * h, h)?;
            let c_pre = g.slice(pre, 3 * h, h)?;
            let i_gate = g.sigmoid(i_pre);
            let f_gate = g.sigmoid(f_pre);
            let o_gate = g.sigmoid(o_pre);
            let cand = g.tanh(c_pre);
            let keep = g.mul(f_gate, state.cell[k])?;
            let write = g.mul(i_gate, cand)?;
            let c = g.add(keep, write)?;
            let c_act = g.tanh(c);
            let h_new = g.mul(o_gate, c_act)?;
            hidden.push(h_new);
            cell.push(c);
            input = h_new;
        }
        Ok(LstmState {
            hidden,
            cell,
            steps: state.steps + 1,
        })
    }

    /// Folds `xs` into a fresh state.
    pub fn run(&self, g: &mut Graph, xs: &[NodeId]) -> Result<LstmState, NnError> {
        let mut s = self.initial(g);
        for &x in xs {
            s = self.advance(g, &s, x)?;
        }
        Ok(s)
    }

    pub fn param_ids(&self) -> Vec<ParamId> {
        self.layers.iter().flat_map(|l| [l.w, l.b]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn lstm(seed: u64, layers: usize) -> (ParamStore, Lstm) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let l = Lstm::new(&mut store, "rnn", 3, 4, layers, &mut rng).unwrap();
        (store, l)
    }

    #[test]
    fn initial_output_is_zero() {
        let (store, l) = lstm(1, 2);
        let mut g = Graph::new(&store);
        let s = l.initial(&mut g);
        assert_eq!(g.value(s.output()), &[0.0; 4]);
        assert_eq!(g.dim(s.output()), l.hidden_dim());
    }

    #[test]
    fn advancing_does_not_mutate_state() {
        let (store, l) = lstm(2, 2);
        let mut g = Graph::new(&store);
        let s0 = l.initial(&mut g);
        let snapshot = s0.clone();
        let a = g.input(vec![1.0, 0.0, -1.0]);
        let b = g.input(vec![0.5, 0.5, 0.5]);
        let sa = l.advance(&mut g, &s0, a).unwrap();
        let sb = l.advance(&mut g, &s0, b).unwrap();
        assert_eq!(s0, snapshot);
        assert_ne!(g.value(sa.output()), g.value(sb.output()));
        // Same continuation recomputed from scratch gives the same values.
        let s0b = l.initial(&mut g);
        let sa2 = l.advance(&mut g, &s0b, a).unwrap();
        assert_eq!(g.value(sa.output()), g.value(sa2.output()));
    }

    #[test]
    fn zero_parameters_stay_at_zero() {
        let (mut store, l) = lstm(3, 2);
        for id in l.param_ids() {
            store.value_mut(id).fill(0.0);
        }
        let mut g = Graph::new(&store);
        let x1 = g.input(vec![1.0, 2.0, 3.0]);
        let x2 = g.input(vec![-1.0, 0.5, 2.0]);
        let s = l.run(&mut g, &[x1, x2]).unwrap();
        assert!(g.value(s.output()).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn order_sensitive() {
        let (store, l) = lstm(4, 1);
        let mut g = Graph::new(&store);
        let x1 = g.input(vec![1.0, 0.0, 0.3]);
        let x2 = g.input(vec![-0.4, 0.9, 0.1]);
        let ab = l.run(&mut g, &[x1, x2]).unwrap();
        let ba = l.run(&mut g, &[x2, x1]).unwrap();
        assert_ne!(g.value(ab.output()), g.value(ba.output()));
    }

    #[test]
    fn wrong_input_dim() {
        let (store, l) = lstm(5, 1);
        let mut g = Graph::new(&store);
        let s = l.initial(&mut g);
        let x = g.input(vec![1.0]);
        assert!(matches!(l.advance(&mut g, &s, x), Err(NnError::Dimension { .. })));
    }

    #[test]
    fn forget_bias_is_one() {
        let (store, l) = lstm(6, 1);
        let b = store.value(l.param_ids()[1]);
        assert_eq!(&b.data()[4..8], &[1.0; 4]);
        assert!(b.data()[..4].iter().all(|&v| v == 0.0));
    }
}
