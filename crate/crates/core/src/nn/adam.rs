use super::{Gradients, ParamStore, Tensor};

/// Bias-corrected ADAM over every trainable parameter of a store.
#[derive(Clone, Debug)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    first: Vec<Tensor>,
    second: Vec<Tensor>,
}

impl Adam {
    pub fn new(store: &ParamStore) -> Self {
        Self::with_hyperparams(store, 0.001, 0.9, 0.999, 1e-8)
    }

    pub fn with_hyperparams(store: &ParamStore, learning_rate: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        let zeros = || {
            store
                .iter()
                .map(|(_, p)| Tensor::zeros(p.value.shape()))
                .collect::<Vec<_>>()
        };
        Adam {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            step: 0,
            first: zeros(),
            second: zeros(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// One update. Parameters without a gradient are treated as having a zero
    /// gradient: their moments still decay and they keep moving on momentum.
    pub fn step(&mut self, store: &mut ParamStore, grads: &Gradients) {
        self.step += 1;
        let t = self.step as i32;
        let correct1 = 1.0 - self.beta1.powi(t);
        let correct2 = 1.0 - self.beta2.powi(t);
        for (k, param) in store.params_mut().iter_mut().enumerate() {
            if !param.trainable {
                continue;
            }
            let m = self.first[k].data_mut();
            let v = self.second[k].data_mut();
            let w = param.value.data_mut();
            match grads.get(super::ParamId(k)) {
                Some(g) => {
                    for (((wi, mi), vi), &gi) in w.iter_mut().zip(m.iter_mut()).zip(v.iter_mut()).zip(g.data()) {
                        *mi = self.beta1 * *mi + (1.0 - self.beta1) * gi;
                        *vi = self.beta2 * *vi + (1.0 - self.beta2) * gi * gi;
                        *wi -= self.learning_rate * (*mi / correct1) / ((*vi / correct2).sqrt() + self.epsilon);
                    }
                }
                None => {
                    for ((wi, mi), vi) in w.iter_mut().zip(m.iter_mut()).zip(v.iter_mut()) {
                        *mi *= self.beta1;
                        *vi *= self.beta2;
                        if *mi != 0.0 {
                            *wi -= self.learning_rate * (*mi / correct1) / ((*vi / correct2).sqrt() + self.epsilon);
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Graph;

    fn scalar_store(w: f64) -> ParamStore {
        let mut store = ParamStore::new();
        store.insert("w", Tensor::vector(vec![w]), true).unwrap();
        store
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut store = scalar_store(0.0);
        let id = store.id("w").unwrap();
        let mut grads = Gradients::new(&store);
        grads.slot(&store, id).data_mut()[0] = 1.0;
        let mut adam = Adam::new(&store);
        adam.step(&mut store, &grads);
        let w = store.value(id).data()[0];
        assert!((w + 0.001).abs() < 1e-9, "{w}");
        assert_eq!(adam.steps(), 1);
    }

    #[test]
    fn zero_gradient_first_step_is_noop() {
        let mut store = scalar_store(2.0);
        let grads = Gradients::new(&store);
        let mut adam = Adam::new(&store);
        adam.step(&mut store, &grads);
        assert_eq!(store.value(store.id("w").unwrap()).data()[0], 2.0);
    }

    #[test]
    fn quadratic_decreases_monotonically() {
        let mut store = scalar_store(0.0);
        let id = store.id("w").unwrap();
        let mut adam = Adam::with_hyperparams(&store, 0.01, 0.9, 0.999, 1e-8);
        let mut trace = Vec::new();
        for _ in 0..100 {
            let grads = {
                let mut g = Graph::new(&store);
                let w = g.param(id);
                let d = g.add_const(w, -3.0);
                let f = g.mul(d, d).unwrap();
                trace.push(g.scalar(f));
                g.backward(f).unwrap()
            };
            adam.step(&mut store, &grads);
        }
        assert!(trace.windows(2).all(|p| p[1] < p[0]), "{trace:?}");
    }
}
