#![allow(dead_code)]

use htparse::config::ModelConfig;
use htparse::corpus::{check_tree, is_projective};
use htparse::encoder::{Network, VocabSizes};
use htparse::engine::{Action, Dir, Pending, ScoreTable, Scorer};
use htparse::nn::{Gradients, Graph, NodeId, ParamStore};
use htparse::training::OracleState;
use htparse::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every single-rooted projective tree over `n` words, as head vectors.
pub fn projective_trees(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut heads = vec![0; n];
    fn rec(i: usize, heads: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let n = heads.len();
        if i == n {
            if check_tree(heads).is_ok() && is_projective(heads) {
                out.push(heads.clone());
            }
            return;
        }
        for h in 0..=n {
            if h != i + 1 {
                heads[i] = h;
                rec(i + 1, heads, out);
            }
        }
    }
    rec(0, &mut heads, &mut out);
    out
}

/// A random projective tree: each span under a head is cut into consecutive
/// chunks, and every chunk hangs from the head through a root of its own.
pub fn random_projective_tree<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    fn fill<R: Rng>(rng: &mut R, lo: usize, hi: usize, head: usize, heads: &mut [usize]) {
        let mut start = lo;
        while start <= hi {
            let end = rng.gen_range(start..=hi);
            let root = rng.gen_range(start..=end);
            heads[root - 1] = head;
            if root > start {
                fill(rng, start, root - 1, root, heads);
            }
            if root < end {
                fill(rng, root + 1, end, root, heads);
            }
            start = end + 1;
        }
    }
    let mut heads = vec![0; n];
    if n == 0 {
        return heads;
    }
    let root = rng.gen_range(1..=n);
    if root > 1 {
        fill(rng, 1, root - 1, root, &mut heads);
    }
    if root < n {
        fill(rng, root + 1, n, root, &mut heads);
    }
    heads
}

/// Brute-force projectivity: no two arcs cross, and no arc covers the root.
pub fn crossing_free(heads: &[usize]) -> bool {
    let arcs: Vec<(usize, usize)> = heads
        .iter()
        .enumerate()
        .map(|(i, &h)| (h.min(i + 1), h.max(i + 1)))
        .collect();
    for &(a, b) in &arcs {
        for &(c, d) in &arcs {
            if a < c && c < b && b < d {
                return false;
            }
        }
    }
    true
}

/// Scores the gold-correct actions above everything else, with a
/// position-dependent bonus so different seeds explore different orders.
pub struct GoldScorer {
    pub oracle: OracleState,
    labels: usize,
    salt: u64,
}

impl GoldScorer {
    pub fn new(heads: &[usize], labels: &[usize], num_labels: usize, salt: u64) -> Self {
        GoldScorer {
            oracle: OracleState::new(heads, labels).unwrap(),
            labels: num_labels,
            salt,
        }
    }
}

fn mix(mut h: u64, v: u64) -> u64 {
    h ^= v.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
    h.wrapping_mul(0xff51_afd7_ed55_8ccd)
}

impl Scorer for GoldScorer {
    fn num_labels(&self) -> usize {
        self.labels
    }

    fn window(&self) -> usize {
        1
    }

    fn score(&mut self, pend: &Pending, left: usize) -> Result<ScoreTable> {
        let right = pend.next(left).expect("scored pair has a right item");
        let mut labeled = vec![0.0; 2 * self.labels];
        for dir in Dir::BOTH {
            for label in 0..self.labels {
                let a = Action {
                    left,
                    right,
                    dir,
                    label,
                    score: 0.0,
                };
                if self.oracle.is_correct(&a, false) {
                    let bonus = (mix(self.salt, left as u64) % 1000) as f64 / 1000.0;
                    labeled[ScoreTable::index(dir, label, self.labels)] = 10.0 + bonus;
                }
            }
        }
        Ok(ScoreTable::new([0.0, 0.0], labeled))
    }

    fn apply(&mut self, _pend: &Pending, action: &Action) -> Result<()> {
        self.oracle.apply(action);
        Ok(())
    }
}

pub fn sizes() -> VocabSizes {
    VocabSizes {
        words: 30,
        tags: 7,
        labels: 4,
        labeled: true,
    }
}

/// Parameters drawn uniformly from ±`scale`, so that no bias, padding or
/// embedding sits at a special value.
pub fn randomize(store: &mut ParamStore, seed: u64, scale: f64) {
    let mut r = rng(seed);
    let ids: Vec<_> = store.iter().map(|(id, _)| id).collect();
    for id in ids {
        for v in store.value_mut(id).data_mut() {
            *v = r.gen_range(-scale..scale);
        }
    }
}

pub fn generic_network(cfg: &ModelConfig, seed: u64) -> (Network, ParamStore) {
    let mut store = ParamStore::new();
    let net = Network::new(cfg, sizes(), &mut store, seed).unwrap();
    randomize(&mut store, seed ^ 0x5eed, 0.5);
    (net, store)
}

/// Largest relative disagreement between backprop and central differences.
///
/// `f` builds the scalar loss on a fresh graph. At most `per_param` entries of
/// each parameter tensor are probed. Pairs where both values are below `1e-7`
/// count as agreeing when their difference is below `1e-9`.
pub fn gradient_error<F>(store: &ParamStore, per_param: usize, seed: u64, f: F) -> f64
where
    F: for<'a> Fn(Graph<'a>) -> (Graph<'a>, NodeId),
{
    gradient_error_with(store, per_param, seed, |s| {
        let (g, loss) = f(Graph::new(s));
        let value = g.scalar(loss);
        (value, g.backward(loss).unwrap())
    })
}

/// Same as [`gradient_error`], with `f` returning the loss and its gradients
/// for a given parameter store.
pub fn gradient_error_with<F>(store: &ParamStore, per_param: usize, seed: u64, f: F) -> f64
where
    F: Fn(&ParamStore) -> (f64, Gradients),
{
    const H: f64 = 1e-5;
    let (_, grads) = f(store);
    let mut r = rng(seed);
    let mut probe = store.clone();
    let mut worst: f64 = 0.0;
    let ids: Vec<_> = store.iter().filter(|(_, p)| p.trainable).map(|(id, _)| id).collect();
    for id in ids {
        let analytic = grads.dense(store, id);
        let len = analytic.len();
        let picks: Vec<usize> = if len <= per_param {
            (0..len).collect()
        } else {
            (0..per_param).map(|_| r.gen_range(0..len)).collect()
        };
        for k in picks {
            let orig = store.value(id).data()[k];
            probe.value_mut(id).data_mut()[k] = orig + H;
            let up = f(&probe).0;
            probe.value_mut(id).data_mut()[k] = orig - H;
            let down = f(&probe).0;
            probe.value_mut(id).data_mut()[k] = orig;
            let numeric = (up - down) / (2.0 * H);
            let a = analytic.data()[k];
            let scale = a.abs().max(numeric.abs());
            let err = if scale < 1e-7 {
                if (a - numeric).abs() < 1e-9 {
                    0.0
                } else {
                    1.0
                }
            } else {
                (a - numeric).abs() / scale
            };
            worst = worst.max(err);
        }
    }
    worst
}

/// Every sequence of statically correct actions that builds `heads`.
pub fn gold_orders(heads: &[usize], labels: &[usize]) -> Vec<Vec<Action>> {
    fn rec(pend: &Pending, oracle: &OracleState, labels: &[usize], path: &mut Vec<Action>, out: &mut Vec<Vec<Action>>) {
        if pend.len() <= 1 {
            out.push(path.clone());
            return;
        }
        let items: Vec<usize> = pend.iter().collect();
        for pair in items.windows(2) {
            for dir in Dir::BOTH {
                let mut a = Action {
                    left: pair[0],
                    right: pair[1],
                    dir,
                    label: 0,
                    score: 0.0,
                };
                a.label = labels[a.modifier() - 1];
                if oracle.is_correct(&a, false) {
                    let mut p = pend.clone();
                    let mut o = oracle.clone();
                    o.apply(&a);
                    p.remove(a.modifier());
                    path.push(a);
                    rec(&p, &o, labels, path, out);
                    path.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    let oracle = OracleState::new(heads, labels).unwrap();
    rec(&Pending::new(heads.len()), &oracle, labels, &mut Vec::new(), &mut out);
    out
}

/// All adjacent-pair actions of `pend`, with every label.
pub fn all_actions(pend: &Pending, num_labels: usize) -> Vec<Action> {
    let items: Vec<usize> = pend.iter().collect();
    let mut out = Vec::new();
    for pair in items.windows(2) {
        for dir in Dir::BOTH {
            for label in 0..num_labels {
                out.push(Action {
                    left: pair[0],
                    right: pair[1],
                    dir,
                    label,
                    score: 0.0,
                });
            }
        }
    }
    out
}

/// Arcs of a finished run that differ from gold in head or label. The
/// survivor is attached to the root with `root_label`.
pub fn run_errors(heads: &[usize], labels: &[usize], taken: &[Action], root_label: usize) -> usize {
    let n = heads.len();
    let mut got = vec![(0, root_label); n];
    for a in taken {
        got[a.modifier() - 1] = (a.head(), a.label);
    }
    (0..n).filter(|&i| got[i] != (heads[i], labels[i])).count()
}

/// Checks the dynamic oracle at one state: some correct action keeps the
/// brute-force cost, every other action raises it, and the closed-form cost
/// agrees with the brute force. Returns the correct actions.
pub fn check_oracle_state(
    pend: &Pending,
    oracle: &OracleState,
    heads: &[usize],
    labels: &[usize],
    num_labels: usize,
) -> std::result::Result<Vec<Action>, String> {
    use htparse::training::{oracle_cost, oracle_cost_after};
    let before = oracle_cost(pend, heads).unwrap();
    let mut correct = Vec::new();
    let mut best_g = usize::MAX;
    for a in all_actions(pend, num_labels) {
        let after = oracle_cost_after(pend, heads, labels, &a).unwrap();
        if after - before != oracle.cost(&a) {
            return Err(format!("closed-form cost {} vs brute force {} for {a:?}", oracle.cost(&a), after - before));
        }
        if oracle.is_correct(&a, true) {
            best_g = best_g.min(after);
            correct.push(a);
        } else if after < before + 1 {
            return Err(format!("wrong action {a:?} keeps cost {before}"));
        }
    }
    if correct.is_empty() {
        return Err("no correct action".into());
    }
    if best_g != before {
        return Err(format!("best correct action costs {best_g}, state costs {before}"));
    }
    Ok(correct)
}
