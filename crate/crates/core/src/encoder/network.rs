use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{NodeState, Slot};
use crate::config::ModelConfig;
use crate::corpus::check_tree;
use crate::engine::Dir;
use crate::error::{Error, Result};
use crate::nn::{Graph, Init, Lstm, Mlp, NodeId, ParamId, ParamStore};

const EMBEDDING_SCALE: f64 = 0.1;

/// Table sizes the network depends on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VocabSizes {
    pub words: usize,
    pub tags: usize,
    pub labels: usize,
    /// Whether relation embeddings enter subtree encodings.
    pub labeled: bool,
}

#[derive(Clone, Debug)]
struct TreeParams {
    left: Lstm,
    right: Lstm,
    reduce_w: ParamId,
    reduce_b: ParamId,
    rel_emb: Option<ParamId>,
}

/// Parameter handles of the whole parser network.
#[derive(Clone, Debug)]
pub struct Network {
    config: ModelConfig,
    sizes: VocabSizes,
    word_emb: ParamId,
    pos_emb: Option<ParamId>,
    proj_w: ParamId,
    proj_b: ParamId,
    forward: Option<Lstm>,
    backward: Option<Lstm>,
    tree: Option<TreeParams>,
    pad_left: ParamId,
    pad_right: ParamId,
    unlabeled: Mlp,
    labeled: Mlp,
}

impl Network {
    /// Creates and initializes all parameters in `store`, deterministically in `seed`.
    pub fn new(config: &ModelConfig, sizes: VocabSizes, store: &mut ParamStore, seed: u64) -> Result<Self> {
        config.validate()?;
        let rng = &mut ChaCha8Rng::seed_from_u64(seed);
        let c = config;
        let word_emb = store.add("emb.word", &[sizes.words, c.word_dim], Init::Uniform(EMBEDDING_SCALE), rng)?;
        let pos_emb = if c.use_pos {
            Some(store.add("emb.pos", &[sizes.tags, c.pos_dim], Init::Uniform(EMBEDDING_SCALE), rng)?)
        } else {
            None
        };
        let proj_w = store.add("proj.w", &[c.proj_dim, Self::token_input_dim(c)], Init::Glorot, rng)?;
        let proj_b = store.add("proj.b", &[c.proj_dim], Init::Zeros, rng)?;
        let (forward, backward) = if c.use_bilstm {
            (
                Some(Lstm::new(store, "bilstm.fwd", c.proj_dim, c.bilstm_hidden, c.bilstm_layers, rng)?),
                Some(Lstm::new(store, "bilstm.bwd", c.proj_dim, c.bilstm_hidden, c.bilstm_layers, rng)?),
            )
        } else {
            (None, None)
        };
        let tree = if c.use_tree {
            let d = c.word_vector_dim();
            let left = Lstm::new(store, "tree.left", d, c.tree_hidden, c.tree_layers, rng)?;
            let right = Lstm::new(store, "tree.right", d, c.tree_hidden, c.tree_layers, rng)?;
            let rel_emb = if sizes.labeled {
                Some(store.add("emb.rel", &[sizes.labels, c.rel_dim], Init::Uniform(EMBEDDING_SCALE), rng)?)
            } else {
                None
            };
            let reduce_w = store.add("tree.reduce.w", &[c.enc_dim(), Self::reduce_input_dim(c, sizes)], Init::Glorot, rng)?;
            let reduce_b = store.add("tree.reduce.b", &[c.enc_dim()], Init::Zeros, rng)?;
            Some(TreeParams {
                left,
                right,
                reduce_w,
                reduce_b,
                rel_emb,
            })
        } else {
            None
        };
        let item = c.item_dim();
        let pad_left = store.add("score.pad_left", &[item], Init::Uniform(EMBEDDING_SCALE), rng)?;
        let pad_right = store.add("score.pad_right", &[item], Init::Uniform(EMBEDDING_SCALE), rng)?;
        let unlabeled = Mlp::new(store, "score.unlabeled", c.scorer_input_dim(), c.unlabeled_hidden, 2, rng)?;
        let labeled = Mlp::new(
            store,
            "score.labeled",
            c.scorer_input_dim(),
            c.labeled_hidden,
            2 * sizes.labels,
            rng,
        )?;
        Ok(Network {
            config: c.clone(),
            sizes,
            word_emb,
            pos_emb,
            proj_w,
            proj_b,
            forward,
            backward,
            tree,
            pad_left,
            pad_right,
            unlabeled,
            labeled,
        })
    }

    /// Binds to parameters already in `store`, checking every shape.
    pub fn bind(config: &ModelConfig, sizes: VocabSizes, store: &ParamStore) -> Result<Self> {
        config.validate()?;
        let c = config;
        let word_emb = store.expect("emb.word", &[sizes.words, c.word_dim])?;
        let pos_emb = if c.use_pos {
            Some(store.expect("emb.pos", &[sizes.tags, c.pos_dim])?)
        } else {
            None
        };
        let proj_w = store.expect("proj.w", &[c.proj_dim, Self::token_input_dim(c)])?;
        let proj_b = store.expect("proj.b", &[c.proj_dim])?;
        let (forward, backward) = if c.use_bilstm {
            (
                Some(Lstm::bind(store, "bilstm.fwd", c.proj_dim, c.bilstm_hidden, c.bilstm_layers)?),
                Some(Lstm::bind(store, "bilstm.bwd", c.proj_dim, c.bilstm_hidden, c.bilstm_layers)?),
            )
        } else {
            (None, None)
        };
        let tree = if c.use_tree {
            let d = c.word_vector_dim();
            Some(TreeParams {
                left: Lstm::bind(store, "tree.left", d, c.tree_hidden, c.tree_layers)?,
                right: Lstm::bind(store, "tree.right", d, c.tree_hidden, c.tree_layers)?,
                rel_emb: if sizes.labeled {
                    Some(store.expect("emb.rel", &[sizes.labels, c.rel_dim])?)
                } else {
                    None
                },
                reduce_w: store.expect("tree.reduce.w", &[c.enc_dim(), Self::reduce_input_dim(c, sizes)])?,
                reduce_b: store.expect("tree.reduce.b", &[c.enc_dim()])?,
            })
        } else {
            None
        };
        let item = c.item_dim();
        Ok(Network {
            config: c.clone(),
            sizes,
            word_emb,
            pos_emb,
            proj_w,
            proj_b,
            forward,
            backward,
            tree,
            pad_left: store.expect("score.pad_left", &[item])?,
            pad_right: store.expect("score.pad_right", &[item])?,
            unlabeled: Mlp::bind(store, "score.unlabeled", c.scorer_input_dim(), c.unlabeled_hidden, 2)?,
            labeled: Mlp::bind(
                store,
                "score.labeled",
                c.scorer_input_dim(),
                c.labeled_hidden,
                2 * sizes.labels,
            )?,
        })
    }

    fn token_input_dim(c: &ModelConfig) -> usize {
        c.word_dim + if c.use_pos { c.pos_dim } else { 0 }
    }

    fn reduce_input_dim(c: &ModelConfig, sizes: VocabSizes) -> usize {
        2 * c.tree_hidden + if sizes.labeled { c.rel_dim } else { 0 }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn sizes(&self) -> VocabSizes {
        self.sizes
    }

    pub fn num_labels(&self) -> usize {
        self.sizes.labels
    }

    pub fn word_embeddings(&self) -> ParamId {
        self.word_emb
    }

    pub fn pos_embeddings(&self) -> Option<ParamId> {
        self.pos_emb
    }

    pub fn label_embeddings(&self) -> Option<ParamId> {
        self.tree.as_ref().and_then(|t| t.rel_emb)
    }

    /// `v'_i = tanh(W^v (w_i ∘ p_i) + b^v)`.
    pub fn embed_token(&self, g: &mut Graph, word: usize, tag: usize) -> Result<NodeId> {
        let w = g.lookup(self.word_emb, word).map_err(|_| Error::InvalidId {
            what: "word",
            id: word,
            size: self.sizes.words,
        })?;
        let mut parts = vec![w];
        if let Some(pos) = self.pos_emb {
            parts.push(g.lookup(pos, tag).map_err(|_| Error::InvalidId {
                what: "tag",
                id: tag,
                size: self.sizes.tags,
            })?);
        }
        let pre = g.affine(self.proj_w, Some(self.proj_b), &parts)?;
        Ok(g.tanh(pre))
    }

    /// Concatenates forward and backward LSTM states around each position,
    /// or returns the inputs unchanged when the BiLSTM is disabled.
    pub fn contextualize(&self, g: &mut Graph, projected: &[NodeId]) -> Result<Vec<NodeId>> {
        let (Some(fwd), Some(bwd)) = (&self.forward, &self.backward) else {
            return Ok(projected.to_vec());
        };
        let n = projected.len();
        let mut forward = Vec::with_capacity(n);
        let mut s = fwd.initial(g);
        for &x in projected {
            s = fwd.advance(g, &s, x)?;
            forward.push(s.output());
        }
        let mut backward = vec![forward.first().copied().unwrap_or(projected[0]); n];
        let mut s = bwd.initial(g);
        for i in (0..n).rev() {
            s = bwd.advance(g, &s, projected[i])?;
            backward[i] = s.output();
        }
        Ok(forward
            .into_iter()
            .zip(backward)
            .map(|(f, b)| g.concat(&[f, b]))
            .collect())
    }

    /// Word vectors `v_1..v_n` for parallel word and tag id sequences.
    pub fn word_vectors(&self, g: &mut Graph, words: &[usize], tags: &[usize]) -> Result<Vec<NodeId>> {
        let projected = words
            .iter()
            .zip(tags)
            .map(|(&w, &t)| self.embed_token(g, w, t))
            .collect::<Result<Vec<_>>>()?;
        if projected.is_empty() {
            return Ok(projected);
        }
        self.contextualize(g, &projected)
    }

    /// A single-word subtree: both tree LSTMs have read only the head vector.
    pub fn leaf(&self, g: &mut Graph, head: usize, word: NodeId) -> Result<NodeState> {
        let (left, right) = match &self.tree {
            Some(t) => {
                let l0 = t.left.initial(g);
                let r0 = t.right.initial(g);
                (Some(t.left.advance(g, &l0, word)?), Some(t.right.advance(g, &r0, word)?))
            }
            None => (None, None),
        };
        Ok(NodeState {
            head,
            word,
            left,
            right,
            left_mods: Vec::new(),
            right_mods: Vec::new(),
        })
    }

    /// The pieces whose concatenation is the item vector `c`.
    pub fn item_parts(&self, node: &NodeState) -> Vec<NodeId> {
        match (&node.left, &node.right) {
            (Some(l), Some(r)) => vec![l.output(), r.output()],
            _ => vec![node.word],
        }
    }

    /// `c = e_l ∘ e_r` (or the head word vector for the baseline).
    pub fn item_vector(&self, g: &mut Graph, node: &NodeState) -> NodeId {
        let parts = self.item_parts(node);
        if parts.len() == 1 {
            parts[0]
        } else {
            g.concat(&parts)
        }
    }

    /// Encoding of a finished subtree attached with relation `label`.
    pub fn finalize_modifier(&self, g: &mut Graph, node: &NodeState, label: usize) -> Result<NodeId> {
        if label >= self.sizes.labels {
            return Err(Error::InvalidId {
                what: "label",
                id: label,
                size: self.sizes.labels,
            });
        }
        let Some(t) = &self.tree else {
            return Ok(node.word);
        };
        let mut parts = self.item_parts(node);
        if let Some(rel) = t.rel_emb {
            parts.push(g.lookup(rel, label)?);
        }
        let pre = g.affine(t.reduce_w, Some(t.reduce_b), &parts)?;
        Ok(g.tanh(pre))
    }

    /// Appends a modifier encoding to the head's left or right LSTM. The input
    /// state is left untouched.
    pub fn attach(
        &self,
        g: &mut Graph,
        head: &NodeState,
        modifier: usize,
        enc: NodeId,
        dir: Dir,
    ) -> Result<NodeState> {
        let mut out = head.clone();
        match dir {
            Dir::Left => {
                if let (Some(t), Some(s)) = (&self.tree, &head.left) {
                    out.left = Some(t.left.advance(g, s, enc)?);
                }
                out.left_mods.push(modifier);
            }
            Dir::Right => {
                if let (Some(t), Some(s)) = (&self.tree, &head.right) {
                    out.right = Some(t.right.advance(g, s, enc)?);
                }
                out.right_mods.push(modifier);
            }
        }
        Ok(out)
    }

    /// Encodes a complete tree bottom-up, folding modifiers head-outward, and
    /// returns the encoding of the root word under its own relation.
    pub fn encode_tree(&self, g: &mut Graph, words: &[NodeId], heads: &[usize], labels: &[usize]) -> Result<NodeId> {
        check_tree(heads)?;
        let n = heads.len();
        let mut children = vec![Vec::new(); n + 1];
        for (i, &h) in heads.iter().enumerate() {
            children[h].push(i + 1);
        }
        let root = children[0][0];
        // post-order without recursion
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![root];
        while let Some(w) = stack.pop() {
            order.push(w);
            stack.extend(&children[w]);
        }
        let mut enc: Vec<Option<NodeId>> = vec![None; n + 1];
        for &w in order.iter().rev() {
            let mut state = self.leaf(g, w, words[w - 1])?;
            let (left, right): (Vec<usize>, Vec<usize>) = children[w].iter().partition(|&&c| c < w);
            for &m in left.iter().rev() {
                state = self.attach(g, &state, m, enc[m].expect("child encoded first"), Dir::Left)?;
            }
            for &m in &right {
                state = self.attach(g, &state, m, enc[m].expect("child encoded first"), Dir::Right)?;
            }
            enc[w] = Some(self.finalize_modifier(g, &state, labels[w - 1])?);
        }
        Ok(enc[root].unwrap())
    }

    /// Unlabeled (2) and labeled (2L) score vectors for one window.
    pub fn score_window(&self, g: &mut Graph, window: &[Slot]) -> Result<(NodeId, NodeId)> {
        if window.len() != self.config.window_slots() {
            return Err(Error::InvalidId {
                what: "window slot",
                id: window.len(),
                size: self.config.window_slots(),
            });
        }
        let mut parts = Vec::with_capacity(2 * window.len());
        for slot in window {
            match slot {
                Slot::Item(node) => parts.extend(self.item_parts(node)),
                Slot::PadLeft => parts.push(g.param(self.pad_left)),
                Slot::PadRight => parts.push(g.param(self.pad_right)),
            }
        }
        let u = self.unlabeled.apply(g, &parts)?;
        let l = self.labeled.apply(g, &parts)?;
        Ok((u, l))
    }

    pub fn padding(&self) -> (ParamId, ParamId) {
        (self.pad_left, self.pad_right)
    }

    pub fn scorer_mlps(&self) -> (&Mlp, &Mlp) {
        (&self.unlabeled, &self.labeled)
    }

    pub fn tree_lstms(&self) -> Option<(&Lstm, &Lstm)> {
        self.tree.as_ref().map(|t| (&t.left, &t.right))
    }

    pub fn bilstm(&self) -> Option<(&Lstm, &Lstm)> {
        self.forward.as_ref().zip(self.backward.as_ref())
    }

    pub fn reduce_params(&self) -> Option<(ParamId, ParamId)> {
        self.tree.as_ref().map(|t| (t.reduce_w, t.reduce_b))
    }

    pub fn projection(&self) -> (ParamId, ParamId) {
        (self.proj_w, self.proj_b)
    }
}
