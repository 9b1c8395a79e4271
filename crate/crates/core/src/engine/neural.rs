use super::{Action, Cell, Pending, ScoreTable, Scorer};
use crate::encoder::{Network, NodeState, Slot};
use crate::error::{Error, Result};
use crate::nn::{Graph, NodeId, ParamStore};

/// Scores pairs with the network, maintaining subtree encodings as the parse
/// proceeds. Owns the sentence's computation graph.
pub struct NeuralScorer<'a> {
    net: &'a Network,
    graph: Graph<'a>,
    nodes: Vec<Option<NodeState>>,
    exprs: Vec<Option<(NodeId, NodeId)>>,
    keep_scores: bool,
}

impl<'a> NeuralScorer<'a> {
    /// Builds word vectors and leaf states for a sentence of word and tag ids.
    pub fn new(net: &'a Network, store: &'a ParamStore, words: &[usize], tags: &[usize]) -> Result<Self> {
        if words.len() != tags.len() {
            return Err(Error::InvalidAction(format!(
                "{} words but {} tags",
                words.len(),
                tags.len()
            )));
        }
        let mut graph = Graph::new(store);
        let vectors = net.word_vectors(&mut graph, words, tags)?;
        Self::from_vectors(net, graph, &vectors)
    }

    /// Like [`NeuralScorer::new`] but discards score expressions once their
    /// values are read, so [`NeuralScorer::score_expr`] is unavailable.
    pub fn for_inference(net: &'a Network, store: &'a ParamStore, words: &[usize], tags: &[usize]) -> Result<Self> {
        let mut s = Self::new(net, store, words, tags)?;
        s.keep_scores = false;
        Ok(s)
    }

    /// Starts from word vectors already in `graph`.
    pub fn from_vectors(net: &'a Network, mut graph: Graph<'a>, vectors: &[NodeId]) -> Result<Self> {
        let mut nodes = Vec::with_capacity(vectors.len() + 1);
        nodes.push(None);
        for (i, &v) in vectors.iter().enumerate() {
            nodes.push(Some(net.leaf(&mut graph, i + 1, v)?));
        }
        Ok(NeuralScorer {
            net,
            graph,
            exprs: vec![None; nodes.len()],
            nodes,
            keep_scores: true,
        })
    }

    pub fn graph(&self) -> &Graph<'a> {
        &self.graph
    }

    pub fn graph_mut(&mut self) -> &mut Graph<'a> {
        &mut self.graph
    }

    pub fn into_graph(self) -> Graph<'a> {
        self.graph
    }

    pub fn node(&self, id: usize) -> Option<&NodeState> {
        self.nodes.get(id).and_then(Option::as_ref)
    }

    /// Expression for the current score of an action.
    pub fn score_expr(&mut self, action: &Action) -> Result<NodeId> {
        let (u, l) = self
            .exprs
            .get(action.left)
            .copied()
            .flatten()
            .ok_or_else(|| Error::InvalidAction(format!("pair at {} was never scored", action.left)))?;
        let labels = self.net.num_labels();
        let us = self.graph.pick(u, action.dir.index())?;
        let ls = self.graph.pick(l, ScoreTable::index(action.dir, action.label, labels))?;
        Ok(self.graph.add(us, ls)?)
    }

    /// Reduced encoding of a pending item as if attached with `label`.
    pub fn finalize(&mut self, id: usize, label: usize) -> Result<NodeId> {
        let node = self.nodes[id]
            .as_ref()
            .ok_or_else(|| Error::InvalidAction(format!("word {id} is not pending")))?;
        self.net.finalize_modifier(&mut self.graph, node, label)
    }
}

impl Scorer for NeuralScorer<'_> {
    fn num_labels(&self) -> usize {
        self.net.num_labels()
    }

    fn window(&self) -> usize {
        self.net.config().window
    }

    fn score(&mut self, pend: &Pending, left: usize) -> Result<ScoreTable> {
        let cells = pend.window(left, self.window());
        let slots: Vec<Slot> = cells
            .iter()
            .map(|c| match *c {
                Cell::Word(w) => Slot::Item(self.nodes[w].as_ref().expect("pending word has a state")),
                Cell::PadLeft => Slot::PadLeft,
                Cell::PadRight => Slot::PadRight,
            })
            .collect();
        let mark = self.graph.len();
        let (u, l) = self.net.score_window(&mut self.graph, &slots)?;
        let uv = self.graph.value(u);
        let table = ScoreTable::new([uv[0], uv[1]], self.graph.value(l).to_vec());
        if self.keep_scores {
            self.exprs[left] = Some((u, l));
        } else {
            self.graph.truncate(mark);
        }
        Ok(table)
    }

    fn apply(&mut self, _pend: &Pending, action: &Action) -> Result<()> {
        let (h, m) = (action.head(), action.modifier());
        let modifier = self.nodes[m]
            .take()
            .ok_or_else(|| Error::InvalidAction(format!("word {m} is not pending")))?;
        let enc = self.net.finalize_modifier(&mut self.graph, &modifier, action.label)?;
        let head = self.nodes[h]
            .as_ref()
            .ok_or_else(|| Error::InvalidAction(format!("word {h} is not pending")))?;
        let updated = self.net.attach(&mut self.graph, head, m, enc, action.dir)?;
        self.nodes[h] = Some(updated);
        self.exprs[m] = None;
        Ok(())
    }
}
