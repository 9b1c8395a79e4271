//! Word vectors and hierarchical tree-LSTM subtree encodings.
//!
//! A subtree headed by word `i` is encoded by two LSTMs that both start from
//! the head's word vector `v_i`: the left one then reads the encodings of the
//! left modifiers from the head outward, the right one does the same for the
//! right modifiers. The pair of final states is the item representation `c`;
//! once the subtree is attached with relation `ℓ` it is reduced to
//! `enc = tanh(W^e (e_l ∘ e_r ∘ ℓ) + b^e)` and fed to its parent's LSTM.

mod network;

pub use network::{Network, VocabSizes};

use crate::nn::{LstmState, NodeId};

/// One pending subtree during parsing.
#[derive(Clone, Debug)]
pub struct NodeState {
    /// 1-based sentence index of the head word.
    pub head: usize,
    /// Head word vector `v_i`.
    pub word: NodeId,
    /// Left and right tree-LSTM states; absent for the head-word-only baseline.
    pub left: Option<LstmState>,
    pub right: Option<LstmState>,
    /// Attached modifiers, closest to the head first.
    pub left_mods: Vec<usize>,
    pub right_mods: Vec<usize>,
}

/// One slot of the scoring window.
#[derive(Clone, Copy, Debug)]
pub enum Slot<'a> {
    Item(&'a NodeState),
    /// Before the first pending item.
    PadLeft,
    /// After the last pending item.
    PadRight,
}
