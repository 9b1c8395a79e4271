use std::collections::HashMap;

use crate::corpus::check_tree;
use crate::engine::{Action, Pending};
use crate::error::{Error, Result};

/// Gold tree plus the per-word count of gold modifiers not yet attached.
#[derive(Clone, Debug)]
pub struct OracleState {
    heads: Vec<usize>,
    labels: Vec<usize>,
    unassigned: Vec<usize>,
    pending: Vec<bool>,
}

impl OracleState {
    /// `heads[i]`, `labels[i]` describe word `i+1`.
    pub fn new(heads: &[usize], labels: &[usize]) -> Result<Self> {
        check_tree(heads)?;
        if labels.len() != heads.len() {
            return Err(Error::Training(format!(
                "{} heads but {} labels",
                heads.len(),
                labels.len()
            )));
        }
        let mut unassigned = vec![0; heads.len() + 1];
        for &h in heads {
            unassigned[h] += 1;
        }
        let mut pending = vec![true; heads.len() + 1];
        pending[0] = false;
        Ok(OracleState {
            heads: heads.to_vec(),
            labels: labels.to_vec(),
            unassigned,
            pending,
        })
    }

    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    pub fn gold_head(&self, w: usize) -> usize {
        self.heads[w - 1]
    }

    pub fn gold_label(&self, w: usize) -> usize {
        self.labels[w - 1]
    }

    pub fn unassigned(&self, w: usize) -> usize {
        self.unassigned[w]
    }

    /// No gold modifier of `w` is still waiting to be attached.
    pub fn is_complete(&self, w: usize) -> bool {
        self.unassigned[w] == 0
    }

    pub fn is_pending(&self, w: usize) -> bool {
        self.pending[w]
    }

    /// Whether `action` creates exactly the gold arc of its modifier.
    pub fn is_gold_arc(&self, action: &Action) -> bool {
        let m = action.modifier();
        self.gold_head(m) == action.head() && self.gold_label(m) == action.label
    }

    /// The modifier's own gold arc can no longer be built.
    fn arc_lost(&self, m: usize) -> bool {
        let h = self.gold_head(m);
        h != 0 && !self.pending[h]
    }

    /// Membership in the set of correct actions.
    ///
    /// With `dynamic` off only gold arcs over complete modifiers count. With
    /// it on, a complete modifier whose gold head is already gone may go
    /// anywhere, since its arc is lost either way.
    pub fn is_correct(&self, action: &Action, dynamic: bool) -> bool {
        let m = action.modifier();
        if !self.is_complete(m) {
            return false;
        }
        self.is_gold_arc(action) || (dynamic && self.arc_lost(m))
    }

    /// Arc errors `action` adds beyond the best still reachable.
    pub fn cost(&self, action: &Action) -> usize {
        let m = action.modifier();
        let own = usize::from(!self.is_gold_arc(action) && !self.arc_lost(m));
        own + self.unassigned[m]
    }

    pub fn apply(&mut self, action: &Action) {
        let m = action.modifier();
        let parent = self.gold_head(m);
        debug_assert!(self.unassigned[parent] > 0);
        self.unassigned[parent] -= 1;
        self.pending[m] = false;
    }
}

/// Fewest arc errors (wrong head, or right head with wrong label) any
/// continuation from `pend` can end with, on top of the errors already made.
/// Exhaustive search; only for short sentences.
pub fn oracle_cost(pend: &Pending, gold_heads: &[usize]) -> Result<usize> {
    const LIMIT: usize = 20;
    let n = pend.sentence_len();
    if n > LIMIT {
        return Err(Error::Training(format!("oracle_cost limited to {LIMIT} words, got {n}")));
    }
    let items: Vec<usize> = pend.iter().collect();
    let mask = items.iter().fold(0u32, |m, &w| m | 1 << w);
    let mut memo = HashMap::new();
    Ok(search(mask, gold_heads, &mut memo))
}

/// Cost of taking `action` from `pend`: its own error plus the best completion.
pub fn oracle_cost_after(pend: &Pending, gold_heads: &[usize], gold_labels: &[usize], action: &Action) -> Result<usize> {
    let m = action.modifier();
    let own = usize::from(gold_heads[m - 1] != action.head() || gold_labels[m - 1] != action.label);
    let mut next = pend.clone();
    next.remove(m);
    Ok(own + oracle_cost(&next, gold_heads)?)
}

fn search(mask: u32, heads: &[usize], memo: &mut HashMap<u32, usize>) -> usize {
    if mask.count_ones() == 1 {
        let w = mask.trailing_zeros() as usize;
        return usize::from(heads[w - 1] != 0);
    }
    if let Some(&c) = memo.get(&mask) {
        return c;
    }
    let items: Vec<usize> = (1..=heads.len()).filter(|w| mask & (1 << w) != 0).collect();
    let mut best = usize::MAX;
    for pair in items.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        for (h, m) in [(b, a), (a, b)] {
            let c = usize::from(heads[m - 1] != h) + search(mask & !(1 << m), heads, memo);
            best = best.min(c);
        }
    }
    memo.insert(mask, best);
    best
}
