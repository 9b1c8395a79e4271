use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{compare_actions, Action};

/// How the best pending action is located.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SelectMode {
    /// Max-heap of per-pair bests with stale entries skipped on pop.
    #[default]
    Lazy,
    /// Linear scan over all pairs; the reference implementation.
    Rescan,
}

#[derive(Clone, Debug)]
struct Entry {
    action: Action,
    version: u32,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        compare_actions(&self.action, &other.action).then(self.version.cmp(&other.version))
    }
}

/// Best action per left item, with global argmax.
#[derive(Clone, Debug)]
pub(crate) struct Selector {
    mode: SelectMode,
    best: Vec<Option<Action>>,
    version: Vec<u32>,
    heap: BinaryHeap<Entry>,
}

impl Selector {
    pub fn new(mode: SelectMode, n: usize) -> Self {
        Selector {
            mode,
            best: vec![None; n + 1],
            version: vec![0; n + 1],
            heap: BinaryHeap::new(),
        }
    }

    pub fn update(&mut self, action: Action) {
        let left = action.left;
        self.best[left] = Some(action);
        self.version[left] += 1;
        if self.mode == SelectMode::Lazy {
            self.heap.push(Entry {
                action,
                version: self.version[left],
            });
        }
    }

    pub fn remove(&mut self, left: usize) {
        self.best[left] = None;
        self.version[left] += 1;
    }

    pub fn select(&mut self) -> Option<Action> {
        match self.mode {
            SelectMode::Lazy => {
                while let Some(top) = self.heap.peek() {
                    let left = top.action.left;
                    if top.version == self.version[left] && self.best[left].is_some() {
                        return Some(top.action);
                    }
                    self.heap.pop();
                }
                None
            }
            SelectMode::Rescan => self
                .best
                .iter()
                .flatten()
                .copied()
                .max_by(compare_actions),
        }
    }
}
