//! Easy-first parsing: repeatedly attach the highest-scoring adjacent pair of
//! pending subtrees until one remains.

mod neural;
mod parser;
mod pending;
mod select;

pub use neural::NeuralScorer;
pub use parser::{parse, ParseOutput, Parser};
pub use pending::{Cell, Pending};
pub use select::SelectMode;

use std::cmp::Ordering;

use crate::error::Result;

/// Which item of the pair becomes the modifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    /// `pend[i]` becomes a left modifier of `pend[i+1]`.
    Left,
    /// `pend[i+1]` becomes a right modifier of `pend[i]`.
    Right,
}

impl Dir {
    pub const BOTH: [Dir; 2] = [Dir::Left, Dir::Right];

    pub fn index(self) -> usize {
        match self {
            Dir::Left => 0,
            Dir::Right => 1,
        }
    }
}

/// Attach one of the adjacent items `left`, `right` (word ids) to the other.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Action {
    pub left: usize,
    pub right: usize,
    pub dir: Dir,
    pub label: usize,
    pub score: f64,
}

impl Action {
    pub fn head(&self) -> usize {
        match self.dir {
            Dir::Left => self.right,
            Dir::Right => self.left,
        }
    }

    pub fn modifier(&self) -> usize {
        match self.dir {
            Dir::Left => self.left,
            Dir::Right => self.right,
        }
    }
}

/// Scores of one adjacent pair: two unlabeled and `2L` labeled entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreTable {
    pub unlabeled: [f64; 2],
    pub labeled: Vec<f64>,
}

impl ScoreTable {
    pub fn new(unlabeled: [f64; 2], labeled: Vec<f64>) -> Self {
        assert!(labeled.len().is_multiple_of(2), "labeled scores come in two halves");
        ScoreTable { unlabeled, labeled }
    }

    pub fn zeros(num_labels: usize) -> Self {
        ScoreTable::new([0.0; 2], vec![0.0; 2 * num_labels])
    }

    pub fn num_labels(&self) -> usize {
        self.labeled.len() / 2
    }

    /// Position of `(dir, label)` in the labeled output.
    pub fn index(dir: Dir, label: usize, num_labels: usize) -> usize {
        dir.index() * num_labels + label
    }

    pub fn score(&self, dir: Dir, label: usize) -> f64 {
        self.unlabeled[dir.index()] + self.labeled[Self::index(dir, label, self.num_labels())]
    }

    /// Best `(dir, label, score)`, ties to `Left` then to the lower label.
    pub fn best(&self) -> (Dir, usize, f64) {
        let mut best = (Dir::Left, 0, f64::NEG_INFINITY);
        let mut first = true;
        for dir in Dir::BOTH {
            for label in 0..self.num_labels() {
                let s = self.score(dir, label);
                if first || s.total_cmp(&best.2) == Ordering::Greater {
                    best = (dir, label, s);
                    first = false;
                }
            }
        }
        best
    }
}

/// Candidate ordering used everywhere: higher score, then lower left id,
/// then `Left` before `Right`, then lower label. `Greater` means preferred.
pub fn compare_actions(a: &Action, b: &Action) -> Ordering {
    a.score
        .total_cmp(&b.score)
        .then(b.left.cmp(&a.left))
        .then(b.dir.cmp(&a.dir))
        .then(b.label.cmp(&a.label))
}

/// Source of pair scores for the parser.
pub trait Scorer {
    fn num_labels(&self) -> usize;

    /// Items on each side of the pair that a score may depend on.
    fn window(&self) -> usize;

    /// Scores the pair starting at pending item `left`.
    fn score(&mut self, pend: &Pending, left: usize) -> Result<ScoreTable>;

    /// Called before the modifier leaves `pend`.
    fn apply(&mut self, pend: &Pending, action: &Action) -> Result<()>;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_scores_tie_break() {
        let t = ScoreTable::zeros(3);
        assert_eq!(t.best(), (Dir::Left, 0, 0.0));
        assert_eq!(t.labeled.len(), 6);
    }

    #[test]
    fn index_mapping() {
        assert_eq!(ScoreTable::index(Dir::Left, 2, 5), 2);
        assert_eq!(ScoreTable::index(Dir::Right, 0, 5), 5);
        assert_eq!(ScoreTable::index(Dir::Right, 4, 5), 9);
    }

    #[test]
    fn best_is_brute_force_argmax() {
        let t = ScoreTable::new([0.5, -0.25], vec![0.1, 0.3, 0.2, 0.7, 0.0, -1.0]);
        // left: 0.6 0.8 0.7, right: 0.45 -0.25 -1.25
        assert_eq!(t.best(), (Dir::Left, 1, 0.8));
    }

    #[test]
    fn unlabeled_shift_keeps_label_argmax() {
        let base = ScoreTable::new([0.0, 0.0], vec![0.1, 0.9, 0.4, 0.2]);
        let shifted = ScoreTable::new([3.0, 3.0], base.labeled.clone());
        let (d0, l0, s0) = base.best();
        let (d1, l1, s1) = shifted.best();
        assert_eq!((d0, l0), (d1, l1));
        assert_eq!(s1 - s0, 3.0);
    }

    #[test]
    fn action_roles() {
        let a = Action {
            left: 2,
            right: 5,
            dir: Dir::Left,
            label: 0,
            score: 0.0,
        };
        assert_eq!((a.head(), a.modifier()), (5, 2));
        let b = Action { dir: Dir::Right, ..a };
        assert_eq!((b.head(), b.modifier()), (2, 5));
    }

    #[test]
    fn ordering_prefers_score_then_position() {
        let a = Action {
            left: 3,
            right: 4,
            dir: Dir::Right,
            label: 1,
            score: 1.0,
        };
        let lower_left = Action { left: 1, right: 2, ..a };
        assert_eq!(compare_actions(&lower_left, &a), Ordering::Greater);
        let left_dir = Action { dir: Dir::Left, ..a };
        assert_eq!(compare_actions(&left_dir, &a), Ordering::Greater);
        let higher = Action { score: 1.5, left: 9, ..a };
        assert_eq!(compare_actions(&higher, &lower_left), Ordering::Greater);
    }
}
