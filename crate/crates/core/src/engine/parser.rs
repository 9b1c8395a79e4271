use super::select::Selector;
use super::{Action, Dir, Pending, ScoreTable, Scorer, SelectMode};
use crate::error::{Error, Result};

/// Heads and labels of a finished parse (index `i` holds word `i+1`), plus the
/// actions in the order they were taken.
#[derive(Clone, Debug, PartialEq)]
pub struct ParseOutput {
    pub heads: Vec<usize>,
    pub labels: Vec<usize>,
    pub actions: Vec<Action>,
}

/// A parse in progress.
pub struct Parser<S> {
    pend: Pending,
    scorer: S,
    tables: Vec<Option<ScoreTable>>,
    selector: Selector,
    heads: Vec<usize>,
    labels: Vec<usize>,
    actions: Vec<Action>,
}

impl<S: Scorer> Parser<S> {
    /// Scores every adjacent pair of a fresh `n`-word pending list.
    pub fn new(n: usize, scorer: S, mode: SelectMode) -> Result<Self> {
        let mut p = Parser {
            pend: Pending::new(n),
            scorer,
            tables: vec![None; n + 1],
            selector: Selector::new(mode, n),
            heads: vec![0; n],
            labels: vec![0; n],
            actions: Vec::with_capacity(n.saturating_sub(1)),
        };
        for left in 1..n {
            p.rescore(left)?;
        }
        Ok(p)
    }

    pub fn pending(&self) -> &Pending {
        &self.pend
    }

    pub fn scorer(&self) -> &S {
        &self.scorer
    }

    pub fn scorer_mut(&mut self) -> &mut S {
        &mut self.scorer
    }

    pub fn into_scorer(self) -> S {
        self.scorer
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn is_done(&self) -> bool {
        self.pend.len() <= 1
    }

    /// Current scores of the pair starting at `left`.
    pub fn table(&self, left: usize) -> Option<&ScoreTable> {
        self.tables.get(left).and_then(Option::as_ref)
    }

    /// Every currently available action with its score.
    pub fn candidates(&self) -> impl Iterator<Item = Action> + '_ {
        self.pend.iter().filter_map(move |left| {
            let right = self.pend.next(left)?;
            let table = self.table(left)?;
            Some(Dir::BOTH.into_iter().flat_map(move |dir| {
                (0..table.num_labels()).map(move |label| Action {
                    left,
                    right,
                    dir,
                    label,
                    score: table.score(dir, label),
                })
            }))
        })
        .flatten()
    }

    /// The highest-scoring action, if any pair remains.
    pub fn best(&mut self) -> Option<Action> {
        self.selector.select()
    }

    fn rescore(&mut self, left: usize) -> Result<()> {
        match self.pend.next(left) {
            Some(right) => {
                let table = self.scorer.score(&self.pend, left)?;
                if table.num_labels() != self.scorer.num_labels() {
                    return Err(Error::InvalidAction(format!(
                        "scorer returned {} labels, expected {}",
                        table.num_labels(),
                        self.scorer.num_labels()
                    )));
                }
                let (dir, label, score) = table.best();
                self.selector.update(Action {
                    left,
                    right,
                    dir,
                    label,
                    score,
                });
                self.tables[left] = Some(table);
            }
            None => {
                self.selector.remove(left);
                self.tables[left] = None;
            }
        }
        Ok(())
    }

    /// Applies any valid action, not necessarily the best one.
    pub fn apply(&mut self, action: Action) -> Result<()> {
        if !self.pend.contains(action.left) || self.pend.next(action.left) != Some(action.right) {
            return Err(Error::InvalidAction(format!(
                "({}, {}) is not an adjacent pending pair",
                action.left, action.right
            )));
        }
        if action.label >= self.scorer.num_labels() {
            return Err(Error::InvalidId {
                what: "label",
                id: action.label,
                size: self.scorer.num_labels(),
            });
        }
        self.scorer.apply(&self.pend, &action)?;
        let (head, modifier) = (action.head(), action.modifier());
        self.heads[modifier - 1] = head;
        self.labels[modifier - 1] = action.label;
        self.pend.remove(modifier);
        self.selector.remove(modifier);
        self.tables[modifier] = None;
        self.actions.push(action);

        // Only windows that contain the head moved or changed.
        let k = self.scorer.window();
        let mut start = head;
        for _ in 0..=k {
            match self.pend.prev(start) {
                Some(p) => start = p,
                None => break,
            }
        }
        let mut cur = Some(start);
        while let Some(id) = cur {
            self.rescore(id)?;
            if id == head {
                break;
            }
            cur = self.pend.next(id);
        }
        let mut cur = self.pend.next(head);
        for _ in 0..k {
            let Some(id) = cur else { break };
            self.rescore(id)?;
            cur = self.pend.next(id);
        }
        Ok(())
    }

    /// Takes the best action; `None` once a single item remains.
    pub fn step(&mut self) -> Result<Option<Action>> {
        match self.best() {
            Some(a) => {
                self.apply(a)?;
                Ok(Some(a))
            }
            None => Ok(None),
        }
    }

    /// Runs to completion and attaches the survivor to the root.
    pub fn finish(mut self, root_label: usize) -> Result<ParseOutput> {
        while self.step()?.is_some() {}
        if let Some(root) = self.pend.first() {
            self.heads[root - 1] = 0;
            self.labels[root - 1] = root_label;
        }
        Ok(ParseOutput {
            heads: self.heads,
            labels: self.labels,
            actions: self.actions,
        })
    }
}

/// Greedy easy-first parse of an `n`-word sentence.
pub fn parse<S: Scorer>(n: usize, scorer: S, mode: SelectMode, root_label: usize) -> Result<ParseOutput> {
    Parser::new(n, scorer, mode)?.finish(root_label)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::corpus::{check_tree, is_projective};
    use crate::engine::Cell;

    /// Scores are a pseudo-random function of the window contents and of how
    /// many modifiers each item has collected.
    struct HashScorer {
        labels: usize,
        k: usize,
        mods: Vec<u64>,
        salt: u64,
    }

    impl HashScorer {
        fn new(n: usize, labels: usize, k: usize, salt: u64) -> Self {
            HashScorer {
                labels,
                k,
                mods: vec![0; n + 1],
                salt,
            }
        }
    }

    fn mix(mut h: u64, v: u64) -> u64 {
        h ^= v.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
        h.wrapping_mul(0xff51_afd7_ed55_8ccd)
    }

    impl Scorer for HashScorer {
        fn num_labels(&self) -> usize {
            self.labels
        }
        fn window(&self) -> usize {
            self.k
        }
        fn score(&mut self, pend: &Pending, left: usize) -> Result<ScoreTable> {
            let mut h = self.salt;
            for c in pend.window(left, self.k) {
                h = match c {
                    Cell::Word(w) => mix(mix(h, w as u64), self.mods[w]),
                    Cell::PadLeft => mix(h, 1 << 40),
                    Cell::PadRight => mix(h, 1 << 41),
                };
            }
            let mut rng = ChaCha8Rng::seed_from_u64(h);
            // small integer grid so exact ties are common
            let mut draw = || rng.gen_range(0..4) as f64;
            Ok(ScoreTable::new([draw(), draw()], (0..2 * self.labels).map(|_| draw()).collect()))
        }
        fn apply(&mut self, _pend: &Pending, action: &Action) -> Result<()> {
            self.mods[action.head()] = mix(self.mods[action.head()], action.modifier() as u64);
            Ok(())
        }
    }

    #[test]
    fn single_word() {
        let out = parse(1, HashScorer::new(1, 3, 2, 0), SelectMode::Lazy, 2).unwrap();
        assert_eq!(out.heads, vec![0]);
        assert_eq!(out.labels, vec![2]);
        assert!(out.actions.is_empty());
    }

    #[test]
    fn random_parses_are_projective_trees() {
        for seed in 0..300 {
            let n = 1 + seed as usize % 10;
            let out = parse(n, HashScorer::new(n, 3, 2, seed), SelectMode::Lazy, 0).unwrap();
            check_tree(&out.heads).unwrap();
            assert!(is_projective(&out.heads));
            assert_eq!(out.actions.len(), n - 1);
        }
    }

    #[test]
    fn lazy_and_rescan_agree() {
        for seed in 0..200 {
            let n = 2 + seed as usize % 30;
            let k = seed as usize % 3;
            let a = parse(n, HashScorer::new(n, 2, k, seed), SelectMode::Lazy, 0).unwrap();
            let b = parse(n, HashScorer::new(n, 2, k, seed), SelectMode::Rescan, 0).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn incremental_scores_match_fresh_scores() {
        // After every step, every cached table equals a recomputation.
        let n = 20;
        let mut p = Parser::new(n, HashScorer::new(n, 2, 2, 9), SelectMode::Lazy).unwrap();
        while p.step().unwrap().is_some() {
            let lefts: Vec<usize> = p.pending().iter().collect();
            for left in lefts {
                let cached = p.table(left).cloned();
                let pend = p.pend.clone();
                let fresh = p.next_is_some(left).then(|| p.scorer.score(&pend, left).unwrap());
                assert_eq!(cached, fresh);
            }
        }
    }

    impl<S: Scorer> Parser<S> {
        fn next_is_some(&self, left: usize) -> bool {
            self.pend.next(left).is_some()
        }
    }

    #[test]
    fn apply_rejects_non_adjacent() {
        let mut p = Parser::new(4, HashScorer::new(4, 2, 1, 0), SelectMode::Lazy).unwrap();
        let bad = Action {
            left: 1,
            right: 3,
            dir: Dir::Left,
            label: 0,
            score: 0.0,
        };
        assert!(p.apply(bad).is_err());
        let bad_label = Action {
            right: 2,
            label: 7,
            ..bad
        };
        assert!(p.apply(bad_label).is_err());
    }

    #[test]
    fn right_attachment_records_arc() {
        let mut p = Parser::new(3, HashScorer::new(3, 2, 1, 0), SelectMode::Lazy).unwrap();
        p.apply(Action {
            left: 2,
            right: 3,
            dir: Dir::Right,
            label: 1,
            score: 0.0,
        })
        .unwrap();
        assert_eq!(p.pending().iter().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(p.candidates().count(), 4);
        let out = p.finish(0).unwrap();
        assert_eq!(out.heads[2], 2);
        assert_eq!(out.labels[2], 1);
    }
}
