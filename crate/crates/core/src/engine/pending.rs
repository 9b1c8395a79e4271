/// One position of a scoring window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cell {
    Word(usize),
    PadLeft,
    PadRight,
}

/// The pending list as a doubly linked list over word ids `1..=n`.
#[derive(Clone, Debug)]
pub struct Pending {
    prev: Vec<usize>,
    next: Vec<usize>,
    alive: Vec<bool>,
    first: usize,
    len: usize,
}

impl Pending {
    pub fn new(n: usize) -> Self {
        let mut prev = vec![0; n + 2];
        let mut next = vec![0; n + 2];
        for i in 1..=n {
            prev[i] = i - 1;
            next[i] = if i < n { i + 1 } else { 0 };
        }
        let mut alive = vec![true; n + 1];
        alive[0] = false;
        Pending {
            prev,
            next,
            alive,
            first: if n > 0 { 1 } else { 0 },
            len: n,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Sentence length the list was built for.
    pub fn sentence_len(&self) -> usize {
        self.alive.len() - 1
    }

    pub fn first(&self) -> Option<usize> {
        (self.first != 0).then_some(self.first)
    }

    pub fn contains(&self, id: usize) -> bool {
        self.alive.get(id).copied().unwrap_or(false)
    }

    pub fn next(&self, id: usize) -> Option<usize> {
        debug_assert!(self.contains(id));
        let n = self.next[id];
        (n != 0).then_some(n)
    }

    pub fn prev(&self, id: usize) -> Option<usize> {
        debug_assert!(self.contains(id));
        let p = self.prev[id];
        (p != 0).then_some(p)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(self.first(), move |&id| self.next(id))
    }

    pub fn remove(&mut self, id: usize) {
        assert!(self.contains(id), "word {id} is not pending");
        let (p, n) = (self.prev[id], self.next[id]);
        if p != 0 {
            self.next[p] = n;
        } else {
            self.first = n;
        }
        if n != 0 {
            self.prev[n] = p;
        }
        self.alive[id] = false;
        self.len -= 1;
    }

    /// The `2k+2` cells around the pair starting at `left`: `k` before it, the
    /// pair, `k` after it.
    pub fn window(&self, left: usize, k: usize) -> Vec<Cell> {
        let mut before = Vec::with_capacity(k);
        let mut cur = Some(left);
        for _ in 0..k {
            cur = cur.and_then(|c| self.prev(c));
            before.push(cur.map_or(Cell::PadLeft, Cell::Word));
        }
        before.reverse();
        let mut cells = before;
        cells.push(Cell::Word(left));
        let mut cur = Some(left);
        for _ in 0..=k {
            cur = cur.and_then(|c| self.next(c));
            cells.push(cur.map_or(Cell::PadRight, Cell::Word));
        }
        cells
    }
}
