use thiserror::Error;

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("head of word {0} is out of range")]
    OutOfRange(usize),
    #[error("word {0} is its own head")]
    SelfLoop(usize),
    #[error("expected exactly one root, found {0}")]
    RootCount(usize),
    #[error("word {0} is on a cycle")]
    Cycle(usize),
}

/// Checks that `heads` (1-based words, 0 = root) describes a single-rooted tree.
pub fn check_tree(heads: &[usize]) -> Result<(), TreeError> {
    let n = heads.len();
    for (i, &h) in heads.iter().enumerate() {
        if h > n {
            return Err(TreeError::OutOfRange(i + 1));
        }
        if h == i + 1 {
            return Err(TreeError::SelfLoop(i + 1));
        }
    }
    let roots = heads.iter().filter(|&&h| h == 0).count();
    if roots != 1 {
        return Err(TreeError::RootCount(roots));
    }
    // 0 = unvisited, 1 = on current path, 2 = reaches root
    let mut state = vec![0u8; n + 1];
    state[0] = 2;
    for start in 1..=n {
        let mut path = Vec::new();
        let mut w = start;
        while state[w] == 0 {
            state[w] = 1;
            path.push(w);
            w = heads[w - 1];
        }
        if state[w] == 1 {
            return Err(TreeError::Cycle(w));
        }
        for p in path {
            state[p] = 2;
        }
    }
    Ok(())
}

/// True iff no arcs cross: every word strictly between a head and its
/// modifier is headed inside that span.
pub fn is_projective(heads: &[usize]) -> bool {
    for (i, &h) in heads.iter().enumerate() {
        let m = i + 1;
        let (lo, hi) = (h.min(m), h.max(m));
        for w in lo + 1..hi {
            let hw = heads[w - 1];
            if hw < lo || hw > hi {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Arcs as (head, modifier) pairs to a head vector.
    fn heads(n: usize, arcs: &[(usize, usize)]) -> Vec<usize> {
        let mut h = vec![usize::MAX; n];
        for &(head, m) in arcs {
            h[m - 1] = head;
        }
        h
    }

    #[test]
    fn nested_arcs_are_projective() {
        assert!(is_projective(&heads(3, &[(2, 1), (0, 2), (2, 3)])));
    }

    #[test]
    fn crossing_arc_detected() {
        let h = heads(4, &[(3, 1), (0, 3), (1, 4), (3, 2)]);
        assert!(check_tree(&h).is_ok());
        assert!(!is_projective(&h));
    }

    #[test]
    fn single_word() {
        assert!(is_projective(&[0]));
        assert!(check_tree(&[0]).is_ok());
    }

    #[test]
    fn tree_errors() {
        assert_eq!(check_tree(&[0, 0]), Err(TreeError::RootCount(2)));
        assert_eq!(check_tree(&[2, 1, 0]).unwrap_err(), TreeError::Cycle(1));
        assert_eq!(check_tree(&[0, 4]), Err(TreeError::OutOfRange(2)));
        assert_eq!(check_tree(&[1]), Err(TreeError::SelfLoop(1)));
    }
}
