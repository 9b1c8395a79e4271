//! Synthetic projective treebank from a small template grammar.
//!
//! Prepositional phrases after an object are the interesting part: whether
//! one attaches to the verb or to the preceding noun depends only on the
//! class of a compound modifier deep inside it, so a parser has to look into
//! the phrase.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Arc, Sentence, Token};

const DETERMINERS: [&str; 6] = ["the", "a", "this", "that", "every", "some"];
const NUMBERS: [&str; 8] = ["two", "three", "four", "five", "six", "ten", "twelve", "many"];
const ADVERBS: [&str; 12] = [
    "quickly", "slowly", "often", "rarely", "quietly", "happily", "again", "soon", "loudly", "gently", "early",
    "late",
];
const PREPOSITIONS: [&str; 6] = ["with", "near", "behind", "under", "beside", "without"];
const PRONOUNS: [&str; 6] = ["she", "he", "they", "we", "it", "someone"];
const CONJUNCTIONS: [&str; 2] = ["and", "or"];
const ADJECTIVES: [&str; 24] = [
    "old", "young", "red", "green", "small", "large", "bright", "dark", "heavy", "light", "quiet", "noisy", "happy",
    "sad", "tall", "short", "new", "broken", "clean", "dirty", "warm", "cold", "strange", "famous",
];
const VERBS: [&str; 30] = [
    "saw", "watched", "found", "lost", "cleaned", "painted", "moved", "carried", "opened", "closed", "fixed", "broke",
    "bought", "sold", "pushed", "pulled", "washed", "cut", "hit", "touched", "covered", "lifted", "dropped", "held",
    "chased", "followed", "drew", "measured", "hid", "kept",
];
/// Nouns whose phrases modify the verb.
const TOOLS: [&str; 30] = [
    "telescope", "hammer", "brush", "knife", "rope", "camera", "spoon", "stick", "shovel", "ladder", "cart", "truck",
    "broom", "needle", "saw", "wrench", "net", "hook", "pencil", "crayon", "magnet", "lever", "pump", "drill", "axe",
    "scissors", "glove", "towel", "sponge", "tongs",
];
/// Nouns whose phrases modify the preceding noun.
const PARTS: [&str; 30] = [
    "hat", "stripe", "handle", "label", "window", "tail", "roof", "button", "pocket", "collar", "wheel", "lid", "door",
    "spot", "ribbon", "badge", "bell", "scar", "patch", "sticker", "fringe", "beard", "mask", "cape", "scarf", "belt",
    "strap", "zipper", "hood", "feather",
];
/// Heads of compounds inside prepositional phrases.
const MEASURES: [&str; 10] = ["set", "kind", "piece", "pair", "sort", "bunch", "pile", "row", "heap", "batch"];
const NOUNS: [&str; 40] = [
    "man", "woman", "dog", "cat", "child", "teacher", "farmer", "doctor", "bird", "horse", "box", "table", "chair",
    "car", "house", "garden", "door", "ball", "book", "lamp", "boat", "fence", "bottle", "bag", "cup", "plate",
    "painter", "sailor", "baker", "king", "queen", "robot", "monkey", "bear", "tree", "wall", "bike", "kite", "drum",
    "statue",
];

/// One subtree during generation.
struct Node {
    form: &'static str,
    tag: &'static str,
    /// Children in surface order.
    left: Vec<(Node, &'static str)>,
    right: Vec<(Node, &'static str)>,
}

impl Node {
    fn new(form: &'static str, tag: &'static str) -> Self {
        Node {
            form,
            tag,
            left: Vec::new(),
            right: Vec::new(),
        }
    }

    /// Appends the subtree in surface order; returns the head's position.
    fn linearize(self, head: usize, label: &'static str, out: &mut Vec<(&'static str, &'static str, usize, &'static str)>) -> usize {
        let mut lefts = Vec::new();
        for (child, l) in self.left {
            lefts.push(child.linearize(usize::MAX, l, out));
        }
        let me = out.len() + 1;
        out.push((self.form, self.tag, head, label));
        for p in lefts {
            fix_head(out, p, me);
        }
        for (child, l) in self.right {
            child.linearize(me, l, out);
        }
        me
    }
}

fn fix_head(out: &mut [(&'static str, &'static str, usize, &'static str)], pos: usize, head: usize) {
    out[pos - 1].2 = head;
}

struct Generator {
    rng: ChaCha8Rng,
}

impl Generator {
    fn pick(&mut self, words: &[&'static str]) -> &'static str {
        words.choose(&mut self.rng).unwrap()
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn noun_phrase(&mut self, lexicon: &[&'static str]) -> Node {
        let plural = self.chance(0.2);
        let form = self.pick(lexicon);
        let mut n = Node::new(form, if plural { "NNS" } else { "NN" });
        if !plural || self.chance(0.3) {
            n.left.push((Node::new(self.pick(&DETERMINERS), "DT"), "det"));
        }
        if plural && self.chance(0.5) {
            n.left.push((Node::new(self.pick(&NUMBERS), "CD"), "nummod"));
        }
        for _ in 0..2 {
            if !self.chance(0.2) {
                break;
            }
            n.left.push((Node::new(self.pick(&ADJECTIVES), "JJ"), "amod"));
        }
        n
    }

    /// "the <class noun> <measure>": the deciding noun sits inside a compound
    /// behind a determiner.
    fn class_phrase(&mut self, lexicon: &[&'static str]) -> Node {
        let mut np = self.noun_phrase(&MEASURES);
        if np.left.first().map(|c| c.1) != Some("det") {
            np.left.insert(0, (Node::new(self.pick(&DETERMINERS), "DT"), "det"));
        }
        np.left.push((Node::new(self.pick(lexicon), "NN"), "compound"));
        np
    }

    /// A phrase whose noun may carry `depth` more part-of phrases.
    fn prep_phrase(&mut self, lexicon: &[&'static str], depth: usize) -> Node {
        let mut p = Node::new(self.pick(&PREPOSITIONS), "IN");
        let mut np = self.class_phrase(lexicon);
        self.attach_parts(&mut np, depth);
        p.right.push((np, "pobj"));
        p
    }

    fn attach_parts(&mut self, np: &mut Node, depth: usize) {
        if depth > 0 {
            let pp = self.prep_phrase(&PARTS, depth - 1);
            np.right.push((pp, "prep"));
        }
    }

    fn coordinate(&mut self, np: &mut Node) {
        if self.chance(0.12) {
            np.right.push((Node::new(self.pick(&CONJUNCTIONS), "CC"), "cc"));
            let conj = self.noun_phrase(&NOUNS);
            np.right.push((conj, "conj"));
        }
    }

    fn sentence(&mut self) -> Node {
        let mut verb = Node::new(self.pick(&VERBS), "VBD");
        let subject = if self.chance(0.25) {
            Node::new(self.pick(&PRONOUNS), "PRP")
        } else {
            let mut np = self.noun_phrase(&NOUNS);
            if self.chance(0.2) {
                self.attach_parts(&mut np, 1);
            } else {
                self.coordinate(&mut np);
            }
            np
        };
        verb.left.push((subject, "nsubj"));
        if self.chance(0.15) {
            verb.left.push((Node::new(self.pick(&ADVERBS), "RB"), "advmod"));
        }

        // Each phrase after the object goes to the verb (tool nouns) or to
        // the nearest noun before it (part nouns).
        let num_pps = *[1, 1, 2, 2, 2, 3, 3, 4].choose(&mut self.rng).unwrap();
        if self.chance(0.9) {
            let to_verb: Vec<bool> = (0..num_pps).map(|_| self.chance(0.5)).collect();
            let mut groups = vec![0usize];
            for &v in &to_verb {
                if v {
                    groups.push(0);
                } else {
                    *groups.last_mut().unwrap() += 1;
                }
            }
            let mut obj = self.noun_phrase(&NOUNS);
            if groups[0] == 0 {
                self.coordinate(&mut obj);
            } else {
                self.attach_parts(&mut obj, groups[0]);
            }
            verb.right.push((obj, "dobj"));
            for &depth in &groups[1..] {
                let pp = self.prep_phrase(&TOOLS, depth);
                verb.right.push((pp, "prep"));
            }
        } else if num_pps > 0 {
            let pp = self.prep_phrase(&TOOLS, 0);
            verb.right.push((pp, "prep"));
        }
        if self.chance(0.2) {
            verb.right.push((Node::new(self.pick(&ADVERBS), "RB"), "advmod"));
        }
        verb.right.push((Node::new(".", "."), "punct"));
        verb
    }
}

/// `count` sentences, deterministic in `seed`.
pub fn generate(count: usize, seed: u64) -> Vec<Sentence> {
    let mut g = Generator {
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    (0..count)
        .map(|_| {
            let mut rows = Vec::new();
            g.sentence().linearize(0, "root", &mut rows);
            let tokens = rows
                .iter()
                .enumerate()
                .map(|(i, &(form, tag, _, _))| Token::new(i + 1, form, tag))
                .collect();
            let arcs = rows
                .iter()
                .enumerate()
                .map(|(i, &(_, _, head, label))| Arc {
                    head,
                    modifier: i + 1,
                    label: label.to_string(),
                })
                .collect();
            Sentence {
                tokens,
                arcs: Some(arcs),
            }
        })
        .collect()
}

/// Train and dev portions drawn from one stream.
pub fn generate_split(train: usize, dev: usize, seed: u64) -> (Vec<Sentence>, Vec<Sentence>) {
    let mut all = generate(train + dev, seed);
    let dev_part = all.split_off(train);
    (all, dev_part)
}

/// Number of distinct forms the grammar can produce.
pub fn lexicon_size() -> usize {
    let mut all: Vec<&str> = DETERMINERS
        .iter()
        .chain(&NUMBERS)
        .chain(&ADVERBS)
        .chain(&PREPOSITIONS)
        .chain(&PRONOUNS)
        .chain(&CONJUNCTIONS)
        .chain(&ADJECTIVES)
        .chain(&VERBS)
        .chain(&TOOLS)
        .chain(&PARTS)
        .chain(&NOUNS)
        .chain(&MEASURES)
        .copied()
        .chain(["."])
        .collect();
    all.sort_unstable();
    all.dedup();
    all.len()
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::corpus::{check_tree, is_projective};

    #[test]
    fn trees_are_valid_and_projective() {
        for s in generate(500, 7) {
            let h = s.heads().unwrap();
            check_tree(&h).unwrap();
            assert!(is_projective(&h), "{:?}", s.tokens.iter().map(|t| &t.form).collect::<Vec<_>>());
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(generate(50, 3), generate(50, 3));
        assert_ne!(generate(50, 3), generate(50, 4));
    }

    #[test]
    fn inventory_sizes() {
        let data = generate(2000, 1);
        let tags: HashSet<&str> = data.iter().flat_map(|s| s.tokens.iter().map(|t| t.cpos.as_str())).collect();
        let labels: HashSet<&str> = data.iter().flat_map(|s| s.labels().unwrap()).collect();
        assert_eq!(tags.len(), 11);
        assert_eq!(labels.len(), 13);
        assert!((190..=225).contains(&lexicon_size()), "{}", lexicon_size());
    }

    #[test]
    fn some_node_has_four_modifiers() {
        let data = generate(500, 7);
        let found = data.iter().any(|s| {
            let h = s.heads().unwrap();
            (1..=h.len()).any(|w| h.iter().filter(|&&x| x == w).count() >= 4)
        });
        assert!(found);
    }

    #[test]
    fn phrase_attachment_follows_noun_class() {
        for s in generate(300, 11) {
            let arcs = s.arcs.as_ref().unwrap();
            for a in arcs.iter().filter(|a| a.label == "compound") {
                let pobj = &arcs[a.head - 1];
                let prep = &arcs[pobj.head - 1];
                let head_tag = s.tokens[prep.head - 1].cpos.as_str();
                let noun = s.tokens[a.modifier - 1].form.as_str();
                if TOOLS.contains(&noun) {
                    assert_eq!(head_tag, "VBD");
                } else {
                    assert!(head_tag.starts_with("NN"));
                }
            }
        }
    }
}
