//! Periodic orbits as cycles of words, and simple-cycle enumeration.

use std::collections::BTreeSet;

use super::alphabet::Word;
use super::graph::EdgeGraph;

/// A periodic orbit `word^∞`; the period is `word.len()`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Cycle {
    word: Word,
}

impl Cycle {
    /// Panics on the empty word.
    pub fn new(word: Word) -> Self {
        assert!(!word.is_empty(), "cycle word must be nonempty");
        Cycle { word }
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn period(&self) -> usize {
        self.word.len()
    }

    pub fn rotate(&self, k: usize) -> Cycle {
        Cycle { word: self.word.rotate(k) }
    }

    pub fn power(&self, k: usize) -> Cycle {
        assert!(k >= 1);
        Cycle { word: self.word.repeat(k) }
    }

    /// Shortest `r` with `word = r^k`.
    pub fn primitive_root(&self) -> Cycle {
        let w = self.word.symbols();
        let n = w.len();
        for p in 1..=n {
            if n.is_multiple_of(p) && (p..n).all(|i| w[i] == w[i - p]) {
                return Cycle { word: Word(w[..p].to_vec()) };
            }
        }
        self.clone()
    }

    /// Primitive root rotated to its lexicographically least rotation.
    pub fn canonical(&self) -> Cycle {
        let root = self.primitive_root();
        (0..root.period()).map(|k| root.rotate(k)).min().expect("nonempty")
    }

    /// First rotation that starts with `prefix` (read periodically).
    pub fn rotate_to_prefix(&self, prefix: &Word) -> Option<Cycle> {
        (0..self.period()).find_map(|k| {
            let ok = prefix.symbols().iter().enumerate().all(|(i, &a)| self.word.periodic_at(k + i) == a);
            ok.then(|| self.rotate(k))
        })
    }
}

/// All simple cycles of `g` with at most `max_len` edges, reported as
/// canonical words, deduplicated and sorted (shortest first, then
/// lexicographic).
pub fn enumerate_cycles(g: &EdgeGraph, max_len: usize) -> Vec<Cycle> {
    let mut found: BTreeSet<(usize, Word)> = BTreeSet::new();
    for_each_simple_cycle(g, max_len, |edges| {
        let c = Cycle::new(g.walk_word(edges)).canonical();
        found.insert((c.period(), c.word));
    });
    found.into_iter().map(|(_, w)| Cycle::new(w)).collect()
}

/// Calls `visit` with the edge list of every simple cycle of length
/// `<= max_len`, each exactly once (rooted at its smallest vertex).
pub fn for_each_simple_cycle<F: FnMut(&[usize])>(g: &EdgeGraph, max_len: usize, mut visit: F) {
    let n = g.num_vertices();
    let mut on_path = vec![false; n];
    let mut path: Vec<usize> = Vec::new();
    for root in 0..n {
        // Iterative DFS over vertices > root.
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        on_path[root] = true;
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            let outs = g.out_edges(v);
            if *i < outs.len() {
                let e = outs[*i];
                *i += 1;
                let t = g.edges()[e].to;
                if t == root {
                    path.push(e);
                    visit(&path);
                    path.pop();
                } else if t > root && !on_path[t] && path.len() + 1 < max_len {
                    on_path[t] = true;
                    path.push(e);
                    stack.push((t, 0));
                }
            } else {
                stack.pop();
                on_path[v] = false;
                if !stack.is_empty() {
                    path.pop();
                }
            }
        }
    }
}
