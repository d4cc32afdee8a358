//! Follower-set automaton by subset construction.
//!
//! State `0` is the full state set of the presentation (the follower set of
//! the empty word). Reading an allowed word `u` from it lands on the set of
//! presentation states reachable by `u`-labeled paths, which determines the
//! follower set of `u`.

use std::collections::{HashMap, HashSet, VecDeque};

use super::alphabet::{Symbol, Word};
use super::presentation::ShiftPresentation;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct FollowerAutomaton {
    /// A representative presentation-state set per follower set.
    states: Vec<Vec<usize>>,
    /// `trans[state][symbol]`
    trans: Vec<Vec<Option<usize>>>,
    alphabet_len: usize,
}

impl FollowerAutomaton {
    pub fn new(p: &ShiftPresentation) -> Self {
        let g = p.graph();
        let k = p.alphabet().len();
        let full: Vec<usize> = (0..g.num_states()).collect();
        let mut states = vec![full.clone()];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(full, 0)]);
        let mut trans: Vec<Vec<Option<usize>>> = Vec::new();
        let mut i = 0;
        while i < states.len() {
            let mut row = vec![None; k];
            for a in 0..k as Symbol {
                let mut next: Vec<usize> = states[i].iter().filter_map(|&s| g.step(s, a)).collect();
                if next.is_empty() {
                    continue;
                }
                next.sort_unstable();
                next.dedup();
                let id = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        states.push(next.clone());
                        index.insert(next, states.len() - 1);
                        states.len() - 1
                    }
                };
                row[a as usize] = Some(id);
            }
            trans.push(row);
            i += 1;
        }
        Self::merge_equivalent(states, trans, k)
    }

    /// Moore refinement: subsets with equal follower sets collapse to one
    /// state, so automaton states correspond exactly to follower sets.
    fn merge_equivalent(states: Vec<Vec<usize>>, trans: Vec<Vec<Option<usize>>>, k: usize) -> Self {
        let n = states.len();
        let mut class = vec![0usize; n];
        let mut count = 1;
        loop {
            let mut ids: HashMap<(usize, Vec<Option<usize>>), usize> = HashMap::new();
            let mut next = vec![0usize; n];
            for q in 0..n {
                let sig = (class[q], trans[q].iter().map(|t| t.map(|t| class[t])).collect());
                let len = ids.len();
                next[q] = *ids.entry(sig).or_insert(len);
            }
            let stable = ids.len() == count;
            count = ids.len();
            class = next;
            if stable {
                break;
            }
        }
        // Renumber in order of first appearance so the initial state stays 0.
        let mut renum = vec![usize::MAX; count];
        let mut reps = Vec::new();
        for q in 0..n {
            if renum[class[q]] == usize::MAX {
                renum[class[q]] = reps.len();
                reps.push(q);
            }
        }
        let merged_states = reps.iter().map(|&q| states[q].clone()).collect();
        let merged_trans = reps.iter().map(|&q| trans[q].iter().map(|t| t.map(|t| renum[class[t]])).collect()).collect();
        FollowerAutomaton { states: merged_states, trans: merged_trans, alphabet_len: k }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> usize {
        0
    }

    /// A set of presentation states whose follower set is that of `q`.
    pub fn state_set(&self, q: usize) -> &[usize] {
        &self.states[q]
    }

    pub fn step(&self, q: usize, a: Symbol) -> Option<usize> {
        self.trans[q].get(a as usize).copied().flatten()
    }

    pub fn read(&self, q: usize, u: &[Symbol]) -> Option<usize> {
        u.iter().try_fold(q, |s, &a| self.step(s, a))
    }

    /// State reached from the initial state by `u`, if `u` is allowed.
    pub fn word_state(&self, u: &Word) -> Option<usize> {
        self.read(0, u.symbols())
    }

    pub fn alphabet_len(&self) -> usize {
        self.alphabet_len
    }

    /// `u` is synchronizing iff reading it from every state that accepts it
    /// lands on one single state.
    pub fn is_synchronizing(&self, u: &Word) -> Result<bool> {
        let target = self.word_state(u).ok_or_else(|| Error::WordNotAllowed(format!("{:?}", u.symbols())))?;
        Ok((0..self.num_states()).all(|q| match self.read(q, u.symbols()) {
            Some(r) => r == target,
            None => true,
        }))
    }

    /// Smallest `κ <= bound` such that every allowed word of length `κ` is
    /// synchronizing, found by propagating pairs of distinct states along
    /// common words: `κ` works exactly when no distinct pair survives `κ`
    /// steps.
    pub fn uniform_sync_length(&self, bound: usize) -> Option<usize> {
        let n = self.num_states();
        let mut pairs: HashSet<(usize, usize)> = HashSet::new();
        for p in 0..n {
            for q in p + 1..n {
                pairs.insert((p, q));
            }
        }
        for kappa in 1..=bound {
            let mut next = HashSet::new();
            for &(p, q) in &pairs {
                for a in 0..self.alphabet_len as Symbol {
                    if let (Some(p2), Some(q2)) = (self.step(p, a), self.step(q, a)) {
                        if p2 != q2 {
                            next.insert((p2.min(q2), p2.max(q2)));
                        }
                    }
                }
            }
            if next.is_empty() {
                return Some(kappa);
            }
            pairs = next;
        }
        None
    }

    /// States lying in a closed strongly connected component (no edges out).
    pub fn terminal_states(&self) -> Vec<usize> {
        let comps = scc(self.num_states(), |v| self.trans[v].iter().filter_map(|t| *t).collect::<Vec<_>>());
        let mut comp_of = vec![0; self.num_states()];
        for (c, members) in comps.iter().enumerate() {
            for &v in members {
                comp_of[v] = c;
            }
        }
        let mut out = Vec::new();
        for (c, members) in comps.iter().enumerate() {
            let closed = members.iter().all(|&v| self.trans[v].iter().filter_map(|t| *t).all(|w| comp_of[w] == c));
            if closed {
                out.extend(members.iter().copied());
            }
        }
        out.sort_unstable();
        out
    }

    /// Shortest allowed word reaching a state in `targets` from the initial state.
    pub fn shortest_word_to(&self, targets: &[usize]) -> Option<Word> {
        let mut prev: Vec<Option<(usize, Symbol)>> = vec![None; self.num_states()];
        let mut seen = vec![false; self.num_states()];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            if targets.contains(&v) {
                let mut w = Vec::new();
                let mut cur = v;
                while let Some((p, a)) = prev[cur] {
                    w.push(a);
                    cur = p;
                }
                w.reverse();
                return Some(Word(w));
            }
            for a in 0..self.alphabet_len as Symbol {
                if let Some(t) = self.step(v, a) {
                    if !seen[t] {
                        seen[t] = true;
                        prev[t] = Some((v, a));
                        queue.push_back(t);
                    }
                }
            }
        }
        None
    }
}

/// Tarjan's strongly connected components (iterative), in reverse topological order.
pub(crate) fn scc<F>(n: usize, succ: F) -> Vec<Vec<usize>>
where
    F: Fn(usize) -> Vec<usize>,
{
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, Vec<usize>, usize)> = vec![(root, succ(root), 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some((v, succs, i)) = call.last_mut() {
            let v = *v;
            if *i < succs.len() {
                let w = succs[*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, succ(w), 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some((parent, _, _)) = call.last() {
                    low[*parent] = low[*parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("scc stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}
