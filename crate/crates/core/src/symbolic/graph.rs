//! Higher-block edge graphs carrying occupation measures.
//!
//! For SFT presentations the vertices are the allowed words of length
//! `order` and the edges the allowed words of length `order + 1`. The order
//! is raised to the SFT memory when needed so that cycles of the graph are
//! exactly the periodic points of the shift.
//!
//! For labeled-graph presentations each vertex also carries a state of the
//! terminal component of the follower automaton (the state *before* the
//! vertex word is read). Cycles of this graph are again exactly the periodic
//! points, and a periodic word that passes a synchronizing word lifts
//! uniquely.

use std::collections::{HashMap, VecDeque};

use super::alphabet::{Symbol, Word};
use super::automaton::{scc, FollowerAutomaton};
use super::presentation::ShiftPresentation;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub state: Option<usize>,
    pub word: Word,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    /// The `(order + 1)`-block read along this edge.
    pub word: Word,
}

#[derive(Clone, Debug)]
pub struct EdgeGraph {
    order: usize,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
    vertex_index: HashMap<Vertex, usize>,
    automaton: Option<FollowerAutomaton>,
}

impl EdgeGraph {
    /// Builds the order-`order` edge graph (the effective order may be larger
    /// for SFTs with longer memory; see [`EdgeGraph::order`]).
    pub fn new(p: &ShiftPresentation, order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidArgument("edge graph order must be at least 1".into()));
        }
        match p.sft_memory() {
            Some(m) => Ok(Self::build_sft(p, order.max(m))),
            None => Ok(Self::build_sofic(p, order)),
        }
    }

    fn build_sft(p: &ShiftPresentation, order: usize) -> Self {
        let vertices: Vec<Vertex> = p.allowed_words(order).into_iter().map(|word| Vertex { state: None, word }).collect();
        let vertex_index: HashMap<Vertex, usize> = vertices.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let mut edges = Vec::new();
        for w in p.allowed_words(order + 1) {
            let from = vertex_index[&Vertex { state: None, word: Word(w.0[..order].to_vec()) }];
            let to = vertex_index[&Vertex { state: None, word: Word(w.0[1..].to_vec()) }];
            edges.push(Edge { from, to, word: w });
        }
        Self::assemble(order, vertices, edges, None)
    }

    fn build_sofic(p: &ShiftPresentation, order: usize) -> Self {
        let fa = FollowerAutomaton::new(p);
        let k = p.alphabet().len() as Symbol;
        let terminal = fa.terminal_states();
        // Vertices: (state, word) with the word readable from the state.
        let mut vertices = Vec::new();
        for &q in &terminal {
            let mut stack = vec![(Vec::<Symbol>::new(), q)];
            let mut found = Vec::new();
            while let Some((w, s)) = stack.pop() {
                if w.len() == order {
                    found.push(Word(w));
                    continue;
                }
                for a in (0..k).rev() {
                    if let Some(t) = fa.step(s, a) {
                        let mut v = w.clone();
                        v.push(a);
                        stack.push((v, t));
                    }
                }
            }
            vertices.extend(found.into_iter().map(|word| Vertex { state: Some(q), word }));
        }
        let vertex_index: HashMap<Vertex, usize> = vertices.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let mut edges = Vec::new();
        for (i, v) in vertices.iter().enumerate() {
            let q = v.state.expect("sofic vertex state");
            let end = fa.read(q, v.word.symbols()).expect("vertex word readable");
            let next_state = fa.step(q, v.word.0[0]).expect("readable");
            for a in 0..k {
                if fa.step(end, a).is_some() {
                    let mut w = v.word.0.clone();
                    w.push(a);
                    let to = vertex_index[&Vertex { state: Some(next_state), word: Word(w[1..].to_vec()) }];
                    edges.push(Edge { from: i, to, word: Word(w) });
                }
            }
        }
        Self::assemble(order, vertices, edges, Some(fa))
    }

    fn assemble(order: usize, vertices: Vec<Vertex>, edges: Vec<Edge>, automaton: Option<FollowerAutomaton>) -> Self {
        let mut out_edges = vec![Vec::new(); vertices.len()];
        let mut in_edges = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            out_edges[e.from].push(i);
            in_edges[e.to].push(i);
        }
        let vertex_index = vertices.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        EdgeGraph { order, vertices, edges, out_edges, in_edges, vertex_index, automaton }
    }

    /// Effective block order `L`: vertices are `L`-words, edges `(L+1)`-words.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_edges[v]
    }

    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_edges[v]
    }

    pub fn is_state_augmented(&self) -> bool {
        self.automaton.is_some()
    }

    pub fn automaton(&self) -> Option<&FollowerAutomaton> {
        self.automaton.as_ref()
    }

    pub fn vertex_id(&self, v: &Vertex) -> Option<usize> {
        self.vertex_index.get(v).copied()
    }

    /// Edge leaving `v` whose block ends with symbol `a`.
    pub fn edge_from(&self, v: usize, a: Symbol) -> Option<usize> {
        self.out_edges[v].iter().copied().find(|&e| *self.edges[e].word.0.last().expect("nonempty edge word") == a)
    }

    pub fn is_strongly_connected(&self) -> bool {
        let n = self.num_vertices();
        n > 0 && scc(n, |v| self.out_edges[v].iter().map(|&e| self.edges[e].to).collect()).len() == 1
    }

    /// BFS shortest edge path from `a` to `b` (empty when `a == b`).
    pub fn shortest_path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        if a == b {
            return Some(Vec::new());
        }
        let mut prev: Vec<Option<usize>> = vec![None; self.num_vertices()];
        let mut seen = vec![false; self.num_vertices()];
        seen[a] = true;
        let mut queue = VecDeque::from([a]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.out_edges[v] {
                let t = self.edges[e].to;
                if !seen[t] {
                    seen[t] = true;
                    prev[t] = Some(e);
                    if t == b {
                        let mut path = Vec::new();
                        let mut cur = b;
                        while let Some(e) = prev[cur] {
                            path.push(e);
                            cur = self.edges[e].from;
                        }
                        path.reverse();
                        return Some(path);
                    }
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// Lifts the periodic point `w^∞` to a closed walk, returning the edges
    /// of one lifted period (a multiple of `|w|` long for state-augmented
    /// graphs, exactly `|w|` otherwise). `None` if `w^∞` is not in the shift.
    pub fn lift_periodic(&self, w: &Word) -> Option<Vec<usize>> {
        if w.is_empty() {
            return None;
        }
        let l = self.order;
        match &self.automaton {
            None => {
                let mut path = Vec::with_capacity(w.len());
                for p in 0..w.len() {
                    let v = self.vertex_id(&Vertex { state: None, word: w.periodic_window(p, l) })?;
                    path.push(self.edge_from(v, w.periodic_at(p + l))?);
                }
                Some(path)
            }
            Some(fa) => {
                let terminal = fa.terminal_states();
                for &start in &terminal {
                    // Iterate q -> read(q, w) until a state repeats.
                    let mut seen: HashMap<usize, usize> = HashMap::new();
                    let mut q = start;
                    let mut seq = Vec::new();
                    let cycle_start = loop {
                        if let Some(&i) = seen.get(&q) {
                            break Some(i);
                        }
                        seen.insert(q, seq.len());
                        seq.push(q);
                        match fa.read(q, w.symbols()) {
                            Some(next) => q = next,
                            None => break None,
                        }
                    };
                    let Some(i0) = cycle_start else { continue };
                    let reps = seq.len() - i0;
                    return self.lift_from_state(seq[i0], &w.repeat(reps));
                }
                None
            }
        }
    }

    /// Lifts the closed word `w` starting at automaton state `q`, which must
    /// return to `q` after reading `w`.
    pub fn lift_from_state(&self, q: usize, w: &Word) -> Option<Vec<usize>> {
        let fa = self.automaton.as_ref()?;
        let l = self.order;
        let mut path = Vec::with_capacity(w.len());
        let mut state = q;
        for p in 0..w.len() {
            let v = self.vertex_id(&Vertex { state: Some(state), word: w.periodic_window(p, l) })?;
            path.push(self.edge_from(v, w.periodic_at(p + l))?);
            state = fa.step(state, w.0[p])?;
        }
        (state == q).then_some(path)
    }

    /// Symbol word traced by a closed edge walk (first symbol of each block).
    pub fn walk_word(&self, edges: &[usize]) -> Word {
        Word(edges.iter().map(|&e| self.edges[e].word.0[0]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::symbolic::parse_shift;

    #[test]
    fn full_shift_de_bruijn() {
        let p = parse_shift(fixtures::FULL_TWO_SHIFT).unwrap();
        let g = EdgeGraph::new(&p, 1).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (2, 4));
        assert!(g.is_strongly_connected());
    }

    #[test]
    fn three_symbol_block_graph() {
        let p = parse_shift(fixtures::THREE_SYMBOL_SHIFT).unwrap();
        let g = EdgeGraph::new(&p, 1).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (3, 7));
        let words: Vec<String> = g.edges().iter().map(|e| p.render(&e.word)).collect();
        assert!(!words.contains(&"1 3".to_string()));
        assert!(!words.contains(&"3 1".to_string()));
    }

    #[test]
    fn golden_mean_block_graph() {
        let p = parse_shift(fixtures::GOLDEN_MEAN).unwrap();
        let g = EdgeGraph::new(&p, 1).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (2, 3));
    }

    #[test]
    fn order_zero_is_rejected() {
        let p = parse_shift(fixtures::GOLDEN_MEAN).unwrap();
        assert!(EdgeGraph::new(&p, 0).is_err());
    }

    #[test]
    fn sft_order_raised_to_memory() {
        let text = "alphabet 0 1\ntype forbidden\nforbid 1 0 1\n";
        let p = parse_shift(text).unwrap();
        let g = EdgeGraph::new(&p, 1).unwrap();
        assert_eq!(g.order(), 2);
        assert!(g.lift_periodic(&p.word("1 0").unwrap()).is_none());
        assert!(g.lift_periodic(&p.word("1 0 0").unwrap()).is_some());
    }

    #[test]
    fn even_shift_lifts_only_legal_periods() {
        let p = parse_shift(fixtures::EVEN_SHIFT).unwrap();
        let g = EdgeGraph::new(&p, 1).unwrap();
        assert!(g.is_state_augmented());
        assert!(g.is_strongly_connected());
        assert!(g.lift_periodic(&p.word("1 0").unwrap()).is_none());
        assert_eq!(g.lift_periodic(&p.word("1 0 0").unwrap()).unwrap().len(), 3);
        // 0^∞ lifts, but only through two periods (parity alternates).
        assert_eq!(g.lift_periodic(&p.word("0").unwrap()).unwrap().len(), 2);
    }
}
