//! Run-length words `(w₁^{e₁} ⋯ w_k^{e_k})^{r} ⋯` with big exponents, and
//! exact window statistics of their periodic extension.

use std::collections::HashMap;
use std::hash::Hash;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::measure::OccupationMeasure;
use crate::potential::LocallyConstantFn;
use crate::rational::{RatVec, Rational};
use crate::symbolic::{EdgeGraph, FollowerAutomaton, ShiftPresentation, Symbol, Vertex, Word};

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub word: Word,
    pub exp: BigUint,
}

/// A run of blocks repeated `reps` times.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub blocks: Vec<Block>,
    pub reps: BigUint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompressedWord {
    segments: Vec<Segment>,
}

/// Where every block's leading copy of `u` puts the follower automaton.
#[derive(Clone, Copy, Debug)]
pub struct SyncAnchor<'a> {
    pub fa: &'a FollowerAutomaton,
    /// State reached after reading `u`.
    pub state: usize,
    pub u_len: usize,
}

type BlockId = (usize, usize);

impl CompressedWord {
    /// Empty segments are dropped; every block needs a nonempty word and a
    /// positive exponent.
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let segments: Vec<Segment> = segments.into_iter().filter(|s| !s.reps.is_zero() && !s.blocks.is_empty()).collect();
        if segments.is_empty() {
            return Err(Error::InvalidArgument("compressed word is empty".into()));
        }
        for b in segments.iter().flat_map(|s| &s.blocks) {
            if b.word.is_empty() || b.exp.is_zero() {
                return Err(Error::InvalidArgument("blocks need a nonempty word and a positive exponent".into()));
            }
        }
        Ok(CompressedWord { segments })
    }

    pub fn from_blocks(blocks: Vec<Block>) -> Result<Self> {
        Self::new(vec![Segment { blocks, reps: BigUint::one() }])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn block(&self, id: BlockId) -> &Block {
        &self.segments[id.0].blocks[id.1]
    }

    fn block_len(&self, id: BlockId) -> BigUint {
        let b = self.block(id);
        &b.exp * BigUint::from(b.word.len())
    }

    pub fn len(&self) -> BigUint {
        self.segments.iter().map(|s| &s.reps * s.blocks.iter().map(|b| &b.exp * BigUint::from(b.word.len())).sum::<BigUint>()).sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The explicit word when it has at most `limit` symbols.
    pub fn materialize(&self, limit: usize) -> Option<Word> {
        if self.len() > BigUint::from(limit) {
            return None;
        }
        let mut out = Vec::new();
        for s in &self.segments {
            for _ in 0..s.reps.to_usize()? {
                for b in &s.blocks {
                    for _ in 0..b.exp.to_usize()? {
                        out.extend_from_slice(b.word.symbols());
                    }
                }
            }
        }
        Some(Word(out))
    }

    pub fn render(&self, p: &ShiftPresentation) -> String {
        self.segments
            .iter()
            .map(|s| {
                let inner: Vec<String> = s.blocks.iter().map(|b| format!("({})^{}", p.render(&b.word), b.exp)).collect();
                if s.reps.is_one() {
                    inner.join(" ")
                } else {
                    format!("[{}]^{}", inner.join(" "), s.reps)
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Every block occurrence in the cyclic word with its neighbours, grouped
    /// with multiplicities.
    fn occurrences(&self) -> Vec<(BlockId, BlockId, BlockId, BigUint)> {
        let ns = self.segments.len();
        let mut out = Vec::new();
        for s in 0..ns {
            let seg = &self.segments[s];
            let nb = seg.blocks.len();
            let prev_seg = (s + ns - 1) % ns;
            let prev_ext = (prev_seg, self.segments[prev_seg].blocks.len() - 1);
            let next_ext = ((s + 1) % ns, 0);
            let r = &seg.reps;
            let mut cats: Vec<(BigUint, bool, bool)> = Vec::new();
            if r.is_one() {
                cats.push((BigUint::one(), true, true));
            } else {
                cats.push((BigUint::one(), true, false));
                if *r > BigUint::from(2u8) {
                    cats.push((r - 2u8, false, false));
                }
                cats.push((BigUint::one(), false, true));
            }
            for i in 0..nb {
                for (mult, first, last) in &cats {
                    let prev = if i > 0 {
                        (s, i - 1)
                    } else if *first {
                        prev_ext
                    } else {
                        (s, nb - 1)
                    };
                    let next = if i + 1 < nb {
                        (s, i + 1)
                    } else if *last {
                        next_ext
                    } else {
                        (s, 0)
                    };
                    out.push(((s, i), prev, next, mult.clone()));
                }
            }
        }
        out
    }

    /// Counts, over all starting offsets of one period of the periodic
    /// extension, the keys `key(state before offset, window)` for windows of
    /// length `win`. States are tracked only with an anchor, in which case
    /// every block word must start with `u`. Each block power `w^e` must have
    /// at least `win − 1` symbols.
    pub fn window_counts<K, F>(&self, win: usize, anchor: Option<SyncAnchor<'_>>, mut key: F) -> Result<HashMap<K, BigUint>>
    where
        K: Hash + Eq + Clone,
        F: FnMut(Option<usize>, &[Symbol]) -> Result<K>,
    {
        assert!(win >= 1);
        let k = win - 1;
        let us = anchor.map_or(0, |a| a.u_len);
        let mut totals: HashMap<K, BigUint> = HashMap::new();
        for s in &self.segments {
            for b in &s.blocks {
                let p = b.word.len();
                if p < us || BigUint::from(p) * &b.exp < BigUint::from(k.max(1)) {
                    return Err(Error::Internal("block shorter than the window or the synchronizing word".into()));
                }
            }
        }
        let occ = self.occurrences();
        // Regular offsets of each block: the same for every occurrence.
        let mut block_mult: HashMap<BlockId, BigUint> = HashMap::new();
        for (b, _, _, m) in &occ {
            *block_mult.entry(*b).or_insert_with(BigUint::zero) += m;
        }
        let mut ids: Vec<&BlockId> = block_mult.keys().collect();
        ids.sort();
        for &id in ids {
            let b = self.block(id);
            let w = b.word.symbols();
            let p = w.len();
            let n = self.block_len(id);
            let lo = BigUint::from(us);
            let hi_plus = &lo + BigUint::from(k);
            if n <= hi_plus {
                continue;
            }
            let len = &n - &hi_plus;
            let (qt, rem) = len.div_rem(&BigUint::from(p));
            let rem = rem.to_usize().expect("remainder below period");
            let states = residue_states(w, anchor)?;
            let mut all: HashMap<K, u64> = HashMap::new();
            let mut extra: HashMap<K, u64> = HashMap::new();
            let mut window = vec![0 as Symbol; win];
            for j in 0..p {
                let r = (us + j) % p;
                if qt.is_zero() && j >= rem {
                    continue;
                }
                for (t, slot) in window.iter_mut().enumerate() {
                    *slot = w[(r + t) % p];
                }
                let kk = key(states.as_ref().map(|s| s[r]), &window)?;
                *all.entry(kk.clone()).or_insert(0) += 1;
                if j < rem {
                    *extra.entry(kk).or_insert(0) += 1;
                }
            }
            let mult = &block_mult[&id];
            for (kk, c) in all {
                let e = extra.get(&kk).copied().unwrap_or(0);
                let cnt = (&qt * BigUint::from(c) + BigUint::from(e)) * mult;
                *totals.entry(kk).or_insert_with(BigUint::zero) += cnt;
            }
        }
        // Offsets whose state or window depends on the neighbours.
        for (id, prev, next, mult) in &occ {
            let b = self.block(*id);
            let w = b.word.symbols();
            let p = w.len();
            let n = self.block_len(*id);
            let nw = self.block(*next).word.symbols();
            let states = residue_states(w, anchor)?;
            let start_state = match anchor {
                Some(a) => {
                    let pw = self.block(*prev).word.symbols();
                    Some(a.fa.read(a.state, &pw[us..]).ok_or_else(|| Error::Internal("block does not return to u".into()))?)
                }
                None => None,
            };
            let small = n <= BigUint::from(us + k);
            let head: Vec<usize> = if small { (0..n.to_usize().expect("small block")).collect() } else { (0..us).collect() };
            for &o in &head {
                let state = match (anchor, start_state) {
                    (Some(a), Some(s0)) if o < us => {
                        Some(a.fa.read(s0, &w[..o]).ok_or_else(|| Error::Internal("state walk failed".into()))?)
                    }
                    _ => states.as_ref().map(|s| s[o % p]),
                };
                let n_small = n.to_usize().unwrap_or(usize::MAX);
                let window: Vec<Symbol> =
                    (0..win).map(|j| if o + j < n_small { w[(o + j) % p] } else { nw[(o + j - n_small) % nw.len()] }).collect();
                let kk = key(state, &window)?;
                *totals.entry(kk).or_insert_with(BigUint::zero) += mult;
            }
            if small {
                continue;
            }
            for t in 1..=k {
                // Offset n - t, at least `us` since the block is not small.
                let r = (p - t % p) % p;
                let state = states.as_ref().map(|s| s[r]);
                let window: Vec<Symbol> = (0..win).map(|j| if j < t { w[(r + j) % p] } else { nw[(j - t) % nw.len()] }).collect();
                let kk = key(state, &window)?;
                *totals.entry(kk).or_insert_with(BigUint::zero) += mult;
            }
        }
        Ok(totals)
    }
}

/// State before each residue `r` of a block copy at offset `>= |u|`.
fn residue_states(w: &[Symbol], anchor: Option<SyncAnchor<'_>>) -> Result<Option<Vec<usize>>> {
    let Some(a) = anchor else { return Ok(None) };
    let p = w.len();
    let us = a.u_len;
    let mut st = vec![0usize; p];
    let mut q = a.state;
    for r in us..p {
        st[r] = q;
        q = a.fa.step(q, w[r]).ok_or_else(|| Error::Internal("block word not readable from u".into()))?;
    }
    for r in 0..us {
        st[r] = q;
        q = a.fa.step(q, w[r]).ok_or_else(|| Error::Internal("block word does not return to u".into()))?;
    }
    if q != a.state {
        return Err(Error::Internal("u is not synchronizing along the block".into()));
    }
    Ok(Some(st))
}

/// `S_{|x|} g` over one period of `x^∞`.
pub fn birkhoff_sum_compressed(g: &LocallyConstantFn, x: &CompressedWord) -> Result<RatVec> {
    let win = g.window();
    let mut s = RatVec::zeros(g.dim());
    if win <= 8 {
        // Pack windows into integers to keep the scan allocation-free.
        let counts = x.window_counts(win, None, |_, w| Ok(w.iter().fold(0u128, |acc, &a| (acc << 16) | a as u128)))?;
        let mut keys: Vec<&u128> = counts.keys().collect();
        keys.sort();
        for code in keys {
            let w: Vec<Symbol> = (0..win).rev().map(|i| ((code >> (16 * i)) & 0xffff) as Symbol).collect();
            s.add_scaled(&Rational::from(num_bigint::BigInt::from(counts[code].clone())), g.eval(&w));
        }
    } else {
        let counts = x.window_counts(win, None, |_, w| Ok(Word(w.to_vec())))?;
        let mut keys: Vec<&Word> = counts.keys().collect();
        keys.sort();
        for w in keys {
            s.add_scaled(&Rational::from(num_bigint::BigInt::from(counts[w].clone())), g.eval(w.symbols()));
        }
    }
    Ok(s)
}

/// Occupation measure of the periodic orbit of `x` on `graph`.
pub fn occupation_compressed(x: &CompressedWord, graph: &Arc<EdgeGraph>, anchor: Option<SyncAnchor<'_>>) -> Result<OccupationMeasure> {
    let l = graph.order();
    let augmented = graph.is_state_augmented();
    if augmented && anchor.is_none() {
        return Err(Error::InvalidArgument("state-augmented graphs need a synchronizing anchor".into()));
    }
    let counts = x.window_counts(l + 1, if augmented { anchor } else { None }, |state, w| {
        let v = graph
            .vertex_id(&Vertex { state, word: Word(w[..l].to_vec()) })
            .ok_or_else(|| Error::Internal("window is not a vertex of the edge graph".into()))?;
        graph.edge_from(v, w[l]).ok_or_else(|| Error::Internal("window is not an edge of the edge graph".into()))
    })?;
    let total = Rational::from(num_bigint::BigInt::from(x.len()));
    let mut weights = vec![Rational::zero(); graph.num_edges()];
    for (e, c) in counts {
        weights[e] = Rational::from(num_bigint::BigInt::from(c)) / &total;
    }
    OccupationMeasure::new(graph.clone(), weights)
}
