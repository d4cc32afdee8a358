//! Shift presentations and the shift file format.
//!
//! Every presentation is compiled to a trimmed right-resolving labeled graph,
//! which is what all language queries run against. Adjacency matrices become
//! the graph whose states are symbols (edge `i -> j` labeled `j`); forbidden
//! word lists become the graph on clean words of length `m`, where `m + 1` is
//! the longest forbidden word.

use std::collections::{HashSet, VecDeque};

use super::alphabet::{Alphabet, Symbol, Word};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftKind {
    Adjacency,
    Forbidden,
    Graph,
}

/// Right-resolving labeled graph: at most one outgoing edge per (state, label).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    num_states: usize,
    /// `trans[state][symbol]`
    trans: Vec<Vec<Option<usize>>>,
}

impl LabeledGraph {
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn step(&self, state: usize, a: Symbol) -> Option<usize> {
        self.trans[state][a as usize]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, Symbol)> + '_ {
        self.trans.iter().enumerate().flat_map(|(s, row)| row.iter().enumerate().filter_map(move |(a, t)| t.map(|t| (s, t, a as Symbol))))
    }

    /// Follows `w` from `state`.
    pub fn walk(&self, state: usize, w: &[Symbol]) -> Option<usize> {
        w.iter().try_fold(state, |s, &a| self.step(s, a))
    }

    pub fn is_strongly_connected(&self) -> bool {
        if self.num_states == 0 {
            return false;
        }
        let reach = |rev: bool| {
            let mut adj = vec![Vec::new(); self.num_states];
            for (s, t, _) in self.edges() {
                if rev {
                    adj[t].push(s);
                } else {
                    adj[s].push(t);
                }
            }
            let mut seen = vec![false; self.num_states];
            let mut queue = VecDeque::from([0usize]);
            seen[0] = true;
            while let Some(v) = queue.pop_front() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            seen.into_iter().all(|b| b)
        };
        reach(false) && reach(true)
    }
}

/// A sofic shift presentation, trimmed to its essential part.
#[derive(Clone, Debug)]
pub struct ShiftPresentation {
    alphabet: Alphabet,
    kind: ShiftKind,
    /// Adjacency matrix over the (trimmed) alphabet, for `kind == Adjacency`.
    adjacency: Option<Vec<Vec<bool>>>,
    /// Forbidden words over the trimmed alphabet, for `kind == Forbidden`.
    forbidden: Vec<Word>,
    /// For SFT kinds, the block length minus one that determines the language.
    memory: Option<usize>,
    graph: LabeledGraph,
}

impl ShiftPresentation {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn kind(&self) -> ShiftKind {
        self.kind
    }

    pub fn adjacency(&self) -> Option<&Vec<Vec<bool>>> {
        self.adjacency.as_ref()
    }

    pub fn forbidden(&self) -> &[Word] {
        &self.forbidden
    }

    /// Memory of an SFT presentation; `None` for labeled graphs.
    pub fn sft_memory(&self) -> Option<usize> {
        self.memory
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    pub fn is_sft(&self) -> bool {
        self.memory.is_some()
    }

    pub fn word(&self, text: &str) -> Result<Word> {
        self.alphabet.parse_word(text)
    }

    pub fn render(&self, w: &Word) -> String {
        self.alphabet.render(w)
    }

    /// Builds an SFT from a 0/1 adjacency matrix over `tokens`.
    pub fn from_adjacency<S: AsRef<str>>(tokens: &[S], matrix: &[Vec<bool>]) -> Result<Self> {
        let alphabet = Alphabet::new(tokens)?;
        let n = alphabet.len();
        if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument(format!("adjacency matrix must be {n}x{n}")));
        }
        let trans = (0..n).map(|i| (0..n).map(|j| if matrix[i][j] { Some(j) } else { None }).collect()).collect();
        let raw = LabeledGraph { num_states: n, trans };
        let (graph, keep) = trim(&raw, n)?;
        let alphabet = restrict_alphabet(&alphabet, &keep)?;
        let kept = keep_indices(&keep);
        let adjacency = kept.iter().map(|&i| kept.iter().map(|&j| matrix[i][j]).collect()).collect();
        Ok(ShiftPresentation {
            alphabet,
            kind: ShiftKind::Adjacency,
            adjacency: Some(adjacency),
            forbidden: Vec::new(),
            memory: Some(1),
            graph,
        })
    }

    /// Builds an SFT from a list of forbidden words over `tokens`.
    pub fn from_forbidden<S: AsRef<str>>(tokens: &[S], forbidden: &[Word]) -> Result<Self> {
        let alphabet = Alphabet::new(tokens)?;
        let n = alphabet.len();
        if forbidden.iter().any(|w| w.is_empty()) {
            return Err(Error::InvalidArgument("empty forbidden word".into()));
        }
        let m = forbidden.iter().map(Word::len).max().unwrap_or(1).saturating_sub(1);
        let forb: HashSet<&[Symbol]> = forbidden.iter().map(|w| w.symbols()).collect();
        let clean = |w: &[Symbol]| -> bool {
            // Only suffixes need checking when the prefix is already clean.
            (1..=w.len()).all(|k| !forb.contains(&w[w.len() - k..]))
        };
        // Enumerate clean words of length m.
        let mut states: Vec<Vec<Symbol>> = vec![Vec::new()];
        for _ in 0..m {
            let mut next = Vec::new();
            for w in &states {
                for a in 0..n as Symbol {
                    let mut v = w.clone();
                    v.push(a);
                    if clean(&v) {
                        next.push(v);
                    }
                }
            }
            states = next;
        }
        let index: std::collections::HashMap<&[Symbol], usize> = states.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect();
        let trans = states
            .iter()
            .map(|w| {
                (0..n as Symbol)
                    .map(|a| {
                        let mut v = w.clone();
                        v.push(a);
                        if clean(&v) {
                            index.get(&v[1..]).copied()
                        } else {
                            None
                        }
                    })
                    .collect()
            })
            .collect();
        let raw = LabeledGraph { num_states: states.len(), trans };
        let (graph, keep) = trim(&raw, n)?;
        let alphabet = restrict_alphabet(&alphabet, &keep)?;
        let map = symbol_map(&keep);
        // Forbidden words mentioning dropped symbols are vacuous now.
        let forbidden =
            forbidden.iter().filter_map(|w| w.symbols().iter().map(|&s| map[s as usize]).collect::<Option<Vec<_>>>().map(Word)).collect();
        Ok(ShiftPresentation { alphabet, kind: ShiftKind::Forbidden, adjacency: None, forbidden, memory: Some(m), graph })
    }

    /// Builds a sofic shift from a labeled graph; `edges` are (from, to, label).
    pub fn from_labeled_graph<S: AsRef<str>>(tokens: &[S], num_states: usize, edges: &[(usize, usize, Symbol)]) -> Result<Self> {
        let alphabet = Alphabet::new(tokens)?;
        let n = alphabet.len();
        let mut trans = vec![vec![None; n]; num_states];
        for &(s, t, a) in edges {
            if s >= num_states || t >= num_states {
                return Err(Error::InvalidArgument(format!("edge {s}->{t}: state out of range")));
            }
            if a as usize >= n {
                return Err(Error::InvalidArgument(format!("label {a} out of range")));
            }
            if trans[s][a as usize].is_some() {
                return Err(Error::NotRightResolving { state: s, label: alphabet.token(a).to_string() });
            }
            trans[s][a as usize] = Some(t);
        }
        let raw = LabeledGraph { num_states, trans };
        let (graph, keep) = trim(&raw, n)?;
        let alphabet = restrict_alphabet(&alphabet, &keep)?;
        Ok(ShiftPresentation { alphabet, kind: ShiftKind::Graph, adjacency: None, forbidden: Vec::new(), memory: None, graph })
    }

    /// True iff `u` is in the language. The empty word is always allowed.
    pub fn is_allowed(&self, u: &Word) -> bool {
        let mut cur: Vec<usize> = (0..self.graph.num_states).collect();
        for &a in u.symbols() {
            if a as usize >= self.alphabet.len() {
                return false;
            }
            let mut next: Vec<usize> = cur.iter().filter_map(|&s| self.graph.step(s, a)).collect();
            next.sort_unstable();
            next.dedup();
            if next.is_empty() {
                return false;
            }
            cur = next;
        }
        true
    }

    /// Checks symbols against the alphabet, then language membership.
    pub fn is_allowed_word(&self, u: &Word) -> Result<bool> {
        if let Some(&bad) = u.symbols().iter().find(|&&a| a as usize >= self.alphabet.len()) {
            return Err(Error::UnknownSymbol(format!("#{bad}")));
        }
        Ok(self.is_allowed(u))
    }

    /// Strong connectivity of the trimmed presentation graph.
    pub fn is_irreducible(&self) -> bool {
        self.graph.is_strongly_connected()
    }

    /// All allowed words of length `n`, in lexicographic order.
    pub fn allowed_words(&self, n: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let all: Vec<usize> = (0..self.graph.num_states).collect();
        let mut stack: Vec<(Vec<Symbol>, Vec<usize>)> = vec![(Vec::new(), all)];
        // Depth-first, pushing symbols in reverse so output is lexicographic.
        while let Some((w, states)) = stack.pop() {
            if w.len() == n {
                out.push(Word(w));
                continue;
            }
            for a in (0..self.alphabet.len() as Symbol).rev() {
                let mut next: Vec<usize> = states.iter().filter_map(|&s| self.graph.step(s, a)).collect();
                if next.is_empty() {
                    continue;
                }
                next.sort_unstable();
                next.dedup();
                let mut v = w.clone();
                v.push(a);
                stack.push((v, next));
            }
        }
        out
    }
}

/// Removes states without in- or out-edges until stable; then drops symbols
/// that label no surviving edge. Returns the renumbered graph and, per
/// original symbol, whether it survives.
fn trim(raw: &LabeledGraph, num_symbols: usize) -> Result<(LabeledGraph, Vec<bool>)> {
    let n = raw.num_states;
    let mut alive = vec![true; n];
    loop {
        let mut indeg = vec![0usize; n];
        let mut outdeg = vec![0usize; n];
        for (s, t, _) in raw.edges() {
            if alive[s] && alive[t] {
                outdeg[s] += 1;
                indeg[t] += 1;
            }
        }
        let mut changed = false;
        for s in 0..n {
            if alive[s] && (indeg[s] == 0 || outdeg[s] == 0) {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let new_id: Vec<Option<usize>> = {
        let mut next = 0;
        alive
            .iter()
            .map(|&a| {
                if a {
                    next += 1;
                    Some(next - 1)
                } else {
                    None
                }
            })
            .collect()
    };
    let m = alive.iter().filter(|&&a| a).count();
    if m == 0 {
        return Err(Error::EmptyShift);
    }
    let mut used = vec![false; num_symbols];
    for (s, t, a) in raw.edges() {
        if alive[s] && alive[t] {
            used[a as usize] = true;
        }
    }
    let sym_map = symbol_map(&used);
    let kept_symbols = used.iter().filter(|&&u| u).count();
    let mut trans = vec![vec![None; kept_symbols]; m];
    for (s, t, a) in raw.edges() {
        if let (Some(s2), Some(t2)) = (new_id[s], new_id[t]) {
            let a2 = sym_map[a as usize].expect("used symbol");
            trans[s2][a2 as usize] = Some(t2);
        }
    }
    Ok((LabeledGraph { num_states: m, trans }, used))
}

fn keep_indices(keep: &[bool]) -> Vec<usize> {
    keep.iter().enumerate().filter(|(_, &k)| k).map(|(i, _)| i).collect()
}

fn symbol_map(keep: &[bool]) -> Vec<Option<Symbol>> {
    let mut next = 0;
    keep.iter()
        .map(|&k| {
            if k {
                next += 1;
                Some(next - 1)
            } else {
                None
            }
        })
        .collect()
}

fn restrict_alphabet(alphabet: &Alphabet, keep: &[bool]) -> Result<Alphabet> {
    let tokens: Vec<&str> = keep_indices(keep).into_iter().map(|i| alphabet.token(i as Symbol)).collect();
    if tokens.is_empty() {
        return Err(Error::EmptyShift);
    }
    Alphabet::new(&tokens)
}

/// Parses the line-oriented shift file format:
///
/// ```text
/// alphabet 1 2 3
/// type adjacency          # or: forbidden, graph
/// row 1 1 0               # adjacency: one row per symbol
/// forbid 1 1              # forbidden: zero or more
/// states 2                # graph: state count, then edges
/// edge 0 1 a
/// ```
pub fn parse_shift(text: &str) -> Result<ShiftPresentation> {
    let lines: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, t)| !t.is_empty())
        .collect();
    let mut it = lines.iter();
    let (ln, first) = it.next().ok_or_else(|| Error::parse(1, "empty shift file"))?;
    if first[0] != "alphabet" || first.len() < 2 {
        return Err(Error::parse(*ln, "expected `alphabet <tok> ...`"));
    }
    let tokens = &first[1..];
    let alphabet = Alphabet::new(tokens).map_err(|e| Error::parse(*ln, e.to_string()))?;
    let (ln, second) = it.next().ok_or_else(|| Error::parse(*ln + 1, "missing `type` line"))?;
    if second[0] != "type" || second.len() != 2 {
        return Err(Error::parse(*ln, "expected `type adjacency|forbidden|graph`"));
    }
    match second[1] {
        "adjacency" => {
            let mut rows = Vec::new();
            for (ln, t) in it {
                if t[0] != "row" {
                    return Err(Error::parse(*ln, format!("unexpected `{}` in adjacency file", t[0])));
                }
                let row = t[1..]
                    .iter()
                    .map(|x| match *x {
                        "0" => Ok(false),
                        "1" => Ok(true),
                        _ => Err(Error::parse(*ln, format!("adjacency entry must be 0 or 1, got {x:?}"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                if row.len() != alphabet.len() {
                    return Err(Error::parse(*ln, format!("row has {} entries, expected {}", row.len(), alphabet.len())));
                }
                rows.push(row);
            }
            if rows.len() != alphabet.len() {
                return Err(Error::parse(lines.last().map_or(1, |l| l.0), format!("expected {} rows, got {}", alphabet.len(), rows.len())));
            }
            ShiftPresentation::from_adjacency(tokens, &rows)
        }
        "forbidden" => {
            let mut forbidden = Vec::new();
            for (ln, t) in it {
                if t[0] != "forbid" || t.len() < 2 {
                    return Err(Error::parse(*ln, "expected `forbid <tok> ...`"));
                }
                let w =
                    t[1..].iter().map(|x| alphabet.symbol(x)).collect::<Result<Vec<_>>>().map_err(|e| Error::parse(*ln, e.to_string()))?;
                forbidden.push(Word(w));
            }
            ShiftPresentation::from_forbidden(tokens, &forbidden)
        }
        "graph" => {
            let (ln, st) = it.next().ok_or_else(|| Error::parse(*ln + 1, "missing `states <n>`"))?;
            if st[0] != "states" || st.len() != 2 {
                return Err(Error::parse(*ln, "expected `states <n>`"));
            }
            let n: usize = st[1].parse().map_err(|_| Error::parse(*ln, "bad state count"))?;
            let mut edges = Vec::new();
            for (ln, t) in it {
                if t[0] != "edge" || t.len() != 4 {
                    return Err(Error::parse(*ln, "expected `edge <from> <to> <label>`"));
                }
                let s: usize = t[1].parse().map_err(|_| Error::parse(*ln, "bad state"))?;
                let d: usize = t[2].parse().map_err(|_| Error::parse(*ln, "bad state"))?;
                if s >= n || d >= n {
                    return Err(Error::parse(*ln, format!("state out of range 0..{n}")));
                }
                let a = alphabet.symbol(t[3]).map_err(|e| Error::parse(*ln, e.to_string()))?;
                edges.push((s, d, a));
            }
            ShiftPresentation::from_labeled_graph(tokens, n, &edges)
        }
        other => Err(Error::parse(*ln, format!("unknown shift type {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn parses_three_symbol_example() {
        let p = parse_shift(fixtures::THREE_SYMBOL_SHIFT).unwrap();
        assert_eq!(p.alphabet().len(), 3);
        assert_eq!(p.kind(), ShiftKind::Adjacency);
        assert!(!p.is_allowed(&p.word("1 3").unwrap()));
        assert!(!p.is_allowed(&p.word("3 1").unwrap()));
        assert!(p.is_allowed(&p.word("1 2 3 3 2 1").unwrap()));
        assert!(p.is_allowed(&Word::empty()));
    }

    #[test]
    fn full_shift_allows_everything() {
        let p = parse_shift(fixtures::FULL_TWO_SHIFT).unwrap();
        for n in 0..6 {
            assert_eq!(p.allowed_words(n).len(), 1 << n);
        }
    }

    #[test]
    fn even_shift_membership() {
        let p = parse_shift(fixtures::EVEN_SHIFT).unwrap();
        assert!(p.is_allowed(&p.word("1 0 0 1").unwrap()));
        assert!(!p.is_allowed(&p.word("1 0 1").unwrap()));
        assert!(p.is_allowed(&p.word("0 1").unwrap()));
    }

    #[test]
    fn trims_inessential_symbols() {
        // Symbol c can only be entered, never left.
        let text = "alphabet a b c\ntype adjacency\nrow 1 1 1\nrow 1 1 0\nrow 0 0 0\n";
        let p = parse_shift(text).unwrap();
        assert_eq!(p.alphabet().tokens(), &["a".to_string(), "b".to_string()]);
        assert_eq!(p.adjacency().unwrap(), &vec![vec![true, true], vec![true, true]]);
    }

    #[test]
    fn syntax_errors_report_lines() {
        let err = parse_shift("alphabet 0 1\ntype adjacency\nrow 1 1\nrow 1 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err:?}");
        let err = parse_shift("alphabet 0 1\n# c\ntype nope\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = parse_shift("type graph\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn rejects_non_right_resolving_and_empty() {
        let text = "alphabet a\ntype graph\nstates 2\nedge 0 1 a\nedge 0 0 a\nedge 1 0 a\n";
        assert!(matches!(parse_shift(text), Err(Error::NotRightResolving { state: 0, .. })));
        let text = "alphabet a b\ntype adjacency\nrow 0 1\nrow 0 0\n";
        assert_eq!(parse_shift(text).unwrap_err(), Error::EmptyShift);
        let text = "alphabet a\ntype forbidden\nforbid a\n";
        assert_eq!(parse_shift(text).unwrap_err(), Error::EmptyShift);
    }

    #[test]
    fn irreducibility() {
        assert!(parse_shift(fixtures::THREE_SYMBOL_SHIFT).unwrap().is_irreducible());
        assert!(parse_shift(fixtures::EVEN_SHIFT).unwrap().is_irreducible());
        let two_loops = "alphabet a b\ntype adjacency\nrow 1 0\nrow 0 1\n";
        assert!(!parse_shift(two_loops).unwrap().is_irreducible());
    }

    #[test]
    fn unknown_symbol_is_an_error() {
        let p = parse_shift(fixtures::FULL_TWO_SHIFT).unwrap();
        assert!(p.is_allowed_word(&Word(vec![0, 7])).is_err());
        assert!(p.word("0 x").is_err());
    }
}
