//! Locally constant rational functions and their Birkhoff sums.
//!
//! A function of order `k` depends on the first `k + 1` coordinates and is
//! stored as a table over `(k+1)`-words plus an optional default value.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::rational::{RatVec, Rational};
use crate::symbolic::{Cycle, EdgeGraph, ShiftPresentation, Symbol, Word};

#[derive(Clone, Debug, PartialEq)]
pub struct LocallyConstantFn {
    dim: usize,
    order: usize,
    table: HashMap<Word, RatVec>,
    default: Option<RatVec>,
}

/// Per-edge values of a function lifted to an [`EdgeGraph`].
pub type EdgeLift = Vec<RatVec>;

impl LocallyConstantFn {
    /// Checks that every allowed `(order+1)`-word is covered and every
    /// listed word is allowed.
    pub fn new(p: &ShiftPresentation, order: usize, table: HashMap<Word, RatVec>, default: Option<RatVec>) -> Result<Self> {
        let dim = match (table.values().next(), &default) {
            (Some(v), _) => v.dim(),
            (None, Some(d)) => d.dim(),
            (None, None) => return Err(Error::InvalidArgument("function has no values".into())),
        };
        if dim == 0 {
            return Err(Error::InvalidArgument("function must have at least one coordinate".into()));
        }
        if table.values().chain(default.iter()).any(|v| v.dim() != dim) {
            return Err(Error::InvalidArgument("value lines have inconsistent dimensions".into()));
        }
        for w in table.keys() {
            if w.len() != order + 1 {
                return Err(Error::InvalidArgument(format!("word {} has length {}, expected {}", p.render(w), w.len(), order + 1)));
            }
            if !p.is_allowed_word(w)? {
                return Err(Error::WordNotAllowed(p.render(w)));
            }
        }
        if default.is_none() {
            if let Some(w) = p.allowed_words(order + 1).into_iter().find(|w| !table.contains_key(w)) {
                return Err(Error::InvalidArgument(format!("no value for word {:?} and no default", p.render(&w))));
            }
        }
        Ok(LocallyConstantFn { dim, order, table, default })
    }

    pub fn constant(value: RatVec) -> Self {
        LocallyConstantFn { dim: value.dim(), order: 0, table: HashMap::new(), default: Some(value) }
    }

    /// Scalar function built from `value` on every allowed `(order+1)`-word.
    pub fn from_fn<F: FnMut(&Word) -> Rational>(p: &ShiftPresentation, order: usize, mut value: F) -> Self {
        let table = p
            .allowed_words(order + 1)
            .into_iter()
            .map(|w| {
                let v = RatVec(vec![value(&w)]);
                (w, v)
            })
            .collect();
        LocallyConstantFn { dim: 1, order, table, default: None }
    }

    /// Indicator of the cylinder `[u]`.
    pub fn indicator(u: &Word) -> Self {
        assert!(!u.is_empty(), "indicator of the empty word");
        let table = HashMap::from([(u.clone(), RatVec(vec![Rational::one()]))]);
        LocallyConstantFn { dim: 1, order: u.len() - 1, table, default: Some(RatVec(vec![Rational::zero()])) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of extra coordinates read beyond the first.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Length of the window the function reads.
    pub fn window(&self) -> usize {
        self.order + 1
    }

    /// Value on any point starting with `w` (`w` at least `window()` long).
    pub fn eval(&self, w: &[Symbol]) -> &RatVec {
        let key = Word(w[..self.window()].to_vec());
        self.table.get(&key).or(self.default.as_ref()).unwrap_or_else(|| panic!("no value for window {:?}", key))
    }

    /// Coordinate `i` as a scalar function.
    pub fn component(&self, i: usize) -> LocallyConstantFn {
        let pick = |v: &RatVec| RatVec(vec![v.0[i].clone()]);
        LocallyConstantFn {
            dim: 1,
            order: self.order,
            table: self.table.iter().map(|(w, v)| (w.clone(), pick(v))).collect(),
            default: self.default.as_ref().map(pick),
        }
    }

    pub fn scale(&self, s: &Rational) -> LocallyConstantFn {
        LocallyConstantFn {
            dim: self.dim,
            order: self.order,
            table: self.table.iter().map(|(w, v)| (w.clone(), v.scale(s))).collect(),
            default: self.default.as_ref().map(|v| v.scale(s)),
        }
    }

    /// Largest absolute value over all stored entries and coordinates.
    pub fn sup_norm(&self) -> Rational {
        self.table.values().chain(self.default.iter()).map(RatVec::max_abs).max().unwrap_or_else(Rational::zero)
    }

    /// Renders the function in the potential file format.
    pub fn to_text(&self, p: &ShiftPresentation) -> String {
        let mut out = format!("order {}\n", self.order);
        let mut rows: Vec<_> = self.table.iter().collect();
        rows.sort_by(|a, b| a.0.cmp(b.0));
        for (w, v) in rows {
            out.push_str(&format!("value {} : {}\n", p.render(w), v));
        }
        if let Some(d) = &self.default {
            out.push_str(&format!("default : {d}\n"));
        }
        out
    }
}

/// Parses a potential file against the shift it lives on.
pub fn parse_potential(text: &str, p: &ShiftPresentation) -> Result<LocallyConstantFn> {
    let mut order: Option<usize> = None;
    let mut table = HashMap::new();
    let mut default = None;
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        last_line = ln;
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match head {
            "order" => {
                if order.is_some() {
                    return Err(Error::parse(ln, "duplicate `order` line"));
                }
                order = Some(rest.trim().parse().map_err(|_| Error::parse(ln, "expected `order <k>`"))?);
            }
            "value" | "default" => {
                let k = order.ok_or_else(|| Error::parse(ln, "`order` must come first"))?;
                let (lhs, rhs) = rest.split_once(':').ok_or_else(|| Error::parse(ln, "expected `:` between word and values"))?;
                let values = parse_values(rhs, ln)?;
                if head == "default" {
                    if !lhs.trim().is_empty() {
                        return Err(Error::parse(ln, "expected `default : <r1> ...`"));
                    }
                    if default.replace(values).is_some() {
                        return Err(Error::parse(ln, "duplicate `default` line"));
                    }
                } else {
                    let w = p.alphabet().parse_word(lhs).map_err(|e| Error::parse(ln, e.to_string()))?;
                    if w.len() != k + 1 {
                        return Err(Error::parse(ln, format!("word must have length {}", k + 1)));
                    }
                    if !p.is_allowed(&w) {
                        return Err(Error::parse(ln, format!("word {:?} is not allowed", lhs.trim())));
                    }
                    if table.insert(w, values).is_some() {
                        return Err(Error::parse(ln, "duplicate value line"));
                    }
                }
            }
            other => return Err(Error::parse(ln, format!("unknown directive {other:?}"))),
        }
    }
    let order = order.ok_or_else(|| Error::parse(last_line.max(1), "missing `order` line"))?;
    LocallyConstantFn::new(p, order, table, default).map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::parse(last_line.max(1), msg),
        e => e,
    })
}

fn parse_values(s: &str, ln: usize) -> Result<RatVec> {
    let v = s
        .split_whitespace()
        .map(|t| t.parse::<Rational>().map_err(|_| Error::parse(ln, format!("not a rational p/q: {t:?}"))))
        .collect::<Result<Vec<_>>>()?;
    if v.is_empty() {
        return Err(Error::parse(ln, "no values"));
    }
    Ok(RatVec(v))
}

/// `Σ_{j<n} g(σ^j x^∞)`.
pub fn birkhoff_sum(g: &LocallyConstantFn, x: &Word, n: usize) -> RatVec {
    let mut s = RatVec::zeros(g.dim());
    if n == 0 {
        return s;
    }
    let ext = x.periodic_window(0, n + g.order());
    for j in 0..n {
        s = s.add(g.eval(&ext.0[j..]));
    }
    s
}

/// Average of `g` over the periodic orbit of `c`.
pub fn rotation_vector_of_cycle(g: &LocallyConstantFn, c: &Cycle) -> RatVec {
    let n = c.period();
    birkhoff_sum(g, c.word(), n).scale(&Rational::from(n).recip())
}

/// Value of `g` on each edge of `graph`.
pub fn lift_to_edges(g: &LocallyConstantFn, graph: &EdgeGraph) -> Result<EdgeLift> {
    if g.order() > graph.order() {
        return Err(Error::OrderTooSmall { need: g.order(), have: graph.order() });
    }
    Ok(graph.edges().iter().map(|e| g.eval(e.word.symbols()).clone()).collect())
}

/// Scalar coordinate `i` of a lift.
pub fn lift_component(lift: &EdgeLift, i: usize) -> Vec<Rational> {
    lift.iter().map(|v| v.0[i].clone()).collect()
}

/// `ℓ`: the longest window read by any of `fns`.
pub fn locality<'a, I: IntoIterator<Item = &'a LocallyConstantFn>>(fns: I) -> usize {
    fns.into_iter().map(LocallyConstantFn::window).max().unwrap_or(1)
}
