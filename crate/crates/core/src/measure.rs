//! Invariant measures as exact edge frequencies on an [`EdgeGraph`].

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lp::Lp;
use crate::potential::{lift_to_edges, EdgeLift, LocallyConstantFn};
use crate::rational::{RatVec, Rational};
use crate::symbolic::{Cycle, EdgeGraph, ShiftPresentation, Vertex, Word};

/// Nonnegative, normalized, flow-balanced rational edge weights.
#[derive(Clone)]
pub struct OccupationMeasure {
    graph: Arc<EdgeGraph>,
    weights: Vec<Rational>,
}

impl PartialEq for OccupationMeasure {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.graph, &other.graph) && self.weights == other.weights
    }
}

impl fmt::Debug for OccupationMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let support: Vec<String> = self.support().map(|e| format!("{:?}:{}", self.graph.edges()[e].word, self.weights[e])).collect();
        write!(f, "Occupation[{}]", support.join(", "))
    }
}

impl OccupationMeasure {
    pub fn new(graph: Arc<EdgeGraph>, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() != graph.num_edges() {
            return Err(Error::InvalidArgument(format!("expected {} edge weights, got {}", graph.num_edges(), weights.len())));
        }
        if weights.iter().any(Rational::is_negative) {
            return Err(Error::InvalidArgument("negative edge weight".into()));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidArgument(format!("edge weights sum to {total}, not 1")));
        }
        for v in 0..graph.num_vertices() {
            let out: Rational = graph.out_edges(v).iter().map(|&e| &weights[e]).sum();
            let inn: Rational = graph.in_edges(v).iter().map(|&e| &weights[e]).sum();
            if out != inn {
                return Err(Error::InvalidArgument(format!(
                    "flow not balanced at vertex {:?} (in {inn}, out {out})",
                    graph.vertices()[v].word
                )));
            }
        }
        Ok(OccupationMeasure { graph, weights })
    }

    pub fn graph(&self) -> &Arc<EdgeGraph> {
        &self.graph
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, e: usize) -> &Rational {
        &self.weights[e]
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.weights.len()).filter(|&e| !self.weights[e].is_zero())
    }

    /// Mass through vertex `v`.
    pub fn vertex_mass(&self, v: usize) -> Rational {
        self.graph.out_edges(v).iter().map(|&e| &self.weights[e]).sum()
    }

    /// Largest out-degree inside the support (1 means a single cycle).
    pub fn max_support_out_degree(&self) -> usize {
        (0..self.graph.num_vertices())
            .map(|v| self.graph.out_edges(v).iter().filter(|&&e| !self.weights[e].is_zero()).count())
            .max()
            .unwrap_or(0)
    }

    /// Markov extension to a graph of higher order over the same shift:
    /// the weight of a longer block is the chained transition product.
    pub fn extend_to(&self, target: &Arc<EdgeGraph>) -> Result<OccupationMeasure> {
        let l = self.graph.order();
        if target.order() < l || target.is_state_augmented() != self.graph.is_state_augmented() {
            return Err(Error::GraphMismatch);
        }
        if Arc::ptr_eq(target, &self.graph) {
            return Ok(self.clone());
        }
        let fa = self.graph.automaton();
        let mut weights = Vec::with_capacity(target.num_edges());
        for e in target.edges() {
            let x = e.word.symbols();
            let mut state = target.vertices()[e.from].state;
            let mut w = Rational::one();
            for i in 0..x.len() - l {
                let v = self.graph.vertex_id(&Vertex { state, word: Word(x[i..i + l].to_vec()) }).ok_or(Error::GraphMismatch)?;
                let se = self.graph.edge_from(v, x[i + l]).ok_or(Error::GraphMismatch)?;
                let we = &self.weights[se];
                if we.is_zero() {
                    w = Rational::zero();
                    break;
                }
                w = if i == 0 { we.clone() } else { w * we / self.vertex_mass(v) };
                if let (Some(q), Some(fa)) = (state, fa) {
                    state = Some(fa.step(q, x[i]).ok_or(Error::GraphMismatch)?);
                }
            }
            weights.push(w);
        }
        OccupationMeasure::new(target.clone(), weights)
    }

    /// Occupation file text.
    pub fn to_text(&self, p: &ShiftPresentation) -> String {
        let mut out = format!("order {}\n", self.graph.order());
        for e in self.support() {
            let edge = &self.graph.edges()[e];
            let state = match self.graph.vertices()[edge.from].state {
                Some(q) => format!("@{q} "),
                None => String::new(),
            };
            out.push_str(&format!("edge {state}{} {}\n", p.render(&edge.word), self.weights[e]));
        }
        out
    }
}

/// Reads an occupation file (`order L` then `edge [@state] w0 .. wL r`
/// lines). The measure is built on a graph of that order and then extended
/// to `graph` when `graph` has higher order.
pub fn parse_occupation(text: &str, p: &ShiftPresentation, graph: &Arc<EdgeGraph>) -> Result<OccupationMeasure> {
    let mut order: Option<usize> = None;
    let mut entries: Vec<(usize, Option<usize>, Word, Rational)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let toks: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        match toks[0] {
            "order" if toks.len() == 2 && order.is_none() => {
                order = Some(toks[1].parse().map_err(|_| Error::parse(ln, "expected `order <L>`"))?);
            }
            "edge" => {
                let l = order.ok_or_else(|| Error::parse(ln, "`order` must come first"))?;
                let mut rest = &toks[1..];
                let mut state = None;
                if let Some(s) = rest.first().and_then(|t| t.strip_prefix('@')) {
                    state = Some(s.parse().map_err(|_| Error::parse(ln, "bad state"))?);
                    rest = &rest[1..];
                }
                if rest.len() != l + 2 {
                    return Err(Error::parse(ln, format!("expected {} symbols and a weight", l + 1)));
                }
                let w = p.alphabet().parse_word(&rest[..l + 1].join(" ")).map_err(|e| Error::parse(ln, e.to_string()))?;
                let r: Rational = rest[l + 1].parse().map_err(|_| Error::parse(ln, format!("not a rational p/q: {:?}", rest[l + 1])))?;
                entries.push((ln, state, w, r));
            }
            other => return Err(Error::parse(ln, format!("unexpected {other:?}"))),
        }
    }
    let l = order.ok_or_else(|| Error::parse(1, "missing `order` line"))?;
    if l < 1 {
        return Err(Error::parse(1, "order must be at least 1"));
    }
    let base = if l == graph.order() {
        graph.clone()
    } else if l < graph.order() {
        Arc::new(EdgeGraph::new(p, l)?)
    } else {
        return Err(Error::OrderTooSmall { need: l, have: graph.order() });
    };
    if base.order() != l {
        return Err(Error::parse(1, format!("order {l} is below the shift memory {}", base.order())));
    }
    let mut weights = vec![Rational::zero(); base.num_edges()];
    for (ln, state, w, r) in entries {
        if state.is_some() != base.is_state_augmented() {
            return Err(Error::parse(ln, "state prefix `@q` is required exactly for graph-presented shifts"));
        }
        let v = base
            .vertex_id(&Vertex { state, word: Word(w.0[..l].to_vec()) })
            .ok_or_else(|| Error::parse(ln, "edge is not in the edge graph"))?;
        let e = base.edge_from(v, w.0[l]).ok_or_else(|| Error::parse(ln, "edge is not in the edge graph"))?;
        if !weights[e].is_zero() {
            return Err(Error::parse(ln, "duplicate edge"));
        }
        weights[e] = r;
    }
    OccupationMeasure::new(base, weights)?.extend_to(graph)
}

/// Uniform weight on the closed walk lifting `c^∞`.
pub fn occupation_of_cycle(c: &Cycle, graph: &Arc<EdgeGraph>) -> Result<OccupationMeasure> {
    let walk =
        graph.lift_periodic(c.word()).ok_or_else(|| Error::WordNotAllowed(format!("{:?} is not a cycle of the edge graph", c.word())))?;
    Ok(occupation_of_walk(&walk, graph))
}

/// Uniform weight on a closed walk given by its edges.
pub fn occupation_of_walk(walk: &[usize], graph: &Arc<EdgeGraph>) -> OccupationMeasure {
    let mut weights = vec![Rational::zero(); graph.num_edges()];
    let step = Rational::from(walk.len()).recip();
    for &e in walk {
        weights[e] += &step;
    }
    OccupationMeasure { graph: graph.clone(), weights }
}

/// `Σ_e m(e) g(e)` for a lifted function.
pub fn integrate_lift(m: &OccupationMeasure, lift: &EdgeLift) -> RatVec {
    let d = lift.first().map_or(0, RatVec::dim);
    let mut s = RatVec::zeros(d);
    for e in m.support() {
        s.add_scaled(&m.weights[e], &lift[e]);
    }
    s
}

pub fn integrate(m: &OccupationMeasure, g: &LocallyConstantFn) -> Result<RatVec> {
    Ok(integrate_lift(m, &lift_to_edges(g, &m.graph)?))
}

pub fn convex_combine(parts: &[OccupationMeasure], lambda: &[Rational]) -> Result<OccupationMeasure> {
    if parts.is_empty() || parts.len() != lambda.len() {
        return Err(Error::InvalidArgument("need one weight per measure".into()));
    }
    if lambda.iter().any(Rational::is_negative) || !lambda.iter().sum::<Rational>().is_one() {
        return Err(Error::InvalidArgument("weights must be nonnegative and sum to 1".into()));
    }
    let g = &parts[0].graph;
    if parts.iter().any(|m| !Arc::ptr_eq(&m.graph, g)) {
        return Err(Error::GraphMismatch);
    }
    let mut weights = vec![Rational::zero(); g.num_edges()];
    for (m, l) in parts.iter().zip(lambda) {
        if l.is_zero() {
            continue;
        }
        for e in m.support() {
            weights[e] += l * &m.weights[e];
        }
    }
    Ok(OccupationMeasure { graph: g.clone(), weights })
}

/// `m([u])` for `|u| <= L + 1`.
pub fn cylinder_frequency(m: &OccupationMeasure, u: &Word) -> Result<Rational> {
    if u.len() > m.graph.order() + 1 {
        return Err(Error::InvalidArgument(format!("cylinder of length {} exceeds the block length {}", u.len(), m.graph.order() + 1)));
    }
    Ok(m.support().filter(|&e| m.graph.edges()[e].word.starts_with(u)).map(|e| &m.weights[e]).sum())
}

/// Finite test family and radius of a weak* neighbourhood.
#[derive(Clone, Debug)]
pub struct TestFamily {
    pub functions: Vec<LocallyConstantFn>,
    pub eps: Rational,
}

impl TestFamily {
    pub fn new(functions: Vec<LocallyConstantFn>, eps: Rational) -> Result<Self> {
        if functions.is_empty() {
            return Err(Error::InvalidArgument("test family is empty".into()));
        }
        if !eps.is_positive() {
            return Err(Error::InvalidArgument("radius must be positive".into()));
        }
        if functions.iter().any(|f| f.dim() != 1) {
            return Err(Error::InvalidArgument("test functions must be scalar".into()));
        }
        Ok(TestFamily { functions, eps })
    }

    pub fn max_sup_norm(&self) -> Rational {
        self.functions.iter().map(LocallyConstantFn::sup_norm).max().unwrap_or_else(Rational::zero)
    }

    pub fn locality(&self) -> usize {
        crate::potential::locality(&self.functions)
    }
}

/// `|∫f dm₁ − ∫f dm₂| < ε` for all `f` in the family.
pub fn weakstar_close(m1: &OccupationMeasure, m2: &OccupationMeasure, fam: &TestFamily) -> Result<bool> {
    if !Arc::ptr_eq(&m1.graph, &m2.graph) {
        return Err(Error::GraphMismatch);
    }
    for f in &fam.functions {
        let lift = lift_to_edges(f, &m1.graph)?;
        let d = integrate_lift(m1, &lift).sub(&integrate_lift(m2, &lift));
        if d.max_abs() >= fam.eps {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Entropy of the Markov measure with these edge frequencies.
pub fn entropy(m: &OccupationMeasure) -> f64 {
    if m.max_support_out_degree() <= 1 {
        return 0.0;
    }
    let w: Vec<f64> = m.weights.iter().map(Rational::to_f64).collect();
    markov_entropy(&m.graph, &w)
}

/// `−Σ w(e) log(w(e)/s(src e))` with `0 log 0 = 0`.
pub fn markov_entropy(graph: &EdgeGraph, w: &[f64]) -> f64 {
    let mut h = 0.0;
    for v in 0..graph.num_vertices() {
        let s: f64 = graph.out_edges(v).iter().map(|&e| w[e]).sum();
        for &e in graph.out_edges(v) {
            if w[e] > 0.0 && s > 0.0 {
                h -= w[e] * (w[e] / s).ln();
            }
        }
    }
    h.max(0.0)
}

/// Cycles with positive weights whose occupations recombine to a measure.
#[derive(Clone, Debug)]
pub struct ConvexCombo {
    pub cycles: Vec<Cycle>,
    /// The closed edge walk of each cycle, as peeled.
    pub walks: Vec<Vec<usize>>,
    pub weights: Vec<Rational>,
    /// Whether the cycle rotation vectors satisfy the rank condition for the
    /// constraint in play; `None` when not evaluated.
    pub nondegenerate: Option<bool>,
}

impl ConvexCombo {
    pub fn occupations(&self, graph: &Arc<EdgeGraph>) -> Vec<OccupationMeasure> {
        self.walks.iter().map(|w| occupation_of_walk(w, graph)).collect()
    }

    pub fn recombine(&self, graph: &Arc<EdgeGraph>) -> Result<OccupationMeasure> {
        convex_combine(&self.occupations(graph), &self.weights)
    }
}

/// Greedy peeling: from the least supported vertex follow the heaviest
/// outgoing edge until a vertex repeats, remove the loop's bottleneck.
pub fn flow_decompose(m: &OccupationMeasure) -> ConvexCombo {
    let g = &m.graph;
    // Work with unnormalized flow: residual weights on the edges.
    let mut res = m.weights.clone();
    let mut cycles = Vec::new();
    let mut walks = Vec::new();
    let mut weights = Vec::new();
    loop {
        let start = (0..g.num_vertices()).find(|&v| g.out_edges(v).iter().any(|&e| !res[e].is_zero()));
        let Some(start) = start else { break };
        let mut pos: HashMap<usize, usize> = HashMap::new();
        let mut path: Vec<usize> = Vec::new();
        let mut v = start;
        let first = loop {
            if let Some(&i) = pos.get(&v) {
                break i;
            }
            pos.insert(v, path.len());
            let e = *g
                .out_edges(v)
                .iter()
                .filter(|&&e| !res[e].is_zero())
                .max_by(|&&a, &&b| res[a].cmp(&res[b]).then(b.cmp(&a)))
                .expect("balanced flow leaves every supported vertex");
            path.push(e);
            v = g.edges()[e].to;
        };
        let lp = path[first..].to_vec();
        let bottleneck = lp.iter().map(|&e| res[e].clone()).min().expect("nonempty loop");
        for &e in &lp {
            res[e] -= &bottleneck;
        }
        let weight = &bottleneck * &Rational::from(lp.len());
        cycles.push(Cycle::new(g.walk_word(&lp)).canonical());
        walks.push(lp);
        weights.push(weight);
    }
    ConvexCombo { cycles, walks, weights, nondegenerate: None }
}

/// The LP polytope of occupation measures, optionally cut down to the
/// fiber `∫φ = h`. Variables are edge weights.
pub fn fiber_lp(g: &EdgeGraph, constraint: Option<(&EdgeLift, &RatVec)>) -> Lp {
    let n = g.num_edges();
    let mut lp = Lp::new(n);
    for v in 0..g.num_vertices() {
        let mut row = vec![Rational::zero(); n];
        for &e in g.out_edges(v) {
            row[e] += Rational::one();
        }
        for &e in g.in_edges(v) {
            row[e] -= Rational::one();
        }
        if row.iter().any(|x| !x.is_zero()) {
            lp.add_eq(row, Rational::zero());
        }
    }
    lp.add_eq(vec![Rational::one(); n], Rational::one());
    if let Some((phi, h)) = constraint {
        for i in 0..h.dim() {
            lp.add_eq(phi.iter().map(|v| v.0[i].clone()).collect(), h.0[i].clone());
        }
    }
    lp
}

/// Float-weighted occupation produced by the entropy maximizer.
#[derive(Clone, Debug)]
pub struct FloatOccupation {
    pub weights: Vec<f64>,
    pub entropy: f64,
    /// Sup-norm of `∫φ − h` at the returned point.
    pub residual: f64,
}

/// Entropy maximizer over occupation measures (optionally with `∫φ = h`).
/// Solves the convex dual `min_θ P(θ) − θ·h` where `P` is the log spectral
/// radius of the tilted transfer matrix; the answer is the equilibrium
/// Markov measure at the optimal `θ`.
pub fn max_entropy_in_fiber(g: &EdgeGraph, constraint: Option<(&EdgeLift, &RatVec)>, tol: f64) -> Result<FloatOccupation> {
    if fiber_lp(g, constraint).feasible_point().is_none() {
        return Err(Error::Infeasible("fiber is empty".into()));
    }
    let (phi, h): (Vec<Vec<f64>>, Vec<f64>) = match constraint {
        Some((phi, h)) => (phi.iter().map(RatVec::to_f64).collect(), h.to_f64()),
        None => (vec![Vec::new(); g.num_edges()], Vec::new()),
    };
    let d = h.len();
    let eval = |theta: &[f64]| -> Equilibrium { equilibrium(g, &phi, theta) };
    let objective = |eq: &Equilibrium, theta: &[f64]| eq.pressure - dotf(theta, &h);
    let mut theta = vec![0.0; d];
    let mut eq = eval(&theta);
    for _ in 0..200 {
        let grad: Vec<f64> = (0..d).map(|i| eq.mean[i] - h[i]).collect();
        if grad.iter().all(|x| x.abs() < tol) {
            break;
        }
        // Newton direction from the covariance-like Hessian by differences.
        let step = 1e-6;
        let mut hess = vec![vec![0.0; d]; d];
        for j in 0..d {
            let mut tp = theta.clone();
            tp[j] += step;
            let ep = eval(&tp);
            for i in 0..d {
                hess[i][j] = (ep.mean[i] - eq.mean[i]) / step;
            }
        }
        let mut dir = solve_f64(&hess, &grad.iter().map(|x| -x).collect::<Vec<_>>())
            .filter(|dir| dotf(dir, &grad) < 0.0)
            .unwrap_or_else(|| grad.iter().map(|x| -x).collect());
        let f0 = objective(&eq, &theta);
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = theta.iter().zip(&dir).map(|(t, s)| t + s).collect();
            let ec = eval(&cand);
            if objective(&ec, &cand) <= f0 + 1e-4 * dotf(&dir, &grad) || dir.iter().all(|x| x.abs() < 1e-14) {
                theta = cand;
                eq = ec;
                accepted = true;
                break;
            }
            dir.iter_mut().for_each(|x| *x *= 0.5);
        }
        if !accepted {
            break;
        }
    }
    let residual = (0..d).map(|i| (eq.mean[i] - h[i]).abs()).fold(0.0, f64::max);
    let entropy = markov_entropy(g, &eq.weights);
    Ok(FloatOccupation { weights: eq.weights, entropy, residual })
}

struct Equilibrium {
    pressure: f64,
    mean: Vec<f64>,
    weights: Vec<f64>,
}

fn dotf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn equilibrium(g: &EdgeGraph, phi: &[Vec<f64>], theta: &[f64]) -> Equilibrium {
    let n = g.num_vertices();
    let tilt: Vec<f64> = phi.iter().map(|p| dotf(p, theta).exp()).collect();
    let mut m = vec![vec![0.0; n]; n];
    for (e, edge) in g.edges().iter().enumerate() {
        m[edge.from][edge.to] += tilt[e];
    }
    let (rho, left, right) = perron(&m);
    let norm: f64 = left.iter().zip(&right).map(|(a, b)| a * b).sum();
    let weights: Vec<f64> =
        g.edges().iter().enumerate().map(|(e, edge)| left[edge.from] * tilt[e] * right[edge.to] / (rho * norm)).collect();
    let d = theta.len();
    let mean = (0..d).map(|i| weights.iter().zip(phi).map(|(w, p)| w * p[i]).sum()).collect();
    Equilibrium { pressure: rho.ln(), mean, weights }
}

/// Perron root with left and right eigenvectors of a nonnegative
/// irreducible matrix, by repeated squaring of `M + I` and a final
/// power-iteration polish.
pub fn perron(m: &[Vec<f64>]) -> (f64, Vec<f64>, Vec<f64>) {
    let n = m.len();
    let shifted: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[i][j] + if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut p = shifted.clone();
    for _ in 0..64 {
        let mut sq = vec![vec![0.0; n]; n];
        for i in 0..n {
            for k in 0..n {
                if p[i][k] != 0.0 {
                    for j in 0..n {
                        sq[i][j] += p[i][k] * p[k][j];
                    }
                }
            }
        }
        let mx = sq.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
        p = sq.into_iter().map(|r| r.into_iter().map(|x| x / mx).collect()).collect();
    }
    let col = (0..n).max_by(|&a, &b| p[0][a].total_cmp(&p[0][b])).unwrap_or(0);
    let row = (0..n).max_by(|&a, &b| p[a][0].total_cmp(&p[b][0])).unwrap_or(0);
    let mut right: Vec<f64> = (0..n).map(|i| p[i][col]).collect();
    let mut left: Vec<f64> = (0..n).map(|j| p[row][j]).collect();
    let normalize = |v: &mut Vec<f64>| {
        let s: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= s);
    };
    normalize(&mut right);
    normalize(&mut left);
    for _ in 0..50 {
        let r2: Vec<f64> = (0..n).map(|i| (0..n).map(|j| shifted[i][j] * right[j]).sum()).collect();
        let l2: Vec<f64> = (0..n).map(|j| (0..n).map(|i| left[i] * shifted[i][j]).sum()).collect();
        right = r2;
        left = l2;
        normalize(&mut right);
        normalize(&mut left);
    }
    let mr: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m[i][j] * right[j]).sum()).collect();
    let rho = dotf(&left, &mr) / dotf(&left, &right);
    (rho, left, right)
}

fn solve_f64(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &x)| r.iter().copied().chain([x]).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() < 1e-14 {
            return None;
        }
        m.swap(c, p);
        for i in 0..n {
            if i != c {
                let f = m[i][c] / m[c][c];
                for j in c..=n {
                    m[i][j] -= f * m[c][j];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::potential::parse_potential;
    use crate::rational::q;
    use crate::symbolic::parse_shift;

    fn setup(shift: &str, order: usize) -> (ShiftPresentation, Arc<EdgeGraph>) {
        let p = parse_shift(shift).unwrap();
        let g = Arc::new(EdgeGraph::new(&p, order).unwrap());
        (p, g)
    }

    fn cyc(p: &ShiftPresentation, w: &str) -> Cycle {
        Cycle::new(p.word(w).unwrap())
    }

    fn weight_of(m: &OccupationMeasure, p: &ShiftPresentation, w: &str) -> Rational {
        let w = p.word(w).unwrap();
        m.graph().edges().iter().enumerate().filter(|(_, e)| e.word == w).map(|(i, _)| m.weight(i).clone()).sum()
    }

    fn uniform(g: &Arc<EdgeGraph>) -> OccupationMeasure {
        let n = g.num_edges() as i64;
        OccupationMeasure::new(g.clone(), vec![q(1, n); n as usize]).unwrap()
    }

    #[test]
    fn cycle_occupations() {
        let (p, g) = setup(fixtures::FULL_TWO_SHIFT, 1);
        let m = occupation_of_cycle(&cyc(&p, "0"), &g).unwrap();
        assert_eq!(weight_of(&m, &p, "0 0"), q(1, 1));
        let m = occupation_of_cycle(&cyc(&p, "0 1"), &g).unwrap();
        assert_eq!(weight_of(&m, &p, "0 1"), q(1, 2));
        assert_eq!(weight_of(&m, &p, "1 0"), q(1, 2));
        let (p, g) = setup(fixtures::GOLDEN_MEAN, 1);
        let m = occupation_of_cycle(&cyc(&p, "0 1"), &g).unwrap();
        assert_eq!(weight_of(&m, &p, "0 1"), q(1, 2));
        assert!(occupation_of_cycle(&cyc(&p, "1"), &g).is_err());
    }

    #[test]
    fn integrals() {
        let (p, g) = setup(fixtures::FULL_TWO_SHIFT, 1);
        let x0 = parse_potential(fixtures::X0, &p).unwrap();
        assert_eq!(integrate(&uniform(&g), &x0).unwrap(), RatVec(vec![q(1, 2)]));
        let c = LocallyConstantFn::constant(RatVec(vec![q(5, 3)]));
        assert_eq!(integrate(&uniform(&g), &c).unwrap(), RatVec(vec![q(5, 3)]));
        let (p, g) = setup(fixtures::THREE_SYMBOL_SHIFT, 1);
        let phi = parse_potential(fixtures::THREE_SYMBOL_INDICATORS, &p).unwrap();
        let m = occupation_of_cycle(&cyc(&p, "1 2"), &g).unwrap();
        assert_eq!(integrate(&m, &phi).unwrap(), RatVec(vec![q(1, 2), q(1, 2), q(0, 1)]));
    }

    #[test]
    fn combinations_and_cylinders() {
        let (p, g) = setup(fixtures::FULL_TWO_SHIFT, 1);
        let a = occupation_of_cycle(&cyc(&p, "0"), &g).unwrap();
        let b = occupation_of_cycle(&cyc(&p, "1"), &g).unwrap();
        let half = q(1, 2);
        let m = convex_combine(&[a.clone(), b.clone()], &[half.clone(), half.clone()]).unwrap();
        assert_eq!(weight_of(&m, &p, "0 0"), half);
        assert_eq!(weight_of(&m, &p, "1 1"), half);
        assert_eq!(convex_combine(&[m.clone(), m.clone()], &[half.clone(), half.clone()]).unwrap(), m);
        assert!(convex_combine(&[a.clone(), b.clone()], &[half.clone(), q(1, 3)]).is_err());
        let c01 = occupation_of_cycle(&cyc(&p, "0 1"), &g).unwrap();
        assert_eq!(cylinder_frequency(&c01, &p.word("0").unwrap()).unwrap(), half);
        assert_eq!(cylinder_frequency(&c01, &Word::empty()).unwrap(), q(1, 1));
        assert_eq!(cylinder_frequency(&a, &p.word("1").unwrap()).unwrap(), q(0, 1));
        assert!(cylinder_frequency(&a, &p.word("0 0 0").unwrap()).is_err());
    }

    #[test]
    fn weakstar() {
        let (p, g) = setup(fixtures::FULL_TWO_SHIFT, 1);
        let x0 = parse_potential(fixtures::X0, &p).unwrap();
        let a = occupation_of_cycle(&cyc(&p, "0"), &g).unwrap();
        let b = occupation_of_cycle(&cyc(&p, "1"), &g).unwrap();
        let fam = TestFamily::new(vec![x0.clone()], q(1, 2)).unwrap();
        assert!(weakstar_close(&a, &a, &fam).unwrap());
        assert!(!weakstar_close(&a, &b, &fam).unwrap());
        let c01 = occupation_of_cycle(&cyc(&p, "0 1"), &g).unwrap();
        let fam = TestFamily::new(vec![x0], q(1, 10)).unwrap();
        assert!(weakstar_close(&c01, &uniform(&g), &fam).unwrap());
    }

    #[test]
    fn entropies() {
        let (p, g) = setup(fixtures::FULL_TWO_SHIFT, 2);
        assert_eq!(entropy(&occupation_of_cycle(&cyc(&p, "0 1 1"), &g).unwrap()), 0.0);
        // At order 1 the same orbit revisits vertex 1 and is no longer simple.
        let (p, g) = setup(fixtures::FULL_TWO_SHIFT, 1);
        assert!(entropy(&occupation_of_cycle(&cyc(&p, "0 1 1"), &g).unwrap()) > 0.0);
        assert!((entropy(&uniform(&g)) - 2f64.ln()).abs() < 1e-12);
        let (_, g) = setup(fixtures::GOLDEN_MEAN, 1);
        let m = max_entropy_in_fiber(&g, None, 1e-12).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((m.entropy - golden.ln()).abs() < 1e-9, "{}", m.entropy);
        // Parry measure: edge 0->0 has weight 1/(golden * (1 + 1/golden^2)).
        let parry_00 = 1.0 / (golden * golden + 1.0) * golden;
        let e00 = g.edges().iter().position(|e| e.word.0 == vec![0, 0]).unwrap();
        assert!((m.weights[e00] - parry_00).abs() < 1e-6, "{} vs {parry_00}", m.weights[e00]);
    }

    #[test]
    fn constrained_max_entropy_is_symmetric() {
        let (p, g) = setup(fixtures::FULL_TWO_SHIFT, 1);
        let x0 = lift_to_edges(&parse_potential(fixtures::X0, &p).unwrap(), &g).unwrap();
        let h = RatVec(vec![q(1, 2)]);
        let m = max_entropy_in_fiber(&g, Some((&x0, &h)), 1e-12).unwrap();
        assert!(m.weights.iter().all(|w| (w - 0.25).abs() < 1e-9));
        let h = RatVec(vec![q(1, 3)]);
        let m = max_entropy_in_fiber(&g, Some((&x0, &h)), 1e-12).unwrap();
        assert!(m.residual < 1e-10);
        let p3 = 1.0f64 / 3.0;
        let want = -(p3 * p3.ln() + (1.0 - p3) * (1.0 - p3).ln());
        assert!((m.entropy - want).abs() < 1e-9);
        let h = RatVec(vec![q(3, 2)]);
        assert!(matches!(max_entropy_in_fiber(&g, Some((&x0, &h)), 1e-12), Err(Error::Infeasible(_))));
    }

    #[test]
    fn decomposition() {
        let (p, g) = setup(fixtures::FULL_TWO_SHIFT, 2);
        let c = occupation_of_cycle(&cyc(&p, "0 1 1"), &g).unwrap();
        let d = flow_decompose(&c);
        assert_eq!(d.cycles, vec![cyc(&p, "0 1 1")]);
        assert_eq!(d.weights, vec![q(1, 1)]);
        let (p, g) = setup(fixtures::FULL_TWO_SHIFT, 1);
        let a = occupation_of_cycle(&cyc(&p, "0"), &g).unwrap();
        let b = occupation_of_cycle(&cyc(&p, "1"), &g).unwrap();
        let m = convex_combine(&[a, b], &[q(1, 2), q(1, 2)]).unwrap();
        let d = flow_decompose(&m);
        assert_eq!(d.cycles, vec![cyc(&p, "0"), cyc(&p, "1")]);
        assert_eq!(d.weights, vec![q(1, 2), q(1, 2)]);
        let u = uniform(&g);
        assert_eq!(flow_decompose(&u).recombine(&g).unwrap(), u);
    }

    #[test]
    fn file_round_trip_and_validation() {
        let (p, g) = setup(fixtures::FULL_TWO_SHIFT, 1);
        let u = uniform(&g);
        assert_eq!(parse_occupation(&u.to_text(&p), &p, &g).unwrap(), u);
        let unbalanced = "order 1\nedge 0 1 1\n";
        assert!(parse_occupation(unbalanced, &p, &g).is_err());
        let (p, g) = setup(fixtures::EVEN_SHIFT, 1);
        let m = occupation_of_cycle(&cyc(&p, "1 0 0"), &g).unwrap();
        assert_eq!(parse_occupation(&m.to_text(&p), &p, &g).unwrap(), m);
    }

    #[test]
    fn markov_extension_preserves_cylinders() {
        let (p, g1) = setup(fixtures::GOLDEN_MEAN, 1);
        let g3 = Arc::new(EdgeGraph::new(&p, 3).unwrap());
        let m = convex_combine(
            &[occupation_of_cycle(&cyc(&p, "0"), &g1).unwrap(), occupation_of_cycle(&cyc(&p, "0 1"), &g1).unwrap()],
            &[q(1, 3), q(2, 3)],
        )
        .unwrap();
        let big = m.extend_to(&g3).unwrap();
        for w in ["0", "1", "0 0", "0 1", "1 0"] {
            let u = p.word(w).unwrap();
            assert_eq!(cylinder_frequency(&big, &u).unwrap(), cylinder_frequency(&m, &u).unwrap(), "{w}");
        }
        let (p, g1) = setup(fixtures::EVEN_SHIFT, 1);
        let g2 = Arc::new(EdgeGraph::new(&p, 2).unwrap());
        let m = occupation_of_cycle(&cyc(&p, "1 0 0"), &g1).unwrap();
        assert_eq!(m.extend_to(&g2).unwrap(), occupation_of_cycle(&cyc(&p, "1 0 0"), &g2).unwrap());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn count_occurrences(c: &[u16], u: &[u16]) -> usize {
            (0..c.len()).filter(|&i| (0..u.len()).all(|j| c[(i + j) % c.len()] == u[j])).count()
        }

        proptest! {
            #[test]
            fn cylinder_matches_string_count(c in prop::collection::vec(0u16..3, 1..7), u in prop::collection::vec(0u16..3, 0..3)) {
                let (_, g) = setup("alphabet a b c\ntype adjacency\nrow 1 1 1\nrow 1 1 1\nrow 1 1 1\n", 2);
                let m = occupation_of_cycle(&Cycle::new(Word(c.clone())), &g).unwrap();
                let got = cylinder_frequency(&m, &Word(u.clone())).unwrap();
                let want = Rational::new(count_occurrences(&c, &u) as i64, c.len() as i64);
                prop_assert_eq!(got, want);
            }

            #[test]
            fn decompose_recombine_identity(ws in prop::collection::vec(1i64..20, 3)) {
                let (p, g) = setup(fixtures::THREE_SYMBOL_SHIFT, 2);
                let parts: Vec<OccupationMeasure> = ["1 2", "2 3 3", "1 1 2 3 2"]
                    .iter()
                    .map(|w| occupation_of_cycle(&cyc(&p, w), &g).unwrap())
                    .collect();
                let total: i64 = ws.iter().sum();
                let lam: Vec<Rational> = ws.iter().map(|&w| Rational::new(w, total)).collect();
                let m = convex_combine(&parts, &lam).unwrap();
                let d = flow_decompose(&m);
                prop_assert!(d.weights.iter().all(Rational::is_positive));
                prop_assert!(d.cycles.len() <= g.num_edges());
                prop_assert_eq!(d.recombine(&g).unwrap(), m);
            }

            #[test]
            fn kolmogorov_consistency(ws in prop::collection::vec(1i64..20, 3), u in prop::collection::vec(0u16..3, 0..3)) {
                let (p, g) = setup(fixtures::THREE_SYMBOL_SHIFT, 2);
                let parts: Vec<OccupationMeasure> = ["1 2", "2 3 3", "1 1 2 3 2"]
                    .iter()
                    .map(|w| occupation_of_cycle(&cyc(&p, w), &g).unwrap())
                    .collect();
                let total: i64 = ws.iter().sum();
                let lam: Vec<Rational> = ws.iter().map(|&w| Rational::new(w, total)).collect();
                let m = convex_combine(&parts, &lam).unwrap();
                let u = Word(u);
                let whole = cylinder_frequency(&m, &u).unwrap();
                let split: Rational = (0..3u16)
                    .map(|a| cylinder_frequency(&m, &u.concat(&Word(vec![a]))).unwrap())
                    .sum();
                prop_assert_eq!(whole, split);
            }

            #[test]
            fn entropy_concave_at_midpoints(a in 1i64..10, b in 1i64..10) {
                let (p, g) = setup(fixtures::FULL_TWO_SHIFT, 1);
                let u = uniform(&g);
                let c = occupation_of_cycle(&cyc(&p, "0 1 1"), &g).unwrap();
                let t = Rational::new(a, a + b);
                let m1 = convex_combine(&[u.clone(), c.clone()], &[t.clone(), Rational::one() - &t]).unwrap();
                let m2 = convex_combine(&[u.clone(), c.clone()], &[Rational::one() - &t, t.clone()]).unwrap();
                let mid = convex_combine(&[m1.clone(), m2.clone()], &[q(1, 2), q(1, 2)]).unwrap();
                prop_assert!(entropy(&mid) >= (entropy(&m1) + entropy(&m2)) / 2.0 - 1e-12);
            }
        }
    }
}
