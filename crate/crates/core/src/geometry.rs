//! Rotation sets as exact rational polytopes.
//!
//! The rotation set is the image of the occupation polytope under `φ`. Its
//! support function is one LP away, and the optimal LP vertex is a single
//! simple cycle, so the hull is grown from oracle answers: find the affine
//! hull, then keep adding oracle points beyond any facet of the current
//! hull until every facet supports the set.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{nullspace, rank_of, rref};
use crate::lp::{Lp, LpOutcome};
use crate::measure::{fiber_lp, flow_decompose, integrate_lift, occupation_of_walk, OccupationMeasure};
use crate::potential::EdgeLift;
use crate::rational::{RatVec, Rational};
use crate::symbolic::{for_each_simple_cycle, Cycle, EdgeGraph, ShiftPresentation};

#[derive(Clone, Debug)]
pub struct RotationPolytope {
    dim: usize,
    affine_dim: usize,
    vertices: Vec<RatVec>,
    cycles: Vec<Cycle>,
}

impl RotationPolytope {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the affine hull of the set.
    pub fn affine_dim(&self) -> usize {
        self.affine_dim
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.affine_dim == self.dim
    }

    pub fn vertices(&self) -> &[RatVec] {
        &self.vertices
    }

    /// One generating cycle per vertex.
    pub fn cycles(&self) -> &[Cycle] {
        &self.cycles
    }

    /// Exact membership by an LP over vertex weights.
    pub fn contains(&self, h: &RatVec) -> bool {
        hull_contains(&self.vertices, h)
    }

    /// `vertex r1 .. rd cycle w` lines.
    pub fn to_text(&self, p: &ShiftPresentation) -> String {
        self.vertices.iter().zip(&self.cycles).map(|(v, c)| format!("vertex {v} cycle {}\n", p.render(c.word()))).collect()
    }

    /// 2-D plot of the polygon scaled into a 1000×1000 view box.
    pub fn to_svg(&self) -> Result<String> {
        if self.dim != 2 {
            return Err(Error::InvalidArgument(format!("SVG output needs d = 2, got d = {}", self.dim)));
        }
        let xs: Vec<&Rational> = self.vertices.iter().map(|v| &v.0[0]).collect();
        let ys: Vec<&Rational> = self.vertices.iter().map(|v| &v.0[1]).collect();
        let (x0, x1) = (xs.iter().copied().min().unwrap().clone(), xs.iter().copied().max().unwrap().clone());
        let (y0, y1) = (ys.iter().copied().min().unwrap().clone(), ys.iter().copied().max().unwrap().clone());
        let span = Rational::max(&(&x1 - &x0), &(&y1 - &y0));
        let span = if span.is_zero() { Rational::one() } else { span };
        let scale = Rational::from(900i64) / &span;
        let pts: Vec<(Rational, Rational)> = self
            .vertices
            .iter()
            .map(|v| {
                let x = Rational::from(50i64) + (&v.0[0] - &x0) * &scale;
                let y = Rational::from(950i64) - (&v.0[1] - &y0) * &scale;
                (x, y)
            })
            .collect();
        let order = angular_order(&pts);
        let poly: Vec<String> = order.iter().map(|&i| format!("{:.6},{:.6}", pts[i].0.to_f64(), pts[i].1.to_f64())).collect();
        let mut out = String::from("<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1000 1000\" width=\"1000\" height=\"1000\">\n");
        out.push_str(&format!("  <polygon points=\"{}\" fill=\"#cfe0f3\" stroke=\"#1f4e79\" stroke-width=\"3\"/>\n", poly.join(" ")));
        for (i, (x, y)) in pts.iter().enumerate() {
            out.push_str(&format!(
                "  <circle cx=\"{:.6}\" cy=\"{:.6}\" r=\"6\" fill=\"#1f4e79\"><title>{}</title></circle>\n",
                x.to_f64(),
                y.to_f64(),
                self.vertices[i]
            ));
        }
        out.push_str("</svg>\n");
        Ok(out)
    }
}

/// Counter-clockwise order of points around their centroid (exact).
fn angular_order(pts: &[(Rational, Rational)]) -> Vec<usize> {
    let n = Rational::from(pts.len());
    let cx: Rational = pts.iter().map(|p| &p.0).sum::<Rational>() / &n;
    let cy: Rational = pts.iter().map(|p| &p.1).sum::<Rational>() / &n;
    let half = |x: &Rational, y: &Rational| if y.is_negative() || (y.is_zero() && x.is_negative()) { 1 } else { 0 };
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| {
        let (ax, ay) = (&pts[a].0 - &cx, &pts[a].1 - &cy);
        let (bx, by) = (&pts[b].0 - &cx, &pts[b].1 - &cy);
        half(&ax, &ay).cmp(&half(&bx, &by)).then_with(|| (&bx * &ay).cmp(&(&ax * &by)))
    });
    idx
}

/// Maximizer of `c · rv` over all invariant measures, as a cycle.
struct Oracle<'a> {
    graph: &'a Arc<EdgeGraph>,
    phi: &'a EdgeLift,
    base: Lp,
}

impl<'a> Oracle<'a> {
    fn new(graph: &'a Arc<EdgeGraph>, phi: &'a EdgeLift) -> Self {
        Oracle { graph, phi, base: fiber_lp(graph, None) }
    }

    fn query(&self, c: &RatVec) -> Result<(RatVec, Cycle)> {
        let mut lp = self.base.clone();
        lp.set_objective(self.phi.iter().map(|v| c.dot(v)).collect());
        let sol = match lp.solve() {
            LpOutcome::Optimal(s) => s,
            _ => return Err(Error::Internal("occupation polytope LP failed".into())),
        };
        let m = OccupationMeasure::new(self.graph.clone(), sol.x)?;
        let combo = flow_decompose(&m);
        let mut best: Option<(Rational, RatVec, Cycle)> = None;
        for (walk, cycle) in combo.walks.iter().zip(&combo.cycles) {
            let rv = integrate_lift(&occupation_of_walk(walk, self.graph), self.phi);
            let val = c.dot(&rv);
            if best.as_ref().is_none_or(|(b, _, _)| val > *b) {
                best = Some((val, rv, cycle.clone()));
            }
        }
        let (_, rv, cycle) = best.ok_or_else(|| Error::Internal("empty decomposition".into()))?;
        Ok((rv, cycle))
    }
}

/// The rotation set of `φ` (lifted to `graph`).
pub fn rotation_set(graph: &Arc<EdgeGraph>, phi: &EdgeLift) -> Result<RotationPolytope> {
    if graph.num_edges() == 0 {
        return Err(Error::EmptyShift);
    }
    let d = phi.first().map_or(0, RatVec::dim);
    let oracle = Oracle::new(graph, phi);
    let mut pts: Vec<(RatVec, Cycle)> = vec![oracle.query(&RatVec::zeros(d))?];
    // Affine hull: probe directions orthogonal to the current span.
    loop {
        let diffs: Vec<Vec<Rational>> = pts[1..].iter().map(|(p, _)| p.sub(&pts[0].0).0).collect();
        let complement = nullspace(&diffs, d);
        let mut grew = false;
        for n in complement {
            let n = RatVec(n);
            for dir in [n.clone(), n.scale(&-Rational::one())] {
                let (p, c) = oracle.query(&dir)?;
                if dir.dot(&p) > dir.dot(&pts[0].0) {
                    pts.push((p, c));
                    grew = true;
                    break;
                }
            }
            if grew {
                break;
            }
        }
        if !grew {
            break;
        }
    }
    let k = pts.len() - 1;
    if k == 0 {
        let (v, c) = pts.pop().expect("one point");
        return Ok(RotationPolytope { dim: d, affine_dim: 0, vertices: vec![v], cycles: vec![c] });
    }
    // Coordinates on which the projection of the affine hull is injective.
    let mut diffs: Vec<Vec<Rational>> = pts[1..].iter().map(|(p, _)| p.sub(&pts[0].0).0).collect();
    let coords = rref(&mut diffs);
    debug_assert_eq!(coords.len(), k);
    let project = |p: &RatVec| RatVec(coords.iter().map(|&i| p.0[i].clone()).collect());
    let lift_dir = |n: &RatVec| {
        let mut c = RatVec::zeros(d);
        for (j, &i) in coords.iter().enumerate() {
            c.0[i] = n.0[j].clone();
        }
        c
    };
    'refine: loop {
        let proj: Vec<RatVec> = pts.iter().map(|(p, _)| project(p)).collect();
        for (n, b) in facets(&proj) {
            let (p, c) = oracle.query(&lift_dir(&n))?;
            if n.dot(&project(&p)) > b {
                if !pts.iter().any(|(q, _)| *q == p) {
                    pts.push((p, c));
                    continue 'refine;
                }
                return Err(Error::Internal("hull refinement stalled".into()));
            }
        }
        break;
    }
    let (vertices, cycles) = extreme_points(pts);
    Ok(RotationPolytope { dim: d, affine_dim: k, vertices, cycles })
}

/// Rotation set from an explicit scan of all simple cycles (independent of
/// the LP oracle; exponential, used for cross-checks on small graphs).
pub fn rotation_set_by_enumeration(graph: &Arc<EdgeGraph>, phi: &EdgeLift) -> Result<RotationPolytope> {
    let d = phi.first().map_or(0, RatVec::dim);
    let mut pts: Vec<(RatVec, Cycle)> = Vec::new();
    for_each_simple_cycle(graph, graph.num_vertices(), |walk| {
        let rv = integrate_lift(&occupation_of_walk(walk, graph), phi);
        let c = Cycle::new(graph.walk_word(walk)).canonical();
        match pts.iter_mut().find(|(p, _)| *p == rv) {
            Some(slot) => {
                if (c.period(), c.word()) < (slot.1.period(), slot.1.word()) {
                    slot.1 = c;
                }
            }
            None => pts.push((rv, c)),
        }
    });
    if pts.is_empty() {
        return Err(Error::EmptyShift);
    }
    let base = pts[0].0.clone();
    let affine_dim = rank_of(&pts.iter().map(|(p, _)| p.sub(&base)).collect::<Vec<_>>());
    let (vertices, cycles) = extreme_points(pts);
    Ok(RotationPolytope { dim: d, affine_dim, vertices, cycles })
}

/// Facet hyperplanes `n·x = b` (with `n·x <= b` on all points) of a
/// full-dimensional point set in `ℚ^k`, found by brute force over
/// `k`-subsets.
fn facets(pts: &[RatVec]) -> Vec<(RatVec, Rational)> {
    let k = pts[0].dim();
    let mut out: Vec<(RatVec, Rational)> = Vec::new();
    let mut subset = Vec::with_capacity(k);
    fn rec(pts: &[RatVec], k: usize, start: usize, subset: &mut Vec<usize>, out: &mut Vec<(RatVec, Rational)>) {
        if subset.len() == k {
            let p0 = &pts[subset[0]];
            let diffs: Vec<Vec<Rational>> = subset[1..].iter().map(|&i| pts[i].sub(p0).0).collect();
            let ns = nullspace(&diffs, k);
            if ns.len() != 1 {
                return;
            }
            let mut n = RatVec(ns.into_iter().next().expect("one normal"));
            let lead = n.0.iter().find(|x| !x.is_zero()).expect("nonzero normal").abs();
            n = n.scale(&lead.recip());
            let b = n.dot(p0);
            let (mut above, mut below) = (false, false);
            for p in pts {
                let v = n.dot(p);
                above |= v > b;
                below |= v < b;
            }
            let (n, b) = match (above, below) {
                (false, true) => (n, b),
                (true, false) => (n.scale(&-Rational::one()), -b),
                _ => return,
            };
            if !out.iter().any(|(m, c)| *m == n && *c == b) {
                out.push((n, b));
            }
            return;
        }
        for i in start..pts.len() {
            subset.push(i);
            rec(pts, k, i + 1, subset, out);
            subset.pop();
        }
    }
    rec(pts, k, 0, &mut subset, &mut out);
    out
}

/// Drops duplicates and points inside the hull of the others; sorts the
/// survivors lexicographically.
fn extreme_points(mut pts: Vec<(RatVec, Cycle)>) -> (Vec<RatVec>, Vec<Cycle>) {
    pts.sort_by(|a, b| a.0 .0.cmp(&b.0 .0).then((a.1.period(), a.1.word()).cmp(&(b.1.period(), b.1.word()))));
    pts.dedup_by(|a, b| a.0 == b.0);
    let all: Vec<RatVec> = pts.iter().map(|(p, _)| p.clone()).collect();
    let keep: Vec<bool> = (0..all.len())
        .map(|i| {
            let others: Vec<RatVec> = all.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, p)| p.clone()).collect();
            others.is_empty() || !hull_contains(&others, &all[i])
        })
        .collect();
    pts.into_iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p).unzip()
}

/// `h ∈ conv(points)`, exactly.
pub fn hull_contains(points: &[RatVec], h: &RatVec) -> bool {
    convex_weights(points, h).is_some()
}

/// Some `λ >= 0`, `Σλ = 1`, `Σλᵢ pᵢ = h`.
pub fn convex_weights(points: &[RatVec], h: &RatVec) -> Option<Vec<Rational>> {
    let n = points.len();
    let mut lp = Lp::new(n);
    for i in 0..h.dim() {
        lp.add_eq(points.iter().map(|p| p.0[i].clone()).collect(), h.0[i].clone());
    }
    lp.add_eq(vec![Rational::one(); n], Rational::one());
    lp.feasible_point()
}

/// Largest `s >= 0` with `h + s·dir ∈ conv(points)`; `None` if `h` is outside.
fn max_step(points: &[RatVec], h: &RatVec, dir: &RatVec) -> Option<Rational> {
    let n = points.len();
    let mut lp = Lp::new(n + 1);
    for i in 0..h.dim() {
        let mut row: Vec<Rational> = points.iter().map(|p| p.0[i].clone()).collect();
        row.push(-&dir.0[i]);
        lp.add_eq(row, h.0[i].clone());
    }
    let mut row = vec![Rational::one(); n];
    row.push(Rational::zero());
    lp.add_eq(row, Rational::one());
    let mut c = vec![Rational::zero(); n];
    c.push(Rational::one());
    lp.set_objective(c);
    lp.solve().optimal().map(|s| s.value)
}

#[derive(Clone, Debug, PartialEq)]
pub struct InteriorCertificate {
    pub h: RatVec,
    pub delta: Rational,
    /// `h + δeᵢ` for `i <= d`, then `h − δΣeᵢ`.
    pub points: Vec<RatVec>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InteriorVerdict {
    Interior(InteriorCertificate),
    Boundary,
    Outside,
}

/// Probe directions `e₁, …, e_d, −Σeᵢ`.
pub fn probe_directions(d: usize) -> Vec<RatVec> {
    let mut dirs: Vec<RatVec> = (0..d).map(|i| RatVec::unit(d, i)).collect();
    dirs.push(RatVec(vec![-Rational::one(); d]));
    dirs
}

/// Decides whether `h` is interior (in `ℝ^d`) and certifies a margin.
pub fn interior_certificate(r: &RotationPolytope, h: &RatVec) -> Result<InteriorVerdict> {
    if h.dim() != r.dim {
        return Err(Error::InvalidArgument(format!("h has dimension {}, expected {}", h.dim(), r.dim)));
    }
    if !r.is_full_dimensional() {
        return Err(Error::NotFullDimensional { dim: r.dim, affine_dim: r.affine_dim });
    }
    if !r.contains(h) {
        return Ok(InteriorVerdict::Outside);
    }
    let dirs = probe_directions(r.dim);
    let mut s_min: Option<Rational> = None;
    for dir in &dirs {
        let s = max_step(&r.vertices, h, dir).ok_or_else(|| Error::Internal("membership LP disagrees".into()))?;
        if s.is_zero() {
            return Ok(InteriorVerdict::Boundary);
        }
        s_min = Some(match s_min {
            Some(m) => Rational::min(&m, &s),
            None => s,
        });
    }
    let delta = s_min.expect("at least one direction") / Rational::from(2i64);
    let points = dirs.iter().map(|dir| h.add(&dir.scale(&delta))).collect();
    Ok(InteriorVerdict::Interior(InteriorCertificate { h: h.clone(), delta, points }))
}

/// Some exact occupation measure with `∫φ = h` (a basic feasible point).
pub fn fiber_sample(graph: &Arc<EdgeGraph>, phi: &EdgeLift, h: &RatVec) -> Result<OccupationMeasure> {
    let x = fiber_lp(graph, Some((phi, h))).feasible_point().ok_or_else(|| Error::Infeasible("h outside rotation set".into()))?;
    OccupationMeasure::new(graph.clone(), x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::measure::integrate_lift;
    use crate::potential::{lift_to_edges, parse_potential, LocallyConstantFn};
    use crate::rational::q;
    use crate::symbolic::parse_shift;

    fn rv(v: &[(i64, i64)]) -> RatVec {
        RatVec(v.iter().map(|&(a, b)| q(a, b)).collect())
    }

    fn setup(shift: &str, pot: &str) -> (ShiftPresentation, Arc<EdgeGraph>, EdgeLift) {
        let p = parse_shift(shift).unwrap();
        let f = parse_potential(pot, &p).unwrap();
        let g = Arc::new(EdgeGraph::new(&p, f.order().max(1)).unwrap());
        let lift = lift_to_edges(&f, &g).unwrap();
        (p, g, lift)
    }

    #[test]
    fn three_symbol_triangle() {
        let (p, g, phi) = setup(fixtures::THREE_SYMBOL_SHIFT, fixtures::THREE_SYMBOL_INDICATORS);
        let r = rotation_set(&g, &phi).unwrap();
        assert_eq!(r.vertices(), &[rv(&[(0, 1), (0, 1), (1, 1)]), rv(&[(0, 1), (1, 1), (0, 1)]), rv(&[(1, 1), (0, 1), (0, 1)])]);
        let names: Vec<String> = r.cycles().iter().map(|c| p.render(c.word())).collect();
        assert_eq!(names, ["3", "2", "1"]);
        assert_eq!(r.affine_dim(), 2);
        let h = rv(&[(1, 3), (1, 3), (1, 3)]);
        assert_eq!(interior_certificate(&r, &h).unwrap_err(), Error::NotFullDimensional { dim: 3, affine_dim: 2 });
    }

    #[test]
    fn reduced_triangle_interior_and_boundary() {
        let (_, g, phi) = setup(fixtures::THREE_SYMBOL_SHIFT, fixtures::THREE_SYMBOL_REDUCED);
        let r = rotation_set(&g, &phi).unwrap();
        assert!(r.is_full_dimensional());
        let InteriorVerdict::Interior(cert) = interior_certificate(&r, &rv(&[(1, 3), (1, 3)])).unwrap() else {
            panic!("expected interior");
        };
        assert!(cert.delta >= q(1, 12));
        for p in &cert.points {
            assert!(fiber_sample(&g, &phi, p).is_ok());
        }
        assert_eq!(interior_certificate(&r, &rv(&[(1, 2), (0, 1)])).unwrap(), InteriorVerdict::Boundary);
        assert_eq!(interior_certificate(&r, &rv(&[(1, 1), (1, 1)])).unwrap(), InteriorVerdict::Outside);
    }

    #[test]
    fn constant_and_segment() {
        let (_, g, phi) = setup(fixtures::THREE_SYMBOL_SHIFT, "order 0\ndefault : 1/2\n");
        let r = rotation_set(&g, &phi).unwrap();
        assert_eq!(r.vertices(), &[rv(&[(1, 2)])]);
        let (p, g, phi) = setup(fixtures::GOLDEN_MEAN, fixtures::X0);
        let r = rotation_set(&g, &phi).unwrap();
        assert_eq!(r.vertices(), &[rv(&[(0, 1)]), rv(&[(1, 2)])]);
        let names: Vec<String> = r.cycles().iter().map(|c| p.render(c.word())).collect();
        assert_eq!(names, ["0", "0 1"]);
    }

    #[test]
    fn fiber_samples_hit_h() {
        let (p, g, phi) = setup(fixtures::THREE_SYMBOL_SHIFT, fixtures::THREE_SYMBOL_REDUCED);
        let h = rv(&[(1, 2), (0, 1)]);
        let m = fiber_sample(&g, &phi, &h).unwrap();
        assert_eq!(integrate_lift(&m, &phi), h);
        let combo = flow_decompose(&m);
        let names: Vec<String> = combo.cycles.iter().map(|c| p.render(c.word())).collect();
        assert_eq!(names, ["1", "3"]);
        assert_eq!(combo.weights, vec![q(1, 2), q(1, 2)]);
        assert!(matches!(fiber_sample(&g, &phi, &rv(&[(1, 1), (1, 1)])), Err(Error::Infeasible(_))));
        let (_, g, phi) = setup(fixtures::GOLDEN_MEAN, fixtures::X0);
        let m = fiber_sample(&g, &phi, &rv(&[(1, 2)])).unwrap();
        assert_eq!(flow_decompose(&m).cycles.len(), 1);
    }

    #[test]
    fn oracle_hull_matches_enumeration() {
        let p = parse_shift(fixtures::THREE_SYMBOL_SHIFT).unwrap();
        let g = Arc::new(EdgeGraph::new(&p, 2).unwrap());
        let f = LocallyConstantFn::from_fn(&p, 2, |w| {
            let s: i64 = w.symbols().iter().map(|&a| a as i64 * 3 - 2).sum();
            Rational::new(s * s % 7 - 3, 5)
        });
        let h = LocallyConstantFn::from_fn(&p, 1, |w| Rational::from(w.symbols()[0] as i64 - w.symbols()[1] as i64));
        let lift: EdgeLift = lift_to_edges(&f, &g)
            .unwrap()
            .into_iter()
            .zip(lift_to_edges(&h, &g).unwrap())
            .map(|(a, b)| RatVec(vec![a.0[0].clone(), b.0[0].clone()]))
            .collect();
        let a = rotation_set(&g, &lift).unwrap();
        let b = rotation_set_by_enumeration(&g, &lift).unwrap();
        assert_eq!(a.vertices(), b.vertices());
        assert_eq!(a.affine_dim(), b.affine_dim());
    }

    #[test]
    fn svg_for_planar_sets() {
        let (_, g, phi) = setup(fixtures::THREE_SYMBOL_SHIFT, fixtures::THREE_SYMBOL_REDUCED);
        let svg = rotation_set(&g, &phi).unwrap().to_svg().unwrap();
        assert!(svg.contains("viewBox=\"0 0 1000 1000\""));
        assert_eq!(svg.matches("<circle").count(), 3);
    }
}
