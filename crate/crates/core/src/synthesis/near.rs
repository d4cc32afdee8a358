//! A single periodic orbit close to a given occupation measure.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::measure::{flow_decompose, integrate_lift, OccupationMeasure};
use crate::potential::EdgeLift;
use crate::rational::Rational;
use crate::symbolic::{Cycle, EdgeGraph, Word};

#[derive(Clone, Debug)]
pub struct NearCycle {
    /// Primitive word of the orbit, starting at the passage through `u`.
    pub cycle: Cycle,
    /// The Eulerian circuit, starting at the `u` edge.
    pub walk: Vec<usize>,
    pub occupation: OccupationMeasure,
    /// Scale used for the cycle multiplicities.
    pub n: usize,
    /// `Σ_e |c_e − y_e|`.
    pub l1: Rational,
    /// `‖rv(c) − rv(y)‖∞`.
    pub rv_error: Rational,
}

/// Flow-decomposes `y`, repeats each cycle about `N·weight/length` times,
/// joins the pieces and one edge reading `u` by shortest-path connectors and
/// reads off an Eulerian circuit. `N` doubles from `n_start` until both the
/// `L¹` distance of occupations and the rotation-vector error drop below `r`.
pub fn single_cycle_near(y: &OccupationMeasure, u: &Word, phi: &EdgeLift, r: &Rational, n_start: usize, n_cap: usize) -> Result<NearCycle> {
    if !r.is_positive() {
        return Err(Error::InvalidArgument("r must be positive".into()));
    }
    let g = y.graph();
    if !g.is_strongly_connected() {
        return Err(Error::NotIrreducible);
    }
    if u.is_empty() || u.len() > g.order() + 1 {
        return Err(Error::InvalidArgument(format!("u must have length 1..={}", g.order() + 1)));
    }
    let reads_u = |e: usize| g.edges()[e].word.starts_with(u);
    let root = y
        .support()
        .filter(|&e| reads_u(e))
        .max_by(|&a, &b| y.weight(a).cmp(y.weight(b)).then(b.cmp(&a)))
        .or_else(|| (0..g.num_edges()).find(|&e| reads_u(e)))
        .ok_or_else(|| Error::WordNotAllowed(format!("{:?}", u.symbols())))?;
    let combo = flow_decompose(y);
    let rv_y = integrate_lift(y, phi);
    let mut n = n_start.clamp(1, n_cap.max(1));
    loop {
        let counts = multigraph(g, &combo.walks, &combo.weights, root, n)?;
        let total: u64 = counts.iter().sum();
        let tot = Rational::from(total as usize);
        let weights: Vec<Rational> = counts.iter().map(|&c| Rational::from(c as usize) / &tot).collect();
        let occupation = OccupationMeasure::new(g.clone(), weights)?;
        let l1: Rational = occupation.weights().iter().zip(y.weights()).map(|(a, b)| (a - b).abs()).sum();
        let rv_error = integrate_lift(&occupation, phi).sub(&rv_y).max_abs();
        if &l1 < r && &rv_error < r {
            let walk = euler_circuit(g, &counts, root);
            let cycle = Cycle::new(g.walk_word(&walk)).primitive_root();
            return Ok(NearCycle { cycle, walk, occupation, n, l1, rv_error });
        }
        if n >= n_cap {
            return Err(Error::RetryExhausted(format!(
                "no cycle within r = {r} up to N = {n_cap} (L1 distance {l1}, rv error {rv_error})"
            )));
        }
        n = (n * 2).min(n_cap);
    }
}

/// Edge multiplicities of the balanced, connected multigraph.
fn multigraph(g: &EdgeGraph, walks: &[Vec<usize>], weights: &[Rational], root: usize, n: usize) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; g.num_edges()];
    let half = Rational::new(1, 2);
    for (walk, w) in walks.iter().zip(weights) {
        let reps = (Rational::from(n) * w / &Rational::from(walk.len()) + &half).floor();
        let reps: u64 = u64::try_from(reps).unwrap_or(u64::MAX).max(1);
        for &e in walk {
            counts[e] += reps;
        }
    }
    let path = |a: usize, b: usize| g.shortest_path(a, b).ok_or(Error::NotIrreducible);
    let root_v = g.edges()[root].from;
    if counts[root] == 0 {
        counts[root] += 1;
        for e in path(g.edges()[root].to, root_v)? {
            counts[e] += 1;
        }
    }
    // Weak components of the support; every other component gets a round
    // trip from the root vertex.
    let mut parent: Vec<usize> = (0..g.num_vertices()).collect();
    fn find(parent: &mut [usize], v: usize) -> usize {
        let mut r = v;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = v;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    let mut touched = vec![false; g.num_vertices()];
    for (e, &c) in counts.iter().enumerate() {
        if c > 0 {
            let (a, b) = (g.edges()[e].from, g.edges()[e].to);
            touched[a] = true;
            touched[b] = true;
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let root_comp = find(&mut parent, root_v);
    let mut reps: BTreeMap<usize, usize> = BTreeMap::new();
    for v in 0..g.num_vertices() {
        if touched[v] {
            let c = find(&mut parent, v);
            if c != root_comp {
                reps.entry(c).or_insert(v);
            }
        }
    }
    for &v in reps.values() {
        for e in path(root_v, v)?.into_iter().chain(path(v, root_v)?) {
            counts[e] += 1;
        }
    }
    Ok(counts)
}

/// Hierholzer's algorithm on edge multiplicities, rotated to start at `root`.
fn euler_circuit(g: &EdgeGraph, counts: &[u64], root: usize) -> Vec<usize> {
    let mut rem = counts.to_vec();
    let mut ptr = vec![0usize; g.num_vertices()];
    let start = g.edges()[root].from;
    let mut stack: Vec<(usize, Option<usize>)> = vec![(start, None)];
    let mut circuit = Vec::new();
    while let Some(&(v, _)) = stack.last() {
        let out = g.out_edges(v);
        while ptr[v] < out.len() && rem[out[ptr[v]]] == 0 {
            ptr[v] += 1;
        }
        if ptr[v] < out.len() {
            let e = out[ptr[v]];
            rem[e] -= 1;
            stack.push((g.edges()[e].to, Some(e)));
        } else {
            let (_, e) = stack.pop().expect("nonempty stack");
            if let Some(e) = e {
                circuit.push(e);
            }
        }
    }
    circuit.reverse();
    let at = circuit.iter().position(|&e| e == root).expect("root edge has positive count");
    circuit.rotate_left(at);
    circuit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::measure::{convex_combine, occupation_of_cycle};
    use crate::potential::{lift_to_edges, parse_potential};
    use crate::rational::q;
    use crate::symbolic::parse_shift;
    use std::sync::Arc;

    #[test]
    fn a_cycle_through_u_comes_back() {
        let p = parse_shift(fixtures::FULL_TWO_SHIFT).unwrap();
        let g = Arc::new(EdgeGraph::new(&p, 2).unwrap());
        let phi = lift_to_edges(&parse_potential(fixtures::X0, &p).unwrap(), &g).unwrap();
        let c = Cycle::new(p.word("0 1 1").unwrap());
        let y = occupation_of_cycle(&c, &g).unwrap();
        let near = single_cycle_near(&y, &p.word("0").unwrap(), &phi, &q(1, 100), 1, 1 << 10).unwrap();
        assert_eq!(near.n, 1);
        assert_eq!(near.cycle.canonical(), c.canonical());
        assert!(near.cycle.word().starts_with(&p.word("0").unwrap()));
        assert!(near.l1.is_zero());
    }

    #[test]
    fn two_fixed_points_are_joined() {
        let p = parse_shift(fixtures::FULL_TWO_SHIFT).unwrap();
        let g = Arc::new(EdgeGraph::new(&p, 1).unwrap());
        let phi = lift_to_edges(&parse_potential(fixtures::X0, &p).unwrap(), &g).unwrap();
        let zero = occupation_of_cycle(&Cycle::new(p.word("0").unwrap()), &g).unwrap();
        let one = occupation_of_cycle(&Cycle::new(p.word("1").unwrap()), &g).unwrap();
        let y = convex_combine(&[zero, one], &[q(1, 2), q(1, 2)]).unwrap();
        let near = single_cycle_near(&y, &p.word("0").unwrap(), &phi, &q(1, 10), 1, 1 << 16).unwrap();
        assert!(near.rv_error < q(1, 10));
        assert!(near.cycle.word().starts_with(&p.word("0").unwrap()));
        assert_eq!(near.occupation, occupation_of_cycle(&near.cycle, &g).unwrap());
    }

    #[test]
    fn boundary_mixture_picks_up_a_little_of_symbol_two() {
        let p = parse_shift(fixtures::THREE_SYMBOL_SHIFT).unwrap();
        let g = Arc::new(EdgeGraph::new(&p, 1).unwrap());
        let phi = parse_potential(fixtures::THREE_SYMBOL_REDUCED, &p).unwrap();
        let lift = lift_to_edges(&phi, &g).unwrap();
        let one = occupation_of_cycle(&Cycle::new(p.word("1").unwrap()), &g).unwrap();
        let three = occupation_of_cycle(&Cycle::new(p.word("3").unwrap()), &g).unwrap();
        let y = convex_combine(&[one, three], &[q(1, 2), q(1, 2)]).unwrap();
        let near = single_cycle_near(&y, &p.word("1").unwrap(), &lift, &q(1, 20), 1, 1 << 16).unwrap();
        let rv = crate::potential::rotation_vector_of_cycle(&phi, &near.cycle);
        assert!(rv.0[1].is_positive());
        assert!((&rv.0[0] - q(1, 2)).abs() < q(1, 20));
        assert!(rv.0[1] < q(1, 20));
    }

    #[test]
    fn rejects_bad_radius() {
        let p = parse_shift(fixtures::FULL_TWO_SHIFT).unwrap();
        let g = Arc::new(EdgeGraph::new(&p, 1).unwrap());
        let phi = lift_to_edges(&parse_potential(fixtures::X0, &p).unwrap(), &g).unwrap();
        let y = occupation_of_cycle(&Cycle::new(p.word("0 1").unwrap()), &g).unwrap();
        assert!(single_cycle_near(&y, &p.word("0").unwrap(), &phi, &q(0, 1), 1, 8).is_err());
    }
}
