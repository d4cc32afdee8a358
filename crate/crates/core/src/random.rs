//! Seeded random instances: irreducible SFTs, constraints, interior targets
//! and fiber measures.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::geometry::{interior_certificate, rotation_set, InteriorVerdict, RotationPolytope};
use crate::measure::{convex_combine, OccupationMeasure};
use crate::optimizer::{beta, random_objective};
use crate::potential::{lift_component, lift_to_edges, EdgeLift, LocallyConstantFn};
use crate::rational::{RatVec, Rational};
use crate::symbolic::{EdgeGraph, ShiftPresentation, Symbol, Word};

#[derive(Clone, Debug)]
pub struct Instance {
    pub shift: ShiftPresentation,
    /// Shift file text, re-parseable by `parse_shift`.
    pub shift_text: String,
    pub graph: Arc<EdgeGraph>,
    pub phi: LocallyConstantFn,
    pub phi_lift: EdgeLift,
    pub rotation_set: RotationPolytope,
    pub h: RatVec,
    pub nu: OccupationMeasure,
    /// `φ`'s coordinates and one random objective.
    pub family: Vec<LocallyConstantFn>,
}

/// An irreducible SFT with `2..=max_alphabet` symbols, forbidden words of
/// length `order + 1` and positive entropy (at least two cycles).
pub fn random_sft<R: Rng>(rng: &mut R, max_alphabet: usize, order: usize) -> (ShiftPresentation, String) {
    loop {
        let k = rng.gen_range(2..=max_alphabet.max(2));
        let tokens: Vec<String> = (0..k).map(|i| i.to_string()).collect();
        let mut all = vec![Vec::new()];
        for _ in 0..=order {
            all = all.into_iter().flat_map(|w: Vec<Symbol>| (0..k as Symbol).map(move |a| [w.clone(), vec![a]].concat())).collect();
        }
        let density = rng.gen_range(0.1..0.45);
        let forbidden: Vec<Word> = all.into_iter().filter(|_| rng.gen_bool(density)).map(Word).collect();
        let Ok(p) = ShiftPresentation::from_forbidden(&tokens, &forbidden) else { continue };
        if !p.is_irreducible() || p.alphabet().len() < 2 {
            continue;
        }
        let Ok(g) = EdgeGraph::new(&p, order.max(1)) else { continue };
        if g.num_edges() <= g.num_vertices() {
            continue;
        }
        let mut text = format!("alphabet {}\ntype forbidden\n", p.alphabet().tokens().join(" "));
        for w in p.forbidden() {
            text.push_str(&format!("forbid {}\n", p.render(w)));
        }
        return (p, text);
    }
}

/// A `d`-dimensional constraint of order 0 or 1 with small integer values.
pub fn random_constraint<R: Rng>(rng: &mut R, p: &ShiftPresentation, d: usize) -> LocallyConstantFn {
    let order = rng.gen_range(0..=1);
    let comps: Vec<LocallyConstantFn> =
        (0..d).map(|_| LocallyConstantFn::from_fn(p, order, |_| Rational::from_int(rng.gen_range(-2..=3)))).collect();
    stack(p, order, &comps)
}

fn stack(p: &ShiftPresentation, order: usize, comps: &[LocallyConstantFn]) -> LocallyConstantFn {
    let mut words = p.allowed_words(order + 1);
    words.sort();
    let table = words
        .into_iter()
        .map(|w| {
            let v = RatVec(comps.iter().map(|c| c.eval(w.symbols()).0[0].clone()).collect());
            (w, v)
        })
        .collect();
    LocallyConstantFn::new(p, order, table, None).expect("complete table")
}

/// A point with denominators at most `max_den` strictly inside `rot`.
pub fn random_interior_point<R: Rng>(rng: &mut R, rot: &RotationPolytope, max_den: i64) -> Option<RatVec> {
    let d = rot.dim();
    let lo: Vec<Rational> = (0..d).map(|i| rot.vertices().iter().map(|v| v.0[i].clone()).min().expect("vertex")).collect();
    let hi: Vec<Rational> = (0..d).map(|i| rot.vertices().iter().map(|v| v.0[i].clone()).max().expect("vertex")).collect();
    let mut dens: Vec<i64> = (1..=max_den).collect();
    for _ in 0..200 {
        dens.shuffle(rng);
        let den = dens[0];
        let h = RatVec(
            (0..d)
                .map(|i| {
                    let a = (&lo[i] * &Rational::from_int(den)).ceil();
                    let b = (&hi[i] * &Rational::from_int(den)).floor();
                    let a = i64::try_from(a).unwrap_or(0);
                    let b = i64::try_from(b).unwrap_or(0).max(a);
                    Rational::new(rng.gen_range(a..=b), den)
                })
                .collect(),
        );
        if let Ok(InteriorVerdict::Interior(_)) = interior_certificate(rot, &h) {
            return Some(h);
        }
    }
    None
}

/// The criterion-3 style generator: alphabet at most 4, SFT order at most 2,
/// `d ∈ {1, 2}`, interior `h` with denominator at most 12.
pub fn random_instance<R: Rng>(rng: &mut R) -> Result<Instance> {
    loop {
        let order = rng.gen_range(1..=2);
        let (shift, shift_text) = random_sft(rng, 4, order);
        let graph = Arc::new(EdgeGraph::new(&shift, order)?);
        let d = rng.gen_range(1..=2);
        let phi = random_constraint(rng, &shift, d);
        let phi_lift = lift_to_edges(&phi, &graph)?;
        let rot = rotation_set(&graph, &phi_lift)?;
        if !rot.is_full_dimensional() {
            continue;
        }
        let Some(h) = random_interior_point(rng, &rot, 12) else { continue };
        let nu = fiber_measure(rng, &shift, &graph, &phi_lift, &h)?;
        let mut family: Vec<LocallyConstantFn> = (0..d).map(|i| phi.component(i)).collect();
        family.push(random_objective(&shift, rng.gen_range(0..=1), rng));
        return Ok(Instance { shift, shift_text, graph, phi, phi_lift, rotation_set: rot, h, nu, family });
    }
}

/// Average of the maximizers of two random objectives over the fiber.
pub fn fiber_measure<R: Rng>(
    rng: &mut R,
    p: &ShiftPresentation,
    graph: &Arc<EdgeGraph>,
    phi: &EdgeLift,
    h: &RatVec,
) -> Result<OccupationMeasure> {
    let mut parts = Vec::new();
    for _ in 0..2 {
        let f = random_objective(p, graph.order().min(1), rng);
        let lift = lift_component(&lift_to_edges(&f, graph)?, 0);
        parts.push(beta(graph, phi, h, &lift)?.maximizer);
    }
    convex_combine(&parts, &[Rational::new(1, 2), Rational::new(1, 2)])
}
