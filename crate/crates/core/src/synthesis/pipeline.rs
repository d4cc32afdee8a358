//! Density pipeline: from a measure `ν` in the fiber to a periodic orbit
//! with the same rotation vector that is weak*-close to `ν`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{fiber_sample, interior_certificate, rotation_set, InteriorVerdict};
use crate::measure::{convex_combine, cylinder_frequency, integrate, weakstar_close, OccupationMeasure, TestFamily};
use crate::potential::{lift_to_edges, locality, LocallyConstantFn};
use crate::rational::{RatVec, Rational};
use crate::symbolic::{EdgeGraph, FollowerAutomaton, ShiftPresentation, Word};

use super::{build_plan, power_up, realize_plan, single_cycle_near, Realization, SynthesisPlan, DEFAULT_T_CEILING};

#[derive(Clone, Debug)]
pub struct ApproximationRequest {
    pub phi: LocallyConstantFn,
    pub nu: OccupationMeasure,
    pub h: RatVec,
    pub eps: Rational,
    pub family: Vec<LocallyConstantFn>,
    /// Closeness radii for the single-cycle step, as fractions of the
    /// simplex scale `t₀·δ`. Tried in order.
    pub r_schedule: Vec<Rational>,
    pub t_ceiling: u64,
    /// Largest multiplicity scale tried by the single-cycle step.
    pub n_cap: usize,
}

impl ApproximationRequest {
    pub fn new(phi: LocallyConstantFn, nu: OccupationMeasure, h: RatVec, eps: Rational, family: Vec<LocallyConstantFn>) -> Self {
        ApproximationRequest {
            phi,
            nu,
            h,
            eps,
            family,
            r_schedule: (3..=10).map(|k| Rational::new(1, 1 << k)).collect(),
            t_ceiling: DEFAULT_T_CEILING,
            n_cap: 1 << 22,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Approximation {
    pub plan: SynthesisPlan,
    pub realization: Realization,
    pub u: Word,
    pub t0: Rational,
    pub delta: Rational,
    /// The radius that succeeded.
    pub r: Rational,
    /// One line per failed attempt.
    pub attempts: Vec<String>,
}

/// The synchronizing word of length at most `max_len` with the largest
/// `ν`-frequency; ties go to the shorter word, then the lexicographically
/// least.
pub fn select_sync_word(p: &ShiftPresentation, fa: &FollowerAutomaton, nu: &OccupationMeasure, max_len: usize) -> Result<(Word, Rational)> {
    let mut best: Option<(Word, Rational)> = None;
    for len in 1..=max_len {
        let mut words = p.allowed_words(len);
        words.sort();
        for w in words {
            let freq = cylinder_frequency(nu, &w)?;
            if !freq.is_positive() || !fa.is_synchronizing(&w)? {
                continue;
            }
            if best.as_ref().is_none_or(|(_, f)| &freq > f) {
                best = Some((w, freq));
            }
        }
    }
    best.ok_or_else(|| Error::NotSynchronizing("no synchronizing word has positive frequency under ν".into()))
}

/// Runs the whole construction. Rank failures, non-positive weights, an
/// exceeded `t` ceiling and closeness misses all move on to the next
/// radius; running out of radii gives `RetryExhausted`.
pub fn approximate_in_fiber(p: &ShiftPresentation, req: &ApproximationRequest) -> Result<Approximation> {
    if !req.eps.is_positive() {
        return Err(Error::InvalidArgument("ε must be positive".into()));
    }
    let graph: &Arc<EdgeGraph> = req.nu.graph();
    let l = graph.order();
    let phi_lift = lift_to_edges(&req.phi, graph)?;
    if integrate(&req.nu, &req.phi)? != req.h {
        return Err(Error::InvalidArgument("∫φ dν differs from h".into()));
    }
    let rot = rotation_set(graph, &phi_lift)?;
    let cert = match interior_certificate(&rot, &req.h)? {
        InteriorVerdict::Interior(c) => c,
        InteriorVerdict::Boundary | InteriorVerdict::Outside => {
            return Err(Error::BoundaryRotationVector(req.h.to_string()));
        }
    };
    let fa = match graph.automaton() {
        Some(fa) => fa.clone(),
        None => FollowerAutomaton::new(p),
    };
    let (u, nu_u) = select_sync_word(p, &fa, &req.nu, l + 1)?;
    let eps = Rational::min(&req.eps, &(&nu_u / &Rational::from(2i64)));
    let mut tracked = req.family.clone();
    tracked.push(LocallyConstantFn::indicator(&u));
    for g in &tracked {
        lift_to_edges(g, graph)?;
    }
    let max_norm = tracked.iter().map(|g| g.sup_norm()).max().expect("indicator is tracked");
    let t0 = &eps / &(Rational::from(8i64) * &max_norm);
    let parts: Vec<OccupationMeasure> = cert
        .points
        .iter()
        .map(|pt| {
            let xi = fiber_sample(graph, &phi_lift, pt)?;
            convex_combine(&[req.nu.clone(), xi], &[Rational::one() - &t0, t0.clone()])
        })
        .collect::<Result<_>>()?;
    let ell = locality(std::iter::once(&req.phi).chain(&tracked));
    let family = TestFamily::new(req.family.clone(), req.eps.clone())?;
    let scale = &t0 * &cert.delta;
    let mut attempts = Vec::new();
    for frac in &req.r_schedule {
        let r = frac * &scale;
        let mut cycles = Vec::new();
        let mut rvs = Vec::new();
        let mut failed = None;
        for part in &parts {
            let n_start = part.support().count();
            match single_cycle_near(part, &u, &phi_lift, &r, n_start, req.n_cap) {
                Ok(near) => {
                    rvs.push(crate::potential::rotation_vector_of_cycle(&req.phi, &near.cycle));
                    cycles.push(near.cycle);
                }
                Err(e) => {
                    failed = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = failed {
            attempts.push(format!("r = {r}: {e}"));
            continue;
        }
        let lambda = match super::recover_weights_from_rvs(&rvs, &req.h) {
            Ok(l) => l,
            Err(e) => {
                attempts.push(format!("r = {r}: {e}"));
                continue;
            }
        };
        let words: Vec<Word> = cycles
            .iter()
            .map(|c| {
                let c = c.rotate_to_prefix(&u).ok_or_else(|| Error::Internal("cycle misses u".into()))?;
                Ok(power_up(c.word(), ell.max(l), u.len()))
            })
            .collect::<Result<_>>()?;
        let plan = match build_plan(p, &fa, &u, &words, &lambda, &req.phi, &tracked, &eps, req.t_ceiling) {
            Ok(plan) => plan,
            Err(e @ Error::TCeilingExceeded { .. }) => {
                attempts.push(format!("r = {r}: {e}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        let realization = realize_plan(&plan, p, &fa, graph)?;
        if !weakstar_close(&realization.occupation, &req.nu, &family)? {
            attempts.push(format!("r = {r}: periodic measure not within ε on the test family"));
            continue;
        }
        return Ok(Approximation { plan, realization, u, t0, delta: cert.delta, r, attempts });
    }
    Err(Error::RetryExhausted(attempts.join("; ")))
}
