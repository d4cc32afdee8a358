use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigInt;
use rotopt::geometry::rotation_set;
use rotopt::measure::{entropy as measure_entropy, integrate, max_entropy_in_fiber, occupation_of_cycle, weakstar_close, TestFamily};
use rotopt::optimizer::{beta as solve_beta, genericity_experiment, oracle_beta_cycles};
use rotopt::potential::{lift_component, lift_to_edges, locality, LocallyConstantFn};
use rotopt::symbolic::{Cycle, EdgeGraph, FollowerAutomaton, ShiftPresentation, Word};
use rotopt::synthesis::{
    approximate_in_fiber, birkhoff_sum_compressed, build_plan, power_up, realize_plan, recover_weights, ApproximationRequest, Realization,
    SynthesisPlan,
};
use rotopt::{Error, RatVec, Rational};

use crate::input;
use crate::{ApproxArgs, BetaArgs, CliError, CliResult, EntropyArgs, ExperimentArgs, RotsetArgs, SynthesizeArgs};

pub fn rotset(a: &RotsetArgs) -> CliResult<String> {
    let p = input::shift(&a.shift.shift)?;
    let phi = input::potential(&a.phi, &p)?;
    let g = input::graph_for(&p, [&phi], 1)?;
    let rot = rotation_set(&g, &lift_to_edges(&phi, &g)?)?;
    if let Some(path) = &a.svg {
        let svg = rot.to_svg()?;
        std::fs::write(path, svg).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    }
    Ok(rot.to_text(&p))
}

pub fn beta(a: &BetaArgs) -> CliResult<String> {
    let p = input::shift(&a.shift.shift)?;
    let phi = input::potential(&a.phi, &p)?;
    let f = input::potential(&a.f, &p)?;
    if f.dim() != 1 {
        return Err(CliError::Usage(format!("objective must be scalar, got dimension {}", f.dim())));
    }
    let h = input::vector(&a.h, phi.dim())?;
    let g = input::graph_for(&p, [&phi, &f], 1)?;
    let phi_lift = lift_to_edges(&phi, &g)?;
    let f_lift = lift_component(&lift_to_edges(&f, &g)?, 0);
    let res = solve_beta(&g, &phi_lift, &h, &f_lift)?;
    let mut out = String::new();
    writeln!(out, "beta = {}", res.value).unwrap();
    writeln!(out, "unique = {}", res.optimal_face_unique).unwrap();
    writeln!(out, "entropy = ~{:.12}", res.maximizer_entropy).unwrap();
    out.push_str(&res.maximizer.to_text(&p));
    if let Some(n) = a.max_cycle_len {
        let oracle = oracle_beta_cycles(&g, &phi_lift, &h, &f_lift, n)?;
        writeln!(out, "# simple-cycle oracle (length <= {n}) = {oracle}").unwrap();
    }
    Ok(out)
}

pub fn approx(a: &ApproxArgs) -> CliResult<String> {
    let eps = input::positive(&a.eps, "eps")?;
    let p = input::shift(&a.shift.shift)?;
    let phi = input::potential(&a.phi, &p)?;
    let h = input::vector(&a.h, phi.dim())?;
    let family = input::components(&input::potentials(&a.f, &p)?);
    let g = input::graph_for(&p, std::iter::once(&phi).chain(&family), 1)?;
    let nu = input::occupation(&a.nu, &p, g)?;
    let mut req = ApproximationRequest::new(phi.clone(), nu.clone(), h.clone(), eps.clone(), family.clone());
    req.t_ceiling = a.t_ceiling;
    let out = approximate_in_fiber(&p, &req)?;
    let mut s = String::new();
    writeln!(s, "plan").unwrap();
    writeln!(s, "t0 = {}\ndelta = {}\nr = {}", out.t0, out.delta, out.r).unwrap();
    for line in &out.attempts {
        writeln!(s, "# retried: {line}").unwrap();
    }
    s.push_str(&out.plan.to_text(&p));
    s.push_str(&word_block(&p, &out.realization, a.print_limit));
    s.push_str(&verification(&phi, &h, &out.plan, &out.realization)?);
    let nu_means = family.iter().map(|f| integrate(&nu, f)).collect::<rotopt::Result<Vec<_>>>()?;
    for (j, f) in family.iter().enumerate() {
        let mean = integrate(&out.realization.occupation, f)?.0[0].clone();
        let target = &nu_means[j].0[0];
        let dev = (&mean - target).abs();
        let mark = if dev < eps { "<" } else { ">=" };
        writeln!(s, "f{}: mean(x) = {mean}, mean(nu) = {target}, deviation = {dev} {mark} eps = {eps}", j + 1).unwrap();
    }
    let close = weakstar_close(&out.realization.occupation, &nu, &TestFamily::new(family, eps)?)?;
    writeln!(s, "weak* close = {close}").unwrap();
    Ok(s)
}

pub fn synthesize(a: &SynthesizeArgs) -> CliResult<String> {
    let eps = input::positive(&a.eps, "eps")?;
    let p = input::shift(&a.shift.shift)?;
    let phi = input::potential(&a.phi, &p)?;
    let h = input::vector(&a.h, phi.dim())?;
    let tracked = input::components(&input::potentials(&a.f, &p)?);
    let u = p.word(&a.u)?;
    let g = input::graph_for(&p, std::iter::once(&phi).chain(&tracked), 1)?;
    let fa = match g.automaton() {
        Some(fa) => fa.clone(),
        None => FollowerAutomaton::new(&p),
    };
    let cycles: Vec<Cycle> = a.cycles.iter().map(|c| Ok(Cycle::new(p.word(c)?))).collect::<rotopt::Result<_>>()?;
    let lambda = recover_weights(&cycles, &phi, &h)?;
    let ell = locality(std::iter::once(&phi).chain(&tracked));
    let words: Vec<Word> = cycles
        .iter()
        .map(|c| {
            let c = c.rotate_to_prefix(&u).ok_or_else(|| Error::MissingPrefix { cycle: p.render(c.word()), prefix: p.render(&u) })?;
            Ok(power_up(c.word(), ell.max(g.order()), u.len()))
        })
        .collect::<rotopt::Result<_>>()?;
    let plan = build_plan(&p, &fa, &u, &words, &lambda, &phi, &tracked, &eps, a.t_ceiling)?;
    let real = realize_plan(&plan, &p, &fa, &g)?;
    let mut s = String::from("plan\n");
    s.push_str(&plan.to_text(&p));
    s.push_str(&word_block(&p, &real, a.print_limit));
    s.push_str(&verification(&phi, &h, &plan, &real)?);
    Ok(s)
}

fn word_block(p: &ShiftPresentation, real: &Realization, limit: usize) -> String {
    let mut s = format!("x = {}\n", real.x.render(p));
    if let Some(w) = real.x.materialize(limit) {
        writeln!(s, "x (explicit) = {}", p.render(&w)).unwrap();
    }
    s
}

/// Exact checks recomputed from the compressed word.
fn verification(phi: &LocallyConstantFn, h: &RatVec, plan: &SynthesisPlan, real: &Realization) -> CliResult<String> {
    let x = &real.x;
    let len = Rational::from(BigInt::from(x.len()));
    let s_phi = birkhoff_sum_compressed(phi, x)?;
    let rv = s_phi.scale(&len.recip());
    let mut s = String::from("verification\n");
    if &rv != h || s_phi != plan.birkhoff_formula_phi() {
        return Err(CliError::Core(Error::Internal(format!("rv(x) = {rv} differs from h = {h}"))));
    }
    writeln!(s, "rv(x) = {rv} (exact)").unwrap();
    writeln!(s, "S_|x| phi = {s_phi} = A*R*delta_phi + sum M_i |a_i| rv(a_i) (exact)").unwrap();
    let half = &plan.eps / &Rational::from(2i64);
    for (j, g) in plan.tracked.iter().enumerate() {
        let direct = birkhoff_sum_compressed(g, x)?.0[0].clone();
        let formula = plan.birkhoff_formula(j);
        let rel = if direct == formula { "=" } else { "!=" };
        let dev = &real.deviations[j];
        writeln!(s, "g{}: S_|x| g = {direct} {rel} {formula}, deviation = {dev} < eps/2 = {half}", j + 1).unwrap();
    }
    Ok(s)
}

pub fn entropy(a: &EntropyArgs) -> CliResult<String> {
    let p = input::shift(&a.shift.shift)?;
    if let Some(c) = &a.cycle {
        let c = Cycle::new(p.word(c)?);
        let g = Arc::new(EdgeGraph::new(&p, a.order.max(1))?);
        let m = occupation_of_cycle(&c, &g)?;
        return Ok(format!("entropy = ~{:.12}\n", measure_entropy(&m)));
    }
    if let Some(path) = &a.nu {
        let g = Arc::new(EdgeGraph::new(&p, a.order.max(1))?);
        let m = input::occupation(path, &p, g)?;
        return Ok(format!("entropy = ~{:.12}\n", measure_entropy(&m)));
    }
    let best = match (&a.phi, &a.h) {
        (Some(phi), Some(h)) => {
            let phi = input::potential(phi, &p)?;
            let h = input::vector(h, phi.dim())?;
            let g = input::graph_for(&p, [&phi], a.order)?;
            let lift = lift_to_edges(&phi, &g)?;
            max_entropy_in_fiber(&g, Some((&lift, &h)), 1e-12)?
        }
        _ => {
            let g = EdgeGraph::new(&p, a.order.max(1))?;
            max_entropy_in_fiber(&g, None, 1e-12)?
        }
    };
    Ok(format!("max entropy = ~{:.12}\nresidual = ~{:.12}\n", best.entropy, best.residual))
}

pub fn experiment(a: &ExperimentArgs) -> CliResult<String> {
    let p = input::shift(&a.shift.shift)?;
    let phi = input::potential(&a.phi, &p)?;
    let h = input::vector(&a.h, phi.dim())?;
    let g = input::graph_for(&p, [&phi], a.order)?;
    let lift = lift_to_edges(&phi, &g)?;
    let report = genericity_experiment(&p, &g, &lift, &h, a.trials, a.order, a.seed)?;
    Ok(report.to_text())
}
