//! Fixed regression checks. Each named group bundles a few exact
//! assertions and reports one line per assertion.

use std::collections::HashSet;
use std::sync::Arc;

use rotopt::fixtures;
use rotopt::geometry::{fiber_sample, rotation_set};
use rotopt::measure::{flow_decompose, integrate_lift};
use rotopt::optimizer::beta;
use rotopt::potential::{lift_component, lift_to_edges, parse_potential, rotation_vector_of_cycle};
use rotopt::symbolic::{enumerate_cycles, parse_shift, EdgeGraph, FollowerAutomaton};
use rotopt::synthesis::{approximate_in_fiber, build_plan, realize_plan, ApproximationRequest, DEFAULT_T_CEILING};
use rotopt::{q, Error, RatVec};

use crate::{CliError, CliResult, VerifyArgs};

type Check = (&'static str, fn() -> rotopt::Result<Vec<(bool, String)>>);

const CHECKS: &[Check] =
    &[("remark-3x3", remark_3x3), ("golden-mean", golden_mean), ("full-shift-beta", full_shift_beta), ("seven-twelfths", seven_twelfths)];

pub fn run(a: &VerifyArgs) -> CliResult<String> {
    for name in &a.only {
        if !CHECKS.iter().any(|(n, _)| n == name) {
            let known: Vec<&str> = CHECKS.iter().map(|(n, _)| *n).collect();
            return Err(CliError::Usage(format!("unknown check {name:?}; known checks: {}", known.join(", "))));
        }
    }
    let mut out = String::new();
    let (mut passed, mut total) = (0, 0);
    for (name, check) in CHECKS {
        if !a.only.is_empty() && !a.only.iter().any(|n| n == name) {
            continue;
        }
        let lines = check().unwrap_or_else(|e| vec![(false, format!("error: {e}"))]);
        for (ok, detail) in lines {
            total += 1;
            passed += ok as usize;
            out.push_str(&format!("{}\t{name}\t{detail}\n", if ok { "PASS" } else { "FAIL" }));
        }
    }
    out.push_str(&format!("{passed}/{total} checks passed\n"));
    if passed == total {
        Ok(out)
    } else {
        Err(CliError::Failed(out))
    }
}

fn rv(v: &[(i64, i64)]) -> RatVec {
    RatVec(v.iter().map(|&(a, b)| q(a, b)).collect())
}

fn remark_3x3() -> rotopt::Result<Vec<(bool, String)>> {
    let mut res = Vec::new();
    let p = parse_shift(fixtures::THREE_SYMBOL_SHIFT)?;
    let g = Arc::new(EdgeGraph::new(&p, 1)?);
    res.push((
        g.num_vertices() == 3 && g.num_edges() == 7,
        format!("order-1 edge graph has {} vertices and {} edges", g.num_vertices(), g.num_edges()),
    ));
    let w13 = p.word("1 3")?;
    res.push((!p.is_allowed(&w13), format!("\"1 3\" allowed = {}", p.is_allowed(&w13))));

    let ind = parse_potential(fixtures::THREE_SYMBOL_INDICATORS, &p)?;
    let rot = rotation_set(&g, &lift_to_edges(&ind, &g)?)?;
    let mut got: Vec<RatVec> = rot.vertices().to_vec();
    got.sort_by_key(|v| v.to_string());
    let mut want = vec![rv(&[(1, 1), (0, 1), (0, 1)]), rv(&[(0, 1), (1, 1), (0, 1)]), rv(&[(0, 1), (0, 1), (1, 1)])];
    want.sort_by_key(|v| v.to_string());
    let shown: Vec<String> = got.iter().map(|v| format!("({v})")).collect();
    res.push((got == want, format!("rotation set vertices {}", shown.join(" "))));

    let reduced = parse_potential(fixtures::THREE_SYMBOL_REDUCED, &p)?;
    let lift = lift_to_edges(&reduced, &g)?;
    let h = rv(&[(1, 2), (0, 1)]);
    let simple = enumerate_cycles(&g, 20).iter().filter(|c| rotation_vector_of_cycle(&reduced, c) == h).count();
    let walks = closed_walks_hitting(&g, 20);
    res.push((
        simple == 0 && walks == 0,
        format!("h = (1/2 0): {simple} simple cycles and {walks} closed-walk lengths up to 20 reach h exactly"),
    ));

    let sample = fiber_sample(&g, &lift, &h)?;
    let combo = flow_decompose(&sample);
    let mut parts: Vec<String> = combo.cycles.iter().zip(&combo.weights).map(|(c, w)| format!("{w}*[{}]", p.render(c.word()))).collect();
    parts.sort();
    let ok = integrate_lift(&sample, &lift) == h && parts == ["1/2*[1]", "1/2*[3]"];
    res.push((ok, format!("fiber sample = {}", parts.join(" + "))));

    let req = ApproximationRequest::new(reduced, sample, h, q(1, 10), vec![]);
    let verdict = approximate_in_fiber(&p, &req);
    res.push((
        matches!(verdict, Err(Error::BoundaryRotationVector(_))),
        match verdict {
            Ok(_) => "approximation unexpectedly succeeded".to_string(),
            Err(e) => format!("approximation refused: {e}"),
        },
    ));
    Ok(res)
}

/// Number of lengths `n <= max_len` admitting a closed walk with exactly
/// `n/2` visits to symbol 1 and none to symbol 2.
#[allow(clippy::needless_range_loop)]
fn closed_walks_hitting(g: &EdgeGraph, max_len: usize) -> usize {
    let sym = |v: usize| g.vertices()[v].word.0[0];
    let mut hits = 0;
    let mut found = vec![false; max_len + 1];
    for start in 0..g.num_vertices() {
        let mut layer: HashSet<(usize, usize, usize)> = HashSet::from([(start, 0, 0)]);
        for n in 1..=max_len {
            let mut next = HashSet::new();
            for &(v, c1, c2) in &layer {
                let (c1, c2) = (c1 + (sym(v) == 0) as usize, c2 + (sym(v) == 1) as usize);
                for &e in g.out_edges(v) {
                    next.insert((g.edges()[e].to, c1, c2));
                }
            }
            if next.iter().any(|&(v, c1, c2)| v == start && 2 * c1 == n && c2 == 0) && !found[n] {
                found[n] = true;
                hits += 1;
            }
            layer = next;
        }
    }
    hits
}

fn golden_mean() -> rotopt::Result<Vec<(bool, String)>> {
    let p = parse_shift(fixtures::GOLDEN_MEAN)?;
    let g = Arc::new(EdgeGraph::new(&p, 1)?);
    let x0 = parse_potential(fixtures::X0, &p)?;
    let rot = rotation_set(&g, &lift_to_edges(&x0, &g)?)?;
    let mut got: Vec<String> = rot.vertices().iter().map(|v| v.to_string()).collect();
    got.sort();
    let fa = FollowerAutomaton::new(&p);
    Ok(vec![
        (got == ["0", "1/2"], format!("rotation set vertices {}", got.join(", "))),
        (fa.is_synchronizing(&p.word("0")?)?, "\"0\" is synchronizing".to_string()),
    ])
}

fn full_shift_beta() -> rotopt::Result<Vec<(bool, String)>> {
    let p = parse_shift(fixtures::FULL_TWO_SHIFT)?;
    let g = Arc::new(EdgeGraph::new(&p, 1)?);
    let x0 = lift_to_edges(&parse_potential(fixtures::X0, &p)?, &g)?;
    let f = lift_component(&lift_to_edges(&parse_potential(fixtures::FREQ_01, &p)?, &g)?, 0);
    let zero = lift_component(&lift_to_edges(&parse_potential(fixtures::ZERO, &p)?, &g)?, 0);
    let h = rv(&[(1, 2)]);
    let b = beta(&g, &x0, &h, &f)?;
    let z = beta(&g, &x0, &h, &zero)?;
    let outside = beta(&g, &x0, &rv(&[(3, 2)]), &f);
    Ok(vec![
        (b.value == q(1, 2), format!("beta(freq 01 | h = 1/2) = {}", b.value)),
        (z.value == q(0, 1) && !z.optimal_face_unique, format!("beta(0) = {}, unique = {}", z.value, z.optimal_face_unique)),
        (matches!(outside, Err(Error::Infeasible(_))), "h = 3/2 is reported outside the rotation set".to_string()),
    ])
}

fn seven_twelfths() -> rotopt::Result<Vec<(bool, String)>> {
    let p = parse_shift(fixtures::FULL_TWO_SHIFT)?;
    let x0 = parse_potential(fixtures::X0, &p)?;
    let fa = FollowerAutomaton::new(&p);
    let u = p.word("0 1")?;
    let words = vec![p.word("0 1")?, p.word("0 1 1")?];
    let g = Arc::new(EdgeGraph::new(&p, 1)?);
    let plan = build_plan(&p, &fa, &u, &power(&words), &[q(1, 2), q(1, 2)], &x0, &[], &q(1, 10), DEFAULT_T_CEILING)?;
    let real = realize_plan(&plan, &p, &fa, &g)?;
    Ok(vec![
        (plan.delta_phi.is_zero() && plan.r == 1.into(), format!("delta_phi = {}, R = {}", plan.delta_phi, plan.r)),
        (real.rv == rv(&[(7, 12)]), format!("rv(x) = {} (exact), |x| = {}", real.rv, real.x.len())),
    ])
}

fn power(words: &[rotopt::symbolic::Word]) -> Vec<rotopt::symbolic::Word> {
    words.iter().map(|w| rotopt::synthesis::power_up(w, 1, 2)).collect()
}
