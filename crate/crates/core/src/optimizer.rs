//! Relative maximization `β^φ_h(f)` as an exact LP over occupation measures.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lp::{Lp, LpOutcome};
use crate::measure::{entropy, fiber_lp, integrate_lift, occupation_of_walk, OccupationMeasure};
use crate::potential::{lift_component, lift_to_edges, EdgeLift, LocallyConstantFn};
use crate::rational::{RatVec, Rational};
use crate::symbolic::{for_each_simple_cycle, EdgeGraph, ShiftPresentation};

#[derive(Clone, Debug)]
pub struct OptimizationResult {
    pub value: Rational,
    /// The optimal LP vertex when the face is a point; otherwise a relative
    /// interior point of the optimal face.
    pub maximizer: OccupationMeasure,
    /// The optimal basic solution found by the simplex method.
    pub vertex: OccupationMeasure,
    pub optimal_face_unique: bool,
    pub maximizer_entropy: f64,
    /// Multipliers for the rows of [`OptimizationResult::lp`].
    pub duals: Vec<Rational>,
    pub lp: Lp,
}

impl OptimizationResult {
    /// `Σ_e (yᵀA_e − f_e) m_e`, which equals `β − ∫f dm` for any feasible
    /// `m` and is nonnegative by dual feasibility.
    pub fn certificate_gap(&self, m: &OccupationMeasure) -> Rational {
        let lp = &self.lp;
        (0..lp.num_vars())
            .filter(|&e| !m.weight(e).is_zero())
            .map(|e| {
                let col: Rational = (0..lp.num_rows()).map(|i| &self.duals[i] * &lp.row(i)[e]).sum();
                (col - &lp.objective()[e]) * m.weight(e)
            })
            .sum()
    }

    /// `yᵀb`, the dual objective.
    pub fn dual_value(&self) -> Rational {
        self.duals.iter().zip(self.lp.rhs()).map(|(y, b)| y * b).sum()
    }
}

/// `β^φ_h(f)` with an optimal measure and a dual certificate.
pub fn beta(graph: &Arc<EdgeGraph>, phi: &EdgeLift, h: &RatVec, f: &[Rational]) -> Result<OptimizationResult> {
    check_dims(graph, phi, h, f)?;
    let mut lp = fiber_lp(graph, Some((phi, h)));
    lp.set_objective(f.to_vec());
    let sol = match lp.solve() {
        LpOutcome::Optimal(s) => s,
        LpOutcome::Infeasible => return Err(Error::Infeasible("h outside rotation set".into())),
        LpOutcome::Unbounded => return Err(Error::Unbounded),
    };
    let vertex = OccupationMeasure::new(graph.clone(), sol.x)?;
    let maximizer = if sol.unique { vertex.clone() } else { face_center(graph, &lp, f, &sol.value)? };
    let maximizer_entropy = entropy(&maximizer);
    Ok(OptimizationResult { value: sol.value, maximizer, vertex, optimal_face_unique: sol.unique, maximizer_entropy, duals: sol.duals, lp })
}

fn check_dims(graph: &EdgeGraph, phi: &EdgeLift, h: &RatVec, f: &[Rational]) -> Result<()> {
    if phi.len() != graph.num_edges() || f.len() != graph.num_edges() {
        return Err(Error::GraphMismatch);
    }
    if phi.first().map_or(0, RatVec::dim) != h.dim() {
        return Err(Error::InvalidArgument(format!("h has dimension {}, constraint has {}", h.dim(), phi[0].dim())));
    }
    Ok(())
}

/// Average of per-edge maximizers over the optimal face; it charges every
/// edge that any optimal measure charges.
fn face_center(graph: &Arc<EdgeGraph>, lp: &Lp, f: &[Rational], value: &Rational) -> Result<OccupationMeasure> {
    let mut face = lp.clone();
    face.add_eq(f.to_vec(), value.clone());
    let n = graph.num_edges();
    let mut covered = vec![false; n];
    let mut points: Vec<Vec<Rational>> = Vec::new();
    for e in 0..n {
        if covered[e] {
            continue;
        }
        let mut probe = face.clone();
        let mut c = vec![Rational::zero(); n];
        c[e] = Rational::one();
        probe.set_objective(c);
        let sol = probe.solve().optimal().ok_or_else(|| Error::Internal("optimal face LP failed".into()))?;
        if sol.value.is_zero() {
            continue;
        }
        for (j, x) in sol.x.iter().enumerate() {
            covered[j] |= !x.is_zero();
        }
        points.push(sol.x);
    }
    if points.is_empty() {
        return Err(Error::Internal("optimal face is empty".into()));
    }
    let k = Rational::from(points.len()).recip();
    let mut w = vec![Rational::zero(); n];
    for p in &points {
        for (j, x) in p.iter().enumerate() {
            if !x.is_zero() {
                w[j] += x * &k;
            }
        }
    }
    OccupationMeasure::new(graph.clone(), w)
}

/// `β` recomputed as an LP over convex weights of simple cycles of length
/// at most `max_len`; equal to [`beta`] when `max_len` covers all simple
/// cycles.
pub fn oracle_beta_cycles(graph: &Arc<EdgeGraph>, phi: &EdgeLift, h: &RatVec, f: &[Rational], max_len: usize) -> Result<Rational> {
    check_dims(graph, phi, h, f)?;
    let f_lift: EdgeLift = f.iter().map(|x| RatVec(vec![x.clone()])).collect();
    let mut cols: Vec<(RatVec, Rational)> = Vec::new();
    for_each_simple_cycle(graph, max_len, |walk| {
        let m = occupation_of_walk(walk, graph);
        let col = (integrate_lift(&m, phi), integrate_lift(&m, &f_lift).0[0].clone());
        if !cols.contains(&col) {
            cols.push(col);
        }
    });
    let mut lp = Lp::new(cols.len());
    for i in 0..h.dim() {
        lp.add_eq(cols.iter().map(|(r, _)| r.0[i].clone()).collect(), h.0[i].clone());
    }
    lp.add_eq(vec![Rational::one(); cols.len()], Rational::one());
    lp.set_objective(cols.iter().map(|(_, v)| v.clone()).collect());
    match lp.solve() {
        LpOutcome::Optimal(s) => Ok(s.value),
        LpOutcome::Infeasible => Err(Error::Infeasible("h outside rotation set".into())),
        LpOutcome::Unbounded => Err(Error::Unbounded),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeVerdict {
    /// `∫g dμ`
    pub lhs: Rational,
    /// `β(f+g) − β(f)`
    pub rhs: Rational,
    pub pass: bool,
}

/// For each probe `g`, checks `∫g dμ <= β(f+g) − β(f)`.
pub fn tangency_check(
    graph: &Arc<EdgeGraph>,
    phi: &EdgeLift,
    h: &RatVec,
    f: &[Rational],
    mu: &OccupationMeasure,
    probes: &[Vec<Rational>],
) -> Result<Vec<ProbeVerdict>> {
    if integrate_lift(mu, phi) != *h {
        return Err(Error::Infeasible("μ is not in the rotation class of h".into()));
    }
    let base = beta(graph, phi, h, f)?.value;
    probes
        .iter()
        .map(|g| {
            let fg: Vec<Rational> = f.iter().zip(g).map(|(a, b)| a + b).collect();
            let rhs = beta(graph, phi, h, &fg)?.value - &base;
            let lhs: Rational = mu.support().map(|e| mu.weight(e) * &g[e]).sum();
            let pass = lhs <= rhs;
            Ok(ProbeVerdict { lhs, rhs, pass })
        })
        .collect()
}

/// Random scalar function of the given order with values `n/1000`,
/// `n` uniform in `[−1000, 1000]`, drawn in lexicographic word order.
pub fn random_objective<R: Rng>(p: &ShiftPresentation, order: usize, rng: &mut R) -> LocallyConstantFn {
    LocallyConstantFn::from_fn(p, order, |_| Rational::new(rng.gen_range(-1000..=1000), 1000))
}

#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub trial: usize,
    pub beta: Rational,
    pub unique: bool,
    /// Histogram of out-degrees of supported vertices: `profile[k]` counts
    /// vertices with `k` supported outgoing edges.
    pub out_degree_profile: Vec<usize>,
    pub entropy: f64,
}

impl TrialRecord {
    pub fn is_single_cycle_support(&self) -> bool {
        self.out_degree_profile.iter().skip(2).all(|&c| c == 0)
    }
}

#[derive(Clone, Debug, Default)]
pub struct GenericityReport {
    pub trials: Vec<TrialRecord>,
    pub seed: u64,
    pub order: usize,
}

impl GenericityReport {
    /// Fraction of trials whose maximizer has out-degree-1 support.
    pub fn zero_entropy_fraction(&self) -> f64 {
        self.fraction(|t| t.is_single_cycle_support())
    }

    pub fn below_threshold_fraction(&self, eps: f64) -> f64 {
        self.fraction(|t| t.entropy < eps)
    }

    pub fn unique_fraction(&self) -> f64 {
        self.fraction(|t| t.unique)
    }

    fn fraction<F: Fn(&TrialRecord) -> bool>(&self, pred: F) -> f64 {
        if self.trials.is_empty() {
            return 0.0;
        }
        self.trials.iter().filter(|t| pred(t)).count() as f64 / self.trials.len() as f64
    }

    /// Tab-separated table followed by summary lines.
    pub fn to_text(&self) -> String {
        let mut out = String::from("trial\tbeta\tunique\tout_degrees\tentropy\n");
        for t in &self.trials {
            let prof: Vec<String> = t.out_degree_profile.iter().map(usize::to_string).collect();
            out.push_str(&format!("{}\t{}\t{}\t{}\t~{:.12}\n", t.trial, t.beta, t.unique, prof.join(","), t.entropy));
        }
        out.push_str(&format!("trials = {}\n", self.trials.len()));
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("objective order = {}\n", self.order));
        out.push_str("coefficients = n/1000, n uniform in [-1000, 1000]\n");
        out.push_str(&format!("unique fraction = ~{:.12}\n", self.unique_fraction()));
        out.push_str(&format!("zero entropy fraction = ~{:.12}\n", self.zero_entropy_fraction()));
        out.push_str(&format!("entropy < 1e-9 fraction = ~{:.12}\n", self.below_threshold_fraction(1e-9)));
        out
    }
}

fn out_degree_profile(m: &OccupationMeasure) -> Vec<usize> {
    let g = m.graph();
    let mut prof = vec![0usize; 1];
    for v in 0..g.num_vertices() {
        let k = g.out_edges(v).iter().filter(|&&e| !m.weight(e).is_zero()).count();
        if k == 0 {
            continue;
        }
        if prof.len() <= k {
            prof.resize(k + 1, 0);
        }
        prof[k] += 1;
    }
    prof
}

/// Samples random objectives and records properties of their relative
/// maximizers. The graph must have order at least `order`.
pub fn genericity_experiment(
    p: &ShiftPresentation,
    graph: &Arc<EdgeGraph>,
    phi: &EdgeLift,
    h: &RatVec,
    trials: usize,
    order: usize,
    seed: u64,
) -> Result<GenericityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(trials);
    for trial in 0..trials {
        let f = random_objective(p, order, &mut rng);
        let f_lift = lift_component(&lift_to_edges(&f, graph)?, 0);
        let res = beta(graph, phi, h, &f_lift)?;
        records.push(TrialRecord {
            trial,
            beta: res.value,
            unique: res.optimal_face_unique,
            out_degree_profile: out_degree_profile(&res.maximizer),
            entropy: res.maximizer_entropy,
        });
    }
    Ok(GenericityReport { trials: records, seed, order })
}

/// A fiber point that is not optimal, when one exists: the minimizer of `f`.
pub fn suboptimal_point(graph: &Arc<EdgeGraph>, phi: &EdgeLift, h: &RatVec, f: &[Rational]) -> Result<Option<OccupationMeasure>> {
    let neg: Vec<Rational> = f.iter().map(|x| -x).collect();
    let worst = beta(graph, phi, h, &neg)?;
    let best = beta(graph, phi, h, f)?;
    if -&worst.value == best.value {
        return Ok(None);
    }
    Ok(Some(worst.vertex))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::measure::{convex_combine, flow_decompose, integrate_lift};
    use crate::potential::parse_potential;
    use crate::rational::q;
    use crate::symbolic::parse_shift;

    struct Inst {
        p: ShiftPresentation,
        g: Arc<EdgeGraph>,
        phi: EdgeLift,
    }

    fn inst(shift: &str, phi: &str, order: usize) -> Inst {
        let p = parse_shift(shift).unwrap();
        let g = Arc::new(EdgeGraph::new(&p, order).unwrap());
        let phi = lift_to_edges(&parse_potential(phi, &p).unwrap(), &g).unwrap();
        Inst { p, g, phi }
    }

    fn scalar(i: &Inst, text: &str) -> Vec<Rational> {
        lift_component(&lift_to_edges(&parse_potential(text, &i.p).unwrap(), &i.g).unwrap(), 0)
    }

    #[test]
    fn pinned_objective() {
        let i = inst(fixtures::FULL_TWO_SHIFT, fixtures::X0, 1);
        let h = RatVec(vec![q(1, 2)]);
        let f = scalar(&i, fixtures::X0);
        let r = beta(&i.g, &i.phi, &h, &f).unwrap();
        assert_eq!(r.value, q(1, 2));
        assert!(!r.optimal_face_unique);
    }

    #[test]
    fn freq_01_is_maximized_by_the_alternating_cycle() {
        let i = inst(fixtures::FULL_TWO_SHIFT, fixtures::X0, 1);
        let h = RatVec(vec![q(1, 2)]);
        let f = scalar(&i, fixtures::FREQ_01);
        let r = beta(&i.g, &i.phi, &h, &f).unwrap();
        assert_eq!(r.value, q(1, 2));
        assert!(r.optimal_face_unique);
        let combo = flow_decompose(&r.maximizer);
        assert_eq!(combo.cycles.len(), 1);
        assert_eq!(i.p.render(combo.cycles[0].word()), "0 1");
        assert_eq!(r.maximizer_entropy, 0.0);
        assert_eq!(oracle_beta_cycles(&i.g, &i.phi, &h, &f, 2).unwrap(), q(1, 2));
        assert_eq!(r.dual_value(), r.value);
    }

    #[test]
    fn reduced_three_symbol_boundary_fiber() {
        let i = inst(fixtures::THREE_SYMBOL_SHIFT, fixtures::THREE_SYMBOL_REDUCED, 1);
        let h = RatVec(vec![q(1, 2), q(0, 1)]);
        let f = scalar(&i, fixtures::THREE_SYMBOL_FREQ_2);
        let r = beta(&i.g, &i.phi, &h, &f).unwrap();
        assert_eq!(r.value, q(0, 1));
        let names: Vec<String> = flow_decompose(&r.maximizer).cycles.iter().map(|c| i.p.render(c.word())).collect();
        assert_eq!(names, ["1", "3"]);
        assert_eq!(oracle_beta_cycles(&i.g, &i.phi, &h, &f, 3).unwrap(), q(0, 1));
        let h = RatVec(vec![q(1, 1), q(1, 1)]);
        assert!(matches!(beta(&i.g, &i.phi, &h, &f), Err(Error::Infeasible(_))));
    }

    #[test]
    fn zero_objective_is_flagged_non_unique() {
        let i = inst(fixtures::FULL_TWO_SHIFT, fixtures::X0, 1);
        let h = RatVec(vec![q(1, 2)]);
        let f = vec![Rational::zero(); i.g.num_edges()];
        let r = beta(&i.g, &i.phi, &h, &f).unwrap();
        assert_eq!(r.value, q(0, 1));
        assert!(!r.optimal_face_unique);
        assert!(r.maximizer_entropy > 0.0);
        assert_eq!(integrate_lift(&r.maximizer, &i.phi), h);
    }

    #[test]
    fn shifts_scales_and_certificates() {
        let i = inst(fixtures::GOLDEN_MEAN, fixtures::X0, 2);
        let h = RatVec(vec![q(2, 5)]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let f = lift_component(&lift_to_edges(&random_objective(&i.p, 2, &mut rng), &i.g).unwrap(), 0);
            let r = beta(&i.g, &i.phi, &h, &f).unwrap();
            let c = q(3, 7);
            let shifted: Vec<Rational> = f.iter().map(|x| x + &c).collect();
            assert_eq!(beta(&i.g, &i.phi, &h, &shifted).unwrap().value, &r.value + &c);
            let s = q(5, 2);
            let scaled: Vec<Rational> = f.iter().map(|x| x * &s).collect();
            assert_eq!(beta(&i.g, &i.phi, &h, &scaled).unwrap().value, &r.value * &s);
            assert_eq!(oracle_beta_cycles(&i.g, &i.phi, &h, &f, i.g.num_vertices()).unwrap(), r.value);
            let other = suboptimal_point(&i.g, &i.phi, &h, &f).unwrap();
            if let Some(m) = other {
                let fm: Rational = m.support().map(|e| m.weight(e) * &f[e]).sum();
                assert_eq!(r.certificate_gap(&m), &r.value - &fm);
                assert!(r.certificate_gap(&m) >= Rational::zero());
                let mid = convex_combine(&[m, r.vertex.clone()], &[q(1, 3), q(2, 3)]).unwrap();
                let fmid: Rational = mid.support().map(|e| mid.weight(e) * &f[e]).sum();
                assert_eq!(r.certificate_gap(&mid), &r.value - &fmid);
            }
        }
    }

    #[test]
    fn constant_constraint_reduces_to_unconstrained() {
        let i = inst(fixtures::GOLDEN_MEAN, "order 0\ndefault : 1/3\n", 1);
        let h = RatVec(vec![q(1, 3)]);
        let f = scalar(&i, fixtures::X0);
        assert_eq!(beta(&i.g, &i.phi, &h, &f).unwrap().value, q(1, 2));
    }

    #[test]
    fn tangency() {
        let i = inst(fixtures::GOLDEN_MEAN, fixtures::X0, 2);
        let h = RatVec(vec![q(2, 5)]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = lift_component(&lift_to_edges(&random_objective(&i.p, 2, &mut rng), &i.g).unwrap(), 0);
        let r = beta(&i.g, &i.phi, &h, &f).unwrap();
        let probes: Vec<Vec<Rational>> = (0..20)
            .map(|_| lift_component(&lift_to_edges(&random_objective(&i.p, 2, &mut rng), &i.g).unwrap(), 0))
            .chain([vec![Rational::zero(); i.g.num_edges()]])
            .collect();
        let v = tangency_check(&i.g, &i.phi, &h, &f, &r.maximizer, &probes).unwrap();
        assert!(v.iter().all(|p| p.pass));
        assert_eq!(v.last().unwrap().lhs, Rational::zero());
        if let Some(m) = suboptimal_point(&i.g, &i.phi, &h, &f).unwrap() {
            let neg = vec![f.iter().map(|x| -x).collect::<Vec<_>>()];
            assert!(!tangency_check(&i.g, &i.phi, &h, &f, &m, &neg).unwrap()[0].pass);
        }
    }

    #[test]
    fn experiment_is_deterministic() {
        let i = inst(fixtures::GOLDEN_MEAN, fixtures::X0, 2);
        let h = RatVec(vec![q(2, 5)]);
        let a = genericity_experiment(&i.p, &i.g, &i.phi, &h, 5, 2, 42).unwrap();
        let b = genericity_experiment(&i.p, &i.g, &i.phi, &h, 5, 2, 42).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        for t in &a.trials {
            if t.unique && t.is_single_cycle_support() {
                assert_eq!(t.entropy, 0.0);
            }
        }
        assert!(genericity_experiment(&i.p, &i.g, &i.phi, &h, 0, 2, 1).unwrap().trials.is_empty());
    }
}
