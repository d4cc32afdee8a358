//! Periodic orbits with an exactly prescribed rotation vector.
//!
//! Cycles sharing a synchronizing prefix `u` concatenate without gap words.
//! The word `x = y·z^{AR−1}` mixes them in proportions `λ = q/Q`, with the
//! exponents of `y` shifted by `m′` so that the junction errors cancel and
//! `rv(x) = h` holds as a rational identity. The words are astronomically
//! long, so they are kept as [`CompressedWord`]s and every check runs on
//! the compressed form.

mod compressed;
mod near;
mod pipeline;

pub use compressed::{birkhoff_sum_compressed, occupation_compressed, Block, CompressedWord, Segment, SyncAnchor};
pub use near::{single_cycle_near, NearCycle};
pub use pipeline::{approximate_in_fiber, select_sync_word, Approximation, ApproximationRequest};

use std::sync::Arc;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::linalg::{from_columns, inverse, mat_vec, Matrix};
use crate::measure::OccupationMeasure;
use crate::potential::{locality, rotation_vector_of_cycle, LocallyConstantFn};
use crate::rational::{common_denominator, RatVec, Rational};
use crate::symbolic::{Cycle, EdgeGraph, FollowerAutomaton, ShiftPresentation, Word};

/// Default upper bound on the plan parameter `t`.
pub const DEFAULT_T_CEILING: u64 = 1_000_000;

/// Checks that `u` synchronizes and returns the state it leads to.
pub fn sync_anchor<'a>(p: &ShiftPresentation, fa: &'a FollowerAutomaton, u: &Word) -> Result<SyncAnchor<'a>> {
    if u.is_empty() || !fa.is_synchronizing(u)? {
        return Err(Error::NotSynchronizing(p.render(u)));
    }
    let state = fa.word_state(u).expect("allowed word has a state");
    Ok(SyncAnchor { fa, state, u_len: u.len() })
}

/// Every block word starts with `u` and, read from the state after `u`,
/// comes back to it once `u` is read again. Then any concatenation of the
/// blocks, in any order and with any exponents, is allowed and periodic.
pub fn check_blocks(p: &ShiftPresentation, anchor: &SyncAnchor<'_>, u: &Word, words: &[Word]) -> Result<()> {
    for w in words {
        if w.len() < anchor.u_len || !w.starts_with(u) {
            return Err(Error::MissingPrefix { cycle: p.render(w), prefix: p.render(u) });
        }
        let back = anchor.fa.read(anchor.state, &w.symbols()[anchor.u_len..]).and_then(|q| anchor.fa.read(q, u.symbols()));
        if back != Some(anchor.state) {
            return Err(Error::Internal(format!("automaton rejects {} after u", p.render(w))));
        }
    }
    Ok(())
}

/// Concatenates `c₁^{e₁} c₂^{e₂} ⋯` after checking it is allowed and extends
/// periodically (two full wrap-arounds are read by the automaton).
pub fn concat_check(p: &ShiftPresentation, fa: &FollowerAutomaton, u: &Word, blocks: &[(Cycle, usize)]) -> Result<Word> {
    let anchor = sync_anchor(p, fa, u)?;
    for (c, _) in blocks {
        if !c.word().starts_with(u) {
            return Err(Error::MissingPrefix { cycle: p.render(c.word()), prefix: p.render(u) });
        }
    }
    let words: Vec<Word> = blocks.iter().map(|(c, _)| c.word().clone()).collect();
    check_blocks(p, &anchor, u, &words)?;
    let mut out = Vec::new();
    for (c, e) in blocks {
        for _ in 0..*e {
            out.extend_from_slice(c.word().symbols());
        }
    }
    let x = Word(out);
    if fa.read(fa.initial(), x.repeat(2).symbols()).is_none() {
        return Err(Error::Internal(format!("automaton rejects {}", p.render(&x))));
    }
    Ok(x)
}

/// Barycentric weights of `target` with respect to `d + 1` rotation
/// vectors: `λ_{1..d} = V⁻¹(rv_{d+1} − target)`, `V` having columns
/// `rv_{d+1} − rvᵢ`.
pub fn recover_weights_from_rvs(rvs: &[RatVec], target: &RatVec) -> Result<Vec<Rational>> {
    let d = target.dim();
    if rvs.len() != d + 1 || rvs.iter().any(|r| r.dim() != d) {
        return Err(Error::InvalidArgument(format!("need {} rotation vectors of dimension {d}", d + 1)));
    }
    let last = &rvs[d];
    let v = difference_matrix(rvs);
    let vinv = inverse(&v).ok_or(Error::RankDeficient { dim: d })?;
    let mut lambda = mat_vec(&vinv, &last.sub(target).0);
    let rest: Rational = Rational::one() - lambda.iter().sum::<Rational>();
    lambda.push(rest);
    if lambda.iter().any(|l| !l.is_positive()) {
        let shown: Vec<String> = lambda.iter().map(|l| l.to_string()).collect();
        return Err(Error::TargetOutsideSimplex { weights: shown.join(", ") });
    }
    Ok(lambda)
}

pub fn recover_weights(cycles: &[Cycle], phi: &LocallyConstantFn, target: &RatVec) -> Result<Vec<Rational>> {
    let rvs: Vec<RatVec> = cycles.iter().map(|c| rotation_vector_of_cycle(phi, c)).collect();
    recover_weights_from_rvs(&rvs, target)
}

fn difference_matrix(rvs: &[RatVec]) -> Matrix {
    let last = &rvs[rvs.len() - 1];
    from_columns(&rvs[..rvs.len() - 1].iter().map(|r| last.sub(r)).collect::<Vec<_>>())
}

/// `δ_g = Σₖ Σ_{i<ℓ} [g(σ^{|aₖ|−ℓ+i}(aₖa_{k+1})) − g(σ^{|aₖ|−ℓ+i}(aₖaₖ))]`,
/// successors taken cyclically.
pub fn junction_errors(g: &LocallyConstantFn, cycles: &[Word], ell: usize) -> Result<RatVec> {
    if cycles.is_empty() {
        return Err(Error::InvalidArgument("no cycles".into()));
    }
    if ell < g.window() {
        return Err(Error::InvalidArgument(format!("ℓ = {ell} is below the window {} of the function", g.window())));
    }
    if let Some(c) = cycles.iter().find(|c| c.len() <= ell) {
        return Err(Error::InvalidArgument(format!("ℓ = {ell} is not below the cycle length {}", c.len())));
    }
    let win = g.window();
    let mut delta = RatVec::zeros(g.dim());
    let n = cycles.len();
    for k in 0..n {
        let a = cycles[k].symbols();
        let b = cycles[(k + 1) % n].symbols();
        let cross: Vec<_> = a.iter().chain(b).copied().collect();
        let own: Vec<_> = a.iter().chain(a).copied().collect();
        for i in 0..ell {
            let s = a.len() - ell + i;
            delta = delta.add(g.eval(&cross[s..s + win])).sub(g.eval(&own[s..s + win]));
        }
    }
    Ok(delta)
}

/// All the integers and rationals of the corrective-word construction.
#[derive(Clone, Debug)]
pub struct SynthesisPlan {
    pub u: Word,
    /// `a₁ … a_{d+1}`, already powered so that `ℓ < |aᵢ|`.
    pub cycles: Vec<Word>,
    pub lambda: Vec<Rational>,
    pub q: Vec<BigInt>,
    pub big_q: BigInt,
    pub ell: usize,
    pub h: RatVec,
    pub eps: Rational,
    pub phi: LocallyConstantFn,
    /// Scalar functions whose averages the plan controls.
    pub tracked: Vec<LocallyConstantFn>,
    pub cycle_rvs: Vec<RatVec>,
    /// `∫g dμᵢ` for each tracked `g` (outer) and cycle (inner).
    pub cycle_means: Vec<Vec<Rational>>,
    pub delta_phi: RatVec,
    pub delta_g: Vec<Rational>,
    pub delta_star: Rational,
    pub c: Rational,
    pub v_matrix: Matrix,
    pub v: Vec<BigInt>,
    pub r: BigInt,
    pub a: BigInt,
    pub m_prime: Vec<BigInt>,
    pub big_m_prime: Vec<BigInt>,
    pub t: BigInt,
    pub big_m: Vec<BigInt>,
}

impl SynthesisPlan {
    pub fn y_exponents(&self) -> Vec<BigInt> {
        self.big_m_prime.iter().zip(&self.m_prime).map(|(mp, m)| &self.t * mp + m).collect()
    }

    pub fn z_exponents(&self) -> Vec<BigInt> {
        self.big_m_prime.iter().map(|mp| &self.t * mp).collect()
    }

    /// `AR − 1`.
    pub fn z_repetitions(&self) -> BigInt {
        &self.a * &self.r - 1
    }

    /// `|x| = Σ Mᵢ|aᵢ| = tA²RQ`.
    pub fn x_len(&self) -> BigInt {
        self.big_m.iter().zip(&self.cycles).map(|(m, a)| m * BigInt::from(a.len())).sum()
    }

    pub fn word(&self) -> Result<CompressedWord> {
        let seg = |exps: Vec<BigInt>, reps: BigInt| -> Result<Segment> {
            let blocks = self
                .cycles
                .iter()
                .zip(exps)
                .map(|(w, e)| {
                    let exp = e.to_biguint().ok_or_else(|| Error::Internal("negative exponent".into()))?;
                    Ok(Block { word: w.clone(), exp })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Segment { blocks, reps: reps.to_biguint().ok_or_else(|| Error::Internal("negative repetition".into()))? })
        };
        CompressedWord::new(vec![seg(self.y_exponents(), BigInt::one())?, seg(self.z_exponents(), self.z_repetitions())?])
    }

    /// Left side of the plan inequality at parameter `t`.
    pub fn inequality_lhs(&self, t: &BigInt) -> Rational {
        inequality_lhs(self, t)
    }

    /// `A·R·δ_g + Σ Mᵢ|aᵢ|∫g dμᵢ` for the tracked function `j`.
    pub fn birkhoff_formula(&self, j: usize) -> Rational {
        let mut s = Rational::from(&self.a * &self.r) * &self.delta_g[j];
        for (i, a) in self.cycles.iter().enumerate() {
            s += Rational::from(&self.big_m[i] * BigInt::from(a.len())) * &self.cycle_means[j][i];
        }
        s
    }

    /// `A·R·δ_φ + Σ Mᵢ|aᵢ| rv(aᵢ)`.
    pub fn birkhoff_formula_phi(&self) -> RatVec {
        let mut s = self.delta_phi.scale(&Rational::from(&self.a * &self.r));
        for (i, a) in self.cycles.iter().enumerate() {
            s.add_scaled(&Rational::from(&self.big_m[i] * BigInt::from(a.len())), &self.cycle_rvs[i]);
        }
        s
    }

    pub fn to_text(&self, p: &ShiftPresentation) -> String {
        let ints = |v: &[BigInt]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let rats = |v: &[Rational]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let mut s = String::new();
        s.push_str(&format!("u = {}\n", p.render(&self.u)));
        for (i, a) in self.cycles.iter().enumerate() {
            s.push_str(&format!(
                "a{} = {} (length {}, rv {}, lambda {})\n",
                i + 1,
                p.render(a),
                a.len(),
                self.cycle_rvs[i],
                self.lambda[i]
            ));
        }
        s.push_str(&format!("Q = {}\nq = {}\n", self.big_q, ints(&self.q)));
        s.push_str(&format!("ell = {}\n", self.ell));
        s.push_str(&format!("delta_phi = {}\n", self.delta_phi));
        s.push_str(&format!("delta_g = {}\n", rats(&self.delta_g)));
        s.push_str(&format!("delta* = {}\nC = {}\n", self.delta_star, self.c));
        s.push_str(&format!("v = {}\nR = {}\nA = {}\n", ints(&self.v), self.r, self.a));
        s.push_str(&format!("m' = {}\nM' = {}\n", ints(&self.m_prime), ints(&self.big_m_prime)));
        s.push_str(&format!("t = {}\nM = {}\n", self.t, ints(&self.big_m)));
        s.push_str(&format!("y exponents = {}\n", ints(&self.y_exponents())));
        s.push_str(&format!("z exponents = {}\n", ints(&self.z_exponents())));
        s.push_str(&format!("z repetitions = {}\n", self.z_repetitions()));
        s.push_str(&format!("|x| = {}\n", self.x_len()));
        s
    }
}

fn inequality_lhs(plan: &SynthesisPlan, t: &BigInt) -> Rational {
    let ar = &plan.a * &plan.r;
    let big_m: Vec<BigInt> = plan.big_m_prime.iter().zip(&plan.m_prime).map(|(mp, m)| t * &ar * mp + m).collect();
    let len: BigInt = big_m.iter().zip(&plan.cycles).map(|(m, a)| m * BigInt::from(a.len())).sum();
    let len = Rational::from(len);
    let mut dev = Rational::zero();
    for (i, a) in plan.cycles.iter().enumerate() {
        dev += (Rational::from(&big_m[i] * BigInt::from(a.len())) / &len - &plan.lambda[i]).abs();
    }
    Rational::from(ar) / &len * &plan.delta_star + &plan.c * &dev
}

fn to_integer(r: &Rational, what: &str) -> Result<BigInt> {
    if !r.is_integer() {
        return Err(Error::Internal(format!("{what} = {r} is not an integer")));
    }
    Ok(r.numer())
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_ceil(b)
}

/// Smallest power of `w` longer than `min_len` and at least `u_len` long.
pub fn power_up(w: &Word, min_len: usize, u_len: usize) -> Word {
    let k = ((min_len + 1).max(u_len)).div_ceil(w.len()).max(1);
    w.repeat(k)
}

/// Builds the plan for cycles `aᵢ` sharing the prefix `u` and weights `λ`.
/// `tracked` holds the scalar functions whose averages must stay within
/// `ε/2` of `Σλᵢ∫g dμᵢ`; vector-valued entries are split into coordinates.
#[allow(clippy::too_many_arguments)]
pub fn build_plan(
    p: &ShiftPresentation,
    fa: &FollowerAutomaton,
    u: &Word,
    cycles: &[Word],
    lambda: &[Rational],
    phi: &LocallyConstantFn,
    tracked: &[LocallyConstantFn],
    eps: &Rational,
    t_ceiling: u64,
) -> Result<SynthesisPlan> {
    let d = phi.dim();
    if cycles.len() != d + 1 || lambda.len() != d + 1 {
        return Err(Error::InvalidArgument(format!("need {} cycles and weights for a constraint of dimension {d}", d + 1)));
    }
    if !eps.is_positive() {
        return Err(Error::InvalidArgument("ε must be positive".into()));
    }
    if lambda.iter().any(|l| !l.is_positive()) || lambda.iter().sum::<Rational>() != Rational::one() {
        let shown: Vec<String> = lambda.iter().map(|l| l.to_string()).collect();
        return Err(Error::TargetOutsideSimplex { weights: shown.join(", ") });
    }
    let tracked: Vec<LocallyConstantFn> = tracked.iter().flat_map(|g| (0..g.dim()).map(move |i| g.component(i))).collect();
    let ell = locality(std::iter::once(phi).chain(&tracked));
    let anchor = sync_anchor(p, fa, u)?;
    let cycles: Vec<Word> = cycles.iter().map(|w| power_up(w, ell, u.len())).collect();
    check_blocks(p, &anchor, u, &cycles)?;

    let cyc: Vec<Cycle> = cycles.iter().map(|w| Cycle::new(w.clone())).collect();
    let cycle_rvs: Vec<RatVec> = cyc.iter().map(|c| rotation_vector_of_cycle(phi, c)).collect();
    let cycle_means: Vec<Vec<Rational>> =
        tracked.iter().map(|g| cyc.iter().map(|c| rotation_vector_of_cycle(g, c).0[0].clone()).collect()).collect();
    let h = {
        let mut h = RatVec::zeros(d);
        for (l, r) in lambda.iter().zip(&cycle_rvs) {
            h.add_scaled(l, r);
        }
        h
    };

    let v_matrix = difference_matrix(&cycle_rvs);
    let vinv = inverse(&v_matrix).ok_or(Error::RankDeficient { dim: d })?;
    let delta_phi = junction_errors(phi, &cycles, ell)?;
    let w = mat_vec(&vinv, &delta_phi.0);
    let r = common_denominator(&w);
    let v: Vec<BigInt> = w.iter().map(|x| to_integer(&(x * &Rational::from(r.clone())), "v")).collect::<Result<_>>()?;

    let a: BigInt = cycles.iter().map(|w| BigInt::from(w.len())).product();
    let lens: Vec<BigInt> = cycles.iter().map(|w| BigInt::from(w.len())).collect();
    let v_sum: BigInt = v.iter().sum();
    let mut m_prime = Vec::with_capacity(d + 1);
    for i in 0..d {
        let num = &a * &v[i];
        if !num.is_multiple_of(&lens[i]) {
            return Err(Error::Internal("m' is not an integer".into()));
        }
        m_prime.push(num / &lens[i]);
    }
    let num = -(&a * &v_sum);
    if !num.is_multiple_of(&lens[d]) {
        return Err(Error::Internal("m' is not an integer".into()));
    }
    m_prime.push(num / &lens[d]);

    let big_q = common_denominator(lambda);
    let q: Vec<BigInt> = lambda.iter().map(|l| to_integer(&(l * &Rational::from(big_q.clone())), "q")).collect::<Result<_>>()?;
    let big_m_prime: Vec<BigInt> = q
        .iter()
        .zip(&lens)
        .map(|(qj, lj)| {
            let num = &a * qj;
            if num.is_multiple_of(lj) {
                Ok(num / lj)
            } else {
                Err(Error::Internal("M' is not an integer".into()))
            }
        })
        .collect::<Result<_>>()?;

    let delta_g: Vec<Rational> = tracked.iter().map(|g| junction_errors(g, &cycles, ell).map(|x| x.0[0].clone())).collect::<Result<_>>()?;
    let delta_star = delta_g.iter().map(|x| x.abs()).max().unwrap_or_else(Rational::zero);
    let c = cycle_means.iter().flatten().map(|x| x.abs()).max().unwrap_or_else(Rational::zero);

    // The left side equals K/t with K = δ*/(AQ) + C·Σ|m′ⱼ||aⱼ|/(A²RQ).
    let aq = Rational::from(&a * &big_q);
    let s: BigInt = m_prime.iter().zip(&lens).map(|(m, l)| m.abs() * l).sum();
    let k = &delta_star / &aq + &c * &Rational::from(s) / (Rational::from(&a * &r) * &aq);
    let t_ineq = (Rational::from(2i64) * &k / eps).floor() + 1;
    // y-exponents tM′ⱼ + m′ⱼ >= 1.
    let t_y = m_prime.iter().zip(&big_m_prime).map(|(m, mp)| ceil_div(&(BigInt::one() - m), mp)).max().expect("at least one cycle");
    let t = [BigInt::one(), t_ineq, t_y].into_iter().max().expect("nonempty");
    if t > BigInt::from(t_ceiling) {
        return Err(Error::TCeilingExceeded { ceiling: t_ceiling, needed: t.to_string() });
    }
    let ar = &a * &r;
    let big_m: Vec<BigInt> = big_m_prime.iter().zip(&m_prime).map(|(mp, m)| &t * &ar * mp + m).collect();
    let plan = SynthesisPlan {
        u: u.clone(),
        cycles,
        lambda: lambda.to_vec(),
        q,
        big_q,
        ell,
        h,
        eps: eps.clone(),
        phi: phi.clone(),
        tracked,
        cycle_rvs,
        cycle_means,
        delta_phi,
        delta_g,
        delta_star,
        c,
        v_matrix,
        v,
        r,
        a,
        m_prime,
        big_m_prime,
        t,
        big_m,
    };
    if inequality_lhs(&plan, &plan.t) >= eps / &Rational::from(2i64) {
        return Err(Error::Internal("closed-form t violates the plan inequality".into()));
    }
    if plan.big_m.iter().any(|m| m.sign() != Sign::Plus) {
        return Err(Error::Internal("some Mⱼ is not positive".into()));
    }
    Ok(plan)
}

/// The realized periodic orbit and the exact checks run on it.
#[derive(Clone, Debug)]
pub struct Realization {
    pub x: CompressedWord,
    pub occupation: OccupationMeasure,
    pub rv: RatVec,
    /// `S_{|x|}g` by window counting, for each tracked `g`.
    pub birkhoff: Vec<Rational>,
    /// `|(1/|x|)S_{|x|}g − Σλᵢ∫g dμᵢ|` for each tracked `g`.
    pub deviations: Vec<Rational>,
}

/// Builds `x`, counts its windows, and checks `rv(x) = h`, the Birkhoff
/// identity and the `ε/2` bound exactly.
pub fn realize_plan(plan: &SynthesisPlan, p: &ShiftPresentation, fa: &FollowerAutomaton, graph: &Arc<EdgeGraph>) -> Result<Realization> {
    let anchor = sync_anchor(p, fa, &plan.u)?;
    check_blocks(p, &anchor, &plan.u, &plan.cycles)?;
    if let Some(a) = plan.cycles.iter().find(|a| a.len() <= graph.order()) {
        return Err(Error::InvalidArgument(format!("cycle {} is not longer than the graph order", p.render(a))));
    }
    let x = plan.word()?;
    let len = Rational::from(BigInt::from(x.len()));
    if BigInt::from(x.len()) != plan.x_len() {
        return Err(Error::Internal("|x| disagrees with Σ Mᵢ|aᵢ|".into()));
    }
    let s_phi = birkhoff_sum_compressed(&plan.phi, &x)?;
    if s_phi != plan.birkhoff_formula_phi() {
        return Err(Error::Internal("Birkhoff identity fails for φ".into()));
    }
    let rv = s_phi.scale(&len.recip());
    if rv != plan.h {
        return Err(Error::Internal(format!("rv(x) = {rv} but h = {}", plan.h)));
    }
    let mut birkhoff = Vec::new();
    let mut deviations = Vec::new();
    let half = &plan.eps / &Rational::from(2i64);
    for (j, g) in plan.tracked.iter().enumerate() {
        let s = birkhoff_sum_compressed(g, &x)?.0[0].clone();
        if s != plan.birkhoff_formula(j) {
            return Err(Error::Internal(format!("Birkhoff identity fails for tracked function {j}")));
        }
        let mix: Rational = plan.lambda.iter().zip(&plan.cycle_means[j]).map(|(l, m)| l * m).sum();
        let dev = (&s / &len - mix).abs();
        if dev >= half {
            return Err(Error::Internal(format!("tracked function {j} deviates by {dev}")));
        }
        birkhoff.push(s);
        deviations.push(dev);
    }
    let occupation = occupation_compressed(&x, graph, Some(anchor))?;
    Ok(Realization { x, occupation, rv, birkhoff, deviations })
}
