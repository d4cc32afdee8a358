//! Exact two-phase simplex over [`Rational`] with Bland's rule.
//!
//! Problems are `maximize c·x` subject to `A x = b`, `x >= 0`. The tableau
//! keeps one artificial column per row, so `B⁻¹` (and with it the dual
//! multipliers) can be read off at the end.

use crate::rational::Rational;

#[derive(Clone, Debug, Default)]
pub struct Lp {
    num_vars: usize,
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    objective: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<Rational>,
    pub value: Rational,
    /// One multiplier per equality row with `yᵀA >= c` and `y·b = value`.
    pub duals: Vec<Rational>,
    /// True iff the optimal point is the only optimal point.
    pub unique: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

impl Lp {
    pub fn new(num_vars: usize) -> Self {
        Lp { num_vars, objective: vec![Rational::zero(); num_vars], ..Default::default() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Adds a fresh nonnegative variable with zero coefficients everywhere.
    pub fn add_var(&mut self) -> usize {
        for r in &mut self.rows {
            r.push(Rational::zero());
        }
        self.objective.push(Rational::zero());
        self.num_vars += 1;
        self.num_vars - 1
    }

    pub fn add_eq(&mut self, row: Vec<Rational>, rhs: Rational) {
        assert_eq!(row.len(), self.num_vars, "row length");
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    /// `row·x <= rhs` through a new slack variable.
    pub fn add_le(&mut self, row: Vec<Rational>, rhs: Rational) -> usize {
        let s = self.add_var();
        let mut row = row;
        row.resize(self.num_vars, Rational::zero());
        row[s] = Rational::one();
        self.add_eq(row, rhs);
        s
    }

    pub fn set_objective(&mut self, c: Vec<Rational>) {
        assert_eq!(c.len(), self.num_vars, "objective length");
        self.objective = c;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.rows[i]
    }

    pub fn rhs(&self) -> &[Rational] {
        &self.rhs
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::new(self).run(self)
    }

    /// Phase one only: some feasible point, if any.
    pub fn feasible_point(&self) -> Option<Vec<Rational>> {
        let mut t = Tableau::new(self);
        t.phase_one().then(|| t.primal())
    }
}

struct Tableau {
    m: usize,
    n: usize,
    /// `m` rows of `n + m + 1` entries: structural, artificial, rhs.
    t: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    flipped: Vec<bool>,
}

impl Tableau {
    fn new(lp: &Lp) -> Self {
        let m = lp.rows.len();
        let n = lp.num_vars;
        let mut t = Vec::with_capacity(m);
        let mut flipped = vec![false; m];
        for i in 0..m {
            let neg = lp.rhs[i].is_negative();
            flipped[i] = neg;
            let mut row: Vec<Rational> = Vec::with_capacity(n + m + 1);
            for v in &lp.rows[i] {
                row.push(if neg { -v } else { v.clone() });
            }
            for j in 0..m {
                row.push(if i == j { Rational::one() } else { Rational::zero() });
            }
            row.push(lp.rhs[i].abs());
            t.push(row);
        }
        Tableau { m, n, t, basis: (n..n + m).collect(), flipped }
    }

    fn rhs(&self, i: usize) -> &Rational {
        &self.t[i][self.n + self.m]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.n + self.m + 1;
        let inv = self.t[r][c].recip();
        if !inv.is_one() {
            for x in self.t[r].iter_mut() {
                if !x.is_zero() {
                    *x *= &inv;
                }
            }
        }
        let prow = self.t[r].clone();
        for i in 0..self.m {
            if i == r || self.t[i][c].is_zero() {
                continue;
            }
            let f = self.t[i][c].clone();
            let row = &mut self.t[i];
            for j in 0..width {
                if !prow[j].is_zero() {
                    let d = &f * &prow[j];
                    row[j] -= d;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Reduced costs `c_j - c_B B⁻¹ A_j` for the given cost vector over all
    /// `n + m` columns.
    fn reduced(&self, cost: &[Rational], j: usize) -> Rational {
        let mut d = cost[j].clone();
        for i in 0..self.m {
            let cb = &cost[self.basis[i]];
            if !cb.is_zero() && !self.t[i][j].is_zero() {
                d -= cb * &self.t[i][j];
            }
        }
        d
    }

    /// Maximizes `cost` over the columns allowed by `allowed`, starting from
    /// the current feasible basis. Returns false when unbounded.
    fn optimize(&mut self, cost: &[Rational], allowed: &dyn Fn(usize) -> bool) -> bool {
        loop {
            let entering =
                (0..self.n + self.m).filter(|&j| allowed(j) && !self.basis.contains(&j)).find(|&j| self.reduced(cost, j).is_positive());
            let Some(c) = entering else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.m {
                if self.t[i][c].is_positive() {
                    let ratio = self.rhs(i) / &self.t[i][c];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }

    /// Returns false if infeasible. Afterwards every artificial still basic
    /// sits on a redundant row.
    fn phase_one(&mut self) -> bool {
        let (n, m) = (self.n, self.m);
        let cost: Vec<Rational> = (0..n + m).map(|j| if j >= n { -Rational::one() } else { Rational::zero() }).collect();
        let bounded = self.optimize(&cost, &|_| true);
        debug_assert!(bounded);
        if (0..m).any(|i| self.basis[i] >= n && !self.rhs(i).is_zero()) {
            return false;
        }
        for i in 0..m {
            if self.basis[i] >= n {
                if let Some(c) = (0..n).find(|&j| !self.t[i][j].is_zero()) {
                    self.pivot(i, c);
                }
            }
        }
        true
    }

    fn primal(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.rhs(i).clone();
            }
        }
        x
    }

    fn run(mut self, lp: &Lp) -> LpOutcome {
        if !self.phase_one() {
            return LpOutcome::Infeasible;
        }
        let n = self.n;
        let mut cost = lp.objective.clone();
        cost.resize(n + self.m, Rational::zero());
        if !self.optimize(&cost, &|j| j < n) {
            return LpOutcome::Unbounded;
        }
        let x = self.primal();
        let value: Rational = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
        let duals = (0..self.m)
            .map(|k| {
                let mut y = Rational::zero();
                for i in 0..self.m {
                    let cb = &cost[self.basis[i]];
                    if !cb.is_zero() {
                        y += cb * &self.t[i][n + k];
                    }
                }
                if self.flipped[k] {
                    -y
                } else {
                    y
                }
            })
            .collect();
        let unique = self.face_is_point(&cost);
        LpOutcome::Optimal(LpSolution { x, value, duals, unique })
    }

    /// On the optimal face only nonbasic columns with zero reduced cost may
    /// move; the face is a point iff their sum cannot leave zero.
    fn face_is_point(&mut self, cost: &[Rational]) -> bool {
        let n = self.n;
        let zero_cols: Vec<usize> = (0..n).filter(|&j| !self.basis.contains(&j) && self.reduced(cost, j).is_zero()).collect();
        if zero_cols.is_empty() {
            return true;
        }
        let movable: Vec<bool> = (0..n).map(|j| self.basis.contains(&j) || zero_cols.contains(&j)).collect();
        let mut probe = vec![Rational::zero(); n + self.m];
        for &j in &zero_cols {
            probe[j] = Rational::one();
        }
        let bounded = self.optimize(&probe, &|j| j < n && movable[j]);
        if !bounded {
            return false;
        }
        let x = self.primal();
        zero_cols.iter().all(|&j| x[j].is_zero())
    }
}
