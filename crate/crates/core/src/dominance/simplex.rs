//! Dense two-phase simplex over exact rationals.
//!
//! Bland's rule (lowest eligible index enters, lowest basic index leaves on
//! ratio ties) guarantees termination and makes every solve deterministic.
//! All variables are non-negative. Results carry certificates that can be
//! re-checked by substitution: a feasible point for `Optimal`, a Farkas
//! vector for `Infeasible`.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::hyperreal::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `maximize objective·x` subject to `constraints`, `x >= 0`.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone)]
pub enum LpResult {
    Optimal { point: Vec<Rational>, value: Rational },
    /// `farkas[k]` multiplies constraint `k`; see [`LpProblem::check_farkas`].
    Infeasible { farkas: Vec<Rational> },
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("constraint {row} has {found} coefficients, expected {expected}")]
    Shape { row: usize, found: usize, expected: usize },
    #[error("solver produced a certificate that fails re-verification")]
    CertificateRejected,
}

impl LpProblem {
    pub fn new(num_vars: usize) -> Self {
        LpProblem { num_vars, objective: vec![Rational::zero(); num_vars], constraints: Vec::new() }
    }

    pub fn push(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    /// Exact substitution check of a candidate point.
    pub fn is_feasible(&self, point: &[Rational]) -> bool {
        if point.len() != self.num_vars || point.iter().any(Signed::is_negative) {
            return false;
        }
        self.constraints.iter().all(|c| {
            let lhs: Rational = c.coeffs.iter().zip(point).map(|(a, x)| a * x).sum();
            match c.relation {
                Relation::Le => lhs <= c.rhs,
                Relation::Ge => lhs >= c.rhs,
                Relation::Eq => lhs == c.rhs,
            }
        })
    }

    pub fn objective_value(&self, point: &[Rational]) -> Rational {
        self.objective.iter().zip(point).map(|(c, x)| c * x).sum()
    }

    /// A Farkas certificate `y` proves infeasibility when `y_k >= 0` on `<=`
    /// rows, `y_k <= 0` on `>=` rows, `y·A >= 0` componentwise and `y·b < 0`:
    /// any feasible `x` would give `0 <= y·A·x <= y·b < 0`.
    pub fn check_farkas(&self, farkas: &[Rational]) -> bool {
        if farkas.len() != self.constraints.len() {
            return false;
        }
        let signs_ok = self.constraints.iter().zip(farkas).all(|(c, y)| match c.relation {
            Relation::Le => !y.is_negative(),
            Relation::Ge => !y.is_positive(),
            Relation::Eq => true,
        });
        if !signs_ok {
            return false;
        }
        let columns_ok = (0..self.num_vars).all(|j| {
            let col: Rational = self.constraints.iter().zip(farkas).map(|(c, y)| y * &c.coeffs[j]).sum();
            !col.is_negative()
        });
        let rhs: Rational = self.constraints.iter().zip(farkas).map(|(c, y)| y * &c.rhs).sum();
        columns_ok && rhs.is_negative()
    }

    pub fn solve(&self) -> Result<LpResult, LpError> {
        for (row, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != self.num_vars {
                return Err(LpError::Shape { row, found: c.coeffs.len(), expected: self.num_vars });
            }
        }
        let result = Tableau::build(self).run(self);
        match &result {
            LpResult::Optimal { point, value } => {
                if !self.is_feasible(point) || &self.objective_value(point) != value {
                    return Err(LpError::CertificateRejected);
                }
            }
            LpResult::Infeasible { farkas } => {
                if !self.check_farkas(farkas) {
                    return Err(LpError::CertificateRejected);
                }
            }
            LpResult::Unbounded => {}
        }
        Ok(result)
    }
}

struct Tableau {
    /// `rows[k]` has `width` coefficients followed by the right-hand side.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
    num_vars: usize,
    /// Columns `>= first_artificial` are artificial.
    first_artificial: usize,
    /// Column that formed the identity for row `k` at the start.
    initial_basis: Vec<usize>,
    /// +1 or -1: whether row `k` was negated to make its rhs non-negative.
    row_sign: Vec<Rational>,
}

impl Tableau {
    fn build(lp: &LpProblem) -> Tableau {
        let m = lp.constraints.len();
        let mut relations = Vec::with_capacity(m);
        let mut row_sign = Vec::with_capacity(m);
        for c in &lp.constraints {
            if c.rhs.is_negative() {
                row_sign.push(-Rational::one());
                relations.push(match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                });
            } else {
                row_sign.push(Rational::one());
                relations.push(c.relation);
            }
        }
        let num_slack = relations.iter().filter(|r| **r != Relation::Eq).count();
        let num_artificial = relations.iter().filter(|r| **r != Relation::Le).count();
        let first_slack = lp.num_vars;
        let first_artificial = first_slack + num_slack;
        let width = first_artificial + num_artificial;

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut next_slack, mut next_art) = (first_slack, first_artificial);
        for (k, c) in lp.constraints.iter().enumerate() {
            let mut row = vec![Rational::zero(); width + 1];
            for (j, a) in c.coeffs.iter().enumerate() {
                row[j] = a * &row_sign[k];
            }
            row[width] = &c.rhs * &row_sign[k];
            match relations[k] {
                Relation::Le => {
                    row[next_slack] = Rational::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -Rational::one();
                    next_slack += 1;
                    row[next_art] = Rational::one();
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = Rational::one();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(row);
        }
        Tableau {
            rows,
            initial_basis: basis.clone(),
            basis,
            width,
            num_vars: lp.num_vars,
            first_artificial,
            row_sign,
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let inv = self.rows[pr][pc].recip();
        for v in self.rows[pr].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[pr]);
        let nonzero: Vec<usize> = (0..=self.width).filter(|&j| !pivot_row[j].is_zero()).collect();
        for (r, row) in self.rows.iter_mut().enumerate() {
            if r == pr || row[pc].is_zero() {
                continue;
            }
            let factor = row[pc].clone();
            for &j in &nonzero {
                row[j] -= &factor * &pivot_row[j];
            }
        }
        self.rows[pr] = pivot_row;
        self.basis[pr] = pc;
    }

    /// Reduced costs `c_j - c_B B^-1 A_j` for a maximization objective.
    fn reduced_costs(&self, cost: &[Rational], allowed: usize) -> Vec<Rational> {
        let mut d: Vec<Rational> = cost[..allowed].to_vec();
        for (r, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[r]];
            if cb.is_zero() {
                continue;
            }
            for j in 0..allowed {
                if !row[j].is_zero() {
                    d[j] -= cb * &row[j];
                }
            }
        }
        d
    }

    /// Maximizes `cost` over the current basis using columns `< allowed`.
    /// Returns false if unbounded.
    fn optimize(&mut self, cost: &[Rational], allowed: usize) -> bool {
        loop {
            let d = self.reduced_costs(cost, allowed);
            let Some(entering) = (0..allowed).find(|&j| d[j].is_positive()) else {
                return true;
            };
            let mut leaving: Option<(usize, Rational)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                let a = &row[entering];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &row[self.width] / a;
                let better = match &leaving {
                    None => true,
                    Some((lr, best)) => ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr]),
                };
                if better {
                    leaving = Some((r, ratio));
                }
            }
            match leaving {
                None => return false,
                Some((r, _)) => self.pivot(r, entering),
            }
        }
    }

    fn value(&self, cost: &[Rational]) -> Rational {
        self.rows.iter().enumerate().map(|(r, row)| &cost[self.basis[r]] * &row[self.width]).sum()
    }

    fn run(mut self, lp: &LpProblem) -> LpResult {
        // Phase 1: maximize -(sum of artificials).
        let mut phase1 = vec![Rational::zero(); self.width];
        for c in phase1.iter_mut().skip(self.first_artificial) {
            *c = -Rational::one();
        }
        self.optimize(&phase1, self.width);
        if self.value(&phase1).is_negative() {
            return LpResult::Infeasible { farkas: self.farkas(&phase1) };
        }
        self.expel_artificials();

        let mut phase2 = vec![Rational::zero(); self.width];
        phase2[..lp.num_vars].clone_from_slice(&lp.objective);
        if !self.optimize(&phase2, self.first_artificial) {
            return LpResult::Unbounded;
        }
        let mut point = vec![Rational::zero(); self.num_vars];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.num_vars {
                point[b] = self.rows[r][self.width].clone();
            }
        }
        let value = lp.objective_value(&point);
        LpResult::Optimal { point, value }
    }

    /// After phase 1, pivots zero-level artificial variables out of the basis;
    /// rows where that is impossible are redundant and dropped.
    fn expel_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] >= self.first_artificial {
                match (0..self.first_artificial).find(|&j| !self.rows[r][j].is_zero()) {
                    Some(j) => self.pivot(r, j),
                    None => {
                        self.rows.remove(r);
                        self.basis.remove(r);
                        self.initial_basis.remove(r);
                        self.row_sign.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    /// Phase-1 duals, mapped back to the caller's row orientation and sign
    /// convention.
    fn farkas(&self, phase1: &[Rational]) -> Vec<Rational> {
        let d = self.reduced_costs(phase1, self.width);
        self.initial_basis
            .iter()
            .zip(&self.row_sign)
            .map(|(&col, sign)| {
                // Phase-1 dual of (possibly negated) row k: c_col - d_col.
                (&phase1[col] - &d[col]) * sign
            })
            .collect()
    }
}
