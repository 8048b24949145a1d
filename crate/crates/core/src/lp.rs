//! Dense two-phase tableau simplex with Bland's anti-cycling rule.
//!
//! Problems are stated as
//!
//! ```text
//!     maximize    c . x
//!     subject to  a_k . x  (<= | = | >=)  b_k
//!                 x >= 0
//! ```
//!
//! Every LP in this crate has at most a few hundred variables, so the tableau
//! is kept dense and pivoting is fully deterministic.

use serde::Serialize;

use crate::error::{Error, Result};

/// Primal feasibility tolerance.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-8;
/// Reduced-cost tolerance for optimality.
pub const OPTIMALITY_TOLERANCE: f64 = 1e-9;
const PIVOT_TOLERANCE: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn maximize(objective: Vec<f64>) -> Self {
        LinearProgram {
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn num_variables(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coefficients: Vec<f64>, relation: Relation, bound: f64) -> &mut Self {
        self.constraints.push(Constraint {
            coefficients,
            relation,
            bound,
        });
        self
    }

    pub fn le(&mut self, coefficients: Vec<f64>, bound: f64) -> &mut Self {
        self.add(coefficients, Relation::Le, bound)
    }

    pub fn ge(&mut self, coefficients: Vec<f64>, bound: f64) -> &mut Self {
        self.add(coefficients, Relation::Ge, bound)
    }

    pub fn equal(&mut self, coefficients: Vec<f64>, bound: f64) -> &mut Self {
        self.add(coefficients, Relation::Eq, bound)
    }

    fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numeric(
                "objective has non-finite coefficients".into(),
            ));
        }
        for (k, c) in self.constraints.iter().enumerate() {
            if c.coefficients.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: c.coefficients.len(),
                });
            }
            if !c.bound.is_finite() || c.coefficients.iter().any(|a| !a.is_finite()) {
                return Err(Error::Numeric(format!(
                    "constraint {k} has non-finite coefficients"
                )));
            }
        }
        Ok(())
    }

    /// Largest violation of any constraint or sign bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = x.iter().fold(0.0_f64, |w, &v| w.max(-v));
        for c in &self.constraints {
            let lhs: f64 = c.coefficients.iter().zip(x).map(|(a, v)| a * v).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.bound,
                Relation::Ge => c.bound - lhs,
                Relation::Eq => (lhs - c.bound).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Counters and health flags collected while pivoting.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct LpDiagnostics {
    pub pivots: usize,
    /// Pivots with a zero step length.
    pub degenerate_pivots: usize,
    /// Equality rows found linearly dependent and dropped after phase one.
    pub redundant_rows: usize,
    /// Largest constraint violation of the returned point.
    pub max_violation: f64,
    /// Set when the returned point violates a constraint by more than the
    /// feasibility tolerance.
    pub numerically_degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal point; empty unless `status` is `Optimal`.
    pub x: Vec<f64>,
    /// Optimal value, `-inf` when infeasible and `+inf` when unbounded.
    pub value: f64,
    pub diagnostics: LpDiagnostics,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    cols: usize,
    diagnostics: LpDiagnostics,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.rows[r][j];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rhs[r] /= p;
        self.rows[r][j] = 1.0;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for k in 0..self.rows.len() {
            if k == r {
                continue;
            }
            let f = self.rows[k][j];
            if f == 0.0 {
                continue;
            }
            for (v, pv) in self.rows[k].iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.rows[k][j] = 0.0;
            self.rhs[k] -= f * pivot_rhs;
        }
        self.basis[r] = j;
        self.diagnostics.pivots += 1;
    }

    /// Maximizes `cost . x` over the current basis, letting only columns with
    /// `allowed[j]` enter.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> Result<PhaseOutcome> {
        loop {
            if self.diagnostics.pivots > MAX_PIVOTS {
                return Err(Error::Numeric(format!(
                    "simplex exceeded {MAX_PIVOTS} pivots"
                )));
            }
            // Bland: lowest-index column with positive reduced cost enters.
            let entering = (0..self.cols).find(|&j| {
                if !allowed[j] || self.basis.contains(&j) {
                    return false;
                }
                let reduced = cost[j]
                    - self
                        .basis
                        .iter()
                        .zip(&self.rows)
                        .map(|(&b, row)| cost[b] * row[j])
                        .sum::<f64>();
                reduced > OPTIMALITY_TOLERANCE
            });
            let Some(j) = entering else {
                return Ok(PhaseOutcome::Optimal);
            };
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][j];
                if a <= PIVOT_TOLERANCE {
                    continue;
                }
                let ratio = self.rhs[r].max(0.0) / a;
                leaving = match leaving {
                    None => Some((r, ratio)),
                    Some((best, best_ratio)) => {
                        let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio.abs());
                        if ratio < best_ratio && !tie || tie && self.basis[r] < self.basis[best] {
                            Some((r, ratio))
                        } else {
                            Some((best, best_ratio))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leaving else {
                return Ok(PhaseOutcome::Unbounded);
            };
            if ratio == 0.0 {
                self.diagnostics.degenerate_pivots += 1;
            }
            self.pivot(r, j);
        }
    }

    fn drop_row(&mut self, r: usize) {
        self.rows.remove(r);
        self.rhs.remove(r);
        self.basis.remove(r);
        self.diagnostics.redundant_rows += 1;
    }
}

/// Solves `lp` to global optimality.
///
/// Malformed programs (length mismatches, non-finite data) are errors;
/// infeasibility and unboundedness are reported through the status.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_variables();
    let m = lp.constraints.len();

    // Column layout: [structural | slack/surplus | artificial].
    let num_slack = lp
        .constraints
        .iter()
        .filter(|c| c.relation != Relation::Eq)
        .count();
    let slack_start = n;
    let art_start = n + num_slack;

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art_cols = Vec::new();
    let mut next_slack = slack_start;
    let mut pending_artificial = Vec::new();
    for (k, c) in lp.constraints.iter().enumerate() {
        let flip = c.bound < 0.0;
        let sign = if flip { -1.0 } else { 1.0 };
        let relation = match (c.relation, flip) {
            (Relation::Le, true) => Relation::Ge,
            (Relation::Ge, true) => Relation::Le,
            (r, _) => r,
        };
        let mut row = vec![0.0; art_start];
        for (v, a) in row.iter_mut().zip(&c.coefficients) {
            *v = sign * a;
        }
        match relation {
            Relation::Le => {
                row[next_slack] = 1.0;
                basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -1.0;
                next_slack += 1;
                basis.push(usize::MAX);
                pending_artificial.push(k);
            }
            Relation::Eq => {
                basis.push(usize::MAX);
                pending_artificial.push(k);
            }
        }
        rows.push(row);
        rhs.push(sign * c.bound);
    }
    let cols = art_start + pending_artificial.len();
    for row in rows.iter_mut() {
        row.resize(cols, 0.0);
    }
    for (offset, &k) in pending_artificial.iter().enumerate() {
        let col = art_start + offset;
        rows[k][col] = 1.0;
        basis[k] = col;
        art_cols.push(col);
    }

    let mut tableau = Tableau {
        rows,
        rhs,
        basis,
        cols,
        diagnostics: LpDiagnostics::default(),
    };
    let scale = 1.0
        + lp.constraints
            .iter()
            .map(|c| c.bound.abs())
            .fold(0.0_f64, f64::max);

    if !art_cols.is_empty() {
        let mut phase_one_cost = vec![0.0; cols];
        for &c in &art_cols {
            phase_one_cost[c] = -1.0;
        }
        let allowed = vec![true; cols];
        tableau.optimize(&phase_one_cost, &allowed)?;
        let infeasibility: f64 = tableau
            .basis
            .iter()
            .zip(&tableau.rhs)
            .filter(|(b, _)| **b >= art_start)
            .map(|(_, v)| v.abs())
            .sum();
        if infeasibility > FEASIBILITY_TOLERANCE * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                value: f64::NEG_INFINITY,
                diagnostics: tableau.diagnostics,
            });
        }
        // Drive remaining artificials out of the basis.
        let mut r = 0;
        while r < tableau.rows.len() {
            if tableau.basis[r] >= art_start {
                let replacement = (0..art_start)
                    .filter(|j| !tableau.basis.contains(j))
                    .find(|&j| tableau.rows[r][j].abs() > 1e-9);
                match replacement {
                    Some(j) => {
                        tableau.pivot(r, j);
                        r += 1;
                    }
                    None => tableau.drop_row(r),
                }
            } else {
                r += 1;
            }
        }
    }

    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&lp.objective);
    let mut allowed = vec![true; cols];
    for a in allowed.iter_mut().skip(art_start) {
        *a = false;
    }
    match tableau.optimize(&cost, &allowed)? {
        PhaseOutcome::Unbounded => Ok(LpSolution {
            status: LpStatus::Unbounded,
            x: Vec::new(),
            value: f64::INFINITY,
            diagnostics: tableau.diagnostics,
        }),
        PhaseOutcome::Optimal => {
            let mut x = vec![0.0; n];
            for (&b, &v) in tableau.basis.iter().zip(&tableau.rhs) {
                if b < n {
                    x[b] = v;
                }
            }
            for v in x.iter_mut() {
                if *v < 0.0 && *v > -1e-10 {
                    *v = 0.0;
                }
            }
            let mut diagnostics = tableau.diagnostics;
            diagnostics.max_violation = lp.max_violation(&x);
            diagnostics.numerically_degenerate =
                diagnostics.max_violation > FEASIBILITY_TOLERANCE * scale;
            Ok(LpSolution {
                status: LpStatus::Optimal,
                value: lp.objective_value(&x),
                x,
                diagnostics,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn simplex_vertex() {
        let mut lp = LinearProgram::maximize(vec![1.0, 0.0]);
        lp.equal(vec![1.0, 1.0], 1.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.x[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.x[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn maxmin_stage_for_modified_bos() {
        // variables (q1, q2, t)
        let mut lp = LinearProgram::maximize(vec![0.0, 0.0, 1.0]);
        lp.ge(vec![6.0, 3.0, -1.0], 0.0)
            .ge(vec![1.0, 2.0, -1.0], 0.0)
            .equal(vec![1.0, 1.0, 0.0], 1.0);
        let s = solve(&lp).unwrap();
        assert!(s.is_optimal());
        assert_abs_diff_eq!(s.value, 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.x[0], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.x[1], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn infeasible_bounds() {
        let mut lp = LinearProgram::maximize(vec![1.0, 1.0]);
        lp.ge(vec![1.0, 0.0], 2.0).equal(vec![1.0, 1.0], 1.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = LinearProgram::maximize(vec![1.0, 0.0]);
        lp.ge(vec![1.0, -1.0], 0.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
        assert_eq!(s.value, f64::INFINITY);
    }

    #[test]
    fn negative_bounds_are_normalized() {
        // x1 - x2 <= -1  means x2 >= x1 + 1; maximize x1 with x2 <= 3.
        let mut lp = LinearProgram::maximize(vec![1.0, 0.0]);
        lp.le(vec![1.0, -1.0], -1.0).le(vec![0.0, 1.0], 3.0);
        let s = solve(&lp).unwrap();
        assert_abs_diff_eq!(s.value, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = LinearProgram::maximize(vec![1.0, 2.0]);
        lp.equal(vec![1.0, 1.0], 1.0).equal(vec![2.0, 2.0], 2.0);
        let s = solve(&lp).unwrap();
        assert_abs_diff_eq!(s.value, 2.0, epsilon = 1e-10);
        assert_eq!(s.diagnostics.redundant_rows, 1);
    }

    #[test]
    fn malformed_program_is_an_error() {
        let mut lp = LinearProgram::maximize(vec![1.0, 2.0]);
        lp.equal(vec![1.0], 1.0);
        assert!(solve(&lp).is_err());
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's classic cycling example, stated as a maximization.
        let mut lp = LinearProgram::maximize(vec![0.75, -150.0, 0.02, -6.0]);
        lp.le(vec![0.25, -60.0, -0.04, 9.0], 0.0)
            .le(vec![0.5, -90.0, -0.02, 3.0], 0.0)
            .le(vec![0.0, 0.0, 1.0, 0.0], 1.0);
        let s = solve(&lp).unwrap();
        assert!(s.is_optimal());
        assert_abs_diff_eq!(s.value, 0.05, epsilon = 1e-9);
    }
}
