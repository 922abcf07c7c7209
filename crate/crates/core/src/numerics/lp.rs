//! Dense two-phase primal simplex for linear programs of the form
//!
//!   minimize    c^T x
//!   subject to  A x >= b,  x >= 0.
//!
//! Returns the primal minimizer together with the dual multipliers of the
//! inequality rows, so callers can certify optimality independently via
//! strong duality (c^T x = b^T y) and complementary slackness.

use crate::error::{Error, Result};

/// Problem data. `a` holds the constraint rows; all rows must have the same
/// length as `c`.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub c: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

/// Optimal point, objective value, and dual multipliers (one per row,
/// nonnegative at optimum).
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub duals: Vec<f64>,
}

const FEAS_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
// Consecutive degenerate (zero-progress) pivots tolerated under the Dantzig
// rule before switching to Bland's rule, which cannot cycle.
const DEGENERATE_STREAK: usize = 30;

struct Tableau {
    // rows x (n_total + 1); last column is the rhs.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_total: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.t[row][col];
        let inv = 1.0 / piv;
        for v in self.t[row].iter_mut() {
            *v *= inv;
        }
        let pivot_row = self.t[row].clone();
        for (r, trow) in self.t.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let factor = trow[col];
            if factor != 0.0 {
                for (v, p) in trow.iter_mut().zip(pivot_row.iter()) {
                    *v -= factor * p;
                }
            }
        }
        self.basis[row] = col;
    }

    /// One simplex phase on the current tableau. `cost` has length n_total.
    /// Returns the reduced-cost row at optimality.
    fn run_phase(&mut self, cost: &[f64], allowed: &[bool]) -> Result<Vec<f64>> {
        let m = self.basis.len();
        let mut degenerate_streak = 0usize;
        // Generous bound: simplex visits each basis at most once under Bland.
        let max_pivots = 50 * (self.n_total + m) * (m + 1);
        for _ in 0..max_pivots {
            // reduced costs: c_j - c_B^T B^{-1} A_j, using the updated tableau.
            let mut reduced = cost.to_vec();
            for (r, &bi) in self.basis.iter().enumerate() {
                let cb = cost[bi];
                if cb != 0.0 {
                    for j in 0..self.n_total {
                        reduced[j] -= cb * self.t[r][j];
                    }
                }
            }
            let use_bland = degenerate_streak >= DEGENERATE_STREAK;
            let mut entering = None;
            if use_bland {
                for j in 0..self.n_total {
                    if allowed[j] && reduced[j] < -PIVOT_TOL {
                        entering = Some(j);
                        break;
                    }
                }
            } else {
                let mut best = -PIVOT_TOL;
                for j in 0..self.n_total {
                    if allowed[j] && reduced[j] < best {
                        best = reduced[j];
                        entering = Some(j);
                    }
                }
            }
            let Some(col) = entering else {
                return Ok(reduced);
            };
            // Ratio test; Bland ties broken by lowest basis index.
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..m {
                let a_rj = self.t[r][col];
                if a_rj > PIVOT_TOL {
                    let ratio = self.t[r][self.n_total] / a_rj;
                    match leave {
                        None => leave = Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - 1e-15
                                || (ratio <= lratio + 1e-15
                                    && use_bland
                                    && self.basis[r] < self.basis[lr])
                            {
                                leave = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            let Some((row, ratio)) = leave else {
                return Err(Error::Unbounded);
            };
            if ratio.abs() <= 1e-15 {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }
            self.pivot(row, col);
        }
        Err(Error::NonConvergence("simplex pivot budget exhausted".into()))
    }
}

/// Solve the LP. Errors with [`Error::Infeasible`] or [`Error::Unbounded`]
/// when appropriate.
pub fn solve(problem: &LpProblem) -> Result<LpSolution> {
    let n = problem.c.len();
    let m = problem.b.len();
    if problem.a.len() != m {
        return Err(Error::Domain(format!(
            "constraint matrix has {} rows, rhs has {m}",
            problem.a.len()
        )));
    }
    for row in &problem.a {
        if row.len() != n {
            return Err(Error::Domain(format!(
                "constraint row length {} does not match {n} variables",
                row.len()
            )));
        }
    }
    if m == 0 {
        // Unconstrained over x >= 0: minimum at the origin iff c >= 0.
        if problem.c.iter().any(|&ci| ci < 0.0) {
            return Err(Error::Unbounded);
        }
        return Ok(LpSolution {
            x: vec![0.0; n],
            objective: 0.0,
            duals: vec![],
        });
    }

    // Standard form: A x - s = b, with rows negated so the stored rhs is
    // nonnegative. row_sign records negation; slack coefficient is
    // -row_sign. Artificials are added wherever the slack cannot start basic.
    let mut row_sign = vec![1.0f64; m];
    let n_slack = m;
    let mut artificial_of_row = vec![None::<usize>; m];
    let mut n_art = 0usize;
    for i in 0..m {
        if problem.b[i] < 0.0 {
            row_sign[i] = -1.0;
            // slack coefficient becomes +1: usable as the initial basis.
        } else {
            artificial_of_row[i] = Some(n_art);
            n_art += 1;
        }
    }
    let n_total = n + n_slack + n_art;
    let mut t = vec![vec![0.0; n_total + 1]; m];
    let mut basis = vec![0usize; m];
    for i in 0..m {
        for j in 0..n {
            t[i][j] = row_sign[i] * problem.a[i][j];
        }
        t[i][n + i] = -row_sign[i];
        t[i][n_total] = row_sign[i] * problem.b[i];
        basis[i] = match artificial_of_row[i] {
            Some(k) => {
                t[i][n + n_slack + k] = 1.0;
                n + n_slack + k
            }
            None => n + i,
        };
    }
    let mut tab = Tableau { t, basis, n_total };

    if n_art > 0 {
        let mut phase1_cost = vec![0.0; n_total];
        for k in 0..n_art {
            phase1_cost[n + n_slack + k] = 1.0;
        }
        let allowed = vec![true; n_total];
        tab.run_phase(&phase1_cost, &allowed)?;
        let phase1_obj: f64 = tab
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &bi)| bi >= n + n_slack)
            .map(|(r, _)| tab.t[r][n_total])
            .sum();
        if phase1_obj > FEAS_TOL {
            return Err(Error::Infeasible);
        }
        // Drive any residual (degenerate) artificials out of the basis.
        for r in 0..m {
            if tab.basis[r] >= n + n_slack {
                let col = (0..n + n_slack).find(|&j| tab.t[r][j].abs() > PIVOT_TOL);
                match col {
                    Some(j) => tab.pivot(r, j),
                    // Redundant row: the artificial stays basic at zero and
                    // is excluded from phase 2 by the allowed mask below.
                    None => {}
                }
            }
        }
    }

    let mut phase2_cost = vec![0.0; n_total];
    phase2_cost[..n].copy_from_slice(&problem.c);
    let mut allowed = vec![true; n_total];
    for j in n + n_slack..n_total {
        allowed[j] = false;
    }
    let reduced = tab.run_phase(&phase2_cost, &allowed)?;

    let mut x = vec![0.0; n];
    for (r, &bi) in tab.basis.iter().enumerate() {
        if bi < n {
            x[bi] = tab.t[r][n_total];
        }
    }
    let objective: f64 = problem.c.iter().zip(x.iter()).map(|(c, v)| c * v).sum();
    // The reduced cost of slack i equals the dual of row i regardless of the
    // row sign flip (both the slack coefficient and the multiplier flip).
    let duals: Vec<f64> = (0..m).map(|i| reduced[n + i].max(0.0)).collect();
    Ok(LpSolution { x, objective, duals })
}
