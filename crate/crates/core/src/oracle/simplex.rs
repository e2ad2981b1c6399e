//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Solves `min c·x  s.t.  A x = b, x >= 0`. Built for the tiny feasibility
//! problems the oracle poses (a handful of rows, a few dozen columns); no
//! attempt at sparsity or factorization updates.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("simplex did not terminate within {0} pivots")]
    IterationLimit(usize),
    #[error("malformed linear program: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    /// Constraint rows, each of length `c.len()`.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Largest phase-one residual (sum of artificials) accepted as feasible.
    pub feasibility_tol: f64,
    /// Entries smaller than this are never pivoted on.
    pub pivot_tol: f64,
    pub max_iterations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-8,
            pivot_tol: 1e-8,
            max_iterations: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        objective: f64,
        /// Phase-one residual left at the feasible point.
        infeasibility: f64,
        /// Row duals `π = c_B B⁻¹`; `c_j - π·A_j >= 0` at the optimum.
        duals: Vec<f64>,
    },
    Infeasible {
        infeasibility: f64,
        /// Phase-one dual `u`: `u·A_j <= 0` for every column and
        /// `u·b = infeasibility`, up to roundoff.
        farkas: Vec<f64>,
    },
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// Reduced costs; the last entry is minus the objective value.
    cost: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.width]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col];
        self.rows[row].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i != row {
                let f = r[col];
                if f != 0.0 {
                    r.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
                }
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            self.cost.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
        }
        self.basis[row] = col;
    }

    /// Runs Bland's-rule pivots over columns `< allowed`. Returns `false` if
    /// the objective is unbounded below.
    fn optimize(
        &mut self,
        allowed: usize,
        opts: &SimplexOptions,
        iterations: &mut usize,
    ) -> Result<bool, LpError> {
        loop {
            let Some(col) = (0..allowed).find(|&j| self.cost[j] < -opts.pivot_tol) else {
                return Ok(true);
            };
            // Basic values are nonnegative in exact arithmetic; roundoff can
            // leave them slightly below zero, which would make the ratio test
            // pick a negative step.
            let w = self.width;
            for r in &mut self.rows {
                if r[w] < 0.0 {
                    r[w] = 0.0;
                }
            }
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a > opts.pivot_tol {
                    let ratio = self.rhs(i) / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = best else { return Ok(false) };
            *iterations += 1;
            if *iterations > opts.max_iterations {
                return Err(LpError::IterationLimit(opts.max_iterations));
            }
            self.pivot(row, col);
        }
    }
}

pub fn solve(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpOutcome, LpError> {
    let m = lp.a.len();
    let n = lp.c.len();
    if lp.b.len() != m {
        return Err(LpError::Malformed(format!("{} rows but {} right-hand sides", m, lp.b.len())));
    }
    if let Some(row) = lp.a.iter().find(|r| r.len() != n) {
        return Err(LpError::Malformed(format!(
            "row of length {} in a program with {n} variables",
            row.len()
        )));
    }

    // Phase one: one artificial per row, rows flipped so b >= 0.
    let width = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, (row, &bi)) in lp.a.iter().zip(&lp.b).enumerate() {
        let sign = if bi < 0.0 { -1.0 } else { 1.0 };
        let mut r: Vec<f64> = row.iter().map(|v| sign * v).collect();
        r.extend((0..m).map(|k| if k == i { 1.0 } else { 0.0 }));
        r.push(sign * bi);
        rows.push(r);
    }
    let mut cost = vec![0.0; width + 1];
    for r in &rows {
        for j in 0..n {
            cost[j] -= r[j];
        }
        cost[width] -= r[width];
    }
    let mut tab = Tableau {
        rows,
        cost,
        basis: (n..n + m).collect(),
        width,
    };
    let mut iterations = 0;
    tab.optimize(width, opts, &mut iterations)?;
    let infeasibility = (-tab.cost[width]).max(0.0);
    if infeasibility > opts.feasibility_tol {
        let farkas = lp
            .b
            .iter()
            .enumerate()
            .map(|(i, &bi)| {
                let u = 1.0 - tab.cost[n + i];
                if bi < 0.0 { -u } else { u }
            })
            .collect();
        return Ok(LpOutcome::Infeasible { infeasibility, farkas });
    }

    // Drive degenerate artificials out of the basis where a real column can
    // replace them. Rows with no such column are redundant; artificials
    // still holding accepted residual stay basic and never re-enter.
    for i in 0..m {
        if tab.basis[i] >= n && tab.rhs(i).abs() <= opts.pivot_tol {
            if let Some(j) = (0..n).find(|&j| tab.rows[i][j].abs() > opts.pivot_tol) {
                tab.pivot(i, j);
            }
        }
    }

    // Phase two over the original columns only.
    let mut cost = vec![0.0; width + 1];
    cost[..n].copy_from_slice(&lp.c);
    for (i, &bj) in tab.basis.iter().enumerate() {
        let cb = if bj < n { lp.c[bj] } else { 0.0 };
        if cb != 0.0 {
            for (v, r) in cost.iter_mut().zip(&tab.rows[i]) {
                *v -= cb * r;
            }
        }
    }
    tab.cost = cost;
    if !tab.optimize(n, opts, &mut iterations)? {
        return Ok(LpOutcome::Unbounded);
    }

    let mut x = vec![0.0; n];
    for (i, &bj) in tab.basis.iter().enumerate() {
        if bj < n {
            x[bj] = tab.rhs(i);
        }
    }
    let objective = lp.c.iter().zip(&x).map(|(c, v)| c * v).sum();
    // Artificial column i of the final tableau holds B⁻¹ e_i in the
    // sign-flipped rows.
    let duals = lp
        .b
        .iter()
        .enumerate()
        .map(|(i, &bi)| {
            let pi: f64 = tab
                .basis
                .iter()
                .zip(&tab.rows)
                .filter(|(&bj, _)| bj < n)
                .map(|(&bj, r)| lp.c[bj] * r[n + i])
                .sum();
            if bi < 0.0 { -pi } else { pi }
        })
        .collect();
    Ok(LpOutcome::Optimal {
        x,
        objective,
        infeasibility,
        duals,
    })
}
