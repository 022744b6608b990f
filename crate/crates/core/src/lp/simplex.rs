//! Two-phase simplex on a dense tableau.
//!
//! Variables are shifted/split into nonnegative columns, finite upper bounds
//! become rows, and every row is scaled by its largest coefficient. Pricing
//! is Dantzig's rule; after a run of degenerate pivots it falls back to
//! Bland's rule until the objective moves again. The final basic solution is
//! recomputed from the unscaled-by-pivoting column data with one step of
//! iterative refinement.

use super::{LinearProgram, LpError, LpSolution, LpStatus, Relation, Sense};

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-10;
const DROP_TOL: f64 = 1e-14;
const DEGENERATE_RUN: usize = 50;

struct Column {
    var: usize,
    sign: f64,
}

struct Standard {
    /// Structural columns (before slack/artificial columns).
    columns: Vec<Column>,
    shift: Vec<f64>,
    /// Min-form cost per structural column.
    cost: Vec<f64>,
    rows: Vec<Vec<f64>>,
    rel: Vec<Relation>,
    rhs: Vec<f64>,
}

fn standardize(lp: &LinearProgram) -> Result<Option<Standard>, LpError> {
    let sign_obj = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut columns = Vec::new();
    let mut shift = vec![0.0; lp.variables.len()];
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    let mut var_cols: Vec<Vec<usize>> = vec![Vec::new(); lp.variables.len()];
    for (j, v) in lp.variables.iter().enumerate() {
        let (lo, hi) = (v.lower, v.upper);
        if lo.is_finite() && hi.is_finite() && lo == hi {
            shift[j] = lo;
        } else if lo.is_finite() {
            shift[j] = lo;
            var_cols[j].push(columns.len());
            if hi.is_finite() {
                bound_rows.push((columns.len(), hi - lo));
            }
            columns.push(Column { var: j, sign: 1.0 });
        } else if hi.is_finite() {
            shift[j] = hi;
            var_cols[j].push(columns.len());
            columns.push(Column { var: j, sign: -1.0 });
        } else {
            var_cols[j].push(columns.len());
            columns.push(Column { var: j, sign: 1.0 });
            var_cols[j].push(columns.len());
            columns.push(Column { var: j, sign: -1.0 });
        }
    }
    let n = columns.len();
    let cost: Vec<f64> = columns
        .iter()
        .map(|c| sign_obj * lp.objective[c.var] * c.sign)
        .collect();

    let mut rows = Vec::new();
    let mut rel = Vec::new();
    let mut rhs = Vec::new();
    let mut push_row = |mut coefs: Vec<f64>, r: Relation, mut b: f64| -> Result<bool, ()> {
        let scale = coefs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        if scale < 1e-300 {
            let tol = 1e-9 * b.abs().max(1.0);
            let ok = match r {
                Relation::Le => 0.0 <= b + tol,
                Relation::Ge => 0.0 >= b - tol,
                Relation::Eq => b.abs() <= tol,
            };
            return if ok { Ok(false) } else { Err(()) };
        }
        coefs.iter_mut().for_each(|c| *c /= scale);
        b /= scale;
        rows.push(coefs);
        rel.push(r);
        rhs.push(b);
        Ok(true)
    };

    for c in &lp.constraints {
        let mut coefs = vec![0.0; n];
        let mut b = c.rhs;
        for &(v, a) in &c.terms {
            b -= a * shift[v.0];
            for &col in &var_cols[v.0] {
                coefs[col] += a * columns[col].sign;
            }
        }
        if push_row(coefs, c.relation, b).is_err() {
            return Ok(None);
        }
    }
    for (col, ub) in bound_rows {
        let mut coefs = vec![0.0; n];
        coefs[col] = 1.0;
        if push_row(coefs, Relation::Le, ub).is_err() {
            return Ok(None);
        }
    }
    Ok(Some(Standard {
        columns,
        shift,
        cost,
        rows,
        rel,
        rhs,
    }))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Optimal,
    Unbounded,
}

struct Tableau {
    m: usize,
    ncols: usize,
    /// `m` rows of `ncols + 1` entries; the last entry is the rhs.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Reduced costs, `ncols` entries.
    d: Vec<f64>,
    allowed: Vec<bool>,
    iterations: usize,
    max_iterations: usize,
}

impl Tableau {
    fn set_costs(&mut self, cost: &[f64]) {
        self.d = cost.to_vec();
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for j in 0..self.ncols {
                    self.d[j] -= cb * self.t[r][j];
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let p = self.t[r][s];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        self.t[r][s] = 1.0;
        let pivot_row = self.t[r].clone();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i][s];
            if f != 0.0 {
                for (x, &pr) in self.t[i].iter_mut().zip(&pivot_row) {
                    *x -= f * pr;
                    if x.abs() < DROP_TOL {
                        *x = 0.0;
                    }
                }
                self.t[i][s] = 0.0;
            }
        }
        let f = self.d[s];
        if f != 0.0 {
            for (x, &pr) in self.d.iter_mut().zip(&pivot_row) {
                *x -= f * pr;
            }
            self.d[s] = 0.0;
        }
        self.basis[r] = s;
        self.iterations += 1;
    }

    fn optimize(&mut self) -> Result<Outcome, LpError> {
        let rhs = self.ncols;
        let mut degenerate = 0usize;
        let mut bland = false;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(LpError::SolverFailure(format!(
                    "iteration limit {} reached",
                    self.max_iterations
                )));
            }
            let entering = if bland {
                (0..self.ncols).find(|&j| self.allowed[j] && self.d[j] < -OPT_TOL)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..self.ncols {
                    if self.allowed[j] && self.d[j] < -OPT_TOL && best.is_none_or(|(_, v)| self.d[j] < v) {
                        best = Some((j, self.d[j]));
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(s) = entering else {
                return Ok(Outcome::Optimal);
            };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.t[i][s];
                if a > PIVOT_TOL {
                    let ratio = self.t[i][rhs].max(0.0) / a;
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((li, lr)) => {
                            let tie = (ratio - lr).abs() <= 1e-12 * lr.abs().max(1.0);
                            let better = if tie {
                                if bland {
                                    self.basis[i] < self.basis[li]
                                } else {
                                    a > self.t[li][s]
                                }
                            } else {
                                ratio < lr
                            };
                            if better {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Ok(Outcome::Unbounded);
            };
            if ratio <= 1e-12 {
                degenerate += 1;
                if degenerate > DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
            self.pivot(r, s);
        }
    }
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

pub(super) fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let Some(std) = standardize(lp)? else {
        return Ok(infeasible());
    };
    let n = std.columns.len();
    let m = std.rows.len();

    // Column layout: structural | slack/surplus | artificial.
    let n_slack = std.rel.iter().filter(|r| **r != Relation::Eq).count();
    let mut rel = std.rel.clone();
    let mut rows = std.rows.clone();
    let mut rhs = std.rhs.clone();
    for i in 0..m {
        if rhs[i] < 0.0 {
            rhs[i] = -rhs[i];
            rows[i].iter_mut().for_each(|c| *c = -*c);
            rel[i] = match rel[i] {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }
    let n_art = rel.iter().filter(|r| **r != Relation::Le).count();
    let ncols = n + n_slack + n_art;

    // Full column matrix (without artificials) for refinement.
    let mut a_full: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut t = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut slack = n;
    let mut art = n + n_slack;
    for i in 0..m {
        let mut row = vec![0.0; ncols + 1];
        row[..n].copy_from_slice(&rows[i]);
        match rel[i] {
            Relation::Le => {
                row[slack] = 1.0;
                basis.push(slack);
                slack += 1;
            }
            Relation::Ge => {
                row[slack] = -1.0;
                slack += 1;
                row[art] = 1.0;
                basis.push(art);
                art += 1;
            }
            Relation::Eq => {
                row[art] = 1.0;
                basis.push(art);
                art += 1;
            }
        }
        row[ncols] = rhs[i];
        a_full.push(row[..n + n_slack].to_vec());
        t.push(row);
    }

    let max_iterations = 20_000 + 50 * (m + ncols);
    let mut dropped_rows = false;
    let mut tab = Tableau {
        m,
        ncols,
        t,
        basis,
        d: vec![0.0; ncols],
        allowed: vec![true; ncols],
        iterations: 0,
        max_iterations,
    };

    if n_art > 0 {
        let mut phase1 = vec![0.0; ncols];
        phase1[n + n_slack..].iter_mut().for_each(|c| *c = 1.0);
        tab.set_costs(&phase1);
        if tab.optimize()? == Outcome::Unbounded {
            return Err(LpError::SolverFailure("phase 1 reported unbounded".into()));
        }
        let infeas: f64 = (0..tab.m)
            .filter(|&r| tab.basis[r] >= n + n_slack)
            .map(|r| tab.t[r][ncols])
            .sum();
        let bmax = rhs.iter().fold(1.0_f64, |m, b| m.max(b.abs()));
        if infeas > 1e-9 * bmax {
            return Ok(infeasible());
        }
        // Drive artificials out of the basis; drop rows that are redundant.
        // A dropped tableau row is a combination of original rows, so the
        // refinement pass (which needs a square original system) is skipped.
        let mut r = 0;
        while r < tab.m {
            if tab.basis[r] >= n + n_slack {
                let col = (0..n + n_slack)
                    .filter(|&j| tab.t[r][j].abs() > 1e-7)
                    .max_by(|&x, &y| tab.t[r][x].abs().total_cmp(&tab.t[r][y].abs()));
                match col {
                    Some(j) => tab.pivot(r, j),
                    None => {
                        tab.t.remove(r);
                        tab.basis.remove(r);
                        tab.m -= 1;
                        dropped_rows = true;
                        continue;
                    }
                }
            }
            r += 1;
        }
        for j in n + n_slack..ncols {
            tab.allowed[j] = false;
        }
    }

    let mut phase2 = vec![0.0; ncols];
    phase2[..n].copy_from_slice(&std.cost);
    tab.set_costs(&phase2);
    if tab.optimize()? == Outcome::Unbounded {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            values: Vec::new(),
            objective: match lp.sense {
                Sense::Minimize => f64::NEG_INFINITY,
                Sense::Maximize => f64::INFINITY,
            },
            iterations: tab.iterations,
        });
    }

    let mut xcols = vec![0.0; n + n_slack];
    for r in 0..tab.m {
        if tab.basis[r] < n + n_slack {
            xcols[tab.basis[r]] = tab.t[r][ncols];
        }
    }
    if !dropped_rows {
        refine(&a_full, &rhs, &tab.basis, &mut xcols);
    }

    let mut values = std.shift.clone();
    for (c, col) in std.columns.iter().enumerate() {
        values[col.var] += col.sign * xcols[c].max(0.0);
    }
    for (v, var) in values.iter_mut().zip(&lp.variables) {
        *v = v.clamp(var.lower, var.upper);
    }
    let objective = lp.objective_value(&values);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        values,
        objective,
        iterations: tab.iterations,
    })
}

/// Recomputes basic values from the original columns: solve `B x_B = b`,
/// then one refinement step on the residual.
fn refine(a: &[Vec<f64>], b: &[f64], basis: &[usize], x: &mut [f64]) {
    let m = b.len();
    if m == 0 || basis.iter().any(|&j| j >= x.len()) {
        return;
    }
    let bmat: Vec<Vec<f64>> = (0..m)
        .map(|i| basis.iter().map(|&j| a[i][j]).collect())
        .collect();
    let Some(mut xb) = dense_solve(bmat.clone(), b.to_vec()) else {
        return;
    };
    let resid: Vec<f64> = (0..m)
        .map(|i| b[i] - (0..m).map(|k| bmat[i][k] * xb[k]).sum::<f64>())
        .collect();
    if let Some(delta) = dense_solve(bmat, resid) {
        for (v, d) in xb.iter_mut().zip(delta) {
            *v += d;
        }
    }
    x.iter_mut().for_each(|v| *v = 0.0);
    for (k, &j) in basis.iter().enumerate() {
        x[j] = xb[k];
    }
}

fn infeasible() -> LpSolution {
    LpSolution {
        status: LpStatus::Infeasible,
        values: Vec::new(),
        objective: f64::NAN,
        iterations: 0,
    }
}
