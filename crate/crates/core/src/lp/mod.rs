//! Dense linear programming.
//!
//! [`LinearProgram`] is a small modelling layer (named bounded variables,
//! linear rows, min/max objective). [`LinearProgram::solve`] runs a two-phase
//! bounded simplex on a dense tableau and re-checks every optimal answer
//! against the original rows before returning it.

mod mps;
mod simplex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mps::write_mps;

/// Absolute feasibility tolerance applied to rows scaled by their largest
/// coefficient magnitude.
pub const FEASIBILITY_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed LP: {0}")]
    Malformed(String),
    /// Numerical breakdown, distinct from a proven infeasible/unbounded status.
    #[error("LP solver failure: {0}")]
    SolverFailure(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(Var, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * x[v.0]).sum()
    }

    /// Violation of the row after dividing by `max(1, max |coef|)`.
    pub fn scaled_violation(&self, x: &[f64]) -> f64 {
        let scale = self
            .terms
            .iter()
            .fold(1.0_f64, |m, &(_, c)| m.max(c.abs()));
        let act = self.activity(x);
        let v = match self.relation {
            Relation::Le => act - self.rhs,
            Relation::Ge => self.rhs - act,
            Relation::Eq => (act - self.rhs).abs(),
        };
        v.max(0.0) / scale
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub variables: Vec<Variable>,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal values; empty unless `status == Optimal`.
    pub values: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn value(&self, v: Var) -> f64 {
        self.values[v.0]
    }
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            sense,
            variables: Vec::new(),
            objective: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> Var {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
        });
        self.objective.push(cost);
        Var(self.variables.len() - 1)
    }

    /// Nonnegative variable.
    pub fn add_nonneg(&mut self, name: impl Into<String>, cost: f64) -> Var {
        self.add_var(name, 0.0, f64::INFINITY, cost)
    }

    pub fn add_free(&mut self, name: impl Into<String>, cost: f64) -> Var {
        self.add_var(name, f64::NEG_INFINITY, f64::INFINITY, cost)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(Var, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.constraints.push(Constraint {
            name: name.into(),
            terms,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        if self.objective.len() != self.variables.len() {
            return Err(LpError::Malformed("objective length mismatch".into()));
        }
        if let Some(c) = self.objective.iter().find(|c| !c.is_finite()) {
            return Err(LpError::Malformed(format!("non-finite objective coefficient {c}")));
        }
        for v in &self.variables {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(LpError::Malformed(format!(
                    "variable `{}` has bounds [{}, {}]",
                    v.name, v.lower, v.upper
                )));
            }
            if v.lower == f64::INFINITY || v.upper == f64::NEG_INFINITY {
                return Err(LpError::Malformed(format!("variable `{}` has empty bounds", v.name)));
            }
        }
        for c in &self.constraints {
            if !c.rhs.is_finite() {
                return Err(LpError::Malformed(format!("row `{}` has non-finite rhs", c.name)));
            }
            for &(v, a) in &c.terms {
                if v.0 >= self.variables.len() {
                    return Err(LpError::Malformed(format!(
                        "row `{}` references undeclared variable {}",
                        c.name, v.0
                    )));
                }
                if !a.is_finite() {
                    return Err(LpError::Malformed(format!(
                        "row `{}` has non-finite coefficient",
                        c.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest scaled violation over rows and bounds.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.scaled_violation(x))
            .fold(0.0, f64::max);
        let bounds = self
            .variables
            .iter()
            .zip(x)
            .map(|(v, &xv)| (v.lower - xv).max(xv - v.upper).max(0.0) / xv.abs().max(1.0))
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        self.validate()?;
        let sol = simplex::solve(self)?;
        if sol.status == LpStatus::Optimal {
            let viol = self.max_violation(&sol.values);
            if viol > FEASIBILITY_TOL {
                return Err(LpError::SolverFailure(format!(
                    "optimal point fails feasibility re-check (max scaled violation {viol:e})"
                )));
            }
        }
        Ok(sol)
    }

    pub fn to_mps(&self, name: &str) -> String {
        write_mps(self, name)
    }
}

/// Solves `lp`, mapping this crate's LP errors into [`crate::Error`].
pub fn lp_solve(lp: &LinearProgram) -> crate::Result<LpSolution> {
    Ok(lp.solve()?)
}
