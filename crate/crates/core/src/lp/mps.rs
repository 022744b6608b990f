//! Fixed-column MPS export for cross-checking LPs with external solvers.

use std::fmt::Write;

use super::{LinearProgram, Relation, Sense};

fn row_name(i: usize) -> String {
    format!("R{i}")
}

fn col_name(j: usize) -> String {
    format!("C{j}")
}

/// Renders `lp` in fixed-column MPS. Names are positional (`R<i>`, `C<j>`)
/// so they always fit the 8-character fields; the original names are listed
/// in leading comment lines. Maximization problems are written with a
/// negated objective, since MPS minimizes by convention.
pub fn write_mps(lp: &LinearProgram, name: &str) -> String {
    let mut out = String::new();
    let neg = lp.sense == Sense::Maximize;
    if neg {
        out.push_str("* maximization problem: objective coefficients negated\n");
    }
    for (j, v) in lp.variables.iter().enumerate() {
        let _ = writeln!(out, "* {} = {}", col_name(j), v.name);
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        let _ = writeln!(out, "* {} = {}", row_name(i), c.name);
    }
    let _ = writeln!(out, "NAME          {}", name.chars().take(8).collect::<String>());
    out.push_str("ROWS\n N  OBJ\n");
    for (i, c) in lp.constraints.iter().enumerate() {
        let t = match c.relation {
            Relation::Le => 'L',
            Relation::Ge => 'G',
            Relation::Eq => 'E',
        };
        let _ = writeln!(out, " {t}  {}", row_name(i));
    }

    // Column-major coefficients.
    let mut cols: Vec<Vec<(String, f64)>> = vec![Vec::new(); lp.variables.len()];
    for (j, &c) in lp.objective.iter().enumerate() {
        if c != 0.0 {
            cols[j].push(("OBJ".into(), if neg { -c } else { c }));
        }
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        for &(v, a) in &c.terms {
            if a != 0.0 {
                cols[v.0].push((row_name(i), a));
            }
        }
    }
    out.push_str("COLUMNS\n");
    for (j, entries) in cols.iter().enumerate() {
        for (row, a) in entries {
            let _ = writeln!(out, "    {:<8}  {:<8}  {:>12}", col_name(j), row, fmt_num(*a));
        }
    }
    out.push_str("RHS\n");
    for (i, c) in lp.constraints.iter().enumerate() {
        if c.rhs != 0.0 {
            let _ = writeln!(out, "    {:<8}  {:<8}  {:>12}", "RHS", row_name(i), fmt_num(c.rhs));
        }
    }
    out.push_str("BOUNDS\n");
    for (j, v) in lp.variables.iter().enumerate() {
        let col = col_name(j);
        let (lo, hi) = (v.lower, v.upper);
        if lo == hi {
            let _ = writeln!(out, " FX {:<8}  {:<8}  {:>12}", "BND", col, fmt_num(lo));
            continue;
        }
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " FR {:<8}  {:<8}", "BND", col);
            }
            (false, true) => {
                let _ = writeln!(out, " MI {:<8}  {:<8}", "BND", col);
                let _ = writeln!(out, " UP {:<8}  {:<8}  {:>12}", "BND", col, fmt_num(hi));
            }
            (true, hi_finite) => {
                if lo != 0.0 {
                    let _ = writeln!(out, " LO {:<8}  {:<8}  {:>12}", "BND", col, fmt_num(lo));
                }
                if hi_finite {
                    let _ = writeln!(out, " UP {:<8}  {:<8}  {:>12}", "BND", col, fmt_num(hi));
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

fn fmt_num(x: f64) -> String {
    let s = format!("{x}");
    if s.len() <= 12 {
        s
    } else {
        format!("{x:.6e}")
    }
}
