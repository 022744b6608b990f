//! Brute-force vertex enumeration for small bounded LPs.

use equitoll::lp::{LinearProgram, Relation, Sense, Var};
use equitoll::rng::SplitMix64;

pub enum OracleResult {
    Optimal(f64),
    Infeasible,
}

struct Plane {
    a: Vec<f64>,
    b: f64,
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::new(), f);
}

/// Optimal objective of `lp` by enumerating every basic point. Requires
/// all variables to carry finite lower and upper bounds.
pub fn vertex_enumeration(lp: &LinearProgram) -> OracleResult {
    let n = lp.num_vars();
    assert!(lp
        .variables
        .iter()
        .all(|v| v.lower.is_finite() && v.upper.is_finite()));
    let mut mandatory = Vec::new();
    let mut optional = Vec::new();
    for c in &lp.constraints {
        let mut a = vec![0.0; n];
        for &(v, coef) in &c.terms {
            a[v.0] += coef;
        }
        if a.iter().all(|&x| x == 0.0) {
            // Pure feasibility condition; checked via max_violation below.
            continue;
        }
        let plane = Plane { a, b: c.rhs };
        if c.relation == Relation::Eq {
            mandatory.push(plane);
        } else {
            optional.push(plane);
        }
    }
    for (j, v) in lp.variables.iter().enumerate() {
        for bound in [v.lower, v.upper] {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            optional.push(Plane { a, b: bound });
        }
    }
    if mandatory.len() > n {
        // Overdetermined equalities: fall back to treating them as optional
        // planes too; feasibility is still checked on every candidate.
        optional.extend(mandatory.drain(..));
    }
    let need = n - mandatory.len();
    let sign = if lp.sense == Sense::Maximize { -1.0 } else { 1.0 };
    let mut best: Option<f64> = None;
    combinations(optional.len(), need, &mut |idx| {
        let planes: Vec<&Plane> = mandatory.iter().chain(idx.iter().map(|&i| &optional[i])).collect();
        let a: Vec<Vec<f64>> = planes.iter().map(|p| p.a.clone()).collect();
        let b: Vec<f64> = planes.iter().map(|p| p.b).collect();
        if let Some(x) = solve_square(a, b) {
            if lp.max_violation(&x) <= 1e-9 {
                let obj = sign * lp.objective_value(&x);
                if best.is_none_or(|cur| obj < cur) {
                    best = Some(obj);
                }
            }
        }
    });
    match best {
        Some(v) => OracleResult::Optimal(sign * v),
        None => OracleResult::Infeasible,
    }
}

/// Random bounded LP with at most 6 variables and 8 rows.
pub fn random_lp(rng: &mut SplitMix64) -> LinearProgram {
    let n = 1 + rng.below(6);
    let m = 1 + rng.below(8);
    let sense = if rng.next_f64() < 0.5 { Sense::Minimize } else { Sense::Maximize };
    let mut lp = LinearProgram::new(sense);
    let mut x0 = Vec::new();
    for j in 0..n {
        let lo = rng.uniform(-3.0, 0.0);
        let hi = lo + rng.uniform(1.0, 6.0);
        x0.push(rng.uniform(lo, hi));
        lp.add_var(format!("x{j}"), lo, hi, rng.uniform(-5.0, 5.0));
    }
    let mut equalities = 0;
    for i in 0..m {
        let mut terms: Vec<(Var, f64)> = Vec::new();
        for j in 0..n {
            if rng.next_f64() < 0.8 {
                terms.push((Var(j), rng.uniform(-5.0, 5.0)));
            }
        }
        let act: f64 = terms.iter().map(|&(v, a)| a * x0[v.0]).sum();
        let roll = rng.next_f64();
        let (rel, rhs) = if roll < 0.15 && equalities < 2 {
            equalities += 1;
            (Relation::Eq, act)
        } else if roll < 0.6 {
            (Relation::Le, act + rng.uniform(-2.0, 3.0))
        } else {
            (Relation::Ge, act - rng.uniform(-2.0, 3.0))
        };
        lp.add_constraint(format!("r{i}"), terms, rel, rhs);
    }
    lp
}
