//! Toll design.
//!
//! Every scheme runs in two LP stages at the socially optimal load `w†`.
//! The first stage finds the planner value `T*`. Its optimal tolls are
//! exactly those that make `w†` an equilibrium. The second stage keeps
//! `T*` as a cut and picks, among those tolls, the one minimizing
//!
//! ```text
//! y + (λ/D) Σ_{i,k} D^{ik} z^{ik} / (θ^i c^{ik}(0))
//! ```
//!
//! where `y` bounds the largest pairwise gap between per-type average
//! relative cost changes and `z^{ik} = θ^i c^{ik}(p)` at the optimum.
//! Heterogeneous schemes first fix a type split `f†` of `w†` chosen to
//! minimize the spread of total travel time between types. The
//! support-constrained variants pin tolls outside the support to zero and
//! are heuristics: their equilibria need not reach `w†`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::equilibrium::{min_cost_matrix, solve_social_optimum, SolverOptions};
use crate::error::{Error, Result, StageExt};
use crate::lp::{LinearProgram, LpError, LpSolution, LpStatus, Relation, Sense, Var};
use crate::network::{
    edge_flows, infeasible, route_latency, DemandMatrix, EdgeFlows, Network, StrategyDistribution,
    TollScheme, VotProfile,
};

pub const DEFAULT_LAMBDA: f64 = 20.0;

/// Relative slack on the optimality cut, so a second stage built from a
/// first-stage value rounded at the last digit stays feasible.
const CUT_SLACK: f64 = 1e-12;

/// Relative slack on the edge rows of the cost-difference LP.
const DECOMPOSITION_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Hom,
    Het,
    HomSc,
    HetSc,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Hom, Scheme::Het, Scheme::HomSc, Scheme::HetSc];

    pub fn is_heterogeneous(self) -> bool {
        matches!(self, Scheme::Het | Scheme::HetSc)
    }

    pub fn is_support_constrained(self) -> bool {
        matches!(self, Scheme::HomSc | Scheme::HetSc)
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Hom => "hom",
            Scheme::Het => "het",
            Scheme::HomSc => "hom-sc",
            Scheme::HetSc => "het-sc",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown scheme `{s}` (hom, het, hom-sc, het-sc)")))
    }
}

/// Everything both LP stages need, computed once per design job.
#[derive(Debug, Clone)]
pub struct DesignInputs<'a> {
    pub net: &'a Network,
    pub demand: &'a DemandMatrix,
    pub vot: &'a VotProfile,
    pub lambda: f64,
    /// Socially optimal aggregate edge flows.
    pub w_dagger: Vec<f64>,
    /// `c^{ik}(0)` at `w_dagger`, `None` for unroutable OD pairs.
    pub baseline: Vec<Vec<Option<f64>>>,
    /// Tollable edges for the support-constrained schemes; defaults to the
    /// edges flagged tollable in the network.
    pub support: BTreeSet<usize>,
}

impl<'a> DesignInputs<'a> {
    pub fn new(
        net: &'a Network,
        demand: &'a DemandMatrix,
        vot: &'a VotProfile,
        lambda: f64,
        w_dagger: Vec<f64>,
    ) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::invalid(format!("lambda {lambda} must be finite and >= 0")));
        }
        demand.check_shape(net, vot)?;
        net.check_edge_vector(&w_dagger, "optimal edge flow vector")?;
        if let Some(w) = w_dagger.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::invalid(format!("edge flow {w} must be finite and >= 0")));
        }
        for k in 0..net.num_od_pairs() {
            if net.routes(k).is_empty() && demand.od_total(k) > 0.0 {
                return Err(infeasible(net, k));
            }
        }
        let zero = TollScheme::zero(net.num_edges(), vot.len());
        let baseline = min_cost_matrix(net, &w_dagger, &zero, vot)?;
        Ok(DesignInputs {
            net,
            demand,
            vot,
            lambda,
            w_dagger,
            baseline,
            support: net.tollable_edges(),
        })
    }

    pub fn with_support(mut self, support: BTreeSet<usize>) -> Result<Self> {
        if let Some(e) = support.iter().find(|&&e| e >= self.net.num_edges()) {
            return Err(Error::structural(format!("support references unknown edge {e}")));
        }
        self.support = support;
        Ok(self)
    }

    /// `(i, k)` with positive demand and a zero baseline cost; their relative
    /// cost change is undefined, so they are left out of the equity and
    /// welfare terms.
    pub fn degenerate_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.vot.len() {
            for k in 0..self.net.num_od_pairs() {
                if self.demand.get(i, k) > 0.0 && self.baseline[i][k].is_some_and(|c| c <= 0.0) {
                    out.push((i, k));
                }
            }
        }
        out
    }

    fn all_edges(&self) -> BTreeSet<usize> {
        (0..self.net.num_edges()).collect()
    }

    fn check_type_flows(&self, f_dagger: &[Vec<f64>]) -> Result<()> {
        if f_dagger.len() != self.vot.len()
            || f_dagger.iter().any(|row| row.len() != self.net.num_edges())
        {
            return Err(Error::structural("type edge flows do not match types x edges"));
        }
        Ok(())
    }
}

/// Result of a first-stage LP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstStage {
    /// `T*`.
    pub value: f64,
    /// One optimal toll vector.
    pub tolls: TollScheme,
    /// `z^{ik}`; `None` where `D^{ik} = 0`.
    pub z: Vec<Vec<Option<f64>>>,
}

/// Result of a second-stage LP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondStage {
    pub tolls: TollScheme,
    pub objective: f64,
    pub y: f64,
    pub z: Vec<Vec<Option<f64>>>,
    /// Left-hand side of the optimality cut at the optimum.
    pub cut_activity: f64,
    /// Right-hand side the cut was built with.
    pub cut_bound: f64,
}

/// Type split of `w†` minimizing the spread of total travel time.
#[derive(Debug, Clone, PartialEq)]
pub struct CostDifference {
    /// Largest pairwise difference in total travel time between types.
    pub value: f64,
    pub route_flows: StrategyDistribution,
    pub edge_flows: EdgeFlows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignAudit {
    pub w_dagger: Vec<f64>,
    /// `S(w†)` when the pipeline computed `w†` itself.
    pub social_cost: Option<f64>,
    pub baseline: Vec<Vec<Option<f64>>>,
    /// `f†` for heterogeneous schemes.
    pub f_dagger: Option<Vec<Vec<f64>>>,
    pub cost_difference: Option<f64>,
    pub support: Vec<usize>,
    pub first_stage_tolls: TollScheme,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignOutput {
    pub scheme: Scheme,
    pub lambda: f64,
    pub tolls: TollScheme,
    /// `T*` of the first stage.
    pub first_stage_value: f64,
    pub second_stage_objective: f64,
    pub y: f64,
    pub z: Vec<Vec<Option<f64>>>,
    pub cut_activity: f64,
    /// `(type, od)` pairs left out of equity and welfare terms.
    pub excluded: Vec<(usize, usize)>,
    pub audit: DesignAudit,
}

// ---------------------------------------------------------------------------
// LP construction
// ---------------------------------------------------------------------------

struct Layout {
    /// One row for homogeneous tolls, one per type otherwise.
    prices: Vec<Vec<Var>>,
    z: Vec<Vec<Option<Var>>>,
}

impl Layout {
    fn price(&self, i: usize, e: usize) -> Var {
        if self.prices.len() == 1 {
            self.prices[0][e]
        } else {
            self.prices[i][e]
        }
    }
}

/// Toll and `z` variables plus the route rows
/// `z^{ik} - Σ_{e∈r} p_e^i <= θ^i ℓ_r(w†) + Σ_{e∈r} g_e`.
fn build_common(
    inp: &DesignInputs<'_>,
    sense: Sense,
    heterogeneous: bool,
    support: &BTreeSet<usize>,
) -> (LinearProgram, Layout) {
    let net = inp.net;
    let mut lp = LinearProgram::new(sense);
    let rows = if heterogeneous { inp.vot.len() } else { 1 };
    let prices = (0..rows)
        .map(|i| {
            net.edges()
                .iter()
                .enumerate()
                .map(|(e, edge)| {
                    let name = if heterogeneous {
                        format!("p_{}_{}", edge.id, inp.vot.label(i))
                    } else {
                        format!("p_{}", edge.id)
                    };
                    let upper = if support.contains(&e) { f64::INFINITY } else { 0.0 };
                    lp.add_var(name, 0.0, upper, 0.0)
                })
                .collect()
        })
        .collect();
    let z = (0..inp.vot.len())
        .map(|i| {
            (0..net.num_od_pairs())
                .map(|k| {
                    (inp.demand.get(i, k) > 0.0).then(|| {
                        let (o, d) = net.od_label(k);
                        lp.add_free(format!("z_{}_{o}_{d}", inp.vot.label(i)), 0.0)
                    })
                })
                .collect()
        })
        .collect();
    let layout = Layout { prices, z };
    for i in 0..inp.vot.len() {
        for k in 0..net.num_od_pairs() {
            let Some(z) = layout.z[i][k] else { continue };
            for (r, route) in net.routes(k).iter().enumerate() {
                let mut terms = vec![(z, 1.0)];
                terms.extend(route.edges().iter().map(|&e| (layout.price(i, e), -1.0)));
                let rhs = inp.vot.vot(i) * route_latency(net, &inp.w_dagger, route)
                    + net.total_gas(route);
                lp.add_constraint(format!("route_{i}_{k}_{r}"), terms, Relation::Le, rhs);
            }
        }
    }
    (lp, layout)
}

/// `Σ D^{ik} z^{ik} − revenue`, where revenue pairs prices with `w†`
/// (homogeneous) or with `f†` (heterogeneous).
fn planner_terms(
    inp: &DesignInputs<'_>,
    layout: &Layout,
    f_dagger: Option<&[Vec<f64>]>,
) -> Vec<(Var, f64)> {
    let mut terms = Vec::new();
    for (i, row) in layout.z.iter().enumerate() {
        for (k, z) in row.iter().enumerate() {
            if let Some(z) = z {
                terms.push((*z, inp.demand.get(i, k)));
            }
        }
    }
    match f_dagger {
        None => {
            for (e, &w) in inp.w_dagger.iter().enumerate() {
                if w != 0.0 {
                    terms.push((layout.price(0, e), -w));
                }
            }
        }
        Some(f) => {
            for (i, row) in f.iter().enumerate() {
                for (e, &fe) in row.iter().enumerate() {
                    if fe != 0.0 {
                        terms.push((layout.price(i, e), -fe));
                    }
                }
            }
        }
    }
    terms
}

fn require_optimal(sol: LpSolution, what: &str) -> Result<LpSolution> {
    match sol.status {
        LpStatus::Optimal => Ok(sol),
        status => Err(LpError::SolverFailure(format!("{what} LP reported {status:?}")).into()),
    }
}

fn extract_tolls(
    inp: &DesignInputs<'_>,
    layout: &Layout,
    sol: &LpSolution,
    support: &BTreeSet<usize>,
) -> Result<TollScheme> {
    let rows: Vec<Vec<f64>> = layout
        .prices
        .iter()
        .map(|row| row.iter().map(|&v| sol.value(v).max(0.0)).collect())
        .collect();
    let scheme = if rows.len() == 1 && layout.prices.len() == 1 {
        TollScheme::homogeneous(rows.into_iter().next().unwrap_or_default(), inp.vot.len())?
    } else {
        TollScheme::heterogeneous(rows)?
    };
    scheme.with_support(support)
}

fn extract_z(layout: &Layout, sol: &LpSolution) -> Vec<Vec<Option<f64>>> {
    layout
        .z
        .iter()
        .map(|row| row.iter().map(|z| z.map(|v| sol.value(v))).collect())
        .collect()
}

fn first_stage(
    inp: &DesignInputs<'_>,
    heterogeneous: bool,
    support: &BTreeSet<usize>,
    f_dagger: Option<&[Vec<f64>]>,
) -> Result<FirstStage> {
    let (mut lp, layout) = build_common(inp, Sense::Maximize, heterogeneous, support);
    for (v, c) in planner_terms(inp, &layout, f_dagger) {
        lp.objective[v.0] += c;
    }
    let sol = require_optimal(lp.solve()?, "first-stage")?;
    Ok(FirstStage {
        value: sol.objective,
        tolls: extract_tolls(inp, &layout, &sol, support)?,
        z: extract_z(&layout, &sol),
    })
}

fn second_stage(
    inp: &DesignInputs<'_>,
    heterogeneous: bool,
    support: &BTreeSet<usize>,
    f_dagger: Option<&[Vec<f64>]>,
    t_star: f64,
) -> Result<SecondStage> {
    let net = inp.net;
    let (mut lp, layout) = build_common(inp, Sense::Minimize, heterogeneous, support);
    let total = inp.demand.total();
    let y = lp.add_nonneg("y", 1.0);

    // Relative-change weight of z^{ik}: D^{ik} / (θ^i c^{ik}(0)).
    let weight = |i: usize, k: usize| -> Option<f64> {
        let d = inp.demand.get(i, k);
        match inp.baseline[i][k] {
            Some(c0) if d > 0.0 && c0 > 0.0 => Some(d / (inp.vot.vot(i) * c0)),
            _ => None,
        }
    };
    if total > 0.0 {
        for i in 0..inp.vot.len() {
            for k in 0..net.num_od_pairs() {
                if let (Some(z), Some(w)) = (layout.z[i][k], weight(i, k)) {
                    lp.objective[z.0] += inp.lambda * w / total;
                }
            }
        }
    }

    // y >= A_i − A_{i'} for every ordered pair of types with demand, where
    // A_i is type i's demand-weighted average relative cost change.
    let average = |i: usize| -> Vec<(Var, f64)> {
        let di = inp.demand.type_total(i);
        (0..net.num_od_pairs())
            .filter_map(|k| Some((layout.z[i][k]?, weight(i, k)? / di)))
            .collect()
    };
    let active: Vec<usize> = (0..inp.vot.len())
        .filter(|&i| inp.demand.type_total(i) > 0.0)
        .collect();
    for &i in &active {
        for &j in &active {
            if i == j {
                continue;
            }
            let mut terms = vec![(y, 1.0)];
            terms.extend(average(i).into_iter().map(|(v, a)| (v, -a)));
            terms.extend(average(j));
            lp.add_constraint(format!("disparity_{i}_{j}"), terms, Relation::Ge, 0.0);
        }
    }

    let cut_terms = planner_terms(inp, &layout, f_dagger);
    let cut_bound = t_star - CUT_SLACK * t_star.abs().max(1.0);
    lp.add_constraint("optimality_cut", cut_terms.clone(), Relation::Ge, cut_bound);

    let sol = require_optimal(lp.solve()?, "second-stage")?;
    let cut_activity = cut_terms.iter().map(|&(v, a)| a * sol.value(v)).sum();
    Ok(SecondStage {
        tolls: extract_tolls(inp, &layout, &sol, support)?,
        objective: sol.objective,
        y: sol.value(y),
        z: extract_z(&layout, &sol),
        cut_activity,
        cut_bound,
    })
}

// ---------------------------------------------------------------------------
// Public stages
// ---------------------------------------------------------------------------

/// First stage of the homogeneous scheme: `T*_hom` and one optimal toll.
pub fn solve_p_hom(inp: &DesignInputs<'_>) -> Result<FirstStage> {
    first_stage(inp, false, &inp.all_edges(), None)
}

/// Homogeneous first stage restricted to `inp.support`.
pub fn solve_p_homsc(inp: &DesignInputs<'_>) -> Result<FirstStage> {
    first_stage(inp, false, &inp.support, None)
}

/// Heterogeneous first stage `T*_het(f†)`.
pub fn solve_p_het(inp: &DesignInputs<'_>, f_dagger: &[Vec<f64>]) -> Result<FirstStage> {
    inp.check_type_flows(f_dagger)?;
    first_stage(inp, true, &inp.all_edges(), Some(f_dagger))
}

/// Heterogeneous first stage restricted to `inp.support`.
pub fn solve_p_hetsc(inp: &DesignInputs<'_>, f_dagger: &[Vec<f64>]) -> Result<FirstStage> {
    inp.check_type_flows(f_dagger)?;
    first_stage(inp, true, &inp.support, Some(f_dagger))
}

pub fn solve_p_hom_star(inp: &DesignInputs<'_>, t_star: f64) -> Result<SecondStage> {
    second_stage(inp, false, &inp.all_edges(), None, t_star)
}

pub fn solve_p_homsc_star(inp: &DesignInputs<'_>, t_star: f64) -> Result<SecondStage> {
    second_stage(inp, false, &inp.support, None, t_star)
}

pub fn solve_p_het_star(
    inp: &DesignInputs<'_>,
    f_dagger: &[Vec<f64>],
    t_star: f64,
) -> Result<SecondStage> {
    inp.check_type_flows(f_dagger)?;
    second_stage(inp, true, &inp.all_edges(), Some(f_dagger), t_star)
}

pub fn solve_p_hetsc_star(
    inp: &DesignInputs<'_>,
    f_dagger: &[Vec<f64>],
    t_star: f64,
) -> Result<SecondStage> {
    inp.check_type_flows(f_dagger)?;
    second_stage(inp, true, &inp.support, Some(f_dagger), t_star)
}

/// Splits `w†` among types so the largest pairwise difference in total
/// travel time `Σ_k Σ_r q_r^{ik} ℓ_r(w†)` is minimal. Edge rows hold to a
/// relative slack of 1e-6 so solver-rounded `w†` stays decomposable.
pub fn solve_cost_diff_min(inp: &DesignInputs<'_>) -> Result<CostDifference> {
    // Two passes over the same feasible set: the first minimizes the spread,
    // the second holds it and pulls the edge totals back onto `w†` as far as
    // the slack allows.
    let (lp, x, _, _) = cost_diff_lp(inp, None)?;
    let first = check_cost_diff(lp.solve()?)?;
    let spread = first.value(x);
    let (lp, x, vars, _) = cost_diff_lp(inp, Some(spread))?;
    let sol = check_cost_diff(lp.solve()?)?;
    let mut q = StrategyDistribution::zeros(inp.net, inp.vot.len());
    for &(i, k, r, v) in &vars {
        q.block_mut(i, k)[r] = sol.value(v).max(0.0);
    }
    let flows = edge_flows(inp.net, &q)?;
    Ok(CostDifference {
        value: sol.value(x).min(spread).max(0.0),
        route_flows: q,
        edge_flows: flows,
    })
}

fn check_cost_diff(sol: LpSolution) -> Result<LpSolution> {
    match sol.status {
        LpStatus::Optimal => Ok(sol),
        LpStatus::Infeasible => Err(Error::invalid(
            "optimal edge flows cannot be split into route flows meeting the demand",
        )),
        LpStatus::Unbounded => {
            Err(LpError::SolverFailure("cost-difference LP reported unbounded".into()).into())
        }
    }
}

type RouteVar = (usize, usize, usize, Var);

/// With `spread = None` the objective is the spread `x`; otherwise `x` is
/// capped just above `spread` and the objective is the total deviation of
/// the edge totals from `w†`.
fn cost_diff_lp(
    inp: &DesignInputs<'_>,
    spread: Option<f64>,
) -> Result<(LinearProgram, Var, Vec<RouteVar>, Vec<Var>)> {
    let net = inp.net;
    let n_types = inp.vot.len();
    let mut lp = LinearProgram::new(Sense::Minimize);
    let x = match spread {
        None => lp.add_nonneg("x", 1.0),
        Some(s) => lp.add_var("x", 0.0, s + 1e-9 * s.abs().max(1.0), 0.0),
    };
    let dev_cost = if spread.is_some() { 1.0 } else { 0.0 };
    let mut vars: Vec<RouteVar> = Vec::new();
    let mut on_edge: Vec<Vec<(Var, f64)>> = vec![Vec::new(); net.num_edges()];
    let mut time_terms: Vec<Vec<(Var, f64)>> = vec![Vec::new(); n_types];
    for i in 0..n_types {
        for k in 0..net.num_od_pairs() {
            let d = inp.demand.get(i, k);
            if d <= 0.0 {
                continue;
            }
            let mut row = Vec::new();
            for (r, route) in net.routes(k).iter().enumerate() {
                let v = lp.add_nonneg(format!("q_{i}_{k}_{r}"), 0.0);
                vars.push((i, k, r, v));
                row.push((v, 1.0));
                for &e in route.edges() {
                    on_edge[e].push((v, 1.0));
                }
                time_terms[i].push((v, route_latency(net, &inp.w_dagger, route)));
            }
            lp.add_constraint(format!("demand_{i}_{k}"), row, Relation::Eq, d);
        }
    }
    let active: Vec<usize> = (0..n_types)
        .filter(|&i| inp.demand.type_total(i) > 0.0)
        .collect();
    for &i in &active {
        for &j in &active {
            if i == j {
                continue;
            }
            let mut terms = vec![(x, 1.0)];
            terms.extend(time_terms[i].iter().map(|&(v, t)| (v, -t)));
            terms.extend(time_terms[j].iter().copied());
            lp.add_constraint(format!("spread_{i}_{j}"), terms, Relation::Ge, 0.0);
        }
    }
    let mut devs = Vec::new();
    for (e, mut terms) in on_edge.into_iter().enumerate() {
        let w = inp.w_dagger[e];
        let slack = DECOMPOSITION_SLACK * w.max(1.0);
        if terms.is_empty() {
            if w > slack {
                return Err(Error::invalid(format!(
                    "edge {} carries optimal flow {w} but lies on no route",
                    net.edge(e).id
                )));
            }
            continue;
        }
        let over = lp.add_var(format!("over_{e}"), 0.0, slack, dev_cost);
        let under = lp.add_var(format!("under_{e}"), 0.0, slack, dev_cost);
        devs.extend([over, under]);
        terms.push((over, -1.0));
        terms.push((under, 1.0));
        lp.add_constraint(format!("edge_{e}"), terms, Relation::Eq, w);
    }
    Ok((lp, x, vars, devs))
}

// ---------------------------------------------------------------------------
// Pipelines
// ---------------------------------------------------------------------------

/// Runs every stage of `scheme` from given design inputs (including `w†`).
pub fn design_at(inp: &DesignInputs<'_>, scheme: Scheme) -> Result<DesignOutput> {
    let (first, second, f_dagger, cost_difference) = if scheme.is_heterogeneous() {
        let split = solve_cost_diff_min(inp).stage("cost difference")?;
        let f = split.edge_flows.per_type;
        let (first, second) = if scheme.is_support_constrained() {
            let first = solve_p_hetsc(inp, &f).stage("first stage")?;
            let second = solve_p_hetsc_star(inp, &f, first.value).stage("second stage")?;
            (first, second)
        } else {
            let first = solve_p_het(inp, &f).stage("first stage")?;
            let second = solve_p_het_star(inp, &f, first.value).stage("second stage")?;
            (first, second)
        };
        (first, second, Some(f), Some(split.value))
    } else {
        let (first, second) = if scheme.is_support_constrained() {
            let first = solve_p_homsc(inp).stage("first stage")?;
            let second = solve_p_homsc_star(inp, first.value).stage("second stage")?;
            (first, second)
        } else {
            let first = solve_p_hom(inp).stage("first stage")?;
            let second = solve_p_hom_star(inp, first.value).stage("second stage")?;
            (first, second)
        };
        (first, second, None, None)
    };
    let support = if scheme.is_support_constrained() {
        inp.support.iter().copied().collect()
    } else {
        (0..inp.net.num_edges()).collect()
    };
    Ok(DesignOutput {
        scheme,
        lambda: inp.lambda,
        tolls: second.tolls,
        first_stage_value: first.value,
        second_stage_objective: second.objective,
        y: second.y,
        z: second.z,
        cut_activity: second.cut_activity,
        excluded: inp.degenerate_pairs(),
        audit: DesignAudit {
            w_dagger: inp.w_dagger.clone(),
            social_cost: None,
            baseline: inp.baseline.clone(),
            f_dagger,
            cost_difference,
            support,
            first_stage_tolls: first.tolls,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignConfig {
    pub scheme: Scheme,
    pub lambda: f64,
    /// Support for the constrained schemes; `None` uses the network's
    /// tollable flags.
    pub support: Option<BTreeSet<usize>>,
    /// Options for the social-optimum solve.
    pub solver: SolverOptions,
}

impl DesignConfig {
    pub fn new(scheme: Scheme) -> Self {
        DesignConfig {
            scheme,
            lambda: DEFAULT_LAMBDA,
            support: None,
            solver: SolverOptions::with_tol(1e-10),
        }
    }
}

/// Full pipeline: social optimum, then the stages of `cfg.scheme`.
pub fn design(
    net: &Network,
    demand: &DemandMatrix,
    vot: &VotProfile,
    cfg: &DesignConfig,
) -> Result<DesignOutput> {
    demand.check_shape(net, vot)?;
    let so = solve_social_optimum(net, demand, &cfg.solver).stage("social optimum")?;
    let mut inp = DesignInputs::new(net, demand, vot, cfg.lambda, so.edge_flows.total)?;
    if let Some(support) = &cfg.support {
        inp = inp.with_support(support.clone())?;
    }
    let mut out = design_at(&inp, cfg.scheme)?;
    out.audit.social_cost = Some(so.total_travel_time);
    Ok(out)
}
