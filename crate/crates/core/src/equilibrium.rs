//! Nash equilibria (potential minimization) and socially optimal flows.
//!
//! Both problems are separable convex programs over route flows, so one
//! engine serves both: it is parameterized by the per-edge marginal of the
//! objective for each traveler class.
//!
//! The default algorithm shifts flow inside each (class, OD) block from
//! costlier routes towards the current cheapest one, sized by a Newton step
//! on the route-cost difference and then clipped by an exact line search on
//! the objective. Unused routes end at exactly zero flow, which keeps the
//! route-level equilibrium conditions sharp. Classic Frank–Wolfe with exact
//! line search is available as an alternative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpStatus, Relation, Sense, Var};
use crate::network::{
    edge_flows, infeasible, route_cost, total_travel_time, DemandMatrix, EdgeFlows, Network,
    StrategyDistribution, TollScheme, VotProfile,
};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_ROUTE_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;
const LINE_SEARCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Per-block Newton flow shifts with exact line search.
    #[default]
    RouteSwap,
    /// All-or-nothing direction with exact line search.
    FrankWolfe,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum Start {
    /// All demand of each block on its first route.
    #[default]
    FirstRoute,
    /// Demand spread evenly over each block's routes.
    Uniform,
    Given(StrategyDistribution),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Target relative gap.
    pub tol: f64,
    pub max_iterations: usize,
    pub algorithm: Algorithm,
    pub start: Start,
    /// Largest allowed cost excess of a used route over the cheapest route
    /// of its block, relative to that minimum. `None` checks the gap only;
    /// Frank–Wolfe leaves small residual flows and rarely meets a tight
    /// route-level bound.
    pub route_tol: Option<f64>,
    /// Record the objective after every iteration.
    pub record_history: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: DEFAULT_TOL,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            algorithm: Algorithm::default(),
            start: Start::default(),
            route_tol: Some(DEFAULT_ROUTE_TOL),
            record_history: false,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions {
            tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub route_flows: StrategyDistribution,
    pub edge_flows: EdgeFlows,
    pub potential: f64,
    pub gap: f64,
    pub iterations: usize,
    /// Potential after each iteration (only when requested).
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SocialOptimum {
    /// One route-flow pattern inducing `w†`, split across types in
    /// proportion to their share of each OD's demand.
    pub route_flows: StrategyDistribution,
    pub edge_flows: EdgeFlows,
    /// `S(w†)` in flow-hours.
    pub total_travel_time: f64,
    /// `Σ γ_e w_e ℓ_e(w_e)`; equals `total_travel_time` for unit weights.
    pub weighted_cost: f64,
    pub gap: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Objectives
// ---------------------------------------------------------------------------

trait Objective {
    fn value(&self, net: &Network, per_class: &[Vec<f64>], total: &[f64]) -> f64;
    /// `∂ objective / ∂ f_e^c` at aggregate edge flow `w`.
    fn marginal(&self, net: &Network, e: usize, class: usize, w: f64) -> f64;
    /// Second derivative in the aggregate flow on edge `e`.
    fn curvature(&self, net: &Network, e: usize, w: f64) -> f64;
}

struct Potential {
    /// `(p_e^i + g_e) / θ^i`, indexed `[i][e]`.
    money: Vec<Vec<f64>>,
}

impl Potential {
    fn new(net: &Network, tolls: &TollScheme, vot: &VotProfile) -> Self {
        let money = (0..vot.len())
            .map(|i| {
                net.edges()
                    .iter()
                    .enumerate()
                    .map(|(e, edge)| (tolls.price(e, i) + edge.gas_cost) / vot.vot(i))
                    .collect()
            })
            .collect();
        Potential { money }
    }
}

impl Objective for Potential {
    fn value(&self, net: &Network, per_class: &[Vec<f64>], total: &[f64]) -> f64 {
        let integral: f64 = net
            .edges()
            .iter()
            .zip(total)
            .map(|(e, &w)| e.latency_integral(w))
            .sum();
        let money: f64 = per_class
            .iter()
            .zip(&self.money)
            .map(|(f, m)| f.iter().zip(m).map(|(a, b)| a * b).sum::<f64>())
            .sum();
        integral + money
    }

    #[inline]
    fn marginal(&self, net: &Network, e: usize, class: usize, w: f64) -> f64 {
        net.edge(e).latency(w) + self.money[class][e]
    }

    #[inline]
    fn curvature(&self, net: &Network, e: usize, w: f64) -> f64 {
        net.edge(e).latency_derivative(w)
    }
}

struct WeightedSystemCost<'a> {
    weights: &'a [f64],
}

impl Objective for WeightedSystemCost<'_> {
    fn value(&self, net: &Network, _per_class: &[Vec<f64>], total: &[f64]) -> f64 {
        net.edges()
            .iter()
            .zip(total)
            .zip(self.weights)
            .map(|((e, &w), g)| g * w * e.latency(w))
            .sum()
    }

    #[inline]
    fn marginal(&self, net: &Network, e: usize, _class: usize, w: f64) -> f64 {
        self.weights[e] * net.edge(e).marginal_cost(w)
    }

    #[inline]
    fn curvature(&self, net: &Network, e: usize, w: f64) -> f64 {
        self.weights[e] * net.edge(e).marginal_cost_derivative(w)
    }
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

struct State {
    q: StrategyDistribution,
    per_class: Vec<Vec<f64>>,
    total: Vec<f64>,
}

impl State {
    fn new(net: &Network, q: StrategyDistribution) -> Result<Self> {
        let flows = edge_flows(net, &q)?;
        Ok(State {
            q,
            per_class: flows.per_type,
            total: flows.total,
        })
    }

    fn resync(&mut self, net: &Network) {
        let flows = edge_flows(net, &self.q).expect("layout checked at construction");
        self.per_class = flows.per_type;
        self.total = flows.total;
    }
}

struct Outcome {
    q: StrategyDistribution,
    value: f64,
    gap: f64,
    iterations: usize,
    history: Vec<f64>,
}

fn route_costs<O: Objective>(
    net: &Network,
    obj: &O,
    total: &[f64],
    class: usize,
    k: usize,
) -> Vec<f64> {
    net.routes(k)
        .iter()
        .map(|r| {
            r.edges()
                .iter()
                .map(|&e| obj.marginal(net, e, class, total[e]))
                .sum()
        })
        .collect()
}

/// Index of the cheapest route, lowest index on ties.
fn argmin(costs: &[f64]) -> usize {
    let mut best = 0;
    for (r, &c) in costs.iter().enumerate() {
        if c < costs[best] {
            best = r;
        }
    }
    best
}

/// Convergence measures at the current flows: the relative gap and the
/// largest excess of a used route over its block minimum, relative to that
/// minimum (or to the average cost when the minimum is zero).
fn measures<O: Objective>(net: &Network, obj: &O, st: &State, demand: &DemandMatrix) -> (f64, f64) {
    let mut used = 0.0;
    let mut best = 0.0;
    let mut worst_excess: f64 = 0.0;
    let mut blocks = Vec::new();
    for c in 0..demand.n_types() {
        for k in 0..net.num_od_pairs() {
            let d = demand.get(c, k);
            if d <= 0.0 {
                continue;
            }
            let costs = route_costs(net, obj, &st.total, c, k);
            let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
            let block = st.q.block(c, k);
            used += block.iter().zip(&costs).map(|(q, c)| q * c).sum::<f64>();
            best += d * min;
            let excess = block
                .iter()
                .zip(&costs)
                .filter(|(q, _)| **q > 0.0)
                .map(|(_, c)| c - min)
                .fold(0.0, f64::max);
            blocks.push((min, excess));
        }
    }
    let average = used / demand.total().max(f64::MIN_POSITIVE);
    for (min, excess) in blocks {
        let scale = if min > 0.0 { min } else { average };
        if scale > 0.0 {
            worst_excess = worst_excess.max(excess / scale);
        }
    }
    let gap = if used <= 0.0 { 0.0 } else { ((used - best) / used).max(0.0) };
    (gap, worst_excess)
}

/// Exact line search on `[0, 1]` given the directional derivative, which is
/// nondecreasing in the step for a convex objective. Bisection on its sign
/// locates the minimizer; the lower end of the bracket is returned so the
/// objective never increases.
fn line_search(slope: impl Fn(f64) -> f64) -> f64 {
    if slope(0.0) >= 0.0 {
        return 0.0;
    }
    if slope(1.0) <= 0.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > LINE_SEARCH_TOL {
        let mid = 0.5 * (lo + hi);
        if slope(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn route_swap_sweep<O: Objective>(net: &Network, obj: &O, st: &mut State, demand: &DemandMatrix) {
    for c in 0..demand.n_types() {
        for k in 0..net.num_od_pairs() {
            let routes = net.routes(k);
            if demand.get(c, k) <= 0.0 || routes.len() < 2 {
                continue;
            }
            let costs = route_costs(net, obj, &st.total, c, k);
            let s = argmin(&costs);
            for r in 0..routes.len() {
                let q_r = st.q.block(c, k)[r];
                if r == s || q_r <= 0.0 {
                    continue;
                }
                // Edges on exactly one of the two routes, with the sign of
                // the flow change when moving from r to s.
                let moves: Vec<(usize, f64)> = routes[r]
                    .edges()
                    .iter()
                    .filter(|e| !routes[s].contains(**e))
                    .map(|&e| (e, -1.0))
                    .chain(
                        routes[s]
                            .edges()
                            .iter()
                            .filter(|e| !routes[r].contains(**e))
                            .map(|&e| (e, 1.0)),
                    )
                    .collect();
                let excess: f64 = -moves
                    .iter()
                    .map(|&(e, sign)| sign * obj.marginal(net, e, c, st.total[e]))
                    .sum::<f64>();
                if excess <= 0.0 {
                    continue;
                }
                let curvature: f64 = moves
                    .iter()
                    .map(|&(e, _)| obj.curvature(net, e, st.total[e]))
                    .sum();
                let step = if curvature > 0.0 {
                    (excess / curvature).min(q_r)
                } else {
                    q_r
                };
                let total = &st.total;
                let alpha = line_search(|a| {
                    moves
                        .iter()
                        .map(|&(e, sign)| sign * obj.marginal(net, e, c, total[e] + a * sign * step))
                        .sum::<f64>()
                });
                if alpha <= 0.0 {
                    continue;
                }
                let moved = if alpha == 1.0 { step } else { alpha * step };
                let block = st.q.block_mut(c, k);
                block[r] = if moved >= q_r { 0.0 } else { q_r - moved };
                block[s] += moved;
                for &(e, sign) in &moves {
                    st.per_class[c][e] += sign * moved;
                    st.total[e] += sign * moved;
                }
            }
        }
    }
}

/// Re-splits the current edge totals among classes at least cost.
///
/// With edge totals held fixed the latency part of the objective is
/// constant and the rest is linear in route flows, so the best split is a
/// small LP. Per-block flow shifts crawl along these directions when
/// classes trade money against time at similar rates; one exact solve jumps
/// straight to the end. Returns whether the split changed.
fn reallocate_classes<O: Objective>(
    net: &Network,
    obj: &O,
    st: &mut State,
    demand: &DemandMatrix,
) -> bool {
    let mut lp = LinearProgram::new(Sense::Minimize);
    let mut vars = Vec::new();
    let mut on_edge: Vec<Vec<(Var, f64)>> = vec![Vec::new(); net.num_edges()];
    let mut current = 0.0;
    for c in 0..demand.n_types() {
        for k in 0..net.num_od_pairs() {
            let d = demand.get(c, k);
            if d <= 0.0 {
                continue;
            }
            let costs = route_costs(net, obj, &st.total, c, k);
            let mut row = Vec::new();
            for (r, route) in net.routes(k).iter().enumerate() {
                let v = lp.add_nonneg(format!("q{c}_{k}_{r}"), costs[r]);
                current += costs[r] * st.q.block(c, k)[r];
                for &e in route.edges() {
                    on_edge[e].push((v, 1.0));
                }
                row.push((v, 1.0));
                vars.push((c, k, r, v));
            }
            lp.add_constraint(format!("demand{c}_{k}"), row, Relation::Eq, d);
        }
    }
    for (e, terms) in on_edge.into_iter().enumerate() {
        if !terms.is_empty() {
            lp.add_constraint(format!("edge{e}"), terms, Relation::Eq, st.total[e]);
        }
    }
    let Ok(sol) = lp.solve() else {
        return false;
    };
    if sol.status != LpStatus::Optimal || sol.objective >= current - 1e-12 * current.abs() {
        return false;
    }
    let mut q = StrategyDistribution::zeros(net, demand.n_types());
    for &(c, k, r, v) in &vars {
        q.block_mut(c, k)[r] = sol.value(v).max(0.0);
    }
    for c in 0..demand.n_types() {
        for k in 0..net.num_od_pairs() {
            let d = demand.get(c, k);
            let block = q.block_mut(c, k);
            let sum: f64 = block.iter().sum();
            if d > 0.0 && sum > 0.0 {
                block.iter_mut().for_each(|x| *x *= d / sum);
            }
        }
    }
    let before = obj.value(net, &st.per_class, &st.total);
    let old = std::mem::replace(&mut st.q, q);
    st.resync(net);
    if obj.value(net, &st.per_class, &st.total) > before {
        st.q = old;
        st.resync(net);
        return false;
    }
    true
}

fn frank_wolfe_step<O: Objective>(net: &Network, obj: &O, st: &mut State, demand: &DemandMatrix) {
    let n_edges = net.num_edges();
    let mut target = StrategyDistribution::zeros(net, demand.n_types());
    for c in 0..demand.n_types() {
        for k in 0..net.num_od_pairs() {
            let d = demand.get(c, k);
            if d > 0.0 {
                let s = argmin(&route_costs(net, obj, &st.total, c, k));
                target.block_mut(c, k)[s] = d;
            }
        }
    }
    let target_flows = edge_flows(net, &target).expect("same layout");
    let delta: Vec<Vec<f64>> = (0..demand.n_types())
        .map(|c| {
            (0..n_edges)
                .map(|e| target_flows.per_type[c][e] - st.per_class[c][e])
                .collect()
        })
        .collect();
    let delta_total: Vec<f64> = (0..n_edges)
        .map(|e| target_flows.total[e] - st.total[e])
        .collect();
    let total = &st.total;
    let alpha = line_search(|a| {
        let mut slope = 0.0;
        for (c, dc) in delta.iter().enumerate() {
            for (e, &d) in dc.iter().enumerate() {
                if d != 0.0 {
                    slope += d * obj.marginal(net, e, c, total[e] + a * delta_total[e]);
                }
            }
        }
        slope
    });
    if alpha <= 0.0 {
        return;
    }
    for (q, t) in st.q.as_mut_slice().iter_mut().zip(target.as_slice()) {
        *q = ((1.0 - alpha) * *q + alpha * t).max(0.0);
    }
    st.resync(net);
}

fn run<O: Objective>(
    net: &Network,
    obj: &O,
    demand: &DemandMatrix,
    start: StrategyDistribution,
    opts: &SolverOptions,
) -> Result<Outcome> {
    let mut st = State::new(net, start)?;
    let mut history = Vec::new();
    if opts.record_history {
        history.push(obj.value(net, &st.per_class, &st.total));
    }
    let mut iterations = 0;
    let mut last_gap = f64::INFINITY;
    loop {
        st.resync(net);
        let (gap, excess) = measures(net, obj, &st, demand);
        if gap <= opts.tol && opts.route_tol.is_none_or(|t| excess <= t) {
            let value = obj.value(net, &st.per_class, &st.total);
            return Ok(Outcome {
                q: st.q,
                value,
                gap,
                iterations,
                history,
            });
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NonConvergence { iterations, gap });
        }
        match opts.algorithm {
            Algorithm::RouteSwap => {
                route_swap_sweep(net, obj, &mut st, demand);
                if demand.n_types() > 1 && gap > 0.5 * last_gap {
                    reallocate_classes(net, obj, &mut st, demand);
                }
            }
            Algorithm::FrankWolfe => frank_wolfe_step(net, obj, &mut st, demand),
        }
        iterations += 1;
        last_gap = gap;
        if opts.record_history {
            st.resync(net);
            history.push(obj.value(net, &st.per_class, &st.total));
        }
    }
}

fn check_demand_routable(net: &Network, demand: &DemandMatrix) -> Result<()> {
    for k in 0..net.num_od_pairs() {
        if net.routes(k).is_empty() && demand.od_total(k) > 0.0 {
            return Err(infeasible(net, k));
        }
    }
    Ok(())
}

fn starting_point(
    net: &Network,
    demand: &DemandMatrix,
    start: &Start,
) -> Result<StrategyDistribution> {
    match start {
        Start::FirstRoute => StrategyDistribution::first_route(net, demand),
        Start::Uniform => StrategyDistribution::uniform(net, demand),
        Start::Given(q) => {
            if !q.matches(net) {
                return Err(Error::structural("starting distribution does not match network"));
            }
            q.check_feasible(demand)?;
            Ok(q.clone())
        }
    }
}

fn check_tol(opts: &SolverOptions) -> Result<()> {
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(Error::invalid(format!("tolerance {} must be > 0", opts.tol)));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// `Φ(q) = Σ_e ∫_0^{w_e} ℓ_e + Σ_i Σ_e (p_e^i + g_e)/θ^i · f_e^i`.
pub fn potential_value(
    net: &Network,
    q: &StrategyDistribution,
    tolls: &TollScheme,
    vot: &VotProfile,
) -> Result<f64> {
    tolls.check_shape(net, vot)?;
    let flows = edge_flows(net, q)?;
    if flows.per_type.len() != vot.len() {
        return Err(Error::structural("route flows and VOT profile disagree on type count"));
    }
    Ok(Potential::new(net, tolls, vot).value(net, &flows.per_type, &flows.total))
}

/// Relative gap `(Σ q·c − Σ D·min c) / Σ q·c` of route flows `q` under
/// tolls; zero exactly at an equilibrium and when total cost is zero.
pub fn equilibrium_gap(
    net: &Network,
    q: &StrategyDistribution,
    tolls: &TollScheme,
    vot: &VotProfile,
) -> Result<f64> {
    tolls.check_shape(net, vot)?;
    let flows = edge_flows(net, q)?;
    let mut used = 0.0;
    let mut best = 0.0;
    for i in 0..q.n_types() {
        for k in 0..net.num_od_pairs() {
            let block = q.block(i, k);
            let d: f64 = block.iter().sum();
            if d <= 0.0 {
                continue;
            }
            let costs: Vec<f64> = net
                .routes(k)
                .iter()
                .map(|r| route_cost(net, &flows.total, r, vot, i, tolls))
                .collect();
            used += block.iter().zip(&costs).map(|(q, c)| q * c).sum::<f64>();
            best += d * costs.iter().copied().fold(f64::INFINITY, f64::min);
        }
    }
    Ok(if used <= 0.0 { 0.0 } else { ((used - best) / used).max(0.0) })
}

/// Equilibrium route and edge flows under `tolls`.
pub fn solve_equilibrium(
    net: &Network,
    demand: &DemandMatrix,
    vot: &VotProfile,
    tolls: &TollScheme,
    opts: &SolverOptions,
) -> Result<EquilibriumResult> {
    check_tol(opts)?;
    demand.check_shape(net, vot)?;
    tolls.check_shape(net, vot)?;
    check_demand_routable(net, demand)?;
    let start = starting_point(net, demand, &opts.start)?;
    let obj = Potential::new(net, tolls, vot);
    let out = run(net, &obj, demand, start, opts)?;
    let flows = edge_flows(net, &out.q)?;
    Ok(EquilibriumResult {
        route_flows: out.q,
        edge_flows: flows,
        potential: out.value,
        gap: out.gap,
        iterations: out.iterations,
        history: out.history,
    })
}

/// Socially optimal flows: minimizes `S(w) = Σ_e w_e ℓ_e(w_e)`.
pub fn solve_social_optimum(
    net: &Network,
    demand: &DemandMatrix,
    opts: &SolverOptions,
) -> Result<SocialOptimum> {
    let ones = vec![1.0; net.num_edges()];
    solve_weighted_social_optimum(net, demand, &ones, opts)
}

/// Minimizes `Σ_e γ_e w_e ℓ_e(w_e)` for nonnegative edge weights `γ`.
pub fn solve_weighted_social_optimum(
    net: &Network,
    demand: &DemandMatrix,
    weights: &[f64],
    opts: &SolverOptions,
) -> Result<SocialOptimum> {
    check_tol(opts)?;
    net.check_edge_vector(weights, "edge weight vector")?;
    if let Some(g) = weights.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
        return Err(Error::invalid(format!("edge weight {g} must be finite and >= 0")));
    }
    if demand.n_od() != net.num_od_pairs() {
        return Err(Error::structural("demand matrix does not match od pairs"));
    }
    check_demand_routable(net, demand)?;

    // The planner's problem only sees aggregate OD demand.
    let n_od = net.num_od_pairs();
    let mut agg = DemandMatrix::zeros(1, n_od);
    for k in 0..n_od {
        agg.set(0, k, demand.od_total(k))?;
    }
    let start = match &opts.start {
        Start::Given(q) => Start::Given(aggregate_types(net, q)),
        other => other.clone(),
    };
    let start = starting_point(net, &agg, &start)?;
    let obj = WeightedSystemCost { weights };
    let out = run(net, &obj, &agg, start, opts)?;

    let mut q = StrategyDistribution::zeros(net, demand.n_types());
    for k in 0..n_od {
        let dk = demand.od_total(k);
        if dk <= 0.0 {
            continue;
        }
        let agg_block = out.q.block(0, k).to_vec();
        for i in 0..demand.n_types() {
            let share = demand.get(i, k) / dk;
            for (dst, src) in q.block_mut(i, k).iter_mut().zip(&agg_block) {
                *dst = src * share;
            }
        }
    }
    let flows = edge_flows(net, &q)?;
    Ok(SocialOptimum {
        total_travel_time: total_travel_time(net, &flows.total),
        weighted_cost: out.value,
        route_flows: q,
        edge_flows: flows,
        gap: out.gap,
        iterations: out.iterations,
        history: out.history,
    })
}

fn aggregate_types(net: &Network, q: &StrategyDistribution) -> StrategyDistribution {
    let mut agg = StrategyDistribution::zeros(net, 1);
    for i in 0..q.n_types() {
        for k in 0..net.num_od_pairs() {
            for (a, b) in agg.block_mut(0, k).iter_mut().zip(q.block(i, k)) {
                *a += b;
            }
        }
    }
    agg
}

/// `c^{ik}(p)` at aggregate edge flows `w`: the cheapest route cost for
/// type `i` on OD `k`, with the index of that route (lowest on ties).
pub fn min_route_cost(
    net: &Network,
    total_flow: &[f64],
    tolls: &TollScheme,
    vot: &VotProfile,
    i: usize,
    k: usize,
) -> Result<(f64, usize)> {
    net.check_edge_vector(total_flow, "edge flow vector")?;
    tolls.check_shape(net, vot)?;
    let routes = net.routes(k);
    if routes.is_empty() {
        return Err(infeasible(net, k));
    }
    let costs: Vec<f64> = routes
        .iter()
        .map(|r| route_cost(net, total_flow, r, vot, i, tolls))
        .collect();
    let r = argmin(&costs);
    Ok((costs[r], r))
}

/// Matrix of `c^{ik}` for every (type, OD); `None` where the OD has no route.
pub fn min_cost_matrix(
    net: &Network,
    total_flow: &[f64],
    tolls: &TollScheme,
    vot: &VotProfile,
) -> Result<Vec<Vec<Option<f64>>>> {
    (0..vot.len())
        .map(|i| {
            (0..net.num_od_pairs())
                .map(|k| {
                    if net.routes(k).is_empty() {
                        Ok(None)
                    } else {
                        min_route_cost(net, total_flow, tolls, vot, i, k).map(|(c, _)| Some(c))
                    }
                })
                .collect()
        })
        .collect()
}
