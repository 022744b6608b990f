//! Efficiency, equity and revenue metrics for toll schemes, and Pareto
//! sampling of the time/equity trade-off.
//!
//! Metrics come in two contexts. *Design-time* metrics use costs at the
//! optimal load `w†` (what the toll LPs see). *Realized* metrics re-solve
//! the equilibrium under the tolls and use costs at `w*(p)`, compared with
//! the zero-toll equilibrium.

use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{
    min_cost_matrix, solve_equilibrium, solve_social_optimum, solve_weighted_social_optimum,
    EquilibriumResult, SolverOptions,
};
use crate::error::{Error, Result};
use crate::formats::write_rows;
use crate::network::{
    total_travel_time, DemandMatrix, EdgeFlows, Network, TollScheme, VotProfile,
};
use crate::rng::SplitMix64;
use crate::toll_design::{design_at, DesignInputs, Scheme, DEFAULT_LAMBDA};

pub const DEFAULT_THRESHOLDS_MIN: [f64; 4] = [60.0, 90.0, 120.0, 150.0];

type CostMatrix = [Vec<Option<f64>>];

/// Per-type `Σ_k D^{ik} r^{ik}` and `D^i`, where `r` is the relative cost
/// change. Pairs with zero demand, no route, or a non-positive baseline
/// are skipped in the numerator but still count in `D^i`.
fn relative_sums(costs: &CostMatrix, baseline: &CostMatrix, demand: &DemandMatrix) -> Result<Vec<(f64, f64)>> {
    if costs.len() != demand.n_types() || baseline.len() != demand.n_types() {
        return Err(Error::structural("cost matrices do not match the demand matrix"));
    }
    let mut out = Vec::with_capacity(demand.n_types());
    for i in 0..demand.n_types() {
        if costs[i].len() != demand.n_od() || baseline[i].len() != demand.n_od() {
            return Err(Error::structural("cost matrices do not match the demand matrix"));
        }
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..demand.n_od() {
            let d = demand.get(i, k);
            if d <= 0.0 {
                continue;
            }
            den += d;
            if let (Some(c), Some(c0)) = (costs[i][k], baseline[i][k]) {
                if c0 > 0.0 {
                    num += d * (c / c0);
                }
            }
        }
        out.push((num, den));
    }
    Ok(out)
}

/// Largest gap between per-type demand-weighted relative cost changes.
/// Types without demand are left out.
pub fn equity_metric(costs: &CostMatrix, baseline: &CostMatrix, demand: &DemandMatrix) -> Result<f64> {
    let avg: Vec<f64> = relative_sums(costs, baseline, demand)?
        .into_iter()
        .filter(|&(_, den)| den > 0.0)
        .map(|(num, den)| num / den)
        .collect();
    let (lo, hi) = avg
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &a| (lo.min(a), hi.max(a)));
    Ok(if avg.is_empty() { 0.0 } else { hi - lo })
}

/// Demand-weighted mean relative cost change; 1 for zero demand.
pub fn welfare_metric(costs: &CostMatrix, baseline: &CostMatrix, demand: &DemandMatrix) -> Result<f64> {
    let (num, den) = relative_sums(costs, baseline, demand)?
        .into_iter()
        .fold((0.0, 0.0), |(n, d), (a, b)| (n + a, d + b));
    Ok(if den > 0.0 { num / den } else { 1.0 })
}

/// `Σ_e Σ_i p_e^i f_e^i`.
pub fn revenue(flows: &EdgeFlows, tolls: &TollScheme) -> Result<f64> {
    if flows.per_type.len() != tolls.n_types()
        || flows.per_type.iter().any(|f| f.len() != tolls.n_edges())
    {
        return Err(Error::structural("flows do not match the toll scheme"));
    }
    let mut r = 0.0;
    for (i, f) in flows.per_type.iter().enumerate() {
        for (e, fe) in f.iter().enumerate() {
            r += tolls.price(e, i) * fe;
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub type_label: String,
    /// Fraction of the type's demand with cost at or above each threshold.
    pub fractions: Vec<f64>,
}

/// Share of each type's demand whose cost (minutes) is at least each
/// threshold. Types without demand get no row.
pub fn threshold_table(
    costs_min: &CostMatrix,
    demand: &DemandMatrix,
    vot: &VotProfile,
    thresholds_min: &[f64],
) -> Result<Vec<ThresholdRow>> {
    if costs_min.len() != demand.n_types() || vot.len() != demand.n_types() {
        return Err(Error::structural("cost matrix does not match the demand matrix"));
    }
    let mut rows = Vec::new();
    for i in 0..demand.n_types() {
        let total = demand.type_total(i);
        if total <= 0.0 {
            continue;
        }
        let fractions = thresholds_min
            .iter()
            .map(|&tau| {
                let mut above = 0.0;
                for k in 0..demand.n_od() {
                    let d = demand.get(i, k);
                    if d > 0.0 && costs_min[i][k].is_some_and(|c| c >= tau) {
                        above += d;
                    }
                }
                above / total
            })
            .collect();
        rows.push(ThresholdRow {
            type_label: vot.label(i).to_string(),
            fractions,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoaReport {
    pub poa: f64,
    /// `S(w*(0))`.
    pub equilibrium_cost: f64,
    /// `S(w†)`.
    pub optimal_cost: f64,
}

/// Price of anarchy of the zero-toll game (gas costs included).
pub fn poa(
    net: &Network,
    demand: &DemandMatrix,
    vot: &VotProfile,
    opts: &SolverOptions,
) -> Result<PoaReport> {
    let zero = TollScheme::zero(net.num_edges(), vot.len());
    let eq = solve_equilibrium(net, demand, vot, &zero, opts)?;
    let so = solve_social_optimum(net, demand, opts)?;
    Ok(poa_from(
        total_travel_time(net, &eq.edge_flows.total),
        so.total_travel_time,
    ))
}

fn poa_from(equilibrium_cost: f64, optimal_cost: f64) -> PoaReport {
    let poa = if optimal_cost > 0.0 {
        equilibrium_cost / optimal_cost
    } else {
        1.0
    };
    PoaReport {
        poa,
        equilibrium_cost,
        optimal_cost,
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextMetrics {
    /// `S(w) / D` in minutes.
    pub avg_travel_time_min: f64,
    /// `S(w)` in flow·hours.
    pub total_travel_time: f64,
    /// Demand-weighted mean cost per type in minutes; `None` without demand.
    pub per_type_cost_min: Vec<Option<f64>>,
    pub equity: f64,
    pub welfare: f64,
    /// `equity + λ·welfare`.
    pub objective: f64,
    /// `c^{ik}` in hours.
    pub costs: Vec<Vec<Option<f64>>>,
    pub baseline: Vec<Vec<Option<f64>>>,
    pub thresholds: Vec<ThresholdRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub type_labels: Vec<String>,
    pub lambda: f64,
    pub thresholds_min: Vec<f64>,
    pub design_time: ContextMetrics,
    pub realized: ContextMetrics,
    /// Revenue at the realized equilibrium.
    pub revenue: f64,
    pub poa: PoaReport,
    /// `max_e |w*_e(p) − w†_e|`.
    pub implementation_error: f64,
    pub equilibrium_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub lambda: f64,
    pub thresholds_min: Vec<f64>,
    pub solver: SolverOptions,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            lambda: DEFAULT_LAMBDA,
            thresholds_min: DEFAULT_THRESHOLDS_MIN.to_vec(),
            solver: SolverOptions::with_tol(1e-10),
        }
    }
}

fn to_minutes(costs: &CostMatrix) -> Vec<Vec<Option<f64>>> {
    costs
        .iter()
        .map(|row| row.iter().map(|c| c.map(|c| c * 60.0)).collect())
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn context_metrics(
    net: &Network,
    demand: &DemandMatrix,
    vot: &VotProfile,
    w: &[f64],
    costs: Vec<Vec<Option<f64>>>,
    baseline: Vec<Vec<Option<f64>>>,
    lambda: f64,
    thresholds_min: &[f64],
) -> Result<ContextMetrics> {
    let total = total_travel_time(net, w);
    let d = demand.total();
    let per_type_cost_min = (0..vot.len())
        .map(|i| {
            let di = demand.type_total(i);
            (di > 0.0).then(|| {
                (0..demand.n_od())
                    .filter_map(|k| costs[i][k].map(|c| demand.get(i, k) * c))
                    .sum::<f64>()
                    / di
                    * 60.0
            })
        })
        .collect();
    let equity = equity_metric(&costs, &baseline, demand)?;
    let welfare = welfare_metric(&costs, &baseline, demand)?;
    let thresholds = threshold_table(&to_minutes(&costs), demand, vot, thresholds_min)?;
    Ok(ContextMetrics {
        avg_travel_time_min: if d > 0.0 { total / d * 60.0 } else { 0.0 },
        total_travel_time: total,
        per_type_cost_min,
        equity,
        welfare,
        objective: equity + lambda * welfare,
        costs,
        baseline,
        thresholds,
    })
}

/// Evaluates `tolls` in both contexts.
pub fn evaluate(
    net: &Network,
    demand: &DemandMatrix,
    vot: &VotProfile,
    tolls: &TollScheme,
    cfg: &EvalConfig,
) -> Result<MetricsReport> {
    if !(cfg.lambda.is_finite() && cfg.lambda >= 0.0) {
        return Err(Error::invalid(format!("lambda {} must be finite and >= 0", cfg.lambda)));
    }
    demand.check_shape(net, vot)?;
    tolls.check_shape(net, vot)?;
    let zero = TollScheme::zero(net.num_edges(), vot.len());
    let so = solve_social_optimum(net, demand, &cfg.solver)?;
    let w_dagger = &so.edge_flows.total;
    let eq0 = solve_equilibrium(net, demand, vot, &zero, &cfg.solver)?;
    let eq: EquilibriumResult = if tolls.is_zero() {
        eq0.clone()
    } else {
        solve_equilibrium(net, demand, vot, tolls, &cfg.solver)?
    };
    let design_time = context_metrics(
        net,
        demand,
        vot,
        w_dagger,
        min_cost_matrix(net, w_dagger, tolls, vot)?,
        min_cost_matrix(net, w_dagger, &zero, vot)?,
        cfg.lambda,
        &cfg.thresholds_min,
    )?;
    let realized = context_metrics(
        net,
        demand,
        vot,
        &eq.edge_flows.total,
        min_cost_matrix(net, &eq.edge_flows.total, tolls, vot)?,
        min_cost_matrix(net, &eq0.edge_flows.total, &zero, vot)?,
        cfg.lambda,
        &cfg.thresholds_min,
    )?;
    let implementation_error = eq
        .edge_flows
        .total
        .iter()
        .zip(w_dagger)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(MetricsReport {
        type_labels: vot.types().iter().map(|t| t.label.clone()).collect(),
        lambda: cfg.lambda,
        thresholds_min: cfg.thresholds_min.clone(),
        design_time,
        realized,
        revenue: revenue(&eq.edge_flows, tolls)?,
        poa: poa_from(
            total_travel_time(net, &eq0.edge_flows.total),
            so.total_travel_time,
        ),
        implementation_error,
        equilibrium_gap: eq.gap,
    })
}

#[derive(Serialize)]
struct TypeCostRow<'a> {
    context: &'a str,
    #[serde(rename = "type")]
    type_label: &'a str,
    avg_cost_min: Option<f64>,
}

#[derive(Serialize)]
struct ThresholdCsvRow<'a> {
    context: &'a str,
    #[serde(rename = "type")]
    type_label: &'a str,
    threshold_min: f64,
    fraction: f64,
}

impl MetricsReport {
    /// `context,type,avg_cost_min`.
    pub fn write_type_costs_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut rows = Vec::new();
        for (name, ctx) in self.contexts() {
            for (label, c) in self.type_labels.iter().zip(&ctx.per_type_cost_min) {
                rows.push(TypeCostRow {
                    context: name,
                    type_label: label,
                    avg_cost_min: *c,
                });
            }
        }
        write_rows(w, &rows)
    }

    /// `context,type,threshold_min,fraction`.
    pub fn write_thresholds_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut rows = Vec::new();
        for (name, ctx) in self.contexts() {
            for row in &ctx.thresholds {
                for (&t, &f) in self.thresholds_min.iter().zip(&row.fractions) {
                    rows.push(ThresholdCsvRow {
                        context: name,
                        type_label: &row.type_label,
                        threshold_min: t,
                        fraction: f,
                    });
                }
            }
        }
        write_rows(w, &rows)
    }

    fn contexts(&self) -> [(&'static str, &ContextMetrics); 2] {
        [("design", &self.design_time), ("realized", &self.realized)]
    }
}

// ---------------------------------------------------------------------------
// Pareto sampling
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub sample: usize,
    pub scheme: Scheme,
    /// Edge weights as sampled.
    pub gamma: Vec<f64>,
    /// Minimizer of the weighted total travel time.
    pub w_gamma: Vec<f64>,
    pub tolls: TollScheme,
    /// Average travel time at `w_gamma`, minutes.
    pub avg_time_min: f64,
    /// Equity of the design-time costs at `w_gamma`.
    pub equity: f64,
    /// Average travel time at the equilibrium under `tolls`, minutes.
    pub realized_avg_time_min: f64,
    /// Equity at that equilibrium, relative to the zero-toll equilibrium.
    pub realized_equity: f64,
    pub dominated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub sample: usize,
    pub scheme: Option<Scheme>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub seed: Option<u64>,
    /// Points ordered by sample, then scheme. Dominance is computed among
    /// points of the same scheme.
    pub points: Vec<ParetoPoint>,
    pub failures: Vec<SampleFailure>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoConfig {
    pub lambda: f64,
    pub schemes: Vec<Scheme>,
    /// Support for constrained schemes; `None` uses the tollable flags.
    pub support: Option<BTreeSet<usize>>,
    pub solver: SolverOptions,
}

impl Default for ParetoConfig {
    fn default() -> Self {
        ParetoConfig {
            lambda: DEFAULT_LAMBDA,
            schemes: vec![Scheme::Hom, Scheme::Het],
            support: None,
            solver: SolverOptions::with_tol(1e-10),
        }
    }
}

/// `n` weight vectors from the seeded stream: sample `s`, edge `e` uses
/// stream position `s·|E| + e`.
pub fn sample_weights(n_edges: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut g = SplitMix64::new(seed);
    (0..n)
        .map(|_| (0..n_edges).map(|_| g.next_f64()).collect())
        .collect()
}

/// Samples `n` weight vectors uniformly from `[0,1]^|E|` and evaluates them.
pub fn pareto_front(
    net: &Network,
    demand: &DemandMatrix,
    vot: &VotProfile,
    cfg: &ParetoConfig,
    n: usize,
    seed: u64,
) -> Result<ParetoFront> {
    if n == 0 {
        return Err(Error::invalid("Pareto sampling needs at least one sample"));
    }
    let weights = sample_weights(net.num_edges(), n, seed);
    let mut front = pareto_front_from_weights(net, demand, vot, cfg, &weights)?;
    front.seed = Some(seed);
    Ok(front)
}

/// Pareto evaluation for given weight vectors. Each vector is divided by
/// its largest entry before solving (the minimizer is unchanged), so equal
/// weights reproduce the unweighted optimum exactly.
pub fn pareto_front_from_weights(
    net: &Network,
    demand: &DemandMatrix,
    vot: &VotProfile,
    cfg: &ParetoConfig,
    weights: &[Vec<f64>],
) -> Result<ParetoFront> {
    demand.check_shape(net, vot)?;
    if !(cfg.lambda.is_finite() && cfg.lambda >= 0.0) {
        return Err(Error::invalid(format!("lambda {} must be finite and >= 0", cfg.lambda)));
    }
    for g in weights {
        net.check_edge_vector(g, "weight vector")?;
        if let Some(x) = g.iter().find(|x| !(x.is_finite() && (0.0..=1.0).contains(*x))) {
            return Err(Error::invalid(format!("edge weight {x} outside [0, 1]")));
        }
    }
    let zero = TollScheme::zero(net.num_edges(), vot.len());
    let eq0 = solve_equilibrium(net, demand, vot, &zero, &cfg.solver)?;
    let realized_baseline = min_cost_matrix(net, &eq0.edge_flows.total, &zero, vot)?;
    let d = demand.total();
    let minutes = |w: &[f64]| {
        if d > 0.0 {
            total_travel_time(net, w) / d * 60.0
        } else {
            0.0
        }
    };

    let per_sample: Vec<(Vec<ParetoPoint>, Vec<SampleFailure>)> = weights
        .par_iter()
        .enumerate()
        .map(|(s, gamma)| {
            let mut points = Vec::new();
            let mut failures = Vec::new();
            let fail = |scheme, e: Error| SampleFailure {
                sample: s,
                scheme,
                error: e.to_string(),
            };
            let top = gamma.iter().copied().fold(0.0, f64::max);
            if top <= 0.0 {
                failures.push(fail(None, Error::invalid("all edge weights are zero")));
                return (points, failures);
            }
            let scaled: Vec<f64> = gamma.iter().map(|g| g / top).collect();
            let w = match solve_weighted_social_optimum(net, demand, &scaled, &cfg.solver) {
                Ok(so) => so.edge_flows.total,
                Err(e) => {
                    failures.push(fail(None, e));
                    return (points, failures);
                }
            };
            let inp = DesignInputs::new(net, demand, vot, cfg.lambda, w.clone()).and_then(|inp| {
                match &cfg.support {
                    Some(sup) => inp.with_support(sup.clone()),
                    None => Ok(inp),
                }
            });
            let inp = match inp {
                Ok(inp) => inp,
                Err(e) => {
                    failures.push(fail(None, e));
                    return (points, failures);
                }
            };
            for &scheme in &cfg.schemes {
                let point = (|| -> Result<ParetoPoint> {
                    let out = design_at(&inp, scheme)?;
                    let costs = min_cost_matrix(net, &w, &out.tolls, vot)?;
                    let equity = equity_metric(&costs, &inp.baseline, demand)?;
                    let eq = solve_equilibrium(net, demand, vot, &out.tolls, &cfg.solver)?;
                    let realized = min_cost_matrix(net, &eq.edge_flows.total, &out.tolls, vot)?;
                    Ok(ParetoPoint {
                        sample: s,
                        scheme,
                        gamma: gamma.clone(),
                        w_gamma: w.clone(),
                        avg_time_min: minutes(&w),
                        equity,
                        realized_avg_time_min: minutes(&eq.edge_flows.total),
                        realized_equity: equity_metric(&realized, &realized_baseline, demand)?,
                        tolls: out.tolls,
                        dominated: false,
                    })
                })();
                match point {
                    Ok(p) => points.push(p),
                    Err(e) => failures.push(fail(Some(scheme), e)),
                }
            }
            (points, failures)
        })
        .collect();

    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (p, f) in per_sample {
        points.extend(p);
        failures.extend(f);
    }
    for scheme in &cfg.schemes {
        let idx: Vec<usize> = (0..points.len()).filter(|&j| points[j].scheme == *scheme).collect();
        let coords: Vec<(f64, f64)> = idx
            .iter()
            .map(|&j| (points[j].avg_time_min, points[j].equity))
            .collect();
        for (j, flag) in idx.into_iter().zip(dominated_flags(&coords)) {
            points[j].dominated = flag;
        }
    }
    Ok(ParetoFront {
        seed: None,
        points,
        failures,
    })
}

/// `a` dominates `b` when it is no worse in both coordinates and strictly
/// better in one (both minimized).
pub fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1)
}

/// Exact pairwise dominance check. Equal points do not dominate each other.
pub fn dominated_flags(points: &[(f64, f64)]) -> Vec<bool> {
    points
        .iter()
        .map(|&b| points.iter().any(|&a| dominates(a, b)))
        .collect()
}

#[derive(Serialize)]
struct ParetoCsvRow {
    sample: usize,
    scheme: Scheme,
    avg_time_min: f64,
    equity: f64,
    realized_avg_time_min: f64,
    realized_equity: f64,
    dominated: bool,
}

impl ParetoFront {
    /// `sample,scheme,avg_time_min,equity,realized_avg_time_min,realized_equity,dominated`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let rows: Vec<ParetoCsvRow> = self
            .points
            .iter()
            .map(|p| ParetoCsvRow {
                sample: p.sample,
                scheme: p.scheme,
                avg_time_min: p.avg_time_min,
                equity: p.equity,
                realized_avg_time_min: p.realized_avg_time_min,
                realized_equity: p.realized_equity,
                dominated: p.dominated,
            })
            .collect();
        write_rows(w, &rows)
    }
}
