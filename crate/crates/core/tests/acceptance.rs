//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line; the process fails if any line fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::instances::{
    pareto_instance, random_instance, two_route, two_route_equilibrium, vot_case, Instance,
};
use common::lp_oracle::{random_lp, vertex_enumeration, OracleResult};
use equitoll::calibration::{
    edge_daily_stats, estimate_vot, fit_bpr, fit_free_flow, DayObservation, SensorRecord, VotGrid,
    DEFAULT_NIGHT_HOUR, DEFAULT_RUSH_HOURS,
};
use equitoll::equilibrium::{
    solve_equilibrium, solve_social_optimum, SolverOptions, Start,
};
use equitoll::evaluation::{
    evaluate, pareto_front, pareto_front_from_weights, poa, EvalConfig, ParetoConfig,
};
use equitoll::lp::{LinearProgram, LpStatus, Relation, Sense};
use equitoll::network::{
    DemandMatrix, EdgeSpec, Network, NetworkSpec, StrategyDistribution, TollScheme, VotProfile,
};
use equitoll::rng::SplitMix64;
use equitoll::toll_design::{design, design_at, DesignConfig, DesignInputs, Scheme};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

fn tight() -> SolverOptions {
    SolverOptions::with_tol(1e-10)
}

fn instances() -> Vec<Instance> {
    let mut rng = SplitMix64::new(20_240_601);
    (0..50).map(|_| random_instance(&mut rng)).collect()
}

// Independent evaluation of costs from the raw edge data.

fn latency(net: &Network, e: usize, w: f64) -> f64 {
    let edge = net.edge(e);
    edge.free_flow_time + edge.slope * w.powi(4)
}

fn social_cost(net: &Network, w: &[f64]) -> f64 {
    w.iter().enumerate().map(|(e, &x)| x * latency(net, e, x)).sum()
}

fn totals(net: &Network, q: &StrategyDistribution) -> Vec<f64> {
    let mut w = vec![0.0; net.num_edges()];
    for i in 0..q.n_types() {
        for k in 0..net.num_od_pairs() {
            for (r, route) in net.routes(k).iter().enumerate() {
                for &e in route.edges() {
                    w[e] += q.get(i, k, r);
                }
            }
        }
    }
    w
}

fn route_costs(
    net: &Network,
    w: &[f64],
    tolls: &TollScheme,
    vot: &VotProfile,
    i: usize,
    k: usize,
) -> Vec<f64> {
    net.routes(k)
        .iter()
        .map(|route| {
            route
                .edges()
                .iter()
                .map(|&e| latency(net, e, w[e]) + (tolls.price(e, i) + net.edge(e).gas_cost) / vot.vot(i))
                .sum()
        })
        .collect()
}

fn min_cost(costs: &[f64]) -> f64 {
    costs.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn random_tolls(rng: &mut SplitMix64, net: &Network, n_types: usize) -> TollScheme {
    let prices = (0..n_types)
        .map(|_| (0..net.num_edges()).map(|_| rng.uniform(0.0, 5.0)).collect())
        .collect();
    TollScheme::heterogeneous(prices).unwrap()
}

fn criterion_1(insts: &[Instance]) -> Check {
    let mut rng = SplitMix64::new(1);
    let start = Instant::now();
    let mut worst_gap: f64 = 0.0;
    let mut worst_excess: f64 = 0.0;
    for (n, inst) in insts.iter().enumerate() {
        let tolls = if n % 2 == 0 {
            TollScheme::zero(inst.net.num_edges(), inst.vot.len())
        } else {
            random_tolls(&mut rng, &inst.net, inst.vot.len())
        };
        let eq = ok(
            solve_equilibrium(&inst.net, &inst.demand, &inst.vot, &tolls, &SolverOptions::default()),
            &format!("instance {n}"),
        )?;
        let w = totals(&inst.net, &eq.route_flows);
        let (mut used, mut best) = (0.0, 0.0);
        for i in 0..inst.vot.len() {
            for k in 0..inst.net.num_od_pairs() {
                let costs = route_costs(&inst.net, &w, &tolls, &inst.vot, i, k);
                let min = min_cost(&costs);
                let block = eq.route_flows.block(i, k);
                let d: f64 = block.iter().sum();
                ensure!(
                    (d - inst.demand.get(i, k)).abs() <= 1e-9 * d.max(1.0),
                    "instance {n}: block ({i},{k}) carries {d}, demand {}",
                    inst.demand.get(i, k)
                );
                used += block.iter().zip(&costs).map(|(q, c)| q * c).sum::<f64>();
                best += d * min;
                for (q, c) in block.iter().zip(&costs) {
                    if *q > 0.0 {
                        worst_excess = worst_excess.max((c - min) / min);
                    }
                }
            }
        }
        let gap = if used > 0.0 { (used - best) / used } else { 0.0 };
        worst_gap = worst_gap.max(gap);
    }
    let elapsed = start.elapsed();
    ensure!(worst_gap <= 1e-6, "worst gap {worst_gap:e}");
    ensure!(worst_excess <= 1e-5, "worst used-route excess {worst_excess:e}");
    ensure!(elapsed <= Duration::from_secs(10), "took {elapsed:.2?}");
    Ok(format!(
        "50 instances, gap <= {worst_gap:.1e}, route excess <= {worst_excess:.1e}, {elapsed:.2?}"
    ))
}

fn criterion_2() -> Check {
    let mut rng = SplitMix64::new(2);
    let vot = VotProfile::single(10.0).unwrap();
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 0..20 {
        let a = (rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0));
        let b = (rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0));
        let d = rng.uniform(0.5, 3.0);
        let net = two_route(a, b);
        let demand = DemandMatrix::from_rows(vec![vec![d]]).unwrap();
        let eq = ok(
            solve_equilibrium(&net, &demand, &vot, &TollScheme::zero(2, 1), &SolverOptions::default()),
            &format!("instance {n}"),
        )?;
        let oracle = two_route_equilibrium(a, b, d);
        worst = worst.max((eq.edge_flows.total[0] - oracle).abs());
    }
    let elapsed = start.elapsed();
    ensure!(worst <= 1e-3, "split differs from bisection by {worst:e}");
    ensure!(elapsed <= Duration::from_secs(1), "took {elapsed:.2?}");
    Ok(format!("20 instances, max split error {worst:.1e}, {elapsed:.2?}"))
}

fn criterion_3(insts: &[Instance]) -> Check {
    let mut worst: f64 = 0.0;
    for (n, inst) in insts.iter().enumerate() {
        let zero = TollScheme::zero(inst.net.num_edges(), inst.vot.len());
        let mut eq_flows = Vec::new();
        let mut so_flows = Vec::new();
        for start in [Start::FirstRoute, Start::Uniform] {
            let opts = SolverOptions { start, ..SolverOptions::default() };
            let tag = format!("instance {n}");
            let eq = ok(solve_equilibrium(&inst.net, &inst.demand, &inst.vot, &zero, &opts), &tag)?;
            let so = ok(solve_social_optimum(&inst.net, &inst.demand, &opts), &tag)?;
            eq_flows.push(eq.edge_flows.total);
            so_flows.push(so.edge_flows.total);
        }
        for (what, f) in [("w*", &eq_flows), ("w†", &so_flows)] {
            let scale = f[0].iter().fold(1.0, |m: f64, x| m.max(*x));
            let diff = max_abs_diff(&f[0], &f[1]) / scale;
            ensure!(diff <= 1e-4, "instance {n}: {what} differs by {diff:e} (scaled)");
            worst = worst.max(diff);
        }
    }
    Ok(format!("50 instances, max scaled disagreement {worst:.1e}"))
}

/// The instance with one type at the first VOT, no gas and summed demand.
fn single_type(inst: &Instance) -> Instance {
    let spec = inst.net.to_spec();
    let mut plain = NetworkSpec::new(&spec.nodes);
    for e in &spec.edges {
        plain = plain.edge(EdgeSpec::new(&e.id, &e.tail, &e.head, e.a, e.b));
    }
    for od in &spec.od_pairs {
        plain = plain.od(&od.origin, &od.destination);
    }
    let net = plain.build().unwrap();
    let row = (0..net.num_od_pairs()).map(|k| inst.demand.od_total(k)).collect();
    Instance {
        net,
        vot: VotProfile::single(inst.vot.vot(0)).unwrap(),
        demand: DemandMatrix::from_rows(vec![row]).unwrap(),
    }
}

fn criterion_4(insts: &[Instance]) -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut check = |inst: &Instance, tolls: &TollScheme, s_opt: f64, tag: String| -> Check {
        let eq = ok(solve_equilibrium(&inst.net, &inst.demand, &inst.vot, tolls, &tight()), &tag)?;
        let ratio = social_cost(&inst.net, &eq.edge_flows.total) / s_opt;
        ensure!(ratio <= 1.001, "{tag}: S(w*(p)) / S(w†) = {ratio}");
        worst = worst.max(ratio);
        Ok(String::new())
    };
    for (n, inst) in insts.iter().enumerate() {
        let so = ok(solve_social_optimum(&inst.net, &inst.demand, &tight()), "social optimum")?;
        let s_opt = social_cost(&inst.net, &so.edge_flows.total);
        for scheme in [Scheme::Hom, Scheme::Het] {
            let tag = format!("instance {n} {scheme}");
            let out = ok(design(&inst.net, &inst.demand, &inst.vot, &DesignConfig::new(scheme)), &tag)?;
            check(inst, &out.tolls, s_opt, tag)?;
        }

        let one = single_type(inst);
        let so = ok(solve_social_optimum(&one.net, &one.demand, &tight()), "social optimum")?;
        let theta = one.vot.vot(0);
        let prices = one
            .net
            .edges()
            .iter()
            .zip(&so.edge_flows.total)
            .map(|(e, w)| 4.0 * e.slope * w.powi(4) * theta)
            .collect();
        let tolls = TollScheme::homogeneous(prices, 1).unwrap();
        check(&one, &tolls, social_cost(&one.net, &so.edge_flows.total), format!("instance {n} marginal-cost"))?;
    }
    let elapsed = start.elapsed();
    ensure!(elapsed <= Duration::from_secs(30), "took {elapsed:.2?}");
    Ok(format!(
        "hom, het and marginal-cost tolls on 50 instances, max S ratio {worst:.6}, {elapsed:.2?}"
    ))
}

fn half_support(net: &Network) -> BTreeSet<usize> {
    (0..net.num_edges()).step_by(2).collect()
}

fn criterion_5(insts: &[Instance]) -> Check {
    let (mut worst_cut, mut worst_z): (f64, f64) = (0.0, 0.0);
    for (n, inst) in insts.iter().enumerate() {
        for scheme in Scheme::ALL {
            let tag = format!("instance {n} {scheme}");
            let mut cfg = DesignConfig::new(scheme);
            if scheme.is_support_constrained() {
                cfg.support = Some(half_support(&inst.net));
            }
            let out = ok(design(&inst.net, &inst.demand, &inst.vot, &cfg), &tag)?;
            let t = out.first_stage_value;
            let cut = (out.cut_activity - t).abs() / t.abs().max(1.0);
            ensure!(cut <= 1e-6, "{tag}: cut {} vs T* {t}", out.cut_activity);
            worst_cut = worst_cut.max(cut);
            for i in 0..inst.vot.len() {
                for k in 0..inst.net.num_od_pairs() {
                    if inst.demand.get(i, k) <= 0.0 {
                        continue;
                    }
                    let Some(z) = out.z[i][k] else {
                        return Err(format!("{tag}: no z for ({i},{k})"));
                    };
                    let c = min_cost(&route_costs(
                        &inst.net,
                        &out.audit.w_dagger,
                        &out.tolls,
                        &inst.vot,
                        i,
                        k,
                    ));
                    let target = inst.vot.vot(i) * c;
                    let err = (z - target).abs() / target.abs().max(1.0);
                    ensure!(err <= 1e-6, "{tag}: z {z} vs θc {target}");
                    worst_z = worst_z.max(err);
                }
            }
        }
    }
    Ok(format!(
        "4 schemes on 50 instances, cut error {worst_cut:.1e}, route tightness error {worst_z:.1e}"
    ))
}

fn criterion_6(insts: &[Instance]) -> Check {
    let mut worst: f64 = 0.0;
    for (n, inst) in insts.iter().enumerate() {
        let so = ok(solve_social_optimum(&inst.net, &inst.demand, &tight()), "social optimum")?;
        let s_opt = social_cost(&inst.net, &so.edge_flows.total);
        let full: BTreeSet<usize> = (0..inst.net.num_edges()).collect();
        let inp = ok(
            DesignInputs::new(&inst.net, &inst.demand, &inst.vot, 20.0, so.edge_flows.total.clone())
                .and_then(|i| i.with_support(full)),
            "inputs",
        )?;
        for (fb, sc) in [(Scheme::Hom, Scheme::HomSc), (Scheme::Het, Scheme::HetSc)] {
            let tag = format!("instance {n} {sc}");
            let a = ok(design_at(&inp, fb), &tag)?;
            let b = ok(design_at(&inp, sc), &tag)?;
            let dt = (a.first_stage_value - b.first_stage_value).abs() / a.first_stage_value.abs().max(1.0);
            let dobj = (a.second_stage_objective - b.second_stage_objective).abs()
                / a.second_stage_objective.abs().max(1.0);
            ensure!(dt <= 1e-7, "{tag} on the full edge set: T* differs by {dt:e}");
            ensure!(dobj <= 1e-7, "{tag} on the full edge set: objective differs by {dobj:e}");
            worst = worst.max(dt).max(dobj);
        }

        let inp = ok(inp.with_support(half_support(&inst.net)), "inputs")?;
        for (fb, sc) in [(Scheme::Hom, Scheme::HomSc), (Scheme::Het, Scheme::HetSc)] {
            let tag = format!("instance {n} {sc}");
            let a = ok(design_at(&inp, fb), &tag)?;
            let b = ok(design_at(&inp, sc), &tag)?;
            let t = a.first_stage_value;
            ensure!(
                b.first_stage_value <= t + 1e-8 * t.abs(),
                "{tag}: T*_sc {} above T* {t}",
                b.first_stage_value
            );
            let eq = ok(solve_equilibrium(&inst.net, &inst.demand, &inst.vot, &b.tolls, &tight()), &tag)?;
            let s = social_cost(&inst.net, &eq.edge_flows.total);
            ensure!(s >= s_opt * (1.0 - 1e-7), "{tag}: S(w*(p_sc)) {s} below S(w†) {s_opt}");
        }
    }
    Ok(format!("50 instances, full-support mismatch {worst:.1e}"))
}

fn criterion_7(insts: &[Instance]) -> Check {
    for (n, inst) in insts.iter().enumerate() {
        let zero = TollScheme::zero(inst.net.num_edges(), inst.vot.len());
        let r = ok(
            evaluate(&inst.net, &inst.demand, &inst.vot, &zero, &EvalConfig::default()),
            &format!("instance {n}"),
        )?;
        for (ctx, m) in [("design-time", &r.design_time), ("realized", &r.realized)] {
            ensure!(m.equity == 0.0, "instance {n} {ctx}: equity {}", m.equity);
            ensure!(m.welfare == 1.0, "instance {n} {ctx}: welfare {}", m.welfare);
        }
        ensure!(r.revenue == 0.0, "instance {n}: revenue {}", r.revenue);
    }
    Ok("50 instances, equity 0, welfare 1, revenue 0 exactly".into())
}

fn criterion_8(insts: &[Instance]) -> Check {
    let mut lowest = f64::INFINITY;
    for (n, inst) in insts.iter().enumerate() {
        let r = ok(poa(&inst.net, &inst.demand, &inst.vot, &tight()), &format!("instance {n}"))?;
        ensure!(r.poa >= 1.0 - 1e-6, "instance {n}: PoA {}", r.poa);
        lowest = lowest.min(r.poa);
    }
    let net = two_route((1.0, 2.0), (1.0, 1.0));
    let vot = VotProfile::single(10.0).unwrap();
    let d = DemandMatrix::from_rows(vec![vec![2.0]]).unwrap();
    let low = ok(poa(&net, &d, &vot, &tight()), "two-route")?.poa;
    let high = ok(poa(&net, &d.scaled(10.0).unwrap(), &vot, &tight()), "two-route")?.poa;
    ensure!(
        (high - 1.0).abs() < (low - 1.0).abs(),
        "PoA(D) = {low}, PoA(10D) = {high}"
    );
    Ok(format!(
        "min PoA {lowest:.6} over 50 instances; two-route PoA {low:.6} -> {high:.6} at 10x demand"
    ))
}

/// Two sensors 30 miles apart on a BPR edge, constant flow through the
/// rush hours of each day and none at night.
fn bpr_records(a: f64, b: f64, flows: &[f64]) -> Vec<SensorRecord> {
    let mut out = Vec::new();
    for (t, &w) in flows.iter().enumerate() {
        let day = format!("2019-03-{:02}", t + 4);
        for (hour, flow) in std::iter::once((DEFAULT_NIGHT_HOUR, 0.0)).chain(DEFAULT_RUSH_HOURS.iter().map(|&h| (h, w))) {
            let time = a + b * flow.powi(4);
            for (sensor, dist) in [(0, Some(30.0)), (1, None)] {
                out.push(SensorRecord {
                    edge: "e".into(),
                    sensor,
                    day: day.clone(),
                    hour,
                    speed_mph: 30.0 / time,
                    flow_vph: flow,
                    dist_next_miles: dist,
                });
            }
        }
    }
    out
}

fn criterion_9() -> Check {
    let records = bpr_records(2.0, 3.0, &[0.4, 0.9, 1.3, 1.7]);
    let stats = ok(edge_daily_stats(&records, &DEFAULT_RUSH_HOURS.into()), "sensor aggregation")?;
    let a = ok(fit_free_flow(&records, DEFAULT_NIGHT_HOUR), "free-flow fit")?;
    let fit = ok(fit_bpr(&stats, &a), "BPR fit")?;
    ensure!((fit[0].a - 2.0).abs() <= 1e-9, "â = {}", fit[0].a);
    ensure!((fit[0].b - 3.0).abs() <= 1e-9, "b̂ = {}", fit[0].b);

    let case = vot_case();
    let mut days = Vec::new();
    for (t, d) in case.days.iter().enumerate() {
        let eq = ok(
            solve_equilibrium(&case.net, d, &case.vot, &case.tolls, &SolverOptions::with_tol(1e-12)),
            "forward simulation",
        )?;
        days.push(DayObservation {
            day: format!("d{t}"),
            net: &case.net,
            demand: d.clone(),
            observed: eq.edge_flows.total.into_iter().map(Some).collect(),
        });
    }
    let truth = vec![10.0, 30.0, 70.0];
    let opts = SolverOptions::default();

    let values = [10.0, 20.0, 30.0, 50.0, 70.0];
    let mut cube = Vec::new();
    for &x in &values {
        for &y in &values {
            for &z in &values {
                cube.push(vec![x, y, z]);
            }
        }
    }
    let sub = VotGrid::from_candidates(cube).unwrap();
    let start = Instant::now();
    let est = ok(estimate_vot(&days, &case.vot, &case.tolls, &sub, &opts), "5^3 sub-grid")?;
    let sub_time = start.elapsed();
    ensure!(est.best == truth, "5^3 sub-grid returned {:?}", est.best);
    ensure!(sub_time <= Duration::from_secs(120), "5^3 sub-grid took {sub_time:.2?}");

    let paper = VotGrid::uniform(3, 0.0, 100.0, 5.0).unwrap();
    let start = Instant::now();
    let est = ok(estimate_vot(&days, &case.vot, &case.tolls, &paper, &opts), "$5 grid")?;
    let paper_time = start.elapsed();
    ensure!(est.best == truth, "$5 grid returned {:?}", est.best);
    Ok(format!(
        "b̂ - 3 = {:.1e}; VOT (10,30,70) from {} cells in {sub_time:.2?} and from {} $5 cells in {paper_time:.2?}",
        fit[0].b - 3.0,
        sub.len(),
        paper.len()
    ))
}

fn criterion_10() -> Check {
    let (net, vot, d) = pareto_instance();
    let cfg = ParetoConfig::default();
    let seed = 20_190_301;
    let a = ok(pareto_front(&net, &d, &vot, &cfg, 20, seed), "pareto")?;
    let b = ok(pareto_front(&net, &d, &vot, &cfg, 20, seed), "pareto")?;
    ensure!(a.failures.is_empty(), "failed samples {:?}", a.failures);
    let bytes = |f: &equitoll::evaluation::ParetoFront| {
        let mut csv = Vec::new();
        f.write_csv(&mut csv).unwrap();
        (serde_json::to_vec(f).unwrap(), csv)
    };
    ensure!(bytes(&a) == bytes(&b), "two runs with seed {seed} differ");

    let mut front = 0;
    for scheme in cfg.schemes.iter() {
        let pts: Vec<_> = a.points.iter().filter(|p| p.scheme == *scheme).collect();
        ensure!(pts.len() == 20, "{scheme}: {} points", pts.len());
        for p in &pts {
            let beaten = pts.iter().any(|q| {
                q.avg_time_min <= p.avg_time_min
                    && q.equity <= p.equity
                    && (q.avg_time_min < p.avg_time_min || q.equity < p.equity)
            });
            ensure!(
                beaten == p.dominated,
                "{scheme} sample {}: flag {} but re-check says {beaten}",
                p.sample,
                p.dominated
            );
            front += usize::from(!beaten);
        }
    }

    let equal = ok(
        pareto_front_from_weights(&net, &d, &vot, &cfg, &[vec![1.0; net.num_edges()]]),
        "equal weights",
    )?;
    let mut worst: f64 = 0.0;
    for p in &equal.points {
        let mut dc = DesignConfig::new(p.scheme);
        dc.solver = cfg.solver.clone();
        let out = ok(design(&net, &d, &vot, &dc), "unweighted design")?;
        let r = ok(evaluate(&net, &d, &vot, &out.tolls, &EvalConfig::default()), "evaluation")?;
        for (x, y) in [
            (p.avg_time_min, r.design_time.avg_travel_time_min),
            (p.equity, r.design_time.equity),
            (p.realized_avg_time_min, r.realized.avg_travel_time_min),
            (p.realized_equity, r.realized.equity),
        ] {
            worst = worst.max((x - y).abs());
        }
    }
    ensure!(worst <= 1e-6, "equal weights differ from the unweighted design by {worst:e}");
    Ok(format!(
        "N = 20, seed {seed}, byte-identical reruns, {front} non-dominated points, equal-weight error {worst:.1e}"
    ))
}

fn criterion_11() -> Check {
    let mut rng = SplitMix64::new(11);
    let (mut optimal, mut infeasible) = (0, 0);
    for n in 0..100 {
        let lp = random_lp(&mut rng);
        let sol = ok(lp.solve(), &format!("LP {n}"))?;
        match vertex_enumeration(&lp) {
            OracleResult::Optimal(obj) => {
                ensure!(sol.status == LpStatus::Optimal, "LP {n}: status {:?}", sol.status);
                ensure!(
                    (sol.objective - obj).abs() <= 1e-8 * obj.abs().max(1.0),
                    "LP {n}: simplex {} vs enumeration {obj}",
                    sol.objective
                );
                optimal += 1;
            }
            OracleResult::Infeasible => {
                ensure!(sol.status == LpStatus::Infeasible, "LP {n}: status {:?}", sol.status);
                infeasible += 1;
            }
        }
    }

    let mut hand = Vec::new();
    let mut lp = LinearProgram::new(Sense::Minimize);
    let x = lp.add_nonneg("x", 1.0);
    lp.add_constraint("neg", vec![(x, 1.0)], Relation::Le, -1.0);
    hand.push(("x >= 0, x <= -1", lp, LpStatus::Infeasible));

    let mut lp = LinearProgram::new(Sense::Maximize);
    let x = lp.add_nonneg("x", 1.0);
    let y = lp.add_nonneg("y", 1.0);
    lp.add_constraint("lo", vec![(x, 1.0), (y, 1.0)], Relation::Ge, 3.0);
    lp.add_constraint("hi", vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
    hand.push(("x + y in [3, 1]", lp, LpStatus::Infeasible));

    let mut lp = LinearProgram::new(Sense::Minimize);
    let x = lp.add_var("x", 0.0, 2.0, 0.0);
    let y = lp.add_var("y", 0.0, 2.0, 0.0);
    lp.add_constraint("sum", vec![(x, 1.0), (y, 1.0)], Relation::Eq, 5.0);
    hand.push(("boxed x + y = 5", lp, LpStatus::Infeasible));

    let mut lp = LinearProgram::new(Sense::Maximize);
    let x = lp.add_nonneg("x", 1.0);
    let y = lp.add_nonneg("y", 0.0);
    lp.add_constraint("c", vec![(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
    hand.push(("max x, x - y <= 1", lp, LpStatus::Unbounded));

    let mut lp = LinearProgram::new(Sense::Minimize);
    let x = lp.add_free("x", 1.0);
    lp.add_constraint("c", vec![(x, 1.0)], Relation::Le, 4.0);
    hand.push(("min free x <= 4", lp, LpStatus::Unbounded));

    for (name, lp, want) in &hand {
        let got = ok(lp.solve(), name)?.status;
        ensure!(got == *want, "{name}: {got:?}, expected {want:?}");
    }
    Ok(format!(
        "100 random LPs ({optimal} optimal, {infeasible} infeasible) match enumeration; {} hand-built cases classified",
        hand.len()
    ))
}

fn main() {
    let insts = instances();
    let criteria: Vec<(&str, Box<dyn Fn() -> Check + '_>)> = vec![
        ("equilibrium correctness", Box::new(|| criterion_1(&insts))),
        ("two-route oracle", Box::new(criterion_2)),
        ("uniqueness across starts", Box::new(|| criterion_3(&insts))),
        ("first-best implementation", Box::new(|| criterion_4(&insts))),
        ("second-stage semantics", Box::new(|| criterion_5(&insts))),
        ("support-constraint ordering", Box::new(|| criterion_6(&insts))),
        ("equity/welfare baselines", Box::new(|| criterion_7(&insts))),
        ("price of anarchy", Box::new(|| criterion_8(&insts))),
        ("calibration recovery", Box::new(criterion_9)),
        ("pareto procedure", Box::new(criterion_10)),
        ("LP solver", Box::new(criterion_11)),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", n + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
