use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use clap::Args;
use equitoll::calibration::{
    calibrate_demand, edge_daily_stats, estimate_vot as run_vot_search, fit_bpr, fit_free_flow,
    read_sensor_csv, DayObservation, MobilityTable, VotGrid, DEFAULT_NIGHT_HOUR, DEFAULT_RUSH_HOURS,
};
use equitoll::equilibrium::{min_cost_matrix, solve_equilibrium, SolverOptions};
use equitoll::evaluation::{
    evaluate as run_evaluation, pareto_front, EvalConfig, ParetoConfig, DEFAULT_THRESHOLDS_MIN,
};
use equitoll::formats::{write_demand_csv, write_tolls_csv, write_vot_csv, DatedDemand};
use equitoll::network::{total_travel_time, DemandMatrix, Network, VotProfile};
use equitoll::toll_design::{design as run_design, DesignConfig, Scheme};
use log::info;
use serde::Serialize;

use crate::output::{OutDir, RunConfig};
use crate::{inputs, parse_scheme, DesignKnobs, ModelArgs, SolverArgs};

const EQUILIBRIUM_TOL: f64 = 1e-7;
const DESIGN_TOL: f64 = 1e-10;

fn model(
    cfg: &mut RunConfig,
    m: &ModelArgs,
) -> Result<(equitoll::network::NetworkSpec, Network, VotProfile, DemandMatrix)> {
    let (spec, net) = inputs::network(cfg, &m.network)?;
    let vot = inputs::vot(cfg, &m.vot)?;
    let demand = inputs::demand(cfg, &m.demand, &net, &vot, m.day.as_deref())?;
    Ok((spec, net, vot, demand))
}

fn finish(out: &OutDir) {
    println!("config {}", out.provenance().config_hash);
    for p in out.written() {
        println!("wrote {}", p.display());
    }
}

/// `type,origin,destination,demand,cost_min` for every (type, OD) pair.
fn write_type_costs(
    buf: &mut Vec<u8>,
    net: &Network,
    vot: &VotProfile,
    demand: &DemandMatrix,
    costs: &[Vec<Option<f64>>],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(["type", "origin", "destination", "demand", "cost_min"])?;
    for i in 0..vot.len() {
        for k in 0..net.num_od_pairs() {
            let (o, d) = net.od_label(k);
            let cost = costs[i][k].map(|c| (c * 60.0).to_string()).unwrap_or_default();
            w.write_record([vot.label(i), o, d, &demand.get(i, k).to_string(), &cost])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn per_type_average_min(demand: &DemandMatrix, costs: &[Vec<Option<f64>>]) -> Vec<Option<f64>> {
    (0..demand.n_types())
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
        .collect()
}

// ---------------------------------------------------------------------------
// equilibrium
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct EquilibriumArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Tolls CSV (`edge,type,price`); none means zero tolls.
    #[arg(long)]
    tolls: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct EquilibriumSummary {
    type_labels: Vec<String>,
    gap: f64,
    iterations: usize,
    potential: f64,
    total_travel_time: f64,
    avg_travel_time_min: f64,
    per_type_cost_min: Vec<Option<f64>>,
}

pub fn equilibrium(a: &EquilibriumArgs) -> Result<()> {
    let mut cfg = RunConfig::new("equilibrium");
    let (_, net, vot, demand) = model(&mut cfg, &a.model)?;
    let tolls = inputs::tolls(&mut cfg, a.tolls.as_deref(), &net, &vot)?;
    a.solver.record(&mut cfg, EQUILIBRIUM_TOL);
    let opts = a.solver.options(EQUILIBRIUM_TOL);

    info!("solving equilibrium");
    let eq = solve_equilibrium(&net, &demand, &vot, &tolls, &opts).context("equilibrium")?;
    let costs = min_cost_matrix(&net, &eq.edge_flows.total, &tolls, &vot)?;
    let s = total_travel_time(&net, &eq.edge_flows.total);
    let d = demand.total();

    let mut out = OutDir::create(&a.out, cfg.provenance())?;
    out.csv("edge_flows.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        let mut header = vec!["edge".to_string(), "flow".into(), "latency_h".into()];
        header.extend(vot.types().iter().map(|t| format!("flow_{}", t.label)));
        w.write_record(&header)?;
        for (e, edge) in net.edges().iter().enumerate() {
            let w_e = eq.edge_flows.total[e];
            let mut row = vec![edge.id.clone(), w_e.to_string(), edge.latency(w_e).to_string()];
            row.extend(eq.edge_flows.per_type.iter().map(|f| f[e].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    })?;
    out.csv("route_flows.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["type", "origin", "destination", "route", "flow"])?;
        for i in 0..vot.len() {
            for k in 0..net.num_od_pairs() {
                let (o, dst) = net.od_label(k);
                for (r, route) in net.routes(k).iter().enumerate() {
                    let q = eq.route_flows.get(i, k, r);
                    w.write_record([vot.label(i), o, dst, &net.route_label(route), &q.to_string()])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    })?;
    out.csv("type_costs.csv", |buf| write_type_costs(buf, &net, &vot, &demand, &costs))?;
    out.json(
        "summary.json",
        &EquilibriumSummary {
            type_labels: vot.types().iter().map(|t| t.label.clone()).collect(),
            gap: eq.gap,
            iterations: eq.iterations,
            potential: eq.potential,
            total_travel_time: s,
            avg_travel_time_min: if d > 0.0 { s / d * 60.0 } else { 0.0 },
            per_type_cost_min: per_type_average_min(&demand, &costs),
        },
    )?;
    println!("equilibrium: gap {:.3e} after {} iterations", eq.gap, eq.iterations);
    finish(&out);
    Ok(())
}

// ---------------------------------------------------------------------------
// design
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// hom, het, hom-sc or het-sc.
    #[arg(long, value_parser = parse_scheme)]
    scheme: Scheme,
    #[command(flatten)]
    knobs: DesignKnobs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: PathBuf,
}

/// Equilibrium re-solved under the designed tolls.
#[derive(Serialize)]
struct Recheck {
    social_cost: f64,
    realized_cost: f64,
    ratio: f64,
    max_edge_deviation: f64,
    /// First-best schemes are guaranteed to implement `w†`.
    guaranteed: bool,
    passed: bool,
}

#[derive(Serialize)]
struct DesignFile<'a> {
    #[serde(flatten)]
    design: &'a equitoll::toll_design::DesignOutput,
    recheck: Recheck,
}

pub fn design(a: &DesignArgs) -> Result<()> {
    let mut cfg = RunConfig::new("design");
    let (_, net, vot, demand) = model(&mut cfg, &a.model)?;
    let support = inputs::support(&mut cfg, a.knobs.support.as_deref(), &net)?;
    ensure!(
        a.knobs.lambda.is_finite() && a.knobs.lambda >= 0.0,
        "--lambda must be finite and nonnegative"
    );
    cfg.option("scheme", a.scheme);
    cfg.option("lambda", a.knobs.lambda);
    a.solver.record(&mut cfg, DESIGN_TOL);
    let opts = a.solver.options(DESIGN_TOL);

    let dc = DesignConfig {
        scheme: a.scheme,
        lambda: a.knobs.lambda,
        support,
        solver: opts.clone(),
    };
    info!("designing {} tolls", a.scheme);
    let out_design = run_design(&net, &demand, &vot, &dc).context("design")?;

    let eq = solve_equilibrium(&net, &demand, &vot, &out_design.tolls, &opts).context("re-check equilibrium")?;
    let social = total_travel_time(&net, &out_design.audit.w_dagger);
    let realized = total_travel_time(&net, &eq.edge_flows.total);
    let ratio = if social > 0.0 { realized / social } else { 1.0 };
    let max_dev = eq
        .edge_flows
        .total
        .iter()
        .zip(&out_design.audit.w_dagger)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let recheck = Recheck {
        social_cost: social,
        realized_cost: realized,
        ratio,
        max_edge_deviation: max_dev,
        guaranteed: !a.scheme.is_support_constrained(),
        passed: ratio <= 1.001,
    };

    let mut table = String::new();
    writeln!(table, "scheme {}  lambda {}", a.scheme, a.knobs.lambda)?;
    writeln!(table, "first-stage value T*   {:.9}", out_design.first_stage_value)?;
    writeln!(table, "second-stage objective {:.9}", out_design.second_stage_objective)?;
    writeln!(table, "equity bound y         {:.9}", out_design.y)?;
    writeln!(table, "S(w*(p)) / S(w†)       {:.9}", recheck.ratio)?;
    writeln!(table)?;
    let mut header = format!("{:<16}{:>12}", "edge", "w†");
    let labels: Vec<String> = if out_design.tolls.kind() == equitoll::network::TollKind::Homogeneous {
        vec!["toll".into()]
    } else {
        vot.types().iter().map(|t| format!("toll[{}]", t.label)).collect()
    };
    for l in &labels {
        write!(header, "{l:>14}")?;
    }
    writeln!(table, "{header}")?;
    for (e, edge) in net.edges().iter().enumerate() {
        write!(table, "{:<16}{:>12.6}", edge.id, out_design.audit.w_dagger[e])?;
        for i in 0..labels.len() {
            if out_design.tolls.in_support(e) {
                write!(table, "{:>14.6}", out_design.tolls.price(e, i))?;
            } else {
                write!(table, "{:>14}", "-")?;
            }
        }
        writeln!(table)?;
    }

    let mut out = OutDir::create(&a.out, cfg.provenance())?;
    out.json("design.json", &DesignFile { design: &out_design, recheck })?;
    out.csv("tolls.csv", |buf| Ok(write_tolls_csv(buf, &net, &vot, &out_design.tolls)?))?;
    out.text("summary.txt", &table)?;
    print!("{table}");
    finish(&out);
    Ok(())
}

// ---------------------------------------------------------------------------
// calibrate
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Sensor CSV (`edge,sensor,day,hour,speed_mph,flow_vph,dist_next_miles`).
    #[arg(long)]
    sensors: PathBuf,
    /// Network JSON; when given, a copy with the fitted latencies is written.
    #[arg(long)]
    network: Option<PathBuf>,
    /// Rush-hour slots averaged into the daily statistics.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_RUSH_HOURS)]
    rush_hours: Vec<u32>,
    /// Hour whose travel time gives the free-flow time.
    #[arg(long, default_value_t = DEFAULT_NIGHT_HOUR)]
    night_hour: u32,
    /// VOT CSV naming the traveler types (demand calibration).
    #[arg(long, requires_all = ["network", "counts", "residents", "driving", "cell_nodes"])]
    vot: Option<PathBuf>,
    /// Cell-to-cell trip counts (`origin_cell,dest_cell,count`).
    #[arg(long, requires = "vot")]
    counts: Option<PathBuf>,
    /// Residents per cell (`cell,residents`).
    #[arg(long, requires = "vot")]
    residents: Option<PathBuf>,
    /// Driving population per node and type (`node,type,driving_pop`).
    #[arg(long, requires = "vot")]
    driving: Option<PathBuf>,
    /// Cell-to-node mapping (`cell,node`).
    #[arg(long, requires = "vot")]
    cell_nodes: Option<PathBuf>,
    /// Hour slots the counts cover; defaults to the number of rush hours.
    #[arg(long)]
    hours: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct CalibrationReport<'a> {
    fits: &'a [equitoll::calibration::BprFit],
    quality: &'a equitoll::calibration::QualityReport,
    free_flow: &'a BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    demand: Option<&'a equitoll::calibration::DemandAudit>,
}

pub fn calibrate(a: &CalibrateArgs) -> Result<()> {
    let mut cfg = RunConfig::new("calibrate");
    let bytes = cfg.read("sensors", &a.sensors)?;
    let records = read_sensor_csv(bytes.as_slice()).with_context(|| format!("parsing {}", a.sensors.display()))?;
    let hours: BTreeSet<u32> = a.rush_hours.iter().copied().collect();
    cfg.option("rush_hours", &hours);
    cfg.option("night_hour", a.night_hour);

    let stats = edge_daily_stats(&records, &hours).context("sensor aggregation")?;
    let free_flow = fit_free_flow(&records, a.night_hour).context("free-flow times")?;
    let fits = fit_bpr(&stats, &free_flow).context("latency fit")?;
    info!("fitted {} edges", fits.len());

    let network = match &a.network {
        Some(p) => Some(inputs::network(&mut cfg, p)?),
        None => None,
    };
    let fitted_spec = match &network {
        Some((spec, _)) => {
            let mut spec = spec.clone();
            for f in &fits {
                let Some(e) = spec.edges.iter_mut().find(|e| e.id == f.edge) else {
                    bail!("sensor edge `{}` is not in the network", f.edge);
                };
                e.a = f.a;
                e.b = f.b;
            }
            Some(spec)
        }
        None => None,
    };

    let mut demand_out = None;
    if let Some(vot_path) = &a.vot {
        let (_, net) = network.as_ref().expect("clap requires --network with --vot");
        let vot = inputs::vot(&mut cfg, vot_path)?;
        let paths = [&a.counts, &a.residents, &a.driving, &a.cell_nodes];
        let names = ["counts", "residents", "driving", "cell-nodes"];
        let mut files = Vec::new();
        for (p, n) in paths.iter().zip(names) {
            let p = p.as_ref().expect("clap requires every mobility file with --vot");
            files.push(cfg.read(n, p)?);
        }
        let slots = a.hours.unwrap_or(hours.len());
        cfg.option("hours", slots);
        let mobility = MobilityTable::from_readers(
            files[0].as_slice(),
            files[1].as_slice(),
            files[2].as_slice(),
            files[3].as_slice(),
            slots,
        )
        .context("reading mobility tables")?;
        let cal = calibrate_demand(net, &vot, &mobility, &stats.daily_totals()).context("demand calibration")?;
        demand_out = Some((vot, cal));
    }

    let mut out = OutDir::create(&a.out, cfg.provenance())?;
    out.csv("bpr.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        for f in &fits {
            w.serialize(f)?;
        }
        w.flush()?;
        Ok(())
    })?;
    out.csv("edge_daily.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        for s in &stats.daily {
            w.serialize(s)?;
        }
        w.flush()?;
        Ok(())
    })?;
    if let Some(spec) = &fitted_spec {
        out.json("network.json", spec)?;
    }
    if let (Some((vot, cal)), Some((_, net))) = (&demand_out, &network) {
        out.csv("demand_base.csv", |buf| {
            let base = [DatedDemand { day: None, demand: cal.base.clone() }];
            Ok(write_demand_csv(buf, net, vot, &base)?)
        })?;
        if !cal.daily.is_empty() {
            out.csv("demand.csv", |buf| {
                let days: Vec<DatedDemand> = cal
                    .daily
                    .iter()
                    .map(|(d, m)| DatedDemand { day: Some(d.clone()), demand: m.clone() })
                    .collect();
                Ok(write_demand_csv(buf, net, vot, &days)?)
            })?;
        }
    }
    out.json(
        "calibration.json",
        &CalibrationReport {
            fits: &fits,
            quality: &stats.quality,
            free_flow: &free_flow,
            demand: demand_out.as_ref().map(|(_, c)| &c.audit),
        },
    )?;
    for f in &fits {
        println!("{}: a = {:.6}, b = {:.6} ({} days)", f.edge, f.a, f.b, f.days);
    }
    finish(&out);
    Ok(())
}

// ---------------------------------------------------------------------------
// estimate-vot
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct EstimateVotArgs {
    /// Network JSON.
    #[arg(long)]
    network: PathBuf,
    /// VOT CSV naming the types, lowest VOT first; its values are ignored.
    #[arg(long)]
    vot: PathBuf,
    /// Demand CSV with a day column.
    #[arg(long)]
    demand: PathBuf,
    /// Observed daily flows (`edge,day,flow`), e.g. `edge_daily.csv`.
    #[arg(long)]
    observed: PathBuf,
    /// Tolls in force on the observed days.
    #[arg(long)]
    tolls: Option<PathBuf>,
    /// Explicit grid values per type; overrides the min/max/step grid.
    #[arg(long, value_delimiter = ',')]
    grid_values: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0)]
    grid_min: f64,
    #[arg(long, default_value_t = 100.0)]
    grid_max: f64,
    #[arg(long, default_value_t = 5.0)]
    grid_step: f64,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct VotSummary<'a> {
    type_labels: Vec<String>,
    best: &'a [f64],
    best_vots: &'a [f64],
    best_error: f64,
    floored: bool,
    candidates: usize,
    failures: usize,
    days: Vec<String>,
}

pub fn estimate_vot(a: &EstimateVotArgs) -> Result<()> {
    let mut cfg = RunConfig::new("estimate-vot");
    let (_, net) = inputs::network(&mut cfg, &a.network)?;
    let template = inputs::vot(&mut cfg, &a.vot)?;
    let days = inputs::demand_days(&mut cfg, &a.demand, &net, &template)?;
    let observed = inputs::observed_flows(&mut cfg, &a.observed, &net)?;
    let tolls = inputs::tolls(&mut cfg, a.tolls.as_deref(), &net, &template)?;
    a.solver.record(&mut cfg, EQUILIBRIUM_TOL);
    let opts: SolverOptions = a.solver.options(EQUILIBRIUM_TOL);

    let grid = match &a.grid_values {
        Some(v) => {
            cfg.option("grid_values", v);
            VotGrid::from_values(template.len(), v)?
        }
        None => {
            cfg.option("grid", [a.grid_min, a.grid_max, a.grid_step]);
            VotGrid::uniform(template.len(), a.grid_min, a.grid_max, a.grid_step)?
        }
    };

    let mut obs = Vec::new();
    for d in &days {
        let Some(day) = &d.day else {
            bail!("{} has no day column; VOT estimation matches demand to observed days", a.demand.display());
        };
        let Some(flows) = observed.get(day) else {
            bail!("no observed flows for day `{day}` in {}", a.observed.display());
        };
        obs.push(DayObservation {
            day: day.clone(),
            net: &net,
            demand: d.demand.clone(),
            observed: flows.clone(),
        });
    }
    info!("searching {} candidates over {} days", grid.len(), obs.len());
    let est = run_vot_search(&obs, &template, &tolls, &grid, &opts).context("VOT search")?;
    let fitted = template.with_vots(&est.best_vots)?;

    let mut out = OutDir::create(&a.out, cfg.provenance())?;
    out.csv("vot.csv", |buf| Ok(write_vot_csv(buf, &fitted)?))?;
    out.csv("vot_search.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        let mut header: Vec<String> = template.types().iter().map(|t| t.label.clone()).collect();
        header.extend(["error".into(), "failure".into()]);
        w.write_record(&header)?;
        for r in &est.results {
            let mut row: Vec<String> = r.candidate.iter().map(f64::to_string).collect();
            row.push(r.error.map(|e| e.to_string()).unwrap_or_default());
            row.push(r.failure.clone().unwrap_or_default());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    })?;
    out.json(
        "vot_estimate.json",
        &VotSummary {
            type_labels: template.types().iter().map(|t| t.label.clone()).collect(),
            best: &est.best,
            best_vots: &est.best_vots,
            best_error: est.best_error,
            floored: est.floored,
            candidates: est.results.len(),
            failures: est.failures().count(),
            days: obs.iter().map(|d| d.day.clone()).collect(),
        },
    )?;
    println!("best VOT {:?} (error {:.3e})", est.best, est.best_error);
    finish(&out);
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Tolls CSV; none means zero tolls.
    #[arg(long)]
    tolls: Option<PathBuf>,
    #[arg(long, default_value_t = equitoll::toll_design::DEFAULT_LAMBDA)]
    lambda: f64,
    /// Travel-cost thresholds in minutes.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_THRESHOLDS_MIN)]
    thresholds: Vec<f64>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: PathBuf,
}

pub fn evaluate(a: &EvaluateArgs) -> Result<()> {
    let mut cfg = RunConfig::new("evaluate");
    let (_, net, vot, demand) = model(&mut cfg, &a.model)?;
    let tolls = inputs::tolls(&mut cfg, a.tolls.as_deref(), &net, &vot)?;
    cfg.option("lambda", a.lambda);
    cfg.option("thresholds", &a.thresholds);
    a.solver.record(&mut cfg, DESIGN_TOL);
    let ec = EvalConfig {
        lambda: a.lambda,
        thresholds_min: a.thresholds.clone(),
        solver: a.solver.options(DESIGN_TOL),
    };
    let report = run_evaluation(&net, &demand, &vot, &tolls, &ec).context("evaluation")?;

    let mut out = OutDir::create(&a.out, cfg.provenance())?;
    out.json("metrics.json", &report)?;
    out.csv("type_costs.csv", |buf| Ok(report.write_type_costs_csv(buf)?))?;
    out.csv("thresholds.csv", |buf| Ok(report.write_thresholds_csv(buf)?))?;
    for (name, m) in [("design-time", &report.design_time), ("realized", &report.realized)] {
        println!(
            "{name}: avg {:.4} min, equity {:.6}, welfare {:.6}",
            m.avg_travel_time_min, m.equity, m.welfare
        );
    }
    println!("revenue {:.6}, PoA {:.6}", report.revenue, report.poa.poa);
    finish(&out);
    Ok(())
}

// ---------------------------------------------------------------------------
// pareto
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct ParetoArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Number of weight samples.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Schemes evaluated per sample.
    #[arg(long, value_delimiter = ',', value_parser = parse_scheme, default_value = "hom,het")]
    schemes: Vec<Scheme>,
    #[command(flatten)]
    knobs: DesignKnobs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: PathBuf,
}

pub fn pareto(a: &ParetoArgs) -> Result<()> {
    let mut cfg = RunConfig::new("pareto");
    let (_, net, vot, demand) = model(&mut cfg, &a.model)?;
    let support = inputs::support(&mut cfg, a.knobs.support.as_deref(), &net)?;
    cfg.option("samples", a.samples);
    cfg.option("seed", a.seed);
    cfg.option("schemes", &a.schemes);
    cfg.option("lambda", a.knobs.lambda);
    a.solver.record(&mut cfg, DESIGN_TOL);
    let pc = ParetoConfig {
        lambda: a.knobs.lambda,
        schemes: a.schemes.clone(),
        support,
        solver: a.solver.options(DESIGN_TOL),
    };
    let front = pareto_front(&net, &demand, &vot, &pc, a.samples, a.seed).context("pareto")?;

    let mut out = OutDir::create(&a.out, cfg.provenance())?;
    out.csv("pareto.csv", |buf| Ok(front.write_csv(buf)?))?;
    out.json("pareto.json", &front)?;
    let kept = front.points.iter().filter(|p| !p.dominated).count();
    println!(
        "{} points, {kept} non-dominated, {} failed samples",
        front.points.len(),
        front.failures.len()
    );
    finish(&out);
    Ok(())
}
