//! Parameter estimation from observed data.
//!
//! * Latency: hourly edge travel times and flows from loop-sensor records,
//!   aggregated per day, then a BPR fit (`a` from night-time travel times,
//!   `b` by one-parameter least squares).
//! * Demand: mobile-device counts between cells, corrected for sampling
//!   bias, mapped onto OD pairs, split by type with driving-population
//!   tables and rescaled per day by total observed flow.
//! * Value of time: grid search for the VOT vector whose equilibria best
//!   reproduce the observed edge flows.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{solve_equilibrium, SolverOptions};
use crate::error::{Error, Result};
use crate::formats::read_rows;
use crate::network::{DemandMatrix, Network, TollScheme, VotProfile};

/// Rush-hour slots 6am to noon.
pub const DEFAULT_RUSH_HOURS: [u32; 6] = [6, 7, 8, 9, 10, 11];
pub const DEFAULT_NIGHT_HOUR: u32 = 3;
/// Grid VOTs of zero are replaced by this value (dollars per hour).
pub const VOT_FLOOR: f64 = 1.0;

// ---------------------------------------------------------------------------
// Sensors
// ---------------------------------------------------------------------------

/// One hourly reading of one sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorRecord {
    pub edge: String,
    /// Position of the sensor along the edge, 0-based or 1-based.
    pub sensor: u32,
    pub day: String,
    pub hour: u32,
    pub speed_mph: f64,
    pub flow_vph: f64,
    /// Distance to the next sensor; ignored for the last sensor of an edge.
    #[serde(default)]
    pub dist_next_miles: Option<f64>,
}

pub fn read_sensor_csv<R: Read>(reader: R) -> Result<Vec<SensorRecord>> {
    read_rows(reader)
}

/// Travel time and flow of one edge in one hour of one day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyObservation {
    pub edge: String,
    pub day: String,
    pub hour: u32,
    /// Hours.
    pub time: f64,
    /// Vehicles per hour.
    pub flow: f64,
}

/// Daily aggregate of one edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDayStat {
    pub edge: String,
    pub day: String,
    /// Flow-weighted mean of hourly travel times.
    pub time: f64,
    /// Mean of hourly flows.
    pub flow: f64,
    pub hours: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    /// Records with a non-positive speed, negative flow, or bad distance.
    pub rejected_records: usize,
    /// Readings that repeat an (edge, sensor, day, hour) already seen.
    pub duplicate_records: usize,
    /// (edge, day, hour) tuples dropped because a sensor reading was
    /// missing.
    pub incomplete_tuples: usize,
    /// Rejected (edge, day, hour) tuples, for inspection.
    pub dropped: Vec<(String, String, u32)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDayStats {
    pub daily: Vec<EdgeDayStat>,
    pub hourly: Vec<HourlyObservation>,
    pub quality: QualityReport,
}

impl EdgeDayStats {
    /// Total observed flow per day.
    pub fn daily_totals(&self) -> BTreeMap<String, f64> {
        let mut out: BTreeMap<String, f64> = BTreeMap::new();
        for s in &self.daily {
            *out.entry(s.day.clone()).or_default() += s.flow;
        }
        out
    }

    /// Observed daily flows laid out on the network's edges; edges without
    /// sensor data are `None`.
    pub fn observed_flows(&self, net: &Network) -> Result<BTreeMap<String, Vec<Option<f64>>>> {
        let mut out: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
        for s in &self.daily {
            let e = net
                .edge_index(&s.edge)
                .ok_or_else(|| Error::structural(format!("sensor edge `{}` not in network", s.edge)))?;
            out.entry(s.day.clone())
                .or_insert_with(|| vec![None; net.num_edges()])[e] = Some(s.flow);
        }
        Ok(out)
    }
}

fn record_ok(r: &SensorRecord) -> bool {
    r.speed_mph.is_finite()
        && r.speed_mph > 0.0
        && r.flow_vph.is_finite()
        && r.flow_vph >= 0.0
        && r.dist_next_miles.is_none_or(|d| d.is_finite() && d >= 0.0)
}

/// Hourly travel time and flow for every complete (edge, day, hour) tuple.
///
/// The sensors of an edge are all sensor indices that appear for it. A
/// tuple is complete when every one of them reported; the last sensor only
/// closes the final segment, so its speed, flow and distance are unused.
pub fn hourly_observations(
    records: &[SensorRecord],
) -> Result<(Vec<HourlyObservation>, QualityReport)> {
    let mut quality = QualityReport::default();
    let mut sensors: BTreeMap<&str, BTreeSet<u32>> = BTreeMap::new();
    let mut readings: BTreeMap<(&str, &str, u32), BTreeMap<u32, &SensorRecord>> = BTreeMap::new();
    for r in records {
        sensors.entry(&r.edge).or_default().insert(r.sensor);
        if !record_ok(r) {
            quality.rejected_records += 1;
            continue;
        }
        let slot = readings.entry((&r.edge, &r.day, r.hour)).or_default();
        if slot.insert(r.sensor, r).is_some() {
            quality.duplicate_records += 1;
        }
    }
    for (edge, s) in &sensors {
        if s.len() < 2 {
            return Err(Error::invalid(format!(
                "edge `{edge}` has {} sensor(s); travel times need at least 2",
                s.len()
            )));
        }
    }
    let mut out = Vec::new();
    for ((edge, day, hour), slot) in readings {
        let all = &sensors[edge];
        let last = *all.iter().next_back().expect("checked above");
        let mut time = 0.0;
        let mut weighted = 0.0;
        let mut dist = 0.0;
        let mut complete = slot.len() == all.len();
        if complete {
            for (&s, r) in &slot {
                if s == last {
                    continue;
                }
                match r.dist_next_miles {
                    Some(d) if d > 0.0 => {
                        time += d / r.speed_mph;
                        weighted += d * r.flow_vph;
                        dist += d;
                    }
                    _ => {
                        complete = false;
                        break;
                    }
                }
            }
        }
        if !complete {
            quality.incomplete_tuples += 1;
            quality.dropped.push((edge.to_string(), day.to_string(), hour));
            continue;
        }
        out.push(HourlyObservation {
            edge: edge.to_string(),
            day: day.to_string(),
            hour,
            time,
            flow: weighted / dist,
        });
    }
    Ok((out, quality))
}

/// Daily edge statistics over the given hours. When an edge carries no flow
/// in any of them, the daily time is the plain mean of hourly times.
pub fn edge_daily_stats(records: &[SensorRecord], hours: &BTreeSet<u32>) -> Result<EdgeDayStats> {
    let (hourly, quality) = hourly_observations(records)?;
    let hourly: Vec<HourlyObservation> =
        hourly.into_iter().filter(|h| hours.contains(&h.hour)).collect();
    let daily = aggregate_days(&hourly);
    Ok(EdgeDayStats { daily, hourly, quality })
}

pub fn aggregate_days(hourly: &[HourlyObservation]) -> Vec<EdgeDayStat> {
    let mut groups: BTreeMap<(&str, &str), Vec<&HourlyObservation>> = BTreeMap::new();
    for h in hourly {
        groups.entry((&h.edge, &h.day)).or_default().push(h);
    }
    groups
        .into_iter()
        .map(|((edge, day), hs)| {
            let n = hs.len() as f64;
            let flow_sum: f64 = hs.iter().map(|h| h.flow).sum();
            let time = if flow_sum > 0.0 {
                hs.iter().map(|h| h.flow * h.time).sum::<f64>() / flow_sum
            } else {
                hs.iter().map(|h| h.time).sum::<f64>() / n
            };
            EdgeDayStat {
                edge: edge.to_string(),
                day: day.to_string(),
                time,
                flow: flow_sum / n,
                hours: hs.len(),
            }
        })
        .collect()
}

/// Free-flow time per edge: the mean night-hour travel time over days.
/// Every edge that appears in `records` must have night data.
pub fn fit_free_flow(records: &[SensorRecord], night_hour: u32) -> Result<BTreeMap<String, f64>> {
    let (hourly, _) = hourly_observations(records)?;
    let mut sums: BTreeMap<&str, (f64, usize)> =
        records.iter().map(|r| (r.edge.as_str(), (0.0, 0))).collect();
    for h in hourly.iter().filter(|h| h.hour == night_hour) {
        let s = sums.get_mut(h.edge.as_str()).expect("edge seen in records");
        s.0 += h.time;
        s.1 += 1;
    }
    sums.into_iter()
        .map(|(edge, (sum, n))| {
            if n == 0 {
                Err(Error::invalid(format!(
                    "edge `{edge}` has no complete reading at hour {night_hour}"
                )))
            } else {
                Ok((edge.to_string(), sum / n as f64))
            }
        })
        .collect()
}

/// Least-squares slope of `time = a + b·flow⁴` with `a` fixed, clamped at 0.
pub fn fit_bpr_slope(observations: &[(f64, f64)], a: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for &(time, flow) in observations {
        let w4 = flow.powi(4);
        num += (time - a) * w4;
        den += w4 * w4;
    }
    if den == 0.0 {
        warn!("all observed flows are zero; slope set to 0");
        return 0.0;
    }
    (num / den).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BprFit {
    pub edge: String,
    pub a: f64,
    pub b: f64,
    pub days: usize,
}

/// Fits every edge that has both daily statistics and a free-flow time.
pub fn fit_bpr(stats: &EdgeDayStats, free_flow: &BTreeMap<String, f64>) -> Result<Vec<BprFit>> {
    let mut obs: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for s in &stats.daily {
        obs.entry(&s.edge).or_default().push((s.time, s.flow));
    }
    obs.into_iter()
        .map(|(edge, pts)| {
            let a = *free_flow
                .get(edge)
                .ok_or_else(|| Error::invalid(format!("edge `{edge}` has no free-flow time")))?;
            Ok(BprFit {
                edge: edge.to_string(),
                a,
                b: fit_bpr_slope(&pts, a),
                days: pts.len(),
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Demand
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCount {
    pub origin_cell: String,
    pub dest_cell: String,
    pub count: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResidents {
    pub cell: String,
    pub residents: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivingPopulation {
    pub node: String,
    #[serde(rename = "type")]
    pub type_label: String,
    pub driving_pop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellNode {
    pub cell: String,
    pub node: String,
}

/// Inputs of the demand pipeline.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MobilityTable {
    pub counts: Vec<CellCount>,
    pub residents: Vec<CellResidents>,
    pub driving: Vec<DrivingPopulation>,
    pub cell_nodes: Vec<CellNode>,
    /// Number of rush-hour slots.
    pub hours: usize,
}

impl MobilityTable {
    pub fn from_readers<A: Read, B: Read, C: Read, D: Read>(
        counts: A,
        residents: B,
        driving: C,
        cell_nodes: D,
        hours: usize,
    ) -> Result<Self> {
        Ok(MobilityTable {
            counts: read_rows(counts)?,
            residents: read_rows(residents)?,
            driving: read_rows(driving)?,
            cell_nodes: read_rows(cell_nodes)?,
            hours,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandAudit {
    /// Bias-corrected counts, same order as the input counts.
    pub corrected: Vec<CellCount>,
    /// Cells whose outgoing counts sum to zero; left out of the correction.
    pub excluded_cells: Vec<String>,
    /// Corrected count per OD pair of the network.
    pub od_counts: Vec<f64>,
    /// Corrected counts between node pairs that are not OD pairs.
    pub unmatched: f64,
    /// Daily scale factors.
    pub day_factors: Vec<(String, f64)>,
    pub mean_daily_flow: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemandCalibration {
    /// Demand of a representative rush hour.
    pub base: DemandMatrix,
    /// `(day, demand)` sorted by day; empty without daily totals.
    pub daily: Vec<(String, DemandMatrix)>,
    pub audit: DemandAudit,
}

/// Sampling-bias correction:
/// `Ñ^{cc'} = N^{cc'} · (R^c / Σ R) · (Σ N / Σ_{c'} N^{cc'})`.
pub fn correct_sampling_bias(
    counts: &[CellCount],
    residents: &[CellResidents],
) -> Result<(Vec<CellCount>, Vec<String>)> {
    let mut r: BTreeMap<&str, f64> = BTreeMap::new();
    for c in residents {
        if !(c.residents.is_finite() && c.residents >= 0.0) {
            return Err(Error::invalid(format!("cell `{}` has {} residents", c.cell, c.residents)));
        }
        if r.insert(&c.cell, c.residents).is_some() {
            return Err(Error::invalid(format!("cell `{}` listed twice in residents", c.cell)));
        }
    }
    let r_total: f64 = r.values().sum();
    let mut row: BTreeMap<&str, f64> = BTreeMap::new();
    let mut total = 0.0;
    for c in counts {
        if !(c.count.is_finite() && c.count >= 0.0) {
            return Err(Error::invalid(format!(
                "count {}->{} is {}",
                c.origin_cell, c.dest_cell, c.count
            )));
        }
        *row.entry(&c.origin_cell).or_default() += c.count;
        total += c.count;
    }
    if r_total <= 0.0 && total > 0.0 {
        return Err(Error::invalid("resident counts sum to zero"));
    }
    let excluded: Vec<String> = row
        .iter()
        .filter(|(_, &s)| s <= 0.0)
        .map(|(c, _)| c.to_string())
        .collect();
    let mut out = Vec::with_capacity(counts.len());
    for c in counts {
        let s = row[c.origin_cell.as_str()];
        let count = if s > 0.0 {
            let rc = *r.get(c.origin_cell.as_str()).ok_or_else(|| {
                Error::invalid(format!("cell `{}` has no resident count", c.origin_cell))
            })?;
            c.count * (rc / r_total) * (total / s)
        } else {
            0.0
        };
        out.push(CellCount { count, ..c.clone() });
    }
    Ok((out, excluded))
}

/// Runs the three demand steps. `daily_totals` maps each day to its total
/// observed edge flow; pass an empty map to skip the daily scaling.
pub fn calibrate_demand(
    net: &Network,
    vot: &VotProfile,
    mobility: &MobilityTable,
    daily_totals: &BTreeMap<String, f64>,
) -> Result<DemandCalibration> {
    if mobility.hours == 0 {
        return Err(Error::invalid("number of rush-hour slots must be positive"));
    }
    let (corrected, excluded_cells) = correct_sampling_bias(&mobility.counts, &mobility.residents)?;

    let mut node_of: BTreeMap<&str, &str> = BTreeMap::new();
    for m in &mobility.cell_nodes {
        if net.node_index(&m.node).is_none() {
            return Err(Error::structural(format!(
                "cell `{}` maps to unknown node `{}`",
                m.cell, m.node
            )));
        }
        if node_of.insert(&m.cell, &m.node).is_some() {
            return Err(Error::invalid(format!("cell `{}` mapped twice", m.cell)));
        }
    }
    let node = |cell: &str| {
        node_of
            .get(cell)
            .copied()
            .ok_or_else(|| Error::invalid(format!("cell `{cell}` has no node mapping")))
    };
    let mut od_counts = vec![0.0; net.num_od_pairs()];
    let mut unmatched = 0.0;
    for c in &corrected {
        let (o, d) = (node(&c.origin_cell)?, node(&c.dest_cell)?);
        match net.od_index(o, d) {
            Some(k) => od_counts[k] += c.count,
            None => unmatched += c.count,
        }
    }

    let mut driving: BTreeMap<(&str, usize), f64> = BTreeMap::new();
    for a in &mobility.driving {
        if net.node_index(&a.node).is_none() {
            return Err(Error::structural(format!("unknown node `{}`", a.node)));
        }
        let i = vot
            .index_of(&a.type_label)
            .ok_or_else(|| Error::structural(format!("unknown type `{}`", a.type_label)))?;
        if !(a.driving_pop.is_finite() && a.driving_pop >= 0.0) {
            return Err(Error::invalid(format!(
                "driving population {} at `{}` must be >= 0",
                a.driving_pop, a.node
            )));
        }
        if driving.insert((&a.node, i), a.driving_pop).is_some() {
            return Err(Error::invalid(format!(
                "driving population for `{}` type `{}` listed twice",
                a.node, a.type_label
            )));
        }
    }
    let mut origin_total: BTreeMap<&str, f64> = BTreeMap::new();
    for (k, od) in net.od_pairs().iter().enumerate() {
        *origin_total.entry(net.nodes()[od.origin].as_str()).or_default() += od_counts[k];
    }
    let hours = mobility.hours as f64;
    let mut base = DemandMatrix::zeros(vot.len(), net.num_od_pairs());
    for k in 0..net.num_od_pairs() {
        let (o, d) = net.od_label(k);
        let share_total = origin_total[o];
        for i in 0..vot.len() {
            let pop = driving.get(&(o, i)).copied().unwrap_or(0.0);
            if pop == 0.0 {
                continue;
            }
            if share_total <= 0.0 {
                return Err(Error::invalid(format!(
                    "origin `{o}` has driving population for type `{}` but no trips to split it over (od {o}->{d})",
                    vot.label(i)
                )));
            }
            base.set(i, k, od_counts[k] / share_total * pop / hours)?;
        }
    }

    let (daily, day_factors, mean) = if daily_totals.is_empty() {
        (Vec::new(), Vec::new(), None)
    } else {
        let mean = daily_totals.values().sum::<f64>() / daily_totals.len() as f64;
        if !(mean.is_finite() && mean > 0.0) {
            return Err(Error::invalid("mean daily flow must be positive"));
        }
        let mut daily = Vec::new();
        let mut factors = Vec::new();
        for (day, total) in daily_totals {
            let f = total / mean;
            daily.push((day.clone(), base.scaled(f)?));
            factors.push((day.clone(), f));
        }
        (daily, factors, Some(mean))
    };

    Ok(DemandCalibration {
        base,
        daily,
        audit: DemandAudit {
            corrected,
            excluded_cells,
            od_counts,
            unmatched,
            day_factors,
            mean_daily_flow: mean,
        },
    })
}

// ---------------------------------------------------------------------------
// Value of time
// ---------------------------------------------------------------------------

/// Candidate VOT vectors, one entry per type in profile order. Types are
/// expected to be listed from lowest to highest VOT; grids built here keep
/// only nondecreasing vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VotGrid {
    candidates: Vec<Vec<f64>>,
}

impl VotGrid {
    /// Every nondecreasing vector over `min, min+step, …, max`.
    pub fn uniform(n_types: usize, min: f64, max: f64, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::invalid("grid step must be positive"));
        }
        if !(min.is_finite() && max.is_finite() && min >= 0.0 && max >= min) {
            return Err(Error::invalid("grid bounds must satisfy 0 <= min <= max"));
        }
        let n = ((max - min) / step + 1e-9).floor() as usize;
        let values: Vec<f64> = (0..=n).map(|j| min + j as f64 * step).collect();
        Self::from_values(n_types, &values)
    }

    /// Every nondecreasing vector over the given values.
    pub fn from_values(n_types: usize, values: &[f64]) -> Result<Self> {
        let mut vals = values.to_vec();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(n_types);
        fn rec(vals: &[f64], from: usize, n: usize, cur: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
            if cur.len() == n {
                out.push(cur.clone());
                return;
            }
            for j in from..vals.len() {
                cur.push(vals[j]);
                rec(vals, j, n, cur, out);
                cur.pop();
            }
        }
        rec(&vals, 0, n_types, &mut cur, &mut out);
        Self::from_candidates(out)
    }

    pub fn from_candidates(candidates: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = candidates.first() else {
            return Err(Error::invalid("VOT grid is empty"));
        };
        let n = first.len();
        for c in &candidates {
            if c.len() != n || c.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::invalid(format!("bad VOT candidate {c:?}")));
            }
        }
        Ok(VotGrid { candidates })
    }

    pub fn candidates(&self) -> &[Vec<f64>] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// Observations of one day.
#[derive(Debug, Clone)]
pub struct DayObservation<'a> {
    pub day: String,
    pub net: &'a Network,
    pub demand: DemandMatrix,
    /// Observed daily flow per edge; `None` for edges without sensors.
    pub observed: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    /// Grid values as listed.
    pub candidate: Vec<f64>,
    /// VOTs used in the equilibria (after the floor).
    pub vots: Vec<f64>,
    pub error: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VotEstimate {
    pub best: Vec<f64>,
    pub best_vots: Vec<f64>,
    pub best_error: f64,
    /// True when a grid value below the floor was replaced.
    pub floored: bool,
    pub results: Vec<CandidateResult>,
}

impl VotEstimate {
    pub fn failures(&self) -> impl Iterator<Item = &CandidateResult> {
        self.results.iter().filter(|r| r.failure.is_some())
    }
}

/// Sum over days and observed edges of squared flow errors.
pub fn flow_error(
    days: &[DayObservation<'_>],
    vot: &VotProfile,
    tolls: &TollScheme,
    opts: &SolverOptions,
) -> Result<f64> {
    let mut err = 0.0;
    for d in days {
        d.net.check_edge_vector(&d.observed, "observed flow vector")?;
        let eq = solve_equilibrium(d.net, &d.demand, vot, tolls, opts)?;
        for (obs, w) in d.observed.iter().zip(&eq.edge_flows.total) {
            if let Some(o) = obs {
                err += (o - w).powi(2);
            }
        }
    }
    Ok(err)
}

/// Grid search for the VOT vector minimizing [`flow_error`]. Ties go to
/// the lexicographically smallest candidate; candidates whose equilibria
/// fail are skipped and reported.
pub fn estimate_vot(
    days: &[DayObservation<'_>],
    template: &VotProfile,
    tolls: &TollScheme,
    grid: &VotGrid,
    opts: &SolverOptions,
) -> Result<VotEstimate> {
    if days.is_empty() {
        return Err(Error::invalid("VOT estimation needs at least one day"));
    }
    if grid.candidates[0].len() != template.len() {
        return Err(Error::invalid(format!(
            "grid candidates have {} entries but there are {} types",
            grid.candidates[0].len(),
            template.len()
        )));
    }
    let results: Vec<CandidateResult> = grid
        .candidates
        .par_iter()
        .map(|c| {
            let vots: Vec<f64> = c.iter().map(|&v| v.max(VOT_FLOOR)).collect();
            let outcome = template
                .with_vots(&vots)
                .and_then(|p| flow_error(days, &p, tolls, opts));
            match outcome {
                Ok(e) => CandidateResult {
                    candidate: c.clone(),
                    vots,
                    error: Some(e),
                    failure: None,
                },
                Err(e) => CandidateResult {
                    candidate: c.clone(),
                    vots,
                    error: None,
                    failure: Some(e.to_string()),
                },
            }
        })
        .collect();
    let floored = grid.candidates.iter().flatten().any(|&v| v < VOT_FLOOR);
    if floored {
        warn!("VOT grid values below {VOT_FLOOR} were raised to {VOT_FLOOR}");
    }
    for r in results.iter().filter(|r| r.failure.is_some()) {
        warn!("VOT candidate {:?} skipped: {}", r.candidate, r.failure.as_deref().unwrap_or(""));
    }
    let best = results
        .iter()
        .filter_map(|r| r.error.map(|e| (e, r)))
        .min_by(|(ea, a), (eb, b)| {
            ea.total_cmp(eb).then_with(|| lex_cmp(&a.candidate, &b.candidate))
        })
        .ok_or_else(|| Error::invalid("every VOT candidate failed"))?;
    Ok(VotEstimate {
        best: best.1.candidate.clone(),
        best_vots: best.1.vots.clone(),
        best_error: best.0,
        floored,
        results,
    })
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}
