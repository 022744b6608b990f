//! Routing-game data model: graph, routes, traveler types, demands, tolls
//! and the flow/cost arithmetic shared by every solver.
//!
//! Time is measured in hours and money in dollars throughout. Edge latency
//! follows the BPR form `a + b * w^4`.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hop limit used when a network file does not list routes explicitly.
pub const DEFAULT_MAX_HOPS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    /// Free-flow travel time `a` in hours.
    pub free_flow_time: f64,
    /// Congestion slope `b` in hours per flow^4.
    pub slope: f64,
    /// Gas cost in dollars.
    pub gas_cost: f64,
    pub tollable: bool,
}

impl Edge {
    #[inline]
    pub fn latency(&self, flow: f64) -> f64 {
        self.free_flow_time + self.slope * pow4(flow)
    }

    #[inline]
    pub fn latency_derivative(&self, flow: f64) -> f64 {
        4.0 * self.slope * flow * flow * flow
    }

    /// `∫_0^w ℓ(s) ds`.
    #[inline]
    pub fn latency_integral(&self, flow: f64) -> f64 {
        self.free_flow_time * flow + self.slope * pow4(flow) * flow / 5.0
    }

    /// Derivative of `w * ℓ(w)`, the marginal social cost.
    #[inline]
    pub fn marginal_cost(&self, flow: f64) -> f64 {
        self.free_flow_time + 5.0 * self.slope * pow4(flow)
    }

    #[inline]
    pub fn marginal_cost_derivative(&self, flow: f64) -> f64 {
        20.0 * self.slope * flow * flow * flow
    }
}

#[inline]
pub(crate) fn pow4(x: f64) -> f64 {
    let x2 = x * x;
    x2 * x2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OdPair {
    pub origin: usize,
    pub destination: usize,
}

/// An ordered sequence of edge indices forming a simple directed path.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Route {
    edges: Vec<usize>,
}

impl Route {
    pub fn new(edges: Vec<usize>) -> Self {
        Route { edges }
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, edge: usize) -> bool {
        self.edges.contains(&edge)
    }
}

// ---------------------------------------------------------------------------
// File schema
// ---------------------------------------------------------------------------

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub id: String,
    pub tail: String,
    pub head: String,
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub gas: f64,
    #[serde(default = "default_true")]
    pub tollable: bool,
}

impl EdgeSpec {
    pub fn new(id: &str, tail: &str, head: &str, a: f64, b: f64) -> Self {
        EdgeSpec {
            id: id.to_string(),
            tail: tail.to_string(),
            head: head.to_string(),
            a,
            b,
            gas: 0.0,
            tollable: true,
        }
    }

    pub fn gas(mut self, gas: f64) -> Self {
        self.gas = gas;
        self
    }

    pub fn tollable(mut self, tollable: bool) -> Self {
        self.tollable = tollable;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OdSpec {
    pub origin: String,
    pub destination: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteSpec {
    pub origin: String,
    pub destination: String,
    pub edges: Vec<String>,
}

/// Serializable description of a network. `build` validates it and, for OD
/// pairs without explicit routes, enumerates simple paths up to `max_hops`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    pub od_pairs: Vec<OdSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub routes: Option<Vec<RouteSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_hops: Option<usize>,
}

impl NetworkSpec {
    pub fn new<S: AsRef<str>>(nodes: &[S]) -> Self {
        NetworkSpec {
            nodes: nodes.iter().map(|s| s.as_ref().to_string()).collect(),
            edges: Vec::new(),
            od_pairs: Vec::new(),
            routes: None,
            max_hops: None,
        }
    }

    pub fn edge(mut self, edge: EdgeSpec) -> Self {
        self.edges.push(edge);
        self
    }

    pub fn od(mut self, origin: &str, destination: &str) -> Self {
        self.od_pairs.push(OdSpec {
            origin: origin.to_string(),
            destination: destination.to_string(),
        });
        self
    }

    pub fn route(mut self, origin: &str, destination: &str, edges: &[&str]) -> Self {
        self.routes.get_or_insert_with(Vec::new).push(RouteSpec {
            origin: origin.to_string(),
            destination: destination.to_string(),
            edges: edges.iter().map(|s| s.to_string()).collect(),
        });
        self
    }

    pub fn max_hops(mut self, hops: usize) -> Self {
        self.max_hops = Some(hops);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<Network> {
        Network::from_spec(self)
    }
}

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<String>,
    node_index: HashMap<String, usize>,
    edges: Vec<Edge>,
    edge_index: HashMap<String, usize>,
    od_pairs: Vec<OdPair>,
    routes: Vec<Vec<Route>>,
    route_offsets: Vec<usize>,
    route_count: usize,
}

impl Network {
    pub fn from_spec(spec: &NetworkSpec) -> Result<Self> {
        let mut node_index = HashMap::new();
        for (i, n) in spec.nodes.iter().enumerate() {
            if node_index.insert(n.clone(), i).is_some() {
                return Err(Error::structural(format!("duplicate node `{n}`")));
            }
        }
        let lookup_node = |name: &str| {
            node_index
                .get(name)
                .copied()
                .ok_or_else(|| Error::structural(format!("unknown node `{name}`")))
        };

        let mut edges = Vec::with_capacity(spec.edges.len());
        let mut edge_index = HashMap::new();
        for e in &spec.edges {
            let tail = lookup_node(&e.tail)?;
            let head = lookup_node(&e.head)?;
            if tail == head {
                return Err(Error::structural(format!("edge `{}` is a self-loop", e.id)));
            }
            for (name, v) in [("a", e.a), ("b", e.b), ("gas", e.gas)] {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::invalid(format!(
                        "edge `{}`: parameter {name} = {v} must be finite and >= 0",
                        e.id
                    )));
                }
            }
            if edge_index.insert(e.id.clone(), edges.len()).is_some() {
                return Err(Error::structural(format!("duplicate edge id `{}`", e.id)));
            }
            edges.push(Edge {
                id: e.id.clone(),
                tail,
                head,
                free_flow_time: e.a,
                slope: e.b,
                gas_cost: e.gas,
                tollable: e.tollable,
            });
        }

        let mut od_pairs = Vec::with_capacity(spec.od_pairs.len());
        let mut seen = HashSet::new();
        for od in &spec.od_pairs {
            let pair = OdPair {
                origin: lookup_node(&od.origin)?,
                destination: lookup_node(&od.destination)?,
            };
            if pair.origin == pair.destination {
                return Err(Error::structural(format!(
                    "od pair {}->{} has identical endpoints",
                    od.origin, od.destination
                )));
            }
            if !seen.insert(pair) {
                return Err(Error::structural(format!(
                    "duplicate od pair {}->{}",
                    od.origin, od.destination
                )));
            }
            od_pairs.push(pair);
        }

        let mut net = Network {
            nodes: spec.nodes.clone(),
            node_index,
            edges,
            edge_index,
            od_pairs,
            routes: Vec::new(),
            route_offsets: Vec::new(),
            route_count: 0,
        };

        let mut explicit: Vec<Vec<Route>> = vec![Vec::new(); net.od_pairs.len()];
        for r in spec.routes.iter().flatten() {
            let k = net.od_index(&r.origin, &r.destination).ok_or_else(|| {
                Error::structural(format!(
                    "route for undeclared od pair {}->{}",
                    r.origin, r.destination
                ))
            })?;
            let edges = r
                .edges
                .iter()
                .map(|id| {
                    net.edge_index
                        .get(id)
                        .copied()
                        .ok_or_else(|| Error::structural(format!("route uses unknown edge `{id}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            let route = Route::new(edges);
            net.check_simple_path(&route, net.od_pairs[k])?;
            if explicit[k].contains(&route) {
                return Err(Error::structural(format!(
                    "duplicate route for od pair {}->{}",
                    r.origin, r.destination
                )));
            }
            explicit[k].push(route);
        }

        let max_hops = spec.max_hops.unwrap_or(DEFAULT_MAX_HOPS);
        let mut routes = Vec::with_capacity(net.od_pairs.len());
        for (k, given) in explicit.into_iter().enumerate() {
            if given.is_empty() {
                routes.push(net.enumerate_routes(k, max_hops)?);
            } else {
                routes.push(given);
            }
        }
        net.set_routes(routes);
        Ok(net)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        NetworkSpec::from_json(text)?.build()
    }

    /// Serializable form with the route sets written out explicitly.
    pub fn to_spec(&self) -> NetworkSpec {
        NetworkSpec {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    id: e.id.clone(),
                    tail: self.nodes[e.tail].clone(),
                    head: self.nodes[e.head].clone(),
                    a: e.free_flow_time,
                    b: e.slope,
                    gas: e.gas_cost,
                    tollable: e.tollable,
                })
                .collect(),
            od_pairs: self
                .od_pairs
                .iter()
                .map(|od| OdSpec {
                    origin: self.nodes[od.origin].clone(),
                    destination: self.nodes[od.destination].clone(),
                })
                .collect(),
            routes: Some(
                self.od_pairs
                    .iter()
                    .zip(&self.routes)
                    .flat_map(|(od, rs)| {
                        rs.iter().map(move |r| RouteSpec {
                            origin: self.nodes[od.origin].clone(),
                            destination: self.nodes[od.destination].clone(),
                            edges: r.edges().iter().map(|&e| self.edges[e].id.clone()).collect(),
                        })
                    })
                    .collect(),
            ),
            max_hops: None,
        }
    }

    fn set_routes(&mut self, routes: Vec<Vec<Route>>) {
        let mut offsets = Vec::with_capacity(routes.len());
        let mut total = 0;
        for rs in &routes {
            offsets.push(total);
            total += rs.len();
        }
        self.routes = routes;
        self.route_offsets = offsets;
        self.route_count = total;
    }

    fn check_simple_path(&self, route: &Route, od: OdPair) -> Result<()> {
        let bad = |why: &str| {
            Err(Error::structural(format!(
                "route {:?} for {}->{} {why}",
                route.edges().iter().map(|&e| &self.edges[e].id).collect::<Vec<_>>(),
                self.nodes[od.origin],
                self.nodes[od.destination]
            )))
        };
        if route.is_empty() {
            return bad("is empty");
        }
        let mut at = od.origin;
        let mut visited = HashSet::from([at]);
        for &e in route.edges() {
            let edge = &self.edges[e];
            if edge.tail != at {
                return bad("is not a connected directed path");
            }
            at = edge.head;
            if !visited.insert(at) {
                return bad("repeats a node");
            }
        }
        if at != od.destination {
            return bad("does not end at the destination");
        }
        Ok(())
    }

    /// All simple directed paths for OD pair `od` with at most `max_hops`
    /// edges, sorted lexicographically by their edge-id sequence.
    pub fn enumerate_routes(&self, od: usize, max_hops: usize) -> Result<Vec<Route>> {
        let pair = *self
            .od_pairs
            .get(od)
            .ok_or_else(|| Error::structural(format!("od index {od} out of range")))?;
        enumerate_simple_paths(self, pair.origin, pair.destination, max_hops)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.node_index.get(name).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn od_pairs(&self) -> &[OdPair] {
        &self.od_pairs
    }

    pub fn num_od_pairs(&self) -> usize {
        self.od_pairs.len()
    }

    pub fn od_index(&self, origin: &str, destination: &str) -> Option<usize> {
        let o = self.node_index(origin)?;
        let d = self.node_index(destination)?;
        self.od_pairs
            .iter()
            .position(|p| p.origin == o && p.destination == d)
    }

    pub fn od_label(&self, k: usize) -> (&str, &str) {
        let od = self.od_pairs[k];
        (&self.nodes[od.origin], &self.nodes[od.destination])
    }

    pub fn routes(&self, od: usize) -> &[Route] {
        &self.routes[od]
    }

    /// Total number of routes across all OD pairs.
    pub fn route_count(&self) -> usize {
        self.route_count
    }

    pub fn route_label(&self, route: &Route) -> String {
        route
            .edges()
            .iter()
            .map(|&e| self.edges[e].id.as_str())
            .collect::<Vec<_>>()
            .join(">")
    }

    pub fn tollable_edges(&self) -> BTreeSet<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].tollable).collect()
    }

    pub fn total_gas(&self, route: &Route) -> f64 {
        route.edges().iter().map(|&e| self.edges[e].gas_cost).sum()
    }

    pub(crate) fn check_edge_vector<T>(&self, v: &[T], what: &str) -> Result<()> {
        if v.len() != self.edges.len() {
            return Err(Error::structural(format!(
                "{what} has length {} but the network has {} edges",
                v.len(),
                self.edges.len()
            )));
        }
        Ok(())
    }
}

fn enumerate_simple_paths(
    net: &Network,
    origin: usize,
    destination: usize,
    max_hops: usize,
) -> Result<Vec<Route>> {
    if max_hops == 0 {
        return Err(Error::invalid("max_hops must be >= 1"));
    }
    let n = net.nodes.len();
    if origin >= n || destination >= n {
        return Err(Error::structural("od endpoint not in graph"));
    }
    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in net.edges.iter().enumerate() {
        out_edges[e.tail].push(i);
    }
    for adj in &mut out_edges {
        adj.sort_by(|&x, &y| net.edges[x].id.cmp(&net.edges[y].id));
    }

    // Depth-first search over edges in id order yields paths in
    // lexicographic order of their edge-id sequences.
    let mut found = Vec::new();
    let mut on_path = vec![false; n];
    let mut path = Vec::new();
    on_path[origin] = true;
    dfs(
        net,
        &out_edges,
        origin,
        destination,
        max_hops,
        &mut on_path,
        &mut path,
        &mut found,
    );
    Ok(found)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    net: &Network,
    out_edges: &[Vec<usize>],
    at: usize,
    destination: usize,
    max_hops: usize,
    on_path: &mut [bool],
    path: &mut Vec<usize>,
    found: &mut Vec<Route>,
) {
    if path.len() == max_hops {
        return;
    }
    for &e in &out_edges[at] {
        let next = net.edges[e].head;
        if on_path[next] {
            continue;
        }
        path.push(e);
        if next == destination {
            found.push(Route::new(path.clone()));
        } else {
            on_path[next] = true;
            dfs(net, out_edges, next, destination, max_hops, on_path, path, found);
            on_path[next] = false;
        }
        path.pop();
    }
}

// ---------------------------------------------------------------------------
// Travelers
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TravelerType {
    pub label: String,
    /// Value of time in dollars per hour.
    pub vot: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<TravelerType>", into = "Vec<TravelerType>")]
pub struct VotProfile {
    types: Vec<TravelerType>,
}

impl VotProfile {
    pub fn new<S: AsRef<str>>(types: &[(S, f64)]) -> Result<Self> {
        Self::from_types(
            types
                .iter()
                .map(|(l, v)| TravelerType {
                    label: l.as_ref().to_string(),
                    vot: *v,
                })
                .collect(),
        )
    }

    pub fn from_types(types: Vec<TravelerType>) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::invalid("VOT profile needs at least one type"));
        }
        let mut labels = HashSet::new();
        for t in &types {
            if !(t.vot.is_finite() && t.vot > 0.0) {
                return Err(Error::invalid(format!(
                    "type `{}` has VOT {} (must be > 0)",
                    t.label, t.vot
                )));
            }
            if !labels.insert(t.label.as_str()) {
                return Err(Error::invalid(format!("duplicate type label `{}`", t.label)));
            }
        }
        Ok(VotProfile { types })
    }

    /// A single type with the given VOT.
    pub fn single(vot: f64) -> Result<Self> {
        Self::new(&[("all", vot)])
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn vot(&self, i: usize) -> f64 {
        self.types[i].vot
    }

    pub fn label(&self, i: usize) -> &str {
        &self.types[i].label
    }

    pub fn types(&self) -> &[TravelerType] {
        &self.types
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.types.iter().position(|t| t.label == label)
    }

    pub fn with_vots(&self, vots: &[f64]) -> Result<Self> {
        if vots.len() != self.types.len() {
            return Err(Error::invalid("VOT vector length does not match type count"));
        }
        Self::from_types(
            self.types
                .iter()
                .zip(vots)
                .map(|(t, &v)| TravelerType {
                    label: t.label.clone(),
                    vot: v,
                })
                .collect(),
        )
    }
}

impl TryFrom<Vec<TravelerType>> for VotProfile {
    type Error = Error;
    fn try_from(types: Vec<TravelerType>) -> Result<Self> {
        Self::from_types(types)
    }
}

impl From<VotProfile> for Vec<TravelerType> {
    fn from(p: VotProfile) -> Self {
        p.types
    }
}

/// Nonnegative demand per (type, OD pair), stored type-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandMatrix {
    n_types: usize,
    n_od: usize,
    values: Vec<f64>,
}

impl DemandMatrix {
    pub fn zeros(n_types: usize, n_od: usize) -> Self {
        DemandMatrix {
            n_types,
            n_od,
            values: vec![0.0; n_types * n_od],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_types = rows.len();
        let n_od = rows.first().map_or(0, Vec::len);
        let mut m = DemandMatrix::zeros(n_types, n_od);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_od {
                return Err(Error::structural("ragged demand rows"));
            }
            for (k, v) in row.into_iter().enumerate() {
                m.set(i, k, v)?;
            }
        }
        Ok(m)
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }

    pub fn n_od(&self) -> usize {
        self.n_od
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.n_od + k]
    }

    pub fn set(&mut self, i: usize, k: usize, v: f64) -> Result<()> {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::invalid(format!("demand {v} must be finite and >= 0")));
        }
        if i >= self.n_types || k >= self.n_od {
            return Err(Error::structural(format!("demand index ({i}, {k}) out of range")));
        }
        self.values[i * self.n_od + k] = v;
        Ok(())
    }

    /// `D^i`.
    pub fn type_total(&self, i: usize) -> f64 {
        (0..self.n_od).map(|k| self.get(i, k)).sum()
    }

    /// `Σ_i D^{ik}`.
    pub fn od_total(&self, k: usize) -> f64 {
        (0..self.n_types).map(|i| self.get(i, k)).sum()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(Error::invalid("demand scale must be finite and >= 0"));
        }
        Ok(DemandMatrix {
            n_types: self.n_types,
            n_od: self.n_od,
            values: self.values.iter().map(|v| v * factor).collect(),
        })
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.n_od.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub(crate) fn check_shape(&self, net: &Network, vot: &VotProfile) -> Result<()> {
        if self.n_types != vot.len() || self.n_od != net.num_od_pairs() {
            return Err(Error::structural(format!(
                "demand matrix is {}x{} but expected {} types x {} od pairs",
                self.n_types,
                self.n_od,
                vot.len(),
                net.num_od_pairs()
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Tolls
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TollKind {
    Homogeneous,
    Heterogeneous,
}

/// Nonnegative edge prices, either one per edge or one per (type, edge),
/// restricted to a support set of edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "TollSchemeRepr", try_from = "TollSchemeRepr")]
pub struct TollScheme {
    kind: TollKind,
    n_types: usize,
    n_edges: usize,
    prices: Vec<f64>,
    support: Vec<bool>,
}

impl TollScheme {
    pub fn zero(n_edges: usize, n_types: usize) -> Self {
        TollScheme {
            kind: TollKind::Homogeneous,
            n_types,
            n_edges,
            prices: vec![0.0; n_edges],
            support: vec![true; n_edges],
        }
    }

    pub fn homogeneous(prices: Vec<f64>, n_types: usize) -> Result<Self> {
        check_prices(&prices)?;
        let n_edges = prices.len();
        Ok(TollScheme {
            kind: TollKind::Homogeneous,
            n_types,
            n_edges,
            prices,
            support: vec![true; n_edges],
        })
    }

    /// `prices[i][e]` is the toll charged to type `i` on edge `e`.
    pub fn heterogeneous(prices: Vec<Vec<f64>>) -> Result<Self> {
        let n_types = prices.len();
        let n_edges = prices.first().map_or(0, Vec::len);
        if prices.iter().any(|row| row.len() != n_edges) {
            return Err(Error::structural("ragged heterogeneous toll rows"));
        }
        let flat: Vec<f64> = prices.into_iter().flatten().collect();
        check_prices(&flat)?;
        Ok(TollScheme {
            kind: TollKind::Heterogeneous,
            n_types,
            n_edges,
            prices: flat,
            support: vec![true; n_edges],
        })
    }

    /// Restricts the support; fails if a price is positive outside it.
    pub fn with_support(mut self, support: &BTreeSet<usize>) -> Result<Self> {
        let mask: Vec<bool> = (0..self.n_edges).map(|e| support.contains(&e)).collect();
        if support.iter().any(|&e| e >= self.n_edges) {
            return Err(Error::structural("support references an unknown edge"));
        }
        for e in 0..self.n_edges {
            if !mask[e] && (0..self.n_types.max(1)).any(|i| self.raw_price(e, i) != 0.0) {
                return Err(Error::invalid(format!(
                    "edge {e} is outside the support but carries a positive toll"
                )));
            }
        }
        self.support = mask;
        Ok(self)
    }

    fn raw_price(&self, e: usize, i: usize) -> f64 {
        match self.kind {
            TollKind::Homogeneous => self.prices[e],
            TollKind::Heterogeneous => self.prices[i * self.n_edges + e],
        }
    }

    /// Price paid by type `i` on edge `e`.
    #[inline]
    pub fn price(&self, e: usize, i: usize) -> f64 {
        self.raw_price(e, i)
    }

    pub fn kind(&self) -> TollKind {
        self.kind
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }

    pub fn support(&self) -> BTreeSet<usize> {
        (0..self.n_edges).filter(|&e| self.support[e]).collect()
    }

    pub fn in_support(&self, e: usize) -> bool {
        self.support[e]
    }

    /// Per-type price rows, `rows[i][e]`.
    pub fn price_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_types)
            .map(|i| (0..self.n_edges).map(|e| self.price(e, i)).collect())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.prices.iter().all(|&p| p == 0.0)
    }

    pub(crate) fn check_shape(&self, net: &Network, vot: &VotProfile) -> Result<()> {
        if self.n_edges != net.num_edges() || self.n_types != vot.len() {
            return Err(Error::structural(format!(
                "toll scheme covers {} edges x {} types but expected {} x {}",
                self.n_edges,
                self.n_types,
                net.num_edges(),
                vot.len()
            )));
        }
        Ok(())
    }
}

/// Serialized form: one price row for homogeneous schemes, one per type
/// otherwise, plus the support as edge indices.
#[derive(Serialize, Deserialize)]
struct TollSchemeRepr {
    kind: TollKind,
    n_types: usize,
    prices: Vec<Vec<f64>>,
    support: Vec<usize>,
}

impl From<TollScheme> for TollSchemeRepr {
    fn from(t: TollScheme) -> Self {
        let prices = match t.kind {
            TollKind::Homogeneous => vec![t.prices.clone()],
            TollKind::Heterogeneous => t.price_rows(),
        };
        TollSchemeRepr {
            kind: t.kind,
            n_types: t.n_types,
            prices,
            support: t.support().into_iter().collect(),
        }
    }
}

impl TryFrom<TollSchemeRepr> for TollScheme {
    type Error = Error;

    fn try_from(r: TollSchemeRepr) -> Result<Self> {
        let scheme = match r.kind {
            TollKind::Homogeneous => {
                let [row]: [Vec<f64>; 1] = r.prices.try_into().map_err(|_| {
                    Error::structural("homogeneous tolls need exactly one price row")
                })?;
                TollScheme::homogeneous(row, r.n_types)?
            }
            TollKind::Heterogeneous => {
                if r.prices.len() != r.n_types {
                    return Err(Error::structural("one price row per type expected"));
                }
                TollScheme::heterogeneous(r.prices)?
            }
        };
        scheme.with_support(&r.support.into_iter().collect())
    }
}

fn check_prices(prices: &[f64]) -> Result<()> {
    match prices.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        Some(p) => Err(Error::invalid(format!("toll {p} must be finite and >= 0"))),
        None => Ok(()),
    }
}

// ---------------------------------------------------------------------------
// Flows
// ---------------------------------------------------------------------------

/// Route flows `q_r^{ik}`, laid out type-major with each type block
/// following the network's route order.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyDistribution {
    n_types: usize,
    offsets: Vec<usize>,
    route_count: usize,
    flows: Vec<f64>,
}

impl StrategyDistribution {
    pub fn zeros(net: &Network, n_types: usize) -> Self {
        StrategyDistribution {
            n_types,
            offsets: net.route_offsets.clone(),
            route_count: net.route_count,
            flows: vec![0.0; n_types * net.route_count],
        }
    }

    /// All demand of each (type, OD) block on its first route.
    pub fn first_route(net: &Network, demand: &DemandMatrix) -> Result<Self> {
        let mut q = Self::zeros(net, demand.n_types());
        for i in 0..demand.n_types() {
            for k in 0..net.num_od_pairs() {
                let d = demand.get(i, k);
                if d > 0.0 {
                    q.block_mut(i, k)
                        .first_mut()
                        .map(|f| *f = d)
                        .ok_or_else(|| infeasible(net, k))?;
                }
            }
        }
        Ok(q)
    }

    /// Demand split evenly across every route of each block.
    pub fn uniform(net: &Network, demand: &DemandMatrix) -> Result<Self> {
        let mut q = Self::zeros(net, demand.n_types());
        for i in 0..demand.n_types() {
            for k in 0..net.num_od_pairs() {
                let d = demand.get(i, k);
                if d > 0.0 {
                    let block = q.block_mut(i, k);
                    if block.is_empty() {
                        return Err(infeasible(net, k));
                    }
                    let share = d / block.len() as f64;
                    block.iter_mut().for_each(|f| *f = share);
                }
            }
        }
        Ok(q)
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }

    fn block_range(&self, i: usize, k: usize) -> std::ops::Range<usize> {
        let start = i * self.route_count + self.offsets[k];
        let end = if k + 1 < self.offsets.len() {
            i * self.route_count + self.offsets[k + 1]
        } else {
            (i + 1) * self.route_count
        };
        start..end
    }

    pub fn block(&self, i: usize, k: usize) -> &[f64] {
        &self.flows[self.block_range(i, k)]
    }

    pub fn block_mut(&mut self, i: usize, k: usize) -> &mut [f64] {
        let r = self.block_range(i, k);
        &mut self.flows[r]
    }

    pub fn get(&self, i: usize, k: usize, r: usize) -> f64 {
        self.block(i, k)[r]
    }

    pub fn set(&mut self, i: usize, k: usize, r: usize, v: f64) -> Result<()> {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::invalid(format!("route flow {v} must be finite and >= 0")));
        }
        *self
            .block_mut(i, k)
            .get_mut(r)
            .ok_or_else(|| Error::structural(format!("route index {r} out of range")))? = v;
        Ok(())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.flows
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.flows
    }

    /// Checks `Σ_r q_r^{ik} = D^{ik}` to `1e-9 * max(1, D^{ik})`.
    pub fn check_feasible(&self, demand: &DemandMatrix) -> Result<()> {
        if demand.n_types() != self.n_types || demand.n_od() != self.offsets.len() {
            return Err(Error::structural("strategy distribution does not match demand shape"));
        }
        for i in 0..self.n_types {
            for k in 0..self.offsets.len() {
                let block = self.block(i, k);
                if block.iter().any(|&f| f < 0.0) {
                    return Err(Error::invalid("negative route flow"));
                }
                let sum: f64 = block.iter().sum();
                let d = demand.get(i, k);
                if (sum - d).abs() > 1e-9 * d.max(1.0) {
                    return Err(Error::invalid(format!(
                        "route flows of type {i}, od {k} sum to {sum} but demand is {d}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn matches(&self, net: &Network) -> bool {
        self.offsets == net.route_offsets && self.route_count == net.route_count
    }
}

impl std::ops::Add for &StrategyDistribution {
    type Output = StrategyDistribution;
    fn add(self, rhs: &StrategyDistribution) -> StrategyDistribution {
        assert_eq!(self.flows.len(), rhs.flows.len(), "mismatched distributions");
        let mut out = self.clone();
        for (a, b) in out.flows.iter_mut().zip(&rhs.flows) {
            *a += b;
        }
        out
    }
}

pub(crate) fn infeasible(net: &Network, k: usize) -> Error {
    let (o, d) = net.od_label(k);
    Error::InfeasibleDemand {
        origin: o.to_string(),
        destination: d.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeFlows {
    /// `per_type[i][e]` is `f_e^i`.
    pub per_type: Vec<Vec<f64>>,
    /// `total[e]` is `w_e = Σ_i f_e^i`.
    pub total: Vec<f64>,
}

impl EdgeFlows {
    pub fn from_per_type(per_type: Vec<Vec<f64>>, n_edges: usize) -> Self {
        let mut total = vec![0.0; n_edges];
        for row in &per_type {
            for (t, f) in total.iter_mut().zip(row) {
                *t += f;
            }
        }
        EdgeFlows { per_type, total }
    }
}

/// Type-specific and aggregate edge flows induced by route flows.
pub fn edge_flows(net: &Network, q: &StrategyDistribution) -> Result<EdgeFlows> {
    if !q.matches(net) {
        return Err(Error::structural(
            "strategy distribution layout does not match the network's route sets",
        ));
    }
    let n_edges = net.num_edges();
    let mut per_type = vec![vec![0.0; n_edges]; q.n_types()];
    for (i, row) in per_type.iter_mut().enumerate() {
        for k in 0..net.num_od_pairs() {
            for (route, &f) in net.routes(k).iter().zip(q.block(i, k)) {
                if f != 0.0 {
                    for &e in route.edges() {
                        row[e] += f;
                    }
                }
            }
        }
    }
    Ok(EdgeFlows::from_per_type(per_type, n_edges))
}

/// `ℓ_r(w) = Σ_{e∈r} (a_e + b_e w_e^4)`.
pub fn route_latency(net: &Network, total_flow: &[f64], route: &Route) -> f64 {
    route
        .edges()
        .iter()
        .map(|&e| net.edges[e].latency(total_flow[e]))
        .sum()
}

/// `ℓ_r(w) + (1/θ^i) Σ_{e∈r} (p_e^i + g_e)`.
pub fn route_cost(
    net: &Network,
    total_flow: &[f64],
    route: &Route,
    vot: &VotProfile,
    i: usize,
    tolls: &TollScheme,
) -> f64 {
    let money: f64 = route
        .edges()
        .iter()
        .map(|&e| tolls.price(e, i) + net.edges[e].gas_cost)
        .sum();
    route_latency(net, total_flow, route) + money / vot.vot(i)
}

/// Total travel time `S(w) = Σ_e w_e ℓ_e(w_e)` in flow-hours.
pub fn total_travel_time(net: &Network, total_flow: &[f64]) -> f64 {
    net.edges
        .iter()
        .zip(total_flow)
        .map(|(e, &w)| w * e.latency(w))
        .sum()
}
