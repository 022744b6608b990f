use equitoll::network::{DemandMatrix, EdgeSpec, Network, NetworkSpec, TollScheme, VotProfile};
use equitoll::rng::SplitMix64;

pub struct Instance {
    pub net: Network,
    pub vot: VotProfile,
    pub demand: DemandMatrix,
}

/// Random connected instance: 3-5 nodes, at most 8 edges, 1-3 types,
/// every slope positive.
pub fn random_instance(rng: &mut SplitMix64) -> Instance {
    let n_nodes = 3 + rng.below(3);
    let nodes: Vec<String> = (0..n_nodes).map(|i| format!("n{i}")).collect();
    let mut spec = NetworkSpec::new(&nodes);
    let mut n_edges = 0;
    let mut add = |spec: NetworkSpec, t: usize, h: usize, rng: &mut SplitMix64| {
        n_edges += 1;
        spec.edge(
            EdgeSpec::new(
                &format!("e{n_edges}"),
                &nodes[t],
                &nodes[h],
                rng.uniform(0.1, 1.0),
                rng.uniform(0.05, 1.0),
            )
            .gas(rng.uniform(0.0, 2.0)),
        )
    };
    // A forward chain keeps every od pair below routable.
    for t in 0..n_nodes - 1 {
        spec = add(spec, t, t + 1, rng);
    }
    let extra = 8 - (n_nodes - 1);
    for _ in 0..1 + rng.below(extra) {
        let t = rng.below(n_nodes);
        let mut h = rng.below(n_nodes);
        if h == t {
            h = (t + 1) % n_nodes;
        }
        spec = add(spec, t, h, rng);
    }
    let n_od = 1 + rng.below(3);
    let mut ods = Vec::new();
    while ods.len() < n_od {
        let o = rng.below(n_nodes - 1);
        let d = o + 1 + rng.below(n_nodes - 1 - o);
        if !ods.contains(&(o, d)) {
            ods.push((o, d));
        }
        if ods.len() < n_od && rng.next_f64() < 0.2 {
            break;
        }
    }
    for &(o, d) in &ods {
        spec = spec.od(&nodes[o], &nodes[d]);
    }
    let net = spec.build().unwrap();

    let n_types = 1 + rng.below(3);
    let mut vots: Vec<f64> = (0..n_types).map(|_| rng.uniform(5.0, 80.0)).collect();
    vots.sort_by(f64::total_cmp);
    let labels = ["low", "mid", "high"];
    let vot = VotProfile::new(
        &labels[..n_types]
            .iter()
            .zip(&vots)
            .map(|(l, v)| (*l, *v))
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let rows = (0..n_types)
        .map(|_| (0..net.num_od_pairs()).map(|_| rng.uniform(0.2, 2.0)).collect())
        .collect();
    Instance {
        net,
        vot,
        demand: DemandMatrix::from_rows(rows).unwrap(),
    }
}

/// Two parallel edges o->d with latencies a_j + b_j w^4.
pub fn two_route(a: (f64, f64), b: (f64, f64)) -> Network {
    NetworkSpec::new(&["o", "d"])
        .edge(EdgeSpec::new("e1", "o", "d", a.0, b.0))
        .edge(EdgeSpec::new("e2", "o", "d", a.1, b.1))
        .od("o", "d")
        .build()
        .unwrap()
}

/// Root of a nondecreasing `f` on `[lo, hi]`, to `tol` in x.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Equilibrium flow on the first of two parallel edges carrying `d`.
pub fn two_route_equilibrium(a: (f64, f64), b: (f64, f64), d: f64) -> f64 {
    let diff = |x: f64| (a.0 + b.0 * x.powi(4)) - (a.1 + b.1 * (d - x).powi(4));
    if diff(0.0) >= 0.0 {
        0.0
    } else if diff(d) <= 0.0 {
        d
    } else {
        bisect(diff, 0.0, d, 1e-12)
    }
}

/// System-optimal flow on the first of two parallel edges carrying `d`.
pub fn two_route_optimum(a: (f64, f64), b: (f64, f64), d: f64) -> f64 {
    let diff = |x: f64| (a.0 + 5.0 * b.0 * x.powi(4)) - (a.1 + 5.0 * b.1 * (d - x).powi(4));
    if diff(0.0) >= 0.0 {
        0.0
    } else if diff(d) <= 0.0 {
        d
    } else {
        bisect(diff, 0.0, d, 1e-12)
    }
}

/// Two independent tolled/free link pairs with three VOT types at
/// (10, 30, 70) and a $7 toll on each fast link. Over the three daily
/// demand scales every type is the split type on some (link pair, day), so
/// the observed flows pin down each VOT.
pub struct VotCase {
    pub net: Network,
    pub vot: VotProfile,
    pub tolls: TollScheme,
    pub days: Vec<DemandMatrix>,
}

pub fn vot_case() -> VotCase {
    let net = NetworkSpec::new(&["a", "b", "c"])
        .edge(EdgeSpec::new("fast1", "a", "b", 0.1, 0.02))
        .edge(EdgeSpec::new("slow1", "a", "b", 1.0, 0.01))
        .edge(EdgeSpec::new("fast2", "b", "c", 0.2, 0.05))
        .edge(EdgeSpec::new("slow2", "b", "c", 0.6, 0.005))
        .od("a", "b")
        .od("b", "c")
        .build()
        .unwrap();
    let vot = VotProfile::new(&[("low", 10.0), ("mid", 30.0), ("high", 70.0)]).unwrap();
    let tolls = TollScheme::homogeneous(vec![7.0, 0.0, 7.0, 0.0], 3).unwrap();
    let base = DemandMatrix::from_rows(vec![vec![2.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.5]]).unwrap();
    let days = [0.8, 1.0, 1.25]
        .iter()
        .map(|&s| base.scaled(s).unwrap())
        .collect();
    VotCase {
        net,
        vot,
        tolls,
        days,
    }
}

/// Four nodes, five edges, two OD pairs sharing the sink, two types.
pub fn pareto_instance() -> (Network, VotProfile, DemandMatrix) {
    let net = NetworkSpec::new(&["a", "b", "c", "d"])
        .edge(EdgeSpec::new("ab", "a", "b", 0.2, 0.3).gas(1.0))
        .edge(EdgeSpec::new("ac", "a", "c", 0.4, 0.1).gas(0.5))
        .edge(EdgeSpec::new("bd", "b", "d", 0.3, 0.2).gas(1.0))
        .edge(EdgeSpec::new("cd", "c", "d", 0.2, 0.4))
        .edge(EdgeSpec::new("bc", "b", "c", 0.1, 0.5))
        .od("a", "d")
        .od("b", "d")
        .build()
        .unwrap();
    let vot = VotProfile::new(&[("low", 10.0), ("high", 50.0)]).unwrap();
    let d = DemandMatrix::from_rows(vec![vec![1.5, 0.5], vec![1.0, 0.8]]).unwrap();
    (net, vot, d)
}
