mod common;

use std::collections::BTreeSet;

use common::instances::{random_instance, two_route, Instance};
use common::lp_oracle::{vertex_enumeration, OracleResult};
use equitoll::equilibrium::{min_route_cost, solve_equilibrium, solve_social_optimum, SolverOptions};
use equitoll::lp::{LinearProgram, Relation, Sense};
use equitoll::network::{
    route_latency, total_travel_time, DemandMatrix, EdgeSpec, NetworkSpec, TollScheme, VotProfile,
};
use equitoll::rng::SplitMix64;
use equitoll::toll_design::{
    design, design_at, solve_cost_diff_min, solve_p_het, solve_p_hom, solve_p_hom_star,
    solve_p_homsc, solve_p_homsc_star, DesignConfig, DesignInputs, Scheme,
};

fn tight() -> SolverOptions {
    SolverOptions::with_tol(1e-10)
}

fn realized_cost(inst: &Instance, tolls: &TollScheme) -> (f64, Vec<f64>) {
    let eq = solve_equilibrium(&inst.net, &inst.demand, &inst.vot, tolls, &tight()).unwrap();
    (total_travel_time(&inst.net, &eq.edge_flows.total), eq.edge_flows.total)
}

#[test]
fn first_best_schemes_implement_optimum() {
    let mut rng = SplitMix64::new(101);
    for _ in 0..15 {
        let inst = random_instance(&mut rng);
        let so = solve_social_optimum(&inst.net, &inst.demand, &tight()).unwrap();
        for scheme in [Scheme::Hom, Scheme::Het] {
            let out = design(&inst.net, &inst.demand, &inst.vot, &DesignConfig::new(scheme)).unwrap();
            let (s, w) = realized_cost(&inst, &out.tolls);
            assert!(s <= 1.001 * so.total_travel_time, "{scheme}: {s} vs {}", so.total_travel_time);
            let scale = so.edge_flows.total.iter().fold(1.0, |m: f64, w| m.max(*w));
            for (a, b) in w.iter().zip(&so.edge_flows.total) {
                assert!((a - b).abs() <= 1e-3 * scale, "{scheme}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn marginal_cost_tolls_implement_optimum() {
    let mut rng = SplitMix64::new(7);
    for _ in 0..10 {
        let mut inst = random_instance(&mut rng);
        // Single type, θ = 1, no gas.
        let spec = inst.net.to_spec();
        let mut plain = NetworkSpec::new(&spec.nodes);
        for e in &spec.edges {
            plain = plain.edge(EdgeSpec::new(&e.id, &e.tail, &e.head, e.a, e.b));
        }
        for od in &spec.od_pairs {
            plain = plain.od(&od.origin, &od.destination);
        }
        inst.net = plain.build().unwrap();
        inst.vot = VotProfile::single(1.0).unwrap();
        let row: Vec<f64> = (0..inst.net.num_od_pairs()).map(|k| inst.demand.od_total(k)).collect();
        inst.demand = DemandMatrix::from_rows(vec![row]).unwrap();
        let so = solve_social_optimum(&inst.net, &inst.demand, &tight()).unwrap();
        let prices = inst
            .net
            .edges()
            .iter()
            .zip(&so.edge_flows.total)
            .map(|(e, w)| 4.0 * e.slope * w.powi(4))
            .collect();
        let tolls = TollScheme::homogeneous(prices, 1).unwrap();
        let (s, _) = realized_cost(&inst, &tolls);
        assert!(s <= 1.001 * so.total_travel_time);
    }
}

#[test]
fn second_stage_cut_and_routes_are_tight() {
    let mut rng = SplitMix64::new(55);
    for _ in 0..15 {
        let inst = random_instance(&mut rng);
        for scheme in Scheme::ALL {
            let out = design(&inst.net, &inst.demand, &inst.vot, &DesignConfig::new(scheme)).unwrap();
            let t = out.first_stage_value;
            assert!((out.cut_activity - t).abs() <= 1e-6 * t.abs().max(1.0), "{scheme} cut");
            for i in 0..inst.vot.len() {
                for k in 0..inst.net.num_od_pairs() {
                    let Some(z) = out.z[i][k] else { continue };
                    let (c, _) =
                        min_route_cost(&inst.net, &out.audit.w_dagger, &out.tolls, &inst.vot, i, k).unwrap();
                    let target = inst.vot.vot(i) * c;
                    assert!((z - target).abs() <= 1e-6 * target.max(1.0), "{scheme}: z {z} vs {target}");
                }
            }
        }
    }
}

#[test]
fn support_constraints_only_shrink_the_value() {
    let mut rng = SplitMix64::new(77);
    for _ in 0..15 {
        let inst = random_instance(&mut rng);
        let so = solve_social_optimum(&inst.net, &inst.demand, &tight()).unwrap();
        let full: BTreeSet<usize> = (0..inst.net.num_edges()).collect();
        let inp = DesignInputs::new(&inst.net, &inst.demand, &inst.vot, 20.0, so.edge_flows.total.clone())
            .unwrap()
            .with_support(full)
            .unwrap();
        let hom = solve_p_hom(&inp).unwrap();
        let homsc = solve_p_homsc(&inp).unwrap();
        assert!((hom.value - homsc.value).abs() <= 1e-7 * hom.value.abs().max(1.0));
        let a = solve_p_hom_star(&inp, hom.value).unwrap();
        let b = solve_p_homsc_star(&inp, homsc.value).unwrap();
        assert!((a.objective - b.objective).abs() <= 1e-7 * a.objective.abs().max(1.0));

        let half: BTreeSet<usize> = (0..inst.net.num_edges()).step_by(2).collect();
        let inp = inp.with_support(half).unwrap();
        for scheme in [Scheme::HomSc, Scheme::HetSc] {
            let unconstrained = if scheme == Scheme::HomSc { Scheme::Hom } else { Scheme::Het };
            let sc = design_at(&inp, scheme).unwrap();
            let fb = design_at(&inp, unconstrained).unwrap();
            assert!(sc.first_stage_value <= fb.first_stage_value + 1e-8 * fb.first_stage_value.abs());
            let (s, _) = realized_cost(&inst, &sc.tolls);
            assert!(s >= so.total_travel_time * (1.0 - 1e-7));
        }
    }
}

#[test]
fn one_type_collapses_het_to_hom() {
    let mut rng = SplitMix64::new(9);
    let mut seen = 0;
    while seen < 5 {
        let inst = random_instance(&mut rng);
        if inst.vot.len() != 1 {
            continue;
        }
        seen += 1;
        let outs: Vec<_> = Scheme::ALL
            .iter()
            .map(|&s| {
                let cfg = DesignConfig {
                    support: Some((0..inst.net.num_edges()).collect()),
                    ..DesignConfig::new(s)
                };
                design(&inst.net, &inst.demand, &inst.vot, &cfg).unwrap()
            })
            .collect();
        for o in &outs[1..] {
            let t = outs[0].first_stage_value;
            assert!((o.first_stage_value - t).abs() <= 1e-7 * t.abs().max(1.0));
            let obj = outs[0].second_stage_objective;
            assert!((o.second_stage_objective - obj).abs() <= 1e-7 * obj.abs().max(1.0));
        }
    }
}

/// `max D z − p1 w1 − p2 w2` over `z − p_j ≤ θ ℓ_j(w) + g_j`, rebuilt by hand
/// with box bounds for vertex enumeration.
#[test]
fn two_route_first_stage_matches_vertex_enumeration() {
    let mut rng = SplitMix64::new(4);
    for _ in 0..10 {
        let a = (rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0));
        let b = (rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0));
        let net = two_route(a, b);
        let theta = rng.uniform(5.0, 50.0);
        let d = rng.uniform(0.5, 3.0);
        let vot = VotProfile::single(theta).unwrap();
        let demand = DemandMatrix::from_rows(vec![vec![d]]).unwrap();
        let w = solve_social_optimum(&net, &demand, &tight()).unwrap().edge_flows.total;
        let inp = DesignInputs::new(&net, &demand, &vot, 20.0, w.clone()).unwrap();
        let t = solve_p_hom(&inp).unwrap().value;

        let mut lp = LinearProgram::new(Sense::Maximize);
        let p1 = lp.add_var("p1", 0.0, 1e4, -w[0]);
        let p2 = lp.add_var("p2", 0.0, 1e4, -w[1]);
        let z = lp.add_var("z", -1e5, 1e5, d);
        for (j, p) in [p1, p2].into_iter().enumerate() {
            let route = &net.routes(0)[j];
            let rhs = theta * route_latency(&net, &w, route);
            lp.add_constraint(format!("r{j}"), vec![(z, 1.0), (p, -1.0)], Relation::Le, rhs);
        }
        match vertex_enumeration(&lp) {
            OracleResult::Optimal(v) => assert!((v - t).abs() <= 1e-8 * v.abs().max(1.0), "{v} vs {t}"),
            OracleResult::Infeasible => panic!("oracle says infeasible"),
        }
    }
}

#[test]
fn two_type_het_first_stage_matches_vertex_enumeration() {
    let net = two_route((1.0, 1.5), (0.5, 0.2));
    let vot = VotProfile::new(&[("low", 10.0), ("high", 45.0)]).unwrap();
    let demand = DemandMatrix::from_rows(vec![vec![1.2], vec![0.9]]).unwrap();
    let w = solve_social_optimum(&net, &demand, &tight()).unwrap().edge_flows.total;
    let inp = DesignInputs::new(&net, &demand, &vot, 20.0, w.clone()).unwrap();
    let split = solve_cost_diff_min(&inp).unwrap();
    let f = &split.edge_flows.per_type;
    let t = solve_p_het(&inp, f).unwrap().value;

    let mut lp = LinearProgram::new(Sense::Maximize);
    let mut p = Vec::new();
    for i in 0..2 {
        for e in 0..2 {
            p.push(lp.add_var(format!("p{i}{e}"), 0.0, 1e4, -f[i][e]));
        }
    }
    let z: Vec<_> = (0..2)
        .map(|i| lp.add_var(format!("z{i}"), -1e5, 1e5, demand.get(i, 0)))
        .collect();
    for i in 0..2 {
        for e in 0..2 {
            let rhs = vot.vot(i) * route_latency(&net, &w, &net.routes(0)[e]);
            lp.add_constraint("r", vec![(z[i], 1.0), (p[2 * i + e], -1.0)], Relation::Le, rhs);
        }
    }
    match vertex_enumeration(&lp) {
        OracleResult::Optimal(v) => assert!((v - t).abs() <= 1e-8 * v.abs().max(1.0), "{v} vs {t}"),
        OracleResult::Infeasible => panic!("oracle says infeasible"),
    }
}

#[test]
fn cost_difference_matches_vertex_enumeration() {
    let net = two_route((1.0, 1.4), (0.6, 0.3));
    let vot = VotProfile::new(&[("low", 10.0), ("high", 45.0)]).unwrap();
    let demand = DemandMatrix::from_rows(vec![vec![1.5], vec![0.5]]).unwrap();
    let w = solve_social_optimum(&net, &demand, &tight()).unwrap().edge_flows.total;
    let inp = DesignInputs::new(&net, &demand, &vot, 20.0, w.clone()).unwrap();
    let x = solve_cost_diff_min(&inp).unwrap().value;

    let lat: Vec<f64> = net.routes(0).iter().map(|r| route_latency(&net, &w, r)).collect();
    let mut lp = LinearProgram::new(Sense::Minimize);
    let xv = lp.add_var("x", 0.0, 1e3, 1.0);
    let q: Vec<_> = (0..4).map(|j| lp.add_var(format!("q{j}"), 0.0, 10.0, 0.0)).collect();
    for i in 0..2 {
        lp.add_constraint("d", vec![(q[2 * i], 1.0), (q[2 * i + 1], 1.0)], Relation::Eq, demand.get(i, 0));
    }
    for (i, j) in [(0, 1), (1, 0)] {
        lp.add_constraint(
            "s",
            vec![
                (xv, 1.0),
                (q[2 * i], -lat[0]),
                (q[2 * i + 1], -lat[1]),
                (q[2 * j], lat[0]),
                (q[2 * j + 1], lat[1]),
            ],
            Relation::Ge,
            0.0,
        );
    }
    for e in 0..2 {
        let slack = 1e-6 * w[e].max(1.0);
        let terms = vec![(q[e], 1.0), (q[2 + e], 1.0)];
        lp.add_constraint("hi", terms.clone(), Relation::Le, w[e] + slack);
        lp.add_constraint("lo", terms, Relation::Ge, w[e] - slack);
    }
    match vertex_enumeration(&lp) {
        OracleResult::Optimal(v) => assert!((v - x).abs() <= 1e-8 * v.abs().max(1.0), "{v} vs {x}"),
        OracleResult::Infeasible => panic!("oracle says infeasible"),
    }
}

#[test]
fn symmetric_cost_difference_is_zero() {
    let net = two_route((1.0, 1.0), (1.0, 1.0));
    let vot = VotProfile::new(&[("low", 10.0), ("high", 45.0)]).unwrap();
    let demand = DemandMatrix::from_rows(vec![vec![1.0], vec![1.0]]).unwrap();
    let w = solve_social_optimum(&net, &demand, &tight()).unwrap().edge_flows.total;
    let inp = DesignInputs::new(&net, &demand, &vot, 20.0, w).unwrap();
    let split = solve_cost_diff_min(&inp).unwrap();
    assert!(split.value.abs() < 1e-9);
}

#[test]
fn design_output_json_round_trip() {
    let net = two_route((1.0, 2.0), (1.0, 1.0));
    let vot = VotProfile::new(&[("low", 10.0), ("high", 45.0)]).unwrap();
    let demand = DemandMatrix::from_rows(vec![vec![1.0], vec![1.0]]).unwrap();
    let out = design(&net, &demand, &vot, &DesignConfig::new(Scheme::HetSc)).unwrap();
    let text = serde_json::to_string(&out).unwrap();
    let back: equitoll::toll_design::DesignOutput = serde_json::from_str(&text).unwrap();
    assert_eq!(back, out);
}
