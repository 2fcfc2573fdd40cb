mod common;

use common::{example1, reachability_graph};
use proptest::prelude::*;
use rcpsp_ttpnr::heuristics::Heuristic;
use rcpsp_ttpnr::mip::RowKind;
use rcpsp_ttpnr::oracle::Schedule;
use rcpsp_ttpnr::{
    brute_force_optimum, parse_sm, random_instance, solve, validate_schedule, write_sm, Activity,
    Budget, HeuristicKind, RcpspInstance, TimeIndexedModel, TtpnrNet,
};

fn instance_strategy() -> impl Strategy<Value = RcpspInstance> {
    (any::<u64>(), 1usize..8, 1usize..4, 0u32..7, 0.2f64..1.0)
        .prop_map(|(seed, n, k, d, density)| random_instance(seed, n, k, d, density))
}

fn starts_of(s: &Schedule, n: usize) -> Vec<u32> {
    (0..n).map(|j| s.start(j).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sm_round_trip(inst in instance_strategy()) {
        let text = write_sm(&inst);
        let back = parse_sm(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(write_sm(&back), text);
    }

    #[test]
    fn astar_matches_oracle(inst in instance_strategy()) {
        let (opt, witness) = brute_force_optimum(&inst).unwrap();
        prop_assert!(validate_schedule(&inst, &witness).unwrap().is_empty());
        let net = TtpnrNet::build(&inst).unwrap();
        for kind in HeuristicKind::ALL {
            let out = solve(&net, &inst, kind, &Budget::unlimited());
            prop_assert_eq!(out.makespan(), Some(opt), "heuristic {}", kind);
            prop_assert_eq!(out.stats().reopen_violations, 0);
        }
    }

    #[test]
    fn heuristics_are_admissible_at_the_root(inst in instance_strategy()) {
        let (opt, _) = brute_force_optimum(&inst).unwrap();
        let net = TtpnrNet::build(&inst).unwrap();
        let root = rcpsp_ttpnr::TimedState::initial(&net);
        for kind in HeuristicKind::ALL {
            prop_assert!(Heuristic::new(&inst, kind).unwrap().eval(&root) <= opt);
        }
    }

    #[test]
    fn solved_schedules_satisfy_every_mip_row(inst in instance_strategy()) {
        let net = TtpnrNet::build(&inst).unwrap();
        let out = solve(&net, &inst, HeuristicKind::MaxOfBoth, &Budget::unlimited());
        let rcpsp_ttpnr::SolveOutcome::Solved { schedule, makespan, .. } = out else {
            panic!("no solution");
        };
        prop_assert!(validate_schedule(&inst, &schedule).unwrap().is_empty());
        let model = TimeIndexedModel::build(&inst);
        let x = model.assignment(&starts_of(&schedule, inst.num_activities())).unwrap();
        prop_assert!(model.violated_rows(&x).is_empty());
        prop_assert_eq!(model.objective_value(&x), makespan as i64);
    }

    #[test]
    fn closing_dummies_always_validates(n in 1usize..7, arcs in prop::collection::vec((1usize..7, 1usize..7), 0..12)) {
        let mut acts = vec![Activity::new(0, 0, vec![0])];
        acts.extend((1..=n).map(|j| Activity::new(j, 1, vec![1])));
        acts.push(Activity::new(n + 1, 0, vec![0]));
        let dag: Vec<_> = arcs.into_iter().filter(|&(i, j)| i < j && j <= n).collect();
        let inst = RcpspInstance::new(acts, dag, vec![1]).close_dummies();
        prop_assert!(inst.validate().is_ok(), "{:?}", inst.validate());
        let topo = inst.topological_order().unwrap();
        prop_assert_eq!(topo.len(), n + 2);
        prop_assert_eq!(topo[0], 0);
        prop_assert_eq!(*topo.last().unwrap(), n + 1);
    }
}

#[test]
fn every_heuristic_is_consistent_on_small_graphs() {
    let mut instances = vec![example1()];
    instances.extend((0..25).map(|seed| random_instance(1000 + seed, 5, 2, 4, 0.6)));
    for inst in &instances {
        let net = TtpnrNet::build(inst).unwrap();
        let graph = reachability_graph(&net);
        for kind in HeuristicKind::ALL {
            let h = Heuristic::new(inst, kind).unwrap();
            let values: Vec<u32> = graph.states.iter().map(|s| h.eval(s)).collect();
            for e in &graph.edges {
                assert!(
                    values[e.from] <= e.delta + values[e.to],
                    "{kind}: h={} dt={} h'={}",
                    values[e.from],
                    e.delta,
                    values[e.to]
                );
            }
            for (s, &v) in graph.states.iter().zip(&values) {
                if s.is_goal(&net) {
                    assert_eq!(v, 0);
                }
            }
        }
    }
}

#[test]
fn repeated_solves_are_identical() {
    for seed in 0..20 {
        let inst = random_instance(seed, 7, 2, 5, 0.5);
        let net = TtpnrNet::build(&inst).unwrap();
        let a = solve(&net, &inst, HeuristicKind::MaxOfBoth, &Budget::unlimited());
        let b = solve(&net, &inst, HeuristicKind::MaxOfBoth, &Budget::unlimited());
        match (&a, &b) {
            (
                rcpsp_ttpnr::SolveOutcome::Solved {
                    schedule: s1,
                    stats: t1,
                    ..
                },
                rcpsp_ttpnr::SolveOutcome::Solved {
                    schedule: s2,
                    stats: t2,
                    ..
                },
            ) => {
                assert_eq!(s1, s2);
                assert_eq!(t1.expanded, t2.expanded);
                assert_eq!(t1.generated, t2.generated);
            }
            _ => panic!("seed {seed}: {} / {}", a.label(), b.label()),
        }
    }
}

#[test]
fn mip_rejects_hand_built_overload() {
    // two unit jobs on one unit of capacity, both at t = 0
    let acts = vec![
        Activity::new(0, 0, vec![0]),
        Activity::new(1, 1, vec![1]),
        Activity::new(2, 1, vec![1]),
        Activity::new(3, 0, vec![0]),
    ];
    let inst = RcpspInstance::new(acts, [(0, 1), (0, 2), (1, 3), (2, 3)], vec![1]);
    let model = TimeIndexedModel::build(&inst);
    let x = model.assignment(&[0, 0, 0, 1]).unwrap();
    let bad = model.violated_rows(&x);
    assert_eq!(bad.len(), 1);
    assert_eq!(bad[0].kind, RowKind::Capacity(0, 0));
    let ok = model.assignment(&[0, 0, 1, 2]).unwrap();
    assert!(model.violated_rows(&ok).is_empty());
}
