mod common;

use std::io::Write;

use proptest::prelude::*;

use circulant_ci::arith::units;
use circulant_ci::cayley::{CayleyDigraph, ConnectionSet};
use circulant_ci::ci::{is_normal, non_ci_witness};
use circulant_ci::constructions::graph_witness;
use circulant_ci::search::{automorphism_group, refine, Coloring};
use circulant_ci::sweep::{
    classify, orbit_representatives, sweep, sweep_with_cache, verify_theorem, Decision, Mode,
    ReportCache, SweepOptions,
};

fn to_lines(reports: &[circulant_ci::sweep::InstanceReport]) -> String {
    reports
        .iter()
        .map(|r| serde_json::to_string(r).unwrap() + "\n")
        .collect()
}

#[test]
fn li_set_at_16_is_a_counterexample() {
    let v = verify_theorem(16, 16, Mode::Digraph, &SweepOptions::default()).unwrap();
    let target: ConnectionSet = "16:1,2,9".parse().unwrap();
    let orbit: Vec<ConnectionSet> = units(16).into_iter().map(|k| target.scaled(k as usize)).collect();
    assert!(v[0].counterexamples.iter().any(|s| orbit.contains(s)));
    assert!(v[0].agrees());
}

#[test]
fn graph_sweep_at_8_is_clean() {
    let v = verify_theorem(8, 8, Mode::Graph, &SweepOptions::default()).unwrap();
    assert!(v[0].counterexamples.is_empty());
    assert!(v[0].graph_nci_observed == Some(true) && v[0].digraph_ndci_observed.is_none());
}

#[test]
fn refinement_isolates_the_far_vertex() {
    let s = graph_witness(3, 3).unwrap();
    let gamma = CayleyDigraph::new(s);
    let c = refine(gamma.graph(), &Coloring::individualized(24, 0));
    let class = c.classes().into_iter().find(|cl| cl.contains(&12)).unwrap();
    assert_eq!(class, vec![12]);
}

#[test]
fn graph_witness_has_a_six_element_partner() {
    let s = graph_witness(3, 3).unwrap();
    let gamma = CayleyDigraph::new(s);
    let aut = automorphism_group(gamma.graph());
    let (t, iso) = non_ci_witness(&gamma, &aut).unwrap().unwrap();
    assert_eq!(t.len(), 6);
    for k in units(24) {
        assert_ne!(s.scaled(k as usize), t);
    }
    let adj = common::cayley_matrix(24, &s.members());
    let tadj = common::cayley_matrix(24, &t.members());
    let p: Vec<usize> = iso.images().collect();
    assert!((0..24).all(|u| (0..24).all(|v| adj[u][v] == tadj[p[u]][p[v]])));
}

#[test]
fn stabilizer_orders_match_backtracking_oracle() {
    for n in [9usize, 10, 12] {
        for rep in orbit_representatives(n, Some(4)).unwrap() {
            let gamma = CayleyDigraph::new(rep.set);
            let aut = automorphism_group(gamma.graph());
            if aut.small_order().is_none_or(|k| k > 2000 * n) {
                continue;
            }
            let m = rep.set.members();
            let adj = common::cayley_matrix(n, &m);
            let oracle = common::automorphisms_fixing(&adj, 0).len();
            assert_eq!(aut.order().to_string(), (n * oracle).to_string(), "{}", rep.set);
            let cert = is_normal(&gamma, &aut).unwrap();
            let fixing = common::units(n).into_iter().filter(|&k| common::scale(n, &m, k) == m.iter().copied().collect()).count();
            assert_eq!(cert.verdict, oracle == fixing, "{}", rep.set);
        }
    }
}

#[test]
fn cache_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.jsonl");
    let opts = SweepOptions {
        cache: Some(path.clone()),
        ..SweepOptions::default()
    };
    let cold = to_lines(&sweep(9, &opts).unwrap());
    let stored = std::fs::read_to_string(&path).unwrap();
    assert_eq!(stored.lines().count(), 52);
    let warm = to_lines(&sweep(9, &opts).unwrap());
    assert_eq!(cold, warm);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stored);
}

#[test]
fn corrupt_cache_lines_are_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.jsonl");
    let reference = to_lines(&sweep(7, &SweepOptions::default()).unwrap());
    {
        let mut f = std::fs::File::create(&path).unwrap();
        let first = reference.lines().next().unwrap();
        writeln!(f, "{first}").unwrap();
        writeln!(f, "{{not json").unwrap();
        writeln!(f, "{}", &first[..first.len() / 2]).unwrap();
    }
    let cache = ReportCache::open(&path).unwrap();
    assert_eq!(cache.len(), 1);
    let again = to_lines(&sweep_with_cache(7, &SweepOptions::default(), &cache).unwrap());
    assert_eq!(again, reference);
}

#[test]
fn parallel_and_serial_sweeps_agree() {
    let serial = SweepOptions {
        jobs: Some(1),
        ..SweepOptions::default()
    };
    let parallel = SweepOptions {
        jobs: Some(4),
        ..SweepOptions::default()
    };
    for n in [10, 12, 14] {
        assert_eq!(to_lines(&sweep(n, &serial).unwrap()), to_lines(&sweep(n, &parallel).unwrap()));
    }
}

fn connection_set() -> impl Strategy<Value = ConnectionSet> {
    (2usize..=20).prop_flat_map(|n| {
        (Just(n), 0u64..(1u64 << (n - 1))).prop_map(|(n, m)| ConnectionSet::from_mask(n, m << 1).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn verdicts_are_multiplier_invariant(s in connection_set(), pick in 0usize..64) {
        let us = units(s.n() as u64);
        let k = us[pick % us.len()] as usize;
        let a = classify(&s).unwrap();
        let b = classify(&s.scaled(k)).unwrap();
        prop_assert_eq!(a.normal, b.normal);
        prop_assert_eq!(a.ci, b.ci);
        prop_assert_eq!(a.aut_order, b.aut_order);
    }

    #[test]
    fn normal_instances_always_decide_ci(s in connection_set()) {
        let r = classify(&s).unwrap();
        if r.normal == Decision::Known(true) || s.n() <= 8 {
            prop_assert!(r.ci != Decision::Skipped);
        } else {
            prop_assert_eq!(r.ci, Decision::Skipped);
        }
    }
}
