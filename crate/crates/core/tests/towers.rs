use std::time::Instant;

use wittkit::towers::{
    build_level, frob_surjectivity_report, p_big_sequence, ramified_uniformizer, witt_perfect_criterion, TowerSpec,
};

#[test]
fn surjectivity_across_levels() {
    let start = Instant::now();
    let mut specs = vec![TowerSpec::unramified(2, 2, 4, 6), TowerSpec::unramified(3, 2, 4, 6)];
    for p in [2u64, 3] {
        specs.push(TowerSpec::ramified(p, 1, "t1^2", 4, 6).unwrap());
        specs.push(TowerSpec::ramified(p, 2, "t1^2 + t2^3", 4, 6).unwrap());
    }
    for spec in &specs {
        for n in 0..=2 {
            let rep = frob_surjectivity_report(spec, n, 6).unwrap();
            assert!(rep.all_rooted(), "{spec:?} n={n}: {rep}");
            assert!(rep.nilpotency.bound_certified, "{spec:?} n={n}");
            assert!(rep.nilpotency.exponent_bound <= spec.p.pow(n));
            println!("{} {rep} ({:?})", spec.kind.name(), start.elapsed());
        }
    }
}

#[test]
fn uniformizer_at_acceptance_truncation() {
    let start = Instant::now();
    for p in [2u64, 3] {
        for g in ["t1^2", "t1^2 + t2^3"] {
            let spec = TowerSpec::ramified(p, 2, g, 5, 12).unwrap();
            let uni = ramified_uniformizer(&spec, 1).unwrap();
            assert!(uni.verify());
            let w = witt_perfect_criterion(&spec, 1).unwrap();
            assert!(w.verify());
            println!("p={p} G={g}: π={} u={} ({:?})", uni.pi, uni.u, start.elapsed());
        }
    }
    assert!(start.elapsed().as_secs() < 60);
}

#[test]
fn tower_coherence() {
    let spec = TowerSpec::valuation(3, 4);
    let l2 = build_level(&spec, 2).unwrap();
    let l1 = l2.at(1).unwrap();
    let pi1 = l1.include(&l1.pi(1).unwrap(), &l2).unwrap();
    assert_eq!(l2.pi(2).unwrap().pow(3), pi1);
    let w = p_big_sequence(&spec, 2).unwrap();
    assert!(w.verify());
}
