//! Acceptance criteria 1-10. Runs without the libtest harness so that the
//! per-criterion lines are always printed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wittkit::cli::{parse_document, parse_ringspec, run_checks, RunOptions};
use wittkit::exactalg::{AlgebraBuilder, PolyElement, TruncatedAlgebra};
use wittkit::modifications::{
    build_modification, check_trivialization, fractions_equal, lemma51_beta, maximal_ideal, random_sequence,
    BoundedMap, ParameterRelation, PartialModule,
};
use wittkit::splitting::{etale_away_from_p, monomial_check, retraction_solver, EtaleVerdict, FiniteAlgebra};
use wittkit::towers::{
    build_level, frob_surjectivity_report, frobenius_root, ramified_uniformizer, witt_perfect_criterion, TowerSpec,
};
use wittkit::witt::{derive_witt_polynomials, Coefficient, IntPoly, PolyKind, WittVector};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ghost_int(p: u64, v: &[BigInt], i: usize, m: &BigInt) -> BigInt {
    let mut s = BigInt::zero();
    for (j, a) in v.iter().enumerate().take(i + 1) {
        s += num_traits::pow(BigInt::from(p), j) * num_traits::pow(a.clone(), p.pow((i - j) as u32) as usize);
    }
    if m.is_zero() {
        s
    } else {
        ((s % m) + m) % m
    }
}

fn values(x: &WittVector<Coefficient>) -> Vec<BigInt> {
    x.comps().iter().map(|c| c.value().clone()).collect()
}

fn random_vector(rng: &mut ChaCha8Rng, p: u64, n: usize, m: &BigInt) -> WittVector<Coefficient> {
    let comps = (0..=n).map(|_| Coefficient::modular(rng.gen_range(-1000i64..1000), m.clone())).collect();
    WittVector::new(p, comps).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    for (p, n) in [(2u64, 3usize), (3, 3), (5, 2)] {
        for kind in PolyKind::ALL {
            let polys = derive_witt_polynomials(p, n, kind).map_err(|e| format!("p={p} n={n} {kind:?}: {e}"))?;
            // ghost identity at an integer point, evaluated independently
            let xs: Vec<i64> = (0..=n + 1).map(|i| 3 - 2 * i as i64).collect();
            let ys: Vec<i64> = (0..=n).map(|i| 2 * i as i64 + 1).collect();
            let one = Coefficient::integer(1);
            let xc: Vec<Coefficient> = xs.iter().map(|v| Coefficient::integer(*v)).collect();
            let yc: Vec<Coefficient> = ys.iter().map(|v| Coefficient::integer(*v)).collect();
            let q: Vec<BigInt> = polys.iter().map(|f| f.eval(&xc, &yc, &one).value().clone()).collect();
            let xb: Vec<BigInt> = xs.iter().map(|v| BigInt::from(*v)).collect();
            let yb: Vec<BigInt> = ys.iter().map(|v| BigInt::from(*v)).collect();
            let z = BigInt::zero();
            for i in 0..=n {
                let expected = match kind {
                    PolyKind::Sum => ghost_int(p, &xb, i, &z) + ghost_int(p, &yb, i, &z),
                    PolyKind::Product => ghost_int(p, &xb, i, &z) * ghost_int(p, &yb, i, &z),
                    PolyKind::Negation => -ghost_int(p, &xb, i, &z),
                    PolyKind::Frobenius => ghost_int(p, &xb, i + 1, &z),
                };
                ensure(ghost_int(p, &q, i, &z) == expected, || format!("ghost identity p={p} {kind:?} i={i}"))?;
            }
        }
    }
    let (x, y) = (IntPoly::x, IntPoly::y);
    let s = derive_witt_polynomials(2, 1, PolyKind::Sum).unwrap();
    ensure(s[1] == x(1).add(&y(1)).sub(&x(0).mul(&y(0))), || format!("S_1 = {}", s[1]))?;
    let pr = derive_witt_polynomials(2, 1, PolyKind::Product).unwrap();
    let two = BigInt::from(2);
    let closed = x(0).pow(2).mul(&y(1)).add(&x(1).mul(&y(0).pow(2))).add(&x(1).mul(&y(1)).scale(&two));
    ensure(pr[1] == closed, || format!("P_1 = {}", pr[1]))?;
    let t = start.elapsed();
    ensure(t < Duration::from_secs(30), || format!("took {t:?}"))?;
    Ok(format!("integral for all (p, n); S_1 = {}, P_1 = {}; {t:.2?}", s[1], pr[1]))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut count = 0;
    for p in [2u64, 3] {
        let n = 2;
        for m in [BigInt::zero(), num_traits::pow(BigInt::from(p), 6)] {
            for _ in 0..200 {
                let (x, y, z) =
                    (random_vector(&mut rng, p, n, &m), random_vector(&mut rng, p, n, &m), random_vector(&mut rng, p, n, &m));
                let s = x.add(&y).unwrap();
                let pr = x.mul(&y).unwrap();
                let (vx, vy) = (values(&x), values(&y));
                for i in 0..=n {
                    let gs = ghost_int(p, &values(&s), i, &m);
                    let gp = ghost_int(p, &values(&pr), i, &m);
                    let (gx, gy) = (ghost_int(p, &vx, i, &m), ghost_int(p, &vy, i, &m));
                    let (es, ep) = if m.is_zero() {
                        (&gx + &gy, &gx * &gy)
                    } else {
                        ((&gx + &gy) % &m, (&gx * &gy) % &m)
                    };
                    ensure(gs == es && gp == ep, || format!("ghost not a ring map: p={p} mod {m} x={x} y={y}"))?;
                }
                ensure(s.add(&z).unwrap() == x.add(&y.add(&z).unwrap()).unwrap(), || format!("+ assoc p={p}"))?;
                ensure(pr.mul(&z).unwrap() == x.mul(&y.mul(&z).unwrap()).unwrap(), || format!("* assoc p={p}"))?;
                let lhs = x.mul(&y.add(&z).unwrap()).unwrap();
                ensure(lhs == pr.add(&x.mul(&z).unwrap()).unwrap(), || format!("distributivity p={p}"))?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} triples (p = 2, 3; over Z and Z/p^6)"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for p in [2u64, 3] {
        let m = num_traits::pow(BigInt::from(p), 6);
        let pp = BigInt::from(p);
        for _ in 0..100 {
            let x = random_vector(&mut rng, p, 1, &m);
            let y = random_vector(&mut rng, p, 2, &m);
            let z = random_vector(&mut rng, p, 2, &m);
            ensure(x.verschiebung().frobenius().unwrap() == x.integer_like(&pp).unwrap().mul(&x).unwrap(), || {
                format!("FV != p on {x}")
            })?;
            ensure(
                x.verschiebung().mul(&y).unwrap() == x.mul(&y.frobenius().unwrap()).unwrap().verschiebung(),
                || format!("V(x)y != V(xF(y)) on {x}, {y}"),
            )?;
            let (fy, fz) = (y.frobenius().unwrap(), z.frobenius().unwrap());
            ensure(y.add(&z).unwrap().frobenius().unwrap() == fy.add(&fz).unwrap(), || "F not additive".into())?;
            ensure(y.mul(&z).unwrap().frobenius().unwrap() == fy.mul(&fz).unwrap(), || "F not multiplicative".into())?;
            let w = random_vector(&mut rng, p, 2, &pp);
            let shortcut: Vec<BigInt> =
                values(&w)[..2].iter().map(|a| num_traits::pow(a.clone(), p as usize) % &pp).collect();
            ensure(values(&w.frobenius().unwrap()) == shortcut, || format!("char-p shortcut on {w}"))?;
            ensure(w.frobenius().unwrap() == w.frobenius_char_p().unwrap(), || "frobenius_char_p".into())?;
        }
        for (i, f) in derive_witt_polynomials(p, 2, PolyKind::Frobenius).unwrap().iter().enumerate() {
            ensure(f.reduce_mod(&pp) == IntPoly::x(i).pow(p), || format!("F_{i} mod {p}"))?;
        }
    }
    Ok("100 samples per identity for p = 2, 3".into())
}

fn criterion_4() -> Outcome {
    let mut out = Vec::new();
    for p in [2u64, 3] {
        for n in 0..=3usize {
            let one = WittVector::new(p, (0..=n).map(|i| Coefficient::modular(i64::from(i == 0), p)).collect()).unwrap();
            let mut acc = one.zero_like();
            let mut order = 0u64;
            loop {
                acc = acc.add(&one).unwrap();
                order += 1;
                if acc.is_zero() || order > p.pow(n as u32 + 2) {
                    break;
                }
            }
            ensure(order == p.pow(n as u32 + 1), || format!("p={p} n={n}: order {order}"))?;
            out.push(order.to_string());
        }
    }
    Ok(format!("orders {}", out.join(", ")))
}

fn criterion_5() -> Outcome {
    let mut specs = vec![TowerSpec::unramified(2, 2, 4, 6), TowerSpec::unramified(3, 2, 4, 6)];
    for p in [2u64, 3] {
        specs.push(TowerSpec::ramified(p, 1, "t1^2", 4, 6).unwrap());
        specs.push(TowerSpec::ramified(p, 2, "t1^2 + t2^3", 4, 6).unwrap());
    }
    let mut monomials = 0;
    for spec in &specs {
        for n in 0..=2 {
            let rep = frob_surjectivity_report(spec, n, 6).map_err(|e| e.to_string())?;
            ensure(rep.all_rooted(), || format!("{spec:?} level {n}: {rep}"))?;
            ensure(rep.nilpotency.bound_certified && rep.nilpotency.exponent_bound <= spec.p.pow(n), || {
                format!("{spec:?} level {n}: nilpotency")
            })?;
            // re-check every root: e = r^p + p d at level n + 1
            let level = build_level(spec, n).unwrap();
            let next = level.next().unwrap();
            let p = spec.p;
            for m in level.alg.basis().unwrap() {
                let deg: u64 = m.iter().zip(level.alg.vars()).filter(|(_, v)| v.graded).map(|(e, _)| *e as u64).sum();
                if deg > 6 * level.alg.scale() as u64 {
                    continue;
                }
                let e = level.alg.monomial(m, 1);
                let (r, d) = frobenius_root(&e, &next).map_err(|err| format!("{e}: {err}"))?;
                let lifted = level.include(&e, &next).unwrap();
                ensure(lifted == r.pow(p).add(&d.scale(p as i128)), || format!("{e} != ({r})^{p} + p({d})"))?;
                monomials += 1;
            }
        }
    }
    Ok(format!("{monomials} monomials rooted across {} towers, levels 0..2", specs.len()))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    for p in [2u64, 3] {
        for g in ["t1^2", "t1^2 + t2^3"] {
            let spec = TowerSpec::ramified(p, 2, g, 5, 12).unwrap();
            let u = ramified_uniformizer(&spec, 1).map_err(|e| format!("p={p} G={g}: {e}"))?;
            let alg = u.pi.algebra().clone();
            let pc = alg.constant(p as i128);
            ensure(u.pi.pow(p) == pc.mul(&u.u), || format!("p={p} G={g}: pi^p != p u"))?;
            ensure(u.u.mul(&u.u_inverse) == alg.one(), || format!("p={p} G={g}: u not a unit"))?;
            let w = witt_perfect_criterion(&spec, 1).map_err(|e| format!("p={p} G={g}: {e}"))?;
            let a = w.r.algebra().clone();
            let target = w.r.pow(p).add(&a.constant(p as i128));
            let q = w.congruence.coefficients().ok_or_else(|| format!("p={p} G={g}: r^p + p not in (p^2)"))?;
            let p2 = a.constant((p * p) as i128);
            ensure(w.congruence.generators == vec![p2.clone()], || "generator is not p^2".into())?;
            ensure(q[0].mul(&p2) == target, || format!("p={p} G={g}: r^p + p != q p^2"))?;
            ensure(w.verify(), || format!("p={p} G={g}: certificate does not re-verify"))?;
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(60), || format!("took {t:?}"))?;
    Ok(format!("4 towers at (N=5, D=12); {t:.2?}"))
}

fn criterion_7() -> Outcome {
    let w3 = witt_perfect_criterion(&TowerSpec::valuation(3, 4), 1).map_err(|e| e.to_string())?;
    let a3 = w3.r.algebra().clone();
    let pi1 = a3.parse("pi^(1/3)").unwrap();
    ensure(w3.r == pi1.neg(), || format!("p=3: r = {}", w3.r))?;
    ensure(pi1.neg().pow(3) == a3.constant(-3), || "(-pi_1)^3 != -3".into())?;
    ensure(w3.verify(), || "p=3 witness".into())?;
    let w2 = witt_perfect_criterion(&TowerSpec::valuation(2, 4), 1).map_err(|e| e.to_string())?;
    let a2 = w2.r.algebra().clone();
    ensure(w2.r == a2.parse("pi^(1/2)").unwrap(), || format!("p=2: r = {}", w2.r))?;
    ensure(w2.s == a2.constant(2) && w2.nexp == 1, || format!("p=2: s = {}, N = {}", w2.s, w2.nexp))?;
    ensure(w2.verify(), || "p=2 witness".into())?;
    Ok(format!("p=3: r = {}; p=2: r = {}, s = {}, N = {}", w3.r, w2.r, w2.s, w2.nexp))
}

fn criterion_8() -> Outcome {
    // (x1, x2) instance
    let plane = AlgebraBuilder::new(2).precision(1).degree_cap(4).vars(&["x1", "x2"]).build().unwrap();
    let (x1, x2) = (plane.parse("x1").unwrap(), plane.parse("x2").unwrap());
    let rel = ParameterRelation { k: 1, xs: vec![x1.clone(), x2.clone()], us: vec![vec![x2], vec![x1]] };
    let m = build_modification(&PartialModule::algebra(&plane), &rel, 2).unwrap();
    let cert = check_trivialization(&m).unwrap();
    ensure(cert.holds && cert.verify(&m).unwrap(), || "trivialization".into())?;

    // beta extension over tower level 1
    let level = build_level(&TowerSpec::unramified(2, 2, 4, 2), 1).unwrap();
    let a = &level.alg;
    let c = level.pi(1).unwrap();
    let (p, x) = (a.constant(2), a.parse("x2").unwrap());
    let rel = ParameterRelation { k: 1, xs: vec![p.clone(), x.clone()], us: vec![vec![x.clone()], vec![p.clone()]] };
    let m = build_modification(&PartialModule::algebra(a), &rel, 2).unwrap();
    let n = 1;
    let alpha = BoundedMap { c: c.clone(), denom_exp: n, numerators: vec![c.clone()] };
    let out = lemma51_beta(&m, &alpha).map_err(|e| e.to_string())?;
    let d = m.degree_bound;
    ensure(out.beta.denom_exp <= n * d + d + n, || format!("exponent {} > ND+D+N", out.beta.denom_exp))?;
    // both paths on every generator, compared in the localization
    for g in &m.source.module.gens {
        let via_beta = out.beta.apply(&m.track(g));
        let via_alpha = alpha.apply(g);
        ensure(fractions_equal(&c, &via_beta, out.beta.denom_exp, &via_alpha, n), || "square does not commute".into())?;
    }
    ensure(out.well_defined, || "beta not well defined".into())?;

    // random admissible sequences
    let l1 = build_level(&TowerSpec::unramified(2, 2, 2, 1), 1).unwrap();
    let sop: Vec<PolyElement> = vec![l1.alg.constant(2), l1.alg.parse("x2").unwrap()];
    let mx = maximal_ideal(&l1.alg).unwrap();
    let mut bad = 0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let steps = 1 + (seed % 3) as usize;
        let seq = random_sequence(&l1.alg, &sop, steps, 1, &mut rng).map_err(|e| format!("seed {seed}: {e}"))?;
        for step in &seq.steps {
            let t = check_trivialization(step).unwrap();
            ensure(t.holds && t.verify(step).unwrap(), || format!("seed {seed}: trivialization"))?;
        }
        bad += seq.is_bad(&mx).unwrap() as usize;
    }
    ensure(bad == 0, || format!("{bad} bad sequences"))?;
    Ok(format!("beta exponent {} <= {}; 50 sequences, 0 bad", out.beta.denom_exp, n * d + d + n))
}

fn criterion_9() -> Outcome {
    let r: Arc<TruncatedAlgebra> = AlgebraBuilder::new(3).precision(6).degree_cap(6).var("x").build().unwrap();
    let h = [r.parse("-3*(1 + x)").unwrap(), r.zero(), r.one()];
    let s = FiniteAlgebra::monogenic(&r, &h).unwrap();
    let et = etale_away_from_p(&s, 5).unwrap();
    ensure(matches!(et.verdict, EtaleVerdict::Etale { .. }), || format!("etale verdict {}", et.verdict.name()))?;
    let sop = [r.constant(3), r.parse("x").unwrap()];
    let certs = monomial_check(&s, &sop, 3).unwrap();
    ensure(certs.len() == 3 && certs.iter().all(|c| !c.is_member() && c.verify()), || "monomial check".into())?;
    let phi = retraction_solver(&s).unwrap().ok_or("no retraction")?;
    ensure(phi.verify(&s) && phi.apply(&s.one) == r.one(), || "phi(1) != 1".into())?;
    // p = 0 in S
    let dead = FiniteAlgebra::from_table(&r, vec![vec![vec![r.one()]]], vec![vec![r.constant(3)]]).unwrap();
    let control = monomial_check(&dead, &sop, 1).unwrap().pop().unwrap();
    ensure(control.is_member() && control.verify(), || "control is not a member".into())?;
    Ok(format!("disc = {}; NonMemberAtTruncation for k = 1..3; phi = {:?}", et.discriminant, phi.values.iter().map(|v| v.to_string()).collect::<Vec<_>>()))
}

fn criterion_10(suite_start: Instant) -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let names = ["witt", "towers", "modifications", "splitting"];
    for name in names {
        let src = std::fs::read_to_string(dir.join(format!("{name}.ring"))).unwrap();
        let doc = parse_document(&src).map_err(|e| e.to_string())?;
        ensure(parse_document(&doc.to_string()).unwrap() == doc, || format!("{name}: round trip"))?;
        let plan = parse_ringspec(&src).unwrap();
        let opts = RunOptions { seed: 7, ..RunOptions::default() };
        let first = run_checks(&plan, opts).to_json_string();
        let second = run_checks(&plan, RunOptions { jobs: 4, ..opts }).to_json_string();
        let golden = std::fs::read_to_string(dir.join(format!("golden/{name}.json"))).unwrap();
        ensure(first == golden && second == golden, || format!("{name}: report differs from golden"))?;
    }
    let t = suite_start.elapsed();
    ensure(t < Duration::from_secs(300), || format!("suite took {t:?}"))?;
    Ok(format!("{} fixtures; acceptance suite {t:.2?}", names.len()))
}

fn main() {
    let suite_start = Instant::now();
    let criteria: Vec<(u32, Box<dyn Fn() -> Outcome>)> = vec![
        (1, Box::new(criterion_1)),
        (2, Box::new(criterion_2)),
        (3, Box::new(criterion_3)),
        (4, Box::new(criterion_4)),
        (5, Box::new(criterion_5)),
        (6, Box::new(criterion_6)),
        (7, Box::new(criterion_7)),
        (8, Box::new(criterion_8)),
        (9, Box::new(criterion_9)),
        (10, Box::new(move || criterion_10(suite_start))),
    ];
    let mut failed = 0;
    for (i, f) in &criteria {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match res {
            Ok(msg) => println!("criterion {i:>2}: PASS ({:.2?}) {msg}", start.elapsed()),
            Err(msg) => {
                failed += 1;
                println!("criterion {i:>2}: FAIL ({:.2?}) {msg}", start.elapsed())
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
