//! Execution of a check plan and the JSON report.

use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::plan::{Ambient, CheckPlan, CheckSpec, PlannedCheck};
use crate::almost::{colon_defect, tower_killers};
use crate::error::{Error, Result};
use crate::exactalg::text::expand;
use crate::exactalg::{Expr, MembershipCertificate, PolyElement, TruncatedAlgebra};
use crate::modifications::{
    build_modification, check_trivialization, lemma51_beta, maximal_ideal, random_sequence, BoundedMap,
    ParameterRelation, PartialModule,
};
use crate::splitting::{etale_away_from_p, monomial_check, retraction_solver, EtaleVerdict, FiniteAlgebra};
use crate::towers::{
    build_level, frob_surjectivity_report, p_big_sequence, ramified_uniformizer, witt_perfect_criterion, TowerLevel,
};
use crate::witt::{sample_identities, unit_order};

pub const SCHEMA: &str = "wittkit/1";

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub seed: u64,
    pub jobs: usize,
    pub timings: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { seed: 0, jobs: 1, timings: false }
    }
}

#[derive(Debug, Clone)]
pub struct CheckRecord {
    pub name: String,
    pub kind: &'static str,
    pub pass: bool,
    pub verdict: String,
    /// Every emitted certificate was checked again after construction.
    pub reverified: bool,
    pub precision: Value,
    pub certificates: Value,
    pub error: Option<String>,
    pub wall_ms: Option<u128>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| {
                let mut v = json!({
                    "name": c.name,
                    "kind": c.kind,
                    "pass": c.pass,
                    "verdict": c.verdict,
                    "reverified": c.reverified,
                    "precision": c.precision,
                    "certificates": c.certificates,
                });
                if let Some(e) = &c.error {
                    v["error"] = json!(e);
                }
                if let Some(ms) = c.wall_ms {
                    v["wall_ms"] = json!(ms);
                }
                v
            })
            .collect();
        json!({ "schema": SCHEMA, "seed": self.seed, "pass": self.pass(), "checks": checks })
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Outcome of a single check before bookkeeping.
struct Outcome {
    pass: bool,
    verdict: String,
    reverified: bool,
    precision: Value,
    certificates: Value,
}

fn precision_of(alg: &TruncatedAlgebra) -> Value {
    let (n, level, d) = alg.truncation();
    json!({ "N": n, "n": level, "D": d })
}

fn text(e: &PolyElement) -> Value {
    json!(e.to_string())
}

fn texts(v: &[PolyElement]) -> Value {
    Value::Array(v.iter().map(text).collect())
}

fn membership_json(c: &MembershipCertificate) -> Value {
    json!({
        "target": text(&c.target),
        "generators": texts(&c.generators),
        "member": c.is_member(),
        "coefficients": c.coefficients().map(texts),
    })
}

fn pass_fail(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.to_string()
}

struct Ctx<'a> {
    plan: &'a CheckPlan,
    seed: u64,
}

impl Ctx<'_> {
    fn tower_level(&self, name: &str, level: u32) -> Result<TowerLevel> {
        build_level(&self.plan.towers[name], level)
    }

    fn ambient(&self, a: &Ambient) -> Result<(Arc<TruncatedAlgebra>, Option<TowerLevel>)> {
        match a {
            Ambient::Tower { name, level } => {
                let l = self.tower_level(name, *level)?;
                Ok((l.alg.clone(), Some(l)))
            }
            Ambient::Algebra { name } => Ok((self.plan.algebras[name].clone(), None)),
        }
    }
}

fn elements(alg: &Arc<TruncatedAlgebra>, es: &[Expr]) -> Result<Vec<PolyElement>> {
    es.iter().map(|e| alg.from_expr(e)).collect()
}

/// Coefficients of `h` as a polynomial in `z` over `alg`, constant term first.
fn z_coefficients(alg: &Arc<TruncatedAlgebra>, h: &Expr) -> Result<Vec<PolyElement>> {
    let mut vars: Vec<String> = alg.vars().iter().map(|v| v.name.clone()).collect();
    if vars.iter().any(|v| v == "z") {
        return Err(Error::InvalidAlgebra("`z` is reserved for the cover variable".into()));
    }
    vars.push("z".into());
    let raw = expand(h, &vars, alg.p(), alg.level())?;
    let scale = alg.scale();
    let zi = vars.len() - 1;
    let mut by_degree: Vec<crate::exactalg::text::RawTerms> = Vec::new();
    for (m, c) in raw {
        if m[zi] % scale != 0 {
            return Err(Error::InvalidAlgebra("fractional power of z".into()));
        }
        let deg = (m[zi] / scale) as usize;
        if by_degree.len() <= deg {
            by_degree.resize_with(deg + 1, Default::default);
        }
        let mut base = m.clone();
        base.truncate(zi);
        *by_degree[deg].entry(base).or_insert(0) += c;
    }
    Ok(by_degree.into_iter().map(|t| alg.reduce_scaled(t)).collect())
}

fn run_spec(ctx: &Ctx, spec: &CheckSpec) -> Result<Outcome> {
    match spec {
        CheckSpec::WittIdentities { p, n, samples } => {
            let rep = sample_identities(*p, *n as usize, *samples, ctx.seed)?;
            let order = unit_order(*p, *n as usize)?;
            let order_ok = order == p.pow(*n + 1);
            let counts: serde_json::Map<String, Value> =
                rep.counts.iter().map(|(k, (ok, total))| (k.to_string(), json!([ok, total]))).collect();
            let pass = rep.all_pass() && order_ok;
            Ok(Outcome {
                pass,
                verdict: pass_fail(pass),
                reverified: true,
                precision: json!({ "n": n, "p": p }),
                certificates: json!({ "samples": samples, "counts": counts, "unit_order": order }),
            })
        }
        CheckSpec::TowerFrobenius { tower, level, degree } => {
            let spec = &ctx.plan.towers[tower];
            let rep = frob_surjectivity_report(spec, *level, *degree)?;
            let bound_ok = rep.nilpotency.exponent_bound <= spec.p.pow(*level);
            let reverified = rep.records.iter().all(|r| r.certified) && rep.nilpotency.bound_certified;
            let pass = rep.all_rooted() && reverified && bound_ok;
            let (n, lv, d) = rep.truncation;
            Ok(Outcome {
                pass,
                verdict: format!("{}/{} rooted", rep.rooted, rep.total),
                reverified,
                precision: json!({ "N": n, "n": lv, "D": d }),
                certificates: json!({
                    "roots": rep.records.iter().map(|r| json!([r.element, r.root])).collect::<Vec<_>>(),
                    "nilpotent": {
                        "element": rep.nilpotency.element,
                        "exponent_bound": rep.nilpotency.exponent_bound,
                        "cofactor": rep.nilpotency.cofactor,
                        "sharp": rep.nilpotency.bound_sharp,
                    },
                    "same_level_failure": rep.same_level.as_ref().map(|s| json!({
                        "element": s.element,
                        "rooted_at_same_level": s.rooted_at_same_level,
                    })),
                }),
            })
        }
        CheckSpec::PBig { tower, level } => {
            let w = p_big_sequence(&ctx.plan.towers[tower], *level)?;
            let ok = w.verify();
            Ok(Outcome {
                pass: ok,
                verdict: if ok { "PBig" } else { "unverified" }.into(),
                reverified: ok,
                precision: precision_of(&w.level.alg),
                certificates: json!({ "pis": texts(&w.pis), "units": texts(&w.units), "unit_inverses": texts(&w.unit_inverses) }),
            })
        }
        CheckSpec::Uniformizer { tower, level } => {
            let u = ramified_uniformizer(&ctx.plan.towers[tower], *level)?;
            let ok = u.verify();
            Ok(Outcome {
                pass: ok,
                verdict: if ok { "Uniformizer" } else { "unverified" }.into(),
                reverified: ok,
                precision: precision_of(&u.level.alg),
                certificates: json!({
                    "decomposition": u.decomposition.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
                    "pi": text(&u.pi),
                    "u": text(&u.u),
                    "u_inverse": text(&u.u_inverse),
                }),
            })
        }
        CheckSpec::WittPerfect { tower, level } => {
            let w = witt_perfect_criterion(&ctx.plan.towers[tower], *level)?;
            let ok = w.verify();
            Ok(Outcome {
                pass: ok,
                verdict: if ok { "WittPerfect" } else { "unverified" }.into(),
                reverified: ok,
                precision: precision_of(w.r.algebra()),
                certificates: json!({
                    "r": text(&w.r),
                    "s": text(&w.s),
                    "N": w.nexp,
                    "v": w.v.as_ref().map(text),
                    "congruence": membership_json(&w.congruence),
                    "power": membership_json(&w.power),
                }),
            })
        }
        CheckSpec::ColonDefect { ambient, sop, i, transfer, expect } => {
            let (alg, level) = ctx.ambient(ambient)?;
            let killers = match &level {
                Some(l) => tower_killers(l)?,
                None => Vec::new(),
            };
            let sop = elements(&alg, sop)?;
            let transfer = elements(&alg, transfer)?;
            let rep = colon_defect(&alg, 1, &sop, *i, &killers, &transfer)?;
            let consistent = rep.killers_monotone() && rep.transfer.iter().all(|t| *t);
            let verdict_ok = match expect {
                Some(e) => e == rep.verdict.name(),
                None => rep.verdict != crate::almost::DefectVerdict::NotAlmostZero,
            };
            let (n, lv, d) = rep.truncation;
            Ok(Outcome {
                pass: consistent && verdict_ok,
                verdict: rep.verdict.name().into(),
                reverified: consistent,
                precision: json!({ "N": n, "n": lv, "D": d }),
                certificates: json!({
                    "colon_generators": rep.colon_basis.iter().map(|v| texts(v)).collect::<Vec<_>>(),
                    "killers": rep.killers.iter().map(|(e, k)| json!([e, k])).collect::<Vec<_>>(),
                    "witness": rep.witness.as_ref().map(|(e, v)| json!({ "level": e, "generator": texts(v) })),
                    "transfer": rep.transfer,
                }),
            })
        }
        CheckSpec::Modification { ambient, sop, steps, n, samples } => {
            let (alg, _) = ctx.ambient(ambient)?;
            let sop = elements(&alg, sop)?;
            let mx = maximal_ideal(&alg)?;
            let (mut bad, mut trivial, mut total_steps) = (0usize, 0usize, 0usize);
            let mut lengths = Vec::new();
            for i in 0..*samples {
                let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed.wrapping_add(i as u64));
                let seq = random_sequence(&alg, &sop, *steps, *n, &mut rng)?;
                for step in &seq.steps {
                    let cert = check_trivialization(step)?;
                    total_steps += 1;
                    trivial += (cert.holds && cert.verify(step)?) as usize;
                }
                bad += seq.is_bad(&mx)? as usize;
                lengths.push(seq.last().length()?);
            }
            let pass = bad == 0 && trivial == total_steps;
            Ok(Outcome {
                pass,
                verdict: if bad == 0 { "NoBadSequence" } else { "BadSequenceFound" }.into(),
                reverified: trivial == total_steps,
                precision: precision_of(&alg),
                certificates: json!({
                    "sequences": samples,
                    "bad": bad,
                    "steps": total_steps,
                    "trivializations_verified": trivial,
                    "final_lengths": lengths,
                }),
            })
        }
        CheckSpec::Lemma51 { ambient, sop, k, u, n, c, e, alpha } => {
            let (alg, _) = ctx.ambient(ambient)?;
            let xs = elements(&alg, sop)?;
            if xs.len() < k + 1 {
                return Err(Error::Precondition(format!("k = {k} needs {} parameters", k + 1)));
            }
            let xs = xs[..=*k].to_vec();
            let us: Vec<Vec<PolyElement>> = match u {
                Some(u) => elements(&alg, u)?.into_iter().map(|x| vec![x]).collect(),
                None if *k == 1 => vec![vec![xs[1].clone()], vec![xs[0].clone()]],
                None => return Err(Error::Precondition("`u` is required unless k = 1".into())),
            };
            let rel = ParameterRelation { k: *k, xs, us };
            let m = build_modification(&PartialModule::algebra(&alg), &rel, *n)?;
            let c = alg.from_expr(c)?;
            let alpha = BoundedMap { c: c.clone(), denom_exp: *e, numerators: vec![alg.from_expr(alpha)?] };
            let out = lemma51_beta(&m, &alpha)?;
            let within = out.beta.denom_exp <= out.bound;
            let pass = out.square_commutes && out.well_defined && within;
            Ok(Outcome {
                pass,
                verdict: pass_fail(pass),
                reverified: out.square_commutes && out.well_defined,
                precision: precision_of(&alg),
                certificates: json!({
                    "t_prime": texts(&out.t_prime),
                    "denominator_exponent": out.beta.denom_exp,
                    "bound": out.bound,
                    "sharp_exponent": out.sharp_exponent,
                    "square_commutes": out.square_commutes,
                    "well_defined": out.well_defined,
                }),
            })
        }
        CheckSpec::Split { algebra, h, sop, k, expect } => {
            let alg = &ctx.plan.algebras[algebra];
            let s = FiniteAlgebra::monogenic(alg, &z_coefficients(alg, h)?)?;
            let sop = elements(alg, sop)?;
            let certs = monomial_check(&s, &sop, *k)?;
            let retraction = retraction_solver(&s)?;
            let reverified = certs.iter().all(|c| c.verify()) && retraction.as_ref().map_or(true, |r| r.verify(&s));
            let members: Vec<bool> = certs.iter().map(|c| c.is_member()).collect();
            let expect_ok = match expect {
                Some(m) => members.iter().all(|x| x == m),
                None => true,
            };
            let records: Vec<Value> = certs
                .iter()
                .map(|c| {
                    json!({
                        "k": c.k,
                        "verdict": if c.is_member() { "Member" } else { "NonMemberAtTruncation" },
                        "verified": c.verify(),
                        "coefficients": c.coefficients.as_deref().map(texts),
                    })
                })
                .collect();
            let verdict = if members.iter().all(|m| *m) {
                "Member"
            } else if members.iter().all(|m| !*m) {
                "NonMemberAtTruncation"
            } else {
                "Mixed"
            };
            Ok(Outcome {
                pass: reverified && expect_ok,
                verdict: verdict.into(),
                reverified,
                precision: precision_of(alg),
                certificates: json!({
                    "monomial": records,
                    "retraction": retraction.as_ref().map(|r| texts(&r.values)),
                    "retraction_of_one": retraction.as_ref().map(|r| text(&r.apply(&s.one))),
                }),
            })
        }
        CheckSpec::Etale { algebra, h, a, expect } => {
            let alg = &ctx.plan.algebras[algebra];
            let s = FiniteAlgebra::monogenic(alg, &z_coefficients(alg, h)?)?;
            let rep = etale_away_from_p(&s, *a)?;
            let (etale, reverified, cert) = match &rep.verdict {
                EtaleVerdict::Etale { a, certificate } => {
                    (true, certificate.verify(), json!({ "a": a, "membership": membership_json(certificate) }))
                }
                EtaleVerdict::NotEtaleAwayFromP { a_max } => (false, true, json!({ "a_max": a_max })),
            };
            let expect_ok = expect.map_or(true, |x| x == etale);
            Ok(Outcome {
                pass: reverified && expect_ok,
                verdict: rep.verdict.name().into(),
                reverified,
                precision: precision_of(alg),
                certificates: json!({ "discriminant": text(&rep.discriminant), "verdict": cert }),
            })
        }
    }
}

fn run_one(ctx: &Ctx, check: &PlannedCheck, timings: bool) -> CheckRecord {
    let start = Instant::now();
    let outcome = run_spec(ctx, &check.spec);
    let wall_ms = timings.then(|| start.elapsed().as_millis());
    match outcome {
        Ok(o) => CheckRecord {
            name: check.name.clone(),
            kind: check.spec.kind(),
            pass: o.pass,
            verdict: o.verdict,
            reverified: o.reverified,
            precision: o.precision,
            certificates: o.certificates,
            error: None,
            wall_ms,
        },
        Err(e) => CheckRecord {
            name: check.name.clone(),
            kind: check.spec.kind(),
            pass: false,
            verdict: "error".into(),
            reverified: false,
            precision: Value::Null,
            certificates: Value::Null,
            error: Some(e.to_string()),
            wall_ms,
        },
    }
}

/// Runs every check; independent checks run on up to `jobs` threads and the
/// report keeps declaration order.
pub fn run_checks(plan: &CheckPlan, opts: RunOptions) -> Report {
    let ctx = Ctx { plan, seed: opts.seed };
    let checks = if opts.jobs <= 1 {
        plan.checks.iter().map(|c| run_one(&ctx, c, opts.timings)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.jobs).build().expect("thread pool");
        pool.install(|| plan.checks.par_iter().map(|c| run_one(&ctx, c, opts.timings)).collect())
    };
    Report { seed: opts.seed, checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::parse_ringspec;

    #[test]
    fn witt_identities_pass() {
        let plan = parse_ringspec("check witt-identities W { p=2; n=2; samples=5; }").unwrap();
        let rep = run_checks(&plan, RunOptions::default());
        assert!(rep.pass(), "{}", rep.to_json_string());
        assert_eq!(rep.checks[0].certificates["counts"]["fv_eq_p"], json!([5, 5]));
    }

    #[test]
    fn split_instance() {
        let src = "algebra R { vars=x; mod=3^6; cap=6; }\n\
                   check split S { algebra=R; h=z^2 - 3*(1 + x); sop=3, x; k=3; expect=non-member; }\n\
                   check etale E { algebra=R; h=z^2 - 3*(1 + x); a=5; expect=etale; }";
        let rep = run_checks(&parse_ringspec(src).unwrap(), RunOptions::default());
        assert!(rep.pass(), "{}", rep.to_json_string());
        let recs = rep.checks[0].certificates["monomial"].as_array().unwrap();
        assert_eq!(recs.len(), 3);
        assert!(recs.iter().all(|r| r["verdict"] == "NonMemberAtTruncation"));
    }

    #[test]
    fn errors_become_failure_records() {
        let src = "tower T { kind=unramified; p=2; d=2; N=3; D=2; }\ncheck uniformizer U { tower=T; level=1; }";
        let rep = run_checks(&parse_ringspec(src).unwrap(), RunOptions::default());
        assert!(!rep.pass());
        assert_eq!(rep.checks[0].verdict, "error");
        assert!(rep.checks[0].error.is_some());
    }

    #[test]
    fn parallel_matches_serial() {
        let src = "tower T { kind=valuation; p=3; N=4; }\n\
                   check p-big B { tower=T; level=2; }\n\
                   check witt-perfect W { tower=T; level=1; }\n\
                   check tower-frobenius F { tower=T; level=1; degree=3; }";
        let plan = parse_ringspec(src).unwrap();
        let a = run_checks(&plan, RunOptions::default()).to_json_string();
        let b = run_checks(&plan, RunOptions { jobs: 3, ..RunOptions::default() }).to_json_string();
        assert_eq!(a, b);
    }
}
