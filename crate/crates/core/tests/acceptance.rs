//! Acceptance gate: one line per criterion, then a single assertion over all.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::process::Command;
use std::time::{Duration, Instant};

use cstar_modular::cstar_algebra::{AlgebraContext, Element, NormMode, OrderMode};
use cstar_modular::cstar_class::{
    verify_cstar_class, verify_monotone_triple, verify_triple_membership, CStarFunction, MonotoneTriple, PositiveMap,
};
use cstar_modular::fixed_point::{
    check_contraction, check_owc, constant_two_system, find_common_fixed_point, SearchDomain, CONTRACTION_CLAUSE,
};
use cstar_modular::harness::{asymmetric_metric, derived_distance_check, positivity_counterexample, Demo};
use cstar_modular::integral_solver::{
    estimate_m1, random_inits, solve, wrapped_system, GridDomain, InstanceSpec, SolveParams,
};
use cstar_modular::modular_metric::{
    check_axioms, check_lambda_monotonicity, geometric_weighted_metric, multiplication_metric, scalar_diagonal_metric,
    Axiom, Carrier, ModularMetric, Point, Sampler,
};
use cstar_modular::sampling::{random_matrix, seeded, ConeSampler};

type Verdict = Result<String, String>;
/// Id, title, check, runtime budget in seconds.
type Criterion = (u8, &'static str, fn() -> Verdict, Option<u64>);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn criterion_1() -> Verdict {
    let ctx = AlgebraContext::new(2).unwrap();
    let (a, b) = positivity_counterexample();
    ensure(a == Element::from_real_rows(2, &[3.0, 2.0, 2.0, 3.0]), "a entries")?;
    ensure(b == Element::from_real_rows(2, &[1.0, -2.0, -2.0, 4.0]), "b entries")?;
    let ab = &a * &b;
    ensure(ab == Element::from_real_rows(2, &[-1.0, 2.0, -4.0, 8.0]), "ab entries")?;
    ensure(ctx.is_positive(&a), "a classified not positive")?;
    ensure(ctx.is_positive(&b), "b classified not positive")?;
    ensure(!ctx.is_positive(&ab), "ab classified positive")?;
    Ok(format!("ab defect {:.3}", ctx.positivity_defect(&ab)))
}

fn axiom_suite(metric: &ModularMetric, seed: u64) -> Result<usize, String> {
    let mut sampler = metric.sampler(seed);
    let mut violations = 0;
    for r in check_axioms(metric, &mut sampler, 1000).map_err(|e| e.to_string())? {
        ensure(
            r.samples == 1000,
            format!("{}: {:?} drew {} samples", metric.name(), r.axiom, r.samples),
        )?;
        violations += r.violation_count;
    }
    let mono = check_lambda_monotonicity(metric, &mut sampler, 1000).map_err(|e| e.to_string())?;
    violations += mono.violation_count;
    Ok(violations)
}

fn criterion_2() -> Verdict {
    let grid = GridDomain::trapezoid(0.0, 1.0, 64).unwrap();
    let metrics = [
        scalar_diagonal_metric(),
        geometric_weighted_metric(0.5, 2.0).unwrap(),
        multiplication_metric(&grid).unwrap(),
    ];
    for m in &metrics {
        ensure(m.ctx().positivity_tol == 1e-10, "tolerance is not 1e-10")?;
        let v = axiom_suite(m, 0)?;
        ensure(v == 0, format!("{}: {v} violations", m.name()))?;
    }
    let broken = asymmetric_metric();
    let reports = check_axioms(&broken, &mut broken.sampler(0), 1000).map_err(|e| e.to_string())?;
    let sym = reports
        .iter()
        .find(|r| r.axiom == Axiom::Symmetry)
        .ok_or("no symmetry report")?;
    ensure(!sym.passed, "asymmetric evaluator not flagged")?;
    Ok(format!(
        "3 suites clean; asymmetric flagged {} times",
        sym.violation_count
    ))
}

fn criterion_3() -> Verdict {
    let mut rng = seeded(0);
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let a = random_matrix(&mut rng, 1 + k % 5, k % 2 == 0).scale(1.0 + (k % 7) as f64);
        let n = a.norm(NormMode::Operator).unwrap();
        let nn = (&a.involution().unwrap() * &a).norm(NormMode::Operator).unwrap();
        let rel = (nn - n * n).abs() / (1.0 + n * n);
        worst = worst.max(rel);
    }
    ensure(worst <= 1e-10, format!("C*-identity defect {worst:e}"))?;
    let w = Element::from_real_rows(2, &[1.0, 1.0, 0.0, 1.0]);
    let lhs = (&w.involution().unwrap() * &w).norm(NormMode::Frobenius).unwrap();
    let rhs = w.norm(NormMode::Frobenius).unwrap().powi(2);
    ensure((lhs - 7f64.sqrt()).abs() < 1e-12, format!("||a*a||_F = {lhs}"))?;
    ensure((rhs - 3.0).abs() < 1e-12, format!("||a||_F^2 = {rhs}"))?;
    Ok(format!(
        "max relative defect {worst:.1e}; frobenius witness sqrt(7) vs 3"
    ))
}

fn criterion_4() -> Verdict {
    let loewner = AlgebraContext::new(3).unwrap();
    let entrywise = AlgebraContext::new(2)
        .unwrap()
        .with_norm(NormMode::Frobenius)
        .with_order(OrderMode::Entrywise);
    let functions = [
        CStarFunction::subtract(),
        CStarFunction::scale(0.5).unwrap(),
        CStarFunction::phi_subtract(PositiveMap::linear(0.5)),
    ];
    for (label, ctx, mut sampler) in [
        ("loewner", loewner, ConeSampler::complex(0)),
        ("entrywise", entrywise, ConeSampler::new(0)),
    ] {
        for f in &functions {
            let r = verify_cstar_class(f, &ctx, &mut sampler, 1000);
            ensure(r.passed, format!("{} rejected ({label})", f.name()))?;
        }
    }
    let triples = [
        (
            "worked example",
            MonotoneTriple::new(
                PositiveMap::linear(2.0),
                PositiveMap::linear(1.0),
                CStarFunction::subtract(),
            ),
            entrywise,
        ),
        (
            "integral system",
            MonotoneTriple::new(
                PositiveMap::linear(0.5),
                PositiveMap::linear(0.25),
                CStarFunction::scale(FRAC_1_SQRT_2).unwrap(),
            ),
            loewner,
        ),
    ];
    for (label, t, ctx) in &triples {
        let mono = verify_monotone_triple(t, ctx, &mut ConeSampler::complex(1), 1000);
        ensure(
            mono.passed && mono.clauses[0].samples == 1000,
            format!("{label} triple not monotone"),
        )?;
        for r in verify_triple_membership(t, ctx, &mut ConeSampler::complex(2), 1000) {
            ensure(r.passed, format!("{label} triple: {} failed", r.subject))?;
        }
    }
    let sum = CStarFunction::new("sum", |a, b| a + b);
    ensure(
        !verify_cstar_class(&sum, &loewner, &mut ConeSampler::complex(0), 1000).passed,
        "A + B accepted",
    )?;
    Ok("3 functions x 2 orders, 2 triples, A + B rejected".into())
}

fn criterion_5() -> Verdict {
    let sys = constant_two_system();
    let r = check_contraction(&sys, &mut sys.metric().sampler(0), 500).map_err(|e| e.to_string())?;
    let c = r.clause(CONTRACTION_CLAUSE).ok_or("missing clause")?;
    ensure(
        r.passed && c.samples == 500,
        format!("contraction: {} violations", c.violation_count),
    )?;
    let dom = SearchDomain::interval(-10.0, 10.0, 1e-3);
    let two = Point::Scalar(2.0);
    for (label, f, g) in [("(S, I)", sys.sr(), &sys.maps().i), ("(T, J)", sys.tu(), &sys.maps().j)] {
        let o = check_owc(f, g, &dom, 1e-12).map_err(|e| e.to_string())?;
        ensure(o.owc && o.witness.as_ref() == Some(&two), format!("owc {label}: {o:?}"))?;
    }
    let fp = find_common_fixed_point(&sys, &dom, 1e-12).map_err(|e| e.to_string())?;
    ensure(fp.point.as_ref() == Some(&two), format!("fixed point {:?}", fp.point))?;
    let res = fp.residuals.ok_or("no residuals")?.composite();
    ensure(res <= 1e-12, format!("residual {res:e}"))?;
    ensure(
        fp.unique_in_domain && fp.candidates.len() == 1 && fp.hits == 1,
        "second fixed point in scan",
    )?;
    Ok(format!("w = 2, residual {res:e}, 20001-point scan"))
}

fn criterion_6() -> Verdict {
    let sys = InstanceSpec::canonical(64).build().map_err(|e| e.to_string())?;
    let m1 = estimate_m1(&sys);
    ensure((m1 - 0.5).abs() <= 1e-3, format!("M1 = {m1}"))?;
    let solv = sys.solvability().map_err(|e| e.to_string())?;
    let expected = (1.0 + 0.2 * 1.0 * m1) / SQRT_2;
    ensure(
        (solv.bound - expected).abs() <= 1e-15 && solv.ok,
        format!("bound {}", solv.bound),
    )?;
    let r = solve(&sys, &random_inits(64, 5, 0), SolveParams::default()).map_err(|e| e.to_string())?;
    ensure(r.agreed_across_inits, format!("inits spread {:e}", r.init_spread))?;
    let err = sys
        .grid()
        .points()
        .iter()
        .zip(&r.solution)
        .map(|(t, x)| ((PI * t).sin() - x).abs())
        .fold(0.0, f64::max);
    ensure(err <= 1e-8, format!("sup error {err:e}"))?;
    let m = r.residuals;
    for (name, v) in [("S", m.s), ("T", m.t), ("I", m.i), ("J", m.j)] {
        ensure(v <= 1e-8, format!("{name} residual {v:e}"))?;
    }
    let wrapped = wrapped_system(&sys).map_err(|e| e.to_string())?;
    let mut sampler = Sampler::new(
        Carrier::Ball {
            center: Point::Grid(r.solution.clone()),
            radius: 1.0,
        },
        0,
    );
    let c = check_contraction(&wrapped, &mut sampler, 500).map_err(|e| e.to_string())?;
    ensure(
        c.passed && c.clauses[0].samples == 500,
        format!("wrapped contraction: {} violations", c.clauses[0].violation_count),
    )?;
    Ok(format!("bound {:.4}, sup error {err:.1e}", solv.bound))
}

fn criterion_7() -> Verdict {
    let check = derived_distance_check(&scalar_diagonal_metric(), 0, 100).map_err(|e| e.to_string())?;
    ensure(check.passed, format!("{}", check.details))?;
    Ok(format!("max error {}", check.details["max_error"]))
}

fn criterion_8() -> Verdict {
    for demo in Demo::ALL {
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_cstar-mm"))
                .args(["demo", demo.name(), "--no-timestamp"])
                .output()
                .map_err(|e| e.to_string())
        };
        let (a, b) = (run()?, run()?);
        ensure(
            a.status.success(),
            format!("{} exited {:?}", demo.name(), a.status.code()),
        )?;
        ensure(
            !a.stdout.is_empty() && a.stdout == b.stdout,
            format!("{} not byte-identical", demo.name()),
        )?;
    }
    Ok(format!("{} demos x 2 runs", Demo::ALL.len()))
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 8] = [
        (1, "positivity counterexample", criterion_1, Some(1)),
        (2, "axiom suites", criterion_2, Some(10)),
        (3, "C*-identity", criterion_3, None),
        (4, "C*-class functions and triples", criterion_4, None),
        (5, "worked example end to end", criterion_5, Some(30)),
        (6, "integral system canonical instance", criterion_6, Some(30)),
        (7, "derived distances vs closed forms", criterion_7, None),
        (8, "demo determinism", criterion_8, None),
    ];
    let mut failed = Vec::new();
    for (id, title, run, budget) in criteria {
        let start = Instant::now();
        let mut verdict = run();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(secs)) = (&verdict, budget) {
            if elapsed > Duration::from_secs(secs) {
                verdict = Err(format!("took {:.2}s, budget {secs}s", elapsed.as_secs_f64()));
            }
        }
        let (tag, detail) = match &verdict {
            Ok(d) => ("PASS", d.clone()),
            Err(d) => ("FAIL", d.clone()),
        };
        println!(
            "criterion {id} [{tag}] {title}: {detail} ({:.2}s)",
            elapsed.as_secs_f64()
        );
        if verdict.is_err() {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
