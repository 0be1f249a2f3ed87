//! Acceptance criteria, one pass/fail line each.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::*;
use singular_flow::autonomize::{to_autonomous, vector_extension, JetField, Mode};
use singular_flow::engine::{
    evaluate_solution_field, project_to_level_fixing, run_constraint_algorithm, AnalysisResult,
    ConstraintEvaluator, EngineOptions, Status,
};
use singular_flow::expr::{parse_expr, Scope};
use singular_flow::integrate::{integrate, IntegrateOptions, Trajectory};
use singular_flow::linalg::Matrix;
use singular_flow::mechanics::lagrangian_system;
use singular_flow::system::{load_system_str, LoadedSystem};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn column(traj: &Trajectory, name: &str) -> Vec<f64> {
    traj.column(name).unwrap_or_else(|| panic!("no column {name}"))
}

fn raw_pendulum_point(rng: &mut StdRng) -> Vec<f64> {
    let t = rng.gen_range(0.0..3.0);
    let angle = rng.gen_range(-3.0..3.0);
    let r = radius(t).0 * rng.gen_range(0.9..1.1);
    vec![
        t,
        r * f64::cos(angle),
        r * f64::sin(angle),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(5.0..15.0),
    ]
}

fn accumulated(result: &AnalysisResult, upto: usize) -> Vec<ConstraintEvaluator> {
    result.levels[..=upto]
        .iter()
        .flat_map(|l| l.constraints.iter().cloned())
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let result = analyze(PENDULUM, &[vec![0.0, 1.0, 0.0, 0.1, 0.0, 0.0]]);
    let elapsed = start.elapsed();
    ensure(result.status == Status::Solved, || format!("status {:?}", result.status))?;
    ensure(result.levels.len() == 3, || format!("{} levels", result.levels.len()))?;
    ensure(result.gauge_dimension == 0, || format!("gauge {}", result.gauge_dimension))?;

    let oracles: [&dyn Fn(&[f64]) -> f64; 3] = [&phi1, &phi2, &phi3];
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst = 0.0_f64;
    for level in 0..3 {
        let engine = accumulated(&result, level);
        for _ in 0..100 {
            // engine zero set ⊂ oracle zero set
            let p = project_to_level_fixing(&raw_pendulum_point(&mut rng), &engine, 1e-12, Some(0))
                .map_err(|e| e.to_string())?;
            let r = max_abs(oracles[..=level].iter().map(|f| f(&p)));
            worst = worst.max(r);
            ensure(r <= 1e-9, || format!("level {level}: oracle {r:e} at engine point"))?;
            // oracle zero set ⊂ engine zero set
            let q = newton_project(&oracles[..=level], &raw_pendulum_point(&mut rng), 0);
            let r = max_abs(engine.iter().map(|c| c.value(&q).unwrap()));
            worst = worst.max(r);
            ensure(r <= 1e-9, || format!("level {level}: engine {r:e} at oracle point"))?;
        }
    }
    ensure(elapsed < Duration::from_secs(5), || format!("analysis took {elapsed:?}"))?;
    Ok(format!("3 levels, gauge 0, zero sets agree to {worst:.1e}, analysis {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let result = analyze(PENDULUM, &[vec![0.0, 1.0, 0.0, 0.1, 0.0, 0.0]]);
    let field = result.solution_field.as_ref().ok_or("not solved")?;
    let mut rng = StdRng::seed_from_u64(2);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let p = field.project(&raw_pendulum_point(&mut rng)).map_err(|e| e.to_string())?;
        let x = evaluate_solution_field(&result, &p).map_err(|e| e.to_string())?;
        let expected = polar_field(&p);
        let err = max_abs((0..5).map(|i| x[i] - expected[i]));
        worst = worst.max(err);
        ensure(err <= 1e-8, || format!("field differs by {err:e} at {p:?}"))?;
    }
    Ok(format!("100 points, max componentwise error {worst:.1e}"))
}

fn number(v: f64) -> String {
    format!("({v:.6})")
}

/// A regular affine time-dependent system and a random jet field for it.
fn random_regular_system(rng: &mut StdRng, n: usize) -> (String, Vec<String>) {
    let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let scale = 0.2 / n as f64;
    let a: Vec<Vec<String>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let b = number(rng.gen_range(-1.0..1.0) * scale);
                    let diag = if i == j { "1 + " } else { "" };
                    format!("{diag}{b}*(1 + 0.5*sin(t))")
                })
                .collect()
        })
        .collect();
    let c: Vec<String> = (0..n)
        .map(|_| {
            let mut e = format!("{}*cos(t)", number(rng.gen_range(-1.0..1.0)));
            for name in &names {
                e.push_str(&format!(" + {}*{name}", number(rng.gen_range(-1.0..1.0))));
            }
            e
        })
        .collect();
    let gamma: Vec<String> = (0..n)
        .map(|_| {
            let mut e = format!("{} + {}*t", number(rng.gen_range(-1.0..1.0)), number(rng.gen_range(-1.0..1.0)));
            for name in &names {
                e.push_str(&format!(" + {}*{name}", number(rng.gen_range(-0.5..0.5))));
            }
            e
        })
        .collect();
    let doc = serde_json::json!({
        "kind": "linearly_singular",
        "states": names,
        "A": a,
        "c": c,
    });
    (doc.to_string(), gamma)
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    for k in 0..50 {
        let n = 1 + k % 5;
        let (doc, gamma) = random_regular_system(&mut rng, n);
        let sys = load_system_str(&doc).map_err(|e| e.to_string())?;
        let LoadedSystem::LinearlySingular(ls) = &sys else { unreachable!() };
        let jet = JetField::parse(&ls.chart, &gamma).map_err(|e| e.to_string())?;
        let mut x0 = vec![0.0];
        x0.extend((0..n).map(|_| rng.gen_range(-1.0..1.0)));
        let mut trajectories = Vec::new();
        for mode in [Mode::VectorHull, Mode::JetField(Some(jet.clone()))] {
            let a = to_autonomous(&sys, &mode).map_err(|e| e.to_string())?;
            let r = run_constraint_algorithm(a, &[x0.clone()], &EngineOptions::default())
                .map_err(|e| e.to_string())?;
            ensure(r.status == Status::Solved && r.levels.is_empty(), || {
                format!("system {k}: {:?} with {} levels", r.status, r.levels.len())
            })?;
            trajectories.push(
                integrate(&r, &x0, (0.0, 1.0), &IntegrateOptions::default()).map_err(|e| e.to_string())?,
            );
        }
        for (s, u) in trajectories[0].states.iter().zip(&trajectories[1].states) {
            let d = max_abs(s.iter().zip(u).map(|(a, b)| a - b));
            worst = worst.max(d);
        }
        ensure(worst <= 1e-8, || format!("system {k}: trajectories differ by {worst:e}"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("50 systems, max deviation {worst:.1e}, {elapsed:.2?}"))
}

fn random_affine(rng: &mut StdRng, n: usize) -> (Vec<f64>, Matrix<f64>) {
    let c = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let rows = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    let t = Matrix::from_rows(rows).unwrap();
    (c, t)
}

fn criterion_4() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let n = rng.gen_range(1..=5);
        let (cf, tf) = random_affine(&mut rng, n);
        let (cg, tg) = random_affine(&mut rng, n);
        // g∘f(x) = Tg·Tf·x + Tg·cf + cg
        let t = tg.mul(&tf);
        let c: Vec<f64> = tg.mul_vec(&cf).iter().zip(&cg).map(|(a, b)| a + b).collect();
        let lhs = vector_extension(&c, &t);
        let rhs = vector_extension(&cg, &tg).mul(&vector_extension(&cf, &tf));
        let err = max_abs((0..=n).flat_map(|i| (0..=n).map(move |j| (i, j))).map(|(i, j)| lhs.get(i, j) - rhs.get(i, j)));
        worst = worst.max(err);
        ensure(err <= 1e-12, || format!("functoriality off by {err:e}"))?;
        let e = vector_extension(&cf, &tf);
        ensure(*e.get(0, 0) == 1.0, || "T⁰₀ ≠ 1".into())?;
        for i in 1..=n {
            ensure(*e.get(0, i) == 0.0, || format!("T⁰_{i} ≠ 0"))?;
            ensure(*e.get(i, 0) == cf[i - 1], || format!("T^{i}₀ ≠ c^{i}"))?;
            for j in 1..=n {
                ensure(e.get(i, j) == tf.get(i - 1, j - 1), || "linear block changed".into())?;
            }
        }
    }
    Ok(format!("100 pairs, max error {worst:.1e}, coordinate pattern exact"))
}

const OSCILLATOR: &str = include_str!("../specs/regular_oscillator.json");

fn criterion_5() -> Outcome {
    let r = analyze(OSCILLATOR, &[vec![0.0, 1.0, 0.0]]);
    ensure(r.status == Status::Solved && r.levels.is_empty(), || {
        format!("{:?} with {} levels", r.status, r.levels.len())
    })?;
    let period = 2.0 * std::f64::consts::PI;
    let traj = integrate(&r, &[0.0, 1.0, 0.0], (0.0, period), &IntegrateOptions::default())
        .map_err(|e| e.to_string())?;
    let (q, v) = (column(&traj, "q"), column(&traj, "v_q"));
    let err = max_abs(traj.times.iter().enumerate().flat_map(|(k, t)| [q[k] - t.cos(), v[k] + t.sin()]));
    ensure(err <= 1e-6, || format!("trajectory error {err:e}"))?;

    let LoadedSystem::Lagrangian(spec) = load_system_str(OSCILLATOR).unwrap() else { unreachable!() };
    let sys = lagrangian_system(&spec);
    let mut rng = StdRng::seed_from_u64(5);
    let mut asym = 0.0_f64;
    for _ in 0..1000 {
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let w = sys.omega::<f64>(&x).map_err(|e| e.to_string())?;
        asym = asym.max(max_abs((0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| w.get(i, j) + w.get(j, i))));
    }
    ensure(asym <= 1e-12, || format!("Ω + Ωᵀ = {asym:e}"))?;
    Ok(format!("0 levels, period error {err:.1e}, |Ω + Ωᵀ| ≤ {asym:.1e}"))
}

const SINGULAR: &str = r#"{"kind": "lagrangian", "q": ["q1", "q2"], "L": "0.5*(v_q1 - q2)^2"}"#;

fn criterion_6() -> Outcome {
    let r = analyze(SINGULAR, &[vec![0.0, 0.3, -0.2, 0.5, 0.1]]);
    ensure(r.status == Status::Solved, || format!("status {:?}", r.status))?;
    ensure(r.gauge_dimension == 1, || format!("gauge {}", r.gauge_dimension))?;
    // chart (t, q1, q2, v_q1, v_q2); hand analysis gives exactly {v_q1 = q2}
    let on_final = max_abs(r.final_samples.iter().map(|s| s[3] - s[2]));
    ensure(on_final <= 1e-9, || format!("final samples off v1 = q2 by {on_final:e}"))?;
    let constraints = r.constraints();
    let mut rng = StdRng::seed_from_u64(6);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let mut s: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
        s[3] = s[2];
        worst = worst.max(max_abs(constraints.iter().map(|c| c.value(&s).unwrap())));
    }
    ensure(worst <= 1e-9, || format!("engine constraints {worst:e} on {{v1 = q2}}"))?;
    let mut off = vec![0.0, 0.3, -0.2, 0.5, 0.1];
    off[3] = off[2] + 0.1;
    let seen = max_abs(constraints.iter().map(|c| c.value(&off).unwrap()));
    ensure(seen > 1e-3, || "constraints vanish off the zero set".into())?;
    Ok(format!("{} constraint(s), gauge 1, zero set {{v1 = q2}} to {worst:.1e}", constraints.len()))
}

const SKINNER_RUSK: &str = r#"{"kind": "skinner_rusk", "q": ["q"], "L": "0.5*v_q^2 - 0.5*q^2"}"#;

fn criterion_7() -> Outcome {
    let names = ["t", "q", "p_t", "p_q", "v_q"];
    let r = analyze(SKINNER_RUSK, &[vec![0.0, 1.0, 0.3, 0.0, 0.0]]);
    ensure(r.state_names == names, || format!("chart {:?}", r.state_names))?;
    ensure(r.status == Status::Solved, || format!("status {:?}", r.status))?;
    let legendre = max_abs(r.final_samples.iter().map(|s| s[3] - s[4]));
    ensure(legendre <= 1e-9, || format!("p − ∂L/∂v = {legendre:e}"))?;

    let period = 2.0 * std::f64::consts::PI;
    let opts = IntegrateOptions::default();
    let sr = integrate(&r, &[0.0, 1.0, 0.3, 0.0, 0.0], (0.0, period), &opts).map_err(|e| e.to_string())?;
    let lag = analyze(OSCILLATOR, &[vec![0.0, 1.0, 0.0]]);
    let lt = integrate(&lag, &[0.0, 1.0, 0.0], (0.0, period), &opts).map_err(|e| e.to_string())?;
    let mut err = 0.0_f64;
    for name in ["q", "v_q"] {
        err = err.max(max_abs(column(&sr, name).iter().zip(column(&lt, name)).map(|(a, b)| a - b)));
    }
    ensure(err <= 1e-6, || format!("(q, v) trajectories differ by {err:e}"))?;
    Ok(format!("p = v to {legendre:.1e}, (q, v) match the Lagrangian run to {err:.1e}"))
}

fn criterion_8() -> Outcome {
    let opts = IntegrateOptions { dt: 1e-3, project_every: 10, ..Default::default() };
    let r = analyze(PENDULUM, &[vec![0.0, 1.0, 0.0, 0.1, 0.0, 0.0]]);
    let x0 = pendulum_point(0.0, -std::f64::consts::FRAC_PI_2 + 0.4, 0.2);
    let traj = integrate(&r, &x0, (0.0, 10.0), &opts).map_err(|e| e.to_string())?;
    let drift = traj.max_drift();
    ensure(drift <= 1e-6, || format!("max |φ| = {drift:e}"))?;

    let rigid = analyze(RIGID_PENDULUM, &[vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0]]);
    ensure(rigid.status == Status::Solved, || format!("rigid status {:?}", rigid.status))?;
    let angle: f64 = -0.5;
    let (x, y) = (angle.cos(), angle.sin());
    let (vx, vy) = (-y * 0.7, x * 0.7);
    let start = vec![0.0, x, y, vx, vy, vx * vx + vy * vy - G * y];
    let traj = integrate(&rigid, &start, (0.0, 10.0), &opts).map_err(|e| e.to_string())?;
    // R ≡ 1: ½R²v_φ² + g·R·sin φ
    let energy = |s: &[f64]| 0.5 * (s[3] * s[3] + s[4] * s[4]) + G * s[2];
    let e0 = energy(&traj.states[0]);
    let de = max_abs(traj.states.iter().map(|s| energy(s) - e0));
    ensure(de <= 1e-6, || format!("energy drift {de:e}"))?;
    Ok(format!("max |φ| = {drift:.1e}, rigid energy drift {de:.1e}"))
}

fn random_expr(rng: &mut StdRng, depth: usize) -> String {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..4) {
            0 => number(rng.gen_range(-2.0..2.0)),
            i => ["a", "b", "c"][i - 1].to_string(),
        };
    }
    let u = random_expr(rng, depth - 1);
    match rng.gen_range(0..11) {
        0 => format!("sin({u})"),
        1 => format!("cos({u})"),
        2 => format!("exp(0.5*sin({u}))"),
        3 => format!("log(1 + ({u})^2)"),
        4 => format!("sqrt(2 + sin({u}))"),
        5 => format!("({u})^3"),
        6 => format!("({u}) / (2 + cos({u}))"),
        7 => format!("({u}) + ({})", random_expr(rng, depth - 1)),
        8 => format!("({u}) - ({})", random_expr(rng, depth - 1)),
        9 => format!("({u}) * ({})", random_expr(rng, depth - 1)),
        _ => format!("-({u})"),
    }
}

fn rel(ad: f64, fd: f64) -> f64 {
    (ad - fd).abs() / fd.abs().max(1.0)
}

fn criterion_9() -> Outcome {
    let scope = Scope::with_variables(&["a", "b", "c"]);
    let mut rng = StdRng::seed_from_u64(9);
    let (mut grad_err, mut hess_err) = (0.0_f64, 0.0_f64);
    for _ in 0..300 {
        let text = random_expr(&mut rng, 4);
        let e = parse_expr(&text, &scope).map_err(|err| format!("{text}: {err}"))?;
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = |p: &[f64]| e.eval_f64(p).unwrap();
        let d = e.eval1(&x).map_err(|err| err.to_string())?;
        let fd = central_gradient(&f, &x, 1e-6);
        for i in 0..3 {
            grad_err = grad_err.max(rel(d.grad[i], fd[i]));
        }
        let h = e.eval2(&x).map_err(|err| err.to_string())?;
        for i in 0..3 {
            let gi = |p: &[f64]| e.eval1(p).unwrap().grad[i];
            let col = central_gradient(&gi, &x, 1e-5);
            for j in 0..3 {
                hess_err = hess_err.max(rel(h.hess_entry(i, j), col[j]));
            }
        }
        ensure(grad_err <= 1e-6, || format!("gradient of {text}: {grad_err:e}"))?;
        ensure(hess_err <= 1e-5, || format!("Hessian of {text}: {hess_err:e}"))?;
    }
    Ok(format!("300 expressions, gradient {grad_err:.1e}, Hessian {hess_err:.1e}"))
}

const INCONSISTENT: &str = include_str!("../specs/inconsistent.json");

fn criterion_10() -> Outcome {
    let r = analyze(INCONSISTENT, &[vec![0.0]]);
    ensure(matches!(r.status, Status::Inconsistent { .. }), || format!("0·ẋ = 1: {:?}", r.status))?;
    let l = analyze(
        r#"{"kind": "lagrangian", "q": ["q1", "q2"], "L": "0.5*v_q1^2 + q2"}"#,
        &[vec![0.0, 0.1, 0.2, 0.3, 0.4]],
    );
    ensure(matches!(l.status, Status::Inconsistent { .. }), || format!("L = ½v₁² + q₂: {:?}", l.status))?;
    Ok(format!("0·ẋ = 1: {:?}; L = ½v₁² + q₂: {:?}", r.status, l.status))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("pendulum constraint ladder", criterion_1),
        ("pendulum final field", criterion_2),
        ("autonomization equivalence", criterion_3),
        ("vector extension", criterion_4),
        ("regular Lagrangian", criterion_5),
        ("singular Lagrangian", criterion_6),
        ("Skinner-Rusk", criterion_7),
        ("constraint drift and energy", criterion_8),
        ("AD correctness", criterion_9),
        ("inconsistency detection", criterion_10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let label = format!("criterion {:>2} {name}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        match outcome {
            Ok(detail) => println!("PASS {label}: {detail} [{:.2?}]", start.elapsed()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {label}: {detail} [{:.2?}]", start.elapsed());
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
