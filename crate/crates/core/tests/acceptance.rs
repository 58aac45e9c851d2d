//! Acceptance suite: one test per criterion, every tolerance pinned in code.
//!
//! `cargo test --test acceptance` prints one pass/fail line per criterion
//! (the test name encodes the criterion number).

use std::collections::BTreeMap;
use std::time::Instant;

use transposit::checks::{monitors_for, run_suite, sample_states, SuiteConfig};
use transposit::dynamics::{
    accel_dalembert, accel_mvm_t1, accel_mvm_t2, solve_accel, Formulation, SolverConfig,
};
use transposit::expr::{parse_expression, parse_model_file, pretty_print, random_expr};
use transposit::integrate::{integrate, monitor_first_integrals, IntegratorConfig};
use transposit::model::DynState;
use transposit::models::{get_builtin, oracle_eval};
use transposit::rng::SplitMix64;

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Criterion 1: with a = 1, g = 9.8 and on-constraint data, d'Alembert,
/// MVM-T1, and MVM-T2 all give multiplier rate 4.9 and z̈ = −4.9 within 1e-9
/// at t = 0 and along t ∈ [0, 2]; runtime < 1 s.
#[test]
fn acceptance_01_appell_hamel_constants() {
    let start = Instant::now();
    let solver = SolverConfig::default();
    let cases = [
        ("appell_hamel_t1", Formulation::DAlembert),
        ("appell_hamel_t1", Formulation::MvmT1),
        ("appell_hamel_t2", Formulation::MvmT2),
    ];
    for (model_name, formulation) in cases {
        let b = get_builtin(model_name).unwrap();
        let model = b.compile();
        let init = b.reference_state(&model);
        // at t = 0
        let sol = solve_accel(&model, formulation, &init, &solver).unwrap();
        assert!(
            (sol.mult_rate[0] - 4.9).abs() < 1e-9,
            "{} {}: rate {}",
            model_name,
            formulation.id(),
            sol.mult_rate[0]
        );
        assert!((sol.accel[2] + 4.9).abs() < 1e-9);
        // along t ∈ [0, 2]
        let cfg = IntegratorConfig::new(1e-3, 2.0);
        let traj = integrate(&model, formulation, &init, &cfg).unwrap();
        assert!(!traj.truncated);
        for s in traj.samples.iter().step_by(100) {
            assert!(
                (s.mult[0] - 4.9).abs() < 1e-9,
                "{} {} at t = {}: rate {}",
                model_name,
                formulation.id(),
                s.t,
                s.mult[0]
            );
        }
        // z̈ stays −4.9 along the trajectory
        for s in traj.samples.iter().step_by(500) {
            let state = DynState::new(s.t, s.x.clone(), s.v.clone());
            let sol = solve_accel(&model, formulation, &state, &solver).unwrap();
            assert!((sol.accel[2] + 4.9).abs() < 1e-9);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "runtime {:.3} s exceeds 1 s", elapsed);
}

/// Criterion 2: skate cycloid with ω = 1 and g·sinα = 1, zero initial data:
/// the mvm-t1 trajectory over [0, 2π] matches the closed-form solution to
/// 1e-6 in position at dt = 1e-3; runtime < 2 s.
#[test]
fn acceptance_02_skate_cycloid() {
    let start = Instant::now();
    let b = get_builtin("skate").unwrap();
    let model = b.compile().with_params(&params(&[
        ("g", 1.0),
        ("alpha", std::f64::consts::FRAC_PI_2),
        ("omega", 1.0),
    ]));
    let init = b.reference_state(&model);
    let cfg = IntegratorConfig::new(1e-3, std::f64::consts::TAU);
    let traj = integrate(&model, Formulation::MvmT1, &init, &cfg).unwrap();
    let setup = model.params();
    let mut worst = 0.0_f64;
    for s in &traj.samples {
        let o = oracle_eval("skate", "cycloid", s.t, &setup).unwrap();
        worst = worst.max((s.x[0] - o["x"]).abs()).max((s.x[1] - o["y"]).abs());
    }
    assert!(worst < 1e-6, "max position error {}", worst);
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 2.0, "runtime {:.3} s exceeds 2 s", elapsed);
}

/// Criterion 3: skate with α = 0 and ω ≠ 0 turns on a circle: the distance
/// to the center (x₀ − ẏ₀/ω, y₀ + ẋ₀/ω) is constant to 1e-6.
#[test]
fn acceptance_03_skate_circle() {
    let b = get_builtin("skate").unwrap();
    let model = b.compile().with_params(&params(&[("alpha", 0.0)]));
    let omega = 1.3;
    let init = DynState::new(0.0, vec![0.4, -0.2, 0.0], vec![0.8, 0.0, omega]);
    let cfg = IntegratorConfig::new(1e-3, 8.0);
    let traj = integrate(&model, Formulation::MvmT1, &init, &cfg).unwrap();
    let cx = init.x[0] - init.v[1] / omega;
    let cy = init.x[1] + init.v[0] / omega;
    let r0 = ((init.x[0] - cx).powi(2) + (init.x[1] - cy).powi(2)).sqrt();
    for s in &traj.samples {
        let r = ((s.x[0] - cx).powi(2) + (s.x[1] - cy).powi(2)).sqrt();
        assert!((r - r0).abs() < 1e-6, "radius drift {} at t = {}", (r - r0).abs(), s.t);
    }
}

/// Criterion 4: Gantmacher multipliers match their closed forms to 1e-10 at
/// 50 random on-manifold states, and detW₁ = (x₁²+x₂²)² to 1e-12 along a
/// trajectory.
#[test]
fn acceptance_04_gantmacher() {
    let solver = SolverConfig::default();
    let b = get_builtin("gantmacher").unwrap();
    let model = b.compile();
    let mut rng = SplitMix64::new(7);
    let states = sample_states("gantmacher", &model, 50, &mut rng);
    assert_eq!(states.len(), 50);
    for s in &states {
        let sol = accel_dalembert(&model, s, &solver).unwrap();
        let mut setup = BTreeMap::new();
        for (i, c) in model.coords.iter().enumerate() {
            setup.insert(c.clone(), s.x[i]);
            setup.insert(format!("d{}", c), s.v[i]);
        }
        setup.insert("g".to_string(), model.param("g").unwrap());
        let o = oracle_eval("gantmacher", "multipliers", 0.0, &setup).unwrap();
        assert!((sol.mult_rate[0] - o["mu1"]).abs() < 1e-10);
        assert!((sol.mult_rate[1] - o["mu2"]).abs() < 1e-10);
    }
    let init = b.reference_state(&model);
    let cfg = IntegratorConfig::new(1e-3, 3.0);
    let traj = integrate(&model, Formulation::MvmT1, &init, &cfg).unwrap();
    for s in &traj.samples {
        let r2 = s.x[0] * s.x[0] + s.x[1] * s.x[1];
        assert!(
            (s.det_w - r2 * r2).abs() < 1e-12,
            "detW {} vs {} at t = {}",
            s.det_w,
            r2 * r2,
            s.t
        );
    }
}

/// Criterion 5: rolling drum first integrals drift < 1e-6 over t ∈ [0, 10]
/// at dt = 1e-3, and the Chaplygin-reduced accelerations match MVM-T1 to
/// 1e-9 at 50 random on-manifold states.
#[test]
fn acceptance_05_rolling_drum() {
    let b = get_builtin("rolling_drum").unwrap();
    let model = b.compile();
    let init = b.reference_state(&model);
    let mut cfg = IntegratorConfig::new(1e-3, 10.0);
    cfg.monitors = monitors_for(&model, "rolling_drum");
    let names: Vec<String> = cfg.monitors.iter().map(|(n, _)| n.clone()).collect();
    let traj = integrate(&model, Formulation::ChaplyginReduced, &init, &cfg).unwrap();
    assert!(!traj.truncated);
    for (name, drift) in monitor_first_integrals(&traj, &names) {
        assert!(drift < 1e-6, "{} drift {}", name, drift);
    }

    let solver = SolverConfig::default();
    let mut rng = SplitMix64::new(11);
    let states = sample_states("rolling_drum", &model, 50, &mut rng);
    assert_eq!(states.len(), 50);
    for s in &states {
        let cha = solve_accel(&model, Formulation::ChaplyginReduced, s, &solver).unwrap();
        let t1 = accel_mvm_t1(&model, s, &solver).unwrap();
        let gap = cha
            .accel
            .iter()
            .zip(&t1.accel)
            .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(gap < 1e-9, "chaplygin vs mvm-t1 gap {}", gap);
    }
}

/// Criterion 6: on every linear-constraint builtin, d'Alembert, MVM-T1, and
/// MVM-T2 accelerations agree pairwise to 1e-9 and the MVM-T2 multiplier
/// rate equals the d'Alembert multiplier to 1e-9, over 50 random admissible
/// states with nonsingular frames.
#[test]
fn acceptance_06_formulation_equivalence() {
    let solver = SolverConfig::default();
    let linear =
        ["holonomic_circle_a", "holonomic_circle_b", "skate", "skate_vakonomic", "gantmacher", "rolling_drum"];
    let mut rng = SplitMix64::new(7);
    for name in linear {
        let b = get_builtin(name).unwrap();
        let model = b.compile();
        let states = sample_states(name, &model, 50, &mut rng);
        assert_eq!(states.len(), 50, "{}: could not sample 50 states", name);
        for s in &states {
            let cl = accel_dalembert(&model, s, &solver).unwrap();
            let t1 = accel_mvm_t1(&model, s, &solver).unwrap();
            let t2 = accel_mvm_t2(&model, s, &solver).unwrap();
            for (a, b2) in [(&cl, &t1), (&cl, &t2), (&t1, &t2)] {
                let gap = a
                    .accel
                    .iter()
                    .zip(&b2.accel)
                    .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()));
                assert!(gap < 1e-9, "{}: accel gap {}", name, gap);
            }
            let mgap = cl
                .mult_rate
                .iter()
                .zip(&t2.mult_rate)
                .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()));
            assert!(mgap < 1e-9, "{}: mu vs lam-tilde gap {}", name, mgap);
        }
    }
}

/// Criterion 7: vakonomic determinacy failure and reduction. The skate with
/// λ₀ ∈ {0, 1} and identical (x, ẋ) separates by more than 0.1 by t = 5;
/// on the integrable-constraint circle the vakonomic trajectory equals the
/// d'Alembert one to 1e-8.
#[test]
fn acceptance_07_vakonomic_divergence_and_reduction() {
    // divergence
    let b = get_builtin("skate_vakonomic").unwrap();
    let cfg = IntegratorConfig::new(1e-3, 5.0);
    let mut finals = Vec::new();
    for lam0 in [0.0, 1.0] {
        let model = b.compile().with_params(&params(&[("lambda0", lam0)]));
        let init = b.reference_state(&model);
        let traj = integrate(&model, Formulation::Vakonomic, &init, &cfg).unwrap();
        finals.push(traj.last().x.clone());
    }
    let gap = finals[0]
        .iter()
        .zip(&finals[1])
        .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
    assert!(gap > 0.1, "position gap {} at t = 5", gap);

    // reduction to the holonomic flow on an integrable constraint
    let b = get_builtin("holonomic_circle_a").unwrap();
    let model = b.compile();
    let init = b.reference_state(&model);
    let vak = integrate(
        &model,
        Formulation::Vakonomic,
        &init.clone().with_lambda(vec![0.0]),
        &cfg,
    )
    .unwrap();
    let dal = integrate(&model, Formulation::DAlembert, &init, &cfg).unwrap();
    assert!(vak.max_position_gap(&dal) < 1e-8, "gap {}", vak.max_position_gap(&dal));
}

/// Criterion 8: transpositional suites. A ≡ 0 unconstrained, W·A − Ω
/// residual < 1e-10, admissibility residual < 1e-9 for every Chetaev-basis
/// variation on every builtin, and exact-zero independent rows for the
/// Voronets frame.
#[test]
fn acceptance_08_transpositional_suites() {
    let cfg = SuiteConfig { seed: 7, states: 50 };
    for r in run_suite("transposition", &cfg).unwrap() {
        assert!(r.pass, "{}: {}", r.name, r.detail);
    }
    // the W·A − Ω residual lives in the frames suite
    for r in run_suite("frames", &cfg).unwrap() {
        assert!(r.pass, "{}: {}", r.name, r.detail);
    }
}

/// Criterion 9: forward-mode gradients and Hessians match value-only finite
/// differences to 1e-6 relative over 100 random expressions and states.
#[test]
fn acceptance_09_autodiff_vs_finite_differences() {
    let cfg = SuiteConfig { seed: 7, states: 50 };
    for r in run_suite("autodiff", &cfg).unwrap() {
        assert!(r.pass, "{}: {}", r.name, r.detail);
    }
}

/// Criterion 10: 1000 random pretty-print → parse round trips are exact, and
/// malformed inputs are rejected with positioned errors.
#[test]
fn acceptance_10_parser() {
    let vars: Vec<String> =
        ["t", "x", "y", "phi", "dx", "dy", "dphi"].iter().map(|s| s.to_string()).collect();
    let pnames: Vec<String> = ["a", "g", "omega"].iter().map(|s| s.to_string()).collect();
    let mut rng = SplitMix64::new(2027);
    for i in 0..1000 {
        let e = random_expr(&mut rng, &vars, &pnames, 6);
        let printed = pretty_print(&e);
        let back = transposit::expr::parse_expression_with_params(&printed, &vars, &pnames)
            .unwrap_or_else(|err| panic!("round trip {} failed on `{}`: {}", i, printed, err));
        assert_eq!(back, e, "round trip {} not structural on `{}`", i, printed);
    }

    let malformed = [
        "2x",
        "sin(",
        "x +",
        "foo(3)",
        "atan2(x)",
        "sin(x, y)",
        "x ^^ 2",
        ")",
        "x + * y",
        "1..2",
        "x @ y",
        "pow(x)",
        "unknown_name",
        "(x",
        "x,y",
        "",
    ];
    for src in malformed {
        match parse_expression(src, &vars) {
            Err(e) => assert!(e.pos <= src.len(), "`{}`: position {} out of range", src, e.pos),
            Ok(ast) => panic!("`{}` unexpectedly parsed to {:?}", src, ast),
        }
    }

    // model files: the full grammar round-trips through emit
    for name in transposit::models::builtin_names() {
        let b = get_builtin(name).unwrap();
        let text = transposit::expr::emit_model_file(&b.spec);
        assert_eq!(parse_model_file(&text).unwrap(), b.spec);
    }
}
