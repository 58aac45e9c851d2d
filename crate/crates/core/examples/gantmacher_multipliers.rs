//! The rod-of-two-masses system: solver multipliers against their closed
//! forms, and the frame determinant (x1²+x2²)² along a trajectory.
//!
//! ```bash
//! cargo run --example gantmacher_multipliers
//! ```

use std::collections::BTreeMap;

use transposit::dynamics::{accel_dalembert, Formulation, SolverConfig};
use transposit::integrate::{integrate, IntegratorConfig};
use transposit::models::{get_builtin, oracle_eval};

fn main() {
    let builtin = get_builtin("gantmacher").unwrap();
    let model = builtin.compile();
    let state = builtin.reference_state(&model);

    let sol = accel_dalembert(&model, &state, &SolverConfig::default()).unwrap();
    let mut setup = BTreeMap::new();
    for (i, c) in model.coords.iter().enumerate() {
        setup.insert(c.clone(), state.x[i]);
        setup.insert(format!("d{}", c), state.v[i]);
    }
    setup.insert("g".to_string(), model.param("g").unwrap());
    let oracle = oracle_eval("gantmacher", "multipliers", 0.0, &setup).unwrap();
    println!("solver mu = ({:+.9}, {:+.9})", sol.mult_rate[0], sol.mult_rate[1]);
    println!("closed    = ({:+.9}, {:+.9})", oracle["mu1"], oracle["mu2"]);
    assert!((sol.mult_rate[0] - oracle["mu1"]).abs() < 1e-10);
    assert!((sol.mult_rate[1] - oracle["mu2"]).abs() < 1e-10);

    let cfg = IntegratorConfig::new(1e-3, 3.0);
    let traj = integrate(&model, Formulation::MvmT1, &state, &cfg).unwrap();
    let mut worst = 0.0_f64;
    for s in &traj.samples {
        let r2 = s.x[0] * s.x[0] + s.x[1] * s.x[1];
        worst = worst.max((s.det_w - r2 * r2).abs());
    }
    println!("\nmax |detW1 - (x1^2+x2^2)^2| along the trajectory: {:.3e}", worst);
    assert!(worst < 1e-12);
}
