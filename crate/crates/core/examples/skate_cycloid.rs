//! Integrate the inclined-plane skate with spinning initial data and compare
//! the trajectory against the closed-form cycloid solution.
//!
//! ```bash
//! cargo run --example skate_cycloid
//! ```

use std::collections::BTreeMap;

use transposit::dynamics::Formulation;
use transposit::integrate::{integrate, IntegratorConfig};
use transposit::models::{get_builtin, oracle_eval};

fn main() {
    let builtin = get_builtin("skate").unwrap();
    // reduced units with g·sin(alpha) = 1 and spin rate omega = 1
    let mut over = BTreeMap::new();
    over.insert("g".to_string(), 1.0);
    over.insert("alpha".to_string(), std::f64::consts::FRAC_PI_2);
    over.insert("omega".to_string(), 1.0);
    let model = builtin.compile().with_params(&over);
    let init = builtin.reference_state(&model);

    let cfg = IntegratorConfig::new(1e-3, std::f64::consts::TAU);
    let traj = integrate(&model, Formulation::MvmT1, &init, &cfg).unwrap();

    let setup = model.params();
    let mut worst = 0.0_f64;
    println!("{:>8}  {:>12} {:>12}   {:>12} {:>12}", "t", "x", "y", "x(exact)", "y(exact)");
    for sample in traj.samples.iter().step_by(628) {
        let o = oracle_eval("skate", "cycloid", sample.t, &setup).unwrap();
        worst = worst.max((sample.x[0] - o["x"]).abs()).max((sample.x[1] - o["y"]).abs());
        println!(
            "{:8.3}  {:12.8} {:12.8}   {:12.8} {:12.8}",
            sample.t, sample.x[0], sample.x[1], o["x"], o["y"]
        );
    }
    println!("\nmax position error vs closed form: {:.3e}", worst);
    assert!(worst < 1e-6);
}
