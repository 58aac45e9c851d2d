//! The determinacy failure of the vakonomic equations: identical positions
//! and velocities, different initial multipliers, visibly different motions.
//!
//! The level-plane skate launched straight ahead goes straight when
//! lambda0 = 0 but curls sideways when lambda0 = 1.
//!
//! ```bash
//! cargo run --example vakonomic_divergence
//! ```

use std::collections::BTreeMap;

use transposit::dynamics::Formulation;
use transposit::integrate::{integrate, IntegratorConfig};
use transposit::models::get_builtin;

fn main() {
    let builtin = get_builtin("skate_vakonomic").unwrap();
    let cfg = IntegratorConfig::new(1e-3, 5.0);

    let mut finals = Vec::new();
    for lambda0 in [0.0, 1.0] {
        let mut over = BTreeMap::new();
        over.insert("lambda0".to_string(), lambda0);
        let model = builtin.compile().with_params(&over);
        let init = builtin.reference_state(&model);
        let traj = integrate(&model, Formulation::Vakonomic, &init, &cfg).unwrap();
        let last = traj.last();
        println!(
            "lambda0 = {}: (x, y) at t = 5 is ({:+.6}, {:+.6})",
            lambda0, last.x[0], last.x[1]
        );
        finals.push((last.x[0], last.x[1]));
    }
    let gap = ((finals[0].0 - finals[1].0).powi(2) + (finals[0].1 - finals[1].1).powi(2)).sqrt();
    println!("\nposition gap at t = 5: {:.4}", gap);
    assert!(gap > 0.1, "the two multiplier seeds should separate the motions");
    println!("same (x, v) initial data, different motion: determinacy fails.");
}
