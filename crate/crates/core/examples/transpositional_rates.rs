//! Chetaev-admissible variations and their transpositional rates A·δx.
//!
//! Two systems with the same holonomic constraint show that the rates depend
//! on the chosen frame: one frame produces order-one rates, a frame of total
//! time derivatives produces exactly zero rates. The admissibility identity
//! holds either way.
//!
//! ```bash
//! cargo run --example transpositional_rates
//! ```

use transposit::dynamics::{accel_dalembert, accel_mvm_t1, SolverConfig};
use transposit::lagrange::FrameVariant;
use transposit::model::DynState;
use transposit::models::get_builtin;
use transposit::transposition::{admissibility_residual, chetaev_basis, transpositional_rate};

fn main() {
    let cfg = SolverConfig::default();
    for name in ["skate", "holonomic_circle_a", "holonomic_circle_b"] {
        let builtin = get_builtin(name).unwrap();
        let model = builtin.compile();
        let state = match name {
            "skate" => DynState::new(0.0, vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 2.0]),
            _ => DynState::new(0.0, vec![0.6, 0.8], vec![0.8, -0.6]),
        };
        let sol = accel_mvm_t1(&model, &state, &cfg).unwrap();
        let a = sol.frames.as_ref().unwrap().a.as_ref().unwrap();
        let dal = accel_dalembert(&model, &state, &cfg).unwrap();

        println!("== {}", name);
        println!("max |A| = {:.4}", a.max_abs());
        for var in chetaev_basis(&model, &state).unwrap() {
            let rate = transpositional_rate(a, &var.delta_x);
            let res =
                admissibility_residual(&model, &state, &dal.accel, FrameVariant::T1, &var).unwrap();
            println!(
                "  delta = {:?}\n    rate A*delta = {:?}  admissibility residual {:.2e}",
                var.delta_x, rate, res
            );
            assert!(var.chetaev_ok);
            assert!(res < 1e-9);
        }
        println!();
    }
    println!("same constraint, different frames: rates can be zero or not.");
}
