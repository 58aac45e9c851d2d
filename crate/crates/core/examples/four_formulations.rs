//! Solve one state of the nonlinear-constraint system (dz = a√(ẋ²+ẏ²))
//! with every applicable formulation and watch them agree: the multiplier
//! rate is the constant g/(1+a²) and z̈ = −a²g/(1+a²) for all of them.
//!
//! ```bash
//! cargo run --example four_formulations
//! ```

use transposit::dynamics::{
    accel_dalembert, accel_mvm_t1, accel_mvm_t2, SolverConfig,
};
use transposit::models::get_builtin;

fn main() {
    let cfg = SolverConfig::default();

    let t1_model = get_builtin("appell_hamel_t1").unwrap();
    let model1 = t1_model.compile();
    let state = t1_model.reference_state(&model1);

    let t2_model = get_builtin("appell_hamel_t2").unwrap();
    let model2 = t2_model.compile();

    let (a, g) = (model1.param("a").unwrap(), model1.param("g").unwrap());
    let expected = g / (1.0 + a * a);
    println!("expected multiplier rate g/(1+a^2) = {}", expected);
    println!("expected ddz  = {}", -a * a * expected);
    println!();

    let dal = accel_dalembert(&model1, &state, &cfg).unwrap();
    let t1 = accel_mvm_t1(&model1, &state, &cfg).unwrap();
    let t2 = accel_mvm_t2(&model2, &state, &cfg).unwrap();

    for (name, sol) in [("dalembert", &dal), ("mvm-t1", &t1), ("mvm-t2", &t2)] {
        println!(
            "{:10} accel = [{:+.6}, {:+.6}, {:+.6}]   rate = {:+.9}",
            name, sol.accel[0], sol.accel[1], sol.accel[2], sol.mult_rate[0]
        );
        assert!((sol.mult_rate[0] - expected).abs() < 1e-9);
        assert!((sol.accel[2] + a * a * expected).abs() < 1e-9);
    }
    println!("\ndeterminacy: detG = {} (= 1 + a^2)", t1.det_g.unwrap());
}
