//! Integrate the wheel-and-drum system in its reduced Chaplygin form and
//! monitor its two first integrals over t in [0, 10].
//!
//! ```bash
//! cargo run --example rolling_drum_integrals
//! ```

use transposit::checks::monitors_for;
use transposit::dynamics::Formulation;
use transposit::integrate::{integrate, monitor_first_integrals, IntegratorConfig};
use transposit::models::get_builtin;

fn main() {
    let builtin = get_builtin("rolling_drum").unwrap();
    let model = builtin.compile();
    let init = builtin.reference_state(&model);

    let mut cfg = IntegratorConfig::new(1e-3, 10.0);
    cfg.monitors = monitors_for(&model, "rolling_drum");
    let names: Vec<String> = cfg.monitors.iter().map(|(n, _)| n.clone()).collect();

    let traj = integrate(&model, Formulation::ChaplyginReduced, &init, &cfg).unwrap();
    println!("{:>6}  {:>14} {:>14} {:>14} {:>14}", "t", "y1'", "y2'", names[0], names[1]);
    for s in traj.samples.iter().step_by(1000) {
        println!(
            "{:6.2}  {:14.9} {:14.6} {:14.9} {:14.9}",
            s.t, s.v[3], s.v[4], s.monitors[0], s.monitors[1]
        );
    }

    let drifts = monitor_first_integrals(&traj, &names);
    println!();
    for (name, drift) in &drifts {
        println!("{} drift over [0, 10]: {:.3e}", name, drift);
        assert!(*drift < 1e-6);
    }
}
