//! Parse an expression and inspect its value, gradient, and Hessian.
//!
//! ```bash
//! cargo run --example parse_and_autodiff
//! ```

use transposit::expr::{parse_model_file, pretty_print};
use transposit::jet::{slot_v, slot_x};
use transposit::model::{DynState, MechModel};

fn main() {
    let text = r#"
model "demo"
coords x y
param k = 2.5
lagrangian 0.5*(dx^2 + dy^2) - k*(1 - cos(x))*y^2
aux dx
aux dy
"#;
    let spec = parse_model_file(text).expect("model parses");
    println!("lagrangian, canonical form:\n  {}", pretty_print(&spec.lagrangian));

    let model = MechModel::compile(&spec);
    let state = DynState::new(0.0, vec![0.8, -0.3], vec![1.2, 0.4]);
    let jet = model.eval_jet2(&model.lagrangian, &state).expect("evaluates");

    println!("\nat x = {:?}, v = {:?}:", state.x, state.v);
    println!("  L            = {:+.12}", jet.val);
    println!("  dL/dx        = {:+.12}", jet.grad[slot_x(0)]);
    println!("  dL/dy        = {:+.12}", jet.grad[slot_x(1)]);
    println!("  dL/ddx       = {:+.12}", jet.grad[slot_v(0, 2)]);
    println!("  d2L/dx dy    = {:+.12}", jet.hess_at(slot_x(0), slot_x(1)));
    println!("  d2L/ddx ddx  = {:+.12}", jet.hess_at(slot_v(0, 2), slot_v(0, 2)));

    // second derivatives are exact for polynomials: the velocity Hessian of
    // this Lagrangian is the identity
    assert_eq!(jet.hess_at(slot_v(0, 2), slot_v(0, 2)), 1.0);
    assert_eq!(jet.hess_at(slot_v(0, 2), slot_v(1, 2)), 0.0);
    println!("\nvelocity Hessian is exactly the identity, as entered.");
}
