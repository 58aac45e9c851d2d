//! Build the frame matrices W, Ω, A for the skate and verify the worked
//! values: detW₁ = 1 everywhere and, at φ = 0 with v = (1, 0, 2),
//! A = [[0, 2, 0], [−2, 0, 1], [0, 0, 0]].
//!
//! ```bash
//! cargo run --example frame_matrices
//! ```

use transposit::dynamics::{accel_mvm_t1, SolverConfig};
use transposit::lagrange::{build_frames, frame_residual, FrameVariant};
use transposit::model::DynState;
use transposit::models::get_builtin;

fn main() {
    let builtin = get_builtin("skate").unwrap();
    let model = builtin.compile();
    let state = DynState::new(0.0, vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 2.0]);

    let frames = build_frames(&model, &state, FrameVariant::T1).unwrap();
    println!("detW1 = {}   cond(W1) = {:.3}", frames.det_w, frames.cond_w);
    println!("W1 =\n{}", frames.w);

    let sol = accel_mvm_t1(&model, &state, &SolverConfig::default()).unwrap();
    let a = sol.frames.as_ref().unwrap().a.as_ref().unwrap();
    println!("A = W1^-1 Omega1 at the solved acceleration:\n{}", a);
    println!("multiplier rate = {:+.6}", sol.mult_rate[0]);

    let residual = frame_residual(&frames, a, &sol.accel);
    println!("|W·A - Omega| = {:.3e}", residual);
    assert!(residual < 1e-12);
    assert!((a[(0, 1)] - 2.0).abs() < 1e-12);
    assert!((a[(1, 0)] + 2.0).abs() < 1e-12);
    assert!((a[(1, 2)] - 1.0).abs() < 1e-12);
}
