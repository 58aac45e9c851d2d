//! Virtual variations, Chetaev bases, and transpositional-relation rates.
//!
//! The transpositional rate of a variation `δx` is `A·δx`, the commutator
//! `δ(dx/dt) − d(δx)/dt` evaluated through the frame identity `W·A = Ω`.
//! The admissibility identity ties the two together: for Chetaev-compatible
//! variations, `Σ_k ∂L_α/∂v_k (Aδx)_k = Σ_k E_k L_α δx_k` certifies that the
//! varied path satisfies the constraints to first order. Every identity here
//! is algebraic at a state once the acceleration is known, so variations are
//! evaluated pointwise rather than transported along trajectories.

use crate::jet::slot_v;
use crate::lagrange::{
    build_frames, constraint_jacobian, solve_a, split_rows_from_jet, FrameVariant,
};
use crate::linalg::{dot, null_space_full_rank, singular_values, Mat};
use crate::model::{DynState, MechModel};

use crate::dynamics::{DynError, SolverConfig};

/// A virtual displacement at a state.
#[derive(Debug, Clone)]
pub struct VariationField {
    pub delta_x: Vec<f64>,
    /// Σ_k (∂L_α/∂v_k) δx_k = 0 for every constraint, to 1e-10.
    pub chetaev_ok: bool,
}

/// Orthonormal basis of the Chetaev-admissible variations: the null space of
/// the `M×N` constraint velocity-Jacobian. Vectors have unit norm with the
/// first non-negligible component positive, so the basis is deterministic.
pub fn chetaev_basis(
    model: &MechModel,
    state: &DynState,
) -> Result<Vec<VariationField>, DynError> {
    let n = model.n();
    let m = model.m();
    let jac = constraint_jacobian(model, state)?;
    if m == 0 {
        // unconstrained: the full standard basis
        return Ok((0..n)
            .map(|k| {
                let mut delta_x = vec![0.0; n];
                delta_x[k] = 1.0;
                VariationField { delta_x, chetaev_ok: true }
            })
            .collect());
    }
    let sv = singular_values(&jac);
    let tol = 1e-10 * sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > tol && s > 0.0).count();
    if rank < m {
        return Err(DynError::SingularSystem);
    }
    let basis = null_space_full_rank(&jac);
    Ok(basis
        .into_iter()
        .map(|delta_x| {
            let ok = (0..m).all(|alpha| dot(jac.row(alpha), &delta_x).abs() < 1e-10);
            VariationField { delta_x, chetaev_ok: ok }
        })
        .collect())
}

/// `δ(dx/dt) − d(δx)/dt = A·δx`.
pub fn transpositional_rate(a: &Mat, delta_x: &[f64]) -> Vec<f64> {
    a.mul_vec(delta_x)
}

/// `max_α |Σ_k ∂L_α/∂v_k (Aδx)_k − Σ_k E_k L_α δx_k|` at `(state, accel)`;
/// a value ≤ 1e-9 certifies the varied path is admissible to first order.
pub fn admissibility_residual(
    model: &MechModel,
    state: &DynState,
    accel: &[f64],
    variant: FrameVariant,
    delta_x: &VariationField,
) -> Result<f64, DynError> {
    let n = model.n();
    let frames = build_frames(model, state, variant)?;
    let cfg = SolverConfig::default();
    let a = solve_a(&frames, accel, cfg.singular_base)?;
    let rate = transpositional_rate(&a, &delta_x.delta_x);
    let mut worst = 0.0_f64;
    for c in &model.constraints {
        let jet = model.eval_jet2(c, state)?;
        let mut lhs = 0.0;
        for k in 0..n {
            lhs += jet.grad[slot_v(k, n)] * rate[k];
        }
        let splits = split_rows_from_jet(&jet, state, n);
        let mut rhs = 0.0;
        for k in 0..n {
            rhs += splits[k].eval(accel) * delta_x.delta_x[k];
        }
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}
