//! Lagrangian derivatives in acceleration-split form and the frame matrices
//! `W`, `Ω`, `A`.
//!
//! For any state function `g(t, x, v)`, the Lagrangian derivative
//! `E_ν g = d/dt(∂g/∂v_ν) − ∂g/∂x_ν` is affine in the accelerations:
//!
//! ```text
//! E_ν g = Σ_k (∂²g/∂v_ν∂v_k) ẍ_k  +  Σ_k (∂²g/∂v_ν∂x_k) v_k + ∂²g/∂v_ν∂t − ∂g/∂x_ν
//! ```
//!
//! Everything downstream exploits this: the frame matrix `Ω` (whose `(j,k)`
//! entry is `E_k L_j`) is kept in split form so the equations of motion stay
//! one linear solve in `(ẍ, multiplier rates)` even when `A = W⁻¹Ω` depends
//! on `ẍ`.

use crate::jet::{slot_t, slot_v, slot_x, Jet2};
use crate::linalg::{singular_values, Lu, Mat};
use crate::model::{Bound, DynState, EvalError, MechModel};

/// One row of `E g` in acceleration-split form:
/// `E_ν g = coeff · ẍ + remainder`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianSplit {
    pub coeff: Vec<f64>,
    pub remainder: f64,
}

impl LagrangianSplit {
    pub fn eval(&self, accel: &[f64]) -> f64 {
        self.coeff.iter().zip(accel).map(|(c, a)| c * a).sum::<f64>() + self.remainder
    }
}

/// All `N` rows of `E g` at `state`, from a single jet evaluation.
pub fn lagrangian_split(
    model: &MechModel,
    g: &Bound,
    state: &DynState,
) -> Result<Vec<LagrangianSplit>, EvalError> {
    let j = model.eval_jet2(g, state)?;
    Ok(split_rows_from_jet(&j, state, model.n()))
}

/// Split rows extracted from an already-evaluated jet.
pub fn split_rows_from_jet(j: &Jet2, state: &DynState, n: usize) -> Vec<LagrangianSplit> {
    let mut rows = Vec::with_capacity(n);
    for nu in 0..n {
        let vnu = slot_v(nu, n);
        let coeff: Vec<f64> = (0..n).map(|k| j.hess_at(vnu, slot_v(k, n))).collect();
        let mut rem = j.hess_at(vnu, slot_t()) - j.grad[slot_x(nu)];
        for k in 0..n {
            rem += j.hess_at(vnu, slot_x(k)) * state.v[k];
        }
        rows.push(LagrangianSplit { coeff, remainder: rem });
    }
    rows
}

/// Velocity gradient `(∂g/∂v₁, ..., ∂g/∂v_N)` from a jet.
pub fn grad_v(j: &Jet2, n: usize) -> Vec<f64> {
    (0..n).map(|k| j.grad[slot_v(k, n)]).collect()
}

/// Coefficients of the constraint-acceleration row `d/dt g = 0`:
/// returns `(coeff, rest)` with `d/dt g = coeff · ẍ + rest`.
pub fn total_derivative_row(j: &Jet2, state: &DynState, n: usize) -> (Vec<f64>, f64) {
    let coeff = grad_v(j, n);
    let mut rest = j.grad[slot_t()];
    for k in 0..n {
        rest += j.grad[slot_x(k)] * state.v[k];
    }
    (coeff, rest)
}

/// Which frame the matrices were built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameVariant {
    /// Rows `L₁..L_M` then the `N−M` auxiliary functions.
    T1,
    /// Rows `L₁..L_M`, the first `N−M−1` auxiliary functions, then `L₀`
    /// (whose `Ω` row is forced to zero).
    T2,
}

/// Frame matrices at one state. `Ω` is stored split: entry `(j,k)` equals
/// `omega_rem[j][k] + Σ_m omega_coeff[j][(k,m)] ẍ_m`.
#[derive(Debug, Clone)]
pub struct FrameMatrices {
    pub variant: FrameVariant,
    pub n: usize,
    pub m: usize,
    pub w: Mat,
    pub omega_coeff: Vec<Mat>,
    pub omega_rem: Mat,
    pub det_w: f64,
    pub cond_w: f64,
    pub a: Option<Mat>,
}

/// `|detW|` is compared against `base · max-row-norm(W)`; the default base is
/// 1e-8. Frames are only guaranteed invertible away from a measure-zero set,
/// so callers treat threshold crossings as events, not hard faults.
pub const SINGULAR_THRESHOLD_BASE: f64 = 1e-8;

impl FrameMatrices {
    pub fn is_singular(&self, base: f64) -> bool {
        self.det_w.abs() <= base * self.w.max_row_norm()
    }

    /// Assemble `Ω` at a known acceleration.
    pub fn omega_at(&self, accel: &[f64]) -> Mat {
        let n = self.n;
        let mut omega = self.omega_rem.clone();
        for j in 0..n {
            for k in 0..n {
                let c = &self.omega_coeff[j];
                let mut s = 0.0;
                for m in 0..n {
                    s += c[(k, m)] * accel[m];
                }
                omega[(j, k)] += s;
            }
        }
        omega
    }
}

/// Errors from frame construction and the constrained solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameError {
    Eval(EvalError),
    SingularFrame { det_w: f64 },
}

impl std::fmt::Display for FrameError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FrameError::Eval(e) => write!(f, "{}", e),
            FrameError::SingularFrame { det_w } => {
                write!(f, "frame matrix W is singular (detW = {:e})", det_w)
            }
        }
    }
}

impl std::error::Error for FrameError {}

impl From<EvalError> for FrameError {
    fn from(e: EvalError) -> Self {
        FrameError::Eval(e)
    }
}

/// The frame row functions for a variant, in order.
pub fn frame_rows(model: &MechModel, variant: FrameVariant) -> Vec<&Bound> {
    let n = model.n();
    let m = model.m();
    let mut rows: Vec<&Bound> = model.constraints.iter().collect();
    match variant {
        FrameVariant::T1 => rows.extend(model.aux.iter()),
        FrameVariant::T2 => {
            rows.extend(model.aux.iter().take(n - m - 1));
            rows.push(&model.lagrangian);
        }
    }
    debug_assert_eq!(rows.len(), n);
    rows
}

/// Build `W` and the split `Ω` at `state`. Singularity is reported through
/// `det_w`, never raised; `A` is left unset because `Ω` depends on `ẍ`.
pub fn build_frames(
    model: &MechModel,
    state: &DynState,
    variant: FrameVariant,
) -> Result<FrameMatrices, EvalError> {
    let n = model.n();
    let rows = frame_rows(model, variant);
    let mut w = Mat::zeros(n, n);
    let mut omega_coeff = vec![Mat::zeros(n, n); n];
    let mut omega_rem = Mat::zeros(n, n);
    for (j, row_fn) in rows.iter().enumerate() {
        let jet = model.eval_jet2(row_fn, state)?;
        for k in 0..n {
            w[(j, k)] = jet.grad[slot_v(k, n)];
        }
        let is_forced_zero = variant == FrameVariant::T2 && j == n - 1;
        if is_forced_zero {
            continue; // the L₀ row of Ω₂ is identically zero
        }
        let splits = split_rows_from_jet(&jet, state, n);
        for (k, split) in splits.iter().enumerate() {
            omega_rem[(j, k)] = split.remainder;
            for m in 0..n {
                omega_coeff[j][(k, m)] = split.coeff[m];
            }
        }
    }
    let (det_w, cond_w) = match Lu::factor(&w) {
        Ok(lu) => (lu.det(), lu.cond_1(&w)),
        Err(_) => (0.0, f64::INFINITY),
    };
    Ok(FrameMatrices { variant, n, m: model.m(), w, omega_coeff, omega_rem, det_w, cond_w, a: None })
}

/// Solve `W A = Ω(ẍ)` for the transpositional matrix `A`.
pub fn solve_a(
    frames: &FrameMatrices,
    accel: &[f64],
    singular_base: f64,
) -> Result<Mat, FrameError> {
    if frames.is_singular(singular_base) {
        return Err(FrameError::SingularFrame { det_w: frames.det_w });
    }
    let lu = Lu::factor(&frames.w)
        .map_err(|_| FrameError::SingularFrame { det_w: frames.det_w })?;
    let omega = frames.omega_at(accel);
    Ok(lu.solve_mat(&omega))
}

/// Residual `max|W·A − Ω|` for a solved `A`; the contract is
/// `< 1e-10 · (1 + max|Ω|)`.
pub fn frame_residual(frames: &FrameMatrices, a: &Mat, accel: &[f64]) -> f64 {
    let omega = frames.omega_at(accel);
    let wa = frames.w.mul_mat(a);
    let mut worst = 0.0_f64;
    for i in 0..frames.n {
        for j in 0..frames.n {
            worst = worst.max((wa[(i, j)] - omega[(i, j)]).abs());
        }
    }
    worst
}

/// Numerical rank report for the constraint velocity-Jacobian.
#[derive(Debug, Clone)]
pub struct RankReport {
    pub m: usize,
    pub n: usize,
    /// Descending singular values; empty when evaluation failed.
    pub singular_values: Vec<f64>,
    /// `None` when a constraint could not be evaluated at the state.
    pub rank: Option<usize>,
    pub full_rank: bool,
    pub error: Option<EvalError>,
}

/// Numerical rank (singular values above `1e-10 ·` largest) of the `M×N`
/// matrix `∂L_α/∂v_k`. Evaluation failures are reported as rank-undefined.
pub fn check_constraint_rank(model: &MechModel, state: &DynState) -> RankReport {
    let m = model.m();
    let n = model.n();
    let mut jac = Mat::zeros(m, n);
    for (alpha, c) in model.constraints.iter().enumerate() {
        match model.eval_jet2(c, state) {
            Ok(jet) => {
                for k in 0..n {
                    jac[(alpha, k)] = jet.grad[slot_v(k, n)];
                }
            }
            Err(e) => {
                return RankReport {
                    m,
                    n,
                    singular_values: Vec::new(),
                    rank: None,
                    full_rank: false,
                    error: Some(e),
                };
            }
        }
    }
    if m == 0 {
        return RankReport {
            m,
            n,
            singular_values: Vec::new(),
            rank: Some(0),
            full_rank: true,
            error: None,
        };
    }
    let sv = singular_values(&jac);
    let tol = 1e-10 * sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > tol && s > 0.0).count();
    RankReport {
        m,
        n,
        singular_values: sv,
        rank: Some(rank),
        full_rank: rank == m,
        error: None,
    }
}

/// Constraint velocity-Jacobian (`M×N`), when it evaluates cleanly.
pub fn constraint_jacobian(model: &MechModel, state: &DynState) -> Result<Mat, EvalError> {
    let m = model.m();
    let n = model.n();
    let mut jac = Mat::zeros(m, n);
    for (alpha, c) in model.constraints.iter().enumerate() {
        let jet = model.eval_jet2(c, state)?;
        for k in 0..n {
            jac[(alpha, k)] = jet.grad[slot_v(k, n)];
        }
    }
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expression_with_params, parse_model_file};
    use crate::model::MechModel;

    const SKATE: &str = r#"
model "skate"
coords x y phi
param g = 9.8
param alpha = 0.5235987755982988
lagrangian 0.5*(dx^2 + dy^2 + dphi^2) + g*sin(alpha)*x
constraint sin(phi)*dx - cos(phi)*dy
aux cos(phi)*dx + sin(phi)*dy
aux dphi
"#;

    const APPELL_T1: &str = r#"
model "appell_hamel_t1"
coords x y z
param a = 1
param g = 9.8
lagrangian 0.5*(dx^2 + dy^2 + dz^2) - g*z
constraint dz - a*sqrt(dx^2 + dy^2)
aux dy
aux dx
"#;

    const GANTMACHER: &str = r#"
model "gantmacher"
coords x1 x2 x3 x4
param g = 9.8
lagrangian 0.5*(dx1^2 + dx2^2 + dx3^2 + dx4^2) - g*x3
constraint x1*dx1 + x2*dx2
constraint x1*dx3 - x2*dx4
aux x2*dx1 - x1*dx2
aux x2*dx3 + x1*dx4
"#;

    fn compile(text: &str) -> MechModel {
        MechModel::compile(&parse_model_file(text).unwrap())
    }

    #[test]
    fn free_particle_split() {
        let m = compile("model \"fp\"\ncoords q\nlagrangian 0.5*dq^2\naux dq\n");
        let s = DynState::new(0.3, vec![1.7], vec![-0.4]);
        let rows = lagrangian_split(&m, &m.lagrangian, &s).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].coeff, vec![1.0]);
        assert_eq!(rows[0].remainder, 0.0);
        // E₁ g = ẍ₁
        assert!((rows[0].eval(&[2.5]) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn lagrangian_derivative_kills_total_time_derivatives() {
        // g = d/dt (x₁²) = 2 x₁ v₁ → E_ν g = 0 at every state and accel
        let m = compile("model \"fp\"\ncoords q w\nlagrangian 0.5*(dq^2+dw^2)\naux 2*q*dq\naux dw\n");
        let g = &m.aux[0];
        for seed in 0..5 {
            let s = DynState::new(
                0.1 * seed as f64,
                vec![0.3 + seed as f64, -0.7],
                vec![1.1, 0.2 * seed as f64],
            );
            let rows = lagrangian_split(&m, g, &s).unwrap();
            let accel = [0.9, -2.0];
            for row in rows {
                assert!(row.eval(&accel).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn gauge_invariance_of_e_rows() {
        // adding d f(t,x)/dt to a frame function leaves E rows unchanged
        let base = compile(
            "model \"g\"\ncoords q w\nlagrangian 0.5*(dq^2+dw^2)\naux sin(q)*dw\naux dq\n",
        );
        let vars = base.spec.var_names();
        // f = t·q² → df/dt = q² + 2·t·q·dq
        let df = parse_expression_with_params("q^2 + 2*t*q*dq", &vars, &[]).unwrap();
        let g_plus = base.bind_expr(&crate::expr::Expr::Bin(
            crate::expr::BinOp::Add,
            Box::new(base.spec.aux[0].clone()),
            Box::new(df),
        ));
        let s = DynState::new(0.7, vec![0.4, -1.2], vec![0.9, 0.35]);
        let rows_a = lagrangian_split(&base, &base.aux[0], &s).unwrap();
        let rows_b = lagrangian_split(&base, &g_plus, &s).unwrap();
        let accel = [1.3, -0.2];
        for (a, b) in rows_a.iter().zip(&rows_b) {
            assert!((a.eval(&accel) - b.eval(&accel)).abs() < 1e-12);
        }
    }

    #[test]
    fn split_reconstruction_against_path_differences() {
        // E_ν g from the split vs d/dt(∂g/∂v_ν) − ∂g/∂x_ν along the quadratic
        // path x(s) = x + v s + ½ ẍ s², with Richardson-extrapolated central
        // differences of the (exact) jet gradient.
        let m = compile(SKATE);
        let n = m.n();
        let state = DynState::new(0.25, vec![0.2, -0.4, 0.8], vec![0.6, 0.3, 1.4]);
        let accel = [0.7, -1.1, 0.5];
        let g = &m.constraints[0];
        let rows = lagrangian_split(&m, g, &state).unwrap();

        let path = |s: f64| -> DynState {
            let x: Vec<f64> = (0..n)
                .map(|k| state.x[k] + state.v[k] * s + 0.5 * accel[k] * s * s)
                .collect();
            let v: Vec<f64> = (0..n).map(|k| state.v[k] + accel[k] * s).collect();
            DynState::new(state.t + s, x, v)
        };
        let p_nu = |s: f64, nu: usize| -> f64 {
            let j = m.eval_jet2(g, &path(s)).unwrap();
            j.grad[slot_v(nu, n)]
        };
        let j0 = m.eval_jet2(g, &state).unwrap();
        for nu in 0..n {
            let h = 1e-3;
            let d_h = (p_nu(h, nu) - p_nu(-h, nu)) / (2.0 * h);
            let d_h2 = (p_nu(h / 2.0, nu) - p_nu(-h / 2.0, nu)) / h;
            let ddt = (4.0 * d_h2 - d_h) / 3.0;
            let e_direct = ddt - j0.grad[slot_x(nu)];
            let e_split = rows[nu].eval(&accel);
            assert!(
                (e_direct - e_split).abs() < 1e-12,
                "row {}: direct {} vs split {}",
                nu,
                e_direct,
                e_split
            );
        }
    }

    #[test]
    fn skate_frames_have_unit_determinant() {
        let m = compile(SKATE);
        for (x, y, phi, vx, om) in [
            (0.0, 0.0, 0.0, 1.0, 2.0),
            (1.0, -2.0, 0.9, 0.4, -1.0),
            (0.3, 0.3, 2.4, -0.8, 0.1),
        ] {
            let vy = phi_consistent_vy(phi, vx);
            let s = DynState::new(0.0, vec![x, y, phi], vec![vx, vy, om]);
            let f = build_frames(&m, &s, FrameVariant::T1).unwrap();
            assert!((f.det_w - 1.0).abs() < 1e-12, "detW1 = {}", f.det_w);
        }
    }

    fn phi_consistent_vy(phi: f64, vx: f64) -> f64 {
        // satisfy sinφ·vx − cosφ·vy = 0
        vx * phi.tan()
    }

    #[test]
    fn skate_a_matrix_matches_worked_example() {
        let m = compile(SKATE);
        // φ = 0, v = (1, 0, 2): A = [[0, φ̇, −ẏ], [−φ̇, 0, ẋ], [0,0,0]]
        let s = DynState::new(0.0, vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 2.0]);
        let f = build_frames(&m, &s, FrameVariant::T1).unwrap();
        let accel = [0.3, -0.6, 0.0]; // Ω₁ is ẍ-independent for linear constraints
        let a = solve_a(&f, &accel, SINGULAR_THRESHOLD_BASE).unwrap();
        let expect = [[0.0, 2.0, 0.0], [-2.0, 0.0, 1.0], [0.0, 0.0, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (a[(i, j)] - expect[i][j]).abs() < 1e-12,
                    "A[{}][{}] = {}",
                    i,
                    j,
                    a[(i, j)]
                );
            }
        }
        assert!(frame_residual(&f, &a, &accel) < 1e-10 * (1.0 + f.omega_at(&accel).max_abs()));
    }

    #[test]
    fn appell_hamel_t1_det_and_a_structure() {
        let m = compile(APPELL_T1);
        let s = DynState::new(0.0, vec![0.0; 3], vec![1.0, 0.4, (1.0_f64 + 0.16).sqrt()]);
        let f = build_frames(&m, &s, FrameVariant::T1).unwrap();
        assert!((f.det_w - (-1.0)).abs() < 1e-12, "detW1 = {}", f.det_w);
        let accel = [0.3, -0.9, 0.2];
        let a = solve_a(&f, &accel, SINGULAR_THRESHOLD_BASE).unwrap();
        // single nonzero row: row 3 = (E₁L₁, E₂L₁, E₃L₁) with
        // E₁L₁ = −ẏ·q, E₂L₁ = ẋ·q, q = a(ẍẏ − ẋÿ)/(ẋ²+ẏ²)^{3/2}
        let (vx, vy) = (1.0, 0.4);
        let q = (accel[0] * vy - vx * accel[1]) / (vx * vx + vy * vy).powf(1.5);
        for j in 0..3 {
            assert!(a[(0, j)].abs() < 1e-13);
            assert!(a[(1, j)].abs() < 1e-13);
        }
        assert!((a[(2, 0)] - (-vy * q)).abs() < 1e-12);
        assert!((a[(2, 1)] - (vx * q)).abs() < 1e-12);
        assert!(a[(2, 2)].abs() < 1e-13);
    }

    #[test]
    fn appell_hamel_t2_determinant_on_constraint() {
        let text = r#"
model "appell_hamel_t2"
coords x y z
param a = 1
param g = 9.8
lagrangian 0.5*(dx^2 + dy^2 + dz^2) - g*z
constraint dz - a*sqrt(dx^2 + dy^2)
aux atan2(dx, dy)
aux dx
"#;
        let m = compile(text);
        for (vx, vy) in [(1.0_f64, 0.0_f64), (0.6, -0.8), (0.3, 0.7)] {
            let speed = (vx * vx + vy * vy).sqrt();
            let s = DynState::new(0.0, vec![0.0; 3], vec![vx, vy, speed]);
            let f = build_frames(&m, &s, FrameVariant::T2).unwrap();
            assert!((f.det_w - 2.0).abs() < 1e-10, "detW2 = {} at ({}, {})", f.det_w, vx, vy);
            // last Ω row forced to zero
            for k in 0..3 {
                assert_eq!(f.omega_rem[(2, k)], 0.0);
                for mm in 0..3 {
                    assert_eq!(f.omega_coeff[2][(k, mm)], 0.0);
                }
            }
        }
    }

    #[test]
    fn gantmacher_det_is_radius_fourth_power() {
        let m = compile(GANTMACHER);
        let (x1, x2) = (0.3, 0.4);
        let s = DynState::new(0.0, vec![x1, x2, 0.1, -0.2], vec![0.4, -0.3, 0.5, 0.6]);
        let f = build_frames(&m, &s, FrameVariant::T1).unwrap();
        let r2: f64 = x1 * x1 + x2 * x2;
        assert!((f.det_w - r2 * r2).abs() < 1e-12, "detW1 = {}", f.det_w);
    }

    #[test]
    fn unconstrained_frames_give_zero_a() {
        let m = compile("model \"fp\"\ncoords q w\nlagrangian 0.5*(dq^2+dw^2)\naux dq\naux dw\n");
        let s = DynState::new(0.0, vec![0.4, -0.6], vec![1.0, 2.0]);
        let f = build_frames(&m, &s, FrameVariant::T1).unwrap();
        let a = solve_a(&f, &[3.0, -1.0], SINGULAR_THRESHOLD_BASE).unwrap();
        assert_eq!(a.max_abs(), 0.0);
        assert!((f.det_w - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rank_report_skate_and_gantmacher() {
        let skate = compile(SKATE);
        let s = DynState::new(0.0, vec![0.0, 0.0, 1.1], vec![0.2, 0.2 * 1.1_f64.tan(), 0.0]);
        let r = check_constraint_rank(&skate, &s);
        assert_eq!(r.rank, Some(1));
        assert!(r.full_rank);

        let gant = compile(GANTMACHER);
        let s = DynState::new(0.0, vec![0.3, 0.4, 0.0, 0.0], vec![0.0; 4]);
        let r = check_constraint_rank(&gant, &s);
        assert_eq!(r.rank, Some(2));
        assert!(r.full_rank);
    }

    #[test]
    fn rank_undefined_at_sqrt_kink() {
        let m = compile(APPELL_T1);
        let s = DynState::new(0.0, vec![0.0; 3], vec![0.0, 0.0, 0.0]);
        let r = check_constraint_rank(&m, &s);
        assert_eq!(r.rank, None);
        assert!(!r.full_rank);
        assert!(r.error.is_some());
    }

    #[test]
    fn constraint_row_annihilation() {
        // rows 1..M of W·A = Ω say exactly E_m L_α = Σ_k A_{km} ∂L_α/∂v_k
        let m = compile(GANTMACHER);
        let s = DynState::new(
            0.0,
            vec![0.3, 0.4, 0.2, -0.1],
            vec![0.4, -0.3, 0.25, 0.5],
        );
        let f = build_frames(&m, &s, FrameVariant::T1).unwrap();
        let accel = [0.8, 0.1, -0.4, 0.9];
        let a = solve_a(&f, &accel, SINGULAR_THRESHOLD_BASE).unwrap();
        for (alpha, c) in m.constraints.iter().enumerate() {
            let jet = m.eval_jet2(c, &s).unwrap();
            let gv = grad_v(&jet, m.n());
            let splits = split_rows_from_jet(&jet, &s, m.n());
            for nu in 0..m.n() {
                let mut dot = 0.0;
                for k in 0..m.n() {
                    dot += a[(k, nu)] * gv[k];
                }
                let e_nu = splits[nu].eval(&accel);
                assert!(
                    (e_nu - dot).abs() < 1e-9,
                    "constraint {} col {}: {} vs {}",
                    alpha,
                    nu,
                    e_nu,
                    dot
                );
            }
        }
    }
}
