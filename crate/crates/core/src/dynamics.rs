//! Equation-of-motion assemblers.
//!
//! Every formulation reduces to a single linear solve per state in the
//! unknowns `(ẍ, multiplier rates)`. The acceleration dependence of the
//! frame matrix `A = W⁻¹Ω` is handled exactly through the split form of `Ω`:
//! with `u = W⁻ᵀ ∂L₀/∂v`, the term `Σ_k A_{kν} ∂L₀/∂v_k` equals
//! `Σ_j u_j Ω_{jν}(ẍ)`, which is affine in `ẍ`. No fixed-point iteration.
//!
//! Row conventions (`p = ∂L₀/∂v`, multipliers padded with zeros past M):
//!
//! * d'Alembert: `E_ν L₀ = Σ_α μ_α ∂L_α/∂v_ν`
//! * MVM-T1:     `E_ν L₀ − Σ_k A_{kν} p_k = Σ_α λ̇_α ∂L_α/∂v_ν`
//! * MVM-T2:     `E_ν L₀ = Σ_α λ̃̇_α ∂L_α/∂v_ν` (the forced-zero L₀ row of
//!   `Ω₂` kills the `A` term), valid wherever `|W₂|` is away from zero
//! * vakonomic:  `E_ν L₀ − Σ_j λ_j E_ν L_j = Σ_j λ̇_j ∂L_j/∂v_ν`
//!
//! plus the differentiated constraints `d/dt L_α = 0` in every case.

use std::fmt;

use crate::expr::Expr;
use crate::jet::{slot_v, Jet2};
use crate::lagrange::{
    self, build_frames, solve_a, split_rows_from_jet, total_derivative_row, FrameError,
    FrameMatrices, FrameVariant, LagrangianSplit, SINGULAR_THRESHOLD_BASE,
};
use crate::linalg::{Lu, Mat};
use crate::model::{DynState, EvalError, MechModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    DAlembert,
    Vakonomic,
    MvmT1,
    MvmT2,
    VoronetsReduced,
    ChaplyginReduced,
}

impl Formulation {
    pub fn id(&self) -> &'static str {
        match self {
            Formulation::DAlembert => "dalembert",
            Formulation::Vakonomic => "vakonomic",
            Formulation::MvmT1 => "mvm-t1",
            Formulation::MvmT2 => "mvm-t2",
            Formulation::VoronetsReduced => "voronets",
            Formulation::ChaplyginReduced => "chaplygin",
        }
    }

    pub fn from_id(id: &str) -> Option<Formulation> {
        Some(match id {
            "dalembert" | "d-alembert" => Formulation::DAlembert,
            "vakonomic" => Formulation::Vakonomic,
            "mvm-t1" | "t1" => Formulation::MvmT1,
            "mvm-t2" | "t2" => Formulation::MvmT2,
            "voronets" | "voronets-reduced" => Formulation::VoronetsReduced,
            "chaplygin" | "chaplygin-reduced" => Formulation::ChaplyginReduced,
            _ => return None,
        })
    }

    /// Does the integrated state carry multipliers?
    pub fn carries_lambda(&self) -> bool {
        matches!(self, Formulation::Vakonomic)
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

/// Solver tolerances. `admission_tol` gates how far off the constraint
/// manifold a state may be before assembly refuses to run; `singular_base`
/// scales the frame singularity threshold.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub admission_tol: f64,
    pub singular_base: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { admission_tol: 1e-8, singular_base: SINGULAR_THRESHOLD_BASE }
    }
}

/// Solved accelerations and diagnostics at one state.
#[derive(Debug, Clone)]
pub struct AccelSolution {
    pub formulation: Formulation,
    pub accel: Vec<f64>,
    /// μ for d'Alembert, λ̇ for MVM-T1/vakonomic/reduced forms, λ̃̇ for MVM-T2.
    pub mult_rate: Vec<f64>,
    /// Frame matrices with `A` populated at the solved acceleration
    /// (absent for d'Alembert and the reduced forms).
    pub frames: Option<FrameMatrices>,
    /// Max residual of the assembled linear system at the returned solution.
    pub residual: f64,
    /// Determinant of the determinacy matrix `G` (MVM-T1 only).
    pub det_g: Option<f64>,
    /// Constraint force split `(F₁, F₂)` (MVM-T1 only).
    pub forces: Option<(Vec<f64>, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DynError {
    OffManifold { residual: f64, tol: f64 },
    SingularFrame { det_w: f64 },
    SingularSystem,
    NotVoronetsForm(String),
    NotChaplyginForm(String),
    Domain(EvalError),
    BadLambda { expected: usize, got: usize },
}

impl fmt::Display for DynError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynError::OffManifold { residual, tol } => write!(
                f,
                "state is off the constraint manifold (residual {:e}, tolerance {:e})",
                residual, tol
            ),
            DynError::SingularFrame { det_w } => {
                write!(f, "frame matrix is singular (detW = {:e})", det_w)
            }
            DynError::SingularSystem => write!(f, "equation system is singular at this state"),
            DynError::NotVoronetsForm(why) => write!(f, "model is not in Voronets form: {}", why),
            DynError::NotChaplyginForm(why) => {
                write!(f, "model is not in Chaplygin form: {}", why)
            }
            DynError::Domain(e) => write!(f, "{}", e),
            DynError::BadLambda { expected, got } => {
                write!(f, "state carries {} multipliers, model has {}", got, expected)
            }
        }
    }
}

impl std::error::Error for DynError {}

impl From<EvalError> for DynError {
    fn from(e: EvalError) -> Self {
        DynError::Domain(e)
    }
}

impl From<FrameError> for DynError {
    fn from(e: FrameError) -> Self {
        match e {
            FrameError::Eval(e) => DynError::Domain(e),
            FrameError::SingularFrame { det_w } => DynError::SingularFrame { det_w },
        }
    }
}

/// Jets and split rows shared by every assembler.
struct Assembly {
    n: usize,
    m: usize,
    l0: Jet2,
    e0: Vec<LagrangianSplit>,
    /// ∂L₀/∂v
    p: Vec<f64>,
    c_jets: Vec<Jet2>,
    /// ∂L_α/∂v as rows
    jv: Mat,
    /// d/dt L_α = jv[α]·ẍ + crow_rest[α]
    crow_rest: Vec<f64>,
}

fn assemble_base(
    model: &MechModel,
    state: &DynState,
    cfg: &SolverConfig,
) -> Result<Assembly, DynError> {
    let n = model.n();
    let m = model.m();
    let c_jets: Vec<Jet2> = model
        .constraints
        .iter()
        .map(|c| model.eval_jet2(c, state))
        .collect::<Result<_, _>>()?;
    let worst = c_jets.iter().fold(0.0_f64, |w, j| w.max(j.val.abs()));
    if worst > cfg.admission_tol {
        return Err(DynError::OffManifold { residual: worst, tol: cfg.admission_tol });
    }
    let l0 = model.eval_jet2(&model.lagrangian, state)?;
    let e0 = split_rows_from_jet(&l0, state, n);
    let p = lagrange::grad_v(&l0, n);
    let mut jv = Mat::zeros(m, n);
    let mut crow_rest = vec![0.0; m];
    for (alpha, cj) in c_jets.iter().enumerate() {
        let (coeff, rest) = total_derivative_row(cj, state, n);
        for k in 0..n {
            jv[(alpha, k)] = coeff[k];
        }
        crow_rest[alpha] = rest;
    }
    Ok(Assembly { n, m, l0, e0, p, c_jets, jv, crow_rest })
}

/// Solve an assembled system; returns the solution and its max residual.
fn solve_system(mat: &Mat, rhs: &[f64]) -> Result<(Vec<f64>, f64), DynError> {
    let lu = Lu::factor(mat).map_err(|_| DynError::SingularSystem)?;
    let z = lu.solve(rhs);
    let back = mat.mul_vec(&z);
    let res = crate::linalg::max_abs_diff(&back, rhs);
    Ok((z, res))
}

fn fill_constraint_rows(asm: &Assembly, mat: &mut Mat, rhs: &mut [f64], row0: usize) {
    for alpha in 0..asm.m {
        for k in 0..asm.n {
            mat[(row0 + alpha, k)] = asm.jv[(alpha, k)];
        }
        rhs[row0 + alpha] = -asm.crow_rest[alpha];
    }
}

/// The E L₀ rows shared by the d'Alembert and T2 systems.
fn build_plain_system(asm: &Assembly) -> (Mat, Vec<f64>) {
    let (n, m) = (asm.n, asm.m);
    let mut mat = Mat::zeros(n + m, n + m);
    let mut rhs = vec![0.0; n + m];
    for nu in 0..n {
        for k in 0..n {
            mat[(nu, k)] = asm.e0[nu].coeff[k];
        }
        for alpha in 0..m {
            mat[(nu, n + alpha)] = -asm.jv[(alpha, nu)];
        }
        rhs[nu] = -asm.e0[nu].remainder;
    }
    fill_constraint_rows(asm, &mut mat, &mut rhs, n);
    (mat, rhs)
}

/// Classical Lagrangian equations with multipliers.
pub fn accel_dalembert(
    model: &MechModel,
    state: &DynState,
    cfg: &SolverConfig,
) -> Result<AccelSolution, DynError> {
    let asm = assemble_base(model, state, cfg)?;
    let n = asm.n;
    let (mat, rhs) = build_plain_system(&asm);
    let (z, residual) = solve_system(&mat, &rhs)?;
    Ok(AccelSolution {
        formulation: Formulation::DAlembert,
        accel: z[..n].to_vec(),
        mult_rate: z[n..].to_vec(),
        frames: None,
        residual,
        det_g: None,
        forces: None,
    })
}

/// MVM with the `W₁` frame (constraints then auxiliary functions).
pub fn accel_mvm_t1(
    model: &MechModel,
    state: &DynState,
    cfg: &SolverConfig,
) -> Result<AccelSolution, DynError> {
    let asm = assemble_base(model, state, cfg)?;
    let n = asm.n;
    let mut frames = build_frames(model, state, FrameVariant::T1)?;
    if frames.is_singular(cfg.singular_base) {
        return Err(DynError::SingularFrame { det_w: frames.det_w });
    }
    // u = W⁻ᵀ p turns the Aᵀp term into u·Ω(ẍ) columns.
    let wt = frames.w.transpose();
    let u = Lu::factor(&wt)
        .map_err(|_| DynError::SingularFrame { det_w: frames.det_w })?
        .solve(&asm.p);
    let (mat, rhs) = build_t1_system(&asm, &frames, &u);
    // det G is the determinant of the ẍ-coefficient block.
    let mut g = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = mat[(i, j)];
        }
    }
    let det_g = crate::linalg::det(&g);
    let (z, residual) = solve_system(&mat, &rhs)?;
    let accel = z[..n].to_vec();
    let mult_rate = z[n..].to_vec();
    let a = solve_a(&frames, &accel, cfg.singular_base)?;
    let forces = force_split(&frames, &a, &asm.p, &mult_rate);
    frames.a = Some(a);
    Ok(AccelSolution {
        formulation: Formulation::MvmT1,
        accel,
        mult_rate,
        frames: Some(frames),
        residual,
        det_g: Some(det_g),
        forces: Some(forces),
    })
}

fn build_t1_system(asm: &Assembly, frames: &FrameMatrices, u: &[f64]) -> (Mat, Vec<f64>) {
    let (n, m) = (asm.n, asm.m);
    let mut mat = Mat::zeros(n + m, n + m);
    let mut rhs = vec![0.0; n + m];
    for nu in 0..n {
        for k in 0..n {
            let mut coeff = asm.e0[nu].coeff[k];
            for j in 0..n {
                coeff -= u[j] * frames.omega_coeff[j][(nu, k)];
            }
            mat[(nu, k)] = coeff;
        }
        for alpha in 0..m {
            mat[(nu, n + alpha)] = -asm.jv[(alpha, nu)];
        }
        let mut rem = -asm.e0[nu].remainder;
        for j in 0..n {
            rem += u[j] * frames.omega_rem[(j, nu)];
        }
        rhs[nu] = rem;
    }
    fill_constraint_rows(asm, &mut mat, &mut rhs, n);
    (mat, rhs)
}

/// MVM with the `W₂` frame (constraints, auxiliary functions, then `L₀`).
pub fn accel_mvm_t2(
    model: &MechModel,
    state: &DynState,
    cfg: &SolverConfig,
) -> Result<AccelSolution, DynError> {
    let asm = assemble_base(model, state, cfg)?;
    let n = asm.n;
    let mut frames = build_frames(model, state, FrameVariant::T2)?;
    if frames.is_singular(cfg.singular_base) {
        return Err(DynError::SingularFrame { det_w: frames.det_w });
    }
    let (mat, rhs) = build_plain_system(&asm);
    let (z, residual) = solve_system(&mat, &rhs)?;
    let accel = z[..n].to_vec();
    let a = solve_a(&frames, &accel, cfg.singular_base)?;
    frames.a = Some(a);
    Ok(AccelSolution {
        formulation: Formulation::MvmT2,
        accel,
        mult_rate: z[n..].to_vec(),
        frames: Some(frames),
        residual,
        det_g: None,
        forces: None,
    })
}

/// Vakonomic equations; the state carries the current multipliers λ.
pub fn rhs_vakonomic(
    model: &MechModel,
    state: &DynState,
    cfg: &SolverConfig,
) -> Result<AccelSolution, DynError> {
    let asm = assemble_base(model, state, cfg)?;
    let (n, m) = (asm.n, asm.m);
    let lambda: Vec<f64> = if state.lambda.is_empty() {
        vec![0.0; m]
    } else if state.lambda.len() == m {
        state.lambda.clone()
    } else {
        return Err(DynError::BadLambda { expected: m, got: state.lambda.len() });
    };
    let (mat, rhs) = build_vakonomic_system(&asm, state, &lambda);
    let (z, residual) = solve_system(&mat, &rhs)?;
    Ok(AccelSolution {
        formulation: Formulation::Vakonomic,
        accel: z[..n].to_vec(),
        mult_rate: z[n..].to_vec(),
        frames: None,
        residual,
        det_g: None,
        forces: None,
    })
}

fn build_vakonomic_system(asm: &Assembly, state: &DynState, lambda: &[f64]) -> (Mat, Vec<f64>) {
    let (n, m) = (asm.n, asm.m);
    let ec: Vec<Vec<LagrangianSplit>> =
        asm.c_jets.iter().map(|j| split_rows_from_jet(j, state, n)).collect();
    let mut mat = Mat::zeros(n + m, n + m);
    let mut rhs = vec![0.0; n + m];
    for nu in 0..n {
        for k in 0..n {
            let mut coeff = asm.e0[nu].coeff[k];
            for j in 0..m {
                coeff -= lambda[j] * ec[j][nu].coeff[k];
            }
            mat[(nu, k)] = coeff;
        }
        for j in 0..m {
            mat[(nu, n + j)] = -asm.jv[(j, nu)];
        }
        let mut rem = -asm.e0[nu].remainder;
        for j in 0..m {
            rem += lambda[j] * ec[j][nu].remainder;
        }
        rhs[nu] = rem;
    }
    fill_constraint_rows(asm, &mut mat, &mut rhs, n);
    (mat, rhs)
}

/// The assembled `(N+M)` linear system `(matrix, rhs)` of a formulation at a
/// state, for inspection (`derive` prints it). Unknown order: ẍ then the
/// multiplier rates.
pub fn assembled_system(
    model: &MechModel,
    formulation: Formulation,
    state: &DynState,
    cfg: &SolverConfig,
) -> Result<(Mat, Vec<f64>), DynError> {
    let asm = assemble_base(model, state, cfg)?;
    match formulation {
        Formulation::DAlembert | Formulation::MvmT2 => Ok(build_plain_system(&asm)),
        Formulation::MvmT1 => {
            let frames = build_frames(model, state, FrameVariant::T1)?;
            if frames.is_singular(cfg.singular_base) {
                return Err(DynError::SingularFrame { det_w: frames.det_w });
            }
            let wt = frames.w.transpose();
            let u = Lu::factor(&wt)
                .map_err(|_| DynError::SingularFrame { det_w: frames.det_w })?
                .solve(&asm.p);
            Ok(build_t1_system(&asm, &frames, &u))
        }
        Formulation::Vakonomic => {
            let m = asm.m;
            let lambda = if state.lambda.is_empty() {
                vec![0.0; m]
            } else {
                state.lambda.clone()
            };
            Ok(build_vakonomic_system(&asm, state, &lambda))
        }
        Formulation::VoronetsReduced | Formulation::ChaplyginReduced => {
            Err(DynError::NotVoronetsForm(
                "reduced formulations assemble coordinate-block systems; inspect via mvm-t1"
                    .to_string(),
            ))
        }
    }
}

/// Partition of the coordinates for a model in Voronets form: constraints
/// `dx_α − Φ_α`, one distinct dependent coordinate per constraint.
#[derive(Debug, Clone)]
pub struct VoronetsPartition {
    /// Coordinate index of the dependent coordinate of each constraint.
    pub dep: Vec<usize>,
    /// Remaining (independent) coordinate indices, in declaration order.
    pub indep: Vec<usize>,
    /// Φ_α as spec-level expressions.
    pub phi: Vec<Expr>,
}

/// Structural check for `constraint_α = d<coord> − Φ_α` with Φ independent of
/// every constrained velocity. With `chaplygin` also requires Φ and `L₀` to
/// be independent of the dependent coordinates and of `t`.
pub fn detect_reduced_form(
    model: &MechModel,
    chaplygin: bool,
) -> Result<VoronetsPartition, String> {
    use crate::expr::BinOp;
    let spec = &model.spec;
    let mut dep = Vec::new();
    let mut phi = Vec::new();
    for (alpha, c) in spec.constraints.iter().enumerate() {
        // peel a left-associated ± chain: dx_c − t₁ + t₂ − ... ;
        // Φ is the chain with all signs flipped.
        let mut terms: Vec<(bool, &Expr)> = Vec::new(); // (added, term)
        let mut head = c;
        loop {
            match head {
                Expr::Bin(BinOp::Sub, l, r) => {
                    terms.push((false, r));
                    head = l;
                }
                Expr::Bin(BinOp::Add, l, r) => {
                    terms.push((true, r));
                    head = l;
                }
                _ => break,
            }
        }
        let coord_idx = match head {
            Expr::Var(v) if v.starts_with('d') => {
                spec.coords.iter().position(|k| format!("d{}", k) == *v)
            }
            _ => None,
        };
        let idx = coord_idx.filter(|_| !terms.is_empty()).ok_or_else(|| {
            format!("constraint {} is not of the form d<coord> - Phi", alpha + 1)
        })?;
        if dep.contains(&idx) {
            return Err(format!(
                "constraint {} reuses dependent coordinate `{}`",
                alpha + 1,
                spec.coords[idx]
            ));
        }
        dep.push(idx);
        let mut phi_expr: Option<Expr> = None;
        for (added, t) in terms.into_iter().rev() {
            let term = t.clone();
            phi_expr = Some(match (phi_expr, added) {
                (None, false) => term,
                (None, true) => Expr::Neg(Box::new(term)),
                (Some(acc), false) => Expr::Bin(BinOp::Add, Box::new(acc), Box::new(term)),
                (Some(acc), true) => Expr::Bin(BinOp::Sub, Box::new(acc), Box::new(term)),
            });
        }
        phi.push(phi_expr.expect("at least one term"));
    }
    for (alpha, p) in phi.iter().enumerate() {
        for &d in &dep {
            let vel = format!("d{}", spec.coords[d]);
            if p.mentions_var(&vel) {
                return Err(format!(
                    "Phi_{} depends on constrained velocity `{}`",
                    alpha + 1,
                    vel
                ));
            }
        }
    }
    if chaplygin {
        for (alpha, p) in phi.iter().enumerate() {
            if p.mentions_var("t") {
                return Err(format!("Phi_{} depends on t", alpha + 1));
            }
            for &d in &dep {
                if p.mentions_var(&spec.coords[d]) {
                    return Err(format!(
                        "Phi_{} depends on dependent coordinate `{}`",
                        alpha + 1,
                        spec.coords[d]
                    ));
                }
            }
        }
        for &d in &dep {
            if spec.lagrangian.mentions_var(&spec.coords[d]) {
                return Err(format!(
                    "Lagrangian depends on dependent coordinate `{}`",
                    spec.coords[d]
                ));
            }
        }
    }
    let indep: Vec<usize> = (0..spec.coords.len()).filter(|i| !dep.contains(i)).collect();
    Ok(VoronetsPartition { dep, indep, phi })
}

/// Voronets reduction: multiplier-free equations for the independent block.
///
/// For constraints `dx_α − Φ_α` the dependent rows read `E_α L₀ = μ_α`
/// (`∂L_β/∂ẋ_α = δ_αβ`), so eliminating the multipliers leaves
/// `E_k L₀ = Σ_α E_α L₀ · ∂L_α/∂ẏ_k` for the independent block, plus the
/// differentiated constraints for the dependent accelerations. This is the
/// reduced content of the classical Voronets equations, extended to Φ
/// nonlinear in `ẏ`.
pub fn accel_voronets_reduced(
    model: &MechModel,
    state: &DynState,
    cfg: &SolverConfig,
) -> Result<AccelSolution, DynError> {
    let part = detect_reduced_form(model, false).map_err(DynError::NotVoronetsForm)?;
    let asm = assemble_base(model, state, cfg)?;
    let (n, m) = (asm.n, asm.m);

    let mut mat = Mat::zeros(n, n);
    let mut rhs = vec![0.0; n];
    fill_constraint_rows(&asm, &mut mat, &mut rhs, 0);
    for (row, &yk) in part.indep.iter().enumerate() {
        // E_{yk} L₀ − Σ_α ∂L_α/∂v_{yk} · E_{dα} L₀ = 0
        let mut coeff = asm.e0[yk].coeff.clone();
        let mut rem = asm.e0[yk].remainder;
        for alpha in 0..m {
            let factor = asm.jv[(alpha, yk)];
            if factor == 0.0 {
                continue;
            }
            let da = part.dep[alpha];
            for k in 0..n {
                coeff[k] -= factor * asm.e0[da].coeff[k];
            }
            rem -= factor * asm.e0[da].remainder;
        }
        for k in 0..n {
            mat[(m + row, k)] = coeff[k];
        }
        rhs[m + row] = -rem;
    }
    let (accel, residual) = solve_system(&mat, &rhs)?;
    // multipliers from the dependent-block rows: μ_α = E_{dα} L₀
    let mult_rate: Vec<f64> = part.dep.iter().map(|&d| asm.e0[d].eval(&accel)).collect();
    Ok(AccelSolution {
        formulation: Formulation::VoronetsReduced,
        accel,
        mult_rate,
        frames: None,
        residual,
        det_g: None,
        forces: None,
    })
}

/// Chaplygin reduction: equations in the restricted Lagrangian
/// `L* = L₀|_{ẋ_α = Φ_α}` with `Ψ_α = ∂L₀/∂ẋ_α` on the constraint.
pub fn accel_chaplygin_reduced(
    model: &MechModel,
    state: &DynState,
    cfg: &SolverConfig,
) -> Result<AccelSolution, DynError> {
    let part = detect_reduced_form(model, true).map_err(DynError::NotChaplyginForm)?;
    let asm = assemble_base(model, state, cfg)?;
    let (n, m) = (asm.n, asm.m);
    // L* = L₀ with every dependent velocity substituted by its Φ.
    let mut lstar_expr = model.spec.lagrangian.clone();
    for (alpha, &d) in part.dep.iter().enumerate() {
        let vel = format!("d{}", model.spec.coords[d]);
        lstar_expr = lstar_expr.substitute_var(&vel, &part.phi[alpha]);
    }
    let lstar = model.bind_expr(&lstar_expr);
    let lstar_jet = model.eval_jet2(&lstar, state)?;
    let estar = split_rows_from_jet(&lstar_jet, state, n);
    let ec: Vec<Vec<LagrangianSplit>> =
        asm.c_jets.iter().map(|j| split_rows_from_jet(j, state, n)).collect();
    // Ψ_α: the state is on the manifold, so ∂L₀/∂v there is the restricted value.
    let psi: Vec<f64> = part.dep.iter().map(|&d| asm.p[d]).collect();

    let mut mat = Mat::zeros(n, n);
    let mut rhs = vec![0.0; n];
    fill_constraint_rows(&asm, &mut mat, &mut rhs, 0);
    for (row, &yk) in part.indep.iter().enumerate() {
        // E_{yk} L* + Σ_α Ψ_α E_{yk} L_α = 0
        let mut coeff = estar[yk].coeff.clone();
        let mut rem = estar[yk].remainder;
        for alpha in 0..m {
            for k in 0..n {
                coeff[k] += psi[alpha] * ec[alpha][yk].coeff[k];
            }
            rem += psi[alpha] * ec[alpha][yk].remainder;
        }
        for k in 0..n {
            mat[(m + row, k)] = coeff[k];
        }
        rhs[m + row] = -rem;
    }
    let (accel, residual) = solve_system(&mat, &rhs)?;
    // λ̇_α = E_{dα} L₀ (L₀ does not depend on the dependent coordinates)
    let mult_rate: Vec<f64> = part.dep.iter().map(|&d| asm.e0[d].eval(&accel)).collect();
    Ok(AccelSolution {
        formulation: Formulation::ChaplyginReduced,
        accel,
        mult_rate,
        frames: None,
        residual,
        det_g: None,
        forces: None,
    })
}

/// Dispatch by formulation.
pub fn solve_accel(
    model: &MechModel,
    formulation: Formulation,
    state: &DynState,
    cfg: &SolverConfig,
) -> Result<AccelSolution, DynError> {
    match formulation {
        Formulation::DAlembert => accel_dalembert(model, state, cfg),
        Formulation::Vakonomic => rhs_vakonomic(model, state, cfg),
        Formulation::MvmT1 => accel_mvm_t1(model, state, cfg),
        Formulation::MvmT2 => accel_mvm_t2(model, state, cfg),
        Formulation::VoronetsReduced => accel_voronets_reduced(model, state, cfg),
        Formulation::ChaplyginReduced => accel_chaplygin_reduced(model, state, cfg),
    }
}

fn force_split(
    frames: &FrameMatrices,
    a: &Mat,
    p: &[f64],
    mult_rate: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let n = frames.n;
    let m = frames.m;
    let f1 = a.tr_mul_vec(p);
    let mut f2 = vec![0.0; n];
    for nu in 0..n {
        for alpha in 0..m {
            f2[nu] += frames.w[(alpha, nu)] * mult_rate[alpha];
        }
    }
    (f1, f2)
}

/// Constraint-force decomposition `F₂ = W₁ᵀ λ̇` (reaction force) and
/// `F₁ = (W₁⁻¹Ω₁)ᵀ ∂L₀/∂v`; `F₁ + F₂` reassembles the `E L₀` rows.
pub fn force_decomposition(
    model: &MechModel,
    state: &DynState,
    sol: &AccelSolution,
) -> Result<(Vec<f64>, Vec<f64>), DynError> {
    assert_eq!(sol.formulation, Formulation::MvmT1, "forces are defined from the T1 frame");
    let frames = sol.frames.as_ref().expect("T1 solution carries frames");
    let a = frames.a.as_ref().expect("T1 solution carries A");
    let l0 = model.eval_jet2(&model.lagrangian, state)?;
    let p = lagrange::grad_v(&l0, model.n());
    Ok(force_split(frames, a, &p, &sol.mult_rate))
}

/// Determinacy matrix `G` of the MVM-T1 equations and its determinant:
/// `G_{jk} = ∂²L₀/∂v_j∂v_k − Σ_n (∂A_{nk}/∂ẍ_j) ∂L₀/∂v_n`.
pub fn determinacy_matrix(
    model: &MechModel,
    state: &DynState,
    cfg: &SolverConfig,
) -> Result<(Mat, f64), DynError> {
    let asm = assemble_base(model, state, cfg)?;
    let n = asm.n;
    let frames = build_frames(model, state, FrameVariant::T1)?;
    if frames.is_singular(cfg.singular_base) {
        return Err(DynError::SingularFrame { det_w: frames.det_w });
    }
    let wt = frames.w.transpose();
    let u = Lu::factor(&wt)
        .map_err(|_| DynError::SingularFrame { det_w: frames.det_w })?
        .solve(&asm.p);
    let mut g = Mat::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let mut v = asm.l0.hess_at(slot_v(j, n), slot_v(k, n));
            for mm in 0..n {
                v -= u[mm] * frames.omega_coeff[mm][(k, j)];
            }
            g[(j, k)] = v;
        }
    }
    let det_g = crate::linalg::det(&g);
    Ok((g, det_g))
}

/// Reassembly residual `max_ν |E_ν L₀ − (F₁ + F₂)_ν|` at a solved state.
pub fn force_reassembly_residual(
    model: &MechModel,
    state: &DynState,
    sol: &AccelSolution,
    f1: &[f64],
    f2: &[f64],
) -> Result<f64, DynError> {
    let l0 = model.eval_jet2(&model.lagrangian, state)?;
    let e0 = split_rows_from_jet(&l0, state, model.n());
    let mut worst = 0.0_f64;
    for nu in 0..model.n() {
        let e = e0[nu].eval(&sol.accel);
        worst = worst.max((e - f1[nu] - f2[nu]).abs());
    }
    Ok(worst)
}
