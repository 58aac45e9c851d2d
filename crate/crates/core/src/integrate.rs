//! Fixed-step RK4 integration with velocity-level constraint projection,
//! first-integral monitoring, and singularity event logging.
//!
//! The integrated state is `(x, v)`, plus the multipliers λ for the
//! vakonomic formulation, whose rate comes out of the per-state solve.
//! A step that fails (singular frame, domain error) is retried once as two
//! half steps; if the retry fails too, frame-singularity thresholds are
//! dropped to raw-LU level for a best-effort crossing, and only if that also
//! fails is the run truncated. Every incident is recorded as an event.

use crate::dynamics::{solve_accel, DynError, Formulation, SolverConfig};
use crate::model::{Bound, DynState, MechModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
}

#[derive(Debug, Clone)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    pub method: Method,
    /// Project velocities back onto the constraint manifold after each step.
    pub project: bool,
    pub projection_tol: f64,
    /// Internal RK stages sit O(dt²) off the manifold before projection, so
    /// stage evaluations use this looser admission gate; the initial state
    /// is still checked against `solver.admission_tol`.
    pub stage_admission_tol: f64,
    pub solver: SolverConfig,
    /// Named monitor expressions of `(t, x, v)`, evaluated at every sample.
    pub monitors: Vec<(String, Bound)>,
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            method: Method::Rk4,
            project: true,
            projection_tol: 1e-12,
            stage_admission_tol: 1e-4,
            solver: SolverConfig::default(),
            monitors: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    SingularFrame,
    ProjectionFailed,
    DomainError,
    SingularSystem,
    Truncated,
}

impl EventKind {
    pub fn id(&self) -> &'static str {
        match self {
            EventKind::SingularFrame => "singular-frame",
            EventKind::ProjectionFailed => "projection-failed",
            EventKind::DomainError => "domain-error",
            EventKind::SingularSystem => "singular-system",
            EventKind::Truncated => "truncated",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub detail: String,
}

/// One recorded sample. Diagnostics that a formulation does not produce are
/// NaN (`det_w`, `det_g`) or empty (`mult`).
#[derive(Debug, Clone)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub mult: Vec<f64>,
    pub residuals: Vec<f64>,
    pub det_w: f64,
    pub det_g: f64,
    pub monitors: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub formulation: Formulation,
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    /// True when the run ended before `t_end`.
    pub truncated: bool,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }

    /// Position gap to another trajectory on the shared time grid.
    pub fn max_position_gap(&self, other: &Trajectory) -> f64 {
        let mut worst = 0.0_f64;
        for (a, b) in self.samples.iter().zip(&other.samples) {
            for (xa, xb) in a.x.iter().zip(&b.x) {
                worst = worst.max((xa - xb).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IntegrateError {
    InitOffManifold { residual: f64 },
    InitFailed(DynError),
}

impl std::fmt::Display for IntegrateError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IntegrateError::InitOffManifold { residual } => {
                write!(f, "initial state violates the constraints (residual {:e})", residual)
            }
            IntegrateError::InitFailed(e) => write!(f, "cannot evaluate the initial state: {}", e),
        }
    }
}

impl std::error::Error for IntegrateError {}

/// Phase vector (x, v[, λ]) flattened for the RK4 combinators.
#[derive(Clone)]
struct Phase {
    x: Vec<f64>,
    v: Vec<f64>,
    lambda: Vec<f64>,
}

impl Phase {
    fn from_state(s: &DynState) -> Self {
        Self { x: s.x.clone(), v: s.v.clone(), lambda: s.lambda.clone() }
    }

    fn to_state(&self, t: f64) -> DynState {
        DynState { t, x: self.x.clone(), v: self.v.clone(), lambda: self.lambda.clone() }
    }

    fn axpy(&self, h: f64, d: &Deriv) -> Phase {
        Phase {
            x: self.x.iter().zip(&d.dx).map(|(a, b)| a + h * b).collect(),
            v: self.v.iter().zip(&d.dv).map(|(a, b)| a + h * b).collect(),
            lambda: self.lambda.iter().zip(&d.dlam).map(|(a, b)| a + h * b).collect(),
        }
    }
}

struct Deriv {
    dx: Vec<f64>,
    dv: Vec<f64>,
    dlam: Vec<f64>,
}

fn eval_rhs(
    model: &MechModel,
    formulation: Formulation,
    t: f64,
    phase: &Phase,
    cfg: &SolverConfig,
) -> Result<(Deriv, crate::dynamics::AccelSolution), DynError> {
    let state = phase.to_state(t);
    let sol = solve_accel(model, formulation, &state, cfg)?;
    let dlam = if formulation.carries_lambda() { sol.mult_rate.clone() } else { Vec::new() };
    Ok((Deriv { dx: phase.v.clone(), dv: sol.accel.clone(), dlam }, sol))
}

fn rk4_step(
    model: &MechModel,
    formulation: Formulation,
    t: f64,
    phase: &Phase,
    dt: f64,
    cfg: &SolverConfig,
) -> Result<(Phase, crate::dynamics::AccelSolution), DynError> {
    let (k1, sol1) = eval_rhs(model, formulation, t, phase, cfg)?;
    let (k2, _) = eval_rhs(model, formulation, t + dt / 2.0, &phase.axpy(dt / 2.0, &k1), cfg)?;
    let (k3, _) = eval_rhs(model, formulation, t + dt / 2.0, &phase.axpy(dt / 2.0, &k2), cfg)?;
    let (k4, _) = eval_rhs(model, formulation, t + dt, &phase.axpy(dt, &k3), cfg)?;
    let n = phase.x.len();
    let mut out = phase.clone();
    for i in 0..n {
        out.x[i] += dt / 6.0 * (k1.dx[i] + 2.0 * k2.dx[i] + 2.0 * k3.dx[i] + k4.dx[i]);
        out.v[i] += dt / 6.0 * (k1.dv[i] + 2.0 * k2.dv[i] + 2.0 * k3.dv[i] + k4.dv[i]);
    }
    for i in 0..phase.lambda.len() {
        out.lambda[i] +=
            dt / 6.0 * (k1.dlam[i] + 2.0 * k2.dlam[i] + 2.0 * k3.dlam[i] + k4.dlam[i]);
    }
    Ok((out, sol1))
}

/// Minimal-norm Newton correction of the velocities onto `L_α = 0`;
/// positions and time are untouched.
pub fn project_velocities(
    model: &MechModel,
    state: &DynState,
    tol: f64,
) -> Result<DynState, DynError> {
    let m = model.m();
    if m == 0 {
        return Ok(state.clone());
    }
    let mut s = state.clone();
    for _iter in 0..5 {
        let res = model.constraint_residuals(&s)?;
        if res.iter().all(|r| r.abs() < tol) {
            return Ok(s);
        }
        let jac = crate::lagrange::constraint_jacobian(model, &s)?;
        // Δv = −Jᵀ (J Jᵀ)⁻¹ res  (least-norm correction)
        let jjt = jac.mul_mat(&jac.transpose());
        let lu = crate::linalg::Lu::factor(&jjt).map_err(|_| DynError::SingularSystem)?;
        let w = lu.solve(&res);
        let corr = jac.tr_mul_vec(&w);
        for k in 0..model.n() {
            s.v[k] -= corr[k];
        }
    }
    let res = model.constraint_residuals(&s)?;
    if res.iter().all(|r| r.abs() < tol) {
        Ok(s)
    } else {
        Err(DynError::OffManifold {
            residual: res.iter().fold(0.0_f64, |a, r| a.max(r.abs())),
            tol,
        })
    }
}

fn sample_from(
    model: &MechModel,
    state: &DynState,
    sol: Option<&crate::dynamics::AccelSolution>,
    monitors: &[(String, Bound)],
    events: &mut Vec<Event>,
) -> Sample {
    let residuals = model.constraint_residuals(state).unwrap_or_else(|_| Vec::new());
    let (mult, det_w, det_g) = match sol {
        Some(sol) => (
            sol.mult_rate.clone(),
            sol.frames.as_ref().map(|f| f.det_w).unwrap_or(f64::NAN),
            sol.det_g.unwrap_or(f64::NAN),
        ),
        None => (Vec::new(), f64::NAN, f64::NAN),
    };
    let mut monitor_vals = Vec::with_capacity(monitors.len());
    for (name, expr) in monitors {
        match model.eval_value(expr, state) {
            Ok(v) => monitor_vals.push(v),
            Err(e) => {
                events.push(Event {
                    t: state.t,
                    kind: EventKind::DomainError,
                    detail: format!("monitor `{}`: {}", name, e),
                });
                monitor_vals.push(f64::NAN);
            }
        }
    }
    Sample {
        t: state.t,
        x: state.x.clone(),
        v: state.v.clone(),
        mult,
        residuals,
        det_w,
        det_g,
        monitors: monitor_vals,
    }
}

fn classify(e: &DynError) -> EventKind {
    match e {
        DynError::SingularFrame { .. } => EventKind::SingularFrame,
        // a projected run only escapes the manifold when the dynamics hit a
        // domain degeneracy (e.g. a velocity kink), so report it as such
        DynError::Domain(_) | DynError::OffManifold { .. } => EventKind::DomainError,
        _ => EventKind::SingularSystem,
    }
}

/// Integrate `formulation` from `init` on a uniform grid; the number of
/// samples is `floor((t_end − t₀)/dt) + 1` including the initial state.
pub fn integrate(
    model: &MechModel,
    formulation: Formulation,
    init: &DynState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrateError> {
    let residuals = model
        .constraint_residuals(init)
        .map_err(|e| IntegrateError::InitFailed(DynError::Domain(e)))?;
    let worst = residuals.iter().fold(0.0_f64, |a, r| a.max(r.abs()));
    if worst > cfg.solver.admission_tol {
        return Err(IntegrateError::InitOffManifold { residual: worst });
    }
    let mut phase = Phase::from_state(init);
    if formulation.carries_lambda() && phase.lambda.is_empty() {
        phase.lambda = vec![0.0; model.m()];
    }
    let t0 = init.t;
    let steps = ((cfg.t_end - t0) / cfg.dt + 1e-9).floor().max(0.0) as usize;

    let mut events = Vec::new();
    let mut samples = Vec::with_capacity(steps + 1);
    let mut truncated = false;

    let mut stage_cfg = cfg.solver;
    stage_cfg.admission_tol = cfg.solver.admission_tol.max(cfg.stage_admission_tol);

    // the initial sample needs a solve for its diagnostics
    match eval_rhs(model, formulation, t0, &phase, &stage_cfg) {
        Ok((_, sol)) => {
            samples.push(sample_from(model, init, Some(&sol), &cfg.monitors, &mut events))
        }
        Err(e) => return Err(IntegrateError::InitFailed(e)),
    }

    let mut relaxed = stage_cfg;
    relaxed.singular_base = 0.0;

    for k in 0..steps {
        let t = t0 + k as f64 * cfg.dt;
        let attempt = rk4_step(model, formulation, t, &phase, cfg.dt, &stage_cfg);
        let (mut next, sol) = match attempt {
            Ok(r) => r,
            Err(first_err) => {
                events.push(Event {
                    t,
                    kind: classify(&first_err),
                    detail: first_err.to_string(),
                });
                // retry once at half step, then best-effort with thresholds off
                let half = rk4_step(model, formulation, t, &phase, cfg.dt / 2.0, &stage_cfg)
                    .and_then(|(mid, _)| {
                        rk4_step(model, formulation, t + cfg.dt / 2.0, &mid, cfg.dt / 2.0, &stage_cfg)
                    });
                match half.or_else(|_| rk4_step(model, formulation, t, &phase, cfg.dt, &relaxed)) {
                    Ok(r) => r,
                    Err(e) => {
                        events.push(Event {
                            t,
                            kind: EventKind::Truncated,
                            detail: format!("run stopped: {}", e),
                        });
                        truncated = true;
                        break;
                    }
                }
            }
        };
        let t_next = t0 + (k + 1) as f64 * cfg.dt;
        if cfg.project {
            match project_velocities(model, &next.to_state(t_next), cfg.projection_tol) {
                Ok(corrected) => {
                    next.v = corrected.v;
                }
                Err(e) => {
                    events.push(Event {
                        t: t_next,
                        kind: EventKind::ProjectionFailed,
                        detail: e.to_string(),
                    });
                }
            }
        }
        phase = next;
        let state = phase.to_state(t_next);
        let diag = eval_rhs(model, formulation, t_next, &phase, &relaxed).ok();
        samples.push(sample_from(
            model,
            &state,
            diag.as_ref().map(|(_, s)| s),
            &cfg.monitors,
            &mut events,
        ));
        let _ = sol;
    }

    Ok(Trajectory { formulation, samples, events, truncated })
}

/// Per-monitor drift `max_t |value(t) − value(t₀)|` over a trajectory.
pub fn monitor_first_integrals(traj: &Trajectory, names: &[String]) -> Vec<(String, f64)> {
    let mut out = Vec::with_capacity(names.len());
    for (i, name) in names.iter().enumerate() {
        let base = traj.samples.first().and_then(|s| s.monitors.get(i)).copied();
        let drift = match base {
            Some(v0) if v0.is_finite() => traj
                .samples
                .iter()
                .filter_map(|s| s.monitors.get(i))
                .fold(0.0_f64, |a, v| a.max((v - v0).abs())),
            _ => f64::NAN,
        };
        out.push((name.clone(), drift));
    }
    out
}
