//! Built-in model library.
//!
//! Each builtin is defined through the same model-file grammar users write,
//! so every entry exercises the parser and validator. A builtin carries a
//! reference initial state (already on the constraint manifold), recommended
//! formulations, optional alternate auxiliary frames, and closed-form oracle
//! functions used by the check suites.

use std::collections::BTreeMap;

use crate::dynamics::Formulation;
use crate::expr::{parse_expression_with_params, parse_model_file, Expr, ModelSpec};
use crate::model::{DynState, MechModel};

const FREE_PARTICLE: &str = r#"
model "free_particle"
coords x1 x2
lagrangian 0.5*(dx1^2 + dx2^2)
aux dx1
aux dx2
"#;

const HOLONOMIC_CIRCLE_A: &str = r#"
# particle in the plane with potential (x^2+y^2)/2, constrained to a circle
# entered in differentiated form; frame function x*dy - y*dx
model "holonomic_circle_a"
coords x y
lagrangian 0.5*(dx^2 + dy^2) - 0.5*(x^2 + y^2)
constraint 2*(x*dx + y*dy)
aux x*dy - y*dx
"#;

const HOLONOMIC_CIRCLE_B: &str = r#"
# same system as holonomic_circle_a, but the frame function is a total time
# derivative, so the transpositional matrix A vanishes identically
model "holonomic_circle_b"
coords x y
lagrangian 0.5*(dx^2 + dy^2) - 0.5*(x^2 + y^2)
constraint 2*(x*dx + y*dy)
aux (y*dx - x*dy)/(x^2 + y^2)
"#;

const SKATE: &str = r#"
# knife edge on a plane inclined at angle alpha; x points down the slope,
# phi is the blade heading; reduced mass/length/time units
model "skate"
coords x y phi
param g = 9.8
param alpha = 0.5235987755982988
param omega = 1
lagrangian 0.5*(dx^2 + dy^2 + dphi^2) + g*sin(alpha)*x
constraint sin(phi)*dx - cos(phi)*dy
aux cos(phi)*dx + sin(phi)*dy
aux dphi
"#;

const SKATE_VAKONOMIC: &str = r#"
# the skate treated vakonomically on the level plane (alpha = 0); lambda0 is
# the free initial multiplier the variational equations depend on
model "skate_vakonomic"
coords x y phi
param g = 9.8
param alpha = 0
param lambda0 = 0
lagrangian 0.5*(dx^2 + dy^2 + dphi^2) + g*sin(alpha)*x
constraint sin(phi)*dx - cos(phi)*dy
aux cos(phi)*dx + sin(phi)*dy
aux dphi
"#;

const APPELL_HAMEL_T1: &str = r#"
# particle under gravity with the nonlinear velocity constraint
# dz = a*sqrt(dx^2 + dy^2); frame completed with plain velocities
model "appell_hamel_t1"
coords x y z
param a = 1
param g = 9.8
lagrangian 0.5*(dx^2 + dy^2 + dz^2) - g*z
constraint dz - a*sqrt(dx^2 + dy^2)
aux dy
aux dx
"#;

const APPELL_HAMEL_T2: &str = r#"
# same system; the T2 frame uses the planar heading angle so that |W2| stays
# 1 + a^2 on the constraint (atan2 avoids the dy = 0 pole of atan(dx/dy))
model "appell_hamel_t2"
coords x y z
param a = 1
param g = 9.8
lagrangian 0.5*(dx^2 + dy^2 + dz^2) - g*z
constraint dz - a*sqrt(dx^2 + dy^2)
aux atan2(dx, dy)
aux dx
"#;

const GANTMACHER: &str = r#"
# two equal masses joined by a light rigid rod moving in a vertical plane,
# midpoint velocity directed along the rod; rod-adapted coordinates
model "gantmacher"
coords x1 x2 x3 x4
param g = 9.8
lagrangian 0.5*(dx1^2 + dx2^2 + dx3^2 + dx4^2) - g*x3
constraint x1*dx1 + x2*dx2
constraint x1*dx3 - x2*dx4
aux x2*dx1 - x1*dx2
aux x2*dx3 + x1*dx4
"#;

const ROLLING_DRUM: &str = r#"
# drum of radius a fixed to a wheel of radius b rolling on the plane; a mass
# m hangs from a thread wound on the drum. Chaplygin form with dependent
# block (x1, x2, x3) and independent block (y1, y2). The auxiliary frame
# rows span the momentum on the constraint manifold (for m1 = 0), which
# keeps the T1 equations equivalent to the classical ones at every
# admissible state; the plain (dy1, dy2) frame does not (aux set "voronets").
model "rolling_drum"
coords x1 x2 x3 y1 y2
param m = 1
param m1 = 0
param J = 1
param C = 2
param a = 1
param b = 1
param rho = 0.1
param g = 9.8
lagrangian 0.5*(m + m1)*(dx1^2 + dx2^2) + 0.5*C*dx3^2 + 0.5*J*dy1^2 + 0.5*m*dy2^2 + m1*rho*dy1*(sin(y1)*dx1 - cos(y1)*dx2) - (m*g/b)*y2
constraint dx1 - (a/b)*dy2*cos(y1) - rho*dy1*sin(y1)
constraint dx2 - (a/b)*dy2*sin(y1) + rho*dy1*cos(y1)
constraint dx3 - dy2/b
aux m*rho*(sin(y1)*dx1 - cos(y1)*dx2) + J*dy1 - (m*rho*(a/b)/(m*(1+(a/b)^2) + C/b^2))*y1*((a/b)*m*(cos(y1)*dx1 + sin(y1)*dx2) + (C/b)*dx3 + m*dy2)
aux (a/b)*m*(cos(y1)*dx1 + sin(y1)*dx2) + (C/b)*dx3 + m*dy2
"#;

const DRUM_VORONETS_AUX: [&str; 2] = ["dy1", "dy2"];

/// A library entry: validated spec, recommended formulations, alternate
/// frames, reference state, and the names of its closed-form oracles.
#[derive(Debug, Clone)]
pub struct BuiltinModel {
    pub name: &'static str,
    pub spec: ModelSpec,
    pub recommended: Vec<(Formulation, &'static str)>,
    /// Alternate auxiliary frames by id; the model's own frame is "default".
    pub alt_aux: Vec<(&'static str, Vec<Expr>)>,
    pub oracles: Vec<&'static str>,
    pub notes: &'static str,
    reference: fn(&MechModel) -> DynState,
}

impl BuiltinModel {
    pub fn compile(&self) -> MechModel {
        MechModel::compile(&self.spec)
    }

    /// Reference on-manifold initial state at the model's current parameters.
    pub fn reference_state(&self, model: &MechModel) -> DynState {
        (self.reference)(model)
    }

    /// The model definition with an alternate auxiliary frame substituted.
    pub fn spec_with_aux(&self, aux_id: &str) -> Option<ModelSpec> {
        if aux_id == "default" {
            return Some(self.spec.clone());
        }
        self.alt_aux.iter().find(|(id, _)| *id == aux_id).map(|(_, aux)| {
            let mut spec = self.spec.clone();
            spec.aux = aux.clone();
            spec
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelLibError {
    UnknownModel(String),
    UnknownOracle { model: String, oracle: String },
    MissingSetup { key: String },
}

impl std::fmt::Display for ModelLibError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelLibError::UnknownModel(name) => write!(f, "unknown model `{}`", name),
            ModelLibError::UnknownOracle { model, oracle } => {
                write!(f, "model `{}` has no oracle `{}`", model, oracle)
            }
            ModelLibError::MissingSetup { key } => {
                write!(f, "oracle setup is missing `{}`", key)
            }
        }
    }
}

impl std::error::Error for ModelLibError {}

pub fn builtin_names() -> Vec<&'static str> {
    vec![
        "free_particle",
        "holonomic_circle_a",
        "holonomic_circle_b",
        "skate",
        "skate_vakonomic",
        "appell_hamel_t1",
        "appell_hamel_t2",
        "gantmacher",
        "rolling_drum",
    ]
}

fn parse_builtin(text: &str) -> ModelSpec {
    parse_model_file(text).expect("builtin model text must parse")
}

fn drum_alt_aux(spec: &ModelSpec) -> Vec<(&'static str, Vec<Expr>)> {
    let vars = spec.var_names();
    let params: Vec<String> = spec.params.keys().cloned().collect();
    let aux = DRUM_VORONETS_AUX
        .iter()
        .map(|src| parse_expression_with_params(src, &vars, &params).expect("aux parses"))
        .collect();
    vec![("voronets", aux)]
}

pub fn get_builtin(name: &str) -> Result<BuiltinModel, ModelLibError> {
    let mut b = match name {
        "free_particle" => BuiltinModel {
            name: "free_particle",
            spec: parse_builtin(FREE_PARTICLE),
            recommended: vec![(Formulation::DAlembert, "default"), (Formulation::MvmT1, "default")],
            alt_aux: Vec::new(),
            oracles: vec!["uniform_motion"],
            notes: "unconstrained particle in the plane; every formulation degenerates to free motion",
            reference: |_| DynState::new(0.0, vec![0.0, 0.0], vec![1.0, 2.0]),
        },
        "holonomic_circle_a" => BuiltinModel {
            name: "holonomic_circle_a",
            spec: parse_builtin(HOLONOMIC_CIRCLE_A),
            recommended: vec![(Formulation::DAlembert, "default"), (Formulation::MvmT1, "default")],
            alt_aux: Vec::new(),
            oracles: vec![],
            notes: "integrable constraint entered in differentiated form; frame with nonzero A",
            reference: |_| DynState::new(0.0, vec![1.0, 0.0], vec![0.0, 1.0]),
        },
        "holonomic_circle_b" => BuiltinModel {
            name: "holonomic_circle_b",
            spec: parse_builtin(HOLONOMIC_CIRCLE_B),
            recommended: vec![(Formulation::DAlembert, "default"), (Formulation::MvmT1, "default")],
            alt_aux: Vec::new(),
            oracles: vec![],
            notes: "same circle, total-derivative frame function: A vanishes identically",
            reference: |_| DynState::new(0.0, vec![1.0, 0.0], vec![0.0, 1.0]),
        },
        "skate" => BuiltinModel {
            name: "skate",
            spec: parse_builtin(SKATE),
            recommended: vec![
                (Formulation::MvmT1, "default"),
                (Formulation::DAlembert, "default"),
                (Formulation::MvmT2, "default"),
            ],
            alt_aux: Vec::new(),
            oracles: vec!["cycloid", "circle", "straight_line"],
            notes: "knife edge on an inclined plane; rotating orthonormal frame keeps detW1 = 1",
            reference: |m| {
                let omega = m.param("omega").unwrap_or(1.0);
                DynState::new(0.0, vec![0.0, 0.0, 0.0], vec![0.0, 0.0, omega])
            },
        },
        "skate_vakonomic" => BuiltinModel {
            name: "skate_vakonomic",
            spec: parse_builtin(SKATE_VAKONOMIC),
            recommended: vec![(Formulation::Vakonomic, "default")],
            alt_aux: Vec::new(),
            oracles: vec!["velocity_field"],
            notes: "vakonomic treatment of the level-plane skate; motions depend on lambda0",
            reference: |m| {
                let lam = m.param("lambda0").unwrap_or(0.0);
                DynState::new(0.0, vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0])
                    .with_lambda(vec![lam])
            },
        },
        "appell_hamel_t1" => BuiltinModel {
            name: "appell_hamel_t1",
            spec: parse_builtin(APPELL_HAMEL_T1),
            recommended: vec![(Formulation::MvmT1, "default"), (Formulation::DAlembert, "default")],
            alt_aux: Vec::new(),
            oracles: vec!["constants"],
            notes: "nonlinear velocity constraint; valid away from the planar-speed kink",
            reference: |m| {
                let a = m.param("a").unwrap_or(1.0);
                DynState::new(0.0, vec![0.0; 3], vec![10.0, 0.0, 10.0 * a])
            },
        },
        "appell_hamel_t2" => BuiltinModel {
            name: "appell_hamel_t2",
            spec: parse_builtin(APPELL_HAMEL_T2),
            recommended: vec![(Formulation::MvmT2, "default"), (Formulation::DAlembert, "default")],
            alt_aux: Vec::new(),
            oracles: vec!["constants"],
            notes: "heading-angle frame, |W2| = 1 + a^2 on the constraint",
            reference: |m| {
                let a = m.param("a").unwrap_or(1.0);
                DynState::new(0.0, vec![0.0; 3], vec![10.0, 0.0, 10.0 * a])
            },
        },
        "gantmacher" => BuiltinModel {
            name: "gantmacher",
            spec: parse_builtin(GANTMACHER),
            recommended: vec![(Formulation::MvmT1, "default"), (Formulation::DAlembert, "default")],
            alt_aux: Vec::new(),
            oracles: vec!["multipliers"],
            notes: "rod of two equal masses in a vertical plane; detW1 = (x1^2+x2^2)^2",
            reference: |_| {
                DynState::new(0.0, vec![0.3, 0.4, 0.2, -0.1], vec![0.4, -0.3, 0.4, 0.3])
            },
        },
        "rolling_drum" => BuiltinModel {
            name: "rolling_drum",
            spec: parse_builtin(ROLLING_DRUM),
            recommended: vec![
                (Formulation::ChaplyginReduced, "default"),
                (Formulation::VoronetsReduced, "default"),
                (Formulation::DAlembert, "default"),
                (Formulation::MvmT1, "default"),
            ],
            alt_aux: Vec::new(),
            oracles: vec!["first_integrals", "reduced_accels"],
            notes: "wheel-and-drum with hanging mass in Chaplygin form; momentum-spanning frame, alternate frame `voronets` = (dy1, dy2)",
            reference: |m| {
                let (r, rho, b) = (
                    m.param("a").unwrap_or(1.0) / m.param("b").unwrap_or(1.0),
                    m.param("rho").unwrap_or(0.5),
                    m.param("b").unwrap_or(1.0),
                );
                let (w1, w2) = (0.5, 0.0);
                let y1 = 0.0_f64;
                let vx1 = r * w2 * y1.cos() + rho * w1 * y1.sin();
                let vx2 = r * w2 * y1.sin() - rho * w1 * y1.cos();
                let vx3 = w2 / b;
                DynState::new(0.0, vec![0.0, 0.0, 0.0, y1, 0.0], vec![vx1, vx2, vx3, w1, w2])
            },
        },
        other => return Err(ModelLibError::UnknownModel(other.to_string())),
    };
    if b.name == "rolling_drum" {
        b.alt_aux = drum_alt_aux(&b.spec);
    }
    Ok(b)
}

fn need(setup: &BTreeMap<String, f64>, key: &str) -> Result<f64, ModelLibError> {
    setup.get(key).copied().ok_or_else(|| ModelLibError::MissingSetup { key: key.to_string() })
}

fn get_or(setup: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    setup.get(key).copied().unwrap_or(default)
}

/// Closed-form expected values for a builtin at time `t` (state-based oracles
/// read the state from `setup` keys instead).
pub fn oracle_eval(
    model_name: &str,
    oracle_name: &str,
    t: f64,
    setup: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, f64>, ModelLibError> {
    let mut out = BTreeMap::new();
    match (model_name, oracle_name) {
        ("free_particle", "uniform_motion") => {
            let vx = get_or(setup, "dx1", 1.0);
            let vy = get_or(setup, "dx2", 2.0);
            out.insert("x1".into(), get_or(setup, "x1", 0.0) + vx * t);
            out.insert("x2".into(), get_or(setup, "x2", 0.0) + vy * t);
        }
        ("skate", "cycloid") => {
            // zero initial data, φ = ωt: the solution of
            // ẍ + ωẏ = k cos²ωt, ÿ − ωẋ = k sinωt cosωt with k = g sinα is
            // x = (k/4ω²)(1 − cos 2ωt), y = (k/2ω)t − (k/4ω²) sin 2ωt.
            let g = get_or(setup, "g", 9.8);
            let alpha = get_or(setup, "alpha", std::f64::consts::FRAC_PI_6);
            let omega = need(setup, "omega")?;
            let k = g * alpha.sin();
            let s2 = (2.0 * omega * t).sin();
            let c2 = (2.0 * omega * t).cos();
            out.insert("x".into(), k / (4.0 * omega * omega) * (1.0 - c2));
            out.insert("y".into(), k / (2.0 * omega) * t - k / (4.0 * omega * omega) * s2);
            out.insert("phi".into(), omega * t);
            out.insert("dx".into(), k / (2.0 * omega) * s2);
            out.insert("dy".into(), k / (2.0 * omega) * (1.0 - c2));
            out.insert("dphi".into(), omega);
        }
        ("skate", "circle") => {
            // α = 0: the contact point turns on a circle of radius |v₀|/|ω|
            // about (x₀ − ẏ₀/ω, y₀ + ẋ₀/ω)
            let omega = need(setup, "omega")?;
            let x0 = get_or(setup, "x", 0.0);
            let y0 = get_or(setup, "y", 0.0);
            let vx0 = need(setup, "dx")?;
            let vy0 = need(setup, "dy")?;
            let cx = x0 - vy0 / omega;
            let cy = y0 + vx0 / omega;
            let (s, c) = (omega * t).sin_cos();
            out.insert("x".into(), cx + (vy0 * c + vx0 * s) / omega);
            out.insert("y".into(), cy + (vy0 * s - vx0 * c) / omega);
            out.insert("center_x".into(), cx);
            out.insert("center_y".into(), cy);
            out.insert("radius".into(), (vx0 * vx0 + vy0 * vy0).sqrt() / omega.abs());
        }
        ("skate", "straight_line") => {
            // ω = 0: in the rotated frame Y = cosφ₀·x + sinφ₀·y the motion is
            // uniformly accelerated, X = sinφ₀·x − cosφ₀·y is frozen
            let g = get_or(setup, "g", 9.8);
            let alpha = get_or(setup, "alpha", std::f64::consts::FRAC_PI_6);
            let phi0 = get_or(setup, "phi", 0.0);
            let (s, c) = phi0.sin_cos();
            let x0 = get_or(setup, "x", 0.0);
            let y0 = get_or(setup, "y", 0.0);
            let vx0 = get_or(setup, "dx", 0.0);
            let vy0 = get_or(setup, "dy", 0.0);
            let big_x = s * x0 - c * y0;
            let y_cap0 = c * x0 + s * y0;
            let dy_cap0 = c * vx0 + s * vy0;
            let y_cap = g * alpha.sin() * c * t * t / 2.0 + dy_cap0 * t + y_cap0;
            out.insert("x".into(), c * y_cap + s * big_x);
            out.insert("y".into(), s * y_cap - c * big_x);
            out.insert("phi".into(), phi0);
        }
        ("skate_vakonomic", "velocity_field") => {
            // the vakonomic flow preserves a = ẋ − λ sinφ and b = ẏ + λ cosφ,
            // and on the constraint λ = b cosφ − a sinφ, hence
            // ẋ = cosφ (a cosφ + b sinφ), ẏ = sinφ (a cosφ + b sinφ)
            let a = need(setup, "a")?;
            let b = need(setup, "b")?;
            let phi = need(setup, "phi")?;
            let speed = a * phi.cos() + b * phi.sin();
            out.insert("dx".into(), phi.cos() * speed);
            out.insert("dy".into(), phi.sin() * speed);
            out.insert("lambda".into(), b * phi.cos() - a * phi.sin());
        }
        ("appell_hamel_t1", "constants") | ("appell_hamel_t2", "constants") => {
            let a = get_or(setup, "a", 1.0);
            let g = get_or(setup, "g", 9.8);
            out.insert("mult_rate".into(), g / (1.0 + a * a));
            out.insert("ddz".into(), -a * a * g / (1.0 + a * a));
        }
        ("gantmacher", "multipliers") => {
            let x1 = need(setup, "x1")?;
            let x2 = need(setup, "x2")?;
            let v1 = need(setup, "dx1")?;
            let v2 = need(setup, "dx2")?;
            let v3 = need(setup, "dx3")?;
            let v4 = need(setup, "dx4")?;
            let g = get_or(setup, "g", 9.8);
            let r2 = x1 * x1 + x2 * x2;
            out.insert("mu1".into(), -(v1 * v1 + v2 * v2) / r2);
            out.insert("mu2".into(), (v2 * v4 - v1 * v3 + g * x1) / r2);
        }
        ("rolling_drum", "first_integrals") => {
            let m = get_or(setup, "m", 1.0);
            let m1 = get_or(setup, "m1", 0.0);
            let j = get_or(setup, "J", 1.0);
            let c = get_or(setup, "C", 2.0);
            let a = get_or(setup, "a", 1.0);
            let b = get_or(setup, "b", 1.0);
            let rho = get_or(setup, "rho", 0.1);
            let g = get_or(setup, "g", 9.8);
            let y2 = need(setup, "y2")?;
            let w1 = need(setup, "dy1")?;
            let w2 = need(setup, "dy2")?;
            let i1 = m * rho * rho + j;
            out.insert("C2".into(), w1 * (-a * rho * m * y2 / (b * i1)).exp());
            out.insert(
                "h".into(),
                0.5 * ((m + m1) * a * a + m * b * b + c) * w2 * w2
                    + 0.5 * b * b * i1 * w1 * w1
                    + m * g * b * y2,
            );
        }
        ("rolling_drum", "reduced_accels") => {
            let m = get_or(setup, "m", 1.0);
            let m1 = get_or(setup, "m1", 0.0);
            let j = get_or(setup, "J", 1.0);
            let c = get_or(setup, "C", 2.0);
            let a = get_or(setup, "a", 1.0);
            let b = get_or(setup, "b", 1.0);
            let rho = get_or(setup, "rho", 0.1);
            let g = get_or(setup, "g", 9.8);
            let w1 = need(setup, "dy1")?;
            let w2 = need(setup, "dy2")?;
            out.insert("ddy1".into(), (a * rho * m / b) * w1 * w2 / (m * rho * rho + j));
            out.insert(
                "ddy2".into(),
                (-m * a * b * rho * w1 * w1 - m * g * b) / ((m + m1) * a * a + m * b * b + c),
            );
        }
        (model, oracle) => {
            if builtin_names().contains(&model) {
                return Err(ModelLibError::UnknownOracle {
                    model: model.to_string(),
                    oracle: oracle.to_string(),
                });
            }
            return Err(ModelLibError::UnknownModel(model.to_string()));
        }
    }
    Ok(out)
}

/// First-integral monitor expressions for a builtin, in source form (they are
/// parsed in the model's scope so parameters stay symbolic).
pub fn builtin_monitors(name: &str) -> Vec<(String, String)> {
    match name {
        "rolling_drum" => vec![
            (
                "C2".to_string(),
                "dy1*exp(-(a*rho*m*y2)/(b*(m*rho^2 + J)))".to_string(),
            ),
            (
                "h".to_string(),
                "0.5*((m + m1)*a^2 + m*b^2 + C)*dy2^2 + 0.5*b^2*(m*rho^2 + J)*dy1^2 + m*g*b*y2"
                    .to_string(),
            ),
        ],
        "skate" => vec![(
            "energy".to_string(),
            "0.5*(dx^2 + dy^2 + dphi^2) - g*sin(alpha)*x".to_string(),
        )],
        _ => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{accel_dalembert, solve_accel, SolverConfig};
    use crate::lagrange::{build_frames, check_constraint_rank, FrameVariant};
    use crate::linalg::max_abs_diff;

    #[test]
    fn all_builtins_validate_and_pass_rank_check() {
        for name in builtin_names() {
            let b = get_builtin(name).unwrap();
            let model = b.compile();
            let s = b.reference_state(&model);
            let rank = check_constraint_rank(&model, &s);
            assert!(rank.full_rank, "{}: rank report {:?}", name, rank.rank);
            for r in model.constraint_residuals(&s).unwrap() {
                assert!(r.abs() < 1e-12, "{}: residual {}", name, r);
            }
        }
    }

    #[test]
    fn recommended_formulations_are_healthy_at_reference() {
        let cfg = SolverConfig::default();
        for name in builtin_names() {
            let b = get_builtin(name).unwrap();
            let model = b.compile();
            let s = b.reference_state(&model);
            let dal = accel_dalembert(&model, &s, &cfg).unwrap();
            for (f, aux) in &b.recommended {
                assert_eq!(*aux, "default");
                let sol = solve_accel(&model, *f, &s, &cfg)
                    .unwrap_or_else(|e| panic!("{} {}: {}", name, f.id(), e));
                if let Some(frames) = &sol.frames {
                    assert!(!frames.is_singular(cfg.singular_base), "{} {}", name, f.id());
                }
                if *f != Formulation::Vakonomic {
                    assert!(
                        max_abs_diff(&sol.accel, &dal.accel) < 1e-9,
                        "{} {}: {:?} vs {:?}",
                        name,
                        f.id(),
                        sol.accel,
                        dal.accel
                    );
                }
            }
        }
    }

    #[test]
    fn skate_vakonomic_reference_diverges_from_dalembert() {
        // with lambda0 = 1 the vakonomic acceleration differs at t = 0
        let b = get_builtin("skate_vakonomic").unwrap();
        let model = b
            .compile()
            .with_params(&[("lambda0".to_string(), 1.0)].into_iter().collect());
        let s = b.reference_state(&model);
        let cfg = SolverConfig::default();
        let vak = solve_accel(&model, Formulation::Vakonomic, &s, &cfg).unwrap();
        let dal = accel_dalembert(&model, &s, &cfg).unwrap();
        assert!(max_abs_diff(&vak.accel, &dal.accel) > 0.1);
    }

    #[test]
    fn drum_alternate_frame_is_voronets_structured() {
        let b = get_builtin("rolling_drum").unwrap();
        let spec = b.spec_with_aux("voronets").unwrap();
        let model = MechModel::compile(&spec);
        let s = b.reference_state(&model);
        let frames = build_frames(&model, &s, FrameVariant::T1).unwrap();
        assert!((frames.det_w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(matches!(get_builtin("nope"), Err(ModelLibError::UnknownModel(_))));
        assert!(matches!(
            oracle_eval("skate", "nope", 0.0, &BTreeMap::new()),
            Err(ModelLibError::UnknownOracle { .. })
        ));
    }

    #[test]
    fn cycloid_oracle_satisfies_the_reduced_equations() {
        // check ẍ + ωẏ = k cos²ωt and ÿ − ωẋ = k sinωt cosωt by finite
        // differences of the oracle itself
        let mut setup = BTreeMap::new();
        setup.insert("g".to_string(), 1.0);
        setup.insert("alpha".to_string(), std::f64::consts::FRAC_PI_2);
        setup.insert("omega".to_string(), 1.0);
        let k = 1.0; // g sinα
        let h = 1e-5;
        for &t in &[0.3_f64, 1.7, 4.4] {
            let at = |tt: f64| oracle_eval("skate", "cycloid", tt, &setup).unwrap();
            let (p0, pp, pm) = (at(t), at(t + h), at(t - h));
            let ddx = (pp["x"] - 2.0 * p0["x"] + pm["x"]) / (h * h);
            let ddy = (pp["y"] - 2.0 * p0["y"] + pm["y"]) / (h * h);
            let c = t.cos();
            let s = t.sin();
            assert!((ddx + p0["dy"] - k * c * c).abs() < 1e-4);
            assert!((ddy - p0["dx"] - k * s * c).abs() < 1e-4);
            // constraint: sinφ ẋ − cosφ ẏ = 0
            assert!((s * p0["dx"] - c * p0["dy"]).abs() < 1e-12);
            // zero initial data
            let z = at(0.0);
            assert!(z["x"].abs() < 1e-15 && z["y"].abs() < 1e-15);
        }
    }

    #[test]
    fn gantmacher_multiplier_oracle_matches_solver() {
        let b = get_builtin("gantmacher").unwrap();
        let model = b.compile();
        let s = b.reference_state(&model);
        let sol = accel_dalembert(&model, &s, &SolverConfig::default()).unwrap();
        let mut setup = BTreeMap::new();
        for (i, c) in model.coords.iter().enumerate() {
            setup.insert(c.clone(), s.x[i]);
            setup.insert(format!("d{}", c), s.v[i]);
        }
        setup.insert("g".to_string(), 9.8);
        let oracle = oracle_eval("gantmacher", "multipliers", 0.0, &setup).unwrap();
        assert!((sol.mult_rate[0] - oracle["mu1"]).abs() < 1e-10);
        assert!((sol.mult_rate[1] - oracle["mu2"]).abs() < 1e-10);
    }

    #[test]
    fn drum_monitors_are_exact_first_integrals_of_reduced_dynamics() {
        // analytic check: d/dt C₂ = 0 and d/dt h = 0 under the closed-form
        // reduced accelerations, at several states
        let mut setup = BTreeMap::new();
        for (k, v) in [
            ("m", 1.0),
            ("m1", 0.0),
            ("J", 1.0),
            ("C", 2.0),
            ("a", 1.0),
            ("b", 1.0),
            ("rho", 0.1),
            ("g", 9.8),
        ] {
            setup.insert(k.to_string(), v);
        }
        for (y2, w1, w2) in [(0.0, 0.5, 0.0), (-2.0, 0.3, -1.5), (1.0, -0.8, 0.4)] {
            setup.insert("y2".to_string(), y2);
            setup.insert("dy1".to_string(), w1);
            setup.insert("dy2".to_string(), w2);
            let acc = oracle_eval("rolling_drum", "reduced_accels", 0.0, &setup).unwrap();
            let h = 1e-6;
            let mut fwd = setup.clone();
            fwd.insert("y2".to_string(), y2 + w2 * h);
            fwd.insert("dy1".to_string(), w1 + acc["ddy1"] * h);
            fwd.insert("dy2".to_string(), w2 + acc["ddy2"] * h);
            let i0 = oracle_eval("rolling_drum", "first_integrals", 0.0, &setup).unwrap();
            let i1 = oracle_eval("rolling_drum", "first_integrals", 0.0, &fwd).unwrap();
            assert!(
                (i1["C2"] - i0["C2"]).abs() < 1e-9,
                "C2 rate {}",
                (i1["C2"] - i0["C2"]) / h
            );
            assert!((i1["h"] - i0["h"]).abs() < 1e-8, "h rate {}", (i1["h"] - i0["h"]) / h);
        }
    }

    #[test]
    fn drum_reduced_accel_oracle_matches_solver() {
        let b = get_builtin("rolling_drum").unwrap();
        let model = b.compile();
        let s = b.reference_state(&model);
        let sol =
            solve_accel(&model, Formulation::ChaplyginReduced, &s, &SolverConfig::default())
                .unwrap();
        let mut setup: BTreeMap<String, f64> = model.params();
        setup.insert("dy1".to_string(), s.v[3]);
        setup.insert("dy2".to_string(), s.v[4]);
        let oracle = oracle_eval("rolling_drum", "reduced_accels", 0.0, &setup).unwrap();
        assert!((sol.accel[3] - oracle["ddy1"]).abs() < 1e-10);
        assert!((sol.accel[4] - oracle["ddy2"]).abs() < 1e-10);
    }

    #[test]
    fn drum_momentum_frame_works_across_parameters() {
        // the frame rows are parameter-symbolic; T1 must match d'Alembert
        // for other (m, J, C, a, b, rho) too, not just the defaults
        let b = get_builtin("rolling_drum").unwrap();
        let over: BTreeMap<String, f64> = [
            ("m".to_string(), 2.0),
            ("J".to_string(), 0.7),
            ("C".to_string(), 3.0),
            ("a".to_string(), 1.5),
            ("b".to_string(), 0.8),
            ("rho".to_string(), 0.3),
        ]
        .into_iter()
        .collect();
        let model = b.compile().with_params(&over);
        let cfg = SolverConfig::default();
        let (r, rho, bb) = (1.5 / 0.8, 0.3, 0.8);
        for (y1, w1, w2) in [(0.0_f64, 0.5, -0.4), (1.3, -0.9, 0.7), (4.0, 0.2, 1.1)] {
            let vx1 = r * w2 * y1.cos() + rho * w1 * y1.sin();
            let vx2 = r * w2 * y1.sin() - rho * w1 * y1.cos();
            let s = crate::model::DynState::new(
                0.0,
                vec![0.0, 0.0, 0.0, y1, 0.0],
                vec![vx1, vx2, w2 / bb, w1, w2],
            );
            let cl = accel_dalembert(&model, &s, &cfg).unwrap();
            let t1 = crate::dynamics::accel_mvm_t1(&model, &s, &cfg).unwrap();
            assert!(
                max_abs_diff(&cl.accel, &t1.accel) < 1e-10,
                "at y1={} w=({},{}): {:?} vs {:?}",
                y1,
                w1,
                w2,
                cl.accel,
                t1.accel
            );
        }
    }

    #[test]
    fn emitted_builtins_reparse_identically() {
        for name in builtin_names() {
            let b = get_builtin(name).unwrap();
            let text = crate::expr::emit_model_file(&b.spec);
            let back = parse_model_file(&text).unwrap();
            assert_eq!(back, b.spec, "{} does not round-trip", name);
        }
    }
}
