//! Constrained-Lagrangian dynamics with four interchangeable formulations.
//!
//! This crate assembles and integrates equations of motion for mechanical
//! systems whose constraints may be nonlinear in the velocities. Four
//! formulations are implemented and can be cross-checked against each other:
//!
//! * **d'Alembert**: the classical multiplier equations,
//! * **vakonomic**: the variational equations, whose solutions depend on the
//!   initial multiplier value,
//! * **MVM-T1 / MVM-T2**: two variational formulations with non-zero
//!   transpositional relations `δ(dx/dt) − d(δx)/dt = A·δx`, where the matrix
//!   `A` is determined from a frame of velocity functions by `W·A = Ω`.
//!
//! Models are defined in a small expression language (see [`expr`]), every
//! derivative is obtained by second-order forward-mode automatic
//! differentiation (see [`jet`]), and all formulations reduce to a single
//! linear solve per state because the Lagrangian derivative of any state
//! function is affine in the accelerations (see [`lagrange`] and
//! [`dynamics`]).
//!
//! The `examples/` directory is the best starting point: each example is a
//! runnable demonstration of one capability (assembling frames, comparing
//! formulations, integrating with first-integral monitors, ...). A thin
//! `transposit` binary exposes the same functionality as `run`, `compare`,
//! `derive`, and `check` subcommands.
//!
//! ```
//! use transposit::{get_builtin, integrate, Formulation, IntegratorConfig};
//!
//! let builtin = get_builtin("skate").unwrap();
//! let model = builtin.compile();
//! let init = builtin.reference_state(&model);
//! let traj = integrate(&model, Formulation::MvmT1, &init, &IntegratorConfig::new(1e-3, 1.0))
//!     .unwrap();
//! assert_eq!(traj.samples.len(), 1001);
//! assert!(traj.events.is_empty());
//! ```

// index-style loops mirror the matrix algebra they implement
#![allow(clippy::needless_range_loop)]

pub mod checks;
pub mod cli;
pub mod dynamics;
pub mod expr;
pub mod integrate;
pub mod jet;
pub mod lagrange;
pub mod linalg;
pub mod model;
pub mod models;
pub mod report;
pub mod rng;
pub mod transposition;

pub use dynamics::{AccelSolution, DynError, Formulation, SolverConfig};
pub use expr::{parse_expression, parse_model_file, pretty_print, Expr, ModelSpec, ParseError};
pub use integrate::{integrate, IntegratorConfig, Trajectory};
pub use jet::Jet2;
pub use model::{DynState, MechModel};
pub use models::{builtin_names, get_builtin, oracle_eval, BuiltinModel};
