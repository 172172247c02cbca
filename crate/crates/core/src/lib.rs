//! Contour dynamics for the α-patch family of active scalars (`0 < α ≤ 1`).
//!
//! A patch boundary is a closed curve `x(γ)` sampled on a uniform periodic
//! grid. Its evolution is driven by the subtracted singular integral
//!
//! ```text
//! x_t(γ) = P ∫ (∂γx(γ) − ∂γx(γ−η)) / |x(γ) − x(γ−η)|^α dη
//! ```
//!
//! with `P = Θ_α / 2π`, plus, in the sharp-front case `α = 1`, a tangential
//! term `λ ∂γx` that keeps the parametrization speed uniform.
//!
//! Modules, bottom-up:
//! - [`curve`]: representation, spectral derivatives, arc-chord functional, norms, reparametrization.
//! - [`velocity`]: coupling constant, self-induced / normal / external velocities, regularized variants.
//! - [`tangential`]: the tangential field `λ`, its rate `μ`, and speed-uniformity defects.
//! - [`integrator`]: multi-patch RK4 time marching with stop verdicts.
//! - [`diagnostics`]: per-step records, NDJSON lines, the a-priori bound curve.

pub mod curve;
pub mod diagnostics;
pub mod error;
pub mod integrator;
pub mod io;
pub mod quadrature;
pub mod shapes;
pub mod spectral;
pub mod tangential;
pub mod velocity;

/// Planar point or vector.
pub type Vec2 = nalgebra::Vector2<f64>;

pub use curve::{arc_chord, enclosed_area, norms, reparametrize_uniform, sample_curve, ArcChordReport, ClosedCurve, NormReport};
pub use diagnostics::{bound_value, calibrate_constant, record, BoundCurve, BoundValue, DiagnosticsRecord, PatchDiagnostics};
pub use error::{Error, Result};
pub use integrator::{detect_stop, rhs, run, step_rk4, Patch, Scheme, SimState, StepControl, StopReason, TerminationVerdict, Trajectory};
pub use tangential::{lambda_qg, speed_report, tangential_derivative_integrand, SpeedReport, TangentialField};
pub use velocity::{
    coupling_constant, external_velocity, normal_velocity, regularized_self_velocity, self_velocity, MollifierKind, PatchConfig,
    RegularizationSpec,
};
