//! Per-step observables, their NDJSON encoding, and the a-priori bound curve.
//!
//! The local-existence estimates bound `‖x‖_{H³} + ‖F(x)‖_{L∞}` by
//!
//! ```text
//! B(t) = B₀ / (1 − t C B₀^p)^{1/p},   p = 6 + α (α < 1),  p = 9 (α = 1)
//! ```
//!
//! with an unspecified constant `C`. [`calibrate_constant`] fits the smallest
//! `C` for which `B` dominates an observed run. It is a descriptive fit for
//! comparing runs, not a prediction of blow-up times.

use serde::{Deserialize, Deserializer, Serialize};

use crate::curve::{arc_chord, enclosed_area, norms};
use crate::integrator::{min_interpatch_distance, rhs, SimState};
use crate::io::fmt17;
use crate::tangential::speed_report;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchDiagnostics {
    #[serde(deserialize_with = "nullable")]
    pub area: f64,
    #[serde(deserialize_with = "nullable")]
    pub l2: f64,
    #[serde(deserialize_with = "nullable")]
    pub h3: f64,
    #[serde(deserialize_with = "nullable")]
    pub c2: f64,
    #[serde(deserialize_with = "nullable")]
    pub c2half: f64,
    #[serde(rename = "supF", deserialize_with = "nullable")]
    pub sup_f: f64,
    #[serde(rename = "A", deserialize_with = "nullable")]
    pub a: f64,
    #[serde(deserialize_with = "nullable")]
    pub udef: f64,
    #[serde(deserialize_with = "nullable")]
    pub tdef: f64,
}

impl PatchDiagnostics {
    /// The quantity the bound curve controls: `‖x‖_{H³} + sup F`.
    pub fn bounded_quantity(&self) -> f64 {
        self.h3 + self.sup_f
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    #[serde(deserialize_with = "nullable")]
    pub dt: f64,
    #[serde(rename = "patch")]
    pub patches: Vec<PatchDiagnostics>,
    #[serde(default)]
    pub min_dist: Option<f64>,
    #[serde(deserialize_with = "nullable")]
    pub max_speed: f64,
}

fn nullable<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// Observables of `state`, computed from scratch.
pub fn record(state: &SimState, dt_used: f64) -> DiagnosticsRecord {
    let patches = state
        .patches
        .iter()
        .map(|p| {
            let nr = norms(&p.curve, 3).expect("order 3 is supported");
            let speed = speed_report(&p.curve);
            PatchDiagnostics {
                area: enclosed_area(&p.curve),
                l2: nr.l2,
                h3: nr.hk[&3],
                c2: nr.c2,
                c2half: nr.c2half,
                sup_f: arc_chord(&p.curve).sup_f,
                a: speed.a,
                udef: speed.uniformity_defect,
                tdef: speed.tangency_defect,
            }
        })
        .collect();
    let max_speed = match rhs(state) {
        Ok(field) => field.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max),
        Err(_) => f64::NAN,
    };
    DiagnosticsRecord {
        t: state.t,
        dt: dt_used,
        patches,
        min_dist: min_interpatch_distance(state).map(|(d, _, _)| d),
        max_speed,
    }
}

impl DiagnosticsRecord {
    /// One NDJSON line (no trailing newline), numbers at 17 significant digits.
    pub fn to_ndjson(&self) -> String {
        let patches: Vec<String> = self
            .patches
            .iter()
            .map(|p| {
                format!(
                    "{{\"area\":{},\"l2\":{},\"h3\":{},\"c2\":{},\"c2half\":{},\"supF\":{},\"A\":{},\"udef\":{},\"tdef\":{}}}",
                    fmt17(p.area),
                    fmt17(p.l2),
                    fmt17(p.h3),
                    fmt17(p.c2),
                    fmt17(p.c2half),
                    fmt17(p.sup_f),
                    fmt17(p.a),
                    fmt17(p.udef),
                    fmt17(p.tdef)
                )
            })
            .collect();
        format!(
            "{{\"t\":{},\"dt\":{},\"patch\":[{}],\"min_dist\":{},\"max_speed\":{}}}",
            fmt17(self.t),
            fmt17(self.dt),
            patches.join(","),
            self.min_dist.map_or_else(|| "null".to_string(), fmt17),
            fmt17(self.max_speed)
        )
    }

    pub fn from_ndjson(line: &str) -> serde_json::Result<Self> {
        serde_json::from_str(line)
    }
}

/// The closed-form majorant `B(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub alpha: f64,
    /// `‖x₀‖_{H³} + ‖F(x₀)‖_{L∞}`.
    pub initial_value: f64,
    pub constant_c: f64,
    pub exponent: f64,
}

impl BoundCurve {
    pub fn new(alpha: f64, initial_value: f64, constant_c: f64) -> Self {
        BoundCurve { alpha, initial_value, constant_c, exponent: Self::exponent_for(alpha) }
    }

    pub fn exponent_for(alpha: f64) -> f64 {
        if alpha < 1.0 {
            6.0 + alpha
        } else {
            9.0
        }
    }

    pub fn with_constant(self, constant_c: f64) -> Self {
        BoundCurve { constant_c, ..self }
    }

    /// Time at which the guaranteed-existence window closes.
    pub fn expiry_time(&self) -> f64 {
        1.0 / (self.constant_c * self.initial_value.powf(self.exponent))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundValue {
    Finite(f64),
    Expired,
}

impl BoundValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            BoundValue::Finite(v) => Some(v),
            BoundValue::Expired => None,
        }
    }
}

pub fn bound_value(b: &BoundCurve, t: f64) -> BoundValue {
    let base = 1.0 - t * b.constant_c * b.initial_value.powf(b.exponent);
    if base <= 0.0 {
        BoundValue::Expired
    } else {
        BoundValue::Finite(b.initial_value / base.powf(1.0 / b.exponent))
    }
}

/// Returned when the bound with this tiny constant already dominates the data.
pub const CALIBRATION_SENTINEL: f64 = 1e-12;
const CALIBRATION_REL_TOL: f64 = 1e-10;
// Relative slack so that data lying exactly on a majorant still counts as dominated.
const DOMINATION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CalibrationError {
    #[error("need at least 2 records, got {0}")]
    TooFewRecords(usize),
    #[error("initial value {0} must be positive and finite")]
    BadInitialValue(f64),
    #[error("observation at t = {0} is not finite")]
    NonFinite(f64),
}

fn dominates(b: &BoundCurve, series: &[(f64, f64)]) -> bool {
    series.iter().all(|&(t, y)| match bound_value(b, t) {
        BoundValue::Finite(v) => v >= y * (1.0 - DOMINATION_SLACK),
        BoundValue::Expired => false,
    })
}

/// Smallest `C` (by geometric bisection) such that `B(t)` dominates every `(t, y)` pair.
pub fn calibrate_series(series: &[(f64, f64)], b: &BoundCurve) -> Result<f64, CalibrationError> {
    if series.len() < 2 {
        return Err(CalibrationError::TooFewRecords(series.len()));
    }
    if !(b.initial_value > 0.0 && b.initial_value.is_finite()) {
        return Err(CalibrationError::BadInitialValue(b.initial_value));
    }
    if let Some(&(t, _)) = series.iter().find(|(t, y)| !(t.is_finite() && y.is_finite())) {
        return Err(CalibrationError::NonFinite(t));
    }
    let mut lo = CALIBRATION_SENTINEL;
    if dominates(&b.with_constant(lo), series) {
        return Ok(lo);
    }
    // Every C below the expiry constant of the last record time is admissible;
    // the bound grows without limit as C approaches it.
    let t_max = series.iter().map(|&(t, _)| t).fold(0.0, f64::max);
    let mut hi = (1.0 - 1e-12) / (t_max * b.initial_value.powf(b.exponent));
    while hi / lo - 1.0 > CALIBRATION_REL_TOL {
        let mid = (lo * hi).sqrt();
        if dominates(&b.with_constant(mid), series) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Calibrate against patch `patch` of a recorded trajectory, using its first
/// record as the initial value.
pub fn calibrate_constant(records: &[DiagnosticsRecord], patch: usize, alpha: f64) -> Result<(BoundCurve, f64), CalibrationError> {
    if records.len() < 2 {
        return Err(CalibrationError::TooFewRecords(records.len()));
    }
    let series: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.patches[patch].bounded_quantity())).collect();
    let b = BoundCurve::new(alpha, series[0].1, 1.0);
    let c = calibrate_series(&series, &b)?;
    Ok((b.with_constant(c), c))
}
