//! Time marching of one or more patches with classical RK4.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{arc_chord, reparametrize_uniform, ClosedCurve};
use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::spectral;
use crate::tangential::{self, DEFAULT_UNIFORMITY_SWITCH};
use crate::velocity::{external_velocity, regularized_self_integral, PatchConfig, RegularizationSpec};
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// The subtracted contour equation, no tangential correction.
    AlphaLt1,
    /// α = 1 with the tangential term `λ ∂γx`.
    QgWithLambda,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub curve: ClosedCurve,
    pub cfg: PatchConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub patches: Vec<Patch>,
    pub scheme: Scheme,
    pub reg: RegularizationSpec,
    /// Uniformity defect below which λ divides by the mean speed squared.
    pub lambda_switch: f64,
}

impl SimState {
    pub fn new(patches: Vec<Patch>, scheme: Scheme, reg: RegularizationSpec) -> Result<Self> {
        reg.validate()?;
        if patches.is_empty() {
            return Err(Error::Domain { name: "patches", value: 0.0, expected: "at least one patch" });
        }
        if scheme == Scheme::QgWithLambda {
            if let Some(p) = patches.iter().find(|p| p.cfg.alpha() != 1.0) {
                return Err(Error::Domain {
                    name: "alpha",
                    value: p.cfg.alpha(),
                    expected: "alpha = 1 for qg_with_lambda",
                });
            }
        }
        for p in &patches {
            let report = arc_chord(&p.curve);
            if report.self_intersection {
                let (a, b) = report.argmax_pair;
                return Err(Error::SingularKernel(a, b));
            }
        }
        Ok(SimState { t: 0.0, patches, scheme, reg, lambda_switch: DEFAULT_UNIFORMITY_SWITCH })
    }

    pub fn single(curve: ClosedCurve, cfg: PatchConfig, scheme: Scheme) -> Result<Self> {
        Self::new(vec![Patch { curve, cfg }], scheme, RegularizationSpec::default())
    }

    pub fn curves(&self) -> impl Iterator<Item = &ClosedCurve> {
        self.patches.iter().map(|p| &p.curve)
    }

    /// Smallest grid spacing `2π/N` over the patches.
    pub fn grid_spacing(&self) -> f64 {
        self.patches.iter().map(|p| p.curve.spacing()).fold(f64::INFINITY, f64::min)
    }

    fn with_curves(&self, t: f64, curves: Vec<Vec<Vec2>>) -> SimState {
        let patches = self
            .patches
            .iter()
            .zip(curves)
            .map(|(p, nodes)| Patch { curve: ClosedCurve::from_nodes_unchecked(nodes), cfg: p.cfg })
            .collect();
        SimState { t, patches, scheme: self.scheme, reg: self.reg, lambda_switch: self.lambda_switch }
    }
}

/// Nodal velocity of every patch.
pub type Field = Vec<Vec<Vec2>>;

/// Right-hand side of the nodal system: self term, interaction with the other
/// patches, and for [`Scheme::QgWithLambda`] the tangential term computed from
/// the total boundary velocity.
pub fn rhs(state: &SimState) -> Result<Field> {
    (0..state.patches.len())
        .into_par_iter()
        .map(|i| {
            let patch = &state.patches[i];
            let p = patch.cfg.prefactor();
            let mut v: Vec<Vec2> = regularized_self_integral(&patch.curve, patch.cfg.alpha(), &state.reg)?
                .into_iter()
                .map(|w| w * p)
                .collect();
            for (j, other) in state.patches.iter().enumerate() {
                if j == i {
                    continue;
                }
                let ext = external_velocity(patch.curve.nodes(), &other.curve, &other.cfg)?;
                v.iter_mut().zip(ext).for_each(|(a, b)| *a += b);
            }
            if state.scheme == Scheme::QgWithLambda {
                let lambda = tangential::lambda_for_field(&patch.curve, &v, state.lambda_switch);
                let dx = patch.curve.spectrum().derivative_points(1);
                for ((vj, l), d) in v.iter_mut().zip(&lambda.lambda_values).zip(&dx) {
                    *vj += *l * d;
                }
            }
            Ok(v)
        })
        .collect()
}

/// Reason an RK4 step could not be completed; the caller retries with a smaller step.
#[derive(Debug, Clone, PartialEq)]
pub enum StageFailure {
    Kernel(Error),
    NonFinite { stage: usize },
}

impl std::fmt::Display for StageFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StageFailure::Kernel(e) => write!(f, "stage failure: {e}"),
            StageFailure::NonFinite { stage } => write!(f, "stage failure: non-finite velocity in stage {stage}"),
        }
    }
}

fn advance(base: &SimState, t: f64, dt: f64, k: &Field) -> SimState {
    let curves = base
        .patches
        .iter()
        .zip(k)
        .map(|(p, kp)| p.curve.nodes().iter().zip(kp).map(|(x, v)| x + dt * v).collect())
        .collect();
    base.with_curves(t, curves)
}

fn finite(k: &Field) -> bool {
    k.iter().flatten().all(|v| v.x.is_finite() && v.y.is_finite())
}

/// One classical RK4 step with an arbitrary right-hand side. `k1` may be
/// supplied when the caller already evaluated it at `state`.
pub fn step_rk4_with<F>(state: &SimState, dt: f64, f: F, k1: Option<Field>) -> std::result::Result<SimState, StageFailure>
where
    F: Fn(&SimState) -> Result<Field>,
{
    if dt == 0.0 {
        return Ok(state.clone());
    }
    let eval = |s: &SimState, stage: usize| -> std::result::Result<Field, StageFailure> {
        let k = f(s).map_err(StageFailure::Kernel)?;
        if finite(&k) {
            Ok(k)
        } else {
            Err(StageFailure::NonFinite { stage })
        }
    };
    let k1 = match k1 {
        Some(k) if finite(&k) => k,
        Some(_) => return Err(StageFailure::NonFinite { stage: 1 }),
        None => eval(state, 1)?,
    };
    let t = state.t;
    let s2 = advance(state, t + 0.5 * dt, 0.5 * dt, &k1);
    let k2 = eval(&s2, 2)?;
    let s3 = advance(state, t + 0.5 * dt, 0.5 * dt, &k2);
    let k3 = eval(&s3, 3)?;
    let s4 = advance(state, t + dt, dt, &k3);
    let k4 = eval(&s4, 4)?;

    let curves = state
        .patches
        .iter()
        .enumerate()
        .map(|(i, p)| {
            p.curve
                .nodes()
                .iter()
                .enumerate()
                .map(|(j, x)| x + (dt / 6.0) * (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]))
                .collect()
        })
        .collect();
    Ok(state.with_curves(t + dt, curves))
}

pub fn step_rk4(state: &SimState, dt: f64) -> std::result::Result<SimState, StageFailure> {
    step_rk4_with(state, dt, rhs, None)
}

/// Step-size control and stop thresholds for [`run`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepControl {
    pub dt_init: f64,
    pub cfl: f64,
    pub dt_min: f64,
    pub t_end: f64,
    pub arc_chord_max: f64,
    pub record_every: usize,
    /// Patches closer than this many grid spacings `2π/N` count as collapsed.
    pub collapse_cells: f64,
    /// Keep every n-th accepted step as a curve snapshot; 0 keeps only the first and last.
    pub snapshot_every: usize,
    /// For `qg_with_lambda`, re-uniformize a patch once its uniformity defect exceeds this; 0 disables.
    pub reuniformize_above: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            dt_init: 1e-3,
            cfl: 0.5,
            dt_min: 1e-10,
            t_end: 1.0,
            arc_chord_max: 1e4,
            record_every: 1,
            collapse_cells: 10.0,
            snapshot_every: 0,
            reuniformize_above: 1e-3,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_init) {
            return Err(format!("need 0 < dt_min <= dt_init (dt_min {}, dt_init {})", self.dt_min, self.dt_init));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(format!("cfl {} outside (0, 1]", self.cfl));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(format!("t_end {} must be finite and >= 0", self.t_end));
        }
        if !(self.arc_chord_max > 0.0) {
            return Err(format!("arc_chord_max {} must be positive", self.arc_chord_max));
        }
        if self.record_every == 0 {
            return Err("record_every must be >= 1".into());
        }
        if !(self.collapse_cells >= 0.0) {
            return Err(format!("collapse_cells {} must be >= 0", self.collapse_cells));
        }
        if !(self.reuniformize_above >= 0.0) {
            return Err(format!("reuniformize_above {} must be >= 0", self.reuniformize_above));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ReachedTEnd,
    ArcChordBlowup,
    SelfIntersection,
    PatchCollapse,
    DtUnderflow,
    NonfiniteState,
}

impl StopReason {
    /// Whether the run ended because the solution degenerated (as opposed to reaching `t_end`).
    pub fn is_blowup(self) -> bool {
        self != StopReason::ReachedTEnd
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminationVerdict {
    pub reason: StopReason,
    pub t_final: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub curves: Vec<ClosedCurve>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<Snapshot>,
}

fn segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let orient = |a: Vec2, b: Vec2, c: Vec2| (b - a).perp(&(c - a));
    let on_segment = |a: Vec2, b: Vec2, c: Vec2| {
        c.x >= a.x.min(b.x) && c.x <= a.x.max(b.x) && c.y >= a.y.min(b.y) && c.y <= a.y.max(b.y)
    };
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// First pair of non-adjacent polygon edges that intersect, if any.
pub fn find_self_intersection(curve: &ClosedCurve) -> Option<(usize, usize)> {
    let x = curve.nodes();
    let n = x.len();
    (0..n).into_par_iter().find_map_first(|i| {
        let (a, b) = (x[i], x[(i + 1) % n]);
        ((i + 2)..n)
            .filter(|&j| !(i == 0 && j == n - 1))
            .find(|&j| segments_intersect(a, b, x[j], x[(j + 1) % n]))
            .map(|j| (i, j))
    })
}

/// Smallest node-to-node distance between distinct patches, with the patch pair.
pub fn min_interpatch_distance(state: &SimState) -> Option<(f64, usize, usize)> {
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..state.patches.len() {
        for j in (i + 1)..state.patches.len() {
            let a = state.patches[i].curve.nodes();
            let b = state.patches[j].curve.nodes();
            let d = a
                .par_iter()
                .map(|p| b.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
                .reduce(|| f64::INFINITY, f64::min);
            if best.is_none_or(|(bd, _, _)| d < bd) {
                best = Some((d, i, j));
            }
        }
    }
    best
}

/// Stop checks, in order: non-finite coordinates, arc-chord threshold,
/// polygon self-intersection, inter-patch collapse, step-size underflow.
pub fn detect_stop(state: &SimState, ctrl: &StepControl, dt: f64) -> Option<TerminationVerdict> {
    let verdict = |reason, detail: String| Some(TerminationVerdict { reason, t_final: state.t, detail });
    for (i, p) in state.patches.iter().enumerate() {
        if !p.curve.is_finite() {
            return verdict(StopReason::NonfiniteState, format!("patch {i} has non-finite coordinates"));
        }
    }
    for (i, p) in state.patches.iter().enumerate() {
        let report = arc_chord(&p.curve);
        if !(report.sup_f <= ctrl.arc_chord_max) {
            let (a, b) = report.argmax_pair;
            return verdict(
                StopReason::ArcChordBlowup,
                format!("patch {i}: sup F = {:e} exceeds {:e} at nodes ({a}, {b})", report.sup_f, ctrl.arc_chord_max),
            );
        }
    }
    for (i, p) in state.patches.iter().enumerate() {
        if let Some((a, b)) = find_self_intersection(&p.curve) {
            return verdict(StopReason::SelfIntersection, format!("patch {i}: edges {a} and {b} cross"));
        }
    }
    if let Some((d, i, j)) = min_interpatch_distance(state) {
        let threshold = ctrl.collapse_cells * state.grid_spacing();
        if d < threshold {
            return verdict(
                StopReason::PatchCollapse,
                format!("patches {i} and {j} within {d:e} (threshold {threshold:e})"),
            );
        }
    }
    if dt < ctrl.dt_min {
        return verdict(StopReason::DtUnderflow, format!("dt {dt:e} below dt_min {:e}", ctrl.dt_min));
    }
    None
}

fn max_speed(field: &Field) -> f64 {
    field.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
}

fn snapshot(state: &SimState, step: usize) -> Snapshot {
    Snapshot { step, t: state.t, curves: state.curves().cloned().collect() }
}

/// March until `t_end` or the first stop verdict.
///
/// Each step uses `dt = min(dt_current, cfl·(2π/N)/max|v|)`, shortened to land
/// on `t_end`. A failed stage halves `dt_current`; dropping below `dt_min`
/// ends the run.
pub fn run(state: SimState, ctrl: &StepControl) -> (Trajectory, TerminationVerdict) {
    let mut traj = Trajectory::default();
    let mut state = state;
    let mut step = 0usize;
    let mut last_recorded = None;
    let mut dt_current = ctrl.dt_init;
    let mut dt_used = 0.0;

    let finish = |traj: &mut Trajectory, state: &SimState, step: usize, last: Option<usize>, dt_used: f64, verdict: TerminationVerdict| {
        if last != Some(step) {
            traj.records.push(diagnostics::record(state, dt_used));
        }
        if traj.snapshots.last().is_none_or(|s| s.step != step) {
            traj.snapshots.push(snapshot(state, step));
        }
        verdict
    };

    traj.snapshots.push(snapshot(&state, 0));
    if let Some(v) = detect_stop(&state, ctrl, dt_current) {
        let v = finish(&mut traj, &state, step, last_recorded, dt_used, v);
        return (traj, v);
    }
    traj.records.push(diagnostics::record(&state, 0.0));
    last_recorded = Some(0);

    loop {
        let remaining = ctrl.t_end - state.t;
        if remaining <= 0.0 {
            let v = TerminationVerdict { reason: StopReason::ReachedTEnd, t_final: state.t, detail: format!("{step} steps") };
            let v = finish(&mut traj, &state, step, last_recorded, dt_used, v);
            return (traj, v);
        }
        let k1 = match rhs(&state) {
            Ok(k) => k,
            Err(e) => {
                let v = TerminationVerdict { reason: StopReason::NonfiniteState, t_final: state.t, detail: e.to_string() };
                let v = finish(&mut traj, &state, step, last_recorded, dt_used, v);
                return (traj, v);
            }
        };
        let speed = max_speed(&k1);
        let mut dt = dt_current;
        if speed > 0.0 {
            dt = dt.min(ctrl.cfl * state.grid_spacing() / speed);
        }
        if dt < ctrl.dt_min {
            let v = TerminationVerdict {
                reason: StopReason::DtUnderflow,
                t_final: state.t,
                detail: format!("velocity cap forces dt {dt:e} below dt_min {:e}", ctrl.dt_min),
            };
            let v = finish(&mut traj, &state, step, last_recorded, dt_used, v);
            return (traj, v);
        }
        // Land exactly on t_end; absorb a final sliver instead of taking a tiny extra step.
        let landing = remaining <= dt * (1.0 + 1e-9);
        if landing {
            dt = remaining;
        }
        match step_rk4_with(&state, dt, rhs, Some(k1)) {
            Err(failure) => {
                dt_current = 0.5 * dt;
                if dt_current < ctrl.dt_min {
                    let v = TerminationVerdict { reason: StopReason::DtUnderflow, t_final: state.t, detail: failure.to_string() };
                    let v = finish(&mut traj, &state, step, last_recorded, dt_used, v);
                    return (traj, v);
                }
                continue;
            }
            Ok(mut next) => {
                if landing {
                    next.t = ctrl.t_end;
                }
                state = next;
                step += 1;
                dt_used = dt;
            }
        }

        if state.scheme == Scheme::QgWithLambda && ctrl.reuniformize_above > 0.0 {
            for patch in &mut state.patches {
                if tangential::speed_report(&patch.curve).uniformity_defect > ctrl.reuniformize_above {
                    if let Ok(c) = reparametrize_uniform(&patch.curve) {
                        patch.curve = c;
                    }
                }
            }
        }

        if let Some(v) = detect_stop(&state, ctrl, dt_current) {
            let v = finish(&mut traj, &state, step, last_recorded, dt_used, v);
            return (traj, v);
        }
        if step % ctrl.record_every == 0 {
            traj.records.push(diagnostics::record(&state, dt_used));
            last_recorded = Some(step);
        }
        if ctrl.snapshot_every > 0 && step % ctrl.snapshot_every == 0 {
            traj.snapshots.push(snapshot(&state, step));
        }
    }
}

/// Max node distance between two runs' curves sampled on nested grids.
///
/// `fine` must have an integer multiple of `coarse`'s node count; only the
/// shared nodes are compared.
pub fn nested_grid_distance(coarse: &ClosedCurve, fine: &ClosedCurve) -> f64 {
    let ratio = fine.len() / coarse.len();
    assert_eq!(ratio * coarse.len(), fine.len(), "grids are not nested");
    coarse
        .nodes()
        .iter()
        .enumerate()
        .map(|(j, p)| (p - fine.nodes()[j * ratio]).norm())
        .fold(0.0, f64::max)
}

/// Grid abscissae for a curve of `n` nodes.
pub fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| spectral::gamma(j, n)).collect()
}
