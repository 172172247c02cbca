//! Periodic planar curves sampled on the uniform grid `γ_j = −π + 2πj/N`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{self, Spectrum};
use crate::Vec2;

/// Highest derivative order supported by [`ClosedCurve::derivative`] and [`norms`].
pub const MAX_DERIVATIVE_ORDER: u32 = 4;

/// A closed curve `x(γ)` given by its values on the uniform grid.
///
/// The node count is even and at least 8; node `N` is identified with node 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedCurve {
    nodes: Vec<Vec2>,
}

impl ClosedCurve {
    pub fn new(nodes: Vec<Vec2>) -> Result<Self> {
        let n = nodes.len();
        if n < 8 || n % 2 != 0 {
            return Err(Error::NodeCount(n));
        }
        if let Some(index) = nodes.iter().position(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::NonFiniteNode { index });
        }
        Ok(ClosedCurve { nodes })
    }

    /// Build without the finiteness check. Used by the integrator, which
    /// inspects intermediate states itself and turns bad values into verdicts.
    pub(crate) fn from_nodes_unchecked(nodes: Vec<Vec2>) -> Self {
        debug_assert!(nodes.len() >= 8 && nodes.len() % 2 == 0);
        ClosedCurve { nodes }
    }

    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }

    pub fn into_nodes(self) -> Vec<Vec2> {
        self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        spectral::spacing(self.len())
    }

    pub fn gamma(&self, j: usize) -> f64 {
        spectral::gamma(j, self.len())
    }

    pub fn is_finite(&self) -> bool {
        self.nodes.iter().all(|p| p.x.is_finite() && p.y.is_finite())
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::of_points(&self.nodes)
    }

    /// Fourier-collocation derivative `∂γ^order x` at every node.
    pub fn derivative(&self, order: u32) -> Result<Vec<Vec2>> {
        if order == 0 || order > MAX_DERIVATIVE_ORDER {
            return Err(Error::Domain {
                name: "derivative order",
                value: order as f64,
                expected: "1..=4",
            });
        }
        Ok(self.spectrum().derivative_points(order))
    }

    pub fn translated(&self, shift: Vec2) -> Self {
        ClosedCurve { nodes: self.nodes.iter().map(|p| p + shift).collect() }
    }

    pub fn rotated(&self, angle: f64) -> Self {
        let rot = nalgebra::Rotation2::new(angle);
        ClosedCurve { nodes: self.nodes.iter().map(|p| rot * p).collect() }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        ClosedCurve { nodes: self.nodes.iter().map(|p| p * factor).collect() }
    }

    /// Same image traversed the other way, keeping node 0 in place.
    pub fn reversed(&self) -> Self {
        let n = self.len();
        ClosedCurve { nodes: (0..n).map(|j| self.nodes[(n - j) % n]).collect() }
    }
}

/// Sample `map` at the grid abscissae. Fails on the first non-finite sample.
pub fn sample_curve(map: impl Fn(f64) -> Vec2, n: usize) -> Result<ClosedCurve> {
    if n < 8 || n % 2 != 0 {
        return Err(Error::NodeCount(n));
    }
    let nodes = (0..n).map(|j| map(spectral::gamma(j, n))).collect();
    ClosedCurve::new(nodes)
}

/// Discrete supremum of the arc-chord functional `|η| / |x(γ) − x(γ−η)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcChordReport {
    pub sup_f: f64,
    /// Node pair attaining the sup; `(j, j)` when the diagonal value `1/|∂γx|` wins.
    pub argmax_pair: (usize, usize),
    pub min_chord_ratio: f64,
    /// Two distinct nodes coincide; `sup_f` is then infinite.
    pub self_intersection: bool,
}

fn better(a: (f64, usize, usize), b: (f64, usize, usize)) -> (f64, usize, usize) {
    // Order-insensitive reduction: larger value wins, ties go to the smaller pair.
    if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
        b
    } else {
        a
    }
}

pub fn arc_chord(curve: &ClosedCurve) -> ArcChordReport {
    let n = curve.len();
    let x = curve.nodes();
    let dx = curve.spectrum().derivative_points(1);

    let (sup_f, j, k) = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut best = (1.0 / dx[j].norm(), j, j);
            for k in (j + 1)..n {
                let chord = (x[j] - x[k]).norm();
                let value = if chord == 0.0 {
                    f64::INFINITY
                } else {
                    spectral::periodic_distance(j, k, n) / chord
                };
                best = better(best, (value, j, k));
            }
            best
        })
        .reduce(|| (f64::NEG_INFINITY, usize::MAX, usize::MAX), better);

    let self_intersection = j != k && x[j] == x[k];
    ArcChordReport {
        sup_f,
        argmax_pair: (j, k),
        min_chord_ratio: 1.0 / sup_f,
        self_intersection,
    }
}

/// Signed enclosed area, positive for counterclockwise traversal.
pub fn enclosed_area(curve: &ClosedCurve) -> f64 {
    let dx = curve.spectrum().derivative_points(1);
    let sum: f64 = curve.nodes().iter().zip(&dx).map(|(p, d)| p.x * d.y - p.y * d.x).sum();
    0.5 * curve.spacing() * sum
}

/// Sobolev and Hölder norms of a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    pub l2: f64,
    /// `‖x‖_{H^k} = (‖x‖²_{L²} + ‖∂^k x‖²_{L²})^{1/2}` for `k = 1..=kmax`.
    pub hk: BTreeMap<u32, f64>,
    pub c2: f64,
    pub c2half: f64,
}

fn l2_squared(values: &[Vec2], h: f64) -> f64 {
    h * values.iter().map(|v| v.norm_squared()).sum::<f64>()
}

fn sup_norm(values: &[Vec2]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Max over node pairs of `|f(γ_j) − f(γ_k)| / |γ_j − γ_k|^{1/2}` (periodic distance).
pub fn half_holder_seminorm(values: &[Vec2]) -> f64 {
    let n = values.len();
    (0..n)
        .into_par_iter()
        .map(|j| {
            ((j + 1)..n)
                .map(|k| (values[j] - values[k]).norm() / spectral::periodic_distance(j, k, n).sqrt())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

pub fn norms(curve: &ClosedCurve, kmax: u32) -> Result<NormReport> {
    if kmax == 0 || kmax > MAX_DERIVATIVE_ORDER {
        return Err(Error::Domain { name: "kmax", value: kmax as f64, expected: "1..=4" });
    }
    let h = curve.spacing();
    let spec = curve.spectrum();
    let derivs: Vec<Vec<Vec2>> = (1..=kmax.max(2)).map(|k| spec.derivative_points(k)).collect();

    let l2_sq = l2_squared(curve.nodes(), h);
    let hk = (1..=kmax)
        .map(|k| (k, (l2_sq + l2_squared(&derivs[k as usize - 1], h)).sqrt()))
        .collect();
    let c2 = sup_norm(curve.nodes()).max(sup_norm(&derivs[0])).max(sup_norm(&derivs[1]));
    let c2half = c2 + half_holder_seminorm(&derivs[1]);
    Ok(NormReport { l2: l2_sq.sqrt(), hk, c2, c2half })
}

/// Curve length by the spectrally accurate rectangle rule on `|∂γx|`.
pub fn length(curve: &ClosedCurve) -> f64 {
    let dx = curve.spectrum().derivative_points(1);
    curve.spacing() * dx.iter().map(|d| d.norm()).sum::<f64>()
}

/// Max relative deviation of `|∂γx|` from its mean.
pub fn speed_deviation(curve: &ClosedCurve) -> f64 {
    let dx = curve.spectrum().derivative_points(1);
    let speeds: Vec<f64> = dx.iter().map(|d| d.norm()).collect();
    let mean = speeds.iter().sum::<f64>() / speeds.len() as f64;
    speeds.iter().map(|s| (s - mean).abs()).fold(0.0, f64::max) / mean
}

const REPARAM_PASSES: usize = 4;
const REPARAM_TOLERANCE: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 60;

/// Redistribute the nodes so the parametrization speed is constant, keeping
/// node 0 and the total length fixed.
///
/// Each pass inverts the spectrally integrated arclength with a safeguarded
/// Newton iteration and resamples the trigonometric interpolant of the curve.
pub fn reparametrize_uniform(curve: &ClosedCurve) -> Result<ClosedCurve> {
    let mut current = curve.clone();
    for _ in 0..REPARAM_PASSES {
        if speed_deviation(&current) < REPARAM_TOLERANCE {
            break;
        }
        current = reparametrize_pass(&current)?;
    }
    Ok(current)
}

fn reparametrize_pass(curve: &ClosedCurve) -> Result<ClosedCurve> {
    let n = curve.len();
    let spec = curve.spectrum();
    let speeds: Vec<f64> = spec.derivative_points(1).iter().map(|d| d.norm()).collect();
    let speed_spec = Spectrum::of_scalars(&speeds);
    let mean_speed = speed_spec.mean().re;
    let anti = speed_spec.antiderivative_spectrum();
    let offset = anti.eval(0.0, 0).re;
    let total = 2.0 * PI * mean_speed;

    // Arclength from node 0 as a function of θ = γ + π, and its derivative.
    let arclength = |theta: f64| mean_speed * theta + anti.eval(theta, 0).re - offset;
    let speed_at = |theta: f64| mean_speed + anti.eval(theta, 1).re;

    let thetas: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| -> Result<f64> {
            if j == 0 {
                return Ok(0.0);
            }
            let target = total * j as f64 / n as f64;
            let (mut lo, mut hi) = (0.0, 2.0 * PI);
            let mut theta = spectral::spacing(n) * j as f64;
            let mut residual = f64::INFINITY;
            for _ in 0..NEWTON_MAX_ITER {
                residual = arclength(theta) - target;
                if residual.abs() <= 4.0 * f64::EPSILON * total {
                    return Ok(theta);
                }
                if residual > 0.0 {
                    hi = theta;
                } else {
                    lo = theta;
                }
                let mut next = theta - residual / speed_at(theta);
                if !(next > lo && next < hi) {
                    next = 0.5 * (lo + hi);
                }
                if next == theta {
                    return Ok(theta);
                }
                theta = next;
            }
            if residual.abs() <= 1e-10 * total {
                Ok(theta)
            } else {
                Err(Error::Reparametrization { node: j, residual })
            }
        })
        .collect::<Result<_>>()?;

    let nodes = thetas.iter().map(|&theta| spec.eval_point(theta, 0)).collect();
    ClosedCurve::new(nodes)
}
