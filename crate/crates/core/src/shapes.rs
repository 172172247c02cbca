//! Initial-shape library. All shapes are counterclockwise and centered at the origin.

use crate::curve::{sample_curve, ClosedCurve};
use crate::error::Result;
use crate::Vec2;

pub fn circle(n: usize, radius: f64) -> ClosedCurve {
    sample_curve(|g| Vec2::new(radius * g.cos(), radius * g.sin()), n).expect("circle sampling")
}

/// `(a cos γ, b sin γ)` in the angle parametrization (not constant speed unless `a == b`).
pub fn ellipse(n: usize, a: f64, b: f64) -> ClosedCurve {
    sample_curve(|g| Vec2::new(a * g.cos(), b * g.sin()), n).expect("ellipse sampling")
}

/// Polar curve `r(γ) = radius + Σ_k a_k cos(kγ)`, with `coefficients[0]` holding `a_1`.
pub fn fourier_perturbed_circle(n: usize, radius: f64, coefficients: &[f64]) -> Result<ClosedCurve> {
    sample_curve(
        |g| {
            let r = radius
                + coefficients
                    .iter()
                    .enumerate()
                    .map(|(i, a)| a * ((i + 1) as f64 * g).cos())
                    .sum::<f64>();
            Vec2::new(r * g.cos(), r * g.sin())
        },
        n,
    )
}

/// Rotate, optionally reverse, then translate a shape into place.
pub fn place(curve: &ClosedCurve, center: Vec2, rotation: f64, clockwise: bool) -> ClosedCurve {
    let mut c = curve.rotated(rotation);
    if clockwise {
        c = c.reversed();
    }
    c.translated(center)
}
