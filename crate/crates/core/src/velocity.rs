//! Singular-integral velocities of an α-patch boundary.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::curve::ClosedCurve;
use crate::error::{Error, Result};
use crate::quadrature;
use crate::spectral::Spectrum;
use crate::Vec2;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { name: "alpha", value: alpha, expected: "0 < alpha <= 1" })
    }
}

/// `Θ_α = (θ_in − θ_out) Γ(α/2) / (2^{1−α} Γ(2 − α/2))`.
pub fn coupling_constant(theta_in: f64, theta_out: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok((theta_in - theta_out) * gamma(0.5 * alpha) / (2f64.powf(1.0 - alpha) * gamma(2.0 - 0.5 * alpha)))
}

/// Physical parameters of one patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchConfig {
    alpha: f64,
    theta_in: f64,
    theta_out: f64,
    coupling: f64,
    prefactor_override: Option<f64>,
}

impl PatchConfig {
    pub fn new(alpha: f64, theta_in: f64, theta_out: f64) -> Result<Self> {
        let coupling = coupling_constant(theta_in, theta_out, alpha)?;
        if !(theta_in.is_finite() && theta_out.is_finite()) {
            return Err(Error::Domain { name: "theta", value: theta_in - theta_out, expected: "finite" });
        }
        Ok(PatchConfig { alpha, theta_in, theta_out, coupling, prefactor_override: None })
    }

    /// Replace `Θ_α / 2π` by a fixed prefactor (e.g. 1 for the normalized equations).
    pub fn with_prefactor(mut self, prefactor: f64) -> Self {
        self.prefactor_override = Some(prefactor);
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta_in(&self) -> f64 {
        self.theta_in
    }

    pub fn theta_out(&self) -> f64 {
        self.theta_out
    }

    pub fn coupling(&self) -> f64 {
        debug_assert!({
            let fresh = coupling_constant(self.theta_in, self.theta_out, self.alpha).unwrap();
            (fresh - self.coupling).abs() <= 1e-14 * fresh.abs()
        });
        self.coupling
    }

    pub fn prefactor_override(&self) -> Option<f64> {
        self.prefactor_override
    }

    /// The factor multiplying the boundary integral: the override if set, else `Θ_α / 2π`.
    pub fn prefactor(&self) -> f64 {
        self.prefactor_override.unwrap_or(self.coupling() / (2.0 * PI))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MollifierKind {
    /// Drop every mode with `|k| > 1/ε`.
    #[default]
    FourierCutoff,
    /// Periodic heat kernel of width ε: mode `k` is damped by `exp(−ε²k²/2)`.
    PeriodicGaussian,
}

/// Mollification width ε and chord floor δ; zero disables each.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegularizationSpec {
    pub epsilon: f64,
    pub delta: f64,
    pub mollifier: MollifierKind,
}

impl RegularizationSpec {
    pub fn new(epsilon: f64, delta: f64, mollifier: MollifierKind) -> Result<Self> {
        let spec = RegularizationSpec { epsilon, delta, mollifier };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Domain { name: "epsilon", value: self.epsilon, expected: "epsilon >= 0" });
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::Domain { name: "delta", value: self.delta, expected: "delta >= 0" });
        }
        Ok(())
    }

    pub fn is_none(&self) -> bool {
        self.epsilon == 0.0 && self.delta == 0.0
    }

    pub fn mollify(&self, spectrum: &Spectrum) -> Spectrum {
        let eps = self.epsilon;
        if eps == 0.0 {
            return spectrum.clone();
        }
        match self.mollifier {
            MollifierKind::FourierCutoff => spectrum.filtered(|k| if k * eps > 1.0 { 0.0 } else { 1.0 }),
            MollifierKind::PeriodicGaussian => spectrum.filtered(|k| (-0.5 * (eps * k).powi(2)).exp()),
        }
    }
}

#[inline]
fn chord_power(r: f64, alpha: f64, delta: f64) -> f64 {
    let r = r + delta;
    if alpha == 1.0 {
        r
    } else {
        r.powf(alpha)
    }
}

/// `Σ_k W_k (num_j − num_{j−k}) / (|x_j − x_{j−k}| + δ)^α` at every node.
fn subtracted_sum(x: &[Vec2], num: &[Vec2], alpha: f64, delta: f64, weights: &[f64]) -> Result<Vec<Vec2>> {
    let n = x.len();
    (0..n)
        .into_par_iter()
        .map(|j| {
            let term = |i: usize| -> Result<Vec2> {
                let r = (x[j] - x[i]).norm();
                if r == 0.0 && delta == 0.0 {
                    return Err(Error::SingularKernel(j.min(i), j.max(i)));
                }
                Ok((num[j] - num[i]) / chord_power(r, alpha, delta))
            };
            let mut acc = Vec2::zeros();
            // Pair η_k with η_{−k} so that odd parts cancel before they are accumulated.
            for k in 1..n / 2 {
                let behind = (j + n - k) % n;
                let ahead = (j + k) % n;
                acc += weights[k] * (term(behind)? + term(ahead)?);
            }
            acc += weights[n / 2] * term((j + n / 2) % n)?;
            Ok(acc)
        })
        .collect()
}

/// The self-induction integral with unit prefactor, evaluated by the product rule
/// of [`quadrature::self_induction_weights`].
pub fn self_integral(curve: &ClosedCurve, alpha: f64) -> Result<Vec<Vec2>> {
    check_alpha(alpha)?;
    let dx = curve.spectrum().derivative_points(1);
    let w = quadrature::self_induction_weights(alpha, curve.len());
    subtracted_sum(curve.nodes(), &dx, alpha, 0.0, &w)
}

/// Boundary velocity `P ∫ (∂γx(γ) − ∂γx(γ−η)) / |x(γ) − x(γ−η)|^α dη`.
pub fn self_velocity(curve: &ClosedCurve, cfg: &PatchConfig, prefactor_override: Option<f64>) -> Result<Vec<Vec2>> {
    let p = prefactor_override.unwrap_or_else(|| cfg.prefactor());
    Ok(self_integral(curve, cfg.alpha())?.into_iter().map(|v| v * p).collect())
}

/// Unnormalized normal flux `u · ∂γ^⊥x` with `∂γ^⊥x = (−∂γx₂, ∂γx₁)`.
pub fn normal_velocity(curve: &ClosedCurve, cfg: &PatchConfig) -> Result<Vec<f64>> {
    let alpha = cfg.alpha();
    let x = curve.nodes();
    let n = x.len();
    let dx = curve.spectrum().derivative_points(1);
    let w = quadrature::self_induction_weights(alpha, n);
    let p = cfg.prefactor();
    (0..n)
        .into_par_iter()
        .map(|j| {
            let normal = Vec2::new(-dx[j].y, dx[j].x);
            let term = |i: usize| -> Result<f64> {
                let r = (x[j] - x[i]).norm();
                if r == 0.0 {
                    return Err(Error::SingularKernel(j.min(i), j.max(i)));
                }
                Ok(-dx[i].dot(&normal) / chord_power(r, alpha, 0.0))
            };
            let mut acc = 0.0;
            for k in 1..n / 2 {
                acc += w[k] * (term((j + n - k) % n)? + term((j + k) % n)?);
            }
            acc += w[n / 2] * term((j + n / 2) % n)?;
            Ok(p * acc)
        })
        .collect()
}

/// Velocity induced by `source` at points off the curve (periodic trapezoid).
pub fn external_velocity(targets: &[Vec2], source: &ClosedCurve, cfg: &PatchConfig) -> Result<Vec<Vec2>> {
    let alpha = cfg.alpha();
    let x = source.nodes();
    let dx = source.spectrum().derivative_points(1);
    let scale = -cfg.prefactor() * source.spacing();
    targets
        .par_iter()
        .enumerate()
        .map(|(t, &target)| {
            let tol = 10.0 * f64::EPSILON * target.norm().max(1.0);
            let mut acc = Vec2::zeros();
            for (node, (p, d)) in x.iter().zip(&dx).enumerate() {
                let r = (target - p).norm();
                if r <= tol {
                    return Err(Error::NearSingular { target: t, node });
                }
                acc += d / chord_power(r, alpha, 0.0);
            }
            Ok(acc * scale)
        })
        .collect()
}

/// Regularized integral with unit prefactor: `φ_ε ∗ ∫ ∂γ(φ_ε∗x(γ) − φ_ε∗x(γ−η)) / (|x(γ) − x(γ−η)| + δ)^α dη`.
pub fn regularized_self_integral(curve: &ClosedCurve, alpha: f64, reg: &RegularizationSpec) -> Result<Vec<Vec2>> {
    check_alpha(alpha)?;
    reg.validate()?;
    if reg.is_none() {
        return self_integral(curve, alpha);
    }
    let n = curve.len();
    let smoothed = reg.mollify(&curve.spectrum());
    let dnum = smoothed.derivative_points(1);
    let weights = if reg.delta > 0.0 {
        quadrature::trapezoid_weights(n)
    } else {
        quadrature::self_induction_weights(alpha, n)
    };
    let raw = subtracted_sum(curve.nodes(), &dnum, alpha, reg.delta, &weights)?;
    if reg.epsilon > 0.0 {
        Ok(reg.mollify(&Spectrum::of_points(&raw)).points())
    } else {
        Ok(raw)
    }
}

pub fn regularized_self_velocity(curve: &ClosedCurve, cfg: &PatchConfig, reg: &RegularizationSpec) -> Result<Vec<Vec2>> {
    let p = cfg.prefactor();
    Ok(regularized_self_integral(curve, cfg.alpha(), reg)?.into_iter().map(|v| v * p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    fn unit(alpha: f64) -> PatchConfig {
        PatchConfig::new(alpha, 1.0, 0.0).unwrap()
    }

    #[test]
    fn coupling_values() {
        assert!((coupling_constant(1.0, 0.0, 1.0).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(coupling_constant(0.7, 0.7, 0.4).unwrap(), 0.0);
        assert!(coupling_constant(1.0, 0.0, 0.01).unwrap() > 100.0);
        assert!(matches!(coupling_constant(1.0, 0.0, 1.5), Err(Error::Domain { name: "alpha", .. })));
        assert!(coupling_constant(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn gamma_accuracy_on_unit_interval() {
        let sqrt_pi = PI.sqrt();
        assert!((gamma(0.5) - sqrt_pi).abs() <= 1e-14 * sqrt_pi);
        assert!((gamma(1.5) - 0.5 * sqrt_pi).abs() <= 1e-14 * sqrt_pi);
        assert!((gamma(2.0) - 1.0).abs() <= 1e-14);
        // Γ(0.01) = 99.432585119150603714...
        assert!((gamma(0.01) - 99.432_585_119_150_6).abs() <= 1e-14 * 99.43);
    }

    #[test]
    fn circle_alpha_one_speed_four() {
        let c = shapes::circle(64, 1.0);
        let v = self_velocity(&c, &unit(1.0), Some(1.0)).unwrap();
        for (j, vj) in v.iter().enumerate() {
            let g = c.gamma(j);
            assert!((vj - 4.0 * Vec2::new(-g.sin(), g.cos())).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_curve_is_singular() {
        let c = ClosedCurve::new(vec![Vec2::new(1.0, 1.0); 8]).unwrap();
        assert!(matches!(self_velocity(&c, &unit(0.5), None), Err(Error::SingularKernel(_, _))));
    }

    #[test]
    fn normal_velocity_matches_projection() {
        let e = shapes::ellipse(256, 2.0, 1.0);
        let cfg = unit(0.6);
        let nv = normal_velocity(&e, &cfg).unwrap();
        let v = self_velocity(&e, &cfg, None).unwrap();
        let dx = e.derivative(1).unwrap();
        for j in 0..256 {
            let proj = v[j].dot(&Vec2::new(-dx[j].y, dx[j].x));
            assert!((nv[j] - proj).abs() < 1e-10);
        }
        let moved = normal_velocity(&e.translated(Vec2::new(3.0, -7.0)), &cfg).unwrap();
        for (a, b) in nv.iter().zip(&moved) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn external_at_center_vanishes() {
        let c = shapes::circle(128, 1.0);
        for &alpha in &[0.3, 1.0] {
            let u = external_velocity(&[Vec2::zeros()], &c, &unit(alpha)).unwrap();
            assert!(u[0].norm() < 1e-14);
        }
    }

    #[test]
    fn external_on_node_is_rejected() {
        let c = shapes::circle(16, 1.0);
        let target = c.nodes()[5];
        assert_eq!(
            external_velocity(&[Vec2::new(0.0, 0.0), target], &c, &unit(0.5)),
            Err(Error::NearSingular { target: 1, node: 5 })
        );
    }

    #[test]
    fn regularization_reduces_to_plain() {
        let e = shapes::ellipse(64, 2.0, 1.0);
        let cfg = unit(0.5);
        let plain = self_velocity(&e, &cfg, None).unwrap();
        let reg = regularized_self_velocity(&e, &cfg, &RegularizationSpec::default()).unwrap();
        for (a, b) in plain.iter().zip(&reg) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn negative_regularization_rejected() {
        assert!(RegularizationSpec::new(-1.0, 0.0, MollifierKind::FourierCutoff).is_err());
        assert!(RegularizationSpec::new(0.0, -0.1, MollifierKind::PeriodicGaussian).is_err());
    }
}
