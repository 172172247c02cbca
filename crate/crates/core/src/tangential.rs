//! Tangential reparametrization for the sharp-front case (`α = 1`).
//!
//! Adding `λ ∂γx` to the velocity leaves the boundary as a set unchanged and
//! can be chosen so that `|∂γx|²` stays independent of γ. With
//! `g = ∂γx · ∂γ V` for the boundary velocity `V`,
//!
//! ```text
//! ∂γλ = ⟨g/A⟩ − g/A,     λ(−π) = 0,
//! ```
//!
//! where `A = |∂γx|²` and `⟨·⟩` is the γ-average that makes λ periodic.
//! `μ = 2⟨g/A⟩` is the logarithmic growth rate of `A`.

use crate::curve::ClosedCurve;
use crate::error::Result;
use crate::spectral::Spectrum;
use crate::velocity;
use crate::Vec2;

/// Below this uniformity defect λ divides by the mean `A`; above it, by the pointwise `|∂γx|²`.
pub const DEFAULT_UNIFORMITY_SWITCH: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedReport {
    /// Mean of `|∂γx|²` over the nodes.
    pub a: f64,
    /// `max_j | |∂γx_j|² − A | / A`.
    pub uniformity_defect: f64,
    /// `max_j |∂γx_j · ∂γ²x_j| / A`.
    pub tangency_defect: f64,
}

pub fn speed_report(curve: &ClosedCurve) -> SpeedReport {
    let spec = curve.spectrum();
    let d1 = spec.derivative_points(1);
    let d2 = spec.derivative_points(2);
    let sq: Vec<f64> = d1.iter().map(|d| d.norm_squared()).collect();
    let a = sq.iter().sum::<f64>() / sq.len() as f64;
    let uniformity_defect = sq.iter().map(|s| (s - a).abs()).fold(0.0, f64::max) / a;
    let tangency_defect = d1.iter().zip(&d2).map(|(p, q)| p.dot(q).abs()).fold(0.0, f64::max) / a;
    SpeedReport { a, uniformity_defect, tangency_defect }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaForm {
    /// Divide by the mean `A` (valid once the speed is uniform).
    ConstantSpeed,
    /// Divide by the pointwise `|∂γx|²`.
    Pointwise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentialField {
    pub lambda_values: Vec<f64>,
    pub mu: f64,
    /// The average `⟨g/A⟩`, i.e. `A′/2A`.
    pub mean_drift: f64,
    pub form: LambdaForm,
}

/// `g_j = ∂γx_j · ∂γV_j` for a nodal velocity field `V`.
pub fn integrand_for_field(curve: &ClosedCurve, field: &[Vec2]) -> Vec<f64> {
    let dx = curve.spectrum().derivative_points(1);
    let dv = Spectrum::of_points(field).derivative_points(1);
    dx.iter().zip(&dv).map(|(a, b)| a.dot(b)).collect()
}

/// `g` for the α = 1 self-induction integral with unit prefactor.
pub fn tangential_derivative_integrand(curve: &ClosedCurve) -> Result<Vec<f64>> {
    let field = velocity::self_integral(curve, 1.0)?;
    Ok(integrand_for_field(curve, &field))
}

/// λ for a given boundary velocity.
pub fn lambda_for_field(curve: &ClosedCurve, field: &[Vec2], switch: f64) -> TangentialField {
    let g = integrand_for_field(curve, field);
    let report = speed_report(curve);
    let (form, ratios): (LambdaForm, Vec<f64>) = if report.uniformity_defect < switch {
        (LambdaForm::ConstantSpeed, g.iter().map(|gj| gj / report.a).collect())
    } else {
        let dx = curve.spectrum().derivative_points(1);
        (LambdaForm::Pointwise, g.iter().zip(&dx).map(|(gj, d)| gj / d.norm_squared()).collect())
    };
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    // λ(γ) = (γ+π)⟨h⟩ − ∫_{−π}^{γ} h = −(H̃(γ) − H̃(−π)) with H̃ the periodic antiderivative of h − ⟨h⟩.
    let anti = Spectrum::of_scalars(&ratios).antiderivative_scalars();
    let lambda_values = anti.iter().map(|a| anti[0] - a).collect();
    TangentialField { lambda_values, mu: 2.0 * mean, mean_drift: mean, form }
}

pub fn lambda_qg(curve: &ClosedCurve) -> Result<TangentialField> {
    lambda_qg_with_switch(curve, DEFAULT_UNIFORMITY_SWITCH)
}

pub fn lambda_qg_with_switch(curve: &ClosedCurve, switch: f64) -> Result<TangentialField> {
    let field = velocity::self_integral(curve, 1.0)?;
    Ok(lambda_for_field(curve, &field, switch))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn speed_report_examples() {
        let r = speed_report(&shapes::circle(64, 1.0));
        assert!((r.a - 1.0).abs() < 1e-13);
        assert!(r.uniformity_defect < 1e-13 && r.tangency_defect < 1e-13);

        let r2 = speed_report(&shapes::circle(64, 2.0));
        assert!((r2.a - 4.0).abs() < 1e-12);
        assert!(r2.uniformity_defect < 1e-13);

        let e = speed_report(&shapes::ellipse(64, 2.0, 1.0));
        assert!(e.uniformity_defect > 0.5);
        assert!(e.a > 1.0 && e.a < 4.0);
    }

    #[test]
    fn circle_lambda_vanishes() {
        let c = shapes::circle(128, 1.0);
        let g = tangential_derivative_integrand(&c).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-12));
        let field = lambda_qg(&c).unwrap();
        assert!(field.lambda_values.iter().all(|v| v.abs() < 1e-12));
        assert!(field.mu.abs() < 1e-12);
        assert_eq!(field.form, LambdaForm::ConstantSpeed);
    }

    #[test]
    fn nonuniform_curve_uses_pointwise_form() {
        let field = lambda_qg(&shapes::ellipse(64, 2.0, 1.0)).unwrap();
        assert_eq!(field.form, LambdaForm::Pointwise);
        assert_eq!(field.lambda_values[0], 0.0);
        assert!((field.mu - 2.0 * field.mean_drift).abs() < 1e-12);
    }
}
