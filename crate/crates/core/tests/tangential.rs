use std::f64::consts::PI;

use alpha_patch::spectral::Spectrum;
use alpha_patch::tangential::{lambda_for_field, LambdaForm, DEFAULT_UNIFORMITY_SWITCH};
use alpha_patch::velocity::self_integral;
use alpha_patch::*;

fn uniform_ellipse(n: usize) -> ClosedCurve {
    reparametrize_uniform(&shapes::ellipse(n, 2.0, 1.0)).unwrap()
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().map(f64::abs).fold(0.0, f64::max)
}

/// `h = g/A` (or `g/|∂γx|²`) as used by the field.
fn ratios(curve: &ClosedCurve, g: &[f64], form: LambdaForm) -> Vec<f64> {
    let report = speed_report(curve);
    let dx = curve.derivative(1).unwrap();
    g.iter()
        .zip(&dx)
        .map(|(gj, d)| match form {
            LambdaForm::ConstantSpeed => gj / report.a,
            LambdaForm::Pointwise => gj / d.norm_squared(),
        })
        .collect()
}

#[test]
fn integrand_ignores_translation() {
    let c = shapes::fourier_perturbed_circle(128, 1.0, &[0.0, 0.15, 0.05]).unwrap();
    let a = tangential_derivative_integrand(&c).unwrap();
    let b = tangential_derivative_integrand(&c.translated(Vec2::new(-4.0, 2.5))).unwrap();
    assert!(max_abs(a.iter().zip(&b).map(|(p, q)| p - q)) < 1e-11);
}

#[test]
fn ellipse_integrand_is_odd_under_both_reflections() {
    // x(−γ) and x(π−γ) are mirror images of x(γ); the self-induction integral
    // picks up the mirror and a sign from the reversed orientation, so g flips.
    let n = 256;
    let g = tangential_derivative_integrand(&shapes::ellipse(n, 2.0, 1.0)).unwrap();
    let scale = max_abs(g.iter().copied());
    assert!(scale > 0.1);
    for j in 0..n {
        let minus = (n - j) % n;
        let supplement = (n + n / 2 - j) % n;
        assert!((g[j] + g[minus]).abs() < 1e-10 * scale, "{j}");
        assert!((g[j] + g[supplement]).abs() < 1e-10 * scale, "{j}");
    }
}

#[test]
fn lambda_is_an_antiderivative_of_the_centered_ratio() {
    for (curve, form) in [
        (uniform_ellipse(256), LambdaForm::ConstantSpeed),
        (shapes::ellipse(256, 2.0, 1.0), LambdaForm::Pointwise),
    ] {
        let field = lambda_qg(&curve).unwrap();
        assert_eq!(field.form, form);
        let g = tangential_derivative_integrand(&curve).unwrap();
        let h = ratios(&curve, &g, form);
        let mean = h.iter().sum::<f64>() / h.len() as f64;
        let dlambda = Spectrum::of_scalars(&field.lambda_values).derivative_scalars(1);
        let residual = max_abs(dlambda.iter().zip(&h).map(|(d, hj)| d + hj - mean));
        assert!(residual < 1e-10, "{form:?}: {residual}");
        assert!((field.mean_drift - mean).abs() < 1e-14);
    }
}

#[test]
fn lambda_vanishes_at_both_ends() {
    let field = lambda_qg(&shapes::ellipse(256, 2.0, 1.0)).unwrap();
    assert_eq!(field.lambda_values[0], 0.0);
    let spec = Spectrum::of_scalars(&field.lambda_values);
    let at_pi = spec.eval(2.0 * PI, 0).re;
    assert!(at_pi.abs() < 1e-10, "{at_pi}");
}

#[test]
fn discrete_integral_of_the_lambda_identity_vanishes() {
    let curve = uniform_ellipse(128);
    let field = lambda_qg(&curve).unwrap();
    let g = tangential_derivative_integrand(&curve).unwrap();
    let a = speed_report(&curve).a;
    let gm = g.iter().sum::<f64>() / g.len() as f64;
    let dlambda = Spectrum::of_scalars(&field.lambda_values).derivative_scalars(1);
    let mean = dlambda.iter().zip(&g).map(|(d, gj)| d * a + gj - gm).sum::<f64>() / g.len() as f64;
    assert!(mean.abs() < 1e-12, "{mean}");
}

#[test]
fn mu_two_ways() {
    let curve = uniform_ellipse(256);
    let field = lambda_qg(&curve).unwrap();
    let g = tangential_derivative_integrand(&curve).unwrap();
    let a = speed_report(&curve).a;
    let h = 2.0 * PI / g.len() as f64;
    let from_integral = g.iter().map(|gj| gj / a).sum::<f64>() * h / PI;
    assert!((from_integral - field.mu).abs() < 1e-12);
    assert!((field.mu - 2.0 * field.mean_drift).abs() < 1e-12);
}

#[test]
fn lambda_is_invariant_under_rigid_motion() {
    let curve = reparametrize_uniform(&shapes::fourier_perturbed_circle(128, 1.0, &[0.05, 0.1, 0.0, 0.03]).unwrap()).unwrap();
    let base = lambda_qg(&curve).unwrap();
    let moved = curve.rotated(0.83).translated(Vec2::new(2.0, -1.0));
    let other = lambda_qg(&moved).unwrap();
    let worst = max_abs(base.lambda_values.iter().zip(&other.lambda_values).map(|(a, b)| a - b));
    assert!(worst < 1e-10, "{worst}");
    assert!((base.mu - other.mu).abs() < 1e-10);
}

#[test]
fn lambda_scales_with_the_field() {
    let curve = uniform_ellipse(128);
    let field = self_integral(&curve, 1.0).unwrap();
    let scaled: Vec<Vec2> = field.iter().map(|v| 2.5 * v).collect();
    let a = lambda_for_field(&curve, &field, DEFAULT_UNIFORMITY_SWITCH);
    let b = lambda_for_field(&curve, &scaled, DEFAULT_UNIFORMITY_SWITCH);
    let worst = max_abs(a.lambda_values.iter().zip(&b.lambda_values).map(|(x, y)| 2.5 * x - y));
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn one_qg_step_keeps_tangency() {
    let curve = reparametrize_uniform(&shapes::fourier_perturbed_circle(256, 1.0, &[0.0, 0.0, 0.1]).unwrap()).unwrap();
    let cfg = PatchConfig::new(1.0, 1.0, 0.0).unwrap().with_prefactor(1.0);
    let state = SimState::single(curve, cfg, Scheme::QgWithLambda).unwrap();
    let next = step_rk4(&state, 1e-3).unwrap();
    let report = speed_report(&next.patches[0].curve);
    assert!(report.tangency_defect < 1e-6, "{}", report.tangency_defect);
    assert!(report.uniformity_defect < 1e-6, "{}", report.uniformity_defect);
}
