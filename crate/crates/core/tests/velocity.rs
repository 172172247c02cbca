use std::f64::consts::PI;

use alpha_patch::spectral::Spectrum;
use alpha_patch::velocity::regularized_self_velocity;
use alpha_patch::*;

fn unit(alpha: f64) -> PatchConfig {
    PatchConfig::new(alpha, 1.0, 0.0).unwrap().with_prefactor(1.0)
}

fn perp(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

fn max_diff(a: &[Vec2], b: &[Vec2]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
}

#[test]
fn coupling_near_zero_alpha_is_large() {
    let c = coupling_constant(1.0, 0.0, 0.01).unwrap();
    assert!(c > 100.0, "{c}");
    assert!((coupling_constant(1.0, 0.0, 1.0).unwrap() - 2.0).abs() < 1e-14);
    assert_eq!(coupling_constant(0.3, 0.3, 0.6).unwrap(), 0.0);
    assert!(coupling_constant(1.0, 0.0, 0.0).is_err());
    assert!(coupling_constant(1.0, 0.0, 1.5).is_err());
}

#[test]
fn ellipse_normal_velocity_is_projection_of_self_velocity() {
    let c = shapes::ellipse(256, 2.0, 1.0);
    for alpha in [0.4, 1.0] {
        let cfg = unit(alpha);
        let un = normal_velocity(&c, &cfg).unwrap();
        let v = self_velocity(&c, &cfg, None).unwrap();
        let dx = c.derivative(1).unwrap();
        for j in 0..c.len() {
            assert!((un[j] - v[j].dot(&perp(dx[j]))).abs() < 1e-10);
        }
    }
}

#[test]
fn normal_velocity_ignores_translation() {
    let c = shapes::fourier_perturbed_circle(128, 1.0, &[0.0, 0.1, 0.05]).unwrap();
    let cfg = unit(0.6);
    let a = normal_velocity(&c, &cfg).unwrap();
    let b = normal_velocity(&c.translated(Vec2::new(7.0, -3.0)), &cfg).unwrap();
    let worst = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn external_velocity_decays_with_distance() {
    let source = shapes::ellipse(256, 1.5, 1.0);
    let cfg = unit(0.5);
    let near = external_velocity(&[Vec2::new(10.0, 3.0)], &source, &cfg).unwrap()[0];
    let far = external_velocity(&[Vec2::new(100.0, 30.0)], &source, &cfg).unwrap()[0];
    assert!(far.norm() < near.norm(), "{} vs {}", far.norm(), near.norm());
}

#[test]
fn mirror_circles_see_mirrored_fields() {
    let n = 128;
    let left = shapes::place(&shapes::circle(n, 1.0), Vec2::new(-2.0, 0.0), 0.0, false);
    let right = shapes::place(&shapes::circle(n, 1.0), Vec2::new(2.0, 0.0), 0.0, false);
    let cfg = unit(1.0);
    let on_right = external_velocity(right.nodes(), &left, &cfg).unwrap();
    let on_left = external_velocity(left.nodes(), &right, &cfg).unwrap();
    assert!(on_right.iter().all(|v| v.x.is_finite() && v.y.is_finite()));
    // Node j of the right circle mirrors node n/2 − j (mod n) of the left one
    // under x → −x. The induced field changes sign and reflects: (u, v) → (u, −v).
    for j in 0..n {
        let m = (n + n / 2 - j) % n;
        let a = on_right[j];
        let b = on_left[m];
        assert!((a.norm() - b.norm()).abs() < 1e-12);
        assert!((a.x - b.x).abs() < 1e-12 && (a.y + b.y).abs() < 1e-12, "{j}: {a:?} {b:?}");
    }
}

#[test]
fn far_field_along_the_normal_approaches_normal_velocity() {
    // High-resolution source so the plain trapezoid resolves the near field.
    let m = 1 << 17;
    let alpha = 0.5;
    let cfg = unit(alpha);
    let source = shapes::ellipse(m, 1.5, 1.0);
    let coarse = shapes::ellipse(64, 1.5, 1.0);
    let un = normal_velocity(&coarse, &cfg).unwrap();
    let dx = coarse.derivative(1).unwrap();
    for j in [5usize, 20, 40] {
        let x = coarse.nodes()[j];
        let n_hat = -perp(dx[j]).normalize();
        let limit = un[j] / dx[j].norm();
        let sample = |d: f64| {
            let u = external_velocity(&[x + d * n_hat], &source, &cfg).unwrap()[0];
            u.dot(&perp(dx[j]).normalize())
        };
        let (u1, u2, u3) = (sample(1e-2), sample(1e-3), sample(1e-4));
        let (e1, e2, e3) = ((u1 - limit).abs(), (u2 - limit).abs(), (u3 - limit).abs());
        assert!(e1 > e2 && e2 > e3, "node {j}: {e1:e} {e2:e} {e3:e}");
        // The normal component is Lipschitz across the curve, so the error is
        // linear in d; eliminate it from the two closest samples.
        let extrapolated = (10.0 * u3 - u2) / 9.0;
        assert!((extrapolated - limit).abs() < 1e-3 * e3, "node {j}: {extrapolated} vs {limit} (raw {e3:e})");
    }
}

#[test]
fn alpha_one_tangential_component_diverges_logarithmically() {
    let m = 1 << 18;
    let cfg = unit(1.0);
    let source = shapes::circle(m, 1.0);
    // At (1 + d, 0) the tangent is (0, 1).
    let tangential = |d: f64| external_velocity(&[Vec2::new(1.0 + d, 0.0)], &source, &cfg).unwrap()[0].y;
    let values: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&d| tangential(d)).collect();
    let step1 = values[1] - values[0];
    let step2 = values[2] - values[1];
    // Equal increments per decade: growth like log(1/d).
    assert!(step1.abs() > 1.0, "{values:?}");
    assert!((step2 / step1 - 1.0).abs() < 0.05, "{values:?}");
    // For the unit circle the coefficient is 2·log(10) per decade.
    assert!((step1.abs() - 2.0 * 10f64.ln()).abs() < 0.1, "{step1}");
}

#[test]
fn large_delta_slows_the_circle() {
    let c = shapes::circle(128, 1.0);
    let reg = RegularizationSpec::new(0.0, 10.0, MollifierKind::FourierCutoff).unwrap();
    let v = regularized_self_velocity(&c, &unit(1.0), &reg).unwrap();
    let dx = c.derivative(1).unwrap();
    for (vj, d) in v.iter().zip(&dx) {
        let tangential = vj.dot(d);
        assert!(tangential > 0.0 && tangential < 4.0, "{tangential}");
        assert!(vj.dot(&perp(*d)).abs() < 1e-13);
    }
}

#[test]
fn cutoff_above_band_limit_only_truncates_the_field() {
    let c = shapes::fourier_perturbed_circle(128, 1.0, &[0.0, 0.1, 0.0, 0.02]).unwrap();
    let cfg = unit(0.7);
    let plain = self_velocity(&c, &cfg, None).unwrap();
    // Band limit of r·(cos, sin) is 5; cutoff 1/ε = 10 leaves the curve alone,
    // so only the outer mollification of the velocity acts.
    let reg = RegularizationSpec::new(0.1, 0.0, MollifierKind::FourierCutoff).unwrap();
    let cut = regularized_self_velocity(&c, &cfg, &reg).unwrap();
    let expected = Spectrum::of_points(&plain).filtered(|k| if k > 10.0 { 0.0 } else { 1.0 }).points();
    assert!(max_diff(&expected, &cut) < 1e-12, "{}", max_diff(&expected, &cut));

    let circle = shapes::circle(128, 1.0);
    let plain = self_velocity(&circle, &cfg, None).unwrap();
    let cut = regularized_self_velocity(&circle, &cfg, &reg).unwrap();
    assert!(max_diff(&plain, &cut) < 1e-12);
}

#[test]
fn gaussian_mollifier_changes_the_field_smoothly() {
    let c = shapes::fourier_perturbed_circle(128, 1.0, &[0.0, 0.1]).unwrap();
    let cfg = unit(0.7);
    let plain = self_velocity(&c, &cfg, None).unwrap();
    let mut prev = f64::INFINITY;
    for eps in [1e-1, 1e-2, 1e-3] {
        let reg = RegularizationSpec::new(eps, 0.0, MollifierKind::PeriodicGaussian).unwrap();
        let d = max_diff(&plain, &regularized_self_velocity(&c, &cfg, &reg).unwrap());
        assert!(d < prev, "{eps}: {d}");
        prev = d;
    }
    assert!(prev < 1e-3);
}

#[test]
fn self_velocity_converges_spectrally_on_an_ellipse() {
    let cfg = unit(0.5);
    let at = |n: usize| {
        let c = shapes::ellipse(n, 1.5, 1.0);
        self_velocity(&c, &cfg, None).unwrap()[n / 8]
    };
    let (a, b, c) = (at(32), at(64), at(128));
    let e1 = (a - c).norm();
    let e2 = (b - c).norm();
    assert!(e2 < e1 / 4.0, "{e1:e} {e2:e}");
    assert!(e2 < 1e-8, "{e2:e}");
}

#[test]
fn circle_speed_is_four_at_every_resolution() {
    for n in [8, 16, 64, 512] {
        let v = self_velocity(&shapes::circle(n, 1.0), &unit(1.0), None).unwrap();
        for (j, vj) in v.iter().enumerate() {
            let g = -PI + 2.0 * PI * j as f64 / n as f64;
            assert!((vj - 4.0 * Vec2::new(-g.sin(), g.cos())).norm() < 1e-12, "{n} {j}");
        }
    }
}
