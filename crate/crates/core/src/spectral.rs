//! Fourier-collocation machinery on the uniform periodic grid.
//!
//! A planar curve is packed into one complex signal `z = x1 + i x2`. Every
//! multiplier used here is conjugate-symmetric in the wavenumber (with the
//! Nyquist bin treated as a cosine), so it acts on both coordinates
//! independently and one complex transform serves the pair.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::Vec2;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(data: &mut [Complex64], inverse: bool) {
    let n = data.len();
    let plan = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    plan.process(data);
}

/// Signed wavenumber of bin `m` in an `n`-point transform; the Nyquist bin maps to `+n/2`.
#[inline]
pub fn wavenumber(m: usize, n: usize) -> i64 {
    if m <= n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Multiplier of `d^order/dγ^order` on bin `m`; odd orders drop the Nyquist mode.
fn derivative_factor(m: usize, n: usize, order: u32) -> Complex64 {
    if order == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if n % 2 == 0 && m == n / 2 && order % 2 == 1 {
        return Complex64::new(0.0, 0.0);
    }
    let k = wavenumber(m, n) as f64;
    Complex64::new(0.0, k).powu(order)
}

/// Bins smaller than this fraction of the largest non-mean bin are treated as roundoff
/// and zeroed on every forward transform (a Krasny-type filter). Without it,
/// differentiation amplifies the noise floor by `k^order`.
pub const ROUNDOFF_FILTER: f64 = 1e-13;

fn forward_filtered(mut coeffs: Vec<Complex64>) -> Vec<Complex64> {
    fft_in_place(&mut coeffs, false);
    if coeffs.len() < 2 {
        return coeffs;
    }
    // The mean bin is left alone and excluded from the reference size, so the
    // filter does not depend on where the curve sits.
    let max = coeffs[1..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let floor = ROUNDOFF_FILTER * max;
    for c in coeffs[1..].iter_mut() {
        if c.norm() <= floor {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    coeffs
}

/// Unnormalized forward DFT of a sampled periodic signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn of_points(points: &[Vec2]) -> Self {
        let coeffs = points.iter().map(|p| Complex64::new(p.x, p.y)).collect();
        Spectrum { coeffs: forward_filtered(coeffs) }
    }

    pub fn of_scalars(values: &[f64]) -> Self {
        let coeffs = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Spectrum { coeffs: forward_filtered(coeffs) }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Mean of the sampled signal (as a packed complex value).
    pub fn mean(&self) -> Complex64 {
        self.coeffs[0] / self.len() as f64
    }

    /// Multiply every bin by a real factor depending only on `|k|`.
    pub fn filtered(&self, factor: impl Fn(f64) -> f64) -> Spectrum {
        let n = self.len();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| c * factor(wavenumber(m, n).unsigned_abs() as f64))
            .collect();
        Spectrum { coeffs }
    }

    fn mapped(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Vec<Complex64> {
        let n = self.len();
        let mut out: Vec<Complex64> = self.coeffs.iter().enumerate().map(|(m, &c)| f(m, c)).collect();
        fft_in_place(&mut out, true);
        let scale = 1.0 / n as f64;
        out.iter_mut().for_each(|c| *c *= scale);
        out
    }

    pub fn derivative(&self, order: u32) -> Vec<Complex64> {
        let n = self.len();
        self.mapped(|m, c| c * derivative_factor(m, n, order))
    }

    pub fn derivative_points(&self, order: u32) -> Vec<Vec2> {
        self.derivative(order).into_iter().map(|c| Vec2::new(c.re, c.im)).collect()
    }

    pub fn derivative_scalars(&self, order: u32) -> Vec<f64> {
        self.derivative(order).into_iter().map(|c| c.re).collect()
    }

    /// Nodal values of the signal synthesized back (used after filtering).
    pub fn points(&self) -> Vec<Vec2> {
        self.derivative_points(0)
    }

    pub fn scalars(&self) -> Vec<f64> {
        self.derivative_scalars(0)
    }

    /// Periodic antiderivative of the zero-mean part, sampled at the nodes.
    /// The mean and Nyquist bins are discarded.
    pub fn antiderivative_scalars(&self) -> Vec<f64> {
        self.antiderivative_spectrum().scalars()
    }

    pub fn antiderivative_spectrum(&self) -> Spectrum {
        let n = self.len();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, &c)| {
                if m == 0 || (n % 2 == 0 && m == n / 2) {
                    Complex64::new(0.0, 0.0)
                } else {
                    c / Complex64::new(0.0, wavenumber(m, n) as f64)
                }
            })
            .collect();
        Spectrum { coeffs }
    }

    /// Evaluate the trigonometric interpolant (or its first derivative) at phase
    /// `theta = γ + π`, i.e. measured from the first node.
    pub fn eval(&self, theta: f64, order: u32) -> Complex64 {
        debug_assert!(order <= 1);
        let n = self.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, &c) in self.coeffs.iter().enumerate() {
            if n % 2 == 0 && m == n / 2 {
                let half = n as f64 / 2.0;
                let term = if order == 0 {
                    (half * theta).cos()
                } else {
                    -half * (half * theta).sin()
                };
                acc += c * term;
                continue;
            }
            let k = wavenumber(m, n) as f64;
            let phase = Complex64::from_polar(1.0, k * theta);
            let mut term = c * phase;
            if order == 1 {
                term *= Complex64::new(0.0, k);
            }
            acc += term;
        }
        acc / n as f64
    }

    pub fn eval_point(&self, theta: f64, order: u32) -> Vec2 {
        let c = self.eval(theta, order);
        Vec2::new(c.re, c.im)
    }
}

/// Uniform grid spacing `2π/N`.
#[inline]
pub fn spacing(n: usize) -> f64 {
    2.0 * PI / n as f64
}

/// Grid abscissa `γ_j = −π + 2πj/N`.
#[inline]
pub fn gamma(j: usize, n: usize) -> f64 {
    -PI + spacing(n) * j as f64
}

/// Shortest periodic distance between grid indices `j` and `k`, in γ units.
#[inline]
pub fn periodic_distance(j: usize, k: usize, n: usize) -> f64 {
    let d = j.abs_diff(k);
    spacing(n) * d.min(n - d) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_single_mode() {
        let n = 32;
        let vals: Vec<f64> = (0..n).map(|j| (3.0 * gamma(j, n)).sin()).collect();
        let d = Spectrum::of_scalars(&vals).derivative_scalars(1);
        for (j, v) in d.iter().enumerate() {
            assert!((v - 3.0 * (3.0 * gamma(j, n)).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn antiderivative_inverts_derivative_on_zero_mean() {
        let n = 64;
        let vals: Vec<f64> = (0..n)
            .map(|j| {
                let g = gamma(j, n);
                (2.0 * g).cos() + 0.3 * (5.0 * g).sin()
            })
            .collect();
        let anti = Spectrum::of_scalars(&vals).antiderivative_scalars();
        let back = Spectrum::of_scalars(&anti).derivative_scalars(1);
        for (a, b) in vals.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolant_reproduces_nodes_and_midpoints() {
        let n = 16;
        let f = |g: f64| Vec2::new(g.cos() + 0.2 * (2.0 * g).sin(), (3.0 * g).sin());
        let pts: Vec<Vec2> = (0..n).map(|j| f(gamma(j, n))).collect();
        let s = Spectrum::of_points(&pts);
        for j in 0..n {
            let theta = spacing(n) * (j as f64 + 0.5);
            assert!((s.eval_point(theta, 0) - f(theta - PI)).norm() < 1e-13);
            assert!((s.eval_point(spacing(n) * j as f64, 0) - pts[j]).norm() < 1e-13);
        }
    }

    #[test]
    fn periodic_distance_wraps() {
        assert!((periodic_distance(0, 7, 8) - spacing(8)).abs() < 1e-15);
        assert!((periodic_distance(0, 4, 8) - PI).abs() < 1e-15);
    }
}
