//! Quadrature rules for the periodic self-induction integral
//!
//! ```text
//! I(γ) = ∫_{−π}^{π} M(η) / |D(η)|^α dη,   M(η) = ∂γx(γ) − ∂γx(γ−η),   D(η) = x(γ) − x(γ−η)
//! ```
//!
//! on the node offsets `η_k = 2πk/N` (wrapped to `(−π, π]`).
//!
//! Writing `s(η) = 2 sin(η/2)` and `G = |D|/|s|`, the integrand factors as
//! `w(η) P(η)` with `w = s |s|^{−α}` and `P = (M/s) G^{−α}`. Both factors are
//! antiperiodic; `P` is smooth for a smooth simple curve while `w` carries the
//! whole singularity. Interpolating `P` by half-integer Fourier modes and
//! integrating against `w` exactly gives real weights
//!
//! ```text
//! ω_k = (4/N) Σ_{ν = 1/2, 3/2, …, (N−1)/2} v(ν) sin(ν η_k),
//! v(ν) = ∫_0^π s^{1−α} sin(νη) dη = Γ(2−α) sin(πα/2) Γ(ν − 1/2 + α/2) / Γ(ν + 3/2 − α/2),
//! ```
//!
//! and `I ≈ Σ_k W_k K(η_k)` with `W_k = ω_k |s_k|^α / s_k`. The `k = 0` weight is
//! exactly zero, so the diagonal term never enters. The rule is spectrally
//! accurate and integrates the circle's integrands exactly.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use statrs::function::gamma::gamma;

/// Node offset `η_k` in `(−π, π]`.
#[inline]
pub fn offset(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        2.0 * PI * k as f64 / n as f64
    } else {
        2.0 * PI * (k as f64 - n as f64) / n as f64
    }
}

/// `v(m + 1/2)` for `m = 0..count`, by the Gamma-ratio recurrence.
pub fn half_mode_moments(alpha: f64, count: usize) -> Vec<f64> {
    let scale = gamma(2.0 - alpha) * (0.5 * PI * alpha).sin();
    let mut ratio = gamma(0.5 * alpha) / gamma(2.0 - 0.5 * alpha);
    let mut out = Vec::with_capacity(count);
    for m in 0..count {
        out.push(scale * ratio);
        let m = m as f64;
        ratio *= (m + 0.5 * alpha) / (m + 2.0 - 0.5 * alpha);
    }
    out
}

fn compute_weights(alpha: f64, n: usize) -> Vec<f64> {
    let moments = half_mode_moments(alpha, n / 2);
    (0..n)
        .map(|k| {
            if k == 0 {
                return 0.0;
            }
            let eta = offset(k, n);
            let omega: f64 = moments
                .iter()
                .enumerate()
                .map(|(m, v)| v * ((m as f64 + 0.5) * eta).sin())
                .sum::<f64>()
                * 4.0
                / n as f64;
            let s = 2.0 * (0.5 * eta).sin();
            omega * s.abs().powf(alpha) / s
        })
        .collect()
}

type WeightCache = Mutex<HashMap<(u64, usize), Arc<[f64]>>>;

/// Product-integration weights for exponent `alpha` on `n` nodes (cached).
pub fn self_induction_weights(alpha: f64, n: usize) -> Arc<[f64]> {
    static CACHE: OnceLock<WeightCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (alpha.to_bits(), n);
    if let Some(w) = cache.lock().unwrap().get(&key) {
        return w.clone();
    }
    let w: Arc<[f64]> = compute_weights(alpha, n).into();
    cache.lock().unwrap().insert(key, w.clone());
    w
}

/// Periodic trapezoid with the `η = 0` term dropped. Used when the chord is
/// floored by `δ > 0`, which removes the singularity but leaves a kink.
pub fn trapezoid_weights(n: usize) -> Arc<[f64]> {
    let h = 2.0 * PI / n as f64;
    (0..n).map(|k| if k == 0 { 0.0 } else { h }).collect::<Vec<_>>().into()
}
