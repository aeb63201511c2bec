//! Exact Poisson sampling.
//!
//! Small means use inversion by sequential search. Means above
//! [`INVERSION_LIMIT`] use Hörmann's transformed rejection with squeeze
//! (PTRS), which is exact and needs O(1) uniforms on average.

use rand::Rng;
use statrs::function::gamma::ln_gamma;

pub const INVERSION_LIMIT: f64 = 10.0;

/// Draws one Poisson(`mu`) variate. `mu` must be finite and nonnegative.
pub fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, mu: f64) -> u64 {
    debug_assert!(mu.is_finite() && mu >= 0.0);
    if mu == 0.0 {
        0
    } else if mu <= INVERSION_LIMIT {
        inversion(rng, mu)
    } else {
        ptrs(rng, mu)
    }
}

fn inversion<R: Rng + ?Sized>(rng: &mut R, mu: f64) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = (-mu).exp();
    let mut cdf = p;
    // past ~mu + 40 sd the remaining mass is below f64 resolution
    let cap = (mu + 40.0 * mu.sqrt() + 40.0) as u64;
    while u > cdf && k < cap {
        k += 1;
        p *= mu / k as f64;
        cdf += p;
    }
    k
}

fn ptrs<R: Rng + ?Sized>(rng: &mut R, mu: f64) -> u64 {
    let smu = mu.sqrt();
    let b = 0.931 + 2.53 * smu;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    let ln_mu = mu.ln();
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mu + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = (v * inv_alpha / (a / (us * us) + b)).ln();
        let rhs = -mu + k * ln_mu - ln_gamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}
