//! Scalar kernels of the spectral trajectory formula, extended to λ ≤ 0.
//!
//! With `z = λ t²`:
//! - `kernel_cosh`   = cosh(√λ t)
//! - `kernel_sinhc`  = sinh(√λ t) / √λ
//! - `kernel_coshm1` = (cosh(√λ t) − 1) / λ
//!
//! Negative λ continues to the trigonometric forms; `|z| < 1e-6` uses the
//! Maclaurin series, so all three are continuous through λ = 0.

use crate::scalar::{lit, Real};

const SERIES_CUTOFF: f64 = 1e-6;

fn use_series<T: Real>(z: T) -> bool {
    z.abs() < lit(SERIES_CUTOFF)
}

pub fn kernel_cosh<T: Real>(lambda: T, t: T) -> T {
    let z = lambda * t * t;
    if use_series(z) {
        return T::one() + z / lit(2.0) + z * z / lit(24.0) + z * z * z / lit(720.0);
    }
    if lambda > T::zero() {
        (lambda.sqrt() * t).cosh()
    } else {
        ((-lambda).sqrt() * t).cos()
    }
}

pub fn kernel_sinhc<T: Real>(lambda: T, t: T) -> T {
    let z = lambda * t * t;
    if use_series(z) {
        return t * (T::one() + z / lit(6.0) + z * z / lit(120.0) + z * z * z / lit(5040.0));
    }
    if lambda > T::zero() {
        let r = lambda.sqrt();
        (r * t).sinh() / r
    } else {
        let r = (-lambda).sqrt();
        (r * t).sin() / r
    }
}

pub fn kernel_coshm1<T: Real>(lambda: T, t: T) -> T {
    let z = lambda * t * t;
    if use_series(z) {
        return t * t * (lit::<T>(0.5) + z / lit(24.0) + z * z / lit(720.0) + z * z * z / lit(40320.0));
    }
    // Half-angle forms avoid cancellation in cosh − 1.
    let two = lit::<T>(2.0);
    if lambda > T::zero() {
        let s = (lambda.sqrt() * t / two).sinh();
        two * s * s / lambda
    } else {
        let s = ((-lambda).sqrt() * t / two).sin();
        -two * s * s / lambda
    }
}

/// `cosh(√λ s) / cosh(√λ T)` for λ ≥ 0 and `0 ≤ s ≤ T`, finite for any
/// argument size.
pub fn cosh_ratio<T: Real>(lambda: T, s: T, horizon: T) -> T {
    let a = lambda.max(T::zero()).sqrt();
    if a * horizon < lit(1.0) {
        return kernel_cosh(lambda, s) / kernel_cosh(lambda, horizon);
    }
    let two = lit::<T>(2.0);
    (a * (s - horizon)).exp() * (T::one() + (-two * a * s).exp()) / (T::one() + (-two * a * horizon).exp())
}
