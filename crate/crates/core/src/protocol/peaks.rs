use crate::error::{invalid, Result};
use crate::scalar::Real;
use crate::spin::BlochAngles;

/// Result of an inverse-trig peak formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PeakValue<T> {
    Regular(T),
    /// The argument left `[-1, 1]` and was clamped before inversion.
    Clamped(T),
    /// The denominator vanished (pole for `φ`, `φ = ±π/2` for `θ`).
    Undefined,
}

impl<T: Copy> PeakValue<T> {
    pub fn value(&self) -> Option<T> {
        match *self {
            PeakValue::Regular(v) | PeakValue::Clamped(v) => Some(v),
            PeakValue::Undefined => None,
        }
    }

    pub fn regular(&self) -> Option<T> {
        match *self {
            PeakValue::Regular(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakPositions<T> {
    /// `arccos(s1 / (N sin θ))`.
    pub phi_peak: PeakValue<T>,
    /// `arcsin(s1 / (N cos φ))`.
    pub theta_peak: PeakValue<T>,
}

fn invert<T: Real>(num: T, den: T, f: fn(T) -> T) -> PeakValue<T> {
    if den.abs() < T::lit(1e-12) {
        return PeakValue::Undefined;
    }
    let r = num / den;
    if r.abs() > T::one() {
        PeakValue::Clamped(f(r.signum()))
    } else {
        PeakValue::Regular(f(r))
    }
}

/// Maxima of `p(k1, N/2, N/2)` as a function of Alice's `φ` (at fixed `θ`)
/// and of her `θ` (at fixed `φ`) for the outcome `s1 = 2k1 - N`.
pub fn peak_positions<T: Real>(n: u32, s1: i64, alice: &BlochAngles<T>) -> Result<PeakPositions<T>> {
    if n == 0 {
        return Err(invalid("n_particles", "must be positive"));
    }
    if s1.unsigned_abs() > u64::from(n) {
        return Err(invalid("s1", format!("|s1| = {} exceeds N = {n}", s1.abs())));
    }
    let num = T::from_i64_lossy(s1);
    let nf = T::from_u32(n).unwrap();
    Ok(PeakPositions {
        phi_peak: invert(num, nf * alice.theta().sin(), T::acos),
        theta_peak: invert(num, nf * alice.phi().cos(), T::asin),
    })
}
