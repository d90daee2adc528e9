use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Single-particle mode map `a† → u00 a† + u10 b†`, `b† → u01 a† + u11 b†`.
///
/// Mode `a` is basis index 0, so the columns hold the images of `a†` and
/// `b†`, and lifting is a homomorphism: `lift(U·V) = lift(U)·lift(V)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeUnitary<T> {
    pub u00: Complex<T>,
    pub u01: Complex<T>,
    pub u10: Complex<T>,
    pub u11: Complex<T>,
}

impl<T: Real> ModeUnitary<T> {
    pub const UNITARITY_TOL: f64 = 1e-12;

    pub fn new(u00: Complex<T>, u01: Complex<T>, u10: Complex<T>, u11: Complex<T>) -> Result<Self> {
        let u = Self { u00, u01, u10, u11 };
        let dev = u.unitarity_defect();
        if !(dev <= Self::UNITARITY_TOL) {
            return Err(Error::NotUnitary(dev));
        }
        Ok(u)
    }

    /// `max |U†U - I|` entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        let one = Complex::new(T::one(), T::zero());
        let d00 = self.u00.norm_sqr() + self.u10.norm_sqr();
        let d11 = self.u01.norm_sqr() + self.u11.norm_sqr();
        let off = self.u00.conj() * self.u01 + self.u10.conj() * self.u11;
        [
            (Complex::new(d00, T::zero()) - one).norm(),
            (Complex::new(d11, T::zero()) - one).norm(),
            off.norm(),
        ]
        .into_iter()
        .map(|x| x.to_f64_lossy())
        .fold(0.0, f64::max)
    }

    fn c(re: f64, im: f64) -> Complex<T> {
        Complex::new(T::lit(re), T::lit(im))
    }

    fn unchecked(u00: Complex<T>, u01: Complex<T>, u10: Complex<T>, u11: Complex<T>) -> Self {
        Self { u00, u01, u10, u11 }
    }

    pub fn identity() -> Self {
        Self::unchecked(Self::c(1.0, 0.0), Self::c(0.0, 0.0), Self::c(0.0, 0.0), Self::c(1.0, 0.0))
    }

    /// `a† → (a† + b†)/√2`, `b† → i(a† - b†)/√2` (acts on register 1).
    pub fn hadamard_first() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Self::unchecked(Self::c(r, 0.0), Self::c(0.0, r), Self::c(r, 0.0), Self::c(0.0, -r))
    }

    /// `a† → (a† + i b†)/√2`, `b† → (i a† + b†)/√2` (acts on register 1).
    pub fn hadamard_second() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Self::unchecked(Self::c(r, 0.0), Self::c(0.0, r), Self::c(0.0, r), Self::c(r, 0.0))
    }

    /// `a† → (a† + i b†)/√2`, `b† → (a† - i b†)/√2` (acts on register 4).
    pub fn hadamard_bob() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Self::unchecked(Self::c(r, 0.0), Self::c(r, 0.0), Self::c(0.0, r), Self::c(0.0, -r))
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self::unchecked(
            self.u00 * other.u00 + self.u01 * other.u10,
            self.u00 * other.u01 + self.u01 * other.u11,
            self.u10 * other.u00 + self.u11 * other.u10,
            self.u10 * other.u01 + self.u11 * other.u11,
        )
    }
}

/// Largest `N` whose factorials are exact in `u64`.
pub const MAX_EXACT_FACTORIAL_N: u32 = 20;

fn factorials(n: u32) -> Vec<f64> {
    let mut f = vec![1u64; n as usize + 1];
    for k in 1..=n as usize {
        f[k] = f[k - 1] * k as u64;
    }
    f.into_iter().map(|x| x as f64).collect()
}

/// `⟨k'|U|k⟩` on the `N`-particle symmetric subspace, row-major in `(k', k)`.
pub fn mode_unitary_matrix<T: Real>(n: u32, u: &ModeUnitary<T>) -> Result<Vec<Complex<T>>> {
    if n > MAX_EXACT_FACTORIAL_N {
        return Err(Error::Resource {
            n,
            limit: MAX_EXACT_FACTORIAL_N,
        });
    }
    let dev = u.unitarity_defect();
    if !(dev <= ModeUnitary::<T>::UNITARITY_TOL) {
        return Err(Error::NotUnitary(dev));
    }
    let f = factorials(n);
    let side = n as usize + 1;
    let nn = n as i64;
    let mut m = vec![Complex::new(T::zero(), T::zero()); side * side];
    for kp in 0..=nn {
        for k in 0..=nn {
            let mut acc = Complex::new(T::zero(), T::zero());
            for j in 0..=k.min(kp) {
                let rest = nn - k - kp + j;
                if rest < 0 {
                    continue;
                }
                let denom = f[j as usize] * f[(k - j) as usize] * f[(kp - j) as usize] * f[rest as usize];
                let term = u.u00.powi(j as i32)
                    * u.u10.powi((k - j) as i32)
                    * u.u01.powi((kp - j) as i32)
                    * u.u11.powi(rest as i32);
                acc = acc + term / T::lit(denom);
            }
            let pre = (f[kp as usize] * f[(nn - kp) as usize] * f[k as usize] * f[(nn - k) as usize]).sqrt();
            m[kp as usize * side + k as usize] = acc * T::lit(pre);
        }
    }
    Ok(m)
}
