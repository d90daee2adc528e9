//! Spin coherent states on a single symmetric register.
//!
//! A register of `N` two-mode bosons lives in the `(N+1)`-dimensional space
//! spanned by `|k⟩`, the state with `k` quanta in mode `a` and `N - k` in mode
//! `b`. Collective spin follows the Schwinger convention
//! `S^z = a†a - b†b`, `S^x = a†b + b†a`, `S^y = -i(a†b - b†a)`, so `|k⟩` is an
//! `S^z` eigenstate with eigenvalue `2k - N` and `k = N` is the north pole.

use std::fmt;
use std::ops::Sub;

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Wraps an angle into `[-π, π]`.
pub fn wrap_angle<T: Real>(phi: T) -> T {
    let two_pi = T::TAU();
    let wrapped = phi - two_pi * (phi / two_pi).round();
    // `round` is half-away-from-zero, so ±π stay put; only rounding noise can
    // push past the interval.
    if wrapped > T::PI() {
        T::PI()
    } else if wrapped < -T::PI() {
        -T::PI()
    } else {
        wrapped
    }
}

/// Table of `ln k!` for `k = 0..=n`, built by cumulative summation of logs.
#[derive(Debug, Clone)]
pub struct LogFactorials<T> {
    table: Vec<T>,
}

impl<T: Real> LogFactorials<T> {
    pub fn new(n: u32) -> Self {
        let mut table = Vec::with_capacity(n as usize + 1);
        let mut acc = 0.0_f64;
        table.push(T::zero());
        for i in 1..=n {
            acc += f64::from(i).ln();
            table.push(T::lit(acc));
        }
        Self { table }
    }

    pub fn max_n(&self) -> u32 {
        (self.table.len() - 1) as u32
    }

    #[inline]
    pub fn ln_factorial(&self, k: u32) -> T {
        self.table[k as usize]
    }

    /// `ln C(n, k)`; caller guarantees `k <= n <= max_n`.
    #[inline]
    pub fn ln_binomial(&self, n: u32, k: u32) -> T {
        self.table[n as usize] - self.table[k as usize] - self.table[(n - k) as usize]
    }

    /// `ln C(n, k)` for all `k = 0..=n`.
    pub fn binomial_row(&self, n: u32) -> Vec<T> {
        (0..=n).map(|k| self.ln_binomial(n, k)).collect()
    }
}

/// `ln C(n, k)` computed as `Σ_{i=1}^{m} ln((n - m + i) / i)`, `m = min(k, n-k)`.
pub fn log_binomial<T: Real>(n: u32, k: u32) -> Result<T> {
    if k > n {
        return Err(Error::Domain { n, k });
    }
    let m = k.min(n - k);
    let mut acc = 0.0_f64;
    for i in 1..=m {
        acc += (f64::from(n - m + i) / f64::from(i)).ln();
    }
    Ok(T::lit(acc))
}

/// Bloch sphere parametrization `α = cos(θ/2) e^{-iφ/2}`, `β = sin(θ/2) e^{iφ/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochAngles<T> {
    theta: T,
    phi: T,
}

impl<T: Real> BlochAngles<T> {
    /// `theta` must lie in `[0, π]` (a 1e-12 overshoot is clamped); `phi` is
    /// wrapped into `[-π, π]`.
    pub fn new(theta: T, phi: T) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(invalid("angles", "non-finite angle"));
        }
        let slack = T::lit(1e-12);
        if theta < -slack || theta > T::PI() + slack {
            return Err(invalid("theta", format!("{theta} outside [0, pi]")));
        }
        Ok(Self {
            theta: theta.max(T::zero()).min(T::PI()),
            phi: wrap_angle(phi),
        })
    }

    /// Accepts any real polar angle and folds it into `[0, π]`, adding `π` to
    /// `phi` when the fold reflects through the pole. The Bloch vector is
    /// unchanged.
    pub fn from_unnormalized(theta: T, phi: T) -> Self {
        let two_pi = T::TAU();
        let mut t = theta % two_pi;
        if t < T::zero() {
            t += two_pi;
        }
        let mut p = phi;
        if t > T::PI() {
            t = two_pi - t;
            p += T::PI();
        }
        Self {
            theta: t.min(T::PI()),
            phi: wrap_angle(p),
        }
    }

    #[inline]
    pub fn theta(&self) -> T {
        self.theta
    }

    #[inline]
    pub fn phi(&self) -> T {
        self.phi
    }

    /// `(α, β)` of the single-particle state.
    pub fn amplitudes(&self) -> (Complex<T>, Complex<T>) {
        let half = T::lit(0.5);
        let alpha = Complex::from_polar((self.theta * half).cos(), -self.phi * half);
        let beta = Complex::from_polar((self.theta * half).sin(), self.phi * half);
        (alpha, beta)
    }

    /// Ideal normalized spin `(cos φ sin θ, sin φ sin θ, cos θ)`.
    pub fn bloch_vector(&self) -> SpinVector<T> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        SpinVector::new(cp * st, sp * st, ct)
    }
}

/// `|α, β⟩⟩ = (α a† + β b†)^N |0⟩ / √N!`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinCoherentState<T> {
    n_particles: u32,
    alpha: Complex<T>,
    beta: Complex<T>,
}

impl<T: Real> SpinCoherentState<T> {
    pub fn new(n_particles: u32, alpha: Complex<T>, beta: Complex<T>) -> Result<Self> {
        if n_particles == 0 {
            return Err(invalid("n_particles", "must be positive"));
        }
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - T::one()).abs() > T::lit(1e-12) {
            return Err(Error::NotNormalized(norm.to_f64_lossy()));
        }
        Ok(Self {
            n_particles,
            alpha,
            beta,
        })
    }

    pub fn from_angles(n_particles: u32, angles: &BlochAngles<T>) -> Result<Self> {
        let (alpha, beta) = angles.amplitudes();
        Self::new(n_particles, alpha, beta)
    }

    pub fn n_particles(&self) -> u32 {
        self.n_particles
    }

    pub fn alpha(&self) -> Complex<T> {
        self.alpha
    }

    pub fn beta(&self) -> Complex<T> {
        self.beta
    }

    pub fn fock_amplitudes(&self) -> FockVector<T> {
        coherent_fock_amplitudes(self)
    }
}

/// Amplitudes over `|k⟩`, `k = 0..=N`, of one symmetric register.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector<T> {
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> FockVector<T> {
    pub fn new(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(invalid("amplitudes", "need N >= 1, i.e. at least two entries"));
        }
        Ok(Self { amplitudes })
    }

    /// `|k⟩` itself.
    pub fn basis(n_particles: u32, k: u32) -> Result<Self> {
        if k > n_particles {
            return Err(Error::Domain { n: n_particles, k });
        }
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); n_particles as usize + 1];
        amplitudes[k as usize] = Complex::new(T::one(), T::zero());
        Self::new(amplitudes)
    }

    pub fn n_particles(&self) -> u32 {
        (self.amplitudes.len() - 1) as u32
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Returns `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm <= T::min_positive_value() {
            return None;
        }
        Some(Self {
            amplitudes: self.amplitudes.iter().map(|c| c / norm).collect(),
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .fold(Complex::new(T::zero(), T::zero()), |acc, x| acc + x)
    }
}

/// Normalized collective spin `⟨S^{x,y,z}⟩ / N`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpinVector<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> SpinVector<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }

    pub fn to_array(&self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    /// Polar and azimuthal angle of the direction; `None` for the zero vector.
    pub fn direction(&self) -> Option<BlochAngles<T>> {
        let r = self.norm();
        if r <= T::zero() {
            return None;
        }
        let theta = (self.z / r).max(-T::one()).min(T::one()).acos();
        let phi = self.y.atan2(self.x);
        BlochAngles::new(theta, phi).ok()
    }
}

impl<T: Real> Sub for SpinVector<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl<T: Real> fmt::Display for SpinVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// `√C(N,k) α^k β^{N-k}` for every `k`, evaluated as log-magnitude plus phase
/// so that `C(N,k)` and `|α|^k` never overflow or underflow separately.
pub fn coherent_fock_amplitudes<T: Real>(state: &SpinCoherentState<T>) -> FockVector<T> {
    let n = state.n_particles;
    let lf = LogFactorials::<T>::new(n);
    let (ra, pa) = state.alpha.to_polar();
    let (rb, pb) = state.beta.to_polar();
    let (la, lb) = (ra.ln(), rb.ln());
    let half = T::lit(0.5);
    let amplitudes = (0..=n)
        .map(|k| {
            let kf = T::from_u32(k).unwrap();
            let rest = T::from_u32(n - k).unwrap();
            let mut log_mag = half * lf.ln_binomial(n, k);
            if k > 0 {
                log_mag += kf * la;
            }
            if k < n {
                log_mag += rest * lb;
            }
            let phase = kf * pa + rest * pb;
            Complex::from_polar(log_mag.exp(), phase)
        })
        .collect();
    FockVector { amplitudes }
}

/// `(⟨S^x⟩, ⟨S^y⟩, ⟨S^z⟩) / N` using `a†b |k⟩ = √((k+1)(N-k)) |k+1⟩`.
pub fn spin_expectations<T: Real>(vec: &FockVector<T>) -> SpinVector<T> {
    let n = vec.n_particles();
    let nf = T::from_u32(n).unwrap();
    let amps = &vec.amplitudes;
    let mut sz = T::zero();
    let mut raise = Complex::new(T::zero(), T::zero());
    for k in 0..=n {
        let c = amps[k as usize];
        sz += c.norm_sqr() * T::from_i64_lossy(2 * i64::from(k) - i64::from(n));
        if k < n {
            let m = T::from_u32((k + 1) * (n - k)).unwrap().sqrt();
            raise = raise + amps[k as usize + 1].conj() * c * m;
        }
    }
    let two = T::lit(2.0);
    SpinVector::new(two * raise.re / nf, two * raise.im / nf, sz / nf)
}
