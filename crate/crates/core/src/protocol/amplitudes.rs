use num_complex::Complex;

use super::{OutcomeTriple, ProtocolConfig};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spin::{BlochAngles, LogFactorials};

/// Register-1 amplitudes `(A_{k2k3}, B_{k2k3})` after the second Hadamard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudePair<T> {
    pub a: Complex<T>,
    pub b: Complex<T>,
}

/// `x = φ/2 - s2 τ2` and `y = s3 τ3`:
///
/// ```text
/// A =  cos x sin(π/4 + θ/2 + y) + i sin x sin(π/4 - θ/2 + y)
/// B = -cos x sin(π/4 - θ/2 - y) - i sin x sin(π/4 + θ/2 - y)
/// ```
pub fn ab_amplitudes<T: Real>(alice: &BlochAngles<T>, x: T, y: T) -> AmplitudePair<T> {
    let [c1, c2, c3, c4] = sine_factors(alice.theta(), y);
    let (sx, cx) = x.sin_cos();
    AmplitudePair {
        a: Complex::new(cx * c1, sx * c2),
        b: Complex::new(-cx * c3, -sx * c4),
    }
}

#[inline]
fn sine_factors<T: Real>(theta: T, y: T) -> [T; 4] {
    let q = T::FRAC_PI_4();
    let h = theta * T::lit(0.5);
    [
        (q + h + y).sin(),
        (q - h + y).sin(),
        (q - h - y).sin(),
        (q + h - y).sin(),
    ]
}

/// `(|A|², |B|²)` as sums of squares, which keeps both accurate when one of
/// them is tiny. Valid for any real `theta`.
#[inline]
pub fn amplitude_moduli_sq<T: Real>(theta: T, x: T, y: T) -> (T, T) {
    let [c1, c2, c3, c4] = sine_factors(theta, y);
    let (sx, cx) = x.sin_cos();
    let (cx2, sx2) = (cx * cx, sx * sx);
    (cx2 * c1 * c1 + sx2 * c2 * c2, cx2 * c3 * c3 + sx2 * c4 * c4)
}

/// Log-domain factors shared by every `k1` in one `(k2, k3)` row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row<T> {
    /// `ln(C(N,k2) C(N,k3) / 4^N)`.
    pub ln_weight: T,
    pub ln_a2: T,
    pub ln_b2: T,
}

impl<T: Real> Row<T> {
    /// `ln p(k1, k2, k3)` given `ln C(N, k1)`, with `0 · ln 0 = 0`.
    #[inline]
    pub fn ln_prob(&self, n: u32, k1: u32, ln_binom_k1: T) -> T {
        let mut lp = self.ln_weight + ln_binom_k1;
        if k1 > 0 {
            lp += T::from_u32(k1).unwrap() * self.ln_a2;
        }
        if k1 < n {
            lp += T::from_u32(n - k1).unwrap() * self.ln_b2;
        }
        lp
    }
}

impl<T: Real> Row<T> {
    /// Fills `out[k1] = p(k1, k2, k3)` for every `k1` (`out.len() == N + 1`).
    ///
    /// Only the modal entry goes through `exp`; the rest follow from the
    /// binomial ratio `p(k1+1)/p(k1) = (N-k1)/(k1+1) · |A|²/|B|²`, walking
    /// outwards so that every product decreases and underflows cleanly.
    pub fn fill_probs(&self, n: u32, ln_binom: &[T], out: &mut [T]) {
        debug_assert_eq!(out.len(), n as usize + 1);
        out.iter_mut().for_each(|p| *p = T::zero());
        let (a2, b2) = (self.ln_a2.exp(), self.ln_b2.exp());
        if !(a2 > T::zero()) {
            out[0] = self.ln_prob(n, 0, ln_binom[0]).exp();
            return;
        }
        if !(b2 > T::zero()) {
            out[n as usize] = self.ln_prob(n, n, ln_binom[n as usize]).exp();
            return;
        }
        let nf = T::from_u32(n).unwrap();
        let mode = ((nf + T::one()) * a2).floor().to_f64_lossy().clamp(0.0, f64::from(n)) as u32;
        let m = mode as usize;
        out[m] = self.ln_prob(n, mode, ln_binom[m]).exp();
        let up = a2 / b2;
        let down = b2 / a2;
        for k in m..n as usize {
            let r = T::from_usize_lossy(n as usize - k) / T::from_usize_lossy(k + 1);
            out[k + 1] = out[k] * r * up;
        }
        for k in (1..=m).rev() {
            let r = T::from_usize_lossy(k) / T::from_usize_lossy(n as usize - k + 1);
            out[k - 1] = out[k] * r * down;
        }
    }
}

/// Row-wise evaluator of the joint distribution for fixed Alice angles.
///
/// The polar angle is taken as a plain real so that Gaussian-shifted angles
/// (which leave `[0, π]`) go through the same formulas.
#[derive(Debug, Clone)]
pub struct ProtocolModel<T> {
    cfg: ProtocolConfig<T>,
    theta: T,
    phi: T,
    ln_binom: Vec<T>,
    ln_four_n: T,
}

impl<T: Real> ProtocolModel<T> {
    pub fn new(cfg: &ProtocolConfig<T>, alice: &BlochAngles<T>) -> Self {
        Self::from_raw_angles(cfg, alice.theta(), alice.phi())
    }

    pub fn from_raw_angles(cfg: &ProtocolConfig<T>, theta: T, phi: T) -> Self {
        let n = cfg.n_particles();
        let lf = LogFactorials::new(n);
        Self {
            cfg: *cfg,
            theta,
            phi,
            ln_binom: lf.binomial_row(n),
            ln_four_n: T::from_u32(n).unwrap() * T::lit(4.0).ln(),
        }
    }

    pub fn config(&self) -> &ProtocolConfig<T> {
        &self.cfg
    }

    pub fn n_particles(&self) -> u32 {
        self.cfg.n_particles()
    }

    /// `ln C(N, k)` for `k = 0..=N`.
    pub fn ln_binomials(&self) -> &[T] {
        &self.ln_binom
    }

    fn s(&self, k: u32) -> T {
        T::from_i64_lossy(2 * i64::from(k) - i64::from(self.cfg.n_particles()))
    }

    /// `x = φ/2 - s2 τ2`.
    pub fn x(&self, k2: u32) -> T {
        self.phi * T::lit(0.5) - self.s(k2) * self.cfg.tau2()
    }

    /// `y = s3 τ3`.
    pub fn y(&self, k3: u32) -> T {
        self.s(k3) * self.cfg.tau3()
    }

    pub fn row(&self, k2: u32, k3: u32) -> Row<T> {
        let (a2, b2) = amplitude_moduli_sq(self.theta, self.x(k2), self.y(k3));
        Row {
            ln_weight: self.ln_binom[k2 as usize] + self.ln_binom[k3 as usize] - self.ln_four_n,
            ln_a2: a2.ln(),
            ln_b2: b2.ln(),
        }
    }

    pub fn log_prob(&self, out: &OutcomeTriple) -> T {
        let row = self.row(out.k2, out.k3);
        row.ln_prob(self.n_particles(), out.k1, self.ln_binom[out.k1 as usize])
    }

    /// Writes `p(k1, k2, k3)` for every `k1` into `out` (length `N + 1`).
    pub fn fill_row_probs(&self, k2: u32, k3: u32, out: &mut [T]) {
        self.row(k2, k3).fill_probs(self.n_particles(), &self.ln_binom, out);
    }
}

/// `ln p(k1, k2, k3)`; `-∞` when the outcome is impossible.
pub fn joint_log_prob<T: Real>(
    cfg: &ProtocolConfig<T>,
    alice: &BlochAngles<T>,
    out: &OutcomeTriple,
) -> Result<T> {
    if out.n_particles() != cfg.n_particles() {
        return Err(Error::InvalidParameter {
            name: "outcome",
            reason: format!(
                "outcome built for N = {}, config has N = {}",
                out.n_particles(),
                cfg.n_particles()
            ),
        });
    }
    Ok(ProtocolModel::new(cfg, alice).log_prob(out))
}
