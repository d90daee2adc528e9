//! Closed-form evaluation of the four-register teleportation protocol.
//!
//! Alice holds register 1 (the state to send) and ancillas 2 and 3; Bob holds
//! register 4. After the entangling sequence, registers 1–3 are measured in
//! the number basis with outcome `(k1, k2, k3)`, Alice sends the single bit
//! `σ1 = Sgn(2k1 - N)`, and Bob reinterprets his register's angles.

mod amplitudes;
mod correction;
mod distribution;
pub(crate) mod output;
mod peaks;

pub use amplitudes::{ab_amplitudes, amplitude_moduli_sq, joint_log_prob, AmplitudePair, ProtocolModel, Row};
pub use correction::{
    bob_conditional_state, bob_raw_angles, classical_correction, corrected_bob_spins, RawAngles,
    ThetaCorrection,
};
pub use distribution::{JointDistribution, OutcomeSampler};
pub use output::{bob_output, BobOutput};
pub use peaks::{peak_positions, PeakPositions, PeakValue};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Particle number and the four entangling times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig<T> {
    n_particles: u32,
    tau2: T,
    tau3: T,
    t2: T,
    t3: T,
}

impl<T: Real> ProtocolConfig<T> {
    /// Default times `τ2 = T2 = 1/√(2N)` and `τ3 = T3 = 1/√(8N)`.
    pub fn new(n_particles: u32) -> Result<Self> {
        if n_particles == 0 {
            return Err(invalid("n_particles", "must be positive"));
        }
        let n = T::from_u32(n_particles).unwrap();
        let two = (T::lit(2.0) * n).sqrt().recip();
        let eight = (T::lit(8.0) * n).sqrt().recip();
        Self::with_times(n_particles, two, eight, two, eight)
    }

    pub fn with_times(n_particles: u32, tau2: T, tau3: T, t2: T, t3: T) -> Result<Self> {
        if n_particles == 0 {
            return Err(invalid("n_particles", "must be positive"));
        }
        for (name, t) in [("tau2", tau2), ("tau3", tau3), ("t2", t2), ("t3", t3)] {
            if !(t > T::zero() && t.is_finite()) {
                return Err(invalid(name, format!("time must be positive and finite, got {t}")));
            }
        }
        Ok(Self {
            n_particles,
            tau2,
            tau3,
            t2,
            t3,
        })
    }

    pub fn n_particles(&self) -> u32 {
        self.n_particles
    }
    pub fn tau2(&self) -> T {
        self.tau2
    }
    pub fn tau3(&self) -> T {
        self.tau3
    }
    pub fn t2(&self) -> T {
        self.t2
    }
    pub fn t3(&self) -> T {
        self.t3
    }
}

/// The classical bit sent to Bob.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// `Sgn(s)` with `Sgn(0) = +1`.
    pub fn of(s: i64) -> Self {
        if s >= 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn value<T: Real>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }
}

/// A measurement record of registers 1, 2, 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OutcomeTriple {
    n_particles: u32,
    pub k1: u32,
    pub k2: u32,
    pub k3: u32,
}

impl OutcomeTriple {
    pub fn new(n_particles: u32, k1: u32, k2: u32, k3: u32) -> Result<Self> {
        for k in [k1, k2, k3] {
            if k > n_particles {
                return Err(Error::Domain { n: n_particles, k });
            }
        }
        Ok(Self {
            n_particles,
            k1,
            k2,
            k3,
        })
    }

    pub fn n_particles(&self) -> u32 {
        self.n_particles
    }

    fn s(&self, k: u32) -> i64 {
        2 * i64::from(k) - i64::from(self.n_particles)
    }

    pub fn s1(&self) -> i64 {
        self.s(self.k1)
    }
    pub fn s2(&self) -> i64 {
        self.s(self.k2)
    }
    pub fn s3(&self) -> i64 {
        self.s(self.k3)
    }

    pub fn sigma1(&self) -> Sign {
        Sign::of(self.s1())
    }
}

/// Keep only `k1 <= k1_cut` or `k1 >= N - k1_cut`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PostselectionRule {
    k1_cut: u32,
}

impl PostselectionRule {
    pub fn new(n_particles: u32, k1_cut: u32) -> Result<Self> {
        if k1_cut > n_particles / 2 {
            return Err(invalid(
                "k1_cut",
                format!("{k1_cut} exceeds N/2 = {}", n_particles / 2),
            ));
        }
        Ok(Self { k1_cut })
    }

    /// `k1_cut = ⌊N/2⌋`, which accepts every outcome.
    pub fn unconditional(n_particles: u32) -> Self {
        Self {
            k1_cut: n_particles / 2,
        }
    }

    pub fn k1_cut(&self) -> u32 {
        self.k1_cut
    }

    pub fn accepts(&self, n_particles: u32, k1: u32) -> bool {
        k1 <= self.k1_cut || k1 + self.k1_cut >= n_particles
    }

    /// Accepted `k1` values in increasing order, each once.
    pub fn accepted(&self, n_particles: u32) -> impl Iterator<Item = u32> + '_ {
        (0..=n_particles).filter(move |&k1| self.accepts(n_particles, k1))
    }
}
