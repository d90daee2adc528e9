use num_complex::Complex;

use super::{OutcomeTriple, ProtocolConfig, Sign};
use crate::error::Result;
use crate::scalar::Real;
use crate::spin::{BlochAngles, SpinCoherentState, SpinVector};

/// Which map Bob applies to his polar angle after receiving `σ1`.
///
/// All three share `φ' = φ_B + π(1 - σ1)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ThetaCorrection {
    /// `θ' = σ1 θ_B + π/2`.
    Literal,
    /// `θ' = -σ1 (θ_B + π/2)`.
    DerivedInverse,
    /// `θ' = π/2 - σ1 θ_B`. Inverts `|A|² = (1 + n·m)/2` at the extremal
    /// outcomes, where Alice's vector is `σ1` times Bob's reflected vector.
    #[default]
    Reflected,
}

impl ThetaCorrection {
    pub const ALL: [ThetaCorrection; 3] = [Self::Literal, Self::DerivedInverse, Self::Reflected];

    pub fn name(self) -> &'static str {
        match self {
            Self::Literal => "literal",
            Self::DerivedInverse => "derived-inverse",
            Self::Reflected => "reflected",
        }
    }
}

impl std::str::FromStr for ThetaCorrection {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown correction '{s}' (literal, derived-inverse, reflected)"))
    }
}

/// Bob's angles before correction; `theta` may lie outside `[0, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawAngles<T> {
    pub theta: T,
    pub phi: T,
}

/// `(θ_B, φ_B) = (2 s3 T3, 2 s2 T2)`.
pub fn bob_raw_angles<T: Real>(cfg: &ProtocolConfig<T>, out: &OutcomeTriple) -> RawAngles<T> {
    let two = T::lit(2.0);
    RawAngles {
        theta: two * T::from_i64_lossy(out.s3()) * cfg.t3(),
        phi: two * T::from_i64_lossy(out.s2()) * cfg.t2(),
    }
}

/// Register 4 after the measurement: `|cos(s3 T3) e^{-i s2 T2}, sin(s3 T3) e^{i s2 T2}⟩⟩`.
pub fn bob_conditional_state<T: Real>(
    cfg: &ProtocolConfig<T>,
    out: &OutcomeTriple,
) -> Result<SpinCoherentState<T>> {
    let half = T::lit(0.5);
    let raw = bob_raw_angles(cfg, out);
    let (s, c) = (raw.theta * half).sin_cos();
    let alpha = Complex::from_polar(c, -raw.phi * half);
    let beta = Complex::from_polar(s, raw.phi * half);
    SpinCoherentState::new(cfg.n_particles(), alpha, beta)
}

pub fn classical_correction<T: Real>(sigma: Sign, raw: RawAngles<T>, variant: ThetaCorrection) -> BlochAngles<T> {
    let sg: T = sigma.value();
    let h = T::FRAC_PI_2();
    let theta = match variant {
        ThetaCorrection::Literal => sg * raw.theta + h,
        ThetaCorrection::DerivedInverse => -sg * (raw.theta + h),
        ThetaCorrection::Reflected => h - sg * raw.theta,
    };
    let phi = match sigma {
        Sign::Plus => raw.phi,
        Sign::Minus => raw.phi + T::PI(),
    };
    BlochAngles::from_unnormalized(theta, phi)
}

/// Normalized spin of Bob's corrected coherent state for one outcome.
pub fn corrected_bob_spins<T: Real>(
    cfg: &ProtocolConfig<T>,
    out: &OutcomeTriple,
    variant: ThetaCorrection,
) -> SpinVector<T> {
    classical_correction(out.sigma1(), bob_raw_angles(cfg, out), variant).bloch_vector()
}
