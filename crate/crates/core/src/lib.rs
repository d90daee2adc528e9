//! Teleportation of spin coherent states over the full Bloch sphere.
//!
//! The library is generic over the working scalar (`f32` or `f64`) through
//! [`Real`]; the `*F64` aliases at the crate root fix it to `f64`.

pub mod bounds;
pub mod dephasing;
pub mod error;
pub mod oracle;
pub mod protocol;
pub mod quadrature;
pub mod scalar;
pub mod spin;

pub use error::{Error, Result};
pub use protocol::{
    bob_output, peak_positions, BobOutput, JointDistribution, OutcomeTriple, PeakPositions, PeakValue, PostselectionRule,
    ProtocolConfig, Sign, ThetaCorrection,
};
pub use quadrature::{QuadratureKind, QuadratureRule, SphereGrid};
pub use scalar::Real;
pub use spin::{BlochAngles, FockVector, SpinCoherentState, SpinVector};

pub type BlochAnglesF64 = BlochAngles<f64>;
pub type SpinVectorF64 = SpinVector<f64>;
pub type SpinCoherentStateF64 = SpinCoherentState<f64>;
pub type FockVectorF64 = FockVector<f64>;
pub type ProtocolConfigF64 = ProtocolConfig<f64>;
pub type JointDistributionF64 = JointDistribution<f64>;
pub type QuadratureRuleF64 = QuadratureRule<f64>;
pub type SphereGridF64 = SphereGrid<f64>;
