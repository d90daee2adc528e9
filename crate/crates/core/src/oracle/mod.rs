//! Brute-force simulation on the full four-register product space.
//!
//! Small `N` only; this is the reference the closed-form engine is checked
//! against.

mod monte_carlo;
mod run;
mod state;
mod unitary;

pub use monte_carlo::{dephase_monte_carlo, single_register_coherences, trajectory_rng, MonteCarloRun, MAX_MC_N};
pub use run::{run_protocol_exact, BobGateOrder, ExactRun};
pub use state::{MultiRegisterState, REGISTERS};
pub use unitary::{mode_unitary_matrix, ModeUnitary, MAX_EXACT_FACTORIAL_N};

use crate::bounds::trace_distance;
use crate::protocol::OutcomeTriple;
use crate::scalar::Real;
use crate::spin::{BlochAngles, SpinVector};

/// Mean trace distance to Alice of the corrected Bob spins at the modal
/// `(k2, k3)` for `k1 = 0` and `k1 = N`.
pub fn extremal_error<T: Real>(run: &ExactRun<T>, alice: &BlochAngles<T>) -> T {
    let n = run.n_particles();
    let mut acc = T::zero();
    for k1 in [0, n] {
        let mut best: Option<(T, OutcomeTriple)> = None;
        for k2 in 0..=n {
            for k3 in 0..=n {
                let out = OutcomeTriple::new(n, k1, k2, k3).expect("indices within range");
                let p = run.prob(&out);
                if best.is_none_or(|(q, _)| p > q) {
                    best = Some((p, out));
                }
            }
        }
        let (_, out) = best.expect("nonempty outcome space");
        let spin = run.corrected_spins(&out).unwrap_or(SpinVector::zero());
        acc += trace_distance(alice, &spin);
    }
    acc * T::lit(0.5)
}
