use num_complex::Complex;

use super::state::MultiRegisterState;
use super::unitary::{mode_unitary_matrix, ModeUnitary};
use crate::error::{Error, Result};
use crate::protocol::{classical_correction, OutcomeTriple, ProtocolConfig, RawAngles, ThetaCorrection};
use crate::scalar::Real;
use crate::spin::{spin_expectations, wrap_angle, BlochAngles, FockVector, SpinCoherentState, SpinVector};

/// Order of Bob's three gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BobGateOrder {
    /// `S^z_3 S^z_4` for `T3`, Hadamard on 4, `S^z_2 S^z_4` for `T2`. Produces
    /// Bob's state `|cos(s3T3) e^{-is2T2}, sin(s3T3) e^{is2T2}⟩⟩`.
    #[default]
    FinalStateOrder,
    /// `S^z_2 S^z_4` for `T2`, Hadamard on 4, `S^z_3 S^z_4` for `T3`, which
    /// yields `|cos(s2T2) e^{-is3T3}, sin(s2T2) e^{is3T3}⟩⟩` instead.
    AsListed,
}

/// The three lifted Hadamards for a given `N`.
#[derive(Debug, Clone)]
pub(crate) struct Gates<T> {
    pub h1: Vec<Complex<T>>,
    pub h2: Vec<Complex<T>>,
    pub h_bob: Vec<Complex<T>>,
}

impl<T: Real> Gates<T> {
    pub fn new(n: u32) -> Result<Self> {
        Ok(Self {
            h1: mode_unitary_matrix(n, &ModeUnitary::hadamard_first())?,
            h2: mode_unitary_matrix(n, &ModeUnitary::hadamard_second())?,
            h_bob: mode_unitary_matrix(n, &ModeUnitary::hadamard_bob())?,
        })
    }
}

/// Alice's coherent state in register 1 and `θ = π/2, φ = 0` ancillas.
pub(crate) fn initial_state<T: Real>(n: u32, alice: &BlochAngles<T>) -> Result<MultiRegisterState<T>> {
    if n > MultiRegisterState::<T>::MAX_N {
        return Err(Error::Resource {
            n,
            limit: MultiRegisterState::<T>::MAX_N,
        });
    }
    let a = SpinCoherentState::from_angles(n, alice)?.fock_amplitudes();
    let anc = SpinCoherentState::from_angles(n, &BlochAngles::new(T::FRAC_PI_2(), T::zero())?)?.fock_amplitudes();
    MultiRegisterState::product([&a, &anc, &anc, &anc])
}

/// One entangling step: registers (0-based), duration, Hamiltonian sign.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Entangler<T> {
    pub i: usize,
    pub j: usize,
    pub t: T,
    pub sign: T,
}

/// Entangling steps in execution order, each followed by an optional
/// single-register gate. Index into [`Gates`]: 0 = h1 on 1, 1 = h2 on 1,
/// 2 = h_bob on 4, none after the last step.
pub(crate) fn schedule<T: Real>(cfg: &ProtocolConfig<T>, order: BobGateOrder) -> [(Entangler<T>, Option<usize>); 4] {
    let minus = -T::one();
    let plus = T::one();
    let e = |i, j, t, sign| Entangler { i, j, t, sign };
    let (bob_first, bob_last) = match order {
        BobGateOrder::FinalStateOrder => (e(2, 3, cfg.t3(), plus), e(1, 3, cfg.t2(), plus)),
        BobGateOrder::AsListed => (e(1, 3, cfg.t2(), plus), e(2, 3, cfg.t3(), plus)),
    };
    [
        (e(0, 1, cfg.tau2(), minus), Some(0)),
        (e(0, 2, cfg.tau3(), minus), Some(1)),
        (bob_first, Some(2)),
        (bob_last, None),
    ]
}

pub(crate) fn apply_gate<T: Real>(st: &mut MultiRegisterState<T>, gates: &Gates<T>, g: usize) {
    match g {
        0 => st.apply_register_matrix(0, &gates.h1),
        1 => st.apply_register_matrix(0, &gates.h2),
        _ => st.apply_register_matrix(3, &gates.h_bob),
    }
}

/// Bob's raw parametrization recovered from a coherent state: of the two
/// angle pairs `(t, f)` and `(-t, f + π)` describing the same vector, the one
/// whose azimuth is nearest `2 s2 T2`.
///
/// At the pole the state carries no azimuth, yet the correction sends it to
/// the equator; there `2 s2 T2` itself is used.
pub(crate) fn raw_angles_from_state<T: Real>(
    cfg: &ProtocolConfig<T>,
    out: &OutcomeTriple,
    spins: &SpinVector<T>,
) -> RawAngles<T> {
    let target = T::lit(2.0) * T::from_i64_lossy(out.s2()) * cfg.t2();
    let Some(dir) = spins.direction() else {
        return RawAngles { theta: T::zero(), phi: target };
    };
    let (t, f) = (dir.theta(), dir.phi());
    if t < T::lit(1e-7) {
        return RawAngles { theta: t, phi: target };
    }
    let alt = f + T::PI();
    if wrap_angle(f - target).abs() <= wrap_angle(alt - target).abs() {
        RawAngles { theta: t, phi: f }
    } else {
        RawAngles { theta: -t, phi: alt }
    }
}

/// Everything the brute-force run produces, indexed like the analytic table.
#[derive(Debug, Clone)]
pub struct ExactRun<T> {
    n_particles: u32,
    dist: Vec<T>,
    bob_states: Vec<Option<FockVector<T>>>,
    corrected: Vec<Option<SpinVector<T>>>,
    final_state: MultiRegisterState<T>,
}

impl<T: Real> ExactRun<T> {
    pub fn n_particles(&self) -> u32 {
        self.n_particles
    }

    fn index(&self, out: &OutcomeTriple) -> usize {
        let s = self.n_particles as usize + 1;
        (out.k1 as usize * s + out.k2 as usize) * s + out.k3 as usize
    }

    /// Joint `p(k1, k2, k3)`, `k1` slowest.
    pub fn distribution(&self) -> &[T] {
        &self.dist
    }

    pub fn prob(&self, out: &OutcomeTriple) -> T {
        self.dist[self.index(out)]
    }

    /// Bob's normalized conditional state; `None` for zero-probability outcomes.
    pub fn bob_state(&self, out: &OutcomeTriple) -> Option<&FockVector<T>> {
        self.bob_states[self.index(out)].as_ref()
    }

    pub fn corrected_spins(&self, out: &OutcomeTriple) -> Option<SpinVector<T>> {
        self.corrected[self.index(out)]
    }

    pub fn final_state(&self) -> &MultiRegisterState<T> {
        &self.final_state
    }
}

/// Runs the seven unitary steps on the full product space, measures
/// registers 1–3 and applies the classical correction to each conditional
/// Bob state.
pub fn run_protocol_exact<T: Real>(
    cfg: &ProtocolConfig<T>,
    alice: &BlochAngles<T>,
    variant: ThetaCorrection,
    order: BobGateOrder,
) -> Result<ExactRun<T>> {
    let n = cfg.n_particles();
    let mut st = initial_state(n, alice)?;
    let gates = Gates::new(n)?;
    for (ent, gate) in schedule(cfg, order) {
        st.apply_zz_phase(ent.i, ent.j, ent.t, ent.sign)?;
        check_norm(&st)?;
        if let Some(g) = gate {
            apply_gate(&mut st, &gates, g);
            check_norm(&st)?;
        }
    }
    let dist = st.measured_distribution();
    let side = n as usize + 1;
    let mut bob_states = Vec::with_capacity(dist.len());
    let mut corrected = Vec::with_capacity(dist.len());
    for (idx, &p) in dist.iter().enumerate() {
        let out = OutcomeTriple::new(n, (idx / (side * side)) as u32, ((idx / side) % side) as u32, (idx % side) as u32)?;
        let bob = FockVector::new(st.bob_amplitudes(out.k1, out.k2, out.k3).to_vec())?.normalized();
        let bob = if p > T::lit(1e-28) { bob } else { None };
        let spin = bob.as_ref().map(|b| {
            let v = spin_expectations(b);
            let raw = raw_angles_from_state(cfg, &out, &v);
            classical_correction(out.sigma1(), raw, variant).bloch_vector().scale(v.norm())
        });
        bob_states.push(bob);
        corrected.push(spin);
    }
    Ok(ExactRun {
        n_particles: n,
        dist,
        bob_states,
        corrected,
        final_state: st,
    })
}

fn check_norm<T: Real>(st: &MultiRegisterState<T>) -> Result<()> {
    let dev = (st.norm_sqr() - T::one()).abs().to_f64_lossy();
    if dev > 1e-10 {
        return Err(Error::NotNormalized(dev));
    }
    Ok(())
}
