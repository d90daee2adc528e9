//! Gaussian-averaged dephasing during the four entangling steps.
//!
//! A random phase `ξ` with variance `γt` accumulated over a step shifts the
//! angles it couples to by `2ξ`. On the measurement side Alice's `θ` and `φ`
//! pick up shifts with variances `γτ3` and `γτ2`; Bob's raw `θ_B`, `φ_B` pick
//! up shifts with variances `γT3` and `γT2`. The two sides are treated
//! independently, following the closed-form model literally.

use crate::bounds::trace_distance;
use crate::error::{invalid, Result};
use crate::protocol::output::{corrected_spin, postselected_average, RowMass};
use crate::protocol::{
    bob_raw_angles, classical_correction, BobOutput, JointDistribution, OutcomeTriple, PostselectionRule,
    ProtocolConfig, ProtocolModel, RawAngles, ThetaCorrection,
};
use crate::quadrature::{QuadratureKind, QuadratureRule};
use crate::scalar::{CompensatedSum, Real};
use crate::spin::{BlochAngles, SpinVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingConfig<T> {
    gamma: T,
    tau2: T,
    tau3: T,
    t2: T,
    t3: T,
}

impl<T: Real> DephasingConfig<T> {
    /// Rate `gamma` with the step durations taken from `cfg`.
    pub fn new(gamma: T, cfg: &ProtocolConfig<T>) -> Result<Self> {
        Self::with_durations(gamma, cfg.tau2(), cfg.tau3(), cfg.t2(), cfg.t3())
    }

    pub fn with_durations(gamma: T, tau2: T, tau3: T, t2: T, t3: T) -> Result<Self> {
        if !(gamma >= T::zero() && gamma.is_finite()) {
            return Err(invalid("gamma", format!("must be finite and nonnegative, got {gamma}")));
        }
        for (name, t) in [("tau2", tau2), ("tau3", tau3), ("t2", t2), ("t3", t3)] {
            if !(t >= T::zero() && t.is_finite()) {
                return Err(invalid(name, format!("duration must be finite and nonnegative, got {t}")));
            }
        }
        Ok(Self {
            gamma,
            tau2,
            tau3,
            t2,
            t3,
        })
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// `(τ2, τ3, T2, T3)`.
    pub fn durations(&self) -> [T; 4] {
        [self.tau2, self.tau3, self.t2, self.t3]
    }
}

/// Coherence `(k, k')` after dephasing for time `t`: `exp(-2γt(k-k')²)`.
pub fn dephasing_factor<T: Real>(gamma: T, t: T, k: i64, k_prime: i64) -> T {
    let d = T::from_i64_lossy(k - k_prime);
    (-T::lit(2.0) * gamma * t * d * d).exp()
}

pub const MIN_NODES: usize = 20;
pub const DEFAULT_NODES: usize = 40;

fn check_rule<T: Real>(quad: &QuadratureRule<T>) -> Result<()> {
    if quad.kind() != QuadratureKind::GaussHermite {
        return Err(invalid("quadrature", "dephasing averages need a Gauss-Hermite rule"));
    }
    if quad.len() < MIN_NODES {
        return Err(invalid(
            "quadrature",
            format!("need at least {MIN_NODES} nodes, got {}", quad.len()),
        ));
    }
    Ok(())
}

/// Product nodes `(2σ_a z_i, 2σ_b z_j, w_i w_j)` for two independent shifts.
fn shift_nodes<T: Real>(quad: &QuadratureRule<T>, var_a: T, var_b: T) -> Vec<(T, T, T)> {
    let two = T::lit(2.0);
    let (sa, sb) = (var_a.sqrt(), var_b.sqrt());
    if var_a == T::zero() && var_b == T::zero() {
        return vec![(T::zero(), T::zero(), T::one())];
    }
    let mut out = Vec::with_capacity(quad.len() * quad.len());
    for (za, wa) in quad.iter() {
        for (zb, wb) in quad.iter() {
            out.push((two * sa * za, two * sb * zb, wa * wb));
        }
    }
    out
}

fn alice_models<T: Real>(
    cfg: &ProtocolConfig<T>,
    deph: &DephasingConfig<T>,
    alice: &BlochAngles<T>,
    quad: &QuadratureRule<T>,
) -> Result<Vec<(ProtocolModel<T>, T)>> {
    check_rule(quad)?;
    let g = deph.gamma;
    Ok(shift_nodes(quad, g * deph.tau3, g * deph.tau2)
        .into_iter()
        .map(|(dt, dp, w)| (ProtocolModel::from_raw_angles(cfg, alice.theta() + dt, alice.phi() + dp), w))
        .collect())
}

/// `E_{ξ,ξ'}[p(k1, k2, k3 | θ + 2ξ, φ + 2ξ')]` with `Var ξ = γτ3`, `Var ξ' = γτ2`.
pub fn dephased_joint_prob<T: Real>(
    cfg: &ProtocolConfig<T>,
    deph: &DephasingConfig<T>,
    alice: &BlochAngles<T>,
    out: &OutcomeTriple,
    quad: &QuadratureRule<T>,
) -> Result<T> {
    let models = alice_models(cfg, deph, alice, quad)?;
    let acc: CompensatedSum<T> = models.iter().map(|(m, w)| *w * m.log_prob(out).exp()).collect();
    Ok(acc.value())
}

/// `p(k1, ·, k3)` under dephasing, as a function of `k2`.
pub fn dephased_slice_over_k2<T: Real>(
    cfg: &ProtocolConfig<T>,
    deph: &DephasingConfig<T>,
    alice: &BlochAngles<T>,
    k1: u32,
    k3: u32,
    quad: &QuadratureRule<T>,
) -> Result<Vec<T>> {
    let n = cfg.n_particles();
    let models = alice_models(cfg, deph, alice, quad)?;
    (0..=n)
        .map(|k2| {
            let out = OutcomeTriple::new(n, k1, k2, k3)?;
            let acc: CompensatedSum<T> = models.iter().map(|(m, w)| *w * m.log_prob(&out).exp()).collect();
            Ok(acc.value())
        })
        .collect()
}

/// Full dephased table in the [`JointDistribution`] layout.
pub fn dephased_distribution<T: Real>(
    cfg: &ProtocolConfig<T>,
    deph: &DephasingConfig<T>,
    alice: &BlochAngles<T>,
    quad: &QuadratureRule<T>,
) -> Result<JointDistribution<T>> {
    let n = cfg.n_particles();
    if n > JointDistribution::<T>::MAX_MATERIALIZED_N {
        return Err(crate::Error::Resource {
            n,
            limit: JointDistribution::<T>::MAX_MATERIALIZED_N,
        });
    }
    let side = n as usize + 1;
    let models = alice_models(cfg, deph, alice, quad)?;
    let mut sums = vec![CompensatedSum::new(); side * side * side];
    let mut buf = vec![T::zero(); side];
    for (m, w) in &models {
        for k2 in 0..=n {
            for k3 in 0..=n {
                m.fill_row_probs(k2, k3, &mut buf);
                let base = k2 as usize * side + k3 as usize;
                for (k1, p) in buf.iter().enumerate() {
                    sums[k1 * side * side + base].add(*w * *p);
                }
            }
        }
    }
    let probs: Vec<T> = sums.iter().map(|s| s.value()).collect();
    JointDistribution::from_probabilities(cfg, alice, &probs)
}

fn bob_shift_nodes<T: Real>(
    deph: &DephasingConfig<T>,
    quad: &QuadratureRule<T>,
) -> Result<Vec<(T, T, T)>> {
    check_rule(quad)?;
    let g = deph.gamma;
    Ok(shift_nodes(quad, g * deph.t3, g * deph.t2))
}

/// Bob's corrected spin averaged over the Gaussian mixture of coherent states
/// with `θ_B → θ_B + 2ξ`, `φ_B → φ_B + 2ξ'`, `Var ξ = γT3`, `Var ξ' = γT2`.
///
/// The correction is applied to each mixture component and the corrected
/// vectors are averaged.
pub fn dephased_bob_spins<T: Real>(
    cfg: &ProtocolConfig<T>,
    deph: &DephasingConfig<T>,
    out: &OutcomeTriple,
    quad: &QuadratureRule<T>,
    variant: ThetaCorrection,
) -> Result<SpinVector<T>> {
    let raw = bob_raw_angles(cfg, out);
    let sigma = out.sigma1();
    let (mut x, mut y, mut z) = (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
    for (dt, dp, w) in bob_shift_nodes(deph, quad)? {
        let shifted = RawAngles {
            theta: raw.theta + dt,
            phi: raw.phi + dp,
        };
        let v = classical_correction(sigma, shifted, variant).bloch_vector();
        x.add(w * v.x);
        y.add(w * v.y);
        z.add(w * v.z);
    }
    Ok(SpinVector::new(x.value(), y.value(), z.value()))
}

/// Closed form of [`dephased_bob_spins`]: every correction variant is affine
/// in `θ_B` with unit slope, so `E[cos(a + 2ξ)] = e^{-2 Var ξ} cos a` gives
/// transverse damping `e^{-2γ(T2+T3)}` and longitudinal damping `e^{-2γT3}`.
pub fn dephased_bob_spins_closed_form<T: Real>(
    cfg: &ProtocolConfig<T>,
    deph: &DephasingConfig<T>,
    out: &OutcomeTriple,
    variant: ThetaCorrection,
) -> SpinVector<T> {
    let v = classical_correction(out.sigma1(), bob_raw_angles(cfg, out), variant).bloch_vector();
    damp(deph, v)
}

fn damp<T: Real>(deph: &DephasingConfig<T>, v: SpinVector<T>) -> SpinVector<T> {
    let two = T::lit(2.0);
    let dz = (-two * deph.gamma * deph.t3).exp();
    let dxy = (-two * deph.gamma * (deph.t2 + deph.t3)).exp();
    SpinVector::new(v.x * dxy, v.y * dxy, v.z * dz)
}

/// Postselected Bob output with dephased outcome weights and dephased spins.
pub fn dephased_bob_output<T: Real>(
    cfg: &ProtocolConfig<T>,
    deph: &DephasingConfig<T>,
    alice: &BlochAngles<T>,
    rule: &PostselectionRule,
    quad: &QuadratureRule<T>,
    variant: ThetaCorrection,
) -> Result<BobOutput<T>> {
    let n = cfg.n_particles();
    let models = alice_models(cfg, deph, alice, quad)?;
    let masses: Vec<_> = models
        .iter()
        .map(|(m, w)| (m, *w, RowMass::new(n, m.ln_binomials(), rule)))
        .collect();
    postselected_average(
        n,
        |k2, k3| {
            let mut buf = vec![T::zero(); n as usize + 1];
            let (mut plus, mut minus) = (CompensatedSum::new(), CompensatedSum::new());
            for (m, w, mass) in &masses {
                let (p, q) = mass.eval(&m.row(k2, k3), &mut buf);
                plus.add(*w * p);
                minus.add(*w * q);
            }
            (plus.value(), minus.value())
        },
        |sigma, k2, k3| damp(deph, corrected_spin(cfg, sigma, k2, k3, variant)),
    )
}

/// Mean trace distance along the equator `θ = π/2` at `n_points` midpoints in `φ`.
pub fn dephased_equator_error<T: Real>(
    cfg: &ProtocolConfig<T>,
    deph: &DephasingConfig<T>,
    rule: &PostselectionRule,
    quad: &QuadratureRule<T>,
    variant: ThetaCorrection,
    n_points: usize,
) -> Result<T> {
    if n_points == 0 {
        return Err(invalid("n_points", "must be positive"));
    }
    let step = T::TAU() / T::from_usize_lossy(n_points);
    let mut acc = CompensatedSum::new();
    for j in 0..n_points {
        let phi = -T::PI() + step * (T::from_usize_lossy(j) + T::lit(0.5));
        let alice = BlochAngles::new(T::FRAC_PI_2(), phi)?;
        let out = dephased_bob_output(cfg, deph, &alice, rule, quad, variant)?;
        acc.add(trace_distance(&alice, &out.spins));
    }
    Ok(acc.value() / T::from_usize_lossy(n_points))
}
