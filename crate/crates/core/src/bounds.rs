//! Trace-distance error and the two classical baselines.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::protocol::{bob_output, PostselectionRule, ProtocolConfig, ThetaCorrection};
use crate::quadrature::{QuadratureRule, SphereGrid};
use crate::scalar::{CompensatedSum, Real};
use crate::spin::{BlochAngles, SpinVector};

/// `|n(θ, φ) - bob| / 2`.
pub fn trace_distance<T: Real>(alice: &BlochAngles<T>, bob: &SpinVector<T>) -> T {
    (alice.bloch_vector() - *bob).norm() * T::lit(0.5)
}

/// Optimal measure-and-prepare error `1/√(N+2)`.
pub fn qse_bound<T: Real>(n: u32) -> T {
    (T::from_u32(n).unwrap() + T::lit(2.0)).sqrt().recip()
}

/// Error of announcing only the hemisphere, with `+x̂` as representative.
pub fn comm_integrand<T: Real>(theta: T, phi: T) -> T {
    let r = T::lit(2.0) - T::lit(2.0) * phi.cos() * theta.sin();
    T::lit(0.5) * r.max(T::zero()).sqrt()
}

/// Same quantity with the radicand kept as a squared distance.
pub fn comm_integrand_expanded<T: Real>(theta: T, phi: T) -> T {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let dx = cp * st - T::one();
    let dy = sp * st;
    T::lit(0.5) * (dx * dx + dy * dy + ct * ct).sqrt()
}

/// Node counts for [`comm_bound`], totals over both panels of each axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommQuadrature {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl CommQuadrature {
    pub const MIN_THETA: usize = 16;
    pub const MIN_PHI: usize = 32;

    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < Self::MIN_THETA || n_phi < Self::MIN_PHI {
            return Err(invalid(
                "comm_quadrature",
                format!("need at least {}x{} nodes, got {n_theta}x{n_phi}", Self::MIN_THETA, Self::MIN_PHI),
            ));
        }
        if n_theta % 2 != 0 || n_phi % 2 != 0 {
            return Err(invalid("comm_quadrature", "node counts must be even (two panels per axis)"));
        }
        Ok(Self { n_theta, n_phi })
    }
}

impl Default for CommQuadrature {
    fn default() -> Self {
        Self { n_theta: 32, n_phi: 64 }
    }
}

fn split_rule<T: Real>(n: usize, a: T, mid: T, b: T) -> Result<Vec<(T, T)>> {
    let base = QuadratureRule::<T>::gauss_legendre(n / 2)?;
    let mut pts: Vec<(T, T)> = base.mapped(a, mid).iter().collect();
    pts.extend(base.mapped(mid, b).iter());
    Ok(pts)
}

/// `(1/2π) ∫₀^π dθ sin θ ∫_{-π/2}^{π/2} dφ comm_integrand(θ, φ)`.
///
/// The integrand has a cone point at `(π/2, 0)`, so both axes are split
/// there into Gauss–Legendre panels. The exact value is `√2/3`.
pub fn comm_bound<T: Real>(quad: &CommQuadrature) -> Result<T> {
    let h = T::FRAC_PI_2();
    let thetas = split_rule(quad.n_theta, T::zero(), h, T::PI())?;
    let phis = split_rule(quad.n_phi, -h, T::zero(), h)?;
    let mut acc = CompensatedSum::new();
    for &(t, wt) in &thetas {
        let st = t.sin();
        for &(p, wp) in &phis {
            acc.add(wt * wp * st * comm_integrand(t, p));
        }
    }
    Ok(acc.value() / T::TAU())
}

/// The hemisphere bound averaged over the whole of `grid`, using the
/// nearer of `±x̂` as representative. Periodic in `φ`, hence usable with any
/// grid offset; converges more slowly than [`comm_bound`] because of the kink
/// at `φ = ±π/2`.
pub fn comm_bound_on_grid<T: Real>(grid: &SphereGrid<T>) -> T {
    let acc: CompensatedSum<T> = grid
        .points()
        .into_iter()
        .map(|(a, w)| {
            let r = T::lit(2.0) - T::lit(2.0) * a.phi().cos().abs() * a.theta().sin();
            w * T::lit(0.5) * r.max(T::zero()).sqrt()
        })
        .collect();
    acc.value()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport<T> {
    pub n_particles: u32,
    pub k1_cut: u32,
    /// Sphere-averaged trace distance.
    pub epsilon: T,
    pub epsilon_qse: T,
    pub epsilon_comm: T,
    /// Sphere-averaged acceptance probability.
    pub success_prob: T,
}

/// Averages the trace distance between Alice's state and Bob's postselected,
/// corrected output over `grid`.
pub fn sphere_average_error<T: Real>(
    cfg: &ProtocolConfig<T>,
    rule: &PostselectionRule,
    grid: &SphereGrid<T>,
    variant: ThetaCorrection,
) -> Result<ErrorReport<T>> {
    let pts = grid.points();
    let per_point: Vec<(T, T)> = pts
        .par_iter()
        .map(|(alice, w)| {
            let out = bob_output(cfg, alice, rule, variant)?;
            Ok((*w * trace_distance(alice, &out.spins), *w * out.success_prob))
        })
        .collect::<Result<_>>()?;
    let mut eps = CompensatedSum::new();
    let mut suc = CompensatedSum::new();
    for (e, s) in per_point {
        eps.add(e);
        suc.add(s);
    }
    let n = cfg.n_particles();
    Ok(ErrorReport {
        n_particles: n,
        k1_cut: rule.k1_cut(),
        epsilon: eps.value(),
        epsilon_qse: qse_bound(n),
        epsilon_comm: comm_bound(&CommQuadrature::default())?,
        success_prob: suc.value(),
    })
}
