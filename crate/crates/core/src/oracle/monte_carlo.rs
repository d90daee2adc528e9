use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::run::{apply_gate, initial_state, raw_angles_from_state, schedule, BobGateOrder, Gates};
use super::state::REGISTERS;
use crate::error::{invalid, Error, Result};
use crate::protocol::{classical_correction, OutcomeTriple, ProtocolConfig, ThetaCorrection};
use crate::scalar::{CompensatedSum, Real};
use crate::spin::{spin_expectations, BlochAngles, FockVector, SpinVector};

/// Largest `N` for the trajectory oracle.
pub const MAX_MC_N: u32 = 8;

/// Trajectories per reduction block; blocks are merged in index order.
const BLOCK: usize = 64;

/// Independent stream for trajectory `index` under `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn normal<T: Real>(rng: &mut ChaCha8Rng, sd: T) -> T {
    let z: f64 = StandardNormal.sample(rng);
    T::lit(z) * sd
}

/// Trajectory-averaged outputs of the dephased protocol.
#[derive(Debug, Clone)]
pub struct MonteCarloRun<T> {
    n_particles: u32,
    n_trajectories: usize,
    dist: Vec<T>,
    dist_se: Vec<T>,
    bob_spins: Vec<Option<SpinVector<T>>>,
}

impl<T: Real> MonteCarloRun<T> {
    pub fn n_particles(&self) -> u32 {
        self.n_particles
    }

    pub fn n_trajectories(&self) -> usize {
        self.n_trajectories
    }

    fn index(&self, out: &OutcomeTriple) -> usize {
        let s = self.n_particles as usize + 1;
        (out.k1 as usize * s + out.k2 as usize) * s + out.k3 as usize
    }

    /// Mean joint table, `k1` slowest.
    pub fn distribution(&self) -> &[T] {
        &self.dist
    }

    /// Standard error of each entry of [`Self::distribution`].
    pub fn standard_errors(&self) -> &[T] {
        &self.dist_se
    }

    pub fn prob(&self, out: &OutcomeTriple) -> T {
        self.dist[self.index(out)]
    }

    /// Corrected Bob spin averaged over trajectories, weighted by each
    /// trajectory's probability of the outcome.
    pub fn bob_spins(&self, out: &OutcomeTriple) -> Option<SpinVector<T>> {
        self.bob_spins[self.index(out)]
    }
}

#[derive(Clone)]
struct Sums<T> {
    p: Vec<CompensatedSum<T>>,
    p2: Vec<CompensatedSum<T>>,
    v: Vec<[CompensatedSum<T>; 3]>,
}

impl<T: Real> Sums<T> {
    fn new(len: usize) -> Self {
        Self {
            p: vec![CompensatedSum::new(); len],
            p2: vec![CompensatedSum::new(); len],
            v: vec![[CompensatedSum::new(); 3]; len],
        }
    }

    fn merge(&mut self, o: &Self) {
        for i in 0..self.p.len() {
            self.p[i].merge(&o.p[i]);
            self.p2[i].merge(&o.p2[i]);
            for c in 0..3 {
                self.v[i][c].merge(&o.v[i][c]);
            }
        }
    }
}

/// Random-phase trajectories: during each entangling step of duration `t`,
/// every register receives `exp(iξ S^z)` with an independent
/// `ξ ~ Normal(0, γt)`. Outcome tables and corrected Bob spins are averaged
/// over `n_trajectories` runs.
pub fn dephase_monte_carlo<T: Real>(
    cfg: &ProtocolConfig<T>,
    alice: &BlochAngles<T>,
    gamma: T,
    n_trajectories: usize,
    seed: u64,
    variant: ThetaCorrection,
) -> Result<MonteCarloRun<T>> {
    let n = cfg.n_particles();
    if n > MAX_MC_N {
        return Err(Error::Resource { n, limit: MAX_MC_N });
    }
    if n_trajectories == 0 {
        return Err(invalid("n_trajectories", "must be at least 1"));
    }
    if !(gamma >= T::zero() && gamma.is_finite()) {
        return Err(invalid("gamma", format!("must be finite and nonnegative, got {gamma}")));
    }
    let start = initial_state(n, alice)?;
    let gates = Gates::new(n)?;
    let steps = schedule(cfg, BobGateOrder::FinalStateOrder);
    let side = n as usize + 1;
    let len = side * side * side;
    let outcomes: Vec<OutcomeTriple> = (0..len)
        .map(|i| OutcomeTriple::new(n, (i / (side * side)) as u32, ((i / side) % side) as u32, (i % side) as u32))
        .collect::<Result<_>>()?;

    let n_blocks = n_trajectories.div_ceil(BLOCK);
    let blocks: Vec<Sums<T>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut sums = Sums::new(len);
            for traj in b * BLOCK..((b + 1) * BLOCK).min(n_trajectories) {
                let mut rng = trajectory_rng(seed, traj as u64);
                let mut st = start.clone();
                for (ent, gate) in &steps {
                    st.apply_zz_phase(ent.i, ent.j, ent.t, ent.sign).expect("valid registers");
                    let sd = (gamma * ent.t).sqrt();
                    for reg in 0..REGISTERS {
                        let xi = normal(&mut rng, sd);
                        st.apply_local_phase(reg, xi);
                    }
                    if let Some(g) = gate {
                        apply_gate(&mut st, &gates, *g);
                    }
                }
                let dist = st.measured_distribution();
                for (i, &p) in dist.iter().enumerate() {
                    sums.p[i].add(p);
                    sums.p2[i].add(p * p);
                    if p > T::lit(1e-28) {
                        let out = &outcomes[i];
                        let amps: Vec<Complex<T>> = st.bob_amplitudes(out.k1, out.k2, out.k3).to_vec();
                        let bob = FockVector::new(amps).ok().and_then(|f| f.normalized());
                        if let Some(bob) = bob {
                            let v = spin_expectations(&bob);
                            let raw = raw_angles_from_state(cfg, out, &v);
                            let c = classical_correction(out.sigma1(), raw, variant).bloch_vector().scale(v.norm());
                            sums.v[i][0].add(p * c.x);
                            sums.v[i][1].add(p * c.y);
                            sums.v[i][2].add(p * c.z);
                        }
                    }
                }
            }
            sums
        })
        .collect();
    let mut total = Sums::new(len);
    for b in &blocks {
        total.merge(b);
    }
    let m = T::from_usize_lossy(n_trajectories);
    let mut dist = Vec::with_capacity(len);
    let mut dist_se = Vec::with_capacity(len);
    let mut bob_spins = Vec::with_capacity(len);
    for i in 0..len {
        let sum = total.p[i].value();
        let mean = sum / m;
        let var = if n_trajectories > 1 {
            ((total.p2[i].value() - sum * mean) / (m - T::one())).max(T::zero())
        } else {
            T::zero()
        };
        dist.push(mean);
        dist_se.push((var / m).sqrt());
        bob_spins.push(if sum > T::zero() {
            Some(SpinVector::new(
                total.v[i][0].value() / sum,
                total.v[i][1].value() / sum,
                total.v[i][2].value() / sum,
            ))
        } else {
            None
        });
    }
    Ok(MonteCarloRun {
        n_particles: n,
        n_trajectories,
        dist,
        dist_se,
        bob_spins,
    })
}

/// Trajectory estimate of the density matrix (row-major `(k, k')`) of a single
/// register after one dephasing interval `t`.
pub fn single_register_coherences<T: Real>(
    psi: &FockVector<T>,
    gamma: T,
    t: T,
    n_trajectories: usize,
    seed: u64,
) -> Result<Vec<Complex<T>>> {
    if n_trajectories == 0 {
        return Err(invalid("n_trajectories", "must be at least 1"));
    }
    let n = psi.n_particles();
    let side = n as usize + 1;
    let sd = (gamma * t).sqrt();
    let amps = psi.amplitudes();
    let mut re = vec![CompensatedSum::new(); side * side];
    let mut im = vec![CompensatedSum::new(); side * side];
    for traj in 0..n_trajectories {
        let mut rng = trajectory_rng(seed, traj as u64);
        let xi: T = normal(&mut rng, sd);
        let phased: Vec<Complex<T>> = amps
            .iter()
            .enumerate()
            .map(|(k, c)| c * Complex::from_polar(T::one(), xi * T::from_i64_lossy(2 * k as i64 - i64::from(n))))
            .collect();
        for k in 0..side {
            for kp in 0..side {
                let e = phased[k] * phased[kp].conj();
                re[k * side + kp].add(e.re);
                im[k * side + kp].add(e.im);
            }
        }
    }
    let m = T::from_usize_lossy(n_trajectories);
    Ok(re.iter().zip(&im).map(|(r, i)| Complex::new(r.value() / m, i.value() / m)).collect())
}
