use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{OutcomeTriple, PostselectionRule, ProtocolConfig, ProtocolModel};
use crate::error::{invalid, Error, Result};
use crate::scalar::{log_sum_exp, CompensatedSum, Real};
use crate::spin::BlochAngles;

/// Materialized `ln p(k1, k2, k3)`, indexed row-major with `k1` slowest.
#[derive(Debug, Clone)]
pub struct JointDistribution<T> {
    cfg: ProtocolConfig<T>,
    alice: BlochAngles<T>,
    log_probs: Vec<T>,
}

impl<T: Real> JointDistribution<T> {
    /// Largest `N` for which the full `(N+1)^3` table is built.
    pub const MAX_MATERIALIZED_N: u32 = 128;

    pub fn new(cfg: &ProtocolConfig<T>, alice: &BlochAngles<T>) -> Result<Self> {
        let n = cfg.n_particles();
        if n > Self::MAX_MATERIALIZED_N {
            return Err(Error::Resource {
                n,
                limit: Self::MAX_MATERIALIZED_N,
            });
        }
        let model = ProtocolModel::new(cfg, alice);
        let side = n as usize + 1;
        let rows: Vec<_> = (0..side * side)
            .into_par_iter()
            .map(|idx| model.row((idx / side) as u32, (idx % side) as u32))
            .collect();
        let ln_binom = model.ln_binomials();
        let mut log_probs = vec![T::zero(); side * side * side];
        log_probs
            .par_chunks_mut(side * side)
            .enumerate()
            .for_each(|(k1, slab)| {
                for (slot, row) in slab.iter_mut().zip(&rows) {
                    *slot = row.ln_prob(n, k1 as u32, ln_binom[k1]);
                }
            });
        Ok(Self {
            cfg: *cfg,
            alice: *alice,
            log_probs,
        })
    }

    /// Wraps an externally computed probability table (same layout).
    pub fn from_probabilities(
        cfg: &ProtocolConfig<T>,
        alice: &BlochAngles<T>,
        probs: &[T],
    ) -> Result<Self> {
        let side = cfg.n_particles() as usize + 1;
        if probs.len() != side * side * side {
            return Err(invalid(
                "probs",
                format!("expected {} entries, got {}", side * side * side, probs.len()),
            ));
        }
        if probs.iter().any(|&p| !(p >= T::zero())) {
            return Err(invalid("probs", "entries must be nonnegative"));
        }
        Ok(Self {
            cfg: *cfg,
            alice: *alice,
            log_probs: probs.iter().map(|p| p.ln()).collect(),
        })
    }

    pub fn n_particles(&self) -> u32 {
        self.cfg.n_particles()
    }

    pub fn config(&self) -> &ProtocolConfig<T> {
        &self.cfg
    }

    pub fn alice(&self) -> &BlochAngles<T> {
        &self.alice
    }

    fn side(&self) -> usize {
        self.n_particles() as usize + 1
    }

    #[inline]
    pub fn index(&self, k1: u32, k2: u32, k3: u32) -> usize {
        let s = self.side();
        (k1 as usize * s + k2 as usize) * s + k3 as usize
    }

    pub fn log_probs(&self) -> &[T] {
        &self.log_probs
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.log_probs.iter().map(|l| l.exp()).collect()
    }

    pub fn log_prob(&self, out: &OutcomeTriple) -> T {
        self.log_probs[self.index(out.k1, out.k2, out.k3)]
    }

    pub fn prob(&self, out: &OutcomeTriple) -> T {
        self.log_prob(out).exp()
    }

    /// `ln Σ p`, accumulated with log-sum-exp.
    pub fn log_total(&self) -> T {
        log_sum_exp(&self.log_probs)
    }

    pub fn total(&self) -> T {
        self.log_total().exp()
    }

    /// `Σ_{k2,k3} p(k1, k2, k3)` for each `k1`.
    pub fn k1_marginal(&self) -> Vec<T> {
        let slab = self.side() * self.side();
        self.log_probs
            .par_chunks(slab)
            .map(|chunk| {
                let acc: CompensatedSum<T> = chunk.iter().map(|l| l.exp()).collect();
                acc.value()
            })
            .collect()
    }

    /// `Σ_{k1} p(k1, k2, k3)` as a `(N+1)²` table, `k2`-major.
    pub fn k2k3_marginal(&self) -> Vec<T> {
        let s = self.side();
        (0..s * s)
            .into_par_iter()
            .map(|r| {
                let acc: CompensatedSum<T> =
                    (0..s).map(|k1| self.log_probs[k1 * s * s + r].exp()).collect();
                acc.value()
            })
            .collect()
    }

    /// `p(k1, ·, k3)` as a function of `k2`.
    pub fn slice_over_k2(&self, k1: u32, k3: u32) -> Vec<T> {
        (0..=self.n_particles())
            .map(|k2| self.log_probs[self.index(k1, k2, k3)].exp())
            .collect()
    }

    /// `p(k1, k2, ·)` as a function of `k3`.
    pub fn slice_over_k3(&self, k1: u32, k2: u32) -> Vec<T> {
        (0..=self.n_particles())
            .map(|k3| self.log_probs[self.index(k1, k2, k3)].exp())
            .collect()
    }

    /// `P_suc = Σ` over accepted `k1` of the `k1` marginal.
    pub fn success_probability(&self, rule: &PostselectionRule) -> T {
        let marginal = self.k1_marginal();
        let n = self.n_particles();
        let acc: CompensatedSum<T> = rule.accepted(n).map(|k1| marginal[k1 as usize]).collect();
        acc.value()
    }

    pub fn outcome_at(&self, index: usize) -> OutcomeTriple {
        let s = self.side();
        let n = self.n_particles();
        OutcomeTriple::new(n, (index / (s * s)) as u32, ((index / s) % s) as u32, (index % s) as u32)
            .expect("index within table")
    }
}

/// Cumulative-weight sampler over the flattened outcome space. Weights are
/// held in `f64` whatever the table scalar.
#[derive(Debug, Clone)]
pub struct OutcomeSampler {
    n_particles: u32,
    index: WeightedIndex<f64>,
}

impl<T: Real> JointDistribution<T> {
    pub fn sampler(&self) -> Result<OutcomeSampler> {
        let index = WeightedIndex::new(self.log_probs.iter().map(|l| l.exp().to_f64_lossy()))
            .map_err(|e| invalid("distribution", e.to_string()))?;
        Ok(OutcomeSampler {
            n_particles: self.n_particles(),
            index,
        })
    }

    /// One draw with a fresh ChaCha8 stream seeded by `seed`.
    pub fn sample_outcome(&self, seed: u64) -> Result<OutcomeTriple> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(self.sampler()?.sample(&mut rng))
    }
}

impl OutcomeSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> OutcomeTriple {
        let flat = self.index.sample(rng);
        let s = self.n_particles as usize + 1;
        OutcomeTriple::new(
            self.n_particles,
            (flat / (s * s)) as u32,
            ((flat / s) % s) as u32,
            (flat % s) as u32,
        )
        .expect("sampled index within table")
    }
}
