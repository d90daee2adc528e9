use rayon::prelude::*;

use super::{PostselectionRule, ProtocolConfig, ProtocolModel, Sign, ThetaCorrection};
use super::{bob_raw_angles, classical_correction, OutcomeTriple, Row};
use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};
use crate::spin::{BlochAngles, SpinVector};

/// Bob's postselected, corrected spin together with the acceptance probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BobOutput<T> {
    pub spins: SpinVector<T>,
    pub success_prob: T,
}

#[derive(Clone, Copy)]
struct Acc<T> {
    w: CompensatedSum<T>,
    x: CompensatedSum<T>,
    y: CompensatedSum<T>,
    z: CompensatedSum<T>,
}

impl<T: Real> Acc<T> {
    fn new() -> Self {
        Self {
            w: CompensatedSum::new(),
            x: CompensatedSum::new(),
            y: CompensatedSum::new(),
            z: CompensatedSum::new(),
        }
    }

    fn add(&mut self, p: T, v: SpinVector<T>) {
        if p > T::zero() {
            self.w.add(p);
            self.x.add(p * v.x);
            self.y.add(p * v.y);
            self.z.add(p * v.z);
        }
    }

    fn merge(&mut self, o: &Self) {
        self.w.merge(&o.w);
        self.x.merge(&o.x);
        self.y.merge(&o.y);
        self.z.merge(&o.z);
    }
}

/// Weighted average of per-outcome Bob spins over the accepted set.
///
/// `row_mass(k2, k3)` returns the accepted probability of that row split by
/// `σ1` as `(P₊, P₋)`; `spins(σ1, k2, k3)` is Bob's corrected spin, which
/// depends on `k1` only through `σ1`. Rows are evaluated in parallel over `k2`
/// and reduced in index order, so the result does not depend on scheduling.
pub(crate) fn postselected_average<T, P, S>(n: u32, row_mass: P, spins: S) -> Result<BobOutput<T>>
where
    T: Real,
    P: Fn(u32, u32) -> (T, T) + Sync,
    S: Fn(Sign, u32, u32) -> SpinVector<T> + Sync,
{
    let partial: Vec<Acc<T>> = (0..=n)
        .into_par_iter()
        .map(|k2| {
            let mut acc = Acc::new();
            for k3 in 0..=n {
                let (plus, minus) = row_mass(k2, k3);
                if plus > T::zero() {
                    acc.add(plus, spins(Sign::Plus, k2, k3));
                }
                if minus > T::zero() {
                    acc.add(minus, spins(Sign::Minus, k2, k3));
                }
            }
            acc
        })
        .collect();
    let mut acc = Acc::new();
    for p in &partial {
        acc.merge(p);
    }
    let total = acc.w.value();
    if !(total >= T::lit(1e-300)) || total == T::zero() {
        return Err(Error::EmptyPostselection(total.to_f64_lossy()));
    }
    Ok(BobOutput {
        spins: SpinVector::new(acc.x.value() / total, acc.y.value() / total, acc.z.value() / total),
        success_prob: total,
    })
}

/// Accepted `k1` values split by `σ1`: `(k1 with σ1 = +1, k1 with σ1 = -1)`.
pub(crate) fn accepted_by_sign(n: u32, rule: &PostselectionRule) -> (Vec<u32>, Vec<u32>) {
    rule.accepted(n).partition(|&k1| 2 * i64::from(k1) >= i64::from(n))
}

/// Accepted mass of one row split by `σ1`.
pub(crate) struct RowMass<'a, T> {
    n: u32,
    ln_binom: &'a [T],
    plus: Vec<u32>,
    minus: Vec<u32>,
    dense: bool,
}

impl<'a, T: Real> RowMass<'a, T> {
    pub(crate) fn new(n: u32, ln_binom: &'a [T], rule: &PostselectionRule) -> Self {
        let (plus, minus) = accepted_by_sign(n, rule);
        // Direct exponentials win only when few k1 are kept.
        let dense = 8 * (plus.len() + minus.len()) > n as usize;
        Self { n, ln_binom, plus, minus, dense }
    }

    pub(crate) fn scratch(&self) -> Vec<T> {
        vec![T::zero(); self.n as usize + 1]
    }

    pub(crate) fn eval(&self, row: &Row<T>, buf: &mut [T]) -> (T, T) {
        let sum = |ks: &[u32], f: &dyn Fn(u32) -> T| -> T {
            let acc: CompensatedSum<T> = ks.iter().map(|&k| f(k)).collect();
            acc.value()
        };
        if self.dense {
            row.fill_probs(self.n, self.ln_binom, buf);
            let f = |k: u32| buf[k as usize];
            (sum(&self.plus, &f), sum(&self.minus, &f))
        } else {
            let f = |k: u32| row.ln_prob(self.n, k, self.ln_binom[k as usize]).exp();
            (sum(&self.plus, &f), sum(&self.minus, &f))
        }
    }
}

pub fn bob_output<T: Real>(
    cfg: &ProtocolConfig<T>,
    alice: &BlochAngles<T>,
    rule: &PostselectionRule,
    variant: ThetaCorrection,
) -> Result<BobOutput<T>> {
    let n = cfg.n_particles();
    let model = ProtocolModel::new(cfg, alice);
    let mass = RowMass::new(n, model.ln_binomials(), rule);
    postselected_average(
        n,
        |k2, k3| {
            let mut buf = mass.scratch();
            mass.eval(&model.row(k2, k3), &mut buf)
        },
        |sigma, k2, k3| corrected_spin(cfg, sigma, k2, k3, variant),
    )
}

/// Corrected spin for any outcome with the given `σ1`, `k2`, `k3`.
pub(crate) fn corrected_spin<T: Real>(
    cfg: &ProtocolConfig<T>,
    sigma: Sign,
    k2: u32,
    k3: u32,
    variant: ThetaCorrection,
) -> SpinVector<T> {
    let out = OutcomeTriple::new(cfg.n_particles(), 0, k2, k3).expect("indices within range");
    classical_correction(sigma, bob_raw_angles(cfg, &out), variant).bloch_vector()
}
