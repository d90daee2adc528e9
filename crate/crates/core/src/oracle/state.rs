use std::io::{self, Write};

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::scalar::{CompensatedSum, Real};
use crate::spin::FockVector;

pub const REGISTERS: usize = 4;

/// Product-space state of four `N`-particle registers, row-major with `k1`
/// slowest and `k4` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiRegisterState<T> {
    n_particles: u32,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> MultiRegisterState<T> {
    /// Largest `N` accepted (`(N+1)^4` amplitudes).
    pub const MAX_N: u32 = 12;

    pub fn product(registers: [&FockVector<T>; REGISTERS]) -> Result<Self> {
        let n = registers[0].n_particles();
        if registers.iter().any(|r| r.n_particles() != n) {
            return Err(invalid("registers", "all registers must hold the same N"));
        }
        if n > Self::MAX_N {
            return Err(Error::Resource { n, limit: Self::MAX_N });
        }
        let side = n as usize + 1;
        let mut amplitudes = Vec::with_capacity(side.pow(4));
        let [r1, r2, r3, r4] = registers.map(|r| r.amplitudes());
        for a in r1 {
            for b in r2 {
                let ab = a * b;
                for c in r3 {
                    let abc = ab * c;
                    for d in r4 {
                        amplitudes.push(abc * d);
                    }
                }
            }
        }
        Ok(Self { n_particles: n, amplitudes })
    }

    pub fn n_particles(&self) -> u32 {
        self.n_particles
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    fn side(&self) -> usize {
        self.n_particles as usize + 1
    }

    fn stride(&self, reg: usize) -> usize {
        self.side().pow((REGISTERS - 1 - reg) as u32)
    }

    /// `(k1, k2, k3, k4)` of a flat index.
    pub fn indices(&self, flat: usize) -> [u32; REGISTERS] {
        let s = self.side();
        [
            (flat / (s * s * s)) as u32,
            ((flat / (s * s)) % s) as u32,
            ((flat / s) % s) as u32,
            (flat % s) as u32,
        ]
    }

    pub fn norm_sqr(&self) -> T {
        let acc: CompensatedSum<T> = self.amplitudes.iter().map(|c| c.norm_sqr()).collect();
        acc.value()
    }

    fn s(&self, k: u32) -> T {
        T::from_i64_lossy(2 * i64::from(k) - i64::from(self.n_particles))
    }

    /// `exp(-i · sign · t · S^z_i S^z_j)`; registers are 0-based.
    pub fn apply_zz_phase(&mut self, i: usize, j: usize, t: T, sign: T) -> Result<()> {
        if i == j || i >= REGISTERS || j >= REGISTERS {
            return Err(invalid("registers", format!("need two distinct registers < 4, got {i}, {j}")));
        }
        let side = self.side();
        let (si, sj) = (self.stride(i), self.stride(j));
        let phases: Vec<Complex<T>> = (0..side * side)
            .map(|idx| {
                let (ki, kj) = ((idx / side) as u32, (idx % side) as u32);
                Complex::from_polar(T::one(), -sign * t * self.s(ki) * self.s(kj))
            })
            .collect();
        for (flat, amp) in self.amplitudes.iter_mut().enumerate() {
            let ki = (flat / si) % side;
            let kj = (flat / sj) % side;
            *amp = *amp * phases[ki * side + kj];
        }
        Ok(())
    }

    /// `exp(i ξ S^z)` on one register.
    pub fn apply_local_phase(&mut self, reg: usize, xi: T) {
        let side = self.side();
        let stride = self.stride(reg);
        let phases: Vec<Complex<T>> = (0..side as u32)
            .map(|k| Complex::from_polar(T::one(), xi * self.s(k)))
            .collect();
        for (flat, amp) in self.amplitudes.iter_mut().enumerate() {
            *amp = *amp * phases[(flat / stride) % side];
        }
    }

    /// Applies a lifted `(N+1)×(N+1)` matrix (row-major) to one register.
    pub fn apply_register_matrix(&mut self, reg: usize, m: &[Complex<T>]) {
        let side = self.side();
        debug_assert_eq!(m.len(), side * side);
        let stride = self.stride(reg);
        let block = stride * side;
        let zero = Complex::new(T::zero(), T::zero());
        let mut col = vec![zero; side];
        for outer in (0..self.amplitudes.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (k, c) in col.iter_mut().enumerate() {
                    *c = self.amplitudes[base + k * stride];
                }
                for kp in 0..side {
                    let row = &m[kp * side..(kp + 1) * side];
                    let mut acc = zero;
                    for (a, c) in row.iter().zip(&col) {
                        acc = acc + a * c;
                    }
                    self.amplitudes[base + kp * stride] = acc;
                }
            }
        }
    }

    /// Born-rule table over `(k1, k2, k3)`, `k1` slowest.
    pub fn measured_distribution(&self) -> Vec<T> {
        self.amplitudes
            .chunks(self.side())
            .map(|bob| {
                let acc: CompensatedSum<T> = bob.iter().map(|c| c.norm_sqr()).collect();
                acc.value()
            })
            .collect()
    }

    /// Register-4 amplitudes for a fixed `(k1, k2, k3)`, unnormalized.
    pub fn bob_amplitudes(&self, k1: u32, k2: u32, k3: u32) -> &[Complex<T>] {
        let s = self.side();
        let start = ((k1 as usize * s + k2 as usize) * s + k3 as usize) * s;
        &self.amplitudes[start..start + s]
    }

    /// One `k1,k2,k3,k4,re,im` record per amplitude under a header line.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "k1,k2,k3,k4,re,im")?;
        for (flat, c) in self.amplitudes.iter().enumerate() {
            let [a, b, d, e] = self.indices(flat);
            writeln!(w, "{a},{b},{d},{e},{},{}", c.re, c.im)?;
        }
        Ok(())
    }
}
