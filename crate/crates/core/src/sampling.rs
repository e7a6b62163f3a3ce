//! Seeded randomness: the pinned generator, uniform permutations and bounded draws.
//!
//! # Stream contract
//!
//! [`RngStream`] is xoshiro256++ (`rand_xoshiro::Xoshiro256PlusPlus`) whose 256-bit state
//! is expanded from the 64-bit seed with SplitMix64. Bounded integers use Lemire's
//! widening-multiply method with rejection, permutations use the descending
//! Fisher–Yates loop, and floats in `[0, 1)` take the top 53 bits of one output.
//! These choices are part of the reproducibility contract: changing any of them
//! changes every trace and needs a major version bump.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};

/// Seed of the `index`-th run under `base_seed`, as used by [`RngStream::for_run`].
pub fn run_seed(base_seed: u64, index: u64) -> u64 {
    // golden-ratio stride; SplitMix64 inside seed_from_u64 decorrelates neighbours
    base_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Deterministic pseudo-random stream. Single owner, never shared between runs.
#[derive(Clone, Debug)]
pub struct RngStream(Xoshiro256PlusPlus);

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    /// Independent stream for the `index`-th run or trial under `base_seed`.
    pub fn for_run(base_seed: u64, index: u64) -> Self {
        Self::new(run_seed(base_seed, index))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform double in `[0, 1)`.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased draw from `{0, …, n−1}`.
    ///
    /// # Panics
    /// If `n == 0`.
    pub fn uniform_index(&mut self, n: usize) -> usize {
        assert!(n >= 1, "uniform_index needs n >= 1");
        let range = n as u64;
        let mut m = u128::from(self.next_u64()) * u128::from(range);
        let mut low = m as u64;
        if low < range {
            let threshold = range.wrapping_neg() % range;
            while low < threshold {
                m = u128::from(self.next_u64()) * u128::from(range);
                low = m as u64;
            }
        }
        (m >> 64) as usize
    }

    /// `count` independent uniform draws from `{0, …, n−1}`.
    pub fn uniform_indices(&mut self, n: usize, count: usize) -> Vec<usize> {
        (0..count).map(|_| self.uniform_index(n)).collect()
    }

    /// Uniformly random permutation of `0..n` (Fisher–Yates).
    pub fn random_permutation(&mut self, n: usize) -> Permutation {
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.uniform_index(i + 1);
            order.swap(i, j);
        }
        Permutation(order)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// A bijection on `{0, …, N−1}` listing the processing order of one epoch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn from_vec(order: Vec<usize>) -> Result<Self> {
        if !is_permutation(&order) {
            return Err(Error::invalid("order is not a permutation of 0..N"));
        }
        Ok(Permutation(order))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

pub fn is_permutation(order: &[usize]) -> bool {
    let mut seen = vec![false; order.len()];
    order.iter().all(|&k| k < seen.len() && !core::mem::replace(&mut seen[k], true))
}

/// Law of the next reshuffled index given the indices already used this epoch:
/// `1/(n−i)` on each unused index and 0 on used ones, with `i = prefix.len()`.
pub fn conditional_next_distribution(prefix: &[usize], n: usize) -> Result<Vec<f64>> {
    if prefix.len() >= n {
        return Err(Error::invalid(format!(
            "prefix of length {} leaves no index to draw from {n}",
            prefix.len()
        )));
    }
    let mut used = vec![false; n];
    for &k in prefix {
        if k >= n {
            return Err(Error::invalid(format!("prefix entry {k} out of range for n = {n}")));
        }
        if core::mem::replace(&mut used[k], true) {
            return Err(Error::invalid(format!("duplicate prefix entry {k}")));
        }
    }
    let p = 1.0 / (n - prefix.len()) as f64;
    Ok(used.into_iter().map(|u| if u { 0.0 } else { p }).collect())
}
