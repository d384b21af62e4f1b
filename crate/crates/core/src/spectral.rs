//! Discrete Fourier transforms between grid samples and truncated mode arrays.
//!
//! Grid convention: `s_j = 2πj/M + shift`, and coefficients follow
//! `a_k = (1/M) Σ_j x_j e^{−ik s_j}`. Power-of-two sizes go through `rustfft`;
//! any other size uses the direct O(M·K) sum, which the tests also use as an
//! oracle for the fast path.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Complex coefficients indexed by `k ∈ [−K, K]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Modes {
    k_max: usize,
    data: Vec<Complex64>,
}

impl Modes {
    pub fn zeros(k_max: usize) -> Self {
        Self {
            k_max,
            data: vec![Complex64::new(0.0, 0.0); 2 * k_max + 1],
        }
    }

    /// Builds from coefficients ordered `k = −K..=K`.
    pub fn from_vec(data: Vec<Complex64>) -> Result<Self> {
        if data.len().is_multiple_of(2) {
            return invalid(format!("mode array length {} is not odd", data.len()));
        }
        Ok(Self {
            k_max: (data.len() - 1) / 2,
            data,
        })
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn k_range(&self) -> std::ops::RangeInclusive<i64> {
        -(self.k_max as i64)..=self.k_max as i64
    }

    #[inline]
    pub fn contains(&self, k: i64) -> bool {
        k.unsigned_abs() as usize <= self.k_max
    }

    /// Coefficient at `k`; zero outside the retained range.
    #[inline]
    pub fn get(&self, k: i64) -> Complex64 {
        if self.contains(k) {
            self.data[(k + self.k_max as i64) as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Panics if `k` is outside `[−K, K]`.
    #[inline]
    pub fn set(&mut self, k: i64, value: Complex64) {
        assert!(self.contains(k), "mode {k} outside truncation K = {}", self.k_max);
        let idx = (k + self.k_max as i64) as usize;
        self.data[idx] = value;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// `(k, a_k)` pairs in increasing `k`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let k0 = -(self.k_max as i64);
        self.data.iter().enumerate().map(move |(i, &c)| (k0 + i as i64, c))
    }

    pub fn map(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Self {
        Self {
            k_max: self.k_max,
            data: self.iter().map(|(k, c)| f(k, c)).collect(),
        }
    }

    /// Copy truncated or zero-padded to a new `K`.
    pub fn resized(&self, k_max: usize) -> Self {
        let mut out = Self::zeros(k_max);
        for (k, c) in self.iter() {
            if out.contains(k) {
                out.set(k, c);
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn sum_sq(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Elementwise `self + s·other` (same `K`).
    pub fn axpy(&self, s: Complex64, other: &Modes) -> Self {
        assert_eq!(self.k_max, other.k_max);
        Self {
            k_max: self.k_max,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Modes) -> Self {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }
}

type PlanCache = HashMap<(usize, bool), Arc<dyn Fft<f64>>>;

thread_local! {
    static PLANS: RefCell<PlanCache> = RefCell::new(HashMap::new());
}

fn plan(m: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        cell.borrow_mut()
            .entry((m, inverse))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if inverse {
                    planner.plan_fft_inverse(m)
                } else {
                    planner.plan_fft_forward(m)
                }
            })
            .clone()
    })
}

pub(crate) fn check_grid(m: usize, k_max: usize) -> Result<()> {
    if m == 0 || !m.is_multiple_of(2) {
        return invalid(format!("grid size M = {m} must be positive and even"));
    }
    if m < 2 * k_max + 2 {
        return invalid(format!("grid size M = {m} too small for K = {k_max} (need M ≥ 2K+2)"));
    }
    Ok(())
}

/// Which transform path to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformPath {
    /// FFT for power-of-two sizes, direct sum otherwise.
    Auto,
    Direct,
}

/// `x_j = Σ_k a_k e^{ik(2πj/M + shift)}`.
pub fn synthesize_modes(modes: &Modes, m: usize, shift: f64, path: TransformPath) -> Vec<Complex64> {
    let k_max = modes.k_max() as i64;
    if path == TransformPath::Auto && m.is_power_of_two() && m > 2 * k_max as usize {
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (k, c) in modes.iter() {
            let idx = k.rem_euclid(m as i64) as usize;
            buf[idx] = c * Complex64::from_polar(1.0, k as f64 * shift);
        }
        plan(m, true).process(&mut buf);
        buf
    } else {
        (0..m)
            .map(|j| {
                let s = 2.0 * PI * j as f64 / m as f64 + shift;
                modes
                    .iter()
                    .map(|(k, c)| c * Complex64::from_polar(1.0, k as f64 * s))
                    .sum()
            })
            .collect()
    }
}

/// Inverse of [`synthesize_modes`] restricted to `|k| ≤ K`.
pub fn analyze_samples(samples: &[Complex64], k_max: usize, shift: f64, path: TransformPath) -> Modes {
    let m = samples.len();
    let mut out = Modes::zeros(k_max);
    let inv_m = 1.0 / m as f64;
    if path == TransformPath::Auto && m.is_power_of_two() && m > 2 * k_max {
        let mut buf = samples.to_vec();
        plan(m, false).process(&mut buf);
        for k in out.k_range() {
            let idx = k.rem_euclid(m as i64) as usize;
            out.set(k, buf[idx] * inv_m * Complex64::from_polar(1.0, -(k as f64) * shift));
        }
    } else {
        for k in out.k_range() {
            let acc: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(j, x)| {
                    let s = 2.0 * PI * j as f64 / m as f64 + shift;
                    x * Complex64::from_polar(1.0, -(k as f64) * s)
                })
                .sum();
            out.set(k, acc * inv_m);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_modes(k_max: usize, seed: u64) -> Modes {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Modes::zeros(k_max);
        for k in m.k_range() {
            m.set(k, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
        m
    }

    #[test]
    fn fast_and_direct_paths_agree() {
        let modes = random_modes(20, 1);
        for shift in [0.0, PI / 64.0] {
            let fast = synthesize_modes(&modes, 64, shift, TransformPath::Auto);
            let slow = synthesize_modes(&modes, 64, shift, TransformPath::Direct);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-12);
            }
            let back_fast = analyze_samples(&fast, 20, shift, TransformPath::Auto);
            let back_slow = analyze_samples(&fast, 20, shift, TransformPath::Direct);
            for ((_, a), (_, b)) in back_fast.iter().zip(back_slow.iter()) {
                assert!((a - b).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn non_power_of_two_round_trip() {
        let modes = random_modes(10, 2);
        let x = synthesize_modes(&modes, 30, 0.1, TransformPath::Auto);
        let back = analyze_samples(&x, 10, 0.1, TransformPath::Auto);
        assert!(back.sub(&modes).max_abs() < 1e-13);
    }

    #[test]
    fn modes_indexing() {
        let mut m = Modes::zeros(3);
        m.set(-3, Complex64::new(1.0, 0.0));
        m.set(2, Complex64::new(0.0, 2.0));
        assert_eq!(m.get(-3), Complex64::new(1.0, 0.0));
        assert_eq!(m.get(7), Complex64::new(0.0, 0.0));
        assert_eq!(m.resized(1).get(2), Complex64::new(0.0, 0.0));
        assert_eq!(m.resized(5).get(2), Complex64::new(0.0, 2.0));
        assert!(Modes::from_vec(vec![Complex64::new(0.0, 0.0); 4]).is_err());
    }
}
