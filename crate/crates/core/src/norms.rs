//! Function-space diagnostics: Littlewood-Paley blocks and the S, Z1, Z2, W
//! and N norms, with the product-estimate checks.
//!
//! `‖f‖²_{L²} = ∫_T |f|² ds`, so `‖e^{iks}‖_{L²} = √(2π)`. Dyadic blocks are
//! indexed by `n ≥ 1`; the low block `P_{≤0}` holds `|k| ≤ 1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::kernels::{cutoff, phi};
use crate::spectral::{analyze_samples, synthesize_modes, Modes, TransformPath};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest block index with nonzero weight inside `|k| ≤ K`.
pub fn max_block(k_max: usize) -> u32 {
    let mut n = 1;
    while (1usize << (n - 1)) < k_max.max(1) {
        n += 1;
    }
    n
}

/// `(P_n f)̂(k) = φ_n(k) f̂(k)`.
pub fn lp_project(f: &Modes, n: u32) -> Modes {
    f.map(|k, c| phi(n, k) * c)
}

/// `P_{≤0} f`: multiplier `χ(k)`, which is 1 on `|k| ≤ 1` and 0 beyond.
pub fn low_part(f: &Modes) -> Modes {
    f.map(|k, c| cutoff(k as f64) * c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadicDecomposition {
    pub low: Modes,
    /// `blocks[i]` is `P_{i+1} f`.
    pub blocks: Vec<Modes>,
}

impl DyadicDecomposition {
    pub fn new(f: &Modes) -> Self {
        Self {
            low: low_part(f),
            blocks: (1..=max_block(f.k_max())).map(|n| lp_project(f, n)).collect(),
        }
    }

    pub fn reconstruct(&self) -> Modes {
        self.blocks.iter().fold(self.low.clone(), |acc, b| acc.axpy(Complex64::new(1.0, 0.0), b))
    }
}

/// `‖f‖_{L²}` by Parseval.
pub fn l2_norm(f: &Modes) -> f64 {
    (2.0 * PI * f.sum_sq()).sqrt()
}

/// `‖f‖_{L²}` by trapezoidal quadrature on `M` points.
pub fn l2_norm_quadrature(f: &Modes, m: usize) -> f64 {
    let values = synthesize_modes(f, m, 0.0, TransformPath::Auto);
    (values.iter().map(|z| z.norm_sqr()).sum::<f64>() * 2.0 * PI / m as f64).sqrt()
}

/// `‖P_n f‖_{L²}` for `n = 1..=max_block(K)`.
pub fn block_l2_norms(f: &Modes) -> Vec<f64> {
    (1..=max_block(f.k_max()))
        .map(|n| (2.0 * PI * f.iter().map(|(k, c)| (phi(n, k) * c.norm()).powi(2)).sum::<f64>()).sqrt())
        .collect()
}

/// Grid size used for sup norms: a power of two `≥ 8K`.
pub fn sup_grid(k_max: usize) -> usize {
    (8 * k_max.max(1)).next_power_of_two()
}

/// `sup_s |f(s)|` sampled on `M ≥ 8K` points.
pub fn sup_norm(f: &Modes) -> f64 {
    synthesize_modes(f, sup_grid(f.k_max()), 0.0, TransformPath::Auto)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

pub fn derivative(f: &Modes) -> Modes {
    f.map(|k, c| I * k as f64 * c)
}

/// `‖f'‖_{L∞}`.
pub fn derivative_sup(f: &Modes) -> f64 {
    sup_norm(&derivative(f))
}

fn block_scale(n: u32) -> f64 {
    (n as f64).exp2()
}

/// `‖f‖_S = ‖f'‖_{L∞} + sup_n 2^{3n/2}‖P_n f‖_{L²}`.
pub fn s_norm(f: &Modes) -> f64 {
    z1_snapshot(f, 0.0)
}

/// `(1+t)^{2/3}‖F'‖_{L∞} + sup_n (1+2^n t)^{2/3} 2^{3n/2}‖P_n F‖_{L²}`.
pub fn z1_snapshot(f: &Modes, t: f64) -> f64 {
    let blocks = block_l2_norms(f);
    let sup = blocks
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let s = block_scale(i as u32 + 1);
            (1.0 + s * t).powf(2.0 / 3.0) * s.powf(1.5) * b
        })
        .fold(0.0, f64::max);
    (1.0 + t).powf(2.0 / 3.0) * derivative_sup(f) + sup
}

/// `sup_n (2^n t)^{−1/3}(1+2^n t) 2^{3n/2}‖P_n F‖_{L²}`.
///
/// At `t = 0` a block contributes `0` if it vanishes and `+∞` otherwise.
pub fn z2_snapshot(f: &Modes, t: f64) -> f64 {
    block_l2_norms(f)
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            if b == 0.0 {
                return 0.0;
            }
            if t == 0.0 {
                return f64::INFINITY;
            }
            let s = block_scale(i as u32 + 1);
            (s * t).powf(-1.0 / 3.0) * (1.0 + s * t) * s.powf(1.5) * b
        })
        .fold(0.0, f64::max)
}

/// Shell `m ≥ 1`: `|k| ∈ [2^{m−1}, 2^{m+1}]`.
fn in_shell(k: i64, m: u32) -> bool {
    let a = k.unsigned_abs();
    a >= 1u64 << (m - 1) && a <= 1u64 << (m + 1)
}

fn max_shell(k_max: usize) -> u32 {
    max_block(k_max)
}

/// `Σ|a_k| + sup_{m≥1} Σ_{|k|∈[2^{m−1},2^{m+1}]} |a_k|(1+|k|t)^{2/3}` and the
/// maximizing shell.
fn n_snapshot_with_shell(seq: &Modes, t: f64) -> (f64, u32) {
    let total: f64 = seq.iter().map(|(_, c)| c.norm()).sum();
    let mut best = (0.0, 1);
    for m in 1..=max_shell(seq.k_max()) {
        let shell: f64 = seq
            .iter()
            .filter(|&(k, _)| in_shell(k, m))
            .map(|(k, c)| c.norm() * (1.0 + k.unsigned_abs() as f64 * t).powf(2.0 / 3.0))
            .sum();
        if shell > best.0 {
            best = (shell, m);
        }
    }
    (total + best.0, best.1)
}

/// The `N` expression at one time.
pub fn n_snapshot(seq: &Modes, t: f64) -> f64 {
    n_snapshot_with_shell(seq, t).0
}

/// `‖F‖_W` at one time: the `N` expression applied to `|k|·|F̂(k)|`.
pub fn wiener_snapshot(f: &Modes, t: f64) -> f64 {
    n_snapshot(&f.map(|k, c| c * k.unsigned_abs() as f64), t)
}

/// Shell attaining the sup in [`wiener_snapshot`] (smallest on ties).
pub fn wiener_dominant_shell(f: &Modes, t: f64) -> u32 {
    n_snapshot_with_shell(&f.map(|k, c| c * k.unsigned_abs() as f64), t).1
}

/// `‖{a_k}‖_N` over sampled times: each sup is taken separately.
pub fn n_norm(samples: &[(f64, Modes)]) -> f64 {
    let l1 = samples
        .iter()
        .map(|(_, s)| s.iter().map(|(_, c)| c.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let shells = samples
        .iter()
        .map(|(t, s)| n_snapshot(s, *t) - s.iter().map(|(_, c)| c.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    l1 + shells
}

/// `sup_t` of [`z1_snapshot`].
pub fn z1_norm(samples: &[(f64, Modes)]) -> f64 {
    samples.iter().map(|(t, f)| z1_snapshot(f, *t)).fold(0.0, f64::max)
}

/// Z1 at the derivative level, for `G = Y1'·Y2'`:
/// `(1+t)^{2/3}‖G‖_{L∞} + sup_n 2^{n/2}(1+2^n t)^{2/3}‖P_n G‖_{L²}`.
pub fn z1_derivative_level_snapshot(g: &Modes, t: f64) -> f64 {
    let sup = block_l2_norms(g)
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let s = block_scale(i as u32 + 1);
            (1.0 + s * t).powf(2.0 / 3.0) * s.sqrt() * b
        })
        .fold(0.0, f64::max);
    (1.0 + t).powf(2.0 / 3.0) * sup_norm(g) + sup
}

/// All snapshot norms of one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub t: f64,
    pub s_norm: f64,
    pub z1: f64,
    pub z2: f64,
    pub w: f64,
    /// `2^{3n/2}‖P_n f‖_{L²}`, `n = 1, 2, …`.
    pub block_profile: Vec<f64>,
}

pub fn norm_report(f: &Modes, t: f64) -> NormReport {
    NormReport {
        t,
        s_norm: s_norm(f),
        z1: z1_snapshot(f, t),
        z2: z2_snapshot(f, t),
        w: wiener_snapshot(f, t),
        block_profile: block_profile(f),
    }
}

/// `2^{3n/2}‖P_n f‖_{L²}` for `n ≥ 1`.
pub fn block_profile(f: &Modes) -> Vec<f64> {
    block_l2_norms(f)
        .iter()
        .enumerate()
        .map(|(i, b)| block_scale(i as u32 + 1).powf(1.5) * b)
        .collect()
}

/// Coefficients of the product of two band-limited functions, exact up to
/// `|k| ≤ K1 + K2`.
pub fn product(f: &Modes, g: &Modes) -> Modes {
    let k_out = f.k_max() + g.k_max();
    let m = (2 * k_out + 2).next_power_of_two();
    let a = synthesize_modes(&f.resized(k_out), m, 0.0, TransformPath::Auto);
    let b = synthesize_modes(&g.resized(k_out), m, 0.0, TransformPath::Auto);
    let prod: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    analyze_samples(&prod, k_out, 0.0, TransformPath::Auto)
}

/// `C_n = Σ_k |A_k||B_{n−k}|`, the majorant sequence of the convolution.
pub fn convolve_abs(a: &Modes, b: &Modes) -> Modes {
    let k_out = a.k_max() + b.k_max();
    let mut out = Modes::zeros(k_out);
    for (ka, ca) in a.iter() {
        for (kb, cb) in b.iter() {
            let k = ka + kb;
            out.set(k, out.get(k) + ca.norm() * cb.norm());
        }
    }
    out
}

/// Time samples `0` and `2^{j/2}·2^{−12}` up to `t_max`.
pub fn time_lattice(per_octave: u32, t_max: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut j = 0;
    loop {
        let t = 2f64.powf(j as f64 / per_octave as f64) * 2f64.powi(-12);
        if t > t_max {
            break;
        }
        out.push(t);
        j += 1;
    }
    out
}

/// Size and resolution of a randomized product-estimate suite; `refined`
/// doubles both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductSuite {
    pub instances: usize,
    pub k_max: usize,
    pub per_octave: u32,
    pub t_max: f64,
    pub seed: u64,
}

impl ProductSuite {
    pub fn refined(&self) -> Self {
        Self {
            k_max: 2 * self.k_max,
            per_octave: 2 * self.per_octave,
            ..*self
        }
    }
}

/// Random parabolic family `a_k(t) = ζ_k |k|^{−p} e^{−c|k|t}` on `|k| ≤ K`.
///
/// The amplitudes depend on `k` only, so a refined suite extends the same
/// family to more modes.
struct ParabolicFamily {
    p: f64,
    c: f64,
    phases: Vec<(i64, f64, f64)>,
}

impl ParabolicFamily {
    fn random(rng: &mut ChaCha8Rng, k_cap: i64) -> Self {
        let p = rng.gen_range(1.2..3.0);
        let c = rng.gen_range(0.2..2.0);
        let phases = (-k_cap..=k_cap)
            .map(|k| (k, rng.gen_range(0.0..1.0), rng.gen_range(0.0..2.0 * PI)))
            .collect();
        Self { p, c, phases }
    }

    fn at(&self, k_max: usize, t: f64) -> Modes {
        let mut out = Modes::zeros(k_max);
        for &(k, r, th) in &self.phases {
            if out.contains(k) {
                let amp = r * (1.0 + k.abs() as f64).powf(-self.p) * (-self.c * k.abs() as f64 * t).exp();
                out.set(k, Complex64::from_polar(amp, th));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProductCheck {
    pub name: String,
    /// `‖C‖ / (‖A‖·‖B‖)` for each instance.
    pub ratios: Vec<f64>,
    pub fitted_constant: f64,
}

impl ProductCheck {
    fn new(name: &str, ratios: Vec<f64>) -> Self {
        let fitted_constant = ratios.iter().cloned().fold(0.0, f64::max);
        Self {
            name: name.into(),
            ratios,
            fitted_constant,
        }
    }

    /// Relative change between the constants fitted on the first and second
    /// half of the instances.
    pub fn half_split_change(&self) -> f64 {
        let (a, b) = self.ratios.split_at(self.ratios.len() / 2);
        let fit = |r: &[f64]| r.iter().cloned().fold(0.0, f64::max);
        let (fa, fb) = (fit(a), fit(b));
        (fa - fb).abs() / fa.max(fb)
    }

    /// `max/median − 1` and `1 − min/median`, the larger of the two.
    pub fn spread(&self) -> f64 {
        let mut r = self.ratios.clone();
        r.sort_by(f64::total_cmp);
        let med = r[r.len() / 2];
        (r[r.len() - 1] / med - 1.0).max(1.0 - r[0] / med)
    }
}

/// Convolution estimate for the `N` norm over random parabolic pairs.
pub fn convolution_check(suite: &ProductSuite) -> ProductCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(suite.seed);
    let k_cap = 4 * suite.k_max as i64;
    let times = time_lattice(suite.per_octave, suite.t_max);
    let ratios = (0..suite.instances)
        .map(|_| {
            let fa = ParabolicFamily::random(&mut rng, k_cap);
            let fb = ParabolicFamily::random(&mut rng, k_cap);
            let a: Vec<(f64, Modes)> = times.iter().map(|&t| (t, fa.at(suite.k_max, t))).collect();
            let b: Vec<(f64, Modes)> = times.iter().map(|&t| (t, fb.at(suite.k_max, t))).collect();
            let c: Vec<(f64, Modes)> = a.iter().zip(&b).map(|((t, x), (_, y))| (*t, convolve_abs(x, y))).collect();
            n_norm(&c) / (n_norm(&a) * n_norm(&b))
        })
        .collect();
    ProductCheck::new("n_norm_convolution", ratios)
}

/// `sup_t Z1'(Y1'·Y2')(t) / (‖Y1‖_{Z1}‖Y2‖_{Z1})`.
pub fn z1_algebra_check(y1: &[(f64, Modes)], y2: &[(f64, Modes)]) -> f64 {
    let num = y1
        .iter()
        .zip(y2)
        .map(|((t, a), (_, b))| z1_derivative_level_snapshot(&product(&derivative(a), &derivative(b)), *t))
        .fold(0.0, f64::max);
    let den = z1_norm(y1) * z1_norm(y2);
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Two random dyadic blocks, each decaying like `e^{−|k|t}`.
fn two_block_family(rng: &mut ChaCha8Rng, k_max: usize, times: &[f64], max_n: u32) -> Vec<(f64, Modes)> {
    let picks: Vec<(u32, Vec<(f64, f64)>)> = (0..2)
        .map(|_| {
            let n = rng.gen_range(1..=max_n);
            let width = 1usize << (n + 1);
            let coeffs = (0..2 * width + 1)
                .map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..2.0 * PI)))
                .collect();
            (n, coeffs)
        })
        .collect();
    times
        .iter()
        .map(|&t| {
            let mut f = Modes::zeros(k_max);
            for (n, coeffs) in &picks {
                let width = 1i64 << (n + 1);
                for (i, &(r, th)) in coeffs.iter().enumerate() {
                    let k = i as i64 - width;
                    if k == 0 || k == 1 || !f.contains(k) {
                        continue;
                    }
                    let w = phi(*n, k) * (-(k.abs() as f64) * t).exp();
                    f.set(k, f.get(k) + Complex64::from_polar(r * w * 2f64.powf(-1.5 * *n as f64), th));
                }
            }
            (t, f)
        })
        .collect()
}

/// Z1 algebra ratios over random two-block families.
pub fn z1_algebra_suite(suite: &ProductSuite) -> ProductCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(suite.seed);
    let times = time_lattice(suite.per_octave, suite.t_max);
    // blocks reach |k| ≤ 2^{n+1} ≤ K
    let max_n = (max_block(suite.k_max) - 1).clamp(1, 5);
    let ratios = (0..suite.instances)
        .map(|_| {
            let y1 = two_block_family(&mut rng, suite.k_max, &times, max_n);
            let y2 = two_block_family(&mut rng, suite.k_max, &times, max_n);
            z1_algebra_check(&y1, &y2)
        })
        .collect();
    ProductCheck::new("z1_algebra", ratios)
}

/// `ε e^{−2^n t} e^{i2^n s}` sampled at `times`.
pub fn single_block_family(eps: f64, n: u32, k_max: usize, times: &[f64]) -> Vec<(f64, Modes)> {
    let k = 1i64 << n;
    times
        .iter()
        .map(|&t| {
            let mut f = Modes::zeros(k_max);
            f.set(k, Complex64::from(eps * (-(k as f64) * t).exp()));
            (t, f)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, proptest, ProptestConfig};

    fn single(k_max: usize, k: i64, amp: f64) -> Modes {
        let mut m = Modes::zeros(k_max);
        m.set(k, Complex64::from(amp));
        m
    }

    fn random_modes(k_max: usize, seed: u64) -> Modes {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Modes::zeros(k_max);
        for k in m.k_range() {
            let s = 1.0 / (1.0 + (k as f64).powi(2));
            m.set(k, Complex64::new(rng.gen_range(-s..s), rng.gen_range(-s..s)));
        }
        m
    }

    #[test]
    fn single_mode_projection() {
        let f = single(8, 2, 1.0);
        assert_eq!(lp_project(&f, 1).get(2), Complex64::from(phi(1, 2)));
        assert_eq!(phi(1, 2), 1.0);
        assert_eq!(lp_project(&f, 2).get(2), Complex64::from(0.0));
    }

    #[test]
    fn partition_reconstructs_exactly() {
        for seed in 0..5 {
            let f = random_modes(40, seed);
            let d = DyadicDecomposition::new(&f);
            assert!(d.reconstruct().sub(&f).max_abs() < 1e-15);
        }
        // low block is exactly |k| ≤ 1
        let d = DyadicDecomposition::new(&random_modes(8, 9));
        for k in -8..=8i64 {
            assert_eq!(d.low.get(k) != Complex64::from(0.0), k.abs() <= 1);
        }
    }

    #[test]
    fn parseval_matches_quadrature() {
        let f = random_modes(32, 3);
        for n in 1..=max_block(32) {
            let p = lp_project(&f, n);
            let (a, b) = (l2_norm(&p), l2_norm_quadrature(&p, 128));
            assert!((a - b).abs() <= 1e-12 * a.max(1e-300), "n={n}");
        }
    }

    #[test]
    fn s_norm_single_mode() {
        let eps = 1e-3;
        let f = single(16, 2, eps);
        let expect = 2.0 * eps + 2f64.powf(1.5) * eps * (2.0 * PI).sqrt();
        assert!((s_norm(&f) - expect).abs() < 1e-15);
        assert_eq!(s_norm(&Modes::zeros(8)), 0.0);
    }

    #[test]
    fn wiener_single_mode() {
        let eps = 0.01;
        let f = single(16, 2, eps);
        assert!((wiener_snapshot(&f, 0.0) - 4.0 * eps).abs() < 1e-16);
        assert_eq!(wiener_dominant_shell(&f, 0.0), 1);
        assert_eq!(wiener_snapshot(&Modes::zeros(4), 0.7), 0.0);
    }

    #[test]
    fn z_snapshots() {
        let f = random_modes(16, 4);
        assert_eq!(z1_snapshot(&f, 0.0), s_norm(&f));
        assert_eq!(z2_snapshot(&f, 0.0), f64::INFINITY);
        assert_eq!(z2_snapshot(&Modes::zeros(8), 0.0), 0.0);

        // per-block decay e^{−2^n t} keeps z1 bounded uniformly in t
        let times = time_lattice(4, 50.0);
        for n in 1..5 {
            let fam = single_block_family(1.0, n, 32, &times);
            let start = z1_snapshot(&fam[0].1, 0.0);
            let sup = z1_norm(&fam);
            // (1+x)^{2/3}e^{−x} ≤ 1 bounds the block term; the sup-norm
            // term is bounded by (1+t)^{2/3}e^{−2t}
            assert!(sup <= start * 1.0 + 1e-12, "n={n}: {sup} vs {start}");
        }
    }

    #[test]
    fn z2_dominates_z1_on_trajectories() {
        // for t > 0: (2^n t)^{−1/3}(1+2^n t) ≥ (1+2^n t)^{2/3}
        let times: Vec<f64> = time_lattice(4, 20.0).into_iter().skip(1).collect();
        for n in 1..5 {
            let fam = single_block_family(1.0, n, 32, &times);
            let z2 = fam.iter().map(|(t, f)| z2_snapshot(f, *t)).fold(0.0, f64::max);
            let block_part = fam
                .iter()
                .map(|(t, f)| z1_snapshot(f, *t) - (1.0 + t).powf(2.0 / 3.0) * derivative_sup(f))
                .fold(0.0, f64::max);
            assert!(z2 >= block_part);
        }
    }

    #[test]
    fn truncation_monotonicity() {
        let f = random_modes(64, 8);
        let mut prev = (0.0, 0.0);
        for k in [4usize, 8, 16, 32, 64] {
            let g = f.resized(k);
            let cur = (s_norm(&g), wiener_snapshot(&g, 0.3));
            assert!(cur.1 >= prev.1);
            // the sup-norm part can shrink when modes are added, the
            // dyadic part cannot
            let blocks = block_profile(&g).iter().cloned().fold(0.0, f64::max);
            assert!(blocks + 1e-15 >= prev.0);
            prev = (blocks, cur.1);
        }
    }

    #[test]
    fn product_is_exact() {
        let a = random_modes(6, 1);
        let b = random_modes(5, 2);
        let p = product(&a, &b);
        for k in -11..=11i64 {
            let mut direct = Complex64::from(0.0);
            for (ka, ca) in a.iter() {
                direct += ca * b.get(k - ka);
            }
            assert!((p.get(k) - direct).norm() < 1e-14);
        }
    }

    #[test]
    fn algebra_check_examples() {
        let times = time_lattice(2, 10.0);
        let zero: Vec<(f64, Modes)> = times.iter().map(|&t| (t, Modes::zeros(64))).collect();
        let y1 = single_block_family(1e-2, 2, 64, &times);
        assert_eq!(z1_algebra_check(&y1, &zero), 0.0);
        let y2 = single_block_family(1e-2, 5, 64, &times);
        let r = z1_algebra_check(&y1, &y2);
        assert!(r.is_finite() && r > 0.0);
    }

    #[test]
    fn algebra_suite_is_stable() {
        let suite = ProductSuite {
            instances: 30,
            k_max: 64,
            per_octave: 2,
            t_max: 16.0,
            seed: 12,
        };
        let check = z1_algebra_suite(&suite);
        assert_eq!(check.ratios.len(), 30);
        assert!(check.fitted_constant.is_finite());
        assert!(check.half_split_change() <= 0.5, "{check:?}");
    }

    #[test]
    fn convolution_suite_is_bounded() {
        let suite = ProductSuite {
            instances: 10,
            k_max: 16,
            per_octave: 1,
            t_max: 8.0,
            seed: 5,
        };
        let c = convolution_check(&suite);
        assert!(c.fitted_constant.is_finite() && c.fitted_constant > 0.0);
        assert!(c.ratios.iter().all(|&r| r < 10.0), "{:?}", c.ratios);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn norms_are_homogeneous(seed in 0u64..1000, s in 0.01f64..10.0, t in 0.0f64..4.0) {
            let f = random_modes(16, seed);
            let g = f.map(|_, c| c * s);
            prop_assert!((s_norm(&g) - s * s_norm(&f)).abs() <= 1e-12 * s * s_norm(&f));
            prop_assert!((wiener_snapshot(&g, t) - s * wiener_snapshot(&f, t)).abs() <= 1e-12 * s * wiener_snapshot(&f, t));
            prop_assert!(z1_snapshot(&f, t) >= 0.0);
        }
    }
}
