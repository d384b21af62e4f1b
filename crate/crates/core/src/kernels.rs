//! Torus kernels: the principal-value identities `I_k`, `J_k`, the dyadic
//! bumps `φ_n`, and the kernels `ψ_n`, `L_n`, `L̃_n` with numerical checks of
//! their integrability bounds.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral::{synthesize_modes, Modes, TransformPath};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn mollifier(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth cutoff: 1 on `[−1, 1]`, 0 outside `[−2, 2]`.
pub fn cutoff(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let up = mollifier(2.0 - a);
        up / (up + mollifier(a - 1.0))
    }
}

/// Annular mother bump `φ(x) = χ(x) − χ(2x)`, supported in `1/2 ≤ |x| ≤ 2`.
pub fn mother_bump(x: f64) -> f64 {
    cutoff(x) - cutoff(2.0 * x)
}

/// Littlewood-Paley weight `φ_n(k) = φ(k/2^n)`, `n ≥ 0`.
///
/// `Σ_{n≥0} φ_n(k) = 1` for every `|k| ≥ 1`; only `k = 0` is left for the
/// low-mode remainder.
pub fn phi(n: u32, k: i64) -> f64 {
    mother_bump(k as f64 / (1u64 << n) as f64)
}

/// One dyadic block: weights on `|k| ∈ [2^{n−1}, 2^{n+1}]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicBump {
    pub n: u32,
}

impl DyadicBump {
    pub fn weight(&self, k: i64) -> f64 {
        phi(self.n, k)
    }

    /// Frequencies with nonzero weight, `k ≥ 0` side.
    pub fn support(&self) -> std::ops::RangeInclusive<i64> {
        let lo = if self.n == 0 { 1 } else { 1i64 << (self.n - 1) };
        lo..=(1i64 << (self.n + 1))
    }
}

/// `I_k = (1/2π) p.v.∫ e^{−iα/2}e^{−ikα}/(2 sin(α/2)) dα`.
pub fn ik_exact(k: i64) -> Complex64 {
    if k >= 0 {
        Complex64::new(0.0, -0.5)
    } else {
        Complex64::new(0.0, 0.5)
    }
}

/// `J_k = (1/2π) p.v.∫ (e^{−ikα} − 1)/(4 sin²(α/2)) dα = −|k|/2`.
pub fn jk_exact(k: i64) -> f64 {
    -(k.unsigned_abs() as f64) / 2.0
}

fn check_pv_grid(k: i64, m: usize) -> Result<()> {
    if m == 0 || !m.is_multiple_of(2) {
        return invalid(format!("quadrature size M = {m} must be positive and even"));
    }
    let need = 8 * k.unsigned_abs() as usize + 8;
    if m < need {
        return invalid(format!("quadrature size M = {m} too small for k = {k} (need {need})"));
    }
    Ok(())
}

/// Midpoint nodes `α_j = (2j+1)π/M` in `(0, π)`; none of them hits the
/// singularity. Each is paired with its mirror `2π − α_j`, which keeps the
/// arguments small where the integrand is large.
fn half_nodes(m: usize) -> impl Iterator<Item = f64> {
    (0..m / 2).map(move |j| (2 * j + 1) as f64 * PI / m as f64)
}

/// Alternating-point trapezoidal approximation of `I_k`.
pub fn pv_quadrature_ik(k: i64, m: usize) -> Result<Complex64> {
    check_pv_grid(k, m)?;
    // e^{−i(k+½)α} − e^{i(k+½)α} = −2i sin((k+½)α) over the pair
    let kh = k as f64 + 0.5;
    let sum: f64 = half_nodes(m).map(|a| (kh * a).sin() / (0.5 * a).sin()).sum();
    Ok(Complex64::new(0.0, -sum / m as f64))
}

/// Alternating-point trapezoidal approximation of `J_k`.
pub fn pv_quadrature_jk(k: i64, m: usize) -> Result<Complex64> {
    check_pv_grid(k, m)?;
    // e^{−ikα} − 1 = −2 sin²(kα/2) − i sin(kα); the imaginary part cancels
    // over the pair and the real part is a Fejér-type square.
    let sum: f64 = half_nodes(m)
        .map(|a| {
            let q = (0.5 * k as f64 * a).sin() / (0.5 * a).sin();
            -q * q
        })
        .sum();
    Ok(Complex64::new(sum / m as f64, 0.0))
}

/// Largest errors of the quadrature over `|k| ≤ k_max`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityReport {
    pub k_max: i64,
    pub m: usize,
    pub max_err_ik: f64,
    pub max_err_jk: f64,
}

pub fn identity_report(k_max: i64, m: usize) -> Result<IdentityReport> {
    let mut max_err_ik: f64 = 0.0;
    let mut max_err_jk: f64 = 0.0;
    for k in -k_max..=k_max {
        max_err_ik = max_err_ik.max((pv_quadrature_ik(k, m)? - ik_exact(k)).norm());
        max_err_jk = max_err_jk.max((pv_quadrature_jk(k, m)? - jk_exact(k)).norm());
    }
    Ok(IdentityReport {
        k_max,
        m,
        max_err_ik,
        max_err_jk,
    })
}

/// Frequencies `k ≠ 1` where `φ_{n+2}(k) ≠ 0`.
fn psi_support(n: u32) -> impl Iterator<Item = i64> {
    let hi = 1i64 << (n + 3);
    (-hi..=hi).filter(move |&k| k != 1 && phi(n + 2, k) != 0.0)
}

/// Fourier coefficients of `ψ_n^{(order)}`.
pub fn psi_modes(n: u32, order: u32) -> Modes {
    let k_max = 1usize << (n + 3);
    let mut modes = Modes::zeros(k_max);
    for k in psi_support(n) {
        modes.set(k, phi(n + 2, k) * (I * k as f64).powu(order));
    }
    modes
}

/// `ψ_n(s) = Σ_{k≠1} φ_{n+2}(k) e^{isk}`.
pub fn psi_n(n: u32, s: f64) -> Complex64 {
    psi_deriv(n, 0, s)
}

/// `ψ_n^{(order)}(s)` by direct summation.
pub fn psi_deriv(n: u32, order: u32, s: f64) -> Complex64 {
    psi_support(n)
        .map(|k| phi(n + 2, k) * (I * k as f64).powu(order) * Complex64::from_polar(1.0, k as f64 * s))
        .sum()
}

/// `ψ_n^{(order)}` on `s_j = 2πj/n_s`.
pub fn psi_on_grid(n: u32, order: u32, n_s: usize) -> Vec<Complex64> {
    synthesize_modes(&psi_modes(n, order), n_s, 0.0, TransformPath::Auto)
}

/// `L_n(s, α) = e^{−iα/2}(ψ_n(s) − ψ_n(s−α)) / (2 sin(α/2))`.
///
/// For `|α| < 1e−8` the removable singularity is replaced by its limit `ψ_n'(s)`.
pub fn l_kernel(n: u32, s: f64, alpha: f64) -> Complex64 {
    if alpha.abs() < 1e-8 {
        return psi_deriv(n, 1, s);
    }
    Complex64::from_polar(1.0, -0.5 * alpha) * (psi_n(n, s) - psi_n(n, s - alpha))
        / (2.0 * (0.5 * alpha).sin())
}

/// `L_n` by its defining Fourier sum over `k ∉ {0, 1}`.
pub fn l_kernel_sum(n: u32, s: f64, alpha: f64) -> Complex64 {
    let pref = Complex64::from_polar(1.0, -0.5 * alpha) / (2.0 * (0.5 * alpha).sin());
    psi_support(n)
        .filter(|&k| k != 0)
        .map(|k| {
            phi(n + 2, k)
                * (1.0 - Complex64::from_polar(1.0, -alpha * k as f64))
                * Complex64::from_polar(1.0, s * k as f64)
        })
        .sum::<Complex64>()
        * pref
}

/// How the factor `min{1, 2^n α}` of the correction term is read for
/// negative `α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionForm {
    /// `sgn(α)·min{1, 2^n|α|}`: odd in `α`, matching the Taylor term `α ψ_n'`.
    Odd,
    /// `min{1, 2^n α}` taken literally.
    Literal,
}

fn correction_weight(n: u32, alpha: f64, form: CorrectionForm) -> f64 {
    let scale = (1u64 << n) as f64;
    let w = match form {
        CorrectionForm::Odd => alpha.signum() * (scale * alpha.abs()).min(1.0),
        CorrectionForm::Literal => (scale * alpha).min(1.0),
    };
    w / scale
}

/// `L̃_n(s, α) = L_n(s, α) − e^{−iα/2}/(2 sin(α/2))·min{1, 2^n α}·2^{−n}·ψ_n'(s)`.
pub fn l_tilde_kernel(n: u32, s: f64, alpha: f64, form: CorrectionForm) -> Complex64 {
    if alpha.abs() < 1e-8 {
        // ψ(s) − ψ(s−α) − αψ'(s) = O(α²) over 2 sin(α/2) ≈ α
        return Complex64::new(0.0, 0.0);
    }
    let w = correction_weight(n, alpha, form);
    l_kernel(n, s, alpha)
        - Complex64::from_polar(1.0, -0.5 * alpha) / (2.0 * (0.5 * alpha).sin()) * w * psi_deriv(n, 1, s)
}

/// `1 − e^{−ix}` without cancellation for small `x`.
fn one_minus_expi(x: f64) -> Complex64 {
    let h = (0.5 * x).sin();
    Complex64::new(2.0 * h * h, x.sin())
}

/// `sin x − x` without cancellation for small `x`.
fn sin_minus_x(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        // −x³/6 + x⁵/120 − x⁷/5040 + x⁹/362880
        -x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    } else {
        x.sin() - x
    }
}

/// `L_n(·, α)` on `s_j = 2πj/n_s` via its Fourier multipliers.
pub fn l_on_grid(n: u32, alpha: f64, n_s: usize) -> Vec<Complex64> {
    let pref = Complex64::from_polar(1.0, -0.5 * alpha) / (2.0 * (0.5 * alpha).sin());
    let mut modes = psi_modes(n, 0);
    for k in modes.k_range() {
        let c = modes.get(k);
        if c != Complex64::new(0.0, 0.0) {
            modes.set(k, c * pref * one_minus_expi(alpha * k as f64));
        }
    }
    synthesize_modes(&modes, n_s, 0.0, TransformPath::Auto)
}

/// `L̃_n(·, α)` on `s_j = 2πj/n_s`.
///
/// In the small-`α` regime the multiplier `1 − e^{−iαk} − iαk` is evaluated
/// without cancellation so that the `O(2^{2n}|α|)` size is resolved.
pub fn l_tilde_on_grid(n: u32, alpha: f64, n_s: usize, form: CorrectionForm) -> Vec<Complex64> {
    let pref = Complex64::from_polar(1.0, -0.5 * alpha) / (2.0 * (0.5 * alpha).sin());
    let w = correction_weight(n, alpha, form);
    let exact_taylor = (w - alpha).abs() <= 1e-15 * alpha.abs();
    let mut modes = psi_modes(n, 0);
    for k in modes.k_range() {
        let c = modes.get(k);
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let x = alpha * k as f64;
        let mult = if exact_taylor {
            // 1 − e^{−ix} − ix = 2 sin²(x/2) + i(sin x − x)
            let h = (0.5 * x).sin();
            Complex64::new(2.0 * h * h, sin_minus_x(x))
        } else {
            one_minus_expi(x) - I * w * k as f64
        };
        modes.set(k, c * pref * mult);
    }
    synthesize_modes(&modes, n_s, 0.0, TransformPath::Auto)
}

/// `∫_T |f| ds` by the trapezoidal rule on the uniform grid.
pub fn l1_on_grid(values: &[Complex64]) -> f64 {
    values.iter().map(|z| z.norm()).sum::<f64>() * 2.0 * PI / values.len() as f64
}

/// A test lattice for the kernel bounds: dyadic block indices, a geometric
/// `α` lattice (both signs), and an `s` quadrature size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelLattice {
    pub n_max: u32,
    /// `α = ±π·2^{−j/density}` for `j = 0..=octaves·density`.
    pub octaves: u32,
    pub density: u32,
    pub n_s: usize,
}

impl KernelLattice {
    pub fn coarse() -> Self {
        Self {
            n_max: 6,
            octaves: 14,
            density: 2,
            n_s: 2048,
        }
    }

    /// Twice as many `α` points and `s` points.
    pub fn refined(&self) -> Self {
        Self {
            density: 2 * self.density,
            n_s: 2 * self.n_s,
            ..*self
        }
    }

    pub fn alphas(&self) -> Vec<f64> {
        let count = self.octaves * self.density;
        let mut out = Vec::with_capacity(2 * count as usize + 2);
        for j in 0..=count {
            let a = PI * 2f64.powf(-(j as f64) / self.density as f64);
            // stay just inside the torus at ±π
            let a = if j == 0 { a * (1.0 - 1e-9) } else { a };
            out.push(a);
            out.push(-a);
        }
        out
    }
}

/// One fitted constant: `sup` of the ratio of integral to bound over a lattice.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundFit {
    pub name: String,
    pub constant: f64,
    /// Supremum for each block index `n = 0..=n_max`.
    pub per_n: Vec<f64>,
    /// Where the supremum is attained.
    pub n_at_max: u32,
    pub alpha_at_max: f64,
}

#[derive(Debug, Clone, Default)]
struct Fit {
    c: f64,
    n: u32,
    alpha: f64,
    per_n: Vec<f64>,
}

impl Fit {
    fn push(&mut self, ratio: f64, n: u32, alpha: f64) {
        if self.per_n.len() <= n as usize {
            self.per_n.resize(n as usize + 1, 0.0);
        }
        self.per_n[n as usize] = self.per_n[n as usize].max(ratio);
        if ratio > self.c {
            self.c = ratio;
            self.n = n;
            self.alpha = alpha;
        }
    }

    fn finish(self, name: &str) -> BoundFit {
        BoundFit {
            name: name.to_string(),
            constant: self.c,
            per_n: self.per_n,
            n_at_max: self.n,
            alpha_at_max: self.alpha,
        }
    }
}

/// Fitted constants for:
/// `∫|ψ_n^{(m)}| ≲ 2^{mn}` (m = 0, 1, 2), `∫|L_n| ≲ min{2^n, |α|^{−1}}`,
/// `∫|L̃_n| ≲ min{2^{2n}|α|, |α|^{−1}}` and
/// `∫|∂_α L̃_n| ≲ min{2^{2n}, |α|^{−2}}`, the last by central differences.
///
/// For `2^n|α| > 1` the term `ψ_n'(s−α)/(2 sin(α/2))` of `∂_α L̃_n` has mass
/// of order `2^n/|α|`, so the last constant grows like `2^n` across blocks.
/// It is also fitted against `min{2^{2n}, 2^n|α|^{−1}}`, which is uniform.
pub fn fit_kernel_bounds(lattice: &KernelLattice) -> Vec<BoundFit> {
    let mut psi_fits = [Fit::default(), Fit::default(), Fit::default()];
    let mut l_fit = Fit::default();
    let mut lt_fit = Fit::default();
    let mut dlt_fit = Fit::default();
    let mut dlt_sharp_fit = Fit::default();
    let alphas = lattice.alphas();
    for n in 0..=lattice.n_max {
        let scale = (1u64 << n) as f64;
        for (order, fit) in psi_fits.iter_mut().enumerate() {
            let mass = l1_on_grid(&psi_on_grid(n, order as u32, lattice.n_s));
            fit.push(mass / scale.powi(order as i32), n, 0.0);
        }
        for &alpha in &alphas {
            let a = alpha.abs();
            let l_mass = l1_on_grid(&l_on_grid(n, alpha, lattice.n_s));
            l_fit.push(l_mass / scale.min(1.0 / a), n, alpha);

            let lt_mass = l1_on_grid(&l_tilde_on_grid(n, alpha, lattice.n_s, CorrectionForm::Odd));
            lt_fit.push(lt_mass / (scale * scale * a).min(1.0 / a), n, alpha);

            let h = 1e-4 * a;
            let plus = l_tilde_on_grid(n, alpha + h, lattice.n_s, CorrectionForm::Odd);
            let minus = l_tilde_on_grid(n, alpha - h, lattice.n_s, CorrectionForm::Odd);
            let deriv: Vec<Complex64> = plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect();
            let dlt_mass = l1_on_grid(&deriv);
            dlt_fit.push(dlt_mass / (scale * scale).min(1.0 / (a * a)), n, alpha);
            dlt_sharp_fit.push(dlt_mass / (scale * scale).min(scale / a), n, alpha);
        }
    }
    let [p0, p1, p2] = psi_fits;
    vec![
        p0.finish("psi_l1"),
        p1.finish("psi_prime_l1"),
        p2.finish("psi_second_l1"),
        l_fit.finish("l_kernel_l1"),
        lt_fit.finish("l_tilde_l1"),
        dlt_fit.finish("l_tilde_dalpha_l1"),
        dlt_sharp_fit.finish("l_tilde_dalpha_l1_sharp"),
    ]
}

/// Coarse and refined fits side by side.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundStability {
    pub name: String,
    pub coarse: f64,
    pub refined: f64,
    pub relative_change: f64,
    /// Refined-lattice constant per block index.
    pub per_n: Vec<f64>,
}

pub fn bound_stability(lattice: &KernelLattice) -> Vec<BoundStability> {
    let coarse = fit_kernel_bounds(lattice);
    let fine = fit_kernel_bounds(&lattice.refined());
    coarse
        .into_iter()
        .zip(fine)
        .map(|(c, f)| BoundStability {
            relative_change: (f.constant - c.constant).abs() / c.constant,
            per_n: f.per_n,
            name: c.name,
            coarse: c.constant,
            refined: f.constant,
        })
        .collect()
}

/// Full report emitted by `verify-kernels`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelReport {
    pub identities: IdentityReport,
    pub identity_threshold: f64,
    pub dual_formula_max_err: f64,
    pub dual_formula_threshold: f64,
    /// Max over the lattice of `|L̃_n^{literal} − L̃_n^{odd}|`, reported only.
    pub literal_vs_odd_max_diff: f64,
    pub bounds: Vec<BoundStability>,
    pub stability_threshold: f64,
    pub pass: bool,
}

/// Max discrepancy between the two formulas for `L_n` on a fixed
/// pseudo-random set of `(n, s, α)`.
pub fn dual_formula_error(samples: usize, n_max: u32) -> f64 {
    let mut worst: f64 = 0.0;
    // golden-ratio sequences: deterministic and well spread
    let g = 0.618_033_988_749_894_9_f64;
    for i in 0..samples {
        let n = (i as u32) % (n_max + 1);
        let s = 2.0 * PI * ((i as f64 + 1.0) * g).fract();
        let alpha = PI * (2.0 * ((i as f64 + 1.0) * g * g).fract() - 1.0);
        if alpha.abs() < 1e-6 {
            continue;
        }
        let a = l_kernel(n, s, alpha);
        let b = l_kernel_sum(n, s, alpha);
        worst = worst.max((a - b).norm() / (1.0f64).max(b.norm()));
    }
    worst
}

pub fn kernel_report(lattice: &KernelLattice) -> Result<KernelReport> {
    let identities = identity_report(64, 1024)?;
    let dual = dual_formula_error(50, lattice.n_max);
    let mut literal_diff: f64 = 0.0;
    for n in 0..=lattice.n_max {
        for &alpha in &lattice.alphas() {
            let a = l_tilde_kernel(n, 0.3, alpha, CorrectionForm::Literal);
            let b = l_tilde_kernel(n, 0.3, alpha, CorrectionForm::Odd);
            literal_diff = literal_diff.max((a - b).norm());
        }
    }
    let bounds = bound_stability(lattice);
    let identity_threshold = 1e-12;
    let dual_formula_threshold = 1e-10;
    let stability_threshold = 0.2;
    let pass = identities.max_err_ik <= identity_threshold
        && identities.max_err_jk <= identity_threshold
        && dual <= dual_formula_threshold
        && bounds
            .iter()
            .all(|b| b.coarse.is_finite() && b.refined.is_finite() && b.relative_change <= stability_threshold);
    Ok(KernelReport {
        identities,
        identity_threshold,
        dual_formula_max_err: dual,
        dual_formula_threshold,
        literal_vs_odd_max_diff: literal_diff,
        bounds,
        stability_threshold,
        pass,
    })
}
