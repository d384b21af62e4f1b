//! The nonlinearity `𝒩`, its linearization `𝒩₁ = Σ c_k e^{iks}` about the
//! circle `a0 + (1+a1)e^{is}`, and the residual `𝓛 = 𝒩 − 𝒩₁`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::{CurveSplit, FourierCurve};
use crate::error::{PeskinError, Result};
use crate::spectral::{analyze_samples, check_grid, synthesize_modes, Modes, TransformPath};
use crate::tension::{LinearCoefficients, TensionLaw};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Lower bound on `|𝒳(r) − 𝒳(s)| / |2 sin((s−r)/2)|` over all sampled pairs.
pub const CHORD_ARC_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearityEvaluation {
    /// `𝒩̂_k` for `|k| ≤ K`.
    pub n_modes: Modes,
    /// `𝒩(s_j)` at `s_j = 2πj/M`.
    pub grid_values: Vec<Complex64>,
    pub quadrature_m: usize,
}

/// Per-offset weights of the inner sum: `g_l = e^{iθ_l/2}/(2 sin(θ_l/2))`
/// and `e^{iθ_l}` with `θ_l = (2l+1)π/M`.
fn offset_weights(m: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    (0..m)
        .map(|l| {
            let theta = (2 * l + 1) as f64 * PI / m as f64;
            (
                Complex64::from_polar(1.0, 0.5 * theta) / (2.0 * (0.5 * theta).sin()),
                Complex64::from_polar(1.0, theta),
            )
        })
        .unzip()
}

/// Evaluates `𝒩` at `s_j = 2πj/M`.
///
/// With `𝒳 = e^{is} + X`, `w(r) = 1 − ie^{−ir}X'(r)` and
/// `X̃(s,r) = e^{−i(s+r)/2}(X(r)−X(s)) / (2 sin((s−r)/2))`,
///
/// `𝒩(s) = (−i/4π) p.v.∫ Re[e^{−i(s−r)} w² / (1+iX̃)²] · e^{i(s+r)/2}(1+iX̃)
///          / (2 sin((s−r)/2)) · T(|w|) dr`.
///
/// The inner integral runs over `r = s_j + (2l+1)π/M`, the grid offset by
/// half a step, so `r = s` is never sampled. Each outer point is an
/// independent fixed-order sum, which keeps the result bit-reproducible for
/// any thread count.
pub fn eval_nonlinearity(curve: &FourierCurve, law: &TensionLaw, m: usize) -> Result<NonlinearityEvaluation> {
    let k_max = curve.k_max();
    check_grid(m, k_max)?;
    let half = PI / m as f64;

    let x_outer = synthesize_modes(&curve.modes, m, 0.0, TransformPath::Auto);
    let x_inner = synthesize_modes(&curve.modes, m, half, TransformPath::Auto);
    let dx_inner = synthesize_modes(&curve.derivative(), m, half, TransformPath::Auto);

    // per inner node: w², T(|w|)
    let mut q = Vec::with_capacity(m);
    let mut tens = Vec::with_capacity(m);
    for (i, dx) in dx_inner.iter().enumerate() {
        let r = (2 * i + 1) as f64 * half;
        let w = 1.0 - I * Complex64::from_polar(1.0, -r) * dx;
        let stretch = w.norm();
        law.check_domain(stretch)?;
        q.push(w * w);
        tens.push(law.small_t_unchecked(stretch));
    }
    let (g, e_theta) = offset_weights(m);

    let outer: Vec<std::result::Result<Complex64, (f64, usize, usize)>> = (0..m)
        .into_par_iter()
        .map(|j| {
            let s = 2.0 * PI * j as f64 / m as f64;
            let e_minus_s = Complex64::from_polar(1.0, -s);
            let xs = x_outer[j];
            let mut acc = ZERO;
            let mut worst = (f64::INFINITY, 0usize);
            for l in 0..m {
                let i = (j + l) % m;
                let xt = -e_minus_s * g[l].conj() * (x_inner[i] - xs);
                let d = 1.0 + I * xt;
                let ratio = d.norm();
                if ratio < worst.0 {
                    worst = (ratio, i);
                }
                let re = (e_theta[l] * q[i] / (d * d)).re;
                acc += re * g[l] * d * tens[i];
            }
            if worst.0 <= CHORD_ARC_THRESHOLD {
                Err((worst.0, j, worst.1))
            } else {
                Ok(I * Complex64::from_polar(1.0, s) * acc / (2.0 * m as f64))
            }
        })
        .collect();

    let mut grid_values = Vec::with_capacity(m);
    for v in outer {
        match v {
            Ok(z) => grid_values.push(z),
            Err((ratio, j, i)) => {
                return Err(PeskinError::Geometry {
                    ratio,
                    threshold: CHORD_ARC_THRESHOLD,
                    s: 2.0 * PI * j as f64 / m as f64,
                    r: (2 * i + 1) as f64 * half,
                })
            }
        }
    }
    let n_modes = analyze_samples(&grid_values, k_max, 0.0, TransformPath::Auto);
    Ok(NonlinearityEvaluation {
        n_modes,
        grid_values,
        quadrature_m: m,
    })
}

/// Smallest `|1 + iX̃|` over the quadrature pairs of an `M`-point grid,
/// with the `(s, r)` where it occurs.
pub fn chord_arc_ratio(curve: &FourierCurve, m: usize) -> (f64, f64, f64) {
    let half = PI / m as f64;
    let x_outer = synthesize_modes(&curve.modes, m, 0.0, TransformPath::Auto);
    let x_inner = synthesize_modes(&curve.modes, m, half, TransformPath::Auto);
    let (g, _) = offset_weights(m);
    let (ratio, j, i) = (0..m)
        .into_par_iter()
        .map(|j| {
            let e_minus_s = Complex64::from_polar(1.0, -2.0 * PI * j as f64 / m as f64);
            (0..m)
                .map(|l| {
                    let i = (j + l) % m;
                    let xt = -e_minus_s * g[l].conj() * (x_inner[i] - x_outer[j]);
                    ((1.0 + I * xt).norm(), j, i)
                })
                .fold((f64::INFINITY, 0, 0), |a, b| if b.0 < a.0 { b } else { a })
        })
        .reduce(|| (f64::INFINITY, 0, 0), |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    (ratio, 2.0 * PI * j as f64 / m as f64, (2 * i + 1) as f64 * half)
}

#[inline]
fn delta(k: i64, at: i64) -> f64 {
    if k == at {
        1.0
    } else {
        0.0
    }
}

/// `c_k` of the linearization with given coefficients `A`, `B` and base `a1`.
///
/// `c_k = −(A/8)(2|k| + |k−1| − |k+1|) a_k
///        − (B̃/8)(|k| − δ₁(k)) a_k
///        + (B/8)((1+a1)²/|1+a1|)(|2−k| − δ₁(2−k) − 2δ₂(2−k)) conj(a_{2−k})`,
///
/// with `c_0 = c_1 = 0`. Entries 0 and 1 of `y` are ignored.
pub fn linear_part_with(coeffs: &LinearCoefficients, y: &Modes) -> Modes {
    let gamma = coeffs.coupling();
    let mut out = Modes::zeros(y.k_max());
    for k in out.k_range() {
        if k == 0 || k == 1 {
            continue;
        }
        let a_k = y.get(k);
        let partner = 2 - k;
        let a_p = if partner == 0 || partner == 1 { ZERO } else { y.get(partner) };
        let ka = k.abs() as f64;
        let diag = coeffs.a * (2.0 * ka + (k - 1).abs() as f64 - (k + 1).abs() as f64)
            + coeffs.b_tilde * (ka - delta(k, 1));
        let off = (partner.abs() as f64 - delta(partner, 1) - 2.0 * delta(partner, 2)) * gamma;
        out.set(k, (-diag * a_k + off * a_p.conj()) / 8.0);
    }
    out
}

/// `c_k` from the curve's own `a1`.
pub fn eval_linear_part(split: &CurveSplit, law: &TensionLaw) -> Result<Modes> {
    let coeffs = law.linear_coefficients(split.a1)?;
    Ok(linear_part_with(&coeffs, &split.y))
}

/// `𝓛_k = 𝒩̂_k − c_k`.
pub fn eval_residual(curve: &FourierCurve, law: &TensionLaw, m: usize) -> Result<Modes> {
    let eval = eval_nonlinearity(curve, law, m)?;
    let c = eval_linear_part(&curve.split(), law)?;
    Ok(eval.n_modes.sub(&c))
}

/// Pass threshold of [`linearization_check`].
pub const LINEARIZATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobianColumn {
    pub k: i64,
    /// `"re"` or `"im"` perturbation direction.
    pub direction: &'static str,
    pub abs_err: f64,
    /// `abs_err / max_j |c_j|`, or `abs_err` when the closed form vanishes.
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearizationReport {
    pub law: String,
    pub a1: Complex64,
    #[serde(rename = "K")]
    pub k_max: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub delta: f64,
    pub columns: Vec<JacobianColumn>,
    pub max_rel_err: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Central differences of `𝒩̂` at the circle `(1 + a1)e^{is}` in the
/// directions `e^{iks}` and `i·e^{iks}`, `|k| ≤ k_check`, compared against
/// the closed-form `c_k`.
pub fn linearization_check(
    law: &TensionLaw,
    a1: Complex64,
    k_check: i64,
    k_max: usize,
    m: usize,
    delta: f64,
) -> Result<LinearizationReport> {
    if k_check < 0 || k_check as usize > k_max {
        return crate::error::invalid(format!("check range {k_check} must lie in [0, K = {k_max}]"));
    }
    let coeffs = law.linear_coefficients(a1)?;
    let mut base = Modes::zeros(k_max);
    base.set(1, a1);
    let at = |y: &Modes| eval_nonlinearity(&FourierCurve::from_modes(base.axpy(Complex64::new(1.0, 0.0), y)), law, m);
    let mut columns = Vec::new();
    for k in -k_check..=k_check {
        for (direction, dir) in [("re", Complex64::new(1.0, 0.0)), ("im", I)] {
            let mut y = Modes::zeros(k_max);
            y.set(k, dir * delta);
            let plus = at(&y)?.n_modes;
            let minus = at(&y.map(|_, z| -z))?.n_modes;
            let fd = plus.sub(&minus).map(|_, z| z / (2.0 * delta));
            let mut unit = Modes::zeros(k_max);
            unit.set(k, dir);
            let exact = linear_part_with(&coeffs, &unit);
            let abs_err = fd.sub(&exact).max_abs();
            let scale = exact.max_abs();
            columns.push(JacobianColumn {
                k,
                direction,
                abs_err,
                rel_err: if scale > 0.0 { abs_err / scale } else { abs_err },
            });
        }
    }
    let max_rel_err = columns.iter().map(|c| c.rel_err).fold(0.0, f64::max);
    Ok(LinearizationReport {
        law: law.label(),
        a1,
        k_max,
        m,
        delta,
        columns,
        max_rel_err,
        threshold: LINEARIZATION_TOLERANCE,
        pass: max_rel_err <= LINEARIZATION_TOLERANCE,
    })
}
