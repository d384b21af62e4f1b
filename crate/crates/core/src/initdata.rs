//! Initial perturbations `Y0` of the unit circle.
//!
//! Corners are radial tent perturbations `X0 = e^{is}·amp·h(s)` where `h` is a
//! sum of periodic tents; their spectrum is known in closed form.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curve::FourierCurve;
use crate::error::{invalid, PeskinError, Result};
use crate::nonlin::{chord_arc_ratio, CHORD_ARC_THRESHOLD};
use crate::norms::{l2_norm, s_norm, sup_grid, wiener_snapshot};
use crate::spectral::Modes;

/// Relative tail level above which a warning is attached to the report.
pub const TAIL_WARNING_LEVEL: f64 = 1e-6;

/// Tail sums `Σ_{K<|k|≤cap}` stop at `cap = TAIL_CAP_FACTOR·K`.
pub const TAIL_CAP_FACTOR: usize = 64;

fn default_half_width() -> f64 {
    PI / 4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitKind {
    SingleMode {
        k: i64,
        /// `[re, im]`.
        amplitude: [f64; 2],
        #[serde(default)]
        allow_steady: bool,
    },
    RandomDecay {
        exponent: f64,
        seed: u64,
        amplitude: f64,
    },
    Corner {
        positions: Vec<f64>,
        strengths: Vec<f64>,
        amplitude: f64,
        #[serde(default = "default_half_width")]
        half_width: f64,
    },
    Polygonal {
        vertices: usize,
        amplitude: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormName {
    /// `‖Y‖_S`.
    S,
    /// `‖Y‖_W` at `t = 0`.
    W,
    /// `‖Y‖_{L²}`.
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetNorm {
    pub norm: NormName,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDataSpec {
    #[serde(flatten)]
    pub kind: InitKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_norm: Option<TargetNorm>,
}

impl InitialDataSpec {
    pub fn new(kind: InitKind) -> Self {
        Self { kind, target_norm: None }
    }

    pub fn with_target(mut self, norm: NormName, value: f64) -> Self {
        self.target_norm = Some(TargetNorm { norm, value });
        self
    }
}

/// Norms of the generated data and its truncation tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitReport {
    pub s_norm: f64,
    pub w_norm: f64,
    pub l2_norm: f64,
    /// `Σ_{K<|k|≤cap} |a_k||k|` from the closed-form spectrum.
    pub tail_w: f64,
    pub tail_cap: usize,
    pub tail_warning: bool,
    pub chord_arc_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedData {
    pub curve: FourierCurve,
    pub report: InitReport,
}

/// Fourier coefficient of the tent `max(0, 1 − |s|/w)` on `T`:
/// `ĥ(j) = 2 sin²(jw/2)/(π j² w)`, `ĥ(0) = w/(2π)`.
pub fn tent_coefficient(j: i64, half_width: f64) -> f64 {
    if j == 0 {
        return half_width / (2.0 * PI);
    }
    let jf = j as f64;
    let h = (0.5 * jf * half_width).sin();
    2.0 * h * h / (PI * jf * jf * half_width)
}

/// Periodic tent evaluated pointwise.
pub fn tent(s: f64, half_width: f64) -> f64 {
    let d = (s + PI).rem_euclid(2.0 * PI) - PI;
    (1.0 - d.abs() / half_width).max(0.0)
}

fn is_mean_or_shift(k: i64) -> bool {
    k == 0 || k == 1
}

pub fn make_single_mode(k_max: usize, k: i64, amp: Complex64, allow_steady: bool) -> Result<FourierCurve> {
    if is_mean_or_shift(k) && !allow_steady {
        return invalid(format!("mode {k} is a translation/dilation mode; set allow_steady to perturb it"));
    }
    if k.unsigned_abs() as usize > k_max {
        return invalid(format!("mode {k} exceeds truncation K = {k_max}"));
    }
    let mut modes = Modes::zeros(k_max);
    modes.set(k, amp);
    Ok(FourierCurve::from_modes(modes))
}

/// `a_k` of `e^{is}·amp·Σ_j strength_j·tent(s − p_j)`.
fn corner_coefficient(k: i64, positions: &[f64], strengths: &[f64], amp: f64, half_width: f64) -> Complex64 {
    let j = k - 1;
    let h = tent_coefficient(j, half_width);
    positions
        .iter()
        .zip(strengths)
        .map(|(&p, &w)| Complex64::from_polar(amp * w * h, -(j as f64) * p))
        .sum()
}

fn check_corner(positions: &[f64], strengths: &[f64], half_width: f64) -> Result<()> {
    if positions.is_empty() || positions.len() != strengths.len() {
        return invalid("corner positions and strengths must be non-empty and of equal length");
    }
    if !(half_width > 0.0 && half_width <= PI) {
        return invalid(format!("tent half-width {half_width} must lie in (0, π]"));
    }
    for (i, a) in positions.iter().enumerate() {
        for b in &positions[i + 1..] {
            let d = (a - b).rem_euclid(2.0 * PI);
            if d.min(2.0 * PI - d) < 1e-12 {
                return invalid(format!("corner positions {a} and {b} coincide"));
            }
        }
    }
    Ok(())
}

/// Tents at `positions`, projected onto `k ∉ {0, 1}` and truncated at `K`.
pub fn make_corner(k_max: usize, positions: &[f64], strengths: &[f64], amp: f64, half_width: f64) -> Result<FourierCurve> {
    check_corner(positions, strengths, half_width)?;
    let mut modes = Modes::zeros(k_max);
    for k in modes.k_range() {
        if !is_mean_or_shift(k) {
            modes.set(k, corner_coefficient(k, positions, strengths, amp, half_width));
        }
    }
    Ok(FourierCurve::from_modes(modes))
}

/// `N` equally spaced unit tents of half-width `π/N`, which meet at their
/// feet.
pub fn polygon_layout(vertices: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let positions = (0..vertices).map(|j| 2.0 * PI * j as f64 / vertices as f64).collect();
    (positions, vec![1.0; vertices], PI / vertices as f64)
}

pub fn make_polygonal(k_max: usize, vertices: usize, amp: f64) -> Result<FourierCurve> {
    if vertices < 2 {
        return invalid(format!("polygonal data needs at least 2 vertices, got {vertices}"));
    }
    let (p, s, w) = polygon_layout(vertices);
    make_corner(k_max, &p, &s, amp, w)
}

/// `a_k = amp·ζ_k·|k|^{−p}` for `k ∉ {0, 1}`, `ζ_k` uniform on the unit
/// circle, drawn in increasing `k` from `ChaCha8(seed)`.
pub fn make_random_decay(k_max: usize, exponent: f64, seed: u64, amp: f64) -> Result<FourierCurve> {
    if !(exponent > 1.0) {
        return invalid(format!("decay exponent {exponent} must exceed 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = Modes::zeros(k_max);
    for k in modes.k_range() {
        if is_mean_or_shift(k) {
            continue;
        }
        let theta: f64 = rng.gen_range(0.0..2.0 * PI);
        modes.set(k, Complex64::from_polar(amp * (k.abs() as f64).powf(-exponent), theta));
    }
    Ok(FourierCurve::from_modes(modes))
}

pub fn measure(norm: NormName, y: &Modes) -> f64 {
    match norm {
        NormName::S => s_norm(y),
        NormName::W => wiener_snapshot(y, 0.0),
        NormName::L2 => l2_norm(y),
    }
}

/// Scales the `Y` part so that the named norm equals `value`.
pub fn rescale_to(curve: &FourierCurve, target: TargetNorm) -> Result<FourierCurve> {
    if !(target.value >= 0.0) || !target.value.is_finite() {
        return invalid(format!("target norm value {} must be finite and non-negative", target.value));
    }
    let split = curve.split();
    let current = measure(target.norm, &split.y);
    if current == 0.0 {
        if target.value == 0.0 {
            return Ok(curve.clone());
        }
        return invalid("cannot rescale zero perturbation to a nonzero norm");
    }
    let factor = target.value / current;
    let mut scaled = split.clone();
    scaled.y = split.y.map(|_, c| c * factor);
    Ok(FourierCurve {
        modes: scaled.reassemble(),
        time: curve.time,
    })
}

/// `Σ_{K<|k|≤cap} |a_k||k|` from the generator's closed form.
fn tail_w(kind: &InitKind, k_max: usize, scale: f64) -> (f64, usize) {
    let cap = TAIL_CAP_FACTOR * k_max.max(1);
    let lo = k_max as i64 + 1;
    let hi = cap as i64;
    let ks = (lo..=hi).flat_map(|k| [k, -k]);
    let sum = match kind {
        InitKind::SingleMode { .. } => 0.0,
        InitKind::RandomDecay { exponent, amplitude, .. } => {
            ks.map(|k| amplitude.abs() * (k.abs() as f64).powf(1.0 - exponent)).sum()
        }
        InitKind::Corner {
            positions,
            strengths,
            amplitude,
            half_width,
        } => ks
            .map(|k| corner_coefficient(k, positions, strengths, *amplitude, *half_width).norm() * k.abs() as f64)
            .sum(),
        InitKind::Polygonal { vertices, amplitude } => {
            let (p, s, w) = polygon_layout(*vertices);
            ks.map(|k| corner_coefficient(k, &p, &s, *amplitude, w).norm() * k.abs() as f64)
                .sum()
        }
    };
    (sum * scale, cap)
}

/// Builds the data, applies the target norm and checks the chord-arc
/// condition on a grid of `sup_grid(K)` points.
pub fn generate(spec: &InitialDataSpec, k_max: usize) -> Result<GeneratedData> {
    let raw = match &spec.kind {
        InitKind::SingleMode {
            k,
            amplitude,
            allow_steady,
        } => make_single_mode(k_max, *k, Complex64::new(amplitude[0], amplitude[1]), *allow_steady)?,
        InitKind::RandomDecay {
            exponent,
            seed,
            amplitude,
        } => make_random_decay(k_max, *exponent, *seed, *amplitude)?,
        InitKind::Corner {
            positions,
            strengths,
            amplitude,
            half_width,
        } => make_corner(k_max, positions, strengths, *amplitude, *half_width)?,
        InitKind::Polygonal { vertices, amplitude } => make_polygonal(k_max, *vertices, *amplitude)?,
    };
    let (curve, scale) = match spec.target_norm {
        None => (raw, 1.0),
        Some(target) => {
            let before = measure(target.norm, &raw.split().y);
            let scaled = rescale_to(&raw, target)?;
            let scale = if before == 0.0 { 1.0 } else { target.value / before };
            (scaled, scale)
        }
    };
    let y = curve.split().y;
    let (ratio, s, r) = chord_arc_ratio(&curve, sup_grid(k_max));
    if ratio <= CHORD_ARC_THRESHOLD {
        return Err(PeskinError::Geometry {
            ratio,
            threshold: CHORD_ARC_THRESHOLD,
            s,
            r,
        });
    }
    let w_norm = wiener_snapshot(&y, 0.0);
    let (tail, cap) = tail_w(&spec.kind, k_max, scale);
    Ok(GeneratedData {
        report: InitReport {
            s_norm: s_norm(&y),
            w_norm,
            l2_norm: l2_norm(&y),
            tail_w: tail,
            tail_cap: cap,
            tail_warning: tail > TAIL_WARNING_LEVEL * w_norm,
            chord_arc_min: ratio,
        },
        curve,
    })
}
