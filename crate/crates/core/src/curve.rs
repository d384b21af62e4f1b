//! Spectral representation of the interface.
//!
//! A [`FourierCurve`] stores the perturbation `X = 𝒳 − e^{is}` through its
//! coefficients `a_k`, `|k| ≤ K`. The base circle `e^{is}` is never stored.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, PeskinError, Result};
use crate::spectral::{analyze_samples, check_grid, synthesize_modes, Modes, TransformPath};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct FourierCurve {
    pub modes: Modes,
    pub time: f64,
}

/// `X = a0 + a1·e^{is} + Y`, with `Y` carrying every mode except 0 and 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSplit {
    pub a0: Complex64,
    pub a1: Complex64,
    /// Same layout as the source curve, with entries 0 and 1 set to zero.
    pub y: Modes,
}

impl CurveSplit {
    pub fn reassemble(&self) -> Modes {
        let mut modes = self.y.clone();
        modes.set(0, self.a0);
        if modes.k_max() >= 1 {
            modes.set(1, self.a1);
        }
        modes
    }
}

/// Samples of the full curve `𝒳(s_j) = e^{is_j} + X(s_j)` at `s_j = 2πj/M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalGrid {
    pub samples: Vec<Complex64>,
}

impl PhysicalGrid {
    pub fn n_points(&self) -> usize {
        self.samples.len()
    }
}

impl FourierCurve {
    /// The unit circle, truncated at `K`.
    pub fn circle(k_max: usize) -> Self {
        Self {
            modes: Modes::zeros(k_max),
            time: 0.0,
        }
    }

    pub fn from_modes(modes: Modes) -> Self {
        Self { modes, time: 0.0 }
    }

    pub fn k_max(&self) -> usize {
        self.modes.k_max()
    }

    pub fn split(&self) -> CurveSplit {
        let mut y = self.modes.clone();
        let a0 = y.get(0);
        let a1 = y.get(1);
        y.set(0, Complex64::new(0.0, 0.0));
        if y.k_max() >= 1 {
            y.set(1, Complex64::new(0.0, 0.0));
        }
        CurveSplit { a0, a1, y }
    }

    /// Coefficients `i·k·a_k` of `X'`. The full `𝒳'` adds `i·e^{is}`.
    pub fn derivative(&self) -> Modes {
        self.modes.map(|k, c| I * k as f64 * c)
    }

    /// `‖Y‖_{L²}` with `‖f‖² = ∫_T |f|² ds`.
    pub fn y_l2(&self) -> f64 {
        let split = self.split();
        (2.0 * PI * split.y.sum_sq()).sqrt()
    }

    /// `Ỹ(s, s−α) = e^{−is}e^{−iα/2}(Y(s−α) − Y(s)) / (2 sin(α/2))`.
    ///
    /// Evaluated through `e^{−iα/2}(e^{−iαk} − 1)/(2 sin(α/2)) =
    /// −i e^{−iα(k+1)/2} sin(kα/2)/sin(α/2)` per mode, which is continuous
    /// at `α = 0` where the ratio tends to `k`.
    pub fn y_tilde(&self, s: f64, alpha: f64) -> Complex64 {
        let alpha = reduce_angle(alpha);
        let split = self.split();
        let half_sin = (0.5 * alpha).sin();
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in split.y.iter() {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let kf = k as f64;
            let ratio = if alpha.abs() < 1e-8 {
                kf
            } else {
                (0.5 * kf * alpha).sin() / half_sin
            };
            acc += c * Complex64::from_polar(1.0, kf * s - 0.5 * alpha * (kf + 1.0)) * ratio;
        }
        -I * Complex64::from_polar(1.0, -s) * acc
    }

    /// `Y'(s)` evaluated pointwise.
    pub fn y_prime_at(&self, s: f64) -> Complex64 {
        self.split()
            .y
            .iter()
            .map(|(k, c)| I * k as f64 * c * Complex64::from_polar(1.0, k as f64 * s))
            .sum()
    }

    /// Physical samples of `𝒳` as CSV with columns `s, re_x, im_x`.
    pub fn samples_csv(&self, m: usize) -> Result<String> {
        let grid = synthesize(self, m)?;
        let mut out = String::from("s,re_x,im_x\n");
        for (j, z) in grid.samples.iter().enumerate() {
            let s = 2.0 * PI * j as f64 / m as f64;
            writeln!(out, "{s:.17e},{:.17e},{:.17e}", z.re, z.im).expect("string write");
        }
        Ok(out)
    }
}

/// Reduces an angle to `(−π, π]`.
pub(crate) fn reduce_angle(alpha: f64) -> f64 {
    let mut a = alpha.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// `𝒳(s_j) = e^{is_j} + Σ_k a_k e^{iks_j}`.
pub fn synthesize(curve: &FourierCurve, m: usize) -> Result<PhysicalGrid> {
    check_grid(m, curve.k_max())?;
    let mut samples = synthesize_modes(&curve.modes, m, 0.0, TransformPath::Auto);
    for (j, x) in samples.iter_mut().enumerate() {
        *x += Complex64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64);
    }
    Ok(PhysicalGrid { samples })
}

/// Coefficients of `X = 𝒳 − e^{is}` from grid samples of `𝒳`.
pub fn analyze(grid: &PhysicalGrid, k_max: usize) -> Result<FourierCurve> {
    let m = grid.n_points();
    check_grid(m, k_max)?;
    let mut modes = analyze_samples(&grid.samples, k_max, 0.0, TransformPath::Auto);
    // Subtract the base circle exactly rather than from the samples.
    if k_max >= 1 {
        modes.set(1, modes.get(1) - Complex64::new(1.0, 0.0));
    } else {
        return invalid("K must be at least 1");
    }
    Ok(FourierCurve::from_modes(modes))
}

/// JSON snapshot form `{"time": t, "K": K, "modes": [[re, im], ...]}` with
/// modes ordered `k = −K..=K`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveSnapshot {
    pub time: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub modes: Vec<[f64; 2]>,
}

impl From<&FourierCurve> for CurveSnapshot {
    fn from(c: &FourierCurve) -> Self {
        Self {
            time: c.time,
            k: c.k_max(),
            modes: c.modes.as_slice().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<CurveSnapshot> for FourierCurve {
    type Error = PeskinError;

    fn try_from(s: CurveSnapshot) -> Result<Self> {
        if s.modes.len() != 2 * s.k + 1 {
            return invalid(format!(
                "snapshot has {} modes but K = {} requires {}",
                s.modes.len(),
                s.k,
                2 * s.k + 1
            ));
        }
        let modes = Modes::from_vec(s.modes.iter().map(|p| Complex64::new(p[0], p[1])).collect())?;
        Ok(FourierCurve { modes, time: s.time })
    }
}
