//! Linearized mode dynamics about the circle `(1+a1)e^{is}`.
//!
//! Modes 0 and 1 are free, mode 2 decays at the scalar rate `(A + B̃)/4`, and
//! each `m ≥ 3` couples `a_m` with `conj(a_{2−m})` through a 2×2 matrix `𝒢`.
//! Exponentials and the `φ` functions are taken blockwise from a closed-form
//! 2×2 eigendecomposition.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, PeskinError, Result};
use crate::spectral::Modes;
use crate::tension::{LinearCoefficients, TensionLaw};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Eigenvector matrices worse than this are rejected.
pub const MAX_CONDITION: f64 = 1e8;

/// Dense 2×2 complex matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn diag(a: Complex64, b: Complex64) -> Self {
        Mat2([[a, ZERO], [ZERO, b]])
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == ZERO {
            return None;
        }
        let m = &self.0;
        Some(Mat2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]))
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }

    pub fn apply(&self, v: (Complex64, Complex64)) -> (Complex64, Complex64) {
        let m = &self.0;
        (m[0][0] * v.0 + m[0][1] * v.1, m[1][0] * v.0 + m[1][1] * v.1)
    }

    pub fn scale(&self, s: Complex64) -> Mat2 {
        Mat2(self.0.map(|row| row.map(|z| z * s)))
    }

    pub fn max_abs_diff(&self, o: &Mat2) -> f64 {
        (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| (self.0[i][j] - o.0[i][j]).norm())
            .fold(0.0, f64::max)
    }

    fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral condition number `σ_max/σ_min`.
    pub fn condition_number(&self) -> f64 {
        let f2 = self.frobenius().powi(2);
        let d = self.det().norm();
        if d == 0.0 {
            return f64::INFINITY;
        }
        // σ₁² + σ₂² = ‖·‖_F², σ₁σ₂ = |det|
        let disc = (f2 * f2 - 4.0 * d * d).max(0.0).sqrt();
        let s1 = ((f2 + disc) / 2.0).sqrt();
        let s2 = d / s1;
        s1 / s2
    }
}

/// Eigendecomposition `G = V diag(λ) V^{−1}`; columns of `V` are unit vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigen2 {
    pub values: [Complex64; 2],
    pub vectors: Mat2,
    pub inverse: Mat2,
    pub condition_number: f64,
}

impl Eigen2 {
    pub fn reconstruct(&self) -> Mat2 {
        self.vectors.mul(&Mat2::diag(self.values[0], self.values[1])).mul(&self.inverse)
    }

    /// `V diag(f(λ)) V^{−1}`.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Mat2 {
        self.vectors
            .mul(&Mat2::diag(f(self.values[0]), f(self.values[1])))
            .mul(&self.inverse)
    }
}

/// Closed-form 2×2 eigensolver.
///
/// Works on the traceless part `G − (tr/2)I`; for each eigenvalue the better
/// scaled of the two null-vector candidates `(b, λ−a)` and `(λ−d, c)` is kept.
pub fn eigen2(g: &Mat2) -> Result<Eigen2> {
    let [[a, b], [c, d]] = g.0;
    let mu = (a + d) / 2.0;
    let p = (a - d) / 2.0;
    let root = (p * p + b * c).sqrt();
    let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm()).max(f64::MIN_POSITIVE);
    if p.norm() + b.norm() + c.norm() <= 1e-15 * scale {
        return Ok(Eigen2 {
            values: [a, d],
            vectors: Mat2::IDENTITY,
            inverse: Mat2::IDENTITY,
            condition_number: 1.0,
        });
    }
    let vec_for = |shift: Complex64| -> (Complex64, Complex64) {
        // λ − a = shift − p, λ − d = shift + p
        let u = (b, shift - p);
        let v = (shift + p, c);
        let (nu, nv) = (u.0.norm_sqr() + u.1.norm_sqr(), v.0.norm_sqr() + v.1.norm_sqr());
        let (x, n) = if nu >= nv { (u, nu) } else { (v, nv) };
        let n = n.sqrt();
        (x.0 / n, x.1 / n)
    };
    let v1 = vec_for(root);
    let v2 = vec_for(-root);
    let vectors = Mat2([[v1.0, v2.0], [v1.1, v2.1]]);
    let condition_number = vectors.condition_number();
    if !(condition_number <= MAX_CONDITION) {
        return Err(PeskinError::IllConditioned(condition_number));
    }
    let inverse = vectors.inverse().ok_or(PeskinError::IllConditioned(f64::INFINITY))?;
    Ok(Eigen2 {
        values: [mu + root, mu - root],
        vectors,
        inverse,
        condition_number,
    })
}

/// `e^z`.
pub fn exp_c(z: Complex64) -> Complex64 {
    z.exp()
}

/// `e^z − 1` without cancellation for small `|z|`.
pub fn expm1_c(z: Complex64) -> Complex64 {
    let h = (0.5 * z.im).sin();
    Complex64::new(z.re.exp_m1() * z.im.cos() - 2.0 * h * h, z.re.exp() * z.im.sin())
}

/// Switch to the Taylor series of `φ1` below this `|z|`.
pub const PHI1_SERIES_RADIUS: f64 = 1e-4;

/// `φ1(z) = (e^z − 1)/z`.
pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < PHI1_SERIES_RADIUS {
        phi1_series(z)
    } else {
        expm1_c(z) / z
    }
}

fn phi1_series(z: Complex64) -> Complex64 {
    // 1 + z/2 + z²/6 + z³/24 + z⁴/120
    ONE + z / 2.0 * (ONE + z / 3.0 * (ONE + z / 4.0 * (ONE + z / 5.0)))
}

/// Switch to the Taylor series of `φ2` below this `|z|`.
pub const PHI2_SERIES_RADIUS: f64 = 1.0;

/// `φ2(z) = (e^z − 1 − z)/z²`.
pub fn phi2(z: Complex64) -> Complex64 {
    if z.norm() < PHI2_SERIES_RADIUS {
        phi2_series(z)
    } else {
        (expm1_c(z) - z) / (z * z)
    }
}

fn phi2_series(z: Complex64) -> Complex64 {
    // Σ_{n≥0} zⁿ/(n+2)!, Horner from the top
    let mut acc = ONE;
    for n in (1..=24u32).rev() {
        acc = ONE + acc * z / (n + 2) as f64;
    }
    acc / 2.0
}

/// Scalar decay of mode 2: `∂_t a_2 = −rate·a_2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode2System {
    pub rate: f64,
}

impl Mode2System {
    pub fn new(coeffs: &LinearCoefficients) -> Self {
        Self {
            rate: (coeffs.a + coeffs.b_tilde) / 4.0,
        }
    }
}

/// `∂_t (a_m, conj(a_{2−m})) = 𝒢 (a_m, conj(a_{2−m}))` for `m ≥ 3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModePairSystem {
    pub m: i64,
    pub g: Mat2,
    pub eigen: Eigen2,
    /// Largest real part of the eigenvalues of `𝒢`.
    pub spectral_abscissa: f64,
}

/// `𝒢 = −(1/8)[[(2m−2)A + mB̃, −(m−2)γ], [−m·conj(γ), (2m−2)A + (m−2)B̃]]`
/// with `γ = B(1+a1)²/|1+a1|`.
pub fn pair_matrix(m: i64, coeffs: &LinearCoefficients) -> Mat2 {
    let mf = m as f64;
    let gamma = coeffs.coupling();
    let (a, bt) = (coeffs.a, coeffs.b_tilde);
    Mat2([
        [
            Complex64::from((2.0 * mf - 2.0) * a + mf * bt),
            -(mf - 2.0) * gamma,
        ],
        [-mf * gamma.conj(), Complex64::from((2.0 * mf - 2.0) * a + (mf - 2.0) * bt)],
    ])
    .scale(Complex64::from(-0.125))
}

pub fn build_pair_system(m: i64, coeffs: &LinearCoefficients) -> Result<ModePairSystem> {
    if m < 3 {
        return invalid(format!("pair index m = {m} must be at least 3"));
    }
    let g = pair_matrix(m, coeffs);
    let eigen = eigen2(&g)?;
    let spectral_abscissa = eigen.values[0].re.max(eigen.values[1].re);
    Ok(ModePairSystem {
        m,
        g,
        eigen,
        spectral_abscissa,
    })
}

/// `{2A(m−1), 2(A+B̃)(m−1)}`, the eigenvalues of `−8𝒢`.
pub fn closed_form_eigenvalues(m: i64, coeffs: &LinearCoefficients) -> [f64; 2] {
    let f = 2.0 * (m - 1) as f64;
    [f * coeffs.a, f * (coeffs.a + coeffs.b_tilde)]
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt >= 0.0) || !dt.is_finite() {
        return invalid(format!("time step {dt} must be finite and non-negative"));
    }
    Ok(())
}

/// `e^{𝒢 dt}·state`.
pub fn propagate_pair(sys: &ModePairSystem, state: (Complex64, Complex64), dt: f64) -> Result<(Complex64, Complex64)> {
    check_dt(dt)?;
    if dt == 0.0 {
        return Ok(state);
    }
    Ok(sys.eigen.map(|l| exp_c(l * dt)).apply(state))
}

/// `φ1(𝒢 dt)`.
pub fn phi1_pair(sys: &ModePairSystem, dt: f64) -> Result<Mat2> {
    check_dt(dt)?;
    Ok(sys.eigen.map(|l| phi1(l * dt)))
}

/// `φ2(𝒢 dt)`.
pub fn phi2_pair(sys: &ModePairSystem, dt: f64) -> Result<Mat2> {
    check_dt(dt)?;
    Ok(sys.eigen.map(|l| phi2(l * dt)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub m: i64,
    /// `2(m−1)(A + B̃)`.
    pub lambda1: f64,
    /// `2(m−1)A`.
    pub lambda2: f64,
    /// `−` spectral abscissa of `𝒢`, from the numeric eigenvalues.
    pub decay_rate: f64,
    pub condition_number: f64,
}

pub fn spectrum_report(law: &TensionLaw, a1: Complex64, m_max: i64) -> Result<Vec<SpectrumRow>> {
    if m_max < 3 {
        return invalid(format!("m_max = {m_max} must be at least 3"));
    }
    let coeffs = law.linear_coefficients(a1)?;
    (3..=m_max)
        .map(|m| {
            let sys = build_pair_system(m, &coeffs)?;
            let [l2, l1] = closed_form_eigenvalues(m, &coeffs);
            Ok(SpectrumRow {
                m,
                lambda1: l1,
                lambda2: l2,
                decay_rate: -sys.spectral_abscissa,
                condition_number: sys.eigen.condition_number,
            })
        })
        .collect()
}

pub fn spectrum_csv(rows: &[SpectrumRow]) -> String {
    let mut out = String::from("m,lambda1,lambda2,decay_rate\n");
    for r in rows {
        out.push_str(&format!("{},{:.17e},{:.17e},{:.17e}\n", r.m, r.lambda1, r.lambda2, r.decay_rate));
    }
    out
}

/// One invariant block of the truncated linear operator.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Block {
    /// `∂_t a_k = 0` (modes 0 and 1).
    Free(i64),
    /// `∂_t a_k = −rate·a_k`: mode 2, and modes `k ≤ −1` whose partner
    /// `2 − k` lies beyond the truncation.
    Scalar { k: i64, rate: f64 },
    Pair(ModePairSystem),
}

/// The linear part `u ↦ c(u)` on `|k| ≤ K`, split into invariant blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    pub coeffs: LinearCoefficients,
    pub k_max: usize,
    pub blocks: Vec<Block>,
}

impl LinearOperator {
    pub fn new(coeffs: LinearCoefficients, k_max: usize) -> Result<Self> {
        if k_max < 2 {
            return invalid(format!("truncation K = {k_max} must be at least 2"));
        }
        let kk = k_max as i64;
        let mut blocks = vec![Block::Free(0), Block::Free(1)];
        blocks.push(Block::Scalar {
            k: 2,
            rate: Mode2System::new(&coeffs).rate,
        });
        for m in 3..=kk {
            blocks.push(Block::Pair(build_pair_system(m, &coeffs)?));
        }
        for k in -kk..=(1 - kk).min(-1) {
            if 2 - k > kk {
                let ka = k.unsigned_abs() as f64;
                blocks.push(Block::Scalar {
                    k,
                    rate: (coeffs.a * (2.0 * ka + 2.0) + coeffs.b_tilde * ka) / 8.0,
                });
            }
        }
        Ok(Self { coeffs, k_max, blocks })
    }

    pub fn from_law(law: &TensionLaw, a1: Complex64, k_max: usize) -> Result<Self> {
        Self::new(law.linear_coefficients(a1)?, k_max)
    }

    /// Applies `f(L·dt)` blockwise; `f` must be analytic so that it commutes
    /// with the eigendecomposition.
    fn apply_fn(&self, u: &Modes, dt: f64, f: impl Fn(Complex64) -> Complex64) -> Modes {
        let mut out = Modes::zeros(u.k_max());
        for block in &self.blocks {
            match *block {
                Block::Free(k) => {
                    if u.contains(k) {
                        out.set(k, f(ZERO) * u.get(k));
                    }
                }
                Block::Scalar { k, rate } => out.set(k, f(Complex64::from(-rate * dt)) * u.get(k)),
                Block::Pair(sys) => {
                    let p = 2 - sys.m;
                    let mat = sys.eigen.map(|l| f(l * dt));
                    let (x, y) = mat.apply((u.get(sys.m), u.get(p).conj()));
                    out.set(sys.m, x);
                    out.set(p, y.conj());
                }
            }
        }
        out
    }

    /// `c(u)`; agrees with [`crate::nonlin::linear_part_with`].
    pub fn apply(&self, u: &Modes) -> Modes {
        self.apply_fn(u, 1.0, |z| z)
    }

    pub fn exp(&self, u: &Modes, dt: f64) -> Modes {
        self.apply_fn(u, dt, exp_c)
    }

    pub fn phi1(&self, u: &Modes, dt: f64) -> Modes {
        self.apply_fn(u, dt, phi1)
    }

    pub fn phi2(&self, u: &Modes, dt: f64) -> Modes {
        self.apply_fn(u, dt, phi2)
    }

    /// Slowest decay rate among the damped blocks.
    pub fn slowest_rate(&self) -> f64 {
        self.rates().fold(f64::INFINITY, f64::min)
    }

    /// Fastest decay rate among the damped blocks.
    pub fn fastest_rate(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| match *b {
                Block::Free(_) => 0.0,
                Block::Scalar { rate, .. } => rate,
                Block::Pair(sys) => sys.eigen.values.iter().fold(0.0, |a: f64, l| a.max(-l.re)),
            })
            .fold(0.0, f64::max)
    }

    fn rates(&self) -> impl Iterator<Item = f64> + '_ {
        self.blocks.iter().filter_map(|b| match *b {
            Block::Free(_) => None,
            Block::Scalar { rate, .. } => Some(rate),
            Block::Pair(sys) => Some(-sys.spectral_abscissa),
        })
    }
}
