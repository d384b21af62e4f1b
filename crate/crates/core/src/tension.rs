//! Elasticity laws `𝒯(r)` and the scalar coefficients of the linearized flow.
//!
//! Throughout, `r = |∂ₛ𝒳|` is the local stretch, `𝒯(r)` the tension and
//! `T(r) = 𝒯(r)/r` the working form that enters the boundary integral.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PeskinError, Result};

/// Default validity interval for the stretch.
pub const DEFAULT_R_MIN: f64 = 0.5;
pub const DEFAULT_R_MAX: f64 = 2.0;

fn default_r_min() -> f64 {
    DEFAULT_R_MIN
}
fn default_r_max() -> f64 {
    DEFAULT_R_MAX
}
fn one() -> f64 {
    1.0
}

/// Shape of a built-in tension law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum LawKind {
    /// `𝒯(r) = k0·r`.
    Hookean {
        #[serde(default = "one")]
        k0: f64,
    },
    /// `𝒯(r) = r + c·r³`.
    Cubic {
        #[serde(default = "one")]
        c: f64,
    },
    /// `𝒯(r) = r^p`.
    Power { p: f64 },
}

/// An elasticity law together with the stretch interval on which it may be
/// evaluated.
///
/// Deserializes from the flat JSON form `{"law": "cubic", "c": 1.0}`, with
/// optional `r_min` / `r_max` keys.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensionLaw {
    #[serde(flatten)]
    pub kind: LawKind,
    #[serde(default = "default_r_min")]
    pub r_min: f64,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
}

impl TensionLaw {
    pub fn new(kind: LawKind) -> Self {
        Self {
            kind,
            r_min: DEFAULT_R_MIN,
            r_max: DEFAULT_R_MAX,
        }
    }

    pub fn hookean(k0: f64) -> Self {
        Self::new(LawKind::Hookean { k0 })
    }

    pub fn cubic(c: f64) -> Self {
        Self::new(LawKind::Cubic { c })
    }

    pub fn power(p: f64) -> Self {
        Self::new(LawKind::Power { p })
    }

    pub fn with_interval(mut self, r_min: f64, r_max: f64) -> Self {
        self.r_min = r_min;
        self.r_max = r_max;
        self
    }

    pub fn label(&self) -> String {
        match self.kind {
            LawKind::Hookean { k0 } => format!("hookean(k0={k0})"),
            LawKind::Cubic { c } => format!("cubic(c={c})"),
            LawKind::Power { p } => format!("power(p={p})"),
        }
    }

    /// `𝒯(r)`, without any domain check.
    pub fn tension(&self, r: f64) -> f64 {
        match self.kind {
            LawKind::Hookean { k0 } => k0 * r,
            LawKind::Cubic { c } => r + c * r * r * r,
            LawKind::Power { p } => r.powf(p),
        }
    }

    /// `𝒯'(r)`, supplied analytically.
    pub fn tension_deriv(&self, r: f64) -> f64 {
        match self.kind {
            LawKind::Hookean { k0 } => k0,
            LawKind::Cubic { c } => 1.0 + 3.0 * c * r * r,
            LawKind::Power { p } => p * r.powf(p - 1.0),
        }
    }

    /// `T(r) = 𝒯(r)/r` without the domain check; used in hot loops after the
    /// stretch has been validated.
    #[inline]
    pub(crate) fn small_t_unchecked(&self, r: f64) -> f64 {
        match self.kind {
            LawKind::Hookean { k0 } => k0,
            LawKind::Cubic { c } => 1.0 + c * r * r,
            LawKind::Power { p } => r.powf(p - 1.0),
        }
    }

    pub fn check_domain(&self, r: f64) -> Result<()> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(PeskinError::TensionDomain(format!(
                "stretch r = {r} is not positive"
            )));
        }
        if r < self.r_min || r > self.r_max {
            return Err(PeskinError::TensionDomain(format!(
                "stretch r = {r:.6} outside validity interval [{}, {}] of {}",
                self.r_min,
                self.r_max,
                self.label()
            )));
        }
        Ok(())
    }

    /// `T(r) = 𝒯(r)/r`.
    pub fn small_t(&self, r: f64) -> Result<f64> {
        self.check_domain(r)?;
        Ok(self.small_t_unchecked(r))
    }

    /// `T'(r) = 𝒯'(r)/r − 𝒯(r)/r²`.
    pub fn small_t_prime(&self, r: f64) -> Result<f64> {
        self.check_domain(r)?;
        Ok(self.tension_deriv(r) / r - self.tension(r) / (r * r))
    }

    /// Coefficients of the linearization around the circle `(1 + a1)e^{is}`.
    pub fn linear_coefficients(&self, a1: Complex64) -> Result<LinearCoefficients> {
        let rho = (Complex64::new(1.0, 0.0) + a1).norm();
        let a = self.small_t(rho)?;
        let b = self.small_t_prime(rho)?;
        let b_tilde = rho * b;
        let tension_deriv = a + b_tilde;
        let direct = self.tension_deriv(rho);
        let scale = direct.abs().max(f64::MIN_POSITIVE);
        if (tension_deriv - direct).abs() > 1e-12 * scale.max(1.0) {
            return Err(PeskinError::TensionDomain(format!(
                "A + B|1+a1| = {tension_deriv} disagrees with T'(|1+a1|) = {direct}"
            )));
        }
        Ok(LinearCoefficients {
            a,
            b,
            b_tilde,
            tension_deriv,
            one_plus_a1: Complex64::new(1.0, 0.0) + a1,
        })
    }

    /// Sampled check of `𝒯 > 0` and `𝒯' > 0` on `[r_min, r_max]`.
    pub fn check_structure(&self, samples: usize) -> StructureReport {
        let samples = samples.max(2);
        let mut violations = Vec::new();
        for i in 0..samples {
            let r = self.r_min + (self.r_max - self.r_min) * i as f64 / (samples - 1) as f64;
            let t = self.tension(r);
            let dt = self.tension_deriv(r);
            if !(t > 0.0) || !(dt > 0.0) {
                violations.push(StructureViolation {
                    r,
                    tension: t,
                    tension_deriv: dt,
                });
            }
        }
        StructureReport {
            law: self.label(),
            r_min: self.r_min,
            r_max: self.r_max,
            samples,
            violations,
        }
    }

    /// Like [`check_structure`](Self::check_structure) but as a `Result`.
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0) || !(self.r_max > self.r_min) {
            return Err(PeskinError::TensionDomain(format!(
                "invalid validity interval [{}, {}]",
                self.r_min, self.r_max
            )));
        }
        let report = self.check_structure(257);
        match report.violations.first() {
            None => Ok(()),
            Some(v) => Err(PeskinError::TensionDomain(format!(
                "{} violates positivity at r = {:.4}: T = {:.4e}, T' = {:.4e} ({} of {} samples fail)",
                report.law,
                v.r,
                v.tension,
                v.tension_deriv,
                report.violations.len(),
                report.samples
            ))),
        }
    }
}

/// `A = T(|1+a1|)`, `B = T'(|1+a1|)`, `B̃ = |1+a1|·B` and `A + B̃ = 𝒯'(|1+a1|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearCoefficients {
    pub a: f64,
    pub b: f64,
    pub b_tilde: f64,
    pub tension_deriv: f64,
    pub one_plus_a1: Complex64,
}

impl LinearCoefficients {
    /// `|1 + a1|`.
    pub fn stretch(&self) -> f64 {
        self.one_plus_a1.norm()
    }

    /// The coupling coefficient `B·(1+a1)²/|1+a1|`; its modulus is `B̃`.
    pub fn coupling(&self) -> Complex64 {
        self.b * self.one_plus_a1 * self.one_plus_a1 / self.stretch()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureViolation {
    pub r: f64,
    pub tension: f64,
    pub tension_deriv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    pub law: String,
    pub r_min: f64,
    pub r_max: f64,
    pub samples: usize,
    pub violations: Vec<StructureViolation>,
}

impl StructureReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn small_t_examples() {
        assert!(close(TensionLaw::hookean(1.0).small_t(2.0).unwrap(), 1.0, 1e-15));
        assert!(close(TensionLaw::cubic(1.0).small_t(1.0).unwrap(), 2.0, 1e-15));
        assert!(close(TensionLaw::power(2.0).small_t(0.5).unwrap(), 0.5, 1e-15));
    }

    #[test]
    fn small_t_prime_examples() {
        assert_eq!(TensionLaw::hookean(1.0).small_t_prime(1.3).unwrap(), 0.0);
        assert!(close(TensionLaw::cubic(1.0).small_t_prime(1.0).unwrap(), 2.0, 1e-15));
        // r² law: T(r) = r, so T' = 1 everywhere.
        assert!(close(TensionLaw::power(2.0).small_t_prime(2.0).unwrap(), 1.0, 1e-15));
    }

    #[test]
    fn small_t_prime_matches_central_difference() {
        for law in [TensionLaw::cubic(1.0), TensionLaw::power(2.5), TensionLaw::cubic(0.3)] {
            for &r in &[0.6, 0.9, 1.0, 1.3, 1.8] {
                let h = 1e-5;
                let fd = (law.small_t(r + h).unwrap() - law.small_t(r - h).unwrap()) / (2.0 * h);
                assert!(close(law.small_t_prime(r).unwrap(), fd, 1e-8), "{} at {r}", law.label());
                let fd_t = (law.tension(r + h) - law.tension(r - h)) / (2.0 * h);
                assert!(close(law.tension_deriv(r), fd_t, 1e-6));
            }
        }
    }

    #[test]
    fn domain_errors() {
        let law = TensionLaw::cubic(1.0);
        assert!(matches!(law.small_t(0.0), Err(PeskinError::TensionDomain(_))));
        assert!(matches!(law.small_t(-1.0), Err(PeskinError::TensionDomain(_))));
        assert!(matches!(law.small_t(2.5), Err(PeskinError::TensionDomain(_))));
        assert!(matches!(
            law.linear_coefficients(Complex64::new(-0.7, 0.0)),
            Err(PeskinError::TensionDomain(_))
        ));
    }

    #[test]
    fn linear_coefficient_examples() {
        let h = TensionLaw::hookean(1.0).linear_coefficients(Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!((h.a, h.b, h.b_tilde, h.tension_deriv), (1.0, 0.0, 0.0, 1.0));

        let c = TensionLaw::cubic(1.0).linear_coefficients(Complex64::new(0.0, 0.0)).unwrap();
        assert!(close(c.a, 2.0, 1e-15) && close(c.b, 2.0, 1e-15));
        assert!(close(c.b_tilde, 2.0, 1e-15) && close(c.tension_deriv, 4.0, 1e-15));

        let c = TensionLaw::cubic(1.0).linear_coefficients(Complex64::new(0.1, 0.0)).unwrap();
        assert!(close(c.tension_deriv, 4.63, 1e-13));
    }

    #[test]
    fn structure_check_flags_broken_law() {
        assert!(TensionLaw::cubic(1.0).check_structure(101).holds());
        assert!(TensionLaw::power(0.5).validate().is_ok());
        let broken = TensionLaw::cubic(-1.0);
        let report = broken.check_structure(101);
        assert!(!report.holds());
        // T' = 1 − 3r² < 0 for r > 1/√3 ≈ 0.577
        assert!(report.violations.iter().all(|v| v.r > 0.57));
        assert!(broken.validate().is_err());
    }

    #[test]
    fn law_json_forms() {
        let law: TensionLaw = serde_json::from_str(r#"{"law":"cubic","c":1.0}"#).unwrap();
        assert_eq!(law, TensionLaw::cubic(1.0));
        let law: TensionLaw = serde_json::from_str(r#"{"law":"hookean","r_max":3.0}"#).unwrap();
        assert_eq!(law, TensionLaw::hookean(1.0).with_interval(0.5, 3.0));
        assert!(serde_json::from_str::<TensionLaw>(r#"{"law":"quartic"}"#).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn cond2_identity(c in 0.0f64..3.0, p in 0.2f64..4.0, re in -0.3f64..0.3, im in -0.3f64..0.3) {
                let a1 = Complex64::new(re, im);
                for law in [TensionLaw::cubic(c), TensionLaw::power(p), TensionLaw::hookean(1.0 + c)] {
                    let lc = law.linear_coefficients(a1).unwrap();
                    let direct = law.tension_deriv(lc.stretch());
                    prop_assert!((lc.tension_deriv - direct).abs() <= 1e-12 * direct.abs());
                    prop_assert!(lc.tension_deriv > 0.0 && lc.a > 0.0);
                }
            }
        }
    }
}
