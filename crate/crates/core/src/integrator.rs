//! Exponential time differencing on the invariant blocks of the linear part.
//!
//! The state `u = (a_k)` obeys `∂_t u = L u + F(u)` with `L` the block
//! operator built from `a1` and `F = 𝒩̂ − L u`. One step of ETD-RK2:
//!
//! ```text
//! a  = e^{Lh} u + h φ1(Lh) F(u)
//! u⁺ = a + h φ2(Lh) (F(a) − F(u))
//! ```
//!
//! Modes 0 and 1 sit in free blocks, where this reduces to Heun's method.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::FourierCurve;
use crate::error::{invalid, PeskinError, Result};
use crate::initdata::{generate, InitReport, InitialDataSpec};
use crate::linear::LinearOperator;
use crate::nonlin::eval_nonlinearity;
use crate::norms::{derivative_sup, l2_norm};
use crate::spectral::Modes;
use crate::tension::TensionLaw;

/// Growth factor per step that aborts a run.
pub const BLOW_UP_FACTOR: f64 = 10.0;

/// Absolute floor used by the blow-up guard for modes that start at zero.
pub const BLOW_UP_FLOOR: f64 = 1e-12;

/// Required drop `‖Y(0)‖/‖Y(t_end)‖` before a decay rate is fitted.
pub const REQUIRED_DROP: f64 = std::f64::consts::E * std::f64::consts::E;

/// Relative slack on [`REQUIRED_DROP`], so that a run lasting exactly two
/// e-folds qualifies.
pub const DROP_SLACK: f64 = 1e-3;

fn default_true() -> bool {
    true
}

fn default_watch() -> Vec<i64> {
    vec![2, 3, -1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub law: TensionLaw,
    pub init: InitialDataSpec,
    #[serde(rename = "K")]
    pub k_max: usize,
    #[serde(rename = "M")]
    pub m: usize,
    /// Defaults to `0.5 / fastest linear rate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub t_end: f64,
    /// Snapshot spacing in time; every step when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<f64>,
    /// Build the linear part from `a1(0)` once instead of every step.
    #[serde(default = "default_true")]
    pub frozen: bool,
    #[serde(default = "default_watch")]
    pub watch_modes: Vec<i64>,
    /// Centre and `e^{is}` offset of the base circle, `[re, im]`.
    #[serde(default)]
    pub a0: [f64; 2],
    #[serde(default)]
    pub a1: [f64; 2],
}

impl RunConfig {
    pub fn new(law: TensionLaw, init: InitialDataSpec, k_max: usize, m: usize, t_end: f64) -> Self {
        Self {
            law,
            init,
            k_max,
            m,
            dt: None,
            t_end,
            snapshot_every: None,
            frozen: true,
            watch_modes: default_watch(),
            a0: [0.0; 2],
            a1: [0.0; 2],
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.law.validate()?;
        if self.k_max < 2 {
            return invalid(format!("K = {} must be at least 2", self.k_max));
        }
        if self.m < 4 * self.k_max || !self.m.is_multiple_of(2) {
            return invalid(format!("M = {} must be even and at least 4K = {}", self.m, 4 * self.k_max));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return invalid(format!("t_end = {} must be positive", self.t_end));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return invalid(format!("dt = {dt} must be positive"));
            }
            if self.t_end < dt {
                return invalid(format!("t_end = {} is shorter than dt = {dt}", self.t_end));
            }
        }
        if let Some(every) = self.snapshot_every {
            if !(every > 0.0) || !every.is_finite() {
                return invalid(format!("snapshot_every = {every} must be positive"));
            }
        }
        if let Some(&k) = self.watch_modes.iter().find(|k| k.unsigned_abs() as usize > self.k_max) {
            return invalid(format!("watched mode {k} exceeds K = {}", self.k_max));
        }
        Ok(())
    }

    /// Generated data placed on the configured base circle.
    pub fn initial_curve(&self) -> Result<(FourierCurve, InitReport)> {
        let data = generate(&self.init, self.k_max)?;
        let mut curve = data.curve;
        let base = [(0, self.a0), (1, self.a1)];
        for (k, [re, im]) in base {
            let v = curve.modes.get(k) + Complex64::new(re, im);
            curve.modes.set(k, v);
        }
        Ok((curve, data.report))
    }
}

/// The linear part is frozen or rebuilt from the current `a1`.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub law: TensionLaw,
    pub m: usize,
    pub frozen: bool,
    frozen_op: LinearOperator,
}

impl Stepper {
    pub fn new(law: TensionLaw, initial: &FourierCurve, m: usize, frozen: bool) -> Result<Self> {
        let frozen_op = LinearOperator::from_law(&law, initial.modes.get(1), initial.k_max())?;
        Ok(Self {
            law,
            m,
            frozen,
            frozen_op,
        })
    }

    pub fn operator(&self) -> &LinearOperator {
        &self.frozen_op
    }

    /// Default step `0.5 / fastest rate` of the initial operator.
    pub fn default_dt(&self) -> f64 {
        0.5 / self.frozen_op.fastest_rate()
    }

    fn forcing(&self, op: &LinearOperator, u: &FourierCurve) -> Result<Modes> {
        let n = eval_nonlinearity(u, &self.law, self.m)?.n_modes;
        Ok(n.sub(&op.apply(&u.modes)))
    }

    /// `𝒩̂ − L u` for the operator this stepper would use at `u`.
    pub fn residual(&self, u: &FourierCurve) -> Result<Modes> {
        if self.frozen {
            self.forcing(&self.frozen_op, u)
        } else {
            let op = LinearOperator::from_law(&self.law, u.modes.get(1), u.k_max())?;
            self.forcing(&op, u)
        }
    }

    pub fn step(&self, u: &FourierCurve, dt: f64) -> Result<FourierCurve> {
        if !(dt > 0.0) {
            return invalid(format!("step size {dt} must be positive"));
        }
        let refreshed;
        let op = if self.frozen {
            &self.frozen_op
        } else {
            refreshed = LinearOperator::from_law(&self.law, u.modes.get(1), u.k_max())?;
            &refreshed
        };
        let h = Complex64::from(dt);
        let fu = self.forcing(op, u)?;
        let predictor = FourierCurve {
            modes: op.exp(&u.modes, dt).axpy(h, &op.phi1(&fu, dt)),
            time: u.time + dt,
        };
        let fa = self.forcing(op, &predictor)?;
        let modes = predictor.modes.axpy(h, &op.phi2(&fa.sub(&fu), dt));
        guard(&u.modes, &modes, u.time + dt)?;
        Ok(FourierCurve {
            modes,
            time: u.time + dt,
        })
    }
}

/// Rejects a step in which some `|a_k|` grew by more than
/// [`BLOW_UP_FACTOR`] relative to `max(|a_k|, sup_Y |a|, floor)`.
fn guard(old: &Modes, new: &Modes, time: f64) -> Result<()> {
    let floor = old
        .iter()
        .filter(|&(k, _)| k != 0 && k != 1)
        .map(|(_, z)| z.norm())
        .fold(BLOW_UP_FLOOR, f64::max);
    for ((k, a), (_, b)) in old.iter().zip(new.iter()) {
        let reference = a.norm().max(floor);
        let growth = b.norm() / reference;
        if !growth.is_finite() || growth > BLOW_UP_FACTOR {
            return Err(PeskinError::StepRejected {
                time,
                mode: k,
                growth: if growth.is_finite() { growth } else { f64::INFINITY },
            });
        }
    }
    Ok(())
}

/// One step from `curve` with the operator policy of `cfg`.
pub fn step(curve: &FourierCurve, law: &TensionLaw, dt: f64, cfg: &RunConfig) -> Result<FourierCurve> {
    Stepper::new(*law, curve, cfg.m, cfg.frozen)?.step(curve, dt)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: f64,
    /// `|a_k|` for the watched modes, in watch-list order.
    pub watched: Vec<f64>,
    pub l2_y: f64,
    pub linf_y_prime: f64,
    pub a0: Complex64,
    pub a1: Complex64,
}

impl Diagnostics {
    pub fn of(curve: &FourierCurve, watch: &[i64]) -> Self {
        let y = curve.split().y;
        Self {
            t: curve.time,
            watched: watch.iter().map(|&k| curve.modes.get(k).norm()).collect(),
            l2_y: l2_norm(&y),
            linf_y_prime: derivative_sup(&y),
            a0: curve.modes.get(0),
            a1: curve.modes.get(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub watch_modes: Vec<i64>,
    pub dt: f64,
    pub snapshots: Vec<FourierCurve>,
    pub diagnostics: Vec<Diagnostics>,
    pub init_report: Option<InitReport>,
}

impl Trajectory {
    pub fn new(watch_modes: Vec<i64>, dt: f64) -> Self {
        Self {
            watch_modes,
            dt,
            snapshots: Vec::new(),
            diagnostics: Vec::new(),
            init_report: None,
        }
    }

    pub fn record(&mut self, curve: &FourierCurve) {
        self.diagnostics.push(Diagnostics::of(curve, &self.watch_modes));
        self.snapshots.push(curve.clone());
    }

    pub fn last(&self) -> Option<&FourierCurve> {
        self.snapshots.last()
    }

    /// `t, |a_k|…, l2_Y, linf_Yprime, a0_re, a0_im, a1_re, a1_im`.
    pub fn diagnostics_csv(&self) -> String {
        let mut out = String::from("t");
        for k in &self.watch_modes {
            out.push_str(&format!(",abs_a{k}"));
        }
        out.push_str(",l2_Y,linf_Yprime,a0_re,a0_im,a1_re,a1_im\n");
        for d in &self.diagnostics {
            out.push_str(&format!("{:.17e}", d.t));
            for w in &d.watched {
                out.push_str(&format!(",{w:.17e}"));
            }
            out.push_str(&format!(
                ",{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                d.l2_y, d.linf_y_prime, d.a0.re, d.a0.im, d.a1.re, d.a1.im
            ));
        }
        out
    }
}

/// A failed run: the error together with everything recorded before it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub error: PeskinError,
    pub partial: Box<Trajectory>,
}

impl From<PeskinError> for RunFailure {
    fn from(error: PeskinError) -> Self {
        Self {
            error,
            partial: Box::new(Trajectory::new(Vec::new(), 0.0)),
        }
    }
}

/// Step count and uniform step covering `[0, t_end]` with steps no longer
/// than `dt`.
pub fn step_plan(t_end: f64, dt: f64) -> (usize, f64) {
    let n = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    (n, t_end / n as f64)
}

pub fn run(cfg: &RunConfig) -> std::result::Result<Trajectory, RunFailure> {
    cfg.validate()?;
    let (initial, report) = cfg.initial_curve()?;
    run_from(cfg, initial, Some(report))
}

/// Integrates `initial` to `cfg.t_end`; initial data in `cfg` is ignored.
pub fn run_from(cfg: &RunConfig, initial: FourierCurve, report: Option<InitReport>) -> std::result::Result<Trajectory, RunFailure> {
    cfg.validate()?;
    let stepper = Stepper::new(cfg.law, &initial, cfg.m, cfg.frozen)?;
    let (n_steps, dt) = step_plan(cfg.t_end, cfg.dt.unwrap_or_else(|| stepper.default_dt()));
    let stride = cfg
        .snapshot_every
        .map(|every| ((every / dt).round() as usize).max(1))
        .unwrap_or(1);

    let mut traj = Trajectory::new(cfg.watch_modes.clone(), dt);
    traj.init_report = report;
    traj.record(&initial);
    let mut u = initial;
    for n in 1..=n_steps {
        match stepper.step(&u, dt) {
            Ok(mut next) => {
                next.time = n as f64 * dt;
                u = next;
            }
            Err(error) => return Err(RunFailure {
                    error,
                    partial: Box::new(traj),
                }),
        }
        if n % stride == 0 || n == n_steps {
            traj.record(&u);
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub a0_limit: Complex64,
    pub a1_limit: Complex64,
    /// RMS of the log-linear fit residual.
    pub fit_residual: f64,
    pub samples: usize,
}

/// Aitken's Δ² limit of three equally spaced samples; falls back to the last
/// sample when the differences do not contract.
pub fn aitken(x0: Complex64, x1: Complex64, x2: Complex64) -> Complex64 {
    let d1 = x1 - x0;
    let d2 = x2 - x1;
    let denom = d2 - d1;
    let scale = x0.norm().max(x1.norm()).max(x2.norm());
    if denom.norm() <= 1e-14 * scale || d2.norm() >= d1.norm() {
        return x2;
    }
    x2 - d2 * d2 / denom
}

/// Least-squares rate of `log‖Y‖_{L²}` over the final half of the run, and
/// extrapolated `a0`, `a1` limits.
pub fn fit_decay(traj: &Trajectory) -> Result<DecayFit> {
    let diag = &traj.diagnostics;
    let (first, last) = match (diag.first(), diag.last()) {
        (Some(f), Some(l)) if diag.len() >= 3 => (f, l),
        _ => return invalid("trajectory needs at least three snapshots"),
    };
    let drop = if last.l2_y > 0.0 { first.l2_y / last.l2_y } else if first.l2_y > 0.0 { f64::INFINITY } else { 1.0 };
    if !(drop >= REQUIRED_DROP * (1.0 - DROP_SLACK)) || last.l2_y == 0.0 {
        return Err(PeskinError::InsufficientDecay {
            ratio: drop,
            required: REQUIRED_DROP,
        });
    }
    let t_mid = 0.5 * (first.t + last.t);
    let tail: Vec<(f64, f64)> = diag.iter().filter(|d| d.t >= t_mid).map(|d| (d.t, d.l2_y.ln())).collect();
    if tail.len() < 2 {
        return invalid("final half of the trajectory has fewer than two snapshots");
    }
    let n = tail.len() as f64;
    let (mt, my) = tail.iter().fold((0.0, 0.0), |(a, b), &(t, y)| (a + t / n, b + y / n));
    let (sty, stt) = tail
        .iter()
        .fold((0.0, 0.0), |(a, b), &(t, y)| (a + (t - mt) * (y - my), b + (t - mt) * (t - mt)));
    let slope = sty / stt;
    let fit_residual = (tail
        .iter()
        .map(|&(t, y)| (y - my - slope * (t - mt)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let k = diag.len();
    Ok(DecayFit {
        rate: -slope,
        a0_limit: aitken(diag[k - 3].a0, diag[k - 2].a0, diag[k - 1].a0),
        a1_limit: aitken(diag[k - 3].a1, diag[k - 2].a1, diag[k - 1].a1),
        fit_residual,
        samples: tail.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initdata::{InitKind, NormName};
    use crate::linear::closed_form_eigenvalues;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single(k: i64, amp: f64) -> InitialDataSpec {
        InitialDataSpec::new(InitKind::SingleMode {
            k,
            amplitude: [amp, 0.0],
            allow_steady: false,
        })
    }

    fn corner(eps: f64) -> InitialDataSpec {
        InitialDataSpec::new(InitKind::Corner {
            positions: vec![0.3, 2.2],
            strengths: vec![1.0, 0.6],
            amplitude: 1.0,
            half_width: std::f64::consts::PI / 4.0,
        })
        .with_target(NormName::S, eps)
    }

    #[test]
    fn circle_is_fixed() {
        let curve = FourierCurve::circle(8);
        let cfg = RunConfig::new(TensionLaw::hookean(1.0), single(2, 0.0), 8, 32, 1.0);
        let next = step(&curve, &cfg.law, 0.1, &cfg).unwrap();
        assert!(next.modes.max_abs() < 1e-15);
    }

    #[test]
    fn mode_two_one_step_matches_scalar_exponential() {
        let delta = 1e-6;
        let cfg = RunConfig::new(TensionLaw::hookean(1.0), single(2, delta), 16, 64, 1.0);
        let (curve, _) = cfg.initial_curve().unwrap();
        let dt = 0.01;
        let next = step(&curve, &cfg.law, dt, &cfg).unwrap();
        let expected = delta * (-dt / 4.0f64).exp();
        assert!((next.modes.get(2) - c(expected, 0.0)).norm() < 1e-13, "{}", next.modes.get(2));
    }

    #[test]
    fn zero_data_stays_constant() {
        let mut cfg = RunConfig::new(TensionLaw::cubic(1.0), single(3, 0.0), 8, 32, 1.0);
        cfg.a0 = [0.2, -0.1];
        cfg.a1 = [0.05, 0.0];
        cfg.dt = Some(0.1);
        let traj = run(&cfg).unwrap();
        assert_eq!(traj.snapshots.len(), 11);
        for s in &traj.snapshots {
            assert!((s.modes.get(0) - c(0.2, -0.1)).norm() < 1e-15);
            assert!((s.modes.get(1) - c(0.05, 0.0)).norm() < 1e-15);
            assert!(s.split().y.max_abs() < 1e-15);
        }
    }

    #[test]
    fn times_strictly_increase_and_cadence() {
        let mut cfg = RunConfig::new(TensionLaw::hookean(1.0), single(2, 1e-3), 8, 32, 1.0);
        cfg.dt = Some(0.03);
        cfg.snapshot_every = Some(0.25);
        let traj = run(&cfg).unwrap();
        assert!(traj.snapshots.windows(2).all(|w| w[1].time > w[0].time));
        assert_eq!(traj.snapshots.last().unwrap().time, 1.0);
        assert!(traj.dt <= 0.03);
    }

    #[test]
    fn config_validation() {
        let base = RunConfig::new(TensionLaw::hookean(1.0), single(2, 1e-3), 8, 32, 1.0);
        let mut bad = base.clone();
        bad.m = 24;
        assert!(bad.validate().is_err());
        let mut bad = base.clone();
        bad.dt = Some(2.0);
        assert!(bad.validate().is_err());
        let mut bad = base.clone();
        bad.dt = Some(-0.1);
        assert!(bad.validate().is_err());
        let mut bad = base.clone();
        bad.watch_modes = vec![9];
        assert!(bad.validate().is_err());
        assert!(base.validate().is_ok());
    }

    #[test]
    fn config_json_round_trip() {
        let text = r#"{"law":{"law":"cubic","c":1.0},"init":{"kind":"single_mode","k":2,"amplitude":[1e-3,0.0]},
                      "K":16,"M":64,"t_end":2.0}"#;
        let cfg: RunConfig = serde_json::from_str(text).unwrap();
        assert!(cfg.frozen);
        assert_eq!(cfg.watch_modes, vec![2, 3, -1]);
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(serde_json::from_str::<RunConfig>(&text.replace("\"t_end\"", "\"tend\"")).is_err());
    }

    #[test]
    fn linear_regime_rate() {
        let mut cfg = RunConfig::new(TensionLaw::hookean(1.0), single(2, 1e-3), 16, 64, 8.0);
        cfg.snapshot_every = Some(0.5);
        let traj = run(&cfg).unwrap();
        let fit = fit_decay(&traj).unwrap();
        assert!((fit.rate - 0.25).abs() < 0.0025, "{}", fit.rate);
    }

    #[test]
    fn fit_of_exact_exponential() {
        let mut traj = Trajectory::new(vec![2], 0.1);
        for j in 0..=40 {
            let mut curve = FourierCurve::circle(4);
            curve.time = 0.25 * j as f64;
            curve.modes.set(2, c(1e-3 * (-0.7 * curve.time).exp(), 0.0));
            curve.modes.set(0, c(0.1 + 1e-4 * (-0.7 * curve.time).exp(), 0.0));
            traj.record(&curve);
        }
        let fit = fit_decay(&traj).unwrap();
        assert!((fit.rate - 0.7).abs() < 1e-10);
        assert!(fit.fit_residual < 1e-10);
        assert!((fit.a0_limit - c(0.1, 0.0)).norm() < 1e-14);

        let short: Trajectory = Trajectory {
            diagnostics: traj.diagnostics[..5].to_vec(),
            ..traj.clone()
        };
        assert!(matches!(fit_decay(&short), Err(PeskinError::InsufficientDecay { .. })));
    }

    #[test]
    fn aitken_is_exact_for_geometric_tails() {
        let l = c(0.3, -0.2);
        let q = c(0.5, 0.1);
        let x = |n: i32| l + c(0.01, 0.02) * q.powi(n);
        assert!((aitken(x(4), x(5), x(6)) - l).norm() < 1e-15);
        assert_eq!(aitken(l, l, l), l);
    }

    #[test]
    fn second_order_in_dt() {
        let law = TensionLaw::cubic(1.0);
        let mut cfg = RunConfig::new(law, corner(0.01), 16, 64, 1.0);
        let mut end = |dt: f64| {
            cfg.dt = Some(dt);
            cfg.snapshot_every = Some(10.0);
            run(&cfg).unwrap().last().unwrap().modes.clone()
        };
        let reference = end(0.05 / 8.0);
        let e1 = end(0.05).sub(&reference).max_abs();
        let e2 = end(0.025).sub(&reference).max_abs();
        let ratio = e1 / e2;
        assert!((3.3..4.7).contains(&ratio), "{ratio} ({e1:e}, {e2:e})");
    }

    #[test]
    fn frozen_and_refreshed_agree_to_second_order() {
        let mut gaps = Vec::new();
        for eps in [0.02, 0.01] {
            let mut cfg = RunConfig::new(TensionLaw::cubic(1.0), corner(eps), 16, 64, 2.0);
            cfg.snapshot_every = Some(10.0);
            let a = run(&cfg).unwrap().last().unwrap().modes.clone();
            cfg.frozen = false;
            let b = run(&cfg).unwrap().last().unwrap().modes.clone();
            gaps.push(a.sub(&b).max_abs());
        }
        assert!(gaps[0] < 1e-3 * 0.02, "{gaps:?}");
        assert!(gaps[0] / gaps[1] > 3.0, "{gaps:?}");
    }

    #[test]
    fn drift_of_mean_and_shift_is_quadratic() {
        let drift = |eps: f64| {
            let mut cfg = RunConfig::new(TensionLaw::cubic(1.0), corner(eps), 16, 64, 3.0);
            cfg.snapshot_every = Some(0.1);
            let traj = run(&cfg).unwrap();
            traj.diagnostics
                .iter()
                .map(|d| (d.a0 - traj.diagnostics[0].a0).norm().max((d.a1 - traj.diagnostics[0].a1).norm()))
                .fold(0.0, f64::max)
        };
        let constants: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&e| drift(e) / (e * e)).collect();
        let (lo, hi) = constants.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(lo > 0.0 && hi / lo < 1.3, "{constants:?}");
    }

    #[test]
    fn small_data_decays_monotonically() {
        let mut cfg = RunConfig::new(TensionLaw::cubic(1.0), corner(1e-4), 16, 64, 3.0);
        cfg.snapshot_every = Some(0.05);
        let traj = run(&cfg).unwrap();
        assert!(traj.diagnostics.windows(2).all(|w| w[1].l2_y <= w[0].l2_y));
    }

    #[test]
    fn runs_are_bit_identical() {
        let cfg = RunConfig::new(TensionLaw::cubic(1.0), corner(0.01), 16, 64, 0.5);
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.diagnostics_csv(), b.diagnostics_csv());
        assert_eq!(a.snapshots, b.snapshots);
    }

    #[test]
    fn blow_up_guard_fires() {
        let old = Modes::from_vec(vec![c(0.0, 0.0), c(0.0, 0.0), c(1e-3, 0.0), c(0.0, 0.0), c(1e-3, 0.0)]).unwrap();
        let mut new = old.clone();
        new.set(-2, c(0.02, 0.0));
        assert!(matches!(guard(&old, &new, 0.1), Err(PeskinError::StepRejected { mode: -2, .. })));
        new.set(-2, c(0.009, 0.0));
        assert!(guard(&old, &new, 0.1).is_ok());
        new.set(0, c(f64::NAN, 0.0));
        assert!(guard(&old, &new, 0.1).is_err());
    }

    #[test]
    fn geometry_failure_returns_partial_trajectory() {
        let mut cfg = RunConfig::new(TensionLaw::hookean(1.0).with_interval(1e-3, 1e3), single(-1, 0.995), 8, 32, 1.0);
        cfg.dt = Some(0.1);
        match run(&cfg) {
            Err(RunFailure { error, .. }) => assert!(matches!(error, PeskinError::Geometry { .. })),
            Ok(_) => panic!("expected geometry error"),
        }
    }

    #[test]
    fn default_dt_resolves_fastest_rate() {
        let cfg = RunConfig::new(TensionLaw::cubic(1.0), single(2, 1e-3), 16, 64, 1.0);
        let (curve, _) = cfg.initial_curve().unwrap();
        let stepper = Stepper::new(cfg.law, &curve, cfg.m, true).unwrap();
        let coeffs = cfg.law.linear_coefficients(c(0.0, 0.0)).unwrap();
        let pair = closed_form_eigenvalues(16, &coeffs).iter().fold(0.0f64, |a, &b| a.max(b.abs())) / 8.0;
        let scalar = (coeffs.a * 34.0 + coeffs.b_tilde * 16.0) / 8.0;
        assert!((stepper.default_dt() - 0.5 / pair.max(scalar)).abs() < 1e-15, "{} {pair} {scalar}", stepper.default_dt());
    }
}
