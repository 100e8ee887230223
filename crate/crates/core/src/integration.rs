//! Time stepping for both formulations.
//!
//! Fixed-step classical RK4 is the default; an adaptive Dormand–Prince 5(4)
//! integrator is available for smooth problems. Either way, output is
//! produced on the uniform grid `t = i·h`.

use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    recover_velocity, rhs_euler_lagrange, rhs_factorized_recovered, AugmentedState, ElOracle,
    ElSource,
};
use crate::error::{Error, Result};
use crate::model::{ExogenousSignal, FactorizedModel, SampledRecord, State, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "rk4-fixed")]
    Rk4Fixed,
    #[serde(rename = "rk45-adaptive")]
    Rk45Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formulation {
    #[serde(rename = "euler-lagrange", alias = "el")]
    EulerLagrange,
    #[serde(rename = "factorized", alias = "fact")]
    Factorized,
}

impl Formulation {
    pub fn label(&self) -> &'static str {
        match self {
            Formulation::EulerLagrange => "el",
            Formulation::Factorized => "fact",
        }
    }
}

/// How `u̇` is obtained during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    /// The signal's analytic derivative.
    Analytic,
    /// Backward differences over samples (analytic signals are sampled at `h`).
    SampledBackwardDifference,
}

/// Source of `M`, `N` for the Euler-Lagrange formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElMatrixMode {
    Assembled,
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub t_end: f64,
    pub h: f64,
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub formulation: Formulation,
    pub derivative_mode: DerivativeMode,
    pub el_matrices: ElMatrixMode,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            t_end: 5.0,
            h: 1e-4,
            method: Method::Rk4Fixed,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            formulation: Formulation::Factorized,
            derivative_mode: DerivativeMode::Analytic,
            el_matrices: ElMatrixMode::Assembled,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::Parameter(format!("step h must be positive, got {}", self.h)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Parameter(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.method == Method::Rk45Adaptive && !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Parameter("adaptive tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.h - 1e-9).ceil() as usize
    }
}

type Actuation = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// Everything external to the model: the exogenous signal, actuation inputs
/// and, optionally, closed-form `M`/`N`.
#[derive(Clone)]
pub struct Drive {
    pub signal: ExogenousSignal,
    pub actuation: Actuation,
    pub oracle: Option<Arc<dyn ElOracle>>,
}

impl Drive {
    pub fn new(signal: ExogenousSignal) -> Self {
        Drive {
            signal,
            actuation: Arc::new(|_| Vec::new()),
            oracle: None,
        }
    }

    /// Constant-zero exogenous input, no actuation.
    pub fn unforced() -> Self {
        Drive::new(ExogenousSignal::constant(0.0))
    }

    pub fn with_actuation<F>(mut self, f: F) -> Self
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        self.actuation = Arc::new(f);
        self
    }

    pub fn with_oracle(mut self, oracle: Arc<dyn ElOracle>) -> Self {
        self.oracle = Some(oracle);
        self
    }
}

fn check_finite(y: &DVector<f64>, t: f64) -> Result<()> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence {
            t,
            reason: "non-finite stage derivative".into(),
        });
    }
    Ok(())
}

/// One classical Runge–Kutta step.
pub fn rk4_step<F>(rhs: &mut F, y: &DVector<f64>, t: f64, h: f64) -> Result<DVector<f64>>
where
    F: FnMut(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    let k1 = rhs(t, y)?;
    check_finite(&k1, t)?;
    let k2 = rhs(t + 0.5 * h, &(y + &k1 * (0.5 * h)))?;
    check_finite(&k2, t + 0.5 * h)?;
    let k3 = rhs(t + 0.5 * h, &(y + &k2 * (0.5 * h)))?;
    check_finite(&k3, t + 0.5 * h)?;
    let k4 = rhs(t + h, &(y + &k3 * h))?;
    check_finite(&k4, t + h)?;
    Ok(y + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0))
}

// Dormand–Prince 5(4) tableau
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive state carried between calls of [`rk45_advance`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveStep {
    pub h: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

/// Advances from `t0` to exactly `t1` with adaptive Dormand–Prince steps.
pub fn rk45_advance<F>(
    rhs: &mut F,
    y: &DVector<f64>,
    t0: f64,
    t1: f64,
    ctl: &mut AdaptiveStep,
) -> Result<DVector<f64>>
where
    F: FnMut(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    let mut y = y.clone();
    let mut t = t0;
    let mut rejected = 0usize;
    while t < t1 {
        let mut h = ctl.h.min(t1 - t);
        let last = h >= t1 - t;
        if last {
            h = t1 - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::Divergence {
                t,
                reason: "adaptive step size underflow".into(),
            });
        }
        let mut k: Vec<DVector<f64>> = Vec::with_capacity(7);
        for s in 0..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                if DP_A[s][j] != 0.0 {
                    ys += kj * (h * DP_A[s][j]);
                }
            }
            let ks = rhs(t + DP_C[s] * h, &ys)?;
            check_finite(&ks, t + DP_C[s] * h)?;
            k.push(ks);
        }
        let mut y5 = y.clone();
        let mut err = DVector::zeros(y.len());
        for s in 0..7 {
            y5 += &k[s] * (h * DP_B5[s]);
            err += &k[s] * (h * (DP_B5[s] - DP_B4[s]));
        }
        let norm = (err
            .iter()
            .zip(y.iter().zip(y5.iter()))
            .map(|(e, (a, b))| {
                let sc = ctl.abs_tol + ctl.rel_tol * a.abs().max(b.abs());
                (e / sc).powi(2)
            })
            .sum::<f64>()
            / y.len().max(1) as f64)
            .sqrt();
        let factor = if norm == 0.0 {
            5.0
        } else {
            (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        if norm <= 1.0 {
            t = if last { t1 } else { t + h };
            y = y5;
            rejected = 0;
            if !last || factor < 1.0 {
                ctl.h = h * factor;
            }
        } else {
            ctl.h = h * factor;
            rejected += 1;
            if rejected > 50 {
                return Err(Error::Divergence {
                    t,
                    reason: "too many rejected adaptive steps".into(),
                });
            }
        }
    }
    Ok(y)
}

fn prepare_signal(config: &SimulationConfig, signal: &ExogenousSignal, t0: f64) -> Result<ExogenousSignal> {
    match (config.derivative_mode, signal.is_sampled()) {
        (DerivativeMode::Analytic, true) => Err(Error::Parameter(
            "analytic derivative mode requires an analytic exogenous signal".into(),
        )),
        (DerivativeMode::Analytic, false) | (DerivativeMode::SampledBackwardDifference, true) => {
            Ok(signal.clone())
        }
        (DerivativeMode::SampledBackwardDifference, false) => {
            let count = config.steps() + 3;
            signal.sample(t0 - config.h, config.h, count)
        }
    }
}

/// Samples `base + disturbance` on `t_start − ts, t_start, …` up to one
/// period past `t_end`, yielding a measured signal whose derivative is the
/// backward difference over the samples.
pub fn make_sampled_noisy_signal(
    base: &ExogenousSignal,
    disturbance: &ExogenousSignal,
    ts: f64,
    t_start: f64,
    t_end: f64,
) -> Result<ExogenousSignal> {
    if !(ts > 0.0) {
        return Err(Error::Parameter(format!("sample period must be positive, got {ts}")));
    }
    let count = ((t_end - t_start) / ts - 1e-9).ceil().max(0.0) as usize + 3;
    let t0 = t_start - ts;
    let values = (0..count)
        .map(|k| {
            let t = t0 + k as f64 * ts;
            Ok(base.value(t)? + disturbance.value(t)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExogenousSignal::sampled(SampledRecord::new(t0, ts, values)?))
}

struct Sample {
    state: State,
    u: f64,
    udot: f64,
    velocities: DVector<f64>,
    energy: f64,
    kernel_w: Option<f64>,
}

/// Runs one simulation and returns the trajectory on the grid `t0 + i·h`.
///
/// Channels: per-degree-of-freedom velocities `H₀ẋ` (named by the model),
/// `u`, `udot`, `energy`, and for the factorized form `kernel_w = ‖w − Tẋ‖`.
pub fn simulate(
    model: &dyn FactorizedModel,
    config: &SimulationConfig,
    initial: &State,
    drive: &Drive,
) -> Result<Trajectory> {
    config.validate()?;
    initial.check_dim(model.n())?;
    let n = model.n();
    let t0 = initial.t;
    let signal = prepare_signal(config, &drive.signal, t0)?;
    let source = match (config.el_matrices, &drive.oracle) {
        (ElMatrixMode::Assembled, _) => ElSource::Assembled,
        (ElMatrixMode::Analytic, Some(o)) => ElSource::Analytic(o.as_ref()),
        (ElMatrixMode::Analytic, None) => {
            return Err(Error::Parameter(
                "analytic Euler-Lagrange matrices requested but the system provides none".into(),
            ))
        }
    };
    let formulation = config.formulation;

    let mut rhs = |t: f64, y: &DVector<f64>| -> Result<DVector<f64>> {
        let sig = signal.resolve(t)?;
        let inputs = (drive.actuation)(t);
        let out = match formulation {
            Formulation::EulerLagrange => {
                let state = State {
                    x: y.rows(0, n).into_owned(),
                    xdot: y.rows(n, n).into_owned(),
                    t,
                };
                let tau = model.force(&state, sig.value, &inputs);
                let (xd, xdd) = rhs_euler_lagrange(model, &state, sig.value, sig.rate, &tau, source)?;
                stack(&xd, &xdd)
            }
            Formulation::Factorized => {
                let aug = AugmentedState::from_vector(y, n);
                let rec = recover_velocity(model, &aug, sig.value)?;
                let state = State {
                    x: aug.x.clone(),
                    xdot: rec.xdot.clone(),
                    t,
                };
                let tau = model.force(&state, sig.value, &inputs);
                let (xd, wd) = rhs_factorized_recovered(model, &aug, &rec, sig.value, sig.rate, &tau)?;
                stack(&xd, &wd)
            }
        };
        Ok(out)
    };

    let observe = |t: f64, y: &DVector<f64>| -> Result<Sample> {
        let sig = signal.resolve(t)?;
        let (state, t_mat, kernel_w) = match formulation {
            Formulation::EulerLagrange => {
                let x = y.rows(0, n).into_owned();
                let t_mat = model.eval_t(&x, sig.value)?;
                (
                    State {
                        x,
                        xdot: y.rows(n, n).into_owned(),
                        t,
                    },
                    t_mat,
                    None,
                )
            }
            Formulation::Factorized => {
                let aug = AugmentedState::from_vector(y, n);
                let rec = recover_velocity(model, &aug, sig.value)?;
                let in_range = &rec.t * &rec.xdot;
                let kernel = (&aug.w - &in_range).norm();
                (
                    State {
                        x: aug.x,
                        xdot: rec.xdot,
                        t,
                    },
                    rec.t,
                    Some(kernel),
                )
            }
        };
        let tv = &t_mat * &state.xdot;
        let energy = 0.5 * tv.norm_squared();
        let velocities = DVector::from_iterator(
            tv.len(),
            tv.iter()
                .zip(model.inertia().sqrt_entries())
                .map(|(v, s)| v / s),
        );
        Ok(Sample {
            state,
            u: sig.value,
            udot: sig.rate,
            velocities,
            energy,
            kernel_w,
        })
    };

    let mut y = match formulation {
        Formulation::EulerLagrange => stack(&initial.x, &initial.xdot),
        Formulation::Factorized => {
            let u0 = signal.resolve(t0).map_err(|e| e.at_time(t0))?.value;
            AugmentedState::from_state(model, initial, u0)
                .map_err(|e| e.at_time(t0))?
                .to_vector()
        }
    };

    let steps = config.steps();
    let names = model.channel_names();
    let mut traj = Trajectory {
        t: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        channels: names
            .iter()
            .map(|n| (n.clone(), Vec::with_capacity(steps + 1)))
            .collect(),
    };
    let mut extra: Vec<(String, Vec<f64>)> = ["u", "udot", "energy"]
        .iter()
        .map(|s| (s.to_string(), Vec::with_capacity(steps + 1)))
        .collect();
    if formulation == Formulation::Factorized {
        extra.push(("kernel_w".into(), Vec::with_capacity(steps + 1)));
    }

    let mut ctl = AdaptiveStep {
        h: config.h,
        rel_tol: config.rel_tol,
        abs_tol: config.abs_tol,
    };
    for i in 0..=steps {
        let t = t0 + i as f64 * config.h;
        let s = observe(t, &y).map_err(|e| e.at_time(t))?;
        traj.t.push(t);
        for (k, (_, v)) in traj.channels.iter_mut().enumerate() {
            v.push(s.velocities[k]);
        }
        extra[0].1.push(s.u);
        extra[1].1.push(s.udot);
        extra[2].1.push(s.energy);
        if let Some(k) = s.kernel_w {
            extra[3].1.push(k);
        }
        traj.states.push(s.state);
        if i == steps {
            break;
        }
        let t_next = t0 + (i + 1) as f64 * config.h;
        y = match config.method {
            Method::Rk4Fixed => rk4_step(&mut rhs, &y, t, t_next - t),
            Method::Rk45Adaptive => rk45_advance(&mut rhs, &y, t, t_next, &mut ctl),
        }
        .map_err(|e| e.at_time(t))?;
    }
    traj.channels.extend(extra);
    Ok(traj)
}

fn stack(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.len();
    DVector::from_fn(n + b.len(), |i, _| if i < n { a[i] } else { b[i - n] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::{assemble_model, NoForce, PositionMap};
    use crate::dual::Real;
    use crate::model::InertiaDiagonal;
    use approx::assert_relative_eq;

    fn scalar(v: f64) -> DVector<f64> {
        DVector::from_element(1, v)
    }

    #[test]
    fn rk4_zero_rhs_is_identity() {
        let y = DVector::from_vec(vec![1.0, -2.0]);
        let out = rk4_step(&mut |_, y: &DVector<f64>| Ok(y * 0.0), &y, 0.0, 0.1).unwrap();
        assert_eq!(out, y);
    }

    #[test]
    fn rk4_exponential_step() {
        let y1 = rk4_step(&mut |_, y: &DVector<f64>| Ok(y.clone()), &scalar(1.0), 0.0, 0.1).unwrap();
        assert!((y1[0] - 0.1f64.exp()).abs() < 1e-7);
        assert_relative_eq!(y1[0], 1.105170833333333, epsilon = 1e-14);
    }

    #[test]
    fn rk4_fourth_order_convergence() {
        let run = |h: f64| {
            let mut y = scalar(1.0);
            let steps = (1.0 / h).round() as usize;
            for i in 0..steps {
                y = rk4_step(&mut |_, y: &DVector<f64>| Ok(-y), &y, i as f64 * h, h).unwrap();
            }
            (y[0] - (-1.0f64).exp()).abs()
        };
        let ratio = run(0.02) / run(0.01);
        assert!((ratio - 16.0).abs() < 0.5, "ratio {ratio}");
    }

    #[test]
    fn rk4_reports_divergence_time() {
        let err = rk4_step(&mut |_, _: &DVector<f64>| Ok(scalar(f64::NAN)), &scalar(1.0), 2.0, 0.1).unwrap_err();
        assert!(matches!(err, Error::Divergence { t, .. } if t == 2.0));
    }

    #[test]
    fn rk45_reaches_endpoint_accurately() {
        let mut ctl = AdaptiveStep { h: 0.1, rel_tol: 1e-10, abs_tol: 1e-12 };
        let y = rk45_advance(&mut |_, y: &DVector<f64>| Ok(-y), &scalar(1.0), 0.0, 2.0, &mut ctl).unwrap();
        assert_relative_eq!(y[0], (-2.0f64).exp(), max_relative = 1e-8);
    }

    #[test]
    fn sampled_derivative_of_smooth_tilt() {
        let base = ExogenousSignal::analytic(|t| 1.22 * (3.0 * t).sin(), |t| 3.66 * (3.0 * t).cos());
        let sig = make_sampled_noisy_signal(&base, &ExogenousSignal::constant(0.0), 1e-4, 0.0, 2.0).unwrap();
        for k in 0..=2000 {
            let t = k as f64 * 1e-3;
            let s = sig.resolve(t).unwrap();
            assert!((s.rate - 3.66 * (3.0 * t).cos()).abs() <= 1e-3 * 3.66, "t = {t}");
            assert!((s.value - base.value(t).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_derivative_of_disturbance_has_discrete_amplitude() {
        let (a, w, ts) = (12.2e-3, 3e3, 1e-4);
        let dist = ExogenousSignal::value_only(move |t| a * (w * t).sin());
        let sig = make_sampled_noisy_signal(&ExogenousSignal::constant(0.0), &dist, ts, 0.0, 1.0).unwrap();
        // least-squares fit of the backward difference onto sin/cos at w
        let (mut sc, mut ss, mut cc, mut sy, mut cy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for k in 0..=10_000 {
            let t = k as f64 * ts;
            let y = sig.resolve(t).unwrap().rate;
            let (s, c) = ((w * t).sin(), (w * t).cos());
            ss += s * s;
            cc += c * c;
            sc += s * c;
            sy += s * y;
            cy += c * y;
        }
        let det = ss * cc - sc * sc;
        let bs = (sy * cc - cy * sc) / det;
        let bc = (cy * ss - sy * sc) / det;
        let amp = (bs * bs + bc * bc).sqrt();
        // A·2·sin(wTs/2)/Ts, evaluated independently
        assert_relative_eq!(amp, 36.462_904_323_558_21, max_relative = 1e-6);
    }

    struct Line;

    impl PositionMap for Line {
        fn n(&self) -> usize {
            1
        }
        fn layout(&self) -> Vec<usize> {
            vec![1]
        }
        fn mass_positions<S: Real>(&self, x: &[S], _u: S) -> Vec<Vec<S>> {
            vec![vec![x[0]]]
        }
    }

    #[test]
    fn zero_dynamics_constant_trajectory() {
        let model = assemble_model(Line, InertiaDiagonal::new(vec![2.0]).unwrap(), NoForce).unwrap();
        let init = State::from_slices(&[0.5], &[0.0], 0.0).unwrap();
        for f in [Formulation::EulerLagrange, Formulation::Factorized] {
            let cfg = SimulationConfig { t_end: 0.1, h: 0.01, formulation: f, ..Default::default() };
            let tr = simulate(&model, &cfg, &init, &Drive::unforced()).unwrap();
            tr.validate().unwrap();
            assert_eq!(tr.len(), 11);
            assert!(tr.states.iter().all(|s| s.x[0] == 0.5 && s.xdot[0] == 0.0));
        }
    }

    #[test]
    fn constant_force_on_a_line() {
        let model = assemble_model(
            Line,
            InertiaDiagonal::new(vec![2.0]).unwrap(),
            |s: &State, _u: f64, inputs: &[f64]| DVector::from_element(s.n(), inputs[0]),
        )
        .unwrap();
        let init = State::from_slices(&[0.0], &[1.0], 0.0).unwrap();
        let drive = Drive::unforced().with_actuation(|_| vec![4.0]);
        for f in [Formulation::EulerLagrange, Formulation::Factorized] {
            let cfg = SimulationConfig { t_end: 1.0, h: 0.01, formulation: f, ..Default::default() };
            let tr = simulate(&model, &cfg, &init, &drive).unwrap();
            let last = tr.states.last().unwrap();
            // x = t + t², ẋ = 1 + 2t
            assert_relative_eq!(last.x[0], 2.0, epsilon = 1e-10);
            assert_relative_eq!(last.xdot[0], 3.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn config_validation_and_signal_modes() {
        assert!(SimulationConfig { h: 0.0, ..Default::default() }.validate().is_err());
        assert!(SimulationConfig { t_end: -1.0, ..Default::default() }.validate().is_err());
        let model = assemble_model(Line, InertiaDiagonal::new(vec![2.0]).unwrap(), NoForce).unwrap();
        let init = State::from_slices(&[0.0], &[1.0], 0.0).unwrap();
        let sampled = ExogenousSignal::constant(0.0).sample(-0.01, 0.01, 20).unwrap();
        let cfg = SimulationConfig { t_end: 0.1, h: 0.01, ..Default::default() };
        assert!(matches!(
            simulate(&model, &cfg, &init, &Drive::new(sampled)),
            Err(Error::Parameter(_))
        ));
        let cfg = SimulationConfig { el_matrices: ElMatrixMode::Analytic, formulation: Formulation::EulerLagrange, ..cfg };
        assert!(matches!(simulate(&model, &cfg, &init, &Drive::unforced()), Err(Error::Parameter(_))));
    }

    #[test]
    fn config_parses_from_json() {
        let cfg: SimulationConfig = serde_json::from_str(
            r#"{"t_end": 2.0, "method": "rk45-adaptive", "formulation": "el", "derivative_mode": "sampled-backward-difference"}"#,
        )
        .unwrap();
        assert_eq!(cfg.method, Method::Rk45Adaptive);
        assert_eq!(cfg.formulation, Formulation::EulerLagrange);
        assert_eq!(cfg.derivative_mode, DerivativeMode::SampledBackwardDifference);
        assert_eq!(cfg.h, 1e-4);
    }
}
