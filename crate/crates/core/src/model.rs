//! Shared domain types: mechanism state, exogenous signals, inertial
//! coefficients, the [`FactorizedModel`] trait and sampled trajectories.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Generalized coordinates and velocities at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub x: DVector<f64>,
    pub xdot: DVector<f64>,
    pub t: f64,
}

impl State {
    pub fn new(x: DVector<f64>, xdot: DVector<f64>, t: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::dim("state coordinates", 1, 0));
        }
        if xdot.len() != x.len() {
            return Err(Error::dim("state velocities", x.len(), xdot.len()));
        }
        if x.iter().chain(xdot.iter()).any(|v| !v.is_finite()) || !t.is_finite() {
            return Err(Error::NonFinite("state"));
        }
        Ok(State { x, xdot, t })
    }

    pub fn from_slices(x: &[f64], xdot: &[f64], t: f64) -> Result<Self> {
        State::new(DVector::from_column_slice(x), DVector::from_column_slice(xdot), t)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.x.len() != n {
            return Err(Error::dim("state coordinates", n, self.x.len()));
        }
        if self.xdot.len() != n {
            return Err(Error::dim("state velocities", n, self.xdot.len()));
        }
        Ok(())
    }
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Uniformly sampled record `values[k] = u(t0 + k·ts)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledRecord {
    t0: f64,
    ts: f64,
    values: Vec<f64>,
}

impl SampledRecord {
    pub fn new(t0: f64, ts: f64, values: Vec<f64>) -> Result<Self> {
        if !(ts > 0.0) || !ts.is_finite() || !t0.is_finite() {
            return Err(Error::Parameter(format!("sample period must be positive, got {ts}")));
        }
        if values.len() < 2 {
            return Err(Error::Parameter(format!(
                "sampled record needs at least 2 samples, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sampled record"));
        }
        Ok(SampledRecord { t0, ts, values })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn ts(&self) -> f64 {
        self.ts
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + (self.values.len() - 1) as f64 * self.ts
    }

    fn range_error(&self, t: f64) -> Error {
        Error::Range {
            t,
            start: self.t0,
            end: self.t_end(),
        }
    }

    /// Linear interpolation between samples.
    pub fn value(&self, t: f64) -> Result<f64> {
        let pos = (t - self.t0) / self.ts;
        let last = (self.values.len() - 1) as f64;
        // grid times accumulate rounding; snap to the nearest sample
        let snapped = pos.round();
        let pos = if (pos - snapped).abs() < 1e-9 { snapped } else { pos };
        if !(pos >= 0.0 && pos <= last) {
            return Err(self.range_error(t));
        }
        let k = pos.floor() as usize;
        let f = pos - k as f64;
        if f == 0.0 {
            return Ok(self.values[k]);
        }
        Ok(self.values[k] * (1.0 - f) + self.values[k + 1] * f)
    }

    /// Backward difference `(u(t) − u(t − ts)) / ts`.
    pub fn backward_difference(&self, t: f64) -> Result<(f64, f64)> {
        let now = self.value(t)?;
        let before = self.value(t - self.ts).map_err(|_| self.range_error(t))?;
        Ok((now, (now - before) / self.ts))
    }
}

/// How `u̇` was obtained for a given query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeSource {
    Analytic,
    BackwardDifference,
    /// No derivative information; `u̇ = 0` was substituted.
    Unavailable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSample {
    pub value: f64,
    pub rate: f64,
    pub source: DerivativeSource,
}

/// The single exogenous channel `u(t)` (e.g. the roller tilt angle).
#[derive(Clone)]
pub enum ExogenousSignal {
    Analytic {
        value: ScalarFn,
        derivative: Option<ScalarFn>,
    },
    Sampled(SampledRecord),
}

impl fmt::Debug for ExogenousSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExogenousSignal::Analytic { derivative, .. } => f
                .debug_struct("Analytic")
                .field("has_derivative", &derivative.is_some())
                .finish(),
            ExogenousSignal::Sampled(r) => f
                .debug_struct("Sampled")
                .field("t0", &r.t0)
                .field("ts", &r.ts)
                .field("len", &r.values.len())
                .finish(),
        }
    }
}

impl ExogenousSignal {
    pub fn constant(v: f64) -> Self {
        ExogenousSignal::Analytic {
            value: Arc::new(move |_| v),
            derivative: Some(Arc::new(|_| 0.0)),
        }
    }

    pub fn analytic<F, D>(value: F, derivative: D) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ExogenousSignal::Analytic {
            value: Arc::new(value),
            derivative: Some(Arc::new(derivative)),
        }
    }

    /// Analytic value without a derivative; queries report
    /// [`DerivativeSource::Unavailable`].
    pub fn value_only<F>(value: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ExogenousSignal::Analytic {
            value: Arc::new(value),
            derivative: None,
        }
    }

    pub fn sampled(record: SampledRecord) -> Self {
        ExogenousSignal::Sampled(record)
    }

    /// Samples this signal on `t0 + k·ts`, `k = 0..count`.
    pub fn sample(&self, t0: f64, ts: f64, count: usize) -> Result<Self> {
        let values = (0..count)
            .map(|k| self.value(t0 + k as f64 * ts))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExogenousSignal::Sampled(SampledRecord::new(t0, ts, values)?))
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        match self {
            ExogenousSignal::Analytic { value, .. } => Ok(value(t)),
            ExogenousSignal::Sampled(r) => r.value(t),
        }
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self, ExogenousSignal::Sampled(_))
    }

    /// Time span covered, `None` for analytic signals.
    pub fn range(&self) -> Option<(f64, f64)> {
        match self {
            ExogenousSignal::Analytic { .. } => None,
            ExogenousSignal::Sampled(r) => Some((r.t0, r.t_end())),
        }
    }

    /// `(u, u̇)` at `t`, reporting how `u̇` was obtained.
    pub fn resolve(&self, t: f64) -> Result<SignalSample> {
        match self {
            ExogenousSignal::Analytic {
                value,
                derivative: Some(d),
            } => Ok(SignalSample {
                value: value(t),
                rate: d(t),
                source: DerivativeSource::Analytic,
            }),
            ExogenousSignal::Analytic {
                value,
                derivative: None,
            } => Ok(SignalSample {
                value: value(t),
                rate: 0.0,
                source: DerivativeSource::Unavailable,
            }),
            ExogenousSignal::Sampled(r) => {
                let (value, rate) = r.backward_difference(t)?;
                Ok(SignalSample {
                    value,
                    rate,
                    source: DerivativeSource::BackwardDifference,
                })
            }
        }
    }
}

/// `(u, u̇)` pair as returned by [`ExogenousSignal::resolve`].
pub fn resolve_signal_derivative(sig: &ExogenousSignal, t: f64) -> Result<(f64, f64)> {
    let s = sig.resolve(t)?;
    Ok((s.value, s.rate))
}

/// Diagonal of inertial coefficients `N₀`, one per degree of freedom of each mass.
#[derive(Debug, Clone, PartialEq)]
pub struct InertiaDiagonal {
    entries: Vec<f64>,
    sqrt: Vec<f64>,
}

impl InertiaDiagonal {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::dim("inertia diagonal", 1, 0));
        }
        if let Some((k, v)) = entries
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0 && v.is_finite()))
        {
            return Err(Error::Parameter(format!(
                "inertial coefficient {k} must be positive and finite, got {v}"
            )));
        }
        let sqrt = entries.iter().map(|v| v.sqrt()).collect();
        Ok(InertiaDiagonal { entries, sqrt })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn sqrt_entries(&self) -> &[f64] {
        &self.sqrt
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Inertia matrix `M` and velocity-coupling matrix `N` at a state.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerLagrangeMatrices {
    pub m: DMatrix<f64>,
    pub n: DMatrix<f64>,
}

impl EulerLagrangeMatrices {
    /// `M` symmetric to 1e-12 relative and positive definite.
    pub fn is_valid(&self) -> bool {
        let scale = 1.0 + crate::linalg::max_abs(&self.m);
        let asym = crate::linalg::max_abs(&(&self.m - self.m.transpose()));
        asym <= 1e-12 * scale && crate::linalg::Cholesky::factor(&self.m).is_ok()
    }
}

/// A mechanism in factorized form: `T(x, u)` with its partial derivatives and
/// the generalized-force law.
pub trait FactorizedModel: Send + Sync {
    /// Number of generalized coordinates.
    fn n(&self) -> usize;

    /// Rows of `T`.
    fn r_total(&self) -> usize;

    fn inertia(&self) -> &InertiaDiagonal;

    fn eval_t(&self, x: &DVector<f64>, u: f64) -> Result<DMatrix<f64>>;

    /// `∂T/∂xᵢ` for each coordinate.
    fn dt_dx(&self, x: &DVector<f64>, u: f64) -> Result<Vec<DMatrix<f64>>>;

    fn dt_du(&self, x: &DVector<f64>, u: f64) -> Result<DMatrix<f64>>;

    /// Generalized force `τ`. `inputs` are the external actuations at the
    /// current time (system specific; missing entries count as zero).
    fn force(&self, state: &State, u: f64, inputs: &[f64]) -> DVector<f64>;

    /// `T` and `Ṫ = Σᵢ ∂T/∂xᵢ ẋᵢ + ∂T/∂u u̇`.
    fn t_and_tdot(
        &self,
        x: &DVector<f64>,
        xdot: &DVector<f64>,
        u: f64,
        udot: f64,
    ) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let t = self.eval_t(x, u)?;
        let tdot = crate::factorization::tdot_from_partials(
            &self.dt_dx(x, u)?,
            &self.dt_du(x, u)?,
            xdot,
            udot,
        )?;
        Ok((t, tdot))
    }

    /// Names of the per-degree-of-freedom velocity channels `H₀ẋ`.
    fn channel_names(&self) -> Vec<String> {
        (0..self.r_total()).map(|k| format!("v{k}")).collect()
    }
}

/// Kinetic energy `½‖T(x,u)ẋ‖²`.
pub fn mechanical_energy(model: &dyn FactorizedModel, state: &State, u: f64) -> Result<f64> {
    state.check_dim(model.n())?;
    let t = model.eval_t(&state.x, u)?;
    Ok(0.5 * (t * &state.xdot).norm_squared())
}

/// Uniformly sampled simulation output.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub states: Vec<State>,
    /// Named auxiliary channels, one value per sample.
    pub channels: Vec<(String, Vec<f64>)>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// Coordinate `i` across all samples.
    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.x[i]).collect()
    }

    pub fn velocity(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.xdot[i]).collect()
    }

    /// Checks the sampling invariants: strictly increasing, uniformly spaced
    /// times and equal-length channels.
    pub fn validate(&self) -> Result<()> {
        let len = self.t.len();
        if self.states.len() != len {
            return Err(Error::dim("trajectory states", len, self.states.len()));
        }
        for (_, values) in &self.channels {
            if values.len() != len {
                return Err(Error::dim("trajectory channel", len, values.len()));
            }
        }
        if len >= 2 {
            let h = self.t[1] - self.t[0];
            if !(h > 0.0) {
                return Err(Error::Format("trajectory times not increasing".into()));
            }
            for w in self.t.windows(2) {
                let d = w[1] - w[0];
                if !(d > 0.0) || (d - h).abs() > 1e-9 * h.max(w[1].abs()) {
                    return Err(Error::Format("trajectory times not uniformly spaced".into()));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn state_rejects_mismatch_and_nan() {
        assert!(matches!(
            State::from_slices(&[0.0, 1.0], &[0.0], 0.0),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(State::from_slices(&[], &[], 0.0), Err(Error::Dimension { .. })));
        assert!(matches!(
            State::from_slices(&[f64::NAN], &[0.0], 0.0),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn analytic_derivative_of_tilt() {
        let sig = ExogenousSignal::analytic(|t| 1.22 * (3.0 * t).sin(), |t| 3.66 * (3.0 * t).cos());
        let (u, ud) = resolve_signal_derivative(&sig, 0.0).unwrap();
        assert_eq!(u, 0.0);
        assert_relative_eq!(ud, 3.66, epsilon = 1e-15);
        assert_eq!(sig.resolve(0.0).unwrap().source, DerivativeSource::Analytic);
    }

    #[test]
    fn missing_derivative_is_flagged() {
        let sig = ExogenousSignal::value_only(|t| t * t);
        let s = sig.resolve(2.0).unwrap();
        assert_eq!((s.value, s.rate), (4.0, 0.0));
        assert_eq!(s.source, DerivativeSource::Unavailable);
    }

    #[test]
    fn constant_sampled_signal_has_zero_rate() {
        let rec = SampledRecord::new(0.0, 0.01, vec![0.3; 50]).unwrap();
        let sig = ExogenousSignal::sampled(rec);
        for k in 1..50 {
            let s = sig.resolve(k as f64 * 0.01).unwrap();
            assert_eq!(s.rate, 0.0);
            assert_eq!(s.source, DerivativeSource::BackwardDifference);
        }
    }

    #[test]
    fn linear_sampled_signal_has_unit_rate() {
        let ts = 0.001;
        let sig = ExogenousSignal::value_only(|t| t).sample(0.0, ts, 200).unwrap();
        for k in 1..200 {
            let (_, ud) = resolve_signal_derivative(&sig, k as f64 * ts).unwrap();
            assert!((ud - 1.0).abs() < 1e-12, "k = {k}: {ud}");
        }
    }

    #[test]
    fn sampled_signal_range_errors() {
        let sig = ExogenousSignal::sampled(SampledRecord::new(0.0, 0.1, vec![0.0, 1.0, 2.0]).unwrap());
        assert!(matches!(sig.resolve(-0.05), Err(Error::Range { .. })));
        // no sample one period back
        assert!(matches!(sig.resolve(0.05), Err(Error::Range { .. })));
        assert!(sig.resolve(0.15).is_ok());
        assert!(matches!(sig.resolve(0.25), Err(Error::Range { .. })));
    }

    #[test]
    fn sampled_record_invariants() {
        assert!(SampledRecord::new(0.0, 0.0, vec![1.0, 2.0]).is_err());
        assert!(SampledRecord::new(0.0, 0.1, vec![1.0]).is_err());
    }

    #[test]
    fn interpolation_between_samples() {
        let rec = SampledRecord::new(1.0, 0.5, vec![0.0, 1.0, 4.0]).unwrap();
        assert_relative_eq!(rec.value(1.25).unwrap(), 0.5);
        assert_relative_eq!(rec.value(1.75).unwrap(), 2.5);
        assert_eq!(rec.value(2.0).unwrap(), 4.0);
    }

    #[test]
    fn inertia_must_be_positive() {
        assert!(InertiaDiagonal::new(vec![1.0, 0.0]).is_err());
        assert!(InertiaDiagonal::new(vec![1.0, -2.0]).is_err());
        assert!(InertiaDiagonal::new(vec![]).is_err());
        let d = InertiaDiagonal::new(vec![4.0, 9.0]).unwrap();
        assert_eq!(d.sqrt_entries(), &[2.0, 3.0]);
    }

    #[test]
    fn trajectory_validation() {
        let s = State::from_slices(&[0.0], &[0.0], 0.0).unwrap();
        let mut tr = Trajectory {
            t: vec![0.0, 0.1, 0.2],
            states: vec![s.clone(), s.clone(), s.clone()],
            channels: vec![("a".into(), vec![1.0, 2.0, 3.0])],
        };
        assert!(tr.validate().is_ok());
        tr.t[2] = 0.25;
        assert!(tr.validate().is_err());
        tr.t[2] = 0.2;
        tr.channels[0].1.pop();
        assert!(tr.validate().is_err());
    }
}
