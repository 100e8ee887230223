//! Deviation statistics normalized by the peak of the reference signal.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Trajectory;

/// Mean and maximum of `|candidate − reference|` as a percentage of
/// `max |reference|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonMetrics {
    pub mean_pct: f64,
    pub max_pct: f64,
}

impl ComparisonMetrics {
    pub fn compute(reference: &[f64], candidate: &[f64]) -> Result<Self> {
        if reference.len() != candidate.len() {
            return Err(Error::dim("compared samples", reference.len(), candidate.len()));
        }
        if reference.is_empty() {
            return Err(Error::Parameter("nothing to compare".into()));
        }
        let peak = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(peak > 0.0 && peak.is_finite()) {
            return Err(Error::Parameter(format!("reference peak {peak} cannot normalize")));
        }
        let (sum, max) = reference
            .iter()
            .zip(candidate)
            .map(|(r, c)| (c - r).abs())
            .fold((0.0, 0.0f64), |(s, m), d| (s + d, m.max(d)));
        let mean = sum / reference.len() as f64;
        if !(mean.is_finite() && max.is_finite()) {
            return Err(Error::NonFinite("compared samples"));
        }
        Ok(ComparisonMetrics {
            mean_pct: 100.0 * mean / peak,
            max_pct: 100.0 * max / peak,
        })
    }
}

/// One line of a metrics table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub comparison: String,
    pub channel: String,
    #[serde(flatten)]
    pub metrics: ComparisonMetrics,
}

pub fn compare_channels(
    comparison: &str,
    reference: &Trajectory,
    candidate: &Trajectory,
    channels: &[&str],
) -> Result<Vec<MetricsRow>> {
    channels
        .iter()
        .map(|&name| {
            let missing = || Error::Parameter(format!("trajectory has no channel '{name}'"));
            let r = reference.channel(name).ok_or_else(missing)?;
            let c = candidate.channel(name).ok_or_else(missing)?;
            Ok(MetricsRow {
                comparison: comparison.to_string(),
                channel: name.to_string(),
                metrics: ComparisonMetrics::compute(r, c)?,
            })
        })
        .collect()
}

pub fn find<'a>(rows: &'a [MetricsRow], comparison: &str, channel: &str) -> Option<&'a ComparisonMetrics> {
    rows.iter()
        .find(|r| r.comparison == comparison && r.channel == channel)
        .map(|r| &r.metrics)
}

pub(crate) fn metrics_records(rows: &[MetricsRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.comparison.clone(),
                r.channel.clone(),
                super::io::format_value(r.metrics.mean_pct),
                super::io::format_value(r.metrics.max_pct),
            ]
        })
        .collect()
}

pub(crate) const METRICS_HEADER: [&str; 4] = ["comparison", "channel", "mean_pct", "max_pct"];

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_signals() {
        let r = [1.0, -2.0, 0.5];
        let m = ComparisonMetrics::compute(&r, &r).unwrap();
        assert_eq!((m.mean_pct, m.max_pct), (0.0, 0.0));
    }

    #[test]
    fn hand_computed() {
        // peak 4, differences 0.1, 0.3, 0.2
        let m = ComparisonMetrics::compute(&[4.0, -2.0, 1.0], &[4.1, -2.3, 0.8]).unwrap();
        assert!((m.mean_pct - 5.0).abs() < 1e-12);
        assert!((m.max_pct - 7.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(ComparisonMetrics::compute(&[0.0, 0.0], &[0.0, 0.0]).is_err());
        assert!(ComparisonMetrics::compute(&[1.0], &[1.0, 2.0]).is_err());
        assert!(ComparisonMetrics::compute(&[], &[]).is_err());
    }

    proptest! {
        #[test]
        fn scale_invariant_and_ordered(
            pairs in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..50),
            k in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3],
        ) {
            let r: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            prop_assume!(r.iter().any(|v| v.abs() > 1e-6));
            let c: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let m = ComparisonMetrics::compute(&r, &c).unwrap();
            prop_assert!(0.0 <= m.mean_pct && m.mean_pct <= m.max_pct * (1.0 + 1e-12));
            let rs: Vec<f64> = r.iter().map(|v| v * k).collect();
            let cs: Vec<f64> = c.iter().map(|v| v * k).collect();
            let ms = ComparisonMetrics::compute(&rs, &cs).unwrap();
            prop_assert!((ms.mean_pct - m.mean_pct).abs() <= 1e-9 * (1.0 + m.mean_pct));
            prop_assert!((ms.max_pct - m.max_pct).abs() <= 1e-9 * (1.0 + m.max_pct));
        }
    }
}
