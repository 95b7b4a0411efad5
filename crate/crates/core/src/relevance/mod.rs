//! Automatic relevance functions for continuous targets.
//!
//! The relevance function maps target values onto `[0, 1]`. The automatic
//! construction places a zero-relevance control point at the sample median
//! and full-relevance points at the adjusted-boxplot fences on the side(s)
//! where extremes are of interest, and joins them with cubic Hermite
//! segments that are flat at every control point.

mod boxplot;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use boxplot::{adjusted_boxplot, medcouple, quantile_sorted, BoxplotStats};

use crate::error::{Error, Result};

/// Which tail(s) of the target distribution hold the extremes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremeType {
    Low,
    High,
    Both,
}

impl fmt::Display for ExtremeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExtremeType::Low => "low",
            ExtremeType::High => "high",
            ExtremeType::Both => "both",
        })
    }
}

impl FromStr for ExtremeType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "low" | "l" => Ok(ExtremeType::Low),
            "high" | "h" => Ok(ExtremeType::High),
            "both" | "b" => Ok(ExtremeType::Both),
            other => Err(Error::invalid(format!("unknown extreme type `{other}`"))),
        }
    }
}

/// A knot of the relevance curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlPoint {
    pub y: f64,
    pub relevance: f64,
    pub slope: f64,
}

impl ControlPoint {
    pub fn flat(y: f64, relevance: f64) -> Self {
        ControlPoint {
            y,
            relevance,
            slope: 0.0,
        }
    }
}

/// Piecewise cubic Hermite relevance curve over strictly increasing knots.
///
/// Outside the knot range the curve is constant at the nearest knot's
/// relevance, and every evaluation is clamped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceFunction {
    control_points: Vec<ControlPoint>,
    extreme_type: ExtremeType,
}

impl RelevanceFunction {
    /// Builds a curve from explicit control points.
    pub fn new(control_points: Vec<ControlPoint>, extreme_type: ExtremeType) -> Result<Self> {
        if control_points.len() < 2 {
            return Err(Error::invalid("relevance function needs at least 2 control points"));
        }
        for p in &control_points {
            if !(p.y.is_finite() && p.slope.is_finite()) {
                return Err(Error::invalid("control point with non-finite location or slope"));
            }
            if !(0.0..=1.0).contains(&p.relevance) {
                return Err(Error::invalid(format!(
                    "control point relevance {} outside [0, 1]",
                    p.relevance
                )));
            }
        }
        if control_points.windows(2).any(|w| w[0].y >= w[1].y) {
            return Err(Error::invalid("control points must be strictly increasing in y"));
        }
        Ok(RelevanceFunction {
            control_points,
            extreme_type,
        })
    }

    pub fn control_points(&self) -> &[ControlPoint] {
        &self.control_points
    }

    pub fn extreme_type(&self) -> ExtremeType {
        self.extreme_type
    }

    /// Relevance of a single target value.
    pub fn evaluate(&self, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::invalid(format!("cannot evaluate relevance at {y}")));
        }
        Ok(self.eval_finite(y))
    }

    /// Relevance of every value in `ys`.
    pub fn evaluate_all(&self, ys: &[f64]) -> Result<Vec<f64>> {
        ys.iter().map(|&y| self.evaluate(y)).collect()
    }

    pub(crate) fn eval_finite(&self, y: f64) -> f64 {
        let pts = &self.control_points;
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if y <= first.y {
            return first.relevance;
        }
        if y >= last.y {
            return last.relevance;
        }
        // First knot strictly to the right of y; always in 1..len.
        let hi = pts.partition_point(|p| p.y <= y);
        let (a, b) = (pts[hi - 1], pts[hi]);
        let h = b.y - a.y;
        let s = (y - a.y) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let v = h00 * a.relevance + h10 * h * a.slope + h01 * b.relevance + h11 * h * b.slope;
        v.clamp(0.0, 1.0)
    }
}

/// Classifies the tails that hold adjusted-boxplot outliers.
///
/// A value is an outlier only when strictly beyond a fence. A sample with no
/// outliers at all is treated as `Both`.
pub fn infer_extreme_type(sample: &[f64], stats: &BoxplotStats) -> ExtremeType {
    let below = sample.iter().any(|&v| v < stats.lower_fence);
    let above = sample.iter().any(|&v| v > stats.upper_fence);
    match (below, above) {
        (true, false) => ExtremeType::Low,
        (false, true) => ExtremeType::High,
        _ => ExtremeType::Both,
    }
}

/// Control points implied by boxplot statistics for the given extreme type.
pub fn control_points_for(stats: &BoxplotStats, extreme_type: ExtremeType) -> Vec<ControlPoint> {
    let lo = ControlPoint::flat(stats.lower_fence, 1.0);
    let mid = ControlPoint::flat(stats.median, 0.0);
    let hi = ControlPoint::flat(stats.upper_fence, 1.0);
    match extreme_type {
        ExtremeType::Both => vec![lo, mid, hi],
        ExtremeType::Low => vec![lo, mid],
        ExtremeType::High => vec![mid, hi],
    }
}

/// Builds the automatic relevance function of a target sample.
///
/// `type_override` replaces the inferred extreme type.
pub fn build_relevance(
    sample: &[f64],
    type_override: Option<ExtremeType>,
) -> Result<RelevanceFunction> {
    let stats = adjusted_boxplot(sample)?;
    if stats.iqr <= 0.0 {
        return Err(Error::DegenerateDistribution(format!(
            "interquartile range is zero (q1 = q3 = {})",
            stats.q1
        )));
    }
    let extreme_type = type_override.unwrap_or_else(|| infer_extreme_type(sample, &stats));
    RelevanceFunction::new(control_points_for(&stats, extreme_type), extreme_type)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn skewed_sample() -> Vec<f64> {
        let mut x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin() + 5.0).collect();
        x.extend([12.0, 15.0, 20.0]);
        x
    }

    #[test]
    fn outliers_on_both_sides() {
        let mut x: Vec<f64> = (1..=40).map(f64::from).collect();
        x.extend([-200.0, 300.0]);
        let s = adjusted_boxplot(&x).unwrap();
        assert_eq!(infer_extreme_type(&x, &s), ExtremeType::Both);
    }

    #[test]
    fn outliers_above_only() {
        let x = skewed_sample();
        let s = adjusted_boxplot(&x).unwrap();
        assert_eq!(infer_extreme_type(&x, &s), ExtremeType::High);
    }

    #[test]
    fn no_outliers_defaults_to_both() {
        let x: Vec<f64> = (1..=20).map(f64::from).collect();
        let s = adjusted_boxplot(&x).unwrap();
        assert_eq!(infer_extreme_type(&x, &s), ExtremeType::Both);
    }

    #[test]
    fn value_on_fence_is_not_an_outlier() {
        let stats = BoxplotStats {
            q1: 1.0,
            median: 2.0,
            q3: 3.0,
            iqr: 2.0,
            medcouple: 0.0,
            lower_fence: -2.0,
            upper_fence: 6.0,
        };
        assert_eq!(infer_extreme_type(&[-2.0, 2.0, 6.0], &stats), ExtremeType::Both);
        assert_eq!(infer_extreme_type(&[-2.0, 2.0, 6.5], &stats), ExtremeType::High);
    }

    #[test]
    fn both_type_knots() {
        let x: Vec<f64> = (1..=100).map(f64::from).collect();
        let s = adjusted_boxplot(&x).unwrap();
        let phi = build_relevance(&x, None).unwrap();
        assert_eq!(phi.extreme_type(), ExtremeType::Both);
        assert_eq!(phi.evaluate(s.median).unwrap(), 0.0);
        assert_eq!(phi.evaluate(s.lower_fence).unwrap(), 1.0);
        assert_eq!(phi.evaluate(s.upper_fence).unwrap(), 1.0);
        assert_eq!(phi.evaluate(s.lower_fence - 1.0).unwrap(), 1.0);
        assert_eq!(phi.evaluate(s.upper_fence + 10.0).unwrap(), 1.0);
    }

    #[test]
    fn high_type_midpoint() {
        let x = skewed_sample();
        let s = adjusted_boxplot(&x).unwrap();
        let phi = build_relevance(&x, None).unwrap();
        assert_eq!(phi.control_points().len(), 2);
        // Zero end slopes: h(s) = 3s^2 - 2s^3, so h(1/2) = 1/2.
        let mid = 0.5 * (s.median + s.upper_fence);
        assert_relative_eq!(phi.evaluate(mid).unwrap(), 0.5, epsilon = 1e-12);
        let quarter = s.median + 0.25 * (s.upper_fence - s.median);
        assert_relative_eq!(phi.evaluate(quarter).unwrap(), 0.15625, epsilon = 1e-12);
        // Below the median the High curve is flat at zero.
        assert_eq!(phi.evaluate(s.median - 100.0).unwrap(), 0.0);
    }

    #[test]
    fn low_type_override() {
        let x: Vec<f64> = (1..=30).map(f64::from).collect();
        let phi = build_relevance(&x, Some(ExtremeType::Low)).unwrap();
        let pts = phi.control_points();
        assert_eq!(pts.len(), 2);
        assert_eq!((pts[0].relevance, pts[1].relevance), (1.0, 0.0));
        assert_eq!(phi.evaluate(1e9).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_iqr() {
        let x = [3.0, 3.0, 3.0, 3.0, 3.0, 7.0];
        assert!(matches!(
            build_relevance(&x, None),
            Err(Error::DegenerateDistribution(_))
        ));
    }

    #[test]
    fn evaluate_rejects_non_finite() {
        let phi = build_relevance(&[1.0, 2.0, 3.0, 4.0], None).unwrap();
        assert!(phi.evaluate(f64::INFINITY).is_err());
    }

    #[test]
    fn explicit_points_validated() {
        assert!(RelevanceFunction::new(vec![ControlPoint::flat(0.0, 0.0)], ExtremeType::High).is_err());
        assert!(RelevanceFunction::new(
            vec![ControlPoint::flat(1.0, 0.0), ControlPoint::flat(1.0, 1.0)],
            ExtremeType::High
        )
        .is_err());
        assert!(RelevanceFunction::new(
            vec![ControlPoint::flat(0.0, 0.0), ControlPoint::flat(1.0, 1.5)],
            ExtremeType::High
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn relevance_bounded_and_side_monotone(
            sample in prop::collection::vec(-1e3f64..1e3, 8..60),
            probes in prop::collection::vec(-5e3f64..5e3, 2..40),
        ) {
            let Ok(phi) = build_relevance(&sample, None) else { return Ok(()); };
            let median = phi.control_points().iter().find(|p| p.relevance == 0.0).unwrap().y;
            let mut probes = probes;
            probes.sort_by(f64::total_cmp);
            let vals: Vec<f64> = probes.iter().map(|&y| phi.evaluate(y).unwrap()).collect();
            for (w, v) in probes.windows(2).zip(vals.windows(2)) {
                prop_assert!((0.0..=1.0).contains(&v[0]));
                if w[0] >= median {
                    prop_assert!(v[0] <= v[1]);
                }
                if w[1] <= median {
                    prop_assert!(v[0] >= v[1]);
                }
            }
        }

        #[test]
        fn medcouple_antisymmetric(sample in prop::collection::vec(-50f64..50.0, 3..40)) {
            let neg: Vec<f64> = sample.iter().map(|v| -v).collect();
            let a = medcouple(&sample).unwrap();
            let b = medcouple(&neg).unwrap();
            prop_assert!((a + b).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&a));
        }

        #[test]
        fn extreme_type_affine_invariant(
            sample in prop::collection::vec(-50f64..50.0, 5..40),
            outlier in 100f64..1e4,
            scale in 0.01f64..100.0,
            shift in -100f64..100.0,
        ) {
            let mut sample = sample;
            sample.push(outlier);
            let moved: Vec<f64> = sample.iter().map(|v| scale * v + shift).collect();
            let a = infer_extreme_type(&sample, &adjusted_boxplot(&sample).unwrap());
            let b = infer_extreme_type(&moved, &adjusted_boxplot(&moved).unwrap());
            prop_assert_eq!(a, b);
        }
    }
}
