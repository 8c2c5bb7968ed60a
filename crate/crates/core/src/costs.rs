//! Convex piecewise-linear cost functions `y_i(u) = a_i * u - b_i`.
//!
//! The model charges every resource the upper envelope of its segments, which
//! an LP expresses as one epigraph row per segment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SEGMENTS: usize = 5;
pub const DEFAULT_STEEPNESS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSegment {
    pub slope: f64,
    pub intercept: f64,
}

impl LinearSegment {
    pub fn at(&self, u: f64) -> f64 {
        self.slope * u - self.intercept
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostFunctionSet {
    pub segments: Vec<LinearSegment>,
}

impl Default for CostFunctionSet {
    fn default() -> Self {
        make_exponential_approx(DEFAULT_SEGMENTS, DEFAULT_STEEPNESS)
    }
}

/// Normalized exponential `(e^{s u} - 1) / (e^s - 1)`.
pub fn normalized_exp(steepness: f64, u: f64) -> f64 {
    (steepness * u).exp_m1() / steepness.exp_m1()
}

/// Chords of the normalized exponential between `num_segments + 1` evenly
/// spaced breakpoints on `[0, 1]`.
pub fn make_exponential_approx(num_segments: usize, steepness: f64) -> CostFunctionSet {
    let n = num_segments.max(1);
    let steepness = if steepness > 0.0 { steepness } else { DEFAULT_STEEPNESS };
    let knot = |i: usize| i as f64 / n as f64;
    let g = |i: usize| {
        if i == 0 {
            0.0
        } else if i == n {
            1.0
        } else {
            normalized_exp(steepness, knot(i))
        }
    };
    let segments = (0..n)
        .map(|i| {
            let slope = (g(i + 1) - g(i)) * n as f64;
            let intercept = if i == 0 { 0.0 } else { slope * knot(i) - g(i) };
            LinearSegment { slope, intercept }
        })
        .collect();
    CostFunctionSet { segments }
}

impl CostFunctionSet {
    pub fn new(segments: Vec<LinearSegment>) -> Result<Self> {
        let set = CostFunctionSet { segments };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.segments.first() else {
            return Err(Error::invalid("costs", "needs at least one segment"));
        };
        if first.slope < 0.0 || first.intercept != 0.0 {
            return Err(Error::invalid("costs", "first segment must pass through the origin with slope >= 0"));
        }
        if self.segments.iter().any(|s| !(s.slope.is_finite() && s.intercept.is_finite())) {
            return Err(Error::invalid("costs", "segments must be finite"));
        }
        Ok(())
    }

    /// Envelope value, clipped at zero.
    pub fn evaluate(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::OutOfRange { value: u, low: 0.0, high: 1.0 });
        }
        Ok(self.envelope(u))
    }

    /// Envelope value without the domain check.
    pub fn envelope(&self, u: f64) -> f64 {
        self.segments.iter().map(|s| s.at(u)).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_segment_is_identity() {
        for s in [0.5, 1.0, 10.0] {
            let c = make_exponential_approx(1, s);
            assert_eq!(c.segments, vec![LinearSegment { slope: 1.0, intercept: 0.0 }]);
        }
    }

    #[test]
    fn slopes_increase_for_steep_exponential() {
        let c = make_exponential_approx(4, 10.0);
        // chord slopes of g at 0, .25, .5, .75, 1
        let g = |u: f64| (10.0 * u).exp_m1() / 10f64.exp_m1();
        for (i, seg) in c.segments.iter().enumerate() {
            let (a, b) = (i as f64 / 4.0, (i + 1) as f64 / 4.0);
            assert!((seg.slope - (g(b) - g(a)) / 0.25).abs() < 1e-9);
        }
        assert!(c.segments.windows(2).all(|w| w[0].slope < w[1].slope));
    }

    #[test]
    fn normalized_at_one() {
        for (n, s) in [(1, 1.0), (5, 10.0), (8, 3.0)] {
            assert!((make_exponential_approx(n, s).evaluate(1.0).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn evaluate_examples() {
        let c = CostFunctionSet::new(vec![
            LinearSegment { slope: 1.0, intercept: 0.0 },
            LinearSegment { slope: 2.0, intercept: 0.5 },
        ])
        .unwrap();
        assert_eq!(c.evaluate(0.25).unwrap(), 0.25);
        assert_eq!(c.evaluate(0.75).unwrap(), 1.0);
        assert_eq!(c.evaluate(0.0).unwrap(), 0.0);
        assert!(matches!(c.evaluate(1.5), Err(Error::OutOfRange { .. })));
        assert!(c.evaluate(-0.1).is_err());
    }

    proptest! {
        #[test]
        fn envelope_dominates_segments(n in 1usize..10, s in 0.1f64..20.0, u in 0.0f64..=1.0) {
            let c = make_exponential_approx(n, s);
            let v = c.evaluate(u).unwrap();
            for seg in &c.segments {
                prop_assert!(v >= seg.at(u) - 1e-12);
            }
        }

        #[test]
        fn envelope_convex_and_monotone(n in 1usize..10, s in 0.1f64..20.0) {
            let c = make_exponential_approx(n, s);
            let grid: Vec<f64> = (0..=50).map(|i| c.envelope(i as f64 / 50.0)).collect();
            for w in grid.windows(3) {
                prop_assert!(w[1] - w[0] <= w[2] - w[1] + 1e-12);
                prop_assert!(w[1] >= w[0] - 1e-12);
            }
        }

        #[test]
        fn steeper_is_lower(n in 1usize..8, s1 in 0.5f64..10.0, ds in 0.1f64..10.0) {
            let (a, b) = (make_exponential_approx(n, s1), make_exponential_approx(n, s1 + ds));
            for i in 0..=20 {
                let u = i as f64 / 20.0;
                prop_assert!(b.envelope(u) <= a.envelope(u) + 1e-12);
            }
            prop_assert!((b.envelope(1.0) - a.envelope(1.0)).abs() < 1e-12);
        }
    }
}
