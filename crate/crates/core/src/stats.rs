//! Goodness-of-fit helpers for the sampling checks.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson chi-square statistic and upper-tail p-value of `observed` counts
/// against `expected` counts.
///
/// Bins with zero expectation are dropped from the statistic; any count
/// landing in such a bin makes the fit impossible and yields p = 0.
pub fn chi_square(observed: &[u64], expected: &[f64]) -> (f64, f64) {
    assert_eq!(observed.len(), expected.len(), "bin count mismatch");
    let mut stat = 0.0;
    let mut bins = 0usize;
    for (&o, &e) in observed.iter().zip(expected) {
        if e <= 0.0 {
            if o > 0 {
                return (f64::INFINITY, 0.0);
            }
            continue;
        }
        let d = o as f64 - e;
        stat += d * d / e;
        bins += 1;
    }
    if bins < 2 {
        return (stat, 1.0);
    }
    let dist = ChiSquared::new((bins - 1) as f64).expect("positive degrees of freedom");
    (stat, dist.sf(stat))
}
