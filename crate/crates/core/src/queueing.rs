//! Single-server queue formulas shared by both slices.

use crate::error::{Error, Result};

/// Mean sojourn time of an M/G/1 queue (Pollaczek-Khinchine).
///
/// `second_moment` is E[S²], not the variance.
pub fn pk_sojourn(arrival_rate: f64, mean_service: f64, second_moment: f64, queue: &'static str) -> Result<f64> {
    let utilization = arrival_rate * mean_service;
    if utilization >= 1.0 {
        return Err(Error::Unstable { queue, utilization });
    }
    Ok(mean_service + arrival_rate * second_moment / (2.0 * (1.0 - utilization)))
}

/// Mean sojourn time of an M/D/1 queue with service time `service`.
pub fn md1_sojourn(arrival_rate: f64, service: f64, queue: &'static str) -> Result<f64> {
    pk_sojourn(arrival_rate, service, service * service, queue)
}

/// Smallest rate `R` such that an M/D/1 queue serving `size`-bit jobs at
/// `R` bits/s has mean sojourn at most `target`.
///
/// This is the stable root of the quadratic in `R`; it always satisfies
/// `arrival_rate * size < R`. With `z = λT` and `w = sqrt(1 + z²)` the root is
/// `(size / T) (1 + w) / (1 + 1 / (w + z))`, which avoids the cancellation of
/// the textbook form for large `z`.
pub fn min_md1_rate(arrival_rate: f64, size: f64, target: f64) -> f64 {
    let z = arrival_rate * target;
    let w = z.hypot(1.0);
    // 1 - z/(1+w) = (1 + 1/(w+z)) / (1 + w)
    size / target * (1.0 + w) / (1.0 + 1.0 / (w + z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn deterministic_service_examples() {
        assert_relative_eq!(pk_sojourn(0.5, 1.0, 1.0, "q").unwrap(), 1.5, max_relative = 1e-15);
        assert_relative_eq!(md1_sojourn(0.5, 1.0, "q").unwrap(), 1.5, max_relative = 1e-15);
        assert_eq!(md1_sojourn(0.0, 2.0, "q").unwrap(), 2.0);
        let err = md1_sojourn(1.0, 1.0, "q").unwrap_err();
        assert!(matches!(err, Error::Unstable { utilization, .. } if utilization == 1.0));
    }

    #[test]
    fn min_rate_zero_load_and_unit_load() {
        assert_eq!(min_md1_rate(0.0, 5e9, 1.0), 5e9);
        let r = min_md1_rate(1.0, 1.0, 1.0);
        assert_relative_eq!(r, 1.0 / (2.0 - 2f64.sqrt()), max_relative = 1e-14);
    }

    #[test]
    fn min_rate_matches_bisection() {
        for &(lambda, size, target) in &[(0.3, 2.0, 1.7), (12.0, 1e9, 5.0), (1e-3, 3.0, 0.5)] {
            let (mut lo, mut hi) = (lambda * size * (1.0 + 1e-12), 1e30);
            for _ in 0..400 {
                let mid = 0.5 * (lo + hi);
                if md1_sojourn(lambda, size / mid, "q").unwrap() > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert_relative_eq!(min_md1_rate(lambda, size, target), hi, max_relative = 1e-10);
        }
    }
}
