//! Kepler's equation and conversions between the three anomalies.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_ITERATIONS: usize = 50;

/// Residual bound for [`solve_kepler`]: `1e-13`, or a few ulps of π for
/// scalars too coarse to reach it.
pub fn kepler_tolerance<T: Scalar>() -> T {
    T::lit(1e-13).max(T::epsilon() * T::lit(16.0))
}

/// Solves `E - e sin E = M` for the eccentric anomaly.
///
/// `M` may lie outside `[-π, π)`; the revolution count is carried over to
/// `E`, so the result is continuous in `M`. Newton iteration seeded with
/// `M + 0.85 e sign(sin M)`, kept inside the bracket `[M - e, M + e]` by
/// bisection.
pub fn solve_kepler<T: Scalar>(mean_anomaly: T, e: T) -> Result<T> {
    if !(e >= T::zero() && e < T::one()) {
        return Err(Error::InvalidParameter(format!(
            "Kepler solver needs 0 <= e < 1, got {e}"
        )));
    }
    if !mean_anomaly.is_finite() {
        return Err(Error::InvalidParameter("non-finite mean anomaly".into()));
    }
    let tau = T::TAU();
    let revs = (mean_anomaly / tau).round();
    let m = mean_anomaly - revs * tau;
    if e == T::zero() {
        return Ok(mean_anomaly);
    }

    let tol = kepler_tolerance::<T>();
    let residual = |ea: T| ea - e * ea.sin() - m;

    let mut lo = m - e;
    let mut hi = m + e;
    let mut ea = m + T::lit(0.85) * e * m.sin().signum();
    if m.sin() == T::zero() {
        ea = m;
    }
    ea = ea.max(lo).min(hi);

    for _ in 0..MAX_ITERATIONS {
        let f = residual(ea);
        if f.abs() <= tol {
            // one more Newton step: near perigee of very eccentric orbits a
            // small residual still leaves E off by residual / (1 - e)
            let polished = ea - f / (T::one() - e * ea.cos());
            if residual(polished).abs() <= f.abs() {
                ea = polished;
            }
            return Ok(ea + revs * tau);
        }
        if f > T::zero() {
            hi = ea;
        } else {
            lo = ea;
        }
        let df = T::one() - e * ea.cos();
        let newton = ea - f / df;
        ea = if newton > lo && newton < hi {
            newton
        } else {
            T::lit(0.5) * (lo + hi)
        };
    }
    let f = residual(ea);
    if f.abs() <= tol {
        Ok(ea + revs * tau)
    } else {
        Err(Error::KeplerNonConvergence {
            mean_anomaly: mean_anomaly.as_f64(),
            eccentricity: e.as_f64(),
            residual: f.as_f64(),
        })
    }
}

/// True anomaly from eccentric anomaly, same revolution.
pub fn eccentric_to_true<T: Scalar>(ea: T, e: T) -> T {
    let revs = (ea / T::TAU()).round();
    let reduced = ea - revs * T::TAU();
    let beta = (T::one() - e * e).sqrt();
    let f = (beta * reduced.sin()).atan2(reduced.cos() - e);
    f + revs * T::TAU()
}

/// Eccentric anomaly from true anomaly, same revolution.
pub fn true_to_eccentric<T: Scalar>(f: T, e: T) -> T {
    let revs = (f / T::TAU()).round();
    let reduced = f - revs * T::TAU();
    let beta = (T::one() - e * e).sqrt();
    let ea = (beta * reduced.sin()).atan2(e + reduced.cos());
    ea + revs * T::TAU()
}

pub fn eccentric_to_mean<T: Scalar>(ea: T, e: T) -> T {
    ea - e * ea.sin()
}

pub fn true_to_mean<T: Scalar>(f: T, e: T) -> T {
    eccentric_to_mean(true_to_eccentric(f, e), e)
}

pub fn mean_to_true<T: Scalar>(m: T, e: T) -> Result<T> {
    Ok(eccentric_to_true(solve_kepler(m, e)?, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Plain bisection on the Kepler equation, used as the reference.
    fn bisect(m: f64, e: f64) -> f64 {
        let (mut lo, mut hi) = (m - 1.0, m + 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid - e * mid.sin() - m > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn circular_is_identity() {
        for &m in &[0.0, 0.3, -2.0, 10.0] {
            assert_eq!(solve_kepler(m, 0.0).unwrap(), m);
        }
    }

    #[test]
    fn half_revolution_is_fixed_point() {
        for &e in &[0.0, 0.1, 0.5, 0.9, 0.99] {
            let ea = solve_kepler(PI, e).unwrap();
            assert!((ea - PI).abs() < 1e-15, "e={e}: {ea}");
        }
    }

    #[test]
    fn matches_bisection_oracle() {
        let reference = bisect(1.0, 0.8);
        assert!((reference - 1.7822).abs() < 5e-5);
        let ea = solve_kepler(1.0, 0.8).unwrap();
        assert!((ea - reference).abs() < 1e-13);
        assert!((ea - 0.8 * ea.sin() - 1.0).abs() <= 1e-13);
    }

    #[test]
    fn high_eccentricity_converges() {
        for i in 0..2000 {
            let m = -PI + (i as f64) * (2.0 * PI / 2000.0);
            for &e in &[0.9, 0.95, 0.99, 0.999] {
                let ea = solve_kepler(m, e).unwrap();
                assert!((ea - e * ea.sin() - m).abs() <= 1e-13, "m={m} e={e}");
            }
        }
    }

    #[test]
    fn revolutions_carry_over() {
        let ea = solve_kepler(1.0 + 6.0 * PI, 0.3).unwrap();
        let base = solve_kepler(1.0, 0.3).unwrap();
        assert!((ea - base - 6.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_eccentricity() {
        assert!(solve_kepler(1.0, 1.0).is_err());
        assert!(solve_kepler(1.0, -0.1).is_err());
        assert!(solve_kepler(f64::NAN, 0.1).is_err());
    }

    #[test]
    fn single_precision() {
        let ea: f32 = solve_kepler(1.0_f32, 0.8).unwrap();
        assert!((ea - 0.8 * ea.sin() - 1.0).abs() <= kepler_tolerance::<f32>());
    }

    #[test]
    fn anomaly_roundtrip() {
        for &e in &[0.0, 0.2, 0.9] {
            for i in -10..10 {
                let f = 0.37 * i as f64;
                let back = eccentric_to_true(true_to_eccentric(f, e), e);
                assert!((back - f).abs() < 1e-13, "e={e} f={f} back={back}");
                let m = true_to_mean(f, e);
                let back_m = mean_to_true(m, e).unwrap();
                assert!((back_m - f).abs() < 1e-12, "e={e} f={f} m={m} back={back_m}");
            }
        }
    }
}
