//! Closed-form relations between inclination and the frequencies of the
//! motion.
//!
//! Two families are covered. The averaged (mean-element) ratios of the
//! apsidal rate to the mean motion and of the latitude rate to the
//! true-anomaly rate are linear in `cos² i`. The intermediary ratio
//! `k = n_r / n_θ = Q / P` is exact for the radial intermediary and can be
//! inverted for `cos² i` in closed form; the 1:1 resonance `k = 1` is the
//! critical inclination.
//!
//! Every relation depends on `cos² i` only, so each result has a prograde
//! branch in `[0°, 90°]` and its retrograde supplement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{rationals_in, RationalRatio};
use crate::scalar::Scalar;

/// Slack within which `cos² i` outside `[0, 1]` is clamped instead of rejected.
pub const COS2_SLACK: f64 = 1e-12;

/// Below this `σ` the critical inclination is evaluated from its series.
pub const SERIES_SIGMA: f64 = 1e-8;

/// Largest denominator accepted by [`scan_resonances`].
pub const MAX_SCAN_DENOMINATOR: u64 = 10_000;

/// Default window of `k` for resonance scans.
pub const DEFAULT_K_WINDOW: (f64, f64) = (0.5, 1.5);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RatioKind {
    /// Mean apsidal rate over mean motion, `n_ω / n`.
    Apsidal,
    /// Mean latitude rate over mean true-anomaly rate, `n_θ / n_f`.
    Latitude,
    /// Anomalistic over draconitic frequency, `n_r / n_θ`.
    Radial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRatio<T> {
    pub value: T,
    pub kind: RatioKind,
}

/// Inclination at which `n_r / n_θ` equals a rational `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonantInclination<T> {
    pub k: RationalRatio,
    pub cos2i: T,
    /// Prograde branch, degrees.
    pub i_deg: T,
    /// `180 − i_deg`.
    pub i_retro_deg: T,
}

impl<T: Scalar> ResonantInclination<T> {
    fn from_cos2(k: RationalRatio, cos2i: T) -> Self {
        let i_deg = inclination_from_cos2(cos2i).to_degrees();
        Self {
            k,
            cos2i,
            i_deg,
            i_retro_deg: T::lit(180.0) - i_deg,
        }
    }
}

fn check_sigma<T: Scalar>(sigma: T, strict: bool) -> Result<()> {
    let ok = if strict { sigma > T::zero() } else { sigma >= T::zero() };
    if ok && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "sigma must be {} 0, got {sigma}",
            if strict { ">" } else { ">=" }
        )))
    }
}

/// Clamps rounding excursions of `cos² i`; anything further out has no real
/// inclination.
pub fn clamp_cos2<T: Scalar>(cos2i: T) -> Result<T> {
    let slack = T::lit(COS2_SLACK);
    if !cos2i.is_finite() || cos2i < -slack || cos2i > T::one() + slack {
        return Err(Error::NoRealInclination { cos2i: cos2i.as_f64() });
    }
    Ok(cos2i.max(T::zero()).min(T::one()))
}

/// Prograde inclination `arccos √(cos² i)` in radians.
pub fn inclination_from_cos2<T: Scalar>(cos2i: T) -> T {
    cos2i.max(T::zero()).min(T::one()).sqrt().acos()
}

/// `n_ω / n = (3/4) σ (5 cos² i − 1)`.
pub fn apsidal_rate_ratio<T: Scalar>(sigma: T, i: T) -> Result<FrequencyRatio<T>> {
    check_sigma(sigma, false)?;
    let c = i.cos();
    Ok(FrequencyRatio {
        value: T::lit(0.75) * sigma * (T::lit(5.0) * c * c - T::one()),
        kind: RatioKind::Apsidal,
    })
}

/// `n_θ / n_f = 1 + n_ω / n`.
pub fn latitude_rate_ratio<T: Scalar>(sigma: T, i: T) -> Result<FrequencyRatio<T>> {
    let apsidal = apsidal_rate_ratio(sigma, i)?;
    Ok(FrequencyRatio {
        value: T::one() + apsidal.value,
        kind: RatioKind::Latitude,
    })
}

/// Inverse of [`apsidal_rate_ratio`], prograde branch (radians).
pub fn inclination_from_apsidal_ratio<T: Scalar>(sigma: T, ratio: T) -> Result<T> {
    check_sigma(sigma, true)?;
    let cos2 = (T::one() + T::lit(4.0 / 3.0) * ratio / sigma) / T::lit(5.0);
    Ok(inclination_from_cos2(clamp_cos2(cos2)?))
}

/// Inverse of [`latitude_rate_ratio`]: the apsidal map shifted by one.
pub fn inclination_from_latitude_ratio<T: Scalar>(sigma: T, ratio: T) -> Result<T> {
    inclination_from_apsidal_ratio(sigma, ratio - T::one())
}

/// `k = Q/P = √(1 + σ(½ − (3/2)cos² i)) / (1 − σ(½ − 3cos² i))`.
pub fn frequency_ratio_of_inclination<T: Scalar>(sigma: T, i: T) -> Result<FrequencyRatio<T>> {
    check_sigma(sigma, false)?;
    let c = i.cos();
    frequency_ratio_of_cos2(sigma, c * c)
}

pub fn frequency_ratio_of_cos2<T: Scalar>(sigma: T, cos2i: T) -> Result<FrequencyRatio<T>> {
    let half = T::lit(0.5);
    let radicand = T::one() + sigma * (half - T::lit(1.5) * cos2i);
    let denominator = T::one() - sigma * (half - T::lit(3.0) * cos2i);
    if !(radicand > T::zero() && denominator > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "sigma = {sigma} outside the domain of the frequency ratio"
        )));
    }
    Ok(FrequencyRatio {
        value: radicand.sqrt() / denominator,
        kind: RatioKind::Radial,
    })
}

/// `cos² i` at which `n_r / n_θ = k`, unclamped.
///
/// Algebraically equal to
/// `[√(1 + 4(6+σ)k²) − 1 − 2(2−σ)k²] / (12σk²)`, rewritten by rationalising
/// the numerator so that neither small `σ` nor `k` near one cancels digits:
/// `[4(1−k)(1+k) + σ(2 + 4k²) − σ²k²] / (3σ [√(1 + 4(6+σ)k²) + 1 + 2(2−σ)k²])`.
pub fn cos2_from_frequency_ratio<T: Scalar>(sigma: T, k: T) -> Result<T> {
    check_sigma(sigma, true)?;
    if !(k > T::zero() && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("k must be > 0, got {k}")));
    }
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let k2 = k * k;
    let root = (T::one() + four * (T::lit(6.0) + sigma) * k2).sqrt();
    let conj = root + T::one() + two * (two - sigma) * k2;
    let numerator = four * (T::one() - k) * (T::one() + k) + sigma * (two + four * k2) - sigma * sigma * k2;
    Ok(numerator / (T::lit(3.0) * sigma * conj))
}

/// Inclination at which the anomalistic and draconitic frequencies stand
/// in the ratio `k`.
pub fn inclination_from_frequency_ratio<T: Scalar>(sigma: T, k: RationalRatio) -> Result<ResonantInclination<T>> {
    let cos2 = clamp_cos2(cos2_from_frequency_ratio(sigma, k.value::<T>())?)?;
    Ok(ResonantInclination::from_cos2(k, cos2))
}

/// Coefficients `(g₋₁, g₀, g₁)` of `cos² i = g₋₁/σ + g₀ + g₁σ + O(σ²)`.
///
/// `g₋₁ = (√(1+24k²) − 1 − 4k²)/(12k²)` vanishes only at `k = 1`.
pub fn series_coefficients<T: Scalar>(k: T) -> [T; 3] {
    let k2 = k * k;
    let w = T::one() + T::lit(24.0) * k2;
    let root = w.sqrt();
    [
        leading_series_coefficient(k),
        (T::one() + T::one() / root) / T::lit(6.0),
        -k2 / (T::lit(6.0) * w * root),
    ]
}

/// `g(k) = (√(1+24k²) − 1 − 4k²)/(12k²)`, evaluated as
/// `4(1−k)(1+k) / (3(√(1+24k²) + 1 + 4k²))`.
pub fn leading_series_coefficient<T: Scalar>(k: T) -> T {
    let k2 = k * k;
    let root = (T::one() + T::lit(24.0) * k2).sqrt();
    T::lit(4.0) * (T::one() - k) * (T::one() + k) / (T::lit(3.0) * (root + T::one() + T::lit(4.0) * k2))
}

/// `cos² i_c` for any `σ > −25/4`.
///
/// `1/6 − (5/(12σ))(1 − √(1 + 4σ/25))` rewritten as
/// `1/6 + (1/15) / (1 + √(1 + 4σ/25))`, which is regular at `σ = 0`.
pub fn critical_cos2_continued<T: Scalar>(sigma: T) -> T {
    let root = (T::one() + T::lit(4.0 / 25.0) * sigma).sqrt();
    T::one() / T::lit(6.0) + T::one() / (T::lit(15.0) * (T::one() + root))
}

/// `cos² i_c(σ)` of the 1:1 resonance; the series is used below
/// [`SERIES_SIGMA`].
pub fn critical_cos2_inclination<T: Scalar>(sigma: T) -> Result<T> {
    check_sigma(sigma, false)?;
    if sigma < T::lit(SERIES_SIGMA) {
        critical_inclination_series(sigma, 2)
    } else {
        Ok(critical_cos2_continued(sigma))
    }
}

/// Critical inclination (prograde, radians).
pub fn critical_inclination<T: Scalar>(sigma: T) -> Result<T> {
    Ok(inclination_from_cos2(critical_cos2_inclination(sigma)?))
}

/// `cos² i_c ≈ 1/5 − σ/750 + σ²/9375` truncated after `order`.
pub fn critical_inclination_series<T: Scalar>(sigma: T, order: usize) -> Result<T> {
    check_sigma(sigma, false)?;
    if order > 2 {
        return Err(Error::InvalidParameter(format!("series order {order} not in 0..=2")));
    }
    let terms = [
        T::one() / T::lit(5.0),
        -sigma / T::lit(750.0),
        sigma * sigma / T::lit(9375.0),
    ];
    Ok(terms[..=order].iter().copied().sum())
}

/// Rational `k = num/den` with `den <= max_den` in `k_window` whose
/// resonance has a real inclination, sorted by inclination.
///
/// Only the band of `k` between the equatorial and polar values of the
/// frequency ratio can succeed, so enumeration is restricted to it.
pub fn scan_resonances<T: Scalar>(sigma: T, max_den: u64, k_window: (T, T)) -> Result<Vec<ResonantInclination<T>>> {
    check_sigma(sigma, false)?;
    if max_den == 0 || max_den > MAX_SCAN_DENOMINATOR {
        return Err(Error::InvalidParameter(format!(
            "max denominator must lie in 1..={MAX_SCAN_DENOMINATOR}, got {max_den}"
        )));
    }
    let (lo, hi) = k_window;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidParameter(format!("bad k window [{lo}, {hi}]")));
    }
    if sigma == T::zero() {
        // every inclination is 1:1 in the Kepler limit
        let one = T::one();
        let out = if lo <= one && one <= hi {
            vec![ResonantInclination::from_cos2(
                RationalRatio::ONE,
                critical_cos2_inclination(sigma)?,
            )]
        } else {
            Vec::new()
        };
        return Ok(out);
    }

    let k_equatorial = frequency_ratio_of_cos2(sigma, T::one())?.value;
    let k_polar = frequency_ratio_of_cos2(sigma, T::zero())?.value;
    let pad = T::lit(1e-9);
    let band_lo = (k_equatorial.min(k_polar) * (T::one() - pad)).max(lo);
    let band_hi = (k_equatorial.max(k_polar) * (T::one() + pad)).min(hi);
    if band_lo > band_hi {
        return Ok(Vec::new());
    }
    let candidates = rationals_in(band_lo.as_f64(), band_hi.as_f64(), max_den)?;

    let mut found: Vec<ResonantInclination<T>> = candidates
        .par_iter()
        .filter_map(|k| inclination_from_frequency_ratio(sigma, *k).ok())
        .collect();
    found.sort_by(|a, b| {
        a.i_deg
            .partial_cmp(&b.i_deg)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.k.den().cmp(&b.k.den()))
    });
    Ok(found)
}
