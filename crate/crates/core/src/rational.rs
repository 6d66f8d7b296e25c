//! Positive rationals with bounded denominator, enumerated in increasing
//! order with the Farey next-term recurrence.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Reduced positive fraction `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalRatio {
    num: u64,
    den: u64,
}

impl RationalRatio {
    /// Builds `num / den` in lowest terms.
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidParameter(format!("ratio {num}/{den} must be positive")));
        }
        let g = num.gcd(&den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub const ONE: Self = Self { num: 1, den: 1 };

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn value<T: Scalar>(&self) -> T {
        T::lit(self.num as f64) / T::lit(self.den as f64)
    }

    pub fn recip(&self) -> Self {
        Self {
            num: self.den,
            den: self.num,
        }
    }
}

impl fmt::Display for RationalRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl std::str::FromStr for RationalRatio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("expected a ratio like 4/5, got {s:?}"));
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let n: u64 = n.parse().map_err(|_| bad())?;
        let d: u64 = d.parse().map_err(|_| bad())?;
        Self::new(n, d)
    }
}

/// `p/q <= x`, evaluated as `p <= x q` to avoid the division.
fn le(p: u64, q: u64, x: f64) -> bool {
    (p as f64) <= x * q as f64
}

/// `p/q >= x`.
fn ge(p: u64, q: u64, x: f64) -> bool {
    x * q as f64 <= p as f64
}

/// Consecutive members `(a/b, c/d)` of the order-`max_den` sequence with
/// `a/b <= x < c/d`, found by descending the Stern–Brocot tree.
fn bracket(x: f64, max_den: u64) -> ((u64, u64), (u64, u64)) {
    let whole = x.floor().max(0.0) as u64;
    let mut left = (whole, 1u64);
    let mut right = (whole + 1, 1u64);
    loop {
        let med = (left.0 + right.0, left.1 + right.1);
        if med.1 > max_den {
            return (left, right);
        }
        if le(med.0, med.1, x) {
            // jump as many left-to-right steps as the bound allows
            let mut cur = med;
            while cur.1 + right.1 <= max_den && le(cur.0 + right.0, cur.1 + right.1, x) {
                cur = (cur.0 + right.0, cur.1 + right.1);
            }
            left = cur;
        } else {
            let mut cur = med;
            while cur.1 + left.1 <= max_den && !le(cur.0 + left.0, cur.1 + left.1, x) {
                cur = (cur.0 + left.0, cur.1 + left.1);
            }
            right = cur;
        }
    }
}

/// All reduced `p/q` with `q <= max_den` and `lo <= p/q <= hi`, increasing.
pub fn rationals_in(lo: f64, hi: f64, max_den: u64) -> Result<Vec<RationalRatio>> {
    if max_den == 0 {
        return Err(Error::InvalidParameter("max denominator must be >= 1".into()));
    }
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(Error::InvalidParameter(format!("bad window [{lo}, {hi}]")));
    }
    let mut out = Vec::new();
    if hi <= 0.0 {
        return Ok(out);
    }
    let lo = lo.max(0.0);
    let (mut a, mut c) = bracket(lo, max_den);
    if a.0 > 0 && ge(a.0, a.1, lo) {
        out.push(RationalRatio { num: a.0, den: a.1 });
    }
    while le(c.0, c.1, hi) {
        out.push(RationalRatio { num: c.0, den: c.1 });
        let k = (max_den + a.1) / c.1;
        let next = (k * c.0 - a.0, k * c.1 - a.1);
        a = c;
        c = next;
    }
    Ok(out)
}
