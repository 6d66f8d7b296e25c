//! Dormand–Prince 5(4) embedded Runge–Kutta pair with PI step-size control,
//! a fixed-step mode, and cubic Hermite dense output between accepted steps.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Autonomous or time-dependent first-order system `y' = f(t, y)`.
pub trait OdeSystem<T: Scalar, const N: usize> {
    fn rhs(&self, t: T, y: &[T; N]) -> Result<[T; N]>;
}

impl<T: Scalar, const N: usize, F> OdeSystem<T, N> for F
where
    F: Fn(T, &[T; N]) -> Result<[T; N]>,
{
    fn rhs(&self, t: T, y: &[T; N]) -> Result<[T; N]> {
        self(t, y)
    }
}

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings<T> {
    pub rtol: T,
    pub atol: T,
    /// Initial step; estimated from the problem when `None`.
    pub h0: Option<T>,
    /// Constant step instead of error control.
    pub fixed_step: Option<T>,
    pub h_max: Option<T>,
    pub max_steps: usize,
    pub safety: T,
    /// Bounds on `h_old / h_new`.
    pub fac_min: T,
    pub fac_max: T,
    /// PI stabilisation exponent.
    pub beta: T,
}

impl<T: Scalar> Settings<T> {
    pub fn with_tolerance(tol: T) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }
}

impl<T: Scalar> Default for Settings<T> {
    fn default() -> Self {
        Self {
            rtol: T::lit(1e-10),
            atol: T::lit(1e-10),
            h0: None,
            fixed_step: None,
            h_max: None,
            max_steps: 10_000_000,
            safety: T::lit(0.9),
            fac_min: T::lit(0.2),
            fac_max: T::lit(10.0),
            beta: T::lit(0.04),
        }
    }
}

/// One accepted step, with the data needed for Hermite interpolation.
#[derive(Debug, Clone, Copy)]
pub struct Step<T, const N: usize> {
    pub t0: T,
    pub y0: [T; N],
    pub f0: [T; N],
    pub t1: T,
    pub y1: [T; N],
    pub f1: [T; N],
}

impl<T: Scalar, const N: usize> Step<T, N> {
    /// Cubic Hermite interpolant at `t` in `[t0, t1]`.
    pub fn interpolate(&self, t: T) -> [T; N] {
        let h = self.t1 - self.t0;
        if h == T::zero() {
            return self.y1;
        }
        let s = (t - self.t0) / h;
        let one = T::one();
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = two * s3 - three * s2 + one;
        let h10 = s3 - two * s2 + s;
        let h01 = -two * s3 + three * s2;
        let h11 = s3 - s2;
        std::array::from_fn(|k| h00 * self.y0[k] + h10 * h * self.f0[k] + h01 * self.y1[k] + h11 * h * self.f1[k])
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

// Dormand & Prince (1980) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Dormand–Prince 5(4) integrator.
#[derive(Debug, Clone)]
pub struct Dopri5<T> {
    pub settings: Settings<T>,
    a: [[T; 6]; 7],
    c: [T; 7],
    e: [T; 7],
}

impl<T: Scalar> Dopri5<T> {
    pub fn new(settings: Settings<T>) -> Self {
        let mut a = [[T::zero(); 6]; 7];
        for (row, src) in a.iter_mut().zip(A.iter()) {
            for (dst, &v) in row.iter_mut().zip(src.iter()) {
                *dst = T::lit(v);
            }
        }
        Self {
            settings,
            a,
            c: C.map(T::lit),
            e: E.map(T::lit),
        }
    }

    /// Advances one step of size `h` from `(t, y)` with `f = f(t, y)`.
    /// Returns the new state, its derivative and the error estimate vector.
    #[allow(clippy::type_complexity)]
    fn attempt<S: OdeSystem<T, N>, const N: usize>(
        &self,
        sys: &S,
        t: T,
        y: &[T; N],
        f: &[T; N],
        h: T,
    ) -> Result<([T; N], [T; N], [T; N])> {
        let mut k = [[T::zero(); N]; 7];
        k[0] = *f;
        for stage in 1..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let aij = self.a[stage][j];
                if aij != T::zero() {
                    for n in 0..N {
                        ys[n] = ys[n] + h * aij * kj[n];
                    }
                }
            }
            if stage == 6 {
                // FSAL: the stage-7 abscissa is the new state itself
                let fy = sys.rhs(t + h, &ys)?;
                k[6] = fy;
                let mut err = [T::zero(); N];
                for n in 0..N {
                    let mut acc = T::zero();
                    for (s, ks) in k.iter().enumerate() {
                        acc = acc + self.e[s] * ks[n];
                    }
                    err[n] = h * acc;
                }
                return Ok((ys, fy, err));
            }
            k[stage] = sys.rhs(t + self.c[stage] * h, &ys)?;
        }
        unreachable!("loop returns at the last stage")
    }

    fn error_norm<const N: usize>(&self, y: &[T; N], y_new: &[T; N], err: &[T; N]) -> T {
        let s = &self.settings;
        let mut sum = T::zero();
        for n in 0..N {
            let scale = s.atol + s.rtol * y[n].abs().max(y_new[n].abs());
            let ratio = err[n] / scale;
            sum = sum + ratio * ratio;
        }
        (sum / T::lit(N as f64)).sqrt()
    }

    fn initial_step<S: OdeSystem<T, N>, const N: usize>(
        &self,
        sys: &S,
        t: T,
        y: &[T; N],
        f: &[T; N],
        direction: T,
    ) -> Result<T> {
        let s = &self.settings;
        let mut d0 = T::zero();
        let mut d1 = T::zero();
        for n in 0..N {
            let sc = s.atol + s.rtol * y[n].abs();
            d0 = d0 + (y[n] / sc).powi(2);
            d1 = d1 + (f[n] / sc).powi(2);
        }
        let count = T::lit(N as f64);
        d0 = (d0 / count).sqrt();
        d1 = (d1 / count).sqrt();
        let mut h0 = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) {
            T::lit(1e-6)
        } else {
            T::lit(0.01) * d0 / d1
        };
        if let Some(hm) = s.h_max {
            h0 = h0.min(hm);
        }
        let mut y1 = *y;
        for n in 0..N {
            y1[n] = y[n] + direction * h0 * f[n];
        }
        let f1 = sys.rhs(t + direction * h0, &y1)?;
        let mut d2 = T::zero();
        for n in 0..N {
            let sc = s.atol + s.rtol * y[n].abs();
            d2 = d2 + ((f1[n] - f[n]) / sc).powi(2);
        }
        d2 = (d2 / count).sqrt() / h0;
        let dmax = d1.max(d2);
        let h1 = if dmax <= T::lit(1e-15) {
            (h0 * T::lit(1e-3)).max(T::lit(1e-6))
        } else {
            (T::lit(0.01) / dmax).powf(T::lit(0.2))
        };
        let mut h = (T::lit(100.0) * h0).min(h1);
        if let Some(hm) = s.h_max {
            h = h.min(hm);
        }
        Ok(h)
    }

    /// Integrates from `t0` to `t_end`, handing every accepted step to
    /// `on_step`. Integration in either time direction is supported.
    pub fn integrate<S, F, const N: usize>(
        &self,
        sys: &S,
        t0: T,
        y0: [T; N],
        t_end: T,
        mut on_step: F,
    ) -> Result<([T; N], Stats)>
    where
        S: OdeSystem<T, N>,
        F: FnMut(&Step<T, N>) -> Result<()>,
    {
        let s = &self.settings;
        let mut stats = Stats::default();
        let mut t = t0;
        let mut y = y0;
        let mut f = sys.rhs(t, &y)?;
        stats.evaluations += 1;
        if t_end == t0 {
            return Ok((y, stats));
        }
        let direction = (t_end - t0).signum();
        let span = (t_end - t0).abs();

        if let Some(h_fixed) = s.fixed_step {
            if !(h_fixed > T::zero()) {
                return Err(Error::InvalidParameter(format!(
                    "fixed step must be > 0, got {h_fixed}"
                )));
            }
            let n_steps = (span / h_fixed).ceil().to_usize().unwrap_or(usize::MAX).max(1);
            if n_steps > s.max_steps {
                return Err(Error::TooManySteps {
                    t: t.as_f64(),
                    steps: s.max_steps,
                });
            }
            let h = direction * span / T::lit(n_steps as f64);
            for i in 0..n_steps {
                let t_next = if i + 1 == n_steps {
                    t_end
                } else {
                    t0 + h * T::lit((i + 1) as f64)
                };
                let (y_new, f_new, _) = self.attempt(sys, t, &y, &f, t_next - t)?;
                stats.evaluations += 6;
                check_finite(&y_new, t_next)?;
                stats.accepted += 1;
                on_step(&Step {
                    t0: t,
                    y0: y,
                    f0: f,
                    t1: t_next,
                    y1: y_new,
                    f1: f_new,
                })?;
                t = t_next;
                y = y_new;
                f = f_new;
            }
            return Ok((y, stats));
        }

        if !(s.rtol > T::zero() && s.atol > T::zero()) {
            return Err(Error::InvalidParameter("tolerances must be > 0".into()));
        }
        let mut h = match s.h0 {
            Some(h0) => h0.abs(),
            None => {
                stats.evaluations += 1;
                self.initial_step(sys, t, &y, &f, direction)?
            }
        };
        let h_max = s.h_max.unwrap_or(span).min(span);
        let expo = T::lit(0.2) - s.beta * T::lit(0.75);
        let mut fac_old = T::lit(1e-4);
        let mut last_rejected = false;

        loop {
            if stats.accepted + stats.rejected >= s.max_steps {
                return Err(Error::TooManySteps {
                    t: t.as_f64(),
                    steps: s.max_steps,
                });
            }
            let remaining = (t_end - t).abs();
            h = h.min(h_max);
            let last = h >= remaining * (T::one() - T::lit(1e-12));
            if last {
                h = remaining;
            }
            if h <= T::epsilon() * t.abs().max(T::one()) * T::lit(4.0) {
                return Err(Error::StepSizeUnderflow {
                    t: t.as_f64(),
                    h: h.as_f64(),
                });
            }
            let t_next = if last { t_end } else { t + direction * h };
            let (y_new, f_new, err) = self.attempt(sys, t, &y, &f, t_next - t)?;
            stats.evaluations += 6;
            let err_norm = self.error_norm(&y, &y_new, &err);
            if !err_norm.is_finite() {
                stats.rejected += 1;
                h = h * s.fac_min;
                last_rejected = true;
                continue;
            }
            // PI controller: ratio h_old / h_new
            let fac11 = err_norm.powf(expo);
            let mut fac = fac11 / fac_old.powf(s.beta);
            fac = (fac / s.safety).max(T::one() / s.fac_max).min(T::one() / s.fac_min);
            if err_norm <= T::one() {
                check_finite(&y_new, t_next)?;
                stats.accepted += 1;
                fac_old = err_norm.max(T::lit(1e-4));
                on_step(&Step {
                    t0: t,
                    y0: y,
                    f0: f,
                    t1: t_next,
                    y1: y_new,
                    f1: f_new,
                })?;
                t = t_next;
                y = y_new;
                f = f_new;
                if last {
                    return Ok((y, stats));
                }
                let mut h_new = h / fac;
                if last_rejected {
                    h_new = h_new.min(h);
                }
                last_rejected = false;
                h = h_new;
            } else {
                stats.rejected += 1;
                last_rejected = true;
                h = h / (fac11 / s.safety).min(T::one() / s.fac_min);
            }
        }
    }
}

fn check_finite<T: Scalar, const N: usize>(y: &[T; N], t: T) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { t: t.as_f64() })
    }
}

/// Accepted steps of a run, kept for interpolation and event location.
#[derive(Debug, Clone)]
pub struct DenseOutput<T, const N: usize> {
    steps: Vec<Step<T, N>>,
}

impl<T: Scalar, const N: usize> Default for DenseOutput<T, N> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar, const N: usize> DenseOutput<T, N> {
    pub fn new() -> Self {
        Self { steps: Vec::new() }
    }

    pub fn push(&mut self, step: Step<T, N>) {
        self.steps.push(step);
    }

    pub fn steps(&self) -> &[Step<T, N>] {
        &self.steps
    }

    pub fn t_start(&self) -> Option<T> {
        self.steps.first().map(|s| s.t0)
    }

    pub fn t_end(&self) -> Option<T> {
        self.steps.last().map(|s| s.t1)
    }

    /// Interpolated state at `t`; `None` outside the covered interval.
    /// Only forward runs are supported.
    pub fn at(&self, t: T) -> Option<[T; N]> {
        let first = self.steps.first()?;
        let last = self.steps.last()?;
        if t < first.t0 || t > last.t1 {
            return None;
        }
        let idx = self.steps.partition_point(|s| s.t1 < t);
        let step = self.steps.get(idx).unwrap_or(last);
        Some(step.interpolate(t))
    }

    /// Times where `g(y)` crosses zero upward (negative to non-negative),
    /// refined by bisection on the interpolant.
    pub fn upward_crossings<G: Fn(&[T; N]) -> T>(&self, g: G) -> Vec<T> {
        let mut out = Vec::new();
        for step in &self.steps {
            let g0 = g(&step.y0);
            let g1 = g(&step.y1);
            if g0 < T::zero() && g1 >= T::zero() {
                let (mut lo, mut hi) = (step.t0, step.t1);
                for _ in 0..200 {
                    let mid = T::lit(0.5) * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if g(&step.interpolate(mid)) < T::zero() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                out.push(T::lit(0.5) * (lo + hi));
            }
        }
        out
    }
}
