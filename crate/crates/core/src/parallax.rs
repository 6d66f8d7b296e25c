//! First-order elimination of the parallax.
//!
//! Maps prime (transformed) polar-nodal variables, in which the main problem
//! reduces to the radial intermediary, back to the original variables. The
//! corrections depend on the prime variables only and involve `2θ'` alone.
//! The inverse map is obtained by fixed-point iteration.

use serde::{Deserialize, Serialize};

use crate::elements::{PhysicalModel, PolarNodalState};
use crate::error::{Error, Result};
use crate::intermediary::state_at_time;
use crate::scalar::{wrap_pi, Scalar};

/// Largest `|κ|` for which the inverse is attempted.
pub const MAX_KAPPA: f64 = 0.05;

/// Iteration cap of [`parallax_inverse`].
pub const MAX_INVERSE_ITERATIONS: usize = 10;

/// Convergence threshold of successive iterates, relative to the component scale.
pub const INVERSE_TOLERANCE: f64 = 1e-14;

/// Quantities shared by all correction terms, in prime variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParallaxContext<T> {
    /// `−½ J2 α²/p'²`.
    pub kappa: T,
    /// `Θ'²/μ`.
    pub p_prime: T,
    pub s: T,
    pub c: T,
}

impl<T: Scalar> ParallaxContext<T> {
    pub fn new(model: &PhysicalModel<T>, prime: &PolarNodalState<T>) -> Result<Self> {
        model.validate()?;
        prime.validate()?;
        let p = prime.Theta * prime.Theta / model.mu;
        let ratio = model.alpha / p;
        let c = prime.cos_inclination();
        Ok(Self {
            kappa: -T::lit(0.5) * model.j2 * ratio * ratio,
            p_prime: p,
            s: (T::one() - c * c).max(T::zero()).sqrt(),
            c,
        })
    }
}

/// Original minus prime variables, `[Δr, Δθ, Δν, ΔR, ΔΘ, ΔN]`.
pub fn parallax_corrections<T: Scalar>(model: &PhysicalModel<T>, prime: &PolarNodalState<T>) -> Result<[T; 6]> {
    let ctx = ParallaxContext::new(model, prime)?;
    let one = T::one();
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let (kappa, p) = (ctx.kappa, ctx.p_prime);
    let (s2, c2) = (ctx.s * ctx.s, ctx.c * ctx.c);
    let theta_p = prime.Theta;
    let (sin2, cos2) = (two * prime.theta).sin_cos();
    let p_r = p / prime.r;
    let pr_t = p * prime.R / theta_p;

    let dr = p * kappa * (one - T::lit(1.5) * s2 - half * s2 * cos2);
    let dtheta = kappa
        * ((T::lit(0.75) - T::lit(1.25) * c2 - (one - three * c2) * p_r) * sin2
            + pr_t * (one - T::lit(6.0) * c2 + (one - two * c2) * cos2));
    let dnu = kappa * ctx.c * ((half - two * p_r) * sin2 + pr_t * (three + cos2));
    let d_radial = theta_p / p * kappa * p_r * p_r * s2 * sin2;
    let d_momentum = theta_p * kappa * s2 * ((half - two * p_r) * cos2 - pr_t * sin2);
    Ok([dr, dtheta, dnu, d_radial, d_momentum, T::zero()])
}

/// Original state from a prime state.
pub fn parallax_direct<T: Scalar>(model: &PhysicalModel<T>, prime: &PolarNodalState<T>) -> Result<PolarNodalState<T>> {
    let d = parallax_corrections(model, prime)?;
    Ok(PolarNodalState {
        r: prime.r + d[0],
        theta: prime.theta + d[1],
        nu: prime.nu + d[2],
        R: prime.R + d[3],
        Theta: prime.Theta + d[4],
        N: prime.N,
    }
    .normalized())
}

/// Per-component scales `(r, 1, 1, Θ/r, Θ, Θ)` used for convergence and
/// roundtrip checks.
pub fn component_scales<T: Scalar>(state: &PolarNodalState<T>) -> [T; 6] {
    let one = T::one();
    [state.r, one, one, state.Theta / state.r, state.Theta, state.Theta]
}

/// Largest scaled componentwise difference; angles compared modulo 2π.
pub fn scaled_difference<T: Scalar>(a: &PolarNodalState<T>, b: &PolarNodalState<T>) -> T {
    let scale = component_scales(a);
    let (x, y) = (a.to_array(), b.to_array());
    (0..6)
        .map(|j| {
            let d = if j == 1 || j == 2 {
                wrap_pi(x[j] - y[j])
            } else {
                x[j] - y[j]
            };
            (d / scale[j]).abs()
        })
        .fold(T::zero(), T::max)
}

/// Result of [`parallax_inverse_with_stats`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion<T> {
    pub prime: PolarNodalState<T>,
    pub iterations: usize,
}

/// Prime state from an original state.
pub fn parallax_inverse<T: Scalar>(
    model: &PhysicalModel<T>,
    original: &PolarNodalState<T>,
) -> Result<PolarNodalState<T>> {
    parallax_inverse_with_stats(model, original).map(|inv| inv.prime)
}

/// Fixed-point iteration `x' ← x − Δ(x')` from `x' = x`.
pub fn parallax_inverse_with_stats<T: Scalar>(
    model: &PhysicalModel<T>,
    original: &PolarNodalState<T>,
) -> Result<Inversion<T>> {
    original.validate()?;
    let guard = ParallaxContext::new(model, original)?;
    if guard.kappa.abs() >= T::lit(MAX_KAPPA) {
        return Err(Error::InversionFailed(format!(
            "|kappa| = {} too large for the fixed-point inverse",
            guard.kappa.abs()
        )));
    }
    if model.is_kepler() {
        return Ok(Inversion {
            prime: original.normalized(),
            iterations: 0,
        });
    }

    let x = original.to_array();
    let tol = T::lit(INVERSE_TOLERANCE);
    let mut prime = *original;
    let mut last_step = T::infinity();
    for iteration in 1..=MAX_INVERSE_ITERATIONS {
        let d = parallax_corrections(model, &prime)
            .map_err(|e| Error::InversionFailed(format!("iterate {iteration} left the valid domain: {e}")))?;
        let mut y = [T::zero(); 6];
        for j in 0..6 {
            y[j] = x[j] - d[j];
        }
        let next = PolarNodalState::from_array(y);
        let step = scaled_difference(&next, &prime);
        prime = next;
        if !step.is_finite() || (iteration > 2 && step > last_step) {
            return Err(Error::InversionFailed(format!(
                "fixed-point iteration diverges (step {step} after {iteration} iterations)"
            )));
        }
        if step < tol {
            return Ok(Inversion {
                prime: prime.normalized(),
                iterations: iteration,
            });
        }
        last_step = step;
    }
    Err(Error::InversionFailed(format!(
        "no convergence in {MAX_INVERSE_ITERATIONS} iterations (last step {last_step})"
    )))
}

/// Main-problem state after `dt` by the intermediary flow in prime variables.
pub fn propagate_semianalytic<T: Scalar>(
    model: &PhysicalModel<T>,
    state0: &PolarNodalState<T>,
    dt: T,
) -> Result<PolarNodalState<T>> {
    let prime0 = parallax_inverse(model, state0)?;
    let prime = state_at_time(model, &prime0, dt)?;
    parallax_direct(model, &prime)
}
