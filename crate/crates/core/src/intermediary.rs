//! Deprit's radial intermediary
//! `H = ½(R² + Q²/r²) − μ/r`, `Q = Q(Θ, N)`.
//!
//! The flow is a Kepler problem with angular momentum `Q` in `(r, R)`; the
//! argument of latitude advances at `P/r²` and the node at
//! `(Q/r²) ∂Q/∂N`. All states handled here are in the prime (transformed)
//! variables.

use serde::{Deserialize, Serialize};

use crate::elements::{sigma_of, PhysicalModel, PolarNodalState};
use crate::error::{Error, Result};
use crate::integrator::OdeSystem;
use crate::kepler::{eccentric_to_true, solve_kepler, true_to_eccentric};
use crate::main_problem::{propagate_system, PropagationOptions, PropagationResult};
use crate::resonance::{FrequencyRatio, RatioKind};
use crate::scalar::{normalize_angle, Scalar};

/// Eccentricities below this are treated as circular.
pub const CIRCULAR_ECCENTRICITY: f64 = 1e-12;

/// Integrals of the intermediary that depend on `(Θ, N)` only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct IntermediaryConstants<T> {
    /// Effective angular momentum of the radial motion.
    pub Q: T,
    /// `Q ∂Q/∂Θ`, the latitude-rate constant.
    pub P: T,
    /// `∂Q/∂N`.
    pub dQdN: T,
    pub sigma: T,
}

/// `Q`, `P` and `∂Q/∂N` for the given momenta.
#[allow(non_snake_case)]
pub fn constants<T: Scalar>(model: &PhysicalModel<T>, Theta: T, N: T) -> Result<IntermediaryConstants<T>> {
    if !(Theta > T::zero()) {
        return Err(Error::InvariantViolation(format!("Theta must be > 0, got {Theta}")));
    }
    let c = N / Theta;
    if c.abs() > T::one() + T::lit(crate::elements::MOMENTUM_SLACK) {
        return Err(Error::InvariantViolation(format!("|N/Theta| = {} exceeds 1", c.abs())));
    }
    let c = c.max(-T::one()).min(T::one());
    let sigma = sigma_of(model, Theta).value();
    constants_from_sigma(sigma, c, Theta)
}

/// Same as [`constants`] with `σ` and `cos i` given directly.
#[allow(non_snake_case)]
pub fn constants_from_sigma<T: Scalar>(sigma: T, cos_i: T, Theta: T) -> Result<IntermediaryConstants<T>> {
    let c2 = cos_i * cos_i;
    let half = T::lit(0.5);
    let radicand = T::one() + sigma * (half - T::lit(1.5) * c2);
    if !(radicand > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "sigma = {sigma} too large: Q^2 would be non-positive"
        )));
    }
    let root = radicand.sqrt();
    Ok(IntermediaryConstants {
        Q: Theta * root,
        P: Theta * (T::one() - sigma * (half - T::lit(3.0) * c2)),
        dQdN: -T::lit(1.5) * sigma * cos_i / root,
        sigma,
    })
}

/// `n_r / n_θ = Q / P`.
pub fn frequency_ratio<T: Scalar>(k: &IntermediaryConstants<T>) -> FrequencyRatio<T> {
    FrequencyRatio {
        value: k.Q / k.P,
        kind: RatioKind::Radial,
    }
}

/// Conic `r = (Q²/μ) / (1 + e cos[(Q/P)(θ − θ₀)])` in the orbital plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneTrajectory<T> {
    /// `Q²/μ`.
    pub semi_latus: T,
    /// `Q/P`.
    pub ratio: T,
    pub e: T,
    pub theta0: T,
}

impl<T: Scalar> PlaneTrajectory<T> {
    pub fn radius_at(&self, theta: T) -> T {
        let f = self.ratio * (theta - self.theta0);
        self.semi_latus / (T::one() + self.e * f.cos())
    }

    /// Orbital-plane coordinates `(r cos θ, r sin θ)`.
    pub fn point_at(&self, theta: T) -> (T, T) {
        let r = self.radius_at(theta);
        let (s, c) = theta.sin_cos();
        (r * c, r * s)
    }
}

/// Integrals of the intermediary flow through a given prime state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct QuasiKeplerElements<T> {
    pub mu: T,
    /// Energy.
    pub h: T,
    pub e: T,
    /// `−μ / (2h)`.
    pub a_eff: T,
    /// Perigee radius `(Q²/μ) / (1 + e)`.
    pub r_min: T,
    /// Argument of latitude of the perigee.
    pub theta0: T,
    pub constants: IntermediaryConstants<T>,
    pub Theta: T,
    pub N: T,
}

impl<T: Scalar> QuasiKeplerElements<T> {
    pub fn trajectory(&self) -> PlaneTrajectory<T> {
        let q = self.constants.Q;
        PlaneTrajectory {
            semi_latus: q * q / self.mu,
            ratio: q / self.constants.P,
            e: self.e,
            theta0: self.theta0,
        }
    }

    /// Radius on the closed-form trajectory at argument of latitude `θ`.
    pub fn radius_at_theta(&self, theta: T) -> T {
        self.trajectory().radius_at(theta)
    }

    /// Anomalistic mean motion `√(μ / a³)`.
    pub fn mean_motion(&self) -> T {
        (self.mu / (self.a_eff * self.a_eff * self.a_eff)).sqrt()
    }

    /// Perigee-to-perigee period.
    pub fn radial_period(&self) -> T {
        T::TAU() / self.mean_motion()
    }
}

/// Energy of the intermediary at a prime state.
pub fn hamiltonian<T: Scalar>(model: &PhysicalModel<T>, state: &PolarNodalState<T>) -> Result<T> {
    let k = constants(model, state.Theta, state.N)?;
    Ok(energy_with(model.mu, k.Q, state))
}

fn energy_with<T: Scalar>(mu: T, q: T, state: &PolarNodalState<T>) -> T {
    T::lit(0.5) * (state.R * state.R + q * q / (state.r * state.r)) - mu / state.r
}

/// Energy, eccentricity, true anomaly and perigee latitude of a prime state.
/// Returns the elements and the true anomaly `f ∈ (−π, π]` of the state.
pub fn elements_with_anomaly<T: Scalar>(
    model: &PhysicalModel<T>,
    state: &PolarNodalState<T>,
) -> Result<(QuasiKeplerElements<T>, T)> {
    state.validate()?;
    let k = constants(model, state.Theta, state.N)?;
    let mu = model.mu;
    let q = k.Q;
    let h = energy_with(mu, q, state);
    let e2 = T::one() + T::lit(2.0) * h * q * q / (mu * mu);
    let e = e2.max(T::zero()).sqrt();
    if !(h < T::zero()) || e >= T::one() {
        return Err(Error::UnboundOrbit {
            energy: h.as_f64(),
            eccentricity: e.as_f64(),
        });
    }
    // e cos f and e sin f from the conic and its derivative
    let e_cos = q * q / (mu * state.r) - T::one();
    let e_sin = state.R * q / mu;
    let (e, f) = if e < T::lit(CIRCULAR_ECCENTRICITY) {
        (T::zero(), T::zero())
    } else {
        (e, e_sin.atan2(e_cos))
    };
    let theta0 = normalize_angle(state.theta - k.P / q * f);
    let elements = QuasiKeplerElements {
        mu,
        h,
        e,
        a_eff: -mu / (T::lit(2.0) * h),
        r_min: q * q / mu / (T::one() + e),
        theta0,
        constants: k,
        Theta: state.Theta,
        N: state.N,
    };
    Ok((elements, f))
}

pub fn elements_from_state<T: Scalar>(
    model: &PhysicalModel<T>,
    state: &PolarNodalState<T>,
) -> Result<QuasiKeplerElements<T>> {
    elements_with_anomaly(model, state).map(|(el, _)| el)
}

/// Closed-form intermediary flow: the prime state after `dt`.
///
/// The radial motion is Keplerian with momentum `Q`; with the cumulative
/// true anomaly `f`, `θ = θ₀ + (P/Q) f` and `ν = ν₀ + (∂Q/∂N)(f − f₀)`.
/// `Θ` and `N` are unchanged.
pub fn state_at_time<T: Scalar>(
    model: &PhysicalModel<T>,
    state0: &PolarNodalState<T>,
    dt: T,
) -> Result<PolarNodalState<T>> {
    let (el, f0) = elements_with_anomaly(model, state0)?;
    let k = el.constants;
    let mu = model.mu;
    let e = el.e;
    let n = el.mean_motion();

    let e0 = true_to_eccentric(f0, e);
    let m = e0 - e * e0.sin() + n * dt;
    let ea = solve_kepler(m, e)?;
    let f = eccentric_to_true(ea, e);

    let q = k.Q;
    let (sf, cf) = f.sin_cos();
    let r = q * q / mu / (T::one() + e * cf);
    let radial_velocity = mu / q * e * sf;

    Ok(PolarNodalState {
        r,
        theta: normalize_angle(el.theta0 + k.P / q * f),
        nu: normalize_angle(state0.nu + k.dQdN * (f - f0)),
        R: radial_velocity,
        Theta: state0.Theta,
        N: state0.N,
    })
}

/// Hamilton's equations of the intermediary, for numerical cross-checks.
#[derive(Debug, Clone, Copy)]
pub struct IntermediaryFlow<T> {
    pub model: PhysicalModel<T>,
}

impl<T: Scalar> OdeSystem<T, 6> for IntermediaryFlow<T> {
    fn rhs(&self, _t: T, y: &[T; 6]) -> Result<[T; 6]> {
        let s = PolarNodalState::from_array(*y);
        let k = constants(&self.model, s.Theta, s.N)?;
        let r2 = s.r * s.r;
        Ok([
            s.R,
            k.P / r2,
            k.Q * k.dQdN / r2,
            k.Q * k.Q / (r2 * s.r) - self.model.mu / r2,
            T::zero(),
            T::zero(),
        ])
    }
}

/// Numerical integration of the intermediary Hamiltonian.
pub fn propagate_flow_numeric<T: Scalar>(
    model: &PhysicalModel<T>,
    state0: &PolarNodalState<T>,
    t_span: (T, T),
    opts: &PropagationOptions<T>,
) -> Result<PropagationResult<T>> {
    let flow = IntermediaryFlow { model: *model };
    propagate_system(&flow, |s| hamiltonian(model, s), state0, t_span, opts)
}
