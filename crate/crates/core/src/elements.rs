//! Domain types and exact Keplerian conversions.
//!
//! All angles are radians. The polar-nodal set `(r, θ, ν, R, Θ, N)` is
//! radius, argument of latitude, right ascension of the ascending node,
//! radial velocity, angular momentum modulus and its polar component.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kepler;
use crate::scalar::{normalize_angle, Scalar};

/// Slack allowed on `|N| <= Θ` before it is treated as a violation.
pub const MOMENTUM_SLACK: f64 = 1e-12;

/// Gravity field of the main problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalModel<T> {
    /// Gravitational parameter.
    pub mu: T,
    /// Equatorial radius.
    pub alpha: T,
    /// Oblateness coefficient. Zero selects the Kepler problem.
    pub j2: T,
}

impl<T: Scalar> PhysicalModel<T> {
    pub fn new(mu: T, alpha: T, j2: T) -> Result<Self> {
        let model = Self { mu, alpha, j2 };
        model.validate()?;
        Ok(model)
    }

    /// `μ = α = 1` with the given oblateness.
    pub fn canonical(j2: T) -> Self {
        Self {
            mu: T::one(),
            alpha: T::one(),
            j2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > T::zero() && self.mu.is_finite()) {
            return Err(Error::InvalidModel(format!("mu must be > 0, got {}", self.mu)));
        }
        if !(self.alpha > T::zero() && self.alpha.is_finite()) {
            return Err(Error::InvalidModel(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.j2 >= T::zero() && self.j2.is_finite()) {
            return Err(Error::InvalidModel(format!("j2 must be >= 0, got {}", self.j2)));
        }
        Ok(())
    }

    pub fn with_j2(self, j2: T) -> Self {
        Self { j2, ..self }
    }

    pub fn is_kepler(&self) -> bool {
        self.j2 == T::zero()
    }
}

impl Default for PhysicalModel<f64> {
    fn default() -> Self {
        Self::canonical(1e-3)
    }
}

/// Canonical polar-nodal (Whittaker) state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct PolarNodalState<T> {
    pub r: T,
    pub theta: T,
    pub nu: T,
    pub R: T,
    pub Theta: T,
    pub N: T,
}

#[allow(non_snake_case)]
impl<T: Scalar> PolarNodalState<T> {
    pub fn new(r: T, theta: T, nu: T, R: T, Theta: T, N: T) -> Result<Self> {
        let state = Self {
            r,
            theta,
            nu,
            R,
            Theta,
            N,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.r, self.theta, self.nu, self.R, self.Theta, self.N]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvariantViolation("non-finite coordinate".into()));
        }
        if self.r <= T::zero() {
            return Err(Error::InvariantViolation(format!("r must be > 0, got {}", self.r)));
        }
        if self.Theta <= T::zero() {
            return Err(Error::InvariantViolation(format!(
                "Theta must be > 0, got {}",
                self.Theta
            )));
        }
        if self.N.abs() > self.Theta * (T::one() + T::lit(MOMENTUM_SLACK)) {
            return Err(Error::InvariantViolation(format!(
                "|N| = {} exceeds Theta = {}",
                self.N.abs(),
                self.Theta
            )));
        }
        Ok(())
    }

    /// Same state with both angles mapped into `[0, 2π)`.
    pub fn normalized(self) -> Self {
        Self {
            theta: normalize_angle(self.theta),
            nu: normalize_angle(self.nu),
            ..self
        }
    }

    /// `cos i = N / Θ`, clamped into `[-1, 1]`.
    pub fn cos_inclination(&self) -> T {
        (self.N / self.Theta).max(-T::one()).min(T::one())
    }

    pub fn to_array(&self) -> [T; 6] {
        [self.r, self.theta, self.nu, self.R, self.Theta, self.N]
    }

    pub fn from_array(y: [T; 6]) -> Self {
        Self {
            r: y[0],
            theta: y[1],
            nu: y[2],
            R: y[3],
            Theta: y[4],
            N: y[5],
        }
    }
}

/// Inertial position and velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianState<T> {
    pub position: [T; 3],
    pub velocity: [T; 3],
}

impl<T: Scalar> CartesianState<T> {
    pub fn radius(&self) -> T {
        norm(&self.position)
    }

    pub fn speed(&self) -> T {
        norm(&self.velocity)
    }

    /// `r × v`.
    pub fn angular_momentum(&self) -> [T; 3] {
        cross(&self.position, &self.velocity)
    }
}

pub(crate) fn norm<T: Scalar>(v: &[T; 3]) -> T {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub(crate) fn cross<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Which anomaly a [`KeplerianElements`] value carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnomalyKind {
    True,
    Eccentric,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anomaly<T> {
    pub kind: AnomalyKind,
    pub value: T,
}

impl<T: Scalar> Anomaly<T> {
    pub fn true_anomaly(value: T) -> Self {
        Self {
            kind: AnomalyKind::True,
            value,
        }
    }

    pub fn eccentric(value: T) -> Self {
        Self {
            kind: AnomalyKind::Eccentric,
            value,
        }
    }

    pub fn mean(value: T) -> Self {
        Self {
            kind: AnomalyKind::Mean,
            value,
        }
    }

    /// Converts to the true anomaly for eccentricity `e`.
    pub fn to_true(&self, e: T) -> Result<T> {
        match self.kind {
            AnomalyKind::True => Ok(self.value),
            AnomalyKind::Eccentric => Ok(kepler::eccentric_to_true(self.value, e)),
            AnomalyKind::Mean => kepler::mean_to_true(self.value, e),
        }
    }

    /// Expresses a true anomaly as an anomaly of the requested kind.
    pub fn from_true(f: T, e: T, kind: AnomalyKind) -> Self {
        let value = match kind {
            AnomalyKind::True => f,
            AnomalyKind::Eccentric => kepler::true_to_eccentric(f, e),
            AnomalyKind::Mean => kepler::true_to_mean(f, e),
        };
        Self { kind, value }
    }
}

/// Classical elements of an elliptic orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeplerianElements<T> {
    pub a: T,
    pub e: T,
    pub i: T,
    pub raan: T,
    pub argp: T,
    pub anomaly: Anomaly<T>,
}

impl<T: Scalar> KeplerianElements<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > T::zero() && self.a.is_finite()) {
            return Err(Error::InvalidElements(format!("a must be > 0, got {}", self.a)));
        }
        if !(self.e >= T::zero() && self.e < T::one()) {
            return Err(Error::InvalidElements(format!(
                "eccentricity must lie in [0, 1), got {}",
                self.e
            )));
        }
        if !(self.i >= T::zero() && self.i <= T::PI()) {
            return Err(Error::InvalidElements(format!(
                "inclination must lie in [0, pi], got {}",
                self.i
            )));
        }
        Ok(())
    }

    /// Semilatus rectum `a (1 - e²)`.
    pub fn semi_latus_rectum(&self) -> T {
        self.a * (T::one() - self.e * self.e)
    }
}

/// `σ = J₂ α² / p²` with `p = Θ²/μ`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SigmaParameter<T>(pub T);

impl<T: Scalar> SigmaParameter<T> {
    pub fn value(self) -> T {
        self.0
    }
}

/// Osculating Keplerian elements to polar-nodal variables.
pub fn keplerian_to_polar_nodal<T: Scalar>(
    model: &PhysicalModel<T>,
    el: &KeplerianElements<T>,
) -> Result<PolarNodalState<T>> {
    el.validate()?;
    let f = el.anomaly.to_true(el.e)?;
    let p = el.semi_latus_rectum();
    let (sf, cf) = f.sin_cos();
    let state = PolarNodalState {
        r: p / (T::one() + el.e * cf),
        theta: normalize_angle(el.argp + f),
        nu: normalize_angle(el.raan),
        R: (model.mu / p).sqrt() * el.e * sf,
        Theta: (model.mu * p).sqrt(),
        N: (model.mu * p).sqrt() * el.i.cos(),
    };
    Ok(state)
}

/// Inverse of [`keplerian_to_polar_nodal`], returning the anomaly as `kind`.
///
/// Circular states (`e` below rounding) take the perigee at the current
/// position, so `argp = θ` and `f = 0`.
pub fn polar_nodal_to_keplerian<T: Scalar>(
    model: &PhysicalModel<T>,
    state: &PolarNodalState<T>,
    kind: AnomalyKind,
) -> Result<KeplerianElements<T>> {
    state.validate()?;
    let p = state.Theta * state.Theta / model.mu;
    let e_cos = p / state.r - T::one();
    let e_sin = state.R * state.Theta / model.mu;
    let e = e_cos.hypot(e_sin);
    if e >= T::one() {
        return Err(Error::UnboundOrbit {
            energy: crate::main_problem::kepler_energy(model, state).as_f64(),
            eccentricity: e.as_f64(),
        });
    }
    let f = if e > T::lit(1e-14) {
        e_sin.atan2(e_cos)
    } else {
        T::zero()
    };
    let e = if e > T::lit(1e-14) { e } else { T::zero() };
    Ok(KeplerianElements {
        a: p / (T::one() - e * e),
        e,
        i: inclination_of(state)?,
        raan: normalize_angle(state.nu),
        argp: normalize_angle(state.theta - f),
        anomaly: Anomaly::from_true(f, e, kind),
    })
}

/// Inertial position and velocity of a polar-nodal state.
pub fn polar_nodal_to_cartesian<T: Scalar>(state: &PolarNodalState<T>) -> CartesianState<T> {
    let ci = state.cos_inclination();
    let si = (T::one() - ci * ci).max(T::zero()).sqrt();
    let (sn, cn) = state.nu.sin_cos();
    let (st, ct) = state.theta.sin_cos();

    let radial = [cn * ct - sn * st * ci, sn * ct + cn * st * ci, st * si];
    let transverse = [-cn * st - sn * ct * ci, -sn * st + cn * ct * ci, ct * si];
    let vt = state.Theta / state.r;

    let mut position = [T::zero(); 3];
    let mut velocity = [T::zero(); 3];
    for k in 0..3 {
        position[k] = state.r * radial[k];
        velocity[k] = state.R * radial[k] + vt * transverse[k];
    }
    CartesianState { position, velocity }
}

/// Polar-nodal variables of an inertial state.
///
/// For an equatorial orbit the node is undefined; it is set to zero so that
/// the argument of latitude is measured from the x axis.
pub fn cartesian_to_polar_nodal<T: Scalar>(cart: &CartesianState<T>) -> Result<PolarNodalState<T>> {
    let r = cart.radius();
    if !(r > T::zero()) {
        return Err(Error::InvariantViolation("zero position vector".into()));
    }
    let h = cart.angular_momentum();
    let theta_mag = norm(&h);
    if !(theta_mag > T::zero()) {
        return Err(Error::InvariantViolation("rectilinear state".into()));
    }
    let radial_velocity = (cart.position[0] * cart.velocity[0]
        + cart.position[1] * cart.velocity[1]
        + cart.position[2] * cart.velocity[2])
        / r;
    let node_xy = h[0].hypot(h[1]);
    let nu = if node_xy > T::epsilon() * theta_mag {
        h[0].atan2(-h[1])
    } else {
        T::zero()
    };
    let (sn, cn) = nu.sin_cos();
    // components of the position along the node line and in-plane normal
    let along_node = cart.position[0] * cn + cart.position[1] * sn;
    let ci = h[2] / theta_mag;
    let si = node_xy / theta_mag;
    let normal = (-cart.position[0] * sn + cart.position[1] * cn) * ci + cart.position[2] * si;
    let theta = normal.atan2(along_node);
    Ok(PolarNodalState {
        r,
        theta: normalize_angle(theta),
        nu: normalize_angle(nu),
        R: radial_velocity,
        Theta: theta_mag,
        N: h[2],
    })
}

/// Inclination `arccos(N/Θ)` in `[0, π]`.
pub fn inclination_of<T: Scalar>(state: &PolarNodalState<T>) -> Result<T> {
    if !(state.Theta > T::zero()) {
        return Err(Error::InvariantViolation(format!(
            "Theta must be > 0, got {}",
            state.Theta
        )));
    }
    let c = state.N / state.Theta;
    if c.abs() > T::one() + T::lit(MOMENTUM_SLACK) {
        return Err(Error::InvariantViolation(format!("|N/Theta| = {} exceeds 1", c.abs())));
    }
    Ok(c.max(-T::one()).min(T::one()).acos())
}

/// `σ = J₂ α² μ² / Θ⁴`.
#[allow(non_snake_case)]
pub fn sigma_of<T: Scalar>(model: &PhysicalModel<T>, Theta: T) -> SigmaParameter<T> {
    let p = Theta * Theta / model.mu;
    let ratio = model.alpha / p;
    SigmaParameter(model.j2 * ratio * ratio)
}
