//! The J2 main problem: Hamiltonian in Cartesian and polar-nodal variables,
//! its canonical vector field, and the numerical propagator used as the
//! reference solution.

use crate::elements::{norm, CartesianState, PhysicalModel, PolarNodalState};
use crate::error::{Error, Result};
use crate::integrator::{DenseOutput, Dopri5, OdeSystem, Settings};
use crate::scalar::Scalar;

/// Default lower bound on the radius (canonical units).
pub const DEFAULT_R_FLOOR: f64 = 1e-9;

/// Accepted range of the propagation tolerance.
pub const TOL_RANGE: (f64, f64) = (1e-14, 1e-6);

/// Time derivatives of `(r, θ, ν, R, Θ, N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[allow(non_snake_case)]
pub struct StateDerivative<T> {
    pub dr: T,
    pub dtheta: T,
    pub dnu: T,
    pub dR: T,
    pub dTheta: T,
    pub dN: T,
}

impl<T: Scalar> StateDerivative<T> {
    pub fn to_array(&self) -> [T; 6] {
        [self.dr, self.dtheta, self.dnu, self.dR, self.dTheta, self.dN]
    }
}

fn check_floor<T: Scalar>(r: T, floor: T) -> Result<()> {
    if r < floor || !r.is_finite() {
        Err(Error::Singularity {
            r: r.as_f64(),
            floor: floor.as_f64(),
        })
    } else {
        Ok(())
    }
}

/// Main-problem force model with its singularity guard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MainProblem<T> {
    pub model: PhysicalModel<T>,
    pub r_floor: T,
}

impl<T: Scalar> MainProblem<T> {
    pub fn new(model: PhysicalModel<T>) -> Self {
        Self {
            model,
            r_floor: T::lit(DEFAULT_R_FLOOR),
        }
    }

    pub fn with_floor(self, r_floor: T) -> Self {
        Self { r_floor, ..self }
    }

    /// `½|v|² − μ/r + J₂ (μ/r)(α/r)² P₂(z/r)`.
    pub fn hamiltonian_cartesian(&self, cart: &CartesianState<T>) -> Result<T> {
        let r = norm(&cart.position);
        check_floor(r, self.r_floor)?;
        let m = &self.model;
        let v2 = cart.velocity.iter().map(|v| *v * *v).sum::<T>();
        let s = cart.position[2] / r;
        let p2 = T::lit(0.5) * (T::lit(3.0) * s * s - T::one());
        let ar = m.alpha / r;
        Ok(T::lit(0.5) * v2 - m.mu / r + m.j2 * (m.mu / r) * ar * ar * p2)
    }

    /// Main-problem Hamiltonian in polar-nodal variables.
    pub fn hamiltonian_polar(&self, state: &PolarNodalState<T>) -> Result<T> {
        check_floor(state.r, self.r_floor)?;
        let m = &self.model;
        let r = state.r;
        let c = state.N / state.Theta;
        let s2 = T::one() - c * c;
        let ar = m.alpha / r;
        let bracket = T::lit(0.5) - T::lit(0.75) * s2 + T::lit(0.75) * s2 * (T::lit(2.0) * state.theta).cos();
        let kinetic = T::lit(0.5) * (state.R * state.R + state.Theta * state.Theta / (r * r));
        Ok(kinetic - (m.mu / r) * (T::one() + m.j2 * ar * ar * bracket))
    }

    /// Hamilton's equations for the polar-nodal Hamiltonian.
    ///
    /// With `s² = 1 − N²/Θ²` and `B = ½ − (3/2) s² sin²θ` the potential is
    /// `−μ/r − J₂ μ α² B / r³`; `Θ` and `N` enter `B` through `s²`.
    pub fn vector_field(&self, state: &PolarNodalState<T>) -> Result<StateDerivative<T>> {
        check_floor(state.r, self.r_floor)?;
        let m = &self.model;
        let r = state.r;
        let big_theta = state.Theta;
        let n = state.N;
        let c = n / big_theta;
        let s2 = T::one() - c * c;
        let (sin_t, cos_t) = state.theta.sin_cos();
        let sin2_t = sin_t * sin_t;
        let r2 = r * r;
        let r3 = r2 * r;
        let k = m.j2 * m.mu * m.alpha * m.alpha;
        let three = T::lit(3.0);
        let b = T::lit(0.5) - T::lit(1.5) * s2 * sin2_t;

        Ok(StateDerivative {
            dr: state.R,
            dtheta: big_theta / r2 + three * k * sin2_t * c * c / (r3 * big_theta),
            dnu: -three * k * c * sin2_t / (r3 * big_theta),
            dR: big_theta * big_theta / r3 - m.mu / r2 - three * k * b / (r2 * r2),
            dTheta: -three * k * s2 * sin_t * cos_t / r3,
            dN: T::zero(),
        })
    }
}

impl<T: Scalar> OdeSystem<T, 6> for MainProblem<T> {
    fn rhs(&self, _t: T, y: &[T; 6]) -> Result<[T; 6]> {
        Ok(self.vector_field(&PolarNodalState::from_array(*y))?.to_array())
    }
}

/// Keplerian energy `½(R² + Θ²/r²) − μ/r`.
pub fn kepler_energy<T: Scalar>(model: &PhysicalModel<T>, state: &PolarNodalState<T>) -> T {
    T::lit(0.5) * (state.R * state.R + state.Theta * state.Theta / (state.r * state.r)) - model.mu / state.r
}

pub fn hamiltonian_cartesian<T: Scalar>(model: &PhysicalModel<T>, cart: &CartesianState<T>) -> Result<T> {
    MainProblem::new(*model).hamiltonian_cartesian(cart)
}

pub fn hamiltonian_polar<T: Scalar>(model: &PhysicalModel<T>, state: &PolarNodalState<T>) -> Result<T> {
    MainProblem::new(*model).hamiltonian_polar(state)
}

pub fn vector_field<T: Scalar>(model: &PhysicalModel<T>, state: &PolarNodalState<T>) -> Result<StateDerivative<T>> {
    MainProblem::new(*model).vector_field(state)
}

/// Time-indexed states with the energy each propagator assigns them.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySamples<T> {
    pub times: Vec<T>,
    pub states: Vec<PolarNodalState<T>>,
    pub energy: Vec<T>,
}

impl<T> Default for TrajectorySamples<T> {
    fn default() -> Self {
        Self {
            times: Vec::new(),
            states: Vec::new(),
            energy: Vec::new(),
        }
    }
}

impl<T: Scalar> TrajectorySamples<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: T, state: PolarNodalState<T>, energy: T) {
        self.times.push(t);
        self.states.push(state);
        self.energy.push(energy);
    }

    pub fn last(&self) -> Option<(T, &PolarNodalState<T>)> {
        Some((*self.times.last()?, self.states.last()?))
    }
}

/// Output grid of a propagation.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampling<T> {
    /// Start and end only.
    Endpoints,
    /// `n` equal intervals, `n + 1` samples.
    Uniform(usize),
    /// Explicit increasing times within the span.
    Times(Vec<T>),
}

impl<T: Scalar> Sampling<T> {
    /// Sample times for the span `[t0, t1]`.
    pub fn grid(&self, t0: T, t1: T) -> Result<Vec<T>> {
        match self {
            Sampling::Endpoints => Ok(if t1 > t0 { vec![t0, t1] } else { vec![t0] }),
            Sampling::Uniform(n) => {
                let n = (*n).max(1);
                if t1 == t0 {
                    return Ok(vec![t0]);
                }
                let dt = (t1 - t0) / T::lit(n as f64);
                Ok((0..=n)
                    .map(|k| if k == n { t1 } else { t0 + dt * T::lit(k as f64) })
                    .collect())
            }
            Sampling::Times(times) => {
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidParameter("sample times must increase strictly".into()));
                }
                if times.iter().any(|t| *t < t0 || *t > t1) {
                    return Err(Error::InvalidParameter(
                        "sample time outside the propagation span".into(),
                    ));
                }
                Ok(times.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationOptions<T> {
    pub tol: T,
    /// Constant step for byte-reproducible runs; disables error control.
    pub fixed_step: Option<T>,
    pub sampling: Sampling<T>,
    pub r_floor: T,
    pub max_steps: usize,
    /// Keep every accepted step for interpolation and event location.
    pub keep_dense: bool,
}

impl<T: Scalar> PropagationOptions<T> {
    pub fn new(tol: T) -> Self {
        Self {
            tol,
            fixed_step: None,
            sampling: Sampling::Endpoints,
            r_floor: T::lit(DEFAULT_R_FLOOR),
            max_steps: 50_000_000,
            keep_dense: false,
        }
    }

    pub fn sampling(self, sampling: Sampling<T>) -> Self {
        Self { sampling, ..self }
    }

    pub fn fixed_step(self, h: T) -> Self {
        Self {
            fixed_step: Some(h),
            ..self
        }
    }

    pub fn dense(self) -> Self {
        Self {
            keep_dense: true,
            ..self
        }
    }
}

#[derive(Debug, Clone)]
pub struct PropagationResult<T> {
    pub samples: TrajectorySamples<T>,
    /// `max |H(t) − H(0)| / |H(0)|` over accepted steps.
    pub energy_drift: T,
    /// `max |N(t) − N(0)|` over accepted steps.
    pub n_drift: T,
    pub steps_taken: usize,
    pub steps_rejected: usize,
    pub dense: Option<DenseOutput<T, 6>>,
}

/// Integrates any 6-dimensional polar-nodal flow, sampling on the requested
/// grid and tracking the drift of `energy` and of `N`.
pub(crate) fn propagate_system<T, S, H>(
    system: &S,
    energy: H,
    state0: &PolarNodalState<T>,
    t_span: (T, T),
    opts: &PropagationOptions<T>,
) -> Result<PropagationResult<T>>
where
    T: Scalar,
    S: OdeSystem<T, 6>,
    H: Fn(&PolarNodalState<T>) -> Result<T>,
{
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
        return Err(Error::InvalidParameter(format!(
            "time span must be finite and forward, got [{t0}, {t1}]"
        )));
    }
    let (lo, hi) = (T::lit(TOL_RANGE.0), T::lit(TOL_RANGE.1));
    if opts.fixed_step.is_none() && !(opts.tol >= lo * T::lit(0.999_999) && opts.tol <= hi * T::lit(1.000_001)) {
        return Err(Error::InvalidParameter(format!(
            "tolerance {} outside [{:e}, {:e}]",
            opts.tol, TOL_RANGE.0, TOL_RANGE.1
        )));
    }
    state0.validate()?;
    let grid = opts.sampling.grid(t0, t1)?;

    let h0 = energy(state0)?;
    let n0 = state0.N;
    let mut samples = TrajectorySamples::default();
    let mut next = 0usize;
    while next < grid.len() && grid[next] <= t0 {
        samples.push(grid[next], state0.normalized(), h0);
        next += 1;
    }

    let mut settings = Settings::with_tolerance(opts.tol);
    settings.fixed_step = opts.fixed_step;
    settings.max_steps = opts.max_steps;
    let solver = Dopri5::new(settings);

    let mut energy_drift = T::zero();
    let mut n_drift = T::zero();
    let scale = h0.abs().max(T::min_positive_value());
    let mut dense = opts.keep_dense.then(DenseOutput::new);

    let (_, stats) = solver.integrate(system, t0, state0.to_array(), t1, |step| {
        let state = PolarNodalState::from_array(step.y1);
        let h = energy(&state)?;
        energy_drift = energy_drift.max((h - h0).abs() / scale);
        n_drift = n_drift.max((state.N - n0).abs());
        while next < grid.len() && grid[next] <= step.t1 {
            let t = grid[next];
            let y = if t == step.t1 { step.y1 } else { step.interpolate(t) };
            let s = PolarNodalState::from_array(y);
            samples.push(t, s.normalized(), energy(&s)?);
            next += 1;
        }
        if let Some(d) = dense.as_mut() {
            d.push(*step);
        }
        Ok(())
    })?;

    Ok(PropagationResult {
        samples,
        energy_drift,
        n_drift,
        steps_taken: stats.accepted,
        steps_rejected: stats.rejected,
        dense,
    })
}

/// Numerical solution of the main problem in polar-nodal variables.
///
/// `tol` is used as both relative and absolute tolerance of the embedded
/// pair and must lie in `[1e-14, 1e-6]` unless a fixed step is requested.
pub fn propagate_numeric<T: Scalar>(
    model: &PhysicalModel<T>,
    state0: &PolarNodalState<T>,
    t_span: (T, T),
    opts: &PropagationOptions<T>,
) -> Result<PropagationResult<T>> {
    model.validate()?;
    let problem = MainProblem::new(*model).with_floor(opts.r_floor);
    propagate_system(&problem, |s| problem.hamiltonian_polar(s), state0, t_span, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::{keplerian_to_polar_nodal, polar_nodal_to_cartesian, Anomaly, KeplerianElements};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn model() -> PhysicalModel<f64> {
        PhysicalModel::canonical(1e-3)
    }

    #[test]
    fn cartesian_reference_values() {
        let kepler = PhysicalModel::canonical(0.0);
        let circ = CartesianState {
            position: [1.0, 0.0, 0.0],
            velocity: [0.0, 1.0, 0.0],
        };
        assert_relative_eq!(hamiltonian_cartesian(&kepler, &circ).unwrap(), -0.5);
        let equator = CartesianState {
            position: [1.0, 0.0, 0.0],
            velocity: [0.0; 3],
        };
        assert_relative_eq!(
            hamiltonian_cartesian(&model(), &equator).unwrap(),
            -1.0005,
            epsilon = 1e-15
        );
        let pole = CartesianState {
            position: [0.0, 0.0, 1.0],
            velocity: [0.0; 3],
        };
        assert_relative_eq!(hamiltonian_cartesian(&model(), &pole).unwrap(), -0.999, epsilon = 1e-15);
    }

    #[test]
    fn polar_reference_values() {
        let eq = PolarNodalState::new(1.0, 0.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(hamiltonian_polar(&model(), &eq).unwrap(), -0.5005, epsilon = 1e-15);
        let polar = PolarNodalState::new(1.0, FRAC_PI_2, 0.0, 0.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(hamiltonian_polar(&model(), &polar).unwrap(), -0.499, epsilon = 1e-15);
        let s = PolarNodalState::new(1.7, 0.4, 2.0, 0.13, 1.1, 0.3).unwrap();
        let kepler = PhysicalModel::canonical(0.0);
        assert_relative_eq!(
            hamiltonian_polar(&kepler, &s).unwrap(),
            kepler_energy(&kepler, &s),
            epsilon = 1e-15
        );
    }

    #[test]
    fn singularity_floor() {
        let s = PolarNodalState {
            r: 1e-10,
            theta: 0.0,
            nu: 0.0,
            R: 0.0,
            Theta: 1.0,
            N: 1.0,
        };
        assert!(matches!(
            hamiltonian_polar(&model(), &s),
            Err(Error::Singularity { .. })
        ));
        assert!(matches!(vector_field(&model(), &s), Err(Error::Singularity { .. })));
        let c = CartesianState {
            position: [0.0, 0.0, 0.0],
            velocity: [1.0, 0.0, 0.0],
        };
        assert!(hamiltonian_cartesian(&model(), &c).is_err());
        let relaxed = MainProblem::new(model()).with_floor(1e-12);
        assert!(relaxed.hamiltonian_polar(&s).is_ok());
    }

    #[test]
    fn kepler_circular_field() {
        let kepler: PhysicalModel<f64> = PhysicalModel::canonical(0.0);
        let s = PolarNodalState::new(1.44, 0.3, 0.1, 0.0, 1.2, 0.5).unwrap();
        let d = vector_field(&kepler, &s).unwrap();
        assert_eq!(d.dr, 0.0);
        assert!(d.dR.abs() < 1e-15);
        assert_relative_eq!(d.dtheta, 1.2 / (1.44 * 1.44));
        assert_eq!(d.dnu, 0.0);
        assert_eq!(d.dN, 0.0);
    }

    /// Central finite differences of the polar Hamiltonian: the oracle for
    /// the analytic partials.
    fn fd_field(model: &PhysicalModel<f64>, s: &PolarNodalState<f64>) -> [f64; 6] {
        let h = |y: [f64; 6]| hamiltonian_polar(model, &PolarNodalState::from_array(y)).unwrap();
        let y = s.to_array();
        let partial = |k: usize| {
            let step = 1e-6 * y[k].abs().max(1.0);
            let (mut up, mut dn) = (y, y);
            up[k] += step;
            dn[k] -= step;
            (h(up) - h(dn)) / (2.0 * step)
        };
        // (r, θ, ν, R, Θ, N): dq = ∂H/∂p, dp = −∂H/∂q
        [
            partial(3),
            partial(4),
            partial(5),
            -partial(0),
            -partial(1),
            -partial(2),
        ]
    }

    fn assert_matches_fd(model: &PhysicalModel<f64>, s: &PolarNodalState<f64>) {
        let analytic = vector_field(model, s).unwrap().to_array();
        let fd = fd_field(model, s);
        let scale = analytic.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for k in 0..6 {
            assert!(
                (analytic[k] - fd[k]).abs() <= 1e-6 * analytic[k].abs().max(1e-3 * scale),
                "component {k}: analytic {} fd {} state {s:?}",
                analytic[k],
                fd[k]
            );
        }
    }

    #[test]
    fn equatorial_node_rate_matches_fd() {
        // N = Θ: the node rate is the limit of the finite-difference oracle
        let strong = PhysicalModel::canonical(0.05);
        let s = PolarNodalState::new(1.3, 0.7, 0.0, 0.05, 1.1, 1.1).unwrap();
        let analytic = vector_field(&strong, &s).unwrap();
        let fd = fd_field(&strong, &s);
        assert!((analytic.dnu - fd[2]).abs() < 1e-8, "{} vs {}", analytic.dnu, fd[2]);
        assert_eq!(analytic.dTheta, 0.0);
    }

    proptest! {
        #[test]
        fn field_matches_finite_differences(
            r in 0.8..4.0_f64, theta in 0.0..TAU, nu in 0.0..TAU,
            rdot in -0.4..0.4_f64, big in 0.5..1.8_f64, c in -0.99..0.99_f64,
        ) {
            let s = PolarNodalState { r, theta, nu, R: rdot, Theta: big, N: big * c };
            assert_matches_fd(&PhysicalModel::canonical(0.05), &s);
        }

        #[test]
        fn hamiltonians_agree(
            r in 0.8..6.0_f64, theta in 0.0..TAU, nu in 0.0..TAU,
            rdot in -0.5..0.5_f64, big in 0.5..2.0_f64, c in -1.0..1.0_f64,
        ) {
            let s = PolarNodalState { r, theta, nu, R: rdot, Theta: big, N: big * c };
            let m = model();
            let hp = hamiltonian_polar(&m, &s).unwrap();
            let hc = hamiltonian_cartesian(&m, &polar_nodal_to_cartesian(&s)).unwrap();
            prop_assert!((hp - hc).abs() <= 1e-12 * hp.abs().max(1e-3));
        }
    }

    fn leo_state(e: f64, i_deg: f64) -> PolarNodalState<f64> {
        let el = KeplerianElements {
            a: 1.2,
            e,
            i: i_deg.to_radians(),
            raan: 0.4,
            argp: 1.0,
            anomaly: Anomaly::mean(0.0),
        };
        keplerian_to_polar_nodal(&model(), &el).unwrap()
    }

    #[test]
    fn kepler_closure_after_one_period() {
        let kepler = PhysicalModel::canonical(0.0);
        let s0 = PolarNodalState::new(1.0, 0.2, 0.3, 0.0, 1.0, 0.6).unwrap();
        let tol = 1e-12;
        let res = propagate_numeric(&kepler, &s0, (0.0, TAU), &PropagationOptions::new(tol)).unwrap();
        let (_, end) = res.samples.last().unwrap();
        assert!((end.r - s0.r).abs() <= 10.0 * tol);
        assert!((end.R - s0.R).abs() <= 10.0 * tol);
        assert!(crate::scalar::wrap_pi(end.theta - s0.theta).abs() <= 10.0 * tol);
        assert_eq!(end.nu, s0.nu);
    }

    #[test]
    fn conserved_and_varying_quantities() {
        let s0 = leo_state(0.1, 50.0);
        let period = TAU * 1.2_f64.powf(1.5);
        let opts = PropagationOptions::new(1e-12).sampling(Sampling::Uniform(200));
        let res = propagate_numeric(&model(), &s0, (0.0, 3.0 * period), &opts).unwrap();
        assert!(res.energy_drift <= 1e-11, "{}", res.energy_drift);
        assert!(res.n_drift <= 1e-13 * s0.Theta);
        assert_eq!(res.samples.len(), 201);
        assert!(res.samples.times.windows(2).all(|w| w[1] > w[0]));
        let (lo, hi) = res
            .samples
            .states
            .iter()
            .fold((f64::MAX, f64::MIN), |(lo, hi), s| (lo.min(s.Theta), hi.max(s.Theta)));
        assert!(hi - lo > 1e-5, "Theta should oscillate for an inclined orbit");
        assert!(res.samples.states.iter().all(|s| (0.0..TAU).contains(&s.theta)));
    }

    #[test]
    fn rejects_bad_requests() {
        let s0 = leo_state(0.1, 50.0);
        let m = model();
        assert!(propagate_numeric(&m, &s0, (0.0, 1.0), &PropagationOptions::new(1.0)).is_err());
        assert!(propagate_numeric(&m, &s0, (0.0, 1.0), &PropagationOptions::new(1e-16)).is_err());
        assert!(propagate_numeric(&m, &s0, (1.0, 0.0), &PropagationOptions::new(1e-10)).is_err());
        assert!(propagate_numeric(&m, &s0, (0.0, f64::INFINITY), &PropagationOptions::new(1e-10)).is_err());
    }

    #[test]
    fn fixed_step_is_reproducible() {
        let s0 = leo_state(0.05, 30.0);
        let opts = PropagationOptions::new(1e-10)
            .fixed_step(0.01)
            .sampling(Sampling::Uniform(10));
        let a = propagate_numeric(&model(), &s0, (0.0, PI), &opts).unwrap();
        let b = propagate_numeric(&model(), &s0, (0.0, PI), &opts).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.steps_taken, 315);
    }

    #[test]
    fn single_precision_energy() {
        let m: PhysicalModel<f32> = PhysicalModel::canonical(1e-3);
        let s = PolarNodalState::new(1.0_f32, 0.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert!((hamiltonian_polar(&m, &s).unwrap() + 0.5005).abs() < 1e-6);
    }
}
