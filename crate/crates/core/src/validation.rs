//! Self-checks of the library against its reference values.
//!
//! [`run_all`] runs eleven numbered checks for a given physical model and
//! integration tolerance and returns one outcome per check. The checks are
//! deterministic (fixed seeds) and take a few seconds in optimized builds.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::elements::{
    keplerian_to_polar_nodal, polar_nodal_to_cartesian, Anomaly, KeplerianElements, PhysicalModel, PolarNodalState,
};
use crate::error::Result;
use crate::intermediary::{elements_with_anomaly, propagate_flow_numeric, state_at_time, PlaneTrajectory};
use crate::kepler::solve_kepler;
use crate::main_problem::{hamiltonian_cartesian, hamiltonian_polar, propagate_numeric, PropagationOptions, Sampling};
use crate::parallax::{parallax_direct, parallax_inverse, propagate_semianalytic, scaled_difference};
use crate::rational::RationalRatio;
use crate::resonance::{
    critical_cos2_continued, critical_cos2_inclination, critical_inclination, inclination_from_frequency_ratio,
};
use crate::scalar::wrap_pi;

/// Classical critical inclination `arccos √(1/5)` in degrees.
pub const CLASSICAL_CRITICAL_DEG: f64 = 63.434_948_822_922_01;

const SEED: u64 = 0x1c_2e5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationConfig {
    pub model: PhysicalModel<f64>,
    /// Integration tolerance of every numerical propagation.
    pub tol: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            model: PhysicalModel::default(),
            tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{:>2}] {}: {}", self.status, self.id, self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub outcomes: Vec<CheckOutcome>,
    pub elapsed: Duration,
}

impl Report {
    /// True when no check failed (skipped checks do not count).
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.outcomes.iter().filter(|o| o.status == Status::Fail)
    }
}

fn verdict(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

type Check = fn(&ValidationConfig) -> Result<(Status, String)>;

const CHECKS: [(u8, &str, Check); 10] = [
    (1, "resonance table at sigma = 0.1", resonance_table),
    (2, "critical inclination limit", critical_limit),
    (3, "critical inclination series coefficients", series_coefficients),
    (4, "one-to-one resonance consistency", one_to_one_consistency),
    (5, "cartesian and polar Hamiltonians agree", hamiltonian_agreement),
    (6, "numerical oracle conservation", oracle_conservation),
    (
        7,
        "intermediary closed form vs numerical flow",
        intermediary_closed_form,
    ),
    (8, "rosette closure", rosette_closure),
    (9, "parallax roundtrip and second-order error", parallax_order),
    (10, "frozen perigee at the critical inclination", frozen_perigee),
];

/// Runs every check. Errors raised inside a check are reported as failures.
pub fn run_all(config: &ValidationConfig) -> Report {
    let start = Instant::now();
    let mut outcomes: Vec<CheckOutcome> = CHECKS
        .iter()
        .map(|(id, name, check)| {
            let (status, detail) = check(config).unwrap_or_else(|e| (Status::Fail, format!("error: {e}")));
            CheckOutcome {
                id: *id,
                name,
                status,
                detail,
            }
        })
        .collect();
    let (status, detail) = match kepler_throughput() {
        Ok((kepler_ok, msg)) => {
            let total = start.elapsed();
            let ok = kepler_ok && total < Duration::from_secs(60);
            (
                verdict(ok),
                format!("{msg}; suite {:.2} s (limit 60 s)", total.as_secs_f64()),
            )
        }
        Err(e) => (Status::Fail, format!("error: {e}")),
    };
    outcomes.push(CheckOutcome {
        id: 11,
        name: "performance floor",
        status,
        detail,
    });
    Report {
        outcomes,
        elapsed: start.elapsed(),
    }
}

fn resonance_table(_: &ValidationConfig) -> Result<(Status, String)> {
    let start = Instant::now();
    let expected: [(u64, u64, f64); 4] = [(19, 25, 3.75), (4, 5, 23.66), (1, 1, 63.43), (14, 13, 86.34)];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (num, den, deg) in expected {
        let res = inclination_from_frequency_ratio(0.1, RationalRatio::new(num, den)?)?;
        // the 1:1 entry is quoted both as 63.43 and 63.44
        let err = if num == den {
            (res.i_deg - deg).abs().min((res.i_deg - 63.44).abs())
        } else {
            (res.i_deg - deg).abs()
        };
        worst = worst.max(err);
        parts.push(format!("{num}/{den}->{:.4}", res.i_deg));
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        verdict(worst <= 0.01 && secs < 1.0),
        format!("{} (max dev {worst:.4} deg, {secs:.3} s)", parts.join(" ")),
    ))
}

fn critical_limit(_: &ValidationConfig) -> Result<(Status, String)> {
    let deg = critical_inclination(0.0_f64)?.to_degrees();
    let cos2 = critical_cos2_inclination(0.0)?;
    let err = (deg - CLASSICAL_CRITICAL_DEG).abs();
    Ok((
        verdict(err <= 1e-6 && cos2 == 0.2),
        format!("i_c(0) = {deg:.9} deg (dev {err:.1e}), cos2 = {cos2}"),
    ))
}

fn series_coefficients(_: &ValidationConfig) -> Result<(Status, String)> {
    let h = 1e-4;
    let f = critical_cos2_continued::<f64>;
    let c0 = critical_cos2_inclination(0.0)?;
    let d1 = (f(h) - f(-h)) / (2.0 * h);
    let d2 = (f(h) - 2.0 * c0 + f(-h)) / (2.0 * h * h);
    let e1 = (d1 + 1.0 / 750.0).abs();
    let e2 = (d2 - 1.0 / 9375.0).abs();
    Ok((
        verdict(e1 <= 1e-9 && e2 <= 1e-6),
        format!("first {d1:.12e} (err {e1:.1e}), second {d2:.9e} (err {e2:.1e})"),
    ))
}

fn one_to_one_consistency(_: &ValidationConfig) -> Result<(Status, String)> {
    let (lo, hi) = (1e-6_f64.log10(), 0.2_f64.log10());
    let mut worst: f64 = 0.0;
    for j in 0..100 {
        let sigma = 10f64.powf(lo + (hi - lo) * j as f64 / 99.0);
        let a = inclination_from_frequency_ratio(sigma, RationalRatio::ONE)?.cos2i;
        let b = critical_cos2_inclination(sigma)?;
        worst = worst.max((a - b).abs());
    }
    Ok((
        verdict(worst <= 1e-12),
        format!("max |dcos2i| = {worst:.2e} over 100 sigmas"),
    ))
}

/// Random bound state; `|H|` stays well away from zero so a relative gap
/// measures rounding, not cancellation.
fn random_state(rng: &mut StdRng, model: &PhysicalModel<f64>) -> Result<PolarNodalState<f64>> {
    let el = KeplerianElements {
        a: rng.gen_range(1.05..5.0) * model.alpha,
        e: rng.gen_range(0.0..0.9),
        i: rng.gen_range(0.0..PI),
        raan: rng.gen_range(0.0..2.0 * PI),
        argp: rng.gen_range(0.0..2.0 * PI),
        anomaly: Anomaly::mean(rng.gen_range(0.0..2.0 * PI)),
    };
    keplerian_to_polar_nodal(model, &el)
}

fn hamiltonian_agreement(config: &ValidationConfig) -> Result<(Status, String)> {
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let s = random_state(&mut rng, &config.model)?;
        let a = hamiltonian_polar(&config.model, &s)?;
        let b = hamiltonian_cartesian(&config.model, &polar_nodal_to_cartesian(&s))?;
        worst = worst.max(((a - b) / a).abs());
    }
    Ok((
        verdict(worst <= 1e-12),
        format!("max relative gap {worst:.2e} over 1000 states"),
    ))
}

fn test_orbit(model: &PhysicalModel<f64>, a: f64, e: f64, i_deg: f64) -> Result<PolarNodalState<f64>> {
    let el = KeplerianElements {
        a: a * model.alpha,
        e,
        i: i_deg.to_radians(),
        raan: 0.4,
        argp: 0.7,
        anomaly: Anomaly::true_anomaly(0.3),
    };
    keplerian_to_polar_nodal(model, &el)
}

fn kepler_period(model: &PhysicalModel<f64>, a: f64) -> f64 {
    2.0 * PI * ((a * model.alpha).powi(3) / model.mu).sqrt()
}

fn oracle_conservation(config: &ValidationConfig) -> Result<(Status, String)> {
    let m = &config.model;
    let x0 = test_orbit(m, 1.2, 0.1, 50.0)?;
    let span = 100.0 * kepler_period(m, 1.2);
    let res = propagate_numeric(m, &x0, (0.0, span), &PropagationOptions::new(config.tol))?;
    let n_rel = res.n_drift / x0.Theta;
    Ok((
        verdict(res.energy_drift <= 1e-10 && n_rel <= 1e-13),
        format!(
            "energy drift {:.2e}, N drift {n_rel:.2e} Theta, {} steps",
            res.energy_drift, res.steps_taken
        ),
    ))
}

fn intermediary_closed_form(config: &ValidationConfig) -> Result<(Status, String)> {
    let m = &config.model;
    let x0 = test_orbit(m, 1.2, 0.1, 50.0)?;
    let (el, _) = elements_with_anomaly(m, &x0)?;
    let span = 10.0 * el.radial_period();
    let opts = PropagationOptions::new(config.tol).sampling(Sampling::Uniform(500));
    let num = propagate_flow_numeric(m, &x0, (0.0, span), &opts)?;
    let (mut dr, mut dang): (f64, f64) = (0.0, 0.0);
    for (t, ns) in num.samples.times.iter().zip(&num.samples.states) {
        let cs = state_at_time(m, &x0, *t)?;
        dr = dr.max((cs.r - ns.r).abs() / m.alpha);
        dang = dang
            .max(wrap_pi(cs.theta - ns.theta).abs())
            .max(wrap_pi(cs.nu - ns.nu).abs());
    }
    Ok((
        verdict(dr <= 1e-9 && dang <= 1e-9),
        format!("max |dr| {dr:.2e} alpha, max angle gap {dang:.2e} rad over 10 radial periods"),
    ))
}

fn rosette_closure(_: &ValidationConfig) -> Result<(Status, String)> {
    let theta0 = 0.75 * PI;
    let e = 0.8;
    let curve = |ratio: f64| PlaneTrajectory {
        semi_latus: 1.0,
        ratio,
        e,
        theta0,
    };
    let rosette = curve(0.8);
    let (x0, y0) = rosette.point_at(theta0);
    let (x1, y1) = rosette.point_at(theta0 + 10.0 * PI);
    let gap = (x1 - x0).hypot(y1 - y0);

    // a fixed ellipse has constant focal-distance sum 2a
    let ellipse = curve(1.0);
    let a = 1.0 / (1.0 - e * e);
    let (fx, fy) = (-2.0 * a * e * theta0.cos(), -2.0 * a * e * theta0.sin());
    let mut focal: f64 = 0.0;
    for j in 0..720 {
        let th = theta0 + 2.0 * PI * j as f64 / 720.0;
        let (x, y) = ellipse.point_at(th);
        focal = focal.max(((x.hypot(y) + (x - fx).hypot(y - fy)) - 2.0 * a).abs() / a);
    }
    Ok((
        verdict(gap <= 1e-12 && focal <= 1e-12),
        format!("4/5 closure gap {gap:.2e}, 1/1 ellipse deviation {focal:.2e}"),
    ))
}

fn max_position_gap(model: &PhysicalModel<f64>, x0: &PolarNodalState<f64>, span: f64, tol: f64) -> Result<f64> {
    let opts = PropagationOptions::new(tol).sampling(Sampling::Uniform(40));
    let num = propagate_numeric(model, x0, (0.0, span), &opts)?;
    let mut worst: f64 = 0.0;
    for (t, truth) in num.samples.times.iter().zip(&num.samples.states) {
        let a = polar_nodal_to_cartesian(&propagate_semianalytic(model, x0, *t)?).position;
        let b = polar_nodal_to_cartesian(truth).position;
        worst = worst.max((0..3).map(|j| (a[j] - b[j]).powi(2)).sum::<f64>().sqrt());
    }
    Ok(worst)
}

fn parallax_order(config: &ValidationConfig) -> Result<(Status, String)> {
    let m = &config.model;
    let mut rng = StdRng::seed_from_u64(SEED + 9);
    let mut roundtrip: f64 = 0.0;
    for _ in 0..200 {
        let x = test_orbit_random(&mut rng, m)?;
        let back = parallax_direct(m, &parallax_inverse(m, &x)?)?;
        roundtrip = roundtrip.max(scaled_difference(&back, &x));
    }
    if m.is_kepler() {
        return Ok((
            verdict(roundtrip <= 1e-13),
            format!("roundtrip {roundtrip:.2e}; scaling not applicable with J2 = 0"),
        ));
    }
    let x0 = test_orbit(m, 1.2, 0.1, 50.0)?;
    let span = kepler_period(m, 1.2);
    let full = max_position_gap(m, &x0, span, config.tol)?;
    let half = max_position_gap(&m.with_j2(m.j2 / 2.0), &x0, span, config.tol)?;
    let ratio = full / half;
    Ok((
        verdict(roundtrip <= 1e-13 && (3.4..=4.6).contains(&ratio)),
        format!("roundtrip {roundtrip:.2e}; position error {full:.3e} -> {half:.3e}, ratio {ratio:.3}"),
    ))
}

fn test_orbit_random(rng: &mut StdRng, model: &PhysicalModel<f64>) -> Result<PolarNodalState<f64>> {
    let el = KeplerianElements {
        a: rng.gen_range(1.05..1.6) * model.alpha,
        e: rng.gen_range(0.0..0.15),
        i: rng.gen_range(0.0..PI),
        raan: rng.gen_range(0.0..2.0 * PI),
        argp: rng.gen_range(0.0..2.0 * PI),
        anomaly: Anomaly::true_anomaly(rng.gen_range(0.0..2.0 * PI)),
    };
    keplerian_to_polar_nodal(model, &el)
}

/// Osculating perigee latitude drift between the first and the eleventh
/// perigee passage of the main problem, and the largest excursion of the
/// intermediary perigee `θ − f` over the same span. The orbit is set up in
/// prime variables with `i' = i_c(σ)` for `p' = 1.1 α`.
fn perigee_drifts(base: &PhysicalModel<f64>, sigma: f64, tol: f64) -> Result<(f64, f64)> {
    let p = 1.1 * base.alpha;
    let model = base.with_j2(sigma * (p / base.alpha).powi(2));
    let ic = critical_inclination(sigma)?;
    let theta_mom = (model.mu * p).sqrt();
    let (e, f0): (f64, f64) = (0.05, 0.3);
    let prime = PolarNodalState::new(
        p / (1.0 + e * f0.cos()),
        1.0 + f0,
        0.2,
        model.mu / theta_mom * e * f0.sin(),
        theta_mom,
        theta_mom * ic.cos(),
    )?;
    let (el, _) = elements_with_anomaly(&model, &prime)?;
    let period = el.radial_period();

    let mut intermediary: f64 = 0.0;
    for j in 0..=400 {
        let s = state_at_time(&model, &prime, 10.0 * period * j as f64 / 400.0)?;
        let (_, f) = elements_with_anomaly(&model, &s)?;
        intermediary = intermediary.max(wrap_pi(s.theta - f - el.theta0).abs());
    }

    let original = parallax_direct(&model, &prime)?;
    let res = propagate_numeric(
        &model,
        &original,
        (0.0, 11.0 * period),
        &PropagationOptions::new(tol).dense(),
    )?;
    let dense = res.dense.expect("dense output requested");
    let passages = dense.upward_crossings(|y| y[3]);
    if passages.len() < 11 {
        return Err(crate::error::Error::InvalidParameter(format!(
            "only {} perigee passages found",
            passages.len()
        )));
    }
    let omega = |t: f64| dense.at(t).map(|y| y[1]).unwrap_or(f64::NAN);
    let numeric = wrap_pi(omega(passages[10]) - omega(passages[0])).abs();
    Ok((intermediary, numeric))
}

fn frozen_perigee(config: &ValidationConfig) -> Result<(Status, String)> {
    if config.model.is_kepler() {
        return Ok((Status::Skip, "not applicable with J2 = 0".into()));
    }
    let (int_full, num_full) = perigee_drifts(&config.model, 1e-2, config.tol)?;
    let (_, num_half) = perigee_drifts(&config.model, 5e-3, config.tol)?;
    let ratio = num_full / num_half;
    Ok((
        verdict(int_full <= 1e-12 && (3.0..=5.0).contains(&ratio)),
        format!(
            "intermediary drift {int_full:.2e} rad; numeric drift {num_full:.3e} -> {num_half:.3e} rad, ratio {ratio:.3}"
        ),
    ))
}

fn kepler_throughput() -> Result<(bool, String)> {
    let mut rng = StdRng::seed_from_u64(SEED + 11);
    let inputs: Vec<(f64, f64)> = (0..1_000_000)
        .map(|_| (rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..=0.9)))
        .collect();
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for &(m, e) in &inputs {
        let ea = solve_kepler(m, e)?;
        worst = worst.max((ea - e * ea.sin() - m).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        secs < 1.0 && worst <= 1e-13,
        format!("1e6 Kepler solves in {secs:.3} s, max residual {worst:.1e}"),
    ))
}
