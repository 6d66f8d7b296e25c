use std::f64::consts::TAU;

use incres::elements::{keplerian_to_polar_nodal, polar_nodal_to_keplerian, Anomaly, AnomalyKind, KeplerianElements};
use incres::intermediary::{hamiltonian as intermediary_hamiltonian, state_at_time, PlaneTrajectory};
use incres::main_problem::{hamiltonian_polar, propagate_numeric, Sampling, TOL_RANGE};
use incres::parallax::{parallax_direct, parallax_inverse};
use incres::resonance::{
    apsidal_rate_ratio, critical_cos2_inclination, critical_inclination_series, frequency_ratio_of_inclination,
    inclination_from_apsidal_ratio, inclination_from_cos2, inclination_from_latitude_ratio, scan_resonances,
    MAX_SCAN_DENOMINATOR,
};
use incres::table::{Cell, Table};
use incres::validation::{run_all, Status, ValidationConfig};
use incres::{PhysicalModel, PolarNodalState};

use crate::{
    CliError, CriticalArgs, DiagramArgs, DiagramKind, Method, PropagateArgs, ResonanceArgs, RosetteArgs, RunConfig,
    ValidateArgs,
};

/// Data to print plus the command's verdict; a failing verdict still prints.
pub struct Outcome {
    pub table: Table,
    pub status: Result<(), CliError>,
}

impl From<Table> for Outcome {
    fn from(table: Table) -> Self {
        Outcome { table, status: Ok(()) }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn check_sigma(sigma: f64) -> Result<(), CliError> {
    if sigma.is_finite() && sigma >= 0.0 {
        Ok(())
    } else {
        Err(usage(format!("sigma must be a finite number >= 0, got {sigma}")))
    }
}

pub fn critical(run: &RunConfig, args: &CriticalArgs) -> Result<Outcome, CliError> {
    let sigma = match (args.sigma, args.p, run.j2_flag) {
        (Some(s), None, None) => s,
        (None, Some(p), Some(j2)) => {
            if !(p > 0.0 && p.is_finite()) {
                return Err(usage(format!("--p must be positive, got {p}")));
            }
            j2 * (run.model.alpha / p).powi(2)
        }
        (Some(_), _, _) => return Err(usage("give either --sigma or --j2 with --p, not both")),
        _ => return Err(usage("give --sigma, or --j2 together with --p")),
    };
    check_sigma(sigma)?;

    let exact = critical_cos2_inclination(sigma)?;
    let exact_deg = inclination_from_cos2(exact).to_degrees();
    let mut table = Table::new(["method", "sigma", "cos2i", "i_deg", "delta_deg"]);
    table.push(vec![
        "exact".into(),
        sigma.into(),
        exact.into(),
        exact_deg.into(),
        0.0.into(),
    ]);
    for order in 0..=2 {
        let c = critical_inclination_series(sigma, order)?;
        let deg = inclination_from_cos2(c).to_degrees();
        table.push(vec![
            format!("series{order}").into(),
            sigma.into(),
            c.into(),
            deg.into(),
            (deg - exact_deg).into(),
        ]);
    }
    Ok(table.into())
}

pub fn resonances(_run: &RunConfig, args: &ResonanceArgs) -> Result<Outcome, CliError> {
    check_sigma(args.sigma)?;
    if args.max_den == 0 || args.max_den > MAX_SCAN_DENOMINATOR {
        return Err(usage(format!("--max-den must lie in 1..={MAX_SCAN_DENOMINATOR}")));
    }
    let [lo, hi] = args.window[..] else {
        return Err(usage("--window takes two values LO,HI"));
    };
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(usage(format!("bad --window {lo},{hi}")));
    }
    let found = scan_resonances(args.sigma, args.max_den, (lo, hi))?;
    let mut table = Table::new(["num", "den", "k", "i_deg", "i_retro_deg"]);
    for r in found {
        table.push(vec![
            r.k.num().into(),
            r.k.den().into(),
            r.k.value::<f64>().into(),
            r.i_deg.into(),
            r.i_retro_deg.into(),
        ]);
    }
    Ok(table.into())
}

pub fn rosette(_run: &RunConfig, args: &RosetteArgs) -> Result<Outcome, CliError> {
    if !(0.0..1.0).contains(&args.e) {
        return Err(usage(format!("--e must lie in [0, 1), got {}", args.e)));
    }
    if !(args.q2 > 0.0 && args.q2.is_finite()) {
        return Err(usage("--q2 must be positive"));
    }
    if args.samples_per_rev == 0 {
        return Err(usage("--samples-per-rev must be positive"));
    }
    // Q/P = num/den closes after `den` latitude cycles
    let revs = args.revs.unwrap_or(args.ratio.den());
    if revs == 0 {
        return Err(usage("--revs must be positive"));
    }
    let curve = PlaneTrajectory {
        semi_latus: args.q2,
        ratio: args.ratio.value::<f64>(),
        e: args.e,
        theta0: args.theta0.to_radians(),
    };
    let n = revs * args.samples_per_rev;
    let span = TAU * revs as f64;
    let mut table = Table::new(["theta", "r", "x", "y"]);
    for j in 0..=n {
        let theta = curve.theta0 + span * (j as f64 / n as f64);
        let (x, y) = curve.point_at(theta);
        table.push(vec![
            theta.to_degrees().into(),
            curve.radius_at(theta).into(),
            x.into(),
            y.into(),
        ]);
    }
    Ok(table.into())
}

/// `points` values spread over `[lo, hi]` with `anchor` included exactly.
fn ratio_grid(lo: f64, hi: f64, points: usize, anchor: f64) -> Vec<f64> {
    let n = points.max(2) - 1;
    let width = hi - lo;
    let mut grid: Vec<f64> = (0..=n)
        .map(|j| {
            let v = if j == n { hi } else { lo + width * (j as f64 / n as f64) };
            if (v - anchor).abs() <= 1e-9 * width {
                anchor
            } else {
                v
            }
        })
        .collect();
    if !grid.contains(&anchor) {
        grid.push(anchor);
        grid.sort_by(f64::total_cmp);
    }
    grid
}

pub fn diagram(_run: &RunConfig, args: &DiagramArgs) -> Result<Outcome, CliError> {
    if args.points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    match args.kind {
        DiagramKind::Apsidal | DiagramKind::Latitude => {
            let sigma = args.sigma;
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(usage("--sigma must be positive for this diagram"));
            }
            let shift = if args.kind == DiagramKind::Latitude { 1.0 } else { 0.0 };
            // ratio range spanned by i in [0, 90] deg
            let lo = apsidal_rate_ratio(sigma, std::f64::consts::FRAC_PI_2)?.value + shift;
            let hi = apsidal_rate_ratio(sigma, 0.0)?.value + shift;
            let mut table = Table::new(["ratio", "i_deg"]);
            for ratio in ratio_grid(lo, hi, args.points, shift) {
                let i = if shift == 0.0 {
                    inclination_from_apsidal_ratio(sigma, ratio)?
                } else {
                    inclination_from_latitude_ratio(sigma, ratio)?
                };
                table.push(vec![ratio.into(), i.to_degrees().into()]);
            }
            Ok(table.into())
        }
        DiagramKind::KSigma => {
            check_sigma(args.sigma_max)?;
            let mut table = Table::new(["sigma", "i_deg", "k"]);
            let n = args.points - 1;
            for &i_deg in &args.inclinations {
                if !(0.0..=180.0).contains(&i_deg) {
                    return Err(usage(format!("inclination {i_deg} outside [0, 180]")));
                }
                for j in 0..=n {
                    let sigma = args.sigma_max * (j as f64 / n as f64);
                    let k = frequency_ratio_of_inclination(sigma, i_deg.to_radians())?.value;
                    table.push(vec![sigma.into(), i_deg.into(), k.into()]);
                }
            }
            Ok(table.into())
        }
    }
}

fn initial_state(model: &PhysicalModel<f64>, args: &PropagateArgs) -> Result<PolarNodalState<f64>, CliError> {
    for values in [&args.state, &args.elements].into_iter().flatten() {
        if values.len() != 6 {
            return Err(usage(format!(
                "expected 6 comma-separated values, got {}",
                values.len()
            )));
        }
    }
    match (&args.state, &args.elements) {
        (Some(s), None) => PolarNodalState::new(s[0], s[1].to_radians(), s[2].to_radians(), s[3], s[4], s[5])
            .map_err(|e| usage(e.to_string())),
        (None, Some(el)) => {
            let el = KeplerianElements {
                a: el[0],
                e: el[1],
                i: el[2].to_radians(),
                raan: el[3].to_radians(),
                argp: el[4].to_radians(),
                anomaly: Anomaly::true_anomaly(el[5].to_radians()),
            };
            keplerian_to_polar_nodal(model, &el).map_err(|e| usage(e.to_string()))
        }
        _ => Err(usage("give the initial condition with --state or --elements")),
    }
}

fn trajectory_row(t: f64, s: &PolarNodalState<f64>, h: f64) -> Vec<Cell> {
    vec![
        t.into(),
        s.r.into(),
        s.theta.to_degrees().into(),
        s.nu.to_degrees().into(),
        s.R.into(),
        s.Theta.into(),
        s.N.into(),
        h.into(),
    ]
}

pub fn propagate(run: &RunConfig, args: &PropagateArgs) -> Result<Outcome, CliError> {
    let model = run.model;
    let x0 = initial_state(&model, args)?;
    let span = match (args.time, args.orbits) {
        (Some(t), None) => t,
        (None, Some(n)) => {
            let a = polar_nodal_to_keplerian(&model, &x0, AnomalyKind::True)?.a;
            n * TAU * (a.powi(3) / model.mu).sqrt()
        }
        _ => return Err(usage("give the span with --time or --orbits")),
    };
    if !(span.is_finite() && span >= 0.0) {
        return Err(usage(format!("time span must be finite and non-negative, got {span}")));
    }
    if args.samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    if let Some(h) = args.fixed_step {
        if !(h > 0.0 && h.is_finite()) {
            return Err(usage("--fixed-step must be positive"));
        }
    } else if !(TOL_RANGE.0..=TOL_RANGE.1).contains(&args.tol) {
        return Err(usage(format!(
            "--tol must lie in [{:e}, {:e}]",
            TOL_RANGE.0, TOL_RANGE.1
        )));
    }

    let sampling = Sampling::Uniform(args.samples);
    let mut table = Table::new(["t", "r", "theta", "nu", "R", "Theta", "N", "H"]);
    match args.method {
        Method::Numeric => {
            let mut opts = incres::PropagationOptions::new(args.tol).sampling(sampling);
            opts.fixed_step = args.fixed_step;
            let res = propagate_numeric(&model, &x0, (0.0, span), &opts)?;
            for ((t, s), h) in res
                .samples
                .times
                .iter()
                .zip(&res.samples.states)
                .zip(&res.samples.energy)
            {
                table.push(trajectory_row(*t, s, *h));
            }
            eprintln!(
                "energy_drift {:.3e}  n_drift {:.3e}  steps {}  rejected {}",
                res.energy_drift, res.n_drift, res.steps_taken, res.steps_rejected
            );
        }
        Method::Intermediary => {
            for t in sampling.grid(0.0, span)? {
                let s = state_at_time(&model, &x0, t)?;
                table.push(trajectory_row(t, &s, intermediary_hamiltonian(&model, &s)?));
            }
        }
        Method::Semianalytic => {
            let prime0 = parallax_inverse(&model, &x0)?;
            for t in sampling.grid(0.0, span)? {
                let s = parallax_direct(&model, &state_at_time(&model, &prime0, t)?)?;
                table.push(trajectory_row(t, &s, hamiltonian_polar(&model, &s)?));
            }
        }
    }
    Ok(table.into())
}

pub fn validate(run: &RunConfig, args: &ValidateArgs) -> Result<Outcome, CliError> {
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(usage("--tol must be positive"));
    }
    let report = run_all(&ValidationConfig {
        model: run.model,
        tol: args.tol,
    });
    let mut table = Table::new(["id", "status", "check", "detail"]);
    for o in &report.outcomes {
        eprintln!("{o}");
        table.push(vec![
            (o.id as i64).into(),
            o.status.to_string().into(),
            o.name.into(),
            o.detail.clone().into(),
        ]);
    }
    let failed: Vec<String> = report.failures().map(|o| o.id.to_string()).collect();
    let skipped = report.outcomes.iter().filter(|o| o.status == Status::Skip).count();
    let status = if failed.is_empty() {
        eprintln!(
            "all checks passed ({skipped} skipped) in {:.2} s",
            report.elapsed.as_secs_f64()
        );
        Ok(())
    } else {
        Err(CliError::Numeric(format!("failed checks: {}", failed.join(", "))))
    };
    Ok(Outcome { table, status })
}
