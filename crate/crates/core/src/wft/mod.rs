//! Semi-discrete front-tracking solver with operator splitting for the
//! vehicle-induced source.

pub mod evolve;
pub mod front;
pub mod source;

pub use evolve::{evolve_window, position_tol, prepare_window, Interaction, InteractionKind, WindowOutcome};
pub use front::{delta_nu, fan_riemann, sample_initial, Front, FrontKind, FrontList, WftParams};
pub use source::{apply_source, resample_near_bottleneck, SourceProfile};

use crate::error::{Error, Result};
use crate::gof::{step_plan, step_time};
use crate::model::{check_speed_separation, validity_report, BottleneckParams, Horizon};
use crate::record::{DiagRow, EventEntry, RunRecord, Snapshot, Summary};
use crate::scalar::Scalar;
use crate::scenario::{ModelSelector, Scenario};

/// Splitting step used when the scenario does not set one: `½ / ‖φ′‖_∞`,
/// which keeps the Euler source update inside `[0, 1]`.
pub fn default_window<T: Scalar>(params: &BottleneckParams<T>) -> T {
    let lip = params.phi.prime_sup();
    if lip > T::zero() {
        T::half() / lip
    } else {
        T::lit(0.01)
    }
}

/// Smallest gap between discontinuities that still receives a midpoint when
/// re-sampling: half the dyadic spacing `2β / 2^ν`. Inserting midpoints into
/// every shorter gap doubles the front count near the vehicle each window.
pub fn midpoint_spacing<T: Scalar>(params: &BottleneckParams<T>, nu: u32) -> T {
    params.phi.beta / T::lit((1u64 << nu) as f64)
}

/// Outcome of the separation check on one front list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeparationCheck {
    /// The closest front has a state at or below the threshold.
    NotApplicable,
    Holds,
    Fails,
}

/// Checks `w(ρ_l), w(ρ_r) > λ + μ` for the front closest to the vehicle
/// whenever both of its states exceed the threshold.
pub fn separation_at<T: Scalar>(fl: &FrontList<T>, y: T, params: &BottleneckParams<T>) -> SeparationCheck {
    let k = fl.fronts.partition_point(|f| f.pos < y);
    let candidates = [k.checked_sub(1), (k < fl.fronts.len()).then_some(k)];
    let Some(f) = candidates
        .into_iter()
        .flatten()
        .map(|i| fl.fronts[i])
        .filter(|f| (f.pos - y).abs() < params.phi.beta)
        .min_by(|a, b| (a.pos - y).abs().partial_cmp(&(b.pos - y).abs()).unwrap())
    else {
        return SeparationCheck::NotApplicable;
    };
    let sep = check_speed_separation(f.left.min(f.right), params);
    if !(sep.mu > T::zero()) {
        return SeparationCheck::NotApplicable;
    }
    let lam = params.phi.eval(f.pos - y) * (T::one() - f.left - f.right);
    let w = |r: T| params.w_max * (T::one() - r);
    if w(f.left) > lam + sep.mu && w(f.right) > lam + sep.mu {
        SeparationCheck::Holds
    } else {
        SeparationCheck::Fails
    }
}

fn snapshot<T: Scalar>(fl: &FrontList<T>, s: &Scenario, t: f64) -> Snapshot {
    let values = fl
        .cell_averages(T::lit(s.domain[0]), T::lit(s.numerics.dx), s.cells())
        .into_iter()
        .map(|v| v.to_f64_lossy())
        .collect();
    Snapshot { t, values }
}

/// Runs the front-tracking solver at refinement `s.numerics.nu`.
pub fn run_wft<T: Scalar>(s: &Scenario) -> Result<RunRecord> {
    run_wft_path::<T>(s).map(|(r, _)| r)
}

/// As [`run_wft`], also returning every knot `(t, y)` of the piecewise-linear
/// vehicle path.
pub fn run_wft_path<T: Scalar>(s: &Scenario) -> Result<(RunRecord, Vec<(f64, f64)>)> {
    s.validate()?;
    if s.model != ModelSelector::Single || s.bottlenecks.len() != 1 {
        return Err(Error::InvalidParams(
            "the front-tracking solver handles a single bottleneck only".into(),
        ));
    }
    let params: BottleneckParams<T> = s.bottlenecks[0].params()?;
    let lip = params.phi.prime_sup();
    let window = s
        .numerics
        .wft_dt
        .unwrap_or_else(|| default_window(&params).to_f64_lossy());
    if window * lip.to_f64_lossy() > 1.0 {
        return Err(Error::Cfl {
            dt: window,
            limit: 1.0 / lip.to_f64_lossy(),
        });
    }
    let wp = WftParams::new(s.numerics.nu, T::lit(window))?;
    let tol = position_tol(&params, &wp);
    let min_mid = midpoint_spacing(&params, wp.nu);
    let k_phi = params.phi.k_phi().value;
    let (n, window) = step_plan(s.horizon, window);
    let [x_lo, x_hi] = s.domain;

    let mut summary = Summary {
        solver: "wft".into(),
        dt: window,
        k_phi: Some(k_phi.to_f64_lossy()),
        completed: true,
        ..Summary::default()
    };
    let rep = validity_report(
        T::lit(s.initial_density.inf()),
        T::lit(s.initial_density.sup()),
        &params,
    );
    summary.mu = Some(rep.mu.to_f64_lossy());
    summary.eta = Some(rep.eta.to_f64_lossy());
    match rep.t_max {
        Horizon::Bounded(t) => {
            summary.t_max = Some(t.to_f64_lossy());
            if !rep.t_max.admits(T::lit(s.horizon)) {
                summary.warnings.push(format!(
                    "horizon T = {} exceeds the speed-separation bound {}",
                    s.horizon,
                    t.to_f64_lossy()
                ));
            }
        }
        Horizon::Unbounded => {}
        Horizon::Unverifiable => summary
            .warnings
            .push("speed separation cannot be verified for this datum".into()),
    }
    if !(rep.mu > T::zero()) {
        summary
            .warnings
            .push("initial datum does not stay above the speed-separation threshold".into());
    }

    let mut fl = sample_initial::<T>(|x| s.initial_density.eval(x), wp.nu);
    let mut y = T::lit(s.bottlenecks[0].position);
    let diag = |fl: &FrontList<T>, t: f64, events: usize, this_dt: f64| DiagRow {
        t,
        mass: fl.integral(T::lit(x_lo), T::lit(x_hi)).to_f64_lossy(),
        tv: fl.total_variation().to_f64_lossy(),
        cfl: this_dt * lip.to_f64_lossy(),
        events: events as u64,
        min_gap: None,
    };
    let mut traj_t = vec![0.0];
    let mut traj_y = vec![vec![y.to_f64_lossy()]];
    let mut snapshots = vec![snapshot(&fl, s, 0.0)];
    let mut diagnostics = vec![diag(&fl, 0.0, 0, 0.0)];
    let mut warned = std::collections::HashSet::new();
    let mut path = vec![(0.0, y.to_f64_lossy())];

    for k in 1..=n {
        let t_prev = step_time(k - 1, n, window, s.horizon);
        let t = step_time(k, n, window, s.horizon);
        let this_dt = t - t_prev;
        let prepared = prepare_window(&fl, y, &params, &wp);
        match separation_at(&prepared, y, &params) {
            SeparationCheck::NotApplicable => {}
            SeparationCheck::Holds => summary.separation_checks += 1,
            SeparationCheck::Fails => {
                summary.separation_checks += 1;
                summary.separation_failures += 1;
            }
        }
        let tv_before = prepared.total_variation();
        let out = evolve_window(&prepared, y, &params, &wp, T::lit(t_prev), T::lit(t)).map_err(|e| e.at(t_prev))?;
        for w in out.warnings {
            // one line per kind of warning is enough
            let key: String = w.split(" at t").next().unwrap_or(&w).to_string();
            if warned.insert(key) {
                summary.warnings.push(w);
            }
        }
        summary.events.extend(out.interactions.iter().map(|i| EventEntry {
            t: i.t.to_f64_lossy(),
            y: i.y.to_f64_lossy(),
            kind: i.kind.as_str().into(),
            left: i.left.to_f64_lossy(),
            right: i.right.to_f64_lossy(),
        }));
        for &(tk, yk) in &out.knots[1..] {
            path.push((tk.to_f64_lossy(), yk.to_f64_lossy()));
        }
        y = out.y;
        summary.steps = k;
        if y.to_f64_lossy() >= x_hi {
            summary.completed = false;
            summary.stopped_at = Some(t);
            summary.warnings.push(format!(
                "the bottleneck left the domain during the window ending at t = {t}"
            ));
            fl = out.fronts;
            traj_t.push(t);
            traj_y.push(vec![y.to_f64_lossy()]);
            diagnostics.push(diag(&fl, t, out.events, this_dt));
            break;
        }
        let profile = apply_source(&out.fronts, y, T::lit(this_dt), &params.phi);
        fl = resample_near_bottleneck(&profile, wp.nu, tol, min_mid).map_err(|e| e.at(t))?;
        if fl.total_variation() - tv_before > k_phi * T::lit(this_dt) + T::rel_tol(1e-12) {
            summary.tv_violations += 1;
        }
        traj_t.push(t);
        traj_y.push(vec![y.to_f64_lossy()]);
        diagnostics.push(diag(&fl, t, out.events, this_dt));
        if k % s.numerics.stride == 0 {
            snapshots.push(snapshot(&fl, s, t));
        }
    }
    let t_end = *traj_t.last().expect("initial row");
    let record = RunRecord {
        x0: x_lo,
        dx: s.numerics.dx,
        traj_t,
        traj_y,
        snapshots,
        final_state: snapshot(&fl, s, t_end),
        diagnostics,
        summary,
    };
    Ok((record, path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{builtin, InitialDensity};

    #[test]
    fn constant_datum_linear_trajectory() {
        // the source vanishes only at the extreme states
        for rho in [0.0, 1.0] {
            let mut s = builtin("fig5").unwrap();
            s.initial_density = InitialDensity::PiecewiseConstant {
                breakpoints: vec![],
                values: vec![rho],
            };
            s.horizon = 0.05;
            s.numerics.nu = 4;
            let (r, path) = run_wft_path::<f64>(&s).unwrap();
            let v = 0.4 * (1.0 - rho);
            for (t, y) in r.traj_t.iter().zip(r.trajectory(0)) {
                assert!((y - 0.5 - v * t).abs() < 1e-12);
            }
            for (t, y) in path {
                assert!((y - 0.5 - v * t).abs() < 1e-12);
            }
            assert!(r.final_state.values.iter().all(|&x| (x - rho).abs() < 1e-12));
        }
    }

    #[test]
    fn rejects_multi_vehicle() {
        let s = builtin("fig8").unwrap();
        assert!(matches!(run_wft::<f64>(&s), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn window_too_long_is_configuration_error() {
        let mut s = builtin("fig5").unwrap();
        s.numerics.wft_dt = Some(0.05);
        assert!(run_wft::<f64>(&s).unwrap_err().is_configuration());
    }
}
