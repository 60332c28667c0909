//! Refinement studies and the cross-solver comparison.

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{coarsen, geometric_ratio, l1_distance, observed_order, path_gap};
use crate::error::{Error, Result};
use crate::gof::{self, Scheme};
use crate::model::{time_horizon, Horizon};
use crate::record::RunRecord;
use crate::scenario::Scenario;
use crate::wft;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    SingleRun,
    GofRefinement,
    WftRefinement,
    CrossValidate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ladder {
    /// Cell sizes, coarse to fine.
    Dx(Vec<f64>),
    /// Front-tracking refinement levels, ascending.
    Nu(Vec<u32>),
    None,
}

impl Ladder {
    fn len(&self) -> usize {
        match self {
            Ladder::Dx(v) => v.len(),
            Ladder::Nu(v) => v.len(),
            Ladder::None => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudySpec {
    pub kind: StudyKind,
    pub scenario: Scenario,
    pub ladder: Ladder,
    /// Pass threshold: maximal geometric ratio (WFT), minimal order (GOF),
    /// or the multiple of `Δx · TV(ρ̄)` allowed in L¹ (cross-validation).
    pub tolerance: f64,
}

impl StudySpec {
    pub fn wft_refinement(scenario: Scenario, nus: Vec<u32>) -> Self {
        Self {
            kind: StudyKind::WftRefinement,
            scenario,
            ladder: Ladder::Nu(nus),
            tolerance: 0.7,
        }
    }

    pub fn gof_refinement(scenario: Scenario, dxs: Vec<f64>) -> Self {
        Self {
            kind: StudyKind::GofRefinement,
            scenario,
            ladder: Ladder::Dx(dxs),
            tolerance: 0.7,
        }
    }

    pub fn cross_validate(scenario: Scenario) -> Self {
        Self {
            kind: StudyKind::CrossValidate,
            scenario,
            ladder: Ladder::None,
            tolerance: 5.0,
        }
    }

    /// Ladders must refine strictly and have at least two rungs; a cell-size
    /// ladder must also nest (each ratio a whole number) so that fine
    /// solutions can be averaged onto the coarser grid.
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        match (self.kind, &self.ladder) {
            (StudyKind::WftRefinement, Ladder::Nu(v)) => {
                if v.windows(2).any(|w| w[1] <= w[0]) || v.first() == Some(&0) {
                    return bad(format!("nu ladder must be strictly increasing and positive: {v:?}"));
                }
            }
            (StudyKind::GofRefinement, Ladder::Dx(v)) => {
                if v.iter().any(|&d| !(d > 0.0)) || v.windows(2).any(|w| w[1] >= w[0]) {
                    return bad(format!("dx ladder must be positive and strictly decreasing: {v:?}"));
                }
                for w in v.windows(2) {
                    let f = w[0] / w[1];
                    if (f - f.round()).abs() > 1e-9 {
                        return bad(format!("dx ladder must nest, {} / {} is not whole", w[0], w[1]));
                    }
                }
            }
            (StudyKind::SingleRun | StudyKind::CrossValidate, _) => return self.scenario.validate(),
            (kind, l) => return bad(format!("{kind:?} cannot use ladder {l:?}")),
        }
        if self.ladder.len() < 2 {
            return bad("a refinement study needs at least two rungs".into());
        }
        self.scenario.validate()
    }
}

/// One pass/fail comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub bound: f64,
    /// `true` when `value` must stay at or below `bound`.
    pub upper: bool,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: Option<f64>, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            upper: true,
            pass: value.is_some_and(|v| v <= bound),
        }
    }

    fn at_least(name: &str, value: Option<f64>, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            upper: false,
            pass: value.is_some_and(|v| v >= bound),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub kind: StudyKind,
    pub scenario: String,
    pub horizon: f64,
    /// Resolutions that completed, in ladder order.
    pub rungs: Vec<f64>,
    /// Distances between consecutive rungs: `sup_t |y_{k+1} − y_k|` (WFT) or
    /// the L¹ distance at `T` (GOF).
    pub gaps: Vec<f64>,
    /// Whether every gap is below the previous one.
    pub monotone: bool,
    pub checks: Vec<Check>,
    pub pass: bool,
    /// Set when a rung failed; the report then covers the rungs before it.
    pub error: Option<String>,
}

impl StudyReport {
    fn new(kind: StudyKind, s: &Scenario) -> Self {
        Self {
            kind,
            scenario: s.name.clone(),
            horizon: s.horizon,
            rungs: Vec::new(),
            gaps: Vec::new(),
            monotone: true,
            checks: Vec::new(),
            pass: false,
            error: None,
        }
    }

    fn finish(mut self) -> Self {
        self.monotone = self.gaps.windows(2).all(|w| w[1] < w[0]);
        self.pass = self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.pass);
        self
    }
}

/// Largest horizon below the speed-separation bound of the scenario's first
/// vehicle, capped at the scenario horizon.
pub fn horizon_within_bound(s: &Scenario) -> Result<f64> {
    let p = s.bottlenecks[0].params::<f64>()?;
    Ok(match time_horizon(s.initial_density.sup(), &p).1 {
        Horizon::Bounded(t) => s.horizon.min(t * (1.0 - 1e-9)),
        Horizon::Unbounded => s.horizon,
        Horizon::Unverifiable => 0.0,
    })
}

/// Runs every rung in parallel and keeps the prefix that succeeded.
fn rungs<R: Send>(labels: &[String], f: impl Fn(usize) -> Result<R> + Send + Sync) -> (Vec<R>, Option<String>) {
    let all: Vec<Result<R>> = (0..labels.len()).into_par_iter().map(f).collect();
    let mut ok = Vec::with_capacity(labels.len());
    for (k, r) in all.into_iter().enumerate() {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => return (ok, Some(format!("{}: {e}", labels[k]))),
        }
    }
    (ok, None)
}

fn wft_refinement(spec: &StudySpec, nus: &[u32]) -> StudyReport {
    let s = &spec.scenario;
    let mut report = StudyReport::new(spec.kind, s);
    let labels: Vec<String> = nus.iter().map(|n| format!("nu = {n}")).collect();
    let (paths, err) = rungs(&labels, |k| {
        let mut sk = s.clone();
        sk.numerics.nu = nus[k];
        wft::run_wft_path::<f64>(&sk).map(|(_, p)| p)
    });
    report.rungs = nus[..paths.len()].iter().map(|&n| n as f64).collect();
    report.gaps = paths.windows(2).map(|w| path_gap(&w[0], &w[1])).collect();
    report.error = err;
    report.checks.push(Check::at_most(
        "geometric_ratio",
        geometric_ratio(&report.gaps),
        spec.tolerance,
    ));
    report.finish()
}

fn with_dx(s: &Scenario, dx: f64) -> Scenario {
    let mut out = s.clone();
    // keep dt / dx fixed when the scenario pins the step
    out.numerics.dt = s.numerics.dt.map(|dt| dt * dx / s.numerics.dx);
    out.numerics.dx = dx;
    out
}

fn gof_refinement(spec: &StudySpec, dxs: &[f64]) -> StudyReport {
    let s = &spec.scenario;
    let mut report = StudyReport::new(spec.kind, s);
    let labels: Vec<String> = dxs.iter().map(|d| format!("dx = {d}")).collect();
    let (finals, err) = rungs(&labels, |k| {
        let sk = with_dx(s, dxs[k]);
        sk.validate()?;
        gof::run::<f64>(&sk, Scheme::Conservative).map(|r| r.final_state.values)
    });
    report.rungs = dxs[..finals.len()].to_vec();
    report.gaps = finals
        .windows(2)
        .zip(dxs.windows(2))
        .map(|(u, h)| {
            let factor = (h[0] / h[1]).round() as usize;
            l1_distance(&u[0], &coarsen(&u[1], factor), h[0])
        })
        .collect();
    report.error = err;
    let hs = &dxs[..report.gaps.len()];
    report.checks.push(Check::at_least(
        "observed_order",
        observed_order(hs, &report.gaps),
        spec.tolerance,
    ));
    report.finish()
}

/// L¹ distance at `T` and uniform trajectory gap between the front-tracking
/// run and the conservative Godunov run of the same scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossRuns {
    pub wft: RunRecord,
    pub wft_path: Vec<(f64, f64)>,
    pub gof: RunRecord,
}

pub fn cross_runs(s: &Scenario) -> Result<CrossRuns> {
    let (w, g) = rayon::join(
        || wft::run_wft_path::<f64>(s),
        || gof::run::<f64>(s, Scheme::Conservative),
    );
    let (wft, wft_path) = w?;
    Ok(CrossRuns { wft, wft_path, gof: g? })
}

fn cross_validate(spec: &StudySpec) -> StudyReport {
    let s = &spec.scenario;
    let mut report = StudyReport::new(spec.kind, s);
    match cross_runs(s) {
        Ok(c) => {
            let dx = s.numerics.dx;
            let tv0 = s.initial_density.total_variation();
            let l1 = l1_distance(&c.wft.final_state.values, &c.gof.final_state.values, dx);
            let gof_path: Vec<(f64, f64)> = c.gof.traj_t.iter().copied().zip(c.gof.trajectory(0)).collect();
            let gap = path_gap(&c.wft_path, &gof_path);
            report.rungs = vec![s.numerics.nu as f64];
            report
                .checks
                .push(Check::at_most("l1_at_T", Some(l1), spec.tolerance * dx * tv0));
            report
                .checks
                .push(Check::at_most("trajectory_gap", Some(gap), 3.0 * dx));
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    report.finish()
}

/// Runs a study. Invalid specifications are errors; a rung that fails
/// yields a partial report with `error` set.
pub fn converge(spec: &StudySpec) -> Result<StudyReport> {
    spec.check()?;
    Ok(match (&spec.kind, &spec.ladder) {
        (StudyKind::WftRefinement, Ladder::Nu(nus)) => wft_refinement(spec, nus),
        (StudyKind::GofRefinement, Ladder::Dx(dxs)) => gof_refinement(spec, dxs),
        (StudyKind::CrossValidate, _) => cross_validate(spec),
        _ => {
            let mut report = StudyReport::new(spec.kind, &spec.scenario);
            match gof::run::<f64>(&spec.scenario, Scheme::Conservative) {
                Ok(r) => report
                    .checks
                    .push(Check::at_most("mass_drift", Some(r.summary.mass_drift_max), 1e-12)),
                Err(e) => report.error = Some(e.to_string()),
            }
            report.finish()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{builtin, InitialDensity};

    #[test]
    fn constant_datum_gaps_vanish() {
        let mut s = builtin("fig5").unwrap();
        s.initial_density = InitialDensity::PiecewiseConstant {
            breakpoints: vec![],
            values: vec![0.0],
        };
        s.horizon = 0.1;
        let r = converge(&StudySpec::wft_refinement(s, vec![3, 4, 5])).unwrap();
        assert_eq!(r.gaps, vec![0.0, 0.0]);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn ladders_are_checked() {
        let s = builtin("fig6").unwrap();
        assert!(converge(&StudySpec::wft_refinement(s.clone(), vec![4])).is_err());
        assert!(converge(&StudySpec::wft_refinement(s.clone(), vec![5, 4])).is_err());
        assert!(converge(&StudySpec::gof_refinement(s.clone(), vec![0.02, 0.03])).is_err());
        assert!(converge(&StudySpec::gof_refinement(s, vec![0.04, 0.03])).is_err());
    }

    #[test]
    fn failing_rung_gives_partial_report() {
        // a pinned step of 0.05 at dx = 0.02 breaks the CFL bound on the first rung
        let mut s = builtin("fig6").unwrap();
        s.horizon = 0.2;
        s.numerics.dt = Some(0.05);
        let spec = StudySpec::gof_refinement(s, vec![0.02, 0.01]);
        let r = converge(&spec).unwrap();
        assert!(r.error.is_some());
        assert!(!r.pass);
        assert!(r.rungs.is_empty());
    }

    #[test]
    fn horizon_bound_for_fig5() {
        let s = builtin("fig5").unwrap();
        let t = horizon_within_bound(&s).unwrap();
        assert!(t > 0.03 && t < 0.034, "{t}");
    }
}
