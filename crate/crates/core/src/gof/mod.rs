//! Godunov fractional-step solver.
//!
//! Each step first updates the densities with the vehicles frozen
//! (conservative flux differences, capacity `Φ` sampled at the interfaces),
//! then moves the vehicles through the updated densities.

mod grid;
mod vehicles;

pub use grid::DensityGrid;
pub use vehicles::{
    advance_bottlenecks_model_a, advance_bottlenecks_model_b, advance_single_bottleneck, interpolated_speed,
    min_ordering_gap, Advance, Path,
};

use crate::error::{Error, Result};
use crate::model::{check_density, unit_flux, validity_report, BottleneckParams, Horizon};
use crate::record::{DiagRow, RunRecord, Snapshot, Summary};
use crate::riemann::godunov_flux_raw;
use crate::scalar::Scalar;
use crate::scenario::{ModelSelector, Scenario};

/// Vehicle positions (ascending for Model B) and their parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct BottleneckState<T> {
    pub positions: Vec<T>,
    pub params: Vec<BottleneckParams<T>>,
}

impl<T: Scalar> BottleneckState<T> {
    pub fn new(positions: Vec<T>, params: Vec<BottleneckParams<T>>) -> Result<Self> {
        if positions.is_empty() || positions.len() != params.len() {
            return Err(Error::InvalidParams(
                "need one parameter set per vehicle and at least one vehicle".into(),
            ));
        }
        Ok(Self { positions, params })
    }

    pub fn from_scenario(s: &Scenario) -> Result<Self> {
        let params = s.bottlenecks.iter().map(|b| b.params()).collect::<Result<Vec<_>>>()?;
        let positions = s.bottlenecks.iter().map(|b| T::lit(b.position)).collect();
        Self::new(positions, params)
    }
}

/// Capacity factor at `x`: `φ(x − y)` for one vehicle, the minimum over
/// vehicles for Model A, the product for Model B.
pub fn combined_phi<T: Scalar>(x: T, b: &BottleneckState<T>, model: ModelSelector) -> T {
    let mut it = b.positions.iter().zip(&b.params).map(|(&y, p)| p.phi.eval(x - y));
    match model {
        ModelSelector::Single => it.next().expect("one vehicle"),
        ModelSelector::MultiA => it.fold(T::infinity(), T::min),
        ModelSelector::MultiB => it.fold(T::one(), |a, v| a * v),
    }
}

/// `∂_x Φ(x)`; for Model A the derivative of the active (smallest) factor.
pub fn combined_phi_prime<T: Scalar>(x: T, b: &BottleneckState<T>, model: ModelSelector) -> T {
    let vals = || {
        b.positions
            .iter()
            .zip(&b.params)
            .map(move |(&y, p)| (p.phi.eval(x - y), p.phi.prime(x - y)))
    };
    match model {
        ModelSelector::Single => vals().next().expect("one vehicle").1,
        ModelSelector::MultiA => {
            vals()
                .fold(
                    (T::infinity(), T::zero()),
                    |best, v| if v.0 < best.0 { v } else { best },
                )
                .1
        }
        ModelSelector::MultiB => {
            let v: Vec<(T, T)> = vals().collect();
            (0..v.len())
                .map(|i| {
                    v.iter()
                        .enumerate()
                        .fold(T::one(), |a, (j, f)| a * if i == j { f.1 } else { f.0 })
                })
                .fold(T::zero(), |a, d| a + d)
        }
    }
}

/// Supremum of `Φ` over the line.
pub fn phi_sup<T: Scalar>(b: &BottleneckState<T>, model: ModelSelector) -> T {
    let v = b.params.iter().map(|p| p.phi.v_bar);
    match model {
        ModelSelector::Single | ModelSelector::MultiA => v.fold(T::zero(), T::max),
        ModelSelector::MultiB => v.fold(T::one(), |a, x| a * x),
    }
}

/// `safety · dx / (2 Φ_sup)`.
pub fn cfl_dt<T: Scalar>(grid: &DensityGrid<T>, b: &BottleneckState<T>, model: ModelSelector, safety: T) -> T {
    safety * grid.dx / (T::two() * phi_sup(b, model))
}

/// Rejects steps above the CFL bound, and steps long enough for a vehicle to
/// cross more than one interface.
pub fn check_dt<T: Scalar>(grid: &DensityGrid<T>, b: &BottleneckState<T>, model: ModelSelector, dt: T) -> Result<()> {
    let limit = cfl_dt(grid, b, model, T::one());
    if !(dt > T::zero()) || dt > limit * (T::one() + T::rel_tol(1e-12)) {
        return Err(Error::Cfl {
            dt: dt.to_f64_lossy(),
            limit: limit.to_f64_lossy(),
        });
    }
    let w = b.params.iter().map(|p| p.w_max).fold(T::zero(), T::max);
    if !(w * dt < grid.dx) {
        return Err(Error::Cfl {
            dt: dt.to_f64_lossy(),
            limit: (grid.dx / w).to_f64_lossy(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Conservative flux differences with `Φ` at the interfaces.
    Conservative,
    /// Homogeneous Godunov with `Φ` frozen at cell centers, then an explicit
    /// Euler update with the source `−ρ(1−ρ)Φ′`.
    Split,
}

/// Snaps values within a few ulps of `[0, 1]` onto it; rejects the rest.
fn admit<T: Scalar>(v: T, m: usize) -> Result<T> {
    let tol = T::lit(8.0) * T::epsilon();
    if v < T::zero() && v > -tol {
        Ok(T::zero())
    } else if v > T::one() && v < T::one() + tol {
        Ok(T::one())
    } else {
        check_density(v, &format!("cell {m} after density step"))?;
        Ok(v)
    }
}

/// Conservative update with vehicles frozen. Returns the new grid and the
/// boundary fluxes `[F_in, F_out]`.
pub fn density_step<T: Scalar>(
    grid: &DensityGrid<T>,
    b: &BottleneckState<T>,
    model: ModelSelector,
    dt: T,
) -> Result<(DensityGrid<T>, [T; 2])> {
    check_dt(grid, b, model, dt)?;
    let n = grid.len();
    let lambda = dt / grid.dx;
    let flux: Vec<T> = (0..=n)
        .map(|k| {
            let phi = combined_phi(grid.interface(k), b, model);
            godunov_flux_raw(grid.value(k as isize - 1), grid.value(k as isize), phi)
        })
        .collect();
    let cells = (0..n)
        .map(|m| admit(grid.cells[m] - lambda * (flux[m + 1] - flux[m]), m))
        .collect::<Result<Vec<_>>>()?;
    Ok((grid.with_cells(cells), [flux[0], flux[n]]))
}

/// Split update. The source step is sub-cycled so that each Euler substep
/// satisfies `h |Φ′| ≤ ½`, which keeps the logistic-type map inside `[0, 1]`.
pub fn density_step_split<T: Scalar>(
    grid: &DensityGrid<T>,
    b: &BottleneckState<T>,
    model: ModelSelector,
    dt: T,
) -> Result<(DensityGrid<T>, [T; 2])> {
    check_dt(grid, b, model, dt)?;
    let n = grid.len();
    let lambda = dt / grid.dx;
    let unit: Vec<T> = (0..=n)
        .map(|k| godunov_flux_raw(grid.value(k as isize - 1), grid.value(k as isize), T::one()))
        .collect();
    let centers: Vec<T> = (0..n).map(|m| grid.center(m)).collect();
    let phi: Vec<T> = centers.iter().map(|&x| combined_phi(x, b, model)).collect();
    let dphi: Vec<T> = centers.iter().map(|&x| combined_phi_prime(x, b, model)).collect();
    let sup = dphi.iter().fold(T::zero(), |a, d| a.max(d.abs()));
    let subs = (dt * sup / T::half()).ceil().to_usize().unwrap_or(1).max(1);
    let h = dt / T::lit(subs as f64);
    let mut cells = Vec::with_capacity(n);
    for m in 0..n {
        let mut r = admit(grid.cells[m] - lambda * phi[m] * (unit[m + 1] - unit[m]), m)?;
        for _ in 0..subs {
            r = admit(r - h * unit_flux(r) * dphi[m], m)?;
        }
        cells.push(r);
    }
    let out = [
        unit[0] * combined_phi(grid.interface(0), b, model),
        unit[n] * combined_phi(grid.interface(n), b, model),
    ];
    Ok((grid.with_cells(cells), out))
}

/// One simulation: densities, vehicles and the clock.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState<T> {
    pub t: T,
    pub grid: DensityGrid<T>,
    pub bottlenecks: BottleneckState<T>,
    pub model: ModelSelector,
    pub step_index: usize,
}

/// What a step did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport<T> {
    /// `mass_new − mass_old − dt (F_in − F_out)`.
    pub mass_defect: T,
    /// A vehicle left the domain; positions were not updated.
    pub exited: bool,
}

impl<T: Scalar> SimState<T> {
    pub fn from_scenario(s: &Scenario) -> Result<Self> {
        s.validate()?;
        let grid = DensityGrid::from_initial(&s.initial_density, s.domain[0], s.numerics.dx, s.cells(), s.boundary)?;
        Ok(Self {
            t: T::zero(),
            grid,
            bottlenecks: BottleneckState::from_scenario(s)?,
            model: s.model,
            step_index: 0,
        })
    }

    pub fn step(&mut self, dt: T, scheme: Scheme) -> Result<StepReport<T>> {
        let before = self.grid.mass();
        let (grid, [f_in, f_out]) = match scheme {
            Scheme::Conservative => density_step(&self.grid, &self.bottlenecks, self.model, dt)?,
            Scheme::Split => density_step_split(&self.grid, &self.bottlenecks, self.model, dt)?,
        };
        let mass_defect = grid.mass() - before - dt * (f_in - f_out);
        let b = &self.bottlenecks;
        let moved = match self.model {
            ModelSelector::Single | ModelSelector::MultiA => {
                advance_bottlenecks_model_a(&b.positions, &b.params, &grid, dt)?
            }
            ModelSelector::MultiB => advance_bottlenecks_model_b(&b.positions, &b.params, &grid, dt)?,
        };
        self.grid = grid;
        self.t = self.t + dt;
        self.step_index += 1;
        let exited = match moved {
            Some(p) => {
                self.bottlenecks.positions = p;
                false
            }
            None => true,
        };
        Ok(StepReport { mass_defect, exited })
    }
}

fn f64s<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64_lossy()).collect()
}

/// Step count and step length covering `[0, T]`; the last step is shortened
/// when `T` is not a whole number of steps.
pub(crate) fn step_plan(horizon: f64, dt: f64) -> (usize, f64) {
    if horizon <= 0.0 {
        return (0, dt);
    }
    ((horizon / dt - 1e-9).ceil().max(1.0) as usize, dt)
}

pub(crate) fn step_time(k: usize, n: usize, dt: f64, horizon: f64) -> f64 {
    if k == n {
        horizon
    } else {
        k as f64 * dt
    }
}

/// Runs the scenario to its horizon.
pub fn run<T: Scalar>(s: &Scenario, scheme: Scheme) -> Result<RunRecord> {
    let mut st = SimState::<T>::from_scenario(s)?;
    let dt = match s.numerics.dt {
        Some(dt) => dt,
        None => cfl_dt(&st.grid, &st.bottlenecks, st.model, T::lit(s.numerics.safety)).to_f64_lossy(),
    };
    check_dt(&st.grid, &st.bottlenecks, st.model, T::lit(dt))?;
    let (n, dt) = step_plan(s.horizon, dt);
    let stride = s.numerics.stride;
    let sup = phi_sup(&st.bottlenecks, st.model).to_f64_lossy();
    let gap = |st: &SimState<T>| {
        (st.model == ModelSelector::MultiB)
            .then(|| min_ordering_gap(&st.bottlenecks.positions, &st.bottlenecks.params))
            .flatten()
            .map(|g| g.to_f64_lossy())
    };
    let mut summary = Summary {
        solver: match scheme {
            Scheme::Conservative => "gof".into(),
            Scheme::Split => "gof-split".into(),
        },
        dt,
        ..Summary::default()
    };
    if st.model == ModelSelector::Single {
        let p = &st.bottlenecks.params[0];
        let rep = validity_report(T::lit(s.initial_density.inf()), T::lit(s.initial_density.sup()), p);
        summary.mu = Some(rep.mu.to_f64_lossy());
        summary.eta = Some(rep.eta.to_f64_lossy());
        if let Horizon::Bounded(t) = rep.t_max {
            summary.t_max = Some(t.to_f64_lossy());
        }
    }
    let snapshot = |st: &SimState<T>, t: f64| Snapshot {
        t,
        values: f64s(&st.grid.cells),
    };
    let diag = |st: &SimState<T>, t: f64, this_dt: f64| DiagRow {
        t,
        mass: st.grid.mass().to_f64_lossy(),
        tv: st.grid.total_variation().to_f64_lossy(),
        cfl: this_dt * sup / s.numerics.dx,
        events: 0,
        min_gap: gap(st),
    };
    let mut traj_t = vec![0.0];
    let mut traj_y = vec![f64s(&st.bottlenecks.positions)];
    let mut snapshots = vec![snapshot(&st, 0.0)];
    let mut diagnostics = vec![diag(&st, 0.0, 0.0)];
    let mut min_gap = gap(&st);
    let mut near_boundary = false;
    summary.completed = true;
    for k in 1..=n {
        let t_prev = step_time(k - 1, n, dt, s.horizon);
        let t = step_time(k, n, dt, s.horizon);
        let this_dt = t - t_prev;
        let rep = st.step(T::lit(this_dt), scheme).map_err(|e| e.at(t_prev))?;
        summary.steps = k;
        if scheme == Scheme::Conservative {
            summary.mass_drift_max = summary.mass_drift_max.max(rep.mass_defect.to_f64_lossy().abs());
        }
        if rep.exited {
            summary.completed = false;
            summary.stopped_at = Some(t);
            summary.warnings.push(format!(
                "a bottleneck left the domain during the step ending at t = {t}"
            ));
            traj_t.push(t);
            traj_y.push(f64s(&st.bottlenecks.positions));
            diagnostics.push(diag(&st, t, this_dt));
            break;
        }
        st.t = T::lit(t);
        if let Some(g) = gap(&st) {
            min_gap = Some(min_gap.map_or(g, |m: f64| m.min(g)));
        }
        if !near_boundary && wave_near_boundary(&st.grid) {
            near_boundary = true;
            summary
                .warnings
                .push(format!("a wave came within 5 cells of the boundary by t = {t}"));
        }
        traj_t.push(t);
        traj_y.push(f64s(&st.bottlenecks.positions));
        diagnostics.push(diag(&st, t, this_dt));
        if k % stride == 0 {
            snapshots.push(snapshot(&st, t));
        }
    }
    summary.min_gap = min_gap;
    let t_end = *traj_t.last().expect("initial row");
    Ok(RunRecord {
        x0: s.domain[0],
        dx: s.numerics.dx,
        traj_t,
        traj_y,
        snapshots,
        final_state: snapshot(&st, t_end),
        diagnostics,
        summary,
    })
}

fn wave_near_boundary<T: Scalar>(g: &DensityGrid<T>) -> bool {
    let [gl, gr] = g.ghosts();
    let tol = T::lit(1e-9);
    let n = g.len();
    let k = 5.min(n);
    g.cells[..k].iter().any(|&v| (v - gl).abs() > tol) || g.cells[n - k..].iter().any(|&v| (v - gr).abs() > tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PhiProfile;
    use crate::scenario::{builtin, Boundary};

    fn one_vehicle(y: f64) -> BottleneckState<f64> {
        let p = BottleneckParams::new(0.4, PhiProfile::exp_bump(1.0, 0.6, 0.1).unwrap()).unwrap();
        BottleneckState::new(vec![y], vec![p]).unwrap()
    }

    #[test]
    fn combined_phi_examples() {
        let p = BottleneckParams::new(0.4, PhiProfile::exp_bump(1.0, 0.5, 0.25).unwrap()).unwrap();
        let two = BottleneckState::new(vec![1.0, 1.0], vec![p.clone(), p.clone()]).unwrap();
        assert_eq!(combined_phi(1.0, &two, ModelSelector::MultiA), 0.5);
        assert_eq!(combined_phi(1.0, &two, ModelSelector::MultiB), 0.25);
        assert_eq!(combined_phi(3.0, &two, ModelSelector::MultiA), 1.0);
        assert_eq!(combined_phi(3.0, &two, ModelSelector::MultiB), 1.0);
        let apart = BottleneckState::new(vec![1.0, 2.0], vec![p.clone(), p]).unwrap();
        for k in 0..100 {
            let x = 0.5 + 2.0 * k as f64 / 100.0;
            let fd = (combined_phi(x + 1e-7, &apart, ModelSelector::MultiB)
                - combined_phi(x - 1e-7, &apart, ModelSelector::MultiB))
                / 2e-7;
            let d = combined_phi_prime(x, &apart, ModelSelector::MultiB);
            assert!((d - fd).abs() < 1e-5 * (1.0 + d.abs()), "x={x}");
        }
    }

    #[test]
    fn cfl_examples() {
        let g = DensityGrid::new(0.0, 0.02, vec![0.5; 10], Boundary::Outflow).unwrap();
        let b = one_vehicle(0.1);
        assert!((cfl_dt(&g, &b, ModelSelector::Single, 1.0) - 0.01).abs() < 1e-17);
        assert!((cfl_dt(&g, &b, ModelSelector::Single, 0.5) - 0.005).abs() < 1e-17);
        assert!(check_dt(&g, &b, ModelSelector::Single, 0.01).is_ok());
        assert!(matches!(
            check_dt(&g, &b, ModelSelector::Single, 0.0101),
            Err(Error::Cfl { .. })
        ));
    }

    #[test]
    fn uniform_and_jammed_are_steady() {
        let b = one_vehicle(10.0);
        for rho in [0.3, 1.0] {
            let g = DensityGrid::new(0.0, 0.02, vec![rho; 50], Boundary::DirichletFrozen).unwrap();
            let (g2, _) = density_step(&g, &b, ModelSelector::Single, 0.01).unwrap();
            assert_eq!(g2.cells, g.cells);
        }
    }

    #[test]
    fn riemann_datum_one_step() {
        let b = one_vehicle(10.0);
        let mut cells = vec![0.3; 20];
        for c in &mut cells[10..] {
            *c = 0.9;
        }
        let g = DensityGrid::new(0.0, 0.02, cells, Boundary::DirichletFrozen).unwrap();
        let (g2, _) = density_step(&g, &b, ModelSelector::Single, 0.01).unwrap();
        // left of the jump: in 0.21, out 0.09; right of it: in 0.09, out 0.09
        assert!((g2.cells[9] - (0.3 - 0.5 * (0.09 - 0.21))).abs() < 1e-15);
        assert_eq!(g2.cells[10], 0.9);
        assert_eq!(g2.cells[8], 0.3);
    }

    #[test]
    fn capacity_drop_builds_queue() {
        let rho0 = 0.3;
        let g = DensityGrid::new(0.0, 0.02, vec![rho0; 100], Boundary::DirichletFrozen).unwrap();
        let b = one_vehicle(1.0);
        let mut g = g;
        for _ in 0..5 {
            g = density_step(&g, &b, ModelSelector::Single, 0.01).unwrap().0;
        }
        let m = g.locate(1.0).unwrap() as usize;
        assert!(g.cells[m - 3] > rho0, "{:?}", &g.cells[m - 6..m + 2]);
    }

    #[test]
    fn run_zero_horizon() {
        let mut s = builtin("fig5").unwrap();
        s.horizon = 0.0;
        let r = run::<f64>(&s, Scheme::Conservative).unwrap();
        assert_eq!(r.traj_t, vec![0.0]);
        assert_eq!(r.snapshots.len(), 1);
    }

    #[test]
    fn fig5_initial_speed() {
        let r = run::<f64>(&builtin("fig5").unwrap(), Scheme::Conservative).unwrap();
        assert_eq!(r.traj_y[0][0], 0.5);
        let v = (r.traj_y[10][0] - r.traj_y[0][0]) / r.traj_t[10];
        assert!((v - 0.04).abs() < 0.005, "{v}");
        assert_eq!(r.snapshots.len(), 31);
        assert!(r.summary.mass_drift_max < 1e-12);
    }

    #[test]
    fn split_runs() {
        let r = run::<f64>(&builtin("fig5").unwrap(), Scheme::Split).unwrap();
        assert!(r.summary.completed);
    }

    #[test]
    fn reductions_are_bit_identical() {
        let s = builtin("fig7").unwrap();
        let single = run::<f64>(&s, Scheme::Conservative).unwrap();
        for model in [ModelSelector::MultiA, ModelSelector::MultiB] {
            let mut m = s.clone();
            m.model = model;
            let r = run::<f64>(&m, Scheme::Conservative).unwrap();
            assert_eq!(r.traj_y, single.traj_y);
            assert_eq!(r.final_state, single.final_state);
        }
    }
}
