//! Post-processing shared by the studies, the validation suite and the
//! acceptance checks: shock tracking, trajectory comparison, rate fits.

use crate::record::RunRecord;

/// Least-squares slope of `ys` against `ts`. `None` with fewer than two
/// distinct abscissae.
pub fn least_squares_slope(ts: &[f64], ys: &[f64]) -> Option<f64> {
    let n = ts.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mt = ts[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for k in 0..n {
        sxy += (ts[k] - mt) * (ys[k] - my);
        sxx += (ts[k] - mt) * (ts[k] - mt);
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Leftmost point where the cell values cross `level` upwards, linearly
/// interpolated between cell centers.
pub fn upward_crossing(values: &[f64], x0: f64, dx: f64, level: f64) -> Option<f64> {
    values.windows(2).enumerate().find_map(|(m, w)| {
        (w[0] < level && w[1] >= level).then(|| {
            let c = x0 + (m as f64 + 0.5) * dx;
            c + dx * (level - w[0]) / (w[1] - w[0])
        })
    })
}

/// Tracked position of a shock joining `rho_l` to `rho_r > rho_l` in every
/// snapshot: the leftmost upward crossing of `rho_l + 0.9 (rho_r − rho_l)`.
/// The level sits close to the right state so that queues of intermediate
/// density upstream of a vehicle are not mistaken for the shock.
pub fn track_shock(record: &RunRecord, rho_l: f64, rho_r: f64) -> Vec<(f64, Option<f64>)> {
    let level = rho_l + 0.9 * (rho_r - rho_l);
    record
        .snapshots
        .iter()
        .map(|s| (s.t, upward_crossing(&s.values, record.x0, record.dx, level)))
        .collect()
}

/// Upward crossings of `level`, interpolated as in [`upward_crossing`].
pub fn upward_crossings(values: &[f64], x0: f64, dx: f64, level: f64) -> Vec<f64> {
    values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] < level && w[1] >= level)
        .map(|(m, w)| x0 + (m as f64 + 0.5) * dx + dx * (level - w[0]) / (w[1] - w[0]))
        .collect()
}

/// Follows the mid-level crossing `(rho_l + rho_r)/2` from `x_start`,
/// taking in each snapshot the crossing nearest the previous position.
pub fn follow_shock(record: &RunRecord, rho_l: f64, rho_r: f64, x_start: f64) -> Vec<(f64, Option<f64>)> {
    let level = 0.5 * (rho_l + rho_r);
    let mut prev = x_start;
    record
        .snapshots
        .iter()
        .map(|s| {
            let near = upward_crossings(&s.values, record.x0, record.dx, level)
                .into_iter()
                .min_by(|a, b| (a - prev).abs().partial_cmp(&(b - prev).abs()).unwrap());
            if let Some(x) = near {
                prev = x;
            }
            (s.t, near)
        })
        .collect()
}

/// Index of the first snapshot in which the states on either side of the
/// followed shock, sampled `offset` cells away, have moved more than `tol`
/// from `rho_l` / `rho_r`: the end of the pre-interaction phase.
pub fn undisturbed_until(
    record: &RunRecord,
    shock: &[(f64, Option<f64>)],
    rho_l: f64,
    rho_r: f64,
    offset: usize,
    tol: f64,
) -> usize {
    for (k, (s, &(_, xs))) in record.snapshots.iter().zip(shock).enumerate() {
        let Some(x) = xs else { return k };
        let m = ((x - record.x0) / record.dx).floor() as isize;
        let at = |j: isize| s.values.get(j.clamp(0, s.values.len() as isize - 1) as usize).copied();
        let (l, r) = (at(m - offset as isize), at(m + 1 + offset as isize));
        let ok = matches!((l, r), (Some(l), Some(r)) if (l - rho_l).abs() <= tol && (r - rho_r).abs() <= tol);
        if !ok {
            return k;
        }
    }
    shock.len()
}

/// A maximal time interval with the shock inside a vehicle's support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionWindow {
    pub vehicle: usize,
    pub t0: f64,
    pub t1: f64,
    /// Snapshot indices `[k0, k1]`.
    pub k0: usize,
    pub k1: usize,
}

/// Intervals during which `|x_s − y_i| ≤ β_i + margin`. Needs one snapshot
/// per trajectory sample (stride 1).
pub fn interaction_windows(
    record: &RunRecord,
    shock: &[(f64, Option<f64>)],
    betas: &[f64],
    margin: f64,
) -> Vec<InteractionWindow> {
    let mut out = Vec::new();
    for (i, &beta) in betas.iter().enumerate() {
        let mut open: Option<usize> = None;
        for (k, &(_, xs)) in shock.iter().enumerate() {
            let y = record.traj_y.get(k).map(|row| row[i]);
            let inside = matches!((xs, y), (Some(x), Some(y)) if (x - y).abs() <= beta + margin);
            match (inside, open) {
                (true, None) => open = Some(k),
                (false, Some(k0)) => {
                    out.push(window(i, k0, k - 1, shock));
                    open = None;
                }
                _ => {}
            }
        }
        if let Some(k0) = open {
            out.push(window(i, k0, shock.len() - 1, shock));
        }
    }
    out.sort_by(|a, b| a.t0.partial_cmp(&b.t0).unwrap());
    out
}

fn window(vehicle: usize, k0: usize, k1: usize, shock: &[(f64, Option<f64>)]) -> InteractionWindow {
    InteractionWindow {
        vehicle,
        t0: shock[k0].0,
        t1: shock[k1].0,
        k0,
        k1,
    }
}

/// Least-squares shock speed over snapshots `k0..=k1`, skipping those where
/// the shock was not found.
pub fn shock_speed(shock: &[(f64, Option<f64>)], k0: usize, k1: usize) -> Option<f64> {
    let (ts, xs): (Vec<f64>, Vec<f64>) = shock[k0..=k1.min(shock.len() - 1)]
        .iter()
        .filter_map(|&(t, x)| x.map(|x| (t, x)))
        .unzip();
    least_squares_slope(&ts, &xs)
}

/// Forward differences `(y_{k+1} − y_k) / (t_{k+1} − t_k)`.
pub fn finite_speeds(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    ts.windows(2)
        .zip(ys.windows(2))
        .map(|(t, y)| (y[1] - y[0]) / (t[1] - t[0]))
        .collect()
}

/// Piecewise-linear interpolation through `(t, y)` knots, constant beyond the ends.
pub fn interpolate(path: &[(f64, f64)], t: f64) -> f64 {
    let k = path.partition_point(|p| p.0 <= t);
    if k == 0 {
        return path[0].1;
    }
    if k == path.len() {
        return path[k - 1].1;
    }
    let (a, b) = (path[k - 1], path[k]);
    if b.0 == a.0 {
        return b.1;
    }
    a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
}

/// `sup_t |a(t) − b(t)|` for piecewise-linear paths; exact, since the
/// supremum of the difference sits at a knot of one of them.
pub fn path_gap(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    a.iter()
        .chain(b)
        .map(|&(t, _)| (interpolate(a, t) - interpolate(b, t)).abs())
        .fold(0.0, f64::max)
}

/// Uniform gap between the sampled trajectories of vehicle `i` in two runs,
/// each treated as piecewise linear between samples.
pub fn trajectory_gap(a: &RunRecord, b: &RunRecord, i: usize) -> f64 {
    let pa: Vec<(f64, f64)> = a.traj_t.iter().copied().zip(a.trajectory(i)).collect();
    let pb: Vec<(f64, f64)> = b.traj_t.iter().copied().zip(b.trajectory(i)).collect();
    path_gap(&pa, &pb)
}

/// `Σ |a_m − b_m| dx` on a common grid.
pub fn l1_distance(a: &[f64], b: &[f64], dx: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * dx
}

/// Averages groups of `factor` fine cells onto the coarse grid.
pub fn coarsen(fine: &[f64], factor: usize) -> Vec<f64> {
    fine.chunks_exact(factor)
        .map(|c| c.iter().sum::<f64>() / factor as f64)
        .collect()
}

/// Geometric ratio `r` of a least-squares fit `log g_k ≈ a + k log r`.
/// All-zero gaps give `0`; zero entries among positive ones are floored at
/// the smallest positive normal.
pub fn geometric_ratio(gaps: &[f64]) -> Option<f64> {
    if gaps.len() < 2 {
        return None;
    }
    if gaps.iter().all(|&g| g == 0.0) {
        return Some(0.0);
    }
    let ks: Vec<f64> = (0..gaps.len()).map(|k| k as f64).collect();
    let logs: Vec<f64> = gaps.iter().map(|g| g.max(f64::MIN_POSITIVE).ln()).collect();
    least_squares_slope(&ks, &logs).map(f64::exp)
}

/// Observed order `p` of `e ≈ C h^p` by least squares in log–log.
pub fn observed_order(hs: &[f64], errors: &[f64]) -> Option<f64> {
    if errors.iter().any(|&e| !(e > 0.0)) {
        return None;
    }
    let lh: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let le: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    least_squares_slope(&lh, &le)
}

/// Maximal runs of samples where `gap[k] ≤ floor + tol`, as index pairs.
pub fn runs_at_minimum(gap: &[f64], tol: f64) -> Vec<(usize, usize)> {
    let floor = gap.iter().copied().fold(f64::INFINITY, f64::min);
    let mut out = Vec::new();
    let mut start = None;
    for (k, &g) in gap.iter().enumerate() {
        match (g <= floor + tol, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                out.push((s, k - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, gap.len() - 1));
    }
    out
}
