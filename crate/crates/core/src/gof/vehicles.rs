//! Bottleneck position updates (Step 2 / Steps 2–3 of the fractional-step scheme).

use super::grid::DensityGrid;
use crate::error::{Error, Result};
use crate::model::{bottleneck_speed, BottleneckParams};
use crate::scalar::Scalar;

/// Piecewise-linear path on `[0, dt]` given by its knots.
#[derive(Debug, Clone, PartialEq)]
pub struct Path<T> {
    pub knots: Vec<(T, T)>,
}

impl<T: Scalar> Path<T> {
    pub fn end(&self) -> T {
        self.knots[self.knots.len() - 1].1
    }

    pub fn eval(&self, t: T) -> T {
        let k = &self.knots;
        if t <= k[0].0 {
            return k[0].1;
        }
        for w in k.windows(2) {
            if t <= w[1].0 {
                let span = w[1].0 - w[0].0;
                if span <= T::zero() {
                    return w[1].1;
                }
                return w[0].1 + (w[1].1 - w[0].1) * (t - w[0].0) / span;
            }
        }
        k[k.len() - 1].1
    }

    pub fn shifted(&self, by: T) -> Self {
        Self {
            knots: self.knots.iter().map(|&(t, y)| (t, y + by)).collect(),
        }
    }

    /// Pointwise minimum, with the crossing points inserted as knots.
    pub fn min(&self, other: &Self) -> Self {
        let mut times: Vec<T> = self.knots.iter().chain(&other.knots).map(|k| k.0).collect();
        times.sort_by(|a, b| a.partial_cmp(b).expect("finite knot times"));
        times.dedup();
        let mut knots: Vec<(T, T)> = Vec::with_capacity(times.len() + 2);
        for (j, &t) in times.iter().enumerate() {
            let (a, b) = (self.eval(t), other.eval(t));
            if j > 0 {
                let s = times[j - 1];
                let (pa, pb) = (self.eval(s), other.eval(s));
                let (d0, d1) = (pa - pb, a - b);
                if (d0 < T::zero() && d1 > T::zero()) || (d0 > T::zero() && d1 < T::zero()) {
                    let tc = s + (t - s) * d0 / (d0 - d1);
                    knots.push((tc, self.eval(tc).min(other.eval(tc))));
                }
            }
            knots.push((t, a.min(b)));
        }
        Self { knots }
    }
}

/// Outcome of moving one vehicle for one step.
#[derive(Debug, Clone, PartialEq)]
pub enum Advance<T> {
    Moved(Path<T>),
    /// The vehicle left the computational domain.
    Exited,
}

/// Moves one vehicle through the updated densities: speed `w(ρ)` of its
/// own cell until it reaches the right interface, then `w` of the next cell.
pub fn advance_single_bottleneck<T: Scalar>(
    y: T,
    grid_new: &DensityGrid<T>,
    params: &BottleneckParams<T>,
    dt: T,
) -> Result<Advance<T>> {
    let Some(m) = grid_new.locate(y) else {
        return Ok(Advance::Exited);
    };
    if m < 0 || m as usize >= grid_new.len() {
        return Ok(Advance::Exited);
    }
    let w_here = bottleneck_speed(grid_new.value(m), params)?;
    let edge = grid_new.interface(m as usize + 1);
    let t_in = if w_here > T::zero() {
        (edge - y) / w_here
    } else {
        T::infinity()
    };
    let knots = if t_in <= dt {
        let w_next = bottleneck_speed(grid_new.value(m + 1), params)?;
        vec![(T::zero(), y), (t_in, edge), (dt, edge + (dt - t_in) * w_next)]
    } else {
        vec![(T::zero(), y), (dt, y + dt * w_here)]
    };
    let path = Path { knots };
    if path.end() >= grid_new.x_hi() {
        return Ok(Advance::Exited);
    }
    Ok(Advance::Moved(path))
}

/// Model A: every vehicle moves on its own.
pub fn advance_bottlenecks_model_a<T: Scalar>(
    positions: &[T],
    params: &[BottleneckParams<T>],
    grid_new: &DensityGrid<T>,
    dt: T,
) -> Result<Option<Vec<T>>> {
    let mut out = Vec::with_capacity(positions.len());
    for (&y, p) in positions.iter().zip(params) {
        match advance_single_bottleneck(y, grid_new, p, dt)? {
            Advance::Moved(path) => out.push(path.end()),
            Advance::Exited => return Ok(None),
        }
    }
    Ok(Some(out))
}

/// `min_i (y_{i+1} − y_i − β_{i+1} − β_i)`.
pub fn min_ordering_gap<T: Scalar>(positions: &[T], params: &[BottleneckParams<T>]) -> Option<T> {
    positions
        .windows(2)
        .zip(params.windows(2))
        .map(|(y, p)| y[1] - y[0] - p[1].phi.beta - p[0].phi.beta)
        .reduce(T::min)
}

/// Model B: the leader moves as a single vehicle; each follower, from the
/// front backwards, runs its free path unless that would bring it closer
/// than `β_{i+1} + β_i` to the vehicle ahead, in which case it follows the
/// leader's path shifted by that distance.
pub fn advance_bottlenecks_model_b<T: Scalar>(
    positions: &[T],
    params: &[BottleneckParams<T>],
    grid_new: &DensityGrid<T>,
    dt: T,
) -> Result<Option<Vec<T>>> {
    if let Some(g) = min_ordering_gap(positions, params) {
        if g < T::lit(-1e-12) {
            return Err(Error::InvariantBreach(format!(
                "vehicle ordering violated at step entry (gap deficit {g})"
            )));
        }
    }
    let p = positions.len();
    let mut paths: Vec<Option<Path<T>>> = vec![None; p];
    for i in (0..p).rev() {
        let free = match advance_single_bottleneck(positions[i], grid_new, &params[i], dt)? {
            Advance::Moved(path) => path,
            Advance::Exited => return Ok(None),
        };
        let path = match &paths.get(i + 1).cloned().flatten() {
            Some(ahead) => {
                let spacing = params[i + 1].phi.beta + params[i].phi.beta;
                free.min(&ahead.shifted(-spacing))
            }
            None => free,
        };
        paths[i] = Some(path);
    }
    Ok(Some(paths.into_iter().map(|q| q.expect("path set").end()).collect()))
}

/// Speed law with a smooth transition band, `s(u) = 3u² − 2u³` blending
/// `min(ω_i, w_{i+1})` at gap `β_{i+1}+β_i` into `ω_i` at twice that gap.
/// Diagnostic only; the stepper uses the two extreme branches.
pub fn interpolated_speed<T: Scalar>(omega_i: T, w_ahead: T, gap: T, spacing: T) -> T {
    let clamped = omega_i.min(w_ahead);
    if gap >= T::two() * spacing {
        return omega_i;
    }
    if gap <= spacing {
        return clamped;
    }
    let u = (gap - spacing) / spacing;
    let s = u * u * (T::lit(3.0) - T::two() * u);
    clamped + (omega_i - clamped) * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PhiProfile;
    use crate::scenario::Boundary;

    fn params(w: f64, beta: f64) -> BottleneckParams<f64> {
        BottleneckParams::new(w, PhiProfile::exp_bump(1.0, 0.5, beta).unwrap()).unwrap()
    }

    fn grid(cells: Vec<f64>) -> DensityGrid<f64> {
        DensityGrid::new(0.0, 0.02, cells, Boundary::Outflow).unwrap()
    }

    #[test]
    fn single_no_crossing() {
        let g = grid(vec![0.9; 100]);
        let p = params(0.4, 0.1);
        let Advance::Moved(path) = advance_single_bottleneck(0.5, &g, &p, 0.01).unwrap() else {
            panic!()
        };
        assert!((path.end() - (0.5 + 0.01 * 0.04)).abs() < 1e-15);
    }

    #[test]
    fn single_jammed_and_crossing() {
        let p = params(0.4, 0.1);
        let g = grid(vec![1.0; 100]);
        let Advance::Moved(path) = advance_single_bottleneck(0.5, &g, &p, 0.01).unwrap() else {
            panic!()
        };
        assert_eq!(path.end(), 0.5);

        // on interface 25 (x = 0.5): belongs to cell 25, left cell empty
        let mut cells = vec![0.0; 100];
        cells[25] = 0.5;
        let g = grid(cells);
        let Advance::Moved(path) = advance_single_bottleneck(0.5, &g, &p, 0.01).unwrap() else {
            panic!()
        };
        assert!((path.end() - (0.5 + 0.01 * 0.2)).abs() < 1e-15);

        // a crossing mid-step: from 0.519 at speed 0.4 reaches 0.52 after 0.0025
        let mut cells = vec![0.0; 100];
        cells[26] = 0.5;
        let g = grid(cells);
        let Advance::Moved(path) = advance_single_bottleneck(0.519, &g, &p, 0.01).unwrap() else {
            panic!()
        };
        let expected = 0.52 + (0.01 - 0.001 / 0.4) * 0.2;
        assert!((path.end() - expected).abs() < 1e-14);
        assert_eq!(path.knots.len(), 3);
    }

    #[test]
    fn leaving_domain() {
        let g = grid(vec![0.0; 10]);
        let p = params(0.4, 0.1);
        assert_eq!(advance_single_bottleneck(0.199, &g, &p, 0.01).unwrap(), Advance::Exited);
        assert_eq!(advance_single_bottleneck(0.3, &g, &p, 0.01).unwrap(), Advance::Exited);
    }

    #[test]
    fn model_a_overtaking() {
        let g = grid(vec![0.0; 1000]);
        let ps = [params(0.49, 0.25), params(0.4, 0.25)];
        let mut y = vec![1.0, 1.05];
        let mut steps = 0;
        while y[0] <= y[1] {
            y = advance_bottlenecks_model_a(&y, &ps, &g, 0.01).unwrap().unwrap();
            steps += 1;
        }
        // gains 0.09 · dt per step: 0.05 / 0.0009 = 55.6 steps
        assert_eq!(steps, 56);
    }

    #[test]
    fn model_b_free_and_clamped() {
        let ps = [params(0.49, 0.25), params(0.4, 0.25)];
        let g = grid(vec![0.2; 500]);
        let y = advance_bottlenecks_model_b(&[1.0, 3.0], &ps, &g, 0.01)
            .unwrap()
            .unwrap();
        assert!((y[0] - (1.0 + 0.01 * 0.49 * 0.8)).abs() < 1e-15);
        assert!((y[1] - (3.0 + 0.01 * 0.4 * 0.8)).abs() < 1e-15);

        let y = advance_bottlenecks_model_b(&[1.0, 1.5], &ps, &g, 0.01)
            .unwrap()
            .unwrap();
        assert!((y[1] - y[0] - 0.5).abs() < 1e-15);
        assert!((y[0] - (1.0 + 0.01 * 0.4 * 0.8)).abs() < 1e-15);
    }

    #[test]
    fn model_b_follower_stops_at_spacing() {
        // leader jammed, follower in free road approaching
        let mut cells = vec![0.0; 500];
        for c in &mut cells[95..] {
            *c = 1.0;
        }
        let g = grid(cells);
        let ps = [params(0.49, 0.25), params(0.4, 0.25)];
        let mut y = vec![2.0 - 0.5 - 0.003, 2.0];
        let mut y0 = y[0];
        for _ in 0..5 {
            y = advance_bottlenecks_model_b(&y, &ps, &g, 0.01).unwrap().unwrap();
            assert!(y[0] >= y0);
            y0 = y[0];
        }
        assert_eq!(y[1], 2.0);
        // oracle: the free line 1.497 + 0.49 t meets the wall 1.5 at t = 0.003/0.49 < dt
        assert_eq!(y[0], 1.5);
    }

    #[test]
    fn model_b_rejects_broken_ordering() {
        let ps = [params(0.49, 0.25), params(0.4, 0.25)];
        let g = grid(vec![0.2; 500]);
        assert!(matches!(
            advance_bottlenecks_model_b(&[1.0, 1.4], &ps, &g, 0.01),
            Err(Error::InvariantBreach(_))
        ));
    }

    #[test]
    fn path_min_inserts_crossing() {
        let a = Path {
            knots: vec![(0.0, 0.0), (1.0, 1.0)],
        };
        let b = Path {
            knots: vec![(0.0, 0.5), (1.0, 0.5)],
        };
        let m = a.min(&b);
        assert_eq!(m.knots, vec![(0.0, 0.0), (0.5, 0.5), (1.0, 0.5)]);
        assert_eq!(m.eval(0.25), 0.25);
    }

    #[test]
    fn smoothstep_band() {
        assert_eq!(interpolated_speed(0.4, 0.2, 0.5, 0.5), 0.2);
        assert_eq!(interpolated_speed(0.4, 0.2, 1.0, 0.5), 0.4);
        assert!((interpolated_speed(0.4f64, 0.2, 0.75, 0.5) - 0.3).abs() < 1e-15);
    }
}
