//! Explicit Euler source update and the structured re-sampling around the vehicle.

use super::front::{Front, FrontKind, FrontList};
use crate::error::{Error, Result};
use crate::model::{source_term, PhiProfile};
use crate::scalar::Scalar;

/// `ρ^source = ρ + dt · (−ρ(1−ρ) φ′(x − ȳ))`, kept symbolic: the base
/// profile plus the source evaluated on demand.
#[derive(Debug, Clone)]
pub struct SourceProfile<'a, T> {
    pub base: &'a FrontList<T>,
    pub y: T,
    pub dt: T,
    pub phi: &'a PhiProfile<T>,
}

pub fn apply_source<'a, T: Scalar>(
    base: &'a FrontList<T>,
    y: T,
    dt: T,
    phi: &'a PhiProfile<T>,
) -> SourceProfile<'a, T> {
    SourceProfile { base, y, dt, phi }
}

impl<T: Scalar> SourceProfile<'_, T> {
    fn update(&self, rho: T, x: T) -> Result<T> {
        let v = rho + self.dt * source_term(rho, x - self.y, self.phi);
        let tol = T::lit(8.0) * T::epsilon();
        if v >= T::zero() && v <= T::one() {
            Ok(v)
        } else if v > -tol && v < T::one() + tol {
            Ok(v.max(T::zero()).min(T::one()))
        } else {
            Err(Error::SourceStep {
                x: x.to_f64_lossy(),
                value: v.to_f64_lossy(),
            })
        }
    }

    /// `ρ^source(x+)`.
    pub fn right_limit(&self, x: T) -> Result<T> {
        self.update(self.base.eval(x), x)
    }

    /// `ρ^source(x−)`.
    pub fn left_limit(&self, x: T) -> Result<T> {
        self.update(self.base.eval_left(x), x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Point<T> {
    /// A discontinuity already present in the profile, with its provenance.
    X(T, bool),
    /// A dyadic point, a midpoint, or an end of the sampling window.
    Y(T),
}

impl<T: Scalar> Point<T> {
    fn x(self) -> T {
        match self {
            Point::X(x, _) | Point::Y(x) => x,
        }
    }
}

/// Samples `ρ^source` on `[ȳ − β, ȳ + β]` with dyadic points
/// `ȳ − β + j 2β/2^ν`, keeping both one-sided limits at every existing
/// discontinuity. Outside the window the profile is already piecewise
/// constant and is copied unchanged.
///
/// A midpoint is inserted between consecutive discontinuities with no dyadic
/// point between them only when they are at least `min_mid` apart; with
/// `min_mid = 0` every such pair gets one. Dyadic points within `tol` of a
/// discontinuity are dropped.
pub fn resample_near_bottleneck<T: Scalar>(
    profile: &SourceProfile<'_, T>,
    nu: u32,
    tol: T,
    min_mid: T,
) -> Result<FrontList<T>> {
    let beta = profile.phi.beta;
    let (a, b) = (profile.y - beta, profile.y + beta);
    let fronts = &profile.base.fronts;
    let lo = fronts.partition_point(|f| f.pos <= a);
    let hi = fronts.partition_point(|f| f.pos < b);
    let inner = &fronts[lo..hi];
    let rest = &fronts[hi..];
    // fronts sitting exactly on the right end are absorbed by the new front there
    let rest_start = rest.iter().take_while(|f| f.pos <= b).count();

    let n = 1usize << nu;
    let h = (b - a) / T::lit(n as f64);
    let mut ys: Vec<T> = Vec::with_capacity(n);
    let mut k = 0;
    for j in 1..=n {
        let yj = if j == n { b } else { a + h * T::lit(j as f64) };
        while k < inner.len() && inner[k].pos < yj - tol {
            k += 1;
        }
        let clash =
            (k < inner.len() && (inner[k].pos - yj).abs() <= tol) || (k > 0 && (inner[k - 1].pos - yj).abs() <= tol);
        if !clash || j == n {
            ys.push(yj);
        }
    }

    let mut pts: Vec<Point<T>> = Vec::with_capacity(ys.len() + 2 * inner.len() + 1);
    pts.push(Point::Y(a));
    let (mut i, mut j) = (0, 0);
    while i < inner.len() || j < ys.len() {
        if j >= ys.len() || (i < inner.len() && inner[i].pos < ys[j]) {
            if let Some(&Point::X(prev, _)) = pts.last() {
                if inner[i].pos - prev >= min_mid {
                    pts.push(Point::Y((prev + inner[i].pos) * T::half()));
                }
            }
            pts.push(Point::X(inner[i].pos, inner[i].generated));
            i += 1;
        } else {
            pts.push(Point::Y(ys[j]));
            j += 1;
        }
    }

    let mut out = FrontList {
        left_state: profile.base.left_state,
        fronts: fronts[..lo].to_vec(),
    };
    let mut current = profile.base.eval(a);
    for w in pts.windows(2) {
        let v = match (w[0], w[1]) {
            (Point::X(x, _), _) => profile.right_limit(x)?,
            (Point::Y(_), Point::X(x, _)) => profile.left_limit(x)?,
            (Point::Y(x), Point::Y(_)) => profile.right_limit(x)?,
        };
        push_front(&mut out, w[0], current, v);
        current = v;
    }
    let after = rest
        .get(rest_start.wrapping_sub(1))
        .map_or(profile.base.eval(b), |f| f.right);
    push_front(&mut out, Point::Y(b), current, after);
    out.fronts.extend_from_slice(&rest[rest_start..]);
    Ok(out)
}

fn push_front<T: Scalar>(out: &mut FrontList<T>, at: Point<T>, left: T, right: T) {
    if left == right {
        return;
    }
    let (kind, generated) = match at {
        Point::X(_, g) => (Front::kind_of(left, right), g),
        Point::Y(_) => (FrontKind::SourceGenerated, true),
    };
    out.fronts.push(Front {
        pos: at.x(),
        left,
        right,
        kind,
        generated,
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi() -> PhiProfile<f64> {
        PhiProfile::exp_bump(1.0, 0.6, 0.1).unwrap()
    }

    #[test]
    fn no_fronts_near_and_extreme_states() {
        let p = phi();
        for v in [0.0, 1.0] {
            let fl = FrontList::constant(v);
            let prof = apply_source(&fl, 1.0, 0.001, &p);
            let out = resample_near_bottleneck(&prof, 4, 1e-12, 0.0).unwrap();
            assert!(out.fronts.is_empty());
        }
        // a front well outside the window is untouched
        let fl = FrontList {
            left_state: 0.0,
            fronts: vec![Front::new(5.0, 0.0, 1.0, FrontKind::Shock)],
        };
        let prof = apply_source(&fl, 1.0, 0.001, &p);
        assert_eq!(resample_near_bottleneck(&prof, 4, 1e-12, 0.0).unwrap(), fl);
    }

    #[test]
    fn constant_state_source_values() {
        let p = phi();
        let fl = FrontList::constant(0.5);
        let dt = 0.001;
        let prof = apply_source(&fl, 0.0, dt, &p);
        let x = 0.05;
        let expected = 0.5 - dt * 0.25 * p.prime(x);
        assert!((prof.right_limit(x).unwrap() - expected).abs() < 1e-15);

        // uniform dyadic sampling: each interval [y_j, y_{j+1}] takes ρ^s(y_j)
        let nu = 3;
        let out = resample_near_bottleneck(&prof, nu, 1e-12, 0.0).unwrap();
        out.check().unwrap();
        let h = 0.2 / 8.0;
        for j in 0..8 {
            let yj = -0.1 + h * j as f64;
            let mid = yj + 0.5 * h;
            let direct = 0.5 - dt * 0.25 * p.prime(yj);
            assert!((out.eval(mid) - direct).abs() < 1e-15, "j={j}");
        }
        assert!(out.fronts.iter().all(|f| f.kind == FrontKind::SourceGenerated));
        assert_eq!(out.eval(0.2), 0.5);
        assert_eq!(out.eval(-0.2), 0.5);
    }

    #[test]
    fn one_sided_limits_kept() {
        // one discontinuity with exactly one dyadic point on each side (ν = 1)
        let p = phi();
        let x1 = 0.03;
        let fl = FrontList {
            left_state: 0.3,
            fronts: vec![Front::new(x1, 0.3, 0.7, FrontKind::Shock)],
        };
        let dt = 0.001;
        let prof = apply_source(&fl, 0.0, dt, &p);
        let out = resample_near_bottleneck(&prof, 1, 1e-12, 0.0).unwrap();
        out.check().unwrap();
        // partition: Y(−0.1), Y(0), X(0.03), Y(0.1): four points, three intervals plus outside
        let left = 0.3 + dt * source_term(0.3, x1, &p);
        let right = 0.7 + dt * source_term(0.7, x1, &p);
        let f = out.fronts.iter().find(|f| f.pos == x1).unwrap();
        assert_eq!((f.left, f.right), (left, right));
        assert_eq!(f.kind, FrontKind::Shock);
        // [y_0, y_1] = [−0.1, 0] takes ρ^s(−0.1+) = 0.3 (source vanishes at the edge)
        assert_eq!(out.eval(-0.05), 0.3);
        assert_eq!(out.eval(0.01), left);
        assert_eq!(out.eval(0.06), right);
        assert_eq!(out.eval(0.2), 0.7);
    }

    #[test]
    fn midpoints_between_crowded_fronts() {
        let p = phi();
        let fl = FrontList {
            left_state: 0.2,
            fronts: vec![
                Front::new(0.01, 0.2, 0.4, FrontKind::Shock),
                Front::new(0.02, 0.4, 0.6, FrontKind::Shock),
            ],
        };
        let prof = apply_source(&fl, 0.0, 0.001, &p);
        let out = resample_near_bottleneck(&prof, 1, 1e-12, 0.0).unwrap();
        out.check().unwrap();
        // midpoint 0.015 splits [0.01, 0.02]; each half keeps the adjacent one-sided limit
        let a = prof.right_limit(0.01).unwrap();
        let b = prof.left_limit(0.02).unwrap();
        assert_eq!(out.eval(0.012), a);
        assert_eq!(out.eval(0.017), b);

        // below the midpoint spacing the whole gap takes the left discontinuity's right limit
        let capped = resample_near_bottleneck(&prof, 1, 1e-12, 0.05).unwrap();
        capped.check().unwrap();
        assert_eq!(capped.eval(0.012), a);
        assert_eq!(capped.eval(0.017), a);
    }

    #[test]
    fn source_step_too_large() {
        let p = phi();
        let fl = FrontList::constant(0.9);
        let prof = apply_source(&fl, 0.0, 0.05, &p);
        assert!(matches!(
            resample_near_bottleneck(&prof, 6, 1e-12, 0.0),
            Err(Error::SourceStep { .. })
        ));
    }
}
