use crate::error::{Error, Result};
use crate::model::check_density;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrontKind {
    /// Entropy shock, `left < right`.
    Shock,
    /// Slice of an approximated fan, `left > right`, strength at most `δ_ν`.
    RarefactionShock,
    /// Created by the sampling after a source step; resolved at the next window.
    SourceGenerated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Front<T> {
    pub pos: T,
    pub left: T,
    pub right: T,
    pub kind: FrontKind,
    /// Descends only from waves created by the source update.
    pub generated: bool,
}

impl<T: Scalar> Front<T> {
    pub fn new(pos: T, left: T, right: T, kind: FrontKind) -> Self {
        Self {
            pos,
            left,
            right,
            kind,
            generated: false,
        }
    }

    pub fn strength(&self) -> T {
        (self.left - self.right).abs()
    }

    /// Kind implied by the jump direction.
    pub fn kind_of(left: T, right: T) -> FrontKind {
        if left < right {
            FrontKind::Shock
        } else {
            FrontKind::RarefactionShock
        }
    }
}

/// Piecewise-constant profile: `left_state` up to the first front, then the
/// right state of each front up to the next one.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontList<T> {
    pub left_state: T,
    pub fronts: Vec<Front<T>>,
}

impl<T: Scalar> FrontList<T> {
    pub fn constant(v: T) -> Self {
        Self {
            left_state: v,
            fronts: Vec::new(),
        }
    }

    pub fn right_state(&self) -> T {
        self.fronts.last().map_or(self.left_state, |f| f.right)
    }

    pub fn total_variation(&self) -> T {
        self.fronts.iter().fold(T::zero(), |a, f| a + f.strength())
    }

    /// Value at `x`; on a front the right state.
    pub fn eval(&self, x: T) -> T {
        let k = self.fronts.partition_point(|f| f.pos <= x);
        if k == 0 {
            self.left_state
        } else {
            self.fronts[k - 1].right
        }
    }

    /// Value immediately left of `x`.
    pub fn eval_left(&self, x: T) -> T {
        let k = self.fronts.partition_point(|f| f.pos < x);
        if k == 0 {
            self.left_state
        } else {
            self.fronts[k - 1].right
        }
    }

    /// Exact averages over `n` cells of width `dx` starting at `x0`.
    pub fn cell_averages(&self, x0: T, dx: T, n: usize) -> Vec<T> {
        let mut out = Vec::with_capacity(n);
        let mut k = self.fronts.partition_point(|f| f.pos <= x0);
        let mut state = if k == 0 {
            self.left_state
        } else {
            self.fronts[k - 1].right
        };
        for m in 0..n {
            let a = x0 + dx * T::lit(m as f64);
            let b = x0 + dx * T::lit((m + 1) as f64);
            let mut lo = a;
            let mut acc = T::zero();
            while k < self.fronts.len() && self.fronts[k].pos < b {
                let p = self.fronts[k].pos.max(lo);
                acc = acc + state * (p - lo);
                lo = p;
                state = self.fronts[k].right;
                k += 1;
            }
            acc = acc + state * (b - lo);
            out.push(acc / dx);
        }
        out
    }

    /// `∫_a^b ρ`.
    pub fn integral(&self, a: T, b: T) -> T {
        let mut k = self.fronts.partition_point(|f| f.pos <= a);
        let mut state = if k == 0 {
            self.left_state
        } else {
            self.fronts[k - 1].right
        };
        let mut lo = a;
        let mut acc = T::zero();
        while k < self.fronts.len() && self.fronts[k].pos < b {
            acc = acc + state * (self.fronts[k].pos - lo);
            lo = self.fronts[k].pos;
            state = self.fronts[k].right;
            k += 1;
        }
        acc + state * (b - lo)
    }

    /// States chain, positions are nondecreasing, densities lie in `[0, 1]`,
    /// and entropy kinds match their jump direction.
    pub fn check(&self) -> Result<()> {
        check_density(self.left_state, "front list left state")?;
        let mut prev_state = self.left_state;
        let mut prev_pos = T::neg_infinity();
        for (k, f) in self.fronts.iter().enumerate() {
            check_density(f.right, "front state")?;
            if f.left != prev_state {
                return Err(Error::InvariantBreach(format!("front {k}: states do not chain")));
            }
            if f.pos < prev_pos {
                return Err(Error::InvariantBreach(format!("front {k}: positions out of order")));
            }
            match f.kind {
                FrontKind::Shock if !(f.left < f.right) => {
                    return Err(Error::InvariantBreach(format!("front {k}: shock with left >= right")))
                }
                FrontKind::RarefactionShock if !(f.left > f.right) => {
                    return Err(Error::InvariantBreach(format!(
                        "front {k}: rarefaction shock with left <= right"
                    )))
                }
                _ => {}
            }
            prev_state = f.right;
            prev_pos = f.pos;
        }
        Ok(())
    }
}

/// Front-tracking parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WftParams<T> {
    pub nu: u32,
    pub dt: T,
    pub delta_nu: T,
    pub event_tol: T,
    pub max_events: usize,
}

impl<T: Scalar> WftParams<T> {
    pub fn new(nu: u32, dt: T) -> Result<Self> {
        if nu == 0 {
            return Err(Error::InvalidParams("nu must be at least 1".into()));
        }
        if !(dt > T::zero()) {
            return Err(Error::InvalidParams("splitting step must be positive".into()));
        }
        Ok(Self {
            nu,
            dt,
            delta_nu: delta_nu(nu),
            event_tol: T::rel_tol(1e-10) * dt.max(T::one()),
            max_events: 1_000_000,
        })
    }
}

/// `δ_ν = min(2^−ν, 1/(ν+1))`.
pub fn delta_nu<T: Scalar>(nu: u32) -> T {
    T::lit((0.5f64).powi(nu as i32).min(1.0 / (nu as f64 + 1.0)))
}

/// Piecewise-constant sampling `ρ̄(j 2^−ν)` on `[j 2^−ν, (j+1) 2^−ν) ∩ [−ν, ν]`,
/// extended by the end samples.
pub fn sample_initial<T: Scalar>(rho_bar: impl Fn(f64) -> f64, nu: u32) -> FrontList<T> {
    let h = (0.5f64).powi(nu as i32);
    let n = (nu as i64) << nu;
    let mut prev = rho_bar(-(nu as f64));
    let mut out = FrontList::constant(T::lit(prev));
    for j in (-n + 1)..n {
        let x = j as f64 * h;
        let v = rho_bar(x);
        if v != prev {
            let (l, r) = (T::lit(prev), T::lit(v));
            out.fronts.push(Front::new(T::lit(x), l, r, Front::kind_of(l, r)));
            prev = v;
        }
    }
    out
}

/// Riemann solution with rarefactions replaced by equal slices of strength
/// at most `δ`: returns consecutive `(left, right, kind)` triples.
pub fn fan_riemann<T: Scalar>(left: T, right: T, delta: T) -> Vec<(T, T, FrontKind)> {
    if left < right {
        return vec![(left, right, FrontKind::Shock)];
    }
    if left == right {
        return Vec::new();
    }
    let jump = left - right;
    let k = (jump / delta - T::rel_tol(1e-12))
        .ceil()
        .max(T::one())
        .to_usize()
        .unwrap_or(1);
    let step = jump / T::lit(k as f64);
    let mut out = Vec::with_capacity(k);
    let mut a = left;
    for i in 1..=k {
        let b = if i == k { right } else { left - step * T::lit(i as f64) };
        out.push((a, b, FrontKind::RarefactionShock));
        a = b;
    }
    out
}
