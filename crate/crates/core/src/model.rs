//! Constitutive laws of the coupled model.
//!
//! Cars obey `ρ_t + (ρ φ(x − y) (1 − ρ))_x = 0` while the slow vehicle at `y`
//! moves with `ẏ = w_max (1 − ρ(t, y))`. The capacity profile `φ` equals
//! `v_bar` away from the vehicle and dips to `v_under` at the vehicle itself.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Shape of the capacity-drop profile.
#[derive(Debug, Clone, PartialEq)]
pub enum PhiShape<T> {
    /// `v̄ − (v̄ − v̲) exp(−ζ² / (β − |ζ|))` on `|ζ| < β`, `v̄` elsewhere.
    ExpBump,
    /// Monotone cubic Hermite interpolation of tabulated samples on `[−β, β]`.
    Custom(Tabulated<T>),
}

/// Tabulated profile samples with precomputed Hermite slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated<T> {
    zeta: Vec<T>,
    value: Vec<T>,
    slope: Vec<T>,
}

impl<T: Scalar> Tabulated<T> {
    /// Builds the interpolant. Slopes follow Fritsch–Carlson, forced to zero
    /// at both ends and at every local extremum so the result is `C¹` and
    /// joins the constant plateau smoothly.
    pub fn new(zeta: Vec<T>, value: Vec<T>) -> Result<Self> {
        let n = zeta.len();
        if n < 3 || value.len() != n {
            return Err(Error::InvalidProfile(
                "tabulated profile needs at least 3 (zeta, value) samples".into(),
            ));
        }
        if zeta.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidProfile(
                "tabulated zeta must be strictly increasing".into(),
            ));
        }
        let secant: Vec<T> = (0..n - 1)
            .map(|k| (value[k + 1] - value[k]) / (zeta[k + 1] - zeta[k]))
            .collect();
        let mut slope = vec![T::zero(); n];
        for k in 1..n - 1 {
            let (a, b) = (secant[k - 1], secant[k]);
            if a * b > T::zero() {
                // weighted harmonic mean keeps the interpolant monotone
                let h0 = zeta[k] - zeta[k - 1];
                let h1 = zeta[k + 1] - zeta[k];
                let w0 = T::two() * h1 + h0;
                let w1 = h1 + T::two() * h0;
                slope[k] = (w0 + w1) / (w0 / a + w1 / b);
            }
        }
        Ok(Self { zeta, value, slope })
    }

    pub fn samples(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.zeta.iter().copied().zip(self.value.iter().copied())
    }

    fn eval(&self, z: T) -> T {
        let n = self.zeta.len();
        if z <= self.zeta[0] {
            return self.value[0];
        }
        if z >= self.zeta[n - 1] {
            return self.value[n - 1];
        }
        let k = self.zeta.partition_point(|&s| s <= z) - 1;
        let h = self.zeta[k + 1] - self.zeta[k];
        let t = (z - self.zeta[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let two = T::two();
        let three = T::lit(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = three * t2 - two * t3;
        let h11 = t3 - t2;
        h00 * self.value[k] + h10 * h * self.slope[k] + h01 * self.value[k + 1] + h11 * h * self.slope[k + 1]
    }
}

/// Capacity-drop profile `φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiProfile<T> {
    pub v_bar: T,
    pub v_under: T,
    pub beta: T,
    pub shape: PhiShape<T>,
}

impl<T: Scalar> PhiProfile<T> {
    pub fn exp_bump(v_bar: T, v_under: T, beta: T) -> Result<Self> {
        let p = Self {
            v_bar,
            v_under,
            beta,
            shape: PhiShape::ExpBump,
        };
        p.validate()?;
        Ok(p)
    }

    /// Tabulated profile from `(ζ, φ(ζ))` samples spanning `[−β, β]`.
    pub fn tabulated(samples: &[(T, T)]) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::InvalidProfile("need at least 3 samples".into()));
        }
        let zeta: Vec<T> = samples.iter().map(|s| s.0).collect();
        let value: Vec<T> = samples.iter().map(|s| s.1).collect();
        let lo = zeta[0];
        let hi = *zeta.last().unwrap();
        let beta = hi;
        let tol = T::rel_tol(1e-12) * (T::one() + beta.abs());
        if (lo + hi).abs() > tol {
            return Err(Error::InvalidProfile(
                "tabulated support must be symmetric [-beta, beta]".into(),
            ));
        }
        let v_bar = value[0];
        let v_under = match zeta.iter().position(|&z| z.abs() <= tol) {
            Some(k) => value[k],
            None => {
                return Err(Error::InvalidProfile(
                    "tabulated profile must contain a sample at zeta = 0".into(),
                ))
            }
        };
        let p = Self {
            v_bar,
            v_under,
            beta,
            shape: PhiShape::Custom(Tabulated::new(zeta, value)?),
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks bounds, plateau values and monotonicity on sampled points.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidProfile(m.to_string()));
        if !(self.v_under > T::zero()) || !(self.v_under <= self.v_bar) {
            return bad("require 0 < v_under <= v_bar");
        }
        if !(self.beta > T::zero()) || !self.beta.is_finite() {
            return bad("beta must be positive and finite");
        }
        if let PhiShape::Custom(tab) = &self.shape {
            let tol = T::rel_tol(1e-12) * (T::one() + self.v_bar);
            let n = tab.value.len();
            if (tab.value[0] - self.v_bar).abs() > tol || (tab.value[n - 1] - self.v_bar).abs() > tol {
                return bad("tabulated endpoints must equal v_bar");
            }
            let mid = tab.zeta.partition_point(|&z| z < T::zero());
            let strictly = |range: &[T], decreasing: bool| {
                range
                    .windows(2)
                    .all(|w| if decreasing { w[1] < w[0] } else { w[1] > w[0] })
            };
            if self.is_constant() {
                if tab.value.iter().any(|&v| (v - self.v_bar).abs() > tol) {
                    return bad("constant profile must be flat");
                }
            } else if !strictly(&tab.value[..=mid], true) || !strictly(&tab.value[mid..], false) {
                return bad("tabulated profile must decrease on [-beta, 0] and increase on [0, beta]");
            }
        }
        Ok(())
    }

    pub fn is_constant(&self) -> bool {
        self.v_under == self.v_bar
    }

    /// `φ(ζ)`.
    pub fn eval(&self, zeta: T) -> T {
        let a = zeta.abs();
        if a >= self.beta {
            return self.v_bar;
        }
        match &self.shape {
            PhiShape::ExpBump => {
                let e = -(zeta * zeta) / (self.beta - a);
                self.v_bar - (self.v_bar - self.v_under) * e.exp()
            }
            PhiShape::Custom(tab) => tab.eval(zeta),
        }
    }

    /// `φ′(ζ)`: closed form for the bump, central difference (step `1e−6·β`)
    /// for tabulated profiles.
    pub fn prime(&self, zeta: T) -> T {
        let a = zeta.abs();
        if a >= self.beta || self.is_constant() {
            return T::zero();
        }
        match &self.shape {
            PhiShape::ExpBump => {
                let d = self.beta - a;
                let e = -(zeta * zeta) / d;
                if e < T::lit(-700.0) {
                    return T::zero();
                }
                let amp = self.v_bar - self.v_under;
                amp * e.exp() * zeta * (T::two() * self.beta - a) / (d * d)
            }
            PhiShape::Custom(_) => {
                let h = T::lit(1e-6) * self.beta;
                (self.eval(zeta + h) - self.eval(zeta - h)) / (T::two() * h)
            }
        }
    }

    /// `φ″(ζ)` for the bump (closed form); central difference of
    /// [`PhiProfile::prime`] for tabulated profiles.
    pub fn second(&self, zeta: T) -> T {
        let a = zeta.abs();
        if a >= self.beta || self.is_constant() {
            return T::zero();
        }
        match &self.shape {
            PhiShape::ExpBump => {
                let d = self.beta - a;
                let e = -(zeta * zeta) / d;
                if e < T::lit(-700.0) {
                    return T::zero();
                }
                let amp = self.v_bar - self.v_under;
                let h = a * (T::two() * self.beta - a) / (d * d);
                let hp = T::two() * self.beta * self.beta / (d * d * d);
                amp * e.exp() * (hp - h * h)
            }
            PhiShape::Custom(_) => {
                let h = T::lit(1e-4) * self.beta;
                (self.prime(zeta + h) - self.prime(zeta - h)) / (T::two() * h)
            }
        }
    }

    /// `‖φ′‖_∞`. Golden-section search on `(0, β)` for the bump (φ′ is odd),
    /// dense sampling for tabulated profiles.
    pub fn prime_sup(&self) -> T {
        if self.is_constant() {
            return T::zero();
        }
        match &self.shape {
            PhiShape::ExpBump => {
                let (_, v) = golden_max(|z| self.prime(z), T::zero(), self.beta, T::rel_tol(1e-13) * self.beta);
                v.abs()
            }
            PhiShape::Custom(_) => {
                let n = 20_000;
                (0..=n)
                    .map(|k| {
                        let z = -self.beta + self.beta * T::two() * T::lit(k as f64 / n as f64);
                        self.prime(z).abs()
                    })
                    .fold(T::zero(), T::max)
            }
        }
    }

    /// Location of the maximum of `φ′` on `(0, β)`.
    pub fn prime_argmax(&self) -> T {
        golden_max(|z| self.prime(z), T::zero(), self.beta, T::rel_tol(1e-13) * self.beta).0
    }

    /// `K_φ = ¼ ∫ |φ″|`, with a quadrature error estimate.
    ///
    /// The bump is integrated by adaptive Simpson on `[0, ζ*]` and `[ζ*, β]`
    /// (ζ* the sign change of φ″), doubled by evenness. Tabulated profiles
    /// use the total variation of φ′ on a fine uniform sampling.
    pub fn k_phi(&self) -> Quadrature<T> {
        if self.is_constant() {
            return Quadrature {
                value: T::zero(),
                error: T::zero(),
            };
        }
        match &self.shape {
            PhiShape::ExpBump => {
                let split = self.prime_argmax();
                let floor = T::rel_tol(1e-10) * self.beta;
                let tol = T::rel_tol(1e-13) * (self.v_bar - self.v_under).max(T::epsilon());
                let f = |z: T| self.second(z).abs();
                let a = adaptive_simpson(&f, T::zero(), split, tol, floor);
                let b = adaptive_simpson(&f, split, self.beta, tol, floor);
                let quarter = T::quarter();
                Quadrature {
                    value: quarter * T::two() * (a.value + b.value),
                    error: quarter * T::two() * (a.error + b.error),
                }
            }
            PhiShape::Custom(_) => {
                let coarse = self.prime_tv(20_000);
                let fine = self.prime_tv(40_000);
                Quadrature {
                    value: T::quarter() * fine,
                    error: T::quarter() * (fine - coarse).abs(),
                }
            }
        }
    }

    fn prime_tv(&self, n: usize) -> T {
        let step = T::two() * self.beta / T::lit(n as f64);
        let mut prev = self.prime(-self.beta);
        let mut tv = T::zero();
        for k in 1..=n {
            let z = -self.beta + step * T::lit(k as f64);
            let cur = self.prime(z);
            tv = tv + (cur - prev).abs();
            prev = cur;
        }
        tv
    }
}

/// Value of a quadrature and its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: T,
}

fn golden_max<T: Scalar>(f: impl Fn(T) -> T, mut a: T, mut b: T, tol: T) -> (T, T) {
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a).abs() > tol && iter < 200 {
        iter += 1;
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) * T::half();
    (x, f(x))
}

fn adaptive_simpson<T: Scalar>(f: &impl Fn(T) -> T, a: T, b: T, tol: T, floor: T) -> Quadrature<T> {
    fn simpson<T: Scalar>(fa: T, fm: T, fb: T, a: T, b: T) -> T {
        (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<T: Scalar>(
        f: &impl Fn(T) -> T,
        a: T,
        b: T,
        fa: T,
        fm: T,
        fb: T,
        whole: T,
        tol: T,
        floor: T,
        depth: u32,
    ) -> Quadrature<T> {
        let m = (a + b) * T::half();
        let lm = (a + m) * T::half();
        let rm = (m + b) * T::half();
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || (b - a) <= floor || delta.abs() <= T::lit(15.0) * tol {
            return Quadrature {
                value: left + right + delta / T::lit(15.0),
                error: delta.abs() / T::lit(15.0),
            };
        }
        let l = recurse(f, a, m, fa, flm, fm, left, tol * T::half(), floor, depth - 1);
        let r = recurse(f, m, b, fm, frm, fb, right, tol * T::half(), floor, depth - 1);
        Quadrature {
            value: l.value + r.value,
            error: l.error + r.error,
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f((a + b) * T::half());
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, floor, 60)
}

/// Per-vehicle parameters: maximal speed and capacity profile.
#[derive(Debug, Clone, PartialEq)]
pub struct BottleneckParams<T> {
    pub w_max: T,
    pub phi: PhiProfile<T>,
}

impl<T: Scalar> BottleneckParams<T> {
    pub fn new(w_max: T, phi: PhiProfile<T>) -> Result<Self> {
        let p = Self { w_max, phi };
        p.validate()?;
        Ok(p)
    }

    /// Cars must be able to overtake: `v̲ > w_max > 0`.
    pub fn validate(&self) -> Result<()> {
        self.phi.validate()?;
        if !(self.w_max > T::zero()) {
            return Err(Error::InvalidParams("w_max must be positive".into()));
        }
        if !(self.phi.v_under > self.w_max) {
            return Err(Error::InvalidParams(format!(
                "overtaking condition v_under > w_max fails ({} <= {})",
                self.phi.v_under, self.w_max
            )));
        }
        Ok(())
    }
}

/// Left and right densities of a discontinuity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannPair<T> {
    pub rho_l: T,
    pub rho_r: T,
}

impl<T: Scalar> RiemannPair<T> {
    pub fn new(rho_l: T, rho_r: T) -> Result<Self> {
        check_density(rho_l, "rho_l")?;
        check_density(rho_r, "rho_r")?;
        Ok(Self { rho_l, rho_r })
    }
}

pub(crate) fn check_density<T: Scalar>(rho: T, context: &str) -> Result<()> {
    if rho >= T::zero() && rho <= T::one() {
        Ok(())
    } else {
        Err(Error::out_of_range(rho.to_f64_lossy(), context))
    }
}

/// `ρ (1 − ρ)`, the flux at unit capacity.
#[inline]
pub fn unit_flux<T: Scalar>(rho: T) -> T {
    rho * (T::one() - rho)
}

pub fn phi_eval<T: Scalar>(profile: &PhiProfile<T>, zeta: T) -> T {
    profile.eval(zeta)
}

pub fn phi_prime<T: Scalar>(profile: &PhiProfile<T>, zeta: T) -> T {
    profile.prime(zeta)
}

/// Car flux `f(ρ, ζ) = ρ φ(ζ) (1 − ρ)`.
pub fn car_flux<T: Scalar>(rho: T, zeta: T, profile: &PhiProfile<T>) -> Result<T> {
    check_density(rho, "car_flux")?;
    Ok(unit_flux(rho) * profile.eval(zeta))
}

/// Vehicle speed `w(ρ) = w_max (1 − ρ)`.
pub fn bottleneck_speed<T: Scalar>(rho: T, params: &BottleneckParams<T>) -> Result<T> {
    check_density(rho, "bottleneck_speed")?;
    Ok(params.w_max * (T::one() - rho))
}

/// Rankine–Hugoniot speed `φ(ζ) (1 − ρ_l − ρ_r)`.
pub fn rh_speed<T: Scalar>(pair: RiemannPair<T>, zeta: T, profile: &PhiProfile<T>) -> Result<T> {
    if pair.rho_l == pair.rho_r {
        return Err(Error::DegenerateWave(pair.rho_l.to_f64_lossy()));
    }
    Ok(profile.eval(zeta) * (T::one() - pair.rho_l - pair.rho_r))
}

/// Source term `−ρ (1 − ρ) φ′(ζ)` of the split form.
pub fn source_term<T: Scalar>(rho: T, zeta: T, profile: &PhiProfile<T>) -> T {
    -unit_flux(rho) * profile.prime(zeta)
}

/// Speed-separation threshold and margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedSeparation<T> {
    /// `(v̄ − w_max) / (2v̄ − w_max)`.
    pub threshold: T,
    /// `μ = ((2v̲ − w_max)/2) (ρ_min − threshold)`; positive iff `ρ_min` exceeds the threshold.
    pub mu: T,
}

pub fn check_speed_separation<T: Scalar>(rho_min: T, params: &BottleneckParams<T>) -> SpeedSeparation<T> {
    let v_bar = params.phi.v_bar;
    let v_under = params.phi.v_under;
    let w = params.w_max;
    let threshold = (v_bar - w) / (T::two() * v_bar - w);
    let mu = (T::two() * v_under - w) / T::two() * (rho_min - threshold);
    SpeedSeparation { threshold, mu }
}

/// Horizon on which the speed separation provably persists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon<T> {
    Bounded(T),
    Unbounded,
    /// `η ≥ 1`: the sufficient condition cannot be verified for this datum.
    Unverifiable,
}

impl<T: Scalar> Horizon<T> {
    pub fn admits(&self, t: T) -> bool {
        match *self {
            Horizon::Bounded(t_max) => t < t_max,
            Horizon::Unbounded => true,
            Horizon::Unverifiable => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport<T> {
    pub rho_min_threshold: T,
    pub mu: T,
    pub eta: T,
    pub t_max: Horizon<T>,
}

/// Bound `T < −ln η / ‖φ′‖_∞` with `η = threshold / sup ρ̄`.
pub fn time_horizon<T: Scalar>(sup_density: T, params: &BottleneckParams<T>) -> (T, Horizon<T>) {
    let sep = check_speed_separation(T::zero(), params);
    if !(sup_density > T::zero()) {
        return (T::zero(), Horizon::Unbounded);
    }
    let eta = sep.threshold / sup_density;
    if eta >= T::one() {
        return (eta, Horizon::Unverifiable);
    }
    let lip = params.phi.prime_sup();
    if lip == T::zero() || eta == T::zero() {
        return (eta, Horizon::Unbounded);
    }
    (eta, Horizon::Bounded(-eta.ln() / lip))
}

/// Full validity report for a datum with infimum `rho_min` and supremum `rho_sup`.
pub fn validity_report<T: Scalar>(rho_min: T, rho_sup: T, params: &BottleneckParams<T>) -> ValidityReport<T> {
    let sep = check_speed_separation(rho_min, params);
    let (eta, t_max) = time_horizon(rho_sup, params);
    ValidityReport {
        rho_min_threshold: sep.threshold,
        mu: sep.mu,
        eta,
        t_max,
    }
}

pub fn k_phi<T: Scalar>(profile: &PhiProfile<T>) -> T {
    profile.k_phi().value
}
