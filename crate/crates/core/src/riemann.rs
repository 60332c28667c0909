//! Riemann problems for `ρ (1 − ρ) φ` with `φ` frozen, and the Godunov flux.

use crate::model::{unit_flux, RiemannPair};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveKind<T> {
    Shock {
        speed: T,
    },
    /// Fan edges, ascending: `[f′(ρ_l), f′(ρ_r)]`.
    Rarefaction {
        edges: [T; 2],
    },
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannSolution<T> {
    pub kind: WaveKind<T>,
    pub states: RiemannPair<T>,
    pub phi: T,
}

/// `f′(ρ) = φ (1 − 2ρ)`.
#[inline]
pub fn char_speed<T: Scalar>(rho: T, phi: T) -> T {
    phi * (T::one() - T::two() * rho)
}

/// Entropy solution: shocks for `ρ_l < ρ_r`, fans for `ρ_l > ρ_r`.
pub fn solve_riemann<T: Scalar>(pair: RiemannPair<T>, phi: T) -> RiemannSolution<T> {
    let RiemannPair { rho_l, rho_r } = pair;
    let kind = if rho_l < rho_r {
        WaveKind::Shock {
            speed: phi * (T::one() - rho_l - rho_r),
        }
    } else if rho_l > rho_r {
        WaveKind::Rarefaction {
            edges: [char_speed(rho_l, phi), char_speed(rho_r, phi)],
        }
    } else {
        WaveKind::Constant
    };
    RiemannSolution {
        kind,
        states: pair,
        phi,
    }
}

/// Self-similar solution evaluated on the ray `x / t = xi`.
pub fn eval_at_ray<T: Scalar>(sol: &RiemannSolution<T>, xi: T) -> T {
    let RiemannPair { rho_l, rho_r } = sol.states;
    match sol.kind {
        WaveKind::Constant => rho_l,
        WaveKind::Shock { speed } => {
            if xi < speed {
                rho_l
            } else {
                rho_r
            }
        }
        WaveKind::Rarefaction { edges } => {
            if xi <= edges[0] {
                rho_l
            } else if xi >= edges[1] {
                rho_r
            } else {
                (T::one() - xi / sol.phi) * T::half()
            }
        }
    }
}

/// Demand: `ρ(1−ρ)` below ½, capacity ¼ above.
#[inline]
pub fn demand<T: Scalar>(rho: T) -> T {
    if rho <= T::half() {
        unit_flux(rho)
    } else {
        T::quarter()
    }
}

/// Supply: capacity ¼ below ½, `ρ(1−ρ)` above.
#[inline]
pub fn supply<T: Scalar>(rho: T) -> T {
    if rho <= T::half() {
        T::quarter()
    } else {
        unit_flux(rho)
    }
}

/// Godunov interface flux in demand–supply form.
#[inline]
pub fn godunov_flux<T: Scalar>(pair: RiemannPair<T>, phi: T) -> T {
    godunov_flux_raw(pair.rho_l, pair.rho_r, phi)
}

/// [`godunov_flux`] without the pair wrapper, for inner loops.
#[inline]
pub fn godunov_flux_raw<T: Scalar>(rho_l: T, rho_r: T, phi: T) -> T {
    phi * demand(rho_l).min(supply(rho_r))
}
