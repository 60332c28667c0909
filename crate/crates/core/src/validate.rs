//! Property suite run by `bottleneck validate`: randomized checks of the
//! conservation, invariant-domain, sign, speed-separation, ordering and
//! total-variation properties. Failures are results, carried with a witness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gof::{self, cfl_dt, BottleneckState, DensityGrid, Scheme};
use crate::model::{check_speed_separation, rh_speed, BottleneckParams, PhiProfile, RiemannPair};
use crate::scenario::{Boundary, InitialDensity, ModelSelector, Numerics, PhiSpec, Scenario, VehicleSpec};
use crate::wft;

/// Deliberate defects, to show that the suite catches them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// The flux changes sign behind the vehicle (`ζ < 0`).
    FluxSignFlip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateOptions {
    pub seed: u64,
    /// Random samples for the pointwise properties.
    pub cases: usize,
    /// Random GOF scenarios for conservation, `[0, 1]` and ordering.
    pub scenarios: usize,
    pub steps: usize,
    /// Random front-tracking runs for the TV budget.
    pub wft_runs: usize,
    /// Overrides the GOF step of every generated scenario.
    pub dt: Option<f64>,
    pub mutation: Option<Mutation>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            seed: 7,
            cases: 10_000,
            scenarios: 100,
            steps: 1000,
            wft_runs: 12,
            dt: None,
            mutation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    /// First counterexample found.
    pub witness: Option<String>,
}

impl PropertyResult {
    fn new(name: &str, cases: usize, witness: Option<String>) -> Self {
        Self {
            name: name.into(),
            passed: witness.is_none(),
            cases,
            witness,
        }
    }
}

fn bump_vehicle<R: Rng>(rng: &mut R, position: f64) -> VehicleSpec {
    let v_bar = rng.gen_range(0.8..1.2);
    let v_under = rng.gen_range(0.3..1.0) * v_bar;
    VehicleSpec {
        position,
        w_max: rng.gen_range(0.05..0.95) * v_under,
        phi: PhiSpec::ExpBump {
            v_bar,
            v_under,
            beta: rng.gen_range(0.05..0.3),
        },
    }
}

fn random_density<R: Rng>(rng: &mut R) -> f64 {
    match rng.gen_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.gen_range(0.0..1.0),
    }
}

/// A valid scenario with random piecewise-constant data and vehicles.
/// Model B vehicles are sometimes placed exactly at the minimal spacing.
pub fn random_scenario<R: Rng>(rng: &mut R, model: ModelSelector) -> Scenario {
    let dx = [0.01, 0.02, 0.04][rng.gen_range(0..3)];
    let count = match model {
        ModelSelector::Single => 1,
        _ => rng.gen_range(2..=3),
    };
    let mut bottlenecks = Vec::with_capacity(count);
    let mut y = rng.gen_range(0.5..1.5);
    for i in 0..count {
        let mut v = bump_vehicle(rng, y);
        if i > 0 && model == ModelSelector::MultiB {
            let prev: &VehicleSpec = &bottlenecks[i - 1];
            let need = prev.phi.beta() + v.phi.beta();
            let extra = if rng.gen_bool(0.2) {
                0.0
            } else {
                rng.gen_range(0.0..0.5)
            };
            let mut p = prev.position + need + extra;
            // the validation compares the difference, which may round below `need`
            while p - prev.position < need {
                p = f64::from_bits(p.to_bits() + 1);
            }
            v.position = p;
        } else if i > 0 {
            v.position = bottlenecks[i - 1].position + rng.gen_range(0.1..1.0);
        }
        y = v.position;
        bottlenecks.push(v);
    }
    let cells = ((y + 1.5) / dx).ceil().max(100.0) as usize + rng.gen_range(0..100);
    let hi = cells as f64 * dx;
    let pieces = rng.gen_range(1..=4);
    let mut breakpoints: Vec<f64> = (1..pieces).map(|_| rng.gen_range(0.0..hi)).collect();
    breakpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breakpoints.dedup();
    let values = (0..=breakpoints.len()).map(|_| random_density(rng)).collect();
    Scenario {
        name: format!("random-{}", rng.gen::<u32>()),
        domain: [0.0, hi],
        horizon: rng.gen_range(0.0..2.0),
        initial_density: InitialDensity::PiecewiseConstant { breakpoints, values },
        model,
        bottlenecks,
        boundary: if rng.gen_bool(0.5) {
            Boundary::DirichletFrozen
        } else {
            Boundary::Outflow
        },
        numerics: Numerics {
            dx,
            dt: None,
            safety: rng.gen_range(0.5..1.0),
            nu: rng.gen_range(3..=6),
            wft_dt: None,
            stride: 1,
        },
    }
}

/// Sets the horizon to `steps` GOF steps at the automatic step size.
pub fn with_steps(mut s: Scenario, steps: usize) -> Result<Scenario> {
    let grid = DensityGrid::<f64>::from_initial(&s.initial_density, s.domain[0], s.numerics.dx, s.cells(), s.boundary)?;
    let b = BottleneckState::<f64>::from_scenario(&s)?;
    let dt = s
        .numerics
        .dt
        .unwrap_or_else(|| cfl_dt(&grid, &b, s.model, s.numerics.safety));
    s.numerics.dt = Some(dt);
    s.horizon = dt * steps as f64;
    Ok(s)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

struct GofOutcome {
    drift: Option<String>,
    domain: Option<String>,
    ordering: Option<String>,
    multi_b: bool,
}

fn gof_case(s: &Scenario) -> Result<GofOutcome> {
    let r = gof::run::<f64>(s, Scheme::Conservative)?;
    let doc = || serde_json::to_string(s).expect("scenario serializes");
    let drift =
        (r.summary.mass_drift_max > 1e-12).then(|| format!("mass drift {:e} in {}", r.summary.mass_drift_max, doc()));
    let outside = r.snapshots.iter().chain([&r.final_state]).find_map(|snap| {
        snap.values
            .iter()
            .position(|v| !(0.0..=1.0).contains(v))
            .map(|m| (snap.t, m, snap.values[m]))
    });
    let domain = outside.map(|(t, m, v)| format!("cell {m} = {v} at t = {t} in {}", doc()));
    let ordering = r
        .diagnostics
        .iter()
        .filter_map(|d| d.min_gap.map(|g| (d.t, g)))
        .find(|&(_, g)| g < -1e-12)
        .map(|(t, g)| format!("ordering gap {g:e} at t = {t} in {}", doc()));
    Ok(GofOutcome {
        drift,
        domain,
        ordering,
        multi_b: s.model == ModelSelector::MultiB,
    })
}

fn sign_invariance(opts: &ValidateOptions) -> PropertyResult {
    let mut rng = rng_for(opts.seed, 1);
    let flip = opts.mutation == Some(Mutation::FluxSignFlip);
    let mut witness = None;
    for _ in 0..opts.cases {
        let v_bar = rng.gen_range(0.5..2.0);
        let phi =
            PhiProfile::exp_bump(v_bar, rng.gen_range(0.1..1.0) * v_bar, rng.gen_range(0.01..1.0)).expect("valid bump");
        let (rl, rr) = (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0));
        if rl == rr {
            continue;
        }
        let pair = RiemannPair::new(rl, rr).expect("densities in range");
        let span = 1.5 * phi.beta;
        let (z1, z2) = (rng.gen_range(-span..span), rng.gen_range(-span..span));
        let speed = |z: f64| {
            let l = rh_speed(pair, z, &phi).expect("distinct states");
            if flip && z < 0.0 {
                -l
            } else {
                l
            }
        };
        let (l1, l2) = (speed(z1), speed(z2));
        if l1.partial_cmp(&0.0) != l2.partial_cmp(&0.0) {
            witness = Some(format!(
                "rho_l = {rl}, rho_r = {rr}, zeta_1 = {z1}, zeta_2 = {z2}: lambda = {l1} vs {l2}"
            ));
            break;
        }
    }
    PropertyResult::new("sign_invariance", opts.cases, witness)
}

/// One random configuration for the speed-separation margin: parameters with
/// `v_under > w_max`, a floor above the threshold, and a shock or
/// rarefaction shock with both states above the floor.
pub fn separation_sample<R: Rng>(rng: &mut R) -> (BottleneckParams<f64>, f64, f64, f64, f64) {
    let v_bar = rng.gen_range(0.5..2.0);
    let v_under = rng.gen_range(0.2..1.0) * v_bar;
    let w_max = rng.gen_range(0.01..0.99) * v_under;
    let phi = PhiProfile::exp_bump(v_bar, v_under, rng.gen_range(0.01..1.0)).expect("valid bump");
    let params = BottleneckParams::new(w_max, phi).expect("v_under > w_max");
    let threshold = check_speed_separation(0.0, &params).threshold;
    let rho_min = threshold + rng.gen_range(0.0..1.0) * (1.0 - threshold);
    let (rl, rr) = if rng.gen_bool(0.5) {
        let rl = rng.gen_range(rho_min..1.0);
        (rl, rng.gen_range(rl..=1.0))
    } else {
        let rr = rng.gen_range(rho_min..1.0);
        (rr + rng.gen_range(0.0..1.0) * (1.0 - rr), rr)
    };
    let zeta = rng.gen_range(-params.phi.beta..params.phi.beta);
    (params, rho_min, rl, rr, zeta)
}

fn speed_separation(opts: &ValidateOptions) -> PropertyResult {
    let mut rng = rng_for(opts.seed, 2);
    let flip = opts.mutation == Some(Mutation::FluxSignFlip);
    let mut witness = None;
    for _ in 0..opts.cases {
        let (p, rho_min, rl, rr, zeta) = separation_sample(&mut rng);
        if rl == rr {
            continue;
        }
        let pair = RiemannPair::new(rl, rr).expect("densities in range");
        let mu = check_speed_separation(rho_min, &p).mu;
        let mut lam = rh_speed(pair, zeta, &p.phi).expect("distinct states");
        if flip && zeta < 0.0 {
            lam = -lam;
        }
        let w = |r: f64| p.w_max * (1.0 - r);
        if !(w(rl) > lam + mu && w(rr) > lam + mu) {
            witness = Some(format!(
                "w_max = {}, v_bar = {}, v_under = {}, rho_min = {rho_min}, rho_l = {rl}, rho_r = {rr}, zeta = {zeta}: \
                 lambda + mu = {}",
                p.w_max,
                p.phi.v_bar,
                p.phi.v_under,
                lam + mu
            ));
            break;
        }
    }
    PropertyResult::new("speed_separation_margin", opts.cases, witness)
}

fn tv_budget(opts: &ValidateOptions) -> Result<PropertyResult> {
    let results: Vec<Result<Option<String>>> = (0..opts.wft_runs)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(opts.seed, 1000 + i as u64);
            let mut s = random_scenario(&mut rng, ModelSelector::Single);
            s.horizon = rng.gen_range(0.05..0.4);
            s.numerics.nu = rng.gen_range(3..=5);
            let r = wft::run_wft::<f64>(&s)?;
            let tv0 = r.diagnostics[0].tv;
            let tv = r.diagnostics.last().expect("initial row").tv;
            let k = r.summary.k_phi.unwrap_or(0.0);
            let t = r.traj_t.last().copied().unwrap_or(0.0);
            let bound = tv0 + k * t + 1e-9 * (t / r.summary.dt).ceil().max(1.0);
            Ok((tv > bound || r.summary.tv_violations > 0).then(|| {
                format!(
                    "TV {tv} above {bound} ({} window violations) in {}",
                    r.summary.tv_violations,
                    serde_json::to_string(&s).expect("scenario serializes")
                )
            }))
        })
        .collect();
    let mut witness = None;
    for r in results {
        if let Some(w) = r? {
            witness.get_or_insert(w);
        }
    }
    Ok(PropertyResult::new("tv_budget", opts.wft_runs, witness))
}

/// Runs every property. Configuration errors (for instance a step above the
/// CFL bound) are returned as errors, not as failed properties.
pub fn validate_suite(opts: &ValidateOptions) -> Result<Vec<PropertyResult>> {
    let models = [ModelSelector::Single, ModelSelector::MultiA, ModelSelector::MultiB];
    let scenarios = (0..opts.scenarios)
        .map(|i| {
            let mut rng = rng_for(opts.seed, 100 + i as u64);
            let mut s = random_scenario(&mut rng, models[i % 3]);
            if let Some(dt) = opts.dt {
                s.numerics.dt = Some(dt);
            }
            with_steps(s, opts.steps)
        })
        .collect::<Result<Vec<_>>>()?;
    let outcomes = scenarios.par_iter().map(gof_case).collect::<Vec<_>>();
    let mut drift = None;
    let mut domain = None;
    let mut ordering = None;
    let mut ordered_runs = 0;
    for o in outcomes {
        let o = match o {
            Ok(o) => o,
            Err(e) if e.is_configuration() => return Err(e),
            Err(e) => GofOutcome {
                drift: Some(format!("run failed: {e}")),
                domain: matches!(e, Error::DensityOutOfRange { .. }).then(|| e.to_string()),
                ordering: None,
                multi_b: false,
            },
        };
        ordered_runs += o.multi_b as usize;
        drift = drift.or(o.drift);
        domain = domain.or(o.domain);
        ordering = ordering.or(o.ordering);
    }
    Ok(vec![
        PropertyResult::new("conservation", opts.scenarios, drift),
        PropertyResult::new("invariant_domain", opts.scenarios, domain),
        sign_invariance(opts),
        speed_separation(opts),
        PropertyResult::new("model_b_ordering", ordered_runs, ordering),
        tv_budget(opts)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ValidateOptions {
        ValidateOptions {
            cases: 2000,
            scenarios: 6,
            steps: 100,
            wft_runs: 2,
            ..ValidateOptions::default()
        }
    }

    #[test]
    fn random_scenarios_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 0..200 {
            let s = random_scenario(
                &mut rng,
                [ModelSelector::Single, ModelSelector::MultiA, ModelSelector::MultiB][k % 3],
            );
            s.validate().unwrap();
        }
    }

    #[test]
    fn suite_passes_and_is_deterministic() {
        let a = validate_suite(&small()).unwrap();
        assert!(a.iter().all(|p| p.passed), "{a:?}");
        assert_eq!(a, validate_suite(&small()).unwrap());
    }

    #[test]
    fn sign_flip_is_caught_with_a_witness() {
        let opts = ValidateOptions {
            mutation: Some(Mutation::FluxSignFlip),
            ..small()
        };
        let r = sign_invariance(&opts);
        assert!(!r.passed);
        let w = r.witness.unwrap();
        assert!(w.contains("rho_l") && w.contains("zeta_1"), "{w}");
    }

    #[test]
    fn step_above_cfl_is_a_configuration_error() {
        let opts = ValidateOptions {
            dt: Some(1.0),
            ..small()
        };
        assert!(validate_suite(&opts).unwrap_err().is_configuration());
    }
}
