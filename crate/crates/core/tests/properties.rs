use bottleneck::gof::{self, Scheme};
use bottleneck::model::{check_speed_separation, rh_speed, BottleneckParams, PhiProfile, RiemannPair};
use bottleneck::record::{read_record, write_record, FILES};
use bottleneck::riemann::godunov_flux_raw;
use bottleneck::scenario::ModelSelector;
use bottleneck::validate::{random_scenario, with_steps};
use bottleneck::wft::{fan_riemann, FrontKind};
use bottleneck::{builtin, parse_scenario};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bump() -> impl Strategy<Value = PhiProfile<f64>> {
    (0.5..2.0f64, 0.2..1.0f64, 0.01..1.0f64)
        .prop_map(|(v_bar, frac, beta)| PhiProfile::exp_bump(v_bar, frac * v_bar, beta).unwrap())
}

fn unequal_pair() -> impl Strategy<Value = (f64, f64)> {
    (0.0..=1.0f64, 0.0..=1.0f64).prop_filter("states differ", |(a, b)| a != b)
}

fn model(k: u8) -> ModelSelector {
    match k % 3 {
        0 => ModelSelector::Single,
        1 => ModelSelector::MultiA,
        _ => ModelSelector::MultiB,
    }
}

#[test]
fn builtins_round_trip() {
    for name in ["fig5", "fig6", "fig7", "fig8", "fig9"] {
        let s = builtin(name).unwrap();
        assert_eq!(parse_scenario(&s.to_json()).unwrap(), s, "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn random_scenarios_round_trip(seed in any::<u64>(), k in any::<u8>()) {
        let s = random_scenario(&mut ChaCha8Rng::seed_from_u64(seed), model(k));
        let text = s.to_json();
        let back = parse_scenario(&text).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.to_json(), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    // the speed of a discontinuity in the vehicle frame keeps its sign across the support
    #[test]
    fn rh_sign_does_not_depend_on_position(phi in bump(), (l, r) in unequal_pair(), a in -1.0..1.0f64, b in -1.0..1.0f64) {
        let pair = RiemannPair::new(l, r).unwrap();
        let s1 = rh_speed(pair, a * phi.beta, &phi).unwrap();
        let s2 = rh_speed(pair, b * phi.beta, &phi).unwrap();
        prop_assert!(s1.signum() == s2.signum() || (s1 == 0.0 && s2 == 0.0), "{s1} vs {s2}");
    }

    #[test]
    fn vehicle_outruns_fronts_above_threshold(
        phi in bump(),
        w_frac in 0.01..0.99f64,
        floor in 1e-6..1.0f64,
        (a, b) in (0.0..=1.0f64, 0.0..=1.0f64),
        z in -1.0..1.0f64,
    ) {
        let params = BottleneckParams::new(w_frac * phi.v_under, phi).unwrap();
        let th = check_speed_separation(0.0, &params).threshold;
        let rho_min = th + floor * (1.0 - th);
        let sep = check_speed_separation(rho_min, &params);
        prop_assume!(sep.mu > 0.0);
        let (l, r) = (rho_min + a * (1.0 - rho_min), rho_min + b * (1.0 - rho_min));
        let lam = params.phi.eval(z * params.phi.beta) * (1.0 - l - r);
        let w = |x: f64| params.w_max * (1.0 - x);
        prop_assert!(w(l) > lam + sep.mu && w(r) > lam + sep.mu);
    }

    // slices of an approximated fan telescope back to the original pair
    #[test]
    fn fan_slices_telescope((l, r) in unequal_pair(), nu in 1u32..12) {
        let delta = bottleneck::wft::delta_nu::<f64>(nu);
        let fan = fan_riemann(l, r, delta);
        prop_assert_eq!(fan.first().unwrap().0, l);
        prop_assert_eq!(fan.last().unwrap().1, r);
        for w in fan.windows(2) {
            prop_assert_eq!(w[0].1, w[1].0);
        }
        for &(a, b, kind) in &fan {
            match kind {
                FrontKind::Shock => prop_assert!(a < b),
                FrontKind::RarefactionShock => prop_assert!(a > b && a - b <= delta * (1.0 + 1e-12)),
                FrontKind::SourceGenerated => prop_assert!(false, "fan produced a source front"),
            }
        }
        if l < r {
            prop_assert_eq!(fan.len(), 1);
        }
    }

    #[test]
    fn godunov_flux_is_consistent_and_monotone(
        (a, b) in (0.0..=1.0f64, 0.0..=1.0f64),
        d in 0.0..0.5f64,
        phi in 0.1..2.0f64,
    ) {
        let f = |r: f64| phi * r * (1.0 - r);
        prop_assert!((godunov_flux_raw(a, a, phi) - f(a)).abs() <= 1e-15);
        let g = godunov_flux_raw(a, b, phi);
        prop_assert!(godunov_flux_raw((a + d).min(1.0), b, phi) >= g - 1e-15);
        prop_assert!(godunov_flux_raw(a, (b + d).min(1.0), phi) <= g + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn records_write_read_write_identically(seed in any::<u64>(), k in any::<u8>()) {
        let s = random_scenario(&mut ChaCha8Rng::seed_from_u64(seed), model(k));
        let s = with_steps(s, 40).unwrap();
        let r = gof::run::<f64>(&s, Scheme::Conservative).unwrap();
        let tmp = tempfile::tempdir().unwrap();
        let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
        write_record(&a, &s, &r).unwrap();
        let doc = read_record(&a).unwrap();
        write_record(&b, &doc.scenario, &doc.record).unwrap();
        for f in FILES {
            prop_assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
        }
    }
}
