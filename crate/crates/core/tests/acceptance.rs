//! Acceptance criteria. Runs without the libtest harness so that every line
//! reaches the console; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use bottleneck::analysis::{
    follow_shock, interaction_windows, runs_at_minimum, shock_speed, track_shock, undisturbed_until,
};
use bottleneck::gof::{self, Scheme};
use bottleneck::study::{converge, horizon_within_bound, StudySpec};
use bottleneck::validate::{validate_suite, PropertyResult, ValidateOptions};
use bottleneck::{builtin, wft, RunRecord, Scenario};

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn gof_stride1(name: &str) -> (Scenario, RunRecord, Duration) {
    let mut s = builtin(name).unwrap();
    s.numerics.stride = 1;
    let t = Instant::now();
    let r = gof::run::<f64>(&s, Scheme::Conservative).unwrap();
    (s, r, t.elapsed())
}

/// Slope of the shock before the states beside it are disturbed by a vehicle.
fn pre_interaction_slope(r: &RunRecord, rho_l: f64, rho_r: f64, x_jump: f64) -> (Option<f64>, f64) {
    let shock = follow_shock(r, rho_l, rho_r, x_jump);
    let end = undisturbed_until(r, &shock, rho_l, rho_r, 5, 0.1 * (rho_r - rho_l));
    let k1 = end.saturating_sub(1);
    (shock_speed(&shock, 0, k1), shock[k1].0)
}

fn fig6_shock_speed() -> Outcome {
    let (_, r, el) = gof_stride1("fig6");
    let (slope, t_end) = pre_interaction_slope(&r, 0.3, 0.9, 1.4);
    let pass = slope.is_some_and(|v| (v + 0.2).abs() <= 0.02) && el < Duration::from_secs(5);
    outcome(
        pass,
        format!("slope {slope:.4?} over [0, {t_end:.2}], target -0.2 ± 0.02; runtime {el:.2?} < 5s"),
    )
}

fn fig9_shock_speed() -> Outcome {
    let (s, r, el) = gof_stride1("fig9");
    let (pre, t_end) = pre_interaction_slope(&r, 0.85, 0.95, 3.5);
    let mut pass = pre.is_some_and(|v| (v + 0.8).abs() <= 0.05) && el < Duration::from_secs(20);
    let mut detail = format!("pre slope {pre:.4?} over [0, {t_end:.2}], target -0.8 ± 0.05");
    let shock = track_shock(&r, 0.85, 0.95);
    let betas: Vec<f64> = s.bottlenecks.iter().map(|b| b.phi.beta()).collect();
    let windows = interaction_windows(&r, &shock, &betas, 2.0 * s.numerics.dx);
    let mut seen = vec![false; betas.len()];
    for w in &windows {
        let v = shock_speed(&shock, w.k0, w.k1);
        let ok = match (v, pre) {
            (Some(v), Some(p)) => v.abs() <= 0.5 * p.abs(),
            _ => false,
        };
        seen[w.vehicle] = true;
        pass &= ok;
        detail += &format!("; vehicle {} [{:.2}, {:.2}] speed {v:.4?}", w.vehicle + 1, w.t0, w.t1);
    }
    pass &= seen.iter().all(|&x| x);
    detail += &format!("; |speed| ≤ 0.5·|pre| in all three; runtime {el:.2?} < 20s");
    outcome(pass, detail)
}

fn fig5_kinematics() -> Outcome {
    let (s, r, _) = gof_stride1("fig5");
    let y = r.trajectory(0);
    let t = &r.traj_t;
    let initial = (y[10] - y[0]) / (t[10] - t[0]);
    // the rarefaction reaches the vehicle when the state just ahead of its
    // support starts to drop below the left value
    let beta = s.bottlenecks[0].phi.beta();
    let k_int = (0..y.len())
        .find(|&k| {
            let m = ((y[k] + beta + 2.0 * r.dx - r.x0) / r.dx).floor() as usize;
            r.snapshots[k].values[m] < 0.9 - 0.01
        })
        .unwrap_or(y.len() - 1);
    let step = 10;
    let speeds: Vec<f64> = (k_int..y.len() - step)
        .step_by(step)
        .map(|k| (y[k + step] - y[k]) / (t[k + step] - t[k]))
        .collect();
    let drops = speeds.windows(2).filter(|w| w[1] < w[0]).count();
    let last = speeds.last().copied().unwrap_or(f64::NAN);
    let pass = (initial - 0.04).abs() <= 0.005 && drops == 0 && last > 0.15;
    outcome(
        pass,
        format!(
            "initial speed {initial:.4} (0.04 ± 0.005); from t = {:.2}: {} ten-step speeds, {drops} decreases, final {last:.4} > 0.15",
            t[k_int],
            speeds.len()
        ),
    )
}

fn model_b_ordering() -> Outcome {
    let mut pass = true;
    let mut detail = String::new();
    for name in ["fig8", "fig9"] {
        let s = builtin(name).unwrap();
        let r = gof::run::<f64>(&s, Scheme::Conservative).unwrap();
        let min = r
            .diagnostics
            .iter()
            .filter_map(|d| d.min_gap)
            .fold(f64::INFINITY, f64::min);
        pass &= min >= -1e-12;
        detail += &format!("{name} min gap {min:.3e} ≥ -1e-12; ");
        if name == "fig8" {
            let need = s.bottlenecks[0].phi.beta() + s.bottlenecks[1].phi.beta();
            let gap: Vec<f64> = r.traj_y.iter().map(|p| p[1] - p[0] - need).collect();
            let mut worst: f64 = 0.0;
            let mut n = 0;
            for (a, b) in runs_at_minimum(&gap, 1e-12) {
                if b == a {
                    continue;
                }
                let dt = r.traj_t[b] - r.traj_t[a];
                let v1 = (r.traj_y[b][0] - r.traj_y[a][0]) / dt;
                let v2 = (r.traj_y[b][1] - r.traj_y[a][1]) / dt;
                worst = worst.max((v1 - v2).abs());
                n += 1;
            }
            pass &= n > 0 && worst <= 1e-6;
            detail += &format!("fig8 {n} interval(s) at the minimum gap, max |v1 - v2| = {worst:.2e} ≤ 1e-6; ");
        }
    }
    outcome(pass, detail.trim_end_matches("; ").into())
}

fn property(results: &[PropertyResult], names: &[&str]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in names {
        let p = results.iter().find(|p| p.name == *n).expect("property exists");
        pass &= p.passed;
        parts.push(match &p.witness {
            None => format!("{n}: {} cases, no failures", p.cases),
            Some(w) => format!("{n}: failed on {w}"),
        });
    }
    outcome(pass, parts.join("; "))
}

fn wft_rate() -> Outcome {
    let mut s = builtin("fig5").unwrap();
    s.horizon = horizon_within_bound(&s).unwrap();
    let t = Instant::now();
    let rep = converge(&StudySpec::wft_refinement(s, (4..=9).collect())).unwrap();
    let el = t.elapsed();
    let ratio = rep.checks[0].value;
    let pass = rep.pass && el < Duration::from_secs(120);
    let gaps: Vec<String> = rep.gaps.iter().map(|g| format!("{g:.2e}")).collect();
    outcome(
        pass,
        format!(
            "T = {:.4}, gaps ν=4..8 [{}], fitted ratio {ratio:.3?} ≤ 0.7, strictly decreasing: {}; runtime {el:.2?} < 2min",
            rep.horizon,
            gaps.join(", "),
            rep.monotone
        ),
    )
}

fn cross_solver() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["fig5", "fig6", "fig7"] {
        let rep = converge(&StudySpec::cross_validate(builtin(name).unwrap())).unwrap();
        pass &= rep.pass;
        let c: Vec<String> = rep
            .checks
            .iter()
            .map(|c| format!("{} {:.4} ≤ {:.4}", c.name, c.value.unwrap_or(f64::NAN), c.bound))
            .collect();
        parts.push(format!("{name}: {}", c.join(", ")));
    }
    outcome(pass, parts.join("; "))
}

fn tv_budget() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["fig5", "fig6", "fig7"] {
        let s = builtin(name).unwrap();
        let r = wft::run_wft::<f64>(&s).unwrap();
        let tv0 = s.initial_density.total_variation();
        let k = r.summary.k_phi.unwrap();
        // the budget at every window end, not only at T
        let slack = r
            .diagnostics
            .iter()
            .skip(1)
            .map(|d| tv0 + k * d.t + 1e-6 - d.tv)
            .fold(f64::INFINITY, f64::min);
        let tv_t = r.diagnostics.last().unwrap().tv;
        pass &= slack >= 0.0;
        parts.push(format!(
            "{name}: TV(T) {tv_t:.4} ≤ {:.4}, min slack {slack:.4}",
            tv0 + k * s.horizon + 1e-6
        ));
    }
    outcome(pass, parts.join("; "))
}

fn main() -> ExitCode {
    let suite = validate_suite(&ValidateOptions::default()).unwrap();
    let criteria: Vec<Criterion> = vec![
        ("fig6 shock speed", Box::new(fig6_shock_speed)),
        ("fig9 shock speed and slowdown", Box::new(fig9_shock_speed)),
        ("fig5 bottleneck kinematics", Box::new(fig5_kinematics)),
        ("Model B non-overtaking", Box::new(model_b_ordering)),
        (
            "conservation and invariant domain",
            Box::new(|| property(&suite, &["conservation", "invariant_domain"])),
        ),
        (
            "sign invariance of the vehicle-frame speed",
            Box::new(|| property(&suite, &["sign_invariance"])),
        ),
        (
            "speed-separation margin",
            Box::new(|| property(&suite, &["speed_separation_margin"])),
        ),
        ("front-tracking trajectory convergence rate", Box::new(wft_rate)),
        ("cross-solver agreement", Box::new(cross_solver)),
        ("front-tracking TV budget", Box::new(tv_budget)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
