use bottleneck::analysis::{l1_distance, least_squares_slope};
use bottleneck::builtin;
use bottleneck::gof::{self, Scheme};
use bottleneck::record::{density_csv, diagnostics_csv, trajectory_csv};
use bottleneck::study::{converge, StudySpec};

#[test]
fn fig6_godunov_self_convergence() {
    let rep = converge(&StudySpec::gof_refinement(
        builtin("fig6").unwrap(),
        vec![0.04, 0.02, 0.01],
    ))
    .unwrap();
    assert!(rep.pass, "{rep:?}");
    assert!(rep.monotone);
    assert!(rep.checks[0].value.unwrap() >= 0.7);
}

#[test]
fn conservative_and_split_schemes_agree() {
    let s = builtin("fig5").unwrap();
    let a = gof::run::<f64>(&s, Scheme::Conservative).unwrap();
    let b = gof::run::<f64>(&s, Scheme::Split).unwrap();
    let d = l1_distance(&a.final_state.values, &b.final_state.values, s.numerics.dx);
    let bound = 10.0 * s.numerics.dx * s.initial_density.total_variation();
    assert!(d <= bound, "{d} > {bound}");
}

#[test]
fn fig5_trajectory_starts_slowly() {
    // the first ten steps, before the vehicle's own queue speeds it up
    let mut s = builtin("fig5").unwrap();
    s.horizon = 0.1;
    let r = gof::run::<f64>(&s, Scheme::Conservative).unwrap();
    let csv = trajectory_csv(&r);
    let rows: Vec<(f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split(',').map(|v| v.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    assert_eq!(rows[0], (0.0, 0.5));
    let (ts, ys): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let v = least_squares_slope(&ts, &ys).unwrap();
    assert!((v - 0.04).abs() < 0.005, "{v}");
}

#[test]
fn zero_horizon_gives_header_and_one_row() {
    let mut s = builtin("fig9").unwrap();
    s.horizon = 0.0;
    let r = gof::run::<f64>(&s, Scheme::Conservative).unwrap();
    for csv in [trajectory_csv(&r), density_csv(&r), diagnostics_csv(&r)] {
        assert_eq!(csv.lines().count(), 2, "{csv}");
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
    }
    assert!(trajectory_csv(&r).starts_with("t,y_1,y_2,y_3\n"));
}

#[test]
fn snapshot_count_follows_stride() {
    let mut s = builtin("fig7").unwrap();
    s.numerics.stride = 7;
    let r = gof::run::<f64>(&s, Scheme::Conservative).unwrap();
    let steps = r.summary.steps;
    assert_eq!(r.snapshots.len(), steps / 7 + 1);
    assert_eq!(r.traj_t.len(), steps + 1);
}
