//! Scenario description, JSON parsing and the built-in experiment library.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::model::{BottleneckParams, PhiProfile};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSelector {
    Single,
    MultiA,
    MultiB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Ghost cells keep the initial boundary values.
    #[default]
    DirichletFrozen,
    /// Ghost cells copy the adjacent interior cell.
    Outflow,
}

/// Initial density on the whole line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDensity {
    /// `values[0]` for `x ≤ b_0`, `values[j]` on `(b_{j−1}, b_j]`, last value beyond.
    PiecewiseConstant { breakpoints: Vec<f64>, values: Vec<f64> },
    /// Piecewise linear through `(x, ρ)` points, constant outside.
    Tabulated { points: Vec<[f64; 2]> },
}

impl InitialDensity {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            InitialDensity::PiecewiseConstant { breakpoints, values } => {
                values[breakpoints.partition_point(|&b| b < x)]
            }
            InitialDensity::Tabulated { points } => {
                let k = points.partition_point(|p| p[0] <= x);
                if k == 0 {
                    points[0][1]
                } else if k == points.len() {
                    points[k - 1][1]
                } else {
                    let (a, b) = (points[k - 1], points[k]);
                    a[1] + (b[1] - a[1]) * (x - a[0]) / (b[0] - a[0])
                }
            }
        }
    }

    /// `∫_a^b ρ̄`, exact.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match self {
            InitialDensity::PiecewiseConstant { breakpoints, values } => {
                let mut acc = 0.0;
                let mut lo = a;
                let mut k = breakpoints.partition_point(|&p| p <= a);
                while lo < b {
                    let hi = if k < breakpoints.len() {
                        breakpoints[k].min(b)
                    } else {
                        b
                    };
                    acc += values[k] * (hi - lo);
                    lo = hi;
                    k += 1;
                }
                acc
            }
            InitialDensity::Tabulated { points } => {
                let mut knots = vec![a];
                knots.extend(points.iter().map(|p| p[0]).filter(|&x| x > a && x < b));
                knots.push(b);
                knots
                    .windows(2)
                    .map(|w| 0.5 * (w[1] - w[0]) * (self.eval(w[0]) + self.eval(w[1])))
                    .sum()
            }
        }
    }

    pub fn cell_average(&self, a: f64, b: f64) -> f64 {
        (self.integral(a, b) / (b - a)).clamp(self.inf(), self.sup())
    }

    fn nodes(&self) -> Vec<f64> {
        match self {
            InitialDensity::PiecewiseConstant { values, .. } => values.clone(),
            InitialDensity::Tabulated { points } => points.iter().map(|p| p[1]).collect(),
        }
    }

    pub fn sup(&self) -> f64 {
        self.nodes().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn inf(&self) -> f64 {
        self.nodes().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn total_variation(&self) -> f64 {
        self.nodes().windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }
}

/// Capacity profile in configuration form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    ExpBump {
        v_bar: f64,
        v_under: f64,
        beta: f64,
    },
    /// `(ζ, φ(ζ))` samples on `[−β, β]`, including `ζ = 0`.
    Tabulated {
        samples: Vec<[f64; 2]>,
    },
}

impl PhiSpec {
    pub fn build<T: Scalar>(&self) -> Result<PhiProfile<T>> {
        match self {
            PhiSpec::ExpBump { v_bar, v_under, beta } => {
                PhiProfile::exp_bump(T::lit(*v_bar), T::lit(*v_under), T::lit(*beta))
            }
            PhiSpec::Tabulated { samples } => {
                let s: Vec<(T, T)> = samples.iter().map(|p| (T::lit(p[0]), T::lit(p[1]))).collect();
                PhiProfile::tabulated(&s)
            }
        }
    }

    pub fn beta(&self) -> f64 {
        match self {
            PhiSpec::ExpBump { beta, .. } => *beta,
            PhiSpec::Tabulated { samples } => samples.last().map_or(0.0, |s| s[0]),
        }
    }

    pub fn v_bar(&self) -> f64 {
        match self {
            PhiSpec::ExpBump { v_bar, .. } => *v_bar,
            PhiSpec::Tabulated { samples } => samples.first().map_or(0.0, |s| s[1]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSpec {
    pub position: f64,
    pub w_max: f64,
    pub phi: PhiSpec,
}

impl VehicleSpec {
    pub fn params<T: Scalar>(&self) -> Result<BottleneckParams<T>> {
        BottleneckParams::new(T::lit(self.w_max), self.phi.build()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    pub dx: f64,
    /// GOF time step; `None` selects `safety · dx / (2 Φ_sup)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "one")]
    pub safety: f64,
    #[serde(default = "default_nu")]
    pub nu: u32,
    /// WFT splitting step; `None` selects `0.5 / ‖φ′‖_∞`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wft_dt: Option<f64>,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn one() -> f64 {
    1.0
}

fn default_nu() -> u32 {
    8
}

fn default_stride() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub domain: [f64; 2],
    #[serde(rename = "T")]
    pub horizon: f64,
    pub initial_density: InitialDensity,
    pub model: ModelSelector,
    pub bottlenecks: Vec<VehicleSpec>,
    #[serde(default)]
    pub boundary: Boundary,
    pub numerics: Numerics,
}

impl Scenario {
    pub fn cells(&self) -> usize {
        ((self.domain[1] - self.domain[0]) / self.numerics.dx).round() as usize
    }

    pub fn positions(&self) -> Vec<f64> {
        self.bottlenecks.iter().map(|b| b.position).collect()
    }

    /// Every problem found, field by field.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut bad = |f: &str, m: String| out.push(Violation::new(f, m));
        let [lo, hi] = self.domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            bad("domain", format!("need finite lo < hi, got [{lo}, {hi}]"));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            bad("T", format!("horizon must be finite and >= 0, got {}", self.horizon));
        }
        match &self.initial_density {
            InitialDensity::PiecewiseConstant { breakpoints, values } => {
                if values.len() != breakpoints.len() + 1 {
                    bad(
                        "initial_density.values",
                        format!(
                            "expected {} values for {} breakpoints",
                            breakpoints.len() + 1,
                            breakpoints.len()
                        ),
                    );
                }
                if breakpoints.windows(2).any(|w| !(w[0] < w[1])) || breakpoints.iter().any(|b| !b.is_finite()) {
                    bad(
                        "initial_density.breakpoints",
                        "must be finite and strictly ascending".into(),
                    );
                }
                for (k, v) in values.iter().enumerate() {
                    if !(0.0..=1.0).contains(v) {
                        bad(
                            &format!("initial_density.values[{k}]"),
                            format!("density {v} outside [0, 1]"),
                        );
                    }
                }
            }
            InitialDensity::Tabulated { points } => {
                if points.is_empty() {
                    bad("initial_density.points", "need at least one point".into());
                }
                if points.windows(2).any(|w| !(w[0][0] < w[1][0])) || points.iter().any(|p| !p[0].is_finite()) {
                    bad(
                        "initial_density.points",
                        "x must be finite and strictly ascending".into(),
                    );
                }
                for (k, p) in points.iter().enumerate() {
                    if !(0.0..=1.0).contains(&p[1]) {
                        bad(
                            &format!("initial_density.points[{k}]"),
                            format!("density {} outside [0, 1]", p[1]),
                        );
                    }
                }
            }
        }
        if self.bottlenecks.is_empty() {
            bad("bottlenecks", "need at least one bottleneck".into());
        }
        if self.model == ModelSelector::Single && self.bottlenecks.len() != 1 {
            bad(
                "bottlenecks",
                format!(
                    "single model needs exactly one bottleneck, got {}",
                    self.bottlenecks.len()
                ),
            );
        }
        for (i, b) in self.bottlenecks.iter().enumerate() {
            if !(b.position >= lo && b.position < hi) {
                bad(
                    &format!("bottlenecks[{i}].position"),
                    format!("{} outside domain [{lo}, {hi})", b.position),
                );
            }
            if let Err(e) = b.params::<f64>() {
                bad(&format!("bottlenecks[{i}]"), e.to_string());
            }
        }
        if self.model == ModelSelector::MultiB {
            for (i, w) in self.bottlenecks.windows(2).enumerate() {
                let need = w[0].phi.beta() + w[1].phi.beta();
                let gap = w[1].position - w[0].position;
                if !(gap >= need) {
                    bad(
                        &format!("bottlenecks[{}].position", i + 1),
                        format!("gap {gap} to the vehicle behind is below beta sum {need}"),
                    );
                }
            }
        }
        let n = &self.numerics;
        if !(n.dx > 0.0 && n.dx.is_finite()) {
            bad("numerics.dx", format!("must be positive, got {}", n.dx));
        } else if lo < hi {
            let cells = (hi - lo) / n.dx;
            if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) || cells.round() < 1.0 {
                bad(
                    "numerics.dx",
                    format!("domain length is not a whole number of cells ({cells})"),
                );
            }
        }
        if let Some(dt) = n.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                bad("numerics.dt", format!("must be positive, got {dt}"));
            }
        }
        if let Some(dt) = n.wft_dt {
            if !(dt > 0.0 && dt.is_finite()) {
                bad("numerics.wft_dt", format!("must be positive, got {dt}"));
            }
        }
        if !(n.safety > 0.0 && n.safety <= 1.0) {
            bad("numerics.safety", format!("must lie in (0, 1], got {}", n.safety));
        }
        if n.stride == 0 {
            bad("numerics.stride", "must be at least 1".into());
        }
        if n.nu == 0 || n.nu > 24 {
            bad("numerics.nu", format!("must lie in 1..=24, got {}", n.nu));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Scenario(v))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

/// Parses and validates a JSON scenario.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let s: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = match e.path().to_string() {
            p if p == "." || p == "?" => format!("line {} column {}", e.inner().line(), e.inner().column()),
            p => p,
        };
        Error::Scenario(vec![Violation::new(field, e.into_inner().to_string())])
    })?;
    s.validate()?;
    Ok(s)
}

pub const BUILTIN_NAMES: [&str; 5] = ["fig5", "fig6", "fig7", "fig8", "fig9"];

fn bump(v_under: f64, beta: f64) -> PhiSpec {
    PhiSpec::ExpBump {
        v_bar: 1.0,
        v_under,
        beta,
    }
}

fn numerics() -> Numerics {
    Numerics {
        dx: 0.02,
        dt: Some(0.01),
        safety: 1.0,
        nu: 8,
        wft_dt: None,
        stride: 10,
    }
}

fn single(name: &str, t: f64, breakpoints: Vec<f64>, values: Vec<f64>) -> Scenario {
    Scenario {
        name: name.into(),
        domain: [0.0, 3.0],
        horizon: t,
        initial_density: InitialDensity::PiecewiseConstant { breakpoints, values },
        model: ModelSelector::Single,
        bottlenecks: vec![VehicleSpec {
            position: 0.5,
            w_max: 0.4,
            phi: bump(0.6, 0.1),
        }],
        boundary: Boundary::DirichletFrozen,
        numerics: numerics(),
    }
}

fn three(name: &str, hi: f64, jump: f64, values: [f64; 2], y: [f64; 3], w: [f64; 3]) -> Scenario {
    Scenario {
        name: name.into(),
        domain: [0.0, hi],
        horizon: 5.0,
        initial_density: InitialDensity::PiecewiseConstant {
            breakpoints: vec![jump],
            values: values.to_vec(),
        },
        model: ModelSelector::MultiB,
        bottlenecks: (0..3)
            .map(|i| VehicleSpec {
                position: y[i],
                w_max: w[i],
                phi: bump(0.5, 0.25),
            })
            .collect(),
        boundary: Boundary::DirichletFrozen,
        numerics: numerics(),
    }
}

/// The numerical experiments: one bottleneck against a rarefaction (fig5),
/// a shock (fig6), both (fig7); three vehicles against a rarefaction (fig8)
/// and a shock (fig9).
pub fn builtin(name: &str) -> Result<Scenario> {
    let s = match name {
        "fig5" => single("fig5", 3.0, vec![1.4], vec![0.9, 0.45]),
        "fig6" => single("fig6", 2.5, vec![1.4], vec![0.3, 0.9]),
        "fig7" => single("fig7", 3.0, vec![0.6, 1.6], vec![0.9, 0.25, 0.9]),
        "fig8" => three("fig8", 5.0, 2.5, [0.9, 0.1], [1.0, 1.5, 2.0], [0.49, 0.4, 0.4]),
        "fig9" => three("fig9", 6.0, 3.5, [0.85, 0.95], [1.0, 2.0, 3.0], [0.4, 0.4, 0.4]),
        other => return Err(Error::UnknownBuiltin(other.into())),
    };
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_valid_and_match_tables() {
        for name in BUILTIN_NAMES {
            let s = builtin(name).unwrap();
            assert!(s.violations().is_empty(), "{name}: {:?}", s.violations());
        }
        let s = builtin("fig5").unwrap();
        assert_eq!(
            s.initial_density,
            InitialDensity::PiecewiseConstant {
                breakpoints: vec![1.4],
                values: vec![0.9, 0.45]
            }
        );
        assert_eq!(builtin("fig8").unwrap().positions(), vec![1.0, 1.5, 2.0]);
        let s = builtin("fig9").unwrap();
        assert_eq!(
            s.initial_density,
            InitialDensity::PiecewiseConstant {
                breakpoints: vec![3.5],
                values: vec![0.85, 0.95]
            }
        );
        assert!(matches!(builtin("fig4"), Err(Error::UnknownBuiltin(_))));
    }

    #[test]
    fn json_round_trip() {
        for name in BUILTIN_NAMES {
            let s = builtin(name).unwrap();
            let back = parse_scenario(&s.to_json()).unwrap();
            assert_eq!(back, s);
        }
    }

    #[test]
    fn out_of_range_density_names_field() {
        let mut s = builtin("fig5").unwrap();
        s.initial_density = InitialDensity::PiecewiseConstant {
            breakpoints: vec![1.4],
            values: vec![1.2, 0.45],
        };
        let err = parse_scenario(&s.to_json()).unwrap_err();
        match err {
            Error::Scenario(v) => assert_eq!(v[0].field, "initial_density.values[0]"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn gap_below_beta_sum_rejected() {
        let mut s = builtin("fig8").unwrap();
        s.bottlenecks[1].position = 1.49;
        let v = s.violations();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "bottlenecks[1].position");
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = builtin("fig6")
            .unwrap()
            .to_json()
            .replacen("\"name\"", "\"colour\": 1, \"name\"", 1);
        assert!(matches!(parse_scenario(&text), Err(Error::Scenario(_))));
    }

    #[test]
    fn piecewise_constant_conventions() {
        let d = InitialDensity::PiecewiseConstant {
            breakpoints: vec![0.6, 1.6],
            values: vec![0.9, 0.25, 0.9],
        };
        assert_eq!(d.eval(0.6), 0.9);
        assert_eq!(d.eval(0.61), 0.25);
        assert_eq!(d.eval(1.6), 0.25);
        assert!((d.integral(0.5, 0.7) - (0.09 + 0.025)).abs() < 1e-15);
        assert!((d.total_variation() - 1.3).abs() < 1e-15);
        assert_eq!(d.sup(), 0.9);
    }

    #[test]
    fn tabulated_density_integral() {
        let d = InitialDensity::Tabulated {
            points: vec![[0.0, 0.0], [1.0, 1.0]],
        };
        assert!((d.integral(-1.0, 2.0) - 1.5).abs() < 1e-15);
        assert_eq!(d.eval(0.25), 0.25);
        assert_eq!(d.total_variation(), 1.0);
    }
}
