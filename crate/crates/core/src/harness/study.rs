use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::series::{
    error_vs_drift, error_vs_reference, observables, Components, ErrorSeries, ObservableSeries,
};
use super::spec::ExperimentSpec;
use super::{run_boris, run_drift, run_reference};
use crate::boris::{Trajectory, Variant};
use crate::error::{Error, Result};

/// Accepted band for a fitted convergence order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderGate {
    pub lo: f64,
    pub hi: f64,
}

impl OrderGate {
    pub const SECOND_ORDER: OrderGate = OrderGate { lo: 1.7, hi: 2.3 };

    pub fn contains(&self, slope: f64) -> bool {
        slope >= self.lo && slope <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum StudyMode {
    /// One epsilon, several step sizes, errors against the fine reference.
    FixedEps { h_list: Vec<f64> },
    /// `(epsilon, h)` pairs with `h^2 / epsilon` fixed, errors against the drift solution.
    ScaledPairs { pairs: Vec<(f64, f64)> },
}

impl StudyMode {
    pub fn name(&self) -> &'static str {
        match self {
            StudyMode::FixedEps { .. } => "fixed_eps",
            StudyMode::ScaledPairs { .. } => "scaled_pairs",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub epsilon: f64,
    pub h: f64,
    pub steps: u64,
    pub max: Components<f64>,
    pub sigma_min: Option<f64>,
    pub warnings: usize,
    #[serde(skip)]
    pub series: ErrorSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub mode: String,
    pub points: Vec<ConvergencePoint>,
    /// Least-squares slope of `log(max error)` against `log(h)`.
    pub slopes: Option<Components<f64>>,
    pub gate: OrderGate,
    pub pass: bool,
    pub diagnostics: Vec<String>,
}

/// Least-squares slope of `log y` against `log x`. `None` with fewer than two
/// points or any non-positive value.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return None;
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Fits slopes over `points` and applies `gate` to each component.
pub fn report_from_points(mode: &str, points: Vec<ConvergencePoint>, gate: OrderGate) -> ConvergenceReport {
    let mut diagnostics = Vec::new();
    let hs: Vec<f64> = points.iter().map(|p| p.h).collect();
    let col = |f: fn(&Components<f64>) -> f64| points.iter().map(|p| f(&p.max)).collect::<Vec<_>>();
    let (er, ez, ev) = (col(|c| c.r), col(|c| c.z), col(|c| c.vpar));

    let has_zero = [&er, &ez, &ev].iter().any(|c| c.iter().any(|&e| e == 0.0));
    let slopes = if has_zero {
        diagnostics.push("fit skipped: an error is exactly zero".to_string());
        None
    } else {
        match (fit_slope(&hs, &er), fit_slope(&hs, &ez), fit_slope(&hs, &ev)) {
            (Some(r), Some(z), Some(vpar)) => Some(Components { r, z, vpar }),
            _ => {
                diagnostics.push("fit skipped: need two distinct finite step sizes".to_string());
                None
            }
        }
    };
    let pass = match slopes {
        Some(s) => {
            for (name, v) in [("r", s.r), ("z", s.z), ("vpar", s.vpar)] {
                if !gate.contains(v) {
                    diagnostics.push(format!(
                        "slope {name} = {v:.4} outside [{}, {}]",
                        gate.lo, gate.hi
                    ));
                }
            }
            s.to_array().iter().all(|&v| gate.contains(v))
        }
        None => false,
    };
    ConvergenceReport {
        mode: mode.to_string(),
        points,
        slopes,
        gate,
        pass,
        diagnostics,
    }
}

fn point(spec: &ExperimentSpec, traj: &Trajectory, series: ErrorSeries) -> ConvergencePoint {
    ConvergencePoint {
        epsilon: spec.epsilon,
        h: spec.h,
        steps: traj.steps as u64,
        max: series.max,
        sigma_min: traj.sigma_min,
        warnings: traj.warnings.len(),
        series,
    }
}

fn boris_observables(spec: &ExperimentSpec) -> Result<(ObservableSeries, Trajectory)> {
    let traj = run_boris(spec)?;
    let obs = observables(&traj, &spec.model()?, spec.r_min)?;
    Ok((obs, traj))
}

fn reference_observables(spec: &ExperimentSpec) -> Result<ObservableSeries> {
    let traj = run_reference(spec)?;
    observables(&traj, &spec.model()?, spec.r_min)
}

/// Convergence of the Modified pusher. Runs execute in parallel; the report
/// is assembled in input order.
pub fn convergence_study(base: &ExperimentSpec, mode: &StudyMode) -> Result<ConvergenceReport> {
    match mode {
        StudyMode::ScaledPairs { pairs } => {
            if pairs.len() < 2 {
                return Err(Error::InvalidInput("convergence study needs at least 2 runs".into()));
            }
            let k0 = pairs[0].1 * pairs[0].1 / pairs[0].0;
            for &(eps, h) in pairs {
                let k = h * h / eps;
                if (k - k0).abs() > 1e-12 * k0.abs() {
                    return Err(Error::InvalidInput(format!(
                        "h^2/eps must be constant across pairs: {k} vs {k0}"
                    )));
                }
            }
            let specs: Vec<ExperimentSpec> = pairs
                .iter()
                .map(|&(eps, h)| {
                    let mut s = base.clone();
                    s.epsilon = eps;
                    s.h = h;
                    s.variant = Variant::Modified;
                    s.t_final = s.c / eps;
                    s
                })
                .collect();
            let points = specs
                .par_iter()
                .map(|s| {
                    let (obs, traj) = boris_observables(s)?;
                    let drift = run_drift(s)?;
                    let err = error_vs_drift(&obs, &drift)?;
                    Ok(point(s, &traj, err))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(report_from_points(mode.name(), points, OrderGate::SECOND_ORDER))
        }
        StudyMode::FixedEps { h_list } => {
            if h_list.len() < 2 {
                return Err(Error::InvalidInput("convergence study needs at least 2 runs".into()));
            }
            let specs: Vec<ExperimentSpec> = h_list
                .iter()
                .map(|&h| {
                    let mut s = base.clone();
                    s.h = h;
                    s.variant = Variant::Modified;
                    s
                })
                .collect();
            for s in &specs {
                s.validate()?;
            }
            // One reference per distinct output spacing.
            let mut keys: Vec<u64> = specs.iter().map(|s| s.grid().dt.to_bits()).collect();
            keys.sort_unstable();
            keys.dedup();
            let refs: HashMap<u64, ObservableSeries> = keys
                .par_iter()
                .map(|&k| {
                    let s = specs.iter().find(|s| s.grid().dt.to_bits() == k).unwrap();
                    reference_observables(s).map(|o| (k, o))
                })
                .collect::<Result<_>>()?;
            let points = specs
                .par_iter()
                .map(|s| {
                    let (obs, traj) = boris_observables(s)?;
                    let err = error_vs_reference(&obs, &refs[&s.grid().dt.to_bits()])?;
                    Ok(point(s, &traj, err))
                })
                .collect::<Result<Vec<_>>>()?;
            // Against the reference the O(eps) gyration floor masks the order,
            // so only boundedness is gated here.
            let mut report = report_from_points(mode.name(), points, OrderGate::SECOND_ORDER);
            report.pass = report
                .points
                .iter()
                .all(|p| p.max.to_array().iter().all(|e| e.is_finite()));
            report
                .diagnostics
                .push("fixed_eps: pass means finite errors; slopes are informational".into());
            Ok(report)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Entry {
    pub epsilon: f64,
    pub h_ref: f64,
    pub steps: u64,
    pub max: Components<f64>,
    #[serde(skip)]
    pub series: ErrorSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub c: f64,
    pub entries: Vec<Theorem1Entry>,
    /// `max_err(eps_i) / max_err(eps_{i+1})` per consecutive pair.
    pub ratios: Vec<Components<f64>>,
    /// `eps_i / eps_{i+1}`.
    pub expected: Vec<f64>,
    /// Ratios must lie in `[expected / band, expected * band]`.
    pub band: f64,
    pub pass: bool,
}

/// Fine reference against the drift solution for each epsilon over `[0, c/eps]`.
pub fn theorem1_suite(base: &ExperimentSpec, eps_list: &[f64], c: f64) -> Result<Theorem1Report> {
    if eps_list.is_empty() {
        return Err(Error::InvalidInput("eps_list is empty".into()));
    }
    let specs: Vec<ExperimentSpec> = eps_list
        .iter()
        .map(|&eps| {
            let mut s = base.clone();
            s.epsilon = eps;
            s.c = c;
            s.t_final = c / eps;
            // Sample exactly at the output stride.
            s.h = s.output_stride;
            s
        })
        .collect();
    for s in &specs {
        s.validate()?;
        let steps = s.reference_steps();
        if steps > s.budget_steps {
            return Err(Error::BudgetExceeded {
                steps,
                budget: s.budget_steps,
            });
        }
    }
    let entries = specs
        .par_iter()
        .map(|s| {
            let reference = reference_observables(s)?;
            let drift = run_drift(s)?;
            let err = error_vs_drift(&reference, &drift)?;
            Ok(Theorem1Entry {
                epsilon: s.epsilon,
                h_ref: s.reference_step().1,
                steps: s.reference_steps(),
                max: err.max,
                series: err,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let band = 3.0;
    let mut ratios = Vec::new();
    let mut expected = Vec::new();
    let mut pass = true;
    for w in entries.windows(2) {
        let ratio = w[0].max.zip_with(w[1].max, |a, b| a / b);
        let exp = w[0].epsilon / w[1].epsilon;
        pass &= ratio
            .to_array()
            .iter()
            .all(|&q| q >= exp / band && q <= exp * band);
        ratios.push(ratio);
        expected.push(exp);
    }
    Ok(Theorem1Report {
        c,
        entries,
        ratios,
        expected,
        band,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantContrast {
    pub epsilon: f64,
    pub h: f64,
    pub t_final: f64,
    pub standard: Components<f64>,
    pub modified: Components<f64>,
    /// Standard over Modified max `z` error.
    pub ratio_z: f64,
}

/// Standard and Modified pushers at the same large step, both measured
/// against one fine reference.
pub fn variant_contrast(spec: &ExperimentSpec) -> Result<VariantContrast> {
    let reference = reference_observables(spec)?;
    let variants = [Variant::Standard, Variant::Modified];
    let errs = variants
        .par_iter()
        .map(|&v| {
            let mut s = spec.clone();
            s.variant = v;
            let (obs, _) = boris_observables(&s)?;
            Ok(error_vs_reference(&obs, &reference)?.max)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VariantContrast {
        epsilon: spec.epsilon,
        h: spec.h,
        t_final: spec.grid().t_final(),
        standard: errs[0],
        modified: errs[1],
        ratio_z: errs[0].z / errs[1].z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::{drift_init, drift_rhs, drift_on_grid, DriftConfig, DriftState};
    use crate::field::ToroidalFieldModel;

    #[test]
    fn slope_of_power_law() {
        let xs = [0.1, 0.05, 0.025, 0.0125];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
        assert!((fit_slope(&xs, &ys).unwrap() - 2.0).abs() < 1e-12);
        assert!(fit_slope(&xs[..1], &ys[..1]).is_none());
        assert!(fit_slope(&[0.1, 0.2], &[0.0, 1.0]).is_none());
    }

    fn euler_drift(model: &ToroidalFieldModel, mu0: f64, s0: DriftState, eps: f64, h: f64, t: f64) -> DriftState {
        let n = (t / h).round() as usize;
        let mut s = s0;
        for _ in 0..n {
            let d = drift_rhs(&s, model, mu0 / eps).unwrap();
            s = DriftState::new(s.r_t + h * eps * d[0], s.z_t + h * eps * d[1], s.v_t + h * eps * d[2]);
        }
        s
    }

    #[test]
    fn first_order_method_fails_the_gate() {
        let spec = ExperimentSpec::paper(1e-1, 0.5);
        let model = spec.model().unwrap();
        let mu0 = crate::boris::magnetic_moment(spec.x0, spec.v0, &model).unwrap();
        let s0 = drift_init(spec.x0, spec.v0, &model).unwrap();
        let t = 5.0;
        let exact = drift_on_grid(s0, &model, &DriftConfig::new(0.1, mu0), &[0.0, t]).unwrap();
        let e = exact.last().unwrap();
        let points = [0.5, 0.25, 0.125, 0.0625]
            .iter()
            .map(|&h| {
                let s = euler_drift(&model, mu0, s0, 0.1, h, t);
                ConvergencePoint {
                    epsilon: 0.1,
                    h,
                    steps: (t / h) as u64,
                    max: Components {
                        r: (s.r_t - e.r_t).abs(),
                        z: (s.z_t - e.z_t).abs(),
                        vpar: (s.v_t - e.v_t).abs(),
                    },
                    sigma_min: None,
                    warnings: 0,
                    series: ErrorSeries::default(),
                }
            })
            .collect();
        let report = report_from_points("euler", points, OrderGate::SECOND_ORDER);
        let slopes = report.slopes.unwrap();
        for s in slopes.to_array() {
            assert!((s - 1.0).abs() < 0.15, "slope {s}");
        }
        assert!(!report.pass);
    }

    #[test]
    fn zero_error_skips_fit() {
        let p = |h: f64| ConvergencePoint {
            epsilon: 1.0,
            h,
            steps: 1,
            max: Components { r: 0.0, z: h, vpar: h },
            sigma_min: None,
            warnings: 0,
            series: ErrorSeries::default(),
        };
        let rep = report_from_points("x", vec![p(0.1), p(0.2)], OrderGate::SECOND_ORDER);
        assert!(rep.slopes.is_none());
        assert!(!rep.pass);
        assert!(!rep.diagnostics.is_empty());
    }

    #[test]
    fn study_preconditions() {
        let base = ExperimentSpec::paper(1e-2, 0.5);
        let one = StudyMode::ScaledPairs { pairs: vec![(1e-3, 0.04)] };
        assert!(convergence_study(&base, &one).is_err());
        let skew = StudyMode::ScaledPairs {
            pairs: vec![(1e-3, 0.04), (2.5e-4, 0.021)],
        };
        assert!(matches!(convergence_study(&base, &skew), Err(Error::InvalidInput(_))));
        assert!(theorem1_suite(&base, &[], 0.5).is_err());
    }

    #[test]
    fn fixed_eps_study_is_bounded() {
        let mut base = ExperimentSpec::paper(1e-2, 0.1);
        base.c = 0.1;
        base.t_final = 10.0;
        let rep = convergence_study(&base, &StudyMode::FixedEps { h_list: vec![0.1, 0.05] }).unwrap();
        assert_eq!(rep.points.len(), 2);
        assert!(rep.pass);
    }
}
