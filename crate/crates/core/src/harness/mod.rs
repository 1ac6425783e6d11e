//! Experiment orchestration: reference runs, drift comparisons, convergence
//! studies and epsilon-scaling suites.

mod series;
mod spec;
mod study;

pub use series::{
    error_between, error_vs_drift, error_vs_reference, observables, same_time, Components,
    ErrorSeries, ObservableSeries, SlowSeries,
};
pub use spec::{
    ExperimentSpec, ReferencePolicy, SampleGrid, DEFAULT_BUDGET_STEPS, DEFAULT_HORIZON_C,
    DEFAULT_REF_H_FACTOR,
};
pub use study::{
    convergence_study, fit_slope, report_from_points, theorem1_suite, variant_contrast,
    ConvergencePoint, ConvergenceReport, OrderGate, StudyMode, Theorem1Entry, Theorem1Report,
    VariantContrast,
};

use crate::boris::{integrate, magnetic_moment, ParticleState, PusherConfig, RunPlan, Trajectory, Variant};
use crate::drift::{drift_init, drift_on_grid, DriftConfig, DriftTrajectory};
use crate::error::{Error, Result};

fn single_sample(spec: &ExperimentSpec, config: &PusherConfig, v0: crate::Vec3) -> Trajectory {
    Trajectory {
        h: config.h,
        variant: config.variant,
        mu0: config.effective_mu0(),
        samples: vec![ParticleState { t: 0.0, x: spec.x0, v: v0 }],
        steps: 0,
        sigma_min: None,
        warnings: Vec::new(),
    }
}

fn run_pusher(spec: &ExperimentSpec, config: PusherConfig, sample_every: usize) -> Result<Trajectory> {
    let model = spec.model()?;
    let grid = spec.grid();
    let steps = grid.samples * sample_every;
    if steps == 0 {
        let v0 = match config.variant {
            Variant::Standard => spec.v0,
            Variant::Modified => crate::boris::filter_initial_velocity(spec.x0, spec.v0, &model)?,
        };
        return Ok(single_sample(spec, &config, v0));
    }
    let plan = RunPlan {
        steps: steps.max(2),
        sample_every,
    };
    Ok(integrate(spec.x0, spec.v0, &model, &config, plan, &mut ())?)
}

/// Runs the configured variant with step `spec.h` on the spec's sample grid.
pub fn run_boris(spec: &ExperimentSpec) -> Result<Trajectory> {
    spec.validate()?;
    let model = spec.model()?;
    let config = PusherConfig::for_initial_state(spec.variant, spec.h, &model, spec.x0, spec.v0)?
        .with_monitor(spec.sigma_stride, 0.1);
    run_pusher(spec, config, spec.sample_every())
}

/// Fine standard-Boris reference on the spec's sample grid.
pub fn run_reference(spec: &ExperimentSpec) -> Result<Trajectory> {
    spec.validate()?;
    let steps = spec.reference_steps();
    if steps > spec.budget_steps {
        return Err(Error::BudgetExceeded {
            steps,
            budget: spec.budget_steps,
        });
    }
    let (per, h_ref) = spec.reference_step();
    let model = spec.model()?;
    let mut start = spec.clone();
    if spec.reference.ref_filtered_init {
        start.v0 = crate::boris::filter_initial_velocity(spec.x0, spec.v0, &model)?;
    }
    run_pusher(&start, PusherConfig::standard(h_ref), per)
}

/// Drift solution sampled on the spec's grid, started from the raw initial data.
pub fn run_drift(spec: &ExperimentSpec) -> Result<DriftTrajectory> {
    spec.validate()?;
    let model = spec.model()?;
    let mu0 = magnetic_moment(spec.x0, spec.v0, &model)?;
    let s0 = drift_init(spec.x0, spec.v0, &model)?;
    let grid = spec.grid();
    let every = spec.sample_every();
    // Same stamps as the pusher samples: t = (k * every) * h.
    let times: Vec<f64> = (0..=grid.samples)
        .map(|k| (k * every) as f64 * spec.h)
        .collect();
    drift_on_grid(s0, &model, &DriftConfig::new(spec.epsilon, mu0), &times)
}
