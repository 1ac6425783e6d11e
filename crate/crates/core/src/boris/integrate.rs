use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{initialize, monitor::sigma_from_sample, ParticleState, PusherConfig, Variant};
use crate::error::{Error, Result};
use crate::field::{ElectromagneticField, FieldSample};
use crate::vec3::Vec3;

/// Callback invoked at every recorded sample.
pub trait Observer {
    fn observe(&mut self, step: usize, state: &ParticleState, field: &FieldSample);
}

impl Observer for () {
    fn observe(&mut self, _: usize, _: &ParticleState, _: &FieldSample) {}
}

impl<T: FnMut(usize, &ParticleState, &FieldSample)> Observer for T {
    fn observe(&mut self, step: usize, state: &ParticleState, field: &FieldSample) {
        self(step, state, field)
    }
}

/// Number of steps and output stride for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunPlan {
    pub steps: usize,
    pub sample_every: usize,
}

impl RunPlan {
    /// `t_final` is rounded to the nearest whole number of steps.
    pub fn from_t_final(t_final: f64, h: f64, sample_every: usize) -> Result<Self> {
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidInput(format!("t_final must be >= 0, got {t_final}")));
        }
        let steps = (t_final / h).round();
        if steps > usize::MAX as f64 / 2.0 {
            return Err(Error::InvalidInput(format!("{steps} steps is not representable")));
        }
        Ok(Self {
            steps: steps as usize,
            sample_every: sample_every.max(1),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NondegeneracyWarning {
    pub step: usize,
    pub t: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub h: f64,
    pub variant: Variant,
    pub mu0: f64,
    pub samples: Vec<ParticleState>,
    /// Calls to the two-step update, including the lookahead for the final velocity.
    pub steps: usize,
    pub sigma_min: Option<f64>,
    pub warnings: Vec<NondegeneracyWarning>,
}

impl Trajectory {
    fn empty(config: &PusherConfig) -> Self {
        Self {
            h: config.h,
            variant: config.variant,
            mu0: config.effective_mu0(),
            samples: Vec::new(),
            steps: 0,
            sigma_min: None,
            warnings: Vec::new(),
        }
    }

    pub fn last(&self) -> Option<&ParticleState> {
        self.samples.last()
    }
}

/// A run that stopped early; `partial` holds everything recorded so far.
#[derive(Debug, Clone, Error)]
#[error("{error} (after {} samples)", partial.samples.len())]
pub struct IntegrationAbort {
    pub error: Error,
    pub partial: Trajectory,
}

impl From<IntegrationAbort> for Error {
    fn from(a: IntegrationAbort) -> Self {
        a.error
    }
}

struct Monitor {
    stride: usize,
    sigma_warn: f64,
    h: f64,
}

impl Monitor {
    fn check(&self, traj: &mut Trajectory, step: usize, v: Vec3, s: &FieldSample) -> Result<()> {
        if self.stride == 0 || step % self.stride != 0 {
            return Ok(());
        }
        let sigma = sigma_from_sample(s, v, self.h)?;
        traj.sigma_min = Some(traj.sigma_min.map_or(sigma, |m| m.min(sigma)));
        if sigma < self.sigma_warn {
            traj.warnings.push(NondegeneracyWarning {
                step,
                t: step as f64 * self.h,
                sigma,
            });
        }
        Ok(())
    }
}

/// Runs the two-step Boris recursion for `plan.steps` steps.
///
/// Samples are taken at every `plan.sample_every`-th step and at the final
/// step, with the centered velocity `(x^{n+1} - x^{n-1}) / 2h`; the sample at
/// `t = 0` carries the (possibly filtered) starting velocity.
pub fn integrate<F, O>(
    x0: Vec3,
    v0_raw: Vec3,
    field: &F,
    config: &PusherConfig,
    plan: RunPlan,
    observer: &mut O,
) -> std::result::Result<Trajectory, IntegrationAbort>
where
    F: ElectromagneticField + ?Sized,
    O: Observer + ?Sized,
{
    let mut traj = Trajectory::empty(config);
    let abort = |error: Error, traj: Trajectory| IntegrationAbort { error, partial: traj };

    if plan.steps < 2 {
        return Err(abort(
            Error::InvalidInput(format!("at least 2 steps required, got {}", plan.steps)),
            traj,
        ));
    }

    let mut cfg = *config;
    if cfg.v_max.is_none() {
        cfg.v_max = Some(10.0 * (v0_raw.norm() + 1.0));
    }
    let h = cfg.h;
    let every = plan.sample_every.max(1);
    let monitor = Monitor {
        stride: cfg.nondegeneracy_check_stride,
        sigma_warn: cfg.sigma_warn,
        h,
    };
    traj.samples
        .reserve(plan.steps / every + 2);

    let init = match initialize(x0, v0_raw, field, &cfg) {
        Ok(i) => i,
        Err(e) => return Err(abort(e, traj)),
    };
    let s0 = match field.eval(x0) {
        Ok(s) => s,
        Err(e) => return Err(abort(e, traj)),
    };
    let first = ParticleState { t: 0.0, x: x0, v: init.v0 };
    if let Err(e) = monitor.check(&mut traj, 0, init.v0, &s0) {
        return Err(abort(e, traj));
    }
    observer.observe(0, &first, &s0);
    traj.samples.push(first);

    let mut window = init.window;
    for n in 1..=plan.steps {
        let x_n = window.x_curr;
        let dx_prev = window.dx;
        let sample = match window.advance(field, &cfg) {
            Ok(s) => s,
            Err(e) => return Err(abort(e, traj)),
        };
        traj.steps += 1;
        let v_n = (dx_prev + window.dx) / (2.0 * h);
        if let Err(e) = monitor.check(&mut traj, n, v_n, &sample) {
            return Err(abort(e, traj));
        }
        if n % every == 0 || n == plan.steps {
            let state = ParticleState {
                t: n as f64 * h,
                x: x_n,
                v: v_n,
            };
            observer.observe(n, &state, &sample);
            traj.samples.push(state);
        }
    }
    Ok(traj)
}
