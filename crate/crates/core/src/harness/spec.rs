use serde::{Deserialize, Serialize};

use crate::boris::Variant;
use crate::error::{Error, Result};
use crate::field::{PaperToroidal, ToroidalFieldModel, DEFAULT_B_MIN, DEFAULT_R_MIN};
use crate::vec3::Vec3;

pub const DEFAULT_REF_H_FACTOR: f64 = 0.05;
pub const DEFAULT_HORIZON_C: f64 = 0.5;
pub const DEFAULT_BUDGET_STEPS: u64 = 500_000_000;

/// How the fine reference solution is produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferencePolicy {
    /// Reference step is `ref_h_factor * epsilon` (before grid alignment).
    pub ref_h_factor: f64,
    /// Start the reference from the filtered velocity instead of the raw one.
    pub ref_filtered_init: bool,
}

impl Default for ReferencePolicy {
    fn default() -> Self {
        Self {
            ref_h_factor: DEFAULT_REF_H_FACTOR,
            ref_filtered_init: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub field: PaperToroidal,
    pub epsilon: f64,
    pub r_min: f64,
    pub b_min: f64,
    pub x0: Vec3,
    pub v0: Vec3,
    pub variant: Variant,
    pub h: f64,
    pub t_final: f64,
    pub reference: ReferencePolicy,
    pub output_stride: f64,
    pub c: f64,
    pub budget_steps: u64,
    /// Steps between nondegeneracy evaluations in pusher runs, 0 = off.
    pub sigma_stride: usize,
}

/// Shared sample grid: `samples + 1` points spaced `dt` apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub dt: f64,
    pub samples: usize,
}

impl SampleGrid {
    pub fn t_final(&self) -> f64 {
        self.samples as f64 * self.dt
    }
}

impl ExperimentSpec {
    /// The paper's initial data and field at the given `epsilon` and `h`,
    /// modified variant, horizon `c / epsilon`.
    pub fn paper(epsilon: f64, h: f64) -> Self {
        Self {
            field: PaperToroidal::PAPER,
            epsilon,
            r_min: DEFAULT_R_MIN,
            b_min: DEFAULT_B_MIN,
            x0: Vec3::new(1.0 / 3.0, 0.25, 0.5),
            v0: Vec3::new(0.4, 2.0 / 3.0, 1.0),
            variant: Variant::Modified,
            h,
            t_final: DEFAULT_HORIZON_C / epsilon,
            reference: ReferencePolicy::default(),
            output_stride: h.max(0.5),
            c: DEFAULT_HORIZON_C,
            budget_steps: DEFAULT_BUDGET_STEPS,
            sigma_stride: 0,
        }
    }

    pub fn model(&self) -> Result<ToroidalFieldModel> {
        Ok(ToroidalFieldModel::new(self.epsilon, self.field)?
            .with_r_min(self.r_min)
            .with_b_min(self.b_min))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad(format!("h must be > 0, got {}", self.h));
        }
        if !(self.output_stride > 0.0 && self.output_stride.is_finite()) {
            return bad(format!("output stride must be > 0, got {}", self.output_stride));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be >= 0, got {}", self.t_final));
        }
        if !(self.c > 0.0) {
            return bad(format!("horizon constant c must be > 0, got {}", self.c));
        }
        if self.t_final > self.c / self.epsilon * (1.0 + 1e-12) {
            return bad(format!(
                "t_final = {} exceeds the horizon c/eps = {}",
                self.t_final,
                self.c / self.epsilon
            ));
        }
        if !(self.reference.ref_h_factor > 0.0) {
            return bad("ref_h_factor must be > 0".into());
        }
        if !self.x0.is_finite() || !self.v0.is_finite() {
            return bad("initial data must be finite".into());
        }
        self.model().map(|_| ())
    }

    /// Pusher steps between samples: the output stride rounded to a whole number of steps.
    pub fn sample_every(&self) -> usize {
        ((self.output_stride / self.h).round() as usize).max(1)
    }

    /// Output grid shared by the pusher run, the reference and the drift solution.
    /// `t_final` is truncated to a whole number of output intervals.
    pub fn grid(&self) -> SampleGrid {
        let dt = self.sample_every() as f64 * self.h;
        SampleGrid {
            dt,
            samples: (self.t_final / dt * (1.0 + 1e-12)).floor() as usize,
        }
    }

    /// Reference steps per output interval and the aligned reference step size.
    pub fn reference_step(&self) -> (usize, f64) {
        let dt = self.grid().dt;
        let target = self.reference.ref_h_factor * self.epsilon;
        let per = ((dt / target) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        (per, dt / per as f64)
    }

    /// Two-step updates the reference run needs, including the final lookahead.
    pub fn reference_steps(&self) -> u64 {
        let (per, _) = self.reference_step();
        self.grid().samples as u64 * per as u64
    }
}
