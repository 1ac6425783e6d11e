//! Standard and modified Boris pushers.
//!
//! The modified scheme is the standard Boris scheme applied to the effective
//! electric field `E_mod = E - mu0 grad|B|`, started from an initial velocity
//! with its gyration component removed. Both the two-step recursion
//!
//! ```text
//! x^{n+1} - 2 x^n + x^{n-1} = h^2 (v^n x B(x^n) + E_mod(x^n)),   v^n = (x^{n+1} - x^{n-1}) / 2h
//! ```
//!
//! and the kick-rotate-kick one-step form are provided; they generate the same
//! position sequence.

mod integrate;
mod monitor;

pub use integrate::{
    integrate, IntegrationAbort, NondegeneracyWarning, Observer, RunPlan, Trajectory,
};
pub use monitor::{nondegeneracy_sigma, sigma_from_sample};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ElectromagneticField, FieldSample};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Standard,
    Modified,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Standard => "standard",
            Variant::Modified => "modified",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PusherConfig {
    pub h: f64,
    pub variant: Variant,
    /// Frozen initial magnetic moment; ignored by the standard variant.
    pub mu0: f64,
    /// Steps between nondegeneracy evaluations, 0 disables the monitor.
    pub nondegeneracy_check_stride: usize,
    pub sigma_warn: f64,
    /// Speed bound for the sanity guard. `integrate` fills in `10 (|v0| + 1)` when unset.
    pub v_max: Option<f64>,
}

impl PusherConfig {
    pub fn standard(h: f64) -> Self {
        Self {
            h,
            variant: Variant::Standard,
            mu0: 0.0,
            nondegeneracy_check_stride: 0,
            sigma_warn: 0.1,
            v_max: None,
        }
    }

    pub fn modified(h: f64, mu0: f64) -> Self {
        Self {
            variant: Variant::Modified,
            mu0,
            ..Self::standard(h)
        }
    }

    /// Config for `variant` with `mu0` taken from the initial state.
    pub fn for_initial_state<F: ElectromagneticField + ?Sized>(
        variant: Variant,
        h: f64,
        field: &F,
        x0: Vec3,
        v0_raw: Vec3,
    ) -> Result<Self> {
        Ok(match variant {
            Variant::Standard => Self::standard(h),
            Variant::Modified => Self::modified(h, magnetic_moment(x0, v0_raw, field)?),
        })
    }

    pub fn with_monitor(mut self, stride: usize, sigma_warn: f64) -> Self {
        self.nondegeneracy_check_stride = stride;
        self.sigma_warn = sigma_warn;
        self
    }

    pub fn with_v_max(mut self, v_max: f64) -> Self {
        self.v_max = Some(v_max);
        self
    }

    /// Coefficient of `grad|B|` in the effective electric field.
    #[inline]
    pub fn effective_mu0(&self) -> f64 {
        match self.variant {
            Variant::Standard => 0.0,
            Variant::Modified => self.mu0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidInput(format!("step size must be > 0, got {}", self.h)));
        }
        if !(self.mu0 >= 0.0 && self.mu0.is_finite()) {
            return Err(Error::InvalidInput(format!("mu0 must be >= 0, got {}", self.mu0)));
        }
        Ok(())
    }
}

/// Time, position and velocity.
///
/// In the two-step form `v` is the centered velocity `(x^{n+1} - x^{n-1}) / 2h`;
/// the one-step form carries the staggered velocity `v^{n-1/2}` instead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticleState {
    pub t: f64,
    pub x: Vec3,
    pub v: Vec3,
}

/// Two consecutive positions of the two-step recursion.
///
/// Stored as `x^n` and the last displacement `x^n - x^{n-1}` so that the
/// velocity information does not suffer cancellation in `x^n - x^{n-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStepWindow {
    pub x_curr: Vec3,
    pub dx: Vec3,
    pub step: usize,
    pub t_curr: f64,
}

impl TwoStepWindow {
    pub fn new(x_prev: Vec3, x_curr: Vec3, step: usize, t_curr: f64) -> Self {
        Self {
            x_curr,
            dx: x_curr - x_prev,
            step,
            t_curr,
        }
    }

    pub fn x_prev(&self) -> Vec3 {
        self.x_curr - self.dx
    }

    /// Advances the window by one step and returns the field sampled at the old `x_curr`.
    pub fn advance<F: ElectromagneticField + ?Sized>(
        &mut self,
        field: &F,
        config: &PusherConfig,
    ) -> Result<FieldSample> {
        let (dx_new, sample) = solve_displacement(self.x_curr, self.dx, config.h, field, config)?;
        guard(self.step, dx_new, config)?;
        self.x_curr += dx_new;
        self.dx = dx_new;
        self.step += 1;
        self.t_curr = self.step as f64 * config.h;
        Ok(sample)
    }

    /// Runs the recursion backwards one step: `(x^n, x^{n-1}) -> (x^{n-1}, x^{n-2})`.
    ///
    /// Solving the two-step relation for `x^{n-1}` given `x^{n+1}, x^n` is the
    /// same relation with `h` replaced by `-h`.
    pub fn retreat<F: ElectromagneticField + ?Sized>(
        &mut self,
        field: &F,
        config: &PusherConfig,
    ) -> Result<()> {
        let x_prev = self.x_prev();
        // Reversed window: current = x^{n-1}, previous = x^n.
        let (back, _) = solve_displacement(x_prev, -self.dx, -config.h, field, config)?;
        guard(self.step, back, config)?;
        self.x_curr = x_prev;
        self.dx = -back;
        self.step = self.step.saturating_sub(1);
        self.t_curr = self.step as f64 * config.h;
        Ok(())
    }
}

fn guard(step: usize, dx: Vec3, config: &PusherConfig) -> Result<()> {
    if let Some(v_max) = config.v_max {
        let limit = config.h * v_max;
        let displacement = dx.norm();
        if !(displacement <= limit) {
            return Err(Error::SanityGuard {
                step,
                displacement,
                limit,
            });
        }
    }
    Ok(())
}

/// `E - mu0 grad|B|`.
#[inline]
pub fn modified_electric_field(sample: &FieldSample, mu0: f64) -> Vec3 {
    sample.e - sample.grad_abs_b * mu0
}

/// Solves `u + c x u = rhs` in closed form: `u = (rhs - c x rhs + (c.rhs) c) / (1 + |c|^2)`.
///
/// For `|c| < 1` it is evaluated as `rhs + (c x (c x rhs) - c x rhs) / (1 + |c|^2)`,
/// so that rounding of the denominator only touches the correction term and
/// does not bias the norm step after step.
#[inline]
pub fn solve_cross_system(c: Vec3, rhs: Vec3) -> Vec3 {
    let c2 = c.norm_sq();
    let cr = c.cross(rhs);
    if c2 < 1.0 {
        rhs + (c.cross(cr) - cr) / (1.0 + c2)
    } else {
        (rhs - cr + c * c.dot(rhs)) / (1.0 + c2)
    }
}

/// One step of the two-step recursion in displacement form.
///
/// With `d = x^{n+1} - x^n` and `d_prev = x^n - x^{n-1}` the recursion reads
/// `d + c x d = d_prev - c x d_prev + h^2 E_mod(x^n)` with `c = (h/2) B(x^n)`.
fn solve_displacement<F: ElectromagneticField + ?Sized>(
    x_curr: Vec3,
    d_prev: Vec3,
    h: f64,
    field: &F,
    config: &PusherConfig,
) -> Result<(Vec3, FieldSample)> {
    let s = field.eval(x_curr)?;
    let c = s.b * (0.5 * h);
    let e_mod = modified_electric_field(&s, config.effective_mu0());
    let rhs = d_prev - c.cross(d_prev) + e_mod * (h * h);
    Ok((solve_cross_system(c, rhs), s))
}

/// Returns `x^{n+1}` for the window `(x^{n-1}, x^n)`.
pub fn two_step_advance<F: ElectromagneticField + ?Sized>(
    window: &TwoStepWindow,
    field: &F,
    config: &PusherConfig,
) -> Result<Vec3> {
    config.validate()?;
    let (dx_new, _) = solve_displacement(window.x_curr, window.dx, config.h, field, config)?;
    guard(window.step, dx_new, config)?;
    Ok(window.x_curr + dx_new)
}

/// Kick-rotate-kick update of the staggered pair `(x^n, v^{n-1/2})` to
/// `(x^{n+1}, v^{n+1/2})`.
pub fn one_step_push<F: ElectromagneticField + ?Sized>(
    state: &ParticleState,
    field: &F,
    config: &PusherConfig,
) -> Result<ParticleState> {
    let h = config.h;
    let s = field.eval(state.x)?;
    let half_kick = modified_electric_field(&s, config.effective_mu0()) * (0.5 * h);

    let v_minus = state.v + half_kick;
    let t = s.b * (0.5 * h);
    let v_prime = v_minus + v_minus.cross(t);
    let v_plus = v_minus + v_prime.cross(t * (2.0 / (1.0 + t.norm_sq())));
    let v_new = v_plus + half_kick;

    Ok(ParticleState {
        t: state.t + h,
        x: state.x + v_new * h,
        v: v_new,
    })
}

/// `mu = |v x B|^2 / (2 |B|^3)`.
pub fn magnetic_moment<F: ElectromagneticField + ?Sized>(x: Vec3, v: Vec3, field: &F) -> Result<f64> {
    let s = field.eval(x)?;
    Ok(moment_from_sample(&s, v))
}

pub(crate) fn moment_from_sample(s: &FieldSample, v: Vec3) -> f64 {
    if s.abs_b == 0.0 {
        return 0.0;
    }
    0.5 * v.cross(s.b).norm_sq() / (s.abs_b * s.abs_b * s.abs_b)
}

/// Projects `v` onto the magnetic field direction at `x`.
pub fn filter_initial_velocity<F: ElectromagneticField + ?Sized>(
    x: Vec3,
    v: Vec3,
    field: &F,
) -> Result<Vec3> {
    let s = field.eval(x)?;
    if s.abs_b == 0.0 {
        return Err(Error::InvalidInput("magnetic field vanishes at x".into()));
    }
    let e_par = s.b / s.abs_b;
    Ok(e_par * e_par.dot(v))
}

/// Starting data for both pusher forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Initialized {
    /// Velocity actually used at `t = 0` (filtered for the modified variant).
    pub v0: Vec3,
    /// Window `(x^0, x^1)` at step 1.
    pub window: TwoStepWindow,
    /// Staggered seed `(x^1, v^{1/2})` for [`one_step_push`].
    pub staggered: ParticleState,
}

/// Builds `x^1 = x^0 + h v^0 + (h^2/2) (v^0 x B(x^0) + E_mod(x^0))`.
pub fn initialize<F: ElectromagneticField + ?Sized>(
    x0: Vec3,
    v0_raw: Vec3,
    field: &F,
    config: &PusherConfig,
) -> Result<Initialized> {
    config.validate()?;
    let h = config.h;
    let s = field.eval(x0)?;
    let v0 = match config.variant {
        Variant::Standard => v0_raw,
        Variant::Modified => {
            if s.abs_b == 0.0 {
                return Err(Error::InvalidInput("magnetic field vanishes at x0".into()));
            }
            let e_par = s.b / s.abs_b;
            e_par * e_par.dot(v0_raw)
        }
    };
    let accel = v0.cross(s.b) + modified_electric_field(&s, config.effective_mu0());
    let dx = v0 * h + accel * (0.5 * h * h);
    let x1 = x0 + dx;
    Ok(Initialized {
        v0,
        window: TwoStepWindow {
            x_curr: x1,
            dx,
            step: 1,
            t_curr: h,
        },
        staggered: ParticleState {
            t: h,
            x: x1,
            v: dx / h,
        },
    })
}
