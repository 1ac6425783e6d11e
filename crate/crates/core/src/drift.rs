//! Slow guiding-center system for `(r, z, v_par)`.
//!
//! In slow time `tau = eps t` the system reads
//!
//! ```text
//! dr/dtau = (-E_z + mu db/dz) / b
//! dz/dtau = (v^2/r + E_r - mu db/dr) / b
//! dv/dtau = (v/r) (E_z - mu db/dz) / b
//! ```
//!
//! with all profile functions evaluated at `(r, z)`. Along exact solutions
//! `r v` is conserved.
//!
//! The coefficient `mu` is the moment normalized to the unscaled field,
//! `|v_perp|^2 / (2b) = mu0 / eps`, where `mu0 = |v_perp|^2 / (2|B|)` is the
//! moment the modified pusher uses. The grad-B drift is
//! `mu0 (e_par x grad|B|) / |B|` and `grad|B| = grad b / eps`, hence the `1/eps`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{frame, ToroidalFieldModel, ToroidalProfile};
use crate::vec3::Vec3;

pub const DEFAULT_DTAU: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftState {
    pub r_t: f64,
    pub z_t: f64,
    pub v_t: f64,
}

impl DriftState {
    pub fn new(r_t: f64, z_t: f64, v_t: f64) -> Self {
        Self { r_t, z_t, v_t }
    }

    /// The conserved quantity `r v`.
    pub fn rv(&self) -> f64 {
        self.r_t * self.v_t
    }

    fn axpy(self, k: f64, d: [f64; 3]) -> Self {
        Self {
            r_t: self.r_t + k * d[0],
            z_t: self.z_t + k * d[1],
            v_t: self.v_t + k * d[2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftConfig {
    pub epsilon: f64,
    /// Magnetic moment `|v_perp|^2 / (2|B|)` at t = 0.
    pub mu0: f64,
    pub dtau: f64,
    /// Physical-time spacing of recorded samples; `None` records only the endpoints.
    pub sample_dt: Option<f64>,
}

impl DriftConfig {
    pub fn new(epsilon: f64, mu0: f64) -> Self {
        Self {
            epsilon,
            mu0,
            dtau: DEFAULT_DTAU,
            sample_dt: None,
        }
    }

    pub fn with_dtau(mut self, dtau: f64) -> Self {
        self.dtau = dtau;
        self
    }

    pub fn with_sample_dt(mut self, dt: f64) -> Self {
        self.sample_dt = Some(dt);
        self
    }

    /// The coefficient passed to [`drift_rhs`].
    pub fn normalized_moment(&self) -> f64 {
        self.mu0 / self.epsilon
    }

    fn validate(&self) -> Result<()> {
        if !(self.dtau > 0.0 && self.dtau <= 1e-2) {
            return Err(Error::InvalidInput(format!(
                "dtau must lie in (0, 1e-2], got {}",
                self.dtau
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidInput("epsilon must be > 0".into()));
        }
        if let Some(dt) = self.sample_dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidInput(format!("sample spacing must be > 0, got {dt}")));
            }
        }
        Ok(())
    }
}

/// A drift solution sampled in physical time.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DriftTrajectory {
    pub t: Vec<f64>,
    pub states: Vec<DriftState>,
}

impl DriftTrajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn last(&self) -> Option<&DriftState> {
        self.states.last()
    }
}

/// Right-hand side in slow time for the normalized moment `mu`.
pub fn drift_rhs<P: ToroidalProfile>(
    s: &DriftState,
    model: &ToroidalFieldModel<P>,
    mu: f64,
) -> Result<[f64; 3]> {
    let p = model.profile_at(s.r_t, s.z_t)?;
    let radial = p.e_z - mu * p.db_dz;
    Ok([
        -radial / p.b,
        (s.v_t * s.v_t / s.r_t + p.e_r - mu * p.db_dr) / p.b,
        (s.v_t / s.r_t) * radial / p.b,
    ])
}

/// `(r(x0), z(x0), e_par(x0) . v0)` from the raw initial velocity.
pub fn drift_init<P: ToroidalProfile>(
    x0: Vec3,
    v0_raw: Vec3,
    model: &ToroidalFieldModel<P>,
) -> Result<DriftState> {
    let f = frame(x0, model.r_min)?;
    Ok(DriftState::new(f.r, f.z, f.e_par.dot(v0_raw)))
}

fn rk4_step<P: ToroidalProfile>(
    s: DriftState,
    dtau: f64,
    model: &ToroidalFieldModel<P>,
    mu: f64,
) -> Result<DriftState> {
    let k1 = drift_rhs(&s, model, mu)?;
    let k2 = drift_rhs(&s.axpy(0.5 * dtau, k1), model, mu)?;
    let k3 = drift_rhs(&s.axpy(0.5 * dtau, k2), model, mu)?;
    let k4 = drift_rhs(&s.axpy(dtau, k3), model, mu)?;
    let mut incr = [0.0; 3];
    for i in 0..3 {
        incr[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
    }
    Ok(s.axpy(dtau, incr))
}

/// Fixed-step RK4 over `tau in [from, to]`, shortening the last step to land on `to`.
fn advance_to<P: ToroidalProfile>(
    mut s: DriftState,
    from: f64,
    to: f64,
    model: &ToroidalFieldModel<P>,
    cfg: &DriftConfig,
) -> Result<DriftState> {
    let span = to - from;
    if span <= 0.0 {
        return Ok(s);
    }
    let full = (span / cfg.dtau).floor() as usize;
    for _ in 0..full {
        s = rk4_step(s, cfg.dtau, model, cfg.normalized_moment())?;
    }
    let rest = span - full as f64 * cfg.dtau;
    // Remainders at round-off level are absorbed rather than stepped.
    if rest > 1e-12 * cfg.dtau {
        s = rk4_step(s, rest, model, cfg.normalized_moment())?;
    }
    Ok(s)
}

/// Integrates the drift system up to physical time `t_final`.
///
/// Samples land exactly on multiples of `config.sample_dt` and on `t_final`.
pub fn drift_integrate<P: ToroidalProfile>(
    s0: DriftState,
    model: &ToroidalFieldModel<P>,
    config: &DriftConfig,
    t_final: f64,
) -> Result<DriftTrajectory> {
    config.validate()?;
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidInput(format!("t_final must be >= 0, got {t_final}")));
    }
    // Surface domain problems at the start point too.
    drift_rhs(&s0, model, config.normalized_moment())?;

    let mut times = Vec::new();
    if let Some(dt) = config.sample_dt {
        let n = (t_final / dt * (1.0 + 1e-12)).floor() as usize;
        times.extend((0..=n).map(|k| k as f64 * dt));
        if t_final - times[times.len() - 1] > 1e-9 * dt {
            times.push(t_final);
        }
    } else {
        times.push(0.0);
        if t_final > 0.0 {
            times.push(t_final);
        }
    }
    drift_on_grid(s0, model, config, &times)
}

/// Integrates the drift system and records it at the given increasing physical times.
/// The first time must be 0.
pub fn drift_on_grid<P: ToroidalProfile>(
    s0: DriftState,
    model: &ToroidalFieldModel<P>,
    config: &DriftConfig,
    times: &[f64],
) -> Result<DriftTrajectory> {
    config.validate()?;
    if times.first() != Some(&0.0) {
        return Err(Error::InvalidInput("drift sample grid must start at t = 0".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("drift sample grid must be increasing".into()));
    }
    let mut out = DriftTrajectory {
        t: Vec::with_capacity(times.len()),
        states: Vec::with_capacity(times.len()),
    };
    let mut s = s0;
    let mut tau_prev = 0.0;
    for &t in times {
        let tau = config.epsilon * t;
        s = advance_to(s, tau_prev, tau, model, config)?;
        tau_prev = tau;
        out.t.push(t);
        out.states.push(s);
    }
    Ok(out)
}

/// First-order guiding center `x + (v x B) / |B|^2`.
pub fn guiding_center<F: crate::field::ElectromagneticField + ?Sized>(
    x: Vec3,
    v: Vec3,
    field: &F,
) -> Result<Vec3> {
    let s = field.eval(x)?;
    if s.abs_b == 0.0 {
        return Err(Error::InvalidInput("guiding center undefined where B vanishes".into()));
    }
    Ok(x + v.cross(s.b) / (s.abs_b * s.abs_b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PaperToroidal, UniformField};

    fn paper_x0() -> Vec3 {
        Vec3::new(1.0 / 3.0, 0.25, 0.5)
    }

    fn paper_v0() -> Vec3 {
        Vec3::new(0.4, 2.0 / 3.0, 1.0)
    }

    #[test]
    fn pure_curvature_drift() {
        let prof = PaperToroidal { c: 0.0, ..PaperToroidal::PAPER };
        let m = ToroidalFieldModel::new(1e-3, prof).unwrap();
        let s = DriftState::new(0.8, 0.3, 1.5);
        let d = drift_rhs(&s, &m, 0.0).unwrap();
        let b = 0.8 + 0.09;
        assert_eq!(d[0], 0.0);
        assert!((d[1] - 1.5 * 1.5 / (0.8 * b)).abs() < 1e-15);
        assert_eq!(d[2], 0.0);
    }

    #[test]
    fn paper_rhs_values() {
        let m = ToroidalFieldModel::paper(1e-3).unwrap();
        let s = DriftState::new(5.0 / 12.0, 0.5, 22.0 / 75.0);
        let d = drift_rhs(&s, &m, 1.1388e-3).unwrap();
        assert!((d[0] - (-303_959.0 / 5e6)).abs() < 1e-12);
        assert!((d[1] - 1_915_259.0 / 5e6).abs() < 1e-12);
        assert!((d[2] - 3_343_549.0 / 78_125_000.0).abs() < 1e-12);
    }

    #[test]
    fn zero_parallel_velocity() {
        let m = ToroidalFieldModel::paper(1e-3).unwrap();
        let s = DriftState::new(0.7, -0.2, 0.0);
        let mu0 = 2e-3;
        let d = drift_rhs(&s, &m, mu0).unwrap();
        let b = 0.7 + 0.04;
        assert_eq!(d[2], 0.0);
        assert!((d[1] - (0.1 * -0.2 - mu0) / b).abs() < 1e-16);
    }

    #[test]
    fn rhs_rejects_axis_and_floor() {
        let m = ToroidalFieldModel::paper(1e-3).unwrap();
        assert!(matches!(
            drift_rhs(&DriftState::new(0.0, 0.0, 1.0), &m, 0.0),
            Err(Error::AxisSingularity { .. })
        ));
        let m = m.with_b_min(1.0);
        assert!(matches!(
            drift_rhs(&DriftState::new(0.5, 0.1, 1.0), &m, 0.0),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn init_uses_raw_velocity() {
        let m = ToroidalFieldModel::paper(1e-3).unwrap();
        let s = drift_init(paper_x0(), paper_v0(), &m).unwrap();
        assert!((s.r_t - 5.0 / 12.0).abs() < 1e-16);
        assert_eq!(s.z_t, 0.5);
        assert!((s.v_t - 22.0 / 75.0).abs() < 1e-15);

        let s = drift_init(paper_x0(), Vec3::new(0.8, 0.6, 0.0), &m).unwrap();
        assert!(s.v_t.abs() < 1e-15);

        let s = drift_init(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), &m).unwrap();
        assert_eq!(s, DriftState::new(1.0, 0.0, 1.0));
    }

    #[test]
    fn constant_field_closed_form() {
        let eps = 1e-2;
        let prof = PaperToroidal { a0: 2.0, a1: 0.0, a2: 0.0, c: 0.0 };
        let m = ToroidalFieldModel::new(eps, prof).unwrap();
        let s0 = DriftState::new(0.9, 0.1, 0.6);
        let cfg = DriftConfig::new(eps, 0.0).with_sample_dt(5.0);
        let tr = drift_integrate(s0, &m, &cfg, 50.0).unwrap();
        let slope = eps * 0.36 / (0.9 * 2.0);
        for (t, s) in tr.t.iter().zip(&tr.states) {
            assert_eq!(s.r_t, 0.9);
            assert_eq!(s.v_t, 0.6);
            assert!((s.z_t - (0.1 + slope * t)).abs() < 1e-12);
        }
        assert_eq!(tr.len(), 11);
    }

    #[test]
    fn samples_land_on_grid_and_endpoint() {
        let m = ToroidalFieldModel::paper(1e-2).unwrap();
        let s0 = DriftState::new(5.0 / 12.0, 0.5, 22.0 / 75.0);
        let cfg = DriftConfig::new(1e-2, 1e-3).with_sample_dt(0.3);
        let tr = drift_integrate(s0, &m, &cfg, 1.0).unwrap();
        assert_eq!(tr.t, vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
        let tr = drift_integrate(s0, &m, &DriftConfig::new(1e-2, 1e-3), 0.0).unwrap();
        assert_eq!(tr.len(), 1);
    }

    #[test]
    fn invalid_dtau() {
        let m = ToroidalFieldModel::paper(1e-2).unwrap();
        let s0 = DriftState::new(0.5, 0.5, 0.3);
        let cfg = DriftConfig::new(1e-2, 0.0).with_dtau(0.1);
        assert!(drift_integrate(s0, &m, &cfg, 1.0).is_err());
    }

    #[test]
    fn guiding_center_examples() {
        let eps = 1e-3;
        let f = UniformField::new(Vec3::new(0.0, 0.0, 1.0 / eps), Vec3::ZERO);
        let gc = guiding_center(Vec3::ZERO, Vec3::new(2.0, 0.0, 0.7), &f).unwrap();
        assert!((gc - Vec3::new(0.0, -eps * 2.0, 0.0)).norm() < 1e-18);

        let gc = guiding_center(Vec3::new(1.0, 2.0, 3.0), Vec3::new(0.0, 0.0, 5.0), &f).unwrap();
        assert_eq!(gc, Vec3::new(1.0, 2.0, 3.0));

        let m = ToroidalFieldModel::paper(eps).unwrap();
        let gc = guiding_center(paper_x0(), paper_v0(), &m).unwrap();
        let expect = paper_x0() + Vec3::new(-1.2, -0.9, 1.08) * eps;
        assert!((gc - expect).norm() < 1e-15);
        assert!((gc - Vec3::new(0.332133333333333, 0.2491, 0.50108)).norm() < 1e-12);
    }
}
