use serde::{Deserialize, Serialize};

use crate::boris::{moment_from_sample, Trajectory};
use crate::drift::DriftTrajectory;
use crate::error::{Error, Result};
use crate::field::{frame, ElectromagneticField};

/// Per-component values for `r`, `z` and `v_par`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Components<T> {
    pub r: T,
    pub z: T,
    pub vpar: T,
}

impl<T: Copy> Components<T> {
    pub fn to_array(self) -> [T; 3] {
        [self.r, self.z, self.vpar]
    }

    pub fn map<U>(self, f: impl Fn(T) -> U) -> Components<U> {
        Components {
            r: f(self.r),
            z: f(self.z),
            vpar: f(self.vpar),
        }
    }

    pub fn zip_with<U: Copy, V>(self, o: Components<U>, f: impl Fn(T, U) -> V) -> Components<V> {
        Components {
            r: f(self.r, o.r),
            z: f(self.z, o.z),
            vpar: f(self.vpar, o.vpar),
        }
    }
}

/// Time series of the slow observables `(r, z, v_par)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SlowSeries {
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub vpar: Vec<f64>,
}

impl SlowSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn push(&mut self, t: f64, r: f64, z: f64, vpar: f64) {
        self.t.push(t);
        self.r.push(r);
        self.z.push(z);
        self.vpar.push(vpar);
    }
}

impl From<&DriftTrajectory> for SlowSeries {
    fn from(d: &DriftTrajectory) -> Self {
        let mut s = SlowSeries::default();
        for (&t, st) in d.t.iter().zip(&d.states) {
            s.push(t, st.r_t, st.z_t, st.v_t);
        }
        s
    }
}

/// Cylindrical observables of a pusher trajectory.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub slow: SlowSeries,
    pub mu: Vec<f64>,
    /// `|v|^2 / 2 + phi(x)`; `None` where the field has no potential.
    pub energy: Vec<Option<f64>>,
}

pub fn observables<F: ElectromagneticField + ?Sized>(
    traj: &Trajectory,
    field: &F,
    r_min: f64,
) -> Result<ObservableSeries> {
    let mut out = ObservableSeries::default();
    for s in &traj.samples {
        let f = frame(s.x, r_min)?;
        let sample = field.eval(s.x)?;
        out.slow.push(s.t, f.r, f.z, f.e_par.dot(s.v));
        out.mu.push(moment_from_sample(&sample, s.v));
        out.energy
            .push(field.potential(s.x).ok().map(|phi| 0.5 * s.v.norm_sq() + phi));
    }
    Ok(out)
}

/// Absolute errors of a run against a comparator on shared time stamps.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorSeries {
    pub t: Vec<f64>,
    pub err_r: Vec<f64>,
    pub err_z: Vec<f64>,
    pub err_vpar: Vec<f64>,
    pub max: Components<f64>,
}

impl ErrorSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Whether two time stamps denote the same grid point.
pub fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Pointwise `|run - comparator|`. Every run sample must have a comparator
/// sample with the same time stamp; the comparator may be sampled more densely.
pub fn error_between(run: &SlowSeries, comparator: &SlowSeries) -> Result<ErrorSeries> {
    let mut out = ErrorSeries::default();
    let mut j = 0;
    for (i, &t) in run.t.iter().enumerate() {
        while j < comparator.len() && comparator.t[j] < t && !same_time(comparator.t[j], t) {
            j += 1;
        }
        if j >= comparator.len() || !same_time(comparator.t[j], t) {
            return Err(Error::GridMismatch {
                index: i,
                t_a: t,
                t_b: comparator.t.get(j).copied().unwrap_or(f64::NAN),
            });
        }
        let er = (run.r[i] - comparator.r[j]).abs();
        let ez = (run.z[i] - comparator.z[j]).abs();
        let ev = (run.vpar[i] - comparator.vpar[j]).abs();
        out.t.push(t);
        out.err_r.push(er);
        out.err_z.push(ez);
        out.err_vpar.push(ev);
        out.max.r = out.max.r.max(er);
        out.max.z = out.max.z.max(ez);
        out.max.vpar = out.max.vpar.max(ev);
        j += 1;
    }
    Ok(out)
}

pub fn error_vs_drift(run: &ObservableSeries, drift: &DriftTrajectory) -> Result<ErrorSeries> {
    error_between(&run.slow, &SlowSeries::from(drift))
}

pub fn error_vs_reference(run: &ObservableSeries, reference: &ObservableSeries) -> Result<ErrorSeries> {
    error_between(&run.slow, &reference.slow)
}
