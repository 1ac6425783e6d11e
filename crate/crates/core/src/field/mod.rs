//! Electromagnetic field models.
//!
//! The toroidal models describe a strong magnetic field `B = (b(r,z)/eps) e_par`
//! running along the toroidal direction and an electric field confined to the
//! poloidal `(e_r, e_z)` plane, both independent of the toroidal angle.

mod check;
mod frame;

pub use check::{check_field, random_probes, CheckOutcome, ValidationReport};
pub use frame::{frame, CylindricalFrame, DEFAULT_R_MIN};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::{Mat3, Vec3};

/// Default floor for the magnetic profile `b`.
pub const DEFAULT_B_MIN: f64 = 1e-3;

/// Everything a pusher needs from the field at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub b: Vec3,
    pub abs_b: f64,
    pub grad_abs_b: Vec3,
    pub e: Vec3,
    /// Jacobian `dB_i/dx_j`, row-major.
    pub jac_b: Mat3,
}

/// A static electromagnetic field evaluated pointwise.
pub trait ElectromagneticField: Send + Sync {
    fn eval(&self, x: Vec3) -> Result<FieldSample>;

    /// Scalar potential `phi` with `E = -grad phi`, when the model has one.
    fn potential(&self, _x: Vec3) -> Result<f64> {
        Err(Error::Unsupported("field model has no scalar potential".into()))
    }
}

/// Axisymmetric profile in the poloidal plane: magnetic magnitude `b(r,z)`
/// (before the `1/eps` scaling) and the electric components `E_r`, `E_z`.
pub trait ToroidalProfile: Send + Sync {
    fn b(&self, r: f64, z: f64) -> f64;
    /// `(db/dr, db/dz)`.
    fn grad_b(&self, r: f64, z: f64) -> (f64, f64);
    /// `(E_r, E_z)`.
    fn e_field(&self, r: f64, z: f64) -> (f64, f64);
    fn potential(&self, _r: f64, _z: f64) -> Option<f64> {
        None
    }
}

/// `b = a0 + a1 r + a2 z^2`, `E_r = c z`, `E_z = c r`, `phi = -c r z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaperToroidal {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub c: f64,
}

impl PaperToroidal {
    pub const PAPER: PaperToroidal = PaperToroidal {
        a0: 0.0,
        a1: 1.0,
        a2: 1.0,
        c: 0.1,
    };
}

impl Default for PaperToroidal {
    fn default() -> Self {
        Self::PAPER
    }
}

impl ToroidalProfile for PaperToroidal {
    #[inline]
    fn b(&self, r: f64, z: f64) -> f64 {
        self.a0 + self.a1 * r + self.a2 * z * z
    }

    #[inline]
    fn grad_b(&self, _r: f64, z: f64) -> (f64, f64) {
        (self.a1, 2.0 * self.a2 * z)
    }

    #[inline]
    fn e_field(&self, r: f64, z: f64) -> (f64, f64) {
        (self.c * z, self.c * r)
    }

    fn potential(&self, r: f64, z: f64) -> Option<f64> {
        Some(-self.c * r * z)
    }
}

/// Values of the profile functions at one `(r, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileValues {
    pub b: f64,
    pub db_dr: f64,
    pub db_dz: f64,
    pub e_r: f64,
    pub e_z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToroidalFieldModel<P = PaperToroidal> {
    pub epsilon: f64,
    pub r_min: f64,
    pub b_min: f64,
    pub profile: P,
}

impl ToroidalFieldModel<PaperToroidal> {
    /// The preset with the standard test-case parameters at the given `epsilon`.
    pub fn paper(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, PaperToroidal::PAPER)
    }
}

impl<P: ToroidalProfile> ToroidalFieldModel<P> {
    pub fn new(epsilon: f64, profile: P) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "epsilon must lie in (0, 1], got {epsilon}"
            )));
        }
        Ok(Self {
            epsilon,
            r_min: DEFAULT_R_MIN,
            b_min: DEFAULT_B_MIN,
            profile,
        })
    }

    pub fn with_r_min(mut self, r_min: f64) -> Self {
        self.r_min = r_min;
        self
    }

    pub fn with_b_min(mut self, b_min: f64) -> Self {
        self.b_min = b_min;
        self
    }

    /// Profile values at `(r, z)`, checking the axis guard and the `b` floor.
    pub fn profile_at(&self, r: f64, z: f64) -> Result<ProfileValues> {
        if !(r >= self.r_min) || r == 0.0 {
            return Err(Error::AxisSingularity { r, r_min: self.r_min });
        }
        let b = self.profile.b(r, z);
        if !(b >= self.b_min) {
            return Err(Error::Domain {
                r,
                z,
                b,
                b_min: self.b_min,
            });
        }
        let (db_dr, db_dz) = self.profile.grad_b(r, z);
        let (e_r, e_z) = self.profile.e_field(r, z);
        Ok(ProfileValues {
            b,
            db_dr,
            db_dz,
            e_r,
            e_z,
        })
    }
}

impl<P: ToroidalProfile> ElectromagneticField for ToroidalFieldModel<P> {
    fn eval(&self, x: Vec3) -> Result<FieldSample> {
        let f = frame(x, self.r_min)?;
        let p = self.profile_at(f.r, f.z)?;
        let inv_eps = 1.0 / self.epsilon;

        let abs_b = p.b * inv_eps;
        let grad_b = f.e_r * p.db_dr + f.e_z * p.db_dz;

        // B' = (1/eps) [ e_par (grad b)^T - (b/r) e_r e_par^T ]
        let t1 = f.e_par.outer(grad_b);
        let t2 = f.e_r.outer(f.e_par);
        let k = p.b / f.r;
        let mut jac_b = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                jac_b[i][j] = (t1[i][j] - k * t2[i][j]) * inv_eps;
            }
        }

        Ok(FieldSample {
            b: f.e_par * abs_b,
            abs_b,
            grad_abs_b: grad_b * inv_eps,
            e: f.e_r * p.e_r + f.e_z * p.e_z,
            jac_b,
        })
    }

    fn potential(&self, x: Vec3) -> Result<f64> {
        let f = frame(x, self.r_min)?;
        self.profile
            .potential(f.r, f.z)
            .ok_or_else(|| Error::Unsupported("profile has no scalar potential".into()))
    }
}

/// Spatially constant `B` and `E`; used for exact-orbit checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformField {
    pub b: Vec3,
    pub e: Vec3,
}

impl UniformField {
    pub fn new(b: Vec3, e: Vec3) -> Self {
        Self { b, e }
    }
}

impl ElectromagneticField for UniformField {
    fn eval(&self, _x: Vec3) -> Result<FieldSample> {
        Ok(FieldSample {
            b: self.b,
            abs_b: self.b.norm(),
            grad_abs_b: Vec3::ZERO,
            e: self.e,
            jac_b: [[0.0; 3]; 3],
        })
    }

    fn potential(&self, x: Vec3) -> Result<f64> {
        Ok(-self.e.dot(x))
    }
}

impl<F: ElectromagneticField + ?Sized> ElectromagneticField for &F {
    fn eval(&self, x: Vec3) -> Result<FieldSample> {
        (**self).eval(x)
    }

    fn potential(&self, x: Vec3) -> Result<f64> {
        (**self).potential(x)
    }
}

/// Free-function form of [`ElectromagneticField::eval`].
pub fn eval_field<F: ElectromagneticField + ?Sized>(model: &F, x: Vec3) -> Result<FieldSample> {
    model.eval(x)
}

/// Free-function form of [`ElectromagneticField::potential`].
pub fn potential<F: ElectromagneticField + ?Sized>(model: &F, x: Vec3) -> Result<f64> {
    model.potential(x)
}
