use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Default guard radius around the symmetry axis.
pub const DEFAULT_R_MIN: f64 = 1e-9;

/// Local toroidal frame `(e_r, e_par, e_z)` at a point, together with its
/// cylindrical coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylindricalFrame {
    pub r: f64,
    pub z: f64,
    pub e_r: Vec3,
    pub e_par: Vec3,
    pub e_z: Vec3,
}

impl CylindricalFrame {
    /// Reconstructs the Cartesian point `r e_r + z e_z`.
    pub fn point(&self) -> Vec3 {
        self.e_r * self.r + self.e_z * self.z
    }
}

/// Builds the local frame at `x`. Fails when `x` lies within `r_min` of the axis.
pub fn frame(x: Vec3, r_min: f64) -> Result<CylindricalFrame> {
    let r = (x.x * x.x + x.y * x.y).sqrt();
    if !(r >= r_min) || r == 0.0 {
        return Err(Error::AxisSingularity { r, r_min });
    }
    let (c, s) = (x.x / r, x.y / r);
    Ok(CylindricalFrame {
        r,
        z: x.z,
        e_r: Vec3::new(c, s, 0.0),
        e_par: Vec3::new(-s, c, 0.0),
        e_z: Vec3::E_Z,
    })
}
