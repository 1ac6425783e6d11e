use crate::error::{Error, Result};
use crate::field::{ElectromagneticField, FieldSample};
use crate::vec3::{mat_vec, Vec3};

/// Smallest singular value of `z -> z + (h^2/4) P_perp (v x B'(x) z)` on the
/// plane orthogonal to `B(x)`. Values near zero flag a degenerate step.
pub fn nondegeneracy_sigma<F: ElectromagneticField + ?Sized>(
    x: Vec3,
    v: Vec3,
    h: f64,
    field: &F,
) -> Result<f64> {
    let s = field.eval(x)?;
    sigma_from_sample(&s, v, h)
}

pub fn sigma_from_sample(s: &FieldSample, v: Vec3, h: f64) -> Result<f64> {
    if s.abs_b == 0.0 {
        return Err(Error::InvalidInput(
            "nondegeneracy map undefined where B vanishes".into(),
        ));
    }
    let (q1, q2) = perpendicular_basis(s.b / s.abs_b);
    let k = 0.25 * h * h;
    let basis = [q1, q2];
    let mut a = [[0.0; 2]; 2];
    for (j, &qj) in basis.iter().enumerate() {
        // q_i lies in the range of P_perp, so q_i^T P_perp = q_i^T.
        let image = qj + v.cross(mat_vec(&s.jac_b, qj)) * k;
        for (i, &qi) in basis.iter().enumerate() {
            a[i][j] = qi.dot(image);
        }
    }
    Ok(min_singular_value_2x2(a))
}

/// Orthonormal pair spanning the plane orthogonal to the unit vector `u`.
fn perpendicular_basis(u: Vec3) -> (Vec3, Vec3) {
    let (ax, ay, az) = (u.x.abs(), u.y.abs(), u.z.abs());
    let pick = if ax <= ay && ax <= az {
        Vec3::new(1.0, 0.0, 0.0)
    } else if ay <= az {
        Vec3::new(0.0, 1.0, 0.0)
    } else {
        Vec3::E_Z
    };
    let q1 = u.cross(pick);
    let q1 = q1 / q1.norm();
    (q1, u.cross(q1))
}

fn min_singular_value_2x2(m: [[f64; 2]; 2]) -> f64 {
    let [[a, b], [c, d]] = m;
    // Eigenvalues of A A^T = [[p, q], [q, r]].
    let p = a * a + b * b;
    let r = c * c + d * d;
    let q = a * c + b * d;
    let s_max_sq = 0.5 * (p + r + ((p - r) * (p - r) + 4.0 * q * q).sqrt());
    if s_max_sq == 0.0 {
        return 0.0;
    }
    (a * d - b * c).abs() / s_max_sq.sqrt()
}
