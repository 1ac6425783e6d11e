use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{frame, ElectromagneticField, ToroidalFieldModel, ToroidalProfile};
use crate::error::Result;
use crate::vec3::Vec3;

/// Relative mismatch allowed between analytic and finite-difference `grad b`.
pub const GRADIENT_TOL: f64 = 1e-6;
pub const PARALLEL_E_TOL: f64 = 1e-13;
pub const CURL_E_TOL: f64 = 1e-10;
/// `|div B|` relative to the natural scale `|B|/r`.
pub const DIV_B_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckOutcome {
    fn at_most(value: f64, threshold: f64) -> Self {
        Self {
            value,
            threshold,
            pass: value <= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub probes: usize,
    pub delta: f64,
    pub gradient_mismatch: CheckOutcome,
    pub parallel_e: CheckOutcome,
    pub curl_e: CheckOutcome,
    pub div_b: CheckOutcome,
    pub min_b: CheckOutcome,
    /// Probes that could not be evaluated at all (axis or floor violations).
    pub failed_probes: usize,
    pub pass: bool,
}

/// Uniformly scattered probe points in the annulus `r in r_range`, `z in z_range`.
pub fn random_probes(n: usize, seed: u64, r_range: (f64, f64), z_range: (f64, f64)) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r = rng.gen_range(r_range.0..r_range.1);
            let th = rng.gen_range(0.0..std::f64::consts::TAU);
            let z = rng.gen_range(z_range.0..z_range.1);
            Vec3::new(r * th.cos(), r * th.sin(), z)
        })
        .collect()
}

/// Verifies the analytic field against finite differences at the given probes.
pub fn check_field<P: ToroidalProfile>(
    model: &ToroidalFieldModel<P>,
    probes: &[Vec3],
    delta: f64,
) -> ValidationReport {
    let mut grad_mis = 0.0_f64;
    let mut par_e = 0.0_f64;
    let mut curl = 0.0_f64;
    let mut div_rel = 0.0_f64;
    let mut min_b = f64::INFINITY;
    let mut failed = 0;

    for &x in probes {
        match probe(model, x, delta) {
            Ok(p) => {
                grad_mis = grad_mis.max(p.grad_mismatch);
                par_e = par_e.max(p.parallel_e);
                curl = curl.max(p.curl_e);
                div_rel = div_rel.max(p.div_b_rel);
                min_b = min_b.min(p.b);
            }
            Err(_) => failed += 1,
        }
    }

    let gradient_mismatch = CheckOutcome::at_most(grad_mis, GRADIENT_TOL);
    let parallel_e = CheckOutcome::at_most(par_e, PARALLEL_E_TOL);
    let curl_e = CheckOutcome::at_most(curl, CURL_E_TOL);
    let div_b = CheckOutcome::at_most(div_rel, DIV_B_REL_TOL);
    let min_b = CheckOutcome {
        value: min_b,
        threshold: model.b_min,
        pass: min_b >= model.b_min,
    };
    let pass = failed == 0
        && !probes.is_empty()
        && [gradient_mismatch, parallel_e, curl_e, div_b, min_b]
            .iter()
            .all(|c| c.pass);

    ValidationReport {
        probes: probes.len(),
        delta,
        gradient_mismatch,
        parallel_e,
        curl_e,
        div_b,
        min_b,
        failed_probes: failed,
        pass,
    }
}

struct ProbeResult {
    grad_mismatch: f64,
    parallel_e: f64,
    curl_e: f64,
    div_b_rel: f64,
    b: f64,
}

fn probe<P: ToroidalProfile>(
    model: &ToroidalFieldModel<P>,
    x: Vec3,
    delta: f64,
) -> Result<ProbeResult> {
    let f = frame(x, model.r_min)?;
    let pv = model.profile_at(f.r, f.z)?;
    let prof = &model.profile;

    let fd_r = (prof.b(f.r + delta, f.z) - prof.b(f.r - delta, f.z)) / (2.0 * delta);
    let fd_z = (prof.b(f.r, f.z + delta) - prof.b(f.r, f.z - delta)) / (2.0 * delta);
    let rel = |an: f64, fd: f64| (an - fd).abs() / an.abs().max(fd.abs()).max(1.0);
    let grad_mismatch = rel(pv.db_dr, fd_r).max(rel(pv.db_dz, fd_z));

    let s = model.eval(x)?;
    let parallel_e = f.e_par.dot(s.e).abs();

    // Cartesian central differences: d[i][j] = dF_i/dx_j.
    let mut de = [[0.0; 3]; 3];
    let mut db = [[0.0; 3]; 3];
    for j in 0..3 {
        let mut step = [0.0; 3];
        step[j] = delta;
        let step = Vec3::from(step);
        let p = model.eval(x + step)?;
        let m = model.eval(x - step)?;
        let ge = (p.e - m.e) / (2.0 * delta);
        let gb = (p.b - m.b) / (2.0 * delta);
        for i in 0..3 {
            de[i][j] = ge[i];
            db[i][j] = gb[i];
        }
    }
    let curl_e = Vec3::new(
        de[2][1] - de[1][2],
        de[0][2] - de[2][0],
        de[1][0] - de[0][1],
    )
    .norm();
    let div_b = db[0][0] + db[1][1] + db[2][2];
    let div_b_rel = div_b.abs() / (s.abs_b / f.r);

    Ok(ProbeResult {
        grad_mismatch,
        parallel_e,
        curl_e,
        div_b_rel,
        b: pv.b,
    })
}
