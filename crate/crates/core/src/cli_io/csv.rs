use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::boris::Trajectory;
use crate::drift::DriftTrajectory;
use crate::error::{Error, Result};
use crate::harness::{ErrorSeries, ObservableSeries, SlowSeries};

pub const SIMULATE_HEADER: &str = "t,x1,x2,x3,v1,v2,v3,r,z,vpar,mu,energy";
pub const DRIFT_HEADER: &str = "t,r,z,vpar,rv_invariant";
pub const ERROR_HEADER: &str = "t,err_r,err_z,err_vpar";

/// C-style `%.17g`: 17 significant digits, trailing zeros removed,
/// exponent form outside `1e-4 <= |x| < 1e17`.
pub fn fmt_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if neg { "-" } else { "" };

    if !(-4..17).contains(&exp) {
        let mut m = digits[..1].to_string();
        let frac = digits[1..].trim_end_matches('0');
        if !frac.is_empty() {
            m.push('.');
            m.push_str(frac);
        }
        let es = if exp < 0 { '-' } else { '+' };
        return format!("{sign}{m}e{es}{:02}", exp.abs());
    }
    let s = if exp < 0 {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    } else {
        let point = exp as usize + 1;
        format!("{}.{}", &digits[..point], &digits[point..])
    };
    let s = s.trim_end_matches('0').trim_end_matches('.');
    format!("{sign}{s}")
}

fn row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_g17(*v));
    }
    out.push('\n');
}

/// Trajectory CSV. `energy` is empty where the field has no potential.
pub fn trajectory_csv(traj: &Trajectory, obs: &ObservableSeries) -> String {
    let mut out = String::with_capacity(256 * (traj.samples.len() + 1));
    out.push_str(SIMULATE_HEADER);
    out.push('\n');
    for (i, s) in traj.samples.iter().enumerate() {
        row(
            &mut out,
            &[
                s.t, s.x.x, s.x.y, s.x.z, s.v.x, s.v.y, s.v.z, obs.slow.r[i], obs.slow.z[i],
                obs.slow.vpar[i], obs.mu[i],
            ],
        );
        out.pop();
        out.push(',');
        if let Some(e) = obs.energy[i] {
            out.push_str(&fmt_g17(e));
        }
        out.push('\n');
    }
    out
}

pub fn drift_csv(d: &DriftTrajectory) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{DRIFT_HEADER}");
    for (t, s) in d.t.iter().zip(&d.states) {
        row(&mut out, &[*t, s.r_t, s.z_t, s.v_t, s.rv()]);
    }
    out
}

pub fn error_csv(e: &ErrorSeries) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{ERROR_HEADER}");
    for i in 0..e.len() {
        row(&mut out, &[e.t[i], e.err_r[i], e.err_z[i], e.err_vpar[i]]);
    }
    out
}

/// Reads the `t, r, z, vpar` columns of a trajectory or drift CSV.
pub fn read_slow_series(text: &str, source: &str) -> Result<SlowSeries> {
    let bad = |line: usize, msg: String| Error::schema(format!("{source}:{line}"), msg);
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad(1, "empty file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let idx = |name: &str| {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| bad(1, format!("missing column \"{name}\"")))
    };
    let (it, ir, iz, iv) = (idx("t")?, idx("r")?, idx("z")?, idx("vpar")?);
    let mut s = SlowSeries::default();
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(bad(n + 2, format!("expected {} fields, got {}", cols.len(), fields.len())));
        }
        let num = |i: usize| {
            fields[i]
                .trim()
                .parse::<f64>()
                .map_err(|_| bad(n + 2, format!("column \"{}\" is not a number", cols[i])))
        };
        s.t.push(num(it)?);
        s.r.push(num(ir)?);
        s.z.push(num(iz)?);
        s.vpar.push(num(iv)?);
    }
    Ok(s)
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error.to_string()))?;
    Ok(())
}
