use approx::assert_relative_eq;
use nalgebra::Matrix3;
use proptest::prelude::*;

use boris_drift::boris::{
    initialize, integrate, nondegeneracy_sigma, PusherConfig, RunPlan, TwoStepWindow, Variant,
};
use boris_drift::drift::{drift_init, drift_integrate, DriftConfig, DriftState};
use boris_drift::field::{eval_field, potential, ToroidalFieldModel};
use boris_drift::harness::{observables, ExperimentSpec};
use boris_drift::Vec3;

fn x0() -> Vec3 {
    Vec3::new(1.0 / 3.0, 0.25, 0.5)
}

fn v0() -> Vec3 {
    Vec3::new(0.4, 2.0 / 3.0, 1.0)
}

fn energy(model: &ToroidalFieldModel, x: Vec3, v: Vec3) -> f64 {
    0.5 * v.norm_sq() + potential(model, x).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn fine_standard_boris_keeps_energy(
        eps in 2e-3f64..1e-2,
        dv in prop::array::uniform3(-0.2f64..0.2),
    ) {
        let model = ToroidalFieldModel::paper(eps).unwrap();
        let v = v0() + Vec3::new(dv[0], dv[1], dv[2]);
        let h = 0.05 * eps;
        let steps = (10.0 / h).round() as usize;
        let traj = integrate(
            x0(), v, &model, &PusherConfig::standard(h),
            RunPlan { steps, sample_every: steps / 20 }, &mut (),
        ).unwrap();
        let e0 = energy(&model, x0(), v);
        for s in &traj.samples {
            prop_assert!((energy(&model, s.x, s.v) - e0).abs() <= 1e-4);
        }
    }

    #[test]
    fn two_step_recursion_is_reversible(
        variant in prop_oneof![Just(Variant::Standard), Just(Variant::Modified)],
        n in 10usize..500,
    ) {
        let eps = 1e-2;
        let h = if variant == Variant::Modified { 0.04 } else { 0.2 * eps };
        let model = ToroidalFieldModel::paper(eps).unwrap();
        let cfg = PusherConfig::for_initial_state(variant, h, &model, x0(), v0()).unwrap();
        let init = initialize(x0(), v0(), &model, &cfg).unwrap();
        let mut w: TwoStepWindow = init.window;
        for _ in 0..n {
            w.advance(&model, &cfg).unwrap();
        }
        for _ in 0..n {
            w.retreat(&model, &cfg).unwrap();
        }
        prop_assert!((w.x_curr - init.window.x_curr).norm() <= 1e-9);
        prop_assert!((w.x_prev() - x0()).norm() <= 1e-9);
        prop_assert_eq!(w.step, 1);
    }

    #[test]
    fn sigma_matches_dense_svd(
        r in 0.3f64..1.5,
        th in 0.0f64..std::f64::consts::TAU,
        z in -1.0f64..1.0,
        v in prop::array::uniform3(-2.0f64..2.0),
        h in 0.0f64..0.08,
    ) {
        let eps = 1e-3;
        let model = ToroidalFieldModel::paper(eps).unwrap();
        let x = Vec3::new(r * th.cos(), r * th.sin(), z);
        let v = Vec3::new(v[0], v[1], v[2]);
        let sigma = nondegeneracy_sigma(x, v, h, &model).unwrap();
        prop_assert!((sigma - dense_sigma(&model, x, v, h)).abs() <= 1e-12 * sigma.max(1.0));
    }

    #[test]
    fn drift_is_eps_invariant_in_slow_time(mu in 0.0f64..2.0, tau in 0.05f64..0.5) {
        let (e1, e2) = (1e-2, 1e-3);
        let m1 = ToroidalFieldModel::paper(e1).unwrap();
        let m2 = ToroidalFieldModel::paper(e2).unwrap();
        let s0 = drift_init(x0(), v0(), &m1).unwrap();
        let a = drift_integrate(s0, &m1, &DriftConfig::new(e1, mu * e1), tau / e1).unwrap();
        let b = drift_integrate(s0, &m2, &DriftConfig::new(e2, mu * e2), tau / e2).unwrap();
        let (a, b) = (a.last().unwrap(), b.last().unwrap());
        prop_assert!((a.r_t - b.r_t).abs() <= 1e-14);
        prop_assert!((a.z_t - b.z_t).abs() <= 1e-14);
        prop_assert!((a.v_t - b.v_t).abs() <= 1e-14);
    }

    #[test]
    fn drift_parallel_sign_symmetry(mu in 0.0f64..2.0, v in 0.0f64..1.0) {
        let eps = 1e-2;
        let m = ToroidalFieldModel::paper(eps).unwrap();
        let cfg = DriftConfig::new(eps, mu * eps);
        let plus = drift_integrate(DriftState::new(5.0 / 12.0, 0.5, v), &m, &cfg, 30.0).unwrap();
        let minus = drift_integrate(DriftState::new(5.0 / 12.0, 0.5, -v), &m, &cfg, 30.0).unwrap();
        let (p, q) = (plus.last().unwrap(), minus.last().unwrap());
        prop_assert_eq!(p.r_t, q.r_t);
        prop_assert_eq!(p.z_t, q.z_t);
        prop_assert_eq!(p.v_t, -q.v_t);
    }
}

/// Smallest non-zero singular value of `P_perp M P_perp` from a dense SVD,
/// with `M = P_perp + (h^2/4) P_perp [v]_x jacB`.
fn dense_sigma(model: &ToroidalFieldModel, x: Vec3, v: Vec3, h: f64) -> f64 {
    let s = eval_field(model, x).unwrap();
    let u = s.b / s.abs_b;
    let uu = Matrix3::new(
        u.x * u.x, u.x * u.y, u.x * u.z,
        u.y * u.x, u.y * u.y, u.y * u.z,
        u.z * u.x, u.z * u.y, u.z * u.z,
    );
    let p_perp = Matrix3::identity() - uu;
    let vx = Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0);
    let j = Matrix3::from_fn(|i, k| s.jac_b[i][k]);
    let m = p_perp + p_perp * vx * j * (0.25 * h * h);
    let mut sv: Vec<f64> = (p_perp * m * p_perp).singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv[1]
}

#[test]
fn sigma_is_one_without_field_gradient_or_step() {
    let model = ToroidalFieldModel::paper(1e-3).unwrap();
    assert_relative_eq!(nondegeneracy_sigma(x0(), v0(), 0.0, &model).unwrap(), 1.0, epsilon = 1e-15);
    let sigma = nondegeneracy_sigma(x0(), v0(), 0.04, &model).unwrap();
    assert_relative_eq!(sigma, dense_sigma(&model, x0(), v0(), 0.04), epsilon = 1e-12);
}

fn drift_endpoint(dtau: f64, tau: f64) -> DriftState {
    let eps = 1e-3;
    let m = ToroidalFieldModel::paper(eps).unwrap();
    let s0 = drift_init(x0(), v0(), &m).unwrap();
    let cfg = DriftConfig::new(eps, 1.1388e-3).with_dtau(dtau);
    *drift_integrate(s0, &m, &cfg, tau / eps).unwrap().last().unwrap()
}

fn gap(a: &DriftState, b: &DriftState) -> f64 {
    (a.r_t - b.r_t)
        .abs()
        .max((a.z_t - b.z_t).abs())
        .max((a.v_t - b.v_t).abs())
}

#[test]
fn drift_integrator_is_fourth_order() {
    let exact = drift_endpoint(1e-4, 0.5);
    let coarse = gap(&drift_endpoint(1e-2, 0.5), &exact);
    let fine = gap(&drift_endpoint(5e-3, 0.5), &exact);
    let ratio = coarse / fine;
    assert!(ratio > 16.0 / 3.0 && ratio < 48.0, "ratio {ratio}");
}

#[test]
fn halving_default_drift_step_changes_little() {
    let a = drift_endpoint(1e-4, 0.5);
    let b = drift_endpoint(5e-5, 0.5);
    assert!(gap(&a, &b) <= 1e-12, "{}", gap(&a, &b));
}

#[test]
fn zero_velocity_has_no_parallel_speed_or_moment() {
    let mut spec = ExperimentSpec::paper(1e-2, 0.01);
    spec.v0 = Vec3::ZERO;
    spec.variant = Variant::Standard;
    spec.t_final = 0.0;
    let traj = boris_drift::harness::run_boris(&spec).unwrap();
    let obs = observables(&traj, &spec.model().unwrap(), spec.r_min).unwrap();
    assert_eq!(obs.slow.vpar[0], 0.0);
    assert_eq!(obs.mu[0], 0.0);
}

#[test]
fn runs_are_bit_reproducible() {
    let mut spec = ExperimentSpec::paper(1e-3, 0.04);
    spec.t_final = 100.0;
    let a = boris_drift::harness::run_boris(&spec).unwrap();
    let b = boris_drift::harness::run_boris(&spec).unwrap();
    assert_eq!(a, b);
}
