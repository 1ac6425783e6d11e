//! Baselines pinned from the first verified runs of the standard experiments.
//! A change here means the numerics changed, not just the tolerance.

use boris_drift::harness::{
    convergence_study, theorem1_suite, variant_contrast, Components, ExperimentSpec, StudyMode,
};

const REL: f64 = 1e-12;

fn c(r: f64, z: f64, vpar: f64) -> Components<f64> {
    Components { r, z, vpar }
}

fn assert_close(got: Components<f64>, want: Components<f64>, what: &str) {
    for (g, w) in got.to_array().iter().zip(want.to_array()) {
        assert!((g - w).abs() <= REL * w.abs(), "{what}: got {got:?}, want {want:?}");
    }
}

#[test]
fn scaled_pairs_errors() {
    let base = ExperimentSpec::paper(1e-3, 0.04);
    let mode = StudyMode::ScaledPairs {
        pairs: vec![(1e-3, 0.04), (2.5e-4, 0.02)],
    };
    let rep = convergence_study(&base, &mode).unwrap();
    assert_close(
        rep.points[0].max,
        c(0.0024077496419878663, 0.002290320029026016, 0.0008934293607841814),
        "eps 1e-3",
    );
    assert_close(
        rep.points[1].max,
        c(0.0006016694513972798, 0.0005714921146473539, 0.0002228461148499894),
        "eps 2.5e-4",
    );
}

#[test]
fn reference_vs_drift_errors() {
    let rep = theorem1_suite(&ExperimentSpec::paper(1e-2, 0.5), &[1e-2, 1e-3], 0.5).unwrap();
    assert_close(
        rep.entries[0].max,
        c(0.03302736177307786, 0.03021427583987768, 0.023325232266810103),
        "eps 1e-2",
    );
    assert_close(
        rep.entries[1].max,
        c(0.003306304794684356, 0.0029544852382670794, 0.0022501198280457935),
        "eps 1e-3",
    );
}

#[test]
fn large_step_variant_errors() {
    let mut spec = ExperimentSpec::paper(1e-3, 0.04);
    spec.c = 1.0;
    spec.t_final = 1.0 / spec.epsilon;
    let v = variant_contrast(&spec).unwrap();
    assert_close(
        v.standard,
        c(2.1346492663341117, 5.595661963570461, 15.719413450303154),
        "standard",
    );
    assert_close(
        v.modified,
        c(0.009800270534407365, 0.15454707464137046, 0.09197542943983339),
        "modified",
    );
}
