use gpada::data::{generate_synthetic, SyntheticSpec};
use gpada::engine::{accuracy, fit_supervised};
use gpada::model::OptimizerConfig;

/// Mean (source, target) accuracy of a head fit on source labels only.
fn source_only(spec: &SyntheticSpec, seeds: u64) -> (f64, f64) {
    let (mut src, mut tgt) = (0.0, 0.0);
    for seed in 0..seeds {
        let ds = generate_synthetic(&SyntheticSpec { seed, ..spec.clone() }).unwrap();
        let labeled: Vec<(u64, usize)> = ds
            .source_ids()
            .into_iter()
            .map(|id| (id, ds.get(id).unwrap().true_label))
            .collect();
        let model = fit_supervised(&ds, &labeled, 10, &OptimizerConfig::default(), seed).unwrap();
        src += accuracy(&model, &ds, &ds.source_ids()).unwrap();
        tgt += accuracy(&model, &ds, &ds.target_ids()).unwrap();
    }
    (src / seeds as f64, tgt / seeds as f64)
}

#[test]
fn without_shift_target_accuracy_tracks_source() {
    let spec = SyntheticSpec {
        shift_magnitude: 0.0,
        rotation_angle: 0.0,
        ..SyntheticSpec::default()
    };
    let (src, tgt) = source_only(&spec, 10);
    assert!((src - tgt).abs() <= 0.03, "source {src:.4} target {tgt:.4}");
}

#[test]
fn large_shift_hurts_target_accuracy() {
    let base = SyntheticSpec {
        noise_sigma: 1.0,
        rotation_angle: 0.0,
        ..SyntheticSpec::default()
    };
    let (_, clean) = source_only(
        &SyntheticSpec {
            shift_magnitude: 0.0,
            ..base.clone()
        },
        10,
    );
    let (_, shifted) = source_only(
        &SyntheticSpec {
            shift_magnitude: 10.0,
            ..base
        },
        10,
    );
    assert!(shifted < clean - 0.05, "shift 0: {clean:.4}, shift 10: {shifted:.4}");
}

#[test]
fn default_benchmark_is_a_moderate_shift() {
    let (src, tgt) = source_only(&SyntheticSpec::default(), 10);
    assert!(src > 0.8, "source {src:.4}");
    assert!(
        tgt < src - 0.1 && tgt > 1.0 / 5.0 + 0.2,
        "source {src:.4} target {tgt:.4}"
    );
}
