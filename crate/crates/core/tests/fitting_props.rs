mod common;

use common::{unit, vec3};
use geoskill::fitting::{
    candidate_order, fit_manifold, infer_bounds, select_model, BoundsConfig, DemoKind, FitConfig,
    ModelType,
};
use geoskill::generate::{generate_demonstration, GeneratorSpec};
use geoskill::geom::AxisSelector;
use geoskill::io::derive_demonstration;
use geoskill::manifolds::{
    angle_in_arc, rotation_subset, translation_subset, CoordKind, ExtentBounds, Interval,
    NullspaceModel, RotationManifold, TranslationManifold,
};
use proptest::prelude::*;

fn model_with(t: TranslationManifold, r: RotationManifold) -> NullspaceModel {
    NullspaceModel::new(t, r)
}

fn strategy() -> impl Strategy<Value = NullspaceModel> {
    let t = prop_oneof![
        vec3(0.5).prop_map(|p| TranslationManifold::Point { p }),
        (vec3(0.5), unit()).prop_map(|(p, a)| TranslationManifold::Line { p, a }),
        (vec3(0.5), unit(), 0.05..0.5).prop_map(|(p, n, r)| TranslationManifold::Circle {
            p,
            n,
            r
        }),
        (vec3(0.5), unit()).prop_map(|(p, n)| TranslationManifold::Plane { p, n }),
        (vec3(0.5), unit(), 0.05..0.5).prop_map(|(p, a, r)| TranslationManifold::Cylinder {
            p,
            a,
            r
        }),
    ];
    let r = prop_oneof![
        Just(RotationManifold::full()),
        unit().prop_map(|v| RotationManifold::one_parallel(v, AxisSelector::PosZ)),
        (unit(), 0.3..2.8f64).prop_map(|(v, t)| RotationManifold::one_angle(
            v,
            t,
            AxisSelector::PosZ
        )),
    ];
    (t, r).prop_map(|(t, r)| model_with(t, r))
}

fn demo(
    truth: &NullspaceModel,
    n: usize,
    sigma: f64,
    seed: u64,
) -> geoskill::fitting::Demonstration {
    let mut spec = GeneratorSpec::nullspace(truth.clone(), DemoKind::Discrete, n);
    spec.ranges = Some(ExtentBounds(vec![
        Some(Interval::new(-0.5, 0.5).unwrap());
        3
    ]));
    spec.ranges
        .as_mut()
        .unwrap()
        .0
        .truncate(truth.translation.dims());
    spec.sigma_t = sigma;
    let rec = generate_demonstration(&spec, seed).unwrap();
    derive_demonstration(&rec, "table", "gripper").unwrap()
}

fn same_set(a: &NullspaceModel, b: &NullspaceModel, tol: f64) -> bool {
    translation_subset(&a.translation, None, &b.translation, None, tol)
        && translation_subset(&b.translation, None, &a.translation, None, tol)
        && rotation_subset(&a.rotation, &b.rotation, tol)
        && rotation_subset(&b.rotation, &a.rotation, tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn noiseless_fits_recover_the_generator(truth in strategy(), seed in any::<u64>()) {
        let d = demo(&truth, 200, 0.0, seed);
        let mt = ModelType::new(truth.translation.model(), truth.rotation.model());
        let fit = fit_manifold(&d, mt, &FitConfig::default()).unwrap();
        prop_assert!(fit.rms <= 1e-7, "rms {}", fit.rms);
        prop_assert!(same_set(&fit.model, &truth, 1e-6), "{:?} vs {:?}", fit.model, truth);
    }

    #[test]
    fn accepted_steps_never_increase_the_cost(truth in strategy(), seed in any::<u64>()) {
        let d = demo(&truth, 60, 2e-3, seed);
        let mt = ModelType::new(truth.translation.model(), truth.rotation.model());
        let fit = fit_manifold(&d, mt, &FitConfig::default()).unwrap();
        prop_assert!(fit.cost_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn reported_rms_matches_recomputation(truth in strategy(), seed in any::<u64>(), lambda in 0.1..3.0f64) {
        let d = demo(&truth, 50, 1e-3, seed);
        let cfg = FitConfig { lambda, ..FitConfig::default() };
        let mt = ModelType::new(truth.translation.model(), truth.rotation.model());
        let fit = fit_manifold(&d, mt, &cfg).unwrap();
        let sq: f64 = d
            .samples
            .iter()
            .map(|s| {
                let v = fit.model.dist_t(&s.translation) + lambda * fit.model.dist_r(&s.rotation);
                v * v
            })
            .sum();
        let rms = (sq / d.samples.len() as f64).sqrt();
        prop_assert!((rms - fit.rms).abs() <= 1e-12);
    }

    #[test]
    fn no_earlier_candidate_passes(truth in strategy(), seed in any::<u64>()) {
        let d = demo(&truth, 40, 5e-4, seed);
        let cfg = FitConfig::default();
        let chosen = select_model(&d, &cfg).unwrap();
        for mt in candidate_order(&d, &cfg) {
            if mt == chosen.model_type {
                break;
            }
            if let Ok(f) = fit_manifold(&d, mt, &cfg) {
                prop_assert!(!f.passes(cfg.tau), "{} passes before {}", mt, chosen.model_type);
            }
        }
    }

    #[test]
    fn bounds_contain_the_data(truth in strategy(), seed in any::<u64>()) {
        let d = demo(&truth, 40, 0.0, seed);
        let mt = ModelType::new(truth.translation.model(), truth.rotation.model());
        let fit = fit_manifold(&d, mt, &FitConfig::default()).unwrap();
        let b = infer_bounds(&d, &fit.model, &BoundsConfig::default()).unwrap();
        let kinds = b.translation.coord_kinds();
        for s in &d.samples {
            let c = b.translation.coords(&s.translation);
            for (i, k) in kinds.iter().enumerate() {
                if let Some(iv) = b.bound(i) {
                    let inside = match k {
                        CoordKind::Linear => iv.contains(c[i], 1e-9),
                        CoordKind::Angular => angle_in_arc(c[i], &iv, 1e-9),
                    };
                    prop_assert!(inside, "coordinate {} = {} outside {:?}", i, c[i], iv);
                }
            }
            if let (Some(iv), Some(t)) = (b.rotation.tilt_range(), b.rotation.tilt_of(&s.rotation)) {
                prop_assert!(iv.contains(t, 1e-9));
            }
        }
    }
}
