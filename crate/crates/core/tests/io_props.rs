mod common;

use std::collections::BTreeMap;

use common::{pose, rotation_manifold, translation_manifold};
use geoskill::fitting::DemoKind;
use geoskill::generate::{generate_demonstration, GeneratorSpec};
use geoskill::io::{
    derive_demonstration, from_json, load_recording, save_recording, to_json, Recording,
};
use geoskill::manifolds::{ExtentBounds, Interval, NullspaceModel};
use geoskill::skills::{demo_scene, skill_template, SkillModel, SKILLS};
use proptest::prelude::*;

fn model() -> impl Strategy<Value = NullspaceModel> {
    (translation_manifold(), rotation_manifold()).prop_map(|(t, r)| NullspaceModel::new(t, r))
}

fn unit_ranges() -> Option<ExtentBounds> {
    Some(ExtentBounds(vec![
        Some(Interval::new(-1.0, 1.0).unwrap());
        3
    ]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn recordings_round_trip_exactly(poses in prop::collection::vec(pose(), 1..20), cont in any::<bool>()) {
        let kind = if cont { DemoKind::Continuous } else { DemoKind::Discrete };
        let mut rec = Recording::new(kind, vec!["a".into(), "b".into()]);
        rec.comments.push("note".into());
        for (i, p) in poses.iter().enumerate() {
            rec.push(i as f64 * 0.01, if i % 3 == 0 { "a" } else { "b" }, *p);
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.txt");
        save_recording(&path, &rec).unwrap();
        let back = load_recording(&path).unwrap();
        prop_assert_eq!(&back, &rec);
        prop_assert_eq!(back.to_text(), rec.to_text());
    }

    #[test]
    fn nullspaces_round_trip_through_json(n in model()) {
        let back: NullspaceModel = from_json(&to_json(&n)).unwrap();
        prop_assert_eq!(back, n);
    }

    #[test]
    fn noiseless_samples_lie_on_the_nullspace(n in model(), seed in any::<u64>()) {
        let mut spec = GeneratorSpec::nullspace(n.clone(), DemoKind::Discrete, 30);
        spec.ranges = unit_ranges();
        let rec = generate_demonstration(&spec, seed).unwrap();
        prop_assert_eq!(rec.ground_truth(), Some(n.clone()));
        let d = derive_demonstration(&rec, "table", "gripper").unwrap();
        for s in &d.samples {
            prop_assert!(n.dist_t(&s.translation) <= 1e-9);
            prop_assert!(n.dist_r(&s.rotation) <= 1e-9);
        }
    }
}

#[test]
fn skills_round_trip_through_json() {
    for name in SKILLS {
        let s = skill_template(name, &demo_scene(), &BTreeMap::new()).unwrap();
        let back: SkillModel = from_json(&to_json(&s)).unwrap();
        assert_eq!(back, s, "{name}");
        assert_eq!(to_json(&back), to_json(&s));
    }
}
