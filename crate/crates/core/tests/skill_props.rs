use std::collections::BTreeMap;

use geoskill::skills::{demo_scene, edit_parameter, skill_template, SKILLS};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn edits_keep_the_skill_consistent(
        skill in prop::sample::select(SKILLS.to_vec()),
        pick in any::<prop::sample::Index>(),
        scale in 0.7..1.3f64,
    ) {
        let s = skill_template(skill, &demo_scene(), &BTreeMap::new()).unwrap();
        let keys: Vec<&String> = s.parameters.keys().collect();
        prop_assume!(!keys.is_empty());
        let key = keys[pick.index(keys.len())].clone();
        let old = s.parameters[&key];
        let value = if old == 0.0 { 0.05 * scale } else { old * scale };
        match edit_parameter(&s, &key, value) {
            Ok(e) => {
                prop_assert!(e.is_consistent(1e-9, 1e-9).unwrap(), "{} {} = {}", skill, key, value);
                prop_assert!((e.parameters[&key] - value).abs() <= 1e-12, "{} {}", skill, key);
                let again = edit_parameter(&e, &key, old).unwrap();
                prop_assert!(again.is_consistent(1e-9, 1e-9).unwrap());
                prop_assert!((again.parameters[&key] - old).abs() <= 1e-12);
            }
            Err(err) => {
                // only values outside a parameter's domain may be refused
                prop_assert!(!matches!(err, geoskill::Error::UnknownParameter(_)), "{}: {}", key, err);
            }
        }
    }
}
