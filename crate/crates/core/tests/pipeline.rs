use std::collections::BTreeMap;

use geoskill::constraints::{GeometricConstraint, Relation, Value};
use geoskill::fitting::{BoundsConfig, DemoKind, FitConfig};
use geoskill::generate::{generate_demonstration, GeneratorSpec};
use geoskill::io::derive_demonstration;
use geoskill::mapping::MapOptions;
use geoskill::skills::{
    demo_scene, edit_parameter, infer_constraints, learn_skill, skill_template, SkillModel, SKILLS,
};

const DIST_TOL: f64 = 1e-3;
const ANGLE_TOL: f64 = 0.5 * std::f64::consts::PI / 180.0;

fn learned(name: &str, n: usize, seed: u64) -> SkillModel {
    let rec = generate_demonstration(&GeneratorSpec::skill(name, n), seed).unwrap();
    let d = derive_demonstration(&rec, "table", "gripper").unwrap();
    let (fit, _) = learn_skill(name, &d, &FitConfig::default(), &BoundsConfig::default()).unwrap();
    infer_constraints(&fit, &demo_scene(), &MapOptions::default())
        .unwrap()
        .0
}

fn same_row(a: &GeometricConstraint, b: &GeometricConstraint) -> bool {
    a.fixed == b.fixed && a.relation == b.relation && a.constrained.kind() == b.constrained.kind()
}

/// Largest value gap between matching constraints, or None if the rows differ.
fn value_gap(got: &[GeometricConstraint], want: &[GeometricConstraint]) -> Option<f64> {
    if got.len() != want.len() {
        return None;
    }
    let mut gap: f64 = 0.0;
    for w in want {
        let g = got.iter().find(|g| same_row(g, w))?;
        gap = gap.max(match (g.value, w.value) {
            (None, None) => 0.0,
            (Some(Value::Scalar(a)), Some(Value::Scalar(b))) => (a - b).abs(),
            (Some(Value::Interval(a)), Some(Value::Interval(b))) => {
                (a.lo - b.lo).abs().max((a.hi - b.hi).abs())
            }
            _ => return None,
        });
    }
    Some(gap)
}

#[test]
fn inferred_constraints_match_templates() {
    for name in SKILLS {
        let got = learned(name, 200, 11);
        let want = skill_template(name, &demo_scene(), &BTreeMap::new()).unwrap();
        let gap = value_gap(&got.constraints, &want.constraints).unwrap_or_else(|| {
            panic!(
                "{name}: {:?}",
                got.constraints
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
            )
        });
        let tol = match name {
            // interval ends carry the bounds margin
            "grasp" => 0.05 * 0.1,
            "pour" => 2f64.to_radians(),
            _ if want
                .constraints
                .iter()
                .any(|c| c.relation == Relation::Angle) =>
            {
                ANGLE_TOL
            }
            _ => DIST_TOL,
        };
        assert!(gap <= tol, "{name}: gap {gap}");
        assert_eq!(got.kind, want.kind);
        assert!(got.is_consistent(1e-9, 1e-9).unwrap(), "{name}");
    }
}

#[test]
fn learned_trajectories_follow_the_motion() {
    for name in ["pull", "mix", "pour"] {
        let s = learned(name, 60, 3);
        assert_eq!(s.kind, DemoKind::Continuous);
        let t = s.trajectory.as_ref().unwrap();
        let inc = t.params.windows(2).all(|w| w[1] > w[0]);
        let dec = t.params.windows(2).all(|w| w[1] < w[0]);
        assert!(inc || dec, "{name}: {:?}", t.params);
        for k in 0..t.params.len() {
            s.waypoint_nullspace(k).unwrap();
        }
    }
}

#[test]
fn editing_a_learned_pour() {
    let s = learned("pour", 100, 5);
    let e = edit_parameter(&s, "c1.hi", 0.9)
        .or_else(|_| edit_parameter(&s, "c0.hi", 0.9))
        .unwrap();
    let iv = e.nullspace.rotation.tilt_range().unwrap();
    assert!((iv.hi - 0.9).abs() < 1e-12);
    let last = *e.trajectory.unwrap().params.last().unwrap();
    assert!(last <= 0.9 + 1e-12);
}
