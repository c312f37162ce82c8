mod common;

use common::{selector, unit, vec3};
use geoskill::constraints::{
    constraint_nullspace, constraint_residual, frame_shape, same_nullspace, set_nullspace,
    GeometricConstraint, Relation, Scene, Value,
};
use geoskill::geom::{Shape, ShapeGeometry, ShapeKind};
use geoskill::manifolds::{sample_pose, ExtentBounds, Interval, SampleSpec};
use geoskill::mapping::{map_to_constraints, MapOptions};
use proptest::prelude::*;

#[derive(Clone, Debug)]
enum Row {
    PointPoint,
    LinePoint(f64),
    CirclePoint,
    PlanePoint(f64),
    PlaneLine(f64),
    PlanePlane(f64),
    LineLine(f64),
    CylinderCylinder,
    LineLineAngle(f64),
    PlanePlaneAngle(f64),
    PlaneLineAngle(f64),
    AngleInterval(f64, f64),
}

fn row() -> impl Strategy<Value = Row> {
    prop_oneof![
        Just(Row::PointPoint),
        prop_oneof![Just(0.0), 0.05..0.4].prop_map(Row::LinePoint),
        Just(Row::CirclePoint),
        prop_oneof![Just(0.0), 0.05..0.3, -0.3..-0.05].prop_map(Row::PlanePoint),
        prop_oneof![Just(0.0), 0.05..0.3, -0.3..-0.05].prop_map(Row::PlaneLine),
        prop_oneof![Just(0.0), 0.05..0.3, -0.3..-0.05].prop_map(Row::PlanePlane),
        prop_oneof![Just(0.0), 0.05..0.4].prop_map(Row::LineLine),
        Just(Row::CylinderCylinder),
        prop_oneof![Just(0.0), 0.2..2.9].prop_map(Row::LineLineAngle),
        prop_oneof![Just(0.0), 0.2..2.9].prop_map(Row::PlanePlaneAngle),
        (0.2..1.4f64).prop_map(Row::PlaneLineAngle),
        (0.2..1.2f64, 0.2..1.2f64).prop_map(|(a, w)| Row::AngleInterval(a, a + w)),
    ]
}

#[derive(Debug)]
struct Case {
    scene: Scene,
    constraint: GeometricConstraint,
}

fn value(relation_if_zero: Relation, d: f64) -> (Relation, Option<Value>) {
    if d == 0.0 {
        (relation_if_zero, None)
    } else {
        (
            if relation_if_zero == Relation::Parallel {
                Relation::Angle
            } else {
                Relation::Distance
            },
            Some(Value::Scalar(d)),
        )
    }
}

fn build(
    row: &Row,
    p: geoskill::geom::Vec3,
    a: geoskill::geom::UnitVec3,
    r: f64,
    sel: geoskill::geom::AxisSelector,
) -> Case {
    use ShapeGeometry as G;
    use ShapeKind as K;
    let (fixed, ck, rel, val) = match *row {
        Row::PointPoint => (G::Point { p }, K::Point, Relation::Coincident, None),
        Row::LinePoint(d) => {
            let (rel, v) = value(Relation::Coincident, d);
            (G::Line { p, a }, K::Point, rel, v)
        }
        Row::CirclePoint => (
            G::Circle { p, n: a, r },
            K::Point,
            Relation::Coincident,
            None,
        ),
        Row::PlanePoint(d) | Row::PlaneLine(d) | Row::PlanePlane(d) => {
            let (rel, v) = value(Relation::Coincident, d);
            let ck = match row {
                Row::PlanePoint(_) => K::Point,
                Row::PlaneLine(_) => K::Line,
                _ => K::Plane,
            };
            (G::Plane { p, n: a }, ck, rel, v)
        }
        Row::LineLine(d) => {
            let (rel, v) = value(Relation::Coincident, d);
            (G::Line { p, a }, K::Line, rel, v)
        }
        Row::CylinderCylinder => (
            G::Cylinder { p, a, r, h: 0.1 },
            K::Cylinder,
            Relation::Concentric,
            None,
        ),
        Row::LineLineAngle(t) => {
            let (rel, v) = value(Relation::Parallel, t);
            (G::Line { p, a }, K::Line, rel, v)
        }
        Row::PlanePlaneAngle(t) => {
            let (rel, v) = value(Relation::Parallel, t);
            (G::Plane { p, n: a }, K::Plane, rel, v)
        }
        Row::PlaneLineAngle(t) => (
            G::Plane { p, n: a },
            K::Line,
            Relation::Angle,
            Some(Value::Scalar(t)),
        ),
        Row::AngleInterval(lo, hi) => (
            G::Line { p, a },
            K::Line,
            Relation::Angle,
            Some(Value::Interval(Interval::new(lo, hi).unwrap())),
        ),
    };
    let shape = Shape::new("fixture", "feature", fixed);
    Case {
        scene: Scene::from_shapes(std::slice::from_ref(&shape)),
        constraint: GeometricConstraint::new(
            shape.label(),
            frame_shape("gripper", sel, ck),
            rel,
            val,
        ),
    }
}

fn case() -> impl Strategy<Value = Case> {
    (row(), vec3(0.5), unit(), 0.05..0.3f64, selector())
        .prop_map(|(row, p, a, r, sel)| build(&row, p, a, r, sel))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn mapping_recovers_the_constraint(c in case()) {
        let n = constraint_nullspace(&c.constraint, &c.scene).unwrap();
        let sets = map_to_constraints(&n, &c.scene, &MapOptions::default()).unwrap();
        let hit = sets.iter().any(|s| {
            set_nullspace(&s.constraints, &c.scene).is_ok_and(|m| same_nullspace(&m, &n, 1e-6))
        });
        prop_assert!(hit, "{} not recovered from {:?}: {:?}", c.constraint, n, sets);
    }

    #[test]
    fn nullspace_members_satisfy_the_constraint(c in case(), seed in any::<u64>()) {
        let n = constraint_nullspace(&c.constraint, &c.scene).unwrap();
        let spec = SampleSpec {
            ranges: Some(ExtentBounds(vec![Some(Interval::new(-1.0, 1.0).unwrap()); 3])),
        };
        for k in 0..20 {
            let pose = sample_pose(&n, &spec, seed.wrapping_add(k)).unwrap();
            let r = constraint_residual(&c.constraint, &pose, &c.scene).unwrap();
            prop_assert!(r <= 1e-9, "{} residual {}", c.constraint, r);
        }
    }
}
