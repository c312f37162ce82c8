mod common;

use common::{rotation, rotation_manifold, translation_manifold, vec3};
use geoskill::geom::{angle_between, constrained_axis, Rotation};
use geoskill::manifolds::{
    dist_r, dist_t, project_rotation, project_translation, sample_pose, ExtentBounds, Interval,
    NullspaceModel, RotationKind, SampleSpec,
};
use nalgebra::UnitQuaternion;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn translation_projection_is_idempotent(m in translation_manifold(), u in vec3(3.0)) {
        let p = project_translation(&m, &u);
        prop_assert!((project_translation(&m, &p) - p).norm() <= 1e-9);
        prop_assert!(dist_t(&m, &p) <= 1e-9);
    }

    #[test]
    fn translation_projection_is_optimal(
        m in translation_manifold(),
        u in vec3(3.0),
        coords in prop::collection::vec(-3.0..3.0f64, 3),
    ) {
        let x = m.point_at(&coords[..m.dims()]);
        let p = project_translation(&m, &u);
        prop_assert!((p - u).norm() <= (x - u).norm() + 1e-9);
    }

    #[test]
    fn rotation_projection_post_conditions(m in rotation_manifold(), r in rotation()) {
        let p = project_rotation(&m, &r);
        let axis = constrained_axis(&p, m.selector);
        match &m.kind {
            RotationKind::FullSO3 => prop_assert_eq!(p, r),
            RotationKind::OneParallel { v_f } => prop_assert!(angle_between(&axis, v_f) <= 1e-9),
            RotationKind::OneAngle { v_f, theta, interval } => {
                let a = angle_between(&axis, v_f);
                match interval {
                    Some(iv) => prop_assert!(a >= iv.lo - 1e-9 && a <= iv.hi + 1e-9),
                    None => prop_assert!((a - theta).abs() <= 1e-9),
                }
            }
        }
        prop_assert!(dist_r(&m, &p) <= 1e-9);
        prop_assert!(project_rotation(&m, &p).chordal_distance(&p) <= 1e-9);
    }

    #[test]
    fn dist_r_ignores_quaternion_sign(m in rotation_manifold(), r in rotation()) {
        let flipped = Rotation::from_unit_quaternion(UnitQuaternion::new_unchecked(-r.quaternion().into_inner()));
        prop_assert!((dist_r(&m, &r) - dist_r(&m, &flipped)).abs() <= 1e-12);
    }

    #[test]
    fn members_have_zero_distance(
        t in translation_manifold(),
        rm in rotation_manifold(),
        coords in prop::collection::vec(-2.0..2.0f64, 3),
        tilt in 0.0..1.0f64,
        az in -3.0..3.0f64,
        spin in -3.0..3.0f64,
    ) {
        let u = t.point_at(&coords[..t.dims()]);
        prop_assert!(dist_t(&t, &u) <= 1e-9);
        let s = rm.tilt_range().map_or(tilt, |iv| iv.lo + tilt * iv.width());
        let r = rm.member(s, az, spin);
        prop_assert!(dist_r(&rm, &r) <= 1e-9);
    }

    #[test]
    fn off_manifold_points_have_positive_distance(t in translation_manifold(), u in vec3(3.0)) {
        let p = project_translation(&t, &u);
        let d = dist_t(&t, &u);
        prop_assert!((d - (p - u).norm()).abs() <= 1e-12);
        prop_assert_eq!(d <= 1e-9, (p - u).norm() <= 1e-9);
    }

    #[test]
    fn samples_are_members(t in translation_manifold(), r in rotation_manifold(), seed in any::<u64>()) {
        let ranges = ExtentBounds(vec![Some(Interval::new(-1.0, 1.0).unwrap()); t.dims()]);
        let n = NullspaceModel::new(t, r);
        let p = sample_pose(&n, &SampleSpec { ranges: Some(ranges) }, seed).unwrap();
        prop_assert!(n.dist_t(&p.translation) <= 1e-9);
        prop_assert!(n.dist_r(&p.rotation) <= 1e-9);
    }
}
