mod common;

use common::{pose, rotation, unit};
use geoskill::geom::{relative_pose, rotation_from_axis_angle, Pose, Rotation};
use proptest::prelude::*;

fn close(a: &Pose, b: &Pose, tol: f64) -> bool {
    (a.translation - b.translation).norm() <= tol && a.rotation.chordal_distance(&b.rotation) <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn compose_is_associative(a in pose(), b in pose(), c in pose()) {
        let l = a.compose(&b).compose(&c);
        let r = a.compose(&b.compose(&c));
        prop_assert!(close(&l, &r, 1e-12));
    }

    #[test]
    fn relative_pose_undoes_compose(f in pose(), d in pose()) {
        prop_assert!(close(&relative_pose(&f, &f.compose(&d)), &d, 1e-12));
    }

    #[test]
    fn axis_angle_inverse(a in unit(), t in -10.0..10.0f64) {
        let r = rotation_from_axis_angle(&a, t).unwrap().compose(&rotation_from_axis_angle(&a, -t).unwrap());
        prop_assert!(r.chordal_distance(&Rotation::identity()) <= 1e-12);
    }

    #[test]
    fn canonical_sign_is_idempotent(r in rotation()) {
        let c = r.canonical();
        prop_assert!(c.wxyz()[0] >= 0.0);
        prop_assert_eq!(c.canonical().wxyz(), c.wxyz());
    }
}
