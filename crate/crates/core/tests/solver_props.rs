mod common;

use std::collections::BTreeMap;

use common::vec3;
use geoskill::constraints::constraint_residual;
use geoskill::geom::Vec3;
use geoskill::skills::{demo_scene, skill_template, SkillModel};
use geoskill::solver::{forward_kinematics, solve, KinematicChain, Obstacle, PrioritySpec};
use proptest::prelude::*;

fn joint_vector(chain: &KinematicChain) -> impl Strategy<Value = Vec<f64>> {
    chain
        .joints
        .iter()
        .map(|j| j.q_lo..j.q_hi)
        .collect::<Vec<_>>()
}

fn grasp() -> SkillModel {
    skill_template("grasp", &demo_scene(), &BTreeMap::new()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn planar_chain_matches_closed_form(q in joint_vector(&KinematicChain::planar_two_link())) {
        let fk = forward_kinematics(&KinematicChain::planar_two_link(), &q).unwrap();
        let x = q[0].cos() + (q[0] + q[1]).cos();
        let y = q[0].sin() + (q[0] + q[1]).sin();
        prop_assert!((fk.ee.translation - Vec3::new(x, y, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn link_lengths_do_not_depend_on_the_configuration(q in joint_vector(&KinematicChain::ur5e())) {
        let chain = KinematicChain::ur5e();
        let fk = forward_kinematics(&chain, &q).unwrap();
        prop_assert_eq!(fk.frames.len(), chain.dof() + 1);
        for (w, j) in fk.frames.windows(2).zip(&chain.joints) {
            let len = (w[1].translation - w[0].translation).norm();
            prop_assert!((len - j.a.hypot(j.d)).abs() < 1e-12);
        }
        let n: f64 = fk.ee.rotation.wxyz().iter().map(|x| x * x).sum();
        prop_assert!((n - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn converged_solutions_satisfy_everything(seed in any::<u64>(), c in vec3(0.6), r in 0.02..0.08f64) {
        let chain = KinematicChain::ur5e();
        let s = grasp();
        let obstacles = [Obstacle { center: c + Vec3::new(0.0, 0.0, 0.4), radius: r, margin: 0.005 }];
        let res = solve(&s, &chain, &demo_scene(), &obstacles, &PrioritySpec::default(), seed).unwrap();
        let again = solve(&s, &chain, &demo_scene(), &obstacles, &PrioritySpec::default(), seed).unwrap();
        prop_assert_eq!(&res, &again);
        if res.converged {
            let fk = forward_kinematics(&chain, &res.q).unwrap();
            prop_assert_eq!(chain.limit_violation(&res.q), 0.0);
            for cst in &s.constraints {
                prop_assert!(constraint_residual(cst, &fk.ee, &s.scene).unwrap() <= 1e-6);
            }
            for p in fk.collision_points() {
                prop_assert!(obstacles[0].penetration(&p, 0.0) == 0.0, "point {:?} inside obstacle", p);
            }
        }
    }
}
