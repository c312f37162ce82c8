#![allow(dead_code)]

use std::f64::consts::PI;

use geoskill::geom::{AxisSelector, Pose, Rotation, UnitVec3, Vec3};
use geoskill::manifolds::{Interval, RotationManifold, TranslationManifold};
use nalgebra::Unit;
use proptest::prelude::*;

pub fn vec3(scale: f64) -> impl Strategy<Value = Vec3> {
    (-scale..scale, -scale..scale, -scale..scale).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

pub fn unit() -> impl Strategy<Value = UnitVec3> {
    vec3(1.0)
        .prop_filter("non-degenerate", |v| v.norm() > 0.1)
        .prop_map(Unit::new_normalize)
}

pub fn rotation() -> impl Strategy<Value = Rotation> {
    (unit(), -PI..PI).prop_map(|(a, t)| Rotation::about(&a, t))
}

pub fn pose() -> impl Strategy<Value = Pose> {
    (vec3(2.0), rotation()).prop_map(|(t, r)| Pose::new(t, r))
}

pub fn selector() -> impl Strategy<Value = AxisSelector> {
    prop::sample::select(AxisSelector::ALL.to_vec())
}

pub fn translation_manifold() -> impl Strategy<Value = TranslationManifold> {
    prop_oneof![
        Just(TranslationManifold::Full3Space),
        vec3(1.0).prop_map(|p| TranslationManifold::Point { p }),
        (vec3(1.0), unit()).prop_map(|(p, a)| TranslationManifold::Line { p, a }),
        (vec3(1.0), unit(), 0.01..1.0).prop_map(|(p, n, r)| TranslationManifold::Circle {
            p,
            n,
            r
        }),
        (vec3(1.0), unit()).prop_map(|(p, n)| TranslationManifold::Plane { p, n }),
        (vec3(1.0), unit(), 0.01..1.0).prop_map(|(p, a, r)| TranslationManifold::Cylinder {
            p,
            a,
            r
        }),
    ]
}

pub fn rotation_manifold() -> impl Strategy<Value = RotationManifold> {
    prop_oneof![
        Just(RotationManifold::full()),
        (unit(), selector()).prop_map(|(v, s)| RotationManifold::one_parallel(v, s)),
        (unit(), 0.0..PI, selector()).prop_map(|(v, t, s)| RotationManifold::one_angle(v, t, s)),
        (unit(), 0.0..PI, 0.0..PI, selector()).prop_map(|(v, a, b, s)| {
            RotationManifold::one_angle_interval(v, Interval::new(a.min(b), a.max(b)).unwrap(), s)
        }),
    ]
}
