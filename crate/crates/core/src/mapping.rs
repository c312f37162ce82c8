//! Explaining a fitted nullspace by geometric constraints on scene shapes.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::constraints::{
    combine_with, constrained_selector, constraint_nullspace, frame_shape, GeometricConstraint,
    Relation, Scene, Value,
};
use crate::error::{Error, Result};
use crate::geom::{
    angle_between, constrained_axis, Rotation, Shape, ShapeGeometry, ShapeKind, Vec3,
};
use crate::manifolds::{
    rotation_grid, rotation_subset, translation_grid, translation_subset, Interval, NullspaceModel,
    RotationKind, RotationManifold, TranslationManifold,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapOptions {
    /// Position tolerance in meters.
    pub pos_tol: f64,
    /// Angular tolerance in radians.
    pub ang_tol: f64,
    /// Owner name given to the constrained shapes.
    pub constrained: String,
    /// Scene objects never used as fixed shapes.
    #[serde(default)]
    pub exclude: Vec<String>,
}

impl Default for MapOptions {
    fn default() -> Self {
        MapOptions {
            pos_tol: 0.01,
            ang_tol: 5f64.to_radians(),
            constrained: "gripper".into(),
            exclude: vec![],
        }
    }
}

impl MapOptions {
    /// Quaternion chord of a rotation by `ang_tol`.
    pub fn rot_tol(&self) -> f64 {
        2.0 * (self.ang_tol / 4.0).sin()
    }
}

/// A set of constraints whose joint nullspace reproduces the fitted one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub constraints: Vec<GeometricConstraint>,
    /// Worst grid deviation relative to the tolerances (≤ 1 when matching).
    pub mismatch: f64,
}

struct Candidate {
    constraint: GeometricConstraint,
    nullspace: NullspaceModel,
    mismatch: f64,
    scene_index: usize,
}

struct Readings {
    points: Vec<Vec3>,
    rotations: Vec<Rotation>,
}

fn spread(vals: &[f64]) -> (f64, f64) {
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Scalar reading when the values agree within `tol`.
fn scalar_reading(vals: &[f64], tol: f64) -> Option<f64> {
    let (lo, hi) = spread(vals);
    (hi - lo <= tol).then_some(0.5 * (lo + hi))
}

/// Candidate relation values for distance-like rows.
fn distance_value(vals: &[f64], opts: &MapOptions) -> Option<(Relation, Option<Value>)> {
    let d = scalar_reading(vals, opts.pos_tol)?;
    if d.abs() <= opts.pos_tol {
        Some((Relation::Coincident, None))
    } else {
        Some((Relation::Distance, Some(Value::Scalar(d))))
    }
}

/// Candidate relation values for angle rows. Intervals are only read when
/// the fitted rotation is itself an angle interval.
fn angle_value(
    vals: &[f64],
    interval_ok: bool,
    opts: &MapOptions,
) -> Option<(Relation, Option<Value>)> {
    let (lo, hi) = spread(vals);
    if hi - lo <= opts.ang_tol {
        let t = 0.5 * (lo + hi);
        return Some(if t.abs() <= opts.ang_tol {
            (Relation::Parallel, None)
        } else {
            (Relation::Angle, Some(Value::Scalar(t)))
        });
    }
    if interval_ok && !(lo <= opts.ang_tol && hi >= PI - opts.ang_tol) {
        let lo = if lo.abs() <= 1e-9 { 0.0 } else { lo };
        return Some((Relation::Angle, Some(Value::Interval(Interval { lo, hi }))));
    }
    None
}

fn fixed_rows(
    fixed: &Shape,
    fitted: &NullspaceModel,
    r: &Readings,
    opts: &MapOptions,
) -> Vec<GeometricConstraint> {
    let sel = fitted.rotation.selector;
    let cs = |k: ShapeKind| frame_shape(&opts.constrained, sel, k);
    let label = fixed.label();
    let mk = |k: ShapeKind, (rel, val): (Relation, Option<Value>)| {
        GeometricConstraint::new(&label, cs(k), rel, val)
    };
    let axes: Vec<Vec3> = r
        .rotations
        .iter()
        .map(|q| constrained_axis(q, sel).into_inner())
        .collect();
    let rot_free = matches!(fitted.rotation.kind, RotationKind::FullSO3);
    let interval_ok = matches!(
        fitted.rotation.kind,
        RotationKind::OneAngle {
            interval: Some(_),
            ..
        }
    );
    let mut out = vec![];
    match &fixed.geometry {
        ShapeGeometry::Point { .. } => out.push(mk(ShapeKind::Point, (Relation::Coincident, None))),
        ShapeGeometry::Circle { .. } => {
            out.push(mk(ShapeKind::Point, (Relation::Coincident, None)))
        }
        ShapeGeometry::Cylinder { .. } => {
            if !rot_free {
                out.push(mk(ShapeKind::Cylinder, (Relation::Concentric, None)));
            }
        }
        ShapeGeometry::Line { p, a } => {
            let radial: Vec<f64> = r
                .points
                .iter()
                .map(|x| {
                    let d = x - p;
                    (d - a.as_ref() * d.dot(a)).norm()
                })
                .collect();
            if let Some(v) = distance_value(&radial, opts) {
                out.push(mk(ShapeKind::Point, v));
                if !rot_free {
                    let v = match v {
                        (Relation::Coincident, None) => (Relation::Concentric, None),
                        other => other,
                    };
                    out.push(mk(ShapeKind::Line, v));
                }
            }
            if !rot_free {
                let ang: Vec<f64> = axes.iter().map(|v| angle_between(v, a)).collect();
                if let Some(v) = angle_value(&ang, interval_ok, opts) {
                    out.push(mk(ShapeKind::Line, v));
                }
            }
        }
        ShapeGeometry::Plane { p, n } => {
            let signed: Vec<f64> = r.points.iter().map(|x| (x - p).dot(n)).collect();
            if let Some(v) = distance_value(&signed, opts) {
                out.push(mk(ShapeKind::Point, v));
                if !rot_free {
                    out.push(mk(ShapeKind::Line, v));
                    out.push(mk(ShapeKind::Plane, v));
                }
            }
            if !rot_free {
                let ang: Vec<f64> = axes.iter().map(|v| angle_between(v, n)).collect();
                if let Some(v) = angle_value(&ang, interval_ok, opts) {
                    out.push(mk(ShapeKind::Plane, v));
                }
                let comp: Vec<f64> = ang.iter().map(|t| FRAC_PI_2 - t).collect();
                if let Some(v) = angle_value(&comp, interval_ok, opts) {
                    // a line parallel to the plane is an angle of zero, not "parallel"
                    let v = match v {
                        (Relation::Parallel, None) => (Relation::Angle, Some(Value::Scalar(0.0))),
                        other => other,
                    };
                    out.push(mk(ShapeKind::Line, v));
                }
            }
        }
    }
    out
}

/// Worst normalized deviation of the fitted grid from `n`.
fn grid_mismatch(r: &Readings, n: &NullspaceModel, opts: &MapOptions) -> f64 {
    let t = r
        .points
        .iter()
        .map(|x| n.dist_t(x) / opts.pos_tol)
        .fold(0.0, f64::max);
    let q = r
        .rotations
        .iter()
        .map(|x| n.dist_r(x) / opts.rot_tol())
        .fold(0.0, f64::max);
    t.max(q)
}

/// Whether `n` lies inside the (unbounded) fitted model.
fn inside_fitted(n: &NullspaceModel, fitted: &NullspaceModel, opts: &MapOptions) -> bool {
    translation_subset(
        &n.translation,
        n.bounds.as_ref(),
        &fitted.translation,
        None,
        opts.pos_tol,
    ) && rotation_subset(&n.rotation, &fitted.rotation, opts.rot_tol())
}

fn set_model(set: &[&Candidate], opts: &MapOptions) -> Option<NullspaceModel> {
    let mut acc = set[0].nullspace.clone();
    for c in &set[1..] {
        acc = combine_with(&acc, &c.nullspace, opts.pos_tol, opts.rot_tol()).ok()?;
    }
    Some(acc)
}

fn nullspace_dims(n: &NullspaceModel) -> usize {
    n.translation.dims() + n.rotation.model().dims()
}

/// Plane distance interval explaining a bounded axial coordinate, using
/// planes owned by the objects the set already refers to.
fn axial_bound(
    fitted: &NullspaceModel,
    set: &[&Candidate],
    shapes: &[Shape],
    opts: &MapOptions,
) -> Option<(GeometricConstraint, usize)> {
    let (p, a) = match &fitted.translation {
        TranslationManifold::Line { p, a } | TranslationManifold::Cylinder { p, a, .. } => (p, a),
        _ => return None,
    };
    let iv = fitted.bound(0)?;
    let owners: BTreeSet<&str> = set
        .iter()
        .filter_map(|c| c.constraint.fixed.split_once('/').map(|(o, _)| o))
        .collect();
    let sel = fitted.rotation.selector;
    let mut best: Option<(f64, GeometricConstraint, usize)> = None;
    for (i, s) in shapes.iter().enumerate() {
        let ShapeGeometry::Plane { p: q, n } = &s.geometry else {
            continue;
        };
        if !owners.contains(s.owner.as_str())
            || angle_between(a, n).min(PI - angle_between(a, n)) > opts.ang_tol
        {
            continue;
        }
        let s_lo = (p + a.as_ref() * iv.lo - q).dot(n);
        let s_hi = (p + a.as_ref() * iv.hi - q).dot(n);
        let value = Value::Interval(Interval {
            lo: s_lo.min(s_hi),
            hi: s_lo.max(s_hi),
        });
        let parallel = RotationManifold::one_parallel(*n, sel);
        let kind = if rotation_subset(&fitted.rotation, &parallel, opts.rot_tol()) {
            ShapeKind::Plane
        } else {
            ShapeKind::Point
        };
        let c = GeometricConstraint::new(
            s.label(),
            frame_shape(&opts.constrained, sel, kind),
            Relation::Distance,
            Some(value),
        );
        let m = value.max_abs();
        if best.as_ref().is_none_or(|b| m < b.0) {
            best = Some((m, c, i));
        }
    }
    best.map(|(_, c, i)| (c, i))
}

#[derive(PartialEq, PartialOrd)]
struct RankKey {
    size: usize,
    dims: usize,
    non_canonical: usize,
    mismatch_bucket: i64,
    max_value: f64,
    owners: usize,
    scene_order: Vec<usize>,
}

/// Candidate constraint sets whose combined nullspace reproduces `fitted`
/// within the tolerances, most specific and closest first. Bounds on free
/// coordinates are ignored except an axial bound on a line or cylinder,
/// which is explained by a plane-distance interval when a suitable plane
/// exists.
pub fn map_to_constraints(
    fitted: &NullspaceModel,
    scene: &Scene,
    opts: &MapOptions,
) -> Result<Vec<CandidateSet>> {
    if scene.is_empty() {
        return Err(Error::invalid("scene has no shapes"));
    }
    fitted.validate()?;
    let unbounded = NullspaceModel {
        bounds: None,
        ..fitted.clone()
    };
    let readings = Readings {
        points: translation_grid(&unbounded.translation, None, 7, 1.0),
        rotations: rotation_grid(&unbounded.rotation, 7),
    };
    let shapes: Vec<Shape> = scene
        .world_shapes()
        .into_iter()
        .filter(|s| !opts.exclude.contains(&s.owner) && s.owner != opts.constrained)
        .collect();

    let mut cands: Vec<Candidate> = vec![];
    for (i, s) in shapes.iter().enumerate() {
        for c in fixed_rows(s, &unbounded, &readings, opts) {
            if constrained_selector(&c.constrained).is_err() {
                continue;
            }
            let Ok(n) = constraint_nullspace(&c, scene) else {
                continue;
            };
            let mismatch = grid_mismatch(&readings, &n, opts);
            if mismatch <= 1.0 {
                cands.push(Candidate {
                    constraint: c,
                    nullspace: n,
                    mismatch,
                    scene_index: i,
                });
            }
        }
    }

    let mut sets: Vec<Vec<usize>> = vec![];
    let exact = |idx: &[usize]| -> bool {
        let refs: Vec<&Candidate> = idx.iter().map(|&i| &cands[i]).collect();
        set_model(&refs, opts).is_some_and(|m| inside_fitted(&m, &unbounded, opts))
    };
    let singles: Vec<bool> = (0..cands.len()).map(|i| exact(&[i])).collect();
    sets.extend((0..cands.len()).filter(|&i| singles[i]).map(|i| vec![i]));
    for i in 0..cands.len() {
        for j in i + 1..cands.len() {
            if !singles[i] && !singles[j] && exact(&[i, j]) {
                sets.push(vec![i, j]);
            }
        }
    }

    let mut ranked: Vec<(RankKey, CandidateSet)> = vec![];
    for idx in sets {
        let refs: Vec<&Candidate> = idx.iter().map(|&i| &cands[i]).collect();
        let mut constraints: Vec<GeometricConstraint> =
            refs.iter().map(|c| c.constraint.clone()).collect();
        let mut order: Vec<usize> = refs.iter().map(|c| c.scene_index).collect();
        if let Some((extra, i)) = axial_bound(fitted, &refs, &shapes, opts) {
            constraints.push(extra);
            order.push(i);
        }
        let mismatch = refs.iter().map(|c| c.mismatch).fold(0.0, f64::max);
        let owners: BTreeSet<&str> = refs
            .iter()
            .filter_map(|c| c.constraint.fixed.split_once('/').map(|(o, _)| o))
            .collect();
        order.sort_unstable();
        let key = RankKey {
            size: refs.len(),
            dims: refs.iter().map(|c| nullspace_dims(&c.nullspace)).sum(),
            non_canonical: refs
                .iter()
                .filter(|c| !c.constraint.relation.is_canonical())
                .count(),
            mismatch_bucket: (mismatch * 10.0).floor() as i64,
            max_value: refs
                .iter()
                .filter_map(|c| c.constraint.value.map(|v| v.max_abs()))
                .fold(0.0, f64::max),
            owners: owners.len(),
            scene_order: order,
        };
        ranked.push((
            key,
            CandidateSet {
                constraints,
                mismatch,
            },
        ));
    }
    ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    Ok(ranked.into_iter().map(|(_, s)| s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{NamedShape, SceneObject};
    use crate::geom::{AxisSelector, Pose};

    fn scene() -> Scene {
        Scene {
            objects: vec![
                SceneObject {
                    name: "table".into(),
                    pose: Pose::identity(),
                    shapes: vec![NamedShape {
                        name: "top".into(),
                        geometry: ShapeGeometry::Plane {
                            p: Vec3::zeros(),
                            n: Vec3::z_axis(),
                        },
                    }],
                },
                SceneObject {
                    name: "cup".into(),
                    pose: Pose::from_translation(Vec3::new(0.45, 0.0, 0.05)),
                    shapes: vec![NamedShape {
                        name: "axis".into(),
                        geometry: ShapeGeometry::Line {
                            p: Vec3::zeros(),
                            a: Vec3::z_axis(),
                        },
                    }],
                },
            ],
        }
    }

    #[test]
    fn place_maps_to_coincident_table() {
        let fitted = NullspaceModel::new(
            TranslationManifold::Plane {
                p: Vec3::zeros(),
                n: Vec3::z_axis(),
            },
            RotationManifold::one_parallel(Vec3::z_axis(), AxisSelector::PosZ),
        );
        let sets = map_to_constraints(&fitted, &scene(), &MapOptions::default()).unwrap();
        let top = &sets[0].constraints;
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].relation, Relation::Coincident);
        assert_eq!(top[0].fixed, "table/top");
        assert_eq!(top[0].constrained.kind(), ShapeKind::Plane);
    }

    #[test]
    fn unmatched_model_gives_nothing() {
        let fitted = NullspaceModel::new(
            TranslationManifold::Point {
                p: Vec3::new(2.0, 2.0, 2.0),
            },
            RotationManifold::full(),
        );
        assert!(
            map_to_constraints(&fitted, &scene(), &MapOptions::default())
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn empty_scene_is_an_error() {
        let fitted = NullspaceModel::new(TranslationManifold::Full3Space, RotationManifold::full());
        assert!(map_to_constraints(&fitted, &Scene::default(), &MapOptions::default()).is_err());
    }
}
