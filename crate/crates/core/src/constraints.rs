//! Geometric constraints between a fixed scene shape and a shape attached to
//! the constrained frame, their nullspaces, and how nullspaces combine.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{
    angle_between, constrained_axis, AxisSelector, Pose, Shape, ShapeGeometry, ShapeKind, UnitVec3,
    Vec3,
};
use crate::manifolds::{
    rotation_subset, translation_subset, ExtentBounds, Interval, NullspaceModel, RotationKind,
    RotationManifold, TranslationManifold,
};

/// Tolerance used when deciding containment between exact nullspaces.
pub const EXACT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Distance,
    Angle,
    Coincident,
    Concentric,
    Parallel,
}

impl Relation {
    /// Coincident, Concentric and Parallel carry no value.
    pub fn is_canonical(&self) -> bool {
        matches!(
            self,
            Relation::Coincident | Relation::Concentric | Relation::Parallel
        )
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Relation::Distance => "Distance",
            Relation::Angle => "Angle",
            Relation::Coincident => "Coincident",
            Relation::Concentric => "Concentric",
            Relation::Parallel => "Parallel",
        };
        f.write_str(s)
    }
}

/// Scalar or interval constraint value (meters or radians).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Scalar(f64),
    Interval(Interval),
}

impl Value {
    /// Largest magnitude the value reaches.
    pub fn max_abs(&self) -> f64 {
        match self {
            Value::Scalar(v) => v.abs(),
            Value::Interval(iv) => iv.lo.abs().max(iv.hi.abs()),
        }
    }

    /// Distance from `x` to the admissible set.
    pub fn violation(&self, x: f64) -> f64 {
        match self {
            Value::Scalar(v) => (x - v).abs(),
            Value::Interval(iv) => iv.excess(x),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Scalar(v) => write!(f, "{v:.4}"),
            Value::Interval(iv) => write!(f, "[{:.4}, {:.4}]", iv.lo, iv.hi),
        }
    }
}

/// A relation between a fixed scene shape (by label) and a shape in the
/// constrained frame. The constrained shape must pass through the frame
/// origin and point along one of its body axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricConstraint {
    pub fixed: String,
    pub constrained: Shape,
    pub relation: Relation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
}

impl GeometricConstraint {
    pub fn new(
        fixed: impl Into<String>,
        constrained: Shape,
        relation: Relation,
        value: Option<Value>,
    ) -> Self {
        GeometricConstraint {
            fixed: fixed.into(),
            constrained,
            relation,
            value,
        }
    }

    /// Scalar target, with zero for canonical relations.
    fn scalar(&self) -> Option<f64> {
        match (self.relation, self.value) {
            (r, None) if r.is_canonical() => Some(0.0),
            (_, Some(Value::Scalar(v))) => Some(v),
            _ => None,
        }
    }

    fn interval(&self) -> Option<Interval> {
        match self.value {
            Some(Value::Interval(iv)) => Some(iv),
            _ => None,
        }
    }

    fn is_distance_like(&self) -> bool {
        matches!(
            self.relation,
            Relation::Distance | Relation::Coincident | Relation::Concentric
        )
    }

    fn is_angle_like(&self) -> bool {
        matches!(self.relation, Relation::Angle | Relation::Parallel)
    }

    fn row(&self, fixed: ShapeKind) -> String {
        format!("{}-{} {}", fixed, self.constrained.kind(), self.relation)
    }
}

impl fmt::Display for GeometricConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({}, {})",
            self.relation,
            self.fixed,
            self.constrained.label()
        )?;
        match self.value {
            Some(Value::Scalar(v)) => write!(f, " = {v:.4}"),
            Some(v @ Value::Interval(_)) => write!(f, " in {v}"),
            None => Ok(()),
        }
    }
}

/// A shape in an object's frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedShape {
    pub name: String,
    #[serde(flatten)]
    pub geometry: ShapeGeometry,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub name: String,
    #[serde(default)]
    pub pose: Pose,
    pub shapes: Vec<NamedShape>,
}

/// Objects with poses in the scene (world) frame. Nullspaces are expressed
/// in the scene frame.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub objects: Vec<SceneObject>,
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        let mut names = std::collections::BTreeSet::new();
        for o in &self.objects {
            if !names.insert(o.name.as_str()) {
                return Err(Error::invalid(format!("duplicate object name {}", o.name)));
            }
            let mut shapes = std::collections::BTreeSet::new();
            for s in &o.shapes {
                if !shapes.insert(s.name.as_str()) {
                    return Err(Error::invalid(format!(
                        "duplicate shape name {}/{}",
                        o.name, s.name
                    )));
                }
                s.geometry.validate()?;
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.objects.iter().all(|o| o.shapes.is_empty())
    }

    /// All shapes in scene order, in the scene frame.
    pub fn world_shapes(&self) -> Vec<Shape> {
        self.objects
            .iter()
            .flat_map(|o| {
                o.shapes
                    .iter()
                    .map(move |s| Shape::new(&o.name, &s.name, s.geometry.transformed(&o.pose)))
            })
            .collect()
    }

    /// Scene-frame shape by `object/shape` label.
    pub fn shape(&self, label: &str) -> Result<Shape> {
        let (obj, name) = label
            .split_once('/')
            .ok_or_else(|| Error::MissingShape(label.to_string()))?;
        let o = self
            .objects
            .iter()
            .find(|o| o.name == obj)
            .ok_or_else(|| Error::MissingShape(label.to_string()))?;
        let s = o
            .shapes
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::MissingShape(label.to_string()))?;
        Ok(Shape::new(obj, name, s.geometry.transformed(&o.pose)))
    }

    /// Scene holding the given scene-frame shapes, grouped by owner.
    pub fn from_shapes(shapes: &[Shape]) -> Scene {
        let mut scene = Scene::default();
        for s in shapes {
            let named = NamedShape {
                name: s.name.clone(),
                geometry: s.geometry.clone(),
            };
            match scene.objects.iter_mut().find(|o| o.name == s.owner) {
                Some(o) => {
                    if !o.shapes.iter().any(|x| x.name == s.name) {
                        o.shapes.push(named)
                    }
                }
                None => scene.objects.push(SceneObject {
                    name: s.owner.clone(),
                    pose: Pose::identity(),
                    shapes: vec![named],
                }),
            }
        }
        scene
    }
}

/// Canonical shapes of a constrained frame: a point at the origin and a
/// line, plane and cylinder along the selected body axis.
pub fn frame_shapes(owner: &str, selector: AxisSelector) -> Vec<Shape> {
    let p = Vec3::zeros();
    let a = selector.body_axis();
    vec![
        Shape::new(owner, "point", ShapeGeometry::Point { p }),
        Shape::new(owner, "axis", ShapeGeometry::Line { p, a }),
        Shape::new(owner, "plane", ShapeGeometry::Plane { p, n: a }),
        Shape::new(
            owner,
            "cylinder",
            ShapeGeometry::Cylinder {
                p,
                a,
                r: 0.01,
                h: 0.02,
            },
        ),
    ]
}

pub fn frame_shape(owner: &str, selector: AxisSelector, kind: ShapeKind) -> Shape {
    frame_shapes(owner, selector)
        .into_iter()
        .find(|s| s.kind() == kind)
        .unwrap_or_else(|| Shape::new(owner, "point", ShapeGeometry::Point { p: Vec3::zeros() }))
}

/// Body axis a constrained shape points along.
pub fn constrained_selector(s: &Shape) -> Result<AxisSelector> {
    s.geometry.validate()?;
    if s.geometry.origin().norm() > 1e-9 {
        return Err(Error::invalid(format!(
            "constrained shape {} must pass through the frame origin",
            s.label()
        )));
    }
    match s.geometry.direction() {
        None => Ok(AxisSelector::default()),
        Some(d) => AxisSelector::from_direction(&d, 1e-9).ok_or_else(|| {
            Error::invalid(format!(
                "constrained shape {} must point along a body axis",
                s.label()
            ))
        }),
    }
}

/// Scene-frame index of the coordinate axis `n` is parallel to, and the sign.
fn aligned_axis(n: &UnitVec3) -> Option<(usize, f64)> {
    let k = n.iamax();
    (n[k].abs() > 1.0 - 1e-9).then(|| (k, n[k].signum()))
}

/// Full space restricted to `lo ≤ (x − p)·n ≤ hi`, for an axis-aligned `n`.
fn slab(p: &Vec3, n: &UnitVec3, iv: Interval) -> Result<(TranslationManifold, ExtentBounds)> {
    let (k, s) = aligned_axis(n).ok_or_else(|| {
        Error::UnsupportedCombination(
            "interval distance to a plane that is not axis-aligned".into(),
        )
    })?;
    let (a, b) = (p[k] + s * iv.lo, p[k] + s * iv.hi);
    let mut bounds = ExtentBounds::unbounded(3);
    bounds.0[k] = Some(Interval {
        lo: a.min(b),
        hi: a.max(b),
    });
    Ok((TranslationManifold::Full3Space, bounds))
}

fn angle_rotation(
    v_f: UnitVec3,
    c: &GeometricConstraint,
    sel: AxisSelector,
    complement: bool,
) -> Result<RotationManifold> {
    let map = |t: f64| if complement { FRAC_PI_2 - t } else { t };
    if let Some(iv) = c.interval() {
        let (a, b) = (map(iv.lo), map(iv.hi));
        let iv = Interval::new(a.min(b).max(0.0), a.max(b).min(PI))?;
        return Ok(RotationManifold::one_angle_interval(v_f, iv, sel));
    }
    let t = map(c.scalar().unwrap_or(0.0));
    if !(0.0..=PI).contains(&t) {
        return Err(Error::invalid(format!("angle {t} outside [0, π]")));
    }
    if t.abs() <= 1e-12 {
        Ok(RotationManifold::one_parallel(v_f, sel))
    } else {
        Ok(RotationManifold::one_angle(v_f, t, sel))
    }
}

/// Nullspace of relative poses (of the constrained frame, in the scene
/// frame) that satisfy `c`.
pub fn constraint_nullspace(c: &GeometricConstraint, scene: &Scene) -> Result<NullspaceModel> {
    let fixed = scene.shape(&c.fixed)?;
    let sel = constrained_selector(&c.constrained)?;
    let ck = c.constrained.kind();
    let row = || Error::NoConstraintRow(c.row(fixed.kind()));
    let full = RotationManifold {
        kind: RotationKind::FullSO3,
        selector: sel,
    };
    let dist = c.scalar();
    let nonneg = |d: f64| -> Result<f64> {
        if d < 0.0 {
            Err(Error::invalid(format!("distance {d} must be non-negative")))
        } else {
            Ok(d)
        }
    };
    use ShapeGeometry as G;
    use ShapeKind as K;
    let model = match (&fixed.geometry, ck) {
        (G::Point { p }, K::Point)
            if c.is_distance_like() && c.relation != Relation::Concentric =>
        {
            match dist {
                Some(d) if d.abs() <= 1e-12 => {
                    NullspaceModel::new(TranslationManifold::Point { p: *p }, full)
                }
                _ => return Err(row()),
            }
        }
        (G::Line { p, a }, K::Point)
            if c.is_distance_like() && c.relation != Relation::Concentric =>
        {
            match dist.map(nonneg).transpose()? {
                Some(d) if d <= 1e-12 => {
                    NullspaceModel::new(TranslationManifold::Line { p: *p, a: *a }, full)
                }
                Some(d) => {
                    NullspaceModel::new(TranslationManifold::Cylinder { p: *p, a: *a, r: d }, full)
                }
                None => return Err(row()),
            }
        }
        (G::Circle { p, n, r }, K::Point)
            if matches!(c.relation, Relation::Coincident) || dist == Some(0.0) =>
        {
            NullspaceModel::new(
                TranslationManifold::Circle {
                    p: *p,
                    n: *n,
                    r: *r,
                },
                full,
            )
        }
        (G::Plane { p, n }, K::Point | K::Line | K::Plane)
            if c.is_distance_like() && c.relation != Relation::Concentric =>
        {
            let rot = match ck {
                K::Point => full,
                K::Line => RotationManifold::one_angle(*n, FRAC_PI_2, sel),
                _ => RotationManifold::one_parallel(*n, sel),
            };
            match (dist, c.interval()) {
                (Some(d), _) => NullspaceModel::new(
                    TranslationManifold::Plane {
                        p: p + n.as_ref() * d,
                        n: *n,
                    },
                    rot,
                ),
                (None, Some(iv)) => {
                    let (t, b) = slab(p, n, iv)?;
                    NullspaceModel::new(t, rot).with_bounds(b)
                }
                _ => return Err(row()),
            }
        }
        (G::Line { p, a }, K::Line) if c.is_distance_like() => {
            let rot = RotationManifold::one_parallel(*a, sel);
            match dist.map(nonneg).transpose()? {
                Some(d) if d <= 1e-12 => {
                    NullspaceModel::new(TranslationManifold::Line { p: *p, a: *a }, rot)
                }
                Some(d) => {
                    NullspaceModel::new(TranslationManifold::Cylinder { p: *p, a: *a, r: d }, rot)
                }
                None => return Err(row()),
            }
        }
        (G::Cylinder { p, a, r, .. }, K::Cylinder) if c.relation == Relation::Concentric => {
            NullspaceModel::new(
                TranslationManifold::Cylinder {
                    p: *p,
                    a: *a,
                    r: *r,
                },
                RotationManifold::one_parallel(*a, sel),
            )
        }
        (G::Line { a, .. }, K::Line) if c.is_angle_like() => NullspaceModel::new(
            TranslationManifold::Full3Space,
            angle_rotation(*a, c, sel, false)?,
        ),
        (G::Plane { n, .. }, K::Plane) if c.is_angle_like() => NullspaceModel::new(
            TranslationManifold::Full3Space,
            angle_rotation(*n, c, sel, false)?,
        ),
        (G::Plane { n, .. }, K::Line) if c.is_angle_like() => NullspaceModel::new(
            TranslationManifold::Full3Space,
            angle_rotation(*n, c, sel, true)?,
        ),
        _ => return Err(row()),
    };
    model.validate()?;
    Ok(model)
}

fn same_translation(a: &NullspaceModel, b: &NullspaceModel, tol: f64) -> bool {
    translation_subset(
        &a.translation,
        a.bounds.as_ref(),
        &b.translation,
        b.bounds.as_ref(),
        tol,
    ) && translation_subset(
        &b.translation,
        b.bounds.as_ref(),
        &a.translation,
        a.bounds.as_ref(),
        tol,
    )
}

/// Whether two nullspaces describe the same set (bounds included).
pub fn same_nullspace(a: &NullspaceModel, b: &NullspaceModel, tol: f64) -> bool {
    same_translation(a, b, tol)
        && rotation_subset(&a.rotation, &b.rotation, tol)
        && rotation_subset(&b.rotation, &a.rotation, tol)
}

/// Single bounded scene axis of a bounded full space, if that is all it is.
fn slab_axis(m: &NullspaceModel) -> Option<(usize, Interval)> {
    if !matches!(m.translation, TranslationManifold::Full3Space) {
        return None;
    }
    let b = m.bounds.as_ref()?;
    let bounded: Vec<(usize, Interval)> =
        (0..3).filter_map(|i| b.get(i).map(|iv| (i, iv))).collect();
    match bounded.as_slice() {
        [one] => Some(*one),
        _ => None,
    }
}

/// Moves a slab bound onto the axial coordinate of a Line or Cylinder whose
/// axis is parallel to the slab axis.
fn transfer_slab(slab: (usize, Interval), m: &NullspaceModel) -> Option<NullspaceModel> {
    let (k, iv) = slab;
    let (p, a) = match &m.translation {
        TranslationManifold::Line { p, a } | TranslationManifold::Cylinder { p, a, .. } => (p, a),
        _ => return None,
    };
    if a[k].abs() < 1.0 - 1e-9 {
        return None;
    }
    let (x, y) = ((iv.lo - p[k]) / a[k], (iv.hi - p[k]) / a[k]);
    let mut new = Interval {
        lo: x.min(y),
        hi: x.max(y),
    };
    let mut bounds = m
        .bounds
        .clone()
        .unwrap_or_else(|| ExtentBounds::unbounded(m.translation.dims()));
    if let Some(old) = bounds.get(0) {
        new = old.intersect(&new)?;
    }
    bounds.0[0] = Some(new);
    Some(NullspaceModel {
        bounds: Some(bounds),
        ..m.clone()
    })
}

/// Intersection of two nullspaces when one contains the other, or a slab
/// bounds the axis of a line or cylinder.
pub fn combine(a: &NullspaceModel, b: &NullspaceModel) -> Result<NullspaceModel> {
    combine_with(a, b, EXACT_TOL, EXACT_TOL)
}

/// `combine` with explicit translation and rotation containment tolerances.
pub fn combine_with(
    a: &NullspaceModel,
    b: &NullspaceModel,
    tol: f64,
    rot_tol: f64,
) -> Result<NullspaceModel> {
    let rotation = if rotation_subset(&a.rotation, &b.rotation, rot_tol) {
        a.rotation.clone()
    } else if rotation_subset(&b.rotation, &a.rotation, rot_tol) {
        b.rotation.clone()
    } else {
        return Err(Error::UnsupportedCombination(format!(
            "rotations {} and {}",
            a.rotation.model(),
            b.rotation.model()
        )));
    };
    let sub = |x: &NullspaceModel, y: &NullspaceModel| {
        translation_subset(
            &x.translation,
            x.bounds.as_ref(),
            &y.translation,
            y.bounds.as_ref(),
            tol,
        )
    };
    let translated = if sub(a, b) {
        a.clone()
    } else if sub(b, a) {
        b.clone()
    } else if let Some(m) = slab_axis(a).and_then(|s| transfer_slab(s, b)) {
        m
    } else if let Some(m) = slab_axis(b).and_then(|s| transfer_slab(s, a)) {
        m
    } else {
        return Err(Error::UnsupportedCombination(format!(
            "translations {} and {}",
            a.translation.model(),
            b.translation.model()
        )));
    };
    Ok(NullspaceModel {
        translation: translated.translation,
        bounds: translated.bounds,
        rotation,
        rms_fit_residual: 0.0,
    })
}

/// Nullspace of a whole constraint set.
pub fn set_nullspace(cs: &[GeometricConstraint], scene: &Scene) -> Result<NullspaceModel> {
    let mut it = cs.iter();
    let first = it
        .next()
        .ok_or_else(|| Error::invalid("empty constraint set"))?;
    let mut acc = constraint_nullspace(first, scene)?;
    for c in it {
        acc = combine(&acc, &constraint_nullspace(c, scene)?)?;
    }
    Ok(acc)
}

/// Measured value of the relation for a constrained frame at `pose`:
/// distances for distance-like relations and angles for angle-like ones.
/// The second component is the orientation error that distance rows with
/// directed constrained shapes also require to vanish.
fn measure(c: &GeometricConstraint, pose: &Pose, fixed: &ShapeGeometry) -> Result<(f64, f64)> {
    let sel = constrained_selector(&c.constrained)?;
    let x = pose.translation;
    let v = constrained_axis(&pose.rotation, sel);
    let ck = c.constrained.kind();
    use ShapeGeometry as G;
    use ShapeKind as K;
    let radial = |p: &Vec3, a: &UnitVec3| {
        let d = x - p;
        (d - a.as_ref() * d.dot(a)).norm()
    };
    Ok(match (fixed, ck) {
        (G::Point { p }, K::Point) => ((x - p).norm(), 0.0),
        (G::Line { p, a }, K::Point) => (radial(p, a), 0.0),
        (G::Circle { .. }, K::Point) => {
            let m = TranslationManifold::Circle {
                p: fixed.origin(),
                n: fixed.direction().expect("circle normal"),
                r: match fixed {
                    G::Circle { r, .. } => *r,
                    _ => unreachable!(),
                },
            };
            (m.dist(&x), 0.0)
        }
        (G::Plane { p, n }, K::Point) if c.is_distance_like() => ((x - p).dot(n), 0.0),
        (G::Plane { p, n }, K::Line) if c.is_distance_like() => {
            ((x - p).dot(n), (angle_between(&v, n) - FRAC_PI_2).abs())
        }
        (G::Plane { p, n }, K::Plane) if c.is_distance_like() => {
            ((x - p).dot(n), angle_between(&v, n))
        }
        (G::Line { p, a }, K::Line) if c.is_distance_like() => (radial(p, a), angle_between(&v, a)),
        (G::Cylinder { p, a, r, .. }, K::Cylinder) => {
            ((radial(p, a) - r).abs(), angle_between(&v, a))
        }
        (G::Line { a, .. }, K::Line) => (angle_between(&v, a), 0.0),
        (G::Plane { n, .. }, K::Plane) => (angle_between(&v, n), 0.0),
        (G::Plane { n, .. }, K::Line) => (FRAC_PI_2 - angle_between(&v, n), 0.0),
        _ => return Err(Error::NoConstraintRow(c.row(fixed.kind()))),
    })
}

/// Non-negative violation of `c` by a constrained frame at `pose`: value
/// mismatch, interval excess, plus any orientation error the row implies.
pub fn constraint_residual(c: &GeometricConstraint, pose: &Pose, scene: &Scene) -> Result<f64> {
    let fixed = scene.shape(&c.fixed)?;
    let (actual, orient) = measure(c, pose, &fixed.geometry)?;
    let target = match (c.relation, c.value) {
        (Relation::Concentric, _) => Value::Scalar(0.0),
        (_, Some(v)) => v,
        (r, None) if r.is_canonical() => Value::Scalar(0.0),
        _ => return Err(Error::invalid(format!("{} needs a value", c.relation))),
    };
    Ok(target.violation(actual) + orient)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rotation;

    fn world(shapes: &[Shape]) -> Scene {
        Scene::from_shapes(shapes)
    }

    fn table() -> Shape {
        Shape::new(
            "table",
            "top",
            ShapeGeometry::Plane {
                p: Vec3::zeros(),
                n: Vec3::z_axis(),
            },
        )
    }

    fn g(kind: ShapeKind) -> Shape {
        frame_shape("gripper", AxisSelector::PosZ, kind)
    }

    #[test]
    fn coincident_planes() {
        let c =
            GeometricConstraint::new("table/top", g(ShapeKind::Plane), Relation::Coincident, None);
        let n = constraint_nullspace(&c, &world(&[table()])).unwrap();
        assert_eq!(
            n.translation.model(),
            crate::manifolds::TranslationModel::Plane
        );
        assert_eq!(
            n.rotation.model(),
            crate::manifolds::RotationModel::OneParallel
        );
        assert!(n.dist_t(&Vec3::new(3.0, -1.0, 0.0)) < 1e-12);
        assert!((n.dist_t(&Vec3::new(0.0, 0.0, 0.2)) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn line_line_distance_is_cylinder() {
        let axis = Shape::new(
            "cup",
            "axis",
            ShapeGeometry::Line {
                p: Vec3::zeros(),
                a: Vec3::z_axis(),
            },
        );
        let c = GeometricConstraint::new(
            "cup/axis",
            g(ShapeKind::Line),
            Relation::Distance,
            Some(Value::Scalar(0.04)),
        );
        let n = constraint_nullspace(&c, &world(&[axis])).unwrap();
        match n.translation {
            TranslationManifold::Cylinder { r, .. } => assert!((r - 0.04).abs() < 1e-15),
            _ => panic!("expected a cylinder"),
        }
    }

    #[test]
    fn parallel_planes_leave_translation_free() {
        let c =
            GeometricConstraint::new("table/top", g(ShapeKind::Plane), Relation::Parallel, None);
        let n = constraint_nullspace(&c, &world(&[table()])).unwrap();
        assert_eq!(n.translation, TranslationManifold::Full3Space);
        assert_eq!(
            n.rotation.model(),
            crate::manifolds::RotationModel::OneParallel
        );
    }

    #[test]
    fn unsupported_row() {
        let c = GeometricConstraint::new(
            "table/top",
            g(ShapeKind::Cylinder),
            Relation::Concentric,
            None,
        );
        assert!(matches!(
            constraint_nullspace(&c, &world(&[table()])),
            Err(Error::NoConstraintRow(_))
        ));
    }

    #[test]
    fn missing_shape() {
        let c = GeometricConstraint::new(
            "cup/body",
            g(ShapeKind::Cylinder),
            Relation::Concentric,
            None,
        );
        assert!(matches!(
            constraint_nullspace(&c, &world(&[table()])),
            Err(Error::MissingShape(_))
        ));
    }

    #[test]
    fn slab_bounds_cylinder_axis() {
        let body = Shape::new(
            "cup",
            "body",
            ShapeGeometry::Cylinder {
                p: Vec3::new(0.4, 0.0, 0.05),
                a: Vec3::z_axis(),
                r: 0.035,
                h: 0.1,
            },
        );
        let mid = Shape::new(
            "cup",
            "mid",
            ShapeGeometry::Plane {
                p: Vec3::new(0.4, 0.0, 0.05),
                n: Vec3::z_axis(),
            },
        );
        let scene = world(&[body, mid]);
        let cs = [
            GeometricConstraint::new(
                "cup/body",
                g(ShapeKind::Cylinder),
                Relation::Concentric,
                None,
            ),
            GeometricConstraint::new(
                "cup/mid",
                g(ShapeKind::Plane),
                Relation::Distance,
                Some(Value::Interval(Interval {
                    lo: -0.05,
                    hi: 0.05,
                })),
            ),
        ];
        let n = set_nullspace(&cs, &scene).unwrap();
        let iv = n.bound(0).unwrap();
        assert!((iv.lo + 0.05).abs() < 1e-12 && (iv.hi - 0.05).abs() < 1e-12);
    }

    #[test]
    fn residual_examples() {
        let scene = world(&[table()]);
        let on =
            GeometricConstraint::new("table/top", g(ShapeKind::Plane), Relation::Coincident, None);
        assert!(
            constraint_residual(
                &on,
                &Pose::from_translation(Vec3::new(0.3, 0.1, 0.0)),
                &scene
            )
            .unwrap()
                < 1e-15
        );
        let slab = GeometricConstraint::new(
            "table/top",
            g(ShapeKind::Point),
            Relation::Distance,
            Some(Value::Interval(Interval {
                lo: -0.05,
                hi: 0.05,
            })),
        );
        let r = constraint_residual(
            &slab,
            &Pose::from_translation(Vec3::new(0.0, 0.0, 0.07)),
            &scene,
        )
        .unwrap();
        assert!((r - 0.02).abs() < 1e-12);
        let axis = Shape::new(
            "cup",
            "axis",
            ShapeGeometry::Line {
                p: Vec3::zeros(),
                a: Vec3::z_axis(),
            },
        );
        let ang = GeometricConstraint::new(
            "cup/axis",
            g(ShapeKind::Line),
            Relation::Angle,
            Some(Value::Scalar(FRAC_PI_2)),
        );
        let pose = Pose::new(Vec3::zeros(), Rotation::about(&Vec3::x_axis(), PI / 3.0));
        let r = constraint_residual(&ang, &pose, &world(&[axis])).unwrap();
        assert!((r - PI / 6.0).abs() < 1e-12);
    }
}
