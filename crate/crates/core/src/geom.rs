//! Vectors, rotations, rigid poses and the primitive shapes that skills are
//! written against.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Quaternion, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type UnitVec3 = Unit<Vector3<f64>>;

/// Tolerance on unit-norm checks for axes and quaternions built in memory.
pub const UNIT_TOL: f64 = 1e-9;

/// Builds a unit vector, rejecting inputs whose norm is not already 1.
pub fn unit_checked(v: Vec3) -> Result<UnitVec3> {
    let n = v.norm();
    if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::NonUnitAxis(n));
    }
    Ok(Unit::new_normalize(v))
}

/// Normalizes `v`; fails on zero or non-finite input.
pub fn unit_normalize(v: Vec3) -> Result<UnitVec3> {
    let n = v.norm();
    if !n.is_finite() || n < 1e-300 {
        return Err(Error::invalid("cannot normalize a zero vector"));
    }
    Ok(Unit::new_unchecked(v / n))
}

/// Deterministic unit vector perpendicular to `axis`: the normalized
/// rejection of global x from the axis, falling back to global y.
pub fn perpendicular(axis: &UnitVec3) -> UnitVec3 {
    for g in [Vec3::x(), Vec3::y()] {
        let r = g - axis.as_ref() * axis.dot(&g);
        let n = r.norm();
        if n > 1e-6 {
            return Unit::new_unchecked(r / n);
        }
    }
    // axis is parallel to both x and y, which cannot happen for a unit vector
    Unit::new_unchecked(Vec3::z())
}

/// Orthonormal basis (e1, e2) spanning the plane perpendicular to `axis`,
/// with e1 = `perpendicular(axis)` and e2 = axis × e1.
pub fn plane_basis(axis: &UnitVec3) -> (UnitVec3, UnitVec3) {
    let e1 = perpendicular(axis);
    let e2 = Unit::new_normalize(axis.cross(&e1));
    (e1, e2)
}

/// Unsigned angle between two vectors in [0, π], computed with atan2 for
/// accuracy near 0 and π.
pub fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// Wraps an angle into [-π, π).
pub fn wrap_angle(a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut x = (a + std::f64::consts::PI).rem_euclid(tau) - std::f64::consts::PI;
    if x >= std::f64::consts::PI {
        x -= tau;
    }
    x
}

/// A rotation stored as a unit quaternion with canonical sign `w >= 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation(UnitQuaternion<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(UnitQuaternion::identity())
    }

    /// Wraps a unit quaternion, flipping its sign if needed so that `w >= 0`.
    pub fn from_unit_quaternion(q: UnitQuaternion<f64>) -> Self {
        let q = if q.w < 0.0 {
            UnitQuaternion::new_unchecked(-q.into_inner())
        } else {
            q
        };
        Rotation(q)
    }

    /// Builds from (w, x, y, z) components. The input must be unit-norm
    /// within `tol`; it is renormalized unless already unit to rounding.
    pub fn from_wxyz(wxyz: [f64; 4], tol: f64) -> Result<Self> {
        let q = Quaternion::new(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
        let n = q.norm();
        if !n.is_finite() || (n - 1.0).abs() > tol {
            return Err(Error::NonUnitQuaternion(n));
        }
        if (n - 1.0).abs() <= 8.0 * f64::EPSILON {
            return Ok(Self::from_unit_quaternion(UnitQuaternion::new_unchecked(q)));
        }
        Ok(Self::from_unit_quaternion(UnitQuaternion::new_normalize(q)))
    }

    /// Rodrigues rotation about a unit axis. Non-unit axes are rejected.
    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Result<Self> {
        let axis = unit_checked(*axis)?;
        Ok(Self::about(&axis, angle))
    }

    /// Rotation by `angle` radians about a unit axis.
    pub fn about(axis: &UnitVec3, angle: f64) -> Self {
        Self::from_unit_quaternion(UnitQuaternion::from_axis_angle(axis, angle))
    }

    /// Rotation from a scaled-axis vector (axis * angle).
    pub fn from_scaled_axis(v: Vec3) -> Self {
        Self::from_unit_quaternion(UnitQuaternion::from_scaled_axis(v))
    }

    pub fn quaternion(&self) -> &UnitQuaternion<f64> {
        &self.0
    }

    /// Components in (w, x, y, z) order.
    pub fn wxyz(&self) -> [f64; 4] {
        let q = self.0.quaternion();
        [q.w, q.i, q.j, q.k]
    }

    pub fn as_vector(&self) -> nalgebra::Vector4<f64> {
        let [w, x, y, z] = self.wxyz();
        nalgebra::Vector4::new(w, x, y, z)
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        Self::from_unit_quaternion(self.0 * other.0)
    }

    pub fn inverse(&self) -> Rotation {
        Self::from_unit_quaternion(self.0.inverse())
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    pub fn matrix(&self) -> nalgebra::Matrix3<f64> {
        self.0.to_rotation_matrix().into_inner()
    }

    /// Rotation angle in [0, π].
    pub fn angle(&self) -> f64 {
        self.0.angle()
    }

    /// Re-applies the canonical-sign rule. Idempotent.
    pub fn canonical(&self) -> Rotation {
        Self::from_unit_quaternion(self.0)
    }

    /// Smallest rotation taking unit vector `from` onto unit vector `to`.
    /// Antiparallel inputs rotate by π about `perpendicular(from)`.
    pub fn between(from: &UnitVec3, to: &UnitVec3) -> Rotation {
        let angle = angle_between(from, to);
        if angle < 1e-15 {
            return Rotation::identity();
        }
        let c = from.cross(to);
        let axis = if c.norm() > 1e-12 {
            Unit::new_normalize(c)
        } else {
            perpendicular(from)
        };
        Rotation::about(&axis, angle)
    }

    /// Chordal distance between quaternions, minimized over the sign flip.
    pub fn chordal_distance(&self, other: &Rotation) -> f64 {
        let a = self.as_vector();
        let b = other.as_vector();
        (a - b).norm().min((a + b).norm())
    }
}

impl Default for Rotation {
    fn default() -> Self {
        Rotation::identity()
    }
}

impl Serialize for Rotation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.wxyz().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rotation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let c = <[f64; 4]>::deserialize(d)?;
        Rotation::from_wxyz(c, 1e-6).map_err(serde::de::Error::custom)
    }
}

/// Serde adapters for `Vec3` as `[x, y, z]`.
pub mod serde_vec3 {
    use super::Vec3;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Vec3, s: S) -> Result<S::Ok, S::Error> {
        [v.x, v.y, v.z].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec3, D::Error> {
        let c = <[f64; 3]>::deserialize(d)?;
        if c.iter().any(|x| !x.is_finite()) {
            return Err(serde::de::Error::custom("non-finite vector component"));
        }
        Ok(Vec3::new(c[0], c[1], c[2]))
    }
}

/// Serde adapters for `UnitVec3` as `[x, y, z]`, checked to unit norm within 1e-6.
pub mod serde_unit {
    use super::{UnitVec3, Vec3};
    use nalgebra::Unit;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &UnitVec3, s: S) -> Result<S::Ok, S::Error> {
        [v.x, v.y, v.z].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<UnitVec3, D::Error> {
        let c = <[f64; 3]>::deserialize(d)?;
        let v = Vec3::new(c[0], c[1], c[2]);
        let n = v.norm();
        if !n.is_finite() || (n - 1.0).abs() > 1e-6 {
            return Err(serde::de::Error::custom(format!(
                "direction is not unit-norm (norm = {n})"
            )));
        }
        // exact values are kept so that save/load round-trips bit-for-bit
        Ok(Unit::new_unchecked(v))
    }
}

/// A rigid transform: rotation followed by translation, with an optional
/// timestamp for trajectory recordings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    #[serde(with = "serde_vec3")]
    pub translation: Vec3,
    pub rotation: Rotation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<f64>,
}

impl Pose {
    pub fn new(translation: Vec3, rotation: Rotation) -> Self {
        Pose {
            translation,
            rotation,
            timestamp: None,
        }
    }

    pub fn identity() -> Self {
        Pose::new(Vec3::zeros(), Rotation::identity())
    }

    pub fn from_translation(t: Vec3) -> Self {
        Pose::new(t, Rotation::identity())
    }

    pub fn with_timestamp(mut self, t: f64) -> Self {
        self.timestamp = Some(t);
        self
    }

    /// `self ∘ other`: applies `other` first, then `self`. The result carries
    /// `other`'s timestamp, or `self`'s when `other` has none.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            translation: self.translation + self.rotation.apply(&other.translation),
            rotation: self.rotation.compose(&other.rotation),
            timestamp: other.timestamp.or(self.timestamp),
        }
    }

    pub fn inverse(&self) -> Pose {
        let r = self.rotation.inverse();
        Pose {
            translation: -r.apply(&self.translation),
            rotation: r,
            timestamp: self.timestamp,
        }
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.translation + self.rotation.apply(p)
    }

    pub fn transform_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation.apply(v)
    }

    /// Geometric distance used in tests: translation gap plus chordal rotation gap.
    pub fn distance(&self, other: &Pose) -> f64 {
        (self.translation - other.translation).norm()
            + self.rotation.chordal_distance(&other.rotation)
    }
}

impl Default for Pose {
    fn default() -> Self {
        Pose::identity()
    }
}

pub fn compose(a: &Pose, b: &Pose) -> Pose {
    a.compose(b)
}

/// The constrained frame expressed in the fixed frame: `fixed⁻¹ ∘ constrained`.
pub fn relative_pose(fixed_frame: &Pose, constrained_frame: &Pose) -> Pose {
    fixed_frame.inverse().compose(constrained_frame)
}

pub fn rotation_from_axis_angle(axis: &Vec3, angle: f64) -> Result<Rotation> {
    Rotation::from_axis_angle(axis, angle)
}

/// Which body axis of the constrained frame plays the constrained vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum AxisSelector {
    PosX,
    NegX,
    PosY,
    NegY,
    #[default]
    PosZ,
    NegZ,
}

impl AxisSelector {
    pub const ALL: [AxisSelector; 6] = [
        AxisSelector::PosX,
        AxisSelector::NegX,
        AxisSelector::PosY,
        AxisSelector::NegY,
        AxisSelector::PosZ,
        AxisSelector::NegZ,
    ];

    pub fn body_axis(&self) -> UnitVec3 {
        let v = match self {
            AxisSelector::PosX => Vec3::x(),
            AxisSelector::NegX => -Vec3::x(),
            AxisSelector::PosY => Vec3::y(),
            AxisSelector::NegY => -Vec3::y(),
            AxisSelector::PosZ => Vec3::z(),
            AxisSelector::NegZ => -Vec3::z(),
        };
        Unit::new_unchecked(v)
    }

    /// Selector whose body axis equals `v` within `tol`, if any.
    pub fn from_direction(v: &Vec3, tol: f64) -> Option<AxisSelector> {
        Self::ALL
            .into_iter()
            .find(|s| (s.body_axis().into_inner() - v).norm() <= tol)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            AxisSelector::PosX => "+x",
            AxisSelector::NegX => "-x",
            AxisSelector::PosY => "+y",
            AxisSelector::NegY => "-y",
            AxisSelector::PosZ => "+z",
            AxisSelector::NegZ => "-z",
        }
    }
}

impl fmt::Display for AxisSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AxisSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+x" | "x" => Ok(AxisSelector::PosX),
            "-x" => Ok(AxisSelector::NegX),
            "+y" | "y" => Ok(AxisSelector::PosY),
            "-y" => Ok(AxisSelector::NegY),
            "+z" | "z" => Ok(AxisSelector::PosZ),
            "-z" => Ok(AxisSelector::NegZ),
            other => Err(Error::invalid(format!("unknown axis selector '{other}'"))),
        }
    }
}

impl Serialize for AxisSelector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for AxisSelector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `R` applied to the selected body axis.
pub fn constrained_axis(r: &Rotation, selector: AxisSelector) -> UnitVec3 {
    Unit::new_normalize(r.apply(&selector.body_axis()))
}

/// Geometry of a primitive shape. Lengths in meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ShapeGeometry {
    Point {
        #[serde(with = "serde_vec3")]
        p: Vec3,
    },
    Line {
        #[serde(with = "serde_vec3")]
        p: Vec3,
        #[serde(with = "serde_unit")]
        a: UnitVec3,
    },
    Plane {
        #[serde(with = "serde_vec3")]
        p: Vec3,
        #[serde(with = "serde_unit")]
        n: UnitVec3,
    },
    Circle {
        #[serde(with = "serde_vec3")]
        p: Vec3,
        #[serde(with = "serde_unit")]
        n: UnitVec3,
        r: f64,
    },
    Cylinder {
        #[serde(with = "serde_vec3")]
        p: Vec3,
        #[serde(with = "serde_unit")]
        a: UnitVec3,
        r: f64,
        h: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Point,
    Line,
    Circle,
    Cylinder,
    Plane,
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ShapeKind::Point => "Point",
            ShapeKind::Line => "Line",
            ShapeKind::Circle => "Circle",
            ShapeKind::Cylinder => "Cylinder",
            ShapeKind::Plane => "Plane",
        };
        f.write_str(s)
    }
}

impl ShapeGeometry {
    pub fn kind(&self) -> ShapeKind {
        match self {
            ShapeGeometry::Point { .. } => ShapeKind::Point,
            ShapeGeometry::Line { .. } => ShapeKind::Line,
            ShapeGeometry::Plane { .. } => ShapeKind::Plane,
            ShapeGeometry::Circle { .. } => ShapeKind::Circle,
            ShapeGeometry::Cylinder { .. } => ShapeKind::Cylinder,
        }
    }

    /// Anchor point of the shape.
    pub fn origin(&self) -> Vec3 {
        match self {
            ShapeGeometry::Point { p }
            | ShapeGeometry::Line { p, .. }
            | ShapeGeometry::Plane { p, .. }
            | ShapeGeometry::Circle { p, .. }
            | ShapeGeometry::Cylinder { p, .. } => *p,
        }
    }

    /// Axis or normal direction, if the shape has one.
    pub fn direction(&self) -> Option<UnitVec3> {
        match self {
            ShapeGeometry::Point { .. } => None,
            ShapeGeometry::Line { a, .. } | ShapeGeometry::Cylinder { a, .. } => Some(*a),
            ShapeGeometry::Plane { n, .. } | ShapeGeometry::Circle { n, .. } => Some(*n),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.origin().iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid("shape origin must be finite"));
        }
        if let Some(d) = self.direction() {
            if (d.norm() - 1.0).abs() > 1e-6 {
                return Err(Error::NonUnitAxis(d.norm()));
            }
        }
        match self {
            ShapeGeometry::Circle { r, .. } if !(*r > 0.0 && r.is_finite()) => {
                Err(Error::invalid("circle radius must be positive"))
            }
            ShapeGeometry::Cylinder { r, h, .. }
                if !(*r > 0.0 && r.is_finite() && *h > 0.0 && h.is_finite()) =>
            {
                Err(Error::invalid(
                    "cylinder radius and height must be positive",
                ))
            }
            _ => Ok(()),
        }
    }

    /// The same shape expressed in the parent frame of `pose`.
    pub fn transformed(&self, pose: &Pose) -> ShapeGeometry {
        let tp = |p: &Vec3| pose.transform_point(p);
        let td = |d: &UnitVec3| Unit::new_normalize(pose.transform_vector(d));
        match self {
            ShapeGeometry::Point { p } => ShapeGeometry::Point { p: tp(p) },
            ShapeGeometry::Line { p, a } => ShapeGeometry::Line { p: tp(p), a: td(a) },
            ShapeGeometry::Plane { p, n } => ShapeGeometry::Plane { p: tp(p), n: td(n) },
            ShapeGeometry::Circle { p, n, r } => ShapeGeometry::Circle {
                p: tp(p),
                n: td(n),
                r: *r,
            },
            ShapeGeometry::Cylinder { p, a, r, h } => ShapeGeometry::Cylinder {
                p: tp(p),
                a: td(a),
                r: *r,
                h: *h,
            },
        }
    }
}

/// A labelled primitive shape belonging to a scene object, e.g. `cup/body`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    pub owner: String,
    pub name: String,
    pub geometry: ShapeGeometry,
}

impl Shape {
    pub fn new(owner: impl Into<String>, name: impl Into<String>, geometry: ShapeGeometry) -> Self {
        Shape {
            owner: owner.into(),
            name: name.into(),
            geometry,
        }
    }

    /// `owner/name` label.
    pub fn label(&self) -> String {
        format!("{}/{}", self.owner, self.name)
    }

    pub fn kind(&self) -> ShapeKind {
        self.geometry.kind()
    }
}
