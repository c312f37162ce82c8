//! Translation and rotation manifolds that make up a skill nullspace, with
//! nearest-point projections, residual distances, manifold coordinates and
//! seeded sampling.

use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::Unit;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geom::{
    angle_between, perpendicular, plane_basis, serde_unit, serde_vec3, wrap_angle, AxisSelector,
    Pose, Rotation, UnitVec3, Vec3,
};

pub use crate::geom::constrained_axis;

/// Closed interval `[lo, hi]`, serialized as a two-element array.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::invalid(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    /// Distance from `x` to the interval; zero inside.
    pub fn excess(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.lo, self.hi].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [lo, hi] = <[f64; 2]>::deserialize(d)?;
        Interval::new(lo, hi).map_err(serde::de::Error::custom)
    }
}

/// Whether a manifold coordinate is a length or an angle on a circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoordKind {
    Linear,
    Angular,
}

/// Bounds on the free coordinates of a translation manifold, one entry per
/// coordinate (`None` = unbounded). Angular intervals may exceed π at the
/// upper end to describe arcs that cross the ±π seam.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExtentBounds(pub Vec<Option<Interval>>);

impl ExtentBounds {
    pub fn unbounded(dims: usize) -> Self {
        ExtentBounds(vec![None; dims])
    }

    pub fn get(&self, i: usize) -> Option<Interval> {
        self.0.get(i).copied().flatten()
    }
}

/// Model type of a translation manifold, used to drive fitting and
/// model selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TranslationModel {
    Point,
    Line,
    Circle,
    Plane,
    Cylinder,
    Full3Space,
}

impl TranslationModel {
    pub const DEFAULT_ORDER: [TranslationModel; 6] = [
        TranslationModel::Point,
        TranslationModel::Line,
        TranslationModel::Circle,
        TranslationModel::Plane,
        TranslationModel::Cylinder,
        TranslationModel::Full3Space,
    ];

    /// Dimension of the manifold.
    pub fn dims(&self) -> usize {
        match self {
            TranslationModel::Point => 0,
            TranslationModel::Line | TranslationModel::Circle => 1,
            TranslationModel::Plane | TranslationModel::Cylinder => 2,
            TranslationModel::Full3Space => 3,
        }
    }

    /// Fewest samples that determine the model's parameters.
    pub fn min_samples(&self) -> usize {
        match self {
            TranslationModel::Point | TranslationModel::Full3Space => 1,
            TranslationModel::Line => 2,
            TranslationModel::Circle | TranslationModel::Plane => 3,
            TranslationModel::Cylinder => 5,
        }
    }
}

impl fmt::Display for TranslationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TranslationModel::Point => "Point",
            TranslationModel::Line => "Line",
            TranslationModel::Circle => "Circle",
            TranslationModel::Plane => "Plane",
            TranslationModel::Cylinder => "Cylinder",
            TranslationModel::Full3Space => "Full3Space",
        };
        f.write_str(s)
    }
}

/// Model type of a rotation manifold. `OneAngleSweep` is a OneAngle manifold
/// with an angle interval, fitted to single-axis sweeps in trajectories.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationModel {
    OneParallel,
    OneAngleSweep,
    OneAngle,
    FullSO3,
}

impl RotationModel {
    pub const DEFAULT_ORDER: [RotationModel; 4] = [
        RotationModel::OneParallel,
        RotationModel::OneAngleSweep,
        RotationModel::OneAngle,
        RotationModel::FullSO3,
    ];

    /// Free rotational degrees of freedom.
    pub fn dims(&self) -> usize {
        match self {
            RotationModel::OneParallel | RotationModel::OneAngleSweep => 1,
            RotationModel::OneAngle => 2,
            RotationModel::FullSO3 => 3,
        }
    }

    pub fn min_samples(&self) -> usize {
        match self {
            RotationModel::OneParallel | RotationModel::FullSO3 => 1,
            RotationModel::OneAngleSweep => 1,
            RotationModel::OneAngle => 3,
        }
    }
}

impl fmt::Display for RotationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RotationModel::OneParallel => "OneParallel",
            RotationModel::OneAngleSweep => "OneAngleSweep",
            RotationModel::OneAngle => "OneAngle",
            RotationModel::FullSO3 => "FullSO3",
        };
        f.write_str(s)
    }
}

/// Parametric translation manifold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TranslationManifold {
    Full3Space,
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
    Circle {
        #[serde(with = "serde_vec3")]
        p: Vec3,
        #[serde(with = "serde_unit")]
        n: UnitVec3,
        r: f64,
    },
    Plane {
        #[serde(with = "serde_vec3")]
        p: Vec3,
        #[serde(with = "serde_unit")]
        n: UnitVec3,
    },
    Cylinder {
        #[serde(with = "serde_vec3")]
        p: Vec3,
        #[serde(with = "serde_unit")]
        a: UnitVec3,
        r: f64,
    },
}

fn radial_direction(offset: &Vec3, axis: &UnitVec3) -> UnitVec3 {
    let n = offset.norm();
    if n > 1e-12 {
        Unit::new_unchecked(offset / n)
    } else {
        perpendicular(axis)
    }
}

fn reject(v: &Vec3, axis: &UnitVec3) -> Vec3 {
    v - axis.as_ref() * axis.dot(v)
}

impl TranslationManifold {
    pub fn model(&self) -> TranslationModel {
        match self {
            TranslationManifold::Full3Space => TranslationModel::Full3Space,
            TranslationManifold::Point { .. } => TranslationModel::Point,
            TranslationManifold::Line { .. } => TranslationModel::Line,
            TranslationManifold::Circle { .. } => TranslationModel::Circle,
            TranslationManifold::Plane { .. } => TranslationModel::Plane,
            TranslationManifold::Cylinder { .. } => TranslationModel::Cylinder,
        }
    }

    pub fn dims(&self) -> usize {
        self.model().dims()
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TranslationManifold::Circle { r, .. } | TranslationManifold::Cylinder { r, .. }
                if !(*r > 0.0 && r.is_finite()) =>
            {
                Err(Error::invalid("manifold radius must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Nearest manifold point to `u`.
    pub fn project(&self, u: &Vec3) -> Vec3 {
        match self {
            TranslationManifold::Full3Space => *u,
            TranslationManifold::Point { p } => *p,
            TranslationManifold::Line { p, a } => p + a.as_ref() * (u - p).dot(a),
            TranslationManifold::Plane { p, n } => u + n.as_ref() * (p - u).dot(n),
            TranslationManifold::Circle { p, n, r } => {
                let in_plane = reject(&(u - p), n);
                p + radial_direction(&in_plane, n).as_ref() * *r
            }
            TranslationManifold::Cylinder { p, a, r } => {
                let foot = p + a.as_ref() * (u - p).dot(a);
                foot + radial_direction(&(u - foot), a).as_ref() * *r
            }
        }
    }

    /// Euclidean distance from `u` to its projection.
    pub fn dist(&self, u: &Vec3) -> f64 {
        (self.project(u) - u).norm()
    }

    /// Kinds of the free coordinates, in order.
    pub fn coord_kinds(&self) -> Vec<CoordKind> {
        use CoordKind::*;
        match self {
            TranslationManifold::Point { .. } => vec![],
            TranslationManifold::Line { .. } => vec![Linear],
            TranslationManifold::Circle { .. } => vec![Angular],
            TranslationManifold::Plane { .. } => vec![Linear, Linear],
            TranslationManifold::Cylinder { .. } => vec![Linear, Angular],
            TranslationManifold::Full3Space => vec![Linear, Linear, Linear],
        }
    }

    /// Free coordinates of the projection of `u`: line parameter; circle
    /// angle; in-plane (s, t); cylinder (axial, angle); or (x, y, z).
    pub fn coords(&self, u: &Vec3) -> Vec<f64> {
        match self {
            TranslationManifold::Point { .. } => vec![],
            TranslationManifold::Line { p, a } => vec![(u - p).dot(a)],
            TranslationManifold::Circle { p, n, .. } => {
                let (e1, e2) = plane_basis(n);
                let d = u - p;
                vec![d.dot(&e2).atan2(d.dot(&e1))]
            }
            TranslationManifold::Plane { p, n } => {
                let (e1, e2) = plane_basis(n);
                let d = u - p;
                vec![d.dot(&e1), d.dot(&e2)]
            }
            TranslationManifold::Cylinder { p, a, .. } => {
                let (e1, e2) = plane_basis(a);
                let d = u - p;
                vec![d.dot(a), d.dot(&e2).atan2(d.dot(&e1))]
            }
            TranslationManifold::Full3Space => vec![u.x, u.y, u.z],
        }
    }

    /// Manifold point with the given free coordinates.
    pub fn point_at(&self, c: &[f64]) -> Vec3 {
        match self {
            TranslationManifold::Point { p } => *p,
            TranslationManifold::Line { p, a } => p + a.as_ref() * c[0],
            TranslationManifold::Circle { p, n, r } => {
                let (e1, e2) = plane_basis(n);
                p + (e1.as_ref() * c[0].cos() + e2.as_ref() * c[0].sin()) * *r
            }
            TranslationManifold::Plane { p, n } => {
                let (e1, e2) = plane_basis(n);
                p + e1.as_ref() * c[0] + e2.as_ref() * c[1]
            }
            TranslationManifold::Cylinder { p, a, r } => {
                let (e1, e2) = plane_basis(a);
                p + a.as_ref() * c[0] + (e1.as_ref() * c[1].cos() + e2.as_ref() * c[1].sin()) * *r
            }
            TranslationManifold::Full3Space => Vec3::new(c[0], c[1], c[2]),
        }
    }

    /// Projection onto the manifold restricted to `bounds`.
    pub fn project_bounded(&self, u: &Vec3, bounds: Option<&ExtentBounds>) -> Vec3 {
        let Some(bounds) = bounds else {
            return self.project(u);
        };
        if self.dims() == 0 {
            return self.project(u);
        }
        let mut c = self.coords(u);
        for (i, kind) in self.coord_kinds().into_iter().enumerate() {
            if let Some(iv) = bounds.get(i) {
                c[i] = match kind {
                    CoordKind::Linear => iv.clamp(c[i]),
                    CoordKind::Angular => clamp_angle(c[i], &iv),
                };
            }
        }
        self.point_at(&c)
    }
}

/// Clamps an angle into an arc `[lo, hi]` (hi may exceed π), snapping to the
/// angularly nearer endpoint when outside.
pub fn clamp_angle(a: f64, arc: &Interval) -> f64 {
    if arc.width() >= TAU {
        return a;
    }
    let rel = (a - arc.lo).rem_euclid(TAU);
    if rel <= arc.width() {
        return arc.lo + rel;
    }
    let to_hi = rel - arc.width();
    let to_lo = TAU - rel;
    if to_lo <= to_hi {
        arc.lo
    } else {
        arc.hi
    }
}

/// Whether angle `a` lies in the arc `[lo, hi]` within `tol`.
pub fn angle_in_arc(a: f64, arc: &Interval, tol: f64) -> bool {
    if arc.width() >= TAU {
        return true;
    }
    let rel = (a - arc.lo).rem_euclid(TAU);
    rel <= arc.width() + tol || TAU - rel <= tol
}

/// Rotation manifold variants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RotationKind {
    #[serde(rename = "full_so3")]
    FullSO3,
    OneParallel {
        #[serde(with = "serde_unit")]
        v_f: UnitVec3,
    },
    /// The constrained axis makes angle `theta` with `v_f`, or any angle in
    /// `interval` when present.
    OneAngle {
        #[serde(with = "serde_unit")]
        v_f: UnitVec3,
        theta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        interval: Option<Interval>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationManifold {
    pub kind: RotationKind,
    #[serde(default)]
    pub selector: AxisSelector,
}

impl RotationManifold {
    pub fn full() -> Self {
        RotationManifold {
            kind: RotationKind::FullSO3,
            selector: AxisSelector::default(),
        }
    }

    pub fn one_parallel(v_f: UnitVec3, selector: AxisSelector) -> Self {
        RotationManifold {
            kind: RotationKind::OneParallel { v_f },
            selector,
        }
    }

    pub fn one_angle(v_f: UnitVec3, theta: f64, selector: AxisSelector) -> Self {
        RotationManifold {
            kind: RotationKind::OneAngle {
                v_f,
                theta,
                interval: None,
            },
            selector,
        }
    }

    pub fn one_angle_interval(v_f: UnitVec3, interval: Interval, selector: AxisSelector) -> Self {
        RotationManifold {
            kind: RotationKind::OneAngle {
                v_f,
                theta: interval.mid(),
                interval: Some(interval),
            },
            selector,
        }
    }

    pub fn model(&self) -> RotationModel {
        match &self.kind {
            RotationKind::FullSO3 => RotationModel::FullSO3,
            RotationKind::OneParallel { .. } => RotationModel::OneParallel,
            RotationKind::OneAngle {
                interval: Some(_), ..
            } => RotationModel::OneAngleSweep,
            RotationKind::OneAngle { .. } => RotationModel::OneAngle,
        }
    }

    pub fn fixed_vector(&self) -> Option<UnitVec3> {
        match &self.kind {
            RotationKind::FullSO3 => None,
            RotationKind::OneParallel { v_f } | RotationKind::OneAngle { v_f, .. } => Some(*v_f),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let RotationKind::OneAngle {
            theta, interval, ..
        } = &self.kind
        {
            if !(0.0..=PI).contains(theta) {
                return Err(Error::invalid(format!("angle {theta} outside [0, π]")));
            }
            if let Some(iv) = interval {
                if iv.lo < -1e-12 || iv.hi > PI + 1e-12 || iv.lo > iv.hi {
                    return Err(Error::invalid("angle interval must lie in [0, π]"));
                }
            }
        }
        Ok(())
    }

    /// Target angle for a constrained axis currently at angle `alpha`.
    fn target_angle(theta: f64, interval: &Option<Interval>, alpha: f64) -> f64 {
        match interval {
            Some(iv) => iv.clamp(alpha),
            None => theta,
        }
    }

    /// Minimal correction of `r` onto the manifold.
    pub fn project(&self, r: &Rotation) -> Rotation {
        match &self.kind {
            RotationKind::FullSO3 => *r,
            RotationKind::OneParallel { v_f } => {
                let v_c = constrained_axis(r, self.selector);
                Rotation::between(&v_c, v_f).compose(r)
            }
            RotationKind::OneAngle {
                v_f,
                theta,
                interval,
            } => {
                let v_c = constrained_axis(r, self.selector);
                let alpha = angle_between(&v_c, v_f);
                let target = Self::target_angle(*theta, interval, alpha);
                let delta = alpha - target;
                if delta == 0.0 {
                    return *r;
                }
                let w = v_c.cross(v_f);
                let axis = if w.norm() > 1e-12 {
                    Unit::new_normalize(w)
                } else {
                    perpendicular(&v_c)
                };
                Rotation::about(&axis, delta).compose(r)
            }
        }
    }

    /// Chordal quaternion distance to the projection, minimized over sign.
    pub fn dist(&self, r: &Rotation) -> f64 {
        self.project(r).chordal_distance(r)
    }

    /// Rotation with the selected body axis on `v_f` (spin zero).
    fn base(&self, v_f: &UnitVec3) -> Rotation {
        Rotation::between(&self.selector.body_axis(), v_f)
    }

    /// Manifold member with given spin (OneParallel), or tilt, azimuth and
    /// spin (OneAngle). For FullSO3 the three numbers are a scaled axis.
    pub fn member(&self, tilt: f64, azimuth: f64, spin: f64) -> Rotation {
        let spin_rot = Rotation::about(&self.selector.body_axis(), spin);
        match &self.kind {
            RotationKind::FullSO3 => Rotation::from_scaled_axis(Vec3::new(tilt, azimuth, spin)),
            RotationKind::OneParallel { v_f } => self.base(v_f).compose(&spin_rot),
            RotationKind::OneAngle { v_f, .. } => {
                let tilt_rot = Rotation::about(&perpendicular(v_f), tilt);
                Rotation::about(v_f, azimuth)
                    .compose(&tilt_rot)
                    .compose(&self.base(v_f))
                    .compose(&spin_rot)
            }
        }
    }

    /// Range of admissible tilt angles for OneAngle variants.
    pub fn tilt_range(&self) -> Option<Interval> {
        match &self.kind {
            RotationKind::OneAngle {
                theta, interval, ..
            } => Some(interval.unwrap_or(Interval::point(*theta))),
            _ => None,
        }
    }

    /// Angle between the constrained axis of `r` and the fixed vector.
    pub fn tilt_of(&self, r: &Rotation) -> Option<f64> {
        self.fixed_vector()
            .map(|v_f| angle_between(&constrained_axis(r, self.selector), &v_f))
    }
}

pub fn project_translation(m: &TranslationManifold, u: &Vec3) -> Vec3 {
    m.project(u)
}

pub fn dist_t(m: &TranslationManifold, u: &Vec3) -> f64 {
    m.dist(u)
}

pub fn project_rotation(m: &RotationManifold, r: &Rotation) -> Rotation {
    m.project(r)
}

pub fn dist_r(m: &RotationManifold, r: &Rotation) -> f64 {
    m.dist(r)
}

/// Translation × rotation nullspace with optional bounds on the translation
/// coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullspaceModel {
    pub translation: TranslationManifold,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<ExtentBounds>,
    pub rotation: RotationManifold,
    #[serde(default)]
    pub rms_fit_residual: f64,
}

impl NullspaceModel {
    pub fn new(translation: TranslationManifold, rotation: RotationManifold) -> Self {
        NullspaceModel {
            translation,
            bounds: None,
            rotation,
            rms_fit_residual: 0.0,
        }
    }

    pub fn with_bounds(mut self, bounds: ExtentBounds) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.translation.validate()?;
        self.rotation.validate()?;
        if let Some(b) = &self.bounds {
            if b.0.len() != self.translation.dims() {
                return Err(Error::invalid(format!(
                    "{} bounds for a {}-dimensional manifold",
                    b.0.len(),
                    self.translation.dims()
                )));
            }
        }
        if !(self.rms_fit_residual >= 0.0) {
            return Err(Error::invalid("fit residual must be non-negative"));
        }
        Ok(())
    }

    /// Bound on coordinate `i`, if any.
    pub fn bound(&self, i: usize) -> Option<Interval> {
        self.bounds.as_ref().and_then(|b| b.get(i))
    }

    pub fn project_translation(&self, u: &Vec3) -> Vec3 {
        self.translation.project_bounded(u, self.bounds.as_ref())
    }

    /// Translation distance honouring the extent bounds.
    pub fn dist_t(&self, u: &Vec3) -> f64 {
        (self.project_translation(u) - u).norm()
    }

    pub fn dist_r(&self, r: &Rotation) -> f64 {
        self.rotation.dist(r)
    }

    pub fn project(&self, pose: &Pose) -> Pose {
        Pose {
            translation: self.project_translation(&pose.translation),
            rotation: self.rotation.project(&pose.rotation),
            timestamp: pose.timestamp,
        }
    }

    pub fn contains(&self, pose: &Pose, tol: f64) -> bool {
        self.dist_t(&pose.translation) <= tol && self.dist_r(&pose.rotation) <= tol
    }
}

/// Explicit sampling ranges for unbounded translation coordinates.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranges: Option<ExtentBounds>,
}

/// Uniform rotation (Haar measure) from a normalized Gaussian 4-vector.
pub fn random_rotation<R: Rng>(rng: &mut R) -> Rotation {
    loop {
        let v: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            let q = nalgebra::Quaternion::new(v[0] / n, v[1] / n, v[2] / n, v[3] / n);
            return Rotation::from_unit_quaternion(nalgebra::UnitQuaternion::new_unchecked(q));
        }
    }
}

fn uniform<R: Rng>(rng: &mut R, iv: &Interval) -> f64 {
    if iv.width() <= 0.0 {
        iv.lo
    } else {
        rng.random_range(iv.lo..=iv.hi)
    }
}

/// Draws a rotation uniformly from the rotation manifold.
pub fn sample_rotation<R: Rng>(m: &RotationManifold, rng: &mut R) -> Rotation {
    match &m.kind {
        RotationKind::FullSO3 => random_rotation(rng),
        RotationKind::OneParallel { .. } => m.member(0.0, 0.0, rng.random_range(-PI..PI)),
        RotationKind::OneAngle { .. } => {
            let tilt = uniform(rng, &m.tilt_range().expect("one-angle tilt range"));
            let azimuth = rng.random_range(-PI..PI);
            let spin = rng.random_range(-PI..PI);
            m.member(tilt, azimuth, spin)
        }
    }
}

/// Draws translation coordinates uniformly within the bounds.
pub fn sample_translation<R: Rng>(
    n: &NullspaceModel,
    spec: &SampleSpec,
    rng: &mut R,
) -> Result<Vec3> {
    let kinds = n.translation.coord_kinds();
    let mut c = Vec::with_capacity(kinds.len());
    for (i, kind) in kinds.iter().enumerate() {
        let range = n
            .bound(i)
            .or_else(|| spec.ranges.as_ref().and_then(|r| r.get(i)));
        let x = match (range, kind) {
            (Some(iv), _) => uniform(rng, &iv),
            (None, CoordKind::Angular) => rng.random_range(-PI..PI),
            (None, CoordKind::Linear) => {
                return Err(Error::UnboundedSampleDomain(format!(
                    "coordinate {i} of {} has no bounds",
                    n.translation.model()
                )))
            }
        };
        c.push(x);
    }
    Ok(n.translation.point_at(&c))
}

/// Deterministic pose sample from the nullspace.
pub fn sample_pose(n: &NullspaceModel, spec: &SampleSpec, seed: u64) -> Result<Pose> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_pose_with(n, spec, &mut rng)
}

pub fn sample_pose_with<R: Rng>(
    n: &NullspaceModel,
    spec: &SampleSpec,
    rng: &mut R,
) -> Result<Pose> {
    n.validate()?;
    let t = sample_translation(n, spec, rng)?;
    let r = sample_rotation(&n.rotation, rng);
    Ok(Pose::new(t, r))
}

fn linspace(iv: &Interval, k: usize) -> Vec<f64> {
    if k <= 1 || iv.width() == 0.0 {
        return vec![iv.mid()];
    }
    (0..k)
        .map(|i| iv.lo + iv.width() * i as f64 / (k - 1) as f64)
        .collect()
}

fn full_circle(k: usize) -> Vec<f64> {
    (0..k).map(|i| -PI + TAU * i as f64 / k as f64).collect()
}

/// Deterministic grid of manifold points: bounded coordinates span their
/// interval with endpoints, unbounded linear coordinates span
/// `±half_range` around the manifold anchor, unbounded angles the full
/// circle.
pub fn translation_grid(
    m: &TranslationManifold,
    bounds: Option<&ExtentBounds>,
    per_dim: usize,
    half_range: f64,
) -> Vec<Vec3> {
    let kinds = m.coord_kinds();
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(kinds.len());
    let anchor = match m {
        TranslationManifold::Full3Space => Vec3::zeros(),
        _ => m.point_at(&vec![0.0; kinds.len()]),
    };
    for (i, kind) in kinds.iter().enumerate() {
        let b = bounds.and_then(|b| b.get(i));
        let vals = match (b, kind) {
            (Some(iv), CoordKind::Angular) if iv.width() >= TAU => full_circle(per_dim),
            (Some(iv), _) => linspace(&iv, per_dim),
            (None, CoordKind::Angular) => full_circle(per_dim),
            (None, CoordKind::Linear) => {
                let centre = if matches!(m, TranslationManifold::Full3Space) {
                    anchor[i]
                } else {
                    0.0
                };
                linspace(
                    &Interval {
                        lo: centre - half_range,
                        hi: centre + half_range,
                    },
                    per_dim,
                )
            }
        };
        axes.push(vals);
    }
    let mut out = vec![];
    let mut idx = vec![0usize; axes.len()];
    loop {
        let c: Vec<f64> = idx.iter().zip(&axes).map(|(&i, a)| a[i]).collect();
        out.push(m.point_at(&c));
        let mut d = 0;
        loop {
            if d == axes.len() {
                return out;
            }
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Deterministic grid of rotations on the manifold.
pub fn rotation_grid(m: &RotationManifold, per_dim: usize) -> Vec<Rotation> {
    match &m.kind {
        RotationKind::FullSO3 => {
            // identity plus rotations by several angles about the axes and diagonals
            let mut out = vec![Rotation::identity()];
            let dirs = [
                Vec3::x(),
                Vec3::y(),
                Vec3::z(),
                Vec3::new(1.0, 1.0, 0.0),
                Vec3::new(0.0, 1.0, 1.0),
                Vec3::new(1.0, 0.0, 1.0),
                Vec3::new(1.0, 1.0, 1.0),
                Vec3::new(1.0, -1.0, 1.0),
            ];
            for d in dirs {
                let axis = Unit::new_normalize(d);
                for k in 1..=per_dim.max(2) {
                    let ang = PI * k as f64 / per_dim.max(2) as f64;
                    out.push(Rotation::about(&axis, ang));
                }
            }
            out
        }
        RotationKind::OneParallel { .. } => full_circle(per_dim)
            .into_iter()
            .map(|s| m.member(0.0, 0.0, s))
            .collect(),
        RotationKind::OneAngle { .. } => {
            let tilts = linspace(&m.tilt_range().expect("tilt range"), per_dim);
            let mut out = vec![];
            for &t in &tilts {
                for az in full_circle(per_dim) {
                    for s in full_circle(per_dim.min(4)) {
                        out.push(m.member(t, az, s));
                    }
                }
            }
            out
        }
    }
}

/// Whether every grid point of `a` (within its bounds) lies on `b` within
/// `tol`, with `b`'s bounds honoured when given.
pub fn translation_subset(
    a: &TranslationManifold,
    a_bounds: Option<&ExtentBounds>,
    b: &TranslationManifold,
    b_bounds: Option<&ExtentBounds>,
    tol: f64,
) -> bool {
    translation_grid(a, a_bounds, 7, 1.0)
        .iter()
        .all(|u| (b.project_bounded(u, b_bounds) - u).norm() <= tol)
}

pub fn rotation_subset(a: &RotationManifold, b: &RotationManifold, tol: f64) -> bool {
    rotation_grid(a, 7).iter().all(|r| b.dist(r) <= tol)
}

/// Wraps the angular coordinates of a coordinate vector into [-π, π).
pub fn wrap_coords(m: &TranslationManifold, c: &mut [f64]) {
    for (x, k) in c.iter_mut().zip(m.coord_kinds()) {
        if k == CoordKind::Angular {
            *x = wrap_angle(*x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn z() -> UnitVec3 {
        Vec3::z_axis()
    }

    #[test]
    fn plane_projection_drops_normal() {
        let m = TranslationManifold::Plane {
            p: Vec3::zeros(),
            n: z(),
        };
        let q = project_translation(&m, &Vec3::new(1.0, 2.0, 3.0));
        assert!((q - Vec3::new(1.0, 2.0, 0.0)).norm() < 1e-15);
        assert!((dist_t(&m, &Vec3::new(0.0, 0.0, 2.0)) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn circle_projection_example() {
        let m = TranslationManifold::Circle {
            p: Vec3::zeros(),
            n: z(),
            r: 1.0,
        };
        let q = project_translation(&m, &Vec3::new(2.0, 0.0, 5.0));
        assert!((q - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cylinder_projection_example() {
        let m = TranslationManifold::Cylinder {
            p: Vec3::zeros(),
            a: z(),
            r: 1.0,
        };
        let q = project_translation(&m, &Vec3::new(2.0, 0.0, 3.0));
        assert!((q - Vec3::new(1.0, 0.0, 3.0)).norm() < 1e-15);
    }

    #[test]
    fn line_distance_example() {
        let m = TranslationManifold::Line {
            p: Vec3::zeros(),
            a: Vec3::x_axis(),
        };
        assert!((dist_t(&m, &Vec3::new(5.0, 3.0, 4.0)) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_axis_point_uses_fallback() {
        let m = TranslationManifold::Cylinder {
            p: Vec3::zeros(),
            a: z(),
            r: 0.5,
        };
        let q = project_translation(&m, &Vec3::new(0.0, 0.0, 1.0));
        assert!((q - Vec3::new(0.5, 0.0, 1.0)).norm() < 1e-15);
        let c = TranslationManifold::Circle {
            p: Vec3::zeros(),
            n: Vec3::x_axis(),
            r: 2.0,
        };
        let q = project_translation(&c, &Vec3::zeros());
        assert!((q - Vec3::new(0.0, 2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn one_parallel_examples() {
        let m = RotationManifold::one_parallel(z(), AxisSelector::PosZ);
        assert_eq!(
            project_rotation(&m, &Rotation::identity()),
            Rotation::identity()
        );
        let rx = Rotation::about(&Vec3::x_axis(), FRAC_PI_2);
        let p = project_rotation(&m, &rx);
        assert!(p.chordal_distance(&Rotation::identity()) < 1e-12);
        let c = std::f64::consts::FRAC_PI_4.cos();
        let expected = (Vec3::new(1.0 - c, c, 0.0)).norm();
        assert!((dist_r(&m, &rx) - expected).abs() < 1e-12);
        assert!((expected - 0.7654).abs() < 1e-4);
    }

    #[test]
    fn one_angle_fallback_axis() {
        let m = RotationManifold::one_angle(z(), FRAC_PI_2, AxisSelector::PosZ);
        let p = project_rotation(&m, &Rotation::identity());
        let ang = angle_between(&constrained_axis(&p, AxisSelector::PosZ), &Vec3::z());
        assert!((ang - FRAC_PI_2).abs() < 1e-9);
        assert!((p.angle() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn full_so3_is_identity_map() {
        let m = RotationManifold::full();
        let r = Rotation::about(&Vec3::y_axis(), 1.0);
        assert_eq!(project_rotation(&m, &r), r);
        assert_eq!(dist_r(&m, &r), 0.0);
    }

    #[test]
    fn sample_point_manifold() {
        let n = NullspaceModel::new(
            TranslationManifold::Point {
                p: Vec3::new(1.0, 2.0, 3.0),
            },
            RotationManifold::full(),
        );
        let a = sample_pose(&n, &SampleSpec::default(), 7).unwrap();
        assert_eq!(a.translation, Vec3::new(1.0, 2.0, 3.0));
        let b = sample_pose(&n, &SampleSpec::default(), 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_cylinder_within_bounds() {
        let n = NullspaceModel::new(
            TranslationManifold::Cylinder {
                p: Vec3::zeros(),
                a: z(),
                r: 0.035,
            },
            RotationManifold::one_parallel(z(), AxisSelector::PosZ),
        )
        .with_bounds(ExtentBounds(vec![
            Some(Interval {
                lo: -0.05,
                hi: 0.05,
            }),
            None,
        ]));
        for seed in 0..50 {
            let p = sample_pose(&n, &SampleSpec::default(), seed).unwrap();
            assert!(n.translation.dist(&p.translation) <= 1e-9);
            assert!(n.dist_r(&p.rotation) <= 1e-9);
            let axial = n.translation.coords(&p.translation)[0];
            assert!((-0.05..=0.05).contains(&axial));
        }
    }

    #[test]
    fn unbounded_plane_sampling_fails() {
        let n = NullspaceModel::new(
            TranslationManifold::Plane {
                p: Vec3::zeros(),
                n: z(),
            },
            RotationManifold::full(),
        );
        let err = sample_pose(&n, &SampleSpec::default(), 1).unwrap_err();
        assert!(matches!(err, Error::UnboundedSampleDomain(_)));
    }

    #[test]
    fn clamp_angle_wraps() {
        let arc = Interval { lo: 3.0, hi: 3.5 };
        assert!((clamp_angle(-3.0, &arc) - (TAU - 3.0)).abs() < 1e-12);
        assert_eq!(clamp_angle(0.0, &arc), 3.5);
        assert!(angle_in_arc(-2.9, &arc, 0.0));
    }
}
