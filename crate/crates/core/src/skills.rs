//! Skill models: constraint sets with their nullspace, the built-in skill
//! templates, and parameter editing.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::constraints::{
    constraint_nullspace, frame_shape, set_nullspace, GeometricConstraint, NamedShape, Relation,
    Scene, SceneObject, Value,
};
use crate::error::{Error, Result};
use crate::fitting::{
    infer_bounds, order_trajectory, select_model_report, BoundsConfig, DemoKind, Demonstration,
    FitConfig, OrderedTrajectory, Selection,
};
use crate::geom::{wrap_angle, AxisSelector, Pose, ShapeGeometry, ShapeKind, Vec3};
use crate::manifolds::{
    clamp_angle, rotation_subset, translation_subset, CoordKind, ExtentBounds, Interval,
    NullspaceModel, RotationKind, RotationManifold, TranslationManifold,
};
use crate::mapping::{map_to_constraints, CandidateSet, MapOptions};

/// Which nullspace coordinate a trajectory advances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryCoordinate {
    /// Position along a Line translation manifold.
    LineParameter,
    /// Angle around a Circle translation manifold.
    CircleAngle,
    /// Angle between constrained axis and fixed vector of a OneAngle rotation.
    SweepAngle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySpec {
    pub coordinate: TrajectoryCoordinate,
    /// Waypoint values of the coordinate, in execution order.
    pub params: Vec<f64>,
}

/// Most waypoints kept when a trajectory comes from a demonstration.
pub const MAX_FITTED_WAYPOINTS: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkillModel {
    pub name: String,
    pub kind: DemoKind,
    pub constraints: Vec<GeometricConstraint>,
    pub nullspace: NullspaceModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectorySpec>,
    /// Named editable values.
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    /// Scene-frame copies of the fixed shapes the constraints refer to.
    #[serde(default)]
    pub scene: Scene,
}

/// Evenly spaced values from `a` to `b`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

fn resample<T: Clone>(v: &[T], max: usize) -> Vec<T> {
    if v.len() <= max {
        return v.to_vec();
    }
    (0..max)
        .map(|i| v[(i * (v.len() - 1) + (max - 1) / 2) / (max - 1)].clone())
        .collect()
}

impl SkillModel {
    pub fn validate(&self) -> Result<()> {
        self.nullspace.validate()?;
        self.scene.validate()?;
        match (&self.kind, &self.trajectory) {
            (DemoKind::Continuous, None) => {
                Err(Error::invalid("continuous skill without trajectory"))
            }
            (DemoKind::Continuous, Some(t)) if t.params.is_empty() => {
                Err(Error::invalid("empty trajectory"))
            }
            _ => Ok(()),
        }
    }

    /// Skill from a fitted nullspace, before any constraints are inferred.
    pub fn from_fit(
        name: &str,
        kind: DemoKind,
        nullspace: NullspaceModel,
        ordered: Option<&OrderedTrajectory>,
    ) -> Self {
        let trajectory = ordered.and_then(|o| trajectory_from(&nullspace, o));
        SkillModel {
            name: name.into(),
            kind,
            constraints: vec![],
            nullspace,
            trajectory,
            parameters: BTreeMap::new(),
            scene: Scene::default(),
        }
    }

    /// Replaces the constraint set, snapshotting the fixed shapes and
    /// exposing every constraint value as an editable parameter.
    pub fn set_constraints(
        &mut self,
        constraints: Vec<GeometricConstraint>,
        scene: &Scene,
    ) -> Result<()> {
        let mut shapes = vec![];
        for c in &constraints {
            shapes.push(scene.shape(&c.fixed)?);
        }
        self.scene = Scene::from_shapes(&shapes);
        self.constraints = constraints;
        self.refresh_parameters();
        Ok(())
    }

    /// Rebuilds the editable parameters from the constraints: `c{i}` (or
    /// `c{i}.lo`, `c{i}.hi`) per valued constraint, plus `radius`, `height`,
    /// `theta_min` and `theta_max` where a constraint carries one.
    pub fn refresh_parameters(&mut self) {
        let keep_end = self.parameters.contains_key("theta_end");
        let mut p = BTreeMap::new();
        for (i, c) in self.constraints.iter().enumerate() {
            match c.value {
                Some(Value::Scalar(v)) => {
                    p.insert(format!("c{i}"), v);
                }
                Some(Value::Interval(iv)) => {
                    p.insert(format!("c{i}.lo"), iv.lo);
                    p.insert(format!("c{i}.hi"), iv.hi);
                }
                None => {}
            }
            let fixed = self.scene.shape(&c.fixed).ok().map(|s| s.geometry);
            match (c.relation, c.value, fixed, c.constrained.kind()) {
                (Relation::Concentric, _, Some(ShapeGeometry::Cylinder { r, .. }), _)
                | (Relation::Coincident, _, Some(ShapeGeometry::Circle { r, .. }), _)
                | (
                    Relation::Distance,
                    Some(Value::Scalar(r)),
                    Some(ShapeGeometry::Line { .. }),
                    ShapeKind::Line,
                ) => {
                    p.insert("radius".into(), r);
                }
                (
                    Relation::Distance,
                    Some(Value::Interval(iv)),
                    Some(ShapeGeometry::Plane { .. }),
                    _,
                ) => {
                    p.insert("height".into(), iv.width());
                }
                (Relation::Angle, Some(Value::Interval(iv)), _, _) => {
                    p.insert("theta_min".into(), iv.lo);
                    p.insert("theta_max".into(), iv.hi);
                    if keep_end {
                        p.insert("theta_end".into(), iv.hi);
                    }
                }
                _ => {}
            }
        }
        self.parameters = p;
    }

    /// Nullspace implied by the constraints, keeping bounds of this skill's
    /// nullspace that the constraints do not express.
    pub fn derived_nullspace(&self) -> Result<NullspaceModel> {
        let mut derived = set_nullspace(&self.constraints, &self.scene)?;
        if derived.translation.model() == self.nullspace.translation.model() {
            let dims = derived.translation.dims();
            let mut b = derived
                .bounds
                .clone()
                .unwrap_or_else(|| ExtentBounds::unbounded(dims));
            for i in 0..dims {
                if b.get(i).is_none() {
                    b.0[i] = transfer_bound(&self.nullspace, &derived.translation, i);
                }
            }
            if b.0.iter().any(|x| x.is_some()) {
                derived.bounds = Some(b);
            }
        }
        derived.rms_fit_residual = self.nullspace.rms_fit_residual;
        Ok(derived)
    }

    /// Whether the constraints and the nullspace describe the same set,
    /// ignoring bounds the constraints do not express.
    pub fn is_consistent(&self, tol: f64, rot_tol: f64) -> Result<bool> {
        let d = self.derived_nullspace()?;
        let n = &self.nullspace;
        let sub = |a: &NullspaceModel, b: &NullspaceModel| {
            translation_subset(
                &a.translation,
                a.bounds.as_ref(),
                &b.translation,
                b.bounds.as_ref(),
                tol,
            ) && rotation_subset(&a.rotation, &b.rotation, rot_tol)
        };
        Ok(sub(&d, n) && sub(n, &d))
    }

    /// Nullspace with the trajectory coordinate pinned at waypoint `k`.
    pub fn waypoint_nullspace(&self, k: usize) -> Result<NullspaceModel> {
        let t = self.trajectory.as_ref().ok_or(Error::NotATrajectory)?;
        let v = *t
            .params
            .get(k)
            .ok_or_else(|| Error::invalid(format!("waypoint {k} out of range")))?;
        let n = &self.nullspace;
        // waypoints are kept inside the skill's own bounds
        match (t.coordinate, &n.translation, &n.rotation.kind) {
            (TrajectoryCoordinate::LineParameter, TranslationManifold::Line { .. }, _)
            | (TrajectoryCoordinate::CircleAngle, TranslationManifold::Circle { .. }, _) => {
                let v = match (n.bound(0), t.coordinate) {
                    (Some(iv), TrajectoryCoordinate::CircleAngle) => clamp_angle(v, &iv),
                    (Some(iv), _) => iv.clamp(v),
                    (None, _) => v,
                };
                Ok(NullspaceModel::new(
                    TranslationManifold::Point {
                        p: n.translation.point_at(&[v]),
                    },
                    n.rotation.clone(),
                ))
            }
            (TrajectoryCoordinate::SweepAngle, _, RotationKind::OneAngle { v_f, .. }) => {
                let range = n
                    .rotation
                    .tilt_range()
                    .unwrap_or(Interval { lo: 0.0, hi: PI });
                Ok(NullspaceModel {
                    rotation: RotationManifold::one_angle(
                        *v_f,
                        range.clamp(v),
                        n.rotation.selector,
                    ),
                    ..n.clone()
                })
            }
            _ => Err(Error::invalid(format!(
                "trajectory coordinate does not fit a {} + {} nullspace",
                n.translation.model(),
                n.rotation.model()
            ))),
        }
    }
}

/// Trajectory spec from ordered demonstration waypoints: the line
/// parameter, the circle angle, or the sweep angle, whichever the nullspace
/// has.
pub fn trajectory_from(n: &NullspaceModel, o: &OrderedTrajectory) -> Option<TrajectorySpec> {
    let coordinate = match (&n.translation, &n.rotation.kind) {
        (TranslationManifold::Line { .. }, _) => TrajectoryCoordinate::LineParameter,
        (TranslationManifold::Circle { .. }, _) => TrajectoryCoordinate::CircleAngle,
        (TranslationManifold::Point { .. }, RotationKind::OneAngle { .. }) => {
            TrajectoryCoordinate::SweepAngle
        }
        _ => return None,
    };
    let values: Vec<f64> = o
        .waypoints
        .iter()
        .filter_map(|w| match coordinate {
            TrajectoryCoordinate::SweepAngle => w.tilt,
            _ => w.coords.first().copied(),
        })
        .collect();
    if values.is_empty() {
        return None;
    }
    Some(TrajectorySpec {
        coordinate,
        params: resample(&values, MAX_FITTED_WAYPOINTS),
    })
}

/// Coordinates of a point of `n`: interval midpoints where bounded, zero
/// elsewhere.
fn reference_coords(n: &NullspaceModel) -> Vec<f64> {
    (0..n.translation.dims())
        .map(|i| n.bound(i).map_or(0.0, |iv| iv.mid()))
        .collect()
}

/// Bound `i` of `old` re-expressed in the coordinates of `new`, a manifold
/// of the same model whose anchor or basis may differ.
fn transfer_bound(old: &NullspaceModel, new: &TranslationManifold, i: usize) -> Option<Interval> {
    let iv = old.bound(i)?;
    let base = reference_coords(old);
    let at = |x: f64| {
        let mut c = base.clone();
        c[i] = x;
        new.coords(&old.translation.point_at(&c))[i]
    };
    let (a, b) = (at(iv.lo), at(iv.hi));
    match new.coord_kinds()[i] {
        CoordKind::Linear => Some(Interval {
            lo: a.min(b),
            hi: a.max(b),
        }),
        CoordKind::Angular => {
            if iv.width() >= TAU {
                return None;
            }
            let step = (iv.width() / 2.0).min(0.1);
            let forward = wrap_angle(at(iv.lo + step) - a) >= 0.0;
            let lo = if forward { a } else { b };
            Some(Interval {
                lo,
                hi: lo + iv.width(),
            })
        }
    }
}

/// Trajectory values of `old` re-expressed for `new`.
fn retarget(t: &TrajectorySpec, old: &NullspaceModel, new: &NullspaceModel) -> TrajectorySpec {
    let params = match t.coordinate {
        TrajectoryCoordinate::SweepAngle => {
            let flip = match (old.rotation.fixed_vector(), new.rotation.fixed_vector()) {
                (Some(a), Some(b)) => a.dot(&b) < 0.0,
                _ => false,
            };
            t.params
                .iter()
                .map(|&x| if flip { PI - x } else { x })
                .collect()
        }
        _ if old.translation.model() != new.translation.model() => t.params.clone(),
        _ => {
            let base = reference_coords(old);
            let mut out: Vec<f64> = Vec::with_capacity(t.params.len());
            for &x in &t.params {
                let mut c = base.clone();
                c[0] = x;
                let mut v = new.translation.coords(&old.translation.point_at(&c))[0];
                if let (Some(&prev), CoordKind::Angular) =
                    (out.last(), new.translation.coord_kinds()[0])
                {
                    v = prev + wrap_angle(v - prev);
                }
                out.push(v);
            }
            out
        }
    };
    TrajectorySpec {
        coordinate: t.coordinate,
        params,
    }
}

/// Fits a demonstration: model selection, bounds, and for continuous
/// demonstrations the trajectory.
pub fn learn_skill(
    name: &str,
    d: &Demonstration,
    cfg: &FitConfig,
    bounds: &BoundsConfig,
) -> Result<(SkillModel, Selection)> {
    let sel = select_model_report(d, cfg)?;
    let model = infer_bounds(d, &sel.result.model, bounds)?;
    let ordered = match d.kind {
        DemoKind::Continuous => Some(order_trajectory(d, &model)?),
        DemoKind::Discrete => None,
    };
    Ok((
        SkillModel::from_fit(name, d.kind, model, ordered.as_ref()),
        sel,
    ))
}

/// Maps the skill nullspace to constraints on `scene` and adopts the best
/// candidate. The nullspace becomes the one the constraints imply, keeping
/// fitted bounds they leave open. Returns all ranked candidates.
pub fn infer_constraints(
    skill: &SkillModel,
    scene: &Scene,
    opts: &MapOptions,
) -> Result<(SkillModel, Vec<CandidateSet>)> {
    let candidates = map_to_constraints(&skill.nullspace, scene, opts)?;
    let best = candidates.first().ok_or_else(|| {
        Error::NoConstraintRow(format!(
            "{} + {} on this scene",
            skill.nullspace.translation.model(),
            skill.nullspace.rotation.model()
        ))
    })?;
    let mut out = skill.clone();
    out.set_constraints(best.constraints.clone(), scene)?;
    out.nullspace = out.derived_nullspace()?;
    out.trajectory = skill
        .trajectory
        .as_ref()
        .map(|t| retarget(t, &skill.nullspace, &out.nullspace));
    Ok((out, candidates))
}

/// The built-in skills.
pub const SKILLS: [&str; 6] = ["grasp", "place", "move", "pull", "mix", "pour"];

fn plane(p: Vec3) -> ShapeGeometry {
    ShapeGeometry::Plane {
        p,
        n: Vec3::z_axis(),
    }
}

fn named(name: &str, geometry: ShapeGeometry) -> NamedShape {
    NamedShape {
        name: name.into(),
        geometry,
    }
}

/// Table with a cup standing on it.
pub fn demo_scene() -> Scene {
    let z = Vec3::z_axis();
    Scene {
        objects: vec![
            SceneObject {
                name: "table".into(),
                pose: Pose::identity(),
                shapes: vec![
                    named("top", plane(Vec3::zeros())),
                    named(
                        "pull-line",
                        ShapeGeometry::Line {
                            p: Vec3::new(0.55, 0.1, 0.02),
                            a: -Vec3::x_axis(),
                        },
                    ),
                ],
            },
            SceneObject {
                name: "cup".into(),
                pose: Pose::from_translation(Vec3::new(0.45, 0.0, 0.05)),
                shapes: vec![
                    named(
                        "body",
                        ShapeGeometry::Cylinder {
                            p: Vec3::zeros(),
                            a: z,
                            r: 0.035,
                            h: 0.1,
                        },
                    ),
                    named(
                        "axis",
                        ShapeGeometry::Line {
                            p: Vec3::zeros(),
                            a: z,
                        },
                    ),
                    named("mid-plane", plane(Vec3::zeros())),
                    named("bottom", plane(Vec3::new(0.0, 0.0, -0.05))),
                    named(
                        "rim",
                        ShapeGeometry::Circle {
                            p: Vec3::new(0.0, 0.0, 0.05),
                            n: z,
                            r: 0.035,
                        },
                    ),
                    named(
                        "mix-path",
                        ShapeGeometry::Circle {
                            p: Vec3::new(0.0, 0.0, 0.03),
                            n: z,
                            r: 0.02,
                        },
                    ),
                    named(
                        "pour-point",
                        ShapeGeometry::Point {
                            p: Vec3::new(0.0, 0.0, 0.15),
                        },
                    ),
                ],
            },
        ],
    }
}

/// Default template parameters.
pub fn template_defaults(name: &str) -> Result<BTreeMap<String, f64>> {
    let kv: &[(&str, f64)] = match name {
        "grasp" => &[("standoff", 0.0)],
        "place" => &[("center_x", 0.45), ("center_y", 0.0), ("half_extent", 0.15)],
        "move" => &[
            ("center_x", 0.45),
            ("center_y", 0.0),
            ("center_z", 0.25),
            ("half_extent", 0.15),
        ],
        "pull" => &[
            ("theta_min", 0.0),
            ("theta_max", 0.5),
            ("length", 0.3),
            ("waypoints", 10.0),
        ],
        "mix" => &[("waypoints", 36.0)],
        "pour" => &[("theta_end", 1.2), ("waypoints", 13.0)],
        other => return Err(Error::UnknownSkill(other.to_string())),
    };
    Ok(kv.iter().map(|(k, v)| (k.to_string(), *v)).collect())
}

fn waypoint_count(v: f64) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v <= 10_000.0 {
        Ok(v as usize)
    } else {
        Err(Error::invalid(format!(
            "waypoint count {v} must be a positive integer"
        )))
    }
}

/// Constraints of a built-in skill on the default scene shape names, with
/// the constrained shapes owned by `gripper`.
pub fn skill_template(
    name: &str,
    scene: &Scene,
    params: &BTreeMap<String, f64>,
) -> Result<SkillModel> {
    let mut p = template_defaults(name)?;
    for (k, v) in params {
        if !p.contains_key(k) {
            return Err(Error::UnknownParameter(k.clone()));
        }
        if !v.is_finite() {
            return Err(Error::invalid(format!("{k} must be finite")));
        }
        p.insert(k.clone(), *v);
    }
    let g = |k: ShapeKind| frame_shape("gripper", AxisSelector::PosZ, k);
    let iv = |lo: f64, hi: f64| -> Result<Option<Value>> {
        Ok(Some(Value::Interval(Interval::new(lo, hi)?)))
    };
    let mut kind = DemoKind::Discrete;
    let mut trajectory = None;
    let mut theta_end = None;
    let constraints = match name {
        "grasp" => {
            let body = scene.shape("cup/body")?;
            scene.shape("cup/mid-plane")?;
            let ShapeGeometry::Cylinder { r, h, .. } = body.geometry else {
                return Err(Error::invalid("cup/body must be a cylinder"));
            };
            let standoff = p["standoff"];
            let first = if standoff == 0.0 {
                GeometricConstraint::new(
                    "cup/body",
                    g(ShapeKind::Cylinder),
                    Relation::Concentric,
                    None,
                )
            } else {
                GeometricConstraint::new(
                    "cup/axis",
                    g(ShapeKind::Line),
                    Relation::Distance,
                    Some(Value::Scalar(r + standoff)),
                )
            };
            vec![
                first,
                GeometricConstraint::new(
                    "cup/mid-plane",
                    g(ShapeKind::Plane),
                    Relation::Distance,
                    iv(-h / 2.0, h / 2.0)?,
                ),
            ]
        }
        "place" => vec![GeometricConstraint::new(
            "table/top",
            g(ShapeKind::Plane),
            Relation::Coincident,
            None,
        )],
        "move" => vec![GeometricConstraint::new(
            "table/top",
            g(ShapeKind::Plane),
            Relation::Parallel,
            None,
        )],
        "pull" => {
            kind = DemoKind::Continuous;
            let (lo, hi) = (p["theta_min"], p["theta_max"]);
            trajectory = Some(TrajectorySpec {
                coordinate: TrajectoryCoordinate::LineParameter,
                params: linspace(0.0, p["length"], waypoint_count(p["waypoints"])?),
            });
            vec![
                GeometricConstraint::new(
                    "table/pull-line",
                    g(ShapeKind::Point),
                    Relation::Coincident,
                    None,
                ),
                GeometricConstraint::new(
                    "table/pull-line",
                    g(ShapeKind::Line),
                    Relation::Angle,
                    iv(lo, hi)?,
                ),
            ]
        }
        "mix" => {
            kind = DemoKind::Continuous;
            let ShapeGeometry::Circle { r, .. } = scene.shape("cup/mix-path")?.geometry else {
                return Err(Error::invalid("cup/mix-path must be a circle"));
            };
            scene.shape("cup/axis")?;
            let n = waypoint_count(p["waypoints"])?;
            trajectory = Some(TrajectorySpec {
                coordinate: TrajectoryCoordinate::CircleAngle,
                params: (0..n).map(|k| k as f64 * TAU / n as f64).collect(),
            });
            vec![
                GeometricConstraint::new(
                    "cup/mix-path",
                    g(ShapeKind::Point),
                    Relation::Coincident,
                    None,
                ),
                GeometricConstraint::new(
                    "cup/axis",
                    g(ShapeKind::Line),
                    Relation::Distance,
                    Some(Value::Scalar(r)),
                ),
            ]
        }
        "pour" => {
            kind = DemoKind::Continuous;
            let end = p["theta_end"];
            theta_end = Some(end);
            trajectory = Some(TrajectorySpec {
                coordinate: TrajectoryCoordinate::SweepAngle,
                params: linspace(0.0, end, waypoint_count(p["waypoints"])?),
            });
            vec![
                GeometricConstraint::new(
                    "cup/pour-point",
                    g(ShapeKind::Point),
                    Relation::Coincident,
                    None,
                ),
                GeometricConstraint::new(
                    "cup/axis",
                    g(ShapeKind::Line),
                    Relation::Angle,
                    iv(0.0, end)?,
                ),
            ]
        }
        other => return Err(Error::UnknownSkill(other.to_string())),
    };
    let mut nullspace = set_nullspace(&constraints, scene)?;
    // sampling extents for otherwise unbounded skills
    match name {
        "place" => {
            let c = nullspace
                .translation
                .coords(&Vec3::new(p["center_x"], p["center_y"], 0.0));
            let e = p["half_extent"];
            nullspace.bounds = Some(ExtentBounds(
                c.iter()
                    .map(|x| Interval::new(x - e, x + e).map(Some))
                    .collect::<Result<_>>()?,
            ));
        }
        "move" => {
            let e = p["half_extent"];
            let c = [p["center_x"], p["center_y"], p["center_z"]];
            nullspace.bounds = Some(ExtentBounds(
                c.iter()
                    .map(|x| Interval::new(x - e, x + e).map(Some))
                    .collect::<Result<_>>()?,
            ));
        }
        "pull" => {
            nullspace.bounds = Some(ExtentBounds(vec![Some(Interval::new(0.0, p["length"])?)]));
        }
        _ => {}
    }
    let mut skill = SkillModel {
        name: name.into(),
        kind,
        constraints: vec![],
        nullspace,
        trajectory,
        parameters: BTreeMap::new(),
        scene: Scene::default(),
    };
    if let Some(end) = theta_end {
        skill.parameters.insert("theta_end".into(), end);
    }
    skill.set_constraints(constraints, scene)?;
    Ok(skill)
}

fn set_shape_radius(scene: &mut Scene, label: &str, value: f64) -> bool {
    let Some((obj, name)) = label.split_once('/') else {
        return false;
    };
    for o in scene.objects.iter_mut().filter(|o| o.name == obj) {
        for s in o.shapes.iter_mut().filter(|s| s.name == name) {
            match &mut s.geometry {
                ShapeGeometry::Cylinder { r, .. } | ShapeGeometry::Circle { r, .. } => {
                    *r = value;
                    return true;
                }
                _ => {}
            }
        }
    }
    false
}

fn set_shape_height(scene: &mut Scene, label: &str, value: f64) {
    let Some((obj, name)) = label.split_once('/') else {
        return;
    };
    for o in scene.objects.iter_mut().filter(|o| o.name == obj) {
        for s in o.shapes.iter_mut().filter(|s| s.name == name) {
            if let ShapeGeometry::Cylinder { h, .. } = &mut s.geometry {
                *h = value;
            }
        }
    }
}

fn angle_interval_mut(s: &mut SkillModel) -> Option<&mut Interval> {
    s.constraints
        .iter_mut()
        .find_map(|c| match (&c.relation, &mut c.value) {
            (Relation::Angle, Some(Value::Interval(iv))) => Some(iv),
            _ => None,
        })
}

/// Changes one named parameter and regenerates the nullspace from the
/// constraints.
pub fn edit_parameter(s: &SkillModel, param: &str, value: f64) -> Result<SkillModel> {
    if !s.parameters.contains_key(param) {
        return Err(Error::UnknownParameter(param.to_string()));
    }
    if !value.is_finite() {
        return Err(Error::invalid(format!("{param} must be finite")));
    }
    let mut out = s.clone();
    let old_sweep = out.nullspace.rotation.tilt_range();
    match param {
        "radius" => {
            if value <= 0.0 {
                return Err(Error::invalid("radius must be positive"));
            }
            let mut touched = false;
            let labels: Vec<(String, Relation, ShapeKind)> = out
                .constraints
                .iter()
                .map(|c| (c.fixed.clone(), c.relation, c.constrained.kind()))
                .collect();
            for (i, (label, rel, ck)) in labels.iter().enumerate() {
                match (rel, ck) {
                    (Relation::Concentric, ShapeKind::Cylinder)
                    | (Relation::Coincident, ShapeKind::Point) => {
                        touched |= set_shape_radius(&mut out.scene, label, value);
                    }
                    (Relation::Distance, ShapeKind::Line) => {
                        out.constraints[i].value = Some(Value::Scalar(value));
                        touched = true;
                    }
                    _ => {}
                }
            }
            if !touched {
                return Err(Error::UnknownParameter(param.to_string()));
            }
        }
        "height" => {
            if value <= 0.0 {
                return Err(Error::invalid("height must be positive"));
            }
            let mut touched = false;
            for c in out.constraints.iter_mut() {
                if let (Relation::Distance, Some(Value::Interval(iv))) = (c.relation, c.value) {
                    let mid = iv.mid();
                    c.value = Some(Value::Interval(Interval::new(
                        mid - value / 2.0,
                        mid + value / 2.0,
                    )?));
                    touched = true;
                }
            }
            let cylinders: Vec<String> = out
                .constraints
                .iter()
                .filter(|c| c.relation == Relation::Concentric)
                .map(|c| c.fixed.clone())
                .collect();
            for l in cylinders {
                set_shape_height(&mut out.scene, &l, value);
            }
            if !touched {
                return Err(Error::UnknownParameter(param.to_string()));
            }
        }
        "theta_end" | "theta_max" | "theta_min" => {
            let iv = angle_interval_mut(&mut out)
                .ok_or_else(|| Error::UnknownParameter(param.to_string()))?;
            let (lo, hi) = if param == "theta_min" {
                (value, iv.hi)
            } else {
                (iv.lo, value)
            };
            if !(0.0..=std::f64::consts::PI).contains(&value) {
                return Err(Error::invalid(format!("{param} must lie in [0, π]")));
            }
            *iv = Interval::new(lo, hi)?;
        }
        generic => {
            let (idx, part) = match generic.split_once('.') {
                Some((i, part)) => (i, Some(part)),
                None => (generic, None),
            };
            let i: usize = idx
                .strip_prefix('c')
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| Error::UnknownParameter(param.to_string()))?;
            let c = out
                .constraints
                .get_mut(i)
                .ok_or_else(|| Error::UnknownParameter(param.to_string()))?;
            c.value = Some(match (c.value, part) {
                (Some(Value::Scalar(_)), None) => Value::Scalar(value),
                (Some(Value::Interval(iv)), Some("lo")) => {
                    Value::Interval(Interval::new(value, iv.hi)?)
                }
                (Some(Value::Interval(iv)), Some("hi")) => {
                    Value::Interval(Interval::new(iv.lo, value)?)
                }
                _ => return Err(Error::UnknownParameter(param.to_string())),
            });
        }
    }
    for c in &out.constraints {
        constraint_nullspace(c, &out.scene)?;
    }
    out.nullspace = out.derived_nullspace()?;
    out.nullspace.validate()?;
    out.refresh_parameters();
    // a sweep trajectory follows its interval
    if let (Some(t), Some(old), Some(new)) = (
        out.trajectory.as_mut(),
        old_sweep,
        out.nullspace.rotation.tilt_range(),
    ) {
        if t.coordinate == TrajectoryCoordinate::SweepAngle && old.width() > 0.0 && old != new {
            for x in t.params.iter_mut() {
                *x = new.lo + (*x - old.lo) / old.width() * new.width();
            }
        }
    }
    Ok(out)
}
