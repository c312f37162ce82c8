//! Fitting pose demonstrations to nullspace models: closed-form seeds,
//! damped least-squares refinement, most-restrictive model selection,
//! bound inference and trajectory ordering.

use std::f64::consts::{PI, TAU};

use nalgebra::{DVector, Matrix3, SymmetricEigen, Unit};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{
    angle_between, constrained_axis, plane_basis, AxisSelector, Pose, Rotation, UnitVec3, Vec3,
};
use crate::lm::{self, LmConfig};
use crate::manifolds::{
    CoordKind, ExtentBounds, Interval, NullspaceModel, RotationKind, RotationManifold,
    RotationModel, TranslationManifold, TranslationModel,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemoKind {
    Discrete,
    Continuous,
}

/// Relative poses of a constrained frame in a fixed frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Demonstration {
    pub samples: Vec<Pose>,
    pub kind: DemoKind,
    pub fixed: String,
    pub constrained: String,
}

impl Demonstration {
    pub fn new(samples: Vec<Pose>, kind: DemoKind) -> Self {
        Demonstration {
            samples,
            kind,
            fixed: "fixed".into(),
            constrained: "constrained".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::EmptyDemonstration);
        }
        if self.kind == DemoKind::Continuous {
            let mut last = f64::NEG_INFINITY;
            for (i, s) in self.samples.iter().enumerate() {
                let t = s
                    .timestamp
                    .ok_or_else(|| Error::invalid(format!("sample {i} has no timestamp")))?;
                if t < last {
                    return Err(Error::invalid(format!("timestamps decrease at sample {i}")));
                }
                last = t;
            }
        }
        Ok(())
    }

    fn translations(&self) -> Vec<Vec3> {
        self.samples.iter().map(|p| p.translation).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub translation_models: Vec<TranslationModel>,
    pub rotation_models: Vec<RotationModel>,
    /// Acceptance threshold on the RMS combined residual.
    pub tau: f64,
    /// Weight of the rotation residual.
    pub lambda: f64,
    pub max_iterations: usize,
    pub ftol: f64,
    pub xtol: f64,
    pub selector: AxisSelector,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            translation_models: TranslationModel::DEFAULT_ORDER.to_vec(),
            rotation_models: RotationModel::DEFAULT_ORDER.to_vec(),
            tau: 5e-3,
            lambda: 1.0,
            max_iterations: 200,
            ftol: 1e-15,
            xtol: 1e-14,
            selector: AxisSelector::PosZ,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) {
            return Err(Error::invalid("tau must be positive"));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::invalid("lambda must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelType {
    pub translation: TranslationModel,
    pub rotation: RotationModel,
}

impl ModelType {
    pub fn new(translation: TranslationModel, rotation: RotationModel) -> Self {
        ModelType {
            translation,
            rotation,
        }
    }

    pub fn dims(&self) -> usize {
        self.translation.dims() + self.rotation.dims()
    }

    pub fn min_samples(&self) -> usize {
        self.translation
            .min_samples()
            .max(self.rotation.min_samples())
    }
}

impl std::fmt::Display for ModelType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} + {}", self.translation, self.rotation)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model_type: ModelType,
    pub model: NullspaceModel,
    /// Per-sample `dist_t + λ·dist_r`.
    pub residuals: Vec<f64>,
    pub rms: f64,
    pub converged: bool,
    pub iterations: usize,
    /// For sweep models: RMS deviation of the rotations from a single
    /// rotation axis. A sweep is only admissible when this is within τ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_residual: Option<f64>,
    /// Surrogate cost after each accepted optimizer step.
    #[serde(default, skip_serializing)]
    pub cost_history: Vec<f64>,
}

impl FitResult {
    pub fn passes(&self, tau: f64) -> bool {
        self.rms <= tau && self.sweep_residual.is_none_or(|g| g <= tau)
    }
}

/// Per-sample combined residual `dist_t + λ·dist_r` (bounds ignored).
pub fn combined_residuals(model: &NullspaceModel, samples: &[Pose], lambda: f64) -> Vec<f64> {
    samples
        .iter()
        .map(|s| model.translation.dist(&s.translation) + lambda * model.rotation.dist(&s.rotation))
        .collect()
}

pub fn rms(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

fn centroid(points: &[Vec3]) -> Vec3 {
    points.iter().fold(Vec3::zeros(), |a, p| a + p) / points.len() as f64
}

/// Eigen-decomposition of the scatter matrix, eigenvectors sorted by
/// ascending eigenvalue.
fn scatter_axes(points: &[Vec3], c: &Vec3) -> ([f64; 3], [UnitVec3; 3]) {
    let mut m = Matrix3::zeros();
    for p in points {
        let d = p - c;
        m += d * d.transpose();
    }
    let eig = SymmetricEigen::new(m);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.map(|i| eig.eigenvalues[i]);
    let vecs = idx.map(|i| Unit::new_normalize(eig.eigenvectors.column(i).into_owned()));
    (vals, vecs)
}

/// Algebraic circle fit in a plane: returns centre offset (in-plane) and
/// radius. Falls back to the centroid and mean distance when degenerate.
fn kasa_circle(points: &[Vec3], origin: &Vec3, normal: &UnitVec3) -> (Vec3, f64) {
    let (e1, e2) = plane_basis(normal);
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            let d = p - origin;
            (d.dot(&e1), d.dot(&e2))
        })
        .collect();
    let mut ata = Matrix3::zeros();
    let mut atb = Vec3::zeros();
    for &(x, y) in &xy {
        let row = Vec3::new(x, y, 1.0);
        ata += row * row.transpose();
        atb += row * (-(x * x + y * y));
    }
    let fallback = || {
        let n = xy.len() as f64;
        let (cx, cy) = xy
            .iter()
            .fold((0.0, 0.0), |a, &(x, y)| (a.0 + x / n, a.1 + y / n));
        let r = xy
            .iter()
            .map(|&(x, y)| ((x - cx).powi(2) + (y - cy).powi(2)).sqrt())
            .sum::<f64>()
            / n;
        (origin + e1.as_ref() * cx + e2.as_ref() * cy, r.max(1e-6))
    };
    match ata.try_inverse() {
        Some(inv) if xy.len() >= 3 => {
            let s = inv * atb;
            let (cx, cy) = (-s.x / 2.0, -s.y / 2.0);
            let r2 = cx * cx + cy * cy - s.z;
            if r2 > 0.0 && r2.is_finite() {
                (origin + e1.as_ref() * cx + e2.as_ref() * cy, r2.sqrt())
            } else {
                fallback()
            }
        }
        _ => fallback(),
    }
}

fn push_vec(v: &mut Vec<f64>, x: &Vec3) {
    v.extend_from_slice(&[x.x, x.y, x.z]);
}

fn vec_at(x: &[f64], i: usize) -> Vec3 {
    Vec3::new(x[i], x[i + 1], x[i + 2])
}

fn unit_at(x: &[f64], i: usize) -> UnitVec3 {
    let v = vec_at(x, i);
    if v.norm() > 1e-300 {
        Unit::new_normalize(v)
    } else {
        Vec3::z_axis()
    }
}

fn translation_param_len(m: TranslationModel) -> usize {
    match m {
        TranslationModel::Full3Space => 0,
        TranslationModel::Point => 3,
        TranslationModel::Line | TranslationModel::Plane => 6,
        TranslationModel::Circle | TranslationModel::Cylinder => 7,
    }
}

fn rotation_param_len(m: RotationModel) -> usize {
    match m {
        RotationModel::OneParallel => 3,
        RotationModel::OneAngle => 4,
        RotationModel::OneAngleSweep | RotationModel::FullSO3 => 0,
    }
}

fn translation_from(m: TranslationModel, x: &[f64]) -> TranslationManifold {
    match m {
        TranslationModel::Full3Space => TranslationManifold::Full3Space,
        TranslationModel::Point => TranslationManifold::Point { p: vec_at(x, 0) },
        TranslationModel::Line => TranslationManifold::Line {
            p: vec_at(x, 0),
            a: unit_at(x, 3),
        },
        TranslationModel::Plane => TranslationManifold::Plane {
            p: vec_at(x, 0),
            n: unit_at(x, 3),
        },
        TranslationModel::Circle => TranslationManifold::Circle {
            p: vec_at(x, 0),
            n: unit_at(x, 3),
            r: x[6].abs(),
        },
        TranslationModel::Cylinder => TranslationManifold::Cylinder {
            p: vec_at(x, 0),
            a: unit_at(x, 3),
            r: x[6].abs(),
        },
    }
}

fn rotation_from(m: RotationModel, x: &[f64], selector: AxisSelector) -> RotationManifold {
    match m {
        RotationModel::OneParallel => RotationManifold::one_parallel(unit_at(x, 0), selector),
        RotationModel::OneAngle => {
            RotationManifold::one_angle(unit_at(x, 0), x[3].clamp(0.0, PI), selector)
        }
        RotationModel::FullSO3 | RotationModel::OneAngleSweep => RotationManifold {
            kind: RotationKind::FullSO3,
            selector,
        },
    }
}

fn normalize_params(mt: ModelType, x: &mut DVector<f64>) {
    let nt = translation_param_len(mt.translation);
    let norm3 = |x: &mut DVector<f64>, i: usize| {
        let n = (x[i] * x[i] + x[i + 1] * x[i + 1] + x[i + 2] * x[i + 2]).sqrt();
        if n > 1e-300 {
            for k in 0..3 {
                x[i + k] /= n;
            }
        }
    };
    match mt.translation {
        TranslationModel::Line | TranslationModel::Plane => norm3(x, 3),
        TranslationModel::Circle | TranslationModel::Cylinder => {
            norm3(x, 3);
            x[6] = x[6].abs();
        }
        _ => {}
    }
    match mt.rotation {
        RotationModel::OneParallel => norm3(x, nt),
        RotationModel::OneAngle => {
            norm3(x, nt);
            x[nt + 3] = x[nt + 3].clamp(0.0, PI);
        }
        _ => {}
    }
}

fn axes_of(samples: &[Pose], selector: AxisSelector) -> Vec<Vec3> {
    samples
        .iter()
        .map(|s| constrained_axis(&s.rotation, selector).into_inner())
        .collect()
}

fn cylinder_seed(points: &[Vec3], axes: &[Vec3]) -> (Vec3, UnitVec3, f64) {
    let c = centroid(points);
    let (_, vecs) = scatter_axes(points, &c);
    let mut candidates: Vec<UnitVec3> = vecs.to_vec();
    let mean_axis = centroid(axes);
    if mean_axis.norm() > 0.99 {
        candidates.insert(0, Unit::new_normalize(mean_axis));
    }
    let mut best: Option<(f64, Vec3, UnitVec3, f64)> = None;
    for a in candidates {
        let (centre, r) = kasa_circle(points, &c, &a);
        let m = TranslationManifold::Cylinder { p: centre, a, r };
        let score = rms(&points.iter().map(|u| m.dist(u)).collect::<Vec<_>>());
        if best.as_ref().is_none_or(|b| score < b.0) {
            best = Some((score, centre, a, r));
        }
    }
    let (_, p, a, r) = best.expect("at least three candidate axes");
    (p, a, r)
}

/// Closed-form parameter seed for a model type.
pub fn init_params(
    d: &Demonstration,
    mt: ModelType,
    selector: AxisSelector,
) -> Result<DVector<f64>> {
    if d.samples.is_empty() {
        return Err(Error::EmptyDemonstration);
    }
    let needed = mt.min_samples();
    if d.samples.len() < needed {
        return Err(Error::InsufficientData {
            model: mt.to_string(),
            needed,
            got: d.samples.len(),
        });
    }
    let pts = d.translations();
    let axes = axes_of(&d.samples, selector);
    let c = centroid(&pts);
    let mut x = Vec::new();
    match mt.translation {
        TranslationModel::Full3Space => {}
        TranslationModel::Point => push_vec(&mut x, &c),
        TranslationModel::Line => {
            let (_, v) = scatter_axes(&pts, &c);
            push_vec(&mut x, &c);
            push_vec(&mut x, &v[2]);
        }
        TranslationModel::Plane => {
            let (_, v) = scatter_axes(&pts, &c);
            push_vec(&mut x, &c);
            push_vec(&mut x, &v[0]);
        }
        TranslationModel::Circle => {
            let (_, v) = scatter_axes(&pts, &c);
            let (centre, r) = kasa_circle(&pts, &c, &v[0]);
            push_vec(&mut x, &centre);
            push_vec(&mut x, &v[0]);
            x.push(r);
        }
        TranslationModel::Cylinder => {
            let (p, a, r) = cylinder_seed(&pts, &axes);
            push_vec(&mut x, &p);
            push_vec(&mut x, &a);
            x.push(r);
        }
    }
    match mt.rotation {
        RotationModel::OneParallel => {
            let m = centroid(&axes);
            let v = if m.norm() > 1e-9 {
                m.normalize()
            } else {
                axes[0]
            };
            push_vec(&mut x, &v);
        }
        RotationModel::OneAngle => {
            let m = centroid(&axes);
            let (_, v) = scatter_axes(&axes, &m);
            let mut n = v[0].into_inner();
            if n.dot(&m) < 0.0 {
                n = -n;
            }
            let theta = axes.iter().map(|a| angle_between(a, &n)).sum::<f64>() / axes.len() as f64;
            push_vec(&mut x, &n);
            x.push(theta);
        }
        RotationModel::OneAngleSweep | RotationModel::FullSO3 => {}
    }
    Ok(DVector::from_vec(x))
}

fn sign_canonical(v: UnitVec3) -> UnitVec3 {
    let i = v.iamax();
    if v[i] < 0.0 {
        -v
    } else {
        v
    }
}

/// Representative parameters modulo symmetries: anchor points moved to the
/// foot of the frame origin, axis signs fixed so the largest component is
/// positive (or, for trajectories, so the motion runs forward).
fn canonicalize(m: TranslationManifold, samples: &[Pose], forward: bool) -> TranslationManifold {
    let orient = |a: UnitVec3| -> UnitVec3 {
        if forward && samples.len() >= 2 {
            let d = samples[samples.len() - 1].translation - samples[0].translation;
            if d.dot(&a) < 0.0 {
                return -a;
            } else if d.dot(&a) > 0.0 {
                return a;
            }
        }
        sign_canonical(a)
    };
    match m {
        TranslationManifold::Line { p, a } => {
            let a = orient(a);
            TranslationManifold::Line {
                p: p - a.as_ref() * p.dot(&a),
                a,
            }
        }
        TranslationManifold::Cylinder { p, a, r } => {
            let a = sign_canonical(a);
            TranslationManifold::Cylinder {
                p: p - a.as_ref() * p.dot(&a),
                a,
                r,
            }
        }
        TranslationManifold::Plane { p, n } => {
            let n = sign_canonical(n);
            TranslationManifold::Plane {
                p: n.as_ref() * p.dot(&n),
                n,
            }
        }
        TranslationManifold::Circle { p, n, r } => TranslationManifold::Circle {
            p,
            n: sign_canonical(n),
            r,
        },
        other => other,
    }
}

/// Sweep fit: the constrained axis at the first sample is the fixed vector,
/// the interval spans the demonstrated angles, and admissibility is judged
/// by how well a single rotation axis explains the motion.
fn fit_sweep(d: &Demonstration, selector: AxisSelector) -> (RotationManifold, f64) {
    let r0 = d.samples[0].rotation;
    let v_f = constrained_axis(&r0, selector);
    let inv0 = r0.inverse();
    let mut m = Matrix3::zeros();
    let deltas: Vec<Matrix3<f64>> = d
        .samples
        .iter()
        .map(|s| s.rotation.compose(&inv0).matrix() - Matrix3::identity())
        .collect();
    for dm in &deltas {
        m += dm.transpose() * dm;
    }
    let eig = SymmetricEigen::new(m);
    let k = eig.eigenvalues.imin();
    let w = eig.eigenvectors.column(k).into_owned();
    let gate = rms(&deltas.iter().map(|dm| (dm * w).norm()).collect::<Vec<_>>());
    let angles: Vec<f64> = axes_of(&d.samples, selector)
        .iter()
        .map(|a| angle_between(a, &v_f))
        .collect();
    let lo = angles.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = angles.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (
        RotationManifold::one_angle_interval(v_f, Interval { lo, hi }, selector),
        gate,
    )
}

/// Fits one model type by damped least squares. The optimizer minimizes the
/// stacked vector residual `[ProjT(u) − u; λ·(q_proj − q)]`; the reported
/// RMS is the per-sample `dist_t + λ·dist_r`.
pub fn fit_manifold(d: &Demonstration, mt: ModelType, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    d.validate()?;
    if mt.rotation == RotationModel::OneAngleSweep && d.kind != DemoKind::Continuous {
        return Err(Error::NotATrajectory);
    }
    let x0 = init_params(d, mt, cfg.selector)?;
    let nt = translation_param_len(mt.translation);
    let nr = rotation_param_len(mt.rotation);
    debug_assert_eq!(x0.len(), nt + nr);

    let (sweep, sweep_residual) = if mt.rotation == RotationModel::OneAngleSweep {
        let (m, g) = fit_sweep(d, cfg.selector);
        (Some(m), Some(g))
    } else {
        (None, None)
    };
    let selector = cfg.selector;
    let lambda = cfg.lambda;
    let samples = &d.samples;
    let build = |x: &[f64]| -> (TranslationManifold, RotationManifold) {
        let t = translation_from(mt.translation, &x[..nt]);
        let r = match &sweep {
            Some(m) => m.clone(),
            None => rotation_from(mt.rotation, &x[nt..], selector),
        };
        (t, r)
    };
    let residual = |x: &DVector<f64>| -> DVector<f64> {
        let (t, r) = build(x.as_slice());
        let mut out = Vec::with_capacity(samples.len() * 7);
        for s in samples {
            let dt = t.project(&s.translation) - s.translation;
            out.extend_from_slice(&[dt.x, dt.y, dt.z]);
            if nr > 0 {
                let q = s.rotation.as_vector();
                let mut qp = r.project(&s.rotation).as_vector();
                if qp.dot(&q) < 0.0 {
                    qp = -qp;
                }
                let dq = (qp - q) * lambda;
                out.extend_from_slice(&[dq[0], dq[1], dq[2], dq[3]]);
            }
        }
        DVector::from_vec(out)
    };
    let lm_cfg = LmConfig {
        max_iterations: cfg.max_iterations,
        ftol: cfg.ftol,
        xtol: cfg.xtol,
        ..LmConfig::default()
    };
    let report = lm::minimize(x0, residual, |x| normalize_params(mt, x), &lm_cfg);
    let (t, r) = build(report.params.as_slice());
    let t = canonicalize(t, samples, d.kind == DemoKind::Continuous);
    let mut model = NullspaceModel::new(t, r);
    let residuals = combined_residuals(&model, samples, lambda);
    let rms_val = rms(&residuals);
    model.rms_fit_residual = rms_val;
    Ok(FitResult {
        model_type: mt,
        model,
        residuals,
        rms: rms_val,
        converged: report.converged && sweep_residual.is_none_or(|g| g <= cfg.tau),
        iterations: report.iterations,
        sweep_residual,
        cost_history: report.history,
    })
}

/// One row of the model-selection table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRow {
    pub model_type: ModelType,
    pub rms: Option<f64>,
    pub note: Option<String>,
    pub chosen: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub result: FitResult,
    pub table: Vec<CandidateRow>,
}

/// Candidate model types in evaluation order: by combined nullspace
/// dimension, then by position in the configured translation and rotation
/// orders.
pub fn candidate_order(d: &Demonstration, cfg: &FitConfig) -> Vec<ModelType> {
    let mut out = vec![];
    for (ti, t) in cfg.translation_models.iter().enumerate() {
        for (ri, r) in cfg.rotation_models.iter().enumerate() {
            if *r == RotationModel::OneAngleSweep && d.kind != DemoKind::Continuous {
                continue;
            }
            out.push((ModelType::new(*t, *r), ti, ri));
        }
    }
    out.sort_by_key(|(m, ti, ri)| (m.dims(), *ti, *ri));
    out.into_iter().map(|(m, _, _)| m).collect()
}

/// Most restrictive model whose RMS residual is within τ, with the table of
/// evaluated candidates.
pub fn select_model_report(d: &Demonstration, cfg: &FitConfig) -> Result<Selection> {
    d.validate()?;
    cfg.validate()?;
    let mut table = vec![];
    for mt in candidate_order(d, cfg) {
        match fit_manifold(d, mt, cfg) {
            Ok(fr) => {
                let pass = fr.passes(cfg.tau);
                let note = fr
                    .sweep_residual
                    .filter(|g| *g > cfg.tau)
                    .map(|g| format!("sweep axis residual {g:.3e}"));
                table.push(CandidateRow {
                    model_type: mt,
                    rms: Some(fr.rms),
                    note,
                    chosen: pass,
                });
                if pass {
                    return Ok(Selection { result: fr, table });
                }
            }
            Err(Error::InsufficientData { .. }) => table.push(CandidateRow {
                model_type: mt,
                rms: None,
                note: Some("insufficient data".into()),
                chosen: false,
            }),
            Err(e) => return Err(e),
        }
    }
    // nothing passed: report the unconstrained pair
    let mt = ModelType::new(TranslationModel::Full3Space, RotationModel::FullSO3);
    let model = NullspaceModel::new(
        TranslationManifold::Full3Space,
        RotationManifold {
            kind: RotationKind::FullSO3,
            selector: cfg.selector,
        },
    );
    let residuals = vec![0.0; d.samples.len()];
    table.push(CandidateRow {
        model_type: mt,
        rms: Some(0.0),
        note: Some("fallback".into()),
        chosen: true,
    });
    Ok(Selection {
        result: FitResult {
            model_type: mt,
            model,
            residuals,
            rms: 0.0,
            converged: false,
            iterations: 0,
            sweep_residual: None,
            cost_history: vec![],
        },
        table,
    })
}

pub fn select_model(d: &Demonstration, cfg: &FitConfig) -> Result<FitResult> {
    select_model_report(d, cfg).map(|s| s.result)
}

/// Margins applied by `infer_bounds`, as fractions of the observed span
/// added on each side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsConfig {
    pub margin: f64,
    pub angle_margin: f64,
    /// Angle spreads below this stay a single fixed angle.
    pub fixed_angle_tol: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            margin: 0.05,
            angle_margin: 0.015,
            fixed_angle_tol: 5e-3,
        }
    }
}

fn linear_bound(values: &[f64], margin: f64) -> Interval {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let m = margin * (hi - lo);
    Interval {
        lo: lo - m,
        hi: hi + m,
    }
}

/// Smallest arc containing all angles, widened by the margin; `None` when
/// the widened arc covers the whole circle.
fn angular_bound(values: &[f64], margin: f64) -> Option<Interval> {
    let mut a: Vec<f64> = values.iter().map(|v| crate::geom::wrap_angle(*v)).collect();
    a.sort_by(f64::total_cmp);
    let n = a.len();
    let (mut gap, mut start) = (a[0] + TAU - a[n - 1], a[0]);
    for i in 1..n {
        let g = a[i] - a[i - 1];
        if g > gap {
            gap = g;
            start = a[i];
        }
    }
    let span = TAU - gap;
    let m = margin * span;
    if span + 2.0 * m >= TAU {
        return None;
    }
    Some(Interval {
        lo: start - m,
        hi: start + span + m,
    })
}

/// Bounds on every free coordinate from the demonstrated extent, plus an
/// angle interval for OneAngle rotations whose angles spread.
pub fn infer_bounds(
    d: &Demonstration,
    model: &NullspaceModel,
    cfg: &BoundsConfig,
) -> Result<NullspaceModel> {
    d.validate()?;
    let mut out = model.clone();
    let kinds = model.translation.coord_kinds();
    if !kinds.is_empty() {
        let coords: Vec<Vec<f64>> = d
            .samples
            .iter()
            .map(|s| model.translation.coords(&s.translation))
            .collect();
        let bounds = kinds
            .iter()
            .enumerate()
            .map(|(i, k)| {
                let vals: Vec<f64> = coords.iter().map(|c| c[i]).collect();
                match k {
                    CoordKind::Linear => Some(linear_bound(&vals, cfg.margin)),
                    CoordKind::Angular => angular_bound(&vals, cfg.margin),
                }
            })
            .collect();
        out.bounds = Some(ExtentBounds(bounds));
    }
    if let RotationKind::OneAngle {
        v_f,
        theta,
        interval,
    } = &model.rotation.kind
    {
        let angles: Vec<f64> = axes_of(&d.samples, model.rotation.selector)
            .iter()
            .map(|a| angle_between(a, v_f))
            .collect();
        let lo = angles.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = angles.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if interval.is_some() || hi - lo > cfg.fixed_angle_tol {
            let m = cfg.angle_margin * (hi - lo);
            let iv = Interval {
                lo: (lo - m).max(0.0),
                hi: (hi + m).min(PI),
            };
            out.rotation.kind = RotationKind::OneAngle {
                v_f: *v_f,
                theta: iv.mid(),
                interval: Some(iv),
            };
        } else {
            out.rotation.kind = RotationKind::OneAngle {
                v_f: *v_f,
                theta: *theta,
                interval: None,
            };
        }
    }
    Ok(out)
}

/// One ordered trajectory sample mapped onto the nullspace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub timestamp: f64,
    /// Translation manifold coordinates, angles unwrapped along the path.
    pub coords: Vec<f64>,
    /// Angle between constrained axis and fixed vector, for OneAngle rotations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tilt: Option<f64>,
    /// Cumulative path length (translation distance plus rotation angle).
    pub arc_length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderedTrajectory {
    pub waypoints: Vec<Waypoint>,
}

impl OrderedTrajectory {
    /// Primary trajectory parameter of a waypoint: the first translation
    /// coordinate, else the tilt angle, else the arc length.
    pub fn parameter(&self, i: usize) -> f64 {
        let w = &self.waypoints[i];
        w.coords.first().copied().or(w.tilt).unwrap_or(w.arc_length)
    }

    pub fn parameters(&self) -> Vec<f64> {
        (0..self.waypoints.len())
            .map(|i| self.parameter(i))
            .collect()
    }

    pub fn start(&self) -> f64 {
        self.parameter(0)
    }

    pub fn end(&self) -> f64 {
        self.parameter(self.waypoints.len() - 1)
    }
}

/// Orders a continuous demonstration by timestamp and maps every sample to
/// its manifold coordinates. Consecutive identical poses collapse.
pub fn order_trajectory(d: &Demonstration, model: &NullspaceModel) -> Result<OrderedTrajectory> {
    if d.kind != DemoKind::Continuous {
        return Err(Error::NotATrajectory);
    }
    d.validate()?;
    let mut samples: Vec<&Pose> = d.samples.iter().collect();
    samples.sort_by(|a, b| {
        a.timestamp
            .unwrap_or(0.0)
            .total_cmp(&b.timestamp.unwrap_or(0.0))
    });
    let kinds = model.translation.coord_kinds();
    let mut out: Vec<Waypoint> = vec![];
    let mut prev: Option<&Pose> = None;
    for s in samples {
        let mut coords = model.translation.coords(&s.translation);
        let tilt = match model.rotation.kind {
            RotationKind::OneAngle { .. } => model.rotation.tilt_of(&s.rotation),
            _ => None,
        };
        if let (Some(p), Some(last)) = (prev, out.last_mut()) {
            let step = (s.translation - p.translation).norm()
                + s.rotation.compose(&p.rotation.inverse()).angle();
            if step <= 1e-12 {
                continue;
            }
            for (i, k) in kinds.iter().enumerate() {
                if *k == CoordKind::Angular {
                    let delta = crate::geom::wrap_angle(coords[i] - last.coords[i]);
                    coords[i] = last.coords[i] + delta;
                }
            }
            let arc = last.arc_length + step;
            out.push(Waypoint {
                timestamp: s.timestamp.unwrap_or(0.0),
                coords,
                tilt,
                arc_length: arc,
            });
        } else {
            out.push(Waypoint {
                timestamp: s.timestamp.unwrap_or(0.0),
                coords,
                tilt,
                arc_length: 0.0,
            });
        }
        prev = Some(s);
    }
    Ok(OrderedTrajectory { waypoints: out })
}

/// Rotation of `r` about `axis` through the demonstrations, used by tests.
pub fn rotate_about(axis: &UnitVec3, angle: f64, r: &Rotation) -> Rotation {
    Rotation::about(axis, angle).compose(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo(points: &[Vec3]) -> Demonstration {
        Demonstration::new(
            points.iter().map(|p| Pose::from_translation(*p)).collect(),
            DemoKind::Discrete,
        )
    }

    #[test]
    fn point_seed_is_the_sample() {
        let p = Vec3::new(0.1, 0.2, 0.3);
        let d = demo(&[p, p, p]);
        let x = init_params(
            &d,
            ModelType::new(TranslationModel::Point, RotationModel::FullSO3),
            AxisSelector::PosZ,
        )
        .unwrap();
        assert!((vec_at(x.as_slice(), 0) - p).norm() < 1e-15);
    }

    #[test]
    fn line_seed_direction() {
        let a = Vec3::new(1.0, 2.0, -0.5).normalize();
        let pts: Vec<Vec3> = (0..20)
            .map(|i| Vec3::new(0.3, 0.1, 0.0) + a * (i as f64 * 0.05))
            .collect();
        let x = init_params(
            &demo(&pts),
            ModelType::new(TranslationModel::Line, RotationModel::FullSO3),
            AxisSelector::PosZ,
        )
        .unwrap();
        let seed = unit_at(x.as_slice(), 3);
        assert!(angle_between(&seed, &a).min(angle_between(&-seed.into_inner(), &a)) < 1e-6);
    }

    #[test]
    fn insufficient_data_for_cylinder() {
        let d = demo(&[Vec3::zeros(), Vec3::x()]);
        let err = init_params(
            &d,
            ModelType::new(TranslationModel::Cylinder, RotationModel::FullSO3),
            AxisSelector::PosZ,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientData {
                needed: 5,
                got: 2,
                ..
            }
        ));
    }

    #[test]
    fn single_sample_point_fit() {
        let p = Vec3::new(1.0, -2.0, 0.5);
        let d = demo(&[p]);
        let fr = fit_manifold(
            &d,
            ModelType::new(TranslationModel::Point, RotationModel::FullSO3),
            &FitConfig::default(),
        )
        .unwrap();
        match fr.model.translation {
            TranslationManifold::Point { p: q } => assert!((q - p).norm() < 1e-15),
            _ => unreachable!(),
        }
        assert_eq!(fr.rms, 0.0);
    }

    #[test]
    fn single_point_bounds_are_zero_width() {
        let d = demo(&[Vec3::new(0.2, 0.0, 0.0)]);
        let m = NullspaceModel::new(
            TranslationManifold::Line {
                p: Vec3::zeros(),
                a: Vec3::x_axis(),
            },
            RotationManifold::full(),
        );
        let b = infer_bounds(&d, &m, &BoundsConfig::default()).unwrap();
        let iv = b.bound(0).unwrap();
        assert!((iv.lo - 0.2).abs() < 1e-15 && (iv.hi - 0.2).abs() < 1e-15);
    }

    #[test]
    fn discrete_is_not_a_trajectory() {
        let d = demo(&[Vec3::zeros()]);
        let m = NullspaceModel::new(TranslationManifold::Full3Space, RotationManifold::full());
        assert!(matches!(
            order_trajectory(&d, &m),
            Err(Error::NotATrajectory)
        ));
    }

    #[test]
    fn constant_trajectory_collapses() {
        let samples = (0..5)
            .map(|i| Pose::from_translation(Vec3::new(0.1, 0.0, 0.0)).with_timestamp(i as f64))
            .collect();
        let d = Demonstration::new(samples, DemoKind::Continuous);
        let m = NullspaceModel::new(
            TranslationManifold::Point {
                p: Vec3::new(0.1, 0.0, 0.0),
            },
            RotationManifold::full(),
        );
        assert_eq!(order_trajectory(&d, &m).unwrap().waypoints.len(), 1);
    }

    #[test]
    fn angular_bound_full_circle() {
        let vals: Vec<f64> = (0..100).map(|i| -PI + TAU * i as f64 / 100.0).collect();
        assert!(angular_bound(&vals, 0.05).is_none());
        let iv = angular_bound(&[3.0, -3.0], 0.0).unwrap();
        assert!((iv.lo - 3.0).abs() < 1e-12 && (iv.hi - (TAU - 3.0)).abs() < 1e-12);
    }
}
