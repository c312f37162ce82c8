//! Executing skills on a serial manipulator: forward kinematics, tiered
//! penalty weights, and a sample-then-refine solver.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use crate::constraints::constraint_residual;
use crate::constraints::{GeometricConstraint, Scene};
use crate::error::{Error, Result};
use crate::geom::{Pose, Rotation, Vec3};
use crate::lm::{minimize, LmConfig};
use crate::manifolds::{sample_pose_with, NullspaceModel, SampleSpec};
use crate::skills::SkillModel;

/// Revolute joint with standard link parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    /// Link length along the common normal.
    pub a: f64,
    /// Link twist about the common normal.
    pub alpha: f64,
    /// Link offset along the joint axis.
    pub d: f64,
    #[serde(default)]
    pub theta_offset: f64,
    pub q_lo: f64,
    pub q_hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KinematicChain {
    pub joints: Vec<Joint>,
    #[serde(default = "Pose::identity")]
    pub base: Pose,
    #[serde(default = "Pose::identity")]
    pub ee_offset: Pose,
    /// Start configuration for the iterative stage; mid-range if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub home: Option<Vec<f64>>,
}

/// End-effector pose and the frame of every link, base first.
#[derive(Clone, Debug, PartialEq)]
pub struct FkResult {
    pub ee: Pose,
    pub frames: Vec<Pose>,
}

impl FkResult {
    /// Points tested against obstacles: frame origins, midpoints of
    /// consecutive origins, and the end effector.
    pub fn collision_points(&self) -> Vec<Vec3> {
        let mut origins: Vec<Vec3> = self.frames.iter().map(|f| f.translation).collect();
        origins.push(self.ee.translation);
        let mut pts = origins.clone();
        for w in origins.windows(2) {
            pts.push((w[0] + w[1]) / 2.0);
        }
        pts
    }
}

impl KinematicChain {
    /// Universal Robots UR5e with the tool z axis pointing back out of the
    /// flange.
    pub fn ur5e() -> Self {
        let tau = 2.0 * PI;
        let j = |a: f64, alpha: f64, d: f64, lim: f64| Joint {
            a,
            alpha,
            d,
            theta_offset: 0.0,
            q_lo: -lim,
            q_hi: lim,
        };
        KinematicChain {
            joints: vec![
                j(0.0, FRAC_PI_2, 0.1625, tau),
                j(-0.425, 0.0, 0.0, tau),
                j(-0.3922, 0.0, 0.0, PI),
                j(0.0, FRAC_PI_2, 0.1333, tau),
                j(0.0, -FRAC_PI_2, 0.0997, tau),
                j(0.0, 0.0, 0.0996, tau),
            ],
            base: Pose::identity(),
            ee_offset: Pose::new(Vec3::zeros(), Rotation::about(&Vec3::x_axis(), PI)),
            home: Some(vec![
                0.0, -FRAC_PI_2, FRAC_PI_2, -FRAC_PI_2, -FRAC_PI_2, 0.0,
            ]),
        }
    }

    /// Two unit links rotating about z.
    pub fn planar_two_link() -> Self {
        let j = Joint {
            a: 1.0,
            alpha: 0.0,
            d: 0.0,
            theta_offset: 0.0,
            q_lo: -PI,
            q_hi: PI,
        };
        KinematicChain {
            joints: vec![j.clone(), j],
            base: Pose::identity(),
            ee_offset: Pose::identity(),
            home: None,
        }
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.joints.is_empty() {
            return Err(Error::invalid("chain needs at least one joint"));
        }
        for (i, j) in self.joints.iter().enumerate() {
            let finite = [j.a, j.alpha, j.d, j.theta_offset, j.q_lo, j.q_hi]
                .iter()
                .all(|x| x.is_finite());
            if !finite || j.q_lo >= j.q_hi {
                return Err(Error::invalid(format!(
                    "joint {i}: limits must be finite with q_lo < q_hi"
                )));
            }
        }
        if let Some(h) = &self.home {
            if h.len() != self.dof() {
                return Err(Error::DimensionMismatch {
                    expected: self.dof(),
                    got: h.len(),
                });
            }
        }
        Ok(())
    }

    pub fn mid_range(&self) -> Vec<f64> {
        self.joints
            .iter()
            .map(|j| 0.5 * (j.q_lo + j.q_hi))
            .collect()
    }

    pub fn home(&self) -> Vec<f64> {
        let mut q = self.home.clone().unwrap_or_else(|| self.mid_range());
        self.clamp(&mut q);
        q
    }

    pub fn clamp(&self, q: &mut [f64]) {
        for (x, j) in q.iter_mut().zip(&self.joints) {
            *x = x.clamp(j.q_lo, j.q_hi);
        }
    }

    /// Total distance of `q` outside the joint limits.
    pub fn limit_violation(&self, q: &[f64]) -> f64 {
        q.iter()
            .zip(&self.joints)
            .map(|(x, j)| (j.q_lo - x).max(0.0) + (x - j.q_hi).max(0.0))
            .sum()
    }
}

fn link_pose(j: &Joint, q: f64) -> Pose {
    let theta = q + j.theta_offset;
    let rot =
        Rotation::about(&Vec3::z_axis(), theta).compose(&Rotation::about(&Vec3::x_axis(), j.alpha));
    Pose::new(Vec3::new(j.a * theta.cos(), j.a * theta.sin(), j.d), rot)
}

pub fn forward_kinematics(chain: &KinematicChain, q: &[f64]) -> Result<FkResult> {
    if q.len() != chain.dof() {
        return Err(Error::DimensionMismatch {
            expected: chain.dof(),
            got: q.len(),
        });
    }
    let mut frames = Vec::with_capacity(q.len() + 1);
    let mut t = chain.base;
    frames.push(t);
    for (j, &x) in chain.joints.iter().zip(q) {
        t = t.compose(&link_pose(j, x));
        frames.push(t);
    }
    let ee = t.compose(&chain.ee_offset);
    Ok(FkResult { ee, frames })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    #[serde(with = "crate::geom::serde_vec3")]
    pub center: Vec3,
    pub radius: f64,
    #[serde(default)]
    pub margin: f64,
}

impl Obstacle {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite())
            || !(self.margin >= 0.0 && self.margin.is_finite())
        {
            return Err(Error::invalid("obstacle needs radius > 0 and margin >= 0"));
        }
        if !self.center.iter().all(|x| x.is_finite()) {
            return Err(Error::invalid("obstacle center must be finite"));
        }
        Ok(())
    }

    /// How far `p` reaches into the inflated sphere, zero outside.
    pub fn penetration(&self, p: &Vec3, extra: f64) -> f64 {
        (self.radius + self.margin + extra - (p - self.center).norm()).max(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Term {
    JointLimits,
    Collision,
    Geometric,
    Posture,
    StepDistance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tier {
    pub terms: Vec<Term>,
    pub weight: f64,
}

/// Tiers in decreasing priority.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrioritySpec {
    pub tiers: Vec<Tier>,
}

/// Minimum weight ratio between consecutive tiers.
pub const TIER_SEPARATION: f64 = 1e3;

impl Default for PrioritySpec {
    fn default() -> Self {
        PrioritySpec {
            tiers: vec![
                Tier {
                    terms: vec![Term::JointLimits, Term::Collision],
                    weight: 1e6,
                },
                Tier {
                    terms: vec![Term::Geometric],
                    weight: 1e3,
                },
                Tier {
                    terms: vec![Term::Posture, Term::StepDistance],
                    weight: 1.0,
                },
            ],
        }
    }
}

impl PrioritySpec {
    pub fn validate(&self) -> Result<()> {
        if self.tiers.is_empty() || self.tiers.iter().any(|t| t.terms.is_empty()) {
            return Err(Error::invalid("priority tiers must be non-empty"));
        }
        for t in &self.tiers {
            if !(t.weight > 0.0 && t.weight.is_finite()) {
                return Err(Error::invalid("tier weights must be positive"));
            }
        }
        for w in self.tiers.windows(2) {
            if w[0].weight < TIER_SEPARATION * w[1].weight {
                return Err(Error::invalid(
                    "each tier weight must be at least 1e3 times the next",
                ));
            }
        }
        let all: Vec<Term> = self.tiers.iter().flat_map(|t| t.terms.clone()).collect();
        for (i, t) in all.iter().enumerate() {
            if all[..i].contains(t) {
                return Err(Error::invalid(format!("term {t:?} appears twice")));
            }
        }
        let hard = &self.tiers[0].terms;
        if !hard.contains(&Term::JointLimits) || !hard.contains(&Term::Collision) || hard.len() != 2
        {
            return Err(Error::invalid(
                "the first tier must hold joint limits and collision avoidance",
            ));
        }
        if !all.contains(&Term::Geometric) {
            return Err(Error::invalid("geometric constraints need a tier"));
        }
        Ok(())
    }

    /// Weight of a term, zero if it is not listed.
    pub fn weight(&self, term: Term) -> f64 {
        self.tiers
            .iter()
            .find(|t| t.terms.contains(&term))
            .map_or(0.0, |t| t.weight)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Nullspace samples tried before giving up.
    pub retries: usize,
    /// Iteration cap of one attempt, both stages together.
    pub max_iterations: usize,
    /// Extra clearance used while optimizing so the final check has slack.
    pub internal_margin: f64,
    /// Bound on the summed geometric residual of a converged solution.
    pub tolerance: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            retries: 32,
            max_iterations: 500,
            internal_margin: 1e-3,
            tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TierResiduals {
    pub hard: Vec<Residual>,
    pub geometric: Vec<Residual>,
    pub soft: Vec<Residual>,
}

fn total(r: &[Residual]) -> f64 {
    r.iter().map(|x| x.value).sum()
}

impl TierResiduals {
    pub fn hard_total(&self) -> f64 {
        total(&self.hard)
    }

    pub fn geometric_total(&self) -> f64 {
        total(&self.geometric)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub q: Vec<f64>,
    pub ee: Pose,
    pub residuals: TierResiduals,
    pub converged: bool,
    /// Iterations of the attempt that produced `q`.
    pub iterations: usize,
    pub attempts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryResult {
    pub waypoints: Vec<SolveResult>,
    /// First waypoint that did not converge.
    pub failed_at: Option<usize>,
}

impl TrajectoryResult {
    pub fn converged(&self) -> bool {
        self.failed_at.is_none()
    }
}

struct Problem<'a> {
    chain: &'a KinematicChain,
    nullspace: &'a NullspaceModel,
    constraints: &'a [GeometricConstraint],
    scene: &'a Scene,
    obstacles: &'a [Obstacle],
    priorities: &'a PrioritySpec,
    opts: &'a SolveOptions,
    q_prev: Option<&'a [f64]>,
}

fn quat_diff(target: &Rotation, r: &Rotation) -> [f64; 4] {
    let a = target.as_vector();
    let b = r.as_vector();
    let s = if a.dot(&b) < 0.0 { -1.0 } else { 1.0 };
    [
        s * a[0] - b[0],
        s * a[1] - b[1],
        s * a[2] - b[2],
        s * a[3] - b[3],
    ]
}

impl Problem<'_> {
    fn fk(&self, q: &[f64]) -> FkResult {
        forward_kinematics(self.chain, q).expect("joint count checked")
    }

    fn push_hard(&self, fk: &FkResult, out: &mut Vec<f64>) {
        let w = self.priorities.weight(Term::Collision);
        let pts = fk.collision_points();
        for o in self.obstacles {
            for p in &pts {
                out.push(w * o.penetration(p, self.opts.internal_margin));
            }
        }
    }

    fn push_soft(&self, q: &[f64], out: &mut Vec<f64>) {
        let wp = self.priorities.weight(Term::Posture);
        let ws = self.priorities.weight(Term::StepDistance);
        for (i, j) in self.chain.joints.iter().enumerate() {
            out.push(wp * (q[i] - 0.5 * (j.q_lo + j.q_hi)) / (j.q_hi - j.q_lo));
        }
        if let Some(prev) = self.q_prev {
            for (x, p) in q.iter().zip(prev) {
                out.push(ws * (x - p));
            }
        }
    }

    /// Tracks a fixed target pose, with posture and step terms.
    fn track(&self, q: &[f64], target: &Pose) -> DVector<f64> {
        let fk = self.fk(q);
        let w = self.priorities.weight(Term::Geometric);
        let mut r = vec![];
        self.push_hard(&fk, &mut r);
        r.extend(
            (fk.ee.translation - target.translation)
                .iter()
                .map(|x| w * x),
        );
        r.extend(
            quat_diff(&target.rotation, &fk.ee.rotation)
                .iter()
                .map(|x| w * x),
        );
        self.push_soft(q, &mut r);
        DVector::from_vec(r)
    }

    /// Distance to the nullspace itself, so the pose may slide along it.
    fn settle(&self, q: &[f64]) -> DVector<f64> {
        let fk = self.fk(q);
        let w = self.priorities.weight(Term::Geometric);
        let mut r = vec![];
        self.push_hard(&fk, &mut r);
        let u = fk.ee.translation;
        r.extend(
            (self.nullspace.project_translation(&u) - u)
                .iter()
                .map(|x| w * x),
        );
        let proj = self.nullspace.rotation.project(&fk.ee.rotation);
        r.extend(quat_diff(&proj, &fk.ee.rotation).iter().map(|x| w * x));
        DVector::from_vec(r)
    }

    fn evaluate(&self, q: Vec<f64>, iterations: usize, attempts: usize) -> SolveResult {
        let fk = self.fk(&q);
        let mut res = TierResiduals::default();
        res.hard.push(Residual {
            name: "joint_limits".into(),
            value: self.chain.limit_violation(&q),
        });
        let pts = fk.collision_points();
        for (i, o) in self.obstacles.iter().enumerate() {
            res.hard.push(Residual {
                name: format!("obstacle{i}"),
                value: pts
                    .iter()
                    .map(|p| o.penetration(p, 0.0))
                    .fold(0.0, f64::max),
            });
        }
        res.geometric.push(Residual {
            name: "nullspace.translation".into(),
            value: self.nullspace.dist_t(&fk.ee.translation),
        });
        res.geometric.push(Residual {
            name: "nullspace.rotation".into(),
            value: self.nullspace.dist_r(&fk.ee.rotation),
        });
        for (i, c) in self.constraints.iter().enumerate() {
            let value = constraint_residual(c, &fk.ee, self.scene).unwrap_or(f64::INFINITY);
            res.geometric.push(Residual {
                name: format!("c{i} {c}"),
                value,
            });
        }
        let mid = self.chain.mid_range();
        res.soft.push(Residual {
            name: "posture".into(),
            value: q
                .iter()
                .zip(&mid)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt(),
        });
        if let Some(prev) = self.q_prev {
            res.soft.push(Residual {
                name: "step".into(),
                value: q
                    .iter()
                    .zip(prev)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt(),
            });
        }
        let converged = res.hard_total() == 0.0 && res.geometric_total() <= self.opts.tolerance;
        SolveResult {
            q,
            ee: fk.ee,
            residuals: res,
            converged,
            iterations,
            attempts,
        }
    }

    fn attempt(&self, q0: &[f64], target: Option<&Pose>, attempts: usize) -> SolveResult {
        let project = |x: &mut DVector<f64>| {
            for (v, j) in x.iter_mut().zip(&self.chain.joints) {
                *v = v.clamp(j.q_lo, j.q_hi);
            }
        };
        let mut q = DVector::from_column_slice(q0);
        let mut iterations = 0;
        let budget = self.opts.max_iterations;
        if let Some(t) = target {
            let cfg = LmConfig {
                max_iterations: budget * 3 / 5,
                cost_floor: 1e-24,
                ..LmConfig::default()
            };
            let rep = minimize(q, |x| self.track(x.as_slice(), t), project, &cfg);
            iterations += rep.iterations;
            q = rep.params;
        }
        let cfg = LmConfig {
            max_iterations: budget - iterations,
            cost_floor: 1e-24,
            ..LmConfig::default()
        };
        let rep = minimize(q, |x| self.settle(x.as_slice()), project, &cfg);
        iterations += rep.iterations;
        self.evaluate(rep.params.as_slice().to_vec(), iterations, attempts)
    }

    fn better(a: &SolveResult, b: &SolveResult) -> bool {
        let key = |r: &SolveResult| (r.residuals.hard_total(), r.residuals.geometric_total());
        let (ha, ga) = key(a);
        let (hb, gb) = key(b);
        (ha == 0.0 && hb != 0.0) || ((ha == 0.0) == (hb == 0.0) && (ha, ga) < (hb, gb))
    }

    fn run(&self, rng: &mut ChaCha8Rng) -> Result<SolveResult> {
        let home = self
            .q_prev
            .map_or_else(|| self.chain.home(), |p| p.to_vec());
        // first attempt: settle from the start configuration
        let mut best = self.attempt(&home, None, 1);
        if best.converged {
            return Ok(best);
        }
        let spec = SampleSpec::default();
        for k in 1..self.opts.retries {
            let target = sample_pose_with(self.nullspace, &spec, rng)?;
            let mut q0 = home.clone();
            if k > 1 {
                for x in q0.iter_mut() {
                    *x += rng.random_range(-0.5..0.5);
                }
            }
            let blocked = self
                .obstacles
                .iter()
                .any(|o| o.penetration(&target.translation, self.opts.internal_margin) > 0.0);
            if blocked {
                continue;
            }
            let mut r = self.attempt(&q0, Some(&target), k + 1);
            if r.converged {
                return Ok(r);
            }
            if Self::better(&r, &best) {
                r.attempts = k + 1;
                best = r;
            }
        }
        best.attempts = self.opts.retries;
        Ok(best)
    }
}

/// Nullspace of the skill with its constraints evaluated on `scene` when
/// the scene resolves every fixed shape, otherwise the stored one.
fn effective(skill: &SkillModel, scene: &Scene) -> Result<SkillModel> {
    if skill.constraints.is_empty()
        || scene.is_empty()
        || skill
            .constraints
            .iter()
            .any(|c| scene.shape(&c.fixed).is_err())
    {
        return Ok(skill.clone());
    }
    let mut s = skill.clone();
    s.scene = Scene::from_shapes(
        &skill
            .constraints
            .iter()
            .map(|c| scene.shape(&c.fixed))
            .collect::<Result<Vec<_>>>()?,
    );
    s.nullspace = s.derived_nullspace()?;
    Ok(s)
}

fn check_inputs(
    skill: &SkillModel,
    chain: &KinematicChain,
    obstacles: &[Obstacle],
    p: &PrioritySpec,
) -> Result<()> {
    skill.nullspace.validate()?;
    chain.validate()?;
    p.validate()?;
    obstacles.iter().try_for_each(Obstacle::validate)
}

pub fn solve(
    skill: &SkillModel,
    chain: &KinematicChain,
    scene: &Scene,
    obstacles: &[Obstacle],
    priorities: &PrioritySpec,
    seed: u64,
) -> Result<SolveResult> {
    solve_with(
        skill,
        chain,
        scene,
        obstacles,
        priorities,
        seed,
        &SolveOptions::default(),
    )
}

#[allow(clippy::too_many_arguments)]
pub fn solve_with(
    skill: &SkillModel,
    chain: &KinematicChain,
    scene: &Scene,
    obstacles: &[Obstacle],
    priorities: &PrioritySpec,
    seed: u64,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    check_inputs(skill, chain, obstacles, priorities)?;
    let s = effective(skill, scene)?;
    let problem = Problem {
        chain,
        nullspace: &s.nullspace,
        constraints: &s.constraints,
        scene: &s.scene,
        obstacles,
        priorities,
        opts,
        q_prev: None,
    };
    problem.run(&mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn solve_trajectory(
    skill: &SkillModel,
    chain: &KinematicChain,
    scene: &Scene,
    obstacles: &[Obstacle],
    priorities: &PrioritySpec,
    seed: u64,
) -> Result<TrajectoryResult> {
    solve_trajectory_with(
        skill,
        chain,
        scene,
        obstacles,
        priorities,
        seed,
        &SolveOptions::default(),
    )
}

#[allow(clippy::too_many_arguments)]
pub fn solve_trajectory_with(
    skill: &SkillModel,
    chain: &KinematicChain,
    scene: &Scene,
    obstacles: &[Obstacle],
    priorities: &PrioritySpec,
    seed: u64,
    opts: &SolveOptions,
) -> Result<TrajectoryResult> {
    check_inputs(skill, chain, obstacles, priorities)?;
    let s = effective(skill, scene)?;
    let n = s
        .trajectory
        .as_ref()
        .ok_or(Error::NotATrajectory)?
        .params
        .len();
    let mut waypoints: Vec<SolveResult> = Vec::with_capacity(n);
    let mut failed_at = None;
    for k in 0..n {
        let nullspace = s.waypoint_nullspace(k)?;
        let prev = waypoints.last().map(|r| r.q.clone());
        let problem = Problem {
            chain,
            nullspace: &nullspace,
            constraints: &s.constraints,
            scene: &s.scene,
            obstacles,
            priorities,
            opts,
            q_prev: prev.as_deref(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let r = problem.run(&mut rng)?;
        if !r.converged && failed_at.is_none() {
            failed_at = Some(k);
        }
        waypoints.push(r);
    }
    Ok(TrajectoryResult {
        waypoints,
        failed_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_two_link_fk() {
        let c = KinematicChain::planar_two_link();
        let p = forward_kinematics(&c, &[0.0, 0.0]).unwrap().ee.translation;
        assert!((p - Vec3::new(2.0, 0.0, 0.0)).norm() < 1e-15);
        let p = forward_kinematics(&c, &[FRAC_PI_2, 0.0])
            .unwrap()
            .ee
            .translation;
        assert!((p - Vec3::new(0.0, 2.0, 0.0)).norm() < 1e-15);
        assert!(matches!(
            forward_kinematics(&c, &[0.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn ur5e_zero_configuration() {
        // stretched out along -x at shoulder height, wrist offsets in y and z
        let c = KinematicChain::ur5e();
        let fk = forward_kinematics(&c, &[0.0; 6]).unwrap();
        let p = fk.ee.translation;
        let expected = Vec3::new(-0.8172, -0.2329, 0.0628);
        assert!((p - expected).norm() < 1e-12, "{p}");
        assert_eq!(fk.frames.len(), 7);
    }

    #[test]
    fn default_priorities_are_valid() {
        PrioritySpec::default().validate().unwrap();
        let mut p = PrioritySpec::default();
        p.tiers[1].weight = 1e4;
        assert!(p.validate().is_err());
        let mut p = PrioritySpec::default();
        p.tiers.swap(0, 1);
        assert!(p.validate().is_err());
    }

    #[test]
    fn penetration_is_zero_outside() {
        let o = Obstacle {
            center: Vec3::zeros(),
            radius: 0.1,
            margin: 0.02,
        };
        assert_eq!(o.penetration(&Vec3::new(0.2, 0.0, 0.0), 0.0), 0.0);
        assert!((o.penetration(&Vec3::new(0.1, 0.0, 0.0), 0.0) - 0.02).abs() < 1e-15);
    }
}
