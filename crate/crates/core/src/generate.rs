//! Synthetic demonstrations drawn from a known nullspace.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::DemoKind;
use crate::geom::{Pose, Rotation, Vec3};
use crate::io::Recording;
use crate::manifolds::{
    sample_pose_with, sample_translation, CoordKind, ExtentBounds, NullspaceModel, RotationKind,
    SampleSpec, TranslationManifold,
};
use crate::skills::{demo_scene, skill_template};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// A built-in skill on the demo scene.
    Skill {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
    /// An explicit nullspace in the fixed frame.
    Nullspace {
        model: NullspaceModel,
        kind: DemoKind,
    },
}

fn default_fixed() -> String {
    "table".into()
}

fn default_constrained() -> String {
    "gripper".into()
}

fn default_dt() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub source: Source,
    pub samples: usize,
    #[serde(default)]
    pub sigma_t: f64,
    #[serde(default)]
    pub sigma_r: f64,
    /// Sampling ranges for coordinates the nullspace leaves unbounded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranges: Option<ExtentBounds>,
    #[serde(default = "default_fixed")]
    pub fixed_frame: String,
    #[serde(default = "default_constrained")]
    pub constrained_frame: String,
    /// World pose of the fixed frame.
    #[serde(default)]
    pub fixed_pose: Pose,
    /// Time between samples in seconds.
    #[serde(default = "default_dt")]
    pub dt: f64,
}

impl GeneratorSpec {
    pub fn skill(name: &str, samples: usize) -> Self {
        GeneratorSpec {
            source: Source::Skill {
                name: name.into(),
                params: BTreeMap::new(),
            },
            samples,
            sigma_t: 0.0,
            sigma_r: 0.0,
            ranges: None,
            fixed_frame: default_fixed(),
            constrained_frame: default_constrained(),
            fixed_pose: Pose::identity(),
            dt: default_dt(),
        }
    }

    pub fn nullspace(model: NullspaceModel, kind: DemoKind, samples: usize) -> Self {
        GeneratorSpec {
            source: Source::Nullspace { model, kind },
            ..Self::skill("", samples)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::invalid("sample count must be positive"));
        }
        if !(self.sigma_t >= 0.0
            && self.sigma_t.is_finite()
            && self.sigma_r >= 0.0
            && self.sigma_r.is_finite())
        {
            return Err(Error::invalid(
                "noise levels must be finite and non-negative",
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt must be positive"));
        }
        if self.fixed_frame == self.constrained_frame
            || self.fixed_frame.contains(char::is_whitespace)
        {
            return Err(Error::invalid(
                "frame names must differ and contain no whitespace",
            ));
        }
        if self.constrained_frame.contains(char::is_whitespace) {
            return Err(Error::invalid("frame names must contain no whitespace"));
        }
        Ok(())
    }

    /// Ground-truth nullspace and demonstration kind.
    pub fn truth(&self) -> Result<(NullspaceModel, DemoKind)> {
        match &self.source {
            Source::Skill { name, params } => {
                let s = skill_template(name, &demo_scene(), params)?;
                Ok((s.nullspace, s.kind))
            }
            Source::Nullspace { model, kind } => {
                model.validate()?;
                Ok((model.clone(), *kind))
            }
        }
    }
}

fn lerp(a: f64, b: f64, s: f64) -> f64 {
    a + (b - a) * s
}

/// Noise-free samples along the motion coordinate of a trajectory-type
/// nullspace, other coordinates held at one random draw. `None` if the
/// nullspace has no such coordinate.
fn swept<R: Rng>(
    n: &NullspaceModel,
    spec: &SampleSpec,
    count: usize,
    rng: &mut R,
) -> Result<Option<Vec<Pose>>> {
    let tilt = n.rotation.tilt_range().filter(|iv| iv.width() > 0.0);
    let drives_translation = matches!(
        n.translation,
        TranslationManifold::Line { .. } | TranslationManifold::Circle { .. }
    );
    if !drives_translation
        && !(matches!(n.translation, TranslationManifold::Point { .. }) && tilt.is_some())
    {
        return Ok(None);
    }
    let base = n.translation.coords(&sample_translation(n, spec, rng)?);
    let azimuth = rng.random_range(-PI..PI);
    let spin = rng.random_range(-PI..PI);
    let range0 = n
        .bound(0)
        .or_else(|| spec.ranges.as_ref().and_then(|r| r.get(0)));
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let s = if count > 1 {
            i as f64 / (count - 1) as f64
        } else {
            0.0
        };
        let mut c = base.clone();
        if drives_translation {
            c[0] = match (range0, n.translation.coord_kinds()[0]) {
                (Some(iv), _) => lerp(iv.lo, iv.hi, s),
                (None, CoordKind::Angular) => base[0] + TAU * i as f64 / count as f64,
                (None, CoordKind::Linear) => {
                    return Err(Error::UnboundedSampleDomain(
                        "line parameter has no bounds".into(),
                    ))
                }
            };
        }
        let t = n.translation.point_at(&c);
        let r = match (&n.rotation.kind, tilt) {
            (RotationKind::OneAngle { .. }, Some(iv)) => {
                n.rotation.member(lerp(iv.lo, iv.hi, s), azimuth, spin)
            }
            (RotationKind::FullSO3, _) => {
                Rotation::from_scaled_axis(Vec3::new(azimuth, spin, 0.0) * 0.5)
            }
            _ => n.rotation.member(
                n.rotation.tilt_range().map_or(0.0, |iv| iv.lo),
                azimuth,
                spin,
            ),
        };
        out.push(Pose::new(t, r));
    }
    Ok(Some(out))
}

/// Recording of the fixed frame and the constrained frame, with the
/// constrained poses drawn from the nullspace and perturbed by Gaussian
/// noise. The ground truth is embedded as a comment.
pub fn generate_demonstration(spec: &GeneratorSpec, seed: u64) -> Result<Recording> {
    spec.validate()?;
    let (truth, kind) = spec.truth()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample_spec = SampleSpec {
        ranges: spec.ranges.clone(),
    };
    let clean = match kind {
        DemoKind::Continuous => swept(&truth, &sample_spec, spec.samples, &mut rng)?,
        DemoKind::Discrete => None,
    };
    let clean = match clean {
        Some(v) => v,
        None => (0..spec.samples)
            .map(|_| sample_pose_with(&truth, &sample_spec, &mut rng))
            .collect::<Result<_>>()?,
    };
    let nt = Normal::new(0.0, spec.sigma_t).map_err(|e| Error::invalid(e.to_string()))?;
    let nr = Normal::new(0.0, spec.sigma_r).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rec = Recording::new(
        kind,
        vec![spec.fixed_frame.clone(), spec.constrained_frame.clone()],
    );
    rec.comments.push(format!(
        "generated: {} samples, sigma_t {:?} m, sigma_r {:?} rad, seed {seed}",
        spec.samples, spec.sigma_t, spec.sigma_r
    ));
    rec.set_ground_truth(&truth);
    for (i, p) in clean.iter().enumerate() {
        let dt = Vec3::new(
            nt.sample(&mut rng),
            nt.sample(&mut rng),
            nt.sample(&mut rng),
        );
        let dr = Vec3::new(
            nr.sample(&mut rng),
            nr.sample(&mut rng),
            nr.sample(&mut rng),
        );
        let noisy = Pose::new(
            p.translation + dt,
            Rotation::from_scaled_axis(dr).compose(&p.rotation),
        );
        let t = i as f64 * spec.dt;
        rec.push(t, &spec.fixed_frame, spec.fixed_pose);
        rec.push(t, &spec.constrained_frame, spec.fixed_pose.compose(&noisy));
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::derive_demonstration;

    #[test]
    fn noiseless_grasp_samples_are_members() {
        let rec = generate_demonstration(&GeneratorSpec::skill("grasp", 100), 4).unwrap();
        let truth = rec.ground_truth().unwrap();
        let d = derive_demonstration(&rec, "table", "gripper").unwrap();
        for s in &d.samples {
            assert!(truth.dist_t(&s.translation) < 1e-12);
            assert!(truth.dist_r(&s.rotation) < 1e-12);
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let mut spec = GeneratorSpec::skill("pour", 20);
        spec.sigma_t = 1e-3;
        spec.sigma_r = 1e-3;
        let a = generate_demonstration(&spec, 9).unwrap().to_text();
        let b = generate_demonstration(&spec, 9).unwrap().to_text();
        assert_eq!(a, b);
        assert_ne!(a, generate_demonstration(&spec, 10).unwrap().to_text());
    }

    #[test]
    fn pour_sweeps_monotonically() {
        let rec = generate_demonstration(&GeneratorSpec::skill("pour", 13), 2).unwrap();
        let d = derive_demonstration(&rec, "table", "gripper").unwrap();
        let tilts: Vec<f64> = d
            .samples
            .iter()
            .map(|p| p.rotation.apply(&Vec3::z()).z.clamp(-1.0, 1.0).acos())
            .collect();
        assert!(tilts.windows(2).all(|w| w[1] > w[0]));
        assert!((tilts[12] - 1.2).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = GeneratorSpec::skill("grasp", 0);
        assert!(generate_demonstration(&s, 0).is_err());
        s.samples = 3;
        s.sigma_t = -1.0;
        assert!(generate_demonstration(&s, 0).is_err());
    }
}
