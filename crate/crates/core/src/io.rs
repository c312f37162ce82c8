//! File formats: line-oriented pose recordings and JSON for everything else.
//!
//! A recording looks like
//!
//! ```text
//! # free-form comments, ignored by the parser
//! units meters radians
//! kind continuous
//! frames table gripper
//! 0 table 0 0 0 1 0 0 0
//! 0 gripper 0.45 0 0.05 1 0 0 0
//! ```
//!
//! Every record is `timestamp frame x y z qw qx qy qz`.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::{DemoKind, Demonstration};
use crate::geom::{relative_pose, Pose, Rotation, Vec3};
use crate::manifolds::NullspaceModel;
use crate::solver::Obstacle;

/// Tolerance on quaternion norms in loaded files.
pub const QUAT_TOL: f64 = 1e-6;

const TRUTH_PREFIX: &str = "truth ";

#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub timestamp: f64,
    pub frame: String,
    pub pose: Pose,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Recording {
    pub kind: DemoKind,
    pub frames: Vec<String>,
    pub records: Vec<Record>,
    /// Comment lines without the leading `#`.
    pub comments: Vec<String>,
}

fn kind_name(k: DemoKind) -> &'static str {
    match k {
        DemoKind::Discrete => "discrete",
        DemoKind::Continuous => "continuous",
    }
}

fn num(line: usize, s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::parse(line, format!("expected a number, found `{s}`")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite number `{s}`")));
    }
    Ok(v)
}

impl Recording {
    pub fn new(kind: DemoKind, frames: Vec<String>) -> Self {
        Recording {
            kind,
            frames,
            records: vec![],
            comments: vec![],
        }
    }

    pub fn push(&mut self, timestamp: f64, frame: &str, pose: Pose) {
        self.records.push(Record {
            timestamp,
            frame: frame.into(),
            pose: Pose {
                timestamp: Some(timestamp),
                ..pose
            },
        });
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut frames: Option<Vec<String>> = None;
        let mut units = false;
        let mut records = vec![];
        let mut comments = vec![];
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.trim();
            if l.is_empty() {
                continue;
            }
            if let Some(c) = l.strip_prefix('#') {
                comments.push(c.strip_prefix(' ').unwrap_or(c).to_string());
                continue;
            }
            let f: Vec<&str> = l.split_whitespace().collect();
            let header_done = units && kind.is_some() && frames.is_some();
            match f[0] {
                "units" if !header_done => {
                    if f[1..] != ["meters", "radians"] {
                        return Err(Error::parse(line, "units must be `meters radians`"));
                    }
                    units = true;
                }
                "kind" if !header_done => {
                    kind = Some(match f.get(1..) {
                        Some(["discrete"]) => DemoKind::Discrete,
                        Some(["continuous"]) => DemoKind::Continuous,
                        _ => {
                            return Err(Error::parse(
                                line,
                                "kind must be `discrete` or `continuous`",
                            ))
                        }
                    });
                }
                "frames" if !header_done => {
                    if f.len() < 2 {
                        return Err(Error::parse(line, "frames needs at least one name"));
                    }
                    frames = Some(f[1..].iter().map(|s| s.to_string()).collect());
                }
                _ if !header_done => {
                    return Err(Error::parse(
                        line,
                        "record before the units, kind and frames header",
                    ));
                }
                _ => {
                    if f.len() != 9 {
                        return Err(Error::parse(
                            line,
                            format!(
                                "expected `timestamp frame x y z qw qx qy qz` (9 fields), found {}",
                                f.len()
                            ),
                        ));
                    }
                    let frame = f[1].to_string();
                    if !frames.as_ref().is_some_and(|fs| fs.contains(&frame)) {
                        return Err(Error::parse(line, format!("undeclared frame `{frame}`")));
                    }
                    let t = num(line, f[0])?;
                    let v: Vec<f64> = f[2..].iter().map(|s| num(line, s)).collect::<Result<_>>()?;
                    let rotation = Rotation::from_wxyz([v[3], v[4], v[5], v[6]], QUAT_TOL)
                        .map_err(|e| Error::parse(line, e.to_string()))?;
                    let pose = Pose::new(Vec3::new(v[0], v[1], v[2]), rotation).with_timestamp(t);
                    records.push(Record {
                        timestamp: t,
                        frame,
                        pose,
                    });
                }
            }
        }
        let (Some(kind), Some(frames), true) = (kind, frames, units) else {
            return Err(Error::parse(
                text.lines().count().max(1),
                "missing units, kind or frames header",
            ));
        };
        Ok(Recording {
            kind,
            frames,
            records,
            comments,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.comments {
            let _ = writeln!(s, "# {c}");
        }
        let _ = writeln!(s, "units meters radians");
        let _ = writeln!(s, "kind {}", kind_name(self.kind));
        let _ = writeln!(s, "frames {}", self.frames.join(" "));
        for r in &self.records {
            let t = &r.pose.translation;
            let [w, x, y, z] = r.pose.rotation.wxyz();
            let _ = writeln!(
                s,
                "{:?} {} {:?} {:?} {:?} {:?} {:?} {:?} {:?}",
                r.timestamp, r.frame, t.x, t.y, t.z, w, x, y, z
            );
        }
        s
    }

    /// Poses of one frame in recording order.
    pub fn stream(&self, frame: &str) -> Result<Vec<Pose>> {
        if !self.frames.iter().any(|f| f == frame) {
            return Err(Error::UnknownFrame(frame.into()));
        }
        Ok(self
            .records
            .iter()
            .filter(|r| r.frame == frame)
            .map(|r| r.pose)
            .collect())
    }

    /// Ground truth embedded by the generator, if any.
    pub fn ground_truth(&self) -> Option<NullspaceModel> {
        self.comments
            .iter()
            .find_map(|c| c.strip_prefix(TRUTH_PREFIX))
            .and_then(|j| serde_json::from_str(j).ok())
    }

    pub fn set_ground_truth(&mut self, n: &NullspaceModel) {
        self.comments.retain(|c| !c.starts_with(TRUTH_PREFIX));
        let json = serde_json::to_string(n).expect("nullspace serializes");
        self.comments.push(format!("{TRUTH_PREFIX}{json}"));
    }
}

pub fn load_recording(path: impl AsRef<Path>) -> Result<Recording> {
    Recording::parse(&read_text(path)?)
}

pub fn save_recording(path: impl AsRef<Path>, r: &Recording) -> Result<()> {
    write_text(path, &r.to_text())
}

/// Poses of `constrained` relative to `fixed`. Each constrained record is
/// paired with the latest fixed record at or before it, or with the first
/// fixed record when none precedes it.
pub fn derive_demonstration(
    rec: &Recording,
    fixed: &str,
    constrained: &str,
) -> Result<Demonstration> {
    let f = rec.stream(fixed)?;
    let c = rec.stream(constrained)?;
    if f.is_empty() || c.is_empty() {
        return Err(Error::EmptyDemonstration);
    }
    let mut j = 0;
    let mut samples = Vec::with_capacity(c.len());
    for p in &c {
        let t = p.timestamp.unwrap_or(0.0);
        while j + 1 < f.len() && f[j + 1].timestamp.unwrap_or(0.0) <= t {
            j += 1;
        }
        let mut rel = relative_pose(&f[j], p);
        rel.timestamp = p.timestamp;
        samples.push(rel);
    }
    let d = Demonstration {
        samples,
        kind: rec.kind,
        fixed: fixed.into(),
        constrained: constrained.into(),
    };
    d.validate()?;
    Ok(d)
}

pub fn read_text(path: impl AsRef<Path>) -> Result<String> {
    let p = path.as_ref();
    std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let p = path.as_ref();
    std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Syntax | serde_json::error::Category::Eof => {
            Error::parse(e.line(), e.to_string())
        }
        _ => Error::Schema(e.to_string()),
    })
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("in-memory values serialize");
    s.push('\n');
    s
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    from_json(&read_text(path)?)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, v: &T) -> Result<()> {
    write_text(path, &to_json(v))
}

/// Obstacle file: a bare list or an object with an `obstacles` list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObstacleFile {
    List(Vec<Obstacle>),
    Wrapped { obstacles: Vec<Obstacle> },
}

impl ObstacleFile {
    pub fn into_vec(self) -> Vec<Obstacle> {
        match self {
            ObstacleFile::List(v) | ObstacleFile::Wrapped { obstacles: v } => v,
        }
    }
}

/// Sampled poses written by the `sample` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseSet {
    pub poses: Vec<Pose>,
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# hello\nunits meters radians\nkind continuous\nframes a b\n\
        0 a 0 0 0 1 0 0 0\n0 b 1 2 3 1 0 0 0\n0.5 b 1 2 4 0 1 0 0\n";

    #[test]
    fn parses_and_round_trips() {
        let r = Recording::parse(SAMPLE).unwrap();
        assert_eq!(r.records.len(), 3);
        assert_eq!(r.comments, vec!["hello".to_string()]);
        let again = Recording::parse(&r.to_text()).unwrap();
        assert_eq!(again, r);
    }

    #[test]
    fn static_fixed_frame_gives_constrained_stream() {
        let r = Recording::parse(SAMPLE).unwrap();
        let d = derive_demonstration(&r, "a", "b").unwrap();
        assert_eq!(d.samples.len(), 2);
        assert_eq!(d.samples[1].translation, Vec3::new(1.0, 2.0, 4.0));
        assert!(matches!(
            derive_demonstration(&r, "a", "c"),
            Err(Error::UnknownFrame(_))
        ));
    }

    #[test]
    fn three_component_rotation_is_a_parse_error() {
        let bad = SAMPLE.replace("0 b 1 2 3 1 0 0 0", "0 b 1 2 3 0 0 0");
        match Recording::parse(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_unit_quaternion_rejected() {
        let bad = SAMPLE.replace("0 b 1 2 3 1 0 0 0", "0 b 1 2 3 1.001 0 0 0");
        assert!(matches!(
            Recording::parse(&bad),
            Err(Error::Parse { line: 6, .. })
        ));
    }

    #[test]
    fn obstacle_file_forms() {
        let a: ObstacleFile = from_json(r#"[{"center":[0,0,0],"radius":0.1}]"#).unwrap();
        let b: ObstacleFile = from_json(r#"{"obstacles":[]}"#).unwrap();
        assert_eq!(a.into_vec().len(), 1);
        assert!(b.into_vec().is_empty());
    }
}
