use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use geoskill::fitting::{BoundsConfig, CandidateRow, FitConfig, ModelType, Selection};
use geoskill::generate::{generate_demonstration, GeneratorSpec};
use geoskill::geom::AxisSelector;
use geoskill::io::{
    derive_demonstration, load_recording, read_json, read_text, save_recording, write_json,
    write_text, ObstacleFile, PoseSet, Recording,
};
use geoskill::manifolds::{sample_pose_with, translation_grid, SampleSpec};
use geoskill::mapping::MapOptions;
use geoskill::skills::{
    demo_scene, edit_parameter, infer_constraints, learn_skill, skill_template, SkillModel,
};
use geoskill::solver::{
    solve, solve_trajectory, KinematicChain, PrioritySpec, SolveResult, TrajectoryResult,
};
use geoskill::{constraints::Scene, fitting::DemoKind, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "geoskill",
    version,
    about = "Learn geometric skill nullspaces from demonstrations and execute them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic demonstration recording.
    DemoGen {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
    },
    /// Fit a nullspace to a recording and write a skill file.
    Fit {
        #[arg(long)]
        recording: PathBuf,
        #[arg(long)]
        fixed: String,
        #[arg(long)]
        constrained: String,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        selector: Option<String>,
        /// Skill name; defaults to the recording file stem.
        #[arg(long)]
        name: Option<String>,
        /// Also write the selection table and residual history.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Map a fitted nullspace to geometric constraints on a scene.
    Infer {
        #[arg(long)]
        skillfile: PathBuf,
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        pos_tol: Option<f64>,
        /// Angular tolerance in degrees.
        #[arg(long)]
        ang_tol: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Change skill parameters.
    Edit {
        #[arg(long)]
        skillfile: PathBuf,
        /// `name=value`, repeatable.
        #[arg(long = "set", required = true)]
        sets: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw poses from a skill nullspace.
    Sample {
        #[arg(long)]
        skillfile: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a skill on a robot chain.
    Solve {
        #[arg(long)]
        skillfile: PathBuf,
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        obstacles: Option<PathBuf>,
        #[arg(long)]
        priorities: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Flatten an artifact to CSV.
    PlotData {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a built-in skill template.
    Template {
        #[arg(long)]
        skill: String,
        /// `name=value`, repeatable.
        #[arg(long = "set")]
        sets: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the demo scene and the default robot chain.
    Defaults {
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long)]
        chain: Option<PathBuf>,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    kind: String,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::Schema(_) | Error::Io(_) => EXIT_PARSE,
            _ => 1,
        };
        Failure {
            code,
            kind: e.kind().into(),
            message: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        kind: "usage".into(),
        message: msg.into(),
    }
}

fn infeasible(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INFEASIBLE,
        kind: "infeasible".into(),
        message: msg.into(),
    }
}

type Outcome = Result<(), Failure>;

fn parse_sets(sets: &[String]) -> Result<Vec<(String, f64)>, Failure> {
    sets.iter()
        .map(|s| {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| usage(format!("expected name=value, got `{s}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| usage(format!("`{v}` is not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

/// Everything `fit --report` writes.
#[derive(Serialize, Deserialize)]
struct FitReport {
    chosen: ModelType,
    rms: f64,
    table: Vec<CandidateRow>,
    residuals: Vec<f64>,
    cost_history: Vec<f64>,
}

fn print_selection(sel: &Selection) {
    println!("{:<28} {:>12}  chosen", "model", "rms");
    for row in &sel.table {
        let rms = row
            .rms
            .map_or_else(|| "-".to_string(), |r| format!("{r:.3e}"));
        let note = row
            .note
            .as_deref()
            .map(|n| format!("  ({n})"))
            .unwrap_or_default();
        println!(
            "{:<28} {:>12}  {}{note}",
            row.model_type.to_string(),
            rms,
            if row.chosen { "*" } else { "" }
        );
    }
}

fn demo_gen(spec: &Path, out: &Path, seed: u64) -> Outcome {
    let spec: GeneratorSpec = read_json(spec)?;
    let rec = generate_demonstration(&spec, seed)?;
    save_recording(out, &rec)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn fit(
    recording: &Path,
    fixed: &str,
    constrained: &str,
    tau: Option<f64>,
    lambda: Option<f64>,
    selector: Option<&str>,
    name: Option<&str>,
    report: Option<&Path>,
    out: &Path,
) -> Outcome {
    let mut cfg = FitConfig::default();
    if let Some(t) = tau {
        cfg.tau = t;
    }
    if let Some(l) = lambda {
        cfg.lambda = l;
    }
    if let Some(s) = selector {
        cfg.selector = s
            .parse::<AxisSelector>()
            .map_err(|e| usage(e.to_string()))?;
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let rec = load_recording(recording)?;
    let d = derive_demonstration(&rec, fixed, constrained)?;
    let stem = recording
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("skill");
    let (skill, sel) = learn_skill(name.unwrap_or(stem), &d, &cfg, &BoundsConfig::default())?;
    print_selection(&sel);
    if let Some(p) = report {
        write_json(
            p,
            &FitReport {
                chosen: sel.result.model_type,
                rms: sel.result.rms,
                table: sel.table.clone(),
                residuals: sel.result.residuals.clone(),
                cost_history: sel.result.cost_history.clone(),
            },
        )?;
    }
    write_json(out, &skill)?;
    Ok(())
}

fn infer(
    skillfile: &Path,
    scene: &Path,
    pos_tol: Option<f64>,
    ang_tol: Option<f64>,
    out: &Path,
) -> Outcome {
    let skill: SkillModel = read_json(skillfile)?;
    let scene: Scene = read_json(scene)?;
    scene.validate()?;
    let mut opts = MapOptions::default();
    if let Some(t) = pos_tol {
        opts.pos_tol = t;
    }
    if let Some(a) = ang_tol {
        opts.ang_tol = a.to_radians();
    }
    let (inferred, candidates) = infer_constraints(&skill, &scene, &opts)?;
    for (i, c) in candidates.iter().enumerate().take(10) {
        let rows: Vec<String> = c.constraints.iter().map(|x| x.to_string()).collect();
        println!(
            "{:>2}. mismatch {:.3}  {}",
            i + 1,
            c.mismatch,
            rows.join(" + ")
        );
    }
    write_json(out, &inferred)?;
    Ok(())
}

fn edit(skillfile: &Path, sets: &[String], out: &Path) -> Outcome {
    let mut skill: SkillModel = read_json(skillfile)?;
    for (k, v) in parse_sets(sets)? {
        skill = edit_parameter(&skill, &k, v)?;
    }
    write_json(out, &skill)?;
    Ok(())
}

fn sample(skillfile: &Path, count: usize, seed: u64, out: &Path) -> Outcome {
    let skill: SkillModel = read_json(skillfile)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let poses = (0..count)
        .map(|_| sample_pose_with(&skill.nullspace, &SampleSpec::default(), &mut rng))
        .collect::<geoskill::Result<Vec<_>>>()?;
    write_json(out, &PoseSet { poses })?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SolveOutput {
    Trajectory(TrajectoryResult),
    Single(SolveResult),
}

#[allow(clippy::too_many_arguments)]
fn run_solve(
    skillfile: &Path,
    chain: &Path,
    scene: &Path,
    obstacles: Option<&Path>,
    priorities: Option<&Path>,
    seed: u64,
    out: &Path,
) -> Outcome {
    let skill: SkillModel = read_json(skillfile)?;
    let chain: KinematicChain = read_json(chain)?;
    let scene: Scene = read_json(scene)?;
    let obstacles = match obstacles {
        Some(p) => read_json::<ObstacleFile>(p)?.into_vec(),
        None => vec![],
    };
    let priorities: PrioritySpec = match priorities {
        Some(p) => read_json(p)?,
        None => PrioritySpec::default(),
    };
    if skill.kind == DemoKind::Continuous && skill.trajectory.is_some() {
        let t = solve_trajectory(&skill, &chain, &scene, &obstacles, &priorities, seed)?;
        write_json(out, &SolveOutput::Trajectory(t.clone()))?;
        println!("{} waypoints", t.waypoints.len());
        if let Some(k) = t.failed_at {
            return Err(infeasible(format!("waypoint {k} has no feasible solution")));
        }
    } else {
        let r = solve(&skill, &chain, &scene, &obstacles, &priorities, seed)?;
        write_json(out, &SolveOutput::Single(r.clone()))?;
        println!(
            "converged {}  geometric residual {:.3e}  attempts {}",
            r.converged,
            r.residuals.geometric_total(),
            r.attempts
        );
        if !r.converged {
            return Err(infeasible(
                "no feasible configuration within the retry budget",
            ));
        }
    }
    Ok(())
}

fn csv_of(header: &[String], rows: &[Vec<f64>]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(vec![]);
    let io = |e: csv::Error| Failure::from(Error::Io(e.to_string()));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r.iter().map(|x| format!("{x:?}")))
            .map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Failure::from(Error::Io(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn pose_row(p: &geoskill::geom::Pose) -> Vec<f64> {
    let t = p.translation;
    let mut row = vec![t.x, t.y, t.z];
    row.extend(p.rotation.wxyz());
    row
}

fn recording_table(rec: &Recording) -> (Vec<String>, Vec<Vec<f64>>) {
    let rows = rec
        .records
        .iter()
        .map(|r| {
            let frame = rec.frames.iter().position(|f| *f == r.frame).unwrap_or(0) as f64;
            let mut row = vec![r.timestamp, frame];
            row.extend(pose_row(&r.pose));
            row
        })
        .collect();
    (
        names(&["t", "frame", "x", "y", "z", "qw", "qx", "qy", "qz"]),
        rows,
    )
}

/// Nullspace grid points (series 0) and trajectory waypoints (series 1).
fn skill_table(s: &SkillModel) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut rows = vec![];
    let grid = translation_grid(
        &s.nullspace.translation,
        s.nullspace.bounds.as_ref(),
        15,
        0.2,
    );
    for (i, p) in grid.iter().enumerate() {
        rows.push(vec![0.0, i as f64, p.x, p.y, p.z, f64::NAN]);
    }
    if let Some(t) = &s.trajectory {
        for (k, v) in t.params.iter().enumerate() {
            if let Ok(n) = s.waypoint_nullspace(k) {
                let p = n.translation.point_at(&vec![0.0; n.translation.dims()]);
                rows.push(vec![1.0, k as f64, p.x, p.y, p.z, *v]);
            }
        }
    }
    (names(&["series", "index", "x", "y", "z", "param"]), rows)
}

fn solve_row(i: usize, r: &SolveResult) -> Vec<f64> {
    let mut row = vec![
        i as f64,
        f64::from(u8::from(r.converged)),
        r.residuals.hard_total(),
        r.residuals.geometric_total(),
    ];
    row.extend(pose_row(&r.ee));
    row.extend(&r.q);
    row
}

fn solve_header(dof: usize) -> Vec<String> {
    let mut h = names(&[
        "index",
        "converged",
        "hard",
        "geometric",
        "x",
        "y",
        "z",
        "qw",
        "qx",
        "qy",
        "qz",
    ]);
    h.extend((0..dof).map(|i| format!("q{i}")));
    h
}

fn plot_data(input: &Path, out: &Path) -> Outcome {
    let text = read_text(input)?;
    let (header, rows) = if let Ok(rec) = Recording::parse(&text) {
        recording_table(&rec)
    } else {
        let v: serde_json::Value = geoskill::io::from_json(&text)?;
        let has = |k: &str| v.get(k).is_some();
        let conv = |e: serde_json::Error| Failure::from(Error::Schema(e.to_string()));
        if has("poses") {
            let s: PoseSet = serde_json::from_value(v).map_err(conv)?;
            let rows = s.poses.iter().enumerate().map(|(i, p)| {
                let mut r = vec![i as f64];
                r.extend(pose_row(p));
                r
            });
            (
                names(&["index", "x", "y", "z", "qw", "qx", "qy", "qz"]),
                rows.collect(),
            )
        } else if has("waypoints") {
            let t: TrajectoryResult = serde_json::from_value(v).map_err(conv)?;
            let dof = t.waypoints.first().map_or(0, |w| w.q.len());
            (
                solve_header(dof),
                t.waypoints
                    .iter()
                    .enumerate()
                    .map(|(i, w)| solve_row(i, w))
                    .collect(),
            )
        } else if has("q") {
            let r: SolveResult = serde_json::from_value(v).map_err(conv)?;
            (solve_header(r.q.len()), vec![solve_row(0, &r)])
        } else if has("nullspace") {
            let s: SkillModel = serde_json::from_value(v).map_err(conv)?;
            skill_table(&s)
        } else if has("cost_history") {
            let r: FitReport = serde_json::from_value(v).map_err(conv)?;
            let mut rows = vec![];
            rows.extend(
                r.residuals
                    .iter()
                    .enumerate()
                    .map(|(i, x)| vec![0.0, i as f64, *x]),
            );
            rows.extend(
                r.cost_history
                    .iter()
                    .enumerate()
                    .map(|(i, x)| vec![1.0, i as f64, *x]),
            );
            rows.extend(
                r.table
                    .iter()
                    .enumerate()
                    .map(|(i, row)| vec![2.0, i as f64, row.rms.unwrap_or(f64::NAN)]),
            );
            (names(&["series", "index", "value"]), rows)
        } else {
            return Err(Error::Schema("unrecognized artifact".into()).into());
        }
    };
    write_text(out, &csv_of(&header, &rows)?)?;
    Ok(())
}

fn template(skill: &str, sets: &[String], out: &Path) -> Outcome {
    let params: BTreeMap<String, f64> = parse_sets(sets)?.into_iter().collect();
    let s = skill_template(skill, &demo_scene(), &params)?;
    write_json(out, &s)?;
    Ok(())
}

fn defaults(scene: Option<&Path>, chain: Option<&Path>) -> Outcome {
    if scene.is_none() && chain.is_none() {
        return Err(usage("give --scene and/or --chain"));
    }
    if let Some(p) = scene {
        write_json(p, &demo_scene())?;
    }
    if let Some(p) = chain {
        write_json(p, &KinematicChain::ur5e())?;
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::DemoGen { spec, out, seed } => demo_gen(&spec, &out, seed),
        Command::Fit {
            recording,
            fixed,
            constrained,
            tau,
            lambda,
            selector,
            name,
            report,
            out,
        } => fit(
            &recording,
            &fixed,
            &constrained,
            tau,
            lambda,
            selector.as_deref(),
            name.as_deref(),
            report.as_deref(),
            &out,
        ),
        Command::Infer {
            skillfile,
            scene,
            pos_tol,
            ang_tol,
            out,
        } => infer(&skillfile, &scene, pos_tol, ang_tol, &out),
        Command::Edit {
            skillfile,
            sets,
            out,
        } => edit(&skillfile, &sets, &out),
        Command::Sample {
            skillfile,
            count,
            seed,
            out,
        } => sample(&skillfile, count, seed, &out),
        Command::Solve {
            skillfile,
            chain,
            scene,
            obstacles,
            priorities,
            seed,
            out,
        } => run_solve(
            &skillfile,
            &chain,
            &scene,
            obstacles.as_deref(),
            priorities.as_deref(),
            seed,
            &out,
        ),
        Command::PlotData { input, out } => plot_data(&input, &out),
        Command::Template { skill, sets, out } => template(&skill, &sets, &out),
        Command::Defaults { scene, chain } => defaults(scene.as_deref(), chain.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let report = serde_json::json!({ "error": f.kind, "message": f.message });
            eprintln!("{report}");
            ExitCode::from(f.code)
        }
    }
}
